//! Plain `key = value` run configuration shared by every subcommand.
//!
//! ```text
//! # finite-mass hydrogen
//! e = 1
//! m1 = 1
//! m2 = 1836.15267      # or "inf"
//! B_eff = 1
//! P_eff = 50
//! d = 0
//! ```
//!
//! Missing keys fall back to finite-mass Hydrogen with no field.

use std::path::Path;

use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::units::{parse_rational, FieldConfig, Mass, SystemSpec, PROTON_MASS};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: SystemSpec,
    pub b_eff: f64,
    pub p_eff: f64,
    pub d: f64,
    /// Normalized `key=value` pairs in the order they were resolved.
    pub resolved: Vec<(String, String)>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::parse("").expect("empty config is valid")
    }
}

fn number(key: &str, value: &str) -> Result<f64> {
    let r = parse_rational(value).map_err(|_| Error::Config(format!("{key}: not a number: {value:?}")))?;
    r.to_f64()
        .ok_or_else(|| Error::Config(format!("{key}: out of range: {value:?}")))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut e = None;
        let mut m1 = None;
        let mut m2 = None;
        let mut b_eff = None;
        let mut p_eff = None;
        let mut d = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got {raw:?}", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let slot = match key {
                "e" => &mut e,
                "m1" => &mut m1,
                "m2" => &mut m2,
                "B_eff" | "b_eff" | "B" => &mut b_eff,
                "P_eff" | "p_eff" | "P" => &mut p_eff,
                "d" => &mut d,
                other => return Err(Error::Config(format!("line {}: unknown key {other:?}", lineno + 1))),
            };
            if slot.is_some() {
                return Err(Error::Config(format!("line {}: duplicate key {key:?}", lineno + 1)));
            }
            *slot = Some(value.to_string());
        }

        let e_txt = e.unwrap_or_else(|| "1".into());
        let m1_txt = m1.unwrap_or_else(|| "1".into());
        let m2_txt = m2.unwrap_or_else(|| PROTON_MASS.into());
        let exact = |key: &str, v: &str| -> Result<BigRational> {
            parse_rational(v).map_err(|_| Error::Config(format!("{key}: not a number: {v:?}")))
        };
        let mass2 = match m2_txt.to_ascii_lowercase().as_str() {
            "inf" | "infinity" => Mass::Infinite,
            _ => Mass::Finite(exact("m2", &m2_txt)?),
        };
        let system = SystemSpec::from_rationals(exact("e", &e_txt)?, exact("m1", &m1_txt)?, mass2)
            .map_err(|err| Error::Config(err.to_string()))?;

        let b_txt = b_eff.unwrap_or_else(|| "0".into());
        let p_txt = p_eff.unwrap_or_else(|| "0".into());
        let d_txt = d.unwrap_or_else(|| "0".into());
        let b_eff = number("B_eff", &b_txt)?;
        let p_eff = number("P_eff", &p_txt)?;
        let d = number("d", &d_txt)?;
        FieldConfig::new(&system, b_eff, p_eff, d).map_err(|err| Error::Config(err.to_string()))?;

        let resolved = [
            ("e", e_txt),
            ("m1", m1_txt),
            ("m2", m2_txt),
            ("B_eff", b_txt),
            ("P_eff", p_txt),
            ("d", d_txt),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        Ok(Self {
            system,
            b_eff,
            p_eff,
            d,
            resolved,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|err| Error::Config(format!("{}: {err}", path.display())))?;
        Self::parse(&text).map_err(|err| match err {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn fields(&self) -> Result<FieldConfig> {
        FieldConfig::new(&self.system, self.b_eff, self.p_eff, self.d)
    }

    /// Same system with a different field and momentum.
    pub fn fields_at(&self, b_eff: f64, p_eff: f64, d: f64) -> Result<FieldConfig> {
        FieldConfig::new(&self.system, b_eff, p_eff, d)
    }
}
