//! Two-body system description, field conventions and scaling relations.
//!
//! Internally everything is in atomic-like units with ħ = c = 1 and masses in
//! electron masses. The magnetic field is entered in *effective* units where
//! `B_eff = 1` corresponds to 9.3918×10⁹ G, i.e. `B_int = 4 m_r² e³ B_eff`.
//! The center-of-mass momentum is used as given (`P_int = P_eff`).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Field strength of one effective unit, in gauss.
pub const B0_GAUSS: f64 = 9.3918e9;

/// Proton mass in electron masses, as used for the finite-mass Hydrogen preset.
pub const PROTON_MASS: &str = "1836.15267";

/// Mass of the second particle. The infinite case is an explicit limit, not a
/// large float, so that `μ1`, `μ` and `q_w` stay exact.
#[derive(Debug, Clone, PartialEq)]
pub enum Mass {
    Finite(BigRational),
    Infinite,
}

/// Charges and masses of the pair `(e, m1), (-e, m2)` with all derived ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    charge: BigRational,
    m1: BigRational,
    m2: Mass,
    e: f64,
    m1_f: f64,
    m2_f: f64,
    inv_total_mass: f64,
    reduced_mass: f64,
    mu1: f64,
    mu2: f64,
}

/// Exact rational view of a system, used by the perturbative coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSystem {
    pub e: BigRational,
    pub reduced_mass: BigRational,
    /// `1/M`, zero in the infinite-mass limit.
    pub inv_total_mass: BigRational,
    /// `μ = μ1 − μ2`.
    pub mu: BigRational,
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parse a decimal literal (`"1836.15267"`, `"2.5e-3"`, `"3/4"`) exactly.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    let bad = || Error::InvalidParameter(format!("not a number: {text:?}"));
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("{int_part}{frac_part}0").parse().map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32 - 1;
    let ten = BigRational::from_integer(BigInt::from(10));
    let mut value = BigRational::from_integer(all);
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Ok(if negative { -value } else { value })
}

fn rational_from_f64(x: f64, what: &str) -> Result<BigRational> {
    BigRational::from_float(x)
        .ok_or_else(|| Error::InvalidParameter(format!("{what} must be finite, got {x}")))
}

impl SystemSpec {
    /// Build a system from exact inputs.
    pub fn from_rationals(charge: BigRational, m1: BigRational, m2: Mass) -> Result<Self> {
        if !charge.is_positive() {
            return Err(Error::InvalidParameter(format!("charge must be positive, got {charge}")));
        }
        if !m1.is_positive() {
            return Err(Error::InvalidParameter(format!("m1 must be positive, got {m1}")));
        }
        let (m2_f, inv_total_mass, reduced_mass, mu1, mu2) = match &m2 {
            Mass::Finite(m2r) => {
                if !m2r.is_positive() {
                    return Err(Error::InvalidParameter(format!("m2 must be positive, got {m2r}")));
                }
                let total = &m1 + m2r;
                (
                    ratio_to_f64(m2r),
                    ratio_to_f64(&total.recip()),
                    ratio_to_f64(&(&m1 * m2r / &total)),
                    ratio_to_f64(&(&m1 / &total)),
                    ratio_to_f64(&(m2r / &total)),
                )
            }
            Mass::Infinite => (f64::INFINITY, 0.0, ratio_to_f64(&m1), 0.0, 1.0),
        };
        Ok(Self {
            e: ratio_to_f64(&charge),
            m1_f: ratio_to_f64(&m1),
            charge,
            m1,
            m2,
            m2_f,
            inv_total_mass,
            reduced_mass,
            mu1,
            mu2,
        })
    }

    /// Finite-mass Hydrogen, `m2` = proton mass.
    pub fn hydrogen() -> Self {
        let m2 = parse_rational(PROTON_MASS).expect("proton mass literal");
        Self::from_rationals(BigRational::one(), BigRational::one(), Mass::Finite(m2))
            .expect("hydrogen preset")
    }

    /// Hydrogen with an infinitely heavy nucleus.
    pub fn hydrogen_static() -> Self {
        Self::from_rationals(BigRational::one(), BigRational::one(), Mass::Infinite)
            .expect("static hydrogen preset")
    }

    /// Positronium, equal unit masses.
    pub fn positronium() -> Self {
        Self::from_rationals(
            BigRational::one(),
            BigRational::one(),
            Mass::Finite(BigRational::one()),
        )
        .expect("positronium preset")
    }

    /// The same system with the particles exchanged.
    pub fn swapped(&self) -> Result<Self> {
        match &self.m2 {
            Mass::Finite(m2) => Self::from_rationals(
                self.charge.clone(),
                m2.clone(),
                Mass::Finite(self.m1.clone()),
            ),
            Mass::Infinite => Err(Error::InvalidParameter(
                "cannot exchange an infinitely heavy particle into the first slot".into(),
            )),
        }
    }

    pub fn e(&self) -> f64 {
        self.e
    }
    pub fn m1(&self) -> f64 {
        self.m1_f
    }
    /// `f64::INFINITY` in the infinite-mass limit.
    pub fn m2(&self) -> f64 {
        self.m2_f
    }
    pub fn total_mass(&self) -> f64 {
        if self.is_infinite_mass() {
            f64::INFINITY
        } else {
            self.m1_f + self.m2_f
        }
    }
    /// `1/M`, exactly zero in the infinite-mass limit.
    pub fn inv_total_mass(&self) -> f64 {
        self.inv_total_mass
    }
    pub fn reduced_mass(&self) -> f64 {
        self.reduced_mass
    }
    pub fn mu1(&self) -> f64 {
        self.mu1
    }
    pub fn mu2(&self) -> f64 {
        self.mu2
    }
    /// `μ = μ1 − μ2`.
    pub fn mu(&self) -> f64 {
        self.mu1 - self.mu2
    }
    /// Weighted charge `q_w = e (μ2 − μ1)`.
    pub fn q_w(&self) -> f64 {
        self.e * (self.mu2 - self.mu1)
    }
    pub fn is_infinite_mass(&self) -> bool {
        matches!(self.m2, Mass::Infinite)
    }
    pub fn mass2(&self) -> &Mass {
        &self.m2
    }

    pub fn exact(&self) -> ExactSystem {
        let (reduced_mass, inv_total_mass, mu) = match &self.m2 {
            Mass::Finite(m2) => {
                let total = &self.m1 + m2;
                (
                    &self.m1 * m2 / &total,
                    total.recip(),
                    (&self.m1 - m2) / &total,
                )
            }
            Mass::Infinite => (self.m1.clone(), BigRational::zero(), -BigRational::one()),
        };
        ExactSystem {
            e: self.charge.clone(),
            reduced_mass,
            inv_total_mass,
            mu,
        }
    }
}

/// Build a system from floating-point inputs; `m2 = None` is the infinite-mass limit.
pub fn derive_system(e: f64, m1: f64, m2: Option<f64>) -> Result<SystemSpec> {
    if !(e > 0.0) || !(m1 > 0.0) || m2.is_some_and(|m| !(m > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "charge and masses must be strictly positive (e={e}, m1={m1}, m2={m2:?})"
        )));
    }
    let m2 = match m2 {
        Some(m) if m.is_infinite() => Mass::Infinite,
        Some(m) => Mass::Finite(rational_from_f64(m, "m2")?),
        None => Mass::Infinite,
    };
    SystemSpec::from_rationals(rational_from_f64(e, "e")?, rational_from_f64(m1, "m1")?, m2)
}

/// Magnetic field, center-of-mass momentum (along ŷ) and gauge-center parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldConfig {
    pub b_eff: f64,
    pub p_eff: f64,
    pub d: f64,
    pub b_int: f64,
    pub p_int: f64,
}

/// Conversion factor `B_int / B_eff = 4 m_r² e³`.
pub fn field_unit(sys: &SystemSpec) -> f64 {
    4.0 * sys.reduced_mass().powi(2) * sys.e().powi(3)
}

impl FieldConfig {
    /// Fields given in effective units, converted for `sys`.
    pub fn new(sys: &SystemSpec, b_eff: f64, p_eff: f64, d: f64) -> Result<Self> {
        if !(b_eff >= 0.0) || !b_eff.is_finite() {
            return Err(Error::InvalidParameter(format!("B_eff must be >= 0, got {b_eff}")));
        }
        if !(p_eff >= 0.0) || !p_eff.is_finite() {
            return Err(Error::InvalidParameter(format!("P_eff must be >= 0, got {p_eff}")));
        }
        if !(0.0..=1.0).contains(&d) {
            return Err(Error::InvalidParameter(format!("d must lie in [0, 1], got {d}")));
        }
        let unit = field_unit(sys);
        Ok(Self {
            b_eff,
            p_eff,
            d,
            b_int: unit * b_eff,
            p_int: p_eff,
        })
    }

    /// Fields given directly in internal units.
    pub fn from_internal(sys: &SystemSpec, b_int: f64, p_int: f64, d: f64) -> Result<Self> {
        Self::new(sys, b_int / field_unit(sys), p_int, d).map(|mut cfg| {
            cfg.b_int = b_int;
            cfg
        })
    }

    pub fn with_momentum(self, sys: &SystemSpec, p_eff: f64) -> Result<Self> {
        Self::new(sys, self.b_eff, p_eff, self.d)
    }

    pub fn with_d(self, d: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&d) {
            return Err(Error::InvalidParameter(format!("d must lie in [0, 1], got {d}")));
        }
        Ok(Self { d, ..self })
    }
}

/// Recompute the internal field and momentum of `cfg` for `sys`.
pub fn to_internal(cfg: FieldConfig, sys: &SystemSpec) -> Result<FieldConfig> {
    FieldConfig::new(sys, cfg.b_eff, cfg.p_eff, cfg.d)
}

/// Mapping between two systems with equal `|μ2 − μ1|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleMap {
    /// Ratio of inverse Bohr-type lengths, `ẽ² m̃_r / (e² m_r)`.
    pub a: f64,
    pub source: SystemSpec,
    pub target: SystemSpec,
    pub b_source: f64,
    pub p_source: f64,
    pub b_target: f64,
    pub p_target: f64,
    /// `ẽ⁴ m̃_r / (e⁴ m_r)`; energies (with the free CMS motion removed) scale by this.
    pub energy_ratio: f64,
}

const SCALE_MU_TOL: f64 = 1e-12;

/// Map internal field `b` and momentum `p` of `src` onto the equivalent point of `tgt`.
pub fn scale_system(src: &SystemSpec, b: f64, p: f64, tgt: &SystemSpec) -> Result<ScaleMap> {
    let (mu_s, mu_t) = (src.mu().abs(), tgt.mu().abs());
    if (mu_s - mu_t).abs() > SCALE_MU_TOL {
        return Err(Error::ScalingIncompatible {
            source_mu: mu_s,
            target_mu: mu_t,
        });
    }
    let (e, et) = (src.e(), tgt.e());
    let (mr, mrt) = (src.reduced_mass(), tgt.reduced_mass());
    // with |μ| equal, μ1 μ2 agrees on both sides and M̃/M = m̃_r/m_r (also in the M → ∞ limit)
    let mass_ratio = mrt / mr;
    Ok(ScaleMap {
        a: et * et * mrt / (e * e * mr),
        source: src.clone(),
        target: tgt.clone(),
        b_source: b,
        p_source: p,
        b_target: b * et.powi(3) * mrt * mrt / (e.powi(3) * mr * mr),
        p_target: p * mass_ratio * et * et / (e * e),
        energy_ratio: et.powi(4) * mrt / (e.powi(4) * mr),
    })
}

impl ScaleMap {
    /// The inverse mapping.
    pub fn inverse(&self) -> Result<ScaleMap> {
        scale_system(&self.target, self.b_target, self.p_target, &self.source)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn infinite_mass_limit() {
        let s = derive_system(1.0, 1.0, None).unwrap();
        assert_eq!(s.reduced_mass(), 1.0);
        assert_eq!(s.mu(), -1.0);
        assert_eq!(s.q_w(), 1.0);
        assert_eq!(s.inv_total_mass(), 0.0);
        assert!(s.total_mass().is_infinite());
    }

    #[test]
    fn equal_masses() {
        let s = derive_system(1.0, 1.0, Some(1.0)).unwrap();
        assert_eq!(s.reduced_mass(), 0.5);
        assert_eq!(s.total_mass(), 2.0);
        assert_eq!(s.mu(), 0.0);
        assert_eq!(s.q_w(), 0.0);
    }

    #[test]
    fn finite_hydrogen() {
        let s = SystemSpec::hydrogen();
        assert_relative_eq!(s.reduced_mass(), 0.999455, epsilon = 1e-6);
        assert_relative_eq!(s.total_mass(), 1837.15267, epsilon = 1e-9);
        assert_relative_eq!(-2.0 * s.reduced_mass(), -1.9989, epsilon = 1e-4);
        assert_relative_eq!(s.mu1() + s.mu2(), 1.0, epsilon = 1e-15);
        assert!(s.reduced_mass() <= s.m1().min(s.m2()));
    }

    #[test]
    fn rejects_non_positive() {
        assert!(derive_system(0.0, 1.0, Some(1.0)).is_err());
        assert!(derive_system(1.0, -1.0, Some(1.0)).is_err());
        assert!(derive_system(1.0, 1.0, Some(0.0)).is_err());
        assert!(derive_system(f64::NAN, 1.0, Some(1.0)).is_err());
    }

    #[test]
    fn exchange_flips_weighted_charge() {
        let h = SystemSpec::hydrogen();
        let s = h.swapped().unwrap();
        assert_relative_eq!(s.q_w(), -h.q_w(), epsilon = 1e-15);
        assert_relative_eq!(s.reduced_mass(), h.reduced_mass(), epsilon = 1e-15);
        assert_relative_eq!(s.total_mass(), h.total_mass(), epsilon = 1e-12);
    }

    #[test]
    fn parses_decimals_exactly() {
        let r = parse_rational("1836.15267").unwrap();
        assert_eq!(r, BigRational::new(183615267.into(), 100000.into()));
        assert_eq!(parse_rational("2.5e-3").unwrap(), BigRational::new(1.into(), 400.into()));
        assert_eq!(parse_rational("-3/4").unwrap(), BigRational::new((-3).into(), 4.into()));
        assert_eq!(parse_rational("12").unwrap(), BigRational::from_integer(12.into()));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn internal_field_conversion() {
        let h = SystemSpec::hydrogen();
        let cfg = FieldConfig::new(&h, 1.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(cfg.b_int, 3.99564, epsilon = 1e-5);
        assert_eq!(cfg.b_int / cfg.b_eff, 4.0 * h.reduced_mass().powi(2));
        let zero = FieldConfig::new(&h, 0.0, 3.0, 0.0).unwrap();
        assert_eq!(zero.b_int, 0.0);
        assert_eq!(zero.p_int, 3.0);
        let back = FieldConfig::from_internal(&h, cfg.b_int, cfg.p_int, 0.0).unwrap();
        assert_relative_eq!(back.b_eff, 1.0, epsilon = 1e-15);
        assert!(FieldConfig::new(&h, -1.0, 0.0, 0.0).is_err());
        assert!(FieldConfig::new(&h, 1.0, 0.0, 1.5).is_err());
    }

    #[test]
    fn scale_identity_and_charge_doubling() {
        let h = SystemSpec::hydrogen();
        let id = scale_system(&h, 2.0, 3.0, &h).unwrap();
        assert_eq!(id.a, 1.0);
        assert_eq!(id.energy_ratio, 1.0);
        assert_eq!(id.b_target, 2.0);
        assert_eq!(id.p_target, 3.0);

        let h2 = derive_system(2.0, 1.0, Some(1836.15267)).unwrap();
        let map = scale_system(&h, 1.0, 1.0, &h2).unwrap();
        assert_relative_eq!(map.a, 4.0, epsilon = 1e-12);
        assert_relative_eq!(map.b_target, 8.0, epsilon = 1e-12);
        assert_relative_eq!(map.p_target, 4.0, epsilon = 1e-12);
        assert_relative_eq!(map.energy_ratio, 16.0, epsilon = 1e-12);
    }

    #[test]
    fn scale_rejects_mass_ratio_mismatch() {
        let err = scale_system(&SystemSpec::hydrogen(), 1.0, 1.0, &SystemSpec::positronium());
        assert!(matches!(err, Err(Error::ScalingIncompatible { .. })));
    }
}
