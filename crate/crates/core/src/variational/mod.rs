//! Variational ground state with the two-well interpolating trial function.

pub mod functional;
pub mod optimize;
pub mod quadrature;
pub mod simplex;
pub mod trial;

pub use functional::{energy_functional, expectation_rho, gauge_center, EnergyEval, Matrices};
pub use optimize::{optimize, Diagnostics, SeedFamily, Strategy, VariationalResult};
pub use quadrature::QuadratureSpec;
pub use trial::{trial_eval, CoulombPhase, MagneticPhase, TrialParams, WellExpansion};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::units::{FieldConfig, SystemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Centered,
    Decentered,
    Mixed,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Centered => "centered",
            Classification::Decentered => "decentered",
            Classification::Mixed => "mixed",
        }
    }
}

/// Centered when the S-weighted Coulomb weight `C1² S11` is at least 0.9,
/// decentered when at most 0.1.
pub fn classify_weight(w: f64) -> Classification {
    if w >= 0.9 {
        Classification::Centered
    } else if w <= 0.1 {
        Classification::Decentered
    } else {
        Classification::Mixed
    }
}

pub fn classify(result: &VariationalResult) -> Classification {
    classify_weight(result.eval.coulomb_weight)
}

/// One point of a momentum scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub p: f64,
    pub result: VariationalResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcScan {
    pub points: Vec<ScanPoint>,
    /// Last centered and first decentered momentum.
    pub bracket: (f64, f64),
    pub p_c: f64,
    /// Interval where the magnetic-family energy drops below the Coulomb-family energy.
    pub energy_crossing: Option<(f64, f64)>,
}

/// Optimize at each momentum of the ascending grid `p_grid` (effective units)
/// and locate the centered-to-decentered switch.
pub fn scan_pc(sys: &SystemSpec, b_eff: f64, p_grid: &[f64], strategy: &Strategy) -> Result<PcScan> {
    if p_grid.is_empty() || p_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("momentum grid must be non-empty and ascending".into()));
    }
    let points: Vec<ScanPoint> = p_grid
        .par_iter()
        .map(|&p| {
            let fields = FieldConfig::new(sys, b_eff, p, 0.0)?;
            Ok(ScanPoint {
                p,
                result: optimize(None, sys, &fields, strategy)?,
            })
        })
        .collect::<Result<_>>()?;
    let classes: Vec<Classification> = points.iter().map(|s| s.result.classification).collect();
    let first_dec = classes.iter().position(|c| *c == Classification::Decentered);
    let last_cen = first_dec.and_then(|i| classes[..i].iter().rposition(|c| *c == Classification::Centered));
    let (Some(hi), Some(lo)) = (first_dec, last_cen) else {
        return Err(Error::NotBracketed {
            first: classes[0],
            last: classes[classes.len() - 1],
        });
    };
    let bracket = (p_grid[lo], p_grid[hi]);
    let gap = |s: &ScanPoint| {
        let d = &s.result.diagnostics;
        Some(d.decentered_energy? - d.centered_energy?)
    };
    let energy_crossing = points.windows(2).find_map(|w| match (gap(&w[0]), gap(&w[1])) {
        (Some(a), Some(b)) if a > 0.0 && b <= 0.0 => Some((w[0].p, w[1].p)),
        _ => None,
    });
    Ok(PcScan {
        points,
        bracket,
        p_c: 0.5 * (bracket.0 + bracket.1),
        energy_crossing,
    })
}
