//! Origin-node Coulomb constant tuned on the field-free problem.
//!
//! In units `m_r = e = 1` the planar ground state is `E = −2`. For a scaled
//! spacing `hh` the four nodes touching the origin get `−c/hh`, and `c` is
//! chosen so the discrete field-free ground state is exactly `−2`. The same
//! constant, rescaled, is then used with fields switched on.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;

use super::eigen::{gaussian_start, ground_state, EigenOptions};
use super::grid::{assemble_with_constant, cell_average_constant, CoulombTreatment, GridSpec};
use crate::error::{Error, Result};
use crate::units::{FieldConfig, SystemSpec};

/// Half-width of the scaled calibration box; the field-free state decays as `e^{−2ρ}`.
const HALF_WIDTH: f64 = 6.0;
const TARGET: f64 = -2.0;

fn cache() -> &'static Mutex<HashMap<u64, f64>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, f64>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Calibrated constant for scaled spacing `hh = h m_r e²`.
pub fn coulomb_constant(hh: f64) -> Result<f64> {
    if !(hh > 0.0 && hh < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "scaled spacing {hh} outside (0, 1) cannot resolve the Coulomb well"
        )));
    }
    if let Some(c) = cache().lock().unwrap_or_else(|e| e.into_inner()).get(&hh.to_bits()) {
        return Ok(*c);
    }
    let c = solve(hh)?;
    cache().lock().unwrap_or_else(|e| e.into_inner()).insert(hh.to_bits(), c);
    Ok(c)
}

fn solve(hh: f64) -> Result<f64> {
    let sys = SystemSpec::hydrogen_static();
    let fields = FieldConfig::new(&sys, 0.0, 0.0, 0.0)?;
    let n = 2 * (HALF_WIDTH / hh).ceil() as usize;
    let grid = GridSpec::new(n, n, hh, -(n as i64 / 2), -(n as i64 / 2), CoulombTreatment::Calibrated)?;
    grid.check_budget(super::grid::DEFAULT_BUDGET_BYTES)?;
    let opts = EigenOptions { tol: 1e-7, max_iter: 4000 };
    let origin = [(n / 2 - 1, n / 2 - 1), (n / 2 - 1, n / 2), (n / 2, n / 2 - 1), (n / 2, n / 2)];

    let mut c = cell_average_constant();
    let mut start: Vec<Complex64> = Vec::new();
    for _ in 0..30 {
        let op = assemble_with_constant(&sys, &fields, &grid, Some(c));
        let v = if start.is_empty() { gaussian_start(&op, 0.0, 1.0) } else { start };
        let gs = ground_state(&op, v, &opts);
        if !gs.converged {
            return Err(Error::NotConverged(format!("calibration solve at hh={hh} did not converge")));
        }
        // Hellmann–Feynman: dE/dc = −Σ_origin |ψ|² / hh
        let weight: f64 = origin.iter().map(|&(i, j)| gs.vector[i * n + j].norm_sqr()).sum();
        let slope = -weight / hh;
        let gap = gs.energy - TARGET;
        if gap.abs() < 1e-9 {
            return Ok(c);
        }
        c -= gap / slope;
        start = gs.vector;
    }
    Err(Error::NotConverged(format!("calibration at hh={hh} did not settle")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarse_constant() {
        let c = coulomb_constant(0.219).unwrap();
        assert!((c - 1.926).abs() < 5e-3, "{c}");
        assert!(coulomb_constant(2.0).is_err());
    }
}
