//! Finite-difference eigensolver for the complex relative-motion Hamiltonian,
//! used to cross-check the variational energies.

pub mod calibration;
pub mod eigen;
pub mod grid;

pub use calibration::coulomb_constant;
pub use eigen::{gaussian_start, ground_state, EigenOptions, GroundState};
pub use grid::{assemble, assemble_with_budget, CoulombTreatment, DiscreteOperator, GridSpec, Localization};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::units::{FieldConfig, SystemSpec};

/// Richardson estimate from a coarse-to-fine sequence of energies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolation {
    pub value: f64,
    /// `|value − finest|`, a rough error scale.
    pub gap: f64,
    /// Set when the sequence does not converge monotonically at second
    /// order; `value` is then the finest energy.
    pub warning: bool,
}

/// `E = (4E_{h/2} − E_h)/3` from the last two levels. With three or more levels
/// the successive differences must keep their sign and shrink.
pub fn extrapolate(energies: &[f64]) -> Result<Extrapolation> {
    let n = energies.len();
    if n == 0 || energies.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidParameter("extrapolation needs finite energies".into()));
    }
    let finest = energies[n - 1];
    if n == 1 {
        return Ok(Extrapolation { value: finest, gap: 0.0, warning: false });
    }
    let diffs: Vec<f64> = energies.windows(2).map(|w| w[1] - w[0]).collect();
    let monotone = diffs
        .windows(2)
        .all(|d| d[0] * d[1] > 0.0 && d[1].abs() < d[0].abs());
    if !monotone {
        return Ok(Extrapolation { value: finest, gap: 0.0, warning: true });
    }
    let value = (4.0 * finest - energies[n - 2]) / 3.0;
    Ok(Extrapolation { value, gap: (value - finest).abs(), warning: false })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleLevel {
    pub grid: GridSpec,
    pub energy: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRun {
    pub levels: Vec<OracleLevel>,
    pub extrapolation: Extrapolation,
}

impl OracleRun {
    pub fn energy(&self) -> f64 {
        self.extrapolation.value
    }

    /// Discretization tolerance: the extrapolation gap, floored at `1e-4`.
    pub fn tolerance(&self) -> f64 {
        self.extrapolation.gap.max(1e-4)
    }
}

/// Start width: the smaller of the magnetic length and the Coulomb radius.
fn start_width(sys: &SystemSpec, fields: &FieldConfig) -> f64 {
    let e = sys.e();
    let coulomb = 1.0 / (sys.reduced_mass() * e * e);
    if fields.b_int > 0.0 {
        (2.0 / (e * fields.b_int)).sqrt().min(coulomb)
    } else {
        coulomb
    }
}

/// Nearest-cell injection from a grid onto its refinement.
fn prolong(coarse: &GridSpec, v: &[Complex64]) -> Vec<Complex64> {
    let fine_ny = 2 * coarse.ny;
    let mut out = vec![Complex64::default(); 4 * v.len()];
    for i in 0..coarse.nx {
        for j in 0..coarse.ny {
            let c = v[i * coarse.ny + j];
            for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                out[(2 * i + a) * fine_ny + 2 * j + b] = c;
            }
        }
    }
    out
}

/// Ground state on `grid` and `levels − 1` successive refinements, then
/// Richardson extrapolation. The start vector is a Gaussian at the grid center.
pub fn run(
    sys: &SystemSpec,
    fields: &FieldConfig,
    grid: &GridSpec,
    levels: usize,
    opts: &EigenOptions,
) -> Result<OracleRun> {
    if levels == 0 {
        return Err(Error::InvalidParameter("at least one grid level is needed".into()));
    }
    let mut grids = vec![*grid];
    for _ in 1..levels {
        let g = grids[grids.len() - 1].refined();
        g.check_budget(grid::DEFAULT_BUDGET_BYTES)?;
        grids.push(g);
    }
    let x_center = grid.x(0) - 0.5 * grid.h + 0.5 * grid.nx as f64 * grid.h;
    let mut out = Vec::with_capacity(levels);
    let mut prev: Option<(GridSpec, Vec<Complex64>)> = None;
    for g in grids {
        let op = assemble(sys, fields, &g)?;
        let start = match &prev {
            Some((pg, v)) => prolong(pg, v),
            None => gaussian_start(&op, x_center, start_width(sys, fields)),
        };
        let gs = ground_state(&op, start, opts);
        out.push(OracleLevel {
            grid: g,
            energy: gs.energy,
            residual: gs.residual,
            iterations: gs.iterations,
            converged: gs.converged,
        });
        prev = Some((g, gs.vector));
    }
    let energies: Vec<f64> = out.iter().map(|l| l.energy).collect();
    Ok(OracleRun {
        extrapolation: extrapolate(&energies)?,
        levels: out,
    })
}
