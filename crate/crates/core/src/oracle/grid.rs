//! Finite-difference discretization of the full complex relative-motion
//! Hamiltonian in the `d`-gauge,
//!
//! ```text
//! h_d = (p − q_w A_{ρ−ρ0})²/2m_r + ((P − eBx)² + (eBy)²)/2M − e²/ρ,
//! A_{ρ−ρ0} = (B/2)(−y, x − x0)
//! ```
//!
//! on a uniform cell-centered grid whose lattice has the origin at a cell
//! corner, so no node sits on the Coulomb singularity.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::stationary_points;
use crate::units::{FieldConfig, SystemSpec};

/// Default memory budget for one solve.
pub const DEFAULT_BUDGET_BYTES: usize = 2 << 30;
/// Rough bytes per node for the operator plus eigensolver work vectors.
const BYTES_PER_NODE: usize = 200;

/// How the four nodes next to the origin see the Coulomb potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoulombTreatment {
    /// Plain point values `−e²/ρ`.
    Point,
    /// Cell average of `−e²/ρ` over the four cells touching the origin.
    CellAverage,
    /// `−e² c/h` with `c` tuned so the field-free grid reproduces `−2 m_r e⁴`.
    Calibrated,
    /// Coulomb term removed (test hook).
    Off,
}

/// Where the auto-sized grid is placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Localization {
    /// Around the Coulomb well at the origin.
    Coulomb,
    /// Around the outer minimum of the effective potential.
    Magnetic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    /// Lattice index of the left edge: the domain starts at `x = i0·h`.
    pub i0: i64,
    /// Lattice index of the bottom edge.
    pub j0: i64,
    pub coulomb: CoulombTreatment,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, h: f64, i0: i64, j0: i64, coulomb: CoulombTreatment) -> Result<Self> {
        if nx < 4 || ny < 4 || nx % 2 == 1 || ny % 2 == 1 {
            return Err(Error::InvalidParameter(format!("node counts {nx}×{ny} must be even and ≥ 4")));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("spacing {h} must be positive")));
        }
        Ok(Self { nx, ny, h, i0, j0, coulomb })
    }

    /// Square cells on `[x_lo, x_lo + nx h] × [−ny h/2, ny h/2]`, with `x_lo` snapped to the lattice.
    pub fn centered_at(x_center: f64, half_width: f64, n: usize, coulomb: CoulombTreatment) -> Result<Self> {
        let n = n + n % 2;
        let h = 2.0 * half_width / n as f64;
        let i0 = ((x_center - half_width) / h).round() as i64;
        Self::new(n, n, h, i0, -(n as i64 / 2), coulomb)
    }

    /// Square domain sized from the field: half-width `min(√(80/eB), 10/(m_r e²)) + 1`,
    /// placed on the Coulomb well or on the outer minimum.
    pub fn auto(
        sys: &SystemSpec,
        fields: &FieldConfig,
        n: usize,
        place: Localization,
        coulomb: CoulombTreatment,
    ) -> Result<Self> {
        let e = sys.e();
        let eb = e * fields.b_int;
        let coulomb_extent = 10.0 / (sys.reduced_mass() * e * e);
        let magnetic_extent = if eb > 0.0 { (80.0 / eb).sqrt() } else { f64::INFINITY };
        match place {
            Localization::Coulomb => Self::centered_at(0.0, coulomb_extent.min(magnetic_extent) + 1.0, n, coulomb),
            Localization::Magnetic => {
                let cp = stationary_points(sys, fields)?;
                let x = cp.x_min.ok_or(Error::OutOfRegime {
                    p: fields.p_int,
                    p_saddle: cp.p_saddle,
                })?;
                Self::centered_at(x, magnetic_extent + 1.0, n, coulomb)
            }
        }
    }

    /// Same domain with half the spacing.
    pub fn refined(&self) -> Self {
        Self {
            nx: 2 * self.nx,
            ny: 2 * self.ny,
            h: 0.5 * self.h,
            i0: 2 * self.i0,
            j0: 2 * self.j0,
            ..*self
        }
    }

    /// Shift by whole cells.
    pub fn translated(&self, di: i64, dj: i64) -> Self {
        Self {
            i0: self.i0 + di,
            j0: self.j0 + dj,
            ..*self
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x(&self, i: usize) -> f64 {
        (self.i0 as f64 + i as f64 + 0.5) * self.h
    }

    pub fn y(&self, j: usize) -> f64 {
        (self.j0 as f64 + j as f64 + 0.5) * self.h
    }

    pub fn required_bytes(&self) -> usize {
        self.len() * BYTES_PER_NODE
    }

    pub fn check_budget(&self, budget_bytes: usize) -> Result<()> {
        let required = self.required_bytes();
        if required > budget_bytes {
            let max_nodes = budget_bytes / BYTES_PER_NODE;
            let ratio = self.ny as f64 / self.nx as f64;
            let suggested = ((max_nodes as f64 / ratio).sqrt() as usize) & !1;
            return Err(Error::GridTooLarge {
                required_bytes: required,
                budget_bytes,
                suggested_nx: suggested,
            });
        }
        Ok(())
    }

    /// Whether the four nodes around the origin lie inside the grid.
    fn origin_cells(&self) -> Option<[(usize, usize); 4]> {
        let ci = -self.i0;
        let cj = -self.j0;
        if ci < 1 || cj < 1 || ci >= self.nx as i64 || cj >= self.ny as i64 {
            return None;
        }
        let (ci, cj) = (ci as usize, cj as usize);
        Some([(ci - 1, cj - 1), (ci - 1, cj), (ci, cj - 1), (ci, cj)])
    }
}

/// Sparse Hermitian operator: a real diagonal plus nearest-neighbor links.
/// Link coefficients along `x` depend only on the row's `y` and vice versa.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    pub grid: GridSpec,
    pub d: f64,
    pub gauge_center: f64,
    pub reduced_mass: f64,
    /// Potential plus the kinetic diagonal, index `i·ny + j`.
    pub diag: Vec<f64>,
    /// Coefficient of `ψ_{i+1,j}` in row `(i, j)`, per `j`.
    pub link_x: Vec<Complex64>,
    /// Coefficient of `ψ_{i,j+1}` in row `(i, j)`, per `i`.
    pub link_y: Vec<Complex64>,
    /// Constant used for the origin nodes when calibrated.
    pub coulomb_constant: Option<f64>,
}

/// Cell average of `1/ρ` over `[0, h]²` times `h`: `2 ln(1 + √2)`.
pub fn cell_average_constant() -> f64 {
    2.0 * (1.0 + 2f64.sqrt()).ln()
}

/// Assemble `h_d` with the gauge center `d·P/(eB)` taken from `fields.d`.
pub fn assemble(sys: &SystemSpec, fields: &FieldConfig, grid: &GridSpec) -> Result<DiscreteOperator> {
    assemble_with_budget(sys, fields, grid, DEFAULT_BUDGET_BYTES)
}

pub fn assemble_with_budget(
    sys: &SystemSpec,
    fields: &FieldConfig,
    grid: &GridSpec,
    budget_bytes: usize,
) -> Result<DiscreteOperator> {
    grid.check_budget(budget_bytes)?;
    let coulomb_constant = match grid.coulomb {
        CoulombTreatment::Calibrated if grid.origin_cells().is_some() => {
            Some(super::calibration::coulomb_constant(grid.h * sys.reduced_mass() * sys.e() * sys.e())?)
        }
        CoulombTreatment::CellAverage => Some(cell_average_constant()),
        _ => None,
    };
    Ok(assemble_with_constant(sys, fields, grid, coulomb_constant))
}

pub(crate) fn assemble_with_constant(
    sys: &SystemSpec,
    fields: &FieldConfig,
    grid: &GridSpec,
    coulomb_constant: Option<f64>,
) -> DiscreteOperator {
    let mr = sys.reduced_mass();
    let e = sys.e();
    let b = fields.b_int;
    let p = fields.p_int;
    let q = sys.q_w();
    let h = grid.h;
    let x0 = if b > 0.0 { fields.d * p / (e * b) } else { 0.0 };
    let t = 1.0 / (2.0 * mr * h * h);
    let inv_2m = 0.5 * sys.inv_total_mass();
    let eb = e * b;

    // (i q/m_r) A·∇ with centered differences: forward neighbor gets +i q A/(2 m_r h)
    let link_x = (0..grid.ny)
        .map(|j| Complex64::new(-t, q * (-0.5 * b * grid.y(j)) / (2.0 * mr * h)))
        .collect();
    let link_y = (0..grid.nx)
        .map(|i| Complex64::new(-t, q * (0.5 * b * (grid.x(i) - x0)) / (2.0 * mr * h)))
        .collect();

    let mut diag = vec![0.0; grid.len()];
    for i in 0..grid.nx {
        let x = grid.x(i);
        for j in 0..grid.ny {
            let y = grid.y(j);
            let ax = -0.5 * b * y;
            let ay = 0.5 * b * (x - x0);
            let px = p - eb * x;
            let mut v = 4.0 * t
                + q * q * (ax * ax + ay * ay) / (2.0 * mr)
                + inv_2m * (px * px + eb * eb * y * y);
            if grid.coulomb != CoulombTreatment::Off {
                v -= e * e / x.hypot(y);
            }
            diag[i * grid.ny + j] = v;
        }
    }
    if let (Some(c), Some(cells)) = (coulomb_constant, grid.origin_cells()) {
        if grid.coulomb != CoulombTreatment::Off {
            for (i, j) in cells {
                let k = i * grid.ny + j;
                diag[k] += e * e / grid.x(i).hypot(grid.y(j));
                diag[k] -= e * e * c / h;
            }
        }
    }
    DiscreteOperator {
        grid: *grid,
        d: fields.d,
        gauge_center: x0,
        reduced_mass: mr,
        diag,
        link_x,
        link_y,
        coulomb_constant,
    }
}

impl DiscreteOperator {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `out = H v`.
    pub fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        for i in 0..nx {
            let ly = self.link_y[i];
            let lyc = ly.conj();
            let row = i * ny;
            for j in 0..ny {
                let k = row + j;
                let lx = self.link_x[j];
                let mut acc = v[k] * self.diag[k];
                if i + 1 < nx {
                    acc += lx * v[k + ny];
                }
                if i > 0 {
                    acc += lx.conj() * v[k - ny];
                }
                if j + 1 < ny {
                    acc += ly * v[k + 1];
                }
                if j > 0 {
                    acc += lyc * v[k - 1];
                }
                out[k] = acc;
            }
        }
    }

    /// Matrix element `H[a, b]` for flat indices.
    pub fn entry(&self, a: usize, b: usize) -> Complex64 {
        let ny = self.grid.ny;
        let (ia, ja) = (a / ny, a % ny);
        let (ib, jb) = (b / ny, b % ny);
        if a == b {
            Complex64::new(self.diag[a], 0.0)
        } else if ja == jb && ib == ia + 1 {
            self.link_x[ja]
        } else if ja == jb && ia == ib + 1 {
            self.link_x[ja].conj()
        } else if ia == ib && jb == ja + 1 {
            self.link_y[ia]
        } else if ia == ib && ja == jb + 1 {
            self.link_y[ia].conj()
        } else {
            Complex64::default()
        }
    }

    /// `max |H[a,b] − conj(H[b,a])|` over all stored entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let ny = self.grid.ny;
        let mut worst: f64 = 0.0;
        for a in 0..self.len() {
            let mut check = |b: usize| {
                worst = worst.max((self.entry(a, b) - self.entry(b, a).conj()).norm());
            };
            check(a);
            if a + ny < self.len() {
                check(a + ny);
            }
            if (a + 1) % ny != 0 {
                check(a + 1);
            }
        }
        worst
    }

    /// True when every link is real (no vector potential coupling).
    pub fn is_real(&self) -> bool {
        self.link_x.iter().chain(&self.link_y).all(|c| c.im == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_sits_on_a_corner() {
        let g = GridSpec::centered_at(0.0, 5.0, 64, CoulombTreatment::Point).unwrap();
        let cells = g.origin_cells().unwrap();
        for (i, j) in cells {
            assert!((g.x(i).abs() - 0.5 * g.h).abs() < 1e-12);
            assert!((g.y(j).abs() - 0.5 * g.h).abs() < 1e-12);
        }
        let far = GridSpec::centered_at(300.0, 5.0, 64, CoulombTreatment::Point).unwrap();
        assert!(far.origin_cells().is_none());
    }

    #[test]
    fn field_free_operator_is_real() {
        let sys = SystemSpec::hydrogen();
        let f = FieldConfig::new(&sys, 0.0, 0.0, 0.0).unwrap();
        let g = GridSpec::centered_at(0.0, 4.0, 16, CoulombTreatment::Point).unwrap();
        assert!(assemble(&sys, &f, &g).unwrap().is_real());
    }

    #[test]
    fn hermitian_for_random_configurations() {
        let sys = SystemSpec::hydrogen();
        for (k, (b, p, d)) in [(0.3, 20.0, 0.2), (1.0, 80.0, 0.9), (7.0, 3.0, 0.5)].into_iter().enumerate() {
            let f = FieldConfig::new(&sys, b, p, d).unwrap();
            let g = GridSpec::centered_at(0.5 * k as f64, 3.0, 12, CoulombTreatment::CellAverage).unwrap();
            let op = assemble(&sys, &f, &g).unwrap();
            assert!(!op.is_real());
            assert_eq!(op.hermiticity_defect(), 0.0);
        }
    }

    #[test]
    fn apply_matches_entries() {
        let sys = SystemSpec::positronium();
        let sys2 = crate::units::derive_system(1.0, 1.0, Some(3.0)).unwrap();
        for s in [sys, sys2] {
            let f = FieldConfig::new(&s, 0.8, 4.0, 0.3).unwrap();
            let g = GridSpec::centered_at(0.0, 2.0, 6, CoulombTreatment::Point).unwrap();
            let op = assemble(&s, &f, &g).unwrap();
            let n = op.len();
            let v: Vec<Complex64> = (0..n).map(|k| Complex64::new((k as f64).sin(), (2.0 * k as f64).cos())).collect();
            let mut out = vec![Complex64::default(); n];
            op.apply(&v, &mut out);
            for a in 0..n {
                let dense: Complex64 = (0..n).map(|b| op.entry(a, b) * v[b]).sum();
                assert!((dense - out[a]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let sys = SystemSpec::hydrogen();
        let f = FieldConfig::new(&sys, 1.0, 0.0, 0.0).unwrap();
        let g = GridSpec::centered_at(0.0, 5.0, 1000, CoulombTreatment::Point).unwrap();
        match assemble_with_budget(&sys, &f, &g, 1 << 20) {
            Err(Error::GridTooLarge { suggested_nx, .. }) => {
                assert!(suggested_nx > 0 && suggested_nx < 1000);
                let ok = GridSpec::centered_at(0.0, 5.0, suggested_nx, CoulombTreatment::Point).unwrap();
                assert!(ok.check_budget(1 << 20).is_ok());
            }
            other => panic!("{other:?}"),
        }
    }
}
