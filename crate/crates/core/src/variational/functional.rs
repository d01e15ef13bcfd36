//! Energy functional of the real two-well trial function in the `d`-gauge.
//!
//! For a real trial the gauge-transformed Hamiltonian reduces to
//! `−Δ/2m_r + V_d` with
//!
//! ```text
//! V_d = q_w² B² |ρ − ρ0|²/8m_r + ((P − eBx)² + (eBy)²)/2M − e²/ρ,   ρ0 = (dP/eB, 0)
//! ```
//!
//! because the term linear in the vector potential has zero expectation.

use crate::error::{Error, Result};
use crate::units::{FieldConfig, SystemSpec};

use super::quadrature::{cutoff_radius, partition_weight, Node, Patch, QuadratureSpec};
use super::trial::TrialParams;
use super::Classification;

/// Patches closer than this are merged into one centered at the origin.
const MERGE_DISTANCE: f64 = 1e-3;
/// Products below `e^{−700}` are treated as zero.
const LOG_FLOOR: f64 = -700.0;

/// `ρ0 = (dP/(eB), 0)`.
pub fn gauge_center(d: f64, sys: &SystemSpec, fields: &FieldConfig) -> Result<(f64, f64)> {
    if fields.b_int <= 0.0 {
        return Err(Error::DegenerateField);
    }
    Ok((d * fields.p_int / (sys.e() * fields.b_int), 0.0))
}

/// Potential of the real-trial problem.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GaugePotential {
    e: f64,
    b: f64,
    p: f64,
    x0: f64,
    magnetic: f64,
    inv_2m: f64,
}

impl GaugePotential {
    pub(crate) fn new(sys: &SystemSpec, fields: &FieldConfig, d: f64) -> Self {
        let x0 = if fields.b_int > 0.0 {
            d * fields.p_int / (sys.e() * fields.b_int)
        } else {
            0.0
        };
        let qw = sys.q_w();
        Self {
            e: sys.e(),
            b: fields.b_int,
            p: fields.p_int,
            x0,
            magnetic: qw * qw * fields.b_int * fields.b_int / (8.0 * sys.reduced_mass()),
            inv_2m: 0.5 * sys.inv_total_mass(),
        }
    }

    pub(crate) fn value(&self, x: f64, y: f64) -> f64 {
        let dx = x - self.x0;
        let eb = self.e * self.b;
        let px = self.p - eb * x;
        self.magnetic * (dx * dx + y * y)
            + self.inv_2m * (px * px + eb * eb * y * y)
            - self.e * self.e / x.hypot(y)
    }

    /// `A_{ρ−ρ0} = (B/2)(−y, x − x0)`.
    fn vector_potential(&self, x: f64, y: f64) -> [f64; 2] {
        [-0.5 * self.b * y, 0.5 * self.b * (x - self.x0)]
    }
}

/// Matrices of the basis `e^{−(φ_i − shift_i)}`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Matrices {
    pub size: usize,
    pub shifts: [f64; 2],
    pub overlap: [[f64; 2]; 2],
    pub hamiltonian: [[f64; 2]; 2],
    pub kinetic: [[f64; 2]; 2],
    /// `∫ f_i f_j ρ`.
    pub radius: [[f64; 2]; 2],
    /// `∫ f_i f_j |ρ − ρ0|²`.
    pub offset_sq: [[f64; 2]; 2],
    /// `∫ f_i A_{ρ−ρ0}·∇f_j`.
    pub gauge: [[f64; 2]; 2],
}

/// Lowest generalized eigenpair of the (1×1 or 2×2) pencil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyEval {
    pub energy: f64,
    /// Second root of the 2×2 pencil, a diagnostic only.
    pub second: Option<f64>,
    /// Coefficients in the shifted basis with `cᵀ S c = 1`.
    pub coefficients: [f64; 2],
    /// `c1² S11` for the Coulomb basis (1 when it is the only one, 0 when absent).
    pub coulomb_weight: f64,
    /// True when the overlap was too ill-conditioned and one basis was dropped.
    pub reduced: bool,
    pub matrices: Matrices,
    pub nodes: usize,
    pub has_coulomb: bool,
}

impl EnergyEval {
    fn quadratic(&self, m: &[[f64; 2]; 2]) -> f64 {
        let c = self.coefficients;
        let n = self.matrices.size;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += c[i] * c[j] * m[i][j];
            }
        }
        s
    }

    pub fn rho_mean(&self) -> f64 {
        self.quadratic(&self.matrices.radius) / self.quadratic(&self.matrices.overlap)
    }

    /// `(∫ χ A·∇χ, bound)` where the bound is the Cauchy–Schwarz scale
    /// `(B/2)·‖|ρ−ρ0| χ‖·‖∇χ‖`.
    pub fn gauge_term(&self, sys: &SystemSpec, fields: &FieldConfig) -> (f64, f64) {
        let g = self.quadratic(&self.matrices.gauge);
        let x = self.quadratic(&self.matrices.offset_sq);
        let t = 2.0 * sys.reduced_mass() * self.quadratic(&self.matrices.kinetic);
        (g, 0.5 * fields.b_int * (x * t).sqrt())
    }

    pub fn classification(&self) -> Classification {
        super::classify_weight(self.coulomb_weight)
    }

    /// Linear weights of the unshifted basis `e^{−φ_i}`, scaled so the larger is `±1`-ish.
    pub fn unshifted_weights(&self) -> [f64; 2] {
        let m = &self.matrices;
        if m.size == 1 {
            return [self.coefficients[0], 0.0];
        }
        let top = m.shifts[0].max(m.shifts[1]);
        let w = [
            self.coefficients[0] * (m.shifts[0] - top).exp(),
            self.coefficients[1] * (m.shifts[1] - top).exp(),
        ];
        let norm = w[0].abs().max(w[1].abs());
        if norm > 0.0 {
            [w[0] / norm, w[1] / norm]
        } else {
            w
        }
    }
}

/// Solve `H c = E S c` for a 2×2 pencil. Falls back to the better diagonal
/// element when `S` is numerically singular.
pub fn lowest_pair(h: &[[f64; 2]; 2], s: &[[f64; 2]; 2]) -> (f64, Option<f64>, [f64; 2], bool) {
    let det = s[0][0] * s[1][1] - s[0][1] * s[0][1];
    let single = |i: usize| {
        let mut c = [0.0; 2];
        c[i] = 1.0 / s[i][i].sqrt();
        (h[i][i] / s[i][i], None, c, true)
    };
    if !(det > 1e-12 * s[0][0] * s[1][1]) {
        let e0 = h[0][0] / s[0][0];
        let e1 = h[1][1] / s[1][1];
        return if e0 <= e1 { single(0) } else { single(1) };
    }
    let b = -(h[0][0] * s[1][1] + h[1][1] * s[0][0] - 2.0 * h[0][1] * s[0][1]);
    let c = h[0][0] * h[1][1] - h[0][1] * h[0][1];
    let disc = (b * b - 4.0 * det * c).max(0.0);
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let (r1, r2) = (q / det, c / q);
    let (e, e_hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
    let a = [h[0][1] - e * s[0][1], -(h[0][0] - e * s[0][0])];
    let b2 = [h[1][1] - e * s[1][1], -(h[0][1] - e * s[0][1])];
    let mut v = if a[0].hypot(a[1]) >= b2[0].hypot(b2[1]) { a } else { b2 };
    let norm = v[0] * v[0] * s[0][0] + 2.0 * v[0] * v[1] * s[0][1] + v[1] * v[1] * s[1][1];
    if !(norm > 0.0) {
        let e0 = h[0][0] / s[0][0];
        let e1 = h[1][1] / s[1][1];
        return if e0 <= e1 { single(0) } else { single(1) };
    }
    let k = norm.sqrt();
    v = [v[0] / k, v[1] / k];
    // fix the overall sign so the dominant weight is positive
    if (v[0].abs() >= v[1].abs() && v[0] < 0.0) || (v[1].abs() > v[0].abs() && v[1] < 0.0) {
        v = [-v[0], -v[1]];
    }
    (e, Some(e_hi), v, false)
}

/// Assemble the basis matrices on the two-patch quadrature.
pub fn assemble_matrices(
    params: &TrialParams,
    sys: &SystemSpec,
    fields: &FieldConfig,
    quad: &QuadratureSpec,
) -> Result<(Matrices, usize)> {
    params.validate()?;
    let phases = params.phases();
    let n = phases.len();
    let pot = GaugePotential::new(sys, fields, params.d);

    // shift each phase by (an estimate of) its minimum
    let mut shifts = [0.0; 2];
    for (i, ph) in phases.iter().enumerate() {
        let (cx, cy) = ph.center();
        let mut m = ph.eval(cx, cy).0;
        for r in [0.05, 0.25, 0.5, 1.0, 2.0, 4.0] {
            for j in 0..8 {
                let (s, c) = (std::f64::consts::FRAC_PI_4 * j as f64).sin_cos();
                m = m.min(ph.eval(cx + r * c, cy + r * s).0);
            }
        }
        if !m.is_finite() {
            return Err(Error::InvalidTrial("phase is not finite near its center".into()));
        }
        shifts[i] = m;
    }

    let mut centers = vec![(0.0, 0.0)];
    if let Some(mg) = params.magnetic {
        if mg.x_m.abs() > MERGE_DISTANCE {
            centers.push((mg.x_m, 0.0));
        }
    }
    let r_max = 1e3 + 10.0 * centers.iter().map(|c| c.0.abs()).fold(0.0, f64::max);

    let log_density = |x: f64, y: f64| -> f64 {
        phases
            .iter()
            .zip(&shifts)
            .map(|(ph, s)| -2.0 * (ph.eval(x, y).0 - s))
            .fold(f64::NEG_INFINITY, f64::max)
    };

    let mut nodes: Vec<Node> = Vec::new();
    for (k, &c) in centers.iter().enumerate() {
        let other = if centers.len() == 2 { Some(centers[1 - k]) } else { None };
        let r_out = cutoff_radius(c, quad.log_cutoff, r_max, |x, y| {
            let lw = match other {
                Some(o) => partition_weight((x, y), c, o).max(1e-300).ln(),
                None => 0.0,
            };
            lw + log_density(x, y)
        })?;
        if let Some(r_out) = r_out {
            nodes.extend(Patch { center: c, r_out: r_out * 1.05, other }.nodes(quad));
        }
    }
    if nodes.is_empty() {
        return Err(Error::Quadrature("no quadrature patch carries weight".into()));
    }

    let mut m = Matrices {
        size: n,
        shifts,
        ..Default::default()
    };
    let inv_2mr = 0.5 / sys.reduced_mass();
    let mut lf = [0.0; 2];
    let mut g = [[0.0; 2]; 2];
    for node in &nodes {
        let (x, y) = (node.x, node.y);
        for (i, ph) in phases.iter().enumerate() {
            let (phi, grad) = ph.eval(x, y);
            lf[i] = -(phi - shifts[i]);
            g[i] = grad;
        }
        let v = pot.value(x, y);
        let a = pot.vector_potential(x, y);
        let rho = x.hypot(y);
        let off = (x - pot.x0).powi(2) + y * y;
        for i in 0..n {
            for j in 0..n {
                let l = lf[i] + lf[j];
                if l < LOG_FLOOR {
                    continue;
                }
                let ff = node.w * l.exp();
                m.gauge[i][j] -= ff * (a[0] * g[j][0] + a[1] * g[j][1]);
                if j < i {
                    continue;
                }
                let t = ff * (g[i][0] * g[j][0] + g[i][1] * g[j][1]) * inv_2mr;
                m.overlap[i][j] += ff;
                m.kinetic[i][j] += t;
                m.hamiltonian[i][j] += t + ff * v;
                m.radius[i][j] += ff * rho;
                m.offset_sq[i][j] += ff * off;
            }
        }
    }
    for mat in [
        &mut m.overlap,
        &mut m.kinetic,
        &mut m.hamiltonian,
        &mut m.radius,
        &mut m.offset_sq,
    ] {
        mat[1][0] = mat[0][1];
    }
    for i in 0..n {
        if !(m.overlap[i][i] > 0.0) || !m.hamiltonian[i][i].is_finite() {
            return Err(Error::Quadrature(format!("basis {i} has no resolved weight")));
        }
    }
    Ok((m, nodes.len()))
}

/// Lowest energy over the linear weights `(C1, C2)` for the nonlinear parameters in `params`.
pub fn energy_functional(
    params: &TrialParams,
    sys: &SystemSpec,
    fields: &FieldConfig,
    quad: &QuadratureSpec,
) -> Result<EnergyEval> {
    let (m, nodes) = assemble_matrices(params, sys, fields, quad)?;
    let has_coulomb = params.coulomb.is_some();
    let (energy, second, coefficients, reduced) = if m.size == 1 {
        let s = m.overlap[0][0];
        (m.hamiltonian[0][0] / s, None, [1.0 / s.sqrt(), 0.0], false)
    } else {
        lowest_pair(&m.hamiltonian, &m.overlap)
    };
    let coulomb_weight = if !has_coulomb {
        0.0
    } else if m.size == 1 {
        1.0
    } else {
        coefficients[0] * coefficients[0] * m.overlap[0][0]
    };
    Ok(EnergyEval {
        energy,
        second,
        coefficients,
        coulomb_weight,
        reduced,
        matrices: m,
        nodes,
        has_coulomb,
    })
}

/// Energy at quadrature `quad`, refined until two consecutive levels agree to
/// `quad.tolerance` (relative) or `max_level` is reached. Returns the finest
/// evaluation and the last change.
pub fn converged_energy(
    params: &TrialParams,
    sys: &SystemSpec,
    fields: &FieldConfig,
    quad: &QuadratureSpec,
    max_level: u32,
) -> Result<(EnergyEval, f64)> {
    let mut spec = *quad;
    let mut prev = energy_functional(params, sys, fields, &spec)?;
    loop {
        let next_spec = spec.refined();
        let next = energy_functional(params, sys, fields, &next_spec)?;
        let change = (next.energy - prev.energy).abs();
        if change <= quad.tolerance * next.energy.abs().max(1.0) {
            return Ok((next, change));
        }
        if next_spec.level >= max_level {
            return Err(Error::Quadrature(format!(
                "energy changed by {change:.3e} between levels {} and {}",
                spec.level, next_spec.level
            )));
        }
        spec = next_spec;
        prev = next;
    }
}

/// `⟨ρ⟩` of the optimal combination.
pub fn expectation_rho(eval: &EnergyEval) -> f64 {
    eval.rho_mean()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variational::trial::{CoulombPhase, MagneticPhase};
    use approx::assert_relative_eq;

    fn hydrogenic(sys: &SystemSpec) -> TrialParams {
        TrialParams {
            coulomb: Some(CoulombPhase::hydrogenic(sys)),
            magnetic: None,
            c1: 1.0,
            c2: 0.0,
            d: 0.0,
        }
    }

    #[test]
    fn exact_field_free_state() {
        for sys in [SystemSpec::hydrogen_static(), SystemSpec::hydrogen(), SystemSpec::positronium()] {
            let fields = FieldConfig::new(&sys, 0.0, 0.0, 0.0).unwrap();
            let ev = energy_functional(&hydrogenic(&sys), &sys, &fields, &QuadratureSpec::level(1)).unwrap();
            let mr = sys.reduced_mass();
            assert!((ev.energy + 2.0 * mr).abs() < 1e-10, "{}", ev.energy);
            assert_relative_eq!(ev.rho_mean(), 0.5 / mr, max_relative = 1e-10);
        }
    }

    #[test]
    fn gauge_center_positions() {
        let sys = SystemSpec::hydrogen();
        let f = FieldConfig::new(&sys, 0.1, 100.0, 0.0).unwrap();
        assert_eq!(gauge_center(0.0, &sys, &f).unwrap(), (0.0, 0.0));
        let full = gauge_center(1.0, &sys, &f).unwrap().0;
        assert!((full - 250.0).abs() < 0.5, "{full}");
        assert_relative_eq!(gauge_center(0.5, &sys, &f).unwrap().0, 0.5 * full);
        let f0 = FieldConfig::new(&sys, 0.0, 100.0, 0.0).unwrap();
        assert!(matches!(gauge_center(0.5, &sys, &f0), Err(Error::DegenerateField)));
    }

    #[test]
    fn enlarging_the_basis_lowers_the_energy() {
        let sys = SystemSpec::hydrogen();
        let fields = FieldConfig::new(&sys, 1.0, 50.0, 0.0).unwrap();
        let b = fields.b_int;
        let c = CoulombPhase {
            a: [0.3, 2.0, 0.0, (0.6 * b / 4.0).sqrt(), 0.0, 0.6],
            alpha_c: -1.0,
        };
        let mg = MagneticPhase {
            d: [0.0, b / 4.0, b / 4.0, (0.1 * b * b / 16.0).sqrt(), 0.0, 0.0, 0.1 * b / 4.0],
            x_m: 1.5,
        };
        let quad = QuadratureSpec::level(1);
        let one = TrialParams { coulomb: Some(c), magnetic: None, c1: 1.0, c2: 0.0, d: 0.0 };
        let two = TrialParams { magnetic: Some(mg), c2: 1.0, ..one };
        let e1 = energy_functional(&one, &sys, &fields, &quad).unwrap();
        let e2 = energy_functional(&two, &sys, &fields, &quad).unwrap();
        assert!(e2.energy <= e1.energy + 1e-12);
        assert!(e2.second.unwrap() >= e2.energy);
    }

    #[test]
    fn pencil_solution() {
        let h = [[1.0, 0.2], [0.2, 2.0]];
        let s = [[1.0, 0.1], [0.1, 1.0]];
        let (e, e2, c, reduced) = lowest_pair(&h, &s);
        assert!(!reduced);
        let r0 = (h[0][0] - e * s[0][0]) * c[0] + (h[0][1] - e * s[0][1]) * c[1];
        let r1 = (h[0][1] - e * s[0][1]) * c[0] + (h[1][1] - e * s[1][1]) * c[1];
        assert!(r0.abs() < 1e-14 && r1.abs() < 1e-14);
        let det = |x: f64| (h[0][0] - x * s[0][0]) * (h[1][1] - x * s[1][1]) - (h[0][1] - x * s[0][1]).powi(2);
        assert!(det(e2.unwrap()).abs() < 1e-12);
        let (_, _, _, reduced) = lowest_pair(&h, &[[1.0, 1.0], [1.0, 1.0]]);
        assert!(reduced);
    }
}
