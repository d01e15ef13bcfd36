//! Two-patch polar quadrature for integrands concentrated around the Coulomb
//! well and the magnetic well.
//!
//! Each patch is a polar grid about its center: composite Gauss–Legendre in
//! the radius on geometrically shrinking panels, trapezoid in the angle. A
//! Becke partition of unity splits the plane between the patches.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Node counts for one refinement level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub level: u32,
    /// Gauss–Legendre nodes per radial panel.
    pub radial: usize,
    /// Number of geometric radial panels; the innermost covers `[0, r_out·2^{1−panels}]`.
    pub panels: usize,
    pub angular: usize,
    /// Integrands are cut where `ln(density/peak) < −log_cutoff`.
    pub log_cutoff: f64,
    /// Accepted relative energy change between two levels.
    pub tolerance: f64,
}

impl QuadratureSpec {
    /// Level `l` doubles the radial and angular node counts of level `l − 1`.
    pub fn level(l: u32) -> Self {
        let scale = 1usize << l.min(6);
        Self {
            level: l,
            radial: 8 * scale,
            panels: 7,
            angular: 24 * scale,
            log_cutoff: 40.0,
            tolerance: 1e-7,
        }
    }

    pub fn refined(&self) -> Self {
        Self {
            level: self.level + 1,
            radial: self.radial * 2,
            angular: self.angular * 2,
            ..*self
        }
    }

    pub fn node_count(&self, patches: usize) -> usize {
        patches * self.panels * self.radial * self.angular
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self::level(1)
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn cached_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    static RULES: OnceLock<std::sync::Mutex<Vec<(usize, (Vec<f64>, Vec<f64>))>>> = OnceLock::new();
    let rules = RULES.get_or_init(Default::default);
    let mut guard = rules.lock().unwrap_or_else(|e| e.into_inner());
    if let Some((_, r)) = guard.iter().find(|(k, _)| *k == n) {
        return r.clone();
    }
    let r = gauss_legendre(n);
    guard.push((n, r.clone()));
    r
}

/// Becke cell function `s(μ) = (1 − p(p(p(μ))))/2`, `p(μ) = 3μ/2 − μ³/2`.
pub fn becke(mu: f64) -> f64 {
    let p = |m: f64| 1.5 * m - 0.5 * m * m * m;
    0.5 * (1.0 - p(p(p(mu.clamp(-1.0, 1.0)))))
}

/// Weight of the patch at `a` against the patch at `b` for point `p`.
pub fn partition_weight(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let r = (a.0 - b.0).hypot(a.1 - b.1);
    let ra = (p.0 - a.0).hypot(p.1 - a.1);
    let rb = (p.0 - b.0).hypot(p.1 - b.1);
    becke((ra - rb) / r)
}

/// One quadrature node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub x: f64,
    pub y: f64,
    pub w: f64,
}

/// A polar patch about `center` reaching out to `r_out`, partitioned against `other`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Patch {
    pub center: (f64, f64),
    pub r_out: f64,
    pub other: Option<(f64, f64)>,
}

impl Patch {
    pub fn nodes(&self, spec: &QuadratureSpec) -> Vec<Node> {
        let (gx, gw) = cached_rule(spec.radial);
        let mut out = Vec::with_capacity(spec.panels * spec.radial * spec.angular);
        let dtheta = 2.0 * PI / spec.angular as f64;
        let trig: Vec<(f64, f64)> = (0..spec.angular)
            .map(|j| ((j as f64 + 0.5) * dtheta).sin_cos())
            .collect();
        for panel in 0..spec.panels {
            let hi = self.r_out * 0.5f64.powi(panel as i32);
            let lo = if panel + 1 == spec.panels { 0.0 } else { hi * 0.5 };
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (z, wz) in gx.iter().zip(&gw) {
                let r = mid + half * z;
                let wr = half * wz * r * dtheta;
                for &(s, c) in &trig {
                    let x = self.center.0 + r * c;
                    let y = self.center.1 + r * s;
                    let w = match self.other {
                        Some(o) => wr * partition_weight((x, y), self.center, o),
                        None => wr,
                    };
                    if w > 0.0 {
                        out.push(Node { x, y, w });
                    }
                }
            }
        }
        out
    }
}

/// Largest radius about `center` where `log_density` (normalized to a peak of
/// about zero) stays above `−cutoff`, probing a fan of rays. Returns `None`
/// when the density is negligible everywhere on the patch.
pub fn cutoff_radius<F>(center: (f64, f64), cutoff: f64, r_max: f64, mut log_density: F) -> Result<Option<f64>>
where
    F: FnMut(f64, f64) -> f64,
{
    const RAYS: usize = 32;
    const GROWTH: f64 = 1.2;
    const R_MIN: f64 = 1e-2;
    let mut best: Option<f64> = None;
    for j in 0..RAYS {
        let (s, c) = (2.0 * PI * (j as f64 + 0.25) / RAYS as f64).sin_cos();
        let mut r = R_MIN;
        let mut prev = (0.0, log_density(center.0, center.1));
        let mut below = 0;
        loop {
            let v = log_density(center.0 + r * c, center.1 + r * s);
            if v > -cutoff {
                below = 0;
            } else {
                if prev.1 > -cutoff {
                    // interpolate the crossing so the radius moves continuously with the parameters
                    let t = (prev.1 + cutoff) / (prev.1 - v);
                    let cross = prev.0 + t * (r - prev.0);
                    best = Some(best.map_or(cross, |b: f64| b.max(cross)));
                }
                below += 1;
                if below >= 4 && v < -1.5 * cutoff {
                    break;
                }
            }
            if r > r_max {
                if v > -cutoff {
                    return Err(Error::InvalidTrial(format!(
                        "density does not decay within radius {r_max:.3e}"
                    )));
                }
                break;
            }
            prev = (r, v);
            r *= GROWTH;
        }
    }
    Ok(best)
}
