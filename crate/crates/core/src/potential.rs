//! Gauge-invariant effective potential of the relative motion and its
//! stationary structure along the axis perpendicular to the momentum.
//!
//! With `P = P ŷ` the potential reads
//! `V(x, y) = P²/2M + e²B²(x² + y²)/2M − eBPx/M − e²/ρ`
//! and the outer (magnetic) well, when present, lies on the positive x axis.

use crate::error::{Error, Result};
use crate::units::{FieldConfig, SystemSpec};

/// Relative width of the band around `P_saddle` treated as the coincident double root.
pub const SADDLE_BAND: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoints {
    pub p_saddle: f64,
    pub x_saddle: f64,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub v_min: Option<f64>,
    pub v_max: Option<f64>,
    pub barrier: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticExtrema {
    pub x_min: f64,
    pub x_max: f64,
    pub barrier: f64,
}

fn total_mass(sys: &SystemSpec) -> Result<f64> {
    if sys.is_infinite_mass() {
        Err(Error::InvalidParameter(
            "the magnetic well needs a finite total mass".into(),
        ))
    } else {
        Ok(sys.total_mass())
    }
}

/// `V_eff(x, y)` in internal units.
pub fn v_eff(x: f64, y: f64, sys: &SystemSpec, fields: &FieldConfig) -> Result<f64> {
    let rho = x.hypot(y);
    if rho == 0.0 {
        return Err(Error::Singularity);
    }
    let (e, b, p) = (sys.e(), fields.b_int, fields.p_int);
    let kinetic = ((p - e * b * x).powi(2) + (e * b * y).powi(2)) * 0.5 * sys.inv_total_mass();
    Ok(kinetic - e * e / rho)
}

/// `V_eff(x, 0)`.
pub fn v_eff_axis(x: f64, sys: &SystemSpec, fields: &FieldConfig) -> Result<f64> {
    v_eff(x, 0.0, sys, fields)
}

/// `d²V_eff(x, 0)/dx²` for `x > 0`.
pub fn v_eff_axis_curvature(x: f64, sys: &SystemSpec, fields: &FieldConfig) -> f64 {
    let e = sys.e();
    let b = fields.b_int;
    e * e * b * b * sys.inv_total_mass() - 2.0 * e * e / x.powi(3)
}

/// `P_saddle = (27 e³ B M / 4)^{1/3}`.
pub fn p_saddle(sys: &SystemSpec, b_int: f64) -> Result<f64> {
    if !(b_int > 0.0) {
        return Err(Error::DegenerateField);
    }
    let m = total_mass(sys)?;
    Ok((27.0 * sys.e().powi(3) * b_int * m / 4.0).cbrt())
}

/// `x_saddle = (2M/B²)^{1/3}`, independent of the charge.
pub fn x_saddle(sys: &SystemSpec, b_int: f64) -> Result<f64> {
    if !(b_int > 0.0) {
        return Err(Error::DegenerateField);
    }
    let m = total_mass(sys)?;
    Ok((2.0 * m / (b_int * b_int)).cbrt())
}

/// Residual of the stationarity cubic `x³ − (P/eB)x² + M/B²` on `x > 0`.
pub fn cubic_residual(x: f64, sys: &SystemSpec, fields: &FieldConfig) -> f64 {
    let b = fields.b_int;
    let a = fields.p_int / (sys.e() * b);
    let c = sys.total_mass() / (b * b);
    x * x * x - a * x * x + c
}

/// Positive roots `(x_max, x_min)` of `x³ − a x² + c = 0` with `a, c > 0`, when they exist.
fn positive_roots(a: f64, c: f64) -> Option<(f64, f64)> {
    // depressed cubic t³ + pt + q with x = t + a/3
    let p = -a * a / 3.0;
    let q = -2.0 * a.powi(3) / 27.0 + c;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    if disc > 0.0 {
        return None;
    }
    let r = (-p / 3.0).sqrt();
    let arg = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
    let theta = arg.acos() / 3.0;
    let f = |x: f64| x * x * x - a * x * x + c;
    let df = |x: f64| 3.0 * x * x - 2.0 * a * x;
    let mut roots: Vec<f64> = (0..3)
        .map(|k| {
            let t = 2.0 * r * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
            t + a / 3.0
        })
        .filter(|x| *x > 0.0)
        .collect();
    if roots.len() != 2 {
        return None;
    }
    roots.sort_by(f64::total_cmp);
    let x_s = 2.0 * a / 3.0;
    // Newton polish; fall back to bisection on the bracket around each root
    let polish = |x0: f64, lo: f64, hi: f64| -> f64 {
        let mut x = x0;
        let d = df(x);
        if d.abs() > 1e-300 {
            let xn = x - f(x) / d;
            if xn > lo && xn < hi && f(xn).abs() <= f(x).abs() {
                x = xn;
            }
        }
        let scale = c.max(x.powi(3)).max(1.0);
        if f(x).abs() > 1e-13 * scale && f(lo).signum() != f(hi).signum() {
            let (mut l, mut h) = (lo, hi);
            for _ in 0..200 {
                let m = 0.5 * (l + h);
                if f(m).signum() == f(l).signum() {
                    l = m;
                } else {
                    h = m;
                }
            }
            x = 0.5 * (l + h);
        }
        x
    };
    let x_max = polish(roots[0], 0.0, x_s);
    let x_min = polish(roots[1], x_s, a);
    Some((x_max, x_min))
}

/// Saddle momentum and, for `P > P_saddle`, the barrier maximum and the magnetic minimum.
pub fn stationary_points(sys: &SystemSpec, fields: &FieldConfig) -> Result<CriticalPoints> {
    let b = fields.b_int;
    let ps = p_saddle(sys, b)?;
    let xs = x_saddle(sys, b)?;
    let p = fields.p_int;
    let mut cp = CriticalPoints {
        p_saddle: ps,
        x_saddle: xs,
        x_min: None,
        x_max: None,
        v_min: None,
        v_max: None,
        barrier: None,
    };
    let (x_max, x_min) = if (p - ps).abs() < SADDLE_BAND * ps {
        (xs, xs)
    } else if p > ps {
        let a = p / (sys.e() * b);
        let c = sys.total_mass() / (b * b);
        match positive_roots(a, c) {
            Some(r) => r,
            None => (xs, xs),
        }
    } else {
        return Ok(cp);
    };
    let v_min = v_eff_axis(x_min, sys, fields)?;
    let v_max = v_eff_axis(x_max, sys, fields)?;
    cp.x_min = Some(x_min);
    cp.x_max = Some(x_max);
    cp.v_min = Some(v_min);
    cp.v_max = Some(v_max);
    cp.barrier = Some(v_max - v_min);
    Ok(cp)
}

/// Large-momentum expansions of the extrema positions and of the barrier height.
pub fn asymptotic_extrema(sys: &SystemSpec, fields: &FieldConfig) -> Result<AsymptoticExtrema> {
    let b = fields.b_int;
    let ps = p_saddle(sys, b)?;
    let p = fields.p_int;
    if p <= ps {
        return Err(Error::OutOfRegime { p, p_saddle: ps });
    }
    let e = sys.e();
    let m = sys.total_mass();
    let x_min = p / (e * b) - e * e * m / (p * p);
    let x_max = (e * m / (p * b)).sqrt() + e * e * m / (2.0 * p * p);
    let e3 = e.powi(3);
    let barrier = p * p / (2.0 * m) - (4.0 * b * e3 * p / m).sqrt() + 1.5 * b * e3 / p
        + (b.powi(3) * e.powi(9) * m / (16.0 * p.powi(5))).sqrt();
    Ok(AsymptoticExtrema {
        x_min,
        x_max,
        barrier,
    })
}
