//! Residual check of the nonlinearized Schrödinger hierarchy.
//!
//! With `ψ = e^{−Φ}` and `Φ = Σ Bⁿ Pᵏ Φ_{n,k}`, order `(n, k)` reads
//!
//! ```text
//! ΔΦ_{n,k}/2m_r − i q ∂_φΦ_{n−1,k}/2m_r − ∇Φ_{0,0}·∇Φ_{n,k}/m_r = Ê_{n,k} − Q_{n,k}
//! Q_{n,k} = V_{n,k} − (1/2m_r) Σ' ∇Φ_{m,p}·∇Φ_{n−m,k−p}
//! ```
//!
//! where the primed sum skips the two terms containing `Φ_{0,0}` and the
//! relative potential expands as `V_{0,0} = −e²/ρ`, `V_{1,1} = −eρ sin φ/M`,
//! `V_{2,0} = e²ρ²/8m_r`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::coefficients::energy_coefficients;
use super::phase::PhaseTerm;
use crate::error::{Error, Result};
use crate::units::SystemSpec;

/// Which charge multiplies the angular (linear-in-A) term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MagneticSign {
    /// `q_w = e(μ2 − μ1)`.
    Signed,
    /// `e|μ2 − μ1|`.
    Absolute,
}

/// `Q_{n,k}` assembled from the known phases.
pub struct EffectivePerturbation {
    sys: SystemSpec,
    phases: Vec<PhaseTerm>,
}

impl EffectivePerturbation {
    /// Loads every phase `Φ_{m,p}` with `m ≤ n`, `p ≤ k`.
    pub fn new(sys: &SystemSpec, n: u32, k: u32) -> Result<Self> {
        let mut phases = Vec::new();
        for m in 0..=n {
            for p in 0..=k {
                phases.push(PhaseTerm::new(sys, m, p)?);
            }
        }
        Ok(Self {
            sys: sys.clone(),
            phases,
        })
    }

    fn phase(&self, m: u32, p: u32) -> Option<&PhaseTerm> {
        self.phases.iter().find(|t| t.order == (m, p))
    }

    /// Relative potential at order `(n, k)`.
    pub fn potential(&self, n: u32, k: u32, rho: f64, phi: f64) -> f64 {
        let e = self.sys.e();
        match (n, k) {
            (0, 0) => -e * e / rho,
            (1, 1) => -e * rho * phi.sin() * self.sys.inv_total_mass(),
            (2, 0) => e * e * rho * rho / (8.0 * self.sys.reduced_mass()),
            _ => 0.0,
        }
    }

    /// `Q_{n,k}(ρ, φ)`.
    pub fn q(&self, n: u32, k: u32, rho: f64, phi: f64) -> Result<Complex64> {
        let mut acc = Complex64::default();
        for m in 0..=n {
            for p in 0..=k {
                let inner = m + p;
                if inner == 0 || inner == n + k {
                    continue;
                }
                let a = self.phase(m, p).ok_or(Error::UnsupportedOrder(m, p))?;
                let b = self
                    .phase(n - m, k - p)
                    .ok_or(Error::UnsupportedOrder(n - m, k - p))?;
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                let ga = a.gradient(rho, phi);
                let gb = b.gradient(rho, phi);
                acc += ga[0] * gb[0] + ga[1] * gb[1];
            }
        }
        let mr = self.sys.reduced_mass();
        Ok(Complex64::new(self.potential(n, k, rho, phi), 0.0) - acc / (2.0 * mr))
    }

    /// Left-hand side of the hierarchy at order `(n, k)`, which must equal `Ê_{n,k} − Q_{n,k}`.
    pub fn lhs(&self, n: u32, k: u32, rho: f64, phi: f64, sign: MagneticSign) -> Result<Complex64> {
        let mr = self.sys.reduced_mass();
        let q = match sign {
            MagneticSign::Signed => self.sys.q_w(),
            MagneticSign::Absolute => self.sys.q_w().abs(),
        };
        let own = self.phase(n, k).ok_or(Error::UnsupportedOrder(n, k))?;
        let lead = self.phase(0, 0).ok_or(Error::UnsupportedOrder(0, 0))?;
        let g0 = lead.gradient(rho, phi);
        let g = own.gradient(rho, phi);
        let mut v = own.laplacian(rho, phi) / (2.0 * mr) - (g0[0] * g[0] + g0[1] * g[1]) / mr;
        if n >= 1 {
            let prev = self.phase(n - 1, k).ok_or(Error::UnsupportedOrder(n - 1, k))?;
            v -= Complex64::new(0.0, q / (2.0 * mr)) * prev.d_phi(rho, phi);
        }
        Ok(v)
    }
}

/// Outcome of the residual check at one order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderResidual {
    pub order: (u32, u32),
    /// `max |LHS − Ê_{n,k} + Q_{n,k}|` over the samples.
    pub max_residual: f64,
    /// Mean of `LHS + Q_{n,k}`, an estimate of `Ê_{n,k}` independent of the table.
    pub recovered_energy: f64,
    /// Largest deviation of `LHS + Q_{n,k}` from its mean; zero for a true solution.
    pub spread: f64,
}

/// Radical-inverse sequence in `base`.
fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Deterministic Halton points `(ρ, φ)` with `ρ ∈ [0.1, 10]`, `φ ∈ [0, 2π)`.
pub fn sample_points(count: usize) -> Vec<(f64, f64)> {
    (1..=count as u64)
        .map(|i| {
            let rho = 0.1 + 9.9 * radical_inverse(i, 2);
            let phi = 2.0 * PI * radical_inverse(i, 3);
            (rho, phi)
        })
        .collect()
}

/// The order `(0, 0)` equation is nonlinear: `ΔΦ/2m_r − |∇Φ|²/2m_r + V_{0,0} = Ê_{0,0}`.
fn leading_lhs(ep: &EffectivePerturbation, rho: f64, phi: f64) -> Result<Complex64> {
    let mr = ep.sys.reduced_mass();
    let t = ep.phase(0, 0).ok_or(Error::UnsupportedOrder(0, 0))?;
    let g = t.gradient(rho, phi);
    Ok((t.laplacian(rho, phi) - (g[0] * g[0] + g[1] * g[1])) / (2.0 * mr)
        + ep.potential(0, 0, rho, phi))
}

/// Check each requested order on `samples`.
pub fn riccati_residual(
    sys: &SystemSpec,
    orders: &[(u32, u32)],
    samples: &[(f64, f64)],
    sign: MagneticSign,
) -> Result<Vec<OrderResidual>> {
    let table = energy_coefficients(sys);
    let n_max = orders.iter().map(|o| o.0).max().unwrap_or(0);
    let k_max = orders.iter().map(|o| o.1).max().unwrap_or(0);
    let ep = EffectivePerturbation::new(sys, n_max, k_max)?;
    orders
        .iter()
        .map(|&(n, k)| {
            let e_nk = table.value(n, k).ok_or(Error::UnsupportedOrder(n, k))?;
            let values: Vec<Complex64> = samples
                .par_iter()
                .map(|&(rho, phi)| {
                    if (n, k) == (0, 0) {
                        leading_lhs(&ep, rho, phi)
                    } else {
                        Ok(ep.lhs(n, k, rho, phi, sign)? + ep.q(n, k, rho, phi)?)
                    }
                })
                .collect::<Result<_>>()?;
            let mean = values.iter().sum::<Complex64>() / values.len().max(1) as f64;
            let max_residual = values
                .iter()
                .map(|v| (v - e_nk).norm())
                .fold(0.0, f64::max);
            let spread = values.iter().map(|v| (v - mean).norm()).fold(0.0, f64::max);
            Ok(OrderResidual {
                order: (n, k),
                max_residual,
                recovered_energy: mean.re,
                spread,
            })
        })
        .collect()
}
