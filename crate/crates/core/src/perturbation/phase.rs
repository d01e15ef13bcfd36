//! Closed-form phase corrections `Φ_{n,k}` of `ψ = e^{−Φ}`.
//!
//! Each correction is a finite sum of monomials `c ρ^p Θ(φ)`, so values,
//! gradients and Laplacians are exact. The angle is measured in the frame
//! where the field–momentum coupling of the relative potential is
//! `−e B P ρ sin φ / M`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::units::SystemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Angular {
    One,
    Cos,
    Sin,
    Cos2,
}

impl Angular {
    fn harmonic(self) -> f64 {
        match self {
            Angular::One => 0.0,
            Angular::Cos | Angular::Sin => 1.0,
            Angular::Cos2 => 2.0,
        }
    }

    fn value(self, phi: f64) -> f64 {
        match self {
            Angular::One => 1.0,
            Angular::Cos => phi.cos(),
            Angular::Sin => phi.sin(),
            Angular::Cos2 => (2.0 * phi).cos(),
        }
    }

    fn derivative(self, phi: f64) -> f64 {
        match self {
            Angular::One => 0.0,
            Angular::Cos => -phi.sin(),
            Angular::Sin => phi.cos(),
            Angular::Cos2 => -2.0 * (2.0 * phi).sin(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monomial {
    pub coeff: Complex64,
    pub power: i32,
    pub angular: Angular,
}

/// One correction `Φ_{n,k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTerm {
    pub order: (u32, u32),
    pub parts: Vec<Monomial>,
}

/// Orders with a closed form (including the ones that vanish identically).
pub const KNOWN_ORDERS: [(u32, u32); 9] =
    [(0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (0, 2), (2, 1), (1, 2), (2, 2)];

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

impl PhaseTerm {
    pub fn new(sys: &SystemSpec, n: u32, k: u32) -> Result<Self> {
        let mr = sys.reduced_mass();
        let u = sys.inv_total_mass();
        let mu = sys.mu();
        let mono = |coeff: Complex64, power: i32, angular: Angular| Monomial {
            coeff,
            power,
            angular,
        };
        use Angular::*;
        let parts = match (n, k) {
            (0, 0) => vec![mono(re(2.0 * mr), 1, One)],
            (1, 1) => {
                // −(3 + 4 m_r ρ) ρ sin φ / (16 m_r M)
                let c = -u / (16.0 * mr);
                vec![mono(re(3.0 * c), 1, Sin), mono(re(4.0 * mr * c), 2, Sin)]
            }
            (2, 0) => {
                // ρ² (4 m_r + M μ²)(9 + 8 m_r ρ) / (384 m_r² M)
                let c = (4.0 * mr * u + mu * mu) / (384.0 * mr * mr);
                vec![mono(re(9.0 * c), 2, One), mono(re(8.0 * mr * c), 3, One)]
            }
            (2, 1) => {
                // −i μ (51 + 4 m_r ρ (17 + 8 m_r ρ)) ρ cos φ / (1536 m_r³ M)
                let c = Complex64::new(0.0, -mu * u / (1536.0 * mr.powi(3)));
                vec![
                    mono(c * 51.0, 1, Cos),
                    mono(c * (68.0 * mr), 2, Cos),
                    mono(c * (32.0 * mr * mr), 3, Cos),
                ]
            }
            (2, 2) => {
                // ρ² (−99 − 40 m_r ρ + 3 (11 + 8 m_r ρ) cos 2φ) / (3072 m_r² M²)
                let c = u * u / (3072.0 * mr * mr);
                vec![
                    mono(re(-99.0 * c), 2, One),
                    mono(re(-40.0 * mr * c), 3, One),
                    mono(re(33.0 * c), 2, Cos2),
                    mono(re(24.0 * mr * c), 3, Cos2),
                ]
            }
            (1, 0) | (0, 1) | (0, 2) | (1, 2) => vec![],
            _ => return Err(Error::UnsupportedOrder(n, k)),
        };
        // restore the charge: Φ^{(e)}_{n,k}(ρ) = e^{−3n−2k} Φ^{(1)}_{n,k}(e² ρ)
        let e = sys.e();
        let parts = parts
            .into_iter()
            .map(|m| Monomial {
                coeff: m.coeff * e.powi(2 * m.power - 3 * n as i32 - 2 * k as i32),
                ..m
            })
            .collect();
        Ok(Self {
            order: (n, k),
            parts,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn value(&self, rho: f64, phi: f64) -> Complex64 {
        self.parts
            .iter()
            .map(|m| m.coeff * rho.powi(m.power) * m.angular.value(phi))
            .sum()
    }

    /// `(∂Φ/∂ρ, ∂Φ/∂φ)`.
    pub fn polar_derivatives(&self, rho: f64, phi: f64) -> (Complex64, Complex64) {
        self.parts.iter().fold(
            (Complex64::default(), Complex64::default()),
            |(dr, dp), m| {
                let p = m.power as f64;
                (
                    dr + m.coeff * p * rho.powi(m.power - 1) * m.angular.value(phi),
                    dp + m.coeff * rho.powi(m.power) * m.angular.derivative(phi),
                )
            },
        )
    }

    pub fn d_phi(&self, rho: f64, phi: f64) -> Complex64 {
        self.polar_derivatives(rho, phi).1
    }

    /// Cartesian gradient `(∂Φ/∂x, ∂Φ/∂y)`.
    pub fn gradient(&self, rho: f64, phi: f64) -> [Complex64; 2] {
        let (dr, dp) = self.polar_derivatives(rho, phi);
        let (s, c) = phi.sin_cos();
        [dr * c - dp * s / rho, dr * s + dp * c / rho]
    }

    /// `ΔΦ`; for `c ρ^p Θ_m(φ)` this is `c (p² − m²) ρ^{p−2} Θ_m(φ)`.
    pub fn laplacian(&self, rho: f64, phi: f64) -> Complex64 {
        self.parts
            .iter()
            .map(|m| {
                let p = m.power as f64;
                let h = m.angular.harmonic();
                m.coeff * (p * p - h * h) * rho.powi(m.power - 2) * m.angular.value(phi)
            })
            .sum()
    }

    /// True when every coefficient is real.
    pub fn is_real(&self) -> bool {
        self.parts.iter().all(|m| m.coeff.im == 0.0)
    }

    /// True when every coefficient is imaginary.
    pub fn is_imaginary(&self) -> bool {
        self.parts.iter().all(|m| m.coeff.re == 0.0)
    }
}

/// Evaluate `Φ_{n,k}(ρ, φ)`.
pub fn phase_eval(sys: &SystemSpec, order: (u32, u32), rho: f64, phi: f64) -> Result<Complex64> {
    Ok(PhaseTerm::new(sys, order.0, order.1)?.value(rho, phi))
}

/// Cartesian gradient of `Φ_{n,k}` at `(ρ, φ)`.
pub fn phase_gradient(
    sys: &SystemSpec,
    order: (u32, u32),
    rho: f64,
    phi: f64,
) -> Result<[Complex64; 2]> {
    Ok(PhaseTerm::new(sys, order.0, order.1)?.gradient(rho, phi))
}
