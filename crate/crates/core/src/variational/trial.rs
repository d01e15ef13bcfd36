//! Two-well trial function `χ = C1 e^{−φ_c} + C2 e^{−φ_m}`.

use crate::error::{Error, Result};
use crate::units::SystemSpec;

/// Phase of the Coulomb-well component,
/// `φ_c = (A0 + A1 ρ + A2 x ρ + A3² ρ³)/√u − (α_c/2) ln u`, `u = 1 + A4 x + A5² ρ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoulombPhase {
    pub a: [f64; 6],
    pub alpha_c: f64,
}

/// Phase of the magnetic-well component,
/// `φ_m = (D0 + D1 x̃² + D2 y² + D3² ϱ⁴)/√(1 + D4 x̃² + D5 y² + D6² ϱ⁴)`, `x̃ = x − x_m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagneticPhase {
    pub d: [f64; 7],
    pub x_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialParams {
    pub coulomb: Option<CoulombPhase>,
    pub magnetic: Option<MagneticPhase>,
    pub c1: f64,
    pub c2: f64,
    /// Gauge-center parameter in `[0, 1]`.
    pub d: f64,
}

/// Value and Cartesian gradient of a phase.
pub type PhaseValue = (f64, [f64; 2]);

impl CoulombPhase {
    /// Field-free ground state `e^{−2 m_r e² ρ}`.
    pub fn hydrogenic(sys: &SystemSpec) -> Self {
        let mut a = [0.0; 6];
        a[1] = 2.0 * sys.reduced_mass() * sys.e() * sys.e();
        Self { a, alpha_c: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let [_, _, _, _, a4, a5] = self.a;
        if !self.a.iter().chain([&self.alpha_c]).all(|v| v.is_finite()) {
            return Err(Error::InvalidTrial("non-finite Coulomb parameter".into()));
        }
        if a4 != 0.0 && a4 * a4 >= 4.0 * a5 * a5 {
            return Err(Error::InvalidTrial(format!(
                "A4² = {} must stay below 4·A5² = {}",
                a4 * a4,
                4.0 * a5 * a5
            )));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64, y: f64) -> PhaseValue {
        let [a0, a1, a2, a3, a4, a5] = self.a;
        let rho = x.hypot(y);
        // the cusp at the origin has no gradient direction; the point has zero measure
        let (ex, ey) = if rho > 0.0 { (x / rho, y / rho) } else { (0.0, 0.0) };
        let a3s = a3 * a3;
        let a5s = a5 * a5;
        let num = a0 + a1 * rho + a2 * x * rho + a3s * rho.powi(3);
        let dnum_drho = a1 + a2 * x + 3.0 * a3s * rho * rho;
        let gn = [dnum_drho * ex + a2 * rho, dnum_drho * ey];
        let u = 1.0 + a4 * x + a5s * rho * rho;
        let gu = [a4 + 2.0 * a5s * x, 2.0 * a5s * y];
        let su = u.sqrt();
        let phi = num / su - 0.5 * self.alpha_c * u.ln();
        let k = num / (2.0 * u * su) + 0.5 * self.alpha_c / u;
        (phi, [gn[0] / su - k * gu[0], gn[1] / su - k * gu[1]])
    }
}

impl MagneticPhase {
    pub fn validate(&self) -> Result<()> {
        if !self.d.iter().chain([&self.x_m]).all(|v| v.is_finite()) {
            return Err(Error::InvalidTrial("non-finite magnetic parameter".into()));
        }
        if self.d[4] < 0.0 || self.d[5] < 0.0 {
            return Err(Error::InvalidTrial(format!(
                "D4 = {} and D5 = {} must be non-negative",
                self.d[4], self.d[5]
            )));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64, y: f64) -> PhaseValue {
        let [d0, d1, d2, d3, d4, d5, d6] = self.d;
        let xt = x - self.x_m;
        let r2 = xt * xt + y * y;
        let d3s = d3 * d3;
        let d6s = d6 * d6;
        let num = d0 + d1 * xt * xt + d2 * y * y + d3s * r2 * r2;
        let gn = [
            2.0 * d1 * xt + 4.0 * d3s * r2 * xt,
            2.0 * d2 * y + 4.0 * d3s * r2 * y,
        ];
        let den = 1.0 + d4 * xt * xt + d5 * y * y + d6s * r2 * r2;
        let gd = [
            2.0 * d4 * xt + 4.0 * d6s * r2 * xt,
            2.0 * d5 * y + 4.0 * d6s * r2 * y,
        ];
        let sd = den.sqrt();
        let k = num / (2.0 * den * sd);
        (num / sd, [gn[0] / sd - k * gd[0], gn[1] / sd - k * gd[1]])
    }
}

impl TrialParams {
    pub fn validate(&self) -> Result<()> {
        if let Some(c) = &self.coulomb {
            c.validate()?;
        }
        if let Some(m) = &self.magnetic {
            m.validate()?;
        }
        let c1 = if self.coulomb.is_some() { self.c1 } else { 0.0 };
        let c2 = if self.magnetic.is_some() { self.c2 } else { 0.0 };
        if c1 == 0.0 && c2 == 0.0 {
            return Err(Error::InvalidTrial("both linear weights vanish".into()));
        }
        if !(0.0..=1.0).contains(&self.d) {
            return Err(Error::InvalidTrial(format!("gauge parameter {} outside [0, 1]", self.d)));
        }
        Ok(())
    }

    /// Active phases in basis order (Coulomb first).
    pub(crate) fn phases(&self) -> Vec<Phase> {
        let mut v = Vec::with_capacity(2);
        if let Some(c) = self.coulomb {
            v.push(Phase::Coulomb(c));
        }
        if let Some(m) = self.magnetic {
            v.push(Phase::Magnetic(m));
        }
        v
    }

    /// Linear weights matching [`phases`](Self::phases).
    pub(crate) fn weights(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2);
        if self.coulomb.is_some() {
            v.push(self.c1);
        }
        if self.magnetic.is_some() {
            v.push(self.c2);
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Phase {
    Coulomb(CoulombPhase),
    Magnetic(MagneticPhase),
}

impl Phase {
    pub(crate) fn eval(&self, x: f64, y: f64) -> PhaseValue {
        match self {
            Phase::Coulomb(c) => c.eval(x, y),
            Phase::Magnetic(m) => m.eval(x, y),
        }
    }

    pub(crate) fn center(&self) -> (f64, f64) {
        match self {
            Phase::Coulomb(_) => (0.0, 0.0),
            Phase::Magnetic(m) => (m.x_m, 0.0),
        }
    }
}

/// `(χ, ∇χ)` at `(x, y)`.
pub fn trial_eval(params: &TrialParams, x: f64, y: f64) -> Result<(f64, [f64; 2])> {
    params.validate()?;
    let mut chi = 0.0;
    let mut grad = [0.0; 2];
    for (phase, c) in params.phases().iter().zip(params.weights()) {
        let (phi, g) = phase.eval(x, y);
        let f = c * (-phi).exp();
        chi += f;
        grad[0] -= f * g[0];
        grad[1] -= f * g[1];
    }
    Ok((chi, grad))
}

/// Taylor data of the phase at the bottom of the magnetic well,
/// `φ ≈ α0 + α2 x̃² + β2 y² + α3 x̃³ + γ3 x̃ y² + α4 x̃⁴ + β4 y⁴`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellExpansion {
    pub alpha0: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub alpha4: f64,
    pub beta2: f64,
    pub beta4: f64,
    pub gamma3: f64,
    pub e_x: f64,
    pub e_y: f64,
    pub x0: f64,
}

impl WellExpansion {
    /// Harmonic data at `x0` with the relative-motion oscillator split evenly,
    /// `E_x = E_y = eB/4m_r`, so that `α2 = β2 = eB/4`.
    pub fn at(sys: &SystemSpec, b: f64, x0: f64) -> Result<Self> {
        if b <= 0.0 {
            return Err(Error::DegenerateField);
        }
        if x0 <= 0.0 {
            return Err(Error::InvalidParameter(format!("well position {x0} must be positive")));
        }
        let mr = sys.reduced_mass();
        let e = sys.e();
        let e_x = e * b / (4.0 * mr);
        let e_y = e_x;
        let x4 = x0.powi(4);
        Ok(Self {
            alpha0: 0.0,
            alpha2: e_x * mr,
            alpha3: e * e / (6.0 * e_x * x4),
            alpha4: 0.0,
            beta2: e_y * mr,
            beta4: 0.0,
            gamma3: -e * e / (2.0 * e_x * x4),
            e_x,
            e_y,
            x0,
        })
    }

    /// `E = E_x + E_y`.
    pub fn energy(&self) -> f64 {
        self.e_x + self.e_y
    }

    /// Magnetic phase reproducing the quadratic part of the expansion near `x0`
    /// and the Gaussian tail `(eB/4) ϱ²` far away; `stiffness` sets where the
    /// quartic terms take over.
    pub fn seed_phase(&self, sys: &SystemSpec, b: f64, stiffness: f64) -> MagneticPhase {
        let tail = sys.e() * b / 4.0;
        let d6 = stiffness * tail;
        let d3 = (d6 * tail).sqrt();
        MagneticPhase {
            d: [self.alpha0, self.alpha2, self.beta2, d3, 0.0, 0.0, d6],
            x_m: self.x0,
        }
    }
}
