//! Energy coefficients `Ê_{n,k}` of the double expansion in `B` and `P`,
//! kept as exact rationals in `m_r`, `1/M`, `μ` and `e`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::units::{ExactSystem, SystemSpec};

/// Orders `(n, k)` with a closed-form coefficient, in table order.
pub const STORED_ORDERS: [(u32, u32); 7] = [(0, 0), (2, 0), (4, 0), (2, 2), (4, 2), (4, 4), (6, 2)];

/// Largest `B` and `P` powers covered by the table.
pub const MAX_B_ORDER: u32 = 6;
pub const MAX_P_ORDER: u32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct PtTable {
    entries: Vec<((u32, u32), BigRational)>,
    inv_total_mass: f64,
    exact: ExactSystem,
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn pow(x: &BigRational, n: u32) -> BigRational {
    num_traits::pow(x.clone(), n as usize)
}

/// `e^{k}` for possibly negative `k`.
fn charge_pow(e: &BigRational, k: i32) -> BigRational {
    if k >= 0 {
        pow(e, k as u32)
    } else {
        pow(&e.recip(), (-k) as u32)
    }
}

/// Exact coefficients for `sys`. Terms carrying `1/M` vanish in the infinite-mass limit.
pub fn energy_coefficients(sys: &SystemSpec) -> PtTable {
    let ex = sys.exact();
    let mr = &ex.reduced_mass;
    let u = &ex.inv_total_mass;
    let mu2 = &ex.mu * &ex.mu;
    let mr3 = pow(mr, 3);
    let mr7 = pow(mr, 7);
    let mr11 = pow(mr, 11);

    let e00 = -int(2) * mr;
    let e20 = int(3) / (int(64) * &mr3);
    let e22 = -int(21) * pow(u, 2) / (int(256) * &mr3);
    // (4 m_r + M μ²)² / M² = (4 m_r/M + μ²)²
    let e40 = -int(159) * pow(&(int(4) * mr * u + &mu2), 2) / (int(65536) * &mr7);
    let e42 = int(3) * (int(115) * &mu2 * pow(u, 2) - int(2062) * mr * pow(u, 3))
        / (int(131072) * &mr7);
    let e44 = int(17877) * pow(u, 4) / (int(1048576) * &mr7);
    let e62 = -(int(1293475) * pow(&mu2, 2) * pow(u, 2)
        + int(1624212) * mr * &mu2 * pow(u, 3)
        - int(1816848) * pow(mr, 2) * pow(u, 4))
        / (int(805306368) * &mr11);

    let entries = [e00, e20, e40, e22, e42, e44, e62]
        .into_iter()
        .zip([(0, 0), (2, 0), (4, 0), (2, 2), (4, 2), (4, 4), (6, 2)])
        .map(|(value, (n, k))| {
            // restore the charge: Ê_{n,k} ∝ e^{4 − 3n − 2k}
            let scale = charge_pow(&ex.e, 4 - 3 * n as i32 - 2 * k as i32);
            ((n, k), value * scale)
        })
        .collect();
    PtTable {
        entries,
        inv_total_mass: sys.inv_total_mass(),
        exact: ex,
    }
}

impl PtTable {
    /// Exact coefficient. Orders inside the covered range without a stored
    /// closed form are zero when `n` or `k` is odd, otherwise unknown.
    pub fn get(&self, n: u32, k: u32) -> Option<BigRational> {
        if let Some((_, v)) = self.entries.iter().find(|(o, _)| *o == (n, k)) {
            return Some(v.clone());
        }
        if n <= MAX_B_ORDER && k <= MAX_P_ORDER && (n % 2 == 1 || k % 2 == 1) {
            return Some(BigRational::zero());
        }
        if n == 0 && k > 0 {
            // without a field the relative motion does not feel P
            return Some(BigRational::zero());
        }
        None
    }

    pub fn value(&self, n: u32, k: u32) -> Option<f64> {
        self.get(n, k).and_then(|r| r.to_f64())
    }

    pub fn entries(&self) -> impl Iterator<Item = ((u32, u32), &BigRational)> {
        self.entries.iter().map(|(o, v)| (*o, v))
    }

    pub fn inv_total_mass(&self) -> f64 {
        self.inv_total_mass
    }

    pub fn exact_system(&self) -> &ExactSystem {
        &self.exact
    }

    /// True when every stored coefficient is a small fraction worth printing exactly.
    pub fn is_simple(&self) -> bool {
        self.entries.iter().all(|(_, v)| {
            v.denom().to_string().len() <= 9 && v.numer().to_string().trim_start_matches('-').len() <= 9
        })
    }
}

/// Result of summing the series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    /// `Ê = E − P²/2M`.
    pub e_hat: f64,
    pub e: f64,
    /// Magnitude of the highest included total order relative to the partial sum.
    pub last_term_ratio: f64,
    /// Set when the last included order exceeds 10% of the partial sum.
    pub divergence_warning: bool,
}

/// Sum `Ê_{n,k} B^n P^k` over stored orders with `n + k ≤ max_order`.
pub fn energy_series_eval(table: &PtTable, b: f64, p: f64, max_order: u32) -> SeriesValue {
    let mut e_hat = 0.0;
    let mut top_order = 0;
    let mut top = 0.0;
    for ((n, k), c) in table.entries() {
        if n + k > max_order || c.is_zero() {
            continue;
        }
        let term = c.to_f64().unwrap_or(f64::NAN) * b.powi(n as i32) * p.powi(k as i32);
        e_hat += term;
        match (n + k).cmp(&top_order) {
            std::cmp::Ordering::Greater => {
                top_order = n + k;
                top = term.abs();
            }
            std::cmp::Ordering::Equal => top += term.abs(),
            std::cmp::Ordering::Less => {}
        }
    }
    let ratio = if top_order == 0 || e_hat == 0.0 {
        0.0
    } else {
        top / e_hat.abs()
    };
    SeriesValue {
        e_hat,
        e: e_hat + 0.5 * p * p * table.inv_total_mass,
        last_term_ratio: ratio,
        divergence_warning: ratio > 0.1,
    }
}

/// Exact fraction when simple,
/// otherwise five significant digits.
pub fn format_coefficient(value: &BigRational, exact: bool) -> String {
    if value.is_zero() {
        return "0".to_string();
    }
    if exact {
        if value.denom().is_one() {
            return value.numer().to_string();
        }
        return format!("{}/{}", value.numer(), value.denom());
    }
    let v = value.to_f64().unwrap_or(f64::NAN);
    format_sig(v, 5)
}

pub(crate) fn format_sig(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-3..5).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{:.*e}", digits - 1, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn frac(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn static_hydrogen_column() {
        let t = energy_coefficients(&SystemSpec::hydrogen_static());
        assert_eq!(t.get(0, 0).unwrap(), frac(-2, 1));
        assert_eq!(t.get(2, 0).unwrap(), frac(3, 64));
        assert_eq!(t.get(4, 0).unwrap(), frac(-159, 65536));
        assert_eq!(t.get(2, 2).unwrap(), frac(0, 1));
        assert_eq!(t.get(4, 2).unwrap(), frac(0, 1));
        assert_eq!(t.get(4, 4).unwrap(), frac(0, 1));
    }

    #[test]
    fn positronium_column() {
        let t = energy_coefficients(&SystemSpec::positronium());
        assert_eq!(t.get(0, 0).unwrap(), frac(-1, 1));
        assert_eq!(t.get(2, 0).unwrap(), frac(3, 8));
        assert_eq!(t.get(4, 0).unwrap(), frac(-159, 512));
        assert_eq!(t.get(2, 2).unwrap(), frac(-21, 128));
        assert_eq!(t.get(4, 2).unwrap(), frac(-3093, 8192));
        assert_eq!(t.get(4, 4).unwrap(), frac(17877, 131072));
        assert!(t.is_simple());
    }

    #[test]
    fn finite_hydrogen_column() {
        let t = energy_coefficients(&SystemSpec::hydrogen());
        let expect = [
            ((0, 0), -1.9989),
            ((2, 0), 0.04695),
            ((4, 0), -0.002435),
            ((2, 2), -2.4344e-8),
            ((4, 2), 0.7735e-9),
            ((4, 4), 1.502e-15),
        ];
        for ((n, k), v) in expect {
            assert_relative_eq!(t.value(n, k).unwrap(), v, max_relative = 5e-4);
        }
        assert!(!t.is_simple());
    }

    #[test]
    fn odd_orders_vanish() {
        let t = energy_coefficients(&SystemSpec::hydrogen());
        for n in 0..=MAX_B_ORDER {
            for k in 0..=MAX_P_ORDER {
                if n % 2 == 1 || k % 2 == 1 {
                    assert_eq!(t.get(n, k), Some(BigRational::zero()), "({n},{k})");
                }
            }
        }
        assert_eq!(t.get(0, 2), Some(BigRational::zero()));
        assert_eq!(t.get(6, 0), None);
    }

    #[test]
    fn series_limits() {
        let h = SystemSpec::hydrogen();
        let t = energy_coefficients(&h);
        let v = energy_series_eval(&t, 0.0, 0.0, 8);
        assert_eq!(v.e_hat, -2.0 * h.reduced_mass());
        let a = energy_series_eval(&t, 0.1, 0.3, 8);
        let b = energy_series_eval(&t, 0.1, -0.3, 8);
        assert_eq!(a.e_hat, b.e_hat);
        assert_relative_eq!(a.e - a.e_hat, 0.045 / h.total_mass(), max_relative = 1e-12);

        let s = energy_coefficients(&SystemSpec::hydrogen_static());
        let v = energy_series_eval(&s, 0.01, 0.0, 3);
        assert_relative_eq!(v.e_hat, -2.0 + 3.0 / 64.0 * 1e-4, max_relative = 1e-15);
        assert!(!v.divergence_warning);
        assert!(energy_series_eval(&s, 10.0, 0.0, 8).divergence_warning);
    }

    #[test]
    fn formatting() {
        assert_eq!(format_coefficient(&frac(-159, 65536), true), "-159/65536");
        assert_eq!(format_coefficient(&frac(-2, 1), true), "-2");
        assert_eq!(format_sig(-2.4344e-8, 5), "-2.4344e-8");
        assert_eq!(format_sig(0.046952, 4), "0.04695");
        assert_eq!(format_sig(-1.99891, 5), "-1.9989");
    }
}
