//! Multi-start simplex search over the nonlinear trial parameters.
//!
//! The linear weights never enter the search: every evaluation solves the
//! 1×1 or 2×2 pencil exactly. Two families are searched separately (Coulomb
//! basis alone, magnetic basis alone) and then combined into the full
//! two-term function.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::potential::stationary_points;
use crate::units::{FieldConfig, SystemSpec};

use super::functional::{converged_energy, energy_functional, EnergyEval};
use super::quadrature::QuadratureSpec;
use super::simplex::{nelder_mead, SimplexOptions};
use super::trial::{CoulombPhase, MagneticPhase, TrialParams, WellExpansion};
use super::Classification;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedFamily {
    Centered,
    Decentered,
    Both,
}

impl std::str::FromStr for SeedFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "centered" => Ok(Self::Centered),
            "decentered" => Ok(Self::Decentered),
            "both" => Ok(Self::Both),
            _ => Err(Error::InvalidParameter(format!("unknown seed family {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Strategy {
    /// Simplex restarts per seed after the first run.
    pub restarts: usize,
    pub seed_family: SeedFamily,
    /// Quadrature used inside the search.
    pub search_quad: QuadratureSpec,
    /// Quadrature of the reported energy.
    pub final_quad: QuadratureSpec,
    /// Evaluation budget of one simplex run.
    pub max_evals: usize,
    pub seed: u64,
}

impl Default for Strategy {
    fn default() -> Self {
        Self {
            restarts: 8,
            seed_family: SeedFamily::Both,
            search_quad: QuadratureSpec::level(0),
            final_quad: QuadratureSpec::level(1),
            max_evals: 3000,
            seed: 0x5eed,
        }
    }
}

impl Strategy {
    /// Search and report at quadrature level `level` (the search runs one level lower).
    pub fn with_quad_level(self, level: u32) -> Self {
        Self {
            search_quad: QuadratureSpec::level(level.saturating_sub(1)),
            final_quad: QuadratureSpec::level(level),
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Diagnostics {
    pub evaluations: usize,
    pub restarts: usize,
    /// Energy change between the reporting level and the next refinement.
    pub quadrature_error: f64,
    pub nodes: usize,
    /// Best energy of the Coulomb-basis family, if searched.
    pub centered_energy: Option<f64>,
    /// Best energy of the magnetic-basis family, if searched.
    pub decentered_energy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariationalResult {
    pub energy: f64,
    pub params: TrialParams,
    pub rho_mean: f64,
    pub classification: Classification,
    pub overlap: [[f64; 2]; 2],
    pub hamiltonian: [[f64; 2]; 2],
    /// Upper root of the 2×2 pencil; not an accurate excited level.
    pub second_root: Option<f64>,
    pub eval: EnergyEval,
    pub diagnostics: Diagnostics,
}

/// How a family maps a flat vector to trial parameters.
#[derive(Debug, Clone, Copy)]
enum Family {
    Centered { gauge: bool },
    Decentered { gauge: bool },
}

impl Family {
    fn decode(&self, x: &[f64]) -> TrialParams {
        match *self {
            Family::Centered { gauge } => TrialParams {
                coulomb: Some(CoulombPhase {
                    a: [x[0], x[1], x[2], x[3], x[4], x[5]],
                    alpha_c: x[6],
                }),
                magnetic: None,
                c1: 1.0,
                c2: 0.0,
                d: if gauge { x[7].sin().powi(2) } else { 0.0 },
            },
            Family::Decentered { gauge } => TrialParams {
                coulomb: None,
                magnetic: Some(MagneticPhase {
                    d: [x[0], x[1], x[2], x[3], x[4], x[5], x[6]],
                    x_m: x[7],
                }),
                c1: 0.0,
                c2: 1.0,
                d: if gauge { x[8].sin().powi(2) } else { 1.0 },
            },
        }
    }
}

struct Seed {
    family: Family,
    x: Vec<f64>,
    steps: Vec<f64>,
}

fn gauge_matters(sys: &SystemSpec, fields: &FieldConfig) -> bool {
    fields.b_int > 0.0 && fields.p_int > 0.0 && sys.q_w() != 0.0
}

fn centered_seeds(sys: &SystemSpec, fields: &FieldConfig) -> Vec<Seed> {
    let gauge = gauge_matters(sys, fields);
    let e = sys.e();
    let a1 = 2.0 * sys.reduced_mass() * e * e;
    let eb = e * fields.b_int;
    let kappas: &[f64] = if eb > 0.0 { &[0.6, 1.2] } else { &[0.0] };
    kappas
        .iter()
        .map(|&k| {
            let a5 = k * eb.sqrt() / 2.0;
            let a3 = (a5 * eb / 4.0).sqrt();
            let mut x = vec![0.0, a1, 0.0, a3, 0.0, a5, 0.0];
            let mut steps = vec![0.1, 0.1 * a1, 0.05, 0.1 * a3.max(0.3), 0.05, 0.1 * a5.max(0.3), 0.2];
            if gauge {
                x.push(0.0);
                steps.push(0.1);
            }
            Seed {
                family: Family::Centered { gauge },
                x,
                steps,
            }
        })
        .collect()
}

fn decentered_seeds(sys: &SystemSpec, fields: &FieldConfig) -> Vec<Seed> {
    if fields.b_int <= 0.0 || sys.is_infinite_mass() {
        return vec![];
    }
    let Ok(cp) = stationary_points(sys, fields) else {
        return vec![];
    };
    let Some(x_min) = cp.x_min else {
        return vec![];
    };
    let gauge = gauge_matters(sys, fields);
    let b = fields.b_int;
    let Ok(well) = WellExpansion::at(sys, b, x_min) else {
        return vec![];
    };
    let tail = sys.e() * b / 4.0;
    let width = (2.0 / (sys.e() * b)).sqrt();
    [0.1, 0.5]
        .iter()
        .map(|&k| {
            let m = well.seed_phase(sys, b, k);
            let mut x = m.d.to_vec();
            x.push(m.x_m);
            let mut steps: Vec<f64> = m
                .d
                .iter()
                .map(|v| if v.abs() > 1e-12 { 0.1 * v.abs() } else { 0.05 * tail })
                .collect();
            steps[0] = 0.1;
            steps.push(0.2 * width);
            if gauge {
                x.push(std::f64::consts::FRAC_PI_2);
                steps.push(0.1);
            }
            Seed {
                family: Family::Decentered { gauge },
                x,
                steps,
            }
        })
        .collect()
}

struct FamilyBest {
    family: Family,
    x: Vec<f64>,
    energy: f64,
    evals: usize,
    restarts: usize,
}

fn objective<'a>(
    family: Family,
    sys: &'a SystemSpec,
    fields: &'a FieldConfig,
    quad: &QuadratureSpec,
) -> impl Fn(&[f64]) -> f64 + 'a {
    let quad = *quad;
    move |x: &[f64]| {
        let p = family.decode(x);
        match energy_functional(&p, sys, fields, &quad) {
            Ok(ev) => ev.energy,
            Err(_) => f64::INFINITY,
        }
    }
}

fn search(seed: &Seed, index: usize, sys: &SystemSpec, fields: &FieldConfig, strategy: &Strategy) -> FamilyBest {
    let mut rng = ChaCha8Rng::seed_from_u64(strategy.seed ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let opts = SimplexOptions {
        max_evals: strategy.max_evals,
        ..Default::default()
    };
    let f = objective(seed.family, sys, fields, &strategy.search_quad);
    let mut best = nelder_mead(&f, &seed.x, &seed.steps, &opts);
    let mut evals = best.evals;
    let mut restarts = 0;
    let mut stall = 0;
    for _ in 0..strategy.restarts {
        restarts += 1;
        let steps: Vec<f64> = seed
            .steps
            .iter()
            .map(|s| {
                let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                sign * s * rng.gen_range(0.2..1.0)
            })
            .collect();
        let r = nelder_mead(&f, &best.x, &steps, &opts);
        evals += r.evals;
        if r.f < best.f - 1e-10 * best.f.abs().max(1.0) {
            best = r;
            stall = 0;
        } else {
            if r.f < best.f {
                best = r;
            }
            stall += 1;
            if stall >= 2 {
                break;
            }
        }
    }
    // short polish at the reporting quadrature
    let g = objective(seed.family, sys, fields, &strategy.final_quad);
    let small: Vec<f64> = seed.steps.iter().map(|s| 0.05 * s).collect();
    let polish = nelder_mead(
        &g,
        &best.x,
        &small,
        &SimplexOptions {
            max_evals: strategy.max_evals / 3,
            ..opts
        },
    );
    evals += polish.evals;
    FamilyBest {
        family: seed.family,
        x: polish.x,
        energy: polish.f,
        evals,
        restarts,
    }
}

/// Minimize the energy over all nonlinear parameters.
pub fn optimize(
    start: Option<&TrialParams>,
    sys: &SystemSpec,
    fields: &FieldConfig,
    strategy: &Strategy,
) -> Result<VariationalResult> {
    let mut seeds = Vec::new();
    if let Some(p) = start {
        seeds.extend(seeds_from_params(p, sys, fields));
    }
    if matches!(strategy.seed_family, SeedFamily::Centered | SeedFamily::Both) {
        seeds.extend(centered_seeds(sys, fields));
    }
    if matches!(strategy.seed_family, SeedFamily::Decentered | SeedFamily::Both) {
        seeds.extend(decentered_seeds(sys, fields));
    }
    if seeds.is_empty() {
        return Err(match stationary_points(sys, fields) {
            Ok(cp) => Error::OutOfRegime {
                p: fields.p_int,
                p_saddle: cp.p_saddle,
            },
            Err(e) => e,
        });
    }

    let runs: Vec<FamilyBest> = seeds
        .par_iter()
        .enumerate()
        .map(|(i, s)| search(s, i, sys, fields, strategy))
        .collect();
    let evaluations: usize = runs.iter().map(|r| r.evals).sum();
    let restarts: usize = runs.iter().map(|r| r.restarts).sum();

    let best_of = |want_centered: bool| {
        runs.iter()
            .enumerate()
            .filter(|(_, r)| matches!(r.family, Family::Centered { .. }) == want_centered)
            .filter(|(_, r)| r.energy.is_finite())
            .min_by(|(i, a), (j, b)| a.energy.total_cmp(&b.energy).then(i.cmp(j)))
            .map(|(_, r)| r)
    };
    let centered = best_of(true);
    let decentered = best_of(false);

    let mut candidates: Vec<TrialParams> = Vec::new();
    if let Some(c) = centered {
        candidates.push(c.family.decode(&c.x));
    }
    if let Some(m) = decentered {
        candidates.push(m.family.decode(&m.x));
    }
    if let (Some(c), Some(m)) = (centered, decentered) {
        let pc = c.family.decode(&c.x);
        let pm = m.family.decode(&m.x);
        for d in [pc.d, pm.d] {
            candidates.push(TrialParams {
                coulomb: pc.coulomb,
                magnetic: pm.magnetic,
                c1: 1.0,
                c2: 1.0,
                d,
            });
        }
    }
    let mut best: Option<(TrialParams, EnergyEval)> = None;
    for p in candidates {
        let Ok(ev) = energy_functional(&p, sys, fields, &strategy.final_quad) else {
            continue;
        };
        if best.as_ref().is_none_or(|(_, b)| ev.energy < b.energy) {
            best = Some((p, ev));
        }
    }
    let (mut params, _) = best.ok_or_else(|| Error::InvalidTrial("no seed produced a finite energy".into()))?;
    let max_level = strategy.final_quad.level + 2;
    let (eval, quadrature_error) = converged_energy(&params, sys, fields, &strategy.final_quad, max_level)?;
    let w = eval.unshifted_weights();
    if params.coulomb.is_some() && params.magnetic.is_some() {
        params.c1 = w[0];
        params.c2 = w[1];
    }
    Ok(VariationalResult {
        energy: eval.energy,
        params,
        rho_mean: eval.rho_mean(),
        classification: eval.classification(),
        overlap: eval.matrices.overlap,
        hamiltonian: eval.matrices.hamiltonian,
        second_root: eval.second,
        diagnostics: Diagnostics {
            evaluations,
            restarts,
            quadrature_error,
            nodes: eval.nodes,
            centered_energy: centered.map(|c| c.energy),
            decentered_energy: decentered.map(|m| m.energy),
        },
        eval,
    })
}

fn seeds_from_params(p: &TrialParams, sys: &SystemSpec, fields: &FieldConfig) -> Vec<Seed> {
    let gauge = gauge_matters(sys, fields);
    let t = p.d.clamp(0.0, 1.0).sqrt().asin();
    let mut out = Vec::new();
    if let Some(c) = p.coulomb {
        let mut x: Vec<f64> = c.a.to_vec();
        x.push(c.alpha_c);
        let mut steps: Vec<f64> = x.iter().map(|v| 0.1 * v.abs().max(0.3)).collect();
        if gauge {
            x.push(t);
            steps.push(0.1);
        }
        out.push(Seed {
            family: Family::Centered { gauge },
            x,
            steps,
        });
    }
    if let Some(m) = p.magnetic {
        let mut x: Vec<f64> = m.d.to_vec();
        x.push(m.x_m);
        let mut steps: Vec<f64> = x.iter().map(|v| 0.1 * v.abs().max(0.1)).collect();
        if gauge {
            x.push(t);
            steps.push(0.1);
        }
        out.push(Seed {
            family: Family::Decentered { gauge },
            x,
            steps,
        });
    }
    out
}
