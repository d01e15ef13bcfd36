//! Acceptance suite: one PASS/FAIL line per criterion. Runs as a plain binary
//! (`harness = false`) so the oracle solves are shared between criteria.

use std::cell::RefCell;
use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;

use magnetoatom::oracle::{self, CoulombTreatment, EigenOptions, GridSpec, Localization, OracleRun};
use magnetoatom::perturbation::{
    energy_coefficients, energy_series_eval, phase_eval, phase_gradient, riccati_residual, sample_points,
    MagneticSign,
};
use magnetoatom::potential::{cubic_residual, p_saddle, stationary_points, v_eff_axis, v_eff_axis_curvature, x_saddle};
use magnetoatom::units::{derive_system, scale_system};
use magnetoatom::variational::{
    energy_functional, optimize, scan_pc, trial_eval, Classification, CoulombPhase, MagneticPhase, QuadratureSpec,
    Strategy, TrialParams, VariationalResult,
};
use magnetoatom::{FieldConfig, SystemSpec};

type Outcome = Result<String, String>;
type Check = fn() -> Result<(), String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Shared solves, keyed by `(B_eff, P_eff)`.
#[derive(Default)]
struct Cache {
    variational: RefCell<HashMap<(u64, u64), VariationalResult>>,
    oracle: RefCell<HashMap<(u64, u64), OracleRun>>,
}

fn key(b: f64, p: f64) -> (u64, u64) {
    (b.to_bits(), p.to_bits())
}

impl Cache {
    fn variational(&self, b: f64, p: f64) -> Result<VariationalResult, String> {
        if let Some(r) = self.variational.borrow().get(&key(b, p)) {
            return Ok(r.clone());
        }
        let h = SystemSpec::hydrogen();
        let f = FieldConfig::new(&h, b, p, 0.0).map_err(|e| e.to_string())?;
        let r = optimize(None, &h, &f, &Strategy::default()).map_err(|e| format!("variational ({b}, {p}): {e}"))?;
        self.variational.borrow_mut().insert(key(b, p), r.clone());
        Ok(r)
    }

    /// Oracle at the variational gauge parameter, on the well the variational state occupies.
    fn oracle(&self, b: f64, p: f64) -> Result<OracleRun, String> {
        if let Some(r) = self.oracle.borrow().get(&key(b, p)) {
            return Ok(r.clone());
        }
        let v = self.variational(b, p)?;
        let place = match v.classification {
            Classification::Decentered => Localization::Magnetic,
            _ => Localization::Coulomb,
        };
        let h = SystemSpec::hydrogen();
        let f = FieldConfig::new(&h, b, p, v.params.d).map_err(|e| e.to_string())?;
        let run = GridSpec::auto(&h, &f, 256, place, CoulombTreatment::Calibrated)
            .and_then(|g| oracle::run(&h, &f, &g, 2, &EigenOptions::default()))
            .map_err(|e| format!("oracle ({b}, {p}): {e}"))?;
        if run.extrapolation.warning {
            return Err(format!("oracle ({b}, {p}): non-monotone refinement"));
        }
        self.oracle.borrow_mut().insert(key(b, p), run.clone());
        Ok(run)
    }
}

fn criterion1() -> Outcome {
    let h_inf = energy_coefficients(&SystemSpec::hydrogen_static());
    let ps = energy_coefficients(&SystemSpec::positronium());
    let h = energy_coefficients(&SystemSpec::hydrogen());
    let orders = [(0, 0), (2, 0), (4, 0), (2, 2), (4, 2), (4, 4)];
    let want_inf = [frac(-2, 1), frac(3, 64), frac(-159, 65536), frac(0, 1), frac(0, 1), frac(0, 1)];
    let want_ps = [
        frac(-1, 1),
        frac(3, 8),
        frac(-159, 512),
        frac(-21, 128),
        frac(-3093, 8192),
        frac(17877, 131072),
    ];
    let want_h: [f64; 6] = [-1.9989, 0.04695, -0.002435, -2.4344e-8, 0.7735e-9, 1.502e-15];
    for (i, &(n, k)) in orders.iter().enumerate() {
        let a = h_inf.get(n, k).ok_or(format!("missing E({n},{k}) for static H"))?;
        check(a == want_inf[i], format!("static H E({n},{k}) = {a}, want {}", want_inf[i]))?;
        let b = ps.get(n, k).ok_or(format!("missing E({n},{k}) for Ps"))?;
        check(b == want_ps[i], format!("Ps E({n},{k}) = {b}, want {}", want_ps[i]))?;
        let c = h.value(n, k).ok_or(format!("missing E({n},{k}) for H"))?;
        let digits = want_h[i].abs().log10().floor();
        let ulp4 = 10f64.powf(digits - 3.0);
        check(
            (c - want_h[i]).abs() <= 0.5 * ulp4 + 1e-12 * ulp4,
            format!("H E({n},{k}) = {c:.6e}, want {:.4e}", want_h[i]),
        )?;
    }
    Ok("limit columns exact, finite-mass H to 4 significant digits".into())
}

fn criterion2() -> Outcome {
    let pts = sample_points(100);
    let orders = [(0, 0), (1, 1), (2, 0), (2, 1), (0, 2)];
    let mut worst: f64 = 0.0;
    for sys in [SystemSpec::hydrogen(), SystemSpec::hydrogen_static(), SystemSpec::positronium()] {
        let res = riccati_residual(&sys, &orders, &pts, MagneticSign::Signed).map_err(|e| e.to_string())?;
        for r in &res {
            check(r.max_residual < 1e-8, format!("order {:?}: residual {:.2e}", r.order, r.max_residual))?;
            worst = worst.max(r.max_residual);
        }
        let mr = sys.reduced_mass();
        check(res[1].recovered_energy.abs() < 1e-10, format!("E(1,1) recovered as {:e}", res[1].recovered_energy))?;
        let e20 = 3.0 / (64.0 * mr.powi(3));
        check(
            (res[2].recovered_energy - e20).abs() < 1e-10 * e20,
            format!("E(2,0) recovered as {}, want {e20}", res[2].recovered_energy),
        )?;
    }
    Ok(format!("max residual {worst:.1e} over 100 points, seeds recovered"))
}

fn criterion3() -> Outcome {
    let h = SystemSpec::hydrogen();
    let b = FieldConfig::new(&h, 1.0, 0.0, 0.0).map_err(|e| e.to_string())?.b_int;
    let ps = p_saddle(&h, b).map_err(|e| e.to_string())?;
    check((ps - 36.7).abs() <= 0.1, format!("P_saddle = {ps:.4}"))?;

    let xs = x_saddle(&h, b).map_err(|e| e.to_string())?;
    for e in [0.5, 2.0, 3.0] {
        let sys = derive_system(e, h.m1(), Some(h.m2())).map_err(|e| e.to_string())?;
        let other = x_saddle(&sys, b).map_err(|e| e.to_string())?;
        check((other - xs).abs() <= 1e-12 * xs, format!("x_saddle at e = {e}: {other} vs {xs}"))?;
        // at its own saddle momentum the cubic has a double root at x_saddle
        let ps_e = p_saddle(&sys, b).map_err(|e| e.to_string())?;
        let f = FieldConfig::from_internal(&sys, b, ps_e, 0.0).map_err(|e| e.to_string())?;
        let scale = sys.total_mass() / (b * b);
        check(
            cubic_residual(xs, &sys, &f).abs() < 1e-9 * scale,
            format!("cubic residual at the saddle for e = {e}"),
        )?;
    }

    let mut worst: f64 = 0.0;
    for (b_eff, p) in [(1.0, 50.0), (1.0, 100.0), (0.1, 150.0), (10.0, 300.0)] {
        let f = FieldConfig::new(&h, b_eff, p, 0.0).map_err(|e| e.to_string())?;
        let cp = stationary_points(&h, &f).map_err(|e| e.to_string())?;
        let scale = h.total_mass() / (f.b_int * f.b_int);
        for x in [cp.x_max, cp.x_min].into_iter().flatten() {
            let r = cubic_residual(x, &h, &f).abs() / scale;
            worst = worst.max(r);
        }
    }
    check(worst < 1e-9, format!("relative cubic residual {worst:.1e}"))?;
    Ok(format!("P_saddle = {ps:.3}, x_saddle = {xs:.3}, cubic residual {worst:.1e}"))
}

fn criterion4(cache: &Cache) -> Outcome {
    let points = [
        (1.0, 0.0, -1.4587),
        (1.0, 50.0, -0.7787),
        (1.0, 100.0, 1.261),
        (10.0, 0.0, 11.299),
        (0.1, 150.0, 0.19722f64),
    ];
    let mut lines = Vec::new();
    for (b, p, want) in points {
        let v = cache.variational(b, p)?;
        let tol = if b <= 1.0 { 2e-3 } else { 5e-3 * want.abs() };
        check(
            (v.energy - want).abs() <= tol,
            format!("({b}, {p}): E = {:.6}, want {want} ± {tol:.1e}", v.energy),
        )?;
        if (b, p) == (0.1, 150.0) {
            check(
                v.classification == Classification::Decentered,
                format!("(0.1, 150) classified {}", v.classification.as_str()),
            )?;
        }
        let o = cache.oracle(b, p)?;
        check(
            v.energy >= o.energy() - o.tolerance(),
            format!("({b}, {p}): variational {:.6} below oracle {:.6} − {:.1e}", v.energy, o.energy(), o.tolerance()),
        )?;
        lines.push(format!("({b},{p}) {:.5}≥{:.5}", v.energy, o.energy()));
    }
    Ok(lines.join(", "))
}

fn criterion5() -> Outcome {
    let h = SystemSpec::hydrogen();
    let s = Strategy::default();
    let cases = [
        (0.1, vec![50.0, 75.0, 100.0, 125.0], (75.0, 100.0)),
        (1.0, vec![75.0, 100.0, 125.0, 150.0], (100.0, 125.0)),
        (10.0, vec![150.0, 175.0, 200.0, 225.0], (175.0, 200.0)),
    ];
    let mut brackets = Vec::new();
    for (b, grid, want) in cases {
        let scan = scan_pc(&h, b, &grid, &s).map_err(|e| format!("B = {b}: {e}"))?;
        check(scan.bracket == want, format!("B = {b}: bracket {:?}, want {want:?}", scan.bracket))?;
        brackets.push(scan.bracket);
    }
    check(
        brackets.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 > w[0].1),
        format!("brackets not monotone in B: {brackets:?}"),
    )?;
    Ok(format!("brackets {brackets:?}"))
}

fn criterion6(cache: &Cache) -> Outcome {
    let h = SystemSpec::hydrogen();
    let v = cache.variational(1.0, 0.0)?;
    check((v.rho_mean - 0.39).abs() <= 0.02, format!("<rho>(1, 0) = {:.4}", v.rho_mean))?;
    let mut parts = vec![format!("<rho>(1,0) = {:.4}", v.rho_mean)];
    for p in [100.0, 150.0, 200.0] {
        let r = cache.variational(0.1, p)?;
        let f = FieldConfig::new(&h, 0.1, p, 0.0).map_err(|e| e.to_string())?;
        let x_min = stationary_points(&h, &f)
            .map_err(|e| e.to_string())?
            .x_min
            .ok_or(format!("no magnetic well at P = {p}"))?;
        check(
            r.classification == Classification::Decentered,
            format!("(0.1, {p}) classified {}", r.classification.as_str()),
        )?;
        check(
            (r.rho_mean - x_min).abs() <= 0.02 * x_min,
            format!("(0.1, {p}): <rho> = {:.2}, x_min = {x_min:.2}", r.rho_mean),
        )?;
        parts.push(format!("P={p}: {:.1}/{x_min:.1}", r.rho_mean));
    }
    Ok(parts.join(", "))
}

fn criterion7(cache: &Cache) -> Outcome {
    let table = [(0.0, -1.45879), (25.0, -1.28877), (50.0, -0.77871), (100.0, 1.26149)];
    let mut parts = Vec::new();
    for (p, want) in table {
        let o = cache.oracle(1.0, p)?;
        check(
            (o.energy() - want).abs() <= 2e-3,
            format!("P = {p}: oracle {:.6}, want {want}", o.energy()),
        )?;
        let v = cache.variational(1.0, p)?;
        check(
            v.energy - o.energy() >= -o.tolerance(),
            format!("P = {p}: variational {:.6} below oracle {:.6}", v.energy, o.energy()),
        )?;
        parts.push(format!("P={p}: {:.5}", o.energy()));
    }
    Ok(parts.join(", "))
}

fn scaling_invariance() -> Result<(), String> {
    let h = SystemSpec::hydrogen();
    let tables = (energy_coefficients(&h), h.clone());
    for (e, k) in [(1.5, 2.0), (0.7, 0.3), (2.0, 1.0)] {
        let tgt = derive_system(e, k * h.m1(), Some(k * h.m2())).map_err(|e| e.to_string())?;
        let t_tab = energy_coefficients(&tgt);
        for (b, p) in [(0.01, 0.0), (0.02, 0.5), (0.05, 1.0)] {
            let map = scale_system(&tables.1, b, p, &tgt).map_err(|e| e.to_string())?;
            let src = energy_series_eval(&tables.0, b, p, 8).e_hat;
            let dst = energy_series_eval(&t_tab, map.b_target, map.p_target, 8).e_hat;
            let rel = (dst - src * map.energy_ratio).abs() / dst.abs();
            check(rel < 1e-10, format!("scaling e = {e}, k = {k}, ({b}, {p}): relative {rel:.1e}"))?;
        }
    }
    Ok(())
}

fn gradient_checks() -> Result<(), String> {
    let h = SystemSpec::hydrogen();
    let step = 1e-5;
    for order in [(0, 0), (2, 0), (1, 1), (2, 1), (0, 2), (2, 2)] {
        for &(rho, phi) in &sample_points(20) {
            let (x, y) = (rho * phi.cos(), rho * phi.sin());
            let at = |x: f64, y: f64| phase_eval(&h, order, x.hypot(y), y.atan2(x)).unwrap();
            let g = phase_gradient(&h, order, rho, phi).map_err(|e| e.to_string())?;
            let fd = [
                (at(x + step, y) - at(x - step, y)) / (2.0 * step),
                (at(x, y + step) - at(x, y - step)) / (2.0 * step),
            ];
            let scale = g[0].norm().max(g[1].norm()).max(1e-3);
            for c in 0..2 {
                let err = (g[c] - fd[c]).norm() / scale;
                check(err < 1e-6, format!("phase {order:?} gradient at ({rho:.2}, {phi:.2}): {err:.1e}"))?;
            }
        }
    }

    let params = TrialParams {
        coulomb: Some(CoulombPhase { a: [0.1, 1.9, 0.05, 0.2, 0.1, 0.3], alpha_c: 0.2 }),
        magnetic: Some(MagneticPhase { d: [0.5, 0.3, 0.25, 0.1, 0.0, 0.1, 0.05], x_m: 2.0 }),
        c1: 1.0,
        c2: 0.4,
        d: 0.0,
    };
    for &(x, y) in &[(0.3, 0.2), (-0.7, 1.1), (1.8, -0.4), (2.5, 0.6)] {
        let (_, g) = trial_eval(&params, x, y).map_err(|e| e.to_string())?;
        let at = |x: f64, y: f64| trial_eval(&params, x, y).unwrap().0;
        let fd = [
            (at(x + step, y) - at(x - step, y)) / (2.0 * step),
            (at(x, y + step) - at(x, y - step)) / (2.0 * step),
        ];
        let scale = g[0].abs().max(g[1].abs());
        for c in 0..2 {
            let err = (g[c] - fd[c]).abs() / scale;
            check(err < 1e-6, format!("trial gradient at ({x}, {y}): {err:.1e}"))?;
        }
    }

    let f = FieldConfig::new(&h, 1.0, 80.0, 0.0).map_err(|e| e.to_string())?;
    for x in [1.0, 5.0, 20.0] {
        let s = 1e-4 * x;
        let v = |x: f64| v_eff_axis(x, &h, &f).unwrap();
        let fd = (v(x + s) - 2.0 * v(x) + v(x - s)) / (s * s);
        let exact = v_eff_axis_curvature(x, &h, &f);
        let err = (fd - exact).abs() / exact.abs().max(1e-3);
        check(err < 1e-6, format!("axis curvature at x = {x}: {err:.1e}"))?;
    }
    Ok(())
}

fn field_free_limits() -> Result<(), String> {
    let h = SystemSpec::hydrogen();
    let mr = h.reduced_mass();
    let f = FieldConfig::new(&h, 0.0, 0.0, 0.0).map_err(|e| e.to_string())?;
    let v = optimize(None, &h, &f, &Strategy::default()).map_err(|e| e.to_string())?;
    check((v.energy + 2.0 * mr).abs() < 1e-6, format!("variational E(0, 0) = {}", v.energy))?;
    check(
        (v.rho_mean - 0.5 / mr).abs() < 1e-4,
        format!("variational <rho>(0, 0) = {}", v.rho_mean),
    )?;

    // off-center box of a different size than the one the Coulomb constant is fitted on
    let g = GridSpec::centered_at(0.7, 9.0, 200, CoulombTreatment::Calibrated).map_err(|e| e.to_string())?;
    let run = oracle::run(&h, &f, &g, 2, &EigenOptions::default()).map_err(|e| e.to_string())?;
    check(
        (run.energy() + 2.0 * mr).abs() < 5e-3,
        format!("oracle E(0, 0) = {:.5}, want {:.5}", run.energy(), -2.0 * mr),
    )?;
    Ok(())
}

fn positronium_d_independence() -> Result<(), String> {
    let ps = SystemSpec::positronium();
    let params = TrialParams {
        coulomb: Some(CoulombPhase { a: [0.0, 1.0, 0.02, 0.15, 0.0, 0.2], alpha_c: 0.1 }),
        magnetic: None,
        c1: 1.0,
        c2: 0.0,
        d: 0.0,
    };
    let quad = QuadratureSpec::level(1);
    let mut energies = Vec::new();
    for d in [0.0, 0.3, 0.7, 1.0] {
        let f = FieldConfig::new(&ps, 1.0, 2.0, d).map_err(|e| e.to_string())?;
        let p = TrialParams { d, ..params };
        energies.push(energy_functional(&p, &ps, &f, &quad).map_err(|e| e.to_string())?.energy);
    }
    let spread = energies.iter().fold(0.0f64, |m, e| m.max((e - energies[0]).abs()));
    check(spread < 1e-10 * energies[0].abs().max(1.0), format!("Ps variational spread over d: {spread:.1e}"))?;

    let mut oracle_e = Vec::new();
    for d in [0.0, 1.0] {
        let f = FieldConfig::new(&ps, 1.0, 2.0, d).map_err(|e| e.to_string())?;
        let g = GridSpec::auto(&ps, &f, 64, Localization::Coulomb, CoulombTreatment::Calibrated)
            .map_err(|e| e.to_string())?;
        oracle_e.push(oracle::run(&ps, &f, &g, 1, &EigenOptions::default()).map_err(|e| e.to_string())?.energy());
    }
    check(
        (oracle_e[0] - oracle_e[1]).abs() < 1e-8,
        format!("Ps oracle d = 0: {}, d = 1: {}", oracle_e[0], oracle_e[1]),
    )?;
    Ok(())
}

fn oracle_symmetries() -> Result<(), String> {
    let h = SystemSpec::hydrogen();
    let f = FieldConfig::new(&h, 1.0, 50.0, 0.3).map_err(|e| e.to_string())?;
    let g = GridSpec::auto(&h, &f, 64, Localization::Coulomb, CoulombTreatment::Calibrated).map_err(|e| e.to_string())?;
    let op = oracle::assemble(&h, &f, &g).map_err(|e| e.to_string())?;
    let defect = op.hermiticity_defect();
    check(defect < 1e-12, format!("Hermiticity defect {defect:.1e}"))?;

    let f = FieldConfig::new(&h, 1.0, 25.0, 0.0).map_err(|e| e.to_string())?;
    let g = GridSpec::auto(&h, &f, 128, Localization::Coulomb, CoulombTreatment::Calibrated).map_err(|e| e.to_string())?;
    let solve = |g: &GridSpec| oracle::run(&h, &f, g, 1, &EigenOptions::default()).map(|r| r.energy());
    let base = solve(&g).map_err(|e| e.to_string())?;
    for (di, dj) in [(1, 0), (0, 1), (-1, -1)] {
        let moved = solve(&g.translated(di, dj)).map_err(|e| e.to_string())?;
        check(
            (moved - base).abs() < 1e-4,
            format!("translation ({di}, {dj}): {moved:.7} vs {base:.7}"),
        )?;
    }
    Ok(())
}

fn criterion8() -> Outcome {
    let mut done = Vec::new();
    let parts: [(&str, Check); 5] = [
        ("scaling", scaling_invariance),
        ("gradients", gradient_checks),
        ("B=P=0 limits", field_free_limits),
        ("Ps d-independence", positronium_d_independence),
        ("oracle symmetries", oracle_symmetries),
    ];
    for (name, f) in parts {
        f().map_err(|e| format!("{name}: {e}"))?;
        done.push(name);
    }
    Ok(done.join(", "))
}

fn main() -> ExitCode {
    let cache = Cache::default();
    let criteria: Vec<Criterion> = vec![
        ("perturbation coefficients", Box::new(criterion1)),
        ("Riccati residuals", Box::new(criterion2)),
        ("critical points", Box::new(criterion3)),
        ("variational energies", Box::new(|| criterion4(&cache))),
        ("centered/decentered transition", Box::new(criterion5)),
        ("expectation values", Box::new(|| criterion6(&cache))),
        ("oracle agreement", Box::new(|| criterion7(&cache))),
        ("property suite", Box::new(criterion8)),
    ];
    // ACCEPTANCE_ONLY=4,7 runs a subset
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let mut failed = 0;
    let mut ran = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if only.as_ref().is_some_and(|o| !o.contains(&(i + 1))) {
            continue;
        }
        ran += 1;
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} ({secs:.1} s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({secs:.1} s): {why}", i + 1);
            }
        }
    }
    println!("{} of {ran} criteria passed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
