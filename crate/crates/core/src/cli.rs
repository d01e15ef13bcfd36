//! Command-line front end. Every subcommand reads the shared config file,
//! writes CSV to stdout or `--output`, and optionally a run manifest.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::oracle::{self, CoulombTreatment, EigenOptions, GridSpec, Localization};
use crate::perturbation::{energy_coefficients, energy_series_eval, format_coefficient};
use crate::potential::{stationary_points, v_eff_axis};
use crate::variational::{optimize, scan_pc, Classification, SeedFamily, Strategy, VariationalResult};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "MAGNETOATOM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "magnetoatom", version, about = "Moving two-charge system in a magnetic field")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Run configuration (key=value).
    #[arg(long)]
    pub config: PathBuf,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Write a run manifest (key=value) here.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 1)]
    pub quad_level: u32,
    #[arg(long, default_value = "both")]
    pub seed_family: SeedFamily,
    #[arg(long, default_value_t = 0x5eed)]
    pub seed: u64,
}

impl SearchArgs {
    fn strategy(&self) -> Strategy {
        Strategy {
            restarts: self.restarts,
            seed_family: self.seed_family,
            seed: self.seed,
            ..Strategy::default()
        }
        .with_quad_level(self.quad_level)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Perturbative energy coefficients, optionally summed on a (B, P) grid.
    PtCoeffs {
        #[command(flatten)]
        common: Common,
        /// Also write the summed series on the B × P grid to this CSV.
        #[arg(long)]
        grid_csv: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "0,0.01,0.05,0.1")]
        b_list: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,1")]
        p_list: Vec<f64>,
        #[arg(long, default_value_t = 8)]
        max_order: u32,
    },
    /// Effective potential along the x axis and its stationary points.
    Potential {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.05)]
        x_min: f64,
        #[arg(long, default_value_t = 100.0)]
        x_max: f64,
        #[arg(long, default_value_t = 400)]
        points: usize,
    },
    /// Variational energies on a B × P grid with centered/decentered flags.
    Table2 {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.1,1,10")]
        b_list: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0,1,25,50,75,100,125,150,175,200")]
        p_list: Vec<f64>,
    },
    /// Variational ground state at the configured field and momentum.
    Variational {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        search: SearchArgs,
        /// Write the optimal parameters as a text table.
        #[arg(long)]
        emit_params: Option<PathBuf>,
        /// Write the result row as CSV (same as --output).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Centered-to-decentered switch momentum for each field.
    ScanPc {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.1,1,10")]
        b_list: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0,25,50,75,100,125,150,175,200")]
        p_list: Vec<f64>,
    },
    /// Finite-difference ground state with Richardson extrapolation.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Nodes per side on the coarsest grid.
        #[arg(long, default_value_t = 256)]
        grid: usize,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..=2))]
        levels: u32,
        /// Gauge parameter, or `from-variational` to take it from a variational run.
        #[arg(long)]
        d: Option<String>,
        #[command(flatten)]
        search: SearchArgs,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::PtCoeffs { .. } => "pt-coeffs",
            Command::Potential { .. } => "potential",
            Command::Table2 { .. } => "table2",
            Command::Variational { .. } => "variational",
            Command::ScanPc { .. } => "scan-pc",
            Command::Oracle { .. } => "oracle",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::PtCoeffs { common, .. }
            | Command::Potential { common, .. }
            | Command::Table2 { common, .. }
            | Command::Variational { common, .. }
            | Command::ScanPc { common, .. }
            | Command::Oracle { common, .. } => common,
        }
    }
}

/// Subcommand, resolved config, seeds and output paths of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: Vec<(String, String)>,
    pub seeds: Vec<u64>,
    pub version: String,
    pub timestamp: u64,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "subcommand={}", self.subcommand);
        let _ = writeln!(s, "version={}", self.version);
        let _ = writeln!(s, "timestamp={}", self.timestamp);
        for (k, v) in &self.config {
            let _ = writeln!(s, "config.{k}={v}");
        }
        let seeds: Vec<String> = self.seeds.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(s, "seeds={}", seeds.join(","));
        for o in &self.outputs {
            let _ = writeln!(s, "output={}", o.display());
        }
        s
    }
}

/// Linear weights can differ by many orders of magnitude.
fn sci(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.10e}")
    } else {
        String::new()
    }
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.10}")
    } else {
        String::new()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

fn emit(common: &Common, text: &str) -> Result<()> {
    match &common.output {
        Some(path) => write_file(path, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Run a parsed command line. Output is produced only after all work is done.
pub fn run(cli: Cli) -> Result<()> {
    let cmd = &cli.command;
    let common = cmd.common();
    let cfg = RunConfig::load(&common.config)?;
    let mut outputs: Vec<PathBuf> = common.output.iter().cloned().collect();
    let mut seeds = Vec::new();
    let text = match cmd {
        Command::PtCoeffs { grid_csv, b_list, p_list, max_order, .. } => {
            if let Some(path) = grid_csv {
                write_file(path, &pt_grid(&cfg, b_list, p_list, *max_order)?)?;
                outputs.push(path.clone());
            }
            pt_table(&cfg)
        }
        Command::Potential { x_min, x_max, points, .. } => {
            let (csv, summary) = potential_profile(&cfg, *x_min, *x_max, *points)?;
            eprintln!("{summary}");
            csv
        }
        Command::Table2 { search, b_list, p_list, .. } => {
            seeds.push(search.seed);
            table2(&cfg, &search.strategy(), b_list, p_list)?
        }
        Command::Variational { search, emit_params, csv, .. } => {
            seeds.push(search.seed);
            let fields = cfg.fields()?;
            let res = optimize(None, &cfg.system, &fields, &search.strategy())?;
            if let Some(path) = emit_params {
                write_file(path, &params_report(&cfg, &res))?;
                outputs.push(path.clone());
            }
            let text = variational_csv(&[(cfg.b_eff, cfg.p_eff, res)]);
            if let Some(path) = csv {
                write_file(path, &text)?;
                outputs.push(path.clone());
            }
            text
        }
        Command::ScanPc { search, b_list, p_list, .. } => {
            seeds.push(search.seed);
            scan_table(&cfg, &search.strategy(), b_list, p_list)?
        }
        Command::Oracle { grid, levels, d, search, .. } => {
            let from_var = d.as_deref() == Some("from-variational");
            if from_var {
                seeds.push(search.seed);
            }
            oracle_table(&cfg, *grid, *levels as usize, d.as_deref(), &search.strategy())?
        }
    };
    emit(common, &text)?;
    if let Some(path) = &common.manifest {
        let manifest = RunManifest {
            subcommand: cmd.name().to_string(),
            config: cfg.resolved.clone(),
            seeds,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            outputs,
        };
        write_file(path, &manifest.render())?;
    }
    Ok(())
}

/// Configure the global thread pool from [`THREADS_ENV`].
pub fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(Error::Config(format!("{THREADS_ENV} must be positive")));
        }
        // a pool that is already built keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

pub fn pt_table(cfg: &RunConfig) -> String {
    let table = energy_coefficients(&cfg.system);
    let exact = table.is_simple();
    let mut s = String::from("order,coefficient [Hartree per internal B^n P^k]\n");
    for ((n, k), c) in table.entries() {
        let _ = writeln!(s, "E_{n}{k},{}", format_coefficient(c, exact));
    }
    s
}

pub fn pt_grid(cfg: &RunConfig, b_list: &[f64], p_list: &[f64], max_order: u32) -> Result<String> {
    let table = energy_coefficients(&cfg.system);
    let mut s = String::from(
        "B_eff [effective a.u.],P [effective a.u.],E_hat [Hartree],E [Hartree],last_term_ratio,divergent\n",
    );
    for &b in b_list {
        for &p in p_list {
            let f = cfg.fields_at(b, p, 0.0)?;
            let v = energy_series_eval(&table, f.b_int, f.p_int, max_order);
            let _ = writeln!(
                s,
                "{b},{p},{},{},{:.3e},{}",
                num(v.e_hat),
                num(v.e),
                v.last_term_ratio,
                v.divergence_warning
            );
        }
    }
    Ok(s)
}

pub fn potential_profile(cfg: &RunConfig, x_min: f64, x_max: f64, points: usize) -> Result<(String, String)> {
    if !(x_min < x_max) || points < 2 {
        return Err(Error::InvalidParameter("need x_min < x_max and at least 2 points".into()));
    }
    let f = cfg.fields()?;
    let mut s = String::from("x [a.u.],V_eff [Hartree]\n");
    for i in 0..points {
        let x = x_min + (x_max - x_min) * i as f64 / (points - 1) as f64;
        let _ = writeln!(s, "{},{}", num(x), num(v_eff_axis(x, &cfg.system, &f)?));
    }
    let cp = stationary_points(&cfg.system, &f)?;
    let summary = format!(
        "P_saddle={:.1} x_saddle={:.4} x_max={} x_min={} V_max={} V_min={} barrier={}",
        cp.p_saddle,
        cp.x_saddle,
        opt(cp.x_max),
        opt(cp.x_min),
        opt(cp.v_max),
        opt(cp.v_min),
        opt(cp.barrier)
    );
    Ok((s, summary))
}

const VAR_HEADER: &str = "B_eff [effective a.u.],P [effective a.u.],E [Hartree],rho_mean [a.u.],class,d,C1,C2\n";

fn variational_csv(rows: &[(f64, f64, VariationalResult)]) -> String {
    let mut s = String::from(VAR_HEADER);
    for (b, p, r) in rows {
        let _ = writeln!(
            s,
            "{b},{p},{},{},{},{},{},{}",
            num(r.energy),
            num(r.rho_mean),
            r.classification.as_str(),
            num(r.params.d),
            sci(r.params.c1),
            sci(r.params.c2)
        );
    }
    s
}

pub fn table2(cfg: &RunConfig, strategy: &Strategy, b_list: &[f64], p_list: &[f64]) -> Result<String> {
    let jobs: Vec<(f64, f64)> = b_list.iter().flat_map(|&b| p_list.iter().map(move |&p| (b, p))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(b, p)| {
            let f = cfg.fields_at(b, p, 0.0)?;
            Ok((b, p, optimize(None, &cfg.system, &f, strategy)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(variational_csv(&rows))
}

pub fn params_report(cfg: &RunConfig, r: &VariationalResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "B_eff        {}", cfg.b_eff);
    let _ = writeln!(s, "P            {}", cfg.p_eff);
    let _ = writeln!(s, "E            {:.8}", r.energy);
    let _ = writeln!(s, "<rho>        {:.6}", r.rho_mean);
    let _ = writeln!(s, "class        {}", r.classification.as_str());
    let _ = writeln!(s, "w_coulomb    {:.6}", r.eval.coulomb_weight);
    let _ = writeln!(s, "d            {:.8}", r.params.d);
    let _ = writeln!(s, "C1           {:.8e}", r.params.c1);
    let _ = writeln!(s, "C2           {:.8e}", r.params.c2);
    if let Some(c) = &r.params.coulomb {
        for (i, a) in c.a.iter().enumerate() {
            let _ = writeln!(s, "A{i}           {a:.8}");
        }
        let _ = writeln!(s, "alpha_c      {:.8}", c.alpha_c);
    }
    if let Some(m) = &r.params.magnetic {
        for (i, d) in m.d.iter().enumerate() {
            let _ = writeln!(s, "D{i}           {d:.8}");
        }
        let _ = writeln!(s, "x_m          {:.8}", m.x_m);
    }
    let _ = writeln!(s, "evaluations  {}", r.diagnostics.evaluations);
    let _ = writeln!(s, "quad_error   {:.2e}", r.diagnostics.quadrature_error);
    s
}

pub fn scan_table(cfg: &RunConfig, strategy: &Strategy, b_list: &[f64], p_list: &[f64]) -> Result<String> {
    let mut s = String::from(
        "B_eff [effective a.u.],P_lo [effective a.u.],P_hi [effective a.u.],P_c [effective a.u.],P_saddle [effective a.u.]\n",
    );
    for &b in b_list {
        let scan = scan_pc(&cfg.system, b, p_list, strategy)?;
        let f = cfg.fields_at(b, 0.0, 0.0)?;
        let ps = crate::potential::p_saddle(&cfg.system, f.b_int)?;
        let _ = writeln!(s, "{b},{},{},{},{}", scan.bracket.0, scan.bracket.1, num(scan.p_c), num(ps));
    }
    Ok(s)
}

pub fn oracle_table(
    cfg: &RunConfig,
    n: usize,
    levels: usize,
    d: Option<&str>,
    strategy: &Strategy,
) -> Result<String> {
    let (d, place) = match d {
        Some("from-variational") => {
            let res = optimize(None, &cfg.system, &cfg.fields()?, strategy)?;
            let place = match res.classification {
                Classification::Decentered => Localization::Magnetic,
                _ => Localization::Coulomb,
            };
            (res.params.d, place)
        }
        Some(v) => {
            let d: f64 = v
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("--d expects a number or from-variational, got {v:?}")))?;
            (d, placement(d))
        }
        None => (cfg.d, placement(cfg.d)),
    };
    let fields = cfg.fields_at(cfg.b_eff, cfg.p_eff, d)?;
    let grid = GridSpec::auto(&cfg.system, &fields, n, place, CoulombTreatment::Calibrated)?;
    let run = oracle::run(&cfg.system, &fields, &grid, levels, &EigenOptions::default())?;
    let mut s = String::from("level,nodes_per_side,h [a.u.],E [Hartree],residual,converged\n");
    for (i, l) in run.levels.iter().enumerate() {
        let _ = writeln!(s, "{i},{},{},{},{:.3e},{}", l.grid.nx, num(l.grid.h), num(l.energy), l.residual, l.converged);
    }
    let _ = writeln!(
        s,
        "extrapolated,,,{},{:.3e},{}",
        num(run.energy()),
        run.extrapolation.gap,
        !run.extrapolation.warning
    );
    Ok(s)
}

/// Small `d` keeps the gauge at the origin, so the grid sits on the Coulomb well.
fn placement(d: f64) -> Localization {
    if d < 0.5 {
        Localization::Coulomb
    } else {
        Localization::Magnetic
    }
}

/// Shared entry for the binary: parse, run, map errors to an exit code.
pub fn main_with_args<I, T>(args: I) -> std::process::ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return std::process::ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Err(e) = init_threads().and_then(|_| run(cli)) {
        eprintln!("error: {e}");
        return std::process::ExitCode::from(1);
    }
    std::process::ExitCode::SUCCESS
}
