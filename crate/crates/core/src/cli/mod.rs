//! Command-line front end: argument and run-file parsing, the worker pool,
//! and one writer per subcommand.

pub mod cache;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::error::{ContextKind, ContextValue};
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::adiabatic::{
    lossy_fidelity, schedule_from_gap, AdiabaticProblem, EvolveOptions, LossMethod, Path as SPath, Schedule,
    ScheduleKind,
};
use crate::berry::{berry_phase, classify_spt, pair_sites, BerryOptions, PairKind, DEFAULT_NODES, DEFAULT_SNAP_TOL};
use crate::couplings::{
    build_coupling_matrix, effective_from_physical, Bandgap, Boundary, CouplingMatrix, EffectiveCouplings,
    MatrixOptions, PhysicalBathParams,
};
use crate::eigen::{EigenOptions, DEFAULT_SEED};
use crate::error::{Error, Result};
use crate::exact;
use crate::hamiltonian::Anisotropy;
use crate::observables::{bond_order, correlation_table, BondWindow, Ensemble};
use crate::spectra::{curve_from_table, ground_states, phase_diagram_from_tables, sector_hamiltonian};

use config::ConfigFile;
use output::{Format, Table, Written};

/// Parses `0.25pi`, `-pi/4`, `3*pi/4`, `pi` or a plain number of radians.
pub fn parse_angle(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim().to_ascii_lowercase();
    if let Some((num, den)) = t.rsplit_once('/') {
        let den: f64 = den.trim().parse().map_err(|_| format!("bad denominator in `{s}`"))?;
        if den == 0.0 {
            return Err(format!("zero denominator in `{s}`"));
        }
        return Ok(parse_angle(num)? / den);
    }
    if let Some(coef) = t.strip_suffix("pi").or_else(|| t.strip_suffix('π')) {
        let coef = coef.trim().trim_end_matches('*').trim();
        let c = match coef {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| format!("bad multiple of pi in `{s}`"))?,
        };
        return Ok(c * std::f64::consts::PI);
    }
    t.parse::<f64>().map_err(|_| format!("`{s}` is not an angle"))
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect(),
    }
}

#[derive(Debug, Parser)]
#[command(name = "wqed", version, about = "Exact diagonalization of waveguide-mediated XXZ chains")]
pub struct Cli {
    /// Run file with `key = value` lines mirroring the flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true, env = "WQED_WORKERS")]
    pub workers: Option<usize>,
    /// Directory for cached sector energies.
    #[arg(long, global = true, env = "WQED_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    #[arg(long, default_value = "lower")]
    pub bandgap: Bandgap,
    /// Interaction length.
    #[arg(long, default_value_t = 1.0)]
    pub xi: f64,
    /// Effective dimerization of the mediated couplings.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub dimerization: f64,
    #[arg(long, default_value_t = 1.0)]
    pub jtilde: f64,
    /// Side of the bath resonance in the middle bandgap (+1 or -1).
    #[arg(long, allow_negative_numbers = true)]
    pub detuning_sign: Option<i8>,
    /// Physical bath hopping; together with the three options below it
    /// replaces the effective parameters.
    #[arg(long)]
    pub hopping: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub bath_dimerization: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub detuning: Option<f64>,
    #[arg(long)]
    pub coupling: Option<f64>,
    /// Number of spins.
    #[arg(long, default_value_t = 12)]
    pub n: usize,
    #[arg(long, default_value = "obc")]
    pub boundary: Boundary,
    /// Shorthand for `--boundary pbc`.
    #[arg(long)]
    pub pbc: bool,
    /// Coupling range cutoff in unit cells.
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub allow_truncation: bool,
}

impl ModelArgs {
    pub fn boundary(&self) -> Boundary {
        if self.pbc {
            Boundary::Pbc
        } else {
            self.boundary
        }
    }

    pub fn couplings(&self) -> Result<EffectiveCouplings> {
        let physical = [self.hopping, self.bath_dimerization, self.detuning, self.coupling];
        if physical.iter().any(Option::is_some) {
            let [Some(hopping), Some(dimerization), Some(detuning), Some(coupling)] = physical else {
                return Err(Error::Config(
                    "physical parameters need all of --hopping, --bath-dimerization, --detuning, --coupling".into(),
                ));
            };
            return effective_from_physical(&PhysicalBathParams { hopping, dimerization, detuning, coupling });
        }
        let sign = self.detuning_sign.unwrap_or(if self.bandgap == Bandgap::Upper { 1 } else { -1 });
        EffectiveCouplings::new(self.bandgap, self.xi, self.dimerization, self.jtilde, sign)
    }

    pub fn matrix(&self) -> Result<CouplingMatrix> {
        let opts = MatrixOptions { n_max: self.n_max, allow_truncation: self.allow_truncation };
        build_coupling_matrix(&self.couplings()?, self.n, self.boundary(), opts)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolverArgs {
    /// Matrix-vector product cap of the iterative eigensolver.
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Largest sector dimension diagonalized densely.
    #[arg(long, default_value_t = 2000)]
    pub dense_threshold: usize,
}

impl SolverArgs {
    fn eigen(&self, k: usize) -> EigenOptions {
        EigenOptions {
            k,
            max_matvecs: self.max_iter,
            seed: self.seed,
            dense_threshold: self.dense_threshold,
            ..EigenOptions::default()
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MuGrid {
    /// Number of field values.
    #[arg(long, default_value_t = 64)]
    pub mu_grid: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mu_min: f64,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    pub mu_max: f64,
}

impl MuGrid {
    fn values(&self) -> Result<Vec<f64>> {
        if self.mu_grid == 0 {
            return Err(Error::Config("empty mu grid (--mu-grid 0)".into()));
        }
        Ok(linspace(self.mu_min, self.mu_max, self.mu_grid))
    }
}

/// Ground multiplet of one sector, shared by the state-based commands.
#[derive(Debug, Clone, Args, Serialize)]
pub struct StateArgs {
    #[arg(long, value_parser = parse_angle, default_value = "0.25pi", allow_hyphen_values = true)]
    pub theta: f64,
    /// Magnetization `m = n_up - N/2`.
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub m: i64,
}

impl StateArgs {
    fn n_up(&self, n: usize) -> Result<usize> {
        let k = self.m + n as i64 / 2;
        if k < 0 || k > n as i64 {
            return Err(Error::Config(format!("--m {} is outside [-{}, {}]", self.m, n / 2, n / 2)));
        }
        Ok(k as usize)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coupling matrix of the chain.
    Couplings {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Ground magnetization on a (theta, mu) grid.
    PhaseDiagram {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Number of angles between --theta-min and --theta-max.
        #[arg(long, default_value_t = 64)]
        theta_grid: usize,
        #[arg(long, value_parser = parse_angle, default_value = "-pi", allow_hyphen_values = true)]
        theta_min: f64,
        #[arg(long, value_parser = parse_angle, default_value = "pi", allow_hyphen_values = true)]
        theta_max: f64,
        #[command(flatten)]
        mu: MuGrid,
    },
    /// Magnetization versus field at one angle.
    MagCurve {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, value_parser = parse_angle, default_value = "0.25pi", allow_hyphen_values = true)]
        theta: f64,
        #[command(flatten)]
        mu: MuGrid,
    },
    /// Connected two-point correlations in a sector ground state.
    Correlations {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        state: StateArgs,
        /// Reference site (defaults to N/4 for open chains, 0 for rings).
        #[arg(long)]
        reference: Option<usize>,
        #[arg(long)]
        r_max: Option<usize>,
    },
    /// Bond-order parameters O_p.
    BondOrder {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        periods: Vec<usize>,
        #[arg(long)]
        window_start: Option<usize>,
        #[arg(long)]
        window_len: Option<usize>,
    },
    /// Many-body Berry phases under a single-link twist.
    Berry {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        state: StateArgs,
        /// intra, inter or both.
        #[arg(long, default_value = "both")]
        pair: String,
        /// Dimension of the ground multiplet followed along the twist.
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value_t = DEFAULT_NODES)]
        nodes: usize,
        /// Keep the initial number of nodes.
        #[arg(long)]
        no_refine: bool,
    },
    /// Adiabatic preparation: infidelity and lossy fidelity versus total time.
    Adiabatic {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Number of up spins.
        #[arg(long)]
        n_up: usize,
        #[arg(long, default_value = "min-matrix-element")]
        schedule: ScheduleKind,
        /// Total times.
        #[arg(long, value_delimiter = ',', default_value = "10,100,1000")]
        times: Vec<f64>,
        /// Loss rate per excitation.
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[arg(long, default_value = "analytic")]
        loss_method: LossMethod,
        /// Nodes of the s grid for the gap-adapted schedules.
        #[arg(long, default_value_t = crate::adiabatic::DEFAULT_GRID)]
        s_grid: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Closed-form reference solvers.
    Exact {
        /// dicke, ubg, xx-thermo, xx-finite, magnon or spinon.
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        m: i64,
        #[arg(long, value_parser = parse_angle, default_value = "0.25pi", allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        mu: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        dimerization: f64,
        #[arg(long, default_value = "obc")]
        boundary: Boundary,
        /// Up spins for xx-finite (defaults to the ground sector at --mu).
        #[arg(long)]
        n_up: Option<usize>,
        #[arg(long, default_value_t = 10)]
        r_max: i64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Couplings { .. } => "couplings",
            Command::PhaseDiagram { .. } => "phase-diagram",
            Command::MagCurve { .. } => "mag-curve",
            Command::Correlations { .. } => "correlations",
            Command::BondOrder { .. } => "bond-order",
            Command::Berry { .. } => "berry",
            Command::Adiabatic { .. } => "adiabatic",
            Command::Exact { .. } => "exact",
        }
    }
}

/// Exit status and message of a failed run.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub report: Value,
    /// Set for `--help` and `--version`, which print to stdout and exit 0.
    pub clap: Option<clap::Error>,
}

impl Failure {
    fn from_error(e: &Error) -> Failure {
        let kind = format!("{e:?}");
        let kind = kind.split(['(', ' ', '{']).next().unwrap_or("Error").to_string();
        let code = match e {
            Error::Config(_) | Error::InvalidParameter { .. } => 2,
            _ => 1,
        };
        Failure { code, report: json!({ "error": { "kind": kind, "message": e.to_string() } }), clap: None }
    }
}

fn command_with_overrides() -> clap::Command {
    let mut cmd = Cli::command().args_override_self(true);
    let names: Vec<String> = cmd.get_subcommands().map(|s| s.get_name().to_string()).collect();
    for name in names {
        cmd = cmd.mut_subcommand(name, |s| s.args_override_self(true));
    }
    cmd
}

fn raw_config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Splices run-file entries in front of the explicit flags. A `command` key
/// supplies the subcommand when none is given on the command line.
fn merge_config(args: Vec<OsString>, file: &ConfigFile, cmd: &clap::Command) -> Result<Vec<OsString>> {
    let subs: Vec<&str> = cmd.get_subcommands().map(|s| s.get_name()).collect();
    let pos = args.iter().position(|a| subs.contains(&a.to_string_lossy().as_ref()));
    let (mut merged, rest, sub_name) = match pos {
        Some(p) => (args[..=p].to_vec(), args[p + 1..].to_vec(), args[p].to_string_lossy().into_owned()),
        None => {
            let Some(e) = file.get("command") else {
                return Ok(args);
            };
            if !subs.contains(&e.value.as_str()) {
                return Err(Error::Config(format!("{}:{}: unknown command `{}`", file.source, e.line, e.value)));
            }
            let mut head = args[..1.min(args.len())].to_vec();
            head.push(e.value.clone().into());
            (head, args[1.min(args.len())..].to_vec(), e.value.clone())
        }
    };
    let sub = cmd.find_subcommand(&sub_name).expect("known subcommand");
    let flag_of = |key: &str| -> Option<clap::Arg> {
        sub.get_arguments().chain(cmd.get_arguments()).find(|a| a.get_long() == Some(key)).cloned()
    };
    for e in &file.entries {
        if e.key == "command" || e.key == "config" {
            continue;
        }
        let Some(arg) = flag_of(&e.key) else {
            return Err(Error::Config(format!(
                "{}:{}: unknown key `{}` for `{sub_name}`",
                file.source, e.line, e.key
            )));
        };
        let takes_value = arg.get_action().takes_values();
        if takes_value {
            merged.push(format!("--{}={}", e.key, e.value).into());
        } else {
            match e.value.to_ascii_lowercase().as_str() {
                "true" | "yes" | "on" | "1" | "" => merged.push(format!("--{}", e.key).into()),
                "false" | "no" | "off" | "0" => {}
                other => {
                    return Err(Error::Config(format!(
                        "{}:{}: `{}` is a switch, expected true or false, got `{other}`",
                        file.source, e.line, e.key
                    )))
                }
            }
        }
    }
    merged.extend(rest);
    Ok(merged)
}

/// Attaches the run-file line to a clap error about a key that came from it.
fn annotate(err: clap::Error, file: Option<&ConfigFile>) -> String {
    let text = err.render().to_string();
    let Some(file) = file else {
        return text;
    };
    if let Some(ContextValue::String(arg)) = err.get(ContextKind::InvalidArg) {
        let key = arg.trim_start_matches("--").split([' ', '=', '<']).next().unwrap_or("");
        if let Some(e) = file.get(key) {
            return format!("{}:{}: key `{key}`: {text}", file.source, e.line);
        }
    }
    text
}

pub fn parse_args(args: Vec<OsString>) -> std::result::Result<(Cli, Option<ConfigFile>), Failure> {
    let cmd = command_with_overrides();
    let file = match raw_config_path(&args) {
        Some(p) => Some(ConfigFile::load(&p).map_err(|e| Failure::from_error(&e))?),
        None => None,
    };
    let args = match &file {
        Some(f) => merge_config(args, f, &cmd).map_err(|e| Failure::from_error(&e))?,
        None => args,
    };
    let matches = cmd.try_get_matches_from(args).map_err(|e| clap_failure(e, file.as_ref()))?;
    let cli = Cli::from_arg_matches(&matches).map_err(|e| clap_failure(e, file.as_ref()))?;
    Ok((cli, file))
}

fn clap_failure(e: clap::Error, file: Option<&ConfigFile>) -> Failure {
    use clap::error::ErrorKind;
    if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
        return Failure { code: 0, report: Value::Null, clap: Some(e) };
    }
    let message = annotate(e, file);
    Failure {
        code: 2,
        report: json!({ "error": { "kind": "Config", "message": message.trim_end() } }),
        clap: None,
    }
}

/// Runs the parsed command and returns the written file paths.
pub fn execute(cli: &Cli, file: Option<&ConfigFile>) -> Result<Vec<PathBuf>> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(Error::Config("worker count must be >= 1".into()));
        }
        pool = pool.num_threads(w);
    }
    let pool = pool.build().map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let mut written = Written::default();
    let config = pool.install(|| run_command(cli, &mut written))?;
    write_manifest(cli, file, config, &mut written)?;
    Ok(written.files.into_iter().map(|(p, _)| p).collect())
}

fn write_manifest(cli: &Cli, file: Option<&ConfigFile>, config: Value, written: &mut Written) -> Result<()> {
    let outputs: Vec<Value> = written
        .files
        .iter()
        .map(|(p, h)| json!({ "file": p.file_name().map(|f| f.to_string_lossy()), "sha256": h }))
        .collect();
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let manifest = json!({
        "program": "wqed",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cli.command.name(),
        "config": config,
        "config_file": file.map(|f| f.source.clone()),
        "format": cli.format,
        "outputs": outputs,
        "timestamp": timestamp,
    });
    written.json(&cli.out, "manifest.json", &manifest)
}

fn ground_multiplet(cm: &CouplingMatrix, n_up: usize, theta: f64, solver: &SolverArgs) -> Result<(crate::hamiltonian::SectorHamiltonian, Vec<Vec<f64>>, Vec<f64>)> {
    let h = sector_hamiltonian(cm, n_up, Anisotropy::Angle(theta))?;
    let k = 6.min(h.dim());
    let gs = ground_states::<f64>(&h, &solver.eigen(k))?;
    let vectors = gs.vectors[..gs.degeneracy].to_vec();
    Ok((h, vectors, gs.values))
}

fn run_command(cli: &Cli, w: &mut Written) -> Result<Value> {
    let out = cli.out.as_path();
    let fmt = cli.format;
    let cache = cli.cache_dir.as_deref();
    match &cli.command {
        Command::Couplings { model } => {
            let cm = model.matrix()?;
            let mut t = Table::new(&["i", "j", "J"]);
            for (i, j, v) in cm.nonzero_pairs() {
                t.push(vec![i.into(), j.into(), v.into()]);
            }
            w.table(out, "couplings", &t, fmt)?;
            w.json(out, "couplings_matrix.json", &cm.to_json())?;
            Ok(json!({ "model": model }))
        }
        Command::PhaseDiagram { model, solver, theta_grid, theta_min, theta_max, mu } => {
            if *theta_grid == 0 {
                return Err(Error::Config("empty theta grid (--theta-grid 0)".into()));
            }
            let thetas = linspace(*theta_min, *theta_max, *theta_grid);
            let mus = mu.values()?;
            let cm = model.matrix()?;
            let tables = cache::cached_tables(&cm, &thetas, &solver.eigen(1), cache)?;
            let grid = phase_diagram_from_tables(tables, &mus)?;
            let mut t = Table::new(&["theta", "mu", "m"]);
            for (ti, &theta) in grid.thetas.iter().enumerate() {
                for (ui, &m) in grid.mus.iter().enumerate() {
                    t.push(vec![theta.into(), m.into(), grid.m_star[ti][ui].into()]);
                }
            }
            w.table(out, "phase_diagram", &t, fmt)?;
            let sectors: Vec<Value> = grid
                .sector_energies
                .iter()
                .map(|s| json!({ "theta": s.theta, "m": s.magnetizations().collect::<Vec<_>>(), "E0": s.energies }))
                .collect();
            let ties: Vec<Value> = grid
                .ties
                .iter()
                .enumerate()
                .flat_map(|(ti, row)| {
                    row.iter().enumerate().filter(|(_, &t)| t).map(move |(ui, _)| json!([ti, ui]))
                })
                .collect();
            w.json(out, "phase_diagram_sectors.json", &json!({ "n": cm.size(), "sector_energies": sectors, "ties": ties }))?;
            Ok(json!({
                "model": model, "solver": solver, "theta_grid": theta_grid,
                "theta_min": theta_min, "theta_max": theta_max, "mu": mu,
            }))
        }
        Command::MagCurve { model, solver, theta, mu } => {
            let mus = mu.values()?;
            let cm = model.matrix()?;
            let table = cache::cached_tables(&cm, &[*theta], &solver.eigen(1), cache)?.pop().expect("one angle");
            let curve = curve_from_table(table, &mus)?;
            let mut t = Table::new(&["mu", "m"]);
            for (&x, &m) in curve.mus.iter().zip(&curve.m) {
                t.push(vec![x.into(), m.into()]);
            }
            w.table(out, "mag_curve", &t, fmt)?;
            w.json(
                out,
                "mag_curve_summary.json",
                &json!({
                    "theta": curve.theta,
                    "saturation_field": curve.saturation_field,
                    "saturation_on_grid": curve.saturation_on_grid,
                    "E0": curve.sector_energies.energies,
                }),
            )?;
            Ok(json!({ "model": model, "solver": solver, "theta": theta, "mu": mu }))
        }
        Command::Correlations { model, solver, state, reference, r_max } => {
            let cm = model.matrix()?;
            let n = cm.size();
            let (h, vectors, _) = ground_multiplet(&cm, state.n_up(n)?, state.theta, solver)?;
            let reference = reference.unwrap_or(if model.boundary() == Boundary::Obc { n / 4 } else { 0 });
            let r_max = r_max.unwrap_or(n.saturating_sub(reference + 1));
            let ens = Ensemble::from_vectors(h.basis(), &vectors)?;
            let mut t = Table::new(&["r", "Cx", "Cy", "Cz"]);
            for (r, cx, cy, cz) in correlation_table(&ens, reference, r_max)? {
                t.push(vec![r.into(), cx.into(), cy.into(), cz.into()]);
            }
            w.table(out, "correlations", &t, fmt)?;
            Ok(json!({
                "model": model, "solver": solver, "state": state,
                "reference": reference, "r_max": r_max, "multiplet": vectors.len(),
            }))
        }
        Command::BondOrder { model, solver, state, periods, window_start, window_len } => {
            let cm = model.matrix()?;
            let n = cm.size();
            let (h, vectors, _) = ground_multiplet(&cm, state.n_up(n)?, state.theta, solver)?;
            let ens = Ensemble::from_vectors(h.basis(), &vectors)?;
            let def = BondWindow::default_for(n, model.boundary());
            let window = BondWindow { start: window_start.unwrap_or(def.start), len: window_len.unwrap_or(def.len) };
            let mut t = Table::new(&["p", "re", "im", "abs"]);
            for &p in periods {
                let o = bond_order(&ens, p, window, model.boundary())?;
                t.push(vec![p.into(), o.value.0.into(), o.value.1.into(), o.abs.into()]);
            }
            w.table(out, "bond_order", &t, fmt)?;
            Ok(json!({ "model": model, "solver": solver, "state": state, "periods": periods, "window": window }))
        }
        Command::Berry { model, solver, state, pair, d, nodes, no_refine } => {
            let cm = model.matrix()?;
            let n = cm.size();
            let n_up = state.n_up(n)?;
            let kinds: Vec<PairKind> = match pair.as_str() {
                "both" => vec![PairKind::Intra, PairKind::Inter],
                other => vec![other.parse()?],
            };
            let opts = BerryOptions { nodes: *nodes, auto_refine: !no_refine, eigen: solver.eigen(1), ..BerryOptions::default() };
            let mut reports = Vec::new();
            for kind in &kinds {
                let r = berry_phase(&cm, n_up, state.theta, pair_sites(n, *kind), *d, &opts)?;
                reports.push((*kind, r));
            }
            let mut doc = json!({
                "n": n, "m": state.m, "theta": state.theta, "dimerization": model.dimerization,
                "reports": reports.iter().map(|(k, r)| {
                    let mut v = serde_json::to_value(r).expect("serializable");
                    v["kind"] = json!(format!("{k:?}").to_ascii_lowercase());
                    v
                }).collect::<Vec<_>>(),
            });
            if let [(_, intra), (_, inter)] = reports.as_slice() {
                let phase = classify_spt(intra.gamma, inter.gamma, DEFAULT_SNAP_TOL);
                doc["spt"] = serde_json::to_value(phase).expect("serializable");
            }
            w.json(out, "berry.json", &doc)?;
            Ok(json!({
                "model": model, "solver": solver, "state": state, "pair": pair,
                "d": d, "nodes": nodes, "no_refine": no_refine,
            }))
        }
        Command::Adiabatic { model, solver, n_up, schedule, times, gamma, loss_method, s_grid, tol } => {
            if times.is_empty() || times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
                return Err(Error::Config("--times needs finite values >= 0".into()));
            }
            let cm = model.matrix()?;
            let problem = AdiabaticProblem::new(&cm, *n_up, SPath::simple(), None)?;
            let eigen = solver.eigen(1);
            let sched = match schedule {
                ScheduleKind::Uniform => Schedule::uniform(),
                kind => schedule_from_gap(&problem, *kind, *s_grid, crate::adiabatic::DEFAULT_EXCITED, &eigen)?,
            };
            let opts = EvolveOptions { rtol: *tol, atol: *tol, eigen, ..EvolveOptions::default() };
            let results: Vec<_> = times
                .par_iter()
                .map(|&t| lossy_fidelity(&problem, &sched, t, *gamma, *loss_method, &opts))
                .collect::<Result<Vec<_>>>()?;
            let mut table = Table::new(&["T", "infidelity", "F_gamma"]);
            for r in &results {
                table.push(vec![r.total_time.into(), (1.0 - r.fidelity).into(), r.f_gamma.into()]);
            }
            w.table(out, "adiabatic", &table, fmt)?;
            let (idx, tie) = problem.lowest_ising_configuration();
            w.json(
                out,
                "adiabatic_run.json",
                &json!({
                    "schedule": { "kind": sched.kind, "grid": sched.grid, "rate": sched.rate, "gap": sched.gap,
                                  "normalization": sched.normalization() },
                    "initial_index": idx, "initial_tie": tie,
                    "runs": results,
                }),
            )?;
            Ok(json!({
                "model": model, "solver": solver, "n_up": n_up, "schedule": schedule, "times": times,
                "gamma": gamma, "loss_method": loss_method, "s_grid": s_grid, "tol": tol,
            }))
        }
        Command::Exact { model, n, m, theta, mu, dimerization, boundary, n_up, r_max } => {
            let doc = exact_report(model, *n, *m, *theta, *mu, *dimerization, *boundary, *n_up, *r_max)?;
            w.json(out, "exact.json", &doc)?;
            Ok(json!({
                "model": model, "n": n, "m": m, "theta": theta, "mu": mu, "dimerization": dimerization,
                "boundary": boundary, "n_up": n_up, "r_max": r_max,
            }))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn exact_report(
    model: &str,
    n: usize,
    m: i64,
    theta: f64,
    mu: f64,
    dimerization: f64,
    boundary: Boundary,
    n_up: Option<usize>,
    r_max: i64,
) -> Result<Value> {
    Ok(match model {
        "dicke" => {
            let g = exact::dicke::dicke_sector_ground(n, m, theta, mu)?;
            let global = exact::dicke_ground_lbg(n, theta, mu)?;
            let c = exact::lbg_infinite_correlations(n, m, theta)?;
            json!({
                "model": "dicke", "n": n, "m": m, "theta": theta, "mu": mu,
                "sector": { "s": g.s, "energy": g.energy },
                "ground": { "s": global.s, "m": global.m, "energy": global.energy },
                "correlations": { "zz": c.zz, "xx": c.xx },
            })
        }
        "ubg" => {
            let g = exact::ubg_infinite_ground(n, m, theta, mu)?;
            json!({
                "model": "ubg", "n": n, "m": m, "theta": theta, "mu": mu,
                "energy": g.energy, "pairwise_energy": g.pairwise_energy,
                "blocks": g.blocks.iter().map(|b| json!({
                    "twice_sa": b.twice_sa, "twice_sb": b.twice_sb, "multiplicity": b.multiplicity,
                })).collect::<Vec<_>>(),
                "correlations": {
                    "same_zz": g.correlations.same_zz, "same_xx": g.correlations.same_xx,
                    "cross_zz": g.correlations.cross_zz, "cross_xx": g.correlations.cross_xx,
                },
                "rule_agrees": g.rule_agrees, "diagnostic": g.diagnostic,
            })
        }
        "xx-thermo" => {
            let s = exact::dimerized_xx_thermo(dimerization, mu)?;
            let rows = (1..=r_max)
                .map(|r| Ok(json!({ "r": r, "zz": s.zz(0, r)?, "xx": s.xx(0, r)? })))
                .collect::<Result<Vec<_>>>()?;
            json!({
                "model": "xx-thermo", "dimerization": dimerization, "mu": mu, "k0": s.k0,
                "magnetization_per_spin": s.magnetization_per_spin, "o2": s.o2()?, "correlations": rows,
            })
        }
        "xx-finite" => {
            let k = match n_up {
                Some(k) => k,
                None => exact::dimerized_xx_finite(n, dimerization, boundary, n / 2)?.ground_n_up(mu),
            };
            let f = exact::dimerized_xx_finite(n, dimerization, boundary, k)?;
            let c = n / 4;
            let rows: Vec<Value> = (1..=r_max.max(0) as usize)
                .filter(|r| c + r < n)
                .map(|r| json!({ "r": r, "zz": f.zz(c, c + r), "xx": f.xx(c, c + r) }))
                .collect();
            json!({
                "model": "xx-finite", "n": n, "n_up": k, "dimerization": dimerization, "mu": mu,
                "energy": f.energy, "magnetization": f.magnetization(), "fermi_degenerate": f.fermi_degenerate,
                "reference": c, "correlations": rows,
            })
        }
        "magnon" => json!({ "model": "magnon", "theta": theta, "mu": mu, "gap": exact::magnon_gap_nn(theta, mu) }),
        "spinon" => {
            let g = exact::spinon_gap_nn(theta, mu);
            json!({ "model": "spinon", "theta": theta, "mu": mu, "gap": g.value, "valid": g.valid })
        }
        other => {
            return Err(Error::Config(format!(
                "unknown exact model `{other}` (expected dicke, ubg, xx-thermo, xx-finite, magnon, spinon)"
            )))
        }
    })
}

/// Entry point used by the binary: returns the process exit code.
pub fn main_with_args(args: Vec<OsString>) -> i32 {
    let (cli, file) = match parse_args(args) {
        Ok(v) => v,
        Err(f) => return report(f),
    };
    match execute(&cli, file.as_ref()) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => report(Failure::from_error(&e)),
    }
}

fn report(f: Failure) -> i32 {
    if let Some(e) = f.clap {
        let _ = e.print();
        return f.code;
    }
    eprintln!("{}", serde_json::to_string_pretty(&f.report).expect("serializable"));
    f.code
}
