//! `pst` command-line front end.
//!
//! Mode indices are 1-based on the command line and in every output file.
//! Exit status: 0 on success, 2 on usage errors, 3 on domain errors, 1 on I/O
//! failures.

pub mod expr;
pub mod output;

use std::ffi::OsString;
use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::coupling_synthesis::{
    physical_parameters, solve_weights, verify_synthesis, SynthesisProblem, SynthesisSolution,
};
use crate::error::PstError;
use crate::fock_transport::{cat_fidelity, cat_fidelity_scan, photon_numbers, CatState};
use crate::gaussian_transport::{
    evolve_covariance, squeezing_factor, symplectic_from_propagator, tmsv_covariance, Quadrature,
    TmsvParams,
};
use crate::lattice::{mu_from_separation, CouplingProfile, NetworkSpec};
use crate::propagation::{check_pst, default_dz, propagator, pst_distance, transfer_scan, PstReport};
use crate::scan::grid;
use crate::spectral::{degeneracy_histogram, dispersion};

use expr::parse_number;
use output::{Cell, Format, OutputDir, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

const SUBCOMMANDS: [&str; 7] = ["spectrum", "transport", "pst-check", "cat", "tmsv", "evanescent", "synth"];

#[derive(Debug, Parser)]
#[command(name = "pst", version, about = "Perfect state transfer in circulant waveguide networks")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Key-value config file (`key = value` per line); command-line flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Directory for output files.
    #[arg(long, global = true, env = "PST_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,

    /// Format of trace/table outputs. Reports are always JSON.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Reserved; every computation is deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fourier spectrum and degeneracy histogram.
    Spectrum(SpectrumArgs),
    /// Single-photon occupation trace.
    Transport(TransportArgs),
    /// Antipodal perfect-state-transfer check.
    PstCheck(PstCheckArgs),
    /// Schrödinger cat-state fidelity trace.
    Cat(CatArgs),
    /// Two-mode squeezed vacuum squeezing-factor trace.
    Tmsv(TmsvArgs),
    /// Transfer scan under evanescent coupling.
    Evanescent(EvanescentArgs),
    /// Auxiliary-mode synthesis of the PST coupling profile.
    Synth(SynthArgs),
}

fn number(s: &str) -> Result<f64, String> {
    parse_number(s)
}

fn profile(s: &str) -> Result<CouplingProfile, String> {
    s.parse().map_err(|e: PstError| e.to_string())
}

fn label(s: &str) -> Result<usize, String> {
    let v: usize = s.trim().parse().map_err(|_| format!("`{s}` is not a mode label"))?;
    if v == 0 {
        return Err("mode labels start at 1".into());
    }
    Ok(v)
}

fn label_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `m,n`, got `{s}`"))?;
    Ok((label(a)?, label(b)?))
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct NetworkArgs {
    /// Number of waveguides.
    #[arg(long)]
    pub n: usize,
    /// `uniform:C=1,R=3`, `evanescent:mu=0.524,R=6` or `custom:0.5,0.25`.
    #[arg(long, value_parser = profile)]
    pub profile: CouplingProfile,
}

impl NetworkArgs {
    fn spec(&self) -> Result<NetworkSpec, PstError> {
        NetworkSpec::new(self.n, self.profile.clone())
    }
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    /// Binning tolerance; defaults to 1e-9 * max(1, max |lambda|).
    #[arg(long, value_parser = number)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct TransportArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    #[arg(long, value_parser = label, default_value = "1")]
    pub source: usize,
    #[arg(long, value_parser = number, default_value = "pi")]
    pub z_max: f64,
    /// Grid step; defaults to 0.01 / max |C_r|.
    #[arg(long, value_parser = number)]
    pub dz: Option<f64>,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct PstCheckArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    #[arg(long, value_parser = label, default_value = "1")]
    pub source: usize,
    #[arg(long, value_parser = number, default_value = "1e-10")]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct CatArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    /// Real coherent amplitude.
    #[arg(long, value_parser = number, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Relative phase; 0 even, pi odd, pi/2 Yurke-Stoler.
    #[arg(long, value_parser = number, allow_hyphen_values = true)]
    pub phi: f64,
    #[arg(long, value_parser = label, default_value = "1")]
    pub source: usize,
    /// Defaults to the antipode of the source.
    #[arg(long, value_parser = label)]
    pub target: Option<usize>,
    #[arg(long, value_parser = number, default_value = "2pi")]
    pub z_max: f64,
    #[arg(long, value_parser = number)]
    pub dz: Option<f64>,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct TmsvArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    /// Squeezing strength w.
    #[arg(long, value_parser = number)]
    pub w: f64,
    /// Squeezing phase theta.
    #[arg(long, value_parser = number, default_value = "0", allow_hyphen_values = true)]
    pub theta: f64,
    /// Input mode pair, e.g. `1,2`.
    #[arg(long, value_parser = label_pair, default_value = "1,2")]
    pub pair: (usize, usize),
    /// Probed mode pair; defaults to the antipodes of the input pair.
    #[arg(long, value_parser = label_pair)]
    pub probe: Option<(usize, usize)>,
    #[arg(long, value_parser = number, default_value = "pi")]
    pub z_max: f64,
    #[arg(long, value_parser = number)]
    pub dz: Option<f64>,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct EvanescentArgs {
    #[arg(long)]
    pub n: usize,
    /// Coupling decay ratio; alternatively give --kappa and --separation.
    #[arg(long, value_parser = number, conflicts_with_all = ["kappa", "separation"])]
    pub mu: Option<f64>,
    #[arg(long, value_parser = number, requires = "separation")]
    pub kappa: Option<f64>,
    #[arg(long, value_parser = number, requires = "kappa")]
    pub separation: Option<f64>,
    /// Interaction range R.
    #[arg(long)]
    pub range: usize,
    #[arg(long, value_parser = label, default_value = "1")]
    pub source: usize,
    /// Defaults to the antipode of the source.
    #[arg(long, value_parser = label)]
    pub target: Option<usize>,
    #[arg(long, value_parser = number, default_value = "500")]
    pub z_max: f64,
    #[arg(long, value_parser = number)]
    pub dz: Option<f64>,
    /// Keep every k-th grid point in the written trace.
    #[arg(long, default_value_t = 1)]
    pub trace_stride: usize,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct SynthArgs {
    #[arg(long)]
    pub n: usize,
    /// Number of auxiliary mode pairs.
    #[arg(long)]
    pub m: usize,
    /// Target uniform coupling.
    #[arg(long, value_parser = number, allow_hyphen_values = true)]
    pub c: f64,
    #[arg(long, value_parser = number, default_value = "200")]
    pub delta_scale: f64,
    #[arg(long, value_parser = number, default_value = "10")]
    pub dispersive_min: f64,
    /// Constraint residual tolerance.
    #[arg(long, value_parser = number, default_value = "1e-9")]
    pub tol: f64,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(PstError),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Domain(_) => EXIT_DOMAIN,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Domain(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<PstError> for CliError {
    fn from(e: PstError) -> Self {
        CliError::Domain(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Reads `key = value` lines; blank lines and `#` comments are skipped.
pub fn read_config(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("{}:{}: expected `key = value`", path.display(), lineno + 1))
        })?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        pairs.push((key, value.trim().to_string()));
    }
    Ok(pairs)
}

/// Splices config-file entries in as flags right after the subcommand, so
/// that flags given explicitly later on the command line override them.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let strings: Vec<String> = args
        .iter()
        .map(|a| {
            a.to_str()
                .map(str::to_owned)
                .ok_or_else(|| CliError::Usage("arguments must be valid UTF-8".into()))
        })
        .collect::<Result<_, _>>()?;

    let mut config = None;
    for (i, a) in strings.iter().enumerate() {
        if a == "--config" {
            config = strings.get(i + 1).cloned();
        } else if let Some(v) = a.strip_prefix("--config=") {
            config = Some(v.to_string());
        }
    }
    let Some(config) = config else {
        return Ok(args);
    };
    let Some(sub) = strings.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())) else {
        return Ok(args);
    };

    let mut expanded: Vec<OsString> = args[..=sub].to_vec();
    for (key, value) in read_config(Path::new(&config))? {
        if key == "config" {
            continue;
        }
        expanded.push(format!("--{key}").into());
        expanded.push(value.into());
    }
    expanded.extend_from_slice(&args[sub + 1..]);
    Ok(expanded)
}

/// Parses, runs and reports; returns the process exit status.
pub fn main_with_args(args: Vec<OsString>) -> i32 {
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let mut out = OutputDir::create(&cli.out_dir)?;
    match &cli.command {
        Command::Spectrum(a) => cmd_spectrum(a, cli.format, &mut out)?,
        Command::Transport(a) => cmd_transport(a, cli.format, &mut out)?,
        Command::PstCheck(a) => cmd_pst_check(a, &mut out)?,
        Command::Cat(a) => cmd_cat(a, cli.format, &mut out)?,
        Command::Tmsv(a) => cmd_tmsv(a, cli.format, &mut out)?,
        Command::Evanescent(a) => cmd_evanescent(a, cli.format, &mut out)?,
        Command::Synth(a) => cmd_synth(a, &mut out)?,
    }
    Ok(out.written().to_vec())
}

fn index_of(label: usize, spec: &NetworkSpec) -> Result<usize, PstError> {
    let idx = label - 1;
    spec.check_mode(idx)?;
    Ok(idx)
}

fn antipode(spec: &NetworkSpec, idx: usize) -> Result<usize, PstError> {
    let n = spec.n_modes();
    if n % 2 != 0 {
        return Err(PstError::UnsupportedGeometry(format!(
            "odd N = {n} has no antipodal mode; pass --target"
        )));
    }
    Ok((idx + n / 2) % n)
}

fn cmd_spectrum(a: &SpectrumArgs, format: Format, out: &mut OutputDir) -> Result<(), CliError> {
    let spec = a.network.spec()?;
    let spectrum = dispersion(&spec);
    let tol = a.tol.unwrap_or_else(|| spectrum.default_tolerance());
    let histogram = degeneracy_histogram(&spectrum, tol)?;

    let mut table = Table::new(["p", "lambda_p"]);
    for (p, &l) in spectrum.eigenvalues().iter().enumerate() {
        table.push(vec![Cell::Int(p as i64), Cell::Float(l)]);
    }
    out.write_table("spectrum", &table, format)?;
    out.write_json("histogram.json", &histogram)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModePeak {
    pub mode: usize,
    pub max_probability: f64,
    pub z_at_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportSummary {
    pub n_modes: usize,
    pub profile: String,
    pub source: usize,
    /// Grid maxima of each mode's occupation, 1-based modes.
    pub peaks: Vec<ModePeak>,
}

fn cmd_transport(a: &TransportArgs, format: Format, out: &mut OutputDir) -> Result<(), CliError> {
    let spec = a.network.spec()?;
    let source = index_of(a.source, &spec)?;
    let dz = a.dz.unwrap_or_else(|| default_dz(&spec));
    let zs = grid(a.z_max, dz)?;
    let n = spec.n_modes();

    let mut table = Table::new(["z", "mode", "probability"]);
    let mut peaks: Vec<ModePeak> = (1..=n)
        .map(|mode| ModePeak {
            mode,
            max_probability: f64::NEG_INFINITY,
            z_at_max: 0.0,
        })
        .collect();
    for &z in &zs {
        for (j, p) in photon_numbers(&spec, source, z)?.into_iter().enumerate() {
            table.push(vec![Cell::Float(z), Cell::Int(j as i64 + 1), Cell::Float(p)]);
            if p > peaks[j].max_probability {
                peaks[j].max_probability = p;
                peaks[j].z_at_max = z;
            }
        }
    }
    out.write_table("transport", &table, format)?;
    out.write_json(
        "transport_summary.json",
        &TransportSummary {
            n_modes: n,
            profile: spec.profile().to_string(),
            source: a.source,
            peaks,
        },
    )?;
    Ok(())
}

fn cmd_pst_check(a: &PstCheckArgs, out: &mut OutputDir) -> Result<(), CliError> {
    let spec = a.network.spec()?;
    let source = index_of(a.source, &spec)?;
    let report = check_pst(&spec, source, a.tol)?;
    out.write_json("pst_report.json", &report)?;
    print!("{}", output::to_json_string(&report).map_err(io::Error::other)?);
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatSummary {
    pub cat: CatState,
    pub source: usize,
    pub target: usize,
    pub max_fidelity: f64,
    pub z_at_max: f64,
    /// Fidelity at `pi / (2C)` when the profile is collapse-shaped.
    pub fidelity_at_zpst: Option<f64>,
}

fn cmd_cat(a: &CatArgs, format: Format, out: &mut OutputDir) -> Result<(), CliError> {
    let spec = a.network.spec()?;
    let source = index_of(a.source, &spec)?;
    let target = match a.target {
        Some(t) => index_of(t, &spec)?,
        None => antipode(&spec, source)?,
    };
    let cat = CatState::new(a.alpha, a.phi)?;
    let dz = a.dz.unwrap_or_else(|| default_dz(&spec));
    let scan = cat_fidelity_scan(&spec, source, target, &cat, a.z_max, dz)?;

    let mut table = Table::new(["z", "fidelity"]);
    for &(z, f) in &scan.trace {
        table.push(vec![Cell::Float(z), Cell::Float(f)]);
    }
    out.write_table("cat", &table, format)?;

    let fidelity_at_zpst = match spec.collapse_strength(crate::propagation::COLLAPSE_REL_TOL) {
        Some(c) => Some(cat_fidelity(&spec, source, target, &cat, pst_distance(c.abs(), 0)?)?),
        None => None,
    };
    out.write_json(
        "cat_summary.json",
        &CatSummary {
            cat,
            source: source + 1,
            target: target + 1,
            max_fidelity: scan.max_value,
            z_at_max: scan.z_at_max,
            fidelity_at_zpst,
        },
    )?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TmsvSummary {
    pub w: f64,
    pub theta: f64,
    pub pair: (usize, usize),
    pub probe: (usize, usize),
    pub input_s_q: f64,
    pub input_s_p: f64,
    /// Most negative probe Q-squeezing over the grid.
    pub best_probe_s_q: f64,
    pub z_at_best_probe: f64,
    pub max_symplectic_defect: f64,
}

fn cmd_tmsv(a: &TmsvArgs, format: Format, out: &mut OutputDir) -> Result<(), CliError> {
    let spec = a.network.spec()?;
    let pair = (index_of(a.pair.0, &spec)?, index_of(a.pair.1, &spec)?);
    let probe = match a.probe {
        Some((c, d)) => (index_of(c, &spec)?, index_of(d, &spec)?),
        None => (antipode(&spec, pair.0)?, antipode(&spec, pair.1)?),
    };
    let params = TmsvParams::new(a.w, a.theta, pair)?;
    let input = tmsv_covariance(&params, spec.n_modes())?;
    let dz = a.dz.unwrap_or_else(|| default_dz(&spec));

    let tag = |(x, y): (usize, usize)| format!("{}{}", x + 1, y + 1);
    let (pt, qt) = (tag(pair), tag(probe));
    let mut table = Table::new([
        "z".to_string(),
        format!("S_Q_{pt}"),
        format!("S_P_{pt}"),
        format!("S_Q_{qt}"),
        format!("S_P_{qt}"),
    ]);
    let mut defect: f64 = 0.0;
    let mut best = (f64::INFINITY, 0.0);
    for z in grid(a.z_max, dz)? {
        let m = symplectic_from_propagator(&propagator(&spec, z)?)?;
        defect = defect.max(m.symplectic_defect());
        let v = evolve_covariance(&input, &m)?;
        let probe_q = squeezing_factor(&v, probe.0, probe.1, Quadrature::Q)?;
        if probe_q < best.0 {
            best = (probe_q, z);
        }
        table.push(vec![
            Cell::Float(z),
            Cell::Float(squeezing_factor(&v, pair.0, pair.1, Quadrature::Q)?),
            Cell::Float(squeezing_factor(&v, pair.0, pair.1, Quadrature::P)?),
            Cell::Float(probe_q),
            Cell::Float(squeezing_factor(&v, probe.0, probe.1, Quadrature::P)?),
        ]);
    }
    out.write_table("tmsv", &table, format)?;
    out.write_json(
        "tmsv_summary.json",
        &TmsvSummary {
            w: a.w,
            theta: a.theta,
            pair: a.pair,
            probe: (probe.0 + 1, probe.1 + 1),
            input_s_q: squeezing_factor(&input, pair.0, pair.1, Quadrature::Q)?,
            input_s_p: squeezing_factor(&input, pair.0, pair.1, Quadrature::P)?,
            best_probe_s_q: best.0,
            z_at_best_probe: best.1,
            max_symplectic_defect: defect,
        },
    )?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvanescentSummary {
    pub n_modes: usize,
    pub mu: f64,
    pub range: usize,
    pub source: usize,
    pub target: usize,
    pub z_max: f64,
    pub dz: f64,
    pub max_transfer: f64,
    pub z_at_max: f64,
    /// Shortest PST distance of the unit-coupling collapse network, `pi/2`.
    pub reference_z_pst: f64,
}

fn cmd_evanescent(a: &EvanescentArgs, format: Format, out: &mut OutputDir) -> Result<(), CliError> {
    let mu = match (a.mu, a.kappa, a.separation) {
        (Some(mu), _, _) => mu,
        (None, Some(k), Some(d)) => mu_from_separation(k, d)?,
        _ => return Err(CliError::Usage("give --mu or both --kappa and --separation".into())),
    };
    if a.trace_stride == 0 {
        return Err(CliError::Usage("--trace-stride must be at least 1".into()));
    }
    let spec = NetworkSpec::new(a.n, CouplingProfile::evanescent(mu, a.range)?)?;
    let source = index_of(a.source, &spec)?;
    let target = match a.target {
        Some(t) => index_of(t, &spec)?,
        None => antipode(&spec, source)?,
    };
    let dz = a.dz.unwrap_or_else(|| default_dz(&spec));
    let scan = transfer_scan(&spec, source, target, a.z_max, dz)?;

    let mut table = Table::new(["z", "probability"]);
    for &(z, p) in scan.trace.iter().step_by(a.trace_stride) {
        table.push(vec![Cell::Float(z), Cell::Float(p)]);
    }
    out.write_table("evanescent", &table, format)?;
    out.write_json(
        "evanescent_summary.json",
        &EvanescentSummary {
            n_modes: a.n,
            mu,
            range: a.range,
            source: source + 1,
            target: target + 1,
            z_max: a.z_max,
            dz,
            max_transfer: scan.max_value,
            z_at_max: scan.z_at_max,
            reference_z_pst: FRAC_PI_2,
        },
    )?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisReport {
    pub solution: SynthesisSolution,
    pub pst_report: Option<PstReport>,
    pub verification_error: Option<String>,
}

fn cmd_synth(a: &SynthArgs, out: &mut OutputDir) -> Result<(), CliError> {
    let problem = SynthesisProblem::new(a.n, a.m, a.c, a.tol)?;
    let solution = physical_parameters(&solve_weights(&problem)?, a.delta_scale, a.dispersive_min)?;
    let verified = verify_synthesis(&solution, a.n);
    let report = SynthesisReport {
        solution,
        pst_report: verified.as_ref().ok().cloned(),
        verification_error: verified.as_ref().err().map(ToString::to_string),
    };
    out.write_json("synthesis.json", &report)?;
    verified?;
    Ok(())
}
