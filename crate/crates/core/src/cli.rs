//! Command-line front end: configuration, orchestration and JSON reports.
//!
//! Every report is a JSON object with the keys `version`, `command`,
//! `config`, `seed`, `results` and `errors`. On failure `results` is null,
//! `errors` holds `{kind, code, message}` objects and the process exits with
//! [`Error::code`]. Argument-parsing failures exit with 1.
//!
//! Settings are resolved in the order: built-in defaults, the
//! `TORUS_CRIT_SEED` environment variable (seed only), a `--config` file of
//! `key = value` lines (`#` starts a comment), then command-line flags.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::asymptotic_constants::{c_m, constants_report, delta0_curve, CPrimeConfig};
use crate::conditional_hessian::{upsilon, xi_bar, xi_infinity, xi_limit_origin, xi_rescale, zero_entries, CovTensor};
use crate::error::{Error, Result};
use crate::kernel::{det_script_h, script_h, tech_margin};
use crate::radial_weight::{make_profile, RadialProfile, WeightSpec};
use crate::sym_ensembles::{expect_abs_det, validate_axial, AxialSpec, EnsembleSpec, IsoSpec, Validity};
use crate::torus_simulator::empirical_moments;

/// Environment variable holding the default seed.
pub const SEED_ENV: &str = "TORUS_CRIT_SEED";
/// Radii at which `--dump-delta0` samples `δ₀`.
const DELTA0_DUMP_STEP: f64 = 0.1;
const DELTA0_DUMP_POINTS: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Constants,
    Simulate,
    Ensemble,
    Kernel,
    Validate,
}

/// Which covariance tensor `kernel` evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TensorKind {
    /// `Ξ̄^ε(η)`, or `Ξ̄⁰(η)` when `ε = 0`.
    Xi,
    /// `Ξ̄` with axial entries rescaled by `|η|^{-1/2}` per axial index.
    XiRescaled,
    /// Extrapolated limit of the rescaled tensor as `η → 0` along `η`.
    XiOrigin,
    /// Same-point conditional law `Υ^ε`.
    Upsilon,
    /// Product law at infinite separation.
    XiInfinity,
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub m: usize,
    /// `gaussian`, `gaussian:<scale>` or `table:<csv path>`.
    pub weight: String,
    pub epsilon: Option<f64>,
    /// Monte Carlo sample count.
    pub samples: usize,
    /// Number of simulated fields.
    pub fields: usize,
    pub seed: u64,
    pub threads: Option<usize>,
    pub tensor: TensorKind,
    pub eta: Vec<f64>,
    /// Isotropic ensemble parameters.
    pub u: f64,
    pub v: f64,
    /// Axial ensemble parameters `c₁..c₅`; takes precedence over `u, v`.
    pub axial: Option<[f64; 5]>,
    pub output: Option<PathBuf>,
    pub dump_delta0: Option<PathBuf>,
    pub emit_counts: Option<PathBuf>,
    pub dump_tensor: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            m: 1,
            weight: "gaussian".into(),
            epsilon: None,
            samples: 20_000,
            fields: 2000,
            seed: 0,
            threads: None,
            tensor: TensorKind::Xi,
            eta: vec![1.0],
            u: 1.0,
            v: 1.0,
            axial: None,
            output: None,
            dump_delta0: None,
            emit_counts: None,
            dump_tensor: None,
        }
    }

    /// Serialize as `key = value` lines accepted by [`RunConfig::apply_text`].
    pub fn to_config_text(&self) -> String {
        let list = |xs: &[f64]| xs.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        let mut lines = vec![
            format!("command = {}", value_name(self.command)),
            format!("m = {}", self.m),
            format!("weight = {}", self.weight),
            format!("samples = {}", self.samples),
            format!("fields = {}", self.fields),
            format!("seed = {}", self.seed),
            format!("tensor = {}", value_name(self.tensor)),
            format!("eta = {}", list(&self.eta)),
            format!("u = {}", self.u),
            format!("v = {}", self.v),
        ];
        if let Some(e) = self.epsilon {
            lines.push(format!("epsilon = {e}"));
        }
        if let Some(t) = self.threads {
            lines.push(format!("threads = {t}"));
        }
        if let Some(c) = self.axial {
            lines.push(format!("axial = {}", list(&c)));
        }
        for (key, path) in [
            ("output", &self.output),
            ("dump_delta0", &self.dump_delta0),
            ("emit_counts", &self.emit_counts),
            ("dump_tensor", &self.dump_tensor),
        ] {
            if let Some(p) = path {
                lines.push(format!("{key} = {}", p.display()));
            }
        }
        lines.join("\n") + "\n"
    }

    /// Apply `key = value` lines on top of the current settings.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("config line {}: expected key = value", lineno + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::InvalidInput(format!("config line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
            v.parse().map_err(|_| format!("cannot parse {v:?}"))
        }
        match key {
            "command" => self.command = Command::from_str(value, true)?,
            "m" => self.m = num(value)?,
            "weight" => self.weight = value.to_string(),
            "epsilon" => self.epsilon = Some(num(value)?),
            "samples" => self.samples = num(value)?,
            "fields" => self.fields = num(value)?,
            "seed" => self.seed = num(value)?,
            "threads" => self.threads = Some(num(value)?),
            "tensor" => self.tensor = TensorKind::from_str(value, true)?,
            "eta" => self.eta = parse_list(value)?,
            "u" => self.u = num(value)?,
            "v" => self.v = num(value)?,
            "axial" => self.axial = Some(parse_axial(value)?),
            "output" => self.output = Some(value.into()),
            "dump_delta0" => self.dump_delta0 = Some(value.into()),
            "emit_counts" => self.emit_counts = Some(value.into()),
            "dump_tensor" => self.dump_tensor = Some(value.into()),
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }
}

fn value_name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value().expect("no skipped variants").get_name().to_string()
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| format!("cannot parse {x:?} as a number"))).collect()
}

fn parse_axial(s: &str) -> std::result::Result<[f64; 5], String> {
    parse_list(s)?.try_into().map_err(|v: Vec<f64>| format!("expected 5 axial parameters, got {}", v.len()))
}

// ------------------------------------------------------------ arguments

#[derive(Debug, Parser)]
#[command(name = "torus-crit", version, about = "Critical points of Gaussian random Fourier series on tori")]
struct Cli {
    /// Read settings from a key = value file before applying flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: CommandArgs,
}

#[derive(Debug, Args)]
struct Common {
    /// Dimension of the torus.
    #[arg(long)]
    m: Option<usize>,
    /// Weight: gaussian, gaussian:<scale> or table:<csv of t,w(t)>. Table
    /// values below 1e-16 of the maximum are treated as zero.
    #[arg(long)]
    weight: Option<String>,
    /// Random seed (default: $TORUS_CRIT_SEED or 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo samples.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum CommandArgs {
    /// Leading constants C_m, C'_m and, with --epsilon, predicted moments.
    Constants {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Write (t, delta0(t), std_error) rows to this CSV file.
        #[arg(long)]
        dump_delta0: Option<PathBuf>,
    },
    /// Sample fields and count their critical points (m = 1 or 2).
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        fields: Option<usize>,
        /// Write (field_index, count) rows to this CSV file.
        #[arg(long)]
        emit_counts: Option<PathBuf>,
    },
    /// Monte Carlo E|det| for an isotropic or axial matrix ensemble.
    Ensemble {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        u: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        v: Option<f64>,
        /// Axial parameters c1,c2,c3,c4,c5 (axis e1).
        #[arg(long, allow_hyphen_values = true)]
        axial: Option<String>,
    },
    /// Evaluate a conditional covariance tensor.
    Kernel {
        #[command(flatten)]
        common: Common,
        /// Separation vector, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        eta: Option<String>,
        /// Lattice parameter; 0 means the continuum kernel.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, value_enum)]
        tensor: Option<TensorKind>,
        /// Write (i, j, k, l, value) rows to this CSV file.
        #[arg(long)]
        dump_tensor: Option<PathBuf>,
    },
    /// Run a quick suite of invariant checks.
    Validate {
        #[command(flatten)]
        common: Common,
    },
}

fn resolve(cli: Cli) -> Result<RunConfig> {
    let command = match &cli.command {
        CommandArgs::Constants { .. } => Command::Constants,
        CommandArgs::Simulate { .. } => Command::Simulate,
        CommandArgs::Ensemble { .. } => Command::Ensemble,
        CommandArgs::Kernel { .. } => Command::Kernel,
        CommandArgs::Validate { .. } => Command::Validate,
    };
    let mut config = RunConfig::new(command);
    if let Ok(seed) = std::env::var(SEED_ENV) {
        config.seed = seed.trim().parse().map_err(|_| Error::InvalidInput(format!("{SEED_ENV}={seed:?} is not a u64")))?;
    }
    if let Some(path) = &cli.config {
        config.apply_text(&std::fs::read_to_string(path)?)?;
        config.command = command;
    }
    config.threads = cli.threads.or(config.threads);
    config.output = cli.output.or(config.output);
    let common = match &cli.command {
        CommandArgs::Constants { common, .. }
        | CommandArgs::Simulate { common, .. }
        | CommandArgs::Ensemble { common, .. }
        | CommandArgs::Kernel { common, .. }
        | CommandArgs::Validate { common } => common,
    };
    config.m = common.m.unwrap_or(config.m);
    config.seed = common.seed.unwrap_or(config.seed);
    config.samples = common.samples.unwrap_or(config.samples);
    if let Some(w) = &common.weight {
        config.weight = w.clone();
    }
    match cli.command {
        CommandArgs::Constants { epsilon, dump_delta0, .. } => {
            config.epsilon = epsilon.or(config.epsilon);
            config.dump_delta0 = dump_delta0.or(config.dump_delta0);
        }
        CommandArgs::Simulate { epsilon, fields, emit_counts, .. } => {
            config.epsilon = epsilon.or(config.epsilon);
            config.fields = fields.unwrap_or(config.fields);
            config.emit_counts = emit_counts.or(config.emit_counts);
        }
        CommandArgs::Ensemble { u, v, axial, .. } => {
            config.u = u.unwrap_or(config.u);
            config.v = v.unwrap_or(config.v);
            if let Some(a) = axial {
                config.axial = Some(parse_axial(&a).map_err(Error::InvalidInput)?);
            }
        }
        CommandArgs::Kernel { eta, epsilon, tensor, dump_tensor, .. } => {
            if let Some(e) = eta {
                config.eta = parse_list(&e).map_err(Error::InvalidInput)?;
            }
            config.epsilon = epsilon.or(config.epsilon);
            config.tensor = tensor.unwrap_or(config.tensor);
            config.dump_tensor = dump_tensor.or(config.dump_tensor);
        }
        CommandArgs::Validate { .. } => {}
    }
    Ok(config)
}

// ------------------------------------------------------------ execution

/// The JSON document written for every run.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub version: &'static str,
    pub command: Option<Command>,
    pub config: Option<RunConfig>,
    pub seed: Option<u64>,
    pub results: Value,
    pub errors: Vec<Value>,
}

fn error_object(e: &Error) -> Value {
    json!({ "kind": e.kind(), "code": e.code(), "message": e.to_string() })
}

/// Parse a weight argument.
pub fn parse_weight(spec: &str) -> Result<WeightSpec> {
    let spec = spec.trim();
    if spec == "gaussian" {
        return WeightSpec::gaussian(1.0);
    }
    if let Some(scale) = spec.strip_prefix("gaussian:") {
        let scale = scale.parse().map_err(|_| Error::InvalidWeight(format!("bad gaussian scale {scale:?}")))?;
        return WeightSpec::gaussian(scale);
    }
    if let Some(path) = spec.strip_prefix("table:") {
        let file = File::open(path).map_err(|e| Error::InvalidWeight(format!("{path}: {e}")))?;
        return WeightSpec::from_csv(file);
    }
    Err(Error::InvalidWeight(format!("unrecognised weight {spec:?}")))
}

fn profile(config: &RunConfig) -> Result<RadialProfile> {
    make_profile(&parse_weight(&config.weight)?, config.m)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Run one resolved configuration and return its `results` value.
pub fn execute(config: &RunConfig) -> Result<Value> {
    match config.command {
        Command::Constants => run_constants(config),
        Command::Simulate => run_simulate(config),
        Command::Ensemble => run_ensemble(config),
        Command::Kernel => run_kernel(config),
        Command::Validate => run_validate(config).map(|checks| json!({ "checks": checks })),
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn run_constants(config: &RunConfig) -> Result<Value> {
    let p = profile(config)?;
    let settings = CPrimeConfig { n_mc: config.samples, seed: config.seed, ..CPrimeConfig::default() };
    let report = constants_report(&p, config.epsilon, &settings)?;
    if let Some(path) = &config.dump_delta0 {
        let radii: Vec<f64> = (1..=DELTA0_DUMP_POINTS).map(|k| k as f64 * DELTA0_DUMP_STEP).collect();
        let mut w = csv_writer(path)?;
        w.write_record(["t", "delta0", "std_error"]).map_err(csv_error)?;
        for (t, d, se) in delta0_curve(&p, &radii, config.samples, config.seed)? {
            w.write_record([t.to_string(), d.to_string(), se.to_string()]).map_err(csv_error)?;
        }
        w.flush()?;
    }
    Ok(to_value(&report))
}

fn run_simulate(config: &RunConfig) -> Result<Value> {
    let w = parse_weight(&config.weight)?;
    let eps = config.epsilon.unwrap_or(0.05);
    let moments = empirical_moments(&w, config.m, eps, config.fields, config.seed)?;
    if let Some(path) = &config.emit_counts {
        let mut out = csv_writer(path)?;
        out.write_record(["field_index", "count"]).map_err(csv_error)?;
        for (i, c) in moments.counts.iter().enumerate() {
            out.write_record([i.to_string(), c.to_string()]).map_err(csv_error)?;
        }
        out.flush()?;
    }
    let mut value = to_value(&moments);
    if let Value::Object(map) = &mut value {
        map.remove("counts");
    }
    Ok(value)
}

fn run_ensemble(config: &RunConfig) -> Result<Value> {
    let (spec, validity) = match config.axial {
        Some(c) => {
            let mut axis = vec![0.0; config.m];
            axis[0] = 1.0;
            let spec = AxialSpec::new(config.m, c, axis)?;
            let validity = match validate_axial(&spec) {
                Validity::Valid => "valid".to_string(),
                Validity::Invalid(reason) => return Err(Error::InvalidInput(format!("axial ensemble is invalid: {reason}"))),
            };
            (EnsembleSpec::Axial(spec), validity)
        }
        None => (EnsembleSpec::Iso(IsoSpec::new(config.m, config.u, config.v)?), "valid".to_string()),
    };
    let est = expect_abs_det(&spec, config.samples, config.seed)?;
    Ok(json!({
        "estimate": est.mean,
        "std_error": est.std_error,
        "n": est.n,
        "seed": config.seed,
        "validity": validity,
    }))
}

fn tensor_for(config: &RunConfig, p: &RadialProfile) -> Result<CovTensor> {
    let eps = config.epsilon.unwrap_or(0.0);
    if config.eta.len() != config.m && matches!(config.tensor, TensorKind::Xi | TensorKind::XiRescaled | TensorKind::XiOrigin) {
        return Err(Error::InvalidInput(format!("eta has {} components, expected {}", config.eta.len(), config.m)));
    }
    match config.tensor {
        TensorKind::Xi => xi_bar(p, &config.eta, eps),
        TensorKind::XiRescaled => xi_rescale(&xi_bar(p, &config.eta, eps)?),
        TensorKind::XiOrigin => xi_limit_origin(p, &config.eta, eps),
        TensorKind::Upsilon => upsilon(p, eps),
        TensorKind::XiInfinity => Ok(xi_infinity(p)),
    }
}

fn run_kernel(config: &RunConfig) -> Result<Value> {
    let p = profile(config)?;
    let tensor = tensor_for(config, &p)?;
    let rows = tensor.rows();
    if let Some(path) = &config.dump_tensor {
        let mut w = csv_writer(path)?;
        w.write_record(["i", "j", "k", "l", "value"]).map_err(csv_error)?;
        for &(i, j, k, l, v) in &rows {
            w.write_record([i.to_string(), j.to_string(), k.to_string(), l.to_string(), v.to_string()])
                .map_err(csv_error)?;
        }
        w.flush()?;
    }
    let det = match config.tensor {
        TensorKind::Xi | TensorKind::XiRescaled if config.eta.iter().any(|x| *x != 0.0) => {
            Some(det_script_h(&script_h(&p, &config.eta, config.epsilon.unwrap_or(0.0))?))
        }
        _ => None,
    };
    let (lowest, psd) = tensor.psd_check();
    Ok(json!({
        "tensor": config.tensor,
        "provenance": format!("{:?}", tensor.provenance),
        "det_script_h": det,
        "lowest_eigenvalue": lowest,
        "psd": psd,
        "entries": rows.iter().map(|&(i, j, k, l, v)| json!([i, j, k, l, v])).collect::<Vec<_>>(),
    }))
}

/// One row of the `validate` table.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check { name: name.into(), passed, detail }
}

/// Quick invariant checks on the Gaussian weight.
pub fn run_validate(config: &RunConfig) -> Result<Vec<Check>> {
    let w = WeightSpec::gaussian(1.0)?;
    let p1 = make_profile(&w, 1)?;
    let mut checks = Vec::new();

    let c1 = c_m(&p1, config.samples, config.seed)?;
    let oracle = 1.5f64.sqrt() / std::f64::consts::PI;
    checks.push(check("c1_closed_form", (c1.value - oracle).abs() < 1e-3, format!("{} vs {oracle}", c1.value)));

    let goe = expect_abs_det(&EnsembleSpec::Iso(IsoSpec::new(1, 1.0, 1.0)?), config.samples, config.seed)?;
    let oracle = (6.0 / std::f64::consts::PI).sqrt();
    let z = (goe.mean - oracle) / goe.std_error;
    checks.push(check("scalar_ensemble_abs_det", z.abs() < 3.0, format!("{} ± {} (z = {z:.2})", goe.mean, goe.std_error)));

    let det = det_script_h(&script_h(&p1, &[1.0], 0.0)?);
    checks.push(check("det_script_h_unit", (det - 0.666299).abs() < 1e-5, format!("{det}")));

    for m in 1..=3 {
        let p = make_profile(&w, m)?;
        let worst = (0..=40)
            .map(|i| tech_margin(&p, i as f64 * 0.25).map(|(a, b)| a.min(b)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        checks.push(check(&format!("tech_margins_m{m}"), worst >= -1e-10, format!("min margin {worst:e}")));
    }

    let p3 = make_profile(&w, 3)?;
    let h = p3.moments().2;
    let origin = xi_limit_origin(&p3, &[1.0, 0.0, 0.0], 0.0)?;
    let (same, mixed) = (origin.get(2, 2, 2, 2)?, origin.get(2, 2, 3, 3)?);
    let ok = ((same / (8.0 / 3.0 * h)) - 1.0).abs() < 5e-3 && ((mixed / (2.0 / 3.0 * h)) - 1.0).abs() < 5e-3;
    checks.push(check("origin_limit_m3", ok, format!("{same}, {mixed} vs h = {h}")));

    let t = xi_bar(&p3, &[0.1, 0.0, 0.0], 0.0)?;
    let worst = zero_entries(3)
        .iter()
        .map(|q| t.get(q[0], q[1], q[2], q[3]).map(f64::abs))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(check("zero_entries_m3", worst < 1e-12, format!("max |entry| {worst:e}")));
    Ok(checks)
}

fn write_report(report: &Report, config: Option<&RunConfig>, out: &mut dyn Write) -> Result<()> {
    let text = serde_json::to_string_pretty(report).expect("report serializes") + "\n";
    match config.and_then(|c| c.output.as_ref()) {
        Some(path) => {
            let mut f = BufWriter::new(File::create(path)?);
            f.write_all(text.as_bytes())?;
            f.flush()?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Parse `args` (including the program name), run, and write the report.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let _ = write!(err, "{e}");
            let report = Report {
                version: env!("CARGO_PKG_VERSION"),
                command: None,
                config: None,
                seed: None,
                results: Value::Null,
                errors: vec![json!({ "kind": "usage", "code": 1, "message": e.kind().to_string() })],
            };
            let _ = write_report(&report, None, out);
            return 1;
        }
    };
    let config = match resolve(cli) {
        Ok(c) => c,
        Err(e) => {
            let report = Report {
                version: env!("CARGO_PKG_VERSION"),
                command: None,
                config: None,
                seed: None,
                results: Value::Null,
                errors: vec![error_object(&e)],
            };
            let _ = write_report(&report, None, out);
            return e.code();
        }
    };
    let outcome = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot build thread pool: {e}")))
        .and_then(|pool| pool.install(|| execute(&config)));
    let (results, errors, code) = match outcome {
        Ok(v) => (v, vec![], 0),
        Err(e) => (Value::Null, vec![error_object(&e)], e.code()),
    };
    if config.command == Command::Validate {
        if let Some(checks) = results.get("checks").and_then(Value::as_array) {
            for c in checks {
                let status = if c["passed"].as_bool() == Some(true) { "PASS" } else { "FAIL" };
                let _ = writeln!(err, "{status}  {:<26} {}", c["name"].as_str().unwrap_or(""), c["detail"].as_str().unwrap_or(""));
            }
        }
    }
    let failed_check = results
        .get("checks")
        .and_then(Value::as_array)
        .is_some_and(|cs| cs.iter().any(|c| c["passed"].as_bool() != Some(true)));
    let report = Report {
        version: env!("CARGO_PKG_VERSION"),
        command: Some(config.command),
        seed: Some(config.seed),
        config: Some(config.clone()),
        results,
        errors,
    };
    if let Err(e) = write_report(&report, Some(&config), out) {
        let _ = writeln!(err, "{e}");
        return e.code();
    }
    if code == 0 && failed_check {
        return Error::NoConvergence(String::new()).code();
    }
    code
}
