//! Command-line interface: `gate`, `sweep`, `mc` and `validate`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analytic::{bloch_average, cz, JointState, Scheme};
use crate::cavity::CavityParams;
use crate::error::{Error, Result};
use crate::montecarlo::{
    linspace, mc_infidelity_curve, sweep_1d, FluctuationSpec, SweepAxis, SweepResult,
};
use crate::oracle::{cz_new_network, cz_old_network};
use crate::output::{format_number, key_value_csv, sweep_csv, to_json};
use crate::validate::{run_all, sweep_baseline};

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NO_HERALD: i32 = 3;

/// Maps an error to the process exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoHerald { .. } => EXIT_NO_HERALD,
        Error::Io(_) => EXIT_FAILURE,
        _ => EXIT_CONFIG,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "cavsim",
    version,
    about = "Cavity-mediated atom-photon CZ gate simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one operating point.
    Gate(GateArgs),
    /// Bloch-averaged fidelity and success along one parameter axis.
    Sweep(SweepArgs),
    /// Monte Carlo atom-atom infidelity versus cooperativity.
    Mc(McArgs),
    /// Check the reference operating points; nonzero exit on any failure.
    Validate(OutputArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeChoice {
    New,
    Old,
    Both,
}

impl SchemeChoice {
    fn schemes(self) -> Vec<Scheme> {
        match self {
            SchemeChoice::New => vec![Scheme::New],
            SchemeChoice::Old => vec![Scheme::Old],
            SchemeChoice::Both => Scheme::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Directory to write result files into (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

/// Cavity parameters as a flat JSON config; absent keys keep their defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityConfig {
    pub cooperativity: Option<f64>,
    pub delta_c: Option<f64>,
    pub delta_a: Option<f64>,
    pub kappa_ratio: Option<f64>,
    pub zeta: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct CavityArgs {
    /// Flat JSON file with cavity parameter keys; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Cooperativity.
    #[arg(long = "c")]
    pub cooperativity: Option<f64>,
    /// Cavity detuning in units of kappa.
    #[arg(long = "dc", allow_hyphen_values = true)]
    pub delta_c: Option<f64>,
    /// Atomic detuning in units of gamma.
    #[arg(long = "da", allow_hyphen_values = true)]
    pub delta_a: Option<f64>,
    /// kappa_r / kappa.
    #[arg(long = "kr")]
    pub kappa_ratio: Option<f64>,
    /// Spatial mode matching.
    #[arg(long)]
    pub zeta: Option<f64>,
}

impl CavityArgs {
    /// File values over the sweep baseline, then flags over both.
    pub fn resolve(&self) -> Result<CavityParams> {
        let file = match &self.config {
            Some(path) => {
                let text = read(path)?;
                serde_json::from_str::<CavityConfig>(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
            None => CavityConfig::default(),
        };
        let base = sweep_baseline();
        let pick =
            |flag: Option<f64>, file: Option<f64>, default: f64| flag.or(file).unwrap_or(default);
        let p = CavityParams {
            cooperativity: pick(self.cooperativity, file.cooperativity, base.cooperativity),
            delta_c: pick(self.delta_c, file.delta_c, base.delta_c),
            delta_a: pick(self.delta_a, file.delta_a, base.delta_a),
            kappa_ratio: pick(self.kappa_ratio, file.kappa_ratio, base.kappa_ratio),
            zeta: pick(self.zeta, file.zeta, base.zeta),
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Args)]
pub struct GateArgs {
    #[command(flatten)]
    pub cavity: CavityArgs,
    #[arg(long, value_enum, default_value = "new")]
    pub scheme: SchemeChoice,
    /// MZI phase (new scheme).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi: f64,
    /// Photon Bloch polar angle; default with the other angles is the equal superposition.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    pub photon_theta: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub photon_phi: f64,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    pub atom_theta: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub atom_phi: f64,
    /// Average over uniformly distributed initial states instead.
    #[arg(long)]
    pub average: bool,
    /// Also evaluate the state-vector network and report both.
    #[arg(long)]
    pub oracle: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub cavity: CavityArgs,
    /// zeta, kappa_ratio, delta_c or C.
    #[arg(long)]
    pub axis: String,
    #[arg(long, value_enum, default_value = "both")]
    pub scheme: SchemeChoice,
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<f64>,
    #[arg(long, default_value_t = 21)]
    pub points: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct McArgs {
    /// Fluctuation spec JSON (flat keys), or a previous `mc` JSON output.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "both")]
    pub scheme: SchemeChoice,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Zero-mean phase noise at both MZIs.
    #[arg(long)]
    pub sigma_phi: Option<f64>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub c_points: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl McArgs {
    pub fn resolve(&self) -> Result<FluctuationSpec> {
        let mut spec = match &self.spec {
            Some(path) => parse_spec(&read(path)?)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
            None => FluctuationSpec::default(),
        };
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        if let Some(t) = self.trials {
            spec.trials = t;
        }
        if let Some(w) = self.window {
            spec.window = w;
        }
        if let Some(n) = self.c_points {
            spec.c_points = n;
        }
        if let Some(s) = self.sigma_phi {
            spec = spec.with_phase_noise(s);
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Accepts a bare spec or an `mc` output document carrying it under `config`.
pub fn parse_spec(text: &str) -> std::result::Result<FluctuationSpec, String> {
    let v: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let v = match v {
        Value::Object(mut m) if m.contains_key("config") => {
            m.remove("config").unwrap_or(Value::Null)
        }
        other => other,
    };
    serde_json::from_value(v).map_err(|e| e.to_string())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

/// Sends `content` to `out/name` or, without `--out`, to `stdout`.
fn emit(output: &OutputArgs, name: &str, content: &str, stdout: &mut dyn Write) -> Result<()> {
    match &output.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
            let path = dir.join(name);
            fs::write(&path, content).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
        }
        None => stdout
            .write_all(content.as_bytes())
            .map_err(|e| Error::Io(e.to_string())),
    }
}

fn extension(f: Format) -> &'static str {
    match f {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

#[derive(Serialize)]
struct GateReport {
    scheme: Scheme,
    params: CavityParams,
    phi: f64,
    state: Option<JointState>,
    analytic: Value,
    oracle: Option<Value>,
    max_abs_difference: Option<f64>,
}

fn cmd_gate(args: &GateArgs, stdout: &mut dyn Write) -> Result<()> {
    let p = args.cavity.resolve()?;
    let scheme = match args.scheme {
        SchemeChoice::New => Scheme::New,
        SchemeChoice::Old => Scheme::Old,
        SchemeChoice::Both => return Err(Error::Config("gate takes --scheme new or old".into())),
    };
    let mut rows: Vec<(String, f64)> = Vec::new();
    let report = if args.average {
        if args.oracle {
            return Err(Error::Config(
                "--oracle evaluates a single state; drop --average".into(),
            ));
        }
        let avg = bloch_average(&p, scheme, args.phi)?;
        rows.push(("fidelity".into(), avg.fidelity));
        rows.push(("success_probability".into(), avg.success_probability));
        rows.push(("order".into(), avg.order as f64));
        GateReport {
            scheme,
            params: p,
            phi: args.phi,
            state: None,
            analytic: serde_json::to_value(avg).map_err(|e| Error::Io(e.to_string()))?,
            oracle: None,
            max_abs_difference: None,
        }
    } else {
        let s = JointState::from_bloch(
            args.photon_theta,
            args.photon_phi,
            args.atom_theta,
            args.atom_phi,
        );
        let g = cz(scheme, &p, &s, args.phi)?;
        rows.push(("fidelity".into(), g.fidelity));
        rows.push(("success_probability".into(), g.success_probability));
        rows.push(("p_loss".into(), g.p_loss));
        rows.push(("p_h_reject".into(), g.p_h_reject));
        let oracle = if args.oracle {
            let o = match scheme {
                Scheme::New => cz_new_network(&p, &s, args.phi, 1.0, 0.0)?,
                Scheme::Old => cz_old_network(&p, &s, 0.0)?,
            };
            Some(o.result)
        } else {
            None
        };
        let diff = oracle.map(|o| {
            [
                o.fidelity - g.fidelity,
                o.success_probability - g.success_probability,
                o.p_loss - g.p_loss,
                o.p_h_reject - g.p_h_reject,
            ]
            .iter()
            .fold(0.0f64, |m, d| m.max(d.abs()))
        });
        GateReport {
            scheme,
            params: p,
            phi: args.phi,
            state: Some(s),
            analytic: serde_json::to_value(g).map_err(|e| Error::Io(e.to_string()))?,
            oracle: oracle.map(|o| serde_json::to_value(o).unwrap_or(Value::Null)),
            max_abs_difference: diff,
        }
    };
    let content = match args.output.format {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            if let (Some(o), Some(d)) = (&report.oracle, report.max_abs_difference) {
                let analytic = rows.clone();
                for (k, _) in &analytic {
                    let v = o
                        .get(k.as_str())
                        .and_then(Value::as_f64)
                        .unwrap_or(f64::NAN);
                    rows.push((format!("oracle_{k}"), v));
                }
                rows.push(("max_abs_difference".into(), d));
            }
            key_value_csv("value", &rows)
        }
    };
    emit(
        &args.output,
        &format!("gate.{}", extension(args.output.format)),
        &content,
        stdout,
    )
}

fn default_range(axis: SweepAxis) -> (f64, f64) {
    match axis {
        SweepAxis::Zeta => (0.8, 1.0),
        SweepAxis::KappaRatio => (0.7, 1.0),
        SweepAxis::DeltaC => (0.0, 0.5),
        SweepAxis::Cooperativity => (1.0, 10.0),
    }
}

fn emit_results(
    output: &OutputArgs,
    stem: &str,
    results: &[SweepResult],
    document: &Value,
    stdout: &mut dyn Write,
) -> Result<()> {
    match output.format {
        Format::Json => emit(output, &format!("{stem}.json"), &to_json(document)?, stdout),
        Format::Csv => {
            for r in results {
                let name = format!("{stem}_{}_{}.csv", r.metadata.scheme, r.metadata.quantity);
                if output.out.is_none() && results.len() > 1 {
                    emit(
                        output,
                        &name,
                        &format!("# {}\n", name.trim_end_matches(".csv")),
                        stdout,
                    )?;
                }
                emit(output, &name, &sweep_csv(r), stdout)?;
            }
            Ok(())
        }
    }
}

fn cmd_sweep(args: &SweepArgs, stdout: &mut dyn Write) -> Result<()> {
    let base = args.cavity.resolve()?;
    let axis: SweepAxis = args.axis.parse()?;
    let (lo, hi) = default_range(axis);
    let grid = linspace(args.from.unwrap_or(lo), args.to.unwrap_or(hi), args.points);
    let mut results = Vec::new();
    for scheme in args.scheme.schemes() {
        let s = sweep_1d(&base, axis, &grid, scheme)?;
        results.push(s.fidelity);
        results.push(s.success);
    }
    let doc = serde_json::json!({ "base": base, "axis": axis, "results": results });
    emit_results(
        &args.output,
        &format!("sweep_{axis}"),
        &results,
        &doc,
        stdout,
    )
}

fn cmd_mc(args: &McArgs, stdout: &mut dyn Write) -> Result<()> {
    let spec = args.resolve()?;
    let results = args
        .scheme
        .schemes()
        .into_iter()
        .map(|scheme| mc_infidelity_curve(&spec, scheme))
        .collect::<Result<Vec<_>>>()?;
    let doc = serde_json::json!({ "config": spec, "results": results });
    emit_results(&args.output, "mc", &results, &doc, stdout)
}

fn cmd_validate(args: &OutputArgs, stdout: &mut dyn Write) -> Result<bool> {
    let v = run_all()?;
    match args.format {
        Format::Json => emit(args, "validate.json", &to_json(&v)?, stdout)?,
        Format::Csv => {
            let mut text = String::from("report,check,computed,expected,tolerance,passed\n");
            for r in &v.reports {
                for c in &r.checks {
                    text.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        r.name,
                        c.name,
                        format_number(c.computed),
                        c.expected,
                        c.tolerance,
                        c.passed
                    ));
                }
            }
            emit(args, "validate.csv", &text, stdout)?;
        }
    }
    if args.out.is_some() {
        stdout
            .write_all(v.to_text().as_bytes())
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    Ok(v.passed)
}

/// Runs a parsed command. `Ok(false)` means it ran but a check failed.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<bool> {
    match &cli.command {
        Command::Gate(a) => cmd_gate(a, stdout).map(|_| true),
        Command::Sweep(a) => cmd_sweep(a, stdout).map(|_| true),
        Command::Mc(a) => cmd_mc(a, stdout).map(|_| true),
        Command::Validate(a) => cmd_validate(a, stdout),
    }
}

/// Reads the `CAVSIM_THREADS` cap (unset or empty means no cap).
pub fn thread_cap(value: Option<&str>) -> Result<Option<usize>> {
    match value.map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) => match v.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Error::Config(format!(
                "CAVSIM_THREADS must be a positive integer, got `{v}`"
            ))),
        },
    }
}
