//! Command-line front end. Thin shell over the library: config
//! ingestion, subcommand dispatch, and export. Exit codes: 0 ok,
//! 2 config error, 3 no-convergence, 4 unstable system, 5 IO error.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use optomech::config::{ConfigError, OutputFormat, RunConfig};
use optomech::dynamics::{
    build_dual_polarization, build_single, check_stability, matrix_to_csv, LinearModel,
};
use optomech::entanglement::EntanglementReport;
use optomech::lyapunov::{solve_lyapunov, CovarianceMatrix, LyapunovError};
use optomech::model::{scheme_params, Scheme, SystemParams};
use optomech::network::{build_chain, optical_restriction, ChainError, ChainKind, ChainSpec, Line};
use optomech::steadystate::{solve_self_consistent, SteadyState, SteadyStateError};
use optomech::sweep::{preset, run_sweep, Preset, SweepError, ALL_PRESET_NAMES};

#[derive(Parser)]
#[command(
    name = "optomech",
    version,
    about = "Steady-state Gaussian entanglement of double-longitudinal-mode \
             cavity optomechanical systems and beam-splitter networks of them"
)]
struct Cli {
    /// TOML run configuration; flags override config values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format (default: json for reports, csv for sweeps).
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Worker-thread cap for sweeps.
    #[arg(long, global = true, env = "OPTOMECH_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Dot,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Single,
    DualPolarization,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ChainSchemeArg {
    TwoMode,
    FourMode,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LineArg {
    Lower,
    Upper,
}

#[derive(Subcommand)]
enum Cmd {
    /// Single-system pipeline: steady state, covariance matrix, pairwise
    /// entanglement report.
    Entangle {
        #[arg(long, value_enum)]
        scheme: Option<SchemeArg>,
        /// Override Delta_2 as a multiple of omega_m.
        #[arg(long)]
        delta2_over_omega_m: Option<f64>,
        /// Override the input power, watts.
        #[arg(long)]
        power: Option<f64>,
        /// Override the bath temperature, kelvin.
        #[arg(long)]
        temperature: Option<f64>,
        /// Also print the classical working point as JSON to stderr.
        #[arg(long)]
        dump_steady_state: bool,
    },
    /// Parameter sweep, from a named preset or a config-file sweep section.
    Sweep {
        /// One of the figure presets.
        #[arg(long)]
        preset: Option<String>,
        /// List the available presets and exit.
        #[arg(long)]
        list_presets: bool,
    },
    /// Beam-splitter chain of N systems; reports the optical-mode state.
    Chain {
        #[arg(long)]
        cavities: Option<usize>,
        #[arg(long, value_enum)]
        scheme: Option<ChainSchemeArg>,
        /// Uniform beam-splitter transmissivity angle.
        #[arg(long)]
        theta: Option<f64>,
        /// Uniform beam-splitter phase.
        #[arg(long)]
        phi: Option<f64>,
        #[arg(long, value_enum)]
        line: Option<LineArg>,
    },
    /// Print the classical steady-state working point as JSON.
    SteadyState {
        #[arg(long, value_enum)]
        scheme: Option<SchemeArg>,
    },
    /// Export the drift and diffusion matrices as CSV.
    DumpMatrices {
        #[arg(long, value_enum)]
        scheme: Option<SchemeArg>,
    },
}

#[derive(Debug)]
enum AppError {
    Config(String),
    NoConvergence(String),
    Unstable(String),
    Io(String),
}

impl AppError {
    fn code(&self) -> i32 {
        match self {
            AppError::Config(_) => 2,
            AppError::NoConvergence(_) => 3,
            AppError::Unstable(_) => 4,
            AppError::Io(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::Config(m)
            | AppError::NoConvergence(m)
            | AppError::Unstable(m)
            | AppError::Io(m) => m,
        }
    }
}

impl From<ConfigError> for AppError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io(e) => AppError::Io(e.to_string()),
            other => AppError::Config(other.to_string()),
        }
    }
}

impl From<optomech::model::ModelError> for AppError {
    fn from(e: optomech::model::ModelError) -> Self {
        AppError::Config(e.to_string())
    }
}

impl From<SteadyStateError> for AppError {
    fn from(e: SteadyStateError) -> Self {
        AppError::NoConvergence(e.to_string())
    }
}

impl From<LyapunovError> for AppError {
    fn from(e: LyapunovError) -> Self {
        match e {
            LyapunovError::UnstableSystem { .. } => AppError::Unstable(e.to_string()),
            LyapunovError::IllConditioned { .. } => AppError::NoConvergence(e.to_string()),
        }
    }
}

impl From<ChainError> for AppError {
    fn from(e: ChainError) -> Self {
        match e {
            ChainError::Model(m) => m.into(),
            ChainError::SteadyState(s) => s.into(),
            ChainError::Lyapunov(l) => l.into(),
            other => AppError::Config(other.to_string()),
        }
    }
}

impl From<SweepError> for AppError {
    fn from(e: SweepError) -> Self {
        AppError::Config(e.to_string())
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e.to_string())
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {}", e.message());
        std::process::exit(e.code());
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), AppError> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

/// Covariance-matrix CSV with a mode-ordering header row.
fn cm_to_csv(cm: &CovarianceMatrix<f64>) -> String {
    let labels: Vec<String> = cm.ordering.iter().map(|l| l.to_string()).collect();
    format!("# modes: {}\n{}", labels.join(","), matrix_to_csv(&cm.v))
}

struct SinglePipeline {
    steady: SteadyState<f64>,
    model: LinearModel<f64>,
}

fn single_pipeline(
    params: &SystemParams<f64>,
    scheme: Scheme,
) -> Result<SinglePipeline, AppError> {
    let cavities = scheme_params(params, scheme, 1)?;
    let steady = solve_self_consistent(&[cavities[0].dc.clone()], scheme)?
        .into_iter()
        .next()
        .expect("one cavity in, one steady state out");
    let model = match scheme {
        Scheme::DualPolarization => build_dual_polarization(&cavities[0].dc, &steady),
        _ => build_single(&cavities[0].dc, &steady),
    };
    Ok(SinglePipeline { steady, model })
}

fn resolve_scheme(arg: Option<SchemeArg>, cfg: &RunConfig) -> Scheme {
    match arg {
        Some(SchemeArg::Single) => Scheme::Single,
        Some(SchemeArg::DualPolarization) => Scheme::DualPolarization,
        None => cfg.scheme(),
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    let out = cli.out.clone().or_else(|| cfg.output.path.clone());
    let format = cli.format.or(match cfg.output.format {
        Some(OutputFormat::Csv) => Some(FormatArg::Csv),
        Some(OutputFormat::Json) => Some(FormatArg::Json),
        Some(OutputFormat::Dot) => Some(FormatArg::Dot),
        None => None,
    });

    match cli.cmd {
        Cmd::Entangle {
            scheme,
            delta2_over_omega_m,
            power,
            temperature,
            dump_steady_state,
        } => {
            let scheme = resolve_scheme(scheme, &cfg);
            if scheme == Scheme::TwoCavityBs {
                return Err(AppError::Config(
                    "two-cavity composition is the `chain` subcommand".into(),
                ));
            }
            let mut params = cfg.params.resolve()?.normalized();
            if let Some(r) = delta2_over_omega_m {
                let omega_m = std::f64::consts::PI * optomech::constants::C
                    / (2.0 * params.cavity_length);
                params.detuning_2 = r * omega_m;
            }
            if let Some(p) = power {
                params.input_power = p;
            }
            if let Some(t) = temperature {
                params.temperature = t;
            }
            let pipe = single_pipeline(&params, scheme)?;
            if dump_steady_state {
                eprintln!(
                    "{}",
                    serde_json::to_string_pretty(&pipe.steady)
                        .expect("steady state serializes")
                );
            }
            let verdict = check_stability(&pipe.model);
            if !verdict.stable {
                return Err(AppError::Unstable(format!(
                    "drift matrix is not Hurwitz stable (spectral abscissa {:e})",
                    verdict.spectral_abscissa
                )));
            }
            let cm = solve_lyapunov(&pipe.model)?;
            let report = EntanglementReport::from_covariance(&cm);
            let content = match format.unwrap_or(FormatArg::Json) {
                FormatArg::Json => report.to_json(),
                FormatArg::Dot => report.to_dot(),
                FormatArg::Csv => cm_to_csv(&cm),
            };
            emit(&out, &content)
        }
        Cmd::Sweep { preset: preset_name, list_presets } => {
            if list_presets {
                return emit(&out, &format!("{}\n", ALL_PRESET_NAMES.join("\n")));
            }
            let name = preset_name
                .or_else(|| cfg.sweep.as_ref().and_then(|s| s.preset.clone()));
            let spec = match name {
                Some(name) => match preset::<f64>(&name)? {
                    Preset::Sweep(spec) => spec,
                    Preset::Chain(params, chain) => {
                        // chain presets are one-shot builds, not grids
                        let cm = optical_restriction(&build_chain(&params, &chain)?);
                        let report = EntanglementReport::from_covariance(&cm);
                        let content = match format.unwrap_or(FormatArg::Json) {
                            FormatArg::Json => report.to_json(),
                            FormatArg::Dot => report.to_dot(),
                            FormatArg::Csv => cm_to_csv(&cm),
                        };
                        return emit(&out, &content);
                    }
                },
                None => cfg.custom_sweep()?.ok_or_else(|| {
                    AppError::Config(
                        "no sweep specified: pass --preset or a [sweep] config section"
                            .into(),
                    )
                })?,
            };
            let run_it = || run_sweep(&spec);
            let result = match cli.jobs {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| AppError::Config(e.to_string()))?
                    .install(run_it),
                None => run_it(),
            }?;
            let content = match format.unwrap_or(FormatArg::Csv) {
                FormatArg::Csv => result.to_csv(),
                FormatArg::Json => result.to_json(),
                FormatArg::Dot => {
                    return Err(AppError::Config(
                        "dot output applies to reports, not sweeps".into(),
                    ))
                }
            };
            emit(&out, &content)
        }
        Cmd::Chain { cavities, scheme, theta, phi, line } => {
            let params = cfg.params.resolve()?;
            let mut chain = match &cfg.chain {
                Some(section) => section.resolve(cfg.io_mode()),
                None => ChainSpec::balanced(cavities.unwrap_or(2), ChainKind::TwoMode),
            };
            if let Some(n) = cavities {
                chain.n_systems = n;
            }
            if let Some(s) = scheme {
                chain.kind = match s {
                    ChainSchemeArg::TwoMode => ChainKind::TwoMode,
                    ChainSchemeArg::FourMode => ChainKind::FourMode,
                };
            }
            if let Some(t) = theta {
                chain.theta = vec![t];
            }
            if let Some(p) = phi {
                chain.phi = vec![p];
            }
            if let Some(l) = line {
                chain.line = match l {
                    LineArg::Lower => Line::Lower,
                    LineArg::Upper => Line::Upper,
                };
            }
            chain.io_mode = cfg.io_mode();
            let cm = optical_restriction(&build_chain(&params, &chain)?);
            let report = EntanglementReport::from_covariance(&cm);
            let content = match format.unwrap_or(FormatArg::Json) {
                FormatArg::Json => report.to_json(),
                FormatArg::Dot => report.to_dot(),
                FormatArg::Csv => cm_to_csv(&cm),
            };
            emit(&out, &content)
        }
        Cmd::SteadyState { scheme } => {
            let scheme = resolve_scheme(scheme, &cfg);
            let params = cfg.params.resolve()?.normalized();
            let pipe = single_pipeline(&params, scheme)?;
            emit(
                &out,
                &format!(
                    "{}\n",
                    serde_json::to_string_pretty(&pipe.steady)
                        .expect("steady state serializes")
                ),
            )
        }
        Cmd::DumpMatrices { scheme } => {
            let scheme = resolve_scheme(scheme, &cfg);
            let params = cfg.params.resolve()?.normalized();
            let pipe = single_pipeline(&params, scheme)?;
            let labels: Vec<String> =
                pipe.model.ordering.iter().map(|l| l.to_string()).collect();
            let content = format!(
                "# modes: {}\n# drift matrix A\n{}# diffusion matrix D\n{}",
                labels.join(","),
                matrix_to_csv(&pipe.model.a),
                matrix_to_csv(&pipe.model.d)
            );
            emit(&out, &content)
        }
    }
}
