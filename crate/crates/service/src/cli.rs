//! The `dimcf` command line: `fit`, `explain`, `bench` and `serve`.
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 solver failure or
//! infeasible request.

use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use dimcf::bench::{render_report, run_experiment, DatasetSource, ExperimentConfig};
use dimcf::{diverse_counterfactuals, CfRequest, Error, GridIndex, Mapping, ProjectorConfig};
use serde_json::Value;

use crate::session::{FitSettings, Session, SessionStore, SESSION_DIR_ENV};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) => match e {
                Error::Input(_) | Error::DimensionMismatch { .. } => EXIT_USAGE,
                Error::Solver { .. } | Error::Infeasible { .. } | Error::Benchmark(_) => EXIT_SOLVER,
                _ => EXIT_DATA,
            },
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

#[derive(Debug, Parser)]
#[command(name = "dimcf", version, about = "Counterfactual explanations for dimensionality-reduction views")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Linear,
    Som,
    Ae,
    Ptsne,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Linear => "linear",
            Method::Som => "som",
            Method::Ae => "ae",
            Method::Ptsne => "ptsne",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a projector and save it with its dataset as a session file.
    Fit {
        /// `toy` for the generated toy data, otherwise a CSV path.
        #[arg(long)]
        data: String,
        #[arg(long, value_enum)]
        method: Method,
        /// Label column of a CSV dataset.
        #[arg(long, default_value = "label")]
        label_column: String,
        #[arg(long, default_value_t = 500)]
        toy_samples: usize,
        #[arg(long, default_value_t = 10)]
        toy_features: usize,
        /// Hyperparameter overrides as a JSON object, e.g. '{"height": 6}'.
        #[arg(long)]
        params: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute k diverse counterfactuals for one sample of a session.
    Explain {
        /// Session file written by `dimcf fit`.
        #[arg(long)]
        session: PathBuf,
        /// Index of the sample to explain.
        #[arg(long, conflicts_with = "x", required_unless_present = "x")]
        sample: Option<usize>,
        /// Standardized feature vector to explain, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<f64>>,
        /// Target location, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, group = "target_choice")]
        target: Option<Vec<f64>>,
        /// Use this sample's mapping as the target.
        #[arg(long, group = "target_choice")]
        target_sample: Option<usize>,
        /// Target SOM cell as `row,col`.
        #[arg(long, value_delimiter = ',', num_args = 1, group = "target_choice")]
        target_cell: Option<Vec<usize>>,
        /// Number of counterfactuals to compute.
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Features that must not change, comma separated indices.
        #[arg(long, value_delimiter = ',')]
        blacklist: Vec<usize>,
        /// Regularization strength of the mapping penalty.
        #[arg(long = "c", default_value_t = 1.0)]
        c: f64,
    },
    /// Run a benchmark described by a JSON config and write its reports.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Directory for the `.txt`, `.json` and `.csv` reports.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Serve the sessions of a directory over HTTP.
    Serve {
        #[arg(long, env = SESSION_DIR_ENV, default_value = "sessions")]
        sessions: PathBuf,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Fit {
            data,
            method,
            label_column,
            toy_samples,
            toy_features,
            params,
            seed,
            out: path,
        } => {
            let data = if data == "toy" {
                DatasetSource::Toy {
                    n: toy_samples,
                    d: toy_features,
                    seed: None,
                }
            } else {
                DatasetSource::Csv {
                    path: PathBuf::from(data),
                    label_column,
                }
            };
            let projector = projector_config(method, params.as_deref())?;
            let session = Session::fit(FitSettings { data, projector, seed })?;
            session.save(&path)?;
            writeln!(
                out,
                "fitted {} on {} samples x {} features -> {}",
                method.name(),
                session.dataset.n_samples(),
                session.dataset.n_features(),
                path.display()
            )?;
            Ok(())
        }
        Command::Explain {
            session,
            sample,
            x,
            target,
            target_sample,
            target_cell,
            k,
            blacklist,
            c,
        } => {
            let session = Session::load(&session)?;
            let n = session.dataset.n_samples();
            let check_index = |i: usize| {
                if i < n {
                    Ok(i)
                } else {
                    Err(CliError::Usage(format!("sample {i} out of range (session has {n} samples)")))
                }
            };
            let x = match (sample, x) {
                (Some(i), None) => session.dataset.sample(check_index(i)?).to_vec(),
                (None, Some(x)) => x,
                _ => return Err(CliError::Usage("give exactly one of --sample and --x".into())),
            };
            let y_cf = match (target, target_sample, target_cell) {
                (Some(t), None, None) => Mapping::Point(t),
                (None, Some(j), None) => session.projector.project(session.dataset.sample(check_index(j)?))?,
                (None, None, Some(cell)) if cell.len() == 2 => Mapping::Cell(GridIndex::new(cell[0], cell[1])),
                (None, None, Some(_)) => return Err(CliError::Usage("--target-cell takes row,col".into())),
                _ => {
                    return Err(CliError::Usage(
                        "give one of --target, --target-sample and --target-cell".into(),
                    ))
                }
            };
            session.projector.validate_target(&y_cf)?;
            let req = CfRequest::new(x, y_cf).with_blacklist(blacklist).with_c(c);
            let set = diverse_counterfactuals(&req, k, &session.projector)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&set).map_err(Error::from)?)?;
            Ok(())
        }
        Command::Bench { config, out_dir } => {
            let text = std::fs::read_to_string(&config)?;
            let cfg: ExperimentConfig = serde_json::from_str(&text).map_err(Error::from)?;
            let table = run_experiment(&cfg)?;
            let report = render_report(&table)?;
            std::fs::create_dir_all(&out_dir)?;
            for (ext, body) in [("txt", &report.text), ("json", &report.json), ("csv", &report.csv)] {
                std::fs::write(out_dir.join(format!("{}.{ext}", cfg.name)), body)?;
            }
            out.write_all(report.text.as_bytes())?;
            Ok(())
        }
        Command::Serve { sessions, host, port } => {
            let store = Arc::new(SessionStore::open(&sessions)?);
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(crate::api::serve(store, &format!("{host}:{port}")))?;
            Ok(())
        }
    }
}

fn projector_config(method: Method, params: Option<&str>) -> Result<ProjectorConfig, CliError> {
    let mut value = match params {
        Some(text) => serde_json::from_str::<Value>(text)
            .map_err(|e| CliError::Usage(format!("--params is not valid JSON: {e}")))?,
        None => Value::Object(Default::default()),
    };
    let obj = value
        .as_object_mut()
        .ok_or_else(|| CliError::Usage("--params must be a JSON object".into()))?;
    obj.insert("method".into(), Value::String(method.name().into()));
    serde_json::from_value(value).map_err(|e| CliError::Usage(format!("bad hyperparameters: {e}")))
}
