//! Command-line front end: one subcommand per library capability, JSON for
//! single records, CSV for series. Exit code 0 on success, 1 on domain
//! errors, 2 on usage errors.

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::process::ExitCode;

use queue_knee::controller::{run_controller, ControllerConfig, ControllerLog, ControllerMode};
use queue_knee::curve::{sample_curve, CurveForm, CurveSeries};
use queue_knee::geometry::{
    classify_load, classify_throughput, load_knee_geometry, throughput_knee_geometry, RegionLabel,
};
use queue_knee::mm1::steady_state;
use queue_knee::sim::{run_mm1, validate_against_analytic, SimConfig, SimResult, ValidationReport};
use queue_knee::{controller::LoadTrace, QueueParametersF64};

#[derive(Parser)]
#[command(name = "queue-knee", version, about = "M/M/1 knee analysis toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormArg {
    Load,
    Throughput,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Analytic,
    Stochastic,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form steady-state metrics for one operating point
    Analyze {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Knee geometry of one curve (vertex, focus, latus rectum, region)
    #[command(group(ArgGroup::new("curve").required(true).args(["service_time", "mu"])))]
    Knee {
        #[arg(long)]
        service_time: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long, value_enum)]
        form: Option<FormArg>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Flat/knee/exponential label for one operating point
    #[command(group(ArgGroup::new("curve").required(true).args(["service_time", "mu"])))]
    Classify {
        #[arg(long, requires = "utilization")]
        service_time: Option<f64>,
        #[arg(long)]
        utilization: Option<f64>,
        #[arg(long, requires = "lambda")]
        mu: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Sample a response-time curve with exact knee markers
    #[command(group(ArgGroup::new("curve").required(true).args(["service_time", "mu"])))]
    Curve {
        #[arg(long)]
        service_time: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        step: f64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Run the seeded M/M/1 simulator, optionally validating against the
    /// closed forms
    Simulate {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        customers: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        warmup: Option<f64>,
        #[arg(long)]
        batches: Option<usize>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Drive the adaptive capacity controller over a load trace
    Adapt {
        #[arg(long)]
        trace: std::path::PathBuf,
        #[arg(long)]
        review_period: f64,
        #[arg(long)]
        horizon: f64,
        #[arg(long)]
        mu_min: Option<f64>,
        #[arg(long)]
        mu_max: f64,
        #[arg(long)]
        initial_mu: f64,
        #[arg(long, value_enum, default_value = "analytic")]
        mode: ModeArg,
        #[arg(long, default_value = "0")]
        seed: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

#[derive(Serialize)]
struct ClassifyOutput {
    form: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    service_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    utilization: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    service_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    arrival_rate: Option<f64>,
    region: RegionLabel,
}

#[derive(Serialize)]
struct SimulateOutput {
    #[serde(flatten)]
    result: SimResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    validation: Option<ValidationReport>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Domain(err)) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
        Err(RunError::Usage(message)) => {
            eprintln!("usage error: {message}");
            ExitCode::from(2)
        }
    }
}

enum RunError {
    Domain(queue_knee::Error),
    Usage(String),
}

impl From<queue_knee::Error> for RunError {
    fn from(err: queue_knee::Error) -> Self {
        RunError::Domain(err)
    }
}

fn print_json<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("serializable output")
    );
}

fn run(command: Command) -> Result<(), RunError> {
    match command {
        Command::Analyze { lambda, mu, format } => {
            let params = QueueParametersF64::new(lambda, mu)?;
            let metrics = steady_state(&params)?;
            match format {
                Format::Json => print_json(&metrics),
                Format::Csv => {
                    println!("utilization,response_time,residents,queue_delay,queue_length");
                    println!(
                        "{},{},{},{},{}",
                        metrics.utilization,
                        metrics.response_time,
                        metrics.residents,
                        metrics.queue_delay,
                        metrics.queue_length
                    );
                }
            }
            Ok(())
        }
        Command::Knee {
            service_time,
            mu,
            form,
            format,
        } => {
            if format == Format::Csv {
                return Err(RunError::Usage(
                    "knee geometry is a single record; only --format json is supported".into(),
                ));
            }
            match (service_time, mu, form) {
                (Some(s), None, None | Some(FormArg::Load)) => {
                    print_json(&load_knee_geometry(s)?);
                }
                (None, Some(mu), None | Some(FormArg::Throughput)) => {
                    print_json(&throughput_knee_geometry(mu)?);
                }
                _ => {
                    return Err(RunError::Usage(
                        "--form must match the given parameter (--service-time is the load form, \
                         --mu the throughput form)"
                            .into(),
                    ))
                }
            }
            Ok(())
        }
        Command::Classify {
            service_time,
            utilization,
            mu,
            lambda,
        } => {
            let output = match (service_time, utilization, mu, lambda) {
                (Some(s), Some(u), None, None) => ClassifyOutput {
                    form: "load",
                    service_time: Some(s),
                    utilization: Some(u),
                    service_rate: None,
                    arrival_rate: None,
                    region: classify_load(s, u)?,
                },
                (None, None, Some(mu), Some(lambda)) => ClassifyOutput {
                    form: "throughput",
                    service_time: None,
                    utilization: None,
                    service_rate: Some(mu),
                    arrival_rate: Some(lambda),
                    region: classify_throughput(mu, lambda)?,
                },
                _ => {
                    return Err(RunError::Usage(
                        "use either --service-time with --utilization, or --mu with --lambda"
                            .into(),
                    ))
                }
            };
            print_json(&output);
            Ok(())
        }
        Command::Curve {
            service_time,
            mu,
            from,
            to,
            step,
            format,
        } => {
            let (form, parameter) = match (service_time, mu) {
                (Some(s), None) => (CurveForm::LoadForm, s),
                (None, Some(mu)) => (CurveForm::ThroughputForm, mu),
                _ => unreachable!("enforced by the arg group"),
            };
            let series = sample_curve(form, parameter, from, to, step)?;
            match format {
                Format::Json => print_json(&series),
                Format::Csv => print!("{}", series_to_csv(&series)),
            }
            Ok(())
        }
        Command::Simulate {
            lambda,
            mu,
            customers,
            seed,
            warmup,
            batches,
            tolerance,
        } => {
            let mut config = SimConfig::new(lambda, mu, customers, seed);
            if let Some(warmup) = warmup {
                config.warmup_fraction = warmup;
            }
            if let Some(batches) = batches {
                config.batch_count = batches;
            }
            let result = run_mm1(&config)?;
            let validation = match tolerance {
                Some(tolerance) => {
                    let params = QueueParametersF64::new(lambda, mu)?;
                    Some(validate_against_analytic(&result, &params, tolerance)?)
                }
                None => None,
            };
            print_json(&SimulateOutput { result, validation });
            Ok(())
        }
        Command::Adapt {
            trace,
            review_period,
            horizon,
            mu_min,
            mu_max,
            initial_mu,
            mode,
            seed,
            format,
        } => {
            let text = std::fs::read_to_string(&trace).map_err(|err| {
                RunError::Domain(queue_knee::Error::MalformedTrace(format!(
                    "cannot read {}: {err}",
                    trace.display()
                )))
            })?;
            let trace = LoadTrace::from_csv_str(&text)?;
            let mut config = ControllerConfig::new(
                review_period,
                mu_max,
                initial_mu,
                match mode {
                    ModeArg::Analytic => ControllerMode::Analytic,
                    ModeArg::Stochastic => ControllerMode::Stochastic,
                },
            );
            if let Some(mu_min) = mu_min {
                config.mu_min = mu_min;
            }
            config.seed = seed;
            let log = run_controller(&trace, &config, horizon)?;
            match format {
                Format::Json => print_json(&log),
                Format::Csv => {
                    print!("{}", log_to_csv(&log));
                    eprintln!("knee_residency_fraction={}", log.knee_residency_fraction);
                }
            }
            Ok(())
        }
    }
}

fn series_to_csv(series: &CurveSeries) -> String {
    let mut out = String::from("x,R,marker\n");
    for sample in &series.samples {
        let marker = sample.marker.map(|m| m.as_str()).unwrap_or("");
        out.push_str(&format!("{},{},{}\n", sample.x, sample.y, marker));
    }
    out
}

fn log_to_csv(log: &ControllerLog) -> String {
    let mut out = String::from("interval,lambda_estimate,mu_before,mu_after,region,load_region,action\n");
    for entry in &log.entries {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            entry.interval,
            entry.lambda_estimate,
            entry.mu_before,
            entry.mu_after,
            entry.region.as_str(),
            entry.load_region.as_str(),
            entry.action.as_str()
        ));
    }
    out
}
