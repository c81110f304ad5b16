//! Command-line front end: `combine`, `fuse`, `bench` and `oracle-check`.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::bench::{self, BenchConfig};
use crate::check::{self, CheckConfig};
use crate::dichotomous::{self, DichotomousMass};
use crate::error::Error;
use crate::formats::{self, Evidence, FormatError};
use crate::fusion::{self, FusionConfig, Method};
use crate::mass;
use crate::triplet::{self, TripletMass};

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_NON_COMBINABLE: i32 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Self::new(EXIT_USAGE, message)
    }

    fn input(message: impl Into<String>) -> Self {
        Self::new(EXIT_INPUT, message)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::input(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "ds-triplet",
    version,
    about = "Dempster-Shafer evidence combination"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Combine the evidence in a JSON file.
    Combine {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = CombineMethod::Auto)]
        method: CombineMethod,
        /// Constant added by the approximate many-triplet formula.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Fuse classifier scores into per-item decisions.
    Fuse {
        scores: PathBuf,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FuseMethod::Triplet)]
        method: FuseMethod,
        #[arg(long, default_value_t = 0.1)]
        ignorance_floor: f64,
        #[arg(long, default_value_t = 16)]
        oracle_cap: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Time a combination method over a range of workload sizes.
    Bench {
        #[arg(long, value_enum, default_value_t = FuseMethod::Triplet)]
        method: FuseMethod,
        /// Sizes as `start..end:step`, a comma list, or a single value.
        #[arg(long, default_value = "100..1000:100")]
        n: String,
        #[arg(long, default_value_t = 20)]
        frame_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long, default_value_t = 3)]
        warmup: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check every fast path against the general rule on random instances.
    OracleCheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        cases: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CombineMethod {
    /// Fast path matching the evidence kind.
    Auto,
    Triplet,
    Dichotomous,
    Oracle,
    /// Approximate formula for triplets sharing their first focus.
    Approx,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FuseMethod {
    Triplet,
    Dichotomous,
    Oracle,
}

impl From<FuseMethod> for Method {
    fn from(m: FuseMethod) -> Self {
        match m {
            FuseMethod::Triplet => Method::Triplet,
            FuseMethod::Dichotomous => Method::Dichotomous,
            FuseMethod::Oracle => Method::Oracle,
        }
    }
}

/// Parses arguments and runs one command, returning what goes to stdout.
pub fn run<I, T>(args: I) -> Result<String, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| {
        let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
        CliError::new(code, e.render().to_string())
    })?;
    match cli.command {
        Command::Combine {
            input,
            method,
            lambda,
            output,
        } => {
            let text = read(&input)?;
            let out = combine_text(&text, &input.display().to_string(), method, lambda)?;
            emit(out, output.as_deref())
        }
        Command::Fuse {
            scores,
            labels,
            method,
            ignorance_floor,
            oracle_cap,
            output,
        } => {
            let config = FusionConfig {
                ignorance_floor,
                oracle_cap,
            };
            let out = fuse_files(&scores, labels.as_deref(), method.into(), &config)?;
            emit(out, output.as_deref())
        }
        Command::Bench {
            method,
            n,
            frame_size,
            seed,
            reps,
            warmup,
            output,
        } => {
            let config = BenchConfig {
                method: method.into(),
                sizes: parse_sizes(&n)?,
                frame_size,
                seed,
                repetitions: reps,
                warmup,
                ..BenchConfig::default()
            };
            let records = bench::run_bench(&config).map_err(|e| CliError::usage(e.to_string()))?;
            emit(formats::write_bench_csv(&records), output.as_deref())
        }
        Command::OracleCheck { seed, cases } => {
            let results = check::run_oracle_checks(&CheckConfig {
                seed,
                cases,
                ..CheckConfig::default()
            });
            let mut out = String::new();
            for r in &results {
                out.push_str(&format!(
                    "{} {}: {} cases, max deviation {:.3e}, {} failures\n",
                    if r.passed() { "PASS" } else { "FAIL" },
                    r.name,
                    r.cases,
                    r.max_deviation,
                    r.failures
                ));
            }
            if results.iter().all(check::CheckResult::passed) {
                Ok(out)
            } else {
                Err(CliError::new(EXIT_FAILURE, out))
            }
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn emit(text: String, output: Option<&Path>) -> Result<String, CliError> {
    match output {
        Some(path) => {
            fs::write(path, &text)
                .map_err(|e| CliError::new(EXIT_FAILURE, format!("{}: {e}", path.display())))?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

/// `100..1000:100` (inclusive), `100,200,400` or `500`.
fn parse_sizes(arg: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::usage(format!("invalid --n range {arg:?}"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let sizes = if let Some((range, step)) = arg.split_once(':') {
        let (start, end) = range.split_once("..").ok_or_else(bad)?;
        let (start, end, step) = (num(start)?, num(end)?, num(step)?);
        if step == 0 || start > end {
            return Err(bad());
        }
        (start..=end).step_by(step).collect()
    } else {
        arg.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(bad());
    }
    Ok(sizes)
}

fn combine_failure(e: Error, origin: &str) -> CliError {
    match e {
        Error::StepFailed { step, source } if source.is_non_combinable() => {
            let partner = if step == 1 {
                "evidence 0".to_string()
            } else {
                format!("the combination of evidence 0..={}", step - 1)
            };
            CliError::new(
                EXIT_NON_COMBINABLE,
                format!("{origin}: evidence {step} and {partner} are not combinable: {source}"),
            )
        }
        e if e.is_non_combinable() => CliError::new(EXIT_NON_COMBINABLE, format!("{origin}: {e}")),
        Error::ApproximationBreakdown(_) => CliError::new(EXIT_FAILURE, format!("{origin}: {e}")),
        e => CliError::input(format!("{origin}: {e}")),
    }
}

fn combine_text(
    text: &str,
    origin: &str,
    method: CombineMethod,
    lambda: f64,
) -> Result<String, CliError> {
    let items = formats::parse_evidence(text, origin)?;
    let first = items
        .first()
        .ok_or_else(|| CliError::input(format!("{origin}: no evidence")))?;
    for (i, e) in items.iter().enumerate().skip(1) {
        if e.kind() != first.kind() {
            return Err(CliError::input(format!(
                "{origin}: evidence {i} is {} but evidence 0 is {}",
                e.kind(),
                first.kind()
            )));
        }
        if e.frame() != first.frame() {
            return Err(CliError::input(format!(
                "{origin}: evidence {i} uses a different frame from evidence 0"
            )));
        }
    }
    let fail = |e: Error| combine_failure(e, origin);

    let method = match (method, first.kind()) {
        (CombineMethod::Auto, "triplet") => CombineMethod::Triplet,
        (CombineMethod::Auto, "dichotomous") => CombineMethod::Dichotomous,
        (CombineMethod::Auto, _) => CombineMethod::Oracle,
        (m @ (CombineMethod::Triplet | CombineMethod::Approx), "triplet") => m,
        (CombineMethod::Dichotomous, "dichotomous") => CombineMethod::Dichotomous,
        (CombineMethod::Oracle, _) => CombineMethod::Oracle,
        (m, kind) => {
            return Err(CliError::usage(format!(
                "method {} does not apply to {kind} evidence",
                m.to_possible_value()
                    .map(|v| v.get_name().to_string())
                    .unwrap_or_default()
            )))
        }
    };

    let (name, result, trail) = match method {
        CombineMethod::Triplet => {
            let ts: Vec<TripletMass> = items
                .iter()
                .filter_map(|e| match e {
                    Evidence::Triplet(t) => Some(t.clone()),
                    _ => None,
                })
                .collect();
            let (t, trail) = triplet::fold_combine_traced(&ts).map_err(fail)?;
            ("triplet", Evidence::Triplet(t), trail)
        }
        CombineMethod::Approx => {
            let ts: Vec<TripletMass> = items
                .iter()
                .filter_map(|e| match e {
                    Evidence::Triplet(t) => Some(t.clone()),
                    _ => None,
                })
                .collect();
            if ts.len() == 1 {
                ("approx", Evidence::Triplet(ts[0].clone()), Vec::new())
            } else {
                let (t, terms) = triplet::approx_combine_detailed(&ts, lambda).map_err(fail)?;
                ("approx", Evidence::Triplet(t), vec![terms.k_inv])
            }
        }
        CombineMethod::Dichotomous => {
            let ds: Vec<DichotomousMass> = items
                .iter()
                .filter_map(|e| match e {
                    Evidence::Dichotomous(d) => Some(d.clone()),
                    _ => None,
                })
                .collect();
            if ds.len() == 1 {
                (
                    "dichotomous",
                    Evidence::Dichotomous(ds[0].clone()),
                    Vec::new(),
                )
            } else if ds.iter().all(|d| d.focus() == ds[0].focus()) {
                let (d, k_inv) = dichotomous::combine_repeated_traced(&ds).map_err(fail)?;
                ("dichotomous", Evidence::Dichotomous(d), vec![k_inv])
            } else {
                let m = dichotomous::combine_pooled(&ds).map_err(fail)?;
                ("dichotomous", Evidence::General(m), Vec::new())
            }
        }
        _ => {
            let ms: Vec<_> = items.iter().map(Evidence::to_general).collect();
            let (m, trail) = mass::combine_all_traced(&ms).map_err(fail)?;
            ("oracle", Evidence::General(m), trail)
        }
    };
    Ok(formats::combine_output(name, &result, &trail))
}

fn fuse_files(
    scores: &Path,
    labels: Option<&Path>,
    method: Method,
    config: &FusionConfig,
) -> Result<String, CliError> {
    let origin = scores.display().to_string();
    let matrix = formats::parse_scores_csv(&read(scores)?, &origin)?;
    let report = match labels {
        Some(path) => {
            let labels = formats::parse_labels_csv(
                &read(path)?,
                matrix.categories(),
                &path.display().to_string(),
            )?;
            fusion::evaluate(&matrix, &labels, method, config)
        }
        None => fusion::fuse_matrix(&matrix, method, config),
    }
    .map_err(|e| match e {
        Error::OracleCap { .. } | Error::InvalidParameter(_) => CliError::usage(e.to_string()),
        e => CliError::input(format!("{origin}: {e}")),
    })?;
    Ok(formats::report_to_json(&report))
}
