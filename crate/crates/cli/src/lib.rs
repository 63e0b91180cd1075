//! Experiment harness behind the `abc-rates` binary: configuration, dispatch
//! to the analysis routines, and CSV/markdown output.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use abc_rates_core::AbcError;

pub use config::{Experiment, ExperimentConfig, TestFunction, Tolerance, Violation};
pub use report::{ResultTable, Table};

/// Failure of a CLI run, mapped to an exit status and a stderr line.
#[derive(Debug)]
pub enum CliError {
    Config(Vec<Violation>),
    Parse(String),
    Run(AbcError),
    Io(PathBuf, std::io::Error),
}

impl CliError {
    /// 2 for configuration problems, 1 for failures during the run.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Parse(_) => 2,
            CliError::Run(_) | CliError::Io(..) => 1,
        }
    }

    /// `error: <code>: <detail>` on one line.
    pub fn message(&self) -> String {
        match self {
            CliError::Config(vs) => {
                let detail: Vec<String> = vs.iter().map(Violation::to_string).collect();
                format!("error: invalid-config: {}", detail.join("; "))
            }
            CliError::Parse(detail) => format!("error: invalid-config: {detail}"),
            CliError::Run(e) => format!("error: {}: {e}", e.code()),
            CliError::Io(path, e) => format!("error: io: {}: {e}", path.display()),
        }
    }
}

impl From<AbcError> for CliError {
    fn from(e: AbcError) -> Self {
        CliError::Run(e)
    }
}

/// Reads a JSON configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    ExperimentConfig::from_json(&text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

/// Validates, then runs on a pool of `cfg.threads` workers (the global pool
/// when unset).
pub fn execute(cfg: &ExperimentConfig) -> Result<ResultTable, CliError> {
    let violations = cfg.validate();
    if !violations.is_empty() {
        return Err(CliError::Config(violations));
    }
    match cfg.threads {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| CliError::Run(AbcError::InvalidArgument(e.to_string())))?;
            Ok(pool.install(|| experiments::run(cfg))?)
        }
        None => Ok(experiments::run(cfg)?),
    }
}

/// Writes `<out>/<table>.csv` for each table, `<out>/<experiment>.md` and
/// `<out>/config.echo.json`. Returns the paths written.
pub fn write_outputs(
    cfg: &ExperimentConfig,
    result: &ResultTable,
    wall_clock_s: f64,
) -> Result<Vec<PathBuf>, CliError> {
    let dir = &cfg.output_path;
    let io = |path: &Path, e| CliError::Io(path.to_path_buf(), e);
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;

    let echo = serde_json::to_string_pretty(cfg).expect("config serialises");
    let name = cfg.experiment.map_or("experiment", Experiment::name);
    let mut written = Vec::new();
    for table in &result.tables {
        let path = dir.join(format!("{}.csv", table.name));
        fs::write(&path, table.to_csv()).map_err(|e| io(&path, e))?;
        written.push(path);
    }
    let md = dir.join(format!("{name}.md"));
    fs::write(
        &md,
        report::render_markdown(name, result, &echo, wall_clock_s),
    )
    .map_err(|e| io(&md, e))?;
    written.push(md);
    let echo_path = dir.join("config.echo.json");
    fs::write(&echo_path, echo + "\n").map_err(|e| io(&echo_path, e))?;
    written.push(echo_path);
    Ok(written)
}

/// Validate, run and write outputs; the whole non-dry-run path of the binary.
pub fn run_and_write(cfg: &ExperimentConfig) -> Result<(ResultTable, Vec<PathBuf>), CliError> {
    let start = Instant::now();
    let result = execute(cfg)?;
    let paths = write_outputs(cfg, &result, start.elapsed().as_secs_f64())?;
    Ok((result, paths))
}
