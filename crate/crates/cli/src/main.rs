use std::path::PathBuf;
use std::process::ExitCode;

use abc_rates_cli::config::CostModelConfig;
use abc_rates_cli::{
    experiments, load_config, run_and_write, CliError, Experiment, ExperimentConfig,
};
use abc_rates_cli::{TestFunction, Tolerance};
use clap::Parser;

/// Rejection ABC experiments on the Gaussian toy model.
#[derive(Debug, Parser)]
#[command(name = "abc-rates", version)]
struct Cli {
    experiment: Experiment,

    /// JSON configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = "ABC_RATES_THREADS")]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Validate and print the planned grid without sampling.
    #[arg(long)]
    dry_run: bool,

    #[arg(long)]
    model: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    s_star: Option<Vec<f64>>,
    /// `one` or `lo,hi`.
    #[arg(long, allow_hyphen_values = true)]
    h: Option<TestFunction>,
    #[arg(long, value_delimiter = ',')]
    deltas: Option<Vec<Tolerance>>,
    /// Single tolerance; `inf` accepts everything.
    #[arg(long)]
    delta: Option<Tolerance>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    n_targets: Option<Vec<u64>>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    n_hat: Option<u64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    cost_grid: Option<Vec<f64>>,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    grid_span: Option<f64>,
    #[arg(long)]
    center: Option<f64>,
    #[arg(long)]
    weighted: bool,
    #[arg(long, allow_hyphen_values = true)]
    fallback_c: Option<f64>,
    #[arg(long)]
    q: Option<u32>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    cost_a: Option<f64>,
    #[arg(long)]
    cost_b: Option<f64>,
}

impl Cli {
    fn into_config(self) -> Result<(ExperimentConfig, bool), CliError> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path)?,
            None => ExperimentConfig::default(),
        };
        cfg.experiment = Some(self.experiment);
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$field = Some(v); })*
            };
        }
        set!(
            deltas, delta, n, n_targets, k, n_hat, kappa, cost_grid, center, fallback_c, q, alpha,
            beta, threads
        );
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = self.out {
            cfg.output_path = out;
        }
        if let Some(model) = self.model {
            cfg.model = model;
        }
        if let Some(s) = self.s_star {
            cfg.s_star = s;
        }
        if let Some(h) = self.h {
            cfg.h = h;
        }
        if let Some(p) = self.grid_points {
            cfg.grid_points = p;
        }
        if let Some(s) = self.grid_span {
            cfg.grid_span = s;
        }
        if self.weighted {
            cfg.weighted = true;
        }
        let CostModelConfig { a, b } = cfg.cost_model;
        cfg.cost_model = CostModelConfig {
            a: self.cost_a.unwrap_or(a),
            b: self.cost_b.unwrap_or(b),
        };
        Ok((cfg, self.dry_run))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn real_main() -> Result<(), CliError> {
    let (cfg, dry_run) = Cli::parse().into_config()?;
    if dry_run {
        let violations = cfg.validate();
        if !violations.is_empty() {
            return Err(CliError::Config(violations));
        }
        for line in experiments::plan(&cfg) {
            println!("{line}");
        }
        return Ok(());
    }
    let (result, paths) = run_and_write(&cfg)?;
    for line in &result.stdout {
        println!("{line}");
    }
    for path in paths {
        log::info!("wrote {}", path.display());
    }
    Ok(())
}
