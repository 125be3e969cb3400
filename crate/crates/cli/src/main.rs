use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tkg_core::commands::{cmd_agreement, cmd_analyze, cmd_build, cmd_decay, cmd_null, RunConfig};
use tkg_core::dynamics::CountMode;
use tkg_core::error::TkgError;
use tkg_core::temporal::CommonSet;

#[derive(Parser)]
#[command(name = "tkg", version, about = "Temporal tripartite knowledge-graph analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-period edge lists, triangle tables and connectivity.
    Build(RunArgs),
    /// Counts, centrality, capacitance, dispersion and tau series.
    Analyze(RunArgs),
    /// Random-label null model with sequential stopping.
    Null(RunArgs),
    /// Time-decayed appearance weights.
    Decay(RunArgs),
    /// Cohen's kappa between two annotators.
    Agreement(AgreementArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DecayModeArg {
    Binary,
    Counts,
}

#[derive(Clone, Copy, ValueEnum)]
enum CommonSetArg {
    Intersection,
    Union,
}

#[derive(Args)]
struct RunArgs {
    /// TOML file with defaults; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    taxonomy: Option<PathBuf>,
    #[arg(long)]
    periods: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    bootstrap_n: Option<usize>,
    #[arg(long)]
    null_max_samples: Option<usize>,
    #[arg(long)]
    null_ci_threshold: Option<f64>,
    #[arg(long)]
    null_min_samples: Option<usize>,
    #[arg(long)]
    decay_lambda: Option<f64>,
    #[arg(long, value_enum)]
    decay_mode: Option<DecayModeArg>,
    #[arg(long, value_enum)]
    tau_common_set: Option<CommonSetArg>,
    /// List taxonomy codes absent from a period as explicit zeros.
    #[arg(long)]
    include_zero_nodes: bool,
}

#[derive(Args)]
struct AgreementArgs {
    /// Labels from the first annotator: paper_id,measure,data_type,rq_type.
    #[arg(long)]
    rater_a: PathBuf,
    #[arg(long)]
    rater_b: PathBuf,
    #[arg(long)]
    taxonomy: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig, TkgError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_toml_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(p) = self.corpus {
            c.corpus_path = p;
        }
        if let Some(p) = self.taxonomy {
            c.taxonomy_path = Some(p);
        }
        if let Some(p) = self.periods {
            c.periods_path = Some(p);
        }
        if let Some(p) = self.out {
            c.output_dir = p;
        }
        c.seed = self.seed.unwrap_or(c.seed);
        c.bootstrap_n = self.bootstrap_n.unwrap_or(c.bootstrap_n);
        c.null_max_samples = self.null_max_samples.unwrap_or(c.null_max_samples);
        c.null_ci_threshold = self.null_ci_threshold.unwrap_or(c.null_ci_threshold);
        c.null_min_samples = self.null_min_samples.unwrap_or(c.null_min_samples);
        c.decay_lambda = self.decay_lambda.unwrap_or(c.decay_lambda);
        if let Some(m) = self.decay_mode {
            c.decay_mode = match m {
                DecayModeArg::Binary => CountMode::Binary,
                DecayModeArg::Counts => CountMode::PaperCounts,
            };
        }
        if let Some(m) = self.tau_common_set {
            c.tau_common_set = match m {
                CommonSetArg::Intersection => CommonSet::Intersection,
                CommonSetArg::Union => CommonSet::Union,
            };
        }
        c.include_zero_nodes |= self.include_zero_nodes;
        Ok(c)
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("TKG_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("TKG_THREADS must be a positive integer, got `{value}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<(), TkgError> {
    match cli.command {
        Command::Build(args) => {
            let summary = cmd_build(&args.into_config()?)?;
            for line in summary.lines() {
                println!("{line}");
            }
            for label in &summary.skipped {
                eprintln!("warning: {label} has no papers; skipped");
            }
        }
        Command::Analyze(args) => {
            let summary = cmd_analyze(&args.into_config()?)?;
            println!("periods analyzed: {}", summary.periods_analyzed);
            for label in &summary.periods_skipped {
                eprintln!("warning: {label} has no papers; skipped");
            }
            if !summary.tau_sensitive.is_empty() {
                println!(
                    "{} tau comparisons depend on the common-set rule (see tau_sensitivity.csv)",
                    summary.tau_sensitive.len()
                );
            }
        }
        Command::Null(args) => {
            let summary = cmd_null(&args.into_config()?)?;
            println!("null samples: {} (stopped: {})", summary.n_samples, summary.stop_reason.name());
        }
        Command::Decay(args) => {
            let summary = cmd_decay(&args.into_config()?)?;
            println!(
                "decay series: {}, half-life checks: {}",
                summary.series, summary.half_life_rows
            );
        }
        Command::Agreement(args) => {
            let taxonomy = match &args.taxonomy {
                Some(p) => tkg_core::taxonomy::Taxonomy::from_json_file(p)?,
                None => Default::default(),
            };
            for (partition, kappa) in cmd_agreement(&args.rater_a, &args.rater_b, &taxonomy, &args.out)? {
                println!("{}: kappa = {kappa:.4}", partition.name());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            // Unreadable inputs and bad arguments are usage errors.
            match e {
                TkgError::Io { .. } | TkgError::InvalidArgument(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
