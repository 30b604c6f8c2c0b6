use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sfpate::data::{self, SynthParams};
use sfpate_cli::config::SynthSource;
use sfpate_cli::{summary, sweep, theory_suite, CliError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "sfpate", version, about = "Fair classifiers with private group attributes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (method, epsilon, seed) cell and write one CSV row per run.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        common: Overrides,
    },
    /// Run the bound-verification trials and write JSON lines.
    Theory {
        config: PathBuf,
        #[command(flatten)]
        common: Overrides,
    },
    /// Aggregate a sweep CSV per method and epsilon.
    Summarize {
        csv: PathBuf,
        /// Where to write the summary CSV [default: <csv stem>.summary.csv].
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write a synthetic dataset as CSV.
    Synth(SynthArgs),
}

#[derive(Args)]
struct Overrides {
    /// Output path.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Concurrent workers (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Comma-separated method list.
    #[arg(long)]
    methods: Option<String>,
    /// Comma-separated epsilon grid.
    #[arg(long)]
    epsilons: Option<String>,
    /// Comma-separated seed list.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    teachers: Option<usize>,
    #[arg(long)]
    pool_size: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Fairness notion: dp, eo, ap or gdp:<H>.
    #[arg(long)]
    notion: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Set any config field, e.g. `--set train.epochs=50`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Overrides {
    fn to_assignments(&self) -> Vec<String> {
        let quoted_list = |s: &str| {
            let items: Vec<String> = s.split(',').map(|x| format!("\"{}\"", x.trim())).collect();
            format!("[{}]", items.join(","))
        };
        let mut out = Vec::new();
        if let Some(p) = &self.output {
            out.push(format!("output=\"{}\"", p.display()));
        }
        if let Some(w) = self.workers {
            out.push(format!("workers={w}"));
        }
        if let Some(m) = &self.methods {
            out.push(format!("methods={}", quoted_list(m)));
        }
        if let Some(e) = &self.epsilons {
            out.push(format!("epsilons=[{e}]"));
        }
        if let Some(s) = &self.seeds {
            out.push(format!("seeds=[{s}]"));
        }
        if let Some(k) = self.teachers {
            out.push(format!("teachers={k}"));
        }
        if let Some(s) = self.pool_size {
            out.push(format!("pool_size={s}"));
        }
        if let Some(l) = self.lambda {
            out.push(format!("lambda={l:?}"));
        }
        if let Some(d) = self.delta {
            out.push(format!("delta={d:?}"));
        }
        if let Some(n) = &self.notion {
            out.push(format!("fairness.notion=\"{n}\""));
        }
        if let Some(a) = self.alpha {
            out.push(format!("fairness.alpha={a:?}"));
        }
        out.extend(self.set.iter().cloned());
        out
    }

    fn load(&self, path: &Path) -> Result<ExperimentConfig, CliError> {
        ExperimentConfig::load(path, &self.to_assignments())
    }
}

#[derive(Args)]
struct SynthArgs {
    /// Optional TOML file with synthetic parameters; flags override it.
    params: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    gap: Option<f64>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination.
    #[arg(long)]
    output: PathBuf,
    /// Also write the matching column schema as TOML.
    #[arg(long)]
    schema: Option<PathBuf>,
}

fn synth(args: &SynthArgs) -> Result<(), CliError> {
    let mut source: SynthSource = match &args.params {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| CliError::Read {
                path: p.clone(),
                source,
            })?;
            toml::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?
        }
        None => SynthSource::default(),
    };
    source.n = args.n.unwrap_or(source.n);
    source.d = args.d.unwrap_or(source.d);
    source.m = args.m.unwrap_or(source.m);
    source.gap = args.gap.unwrap_or(source.gap);
    source.noise = args.noise.unwrap_or(source.noise);
    let params: SynthParams = source.params(args.seed.or(source.seed).unwrap_or(0));
    let dataset = data::synth_biased(&params).map_err(|e| CliError::Config(e.to_string()))?;
    data::write_csv(&dataset, &args.output)?;
    if let Some(path) = &args.schema {
        let schema = data::integer_coded_schema(dataset.dim(), dataset.group_count(), dataset.label_count());
        let text = toml::to_string(&schema).map_err(|e| CliError::Config(e.to_string()))?;
        std::fs::write(path, text)?;
    }
    eprintln!("wrote {} rows to {}", dataset.len(), args.output.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sweep { config, common } => {
            let config = common.load(&config)?;
            let outcome = sweep::run_sweep(&config)?;
            eprintln!("wrote {} rows to {}", outcome.reports.len(), outcome.path.display());
        }
        Command::Theory { config, common } => {
            let explicit_output = common.output.is_some();
            let config = common.load(&config)?;
            let outcome = theory_suite::run_theory(&config)?;
            let lines = outcome.json_lines();
            if explicit_output {
                std::fs::write(&config.output, &lines)?;
            } else {
                print!("{lines}");
            }
            for s in &outcome.summaries {
                eprintln!("{:?}: {}/{} trials hold", s.summary, s.holds, s.trials);
            }
        }
        Command::Summarize { csv, output } => {
            let (rows, path) = summary::summarize(&csv, output.as_deref())?;
            print!("{}", summary::render_table(&rows));
            eprintln!("wrote {}", path.display());
        }
        Command::Synth(args) => synth(&args)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
