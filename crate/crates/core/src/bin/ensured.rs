use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ensured::model::Task;
use ensured::report::{
    cmd_explain, cmd_global_map, cmd_rank_plot, cmd_region_heatmap, cmd_summary, Formats, RuleFilter, RunConfig,
};
use ensured::triage::RankingWeight;
use ensured::Error;

#[derive(Parser)]
#[command(name = "ensured", version, about = "Calibrated alternative explanations with uncertainty")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one JSON explanation per test instance.
    Explain(RunArgs),
    /// Write per-category rule counts to summary.csv.
    Summary(RunArgs),
    /// Plot probability against uncertainty for the whole test set.
    GlobalMap(RunArgs),
    /// Plot the ranked alternatives of one test instance.
    RankPlot {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        instance: u64,
    },
    /// Plot the ranking metric over the feasible region.
    RegionHeatmap {
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        weight: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Cls,
    Reg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FilterArg {
    Counter,
    Semi,
    Super,
    Ensured,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_enum)]
    task: TaskArg,
    /// Target column (default: last column).
    #[arg(long)]
    target: Option<String>,
    /// Label rows with target >= V as the positive class.
    #[arg(long, value_name = "V", allow_negative_numbers = true)]
    positive_from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    threshold: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 100)]
    cal_size: usize,
    #[arg(long, default_value_t = 100)]
    test_size: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    conjunctions: bool,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    weight: f64,
    #[arg(long, default_value_t = 10)]
    top_k: usize,
    #[arg(long, value_enum)]
    filter: Option<FilterArg>,
    #[arg(long)]
    include_potential: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value = "json,csv,svg")]
    format: String,
    /// Trees in the built-in forest.
    #[arg(long, default_value_t = 100)]
    trees: usize,
    /// Subsample the dataset to at most N rows before splitting.
    #[arg(long, value_name = "N")]
    max_rows: Option<usize>,
    /// Use precomputed `id,score` predictions instead of a forest.
    #[arg(long, value_name = "PATH")]
    scores: Option<PathBuf>,
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig, Error> {
        let mut c = RunConfig::new(self.dataset, self.out);
        c.task = match self.task {
            TaskArg::Cls => Task::Classification,
            TaskArg::Reg => Task::Regression,
        };
        c.target = self.target;
        c.positive_from = self.positive_from;
        c.threshold = self.threshold;
        c.epsilon = self.epsilon;
        c.cal_size = self.cal_size;
        c.test_size = self.test_size;
        c.seed = self.seed;
        c.conjunctions = self.conjunctions;
        c.weight = RankingWeight::new(self.weight)?;
        c.top_k = self.top_k;
        c.filter = self.filter.map(|f| match f {
            FilterArg::Counter => RuleFilter::Counter,
            FilterArg::Semi => RuleFilter::Semi,
            FilterArg::Super => RuleFilter::Super,
            FilterArg::Ensured => RuleFilter::Ensured,
        });
        c.include_potential = self.include_potential;
        c.formats = self.format.parse::<Formats>()?;
        c.trees = self.trees;
        c.max_rows = self.max_rows;
        c.scores = self.scores;
        c.validate()?;
        Ok(c)
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Explain(args) => {
            let log = cmd_explain(&args.into_config()?)?;
            eprintln!(
                "explained {} instances, {:.2} rules per instance",
                log.instances, log.mean_rules
            );
        }
        Command::Summary(args) => {
            let table = cmd_summary(&args.into_config()?)?;
            for r in &table.rows {
                eprintln!(
                    "{}: total {:.2}, potential {:.2}, ensured {:.2}",
                    r.label,
                    r.total,
                    r.potential(),
                    r.ensured
                );
            }
        }
        Command::GlobalMap(args) => {
            let report = cmd_global_map(&args.into_config()?)?;
            eprintln!("mapped {} instances", report.points.len());
        }
        Command::RankPlot { run, instance } => {
            for path in cmd_rank_plot(&run.into_config()?, instance)? {
                eprintln!("wrote {}", path.display());
            }
        }
        Command::RegionHeatmap { weight, out } => {
            let path = cmd_region_heatmap(RankingWeight::new(weight)?, &out)?;
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
