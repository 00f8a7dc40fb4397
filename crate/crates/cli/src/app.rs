//! Argument parsing and command dispatch.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use shapley_r2::simlab::{
    full_grid_sizes, run_benchmark, run_study, BenchmarkConfig, CoverageRow, Method, Study,
    StudyConfig, DESK_GRID_C, DESK_GRID_N, FULL_GRID_C,
};
use shapley_r2::{
    bootstrap_ci, confidence_intervals, mardia_kurtosis, sample_correlation, shapley_subset_form,
    BootstrapConfig, Dataset, Error as CoreError,
};

use crate::alloc::AllocationProbe;
use crate::error::{CliError, CliResult};
use crate::input::{read_table_path, NumericTable};
use crate::report::{
    benchmark_csv, benchmark_table, coverage_csv, coverage_table, AnalysisReport, CovariateRow,
    Format, Interval, PairReport,
};
use crate::yeojohnson::yeo_johnson;

#[derive(Debug, Parser)]
#[command(name = "shapley-r2", version, about = "Shapley decomposition of R² with confidence intervals")]
pub struct Cli {
    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads for simulations.
    #[arg(long, global = true, env = "SHAPLEY_R2_WORKERS")]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decompose R² for a CSV file and report intervals.
    Analyze(AnalyzeArgs),
    /// Test equality of two covariates' Shapley values.
    Pairtest(PairArgs),
    /// Run a Monte Carlo coverage study.
    Simulate(SimulateArgs),
    /// Compare asymptotic and bootstrap cost.
    Benchmark(BenchmarkArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Transform {
    None,
    YeoJohnson,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodChoice {
    Asymptotic,
    Bootstrap,
    Both,
}

impl MethodChoice {
    fn name(self) -> &'static str {
        match self {
            MethodChoice::Asymptotic => "asymptotic",
            MethodChoice::Bootstrap => "bootstrap",
            MethodChoice::Both => "both",
        }
    }
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Input CSV with a header row.
    pub input: PathBuf,
    /// Response column name or index; defaults to the first numeric column.
    #[arg(long)]
    pub response: Option<String>,
    #[arg(long, value_enum, default_value_t = Transform::None)]
    pub transform: Transform,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "table")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = MethodChoice::Asymptotic)]
    pub method: MethodChoice,
    #[arg(long, default_value_t = 1000)]
    pub bootstrap_n: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PairArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// First covariate (name or column index).
    #[arg(long)]
    pub j: String,
    /// Second covariate (name or column index).
    #[arg(long)]
    pub k: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub study: Study,
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Equicorrelations; defaults to the desk grid.
    #[arg(long, value_delimiter = ',')]
    pub c: Vec<f64>,
    /// Sample sizes; defaults to the desk grid.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    pub replicates: usize,
    #[arg(long, default_value_t = 1000)]
    pub bootstrap_n: usize,
    #[arg(long, default_value_t = 100.0)]
    pub nu: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_delimiter = ',', default_value = "asymptotic,bootstrap")]
    pub methods: Vec<Method>,
    /// Use the full 30 × 7 grid of sample sizes and correlations.
    #[arg(long, conflicts_with_all = ["c", "n"])]
    pub full_grid: bool,
    /// CSV output path; a JSON copy is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[arg(long, value_delimiter = ',', default_value = "1000,5000,10000")]
    pub n_grid: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    #[arg(long, default_value_t = 0.3)]
    pub c: f64,
    #[arg(long, default_value_t = 1000)]
    pub bootstrap_n: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Loaded analysis data after column selection and optional transform.
pub struct Prepared {
    pub table: NumericTable,
    pub response: String,
    pub covariates: Vec<String>,
    pub dataset: Dataset,
    pub lambdas: Option<Vec<(String, f64)>>,
}

pub fn prepare(args: &DataArgs) -> CliResult<Prepared> {
    let table = read_table_path(&args.input)?;
    if table.names.len() < 2 {
        return Err(CliError::Data(format!(
            "need a response and at least one numeric covariate, found {} numeric column(s)",
            table.names.len()
        )));
    }
    let r = match &args.response {
        Some(key) => table.position(key)?,
        None => 0,
    };
    if table.rejected_rows > 0 {
        log::warn!("rejected {} row(s) with missing or non-numeric cells", table.rejected_rows);
    }
    let order: Vec<usize> = std::iter::once(r)
        .chain((0..table.names.len()).filter(|&i| i != r))
        .collect();
    let (columns, lambdas) = match args.transform {
        Transform::None => (order.iter().map(|&i| table.columns[i].clone()).collect(), None),
        Transform::YeoJohnson => {
            let fits: Vec<_> = order.iter().map(|&i| yeo_johnson(&table.columns[i])).collect();
            let lambdas = order
                .iter()
                .zip(&fits)
                .map(|(&i, f)| (table.names[i].clone(), f.lambda))
                .collect();
            (fits.into_iter().map(|f| f.values).collect::<Vec<_>>(), Some(lambdas))
        }
    };
    let dataset = Dataset::from_columns(&columns[0], &columns[1..]).map_err(|e| match e {
        CoreError::ZeroVariance { column } => {
            CliError::Data(format!("column '{}' has zero variance", table.names[order[column]]))
        }
        e => e.into(),
    })?;
    Ok(Prepared {
        response: table.names[r].clone(),
        covariates: order[1..].iter().map(|&i| table.names[i].clone()).collect(),
        table,
        dataset,
        lambdas,
    })
}

fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn analyze(args: &AnalyzeArgs, seed: u64) -> CliResult<AnalysisReport> {
    let prep = prepare(&args.data)?;
    let data = &prep.dataset;
    let want_asy = matches!(args.method, MethodChoice::Asymptotic | MethodChoice::Both);
    let want_boot = matches!(args.method, MethodChoice::Bootstrap | MethodChoice::Both);
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(CliError::Usage(format!("alpha must lie in (0, 1), got {}", args.alpha)));
    }

    let (shapley, asy, kappa) = if want_asy {
        let inf = confidence_intervals(data, args.alpha)?;
        let se = inf.standard_errors();
        let kappa = inf.covariance.kappa_used;
        (inf.shapley.clone(), Some((inf.intervals, se)), Some(kappa))
    } else {
        let model = sample_correlation(data)?;
        let kappa = mardia_kurtosis(data).ok().map(|k| k.kappa);
        (shapley_subset_form(&model)?, None, kappa)
    };
    let boot = if want_boot {
        let cfg = BootstrapConfig {
            n_resamples: args.bootstrap_n,
            alpha: args.alpha,
            seed,
        };
        Some(bootstrap_ci(data, &cfg)?.intervals)
    } else {
        None
    };

    let shares = shapley.shares();
    let covariates = prep
        .covariates
        .iter()
        .enumerate()
        .map(|(j, name)| CovariateRow {
            name: name.clone(),
            value: shapley.values[j],
            share: shares[j],
            asymptotic: asy.as_ref().map(|(ci, _)| Interval::from(ci[j])),
            std_error: asy.as_ref().map(|(_, se)| se[j]),
            bootstrap: boot.as_ref().map(|ci| Interval::from(ci[j])),
        })
        .collect();
    Ok(AnalysisReport {
        input: args.data.input.display().to_string(),
        response: prep.response,
        n: data.n(),
        d: data.d(),
        rejected_rows: prep.table.rejected_rows,
        ignored_columns: prep.table.ignored_columns,
        transform: match args.data.transform {
            Transform::None => "none".into(),
            Transform::YeoJohnson => "yeo-johnson".into(),
        },
        lambdas: prep.lambdas,
        alpha: args.alpha,
        method: args.method.name().into(),
        r_squared: shapley.r_squared,
        kappa,
        bootstrap_n: want_boot.then_some(args.bootstrap_n),
        seed,
        covariates,
    })
}

pub fn pairtest(args: &PairArgs) -> CliResult<PairReport> {
    let prep = prepare(&args.data)?;
    let locate = |key: &str| -> CliResult<usize> {
        let pos = prep.table.position(key)?;
        let name = &prep.table.names[pos];
        prep.covariates
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| CliError::Usage(format!("'{key}' is the response, not a covariate")))
    };
    let (j, k) = (locate(&args.j)?, locate(&args.k)?);
    if j == k {
        return Err(CliError::Usage(format!(
            "--j and --k name the same covariate '{}'",
            prep.covariates[j]
        )));
    }
    let inf = confidence_intervals(&prep.dataset, 0.05)?;
    let test = inf.difference_test(j, k)?;
    let n = prep.dataset.n();
    Ok(PairReport {
        input: args.data.input.display().to_string(),
        j: prep.covariates[j].clone(),
        k: prep.covariates[k].clone(),
        n,
        value_j: inf.shapley.values[j],
        value_k: inf.shapley.values[k],
        delta: (n as f64).sqrt() * (inf.shapley.values[j] - inf.shapley.values[k]),
        statistic: test.statistic,
        p_value: test.p_value,
        degenerate: test.degenerate,
        avar_j: test.avar_j,
        avar_k: test.avar_k,
        acov_jk: test.acov_jk,
        kappa: inf.covariance.kappa_used,
    })
}

/// Result of a grid of study cells; aborted cells are listed separately.
pub struct SimulationOutput {
    pub rows: Vec<CoverageRow>,
    pub aborted: Vec<String>,
}

pub fn simulate(args: &SimulateArgs, seed: u64, workers: Option<usize>) -> CliResult<SimulationOutput> {
    let (cs, ns): (Vec<f64>, Vec<usize>) = if args.full_grid {
        (FULL_GRID_C.to_vec(), full_grid_sizes())
    } else {
        (
            if args.c.is_empty() { DESK_GRID_C.to_vec() } else { args.c.clone() },
            if args.n.is_empty() { DESK_GRID_N.to_vec() } else { args.n.clone() },
        )
    };
    let mut rows = Vec::new();
    let mut aborted = Vec::new();
    for &c in &cs {
        for &n in &ns {
            let cfg = StudyConfig {
                study: args.study,
                d: args.d,
                c,
                n,
                n_replicates: args.replicates,
                n_bootstrap: args.bootstrap_n,
                alpha: args.alpha,
                nu: args.nu,
                seed,
                methods: args.methods.clone(),
                workers,
            };
            cfg.validate()?;
            match run_study(&cfg) {
                Ok(res) => rows.extend(res.rows()),
                Err(e) if e.is_numerical() => {
                    log::warn!("cell c={c} n={n} aborted: {e}");
                    aborted.push(format!("c={c} n={n}: {e}"));
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(SimulationOutput { rows, aborted })
}

fn write_simulation(out: &Path, rows: &[CoverageRow]) -> CliResult<()> {
    let (csv_path, json_path) = if out.extension().is_some_and(|e| e == "json") {
        (out.with_extension("csv"), out.to_path_buf())
    } else {
        (out.to_path_buf(), out.with_extension("json"))
    };
    emit(&coverage_csv(rows)?, Some(&csv_path))?;
    emit(&(serde_json::to_string_pretty(rows)? + "\n"), Some(&json_path))
}

pub fn benchmark(args: &BenchmarkArgs, seed: u64) -> CliResult<Vec<shapley_r2::simlab::BenchmarkRow>> {
    let cfg = BenchmarkConfig {
        n_grid: args.n_grid.clone(),
        d: args.d,
        c: args.c,
        n_bootstrap: args.bootstrap_n,
        alpha: args.alpha,
        reps: args.reps,
        seed,
    };
    Ok(run_benchmark(&cfg, &AllocationProbe)?.rows)
}

/// Runs a parsed command line, printing results.
pub fn run(cli: Cli) -> CliResult<()> {
    if cli.workers == Some(0) {
        return Err(CliError::Usage("--workers must be positive".into()));
    }
    match &cli.command {
        Command::Analyze(args) => {
            let report = analyze(args, cli.seed)?;
            emit(&report.render(args.output.format)?, args.output.out.as_deref())
        }
        Command::Pairtest(args) => {
            let report = pairtest(args)?;
            emit(&report.render(args.output.format)?, args.output.out.as_deref())
        }
        Command::Simulate(args) => {
            let output = simulate(args, cli.seed, cli.workers)?;
            if let Some(out) = &args.out {
                write_simulation(out, &output.rows)?;
            }
            if !output.rows.is_empty() {
                print!("{}", coverage_table(&output.rows));
            }
            if output.aborted.is_empty() {
                Ok(())
            } else {
                Err(CliError::Numerical(format!(
                    "{} cell(s) aborted: {}",
                    output.aborted.len(),
                    output.aborted.join("; ")
                )))
            }
        }
        Command::Benchmark(args) => {
            let rows = benchmark(args, cli.seed)?;
            let text = match args.output.format {
                Format::Table => benchmark_table(&rows),
                Format::Csv => benchmark_csv(&rows)?,
                Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
            };
            emit(&text, args.output.out.as_deref())
        }
    }
}
