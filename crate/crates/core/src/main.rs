use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use comptree::io::{self, FitReport};
use comptree::selection::{self, Criterion, TuningConfig, COMPOSITION_TOL};
use comptree::sim::{self, Method, ScenarioSpec};
use comptree::{build_d, CompositionalTree, Error, Result};

#[derive(Parser)]
#[command(name = "comptree", version, about = "Regularized regression on compositional trees")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a data file against a tree.
    Validate {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = COMPOSITION_TOL)]
        tol: f64,
    },
    /// Fit the model and select tuning parameters.
    Fit(FitArgs),
    /// Run a simulation study.
    Simulate(SimArgs),
    /// Write the penalty matrix in MatrixMarket format.
    PenaltyDump {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Grid {
    /// Comma-separated eta values.
    #[arg(long, value_delimiter = ',')]
    eta_grid: Option<Vec<f64>>,
    /// Single eta value; `--eta 1` fits the constrained lasso.
    #[arg(long, conflicts_with = "eta_grid")]
    eta: Option<f64>,
    #[arg(long, default_value_t = 50)]
    lambda_grid_size: usize,
    #[arg(long, default_value_t = 1e-4)]
    lambda_min_ratio: f64,
    #[arg(long)]
    ridge: Option<f64>,
}

impl Grid {
    fn tuning(&self, criterion: Criterion) -> TuningConfig {
        let mut t = TuningConfig {
            lambda_grid_size: self.lambda_grid_size,
            lambda_min_ratio: self.lambda_min_ratio,
            criterion,
            ..Default::default()
        };
        if let Some(e) = self.eta {
            t.eta_grid = vec![e];
        } else if let Some(g) = &self.eta_grid {
            t.eta_grid = g.clone();
        }
        if let Some(r) = self.ridge {
            t.solver.ridge = r;
        }
        t
    }
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    tree: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    outcome: String,
    #[arg(long, default_value = "bic")]
    criterion: Criterion,
    #[command(flatten)]
    grid: Grid,
    /// Accepted for a uniform interface; fitting is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    /// JSON report path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Divide each row by its leaf sum before fitting.
    #[arg(long)]
    normalize: bool,
    /// Renormalize rows that fail validation instead of aborting.
    #[arg(long)]
    force: bool,
    /// Rows shown in the printed coefficient table.
    #[arg(long, default_value_t = 10)]
    top: usize,
}

#[derive(Args)]
struct SimArgs {
    /// Built-in scenario 1-4.
    #[arg(long, required_unless_present = "spec", conflicts_with = "spec")]
    scenario: Option<u32>,
    /// TOML scenario file.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Replicates (overrides the scenario).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Sample size (overrides the scenario).
    #[arg(long)]
    n: Option<usize>,
    /// Noise to signal variance ratio (overrides the scenario).
    #[arg(long)]
    noise_ratio: Option<f64>,
    /// Only this criterion; both by default.
    #[arg(long)]
    criterion: Option<Criterion>,
    #[command(flatten)]
    grid: Grid,
    /// Output path prefix; writes `<out>.csv` and `<out>.json`.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        pool = pool.num_threads(t);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(cli.command)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(io::exit_code(&e) as u8)
        }
    }
}

fn run(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Validate { tree, data, tol } => validate(&tree, &data, tol),
        Command::Fit(args) => fit(args),
        Command::Simulate(args) => simulate(args),
        Command::PenaltyDump { tree, eta, out } => {
            let tree = CompositionalTree::from_file(tree)?;
            let d = build_d(&tree, eta)?;
            match out {
                Some(path) => d.write_matrix_market(&tree, fs::File::create(path)?)?,
                None => d.write_matrix_market(&tree, std::io::stdout().lock())?,
            }
            Ok(0)
        }
    }
}

fn validate(tree: &Path, data: &Path, tol: f64) -> Result<u8> {
    let tree = CompositionalTree::from_file(tree)?;
    let data = io::read_dataset(data, &tree, None)?;
    let issues = io::validate_rows(&tree, &data, tol)?;
    for i in &issues {
        println!("row {} (line {}): {}", i.row + 1, i.line, i.message);
    }
    if issues.is_empty() {
        println!("ok: {} rows, {} leaves", data.n(), tree.q());
        Ok(0)
    } else {
        Ok(1)
    }
}

fn fit(args: FitArgs) -> Result<u8> {
    let tree = CompositionalTree::from_file(&args.tree)?;
    let mut data = io::read_dataset(&args.data, &tree, Some(&args.outcome))?;
    if args.normalize {
        io::normalize_rows(&mut data.x_leaf)?;
    }
    let issues = io::validate_rows(&tree, &data, COMPOSITION_TOL)?;
    let (negative, other): (Vec<_>, Vec<_>) =
        issues.into_iter().partition(|i| i.message.starts_with("negative"));
    let mut warnings: Vec<String> = Vec::new();
    if !negative.is_empty() {
        let w = format!("{} negative leaf value(s) kept as given", negative.len());
        log::warn!("{w}");
        warnings.push(w);
    }
    if !other.is_empty() {
        for i in &other {
            eprintln!("row {} (line {}): {}", i.row + 1, i.line, i.message);
        }
        if !args.force {
            let mut rows: Vec<usize> = other.iter().map(|i| i.row).collect();
            rows.dedup();
            return Err(Error::CompositionViolated { rows });
        }
        io::normalize_rows(&mut data.x_leaf)?;
        warnings.push(format!("{} row issue(s); rows renormalized (--force)", other.len()));
    }
    let mut tuning = args.grid.tuning(args.criterion);
    if args.grid.ridge.is_none() && data.n() < tree.q() {
        tuning.solver.ridge = 1e-4;
    }
    let y = data.y.as_ref().expect("outcome column requested");
    let mut result = selection::fit(&tree, &data.x_leaf, y, &tuning)?;
    warnings.append(&mut result.warnings);
    result.warnings = warnings;
    let report = FitReport::new(&tree, &result, data.n());
    if let Some(out) = &args.out {
        fs::write(out, report.to_json()?)?;
    }
    println!(
        "method {}  {} {:.4}  eta {}  lambda {:.6e}  df {}  intercept {:.6}",
        report.method,
        report.criterion.label(),
        report.ic,
        report.eta,
        report.lambda,
        report.df,
        report.intercept
    );
    print!("{}", report.top_alpha_table(args.top));
    Ok(0)
}

fn simulate(args: SimArgs) -> Result<u8> {
    let mut spec: ScenarioSpec = match (&args.spec, args.scenario) {
        (Some(path), _) => ScenarioSpec::from_toml_file(path)?,
        (None, Some(id)) => sim::builtin_scenario(id)?,
        (None, None) => unreachable!("clap requires one of --scenario/--spec"),
    };
    if let Some(m) = args.m {
        spec.m = m;
    }
    if spec.m == 0 {
        return Err(Error::InvalidConfig("m must be at least 1".into()));
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    if let Some(n) = args.n {
        spec.n = n;
        if args.grid.ridge.is_none() {
            spec.ridge = if n < spec.tree.q() { 1e-4 } else { 0.0 };
        }
    }
    if let Some(r) = args.noise_ratio {
        spec.noise_ratio = r;
    }
    if let Some(r) = args.grid.ridge {
        spec.ridge = r;
    }
    let criteria = match args.criterion {
        Some(c) => vec![c],
        None => vec![Criterion::Aic, Criterion::Bic],
    };
    let tuning = args.grid.tuning(Criterion::Bic);
    let report = sim::run_simulation_with(
        &spec,
        &[Method::Proposed, Method::Classo],
        &criteria,
        &tuning,
    )?;
    let csv_path = with_suffix(&args.out, "csv");
    report.write_csv(fs::File::create(&csv_path)?)?;
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    fs::write(with_suffix(&args.out, "json"), json)?;
    let mut stdout = Vec::new();
    report.write_csv(&mut stdout)?;
    print!("{}", String::from_utf8_lossy(&stdout));
    Ok(0)
}

fn with_suffix(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}
