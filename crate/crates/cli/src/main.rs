//! `piwo` — offline policy optimization for finite contextual bandits.
//!
//! Subcommands cover the full workflow: `generate` synthetic classification
//! data, `convert` it into a bandit instance, `learn` a policy from logged
//! data, `eval` exact values, stress the deviation/regret guarantees with
//! `tails`, compute Gibbs posteriors with `pacbayes`, and reproduce the
//! hyperparameter-sensitivity study with `sweep`. Every command is
//! deterministic given its flags: rerunning writes byte-identical files.

use std::path::PathBuf;

use anyhow::{bail, Context as _};
use clap::{Args, Parser, Subcommand, ValueEnum};

use piwo::bandit::{FiniteContextualBandit, LoggedDataset, PolicyClass, TabularPolicy};
use piwo::estimators::{recommended_gamma, EstimatorKind};
use piwo::experiment::{
    build_reward_matrix, generate_synthetic_classification, load_classification_csv, run_sweep,
    supervised_to_bandit, GridSpec, PolicyDirection, SweepConfig,
};
use piwo::learners::{
    best_in_class, coverage_scaled_gammas, coverage_scaled_piwo_ix, piwo_clip, piwo_ix, piwo_pl,
};
use piwo::pac_bayes::{gibbs_posterior, gibbs_posterior_with_lambda, PolicyDistribution};
use piwo::tails::BoundCheck;

#[derive(Parser)]
#[command(name = "piwo", version, about = "Offline contextual-bandit policy optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic classification table (headerless CSV: feature
    /// columns, then a 1-based label column).
    Generate(GenerateArgs),
    /// Convert a classification CSV into a bandit instance plus the reward
    /// matrix that induced it.
    Convert(ConvertArgs),
    /// Pick a policy from a class using one logged dataset.
    Learn(LearnArgs),
    /// Evaluate exact policy values (and optional estimates) over a class.
    Eval(EvalArgs),
    /// Monte Carlo check of a deviation or regret bound from a spec file.
    Tails(TailsArgs),
    /// Compute a Gibbs posterior over a policy class from logged data.
    Pacbayes(PacbayesArgs),
    /// Hyperparameter-sensitivity sweep over softmax behavior policies.
    Sweep(SweepArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum EstimatorArg {
    Iw,
    Ix,
    Ciw,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum LearnerArg {
    PiwoIx,
    PiwoClip,
    PiwoPl,
    CoverageScaled,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum DirectionArg {
    Good,
    Bad,
}

impl From<DirectionArg> for PolicyDirection {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Good => PolicyDirection::Good,
            DirectionArg::Bad => PolicyDirection::Bad,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of rows.
    #[arg(long, default_value_t = 2000)]
    rows: usize,
    /// Number of feature columns.
    #[arg(long, default_value_t = 8)]
    features: usize,
    /// Number of classes.
    #[arg(long, default_value_t = 10)]
    classes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ConvertArgs {
    /// Classification CSV to convert.
    data: PathBuf,
    /// 0-based label column (defaults to the last column).
    #[arg(long)]
    label_col: Option<usize>,
    /// Seed for the generated reward matrix (ignored with --matrix).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Reuse an existing reward matrix CSV instead of generating one.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Output path for the bandit instance (TOML).
    #[arg(long)]
    out: PathBuf,
    /// Output path for the reward matrix (CSV).
    #[arg(long)]
    matrix_out: Option<PathBuf>,
}

#[derive(Args)]
struct LearnArgs {
    /// Bandit instance (TOML) — needed to validate the class and, for
    /// coverage-scaled selection, to compute exact coverage.
    #[arg(long)]
    instance: PathBuf,
    /// Policy class (TOML).
    #[arg(long)]
    class: PathBuf,
    /// Logged dataset (CSV).
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value_t = LearnerArg::PiwoIx)]
    learner: LearnerArg,
    /// Smoothing/clipping parameter; defaults to the recommended value for
    /// the class size, delta, and dataset size.
    #[arg(long)]
    gamma: Option<f64>,
    /// Softer-penalty weight (piwo-pl only).
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Behavior policy file (single-policy TOML); required by piwo-pl and
    /// coverage-scaled.
    #[arg(long)]
    behavior: Option<PathBuf>,
    /// Optional CSV describing the choice.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    class: PathBuf,
    /// Logged dataset (CSV); adds an estimate column.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Ix)]
    estimator: EstimatorArg,
    /// Smoothing parameter for ix/ciw estimates; defaults to the
    /// recommended value.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Comparator index for the regret column (defaults to best-in-class).
    #[arg(long)]
    comparator: Option<usize>,
    /// Optional CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TailsArgs {
    /// Bound-check spec (TOML); artifact paths are relative to this file.
    #[arg(long)]
    spec: PathBuf,
    /// Override the spec's trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Override the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Optional CSV output of the violation report.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PacbayesArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    class: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Prior weights CSV (index,weight); defaults to uniform.
    #[arg(long)]
    prior: Option<PathBuf>,
    /// Smoothing parameter; defaults to the recommended value.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Override the inverse temperature (defaults to 2·gamma·n).
    #[arg(long)]
    lambda: Option<f64>,
    /// Output CSV of posterior weights (index,weight).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Classification CSV driving the sweep.
    #[arg(long)]
    data: PathBuf,
    /// 0-based label column (defaults to the last column).
    #[arg(long)]
    label_col: Option<usize>,
    /// Sweep configuration (TOML); flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Softmax temperature grid: comma-separated values or
    /// logspace(lo,hi,count).
    #[arg(long)]
    eta_grid: Option<String>,
    /// Learner hyperparameter grid: comma-separated values or
    /// logspace(lo,hi,count).
    #[arg(long)]
    hyper_grid: Option<String>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long, value_enum)]
    direction: Option<DirectionArg>,
    #[arg(long)]
    seed: Option<u64>,
    /// Reuse an existing reward matrix CSV instead of deriving one from the
    /// sweep seed.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Output CSV of sweep rows.
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Generate(args) => generate(args),
        Command::Convert(args) => convert(args),
        Command::Learn(args) => learn(args),
        Command::Eval(args) => eval(args),
        Command::Tails(args) => tails(args),
        Command::Pacbayes(args) => pacbayes(args),
        Command::Sweep(args) => sweep(args),
    }
}

fn generate(args: GenerateArgs) -> anyhow::Result<()> {
    let table =
        generate_synthetic_classification(args.rows, args.features, args.classes, args.seed)?;
    piwo::io::write_classification_csv(&args.out, &table)?;
    println!(
        "wrote {} rows x {} features over {} classes to {}",
        table.num_rows(),
        table.num_features(),
        table.num_classes(),
        args.out.display()
    );
    Ok(())
}

fn convert(args: ConvertArgs) -> anyhow::Result<()> {
    let table = load_classification_csv(&args.data, args.label_col)?;
    let matrix = match &args.matrix {
        Some(path) => piwo::io::read_reward_matrix(path)?,
        None => build_reward_matrix(table.num_classes(), args.seed)?,
    };
    let instance = supervised_to_bandit(&table, &matrix)?;
    piwo::io::write_instance(&args.out, &instance)?;
    if let Some(mpath) = &args.matrix_out {
        piwo::io::write_reward_matrix(mpath, &matrix)?;
    }
    println!(
        "instance with {} contexts and {} actions written to {}",
        instance.contexts().len(),
        instance.num_actions(),
        args.out.display()
    );
    Ok(())
}

/// Load the (instance, class-document, dataset) triple shared by learn, eval,
/// and pacbayes, verifying the class matches the instance.
fn load_task(
    instance: &PathBuf,
    class: &PathBuf,
    data: Option<&PathBuf>,
) -> anyhow::Result<(FiniteContextualBandit, piwo::io::PolicyClassDocument, Option<LoggedDataset>)> {
    let instance = piwo::io::read_instance(instance)?;
    let doc = piwo::io::read_policy_class(class)?;
    doc.check_instance_alignment(&instance)?;
    let dataset = match data {
        Some(path) => Some(piwo::io::read_dataset(path, &instance)?),
        None => None,
    };
    Ok((instance, doc, dataset))
}

fn resolve_gamma(
    gamma: Option<f64>,
    class_size: usize,
    delta: f64,
    n: usize,
) -> anyhow::Result<f64> {
    Ok(match gamma {
        Some(g) => g,
        None => recommended_gamma(class_size, delta, n)?,
    })
}

fn load_behavior(
    path: &Option<PathBuf>,
    instance: &FiniteContextualBandit,
    learner: &str,
) -> anyhow::Result<TabularPolicy> {
    let path = path
        .as_ref()
        .with_context(|| format!("{learner} needs --behavior"))?;
    let (_, behavior) = piwo::io::read_single_policy(path)?;
    instance.check_policy(&behavior, "behavior policy")?;
    Ok(behavior)
}

fn learn(args: LearnArgs) -> anyhow::Result<()> {
    let (instance, doc, dataset) = load_task(&args.instance, &args.class, Some(&args.data))?;
    let dataset = dataset.expect("dataset path was given");
    let class: &PolicyClass = &doc.class;

    let mut used_gamma = None;
    let mut used_beta = None;
    let chosen = match args.learner {
        LearnerArg::PiwoIx => {
            let g = resolve_gamma(args.gamma, class.len(), args.delta, dataset.len())?;
            used_gamma = Some(g);
            piwo_ix(&dataset, class, g)?
        }
        LearnerArg::PiwoClip => {
            let g = resolve_gamma(args.gamma, class.len(), args.delta, dataset.len())?;
            used_gamma = Some(g);
            piwo_clip(&dataset, class, g)?
        }
        LearnerArg::PiwoPl => {
            let beta = args.beta.context("piwo-pl needs --beta")?;
            used_beta = Some(beta);
            let behavior = load_behavior(&args.behavior, &instance, "piwo-pl")?;
            piwo_pl(&dataset, class, beta, &behavior)?
        }
        LearnerArg::CoverageScaled => {
            if args.gamma.is_some() {
                bail!("coverage-scaled derives per-policy gammas; leave --gamma unset");
            }
            let behavior = load_behavior(&args.behavior, &instance, "coverage-scaled")?;
            let gammas =
                coverage_scaled_gammas(class, &instance, &behavior, args.delta, dataset.len())?;
            coverage_scaled_piwo_ix(&dataset, class, &gammas, args.delta)?
        }
    };

    let name = &doc.names[chosen];
    let learner_name = match args.learner {
        LearnerArg::PiwoIx => "piwo-ix",
        LearnerArg::PiwoClip => "piwo-clip",
        LearnerArg::PiwoPl => "piwo-pl",
        LearnerArg::CoverageScaled => "coverage-scaled",
    };
    println!("{learner_name} chose policy {chosen} ({name}) from {} records", dataset.len());

    if let Some(out) = &args.out {
        let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let csv = format!(
            "learner,gamma,beta,delta,chosen_index,chosen_name\n{},{},{},{},{},{}\n",
            learner_name,
            fmt(used_gamma),
            fmt(used_beta),
            args.delta,
            chosen,
            name
        );
        std::fs::write(out, csv).with_context(|| format!("cannot write {}", out.display()))?;
    }
    Ok(())
}

fn eval(args: EvalArgs) -> anyhow::Result<()> {
    let (instance, doc, dataset) = load_task(&args.instance, &args.class, args.data.as_ref())?;
    let class = &doc.class;

    let values: Vec<f64> = class
        .iter()
        .map(|p| instance.policy_value(p))
        .collect::<piwo::Result<_>>()?;
    let comparator = match args.comparator {
        Some(i) => {
            if i >= class.len() {
                bail!("comparator {i} outside a class of {}", class.len());
            }
            i
        }
        None => best_in_class(&instance, class)?,
    };

    let estimates = match &dataset {
        Some(data) => {
            let kind = match args.estimator {
                EstimatorArg::Iw => EstimatorKind::Iw,
                EstimatorArg::Ix => EstimatorKind::Ix(resolve_gamma(
                    args.gamma,
                    class.len(),
                    args.delta,
                    data.len(),
                )?),
                EstimatorArg::Ciw => EstimatorKind::Ciw(resolve_gamma(
                    args.gamma,
                    class.len(),
                    args.delta,
                    data.len(),
                )?),
            };
            Some(
                class
                    .iter()
                    .map(|p| kind.estimate(data, p))
                    .collect::<piwo::Result<Vec<f64>>>()?,
            )
        }
        None => None,
    };

    let mut csv = String::from(match estimates {
        Some(_) => "index,name,value,regret,estimate\n",
        None => "index,name,value,regret\n",
    });
    for (i, name) in doc.names.iter().enumerate() {
        let regret = values[comparator] - values[i];
        match &estimates {
            Some(est) => {
                csv.push_str(&format!("{i},{name},{},{},{}\n", values[i], regret, est[i]))
            }
            None => csv.push_str(&format!("{i},{name},{},{}\n", values[i], regret)),
        }
    }
    print!("{csv}");
    if let Some(out) = &args.out {
        std::fs::write(out, csv).with_context(|| format!("cannot write {}", out.display()))?;
    }
    Ok(())
}

fn tails(args: TailsArgs) -> anyhow::Result<()> {
    let mut spec = piwo::io::read_tails_spec(&args.spec)?;
    if let Some(trials) = args.trials {
        spec.trials = trials;
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }

    let instance = piwo::io::read_instance(&spec.instance)?;
    let (_, behavior) = piwo::io::read_single_policy(&spec.behavior)?;
    let doc = piwo::io::read_policy_class(&spec.class)?;
    doc.check_instance_alignment(&instance)?;

    let mut check = BoundCheck::new(
        spec.target,
        &instance,
        &behavior,
        &doc.class,
        spec.n,
        spec.delta,
        spec.trials,
        spec.seed,
    );
    check.gamma = spec.gamma;
    check.comparator = spec.comparator;
    if let Some(prior_path) = &spec.prior {
        check.prior = Some(piwo::io::read_distribution(prior_path, doc.class.len())?);
    }
    if let Some(mixtures) = spec.probe_mixtures {
        check.probe_mixtures = mixtures;
    }

    let report = check.run()?;
    println!("{report}");
    if let Some(out) = &args.out {
        piwo::io::write_violation_report_csv(out, &report)?;
    }
    if !report.passed {
        bail!(
            "violation rate {} exceeds {} + slack {}",
            report.violation_rate,
            report.delta,
            report.slack
        );
    }
    Ok(())
}

fn pacbayes(args: PacbayesArgs) -> anyhow::Result<()> {
    let (_, doc, dataset) = load_task(&args.instance, &args.class, Some(&args.data))?;
    let dataset = dataset.expect("dataset path was given");
    let class = &doc.class;

    let prior = match &args.prior {
        Some(path) => piwo::io::read_distribution(path, class.len())?,
        None => PolicyDistribution::uniform(class.len())?,
    };
    let gamma = resolve_gamma(args.gamma, class.len(), args.delta, dataset.len())?;
    let posterior = match args.lambda {
        Some(lambda) => gibbs_posterior_with_lambda(&dataset, class, &prior, gamma, lambda)?,
        None => gibbs_posterior(&dataset, class, &prior, gamma)?,
    };
    piwo::io::write_distribution(&args.out, &posterior)?;

    let top = posterior
        .weights()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty distribution");
    println!(
        "posterior over {} policies written to {}; heaviest is {} ({}) at {:.4}",
        class.len(),
        args.out.display(),
        top.0,
        doc.names[top.0],
        top.1
    );
    Ok(())
}

fn parse_grid(text: &str) -> anyhow::Result<GridSpec> {
    let trimmed = text.trim();
    if trimmed.starts_with("logspace(") {
        let spec = GridSpec::Expression(trimmed.to_string());
        spec.resolve()?; // validate eagerly for a better error position
        return Ok(spec);
    }
    let values = trimmed
        .split(',')
        .map(|f| {
            f.trim()
                .parse::<f64>()
                .with_context(|| format!("grid entry {:?} is not a number", f.trim()))
        })
        .collect::<anyhow::Result<Vec<f64>>>()?;
    Ok(GridSpec::Values(values))
}

fn sweep(args: SweepArgs) -> anyhow::Result<()> {
    let mut config = match &args.config {
        Some(path) => piwo::io::read_sweep_config(path)?,
        None => {
            let eta = args
                .eta_grid
                .as_deref()
                .context("without --config, --eta-grid is required")?;
            let hyper = args
                .hyper_grid
                .as_deref()
                .context("without --config, --hyper-grid is required")?;
            SweepConfig::new(parse_grid(eta)?, parse_grid(hyper)?)
        }
    };
    if args.config.is_some() {
        if let Some(eta) = &args.eta_grid {
            config.eta_grid = parse_grid(eta)?;
        }
        if let Some(hyper) = &args.hyper_grid {
            config.hyper_grid = parse_grid(hyper)?;
        }
    }
    if let Some(folds) = args.folds {
        config.folds = folds;
    }
    if let Some(direction) = args.direction {
        config.direction = direction.into();
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }

    let table = load_classification_csv(&args.data, args.label_col)?;
    let matrix = match &args.matrix {
        Some(path) => piwo::io::read_reward_matrix(path)?,
        None => build_reward_matrix(table.num_classes(), config.seed)?,
    };
    let rows = run_sweep(&config, &table, &matrix)?;
    piwo::io::write_sweep_rows(&args.out, &rows)?;
    println!("{} sweep rows written to {}", rows.len(), args.out.display());
    Ok(())
}
