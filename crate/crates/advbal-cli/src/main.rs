//! Command-line interface: benchmark generation, single-dataset balancing,
//! config-driven experiments, and balance diagnostics.
//!
//! Exit codes: 0 on success, 1 on configuration/usage errors, 2 on runtime
//! failures.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use advbal::adversarial::{adversarial_balance, AdversarialParams, FamilyChoice, PredictionMode};
use advbal::baselines::{ipw_weights, mmd_weights, MMD_DEFAULT_RIDGE, MMD_DEFAULT_SCALE};
use advbal::benchgen::{gen_circular, gen_kang_schafer, write_oracle_csv, GeneratedBenchmark};
use advbal::classifiers::FamilySpec;
use advbal::data::format_cell;
use advbal::diagnostics::{balance_report, BalanceReport, DiscriminatorFamily};
use advbal::experiment::{
    emit_results, family_from_name, run_experiment, ExperimentConfig, OutputFormat,
};
use advbal::{
    build_balancing_problem, load_dataset_csv, write_dataset_csv, CsvSchema, Dataset, Error,
    Estimand, WeightVector,
};

#[derive(Parser)]
#[command(
    name = "advbal",
    about = "Covariate-balancing weights: adversarial reweighting, IPW and MMD baselines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark dataset CSV plus a sibling .oracle.csv with the
    /// hidden ground-truth columns.
    Generate(GenerateArgs),
    /// Compute balancing weights for one dataset and write them with a
    /// balance report.
    Balance(BalanceArgs),
    /// Run a full experiment from a JSON config file.
    Run(RunArgs),
    /// Compute a balance report for an existing weights file.
    Diagnose(DiagnoseArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// kang_schafer or circular
    #[arg(long)]
    benchmark: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Emit the nonlinearly transformed Kang-Schafer covariates
    #[arg(long, default_value_t = false)]
    transformed: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct DataArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    treatment_col: String,
    #[arg(long)]
    outcome_col: String,
    /// Comma-separated covariate column names
    #[arg(long, value_delimiter = ',')]
    covariate_cols: Vec<String>,
    /// epo or att
    #[arg(long, default_value = "epo")]
    estimand: String,
    /// The arm being reweighted
    #[arg(long, default_value_t = 1)]
    treatment_value: u32,
    /// Reference arm for att
    #[arg(long)]
    reference: Option<u32>,
}

#[derive(Args)]
struct BalanceArgs {
    #[command(flatten)]
    data: DataArgs,
    /// unweighted, ipw, mmd_v1 or adversarial
    #[arg(long)]
    method: String,
    /// lr, rbf, mlp1..mlp3, or cv:lr,rbf,...
    #[arg(long, default_value = "lr")]
    family: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = MMD_DEFAULT_SCALE)]
    mmd_scale: f64,
    #[arg(long, default_value_t = MMD_DEFAULT_RIDGE)]
    mmd_ridge: f64,
    #[arg(long)]
    out_weights: PathBuf,
    #[arg(long)]
    out_report: PathBuf,
    /// Outcome bound for the error-bound diagnostic
    #[arg(long)]
    m_y: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override config sizes (comma-separated)
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    bootstrap_samples: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    /// Override output path
    #[arg(long)]
    output: Option<PathBuf>,
    /// Override output format: csv or json
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    data: DataArgs,
    /// CSV with columns row,weight as written by `balance`
    #[arg(long)]
    weights: PathBuf,
    /// Family for the divergence discriminator
    #[arg(long, default_value = "lr")]
    family: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    m_y: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are successes; anything else is a usage
            // error
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0u8,
                _ => 1u8,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Balance(args) => cmd_balance(args),
        Command::Run(args) => cmd_run(args),
        Command::Diagnose(args) => cmd_diagnose(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn oracle_path(out: &Path) -> PathBuf {
    match out.extension() {
        Some(ext) if ext == "csv" => out.with_extension("oracle.csv"),
        _ => {
            let mut p = out.as_os_str().to_owned();
            p.push(".oracle.csv");
            PathBuf::from(p)
        }
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Error> {
    let generated: GeneratedBenchmark = match args.benchmark.as_str() {
        "kang_schafer" => gen_kang_schafer(args.n, args.seed, args.transformed)?,
        "circular" => gen_circular(args.n, args.seed)?,
        other => {
            return Err(Error::Config(format!(
                "unknown benchmark '{other}' (expected kang_schafer or circular)"
            )))
        }
    };
    write_dataset_csv(&args.out, &generated.dataset, "a", "y")?;
    write_oracle_csv(&oracle_path(&args.out), &generated.oracle)?;
    println!(
        "wrote {} rows to {} (+ oracle columns alongside)",
        generated.dataset.n_rows(),
        args.out.display()
    );
    Ok(())
}

fn load_data(args: &DataArgs) -> Result<(Dataset, Estimand), Error> {
    let schema = CsvSchema {
        treatment_column: args.treatment_col.clone(),
        outcome_column: args.outcome_col.clone(),
        covariate_columns: args.covariate_cols.clone(),
    };
    if schema.covariate_columns.is_empty() {
        return Err(Error::Config("no covariate columns given".into()));
    }
    let ds = load_dataset_csv(&args.data, &schema)?;
    let estimand = match args.estimand.as_str() {
        "epo" => Estimand::ExpectedPotentialOutcome {
            treatment: args.treatment_value,
        },
        "att" => Estimand::Att {
            reference: args.reference.ok_or_else(|| {
                Error::Config("--reference is required for the att estimand".into())
            })?,
        },
        other => {
            return Err(Error::Config(format!(
                "unknown estimand '{other}' (expected epo or att; run ate as two epo legs)"
            )))
        }
    };
    Ok((ds, estimand))
}

fn parse_family_flag(flag: &str) -> Result<FamilyChoice, Error> {
    if let Some(list) = flag.strip_prefix("cv:") {
        let specs: Vec<FamilySpec> = list
            .split(',')
            .map(family_from_name)
            .collect::<Result<_, _>>()?;
        if specs.is_empty() {
            return Err(Error::Config("empty cv: family list".into()));
        }
        Ok(FamilyChoice::CvSelect(specs))
    } else {
        Ok(FamilyChoice::Fixed(family_from_name(flag)?))
    }
}

fn write_weights_csv(path: &Path, rows: &[usize], w: &WeightVector) -> Result<(), Error> {
    let mut text = String::from("row,weight\n");
    for (i, wi) in rows.iter().zip(w.iter()) {
        text.push_str(&format!("{},{}\n", i, format_cell(*wi)));
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn cmd_balance(args: BalanceArgs) -> Result<(), Error> {
    let (ds, estimand) = load_data(&args.data)?;
    let prob = build_balancing_problem(&ds, &estimand, args.data.treatment_value)?;
    let (weights, diag_family) = match args.method.as_str() {
        "unweighted" => (
            WeightVector::uniform(prob.n_source())?,
            FamilySpec::logistic_regression(),
        ),
        "mmd_v1" => {
            let res = mmd_weights(&prob, args.mmd_scale, args.mmd_ridge)?;
            if !res.converged {
                eprintln!(
                    "warning: MMD solver stopped at gradient-mapping norm {}",
                    res.gradient_mapping_norm
                );
            }
            (res.weights, FamilySpec::logistic_regression())
        }
        "ipw" => {
            let spec = match parse_family_flag(&args.family)? {
                FamilyChoice::Fixed(spec) => spec,
                FamilyChoice::CvSelect(_) => {
                    return Err(Error::Config(
                        "use a fixed family for ipw in the balance subcommand".into(),
                    ))
                }
            };
            let res = ipw_weights(&ds, &spec, &estimand, args.data.treatment_value, args.seed)?;
            if !res.positivity_violations.is_empty() {
                eprintln!(
                    "warning: propensity clipped at rows {:?}",
                    res.positivity_violations
                );
            }
            (res.weights, spec)
        }
        "adversarial" => {
            let mut params = AdversarialParams::new(FamilySpec::logistic_regression());
            params.family = parse_family_flag(&args.family)?;
            params.seed = args.seed;
            let (w, trace) = adversarial_balance(&prob, &params)?;
            let diag = match (&params.family, &trace.selection) {
                (FamilyChoice::Fixed(spec), _) => spec.clone(),
                (_, Some(sel)) => sel.spec.clone(),
                _ => FamilySpec::logistic_regression(),
            };
            (w, diag)
        }
        other => {
            return Err(Error::Config(format!(
                "unknown method '{other}' (expected unweighted, ipw, mmd_v1 or adversarial)"
            )))
        }
    };

    let source_rows = ds.rows_with(args.data.treatment_value);
    write_weights_csv(&args.out_weights, &source_rows, &weights)?;
    let report = balance_report(
        &prob,
        &weights,
        &DiscriminatorFamily::Fitted(diag_family),
        PredictionMode::TrainPredictions,
        args.seed,
        args.m_y.map(|m| (m, args.delta)),
    )?;
    std::fs::write(&args.out_report, render_report(&report)?)?;
    println!(
        "wrote {} weights to {} and the report to {}",
        weights.len(),
        args.out_weights.display(),
        args.out_report.display()
    );
    Ok(())
}

fn render_report(report: &BalanceReport) -> Result<String, Error> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

fn cmd_run(args: RunArgs) -> Result<(), Error> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut cfg: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
    if let Some(sizes) = args.sizes {
        cfg.sizes = sizes;
    }
    if let Some(r) = args.replications {
        cfg.replications = r;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(b) = args.bootstrap_samples {
        cfg.bootstrap_samples = b;
    }
    if let Some(w) = args.workers {
        cfg.workers = Some(w);
    }
    if let Some(path) = args.output {
        cfg.output.path = path.display().to_string();
    }
    if let Some(format) = args.format {
        cfg.output.format = match format.as_str() {
            "csv" => OutputFormat::Csv,
            "json" => OutputFormat::Json,
            other => {
                return Err(Error::Config(format!(
                    "unknown output format '{other}' (expected csv or json)"
                )))
            }
        };
    }
    let result = run_experiment(&cfg)?;
    let out_path = PathBuf::from(&cfg.output.path);
    emit_results(&result, cfg.output.format, &out_path)?;
    for row in &result.rows {
        if row.failed {
            eprintln!(
                "warning: method {} at n={} failed on {} of {} replications",
                row.method,
                row.n,
                row.failures.len(),
                row.estimates.len()
            );
        }
    }
    println!("wrote {} result rows to {}", result.rows.len(), out_path.display());
    Ok(())
}

fn read_weights_csv(path: &Path) -> Result<WeightVector, Error> {
    let text = std::fs::read_to_string(path)?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            continue; // header
        }
        let cell = line.split(',').nth(1).ok_or_else(|| Error::Parse {
            row: i,
            column: "weight".into(),
            message: "missing weight column".into(),
        })?;
        values.push(cell.trim().parse::<f64>().map_err(|_| Error::Parse {
            row: i,
            column: "weight".into(),
            message: format!("'{cell}' is not a real number"),
        })?);
    }
    WeightVector::new(values)
}

fn cmd_diagnose(args: DiagnoseArgs) -> Result<(), Error> {
    let (ds, estimand) = load_data(&args.data)?;
    let prob = build_balancing_problem(&ds, &estimand, args.data.treatment_value)?;
    let weights = read_weights_csv(&args.weights)?;
    let spec = family_from_name(&args.family)?;
    let report = balance_report(
        &prob,
        &weights,
        &DiscriminatorFamily::Fitted(spec),
        PredictionMode::TrainPredictions,
        args.seed,
        args.m_y.map(|m| (m, args.delta)),
    )?;
    let text = render_report(&report)?;
    match args.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}
