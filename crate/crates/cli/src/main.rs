use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crewroster::format::{parse_instance, parse_params, parse_roster, roster_reported_objective, write_instance, write_roster};
use crewroster::generator::{generate_suite_member, is_test_scenario, GeneratorSpec, PilotCount, ScenarioSpec};
use crewroster::metrics::{format_table, records_from_raw, write_csv, Method};
use crewroster::runner::{run_method, MethodConfig};
use crewroster::seqasg::{policy_fitness, train_cmaes, PolicyNet, TrainConfig};
use crewroster::windowing::{DEFAULT_OVERLAP, DEFAULT_WINDOW_LEN};
use crewroster::{check_roster, roster_objective, Error, Instance, Result, RuleParams};

const LOG_ENV: &str = "CREWROSTER_LOG";
const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

/// Monthly pilot rostering by branch-and-price with windowing and a learned warm start.
#[derive(Parser)]
#[command(name = "crewroster", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic instances with preferences.
    Gen(GenArgs),
    /// Train a seqAsg policy with CMA-ES on a directory of instances.
    Train(TrainArgs),
    /// Solve one instance and write the roster.
    Solve(SolveArgs),
    /// Check a roster against its instance; exit 0 iff it is feasible.
    Check(CheckArgs),
    /// Run methods over a directory of instances and tabulate S, t, L, p.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    count: u32,
    /// Scenario `i` uses seed + i for both the instance and the preferences.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write held-out scenarios (every sixth) to `test/` and the rest to `train/`.
    #[arg(long)]
    split: bool,
    #[arg(long, default_value_t = 30)]
    days: u32,
    #[arg(long, default_value_t = 3)]
    bases: u32,
    #[arg(long, default_value_t = 12)]
    airports: u32,
    #[arg(long, default_value_t = 250)]
    pairings: u32,
    /// Total flight hours over all pairings.
    #[arg(long, default_value_t = 3900)]
    flight_hours: u64,
    #[arg(long, conflicts_with = "target_hours")]
    pilots: Option<u32>,
    /// Size the crew for this average number of flight hours per pilot.
    #[arg(long)]
    target_hours: Option<f64>,
    #[arg(long, default_value_t = 8)]
    preferred_flights: u32,
    #[arg(long, default_value_t = 1)]
    preferred_vacations: u32,
    #[arg(long, default_value_t = 0.5)]
    preassigned_probability: f64,
    #[arg(long, default_value_t = 100.0)]
    budget: f64,
    #[arg(long, default_value_t = RuleParams::default().min_days_off)]
    min_days_off: u32,
}

#[derive(Args)]
struct TrainArgs {
    /// Directory of instance files.
    #[arg(long)]
    scenarios: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    sigma0: Option<f64>,
}

#[derive(Args, Clone)]
struct MethodArgs {
    #[arg(long, default_value_t = DEFAULT_WINDOW_LEN)]
    window_len: u32,
    #[arg(long, default_value_t = DEFAULT_OVERLAP)]
    overlap: u32,
    /// Policy file for win-ml and seqasg.
    #[arg(long)]
    policy: Option<PathBuf>,
    /// JSON file of solver parameters replacing the method preset.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Seed of the random policy used when win-ml or seqasg gets no --policy.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// alg-basic, alg-fast, win-basic, win-ml or seqasg.
    #[arg(long)]
    method: Method,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    common: MethodArgs,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    roster: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of instance files.
    #[arg(long)]
    scenarios: PathBuf,
    /// Comma-separated methods; alg-basic is added as the baseline.
    #[arg(long, value_delimiter = ',', default_value = "alg-basic,win-basic,win-ml")]
    methods: Vec<Method>,
    /// CSV output file.
    #[arg(long)]
    out: PathBuf,
    /// Scenario x method cells solved concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    common: MethodArgs,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn load_instance(path: &Path) -> Result<Instance> {
    parse_instance(&read(path)?)
}

/// Instance files of a directory in name order.
fn load_dir(dir: &Path) -> Result<Vec<(String, Instance)>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Parameter(format!("no .json instances in {}", dir.display())));
    }
    paths
        .iter()
        .map(|p| {
            let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((name, load_instance(p)?))
        })
        .collect()
}

fn method_config(args: &MethodArgs, methods: &[Method]) -> Result<MethodConfig> {
    let params = args.params.as_deref().map(|p| read(p).and_then(|t| parse_params(&t))).transpose()?;
    let needs_policy = methods.iter().any(|m| matches!(m, Method::WinMl | Method::Seqasg));
    let policy = match &args.policy {
        Some(p) => Some(PolicyNet::from_document(&read(p)?)?),
        None if needs_policy => {
            log::warn!("no --policy given; using a random policy from seed {}", args.seed);
            Some(PolicyNet::random(args.seed, 0.3))
        }
        None => None,
    };
    Ok(MethodConfig { params, window_len: args.window_len, overlap: args.overlap, policy })
}

fn cmd_gen(a: &GenArgs) -> Result<()> {
    let gen = GeneratorSpec {
        seed: a.seed,
        horizon_days: a.days,
        n_bases: a.bases,
        n_airports: a.airports,
        n_pairings: a.pairings,
        total_flight_minutes: a.flight_hours * 60,
        pilots: match (a.pilots, a.target_hours) {
            (_, Some(h)) => PilotCount::TargetHours(h),
            (Some(n), None) => PilotCount::Fixed(n),
            (None, None) => GeneratorSpec::default().pilots,
        },
        rules: RuleParams { min_days_off: a.min_days_off, ..RuleParams::default() },
        ..GeneratorSpec::default()
    };
    let scen = ScenarioSpec {
        seed: a.seed,
        preference_budget: a.budget,
        n_preferred_flights_per_pilot: a.preferred_flights,
        n_preferred_vacations_per_pilot: a.preferred_vacations,
        preassigned_off_probability: a.preassigned_probability,
    };
    let width = a.count.saturating_sub(1).to_string().len().max(2);
    for i in 0..a.count {
        let inst = generate_suite_member(&gen, &scen, i)?;
        let sub = match (a.split, is_test_scenario(i)) {
            (false, _) => "",
            (true, true) => "test",
            (true, false) => "train",
        };
        let path = a.out.join(sub).join(format!("scenario-{i:0width$}.json"));
        write(&path, &write_instance(&inst))?;
        println!("{} pilots={} pairings={}", path.display(), inst.pilots.len(), inst.pairings.len());
    }
    Ok(())
}

fn cmd_train(a: &TrainArgs) -> Result<()> {
    let scenarios: Vec<Instance> = load_dir(&a.scenarios)?.into_iter().map(|(_, i)| i).collect();
    let d = TrainConfig::default();
    let cfg = TrainConfig {
        seed: a.seed,
        max_generations: a.generations.unwrap_or(d.max_generations),
        population: a.population.unwrap_or(d.population),
        sigma0: a.sigma0.unwrap_or(d.sigma0),
        ..d
    };
    let out = train_cmaes(&scenarios, &cfg)?;
    write(&a.out, &out.policy.to_document(Some(out.fitness)))?;
    let zero = policy_fitness(&scenarios, &PolicyNet::zeros())?;
    println!("generations={} fitness={:.3} zero_policy={zero:.3}", out.generations, out.fitness);
    Ok(())
}

fn cmd_solve(a: &SolveArgs) -> Result<()> {
    let inst = load_instance(&a.instance)?;
    let cfg = method_config(&a.common, &[a.method])?;
    let run = run_method(&inst, a.method, &cfg)?;
    for line in &run.log {
        log::info!("{line}");
    }
    write(&a.out, &write_roster(&run.roster, Some(&run.objective)))?;
    println!(
        "method={} S={} unassigned={} t={:.3}",
        a.method,
        run.objective.objective,
        run.roster.unassigned_pairings.len(),
        run.seconds
    );
    Ok(())
}

/// Returns whether the roster is feasible.
fn cmd_check(a: &CheckArgs) -> Result<bool> {
    let inst = load_instance(&a.instance)?;
    let text = read(&a.roster)?;
    let roster = parse_roster(&text, &inst)?;
    let report = check_roster(&inst, &roster);
    print!("{report}");
    let mut ok = report.is_feasible();
    if ok {
        let obj = roster_objective(&inst, &roster)?;
        println!("S={}", obj.objective);
        if let Some(reported) = roster_reported_objective(&text)? {
            if (reported.objective - obj.objective).abs() > 1e-6 * obj.objective.abs().max(1.0) {
                println!("objective mismatch: file reports {}, recomputed {}", reported.objective, obj.objective);
                ok = false;
            }
        }
    }
    Ok(ok)
}

fn cmd_bench(a: &BenchArgs) -> Result<()> {
    let scenarios = load_dir(&a.scenarios)?;
    let mut methods = vec![Method::BASELINE];
    for m in &a.methods {
        if !methods.contains(m) {
            methods.push(*m);
        }
    }
    let cfg = method_config(&a.common, &methods)?;
    let cells: Vec<(usize, Method)> =
        (0..scenarios.len()).flat_map(|i| methods.iter().map(move |m| (i, *m))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs.max(1))
        .build()
        .map_err(|e| Error::Parameter(format!("cannot start {} jobs: {e}", a.jobs)))?;
    let results: Vec<Result<(String, Method, f64, f64)>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(i, m)| {
                let (name, inst) = &scenarios[i];
                let run = run_method(inst, m, &cfg)?;
                let report = check_roster(inst, &run.roster);
                if !report.is_feasible() {
                    return Err(Error::Contract(format!("{m} produced an infeasible roster for {name}:\n{report}")));
                }
                log::info!("{name} {m} S={} t={:.3}", run.objective.objective, run.seconds);
                Ok((name.clone(), m, run.objective.objective, run.seconds))
            })
            .collect()
    });
    let raw = results.into_iter().collect::<Result<Vec<_>>>()?;
    let rows = records_from_raw(&raw);
    write(&a.out, &write_csv(&rows))?;
    print!("{}", format_table(&rows));
    Ok(())
}

/// File-system errors count as bad input.
fn report(e: &Error) -> ExitCode {
    eprintln!("error[{}]: {e}", e.kind());
    let input = e.is_input_error() || matches!(e, Error::Io(_));
    ExitCode::from(if input { EXIT_INPUT } else { EXIT_INTERNAL })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Train(a) => cmd_train(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Check(a) => match cmd_check(a) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(EXIT_INPUT),
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}
