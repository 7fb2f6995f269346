use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sdca::bounds::{self, BoundInputs, GammaProfile};
use sdca::experiment::{self, Error, ExperimentPlan, PlanSettings, ReferenceOptions};

#[derive(Parser)]
#[command(name = "sdca", version, about = "Stochastic dual coordinate ascent for regularized loss minimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model and print its convergence trace as CSV.
    Solve(PlanArgs),
    /// Run a grid of algorithms, schedules, lambdas and seeds.
    Experiment(PlanArgs),
    /// Compute (or load from cache) a high-accuracy reference solution.
    Reference(PlanArgs),
    /// Print the iteration bounds for a problem.
    Bounds(BoundsArgs),
}

#[derive(Args, Default)]
struct PlanArgs {
    /// key=value settings file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    train: Option<String>,
    #[arg(long)]
    test: Option<String>,
    /// hinge, smoothed-hinge, absdev, squared or logistic.
    #[arg(long)]
    loss: Option<String>,
    /// Smoothing parameter of the smoothed hinge.
    #[arg(long)]
    gamma: Option<String>,
    /// Regularization strength; comma-separated for a grid.
    #[arg(long)]
    lambda: Option<String>,
    /// random, perm or cyclic; comma-separated for a grid.
    #[arg(long)]
    schedule: Option<String>,
    /// sdca, sdca-sgd-init or sgd; comma-separated for a grid.
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    epochs: Option<String>,
    #[arg(long = "t0-fraction")]
    t0_fraction: Option<String>,
    /// average, random or final.
    #[arg(long)]
    output: Option<String>,
    /// Seed; comma-separated for a grid.
    #[arg(long)]
    seed: Option<String>,
    #[arg(long = "stop-gap")]
    stop_gap: Option<String>,
    #[arg(long = "gap-every")]
    gap_every: Option<String>,
    /// on or off.
    #[arg(long)]
    normalize: Option<String>,
    /// Add the theoretical gap bound column.
    #[arg(long = "emit-bounds")]
    emit_bounds: bool,
    #[arg(long = "out-dir")]
    out_dir: Option<String>,
    #[arg(long)]
    jobs: Option<String>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    loss: String,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long)]
    lambda: f64,
    /// Number of examples; taken from --train when given.
    #[arg(long)]
    n: Option<usize>,
    /// Target duality gap.
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    /// Also compute the data-dependent bounds for this training file.
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long, default_value = "on")]
    normalize: String,
    /// Directory for the cached reference solution used by the data-dependent bounds.
    #[arg(long = "out-dir", default_value = "out")]
    out_dir: PathBuf,
}

impl PlanArgs {
    fn settings(&self) -> Result<PlanSettings, Error> {
        let base = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|source| Error::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                PlanSettings::parse(&text)?
            }
            None => PlanSettings::new(),
        };
        let mut flags = PlanSettings::new();
        let pairs = [
            ("train", &self.train),
            ("test", &self.test),
            ("loss", &self.loss),
            ("gamma", &self.gamma),
            ("lambda", &self.lambda),
            ("schedule", &self.schedule),
            ("algo", &self.algo),
            ("epochs", &self.epochs),
            ("t0_fraction", &self.t0_fraction),
            ("output", &self.output),
            ("seed", &self.seed),
            ("stop_gap", &self.stop_gap),
            ("gap_every", &self.gap_every),
            ("normalize", &self.normalize),
            ("out_dir", &self.out_dir),
            ("jobs", &self.jobs),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                flags.set(key, v.clone());
            }
        }
        if self.emit_bounds {
            flags.set("emit_bounds", "true");
        }
        Ok(base.overridden_by(&flags))
    }

    fn plan(&self) -> Result<ExperimentPlan, Error> {
        self.settings()?.into_plan()
    }
}

fn single<T: Copy>(items: &[T], what: &str) -> Result<T, Error> {
    match items {
        [x] => Ok(*x),
        _ => Err(Error::Config(format!("solve takes exactly one {what}"))),
    }
}

fn solve(args: &PlanArgs) -> Result<(), Error> {
    let plan = args.plan()?;
    let lambda = single(&plan.lambdas, "lambda")?;
    let seed = single(&plan.seeds, "seed")?;
    let schedule = single(&plan.schedules, "schedule")?;
    let algo = single(&plan.algorithms, "algorithm")?;
    let data = experiment::load_data(&plan.train_path, plan.test_path.as_deref(), plan.normalize)?;
    eprintln!(
        "n={} dim={} normalization_scale={}",
        data.train.n(),
        data.train.dim(),
        data.scale
    );
    let config = experiment::cell_config(&plan, algo, schedule, lambda, seed);
    let trace = experiment::run_cell(&config, algo, &data, None, plan.emit_bounds)?;
    print!("{}", experiment::trace_to_csv(&trace));
    if let Some(last) = trace.last() {
        match last.gap {
            Some(gap) => eprintln!("epoch={} primal={:e} gap={:e}", last.epoch, last.primal, gap),
            None => eprintln!("epoch={} primal={:e}", last.epoch, last.primal),
        }
    }
    Ok(())
}

fn run_experiment(args: &PlanArgs) -> Result<(), Error> {
    let plan = args.plan()?;
    let report = experiment::run_plan(&plan)?;
    eprintln!("normalization_scale={}", report.scale);
    for path in report.reference_files.iter().chain(&report.csv_files) {
        println!("{}", path.display());
    }
    println!("{}", report.manifest.display());
    Ok(())
}

fn reference(args: &PlanArgs) -> Result<(), Error> {
    let plan = args.plan()?;
    let data = experiment::load_data(&plan.train_path, None, plan.normalize)?;
    fs::create_dir_all(&plan.output_dir).map_err(|source| Error::Io {
        path: plan.output_dir.display().to_string(),
        source,
    })?;
    for &lambda in &plan.lambdas {
        let r = experiment::solve_reference_cached(
            &plan.loss,
            lambda,
            &data.train,
            &data.digest,
            &plan.output_dir,
            ReferenceOptions::default(),
        )?;
        let s = &r.solution;
        println!(
            "lambda={} primal={:.16e} dual={:.16e} gap={:e} epochs={} degraded={} cached={} file={}",
            lambda,
            s.primal_ref,
            s.dual_ref,
            s.gap_achieved,
            s.epochs,
            s.degraded,
            r.from_cache,
            r.path.display()
        );
    }
    Ok(())
}

fn print_row(name: &str, quantity: &str, value: impl std::fmt::Display) {
    println!("{name:<8} {quantity:<12} {value}");
}

fn print_bounds(args: &BoundsArgs) -> Result<(), Error> {
    let kind = args.loss.parse()?;
    let loss = sdca::LossSpec::new(kind, args.gamma)?;
    let data = match &args.train {
        Some(path) => Some(experiment::load_data(path, None, args.normalize == "on")?),
        None => None,
    };
    let n = match (&data, args.n) {
        (Some(d), _) => d.train.n(),
        (None, Some(n)) => n,
        (None, None) => return Err(Error::Config("bounds needs --n or --train".into())),
    };
    let inputs = BoundInputs::for_loss(&loss, n, args.lambda, args.eps);
    println!("{:<8} {:<12} value", "bound", "quantity");
    if loss.lipschitz().is_some() {
        let (t0, t) = bounds::thm1_iterations(&inputs)?;
        print_row("zero", "T0", t0);
        print_row("zero", "T", t);
        print_row("zero", "T_conserv", bounds::thm1_total_conservative(&inputs)?);
        let (t0, t) = bounds::thm4_iterations(&inputs)?;
        print_row("warm", "T0", t0);
        print_row("warm", "T", t);
        let l = loss.lipschitz().unwrap_or(1.0);
        print_row("sgd-pass", "eps_D", format!("{:e}", bounds::thm3_sgd_bound(n, l, args.lambda)));
    }
    if loss.smoothness().is_some() {
        print_row("smooth", "T", bounds::thm2_iterations(&inputs)?);
    }
    if let Some(data) = data {
        let l = loss
            .lipschitz()
            .ok_or_else(|| Error::Config("data-dependent bounds need a Lipschitz loss".into()))?;
        fs::create_dir_all(&args.out_dir).map_err(|source| Error::Io {
            path: args.out_dir.display().to_string(),
            source,
        })?;
        let r = experiment::solve_reference_cached(
            &loss,
            args.lambda,
            &data.train,
            &data.digest,
            &args.out_dir,
            ReferenceOptions::default(),
        )?;
        let gammas = bounds::refined_gamma_i(&loss, &data.train, &r.solution.w_ref)?;
        let profile = GammaProfile::new(gammas)?;
        match bounds::thm5_iterations(args.lambda, l, &profile, args.eps) {
            Some(b) => {
                print_row("refined", "s", format!("{:e}", b.s));
                print_row("refined", "T", b.iterations);
            }
            None => print_row("refined", "T", "none"),
        }
        let rho = bounds::rho_top_eigenvalue(&data.train);
        print_row("refined", "rho", format!("{:e}", rho.value));
        let t6 = bounds::thm6_eps_tilde(&profile, args.lambda, rho.value, l, args.eps);
        print_row("refined", "eps_tilde", format!("{:e}", t6.eps_tilde));
        print_row("refined", "gamma", format!("{:e}", t6.gamma));
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Experiment(a) => run_experiment(a),
        Command::Reference(a) => reference(a),
        Command::Bounds(a) => print_bounds(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
