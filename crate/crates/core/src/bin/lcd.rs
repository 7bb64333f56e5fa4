use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use lcd_core::bench::{
    cmd_run, cmd_sweep, cmd_verify, exit, exit_code_for, CurvatureChoice, ExperimentSpec, LambdaSpec, MethodChoice,
    default_grid, StartPoint, Task,
};
use lcd_core::io::results_root;
use lcd_core::verify::{Scope, VerifyOptions};

#[derive(Parser)]
#[command(name = "lcd", version, about = "Local curvature descent experiments and property checks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run methods on one problem and write traces.
    Run(RunArgs),
    /// Run the sampled property suites.
    Verify(VerifyArgs),
    /// Run over a grid of regularization weights.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct RunArgs {
    /// LibSVM-format data file.
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_parser = parse::<Task>)]
    task: Task,
    /// Absolute regularization weight.
    #[arg(long, conflicts_with = "lambda_frac_of_l")]
    lambda: Option<f64>,
    /// Regularization weight as a multiple of the smoothness constant L.
    #[arg(long = "lambda-frac-of-L")]
    lambda_frac_of_l: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Comma-separated: gd, gd(step), polyak, lcd1, lcd2, lcd3.
    #[arg(long, value_delimiter = ',', value_parser = parse::<MethodChoice>, default_value = "lcd2")]
    methods: Vec<MethodChoice>,
    #[arg(long, value_parser = parse::<CurvatureChoice>)]
    curvature: Option<CurvatureChoice>,
    #[arg(long, default_value_t = 300)]
    max_iters: usize,
    /// Wall-clock budget per method in seconds.
    #[arg(long)]
    time_budget: Option<f64>,
    #[arg(long)]
    f_tol: Option<f64>,
    #[arg(long)]
    g_tol: Option<f64>,
    /// Smoothness excess for LCD1 when the model has none.
    #[arg(long)]
    lc: Option<f64>,
    /// Output directory [default: $LCD_RESULTS_DIR/run or results/run].
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_parser = parse::<StartPoint>, default_value = "zeros")]
    x0: StartPoint,
    /// Min-max scale every feature column to [0, 1].
    #[arg(long)]
    scale_features: bool,
    /// Iteration budget of the f* estimator.
    #[arg(long, default_value_t = 200_000)]
    fstar_budget: usize,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_parser = parse::<Scope>, default_value = "all")]
    scope: Scope,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Include a deliberately invalid (f, C) pair that must fail.
    #[arg(long)]
    negative_control: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// λ/L grid [default: 1e-4, 1e-3/3, 1e-3; ridge: 1e-3, 1e-2/3, 1e-2].
    #[arg(long, value_delimiter = ',', conflicts_with = "grid_abs")]
    grid: Vec<f64>,
    /// Absolute λ grid.
    #[arg(long, value_delimiter = ',')]
    grid_abs: Vec<f64>,
}

fn parse<T: std::str::FromStr<Err = lcd_core::Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: lcd_core::Error| e.to_string())
}

fn spec_from(a: RunArgs, default_out: &str) -> ExperimentSpec {
    let mut spec = ExperimentSpec::new(
        a.dataset,
        a.task,
        a.methods,
        a.out.unwrap_or_else(|| results_root().join(default_out)),
    );
    spec.lambda = a
        .lambda
        .map(LambdaSpec::Absolute)
        .or(a.lambda_frac_of_l.map(LambdaSpec::FracOfL));
    spec.p = a.p;
    spec.delta = a.delta;
    spec.curvature = a.curvature;
    spec.max_iters = a.max_iters;
    spec.time_budget_s = a.time_budget;
    spec.f_tol = a.f_tol;
    spec.g_tol = a.g_tol;
    spec.lc = a.lc;
    spec.seed = a.seed;
    spec.x0 = a.x0;
    spec.scale_features = a.scale_features;
    spec.fstar_budget = a.fstar_budget;
    spec
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            return ExitCode::from(if ok { 0 } else { exit::USAGE as u8 });
        }
    };
    let result = match cli.cmd {
        Cmd::Run(a) => cmd_run(&spec_from(a, "run")).map(|s| {
            print!("{s}");
            s.exit_code()
        }),
        Cmd::Verify(a) => {
            let opts = VerifyOptions {
                scope: a.scope,
                seed: a.seed,
                samples: a.samples,
                negative_control: a.negative_control,
            };
            cmd_verify(&opts, &mut std::io::stdout().lock()).map(|(_, code)| code)
        }
        Cmd::Sweep(a) => {
            let task = a.run.task;
            let grid: Vec<LambdaSpec> = if !a.grid_abs.is_empty() {
                a.grid_abs.iter().map(|&v| LambdaSpec::Absolute(v)).collect()
            } else if !a.grid.is_empty() {
                a.grid.iter().map(|&v| LambdaSpec::FracOfL(v)).collect()
            } else {
                default_grid(task).iter().map(|&v| LambdaSpec::FracOfL(v)).collect()
            };
            cmd_sweep(&spec_from(a.run, "sweep"), &grid).map(|idx| {
                for p in &idx.points {
                    match (&p.summary, &p.error) {
                        (Some(s), _) => print!("[{}] {}\n{s}", p.index, p.dir.display()),
                        (None, Some(e)) => println!("[{}] {}: error: {e}", p.index, p.dir.display()),
                        _ => {}
                    }
                }
                idx.exit_code()
            })
        }
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e) as u8)
        }
    }
}
