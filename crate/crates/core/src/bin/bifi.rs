use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use bifi_core::config::{from_overrides, parse_config, Command, Overrides, RunConfig};
use bifi_core::experiments::{convergence_sweep, reference_statistics, run_test};
use bifi_core::fields::ParamVector;
use bifi_core::quadrature::smolyak_grid;
use bifi_core::report::fmt_f64;
use bifi_core::solvers::{hf_solve_with_info, lf_solve_with_info, profile_csv};
use bifi_core::{selftest, Error};

#[derive(Parser)]
#[command(
    name = "bifi",
    version,
    about = "Bi-fidelity collocation for multiscale linear transport"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Full pipeline for one preset at its n
    RunTest,
    /// Convergence table over --n-list
    Sweep,
    /// One kinetic solve at --z (default: origin)
    SolveHf,
    /// One two-velocity solve at --z (default: origin)
    SolveLf,
    /// Sparse-grid reference mean and std
    Reference,
    /// Known-answer checks
    Selftest,
}

#[derive(Args)]
struct Opts {
    /// TOML run config; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Preset number 1-5
    #[arg(long, global = true)]
    preset: Option<i64>,
    /// Constant Knudsen number
    #[arg(long, global = true, allow_negative_numbers = true)]
    epsilon: Option<f64>,
    /// Number of high-fidelity runs
    #[arg(long, global = true, allow_negative_numbers = true)]
    n: Option<i64>,
    /// Comma-separated surrogate sizes for `sweep`
    #[arg(
        long,
        global = true,
        value_delimiter = ',',
        allow_negative_numbers = true
    )]
    n_list: Option<Vec<i64>>,
    /// Candidate-set size
    #[arg(long, global = true, allow_negative_numbers = true)]
    candidates: Option<i64>,
    /// Candidate sampling seed
    #[arg(long, global = true, allow_negative_numbers = true)]
    seed: Option<i64>,
    /// Report directory
    #[arg(long, global = true)]
    out: Option<String>,
    /// Worker threads (default: all cores)
    #[arg(
        long,
        global = true,
        env = "BIFI_WORKERS",
        allow_negative_numbers = true
    )]
    workers: Option<i64>,
    /// Scattering multiplier of the two-velocity model
    #[arg(long, global = true, allow_negative_numbers = true)]
    lf_sigma_scale: Option<f64>,
    /// Comma-separated parameter point for the solve commands
    #[arg(
        long,
        global = true,
        value_delimiter = ',',
        allow_negative_numbers = true
    )]
    z: Option<Vec<f64>>,
    /// Print the canonical config and exit
    #[arg(long, global = true)]
    print_config: bool,
}

fn command_of(c: Cmd) -> Command {
    match c {
        Cmd::RunTest => Command::RunTest,
        Cmd::Sweep => Command::Sweep,
        Cmd::SolveHf => Command::SolveHf,
        Cmd::SolveLf => Command::SolveLf,
        Cmd::Reference => Command::Reference,
        Cmd::Selftest => Command::Selftest,
    }
}

fn load(cli: &Cli) -> bifi_core::Result<RunConfig> {
    let o = &cli.opts;
    let overrides = Overrides {
        command: Some(command_of(cli.command)),
        preset: o.preset,
        epsilon: o.epsilon,
        n: o.n,
        n_list: o.n_list.clone(),
        candidates: o.candidates,
        seed: o.seed,
        lf_sigma_scale: o.lf_sigma_scale,
        z: o.z.clone(),
        out: o.out.clone(),
        workers: o.workers,
    };
    match &o.config {
        Some(path) => {
            let src = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            parse_config(&src, &overrides)
        }
        None => from_overrides(&overrides),
    }
}

fn execute(cfg: &RunConfig) -> bifi_core::Result<()> {
    let p = &cfg.preset;
    let echo = cfg.canonical();
    match cfg.command {
        Command::RunTest | Command::Sweep => {
            let rep = if cfg.command == Command::RunTest {
                run_test(p)?
            } else {
                convergence_sweep(p, &cfg.n_list)?
            };
            rep.write(&cfg.out, &echo)?;
            print!("{}", rep.summary());
            println!("report written to {}", cfg.out.display());
        }
        Command::SolveHf | Command::SolveLf => {
            let z = cfg
                .z
                .clone()
                .unwrap_or_else(|| ParamVector::zeros(p.dimension));
            let hf = cfg.command == Command::SolveHf;
            let t = Instant::now();
            let (u, info, grid, name) = if hf {
                let c = p.hf_config()?;
                let (u, info) = hf_solve_with_info(&c, &z, &p.initial)?;
                (u, info, c.grid, "rbar")
            } else {
                let c = p.lf_config()?;
                let (u, info) = lf_solve_with_info(&c, &z, &p.initial)?;
                (u, info, c.grid, "rho")
            };
            std::fs::create_dir_all(&cfg.out)?;
            std::fs::write(cfg.out.join("config.echo"), &echo)?;
            std::fs::write(cfg.out.join("profile.csv"), profile_csv(&grid, &u, name))?;
            println!(
                "{} steps x {} substeps (bound {:.3e}) in {:.3} s",
                info.steps,
                info.substeps,
                info.bound,
                t.elapsed().as_secs_f64()
            );
        }
        Command::Reference => {
            let grid = smolyak_grid(p.dimension, p.sparse_level)?;
            let (mean, std) = reference_statistics(p, &grid)?;
            let x = p.hf_config()?.grid.centers();
            let mut csv = String::from("x,mean,std\n");
            for i in 0..x.len() {
                csv.push_str(&format!(
                    "{},{},{}\n",
                    fmt_f64(x[i]),
                    fmt_f64(mean[i]),
                    fmt_f64(std[i])
                ));
            }
            std::fs::create_dir_all(&cfg.out)?;
            std::fs::write(cfg.out.join("config.echo"), &echo)?;
            std::fs::write(cfg.out.join("reference.csv"), csv)?;
            println!(
                "{} sparse nodes, written to {}",
                grid.len(),
                cfg.out.display()
            );
        }
        Command::Selftest => unreachable!("handled in main"),
    }
    Ok(())
}

fn selftest_main() -> ExitCode {
    let outcomes = selftest::run();
    let mut failed = 0;
    for o in &outcomes {
        match &o.error {
            None => println!("ok    {}", o.name),
            Some(e) => {
                failed += 1;
                println!("FAIL  {}: {e}", o.name);
            }
        }
    }
    println!("{} passed, {failed} failed", outcomes.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if cli.opts.print_config {
        print!("{}", cfg.canonical());
        return ExitCode::SUCCESS;
    }
    if cfg.command == Command::Selftest {
        return selftest_main();
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        pool = pool.num_threads(w);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: worker pool: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| execute(&cfg)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_scientific_failure() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
