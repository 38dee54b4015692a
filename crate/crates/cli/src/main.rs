use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use brownheat::config::Snapshot;
use brownheat::figures::{reproduce, FigureId, ISO_ERROR_THETAS};
use brownheat::metrics::{map_seeds, run_error, ErrorReport};
use brownheat::output::{
    write_density, write_diagnostics, write_iso_error, write_sweep_summary, write_trajectories,
};
use brownheat::sim::preflight;
use brownheat::{
    iso_error_search, run, BoundaryCondition, FieldInit, IsoErrorSearch, Mode, Result, RunConfig,
    RunResult,
};
use clap::{Args, Parser, Subcommand};
use log::info;

#[derive(Parser)]
#[command(
    name = "brownheat",
    version,
    about = "Blended Brownian-particle and heat-equation solvers in 1D"
)]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation per seed and write its data files.
    Run(ConfigArgs),
    /// Seed-averaged errors over a grid of weights and particle counts.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Weights to sweep.
        #[arg(long, value_delimiter = ',', required = true)]
        thetas: Vec<f64>,
        /// Particle counts to sweep.
        #[arg(long, value_delimiter = ',', required = true)]
        particles: Vec<usize>,
    },
    /// Particle count needed by the particle-corrected heat equation to reach a target error.
    IsoError {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Weights to search; defaults to 0.2, 0.4, 0.6, 0.8, 1.
        #[arg(long, value_delimiter = ',')]
        thetas: Vec<f64>,
    },
    /// Write the data behind a named figure panel (fig1a..fig1d, fig2a..fig2f, fig3a..fig3f).
    Figure {
        id: FigureId,
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Validate a config and report the CFL numbers without running.
    Check(ConfigArgs),
}

#[derive(Args, Debug, Default)]
struct ConfigArgs {
    /// TOML config file; unset fields take their defaults.
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    n_particles: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_seeds: Option<usize>,
    #[arg(long)]
    diffusion: Option<f64>,
    #[arg(long)]
    x_bound: Option<f64>,
    #[arg(long)]
    n_cells: Option<usize>,
    #[arg(long)]
    t_init: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    n_steps: Option<usize>,
    /// `final`, `all` or `every:K`.
    #[arg(long)]
    snapshot: Option<Snapshot>,
    #[arg(short, long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    common_random_numbers: bool,
    #[arg(long)]
    field_init: Option<FieldInit>,
    #[arg(long)]
    boundary: Option<BoundaryCondition>,
    #[arg(long)]
    density_floor: Option<f64>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::parse(&fs::read_to_string(path)?)?,
            None => RunConfig::default(),
        };
        macro_rules! apply {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field.clone() {
                    c.$field = v;
                })*
            };
        }
        apply!(
            mode,
            theta,
            n_particles,
            seed,
            n_seeds,
            diffusion,
            x_bound,
            n_cells,
            t_init,
            t_final,
            n_steps,
            snapshot,
            output_dir,
            field_init,
            boundary,
            density_floor
        );
        c.common_random_numbers |= self.common_random_numbers;
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(long, default_value_t = 0.025)]
    target: f64,
    #[arg(long, default_value_t = 0.002)]
    tolerance: f64,
    /// Seeds per probe.
    #[arg(long, default_value_t = 20)]
    search_seeds: usize,
    #[arg(long, default_value_t = 1)]
    min_particles: usize,
    #[arg(long, default_value_t = 1 << 20)]
    max_particles: usize,
}

impl SearchArgs {
    fn search(&self, seed_base: u64) -> IsoErrorSearch {
        IsoErrorSearch {
            target: self.target,
            tolerance: self.tolerance,
            n_seeds: self.search_seeds,
            seed_base,
            min_particles: self.min_particles,
            max_particles: self.max_particles,
        }
    }
}

fn announce(config: &RunConfig) {
    println!("# resolved config");
    print!("{}", config.render());
    let seeds: Vec<String> = config.seeds().map(|s| s.to_string()).collect();
    println!("# seeds: {}", seeds.join(" "));
}

/// Writes every file a run supports into `dir`.
fn write_run(config: &RunConfig, result: &RunResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.toml"), config.render())?;
    write_density(&dir.join("density.csv"), result)?;
    write_diagnostics(&dir.join("diagnostics.csv"), result)?;
    if !result.trajectories.is_empty() {
        write_trajectories(&dir.join("trajectories.csv"), result)?;
    }
    Ok(())
}

/// Runs every configured seed, writing into `dir` for a single seed and
/// `dir/seed-<s>` otherwise. Returns the final errors in seed order.
fn run_seeds(config: &RunConfig, dir: &Path) -> Result<Vec<f64>> {
    let grid = config.grid()?;
    let params = config.sim_params();
    preflight(&params, &grid)?;
    let single = config.n_seeds == 1;
    map_seeds(&params, config.n_seeds, config.seed, |p| {
        let result = run(p, &grid, config.snapshot.0)?;
        let run_dir = if single {
            dir.to_path_buf()
        } else {
            dir.join(format!("seed-{}", p.seed))
        };
        let per_seed = RunConfig {
            seed: p.seed,
            n_seeds: 1,
            output_dir: run_dir.clone(),
            ..config.clone()
        };
        write_run(&per_seed, &result, &run_dir)?;
        run_error(&result)
    })
}

fn cmd_run(args: &ConfigArgs) -> Result<()> {
    let config = args.resolve()?;
    announce(&config);
    let errors = run_seeds(&config, &config.output_dir)?;
    for (seed, e) in config.seeds().zip(&errors) {
        println!("seed {seed}: E1 = {e:.6e}");
    }
    if errors.len() > 1 {
        let r = ErrorReport::from_samples(errors);
        println!("mean E1 = {:.6e} +- {:.2e}", r.mean, r.standard_error);
    }
    println!("wrote {}", config.output_dir.display());
    Ok(())
}

fn cmd_sweep(args: &ConfigArgs, thetas: &[f64], particles: &[usize]) -> Result<()> {
    let base = args.resolve()?;
    announce(&base);
    let mut rows = Vec::new();
    for &theta in thetas {
        for &n in particles {
            let config = RunConfig {
                theta,
                n_particles: n,
                ..base.clone()
            };
            config.validate()?;
            let dir = base.output_dir.join(format!("theta-{theta}_np-{n}"));
            let report = ErrorReport::from_samples(run_seeds(&config, &dir)?);
            println!(
                "theta {theta} N_p {n}: E1 = {:.6e} +- {:.2e}",
                report.mean, report.standard_error
            );
            rows.push((theta, n, report));
        }
    }
    let summary = base.output_dir.join("summary.csv");
    write_sweep_summary(&summary, &rows)?;
    println!("wrote {}", summary.display());
    Ok(())
}

fn cmd_iso_error(args: &ConfigArgs, search: &SearchArgs, thetas: &[f64]) -> Result<()> {
    let config = args.resolve()?;
    announce(&config);
    let grid = config.grid()?;
    let search = search.search(config.seed);
    let thetas = if thetas.is_empty() {
        ISO_ERROR_THETAS.to_vec()
    } else {
        thetas.to_vec()
    };
    let mut points = Vec::new();
    let mut failure = None;
    for theta in thetas {
        match iso_error_search(theta, &search, &grid, config.diffusion) {
            Ok(p) => {
                println!(
                    "theta {theta}: N_p = {} (E1 = {:.5} +- {:.5})",
                    p.n_particles_required, p.achieved_error, p.standard_error
                );
                points.push(p);
            }
            Err(e) => {
                eprintln!("theta {theta}: {e}");
                failure.get_or_insert(e);
            }
        }
    }
    fs::create_dir_all(&config.output_dir)?;
    let path = config.output_dir.join("iso_error.csv");
    write_iso_error(&path, &points)?;
    println!("wrote {}", path.display());
    failure.map_or(Ok(()), Err)
}

fn cmd_figure(id: FigureId, args: &ConfigArgs, search: &SearchArgs) -> Result<()> {
    let base = args.resolve()?;
    match id.config(&base) {
        Some(resolved) => announce(&resolved),
        None => announce(&base),
    }
    let dir = base.output_dir.join(id.name());
    for file in reproduce(id, &base, &search.search(base.seed), &dir)? {
        println!("wrote {}", file.display());
    }
    Ok(())
}

fn cmd_check(args: &ConfigArgs) -> Result<()> {
    let config = args.resolve()?;
    announce(&config);
    let grid = config.grid()?;
    let cfl = preflight(&config.sim_params(), &grid)?;
    println!("dx = {:.6}, dt = {:.6}", grid.dx(), grid.dt());
    println!(
        "D dt / dx^2 = {:.6} ({})",
        cfl.ratio,
        if cfl.satisfied { "ok" } else { "exceeds 1/2" }
    );
    println!(
        "particle step = {:.6} ({})",
        cfl.particle_step,
        if cfl.particle_satisfied {
            "within one cell"
        } else {
            "exceeds one cell"
        }
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let outcome = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep {
            config,
            thetas,
            particles,
        } => cmd_sweep(config, thetas, particles),
        Command::IsoError {
            config,
            search,
            thetas,
        } => cmd_iso_error(config, search, thetas),
        Command::Figure { id, config, search } => cmd_figure(*id, config, search),
        Command::Check(args) => cmd_check(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            info!("failed: {e:?}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
