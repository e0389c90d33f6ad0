use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};

use nbv_core::grid_map::MapImage;
use nbv_core::harness::{
    self, episode_csv, parse_episode_csv, plans_csv, render_map, run_campaign, CampaignSpec,
    Settings,
};
use nbv_core::sim::{initial_scan, run_episode_with_map};
use nbv_core::world::generate_maze;
use nbv_core::{Strategy, World};

#[derive(Parser)]
#[command(name = "nbv", version, about = "2D sampling-based exploration simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single episode.
    Run {
        /// World file, or `maze20` for the bundled maze.
        #[arg(long)]
        world: String,
        #[arg(long, default_value = "ours")]
        strategy: Strategy,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Simulated time budget (s); overrides the config file.
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Settings file (`key = value`).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write the first lidar scan as `bearing range hit` lines.
        #[arg(long)]
        scan_dump: Option<PathBuf>,
    },
    /// Run a batch of episodes and write statistics.
    Campaign {
        #[arg(long)]
        spec: PathBuf,
        /// Overrides `output_dir` from the spec.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run episodes one after another.
        #[arg(long)]
        sequential: bool,
    },
    /// Draw an episode CSV over a saved map.
    Render {
        #[arg(long)]
        log: PathBuf,
        /// Graymap written by `run` (with its yaml sidecar).
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a random maze world file.
    Genmaze {
        /// Side length (m).
        #[arg(long)]
        size: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        resolution: f64,
        /// Corridor width (m).
        #[arg(long, default_value_t = 4.0)]
        corridor: f64,
    },
}

/// Input problems exit with 1, failures while running with 2.
enum Failure {
    Validation(anyhow::Error),
    Runtime(anyhow::Error),
}

trait Classify<T> {
    fn invalid(self) -> Result<T, Failure>;
    fn runtime(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn invalid(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Validation(e.into()))
    }

    fn runtime(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Runtime(e.into()))
    }
}

fn load_world(spec: &str) -> anyhow::Result<World> {
    if spec == "maze20" {
        return Ok(World::maze20());
    }
    World::load(Path::new(spec)).with_context(|| format!("cannot load world '{spec}'"))
}

fn run(
    world: &str,
    strategy: Strategy,
    seed: u64,
    budget: Option<f64>,
    out: &Path,
    config: Option<&Path>,
    scan_dump: Option<&Path>,
) -> Result<(), Failure> {
    let world = Arc::new(load_world(world).invalid()?);
    let mut settings = match config {
        Some(p) => Settings::load(p)
            .with_context(|| format!("bad config {}", p.display()))
            .invalid()?,
        None => Settings::default(),
    };
    if let Some(b) = budget {
        settings.time_budget_s = b;
    }
    let cfg = settings.episode(world, strategy, seed);
    cfg.validate().invalid()?;
    if cfg.world.is_solid(cfg.start_pose().position()) {
        return Err(Failure::Validation(anyhow!("start pose lies in a wall")));
    }

    let (log, map) = run_episode_with_map(&cfg).runtime()?;
    fs::create_dir_all(out)
        .with_context(|| format!("cannot create {}", out.display()))
        .runtime()?;
    let write = |name: &str, text: &str| {
        fs::write(out.join(name), text).with_context(|| format!("cannot write {name}"))
    };
    write("episode.csv", &episode_csv(&log)).runtime()?;
    write("plans.csv", &plans_csv(&log)).runtime()?;
    if let Some(tree) = &log.last_tree {
        write("tree.txt", &tree.tree_text()).runtime()?;
    }
    map.export_pgm(&out.join("map.pgm")).runtime()?;
    render_map(&MapImage::from_map(&map), &log.records, &out.join("map.png")).runtime()?;
    if let Some(p) = scan_dump {
        let scan = initial_scan(&cfg).runtime()?;
        fs::write(p, scan.dump())
            .with_context(|| format!("cannot write {}", p.display()))
            .runtime()?;
    }
    println!(
        "{} seed {seed}: {} after {:.1} s, coverage {:.2}/{:.2} m2, path {:.2} m, compute {:.3} s",
        strategy,
        log.termination,
        log.exec_time_s,
        log.final_coverage(),
        log.free_area_m2,
        log.path_length_m,
        log.compute_time_s
    );
    Ok(())
}

fn campaign(spec_path: &Path, out: Option<PathBuf>, sequential: bool) -> Result<(), Failure> {
    let mut spec = CampaignSpec::load(spec_path)
        .with_context(|| format!("bad campaign spec {}", spec_path.display()))
        .invalid()?;
    if let Some(o) = out {
        spec.output_dir = o;
    }
    if sequential {
        spec.parallel = false;
    }
    let worlds = spec.world.load().invalid()?;
    spec.validate(&worlds).invalid()?;
    let res = run_campaign(&spec).runtime()?;
    print!("{}", harness::stats::stats_table(&res.rows));
    println!("wrote {}", res.stats_path.display());
    Ok(())
}

fn render(log: &Path, map: &Path, out: &Path) -> Result<(), Failure> {
    let text = fs::read_to_string(log)
        .with_context(|| format!("cannot read {}", log.display()))
        .invalid()?;
    let records = parse_episode_csv(&text).invalid()?;
    let image = MapImage::load(map).invalid()?;
    render_map(&image, &records, out).runtime()
}

fn genmaze(size: f64, seed: u64, out: &Path, resolution: f64, corridor: f64) -> Result<(), Failure> {
    let world = generate_maze(size, size, resolution, corridor, seed).invalid()?;
    world.save(out).runtime()?;
    println!("{}: {:.2} m2 free", out.display(), world.free_area_m2());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Run {
            world,
            strategy,
            seed,
            budget,
            out,
            config,
            scan_dump,
        } => run(
            &world,
            strategy,
            seed,
            budget,
            &out,
            config.as_deref(),
            scan_dump.as_deref(),
        ),
        Command::Campaign {
            spec,
            out,
            sequential,
        } => campaign(&spec, out, sequential),
        Command::Render { log, map, out } => render(&log, &map, &out),
        Command::Genmaze {
            size,
            seed,
            out,
            resolution,
            corridor,
        } => genmaze(size, seed, &out, resolution, corridor),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
