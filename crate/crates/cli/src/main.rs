//! `uavsense` command-line driver.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use uavsense::exec::Exec;
use uavsense::experiments::{
    export_maps, run_sweep, write_csv, Preset, RunManifest, SimConfig, SweepSpec,
};
use uavsense::geometry::GridKind;
use uavsense::overhead::{render_table, reported_cells, OverheadConfig};
use uavsense::validation::run_all;
use uavsense::Error;

#[derive(Parser)]
#[command(name = "uavsense", version, about = "Multi-UAV distributed OFDM sensing simulator")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "UAVSENSE_OUT", default_value = "uavsense-out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo run or parameter sweep; writes results.csv.
    Simulate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Sweep such as `U=1,4,9,16`; parameters U, N, h, d.
        #[arg(long)]
        sweep: Option<String>,
    },
    /// Writes the RCS maps of one trial.
    Maps {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 0)]
        trial: usize,
        /// Grid kind; defaults to the first configured one.
        #[arg(long)]
        grid: Option<GridKind>,
    },
    /// Uplink overhead per fusion method.
    Overhead {
        #[arg(long = "P")]
        cells: u64,
        #[arg(long = "U")]
        uavs: u64,
        #[arg(long = "Ms", default_value_t = 16)]
        symbols: u64,
        #[arg(long = "Nc", default_value_t = 64)]
        subcarriers: u64,
        #[arg(long = "N", default_value_t = 16)]
        elements: u64,
        /// Exclude each UAV's own cells, `ceil(P / U)`, from its report.
        #[arg(long)]
        own_cells: bool,
    },
    /// Runs the oracle self-checks.
    Validate {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// Named preset the configuration starts from.
    #[arg(long, default_value = "desk")]
    preset: String,
    /// TOML configuration file; replaces the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override as `section.key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    /// Run everything on the calling thread.
    #[arg(long)]
    sequential: bool,
}

impl ConfigArgs {
    fn resolve(&self) -> uavsense::Result<SimConfig> {
        let mut cfg = match &self.config {
            Some(path) => SimConfig::load(path)?,
            None => SimConfig::preset(self.preset.parse::<Preset>()?),
        };
        for o in &self.overrides {
            cfg.set(o)?;
        }
        if let Some(s) = self.seed {
            cfg.run.seed = s;
        }
        if let Some(t) = self.trials {
            cfg.run.trials = t;
        }
        if let Some(w) = self.workers {
            cfg.run.workers = w;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn exec(&self) -> Exec {
        if self.sequential {
            Exec::Sequential
        } else {
            Exec::Parallel
        }
    }
}

fn simulate(
    config: &ConfigArgs,
    sweep: Option<&str>,
    out: &Path,
    manifest: &mut RunManifest,
) -> uavsense::Result<()> {
    let cfg = config.resolve()?;
    manifest.with_config(&cfg);
    let sweep = sweep.map(str::parse::<SweepSpec>).transpose()?;
    let result = run_sweep(&cfg, sweep.as_ref(), config.exec(), &|done, total| {
        eprintln!("point {done}/{total} done");
    })?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let csv = out.join("results.csv");
    write_csv(&csv, &result.rows)?;
    manifest.outputs.push(csv.display().to_string());
    println!("wrote {} rows to {}", result.rows.len(), csv.display());
    Ok(())
}

fn maps(
    config: &ConfigArgs,
    trial: usize,
    grid: Option<GridKind>,
    out: &Path,
    manifest: &mut RunManifest,
) -> uavsense::Result<()> {
    let cfg = config.resolve()?;
    manifest.with_config(&cfg);
    let kind = grid.unwrap_or(cfg.run.grids[0]);
    let dir = out.join("maps");
    let files = export_maps(&cfg, kind, trial, &dir, config.exec())?;
    for f in &files {
        println!("{}", f.display());
        manifest.outputs.push(f.display().to_string());
    }
    Ok(())
}

fn overhead(cfg: OverheadConfig, own_cells: bool, out: &Path, manifest: &mut RunManifest) -> uavsense::Result<()> {
    let own = own_cells.then(|| cfg.cells.div_ceil(cfg.uavs.max(1)));
    let cfg = OverheadConfig {
        cells: reported_cells(cfg.cells, own),
        ..cfg
    };
    let table = render_table(cfg)?;
    print!("{table}");
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let path = out.join("overhead.txt");
    std::fs::write(&path, &table).map_err(|e| Error::io(&path, e))?;
    manifest.outputs.push(path.display().to_string());
    Ok(())
}

fn validate(seed: u64, manifest: &mut RunManifest) -> uavsense::Result<bool> {
    manifest.seed = Some(seed);
    let checks = run_all(seed)?;
    for c in &checks {
        println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(checks.iter().all(|c| c.passed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut manifest = RunManifest::new(std::env::args().collect());
    let outcome = match &cli.command {
        Command::Simulate { config, sweep } => {
            simulate(config, sweep.as_deref(), &cli.out, &mut manifest).map(|_| true)
        }
        Command::Maps { config, trial, grid } => {
            maps(config, *trial, *grid, &cli.out, &mut manifest).map(|_| true)
        }
        Command::Overhead {
            cells,
            uavs,
            symbols,
            subcarriers,
            elements,
            own_cells,
        } => {
            let cfg = OverheadConfig {
                cells: *cells,
                uavs: *uavs,
                symbols: *symbols,
                subcarriers: *subcarriers,
                elements: *elements,
            };
            overhead(cfg, *own_cells, &cli.out, &mut manifest).map(|_| true)
        }
        Command::Validate { seed } => validate(*seed, &mut manifest),
    };
    let code = match &outcome {
        Ok(true) => {
            manifest.status = "ok".into();
            ExitCode::SUCCESS
        }
        Ok(false) => {
            manifest.status = "checks failed".into();
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            manifest.status = "error".into();
            manifest.error = Some(e.to_string());
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    };
    if let Err(e) = manifest.write(&cli.out) {
        eprintln!("error: could not write manifest: {e}");
        return ExitCode::from(1);
    }
    code
}
