//! `idslab`: configuration-driven experiments on long-range percolation
//! spectra. Every run writes deterministic CSV outputs plus a manifest that
//! embeds the configuration, so identical config and seed reproduce identical
//! bytes regardless of worker count.

use std::path::PathBuf;
use std::process::ExitCode;

use idslab_cli::config::ExperimentConfig;
use idslab_cli::runner::{resolve_seed, resolve_trials, run, RunContext};

const USAGE: &str = "\
usage: idslab <subcommand> --config <path> --out <dir> [--seed <u64>] [--trials <n>]

subcommands:
  sample     sample one window configuration and write its edge list
  ids        normalized eigenvalue counting functions along the box sequence
  periodic   frequency-weighted tile approximation (exact or Monte Carlo)
  freq       empirical pattern frequencies against the product formulas
  bernstein  Monte Carlo validation of the tail and bad-event bounds
  atoms      jump detection against small-graph Laplacian eigenvalues
  budget     finite-scale error budget for window-vs-tile agreement
  wset       eigenvalues of all graphs on up to [wset] max_vertices vertices

environment:
  IDSLAB_THREADS  worker count (affects wall time only, never output bytes)
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() || args[0] == "--help" || args[0] == "-h" {
        print!("{USAGE}");
        return ExitCode::SUCCESS;
    }
    match run_cli(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("idslab: {e}");
            if e.is_capability() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn run_cli(args: &[String]) -> idslab_core::Result<()> {
    let command = args[0].clone();
    let mut config_path: Option<PathBuf> = None;
    let mut out_dir: Option<PathBuf> = None;
    let mut seed_flag: Option<u64> = None;
    let mut trials_flag: Option<u64> = None;
    let mut it = args[1..].iter();
    while let Some(arg) = it.next() {
        let mut grab = |name: &str| -> idslab_core::Result<String> {
            it.next()
                .cloned()
                .ok_or_else(|| idslab_core::Error::Config(format!("{name} needs a value")))
        };
        match arg.as_str() {
            "--config" | "-c" => config_path = Some(PathBuf::from(grab("--config")?)),
            "--out" | "-o" => out_dir = Some(PathBuf::from(grab("--out")?)),
            "--seed" => {
                seed_flag = Some(grab("--seed")?.parse().map_err(|_| {
                    idslab_core::Error::Config("--seed must be an unsigned integer".into())
                })?)
            }
            "--trials" => {
                trials_flag = Some(grab("--trials")?.parse().map_err(|_| {
                    idslab_core::Error::Config("--trials must be an unsigned integer".into())
                })?)
            }
            other => {
                return Err(idslab_core::Error::Config(format!("unknown flag `{other}`")));
            }
        }
    }
    let config_path =
        config_path.ok_or_else(|| idslab_core::Error::Config("--config is required".into()))?;
    let out_dir = out_dir.ok_or_else(|| idslab_core::Error::Config("--out is required".into()))?;

    if let Ok(threads) = std::env::var("IDSLAB_THREADS") {
        let n: usize = threads.parse().map_err(|_| {
            idslab_core::Error::Config("IDSLAB_THREADS must be a worker count".into())
        })?;
        idslab_core::par::configure_threads(n);
    }

    let cfg = ExperimentConfig::load(&config_path)?;
    let ctx = RunContext {
        command,
        seed: resolve_seed(&cfg, seed_flag)?,
        trials: resolve_trials(&cfg, trials_flag)?,
        cfg,
    };
    let files = run(&ctx)?;
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| idslab_core::Error::Config(format!("cannot create {}: {e}", out_dir.display())))?;
    for (name, content) in files {
        let path = out_dir.join(&name);
        std::fs::write(&path, content)
            .map_err(|e| idslab_core::Error::Config(format!("cannot write {}: {e}", path.display())))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
