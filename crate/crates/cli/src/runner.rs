//! Subcommand implementations: each one resolves the configuration, runs the
//! experiment, and returns deterministic `(filename, bytes)` pairs plus a
//! manifest. Nothing here depends on wall time, paths, or worker count.

use idslab_core::concentration::{validate_tails, TailValidationConfig};
use idslab_core::estimator::{
    detect_atoms, empirical_ids, enumerate_w, error_budget, freq_gap_sum, periodic_approximation,
    schedule_delta, IdsRunConfig, PeriodicMode,
};
use idslab_core::frequencies::{FrequencyMode, FrequencyRunConfig};
use idslab_core::percolation::{long_edge_census, sample_window, PercolationModel};
use idslab_core::spectral::{fmt_f64, restricted_laplacian, count_function, StepFunction};
use idslab_core::{Error, Result};

use crate::config::ExperimentConfig;
use crate::manifest::{config_hash, Manifest};

pub struct RunContext {
    pub command: String,
    pub cfg: ExperimentConfig,
    pub seed: u64,
    pub trials: u64,
}

pub fn resolve_seed(cfg: &ExperimentConfig, flag: Option<u64>) -> Result<u64> {
    match flag {
        Some(s) => Ok(s),
        None => cfg.get_u64("run", "seed", 1),
    }
}

pub fn resolve_trials(cfg: &ExperimentConfig, flag: Option<u64>) -> Result<u64> {
    match flag {
        Some(t) => Ok(t),
        None => cfg.get_u64("run", "trials", 10_000),
    }
}

pub fn run(ctx: &RunContext) -> Result<Vec<(String, String)>> {
    match ctx.command.as_str() {
        "sample" => run_sample(ctx),
        "ids" => run_ids(ctx),
        "periodic" => run_periodic(ctx),
        "freq" => run_freq(ctx),
        "bernstein" => run_bernstein(ctx),
        "atoms" => run_atoms(ctx),
        "budget" => run_budget(ctx),
        "wset" => run_wset(ctx),
        other => Err(Error::Config(format!(
            "unknown subcommand `{other}` (expected sample | ids | periodic | freq | bernstein | atoms | budget | wset)"
        ))),
    }
}

struct Shared {
    model: PercolationModel,
    dim: usize,
    r_max: u32,
    window_count: usize,
    boxes: idslab_core::lattice::FolnerBoxes,
    count_cfg: idslab_core::spectral::CountConfig,
}

fn shared(cfg: &ExperimentConfig) -> Result<Shared> {
    let group = cfg.group()?;
    let dim = group.dim();
    Ok(Shared {
        model: cfg.model(group)?,
        dim,
        r_max: cfg.get_u32("run", "rmax", 16)?,
        window_count: cfg.get_usize("boxes", "count", 4)?,
        boxes: cfg.boxes()?,
        count_cfg: cfg.count_config()?,
    })
}

fn base_manifest(ctx: &RunContext, sh: &Shared) -> Result<Manifest> {
    let mut m = Manifest::new();
    m.field_str("command", &ctx.command)
        .field_u64("seed", ctx.seed)
        .field_str("config_hash", &config_hash(&ctx.cfg.text))
        .field_u64("dimension", sh.dim as u64)
        .field_str("profile", &ctx.cfg.get_str("model", "profile", ""))
        .field_f64("tail_tol", sh.model.tail_tol())
        .field_u64("truncation_radius", sh.r_max as u64)
        .field_f64("epsilon_at_truncation", sh.model.epsilon_upper(sh.r_max)?)
        .field_u64("dense_cutoff", sh.count_cfg.dense_cutoff as u64)
        .field_f64("bisect_tol", sh.count_cfg.bisect_tol)
        .field_f64("multiplicity_tol", sh.count_cfg.multiplicity_tol);
    Ok(m)
}

fn finish(
    mut manifest: Manifest,
    ctx: &RunContext,
    mut files: Vec<(String, String)>,
) -> Vec<(String, String)> {
    let names: Vec<String> = files.iter().map(|(n, _)| n.clone()).collect();
    manifest.field_str_list("outputs", &names);
    manifest.field_str("config_text", &ctx.cfg.text);
    files.push(("manifest.json".into(), manifest.finish()));
    files
}

fn run_sample(ctx: &RunContext) -> Result<Vec<(String, String)>> {
    let sh = shared(&ctx.cfg)?;
    let q = sh.boxes.box_set(sh.dim, sh.window_count)?;
    let w = sample_window(ctx.seed, &sh.model, &q, sh.r_max)?;
    let ext = w.extended();
    let mut csv = format!(
        "# seed={} rmax={} window=box:d{}:s{}\n",
        ctx.seed,
        sh.r_max,
        sh.dim,
        sh.boxes.side(sh.window_count)
    );
    for (i, j) in w.edges() {
        let a = ext.points()[i as usize];
        let b = ext.points()[j as usize];
        csv.push_str(&format!("{};{}\n", a.render(sh.dim), b.render(sh.dim)));
    }
    let mut manifest = base_manifest(ctx, &sh)?;
    manifest
        .field_u64("window_size", q.len() as u64)
        .field_u64("edge_count", w.edge_count() as u64)
        .field_f64("bias_certificate", w.bias_certificate());
    Ok(finish(manifest, ctx, vec![("edges.csv".into(), csv)]))
}

fn run_ids(ctx: &RunContext) -> Result<Vec<(String, String)>> {
    let sh = shared(&ctx.cfg)?;
    let run = empirical_ids(
        ctx.seed,
        &sh.model,
        &sh.boxes,
        &IdsRunConfig {
            r_max: sh.r_max,
            window_count: sh.window_count,
            count: sh.count_cfg.clone(),
            compare_tol: 1e-8,
            parallel: true,
        },
    )?;
    let mut files = Vec::new();
    for (side, f) in run.window_sides.iter().zip(&run.normalized) {
        files.push((format!("window_{side}.csv"), f.to_csv()));
    }
    let mut distances = String::from("from_side,to_side,sup_distance\n");
    for (i, d) in run.consecutive_distances.iter().enumerate() {
        distances.push_str(&format!(
            "{},{},{}\n",
            run.window_sides[i],
            run.window_sides[i + 1],
            fmt_f64(*d)
        ));
    }
    files.push(("distances.csv".into(), distances));
    let mut manifest = base_manifest(ctx, &sh)?;
    let sides: Vec<f64> = run.window_sides.iter().map(|s| *s as f64).collect();
    manifest
        .field_f64_list("window_sides", &sides)
        .field_f64_list("bias_certificates", &run.bias_certificates)
        .field_f64_list("consecutive_distances", &run.consecutive_distances);
    Ok(finish(manifest, ctx, files))
}

fn run_periodic(ctx: &RunContext) -> Result<Vec<(String, String)>> {
    let sh = shared(&ctx.cfg)?;
    let tile = ctx.cfg.tile()?;
    let mode_str = ctx.cfg.get_str("tile", "mode", "exact");
    let mode = match mode_str.as_str() {
        "exact" => PeriodicMode::Exact,
        "mc" => PeriodicMode::MonteCarlo {
            samples: ctx.cfg.get_usize("tile", "samples", 10_000)?,
            seed: ctx.seed,
        },
        other => {
            return Err(Error::Config(format!(
                "[tile] mode `{other}` is not one of exact | mc"
            )))
        }
    };
    let approx = periodic_approximation(&sh.model, &tile, mode, &sh.count_cfg, true)?;
    let mut files = vec![("periodic.csv".into(), approx.mean.to_csv())];
    if !approx.ci_half.is_empty() {
        let mut ci = String::from("breakpoint,mean,ci_half\n");
        for (i, b) in approx.mean.breakpoints().iter().enumerate() {
            ci.push_str(&format!(
                "{},{},{}\n",
                fmt_f64(*b),
                fmt_f64(approx.mean.values()[i]),
                fmt_f64(approx.ci_half[i])
            ));
        }
        files.push(("periodic_ci.csv".into(), ci));
    }
    let mut manifest = base_manifest(ctx, &sh)?;
    manifest
        .field_u64("tile_size", tile.len() as u64)
        .field_str("mode", &mode_str)
        .field_u64("samples", approx.samples as u64);
    Ok(finish(manifest, ctx, files))
}

fn run_freq(ctx: &RunContext) -> Result<Vec<(String, String)>> {
    let sh = shared(&ctx.cfg)?;
    let pattern = ctx.cfg.pattern()?;
    let mode = match ctx.cfg.get_str("pattern", "mode", "plain").as_str() {
        "plain" => FrequencyMode::Plain,
        "isolated" => {
            FrequencyMode::Isolated(ctx.cfg.get_u32("pattern", "isolation_radius", 1)?)
        }
        other => {
            return Err(Error::Config(format!(
                "[pattern] mode `{other}` is not one of plain | isolated"
            )))
        }
    };
    let run_cfg = FrequencyRunConfig {
        r_max: sh.r_max,
        window_count: sh.window_count,
        block_side: ctx.cfg.get_i64("pattern", "block_side", 100)?,
        resamples: ctx.cfg.get_usize("pattern", "resamples", 400)?,
        tol: 1e-6,
        parallel: true,
    };
    let rep = idslab_core::frequencies::empirical_frequency(
        ctx.seed, &sh.model, &pattern, mode, &sh.boxes, &run_cfg,
    )?;
    let mut manifest = base_manifest(ctx, &sh)?;
    manifest
        .field_f64("analytic", rep.analytic)
        .field_f64("analytic_error", rep.analytic_error)
        .field_f64("bootstrap_sigma", rep.bootstrap_sigma)
        .field_str("pass_3sigma", if rep.pass_3sigma { "true" } else { "false" })
        .field_f64("truncation_certificate", rep.truncation_certificate);
    Ok(finish(manifest, ctx, vec![("freq.csv".into(), rep.to_csv())]))
}

fn run_bernstein(ctx: &RunContext) -> Result<Vec<(String, String)>> {
    let sh = shared(&ctx.cfg)?;
    let q = sh.boxes.box_set(sh.dim, sh.window_count)?;
    let r = match ctx.cfg.get_u32("census", "r", 0)? {
        0 => sh.model.r_zero()?,
        r => r,
    };
    let (_, tau) = sh.model.moment_constants()?;
    let delta_grid = match ctx.cfg.get_f64_list("census", "delta_grid")? {
        Some(grid) if !grid.is_empty() => grid,
        _ => vec![0.5 / tau, 1.0 / tau, 2.0 / tau, 0.2, 0.4],
    };
    let cfg = TailValidationConfig {
        r,
        r_max: sh.r_max,
        delta_grid,
        trials: ctx.trials,
        y_trials: ctx.trials * 10,
        t_max: ctx.cfg.get_u32("census", "t_max", 8)?,
        parallel: true,
    };
    let rep = validate_tails(ctx.seed, &sh.model, &q, &cfg)?;
    let mut manifest = base_manifest(ctx, &sh)?;
    manifest
        .field_u64("window_size", q.len() as u64)
        .field_u64("census_r", r as u64)
        .field_u64("trials", ctx.trials)
        .field_f64("c", rep.c)
        .field_f64("tau", rep.tau)
        .field_u64("r_zero", rep.r_zero as u64)
        .field_f64("p_zero_empirical", rep.p_zero_empirical)
        .field_f64("p_zero_exact", rep.p_zero_exact)
        .field_str("all_pass", if rep.all_pass() { "true" } else { "false" });
    Ok(finish(
        manifest,
        ctx,
        vec![
            ("omega1.csv".into(), rep.delta_csv()),
            ("ytail.csv".into(), rep.tail_csv()),
        ],
    ))
}

fn run_atoms(ctx: &RunContext) -> Result<Vec<(String, String)>> {
    let sh = shared(&ctx.cfg)?;
    let run = empirical_ids(
        ctx.seed,
        &sh.model,
        &sh.boxes,
        &IdsRunConfig {
            r_max: sh.r_max,
            window_count: sh.window_count,
            count: sh.count_cfg.clone(),
            compare_tol: 1e-8,
            parallel: true,
        },
    )?;
    let f = run.largest();
    let largest = *run.window_sizes.last().unwrap();
    let atom_tol = match ctx.cfg.get_f64("backend", "atom_tol", 0.0)? {
        v if v > 0.0 => v,
        _ => 10.0 / largest as f64,
    };
    let max_vertices = ctx.cfg.get_usize("wset", "max_vertices", 5)?;
    let candidates = enumerate_w(max_vertices, sh.count_cfg.multiplicity_tol, true)?;
    let match_tol = 100.0 * sh.count_cfg.multiplicity_tol;
    let report = detect_atoms(f, &candidates, atom_tol, match_tol);
    let side = *run.window_sides.last().unwrap();
    let files = vec![
        ("atoms.csv".into(), report.to_csv()),
        (format!("window_{side}.csv"), f.to_csv()),
    ];
    let mut manifest = base_manifest(ctx, &sh)?;
    manifest
        .field_u64("window_size", largest as u64)
        .field_f64("atom_tol", atom_tol)
        .field_f64("match_tol", match_tol)
        .field_u64("wset_max_vertices", max_vertices as u64)
        .field_u64("atoms_detected", report.rows.len() as u64);
    Ok(finish(manifest, ctx, files))
}

fn run_budget(ctx: &RunContext) -> Result<Vec<(String, String)>> {
    let sh = shared(&ctx.cfg)?;
    let q = sh.boxes.box_set(sh.dim, sh.window_count)?;
    let tile = ctx.cfg.tile()?;
    let r = match ctx.cfg.get_u32("census", "r", 0)? {
        0 => sh.model.r_zero()?,
        r => r,
    };
    let (_, tau) = sh.model.moment_constants()?;
    let delta = match ctx.cfg.get_f64("census", "delta", 0.0)? {
        v if v > 0.0 => v,
        _ => schedule_delta(tau, sh.window_count),
    };
    let w = sample_window(ctx.seed, &sh.model, &q, sh.r_max)?;
    let census = long_edge_census(&w, &q, r)?;
    let eps = sh.model.epsilon_tail(r)?;
    let census_ok = !census.omega1(eps, delta);
    let gaps = if tile.len() <= 3 {
        Some(freq_gap_sum(&sh.model, &w, &tile, &q)?)
    } else {
        None
    };
    let budget = error_budget(&sh.model, &q, &tile, r, delta, gaps)?;

    // observed distance between the window estimate and the tile approximation
    let window_fn = count_function(&restricted_laplacian(&w, &q)?, &sh.count_cfg)?
        .scale(1.0 / q.len() as f64)?;
    let approx = if tile.len() <= idslab_core::estimator::EXACT_TILE_LIMIT {
        periodic_approximation(&sh.model, &tile, PeriodicMode::Exact, &sh.count_cfg, true)?
    } else {
        periodic_approximation(
            &sh.model,
            &tile,
            PeriodicMode::MonteCarlo {
                samples: ctx.cfg.get_usize("tile", "samples", 10_000)?,
                seed: ctx.seed,
            },
            &sh.count_cfg,
            true,
        )?
    };
    let observed = observed_distance(&window_fn, &approx.mean);

    let mut csv = String::from("term,value\n");
    csv.push_str(&format!("total,{}\n", fmt_f64(budget.total)));
    csv.push_str(&format!("tile_boundary,{}\n", fmt_f64(budget.tile_boundary_term)));
    csv.push_str(&format!("window_boundary,{}\n", fmt_f64(budget.window_boundary_term)));
    csv.push_str(&format!("eps_delta,{}\n", fmt_f64(budget.eps_delta_term)));
    match budget.freq_term {
        Some(v) => csv.push_str(&format!("freq_gap,{}\n", fmt_f64(v))),
        None => csv.push_str("freq_gap_omitted,true\n"),
    }
    csv.push_str(&format!("probability_certificate,{}\n", fmt_f64(budget.probability_certificate)));
    csv.push_str(&format!("census_pass,{census_ok}\n"));
    csv.push_str(&format!("observed_distance,{}\n", fmt_f64(observed)));
    csv.push_str(&format!("within_budget,{}\n", observed <= budget.total));

    let mut manifest = base_manifest(ctx, &sh)?;
    manifest
        .field_u64("window_size", q.len() as u64)
        .field_u64("tile_size", tile.len() as u64)
        .field_u64("census_r", r as u64)
        .field_f64("delta", delta)
        .field_f64("budget_total", budget.total)
        .field_f64("observed_distance", observed)
        .field_str("census_pass", if census_ok { "true" } else { "false" });
    Ok(finish(manifest, ctx, vec![("budget.csv".into(), csv)]))
}

fn observed_distance(window_fn: &StepFunction, tile_fn: &StepFunction) -> f64 {
    window_fn.sup_distance_resolved(tile_fn, 1e-8)
}

fn run_wset(ctx: &RunContext) -> Result<Vec<(String, String)>> {
    let sh = shared(&ctx.cfg)?;
    let max_vertices = ctx.cfg.get_usize("wset", "max_vertices", 5)?;
    let entries = enumerate_w(max_vertices, sh.count_cfg.multiplicity_tol, true)?;
    let mut csv = String::from("energy,witness,ambiguous\n");
    for e in &entries {
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(e.value),
            e.witness_string(),
            e.ambiguous
        ));
    }
    let mut manifest = base_manifest(ctx, &sh)?;
    manifest
        .field_u64("max_vertices", max_vertices as u64)
        .field_u64("distinct_values", entries.len() as u64);
    Ok(finish(manifest, ctx, vec![("wset.csv".into(), csv)]))
}
