//! Integrated density of states estimation along a box sequence, the
//! periodic (frequency-weighted) approximation, its error budget, and atom
//! detection against the eigenvalues of small finite graphs.

use crate::concentration::omega1_bound_with_tau;
use crate::frequencies::{analytic_frequency, count_occurrences, FrequencyMode};
use crate::lattice::{BoundaryKind, FolnerBoxes, VertexSet};
use crate::par;
use crate::percolation::{
    edge_indicator_with_prob, sample_window, stream_seed, PercolationModel, WindowGraph,
};
use crate::spectral::{
    count_function, graph_laplacian, restricted_laplacian, CountConfig, FiniteGraph, StepFunction,
};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct IdsRunConfig {
    pub r_max: u32,
    pub window_count: usize,
    pub count: CountConfig,
    /// Breakpoints closer than this across two windows are treated as the
    /// same spectral location when distances are taken (eigensolver noise is
    /// around 1e-13 at these scales, genuine atoms sit at least 1e-3 apart).
    pub compare_tol: f64,
    pub parallel: bool,
}

impl Default for IdsRunConfig {
    fn default() -> Self {
        IdsRunConfig {
            r_max: 16,
            window_count: 4,
            count: CountConfig::default(),
            compare_tol: 1e-8,
            parallel: true,
        }
    }
}

/// Normalized eigenvalue counting functions of one configuration along a box
/// sequence, with the Cauchy diagnostic between consecutive windows.
#[derive(Clone, Debug)]
pub struct IdsRun {
    pub seed: u64,
    pub window_sides: Vec<i64>,
    pub window_sizes: Vec<usize>,
    pub normalized: Vec<StepFunction>,
    /// `sup |f_j - f_{j+1}|` for consecutive windows.
    pub consecutive_distances: Vec<f64>,
    pub bias_certificates: Vec<f64>,
}

impl IdsRun {
    pub fn largest(&self) -> &StepFunction {
        self.normalized.last().expect("at least one window")
    }
}

/// Sample one configuration on each box of the sequence prefix and normalize
/// its restricted Laplacian's counting function.
pub fn empirical_ids(
    seed: u64,
    m: &PercolationModel,
    boxes: &FolnerBoxes,
    cfg: &IdsRunConfig,
) -> Result<IdsRun> {
    if cfg.window_count == 0 {
        return Err(Error::Config("need at least one window".into()));
    }
    let dim = m.group().dim();
    let per_window: Vec<Result<(StepFunction, usize, f64)>> =
        par::map_range(cfg.window_count, cfg.parallel, |jz| {
            let q = boxes.box_set(dim, jz + 1)?;
            let w = sample_window(seed, m, &q, cfg.r_max)?;
            let lap = restricted_laplacian(&w, &q)?;
            let f = count_function(&lap, &cfg.count)?;
            Ok((f.scale(1.0 / q.len() as f64)?, q.len(), w.bias_certificate()))
        });

    let mut normalized = Vec::with_capacity(cfg.window_count);
    let mut window_sizes = Vec::new();
    let mut bias = Vec::new();
    for item in per_window {
        let (f, size, cert) = item?;
        normalized.push(f);
        window_sizes.push(size);
        bias.push(cert);
    }
    let consecutive_distances = normalized
        .windows(2)
        .map(|w| w[0].sup_distance_resolved(&w[1], cfg.compare_tol))
        .collect();
    Ok(IdsRun {
        seed,
        window_sides: (1..=cfg.window_count).map(|n| boxes.side(n)).collect(),
        window_sizes,
        normalized,
        consecutive_distances,
        bias_certificates: bias,
    })
}

#[derive(Clone, Copy, Debug)]
pub enum PeriodicMode {
    /// Full enumeration of all graphs on the tile with exact product weights.
    Exact,
    /// Independent tile samples of the configuration measure.
    MonteCarlo { samples: usize, seed: u64 },
}

/// The frequency-weighted tile approximation of the IDS.
#[derive(Clone, Debug)]
pub struct PeriodicApprox {
    pub mean: StepFunction,
    /// 95% two-sided CI half-widths aligned with `mean.breakpoints()`;
    /// empty in exact mode.
    pub ci_half: Vec<f64>,
    pub samples: usize,
}

/// Largest tile for which the exact enumeration (`2^(pairs)` graphs) is
/// offered.
pub const EXACT_TILE_LIMIT: usize = 4;

pub fn periodic_approximation(
    m: &PercolationModel,
    tile: &VertexSet,
    mode: PeriodicMode,
    count_cfg: &CountConfig,
    parallel: bool,
) -> Result<PeriodicApprox> {
    if tile.is_empty() {
        return Err(Error::Config("tile is empty".into()));
    }
    let group = m.group();
    let k = tile.len();
    let pairs = FiniteGraph::pair_list(k);
    let mut pair_probs = Vec::with_capacity(pairs.len());
    for &(i, j) in &pairs {
        let d = group.word_distance(&tile.points()[i as usize], &tile.points()[j as usize])?;
        pair_probs.push(m.p_at(d));
    }

    match mode {
        PeriodicMode::Exact => {
            if k > EXACT_TILE_LIMIT {
                return Err(Error::Capability(format!(
                    "exact enumeration is limited to tiles of at most {EXACT_TILE_LIMIT} vertices, got {k}"
                )));
            }
            let mut weighted: Vec<(f64, StepFunction)> = Vec::new();
            for mask in 0u64..(1 << pairs.len()) {
                let mut weight = 1.0f64;
                for (b, &p) in pair_probs.iter().enumerate() {
                    weight *= if mask >> b & 1 == 1 { p } else { 1.0 - p };
                }
                if weight == 0.0 {
                    continue;
                }
                let s = FiniteGraph::from_mask(tile, &pairs, mask);
                weighted.push((weight, count_function(&graph_laplacian(&s), count_cfg)?));
            }
            let refs: Vec<(f64, &StepFunction)> =
                weighted.iter().map(|(w, f)| (*w, f)).collect();
            let mean = StepFunction::weighted_sum(&refs)?.scale(1.0 / k as f64)?;
            Ok(PeriodicApprox { mean, ci_half: Vec::new(), samples: 0 })
        }
        PeriodicMode::MonteCarlo { samples, seed } => {
            if samples < 100 {
                return Err(Error::Config(format!(
                    "Monte Carlo tile approximation needs at least 100 samples, got {samples}"
                )));
            }
            let dim = group.dim();
            let fns: Vec<Result<StepFunction>> = par::map_range(samples, parallel, |i| {
                let s_seed = stream_seed(seed, i as u64);
                let mut edges = Vec::new();
                for (b, &(pi, pj)) in pairs.iter().enumerate() {
                    let x = tile.points()[pi as usize];
                    let y = tile.points()[pj as usize];
                    if edge_indicator_with_prob(s_seed, &x, &y, dim, pair_probs[b]) {
                        edges.push((pi, pj));
                    }
                }
                let s = FiniteGraph::from_index_edges(tile.clone(), &edges)?;
                count_function(&graph_laplacian(&s), count_cfg)
            });
            let mut sampled = Vec::with_capacity(samples);
            for f in fns {
                sampled.push(f?.scale(1.0 / k as f64)?);
            }
            // pointwise mean and normal CI on the merged breakpoint grid
            let mut grid: Vec<f64> = sampled
                .iter()
                .flat_map(|f| f.breakpoints().iter().copied())
                .collect();
            grid.sort_by(f64::total_cmp);
            grid.dedup();
            let n = samples as f64;
            let mut jumps = Vec::with_capacity(grid.len());
            let mut ci = Vec::with_capacity(grid.len());
            let mut prev_mean = 0.0f64;
            for &x in &grid {
                let mut sum = 0.0f64;
                let mut sumsq = 0.0f64;
                for f in &sampled {
                    let v = f.value_at(x);
                    sum += v;
                    sumsq += v * v;
                }
                let mean = sum / n;
                let var = ((sumsq - n * mean * mean) / (n - 1.0)).max(0.0);
                ci.push(1.96 * (var / n).sqrt());
                jumps.push((x, (mean - prev_mean).max(0.0)));
                prev_mean = mean;
            }
            Ok(PeriodicApprox {
                mean: StepFunction::from_jumps(jumps)?,
                ci_half: ci,
                samples,
            })
        }
    }
}

/// The finite-scale error budget bounding the sup distance between a window
/// estimate and a tile approximation, together with the probability that the
/// budget applies.
#[derive(Clone, Debug)]
pub struct ErrorBudget {
    pub total: f64,
    pub tile_boundary_term: f64,
    pub window_boundary_term: f64,
    pub eps_delta_term: f64,
    /// Sum of per-pattern deviations, when exhaustively computable.
    pub freq_term: Option<f64>,
    /// Probability that the underlying census event holds.
    pub probability_certificate: f64,
    pub r: u32,
    pub delta: f64,
}

/// Evaluate the budget for `window` against `tile` at census threshold `r`
/// and slack `delta`. `freq_gap_sum` feeds the per-pattern deviation term;
/// pass `None` when the tile is too large to enumerate.
pub fn error_budget(
    m: &PercolationModel,
    window: &VertexSet,
    tile: &VertexSet,
    r: u32,
    delta: f64,
    freq_gap_sum: Option<f64>,
) -> Result<ErrorBudget> {
    if !(delta > 0.0) {
        return Err(Error::Config(format!("delta must be positive, got {delta}")));
    }
    let r_zero = m.r_zero()?;
    if r < r_zero {
        return Err(Error::Config(format!(
            "budget threshold {r} is below r_zero = {r_zero}"
        )));
    }
    let group = m.group();
    let (_, tau) = m.moment_constants()?;
    let tile_boundary = group.boundary(tile, r, BoundaryKind::Both).len() as f64;
    let tile_ratio = 4.0 * tile_boundary / tile.len() as f64;
    let diam = group.diameter(tile)?;
    let window_boundary = group.boundary(window, diam, BoundaryKind::Both).len() as f64;
    let window_term = (tile_ratio + 1.0) * window_boundary / window.len() as f64;
    let eps_delta = 5.0 * (m.epsilon_upper(r)? + delta);
    let total = tile_ratio + window_term + eps_delta + freq_gap_sum.unwrap_or(0.0);
    Ok(ErrorBudget {
        total,
        tile_boundary_term: tile_ratio,
        window_boundary_term: window_term,
        eps_delta_term: eps_delta,
        freq_term: freq_gap_sum,
        probability_certificate: 1.0 - omega1_bound_with_tau(tau, window.len(), delta),
        r,
        delta,
    })
}

/// Sum of `| #_S / |Q| - nu_S |` over all graphs on the tile's support,
/// exhaustively (tiles of at most 3 vertices).
pub fn freq_gap_sum(
    m: &PercolationModel,
    w: &WindowGraph,
    tile: &VertexSet,
    q: &VertexSet,
) -> Result<f64> {
    if tile.len() > 3 {
        return Err(Error::Capability(format!(
            "exhaustive pattern deviations are limited to 3-vertex tiles, got {}",
            tile.len()
        )));
    }
    let pairs = FiniteGraph::pair_list(tile.len());
    let mut total = 0.0f64;
    for mask in 0u64..(1 << pairs.len()) {
        let s = FiniteGraph::from_mask(tile, &pairs, mask);
        let count = count_occurrences(w, &s, q)? as f64;
        let (nu, _) = analytic_frequency(m, &s, FrequencyMode::Plain, 1.0)?;
        total += (count / q.len() as f64 - nu).abs();
    }
    Ok(total)
}

/// The proof-schedule census threshold for the n-th box: the largest `k >=
/// r_zero` whose boundary ratio on the box stays below `1/k` (falling back to
/// `r_zero` when even that fails).
pub fn schedule_r(m: &PercolationModel, boxes: &FolnerBoxes, n: usize) -> Result<u32> {
    let group = m.group();
    let r_zero = m.r_zero()?;
    let q = boxes.box_set(group.dim(), n)?;
    let mut best = r_zero;
    for k in r_zero..=group.max_radius() {
        let ratio = group.boundary(&q, k, BoundaryKind::Both).len() as f64 / q.len() as f64;
        if ratio <= 1.0 / k as f64 {
            best = k;
        } else {
            break;
        }
    }
    Ok(best)
}

/// The proof-schedule slack for the j-th window: `(j^{1/4} tau)^{-1}`.
pub fn schedule_delta(tau: f64, j: usize) -> f64 {
    1.0 / ((j as f64).powf(0.25) * tau)
}

/// One eigenvalue of some finite graph Laplacian, with its smallest witness.
#[derive(Clone, Debug)]
pub struct WEntry {
    pub value: f64,
    pub witness_vertices: usize,
    pub witness_edges: Vec<(u32, u32)>,
    /// Distinct spectra merged into this entry at the clustering tolerance.
    pub ambiguous: bool,
}

impl WEntry {
    /// Compact witness string, CSV-safe: `n=3;edges=0-1|1-2`.
    pub fn witness_string(&self) -> String {
        let edges = self
            .witness_edges
            .iter()
            .map(|(a, b)| format!("{a}-{b}"))
            .collect::<Vec<_>>()
            .join("|");
        format!("n={};edges={edges}", self.witness_vertices)
    }
}

/// All eigenvalues of Laplacians of graphs on up to `max_vertices` vertices,
/// merged within `tol`, each with a smallest witness graph.
pub fn enumerate_w(max_vertices: usize, tol: f64, parallel: bool) -> Result<Vec<WEntry>> {
    if max_vertices == 0 {
        return Err(Error::Config("need at least one vertex".into()));
    }
    if max_vertices > 7 {
        return Err(Error::Capability(format!(
            "graph enumeration is limited to 7 vertices, got {max_vertices}"
        )));
    }
    // (value, vertex count, edge mask), pre-deduplicated per chunk
    let mut all: Vec<(f64, u8, u64)> = Vec::new();
    for k in 1..=max_vertices {
        let pairs = FiniteGraph::pair_list(k);
        let verts = VertexSet::from_points(
            (0..k as i64).map(crate::lattice::pt1).collect(),
        );
        let masks = 1u64 << pairs.len();
        let chunk = 4096u64;
        let chunks = masks.div_ceil(chunk) as usize;
        let per_chunk: Vec<Result<Vec<(f64, u8, u64)>>> = par::map_range(chunks, parallel, |ci| {
            let lo = ci as u64 * chunk;
            let hi = (lo + chunk).min(masks);
            let mut local: Vec<(f64, u8, u64)> = Vec::new();
            for mask in lo..hi {
                let s = FiniteGraph::from_mask(&verts, &pairs, mask);
                let ev = crate::spectral::dense_eigenvalues(&graph_laplacian(&s))?;
                for v in ev {
                    local.push((v, k as u8, mask));
                }
            }
            local.sort_by(|a, b| a.0.total_cmp(&b.0));
            // keep one witness per near-coincident value inside the chunk
            local.dedup_by(|next, kept| {
                if (next.0 - kept.0).abs() <= tol * 0.5 {
                    if (next.1, next.2) < (kept.1, kept.2) {
                        *kept = *next;
                    }
                    true
                } else {
                    false
                }
            });
            Ok(local)
        });
        for c in per_chunk {
            all.extend(c?);
        }
    }
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<WEntry> = Vec::new();
    let mut cluster: Vec<(f64, u8, u64)> = Vec::new();
    let flush = |cluster: &mut Vec<(f64, u8, u64)>, out: &mut Vec<WEntry>| {
        if cluster.is_empty() {
            return;
        }
        let lead = *cluster
            .iter()
            .min_by(|a, b| (a.1, a.2).cmp(&(b.1, b.2)))
            .unwrap();
        let spread = cluster.last().unwrap().0 - cluster.first().unwrap().0;
        let k = lead.1 as usize;
        let pairs = FiniteGraph::pair_list(k);
        let edges = pairs
            .iter()
            .enumerate()
            .filter(|(b, _)| lead.2 >> b & 1 == 1)
            .map(|(_, p)| *p)
            .collect();
        out.push(WEntry {
            value: lead.0,
            witness_vertices: k,
            witness_edges: edges,
            ambiguous: spread > 1e-12,
        });
        cluster.clear();
    };
    for item in all {
        if let Some(last) = cluster.last() {
            if item.0 - last.0 > tol {
                flush(&mut cluster, &mut out);
            }
        }
        cluster.push(item);
    }
    flush(&mut cluster, &mut out);
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AtomStatus {
    /// Jump above the atom tolerance at a candidate energy.
    Atom,
    /// Jump above the atom tolerance away from every candidate.
    Unexplained,
}

#[derive(Clone, Debug)]
pub struct AtomRow {
    pub energy: f64,
    pub jump: f64,
    pub witness: Option<String>,
    pub status: AtomStatus,
}

#[derive(Clone, Debug)]
pub struct AtomReport {
    pub rows: Vec<AtomRow>,
    pub atom_tol: f64,
    pub match_tol: f64,
}

impl AtomReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("energy,jump,witness,status\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                crate::spectral::fmt_f64(r.energy),
                crate::spectral::fmt_f64(r.jump),
                r.witness.clone().unwrap_or_default(),
                match r.status {
                    AtomStatus::Atom => "atom",
                    AtomStatus::Unexplained => "unexplained",
                }
            ));
        }
        out
    }

    pub fn unexplained(&self) -> impl Iterator<Item = &AtomRow> {
        self.rows.iter().filter(|r| r.status == AtomStatus::Unexplained)
    }
}

/// Scan a normalized counting function for jumps above `atom_tol`: candidates
/// take their jump mass from a window of half-width `match_tol`; remaining
/// breakpoints with large jumps are flagged as unexplained.
pub fn detect_atoms(
    f: &StepFunction,
    candidates: &[WEntry],
    atom_tol: f64,
    match_tol: f64,
) -> AtomReport {
    let mut rows = Vec::new();
    for c in candidates {
        let jump = f.jump_within(c.value, match_tol);
        if jump > atom_tol {
            rows.push(AtomRow {
                energy: c.value,
                jump,
                witness: Some(c.witness_string()),
                status: AtomStatus::Atom,
            });
        }
    }
    for (x, j) in f.jumps() {
        if j > atom_tol && !candidates.iter().any(|c| (c.value - x).abs() <= match_tol) {
            rows.push(AtomRow { energy: x, jump: j, witness: None, status: AtomStatus::Unexplained });
        }
    }
    rows.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    AtomReport { rows, atom_tol, match_tol }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{pt1, LatticeGroup};
    use crate::percolation::Profile;
    use std::sync::Arc;

    fn z1() -> Arc<LatticeGroup> {
        Arc::new(LatticeGroup::standard(1, 64).unwrap())
    }

    fn empty_model() -> PercolationModel {
        PercolationModel::new(z1(), Profile::Table { probs: vec![] }, 1.0, 1e-9).unwrap()
    }

    fn geometric() -> PercolationModel {
        PercolationModel::new(z1(), Profile::Geometric { a: 0.25, r: 0.5 }, 1.0, 5e-3).unwrap()
    }

    fn sure_nn() -> PercolationModel {
        PercolationModel::new(z1(), Profile::Table { probs: vec![1.0] }, 1.0, 1e-9).unwrap()
    }

    #[test]
    fn empty_profile_gives_unit_jump_at_zero() {
        let m = empty_model();
        let boxes = FolnerBoxes::new(20).unwrap();
        let cfg = IdsRunConfig { r_max: 3, window_count: 3, ..Default::default() };
        let run = empirical_ids(5, &m, &boxes, &cfg).unwrap();
        for f in &run.normalized {
            assert_eq!(f.breakpoints(), &[0.0]);
            assert_eq!(f.final_value(), 1.0);
        }
        assert!(run.consecutive_distances.iter().all(|&d| d == 0.0));
    }

    fn lattice_ids(e: f64) -> f64 {
        // dispersion relation of the 1-d nearest-neighbor Laplacian
        if e <= 0.0 {
            0.0
        } else if e >= 4.0 {
            1.0
        } else {
            (1.0 - e / 2.0).acos() / std::f64::consts::PI
        }
    }

    #[test]
    fn sure_edge_windows_approach_the_closed_form() {
        let m = sure_nn();
        let boxes = FolnerBoxes::new(200).unwrap();
        let cfg = IdsRunConfig { r_max: 1, window_count: 1, ..Default::default() };
        let run = empirical_ids(1, &m, &boxes, &cfg).unwrap();
        let f = run.largest();
        let mut worst = 0.0f64;
        let breaks = f.breakpoints();
        for (i, &b) in breaks.iter().enumerate() {
            worst = worst.max((f.value_at(b) - lattice_ids(b)).abs());
            if let Some(&next) = breaks.get(i + 1) {
                worst = worst.max((f.value_at(b) - lattice_ids(next)).abs());
            }
        }
        assert!(worst <= 10.0 / 200.0, "sup distance {worst}");
    }

    #[test]
    fn periodic_single_vertex_tile() {
        let m = geometric();
        let tile = VertexSet::from_points(vec![pt1(0)]);
        let approx =
            periodic_approximation(&m, &tile, PeriodicMode::Exact, &CountConfig::default(), false)
                .unwrap();
        assert_eq!(approx.mean.breakpoints(), &[0.0]);
        assert_eq!(approx.mean.final_value(), 1.0);
    }

    #[test]
    fn periodic_two_vertex_tile_closed_form() {
        let m = geometric();
        let q = m.p_at(1);
        let tile = VertexSet::from_points(vec![pt1(0), pt1(1)]);
        let approx =
            periodic_approximation(&m, &tile, PeriodicMode::Exact, &CountConfig::default(), false)
                .unwrap();
        // (1-q) (two states at 0) + q (one at 0, one at 2), halved
        assert!((approx.mean.value_at(1.0) - (1.0 - q / 2.0)).abs() < 1e-12);
        assert!((approx.mean.final_value() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_tile_matches_exact_within_ci() {
        let m = geometric();
        let tile = VertexSet::from_points(vec![pt1(0), pt1(1), pt1(2)]);
        let cfg = CountConfig::default();
        let exact = periodic_approximation(&m, &tile, PeriodicMode::Exact, &cfg, false).unwrap();
        let mc = periodic_approximation(
            &m,
            &tile,
            PeriodicMode::MonteCarlo { samples: 4000, seed: 77 },
            &cfg,
            true,
        )
        .unwrap();
        for (i, &x) in mc.mean.breakpoints().iter().enumerate() {
            let gap = (mc.mean.value_at(x) - exact.mean.value_at(x)).abs();
            assert!(gap <= mc.ci_half[i].max(1e-3), "x={x} gap={gap} ci={}", mc.ci_half[i]);
        }
    }

    #[test]
    fn oversized_exact_tile_rejected() {
        let m = geometric();
        let tile = VertexSet::from_points((0..5).map(pt1).collect());
        let err = periodic_approximation(&m, &tile, PeriodicMode::Exact, &CountConfig::default(), false)
            .unwrap_err();
        assert!(err.is_capability());
    }

    #[test]
    fn budget_monotone_in_delta_and_r() {
        let m = geometric();
        let window = VertexSet::from_points((0..400).map(pt1).collect());
        let tile = VertexSet::from_points((0..3).map(pt1).collect());
        let r0 = m.r_zero().unwrap();
        let mut prev = 0.0;
        for i in 1..6 {
            let delta = i as f64 * 0.05;
            let b = error_budget(&m, &window, &tile, r0, delta, None).unwrap();
            assert!(b.total >= prev);
            prev = b.total;
        }
        // larger R inflates the boundary terms but shrinks epsilon; the
        // epsilon-delta term alone is monotone in eps
        let b1 = error_budget(&m, &window, &tile, r0, 0.01, None).unwrap();
        let b2 = error_budget(&m, &window, &tile, r0 + 2, 0.01, None).unwrap();
        assert!(b2.eps_delta_term <= b1.eps_delta_term);
    }

    #[test]
    fn budget_of_empty_profile_is_boundary_only() {
        let m = empty_model();
        let window = VertexSet::from_points((0..100).map(pt1).collect());
        let tile = VertexSet::from_points((0..5).map(pt1).collect());
        let delta = 1e-9;
        let b = error_budget(&m, &window, &tile, 1, delta, None).unwrap();
        assert!((b.eps_delta_term - 5.0 * delta).abs() < 1e-18);
        assert!(b.tile_boundary_term > 0.0);
        assert!((b.total - b.tile_boundary_term - b.window_boundary_term - b.eps_delta_term).abs() < 1e-15);
    }

    #[test]
    fn schedule_values() {
        let m = geometric();
        let boxes = FolnerBoxes::new(100).unwrap();
        let r1 = schedule_r(&m, &boxes, 1).unwrap();
        let r8 = schedule_r(&m, &boxes, 8).unwrap();
        assert!(r8 >= r1);
        assert!(r1 >= m.r_zero().unwrap());
        let (_, tau) = m.moment_constants().unwrap();
        assert!(schedule_delta(tau, 1) <= 1.0 / tau);
        assert!(schedule_delta(tau, 16) < schedule_delta(tau, 1));
    }

    #[test]
    fn w_set_of_tiny_graphs() {
        let w2 = enumerate_w(2, 1e-9, false).unwrap();
        let v2: Vec<f64> = w2.iter().map(|e| e.value).collect();
        assert_eq!(v2.len(), 2);
        assert!((v2[0] - 0.0).abs() < 1e-12 && (v2[1] - 2.0).abs() < 1e-12);

        let w3 = enumerate_w(3, 1e-9, false).unwrap();
        let v3: Vec<f64> = w3.iter().map(|e| e.value).collect();
        assert_eq!(v3.len(), 4);
        for (got, want) in v3.iter().zip([0.0, 1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
        // the zero eigenvalue's smallest witness is the one-vertex graph
        assert_eq!(w3[0].witness_vertices, 1);
        assert_eq!(w3[0].witness_string(), "n=1;edges=");
    }

    #[test]
    fn w_four_contains_path_eigenvalue() {
        let w4 = enumerate_w(4, 1e-9, true).unwrap();
        let target = 2.0 - 2.0f64.sqrt();
        assert!(
            w4.iter().any(|e| (e.value - target).abs() < 1e-9),
            "missing 2 - sqrt(2)"
        );
        // all values are inside [0, 2 * max_vertices]
        assert!(w4.iter().all(|e| e.value > -1e-9 && e.value < 8.0 + 1e-9));
    }

    #[test]
    fn w_five_contains_known_algebraic_values() {
        let w5 = enumerate_w(5, 1e-9, true).unwrap();
        let contains = |target: f64| w5.iter().any(|e| (e.value - target).abs() < 1e-9);
        // complete graph on five vertices
        assert!(contains(5.0));
        // five-vertex path: (3 - sqrt(5))/2 and (3 + sqrt(5))/2
        let s5 = 5.0f64.sqrt();
        assert!(contains((3.0 - s5) / 2.0));
        assert!(contains((3.0 + s5) / 2.0));
        // four-vertex path: 2 - sqrt(2)
        assert!(contains(2.0 - 2.0f64.sqrt()));
        // the eigenvalue-5 witness needs all five vertices
        let five = w5.iter().find(|e| (e.value - 5.0).abs() < 1e-9).unwrap();
        assert_eq!(five.witness_vertices, 5);
    }

    #[test]
    fn w_closed_under_adding_isolated_vertices() {
        // spectra of graphs padded with isolated vertices only add zeros, so
        // every 3-vertex value reappears among the 4-vertex enumeration
        let w3 = enumerate_w(3, 1e-9, false).unwrap();
        let w4 = enumerate_w(4, 1e-9, false).unwrap();
        for e in &w3 {
            assert!(
                w4.iter().any(|f| (f.value - e.value).abs() <= 1e-9),
                "value {} lost",
                e.value
            );
        }
    }

    #[test]
    fn atoms_of_the_empty_profile() {
        let m = empty_model();
        let boxes = FolnerBoxes::new(50).unwrap();
        let cfg = IdsRunConfig { r_max: 2, window_count: 1, ..Default::default() };
        let run = empirical_ids(9, &m, &boxes, &cfg).unwrap();
        let w = enumerate_w(2, 1e-9, false).unwrap();
        let report = detect_atoms(run.largest(), &w, 0.1, 1e-9);
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].status, AtomStatus::Atom);
        assert_eq!(report.rows[0].energy, 0.0);
        assert_eq!(report.rows[0].jump, 1.0);
        assert!(report.unexplained().next().is_none());
    }
}
