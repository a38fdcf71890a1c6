//! Long-range percolation: radial edge-probability profiles, their derived
//! constants, and the deterministic per-edge hash sampler.
//!
//! One logical configuration is identified by a 64-bit seed. Every unordered
//! vertex pair owns an independent uniform derived by hashing the pair's
//! coordinates with the seed, so restrictions of the same configuration to
//! different windows agree on shared pairs.

use std::collections::HashSet;
use std::f64::consts::E;
use std::sync::Arc;

use crate::lattice::{BoundaryKind, LatticeGroup, Point, VertexSet};
use crate::{Error, Result};

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;
const TWO_POW_64: f64 = 18446744073709551616.0;

/// SplitMix64 finalizer. Bit-exact across platforms.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Derive the `idx`-th seed of a deterministic stream rooted at `seed`.
pub fn stream_seed(seed: u64, idx: u64) -> u64 {
    mix64(seed ^ idx.wrapping_add(1).wrapping_mul(0xA24BAED4963EE407))
}

/// Uniform in `[0,1)` from a hash word.
pub fn unit_uniform(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / 9007199254740992.0)
}

fn fnv1a_point(mut h: u64, p: &Point, dim: usize) -> u64 {
    for &c in p.coords(dim) {
        for byte in c.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(FNV_PRIME);
        }
    }
    h
}

/// Hash word of the canonical unordered pair `{x,y}` under `seed`.
pub fn edge_hash(seed: u64, x: &Point, y: &Point, dim: usize) -> u64 {
    let (a, b) = if x <= y { (x, y) } else { (y, x) };
    let mut h = FNV_OFFSET;
    h = fnv1a_point(h, a, dim);
    h = fnv1a_point(h, b, dim);
    mix64(seed ^ h)
}

/// Edge indicator for a pair with known probability. The uniform is
/// `edge_hash / 2^64`; probabilities 0 and 1 short-circuit so impossible and
/// sure edges are exact for every seed.
pub fn edge_indicator_with_prob(seed: u64, x: &Point, y: &Point, dim: usize, p: f64) -> bool {
    if p <= 0.0 {
        return false;
    }
    if p >= 1.0 {
        return true;
    }
    (edge_hash(seed, x, y, dim) as f64 / TWO_POW_64) < p
}

/// Radial edge-probability profile: probability as a function of word
/// distance, clamped to `p_max`.
#[derive(Clone, Debug)]
pub enum Profile {
    /// `p(k) = a * r^k`
    Geometric { a: f64, r: f64 },
    /// `p(k) = beta * k^(-s)`; summable on `Z^d` only for `s > d`
    PowerLaw { beta: f64, s: f64 },
    /// explicit values for distances `1..=probs.len()`, zero beyond
    Table { probs: Vec<f64> },
}

/// A percolation model over a lattice group: the profile plus everything
/// derived from it (tail masses, moment constants, truncation certificates).
pub struct PercolationModel {
    group: Arc<LatticeGroup>,
    profile: Profile,
    p_max: f64,
    tail_tol: f64,
    /// `eps_exact[r]` = sum of `shell(k) * p(k)` over `r < k <= max_radius`.
    eps_exact: Vec<f64>,
    /// Certified bound on the mass beyond `max_radius`.
    eps_tail_bound: f64,
}

impl PercolationModel {
    pub fn new(
        group: Arc<LatticeGroup>,
        profile: Profile,
        p_max: f64,
        tail_tol: f64,
    ) -> Result<Self> {
        if !(p_max > 0.0 && p_max <= 1.0) {
            return Err(Error::Config(format!("p_max must be in (0,1], got {p_max}")));
        }
        if !(tail_tol > 0.0) {
            return Err(Error::Config(format!("tail_tol must be positive, got {tail_tol}")));
        }
        match &profile {
            Profile::Geometric { a, r } => {
                if !(*a >= 0.0) || !a.is_finite() {
                    return Err(Error::Config(format!("geometric amplitude must be >= 0, got {a}")));
                }
                if !(*r > 0.0 && *r < 1.0) && *a != 0.0 {
                    return Err(Error::Config(format!(
                        "geometric ratio must be in (0,1) for a summable profile, got {r}"
                    )));
                }
            }
            Profile::PowerLaw { beta, s } => {
                if !(*beta >= 0.0) || !beta.is_finite() {
                    return Err(Error::Config(format!("power-law amplitude must be >= 0, got {beta}")));
                }
                if *beta > 0.0 && !(*s > group.dim() as f64) {
                    return Err(Error::Config(format!(
                        "power-law exponent {s} is not summable on Z^{} (needs s > d)",
                        group.dim()
                    )));
                }
            }
            Profile::Table { probs } => {
                for (i, p) in probs.iter().enumerate() {
                    if !(*p >= 0.0 && *p <= 1.0) {
                        return Err(Error::Config(format!(
                            "table probability at distance {} must be in [0,1], got {p}",
                            i + 1
                        )));
                    }
                }
            }
        }

        let raw = |k: u32| raw_profile(&profile, k);
        let clamp = |k: u32| raw(k).min(p_max).max(0.0);
        let max_r = group.max_radius();
        let mut eps_exact = vec![0.0f64; max_r as usize + 1];
        let mut acc = 0.0;
        for k in (1..=max_r).rev() {
            acc += group.shell_size(k)? as f64 * clamp(k);
            eps_exact[k as usize - 1] = acc;
        }
        let eps_tail_bound = tail_mass_bound(&profile, &group, p_max, max_r)?;
        if eps_tail_bound > tail_tol {
            return Err(Error::Config(format!(
                "cannot certify the tail: mass beyond the memoized radius {max_r} is only \
                 bounded by {eps_tail_bound:.3e} > tail_tol {tail_tol:.3e}; increase the \
                 memoized radius or tail_tol"
            )));
        }

        Ok(PercolationModel {
            group,
            profile,
            p_max,
            tail_tol,
            eps_exact,
            eps_tail_bound,
        })
    }

    pub fn group(&self) -> &Arc<LatticeGroup> {
        &self.group
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    /// Probability at word distance `k`; zero at the origin.
    pub fn p_at(&self, k: u32) -> f64 {
        if k == 0 {
            0.0
        } else {
            raw_profile(&self.profile, k).min(self.p_max).max(0.0)
        }
    }

    /// Probability of the pair `{0, x}`.
    pub fn p_value(&self, x: &Point) -> Result<f64> {
        let d = self.group.word_distance(&Point::origin(), x)?;
        Ok(self.p_at(d))
    }

    /// `eps(R)`: total probability mass beyond distance `R` (exact shell
    /// sums up to the memoized radius; the remainder is certified below
    /// `tail_tol` at construction and reported by [`Self::epsilon_remainder`]).
    pub fn epsilon_tail(&self, r: u32) -> Result<f64> {
        let max_r = self.group.max_radius();
        if r as usize >= self.eps_exact.len() {
            return Err(Error::Capability(format!(
                "eps({r}) needs shells beyond the memoized radius {max_r}"
            )));
        }
        Ok(self.eps_exact[r as usize])
    }

    /// Certified upper bound on the mass omitted from [`Self::epsilon_tail`].
    pub fn epsilon_remainder(&self) -> f64 {
        self.eps_tail_bound
    }

    /// Conservative upper estimate of `eps(R)`.
    pub fn epsilon_upper(&self, r: u32) -> Result<f64> {
        Ok(self.epsilon_tail(r)? + self.eps_tail_bound)
    }

    /// The moment constants `(c, tau)`: `c` is the product of
    /// `1 + p(y)(e-1)` over the whole group, `tau = 6c`.
    pub fn moment_constants(&self) -> Result<(f64, f64)> {
        let mut log_c = 0.0;
        for k in 1..=self.group.max_radius() {
            let p = self.p_at(k);
            if p > 0.0 {
                log_c += self.group.shell_size(k)? as f64 * (1.0 + p * (E - 1.0)).ln();
            }
        }
        // log(1+z) <= z bounds the omitted factors by (e-1) * tail mass.
        let c = log_c.exp();
        Ok((c, 6.0 * c))
    }

    /// The least `R` such that the centered long-edge counts satisfy the
    /// factorial moment conditions: scan upward over the epsilon threshold
    /// derived from the moment constants.
    pub fn r_zero(&self) -> Result<u32> {
        let (c, _) = self.moment_constants()?;
        // least T with sum_{t>T} t^2 e^{-t} <= 1/(3c)
        let target = 1.0 / (3.0 * c);
        let mut t_cap = 1u32;
        while tail_t2(t_cap) > target {
            t_cap += 1;
            if t_cap > 400 {
                return Err(Error::Numerical("moment threshold scan did not terminate".into()));
            }
        }
        let s2: f64 = (t_cap as f64) * (t_cap as f64 + 1.0) * (2.0 * t_cap as f64 + 1.0) / 6.0;
        let threshold = -0.5 * (1.0 - 1.0 / (3.0 * s2)).ln();
        // Each single probability beyond R is dominated by eps(R), and the
        // threshold never exceeds -ln(2/3)/2, so p <= 1/2 beyond R comes for
        // free once the epsilon condition holds.
        for r in 1..=self.group.max_radius() {
            if self.epsilon_upper(r)? <= threshold {
                return Ok(r);
            }
        }
        Err(Error::Capability(format!(
            "epsilon does not reach the moment threshold {threshold:.3e} within the memoized radius"
        )))
    }

    /// True when `0 < p(x) < 1` on every shell the profile touches up to the
    /// memoized radius (the precondition of the discontinuity-set result).
    pub fn strictly_mixed(&self) -> bool {
        (1..=self.group.max_radius()).all(|k| {
            let p = self.p_at(k);
            p > 0.0 && p < 1.0
        })
    }
}

fn raw_profile(profile: &Profile, k: u32) -> f64 {
    if k == 0 {
        return 0.0;
    }
    match profile {
        Profile::Geometric { a, r } => a * r.powi(k as i32),
        Profile::PowerLaw { beta, s } => beta * (k as f64).powf(-s),
        Profile::Table { probs } => probs.get(k as usize - 1).copied().unwrap_or(0.0),
    }
}

/// Upper bound on `sum_{k>K} shell(k) * p(k)` using the box bound
/// `|B_k| <= (2*rho*k+1)^d` and monotonicity of the profile (Abel summation).
fn tail_mass_bound(
    profile: &Profile,
    group: &LatticeGroup,
    p_max: f64,
    k0: u32,
) -> Result<f64> {
    let d = group.dim() as f64;
    let rho = group.generator_reach() as f64;
    match profile {
        Profile::Table { probs } => {
            if probs.len() > k0 as usize {
                return Err(Error::Config(format!(
                    "table profile support {} exceeds the memoized radius {k0}",
                    probs.len()
                )));
            }
            Ok(0.0)
        }
        Profile::Geometric { a, r } => {
            if *a == 0.0 {
                return Ok(0.0);
            }
            // numeric sum of the dominating series with a geometric ratio cap
            let term = |k: f64| (2.0 * rho * k + 1.0).powf(d) * a * r.powf(k).min(p_max);
            let mut total = 0.0;
            let mut k = k0 as f64 + 1.0;
            for _ in 0..4096 {
                let t = term(k);
                total += t;
                let q = r * (1.0 + 2.0 * rho / (2.0 * rho * k + 1.0)).powf(d);
                if q < 1.0 && t * q / (1.0 - q) < total.max(1e-300) * 1e-16 {
                    return Ok(total + t * q / (1.0 - q));
                }
                k += 1.0;
            }
            Err(Error::Numerical("geometric tail bound did not converge".into()))
        }
        Profile::PowerLaw { beta, s } => {
            if *beta == 0.0 {
                return Ok(0.0);
            }
            // Abel-summation bound: sum shell(k) p(k) <= sum |B_k| (p(k)-p(k+1))
            // with |B_k| <= (2 rho k + 1)^d; a numeric prefix plus an
            // integral-test cap on the rest.
            let p = |k: f64| (beta * k.powf(-s)).min(p_max);
            let mut total = 0.0;
            let mut k = k0 as f64 + 1.0;
            for _ in 0..8192 {
                total += (2.0 * rho * k + 1.0).powf(d) * (p(k) - p(k + 1.0));
                k += 1.0;
            }
            let cap = (2.0 * rho + 1.0 / k).powf(d) * beta * s * k.powf(d - s) / (s - d);
            Ok(total + cap)
        }
    }
}

fn tail_t2(t_cap: u32) -> f64 {
    // sum_{t > t_cap} t^2 e^{-t}, summed until terms vanish in f64
    let mut total = 0.0;
    for t in (t_cap + 1)..(t_cap + 800) {
        let term = (t as f64).powi(2) * (-(t as f64)).exp();
        total += term;
        if term < 1e-300 {
            break;
        }
    }
    total
}

/// Convert a ferromagnetic coupling table `J(1..=len)` into a percolation
/// model via `p = 1 - exp(-beta * J)`.
pub fn coupling_to_p(
    group: Arc<LatticeGroup>,
    coupling: &[f64],
    beta: f64,
    p_max: f64,
    tail_tol: f64,
) -> Result<PercolationModel> {
    if !(beta > 0.0) {
        return Err(Error::Config(format!("beta must be positive, got {beta}")));
    }
    let mut probs = Vec::with_capacity(coupling.len());
    for (i, &j) in coupling.iter().enumerate() {
        if !(j >= 0.0) || !j.is_finite() {
            return Err(Error::Config(format!(
                "coupling at distance {} must be finite and >= 0, got {j}",
                i + 1
            )));
        }
        probs.push(-(-beta * j).exp_m1());
    }
    PercolationModel::new(group, Profile::Table { probs }, p_max, tail_tol)
}

/// Recover the coupling table from a model: `J(k) = -ln(1 - p(k)) / beta`.
pub fn p_to_coupling(m: &PercolationModel, beta: f64, max_distance: u32) -> Result<Vec<f64>> {
    if !(beta > 0.0) {
        return Err(Error::Config(format!("beta must be positive, got {beta}")));
    }
    let mut out = Vec::with_capacity(max_distance as usize);
    for k in 1..=max_distance {
        let p = m.p_at(k);
        if p >= 1.0 {
            return Err(Error::Config(format!(
                "probability 1 at distance {k} has no finite coupling"
            )));
        }
        out.push(-(-p).ln_1p() / beta);
    }
    Ok(out)
}

/// Public edge indicator: canonical-pair hashing against the model profile.
pub fn edge_indicator(seed: u64, x: &Point, y: &Point, m: &PercolationModel) -> Result<bool> {
    if x == y {
        return Err(Error::Config("self-loops have no indicator".into()));
    }
    let p = m.p_value(&x.sub(y))?;
    Ok(edge_indicator_with_prob(seed, x, y, m.group().dim(), p))
}

/// One sampled configuration restricted to a finite window.
///
/// Stores every sampled edge with at least one endpoint in the window and
/// both endpoints within the truncation radius of it; adjacency is kept for
/// all vertices of the dilated window so boundary defects can be read off.
#[derive(Debug)]
pub struct WindowGraph {
    group: Arc<LatticeGroup>,
    window: VertexSet,
    extended: VertexSet,
    in_window: Vec<bool>,
    adj: Vec<Vec<(u32, u32)>>,
    truncation_radius: u32,
    seed: u64,
    bias_certificate: f64,
}

impl WindowGraph {
    pub fn group(&self) -> &Arc<LatticeGroup> {
        &self.group
    }

    pub fn window(&self) -> &VertexSet {
        &self.window
    }

    pub fn extended(&self) -> &VertexSet {
        &self.extended
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn truncation_radius(&self) -> u32 {
        self.truncation_radius
    }

    /// Expected number of omitted edges (length beyond the truncation radius)
    /// incident to the window.
    pub fn bias_certificate(&self) -> f64 {
        self.bias_certificate
    }

    pub fn neighbors(&self, ext_index: usize) -> &[(u32, u32)] {
        &self.adj[ext_index]
    }

    pub fn is_window_vertex(&self, ext_index: usize) -> bool {
        self.in_window[ext_index]
    }

    /// Full sampled degree of a vertex of the dilation (within truncation).
    /// Only meaningful for window vertices, whose incident edges are all
    /// recorded.
    pub fn degree(&self, ext_index: usize) -> usize {
        self.adj[ext_index].len()
    }

    pub fn has_edge(&self, x: &Point, y: &Point) -> bool {
        let (Some(ix), Some(iy)) = (self.extended.index_of(x), self.extended.index_of(y)) else {
            return false;
        };
        self.adj[ix].binary_search_by_key(&(iy as u32), |&(n, _)| n).is_ok()
    }

    /// Sampled edges in canonical order: pairs of extended indices `(i, j)`
    /// with `i < j`, lexicographic by endpoint points.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for (i, nbrs) in self.adj.iter().enumerate() {
            for &(j, _) in nbrs {
                if (j as usize) > i {
                    out.push((i as u32, j));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|n| n.len()).sum::<usize>() / 2
    }
}

/// Sample the configuration `seed` restricted to `window`, truncating candidate
/// pairs at word distance `r_max`.
pub fn sample_window(
    seed: u64,
    m: &PercolationModel,
    window: &VertexSet,
    r_max: u32,
) -> Result<WindowGraph> {
    if window.is_empty() {
        return Err(Error::Config("window is empty".into()));
    }
    if r_max == 0 {
        return Err(Error::Config("truncation radius must be positive".into()));
    }
    let group = m.group().clone();
    if r_max > group.max_radius() {
        return Err(Error::Capability(format!(
            "truncation radius {r_max} exceeds the memoized radius {}",
            group.max_radius()
        )));
    }
    let eps = m.epsilon_upper(r_max)?;
    if eps > m.tail_tol() {
        return Err(Error::Config(format!(
            "truncation too coarse: eps({r_max}) = {eps:.3e} exceeds tail_tol {:.3e}",
            m.tail_tol()
        )));
    }

    let ext = window.union(&group.boundary(window, r_max, BoundaryKind::Exterior));
    let in_window: Vec<bool> = ext.points().iter().map(|p| window.contains(p)).collect();
    let dim = group.dim();
    let probs: Vec<f64> = (0..=r_max).map(|k| m.p_at(k)).collect();
    let offsets = group.offsets_with_distance(1, r_max)?;

    let mut adj: Vec<Vec<(u32, u32)>> = vec![Vec::new(); ext.len()];
    for x in window.points() {
        let ix = ext.index_of(x).expect("window point in dilation") as u32;
        for (off, k) in offsets {
            let y = x.add(off);
            let iy = match ext.index_of(&y) {
                Some(i) => i as u32,
                None => continue, // outside the dilation: other window's business
            };
            if in_window[iy as usize] && y <= *x {
                continue; // inside pairs canonically at the smaller endpoint
            }
            if edge_indicator_with_prob(seed, x, &y, dim, probs[*k as usize]) {
                adj[ix as usize].push((iy, *k));
                adj[iy as usize].push((ix, *k));
            }
        }
    }
    for nbrs in &mut adj {
        nbrs.sort_unstable();
    }

    Ok(WindowGraph {
        group,
        window: window.clone(),
        extended: ext,
        in_window,
        adj,
        truncation_radius: r_max,
        seed,
        bias_certificate: window.len() as f64 * eps,
    })
}

/// Per-vertex counts of long edges: entry `i` counts sampled edges of length
/// greater than `r` at the i-th window vertex whose other endpoint is not an
/// earlier window vertex, so each long edge incident to the window is counted
/// exactly once.
pub struct LongEdgeCensus {
    pub counts: Vec<u64>,
    pub r: u32,
}

impl LongEdgeCensus {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Indicator of the bad event: at least `|Q| (eps + delta)` long edges.
    pub fn omega1(&self, eps: f64, delta: f64) -> bool {
        self.total() as f64 >= self.counts.len() as f64 * (eps + delta)
    }
}

/// Census of sampled edges longer than `r` incident to `q`.
pub fn long_edge_census(w: &WindowGraph, q: &VertexSet, r: u32) -> Result<LongEdgeCensus> {
    if r >= w.truncation_radius {
        return Err(Error::Config(format!(
            "census threshold {r} must be below the truncation radius {}",
            w.truncation_radius
        )));
    }
    if !q.is_subset_of(&w.window) {
        return Err(Error::Config("census set is not inside the window".into()));
    }
    let mut counts = vec![0u64; q.len()];
    for (i, x) in q.points().iter().enumerate() {
        let ix = w.extended.index_of(x).expect("q inside dilation");
        for &(iy, dist) in &w.adj[ix] {
            if dist <= r {
                continue;
            }
            let y = w.extended.points()[iy as usize];
            if q.contains(&y) && y < *x {
                continue; // already counted at the earlier vertex
            }
            counts[i] += 1;
        }
    }
    Ok(LongEdgeCensus { counts, r })
}

/// Total number of sampled edges with length in `(r, r_max]` incident to `q`,
/// counted once each, without building adjacency (Monte Carlo hot path).
pub fn long_edge_total(
    seed: u64,
    m: &PercolationModel,
    q: &VertexSet,
    r: u32,
    r_max: u32,
) -> Result<u64> {
    let group = m.group();
    let dim = group.dim();
    let offsets = group.offsets_with_distance(r + 1, r_max)?;
    let probs: Vec<f64> = (0..=r_max).map(|k| m.p_at(k)).collect();
    let members: HashSet<Point> = q.points().iter().copied().collect();
    let mut total = 0u64;
    for x in q.points() {
        for (off, k) in offsets {
            let y = x.add(off);
            if members.contains(&y) && y <= *x {
                continue;
            }
            if edge_indicator_with_prob(seed, x, &y, dim, probs[*k as usize]) {
                total += 1;
            }
        }
    }
    Ok(total)
}

/// Number of sampled edges at a single vertex with length in `(r, r_max]`
/// (the first-vertex census variable).
pub fn vertex_long_edge_count(
    seed: u64,
    m: &PercolationModel,
    x: &Point,
    r: u32,
    r_max: u32,
) -> Result<u64> {
    let group = m.group();
    let dim = group.dim();
    let offsets = group.offsets_with_distance(r + 1, r_max)?;
    let mut total = 0u64;
    for (off, k) in offsets {
        let y = x.add(off);
        if edge_indicator_with_prob(seed, x, &y, dim, m.p_at(*k)) {
            total += 1;
        }
    }
    Ok(total)
}
