//! Explicit probability bounds for the long-edge counts and their Monte
//! Carlo validation: the two-regime Bernstein bound, the exponential tail of
//! a single vertex's long-edge count, and the bad-event probability bound.

use crate::lattice::VertexSet;
use crate::par;
use crate::percolation::{
    long_edge_total, stream_seed, vertex_long_edge_count, PercolationModel,
};
use crate::spectral::fmt_f64;
use crate::{Error, Result};

/// Parameters of the two-regime Bernstein bound for a sum of `n` independent
/// centered variables with factorially controlled moments.
#[derive(Clone, Copy, Debug)]
pub struct BernsteinParams {
    pub n: u64,
    pub tau: f64,
    pub alpha: f64,
}

/// `P(S >= alpha) <= exp(-alpha^2/4n)` in the small-deviation regime
/// `alpha <= n/tau`, and `exp(-alpha/4tau)` beyond it. Both formulas agree at
/// the regime boundary.
pub fn bernstein_bound(p: &BernsteinParams) -> Result<f64> {
    if !(p.tau > 0.0) {
        return Err(Error::Config(format!("tau must be positive, got {}", p.tau)));
    }
    if !(p.alpha >= 0.0) {
        return Err(Error::Config(format!("alpha must be >= 0, got {}", p.alpha)));
    }
    let n = p.n as f64;
    Ok(if p.alpha <= n / p.tau {
        (-p.alpha * p.alpha / (4.0 * n)).exp()
    } else {
        (-p.alpha / (4.0 * p.tau)).exp()
    })
}

/// Bound on the probability that a window of `q_size` vertices sees at least
/// `q_size (eps + delta)` long edges.
pub fn omega1_bound(m: &PercolationModel, q_size: usize, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Config(format!("delta must be positive, got {delta}")));
    }
    let (_, tau) = m.moment_constants()?;
    Ok(omega1_bound_with_tau(tau, q_size, delta))
}

pub fn omega1_bound_with_tau(tau: f64, q_size: usize, delta: f64) -> f64 {
    let q = q_size as f64;
    if delta <= 1.0 / tau {
        (-delta * delta * q / 4.0).exp()
    } else {
        (-delta * q / (4.0 * tau)).exp()
    }
}

#[derive(Clone, Debug)]
pub struct TailValidationConfig {
    /// Long-edge length threshold; must be at least `r_zero`.
    pub r: u32,
    /// Truncation radius for sampling.
    pub r_max: u32,
    pub delta_grid: Vec<f64>,
    /// Trials for the window bad-event frequencies.
    pub trials: u64,
    /// Trials for the single-vertex tail (cheap, so typically larger).
    pub y_trials: u64,
    pub t_max: u32,
    pub parallel: bool,
}

impl Default for TailValidationConfig {
    fn default() -> Self {
        TailValidationConfig {
            r: 5,
            r_max: 20,
            delta_grid: vec![0.02, 0.05, 0.1, 0.2, 0.4],
            trials: 10_000,
            y_trials: 100_000,
            t_max: 8,
            parallel: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DeltaRow {
    pub delta: f64,
    pub empirical: f64,
    pub bound: f64,
    pub sigma: f64,
    pub pass: bool,
    /// Bound below the Monte Carlo resolution `5/trials`.
    pub resolution_warning: bool,
}

#[derive(Clone, Debug)]
pub struct TailRow {
    pub t: u32,
    pub empirical: f64,
    pub bound: f64,
    pub sigma: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct TailReport {
    pub delta_rows: Vec<DeltaRow>,
    pub tail_rows: Vec<TailRow>,
    /// Empirical `P(Y = 0)` against the exact product over the sampled
    /// shells, checked two-sided.
    pub p_zero_empirical: f64,
    pub p_zero_exact: f64,
    pub p_zero_pass: bool,
    pub c: f64,
    pub tau: f64,
    pub r_zero: u32,
}

impl TailReport {
    pub fn all_pass(&self) -> bool {
        self.delta_rows.iter().all(|r| r.pass)
            && self.tail_rows.iter().all(|r| r.pass)
            && self.p_zero_pass
    }

    pub fn delta_csv(&self) -> String {
        let mut out = String::from("delta,empirical,bound,sigma,pass\n");
        for r in &self.delta_rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_f64(r.delta),
                fmt_f64(r.empirical),
                fmt_f64(r.bound),
                fmt_f64(r.sigma),
                r.pass
            ));
        }
        out
    }

    pub fn tail_csv(&self) -> String {
        let mut out = String::from("t,empirical_tail,c_exp_bound,pass\n");
        for r in &self.tail_rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.t,
                fmt_f64(r.empirical),
                fmt_f64(r.bound),
                r.pass
            ));
        }
        out
    }
}

/// Monte Carlo validation of the tail bounds on a window `q`.
pub fn validate_tails(
    seed: u64,
    m: &PercolationModel,
    q: &VertexSet,
    cfg: &TailValidationConfig,
) -> Result<TailReport> {
    if q.is_empty() {
        return Err(Error::Config("window is empty".into()));
    }
    let r_zero = m.r_zero()?;
    if cfg.r < r_zero {
        return Err(Error::Config(format!(
            "census threshold {} is below r_zero = {r_zero}; the moment conditions only hold beyond it",
            cfg.r
        )));
    }
    if cfg.r_max <= cfg.r {
        return Err(Error::Config("truncation radius must exceed the census threshold".into()));
    }
    let (c, tau) = m.moment_constants()?;
    let eps = m.epsilon_tail(cfg.r)?;

    // window bad-event frequencies across the delta grid
    let totals: Vec<Result<u64>> = par::map_range(cfg.trials as usize, cfg.parallel, |t| {
        long_edge_total(stream_seed(seed, t as u64), m, q, cfg.r, cfg.r_max)
    });
    let mut counts: Vec<u64> = Vec::with_capacity(cfg.trials as usize);
    for t in totals {
        counts.push(t?);
    }
    let qn = q.len() as f64;
    let mut delta_rows = Vec::with_capacity(cfg.delta_grid.len());
    for &delta in &cfg.delta_grid {
        if !(delta > 0.0) {
            return Err(Error::Config(format!("delta grid entries must be positive, got {delta}")));
        }
        let threshold = qn * (eps + delta);
        let hits = counts.iter().filter(|&&v| v as f64 >= threshold).count();
        let empirical = hits as f64 / cfg.trials as f64;
        let bound = omega1_bound_with_tau(tau, q.len(), delta);
        let sigma = (bound.min(1.0) * (1.0 - bound.min(1.0)).max(0.0) / cfg.trials as f64).sqrt();
        delta_rows.push(DeltaRow {
            delta,
            empirical,
            bound,
            sigma,
            pass: empirical <= bound + 3.0 * sigma,
            resolution_warning: bound < 5.0 / cfg.trials as f64,
        });
    }

    // single-vertex exponential tail
    let x0 = q.points()[0];
    let ys: Vec<Result<u64>> = par::map_range(cfg.y_trials as usize, cfg.parallel, |t| {
        vertex_long_edge_count(stream_seed(seed ^ 0x51ED_2695, t as u64), m, &x0, cfg.r, cfg.r_max)
    });
    let mut y_counts: Vec<u64> = Vec::with_capacity(cfg.y_trials as usize);
    for y in ys {
        y_counts.push(y?);
    }
    let mut tail_rows = Vec::with_capacity(cfg.t_max as usize);
    for t in 1..=cfg.t_max {
        let hits = y_counts.iter().filter(|&&y| y >= t as u64).count();
        let empirical = hits as f64 / cfg.y_trials as f64;
        let bound = c * (-(t as f64)).exp();
        let b = bound.min(1.0);
        let sigma = (b * (1.0 - b) / cfg.y_trials as f64).sqrt();
        tail_rows.push(TailRow {
            t,
            empirical,
            bound,
            sigma,
            pass: empirical <= bound + 3.0 * sigma,
        });
    }

    // exact identity at t = 0: P(Y = 0) is a finite product over the sampled
    // shells
    let group = m.group();
    let mut p_zero_exact = 1.0f64;
    for k in (cfg.r + 1)..=cfg.r_max {
        p_zero_exact *= (1.0 - m.p_at(k)).powi(group.shell_size(k)? as i32);
    }
    let zeros = y_counts.iter().filter(|&&y| y == 0).count();
    let p_zero_empirical = zeros as f64 / cfg.y_trials as f64;
    let sigma0 = (p_zero_exact * (1.0 - p_zero_exact) / cfg.y_trials as f64).sqrt();
    let p_zero_pass = (p_zero_empirical - p_zero_exact).abs() <= 3.0 * sigma0 + 1e-12;

    Ok(TailReport {
        delta_rows,
        tail_rows,
        p_zero_empirical,
        p_zero_exact,
        p_zero_pass,
        c,
        tau,
        r_zero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{pt1, LatticeGroup};
    use crate::percolation::Profile;
    use std::sync::Arc;

    fn geometric() -> PercolationModel {
        let g = Arc::new(LatticeGroup::standard(1, 64).unwrap());
        PercolationModel::new(g, Profile::Geometric { a: 0.25, r: 0.5 }, 1.0, 1e-9).unwrap()
    }

    fn empty() -> PercolationModel {
        let g = Arc::new(LatticeGroup::standard(1, 64).unwrap());
        PercolationModel::new(g, Profile::Table { probs: vec![] }, 1.0, 1e-9).unwrap()
    }

    #[test]
    fn bernstein_plug_in_values() {
        let p0 = BernsteinParams { n: 100, tau: 2.0, alpha: 0.0 };
        assert_eq!(bernstein_bound(&p0).unwrap(), 1.0);
        let p1 = BernsteinParams { n: 100, tau: 2.0, alpha: 10.0 };
        assert!((bernstein_bound(&p1).unwrap() - (-0.25f64).exp()).abs() < 1e-15);
        let p2 = BernsteinParams { n: 100, tau: 2.0, alpha: 100.0 };
        assert!((bernstein_bound(&p2).unwrap() - (-12.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn bernstein_continuous_at_regime_boundary() {
        let n = 100u64;
        let tau = 2.0;
        let boundary = n as f64 / tau;
        let lo = bernstein_bound(&BernsteinParams { n, tau, alpha: boundary }).unwrap();
        let hi = bernstein_bound(&BernsteinParams { n, tau, alpha: boundary + 1e-12 }).unwrap();
        assert!((lo - hi).abs() < 1e-12);
        // both formulas give exp(-n / 4 tau^2) there
        assert!((lo - (-(n as f64) / (4.0 * tau * tau)).exp()).abs() < 1e-15);
    }

    #[test]
    fn bernstein_nonincreasing_in_alpha() {
        let mut prev = f64::INFINITY;
        for i in 0..200 {
            let alpha = i as f64 * 0.75;
            let b = bernstein_bound(&BernsteinParams { n: 64, tau: 3.0, alpha }).unwrap();
            assert!(b <= prev + 1e-15);
            prev = b;
        }
    }

    #[test]
    fn omega1_bound_plug_in() {
        assert!((omega1_bound_with_tau(20.0, 400, 0.05) - (-0.25f64).exp()).abs() < 1e-15);
        assert!((omega1_bound_with_tau(20.0, 400, 0.5) - (-2.5f64).exp()).abs() < 1e-15);
        // delta -> 0 pushes the bound to 1
        assert!(omega1_bound_with_tau(20.0, 400, 1e-9) > 0.999_999);
    }

    #[test]
    fn empty_profile_never_triggers_bad_event() {
        let m = empty();
        let q = VertexSet::from_points((0..50).map(pt1).collect());
        let cfg = TailValidationConfig {
            r: 1,
            r_max: 4,
            delta_grid: vec![0.01, 0.1],
            trials: 200,
            y_trials: 200,
            t_max: 4,
            parallel: false,
        };
        let rep = validate_tails(3, &m, &q, &cfg).unwrap();
        for row in &rep.delta_rows {
            assert_eq!(row.empirical, 0.0);
            assert!(row.pass);
        }
        assert_eq!(rep.p_zero_empirical, 1.0);
        assert_eq!(rep.p_zero_exact, 1.0);
        assert!(rep.all_pass());
    }

    #[test]
    fn geometric_bounds_hold_at_moderate_trials() {
        let m = geometric();
        let q = VertexSet::from_points((0..100).map(pt1).collect());
        let r = m.r_zero().unwrap();
        let (_, tau) = m.moment_constants().unwrap();
        let cfg = TailValidationConfig {
            r,
            r_max: 20,
            delta_grid: vec![1.0 / tau, 0.2],
            trials: 2_000,
            y_trials: 20_000,
            t_max: 6,
            parallel: true,
        };
        let rep = validate_tails(42, &m, &q, &cfg).unwrap();
        assert!(rep.all_pass(), "{rep:?}");
    }

    #[test]
    fn census_threshold_below_r_zero_rejected() {
        let m = geometric();
        let q = VertexSet::from_points((0..10).map(pt1).collect());
        let cfg = TailValidationConfig { r: 1, ..TailValidationConfig::default() };
        assert!(validate_tails(1, &m, &q, &cfg).is_err());
    }
}
