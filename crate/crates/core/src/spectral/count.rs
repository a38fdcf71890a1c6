//! Cumulative eigenvalue counting.
//!
//! Small matrices go through a dense symmetric eigendecomposition; large ones
//! through Sylvester inertia counts: the number of negative pivots of an
//! unpivoted LDL^T factorization of `A - E I` equals the number of
//! eigenvalues below `E`, and bisection on counted intervals localizes every
//! eigenvalue without ever forming eigenvectors. The factorization works on a
//! skyline (variable-band) profile, which is what lexicographically ordered
//! lattice windows produce.

use super::step::StepFunction;
use super::SymMatrix;
use crate::par;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct CountConfig {
    /// Dimension up to which the dense eigendecomposition is used.
    pub dense_cutoff: usize,
    /// Absolute width to which bisection localizes eigenvalues.
    pub bisect_tol: f64,
    /// Relative tolerance for merging nearby eigenvalues into one jump; the
    /// absolute tolerance is `multiplicity_tol * max(1, norm_estimate)`.
    pub multiplicity_tol: f64,
    /// Fan bisection intervals out over the worker pool.
    pub parallel: bool,
}

impl Default for CountConfig {
    fn default() -> Self {
        CountConfig {
            dense_cutoff: 2048,
            bisect_tol: 1e-10,
            multiplicity_tol: 1e-9,
            parallel: true,
        }
    }
}

impl CountConfig {
    pub fn multiplicity_tol_abs(&self, a: &SymMatrix) -> f64 {
        self.multiplicity_tol * a.norm_estimate().max(1.0)
    }
}

/// Number of eigenvalues of `a` that are `<= e`, by inertia of the shifted
/// skyline factorization. The shift carries an ulp-scale upward bump so that
/// eigenvalues exactly at `e` are counted; a breakdown (non-finite pivot)
/// retries with a larger nudge a bounded number of times.
///
/// Pivots below `pivmin` are clamped to `-pivmin` and counted as negative,
/// the Sturm-bisection convention: the count is then the exact count of a
/// matrix within a pivmin-sized perturbation, which only redistributes
/// multiplicity inside clusters narrower than the merging tolerance.
pub fn count_leq(a: &SymMatrix, e: f64) -> Result<usize> {
    let scale = a.norm_estimate().max(e.abs()).max(1.0);
    let base = scale * f64::EPSILON;
    let pivmin = 8.0 * base;
    let mut nudge = 2.0 * base;
    let mut last = String::new();
    for _ in 0..8 {
        match ldlt_negatives(a, e + nudge, pivmin) {
            Ok(neg) => return Ok(neg),
            Err(reason) => {
                last = reason;
                nudge *= 64.0;
            }
        }
    }
    Err(Error::Numerical(format!(
        "skyline factorization kept breaking down near shift {e}: {last}"
    )))
}

/// Unpivoted LDL^T on the skyline profile of `a - shift I`; returns the
/// number of negative pivots, or the breakdown reason (non-finite values).
fn ldlt_negatives(a: &SymMatrix, shift: f64, pivmin: f64) -> std::result::Result<usize, String> {
    let n = a.dim();
    if n == 0 {
        return Ok(0);
    }
    // first[i]: leftmost column of row i inside the profile
    let mut first: Vec<usize> = (0..n).collect();
    for i in 0..n {
        if let Some(&(j, _)) = a.lower_row(i).first() {
            first[i] = j as usize;
        }
    }
    let mut row_ptr = vec![0usize; n + 1];
    for i in 0..n {
        row_ptr[i + 1] = row_ptr[i] + (i - first[i] + 1);
    }
    let mut data = vec![0.0f64; row_ptr[n]];
    for i in 0..n {
        data[row_ptr[i] + (i - first[i])] = a.diag()[i] - shift;
        for &(j, v) in a.lower_row(i) {
            data[row_ptr[i] + (j as usize - first[i])] = v;
        }
    }

    let mut d = vec![0.0f64; n];
    let mut negatives = 0usize;
    for i in 0..n {
        let fi = first[i];
        let base_i = row_ptr[i];
        for j in fi..i {
            let fj = first[j];
            let base_j = row_ptr[j];
            let lo = fi.max(fj);
            let mut sum = data[base_i + (j - fi)];
            for k in lo..j {
                sum -= data[base_i + (k - fi)] * data[base_j + (k - fj)] * d[k];
            }
            let lij = sum / d[j];
            if !lij.is_finite() {
                return Err(format!("multiplier {lij:.3e} at ({i},{j}) after pivot {:.3e}", d[j]));
            }
            data[base_i + (j - fi)] = lij;
        }
        let mut pivot = data[base_i + (i - fi)];
        for k in fi..i {
            let l = data[base_i + (k - fi)];
            pivot -= l * l * d[k];
        }
        if !pivot.is_finite() {
            return Err(format!("pivot {pivot:.3e} at row {i}"));
        }
        if pivot.abs() < pivmin {
            pivot = -pivmin;
        }
        if pivot < 0.0 {
            negatives += 1;
        }
        d[i] = pivot;
    }
    Ok(negatives)
}

/// All eigenvalues via the dense symmetric eigendecomposition, ascending.
pub fn dense_eigenvalues(a: &SymMatrix) -> Result<Vec<f64>> {
    if a.dim() == 0 {
        return Ok(Vec::new());
    }
    let mut ev = a
        .to_faer()
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| Error::Numerical(format!("dense eigendecomposition failed: {e:?}")))?;
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Eigenvalues grouped into `(position, multiplicity)` clusters within the
/// configured tolerance.
pub fn eigenvalues_grouped(a: &SymMatrix, cfg: &CountConfig) -> Result<Vec<(f64, usize)>> {
    let tol = cfg.multiplicity_tol_abs(a);
    if a.dim() <= cfg.dense_cutoff {
        let ev = dense_eigenvalues(a)?;
        Ok(merge_clusters(ev.into_iter().map(|v| (v, 1usize)).collect(), tol))
    } else {
        let leaves = slice_spectrum(a, cfg)?;
        Ok(merge_clusters(leaves, tol))
    }
}

/// The cumulative eigenvalue counting function of a symmetric matrix.
pub fn count_function(a: &SymMatrix, cfg: &CountConfig) -> Result<StepFunction> {
    let grouped = eigenvalues_grouped(a, cfg)?;
    StepFunction::from_jumps(grouped.into_iter().map(|(x, m)| (x, m as f64)).collect())
}

/// Localize all eigenvalues by bisection on inertia counts. Intervals are
/// processed breadth-first; each round fans out over the pool and results are
/// collected in deterministic order.
fn slice_spectrum(a: &SymMatrix, cfg: &CountConfig) -> Result<Vec<(f64, usize)>> {
    let n = a.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    let (glo, ghi) = a.gershgorin_bounds();
    let margin = 1e-6 * (ghi - glo).abs().max(1.0);
    let lo = glo - margin;
    let hi = ghi + margin;
    let c_lo = count_leq(a, lo)?;
    let c_hi = count_leq(a, hi)?;
    if c_hi - c_lo != n {
        return Err(Error::Numerical(format!(
            "inertia counts at the Gershgorin bounds cover {} of {} eigenvalues",
            c_hi - c_lo,
            n
        )));
    }

    let width_floor = cfg
        .bisect_tol
        .max(8.0 * f64::EPSILON * hi.abs().max(lo.abs()).max(1.0));
    let mut active: Vec<(f64, f64, usize, usize)> = vec![(lo, hi, c_lo, c_hi)];
    let mut leaves: Vec<(f64, usize)> = Vec::new();

    enum Node {
        Leaf(f64, usize),
        Children(Vec<(f64, f64, usize, usize)>),
    }

    while !active.is_empty() {
        let results: Vec<Result<Node>> = par::map_slice(&active, cfg.parallel, |&(a0, b0, ca, cb)| {
            if b0 - a0 <= width_floor {
                return Ok(Node::Leaf(0.5 * (a0 + b0), cb - ca));
            }
            let mid = 0.5 * (a0 + b0);
            // clamping keeps the children's multiplicities a partition of the
            // parent's even when guarded pivots wobble the count by one deep
            // inside an eigenvalue cluster
            let cm = count_leq(a, mid)?.clamp(ca, cb);
            let mut children = Vec::with_capacity(2);
            if cm > ca {
                children.push((a0, mid, ca, cm));
            }
            if cb > cm {
                children.push((mid, b0, cm, cb));
            }
            Ok(Node::Children(children))
        });
        let mut next = Vec::new();
        for r in results {
            match r? {
                Node::Leaf(x, m) => leaves.push((x, m)),
                Node::Children(c) => next.extend(c),
            }
        }
        active = next;
    }

    leaves.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(leaves)
}

fn merge_clusters(sorted: Vec<(f64, usize)>, tol: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::with_capacity(sorted.len());
    for (x, m) in sorted {
        match out.last_mut() {
            Some((px, pm)) if (x - *px).abs() <= tol => {
                // weighted mean keeps the merged position inside the cluster
                *px = (*px * *pm as f64 + x * m as f64) / (*pm + m) as f64;
                *pm += m;
            }
            _ => out.push((x, m)),
        }
    }
    out
}
