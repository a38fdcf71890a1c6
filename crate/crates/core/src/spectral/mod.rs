//! Laplacians of finite graphs and of window restrictions, plus the
//! eigenvalue counting machinery built on them.

mod count;
mod step;

pub use count::{count_leq, count_function, dense_eigenvalues, eigenvalues_grouped, CountConfig};
pub use step::{fmt_f64, StepFunction};

use crate::lattice::{BoundaryKind, Point, VertexSet};
use crate::percolation::WindowGraph;
use crate::{Error, Result};

/// An explicit finite graph: a vertex set together with edges between its
/// members, in canonical index order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGraph {
    vertices: VertexSet,
    edges: Vec<(u32, u32)>,
}

impl FiniteGraph {
    /// Build from vertex points and edge endpoint pairs.
    pub fn new(vertices: VertexSet, edge_points: &[(Point, Point)]) -> Result<Self> {
        let mut edges = Vec::with_capacity(edge_points.len());
        for (a, b) in edge_points {
            if a == b {
                return Err(Error::Config(format!("self-loop at {a:?}")));
            }
            let ia = vertices
                .index_of(a)
                .ok_or_else(|| Error::Config(format!("edge endpoint {a:?} is not a vertex")))?
                as u32;
            let ib = vertices
                .index_of(b)
                .ok_or_else(|| Error::Config(format!("edge endpoint {b:?} is not a vertex")))?
                as u32;
            edges.push((ia.min(ib), ia.max(ib)));
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(FiniteGraph { vertices, edges })
    }

    /// Build from canonical index pairs (`i < j` enforced here).
    pub fn from_index_edges(vertices: VertexSet, index_edges: &[(u32, u32)]) -> Result<Self> {
        let n = vertices.len() as u32;
        let mut edges = Vec::with_capacity(index_edges.len());
        for &(a, b) in index_edges {
            if a == b || a >= n || b >= n {
                return Err(Error::Config(format!("invalid edge indices ({a},{b})")));
            }
            edges.push((a.min(b), a.max(b)));
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(FiniteGraph { vertices, edges })
    }

    pub fn single_vertex(p: Point) -> Self {
        FiniteGraph { vertices: VertexSet::from_points(vec![p]), edges: Vec::new() }
    }

    pub fn dimer(a: Point, b: Point) -> Result<Self> {
        FiniteGraph::new(VertexSet::from_points(vec![a, b]), &[(a, b)])
    }

    pub fn vertices(&self) -> &VertexSet {
        &self.vertices
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn contains_edge(&self, i: u32, j: u32) -> bool {
        let key = (i.min(j), i.max(j));
        self.edges.binary_search(&key).is_ok()
    }

    /// Translate the whole graph by `x`. Translation preserves the canonical
    /// vertex order, so edge indices carry over unchanged.
    pub fn translate(&self, x: &Point) -> FiniteGraph {
        FiniteGraph { vertices: self.vertices.translate(x), edges: self.edges.clone() }
    }

    /// All unordered index pairs of a vertex set of size `k`, in canonical
    /// order; the bitmask enumeration of all graphs on a fixed support runs
    /// over subsets of this list.
    pub fn pair_list(k: usize) -> Vec<(u32, u32)> {
        let mut pairs = Vec::with_capacity(k * (k - 1) / 2);
        for i in 0..k as u32 {
            for j in (i + 1)..k as u32 {
                pairs.push((i, j));
            }
        }
        pairs
    }

    /// The graph on `vertices` whose edge set is the `mask`-selected subset
    /// of `pairs`.
    pub fn from_mask(vertices: &VertexSet, pairs: &[(u32, u32)], mask: u64) -> FiniteGraph {
        let edges = pairs
            .iter()
            .enumerate()
            .filter(|(b, _)| mask >> b & 1 == 1)
            .map(|(_, p)| *p)
            .collect();
        FiniteGraph { vertices: vertices.clone(), edges }
    }
}

/// A real symmetric matrix: diagonal plus strictly-lower entries per row.
/// Symmetry is exact by construction; only one triangle is stored.
#[derive(Clone, Debug)]
pub struct SymMatrix {
    dim: usize,
    diag: Vec<f64>,
    lower: Vec<Vec<(u32, f64)>>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymMatrix { dim, diag: vec![0.0; dim], lower: vec![Vec::new(); dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn diag_mut(&mut self) -> &mut [f64] {
        &mut self.diag
    }

    pub fn lower_row(&self, i: usize) -> &[(u32, f64)] {
        &self.lower[i]
    }

    /// Set the off-diagonal pair `(i,j)` and `(j,i)` to `v`.
    pub fn set_offdiag(&mut self, i: usize, j: usize, v: f64) {
        assert!(i != j && i < self.dim && j < self.dim);
        let (lo, hi) = (i.min(j) as u32, i.max(j));
        let row = &mut self.lower[hi];
        match row.binary_search_by_key(&lo, |&(c, _)| c) {
            Ok(k) => row[k].1 = v,
            Err(k) => row.insert(k, (lo, v)),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        let (lo, hi) = (i.min(j) as u32, i.max(j));
        match self.lower[hi].binary_search_by_key(&lo, |&(c, _)| c) {
            Ok(k) => self.lower[hi][k].1,
            Err(_) => 0.0,
        }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = SymMatrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Config("dense matrix is not square".into()));
            }
            m.diag[i] = row[i];
            for j in 0..i {
                if (row[j] - rows[j][i]).abs() > 0.0 {
                    return Err(Error::Config(format!("matrix not symmetric at ({i},{j})")));
                }
                if row[j] != 0.0 {
                    m.lower[i].push((j as u32, row[j]));
                }
            }
        }
        Ok(m)
    }

    pub fn to_faer(&self) -> faer::Mat<f64> {
        let mut out = faer::Mat::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            out[(i, i)] = self.diag[i];
            for &(j, v) in &self.lower[i] {
                out[(i, j as usize)] = v;
                out[(j as usize, i)] = v;
            }
        }
        out
    }

    /// Sum of two matrices of equal dimension.
    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        if self.dim != other.dim {
            return Err(Error::Config("dimension mismatch in matrix sum".into()));
        }
        let mut out = self.clone();
        for i in 0..self.dim {
            out.diag[i] += other.diag[i];
            for &(j, v) in &other.lower[i] {
                let cur = out.get(i, j as usize);
                out.set_offdiag(i, j as usize, cur + v);
            }
        }
        Ok(out)
    }

    /// Principal compression to the given (strictly increasing) index list.
    pub fn compress(&self, keep: &[usize]) -> Result<SymMatrix> {
        let mut pos = vec![usize::MAX; self.dim];
        for (new, &old) in keep.iter().enumerate() {
            if old >= self.dim {
                return Err(Error::Config("compression index out of range".into()));
            }
            pos[old] = new;
        }
        let mut out = SymMatrix::zeros(keep.len());
        for (new, &old) in keep.iter().enumerate() {
            out.diag[new] = self.diag[old];
            for &(j, v) in &self.lower[old] {
                let pj = pos[j as usize];
                if pj != usize::MAX {
                    let (lo, hi) = (pj.min(new), pj.max(new));
                    out.lower[hi].push((lo as u32, v));
                }
            }
        }
        for row in &mut out.lower {
            row.sort_unstable_by_key(|&(c, _)| c);
        }
        Ok(out)
    }

    /// Gershgorin row sums: an upper bound for the spectral radius.
    pub fn norm_estimate(&self) -> f64 {
        let mut sums = vec![0.0f64; self.dim];
        for i in 0..self.dim {
            for &(j, v) in &self.lower[i] {
                sums[i] += v.abs();
                sums[j as usize] += v.abs();
            }
        }
        let mut best = 0.0f64;
        for i in 0..self.dim {
            best = best.max(self.diag[i].abs() + sums[i]);
        }
        best
    }

    /// Gershgorin interval containing all eigenvalues.
    pub fn gershgorin_bounds(&self) -> (f64, f64) {
        if self.dim == 0 {
            return (0.0, 0.0);
        }
        let mut sums = vec![0.0f64; self.dim];
        for i in 0..self.dim {
            for &(j, v) in &self.lower[i] {
                sums[i] += v.abs();
                sums[j as usize] += v.abs();
            }
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.dim {
            lo = lo.min(self.diag[i] - sums[i]);
            hi = hi.max(self.diag[i] + sums[i]);
        }
        (lo, hi)
    }
}

/// Laplacian of a finite graph: diagonal degree within the graph, `-1` per
/// edge. Rows sum to zero.
pub fn graph_laplacian(s: &FiniteGraph) -> SymMatrix {
    let mut m = SymMatrix::zeros(s.vertices().len());
    for &(i, j) in s.edges() {
        m.diag[i as usize] += 1.0;
        m.diag[j as usize] += 1.0;
        m.lower[j as usize].push((i, -1.0));
    }
    for row in &mut m.lower {
        row.sort_unstable_by_key(|&(c, _)| c);
    }
    m
}

/// Compression of a finite graph's Laplacian to a subset of its vertices:
/// diagonal keeps the full degree within the graph, off-diagonal entries only
/// for edges inside the subset.
pub fn laplacian_compressed(s: &FiniteGraph, u: &VertexSet) -> Result<SymMatrix> {
    if !u.is_subset_of(s.vertices()) {
        return Err(Error::Config("compression set is not a subset of the vertices".into()));
    }
    let mut m = SymMatrix::zeros(u.len());
    let vpts = s.vertices().points();
    let pos: Vec<Option<usize>> = vpts.iter().map(|p| u.index_of(p)).collect();
    for &(i, j) in s.edges() {
        if let Some(a) = pos[i as usize] {
            m.diag[a] += 1.0;
        }
        if let Some(b) = pos[j as usize] {
            m.diag[b] += 1.0;
        }
        if let (Some(a), Some(b)) = (pos[i as usize], pos[j as usize]) {
            m.lower[a.max(b)].push((a.min(b) as u32, -1.0));
        }
    }
    for row in &mut m.lower {
        row.sort_unstable_by_key(|&(c, _)| c);
    }
    Ok(m)
}

/// Restriction of the sampled configuration's Laplacian to `q`: the diagonal
/// carries the full sampled degree (edges leaving `q` included, within the
/// truncation radius), off-diagonal `-1` exactly for sampled edges inside `q`.
pub fn restricted_laplacian(w: &WindowGraph, q: &VertexSet) -> Result<SymMatrix> {
    if !q.is_subset_of(w.window()) {
        return Err(Error::Config("restriction set is not inside the window".into()));
    }
    let ext = w.extended();
    let mut m = SymMatrix::zeros(q.len());
    for (a, x) in q.points().iter().enumerate() {
        let ix = ext.index_of(x).expect("window point in dilation");
        m.diag[a] = w.degree(ix) as f64;
        for &(iy, _) in w.neighbors(ix) {
            let y = ext.points()[iy as usize];
            if y <= *x {
                continue;
            }
            if let Some(b) = q.index_of(&y) {
                m.lower[b].push((a as u32, -1.0));
            }
        }
    }
    for row in &mut m.lower {
        row.sort_unstable_by_key(|&(c, _)| c);
    }
    Ok(m)
}

/// Laplacian of the induced subgraph on `q`, compressed to `u`: diagonal
/// counts neighbors within `q` only.
pub fn induced_laplacian_compressed(
    w: &WindowGraph,
    q: &VertexSet,
    u: &VertexSet,
) -> Result<SymMatrix> {
    if !q.is_subset_of(w.window()) {
        return Err(Error::Config("induced set is not inside the window".into()));
    }
    if !u.is_subset_of(q) {
        return Err(Error::Config("compression set is not inside the induced set".into()));
    }
    let ext = w.extended();
    let mut m = SymMatrix::zeros(u.len());
    for (a, x) in u.points().iter().enumerate() {
        let ix = ext.index_of(x).expect("window point in dilation");
        for &(iy, _) in w.neighbors(ix) {
            let y = ext.points()[iy as usize];
            if !q.contains(&y) {
                continue;
            }
            m.diag[a] += 1.0;
            if y > *x {
                if let Some(b) = u.index_of(&y) {
                    m.lower[b].push((a as u32, -1.0));
                }
            }
        }
    }
    for row in &mut m.lower {
        row.sort_unstable_by_key(|&(c, _)| c);
    }
    Ok(m)
}

/// The boundary defect on the eroded set `q_R`: a diagonal matrix whose entry
/// at `x` is minus the number of sampled edges from `x` out of `q`, so that
/// `induced(q)[q_R] = restricted[q_R] + defect`.
pub fn boundary_defect(w: &WindowGraph, q: &VertexSet, r: u32) -> Result<SymMatrix> {
    let core = w.group().boundary(q, r, BoundaryKind::Core);
    if core.is_empty() {
        return Err(Error::Config("eroded set q_R is empty".into()));
    }
    let ext = w.extended();
    let mut m = SymMatrix::zeros(core.len());
    for (a, x) in core.points().iter().enumerate() {
        let ix = ext.index_of(x).expect("window point in dilation");
        let leaving = w
            .neighbors(ix)
            .iter()
            .filter(|&&(iy, _)| !q.contains(&ext.points()[iy as usize]))
            .count();
        m.diag[a] = -(leaving as f64);
    }
    Ok(m)
}

/// The long-edge part of the restriction to `u`: off-diagonal `-1` for
/// sampled edges inside `u` of length greater than `r`, zero diagonal.
pub fn long_edge_part(w: &WindowGraph, u: &VertexSet, r: u32) -> Result<SymMatrix> {
    if !u.is_subset_of(w.window()) {
        return Err(Error::Config("set is not inside the window".into()));
    }
    let ext = w.extended();
    let mut m = SymMatrix::zeros(u.len());
    for (a, x) in u.points().iter().enumerate() {
        let ix = ext.index_of(x).expect("window point in dilation");
        for &(iy, dist) in w.neighbors(ix) {
            if dist <= r {
                continue;
            }
            let y = ext.points()[iy as usize];
            if y > *x {
                if let Some(b) = u.index_of(&y) {
                    m.lower[b].push((a as u32, -1.0));
                }
            }
        }
    }
    for row in &mut m.lower {
        row.sort_unstable_by_key(|&(c, _)| c);
    }
    Ok(m)
}

/// `restricted(u) - long_edge_part(u)`: the short-range part of the
/// restriction.
pub fn without_long_edges(w: &WindowGraph, u: &VertexSet, r: u32) -> Result<SymMatrix> {
    let full = restricted_laplacian(w, u)?;
    let long = long_edge_part(w, u, r)?;
    let mut out = full;
    for i in 0..out.dim() {
        for &(j, v) in long.lower_row(i) {
            let cur = out.get(i, j as usize);
            out.set_offdiag(i, j as usize, cur - v);
        }
    }
    Ok(out)
}
