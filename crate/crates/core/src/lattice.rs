//! Lattice groups `Z^d` with a finite symmetric generator set.
//!
//! Supplies the word metric, balls, R-boundaries, Følner box sequences and
//! monotile tilings. The group layer is the only place that knows about
//! coordinates; everything downstream works with [`Point`]s and word
//! distances.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::{Error, Result};

/// Maximum supported lattice dimension. Points are fixed-size arrays so they
/// stay `Copy`; coordinates beyond the group dimension are zero.
pub const MAX_DIM: usize = 4;

/// A lattice point (group element of `Z^d`).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Point {
    c: [i64; MAX_DIM],
}

impl Point {
    pub fn origin() -> Self {
        Point::default()
    }

    /// Build a point from the first `coords.len()` coordinates.
    pub fn new(coords: &[i64]) -> Result<Self> {
        if coords.len() > MAX_DIM {
            return Err(Error::Config(format!(
                "dimension {} exceeds the supported maximum {MAX_DIM}",
                coords.len()
            )));
        }
        let mut c = [0i64; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Ok(Point { c })
    }

    pub fn coords(&self, dim: usize) -> &[i64] {
        &self.c[..dim]
    }

    pub fn add(&self, other: &Point) -> Point {
        let mut c = [0i64; MAX_DIM];
        for i in 0..MAX_DIM {
            c[i] = self.c[i] + other.c[i];
        }
        Point { c }
    }

    pub fn sub(&self, other: &Point) -> Point {
        let mut c = [0i64; MAX_DIM];
        for i in 0..MAX_DIM {
            c[i] = self.c[i] - other.c[i];
        }
        Point { c }
    }

    pub fn neg(&self) -> Point {
        let mut c = [0i64; MAX_DIM];
        for i in 0..MAX_DIM {
            c[i] = -self.c[i];
        }
        Point { c }
    }

    pub fn is_origin(&self) -> bool {
        self.c.iter().all(|&v| v == 0)
    }

    /// Render as `a,b,c` (coordinates of the first `dim` axes).
    pub fn render(&self, dim: usize) -> String {
        self.c[..dim]
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.render(MAX_DIM))
    }
}

/// Convenience for 1-d points in tests and examples.
pub fn pt1(x: i64) -> Point {
    Point::new(&[x]).unwrap()
}

/// Convenience for 2-d points in tests and examples.
pub fn pt2(x: i64, y: i64) -> Point {
    Point::new(&[x, y]).unwrap()
}

/// A finite, sorted, duplicate-free set of lattice points. The lexicographic
/// order on coordinates is the canonical vertex order used everywhere.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VertexSet {
    pts: Vec<Point>,
}

impl VertexSet {
    pub fn from_points(mut pts: Vec<Point>) -> Self {
        pts.sort_unstable();
        pts.dedup();
        VertexSet { pts }
    }

    pub fn empty() -> Self {
        VertexSet { pts: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.pts
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.pts.binary_search(p).is_ok()
    }

    pub fn index_of(&self, p: &Point) -> Option<usize> {
        self.pts.binary_search(p).ok()
    }

    pub fn is_subset_of(&self, other: &VertexSet) -> bool {
        self.pts.iter().all(|p| other.contains(p))
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let mut pts = self.pts.clone();
        pts.extend_from_slice(&other.pts);
        VertexSet::from_points(pts)
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        VertexSet {
            pts: self
                .pts
                .iter()
                .filter(|p| !other.contains(p))
                .copied()
                .collect(),
        }
    }

    pub fn translate(&self, x: &Point) -> VertexSet {
        // Translation preserves lexicographic order.
        VertexSet {
            pts: self.pts.iter().map(|p| p.add(x)).collect(),
        }
    }

    /// Axis-aligned box `{0,..,side-1}^dim` translated by `origin`.
    pub fn cube(dim: usize, side: i64, origin: &Point) -> Result<VertexSet> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Config(format!("invalid dimension {dim}")));
        }
        if side <= 0 {
            return Err(Error::Config(format!("box side must be positive, got {side}")));
        }
        let n = (side as u128).pow(dim as u32);
        if n > 20_000_000 {
            return Err(Error::Capability(format!(
                "box with {n} points is too large to enumerate"
            )));
        }
        let mut pts = Vec::with_capacity(n as usize);
        let mut idx = vec![0i64; dim];
        loop {
            let mut c = [0i64; MAX_DIM];
            for (i, v) in idx.iter().enumerate() {
                c[i] = v + origin.c[i];
            }
            pts.push(Point { c });
            // odometer increment
            let mut k = dim;
            loop {
                if k == 0 {
                    return Ok(VertexSet::from_points(pts));
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < side {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
}

/// Which part of the R-boundary of a set to return.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BoundaryKind {
    /// Points of `Q` within distance `R` of the complement.
    Interior,
    /// Points of the complement within distance `R` of `Q`.
    Exterior,
    /// Union of interior and exterior boundary.
    Both,
    /// `Q` with the boundary removed (the eroded set `Q_R`).
    Core,
}

/// The group `Z^d` with a finite symmetric generator set and memoized word
/// metric geometry.
#[derive(Debug)]
pub struct LatticeGroup {
    dim: usize,
    generators: Vec<Point>,
    max_radius: u32,
    /// Offsets sorted by word distance (starting with the origin at 0), with
    /// their distances.
    offsets: Vec<(Point, u32)>,
    /// `shell_start[k]` = index of the first offset at distance `k`;
    /// a trailing entry holds `offsets.len()`.
    shell_start: Vec<usize>,
    dist: HashMap<Point, u32>,
}

impl LatticeGroup {
    /// Build the group, validating the generator set and memoizing shells up
    /// to `max_radius`.
    pub fn new(dim: usize, generators: Vec<Point>, max_radius: u32) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Config(format!(
                "dimension must be in 1..={MAX_DIM}, got {dim}"
            )));
        }
        if generators.is_empty() {
            return Err(Error::Config("generator set is empty".into()));
        }
        let mut seen = HashSet::new();
        for g in &generators {
            if g.is_origin() {
                return Err(Error::Config("identity must not be a generator".into()));
            }
            if g.c[dim..].iter().any(|&v| v != 0) {
                return Err(Error::Config(format!(
                    "generator {:?} has nonzero coordinates beyond dimension {dim}",
                    g
                )));
            }
            if !seen.insert(*g) {
                return Err(Error::Config(format!("duplicate generator {g:?}")));
            }
        }
        for g in &generators {
            if !seen.contains(&g.neg()) {
                return Err(Error::Config(format!(
                    "generator set not symmetric: missing inverse of {g:?}"
                )));
            }
        }
        match lattice_index(&generators, dim) {
            Some(1) => {}
            Some(ix) => {
                return Err(Error::Config(format!(
                    "not generating: generator set spans a sublattice of index {ix}"
                )))
            }
            None => {
                return Err(Error::Config(
                    "not generating: generator set does not have full rank".into(),
                ))
            }
        }

        // BFS over generator sums, one shell at a time.
        let mut dist = HashMap::new();
        let mut offsets = vec![(Point::origin(), 0u32)];
        let mut shell_start = vec![0usize, 1];
        dist.insert(Point::origin(), 0);
        let mut frontier = vec![Point::origin()];
        for k in 1..=max_radius {
            let mut next = Vec::new();
            for x in &frontier {
                for g in &generators {
                    let y = x.add(g);
                    if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(y) {
                        e.insert(k);
                        next.push(y);
                    }
                }
            }
            next.sort_unstable();
            offsets.extend(next.iter().map(|p| (*p, k)));
            shell_start.push(offsets.len());
            frontier = next;
        }

        Ok(LatticeGroup {
            dim,
            generators,
            max_radius,
            offsets,
            shell_start,
            dist,
        })
    }

    /// Standard generators `{±e_1,..,±e_d}`.
    pub fn standard(dim: usize, max_radius: u32) -> Result<Self> {
        let mut gens = Vec::new();
        for i in 0..dim {
            let mut c = [0i64; MAX_DIM];
            c[i] = 1;
            gens.push(Point { c });
            c[i] = -1;
            gens.push(Point { c });
        }
        LatticeGroup::new(dim, gens, max_radius)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Point] {
        &self.generators
    }

    pub fn max_radius(&self) -> u32 {
        self.max_radius
    }

    /// Largest `l_inf` radius of any generator: balls of radius `R` are
    /// contained in the box `[-R·rho, R·rho]^d`.
    pub fn generator_reach(&self) -> i64 {
        self.generators
            .iter()
            .map(|g| g.c.iter().map(|v| v.abs()).max().unwrap_or(0))
            .max()
            .unwrap_or(1)
            .max(1)
    }

    /// Word distance `d(x,y)`, memoized up to `max_radius`.
    pub fn word_distance(&self, x: &Point, y: &Point) -> Result<u32> {
        let diff = x.sub(y);
        self.dist.get(&diff).copied().ok_or_else(|| {
            Error::Capability(format!(
                "distance of {diff:?} exceeds the memoized radius {}",
                self.max_radius
            ))
        })
    }

    /// Word distance without the memoization cap, via targeted BFS. Intended
    /// for occasional queries (diameters of tiles); errors at `cap`.
    pub fn word_distance_far(&self, x: &Point, y: &Point, cap: u32) -> Result<u32> {
        let diff = x.sub(y);
        if let Some(d) = self.dist.get(&diff) {
            return Ok(*d);
        }
        let mut seen = HashSet::new();
        seen.insert(Point::origin());
        let mut frontier = vec![Point::origin()];
        for k in 1..=cap {
            let mut next = Vec::new();
            for p in &frontier {
                for g in &self.generators {
                    let q = p.add(g);
                    if q == diff {
                        return Ok(k);
                    }
                    if seen.insert(q) {
                        next.push(q);
                    }
                }
            }
            frontier = next;
        }
        Err(Error::Capability(format!(
            "distance of {diff:?} exceeds the search cap {cap}"
        )))
    }

    /// All offsets with word distance in `lo..=hi`, sorted by distance then
    /// lexicographically within each shell.
    pub fn offsets_with_distance(&self, lo: u32, hi: u32) -> Result<&[(Point, u32)]> {
        if hi > self.max_radius {
            return Err(Error::Capability(format!(
                "radius {hi} exceeds the memoized radius {}",
                self.max_radius
            )));
        }
        let a = self.shell_start[lo as usize];
        let b = self.shell_start[hi as usize + 1];
        Ok(&self.offsets[a..b])
    }

    /// Number of points at word distance exactly `k`.
    pub fn shell_size(&self, k: u32) -> Result<usize> {
        if k > self.max_radius {
            return Err(Error::Capability(format!(
                "radius {k} exceeds the memoized radius {}",
                self.max_radius
            )));
        }
        Ok(self.shell_start[k as usize + 1] - self.shell_start[k as usize])
    }

    /// Ball `B_R(center)`.
    pub fn ball(&self, center: &Point, r: u32) -> Result<VertexSet> {
        let offs = self.offsets_with_distance(0, r)?;
        Ok(VertexSet::from_points(
            offs.iter().map(|(o, _)| center.add(o)).collect(),
        ))
    }

    /// R-boundary of a finite set, computed by layered BFS along generators
    /// (exact word-metric distances, not limited by the memoized radius).
    pub fn boundary(&self, q: &VertexSet, r: u32, kind: BoundaryKind) -> VertexSet {
        match kind {
            BoundaryKind::Interior => self.interior_boundary(q, r),
            BoundaryKind::Exterior => self.exterior_boundary(q, r),
            BoundaryKind::Both => self.interior_boundary(q, r).union(&self.exterior_boundary(q, r)),
            BoundaryKind::Core => q.difference(&self.interior_boundary(q, r)),
        }
    }

    fn interior_boundary(&self, q: &VertexSet, r: u32) -> VertexSet {
        if r == 0 || q.is_empty() {
            return VertexSet::empty();
        }
        let inside: HashSet<Point> = q.points().iter().copied().collect();
        // Points of Q adjacent to the complement are at distance 1 from it.
        let mut marked: HashSet<Point> = HashSet::new();
        let mut frontier: Vec<Point> = Vec::new();
        for p in q.points() {
            if self.generators.iter().any(|g| !inside.contains(&p.add(g))) {
                marked.insert(*p);
                frontier.push(*p);
            }
        }
        for _ in 1..r {
            let mut next = Vec::new();
            for p in &frontier {
                for g in &self.generators {
                    let y = p.add(g);
                    if inside.contains(&y) && marked.insert(y) {
                        next.push(y);
                    }
                }
            }
            frontier = next;
        }
        VertexSet::from_points(marked.into_iter().collect())
    }

    fn exterior_boundary(&self, q: &VertexSet, r: u32) -> VertexSet {
        if r == 0 || q.is_empty() {
            return VertexSet::empty();
        }
        let inside: HashSet<Point> = q.points().iter().copied().collect();
        let mut marked: HashSet<Point> = HashSet::new();
        let mut frontier: Vec<Point> = Vec::new();
        for p in q.points() {
            for g in &self.generators {
                let y = p.add(g);
                if !inside.contains(&y) && marked.insert(y) {
                    frontier.push(y);
                }
            }
        }
        for _ in 1..r {
            let mut next = Vec::new();
            for p in &frontier {
                for g in &self.generators {
                    let y = p.add(g);
                    if !inside.contains(&y) && marked.insert(y) {
                        next.push(y);
                    }
                }
            }
            frontier = next;
        }
        VertexSet::from_points(marked.into_iter().collect())
    }

    /// Diameter of a finite set in the word metric. One shared BFS from the
    /// origin covers every pairwise difference, so the cost is a single ball
    /// enumeration of radius `diam`.
    pub fn diameter(&self, q: &VertexSet) -> Result<u32> {
        if q.len() <= 1 {
            return Ok(0);
        }
        let mut todo: HashSet<Point> = HashSet::new();
        for (i, x) in q.points().iter().enumerate() {
            for y in &q.points()[i + 1..] {
                todo.insert(x.sub(y));
                todo.insert(y.sub(x));
            }
        }
        let mut seen = HashSet::new();
        seen.insert(Point::origin());
        todo.remove(&Point::origin());
        let mut frontier = vec![Point::origin()];
        let cap = 65_536u32;
        for k in 1..=cap {
            let mut next = Vec::new();
            for p in &frontier {
                for g in &self.generators {
                    let y = p.add(g);
                    if seen.insert(y) {
                        todo.remove(&y);
                        next.push(y);
                    }
                }
            }
            if todo.is_empty() {
                return Ok(k);
            }
            frontier = next;
        }
        Err(Error::Capability(format!(
            "diameter exceeds the search cap {cap}"
        )))
    }
}

fn lattice_index(generators: &[Point], dim: usize) -> Option<u64> {
    // Hermite-style elimination of the generator rows; the subgroup they span
    // equals Z^d iff the triangular form has |det| = 1.
    let mut rows: Vec<[i64; MAX_DIM]> = generators.iter().map(|g| g.c).collect();
    let mut pivot_row = 0usize;
    let mut det: i128 = 1;
    for col in 0..dim {
        loop {
            let mut nonzero: Vec<usize> = (pivot_row..rows.len())
                .filter(|&r| rows[r][col] != 0)
                .collect();
            if nonzero.is_empty() {
                return None;
            }
            if nonzero.len() == 1 {
                let r = nonzero[0];
                rows.swap(pivot_row, r);
                break;
            }
            // Reduce the two smallest entries against each other (Euclid).
            nonzero.sort_by_key(|&r| rows[r][col].unsigned_abs());
            let (a, b) = (nonzero[0], nonzero[1]);
            let q = rows[b][col] / rows[a][col];
            for k in 0..dim {
                rows[b][k] -= q * rows[a][k];
            }
        }
        det *= rows[pivot_row][col] as i128;
        pivot_row += 1;
    }
    Some(det.unsigned_abs().min(u64::MAX as u128) as u64)
}

/// Strictly increasing sequence of monotile boxes `{0,..,n·base-1}^d`.
/// Every box tiles `Z^d` along the grid `(n·base)·Z^d`, and nested cubes are
/// automatically tempered.
#[derive(Clone, Debug)]
pub struct FolnerBoxes {
    base_side: i64,
}

impl FolnerBoxes {
    pub fn new(base_side: i64) -> Result<Self> {
        if base_side <= 0 {
            return Err(Error::Config(format!(
                "base side must be positive, got {base_side}"
            )));
        }
        Ok(FolnerBoxes { base_side })
    }

    pub fn side(&self, n: usize) -> i64 {
        self.base_side * n as i64
    }

    /// The n-th box (1-based).
    pub fn box_set(&self, dim: usize, n: usize) -> Result<VertexSet> {
        if n == 0 {
            return Err(Error::Config("box index is 1-based".into()));
        }
        VertexSet::cube(dim, self.side(n), &Point::origin())
    }
}

/// Partition the translates of a monotile box along the grid `L·Z^d + shift`
/// into those fully inside `window` and those straddling its boundary.
/// Returns the translate offsets.
pub fn tiling_partition(
    box_set: &VertexSet,
    dim: usize,
    shift: &Point,
    window: &VertexSet,
) -> Result<(Vec<Point>, Vec<Point>)> {
    let side = infer_cube_side(box_set, dim)?;
    let mut candidates: HashSet<Point> = HashSet::new();
    for w in window.points() {
        let mut c = [0i64; MAX_DIM];
        for i in 0..dim {
            c[i] = shift.c[i] + (w.c[i] - shift.c[i]).div_euclid(side) * side;
        }
        candidates.insert(Point { c });
    }
    let mut inside = Vec::new();
    let mut straddling = Vec::new();
    let mut sorted: Vec<Point> = candidates.into_iter().collect();
    sorted.sort_unstable();
    for t in sorted {
        let fully = box_set.points().iter().all(|b| window.contains(&b.add(&t)));
        if fully {
            inside.push(t);
        } else {
            straddling.push(t);
        }
    }
    Ok((inside, straddling))
}

fn infer_cube_side(box_set: &VertexSet, dim: usize) -> Result<i64> {
    if box_set.is_empty() {
        return Err(Error::Config("empty box".into()));
    }
    let first = box_set.points()[0];
    let last = box_set.points()[box_set.len() - 1];
    if !first.is_origin() {
        return Err(Error::Config("box must be anchored at the origin".into()));
    }
    let side = last.c[0] + 1;
    for i in 0..dim {
        if last.c[i] + 1 != side {
            return Err(Error::Config("box is not a cube".into()));
        }
    }
    if box_set.len() as u128 != (side as u128).pow(dim as u32) {
        return Err(Error::Config("box is not a full cube".into()));
    }
    Ok(side)
}
