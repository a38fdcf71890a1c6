//! Counting-function inequalities on sampled windows: boundedness,
//! translation invariance, weak additivity of the eroded restrictions, the
//! restricted-versus-induced comparison, and the boundary-defect trace bound.
//! Each bound is asserted on every sampled configuration that passes the
//! long-edge census check.

use std::sync::Arc;

use idslab_core::lattice::{pt1, BoundaryKind, LatticeGroup, VertexSet};
use idslab_core::percolation::{
    long_edge_census, sample_window, PercolationModel, Profile, WindowGraph,
};
use idslab_core::spectral::{
    count_function, graph_laplacian, induced_laplacian_compressed, laplacian_compressed,
    restricted_laplacian, boundary_defect, CountConfig, FiniteGraph, StepFunction,
};

fn geometric() -> PercolationModel {
    let g = Arc::new(LatticeGroup::standard(1, 64).unwrap());
    PercolationModel::new(g, Profile::Geometric { a: 0.25, r: 0.5 }, 1.0, 1e-4).unwrap()
}

fn interval(a: i64, b: i64) -> VertexSet {
    VertexSet::from_points((a..b).map(pt1).collect())
}

fn counting(w: &WindowGraph, q: &VertexSet) -> StepFunction {
    count_function(&restricted_laplacian(w, q).unwrap(), &CountConfig::default()).unwrap()
}

#[test]
fn counting_functions_are_linearly_bounded() {
    let m = geometric();
    let q = interval(0, 300);
    let w = sample_window(3, &m, &q, 14).unwrap();
    let r = 2;
    let core = m.group().boundary(&q, r, BoundaryKind::Core);
    let f = counting(&w, &core);
    assert!(f.final_value() <= q.len() as f64);
    // and for plain finite graphs, by the vertex count
    let s = FiniteGraph::dimer(pt1(0), pt1(1)).unwrap();
    let g = count_function(&graph_laplacian(&s), &CountConfig::default()).unwrap();
    assert!(g.final_value() <= s.vertices().len() as f64);
}

#[test]
fn translation_leaves_counting_functions_unchanged() {
    let v = VertexSet::from_points(vec![pt1(0), pt1(1), pt1(3), pt1(4)]);
    let s = FiniteGraph::new(
        v,
        &[(pt1(0), pt1(1)), (pt1(1), pt1(3)), (pt1(3), pt1(4))],
    )
    .unwrap();
    let f = count_function(&graph_laplacian(&s), &CountConfig::default()).unwrap();
    for shift in [-7i64, 2, 1000] {
        let t = s.translate(&pt1(shift));
        let g = count_function(&graph_laplacian(&t), &CountConfig::default()).unwrap();
        // identical matrices, bitwise identical functions
        assert_eq!(f.breakpoints(), g.breakpoints());
        assert_eq!(f.values(), g.values());
    }
}

#[test]
fn weak_additivity_of_eroded_restrictions() {
    let m = geometric();
    let group = m.group().clone();
    let q = interval(0, 1200);
    let r = m.r_zero().unwrap();
    let (_, tau) = m.moment_constants().unwrap();
    let delta = 1.0 / tau;
    let eps = m.epsilon_tail(r).unwrap();
    let r_max = 16;
    let pieces: Vec<VertexSet> = (0..4).map(|i| interval(i * 300, (i + 1) * 300)).collect();
    let mut checked = 0;
    for seed in 0..6u64 {
        let w = sample_window(seed, &m, &q, r_max).unwrap();
        let census = long_edge_census(&w, &q, r).unwrap();
        if census.omega1(eps, delta) {
            continue;
        }
        checked += 1;
        let whole = counting(&w, &group.boundary(&q, r, BoundaryKind::Core));
        let parts: Vec<StepFunction> = pieces
            .iter()
            .map(|p| counting(&w, &group.boundary(p, r, BoundaryKind::Core)))
            .collect();
        let part_refs: Vec<(f64, &StepFunction)> = parts.iter().map(|f| (1.0, f)).collect();
        let sum = StepFunction::weighted_sum(&part_refs).unwrap();
        let observed = whole.sup_distance_resolved(&sum, 1e-9);
        let boundary_sum: usize = pieces
            .iter()
            .map(|p| group.boundary(p, r, BoundaryKind::Both).len())
            .sum();
        let bound = 4.0 * q.len() as f64 * (eps + delta) + 4.0 * boundary_sum as f64;
        assert!(observed <= bound, "seed {seed}: {observed} > {bound}");
    }
    assert!(checked >= 4, "census check rejected almost every seed");
}

#[test]
fn restricted_and_induced_countings_agree_up_to_long_edges() {
    let m = geometric();
    let group = m.group().clone();
    let q = interval(0, 1200);
    let r = m.r_zero().unwrap();
    let (_, tau) = m.moment_constants().unwrap();
    let delta = 1.0 / tau;
    let eps = m.epsilon_tail(r).unwrap();
    let cfg = CountConfig::default();
    let pieces: Vec<VertexSet> = (0..4).map(|i| interval(i * 300, (i + 1) * 300)).collect();
    let mut checked = 0;
    for seed in 0..6u64 {
        let w = sample_window(seed, &m, &q, 16).unwrap();
        let census = long_edge_census(&w, &q, r).unwrap();
        if census.omega1(eps, delta) {
            continue;
        }
        checked += 1;
        let mut total = 0.0;
        for p in &pieces {
            let core = group.boundary(p, r, BoundaryKind::Core);
            let restricted = count_function(&restricted_laplacian(&w, &core).unwrap(), &cfg).unwrap();
            let induced =
                count_function(&induced_laplacian_compressed(&w, p, &core).unwrap(), &cfg).unwrap();
            total += restricted.sup_distance_resolved(&induced, 1e-9);
        }
        let bound = q.len() as f64 * (eps + delta);
        assert!(total <= bound, "seed {seed}: {total} > {bound}");
    }
    assert!(checked >= 4, "census check rejected almost every seed");
}

#[test]
fn defect_trace_bounded_by_long_edge_census() {
    let m = geometric();
    let q = interval(0, 400);
    let r = 3;
    for seed in 0..20u64 {
        let w = sample_window(seed, &m, &q, 14).unwrap();
        let census = long_edge_census(&w, &q, r).unwrap();
        let defect = boundary_defect(&w, &q, r).unwrap();
        let trace: f64 = defect.diag().iter().sum();
        // every edge out of q from the eroded core is longer than r
        assert!(trace.abs() as u64 <= census.total(), "seed {seed}");
    }
}

#[test]
fn compressed_finite_graph_counting_matches_window_induced() {
    // the abstract compression of a finite graph agrees with the
    // window-based induced compression on the same subgraph
    let m = geometric();
    let q = interval(0, 60);
    let w = sample_window(11, &m, &q, 14).unwrap();
    let core = m.group().boundary(&q, 2, BoundaryKind::Core);
    // materialize the induced subgraph on q as a FiniteGraph
    let ext = w.extended();
    let mut edges = Vec::new();
    for (i, j) in w.edges() {
        let a = ext.points()[i as usize];
        let b = ext.points()[j as usize];
        if q.contains(&a) && q.contains(&b) {
            edges.push((a, b));
        }
    }
    let s = FiniteGraph::new(q.clone(), &edges).unwrap();
    let cfg = CountConfig::default();
    let via_graph = count_function(&laplacian_compressed(&s, &core).unwrap(), &cfg).unwrap();
    let via_window =
        count_function(&induced_laplacian_compressed(&w, &q, &core).unwrap(), &cfg).unwrap();
    assert_eq!(via_graph.breakpoints(), via_window.breakpoints());
    assert_eq!(via_graph.values(), via_window.values());
}
