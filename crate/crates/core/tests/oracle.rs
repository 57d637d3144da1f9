use std::f64::consts::PI;

use gdirac_core::graph::{GraphBuilder, MetricGraph, PhysicalParams};
use gdirac_core::model::model_graph;
use gdirac_core::oracle::{
    convergence_study, dense_eigensystem, discretize, eigen_residual, eigs_window, eigs_window_with_vectors,
    gap_eigenvalues, square_spectrum_check, symmetry_residual,
};

fn interval(len: f64) -> MetricGraph<f64> {
    GraphBuilder::new().segment("e", "u", "v", len).build().unwrap()
}

fn params(m: f64, c: f64) -> PhysicalParams<f64> {
    PhysicalParams::new(m, c).unwrap()
}

#[test]
fn interval_spectrum() {
    let g = interval(1.0);
    let p = params(1.0, 1.0);
    let op = discretize(&g, &p, 1.0 / 400.0, None).unwrap();
    assert!(op.hermiticity_residual() <= 1e-13);
    let eigs = eigs_window(&op, 0.5, 10.0).eigenvalues;
    let expect: Vec<f64> = (0..4).map(|j| (1.0 + (j as f64 * PI).powi(2)).sqrt()).collect();
    assert_eq!(eigs.len(), 4, "{eigs:?}");
    for (x, e) in eigs.iter().zip(&expect) {
        assert!((x - e).abs() / e < 0.01, "{x} vs {e}");
    }
    // exact constant mode
    assert!((eigs[0] - 1.0).abs() < 1e-12);
}

#[test]
fn slicing_agrees_with_dense_solver() {
    let g: MetricGraph<f64> = GraphBuilder::new()
        .segment("a", "o", "x", 1.0)
        .segment("b", "o", "y", 0.7)
        .segment("loop", "x", "x", 0.9)
        .halfline("h", "o")
        .clamp("y")
        .build()
        .unwrap();
    let p = params(0.8, 1.3);
    let op = discretize(&g, &p, 1.0 / 16.0, Some(13.0)).unwrap();
    let dense = dense_eigensystem(&op);
    let sliced = eigs_window(&op, -1e3, 1e3).eigenvalues;
    assert_eq!(dense.len(), sliced.len());
    for (a, b) in dense.eigenvalues.iter().zip(&sliced) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
    assert!(eigen_residual(&op, &dense).unwrap() < 1e-10);
}

#[test]
fn inverse_iteration_vectors() {
    let g: MetricGraph<f64> = GraphBuilder::new()
        .segment("a", "o", "x", 1.0)
        .segment("b", "o", "y", 1.0)
        .segment("c", "o", "z", 1.0)
        .build()
        .unwrap();
    let p = params(0.5, 1.0);
    let op = discretize(&g, &p, 1.0 / 200.0, None).unwrap();
    // symmetric star: degenerate pairs
    let sys = eigs_window_with_vectors(&op, 0.4, 5.0);
    assert!(sys.len() >= 4);
    assert!(eigen_residual(&op, &sys).unwrap() < 1e-8);
    let v = sys.vectors.as_ref().unwrap();
    for i in 0..v.len() {
        for j in 0..i {
            assert!(v[i].dotc(&v[j]).norm() < 1e-8);
        }
    }
    let s = sys.sampled(&op).unwrap();
    assert!((s[0].norm_squared() - 1.0).abs() < 1e-12);
}

#[test]
fn model_star_has_empty_gap() {
    let (g, p) = model_graph::<f64>(true);
    let op = discretize(&g, &p, 1.0 / 400.0, Some(40.0)).unwrap();
    assert!(gap_eigenvalues(&op, 0.05).is_empty());
    assert!(symmetry_residual(&op) <= 1e-12, "{}", symmetry_residual(&op));
}

#[test]
fn flipped_balance_is_detected() {
    let (g, p) = model_graph::<f64>(false);
    let op = discretize(&g, &p, 1.0 / 100.0, Some(20.0)).unwrap();
    let bad = op.with_flipped_balance(0);
    assert!(symmetry_residual(&bad) >= 1e-3);
    assert!(bad.hermiticity_residual() > 1.0);
}

#[test]
fn squared_spectrum_matches_laplacian() {
    let p = params(0.5, 1.0);
    let rep = square_spectrum_check(&interval(1.0), &p, 1.0 / 400.0, 5).unwrap();
    assert!(rep.max_mismatch < 1e-9, "{rep:?}");
    for (j, mu) in rep.mapped.iter().enumerate() {
        let exact = (j as f64 * PI).powi(2);
        assert!((mu - exact).abs() / exact.max(1.0) < 0.01, "{mu} vs {exact}");
    }
}

#[test]
fn decoupled_segment_convergence() {
    let g: MetricGraph<f64> = GraphBuilder::new().segment("e", "u", "v", 1.0).clamp("u").build().unwrap();
    let p = params(1.0, 1.0);
    let target = (1.0 + PI * PI / 4.0).sqrt();
    let rep = convergence_study(&g, &p, target, &[1.0 / 50.0, 1.0 / 100.0, 1.0 / 200.0], None).unwrap();
    println!("{rep:?}");
    assert!(rep.order.unwrap() >= 0.9);
}
