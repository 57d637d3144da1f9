mod common;

use common::{c, load, CORPUS};
use gdirac_core::conditions::trace_vectors;
use gdirac_core::graph::{apply_dirac, vertex_residuals, ClosedFormSpinor, GraphBuilder, MetricGraph, PhysicalParams};
use gdirac_core::model::{builtin_model, model_f};
use gdirac_core::spectral::local_minimizers;
use gdirac_core::weyl::{
    assemble_m, branch_eval, defect_basis, edge_weyl_block, eigenfunction_from_kernel, has_pole, herglotz_min_eig,
    kernel_modes, secular,
};
use gdirac_core::{Complex64, Error};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn half() -> PhysicalParams<f64> {
    PhysicalParams::new(0.5, 1.0).unwrap()
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol
}

#[test]
fn branch_examples() {
    let p = half();
    let b = branch_eval(c(1.0, 0.0), &p);
    assert!(close(b.k, c(0.75f64.sqrt(), 0.0), 1e-15));
    assert!(close(b.k1.unwrap(), c(1.0 / 3.0f64.sqrt(), 0.0), 1e-15));
    let b = branch_eval(c(0.0, 0.0), &p);
    assert!(close(b.k, c(0.0, 0.5), 1e-16) && close(b.k1.unwrap(), c(0.0, 1.0), 1e-16));
    assert_eq!(branch_eval(c(0.5, 0.0), &p).k, c(0.0, 0.0));
    assert!(branch_eval(c(-0.5, 0.0), &p).k1.is_none());
}

#[test]
fn branch_identities_on_a_grid() {
    let p = PhysicalParams::new(0.8, 1.7).unwrap();
    let a = p.threshold();
    let mut worst: f64 = 0.0;
    for i in 0..40 {
        for j in 0..25 {
            let z = c(-5.0 + 10.0 * i as f64 / 39.0, -3.0 + 6.0 * j as f64 / 24.0 + 0.0123);
            let b = branch_eval(z, &p);
            let k1 = b.k1.unwrap();
            let scale = 1.0 + z.norm_sqr();
            worst = worst.max((p.light_speed.powi(2) * b.k * b.k - z * z + a * a).norm() / scale);
            worst = worst.max((p.light_speed * b.k - k1 * (z + a)).norm() / scale);
            assert!(b.k.im >= 0.0);
            let conj = branch_eval(z.conj(), &p).k;
            assert!(close(conj, -b.k.conj(), 1e-13 * scale));
        }
    }
    assert!(worst <= 1e-13, "{worst}");
}

#[test]
fn weyl_block_examples() {
    let p = half();
    let (g, _, _) = builtin_model::<f64>();
    let h = g.edge(g.edge_index("e1").unwrap());
    let s = g.edge(g.edge_index("e3").unwrap());
    let bh = edge_weyl_block(h, c(0.0, 0.0), &p).unwrap();
    assert!(close(bh[(0, 0)], c(-1.0, 0.0), 1e-15));
    let bs = edge_weyl_block(s, c(0.0, 0.0), &p).unwrap();
    let t = 0.5f64.tanh();
    let sech = 1.0 / 0.5f64.cosh();
    let expect = DMatrix::from_row_slice(2, 2, &[c(-t, 0.0), c(sech, 0.0), c(sech, 0.0), c(t, 0.0)]);
    assert!((bs.clone() - expect).camax() < 1e-7);
    assert!((bs[(0, 0)] - c(-0.4621172, 0.0)).norm() < 1e-7 && (bs[(0, 1)] - c(0.8868188, 0.0)).norm() < 1e-7);
    let far = edge_weyl_block(s, c(0.0, 1e5), &p).unwrap();
    let asym = DMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]);
    assert!((far - asym).camax() < 1e-4);
}

#[test]
fn model_weyl_matrix_at_zero() {
    let (g, p, _) = builtin_model::<f64>();
    let m = assemble_m(&g, c(0.0, 0.0), &p).unwrap();
    assert!(close(m[(0, 0)], c(-1.0, 0.0), 1e-15) && close(m[(1, 1)], c(-1.0, 0.0), 1e-15));
    let s = edge_weyl_block(g.edge(2), c(0.0, 0.0), &p).unwrap();
    assert!((m.view((2, 2), (2, 2)).into_owned() - s).camax() == 0.0);
    assert_eq!(m[(0, 1)], c(0.0, 0.0));
    let only_h = GraphBuilder::<f64>::new().halfline("a", "v").halfline("b", "v").build().unwrap();
    let z = c(0.3, 0.2);
    let md = assemble_m(&only_h, z, &p).unwrap();
    let k1 = branch_eval(z, &p).k1.unwrap();
    assert!(close(md[(0, 0)], c(0.0, 1.0) * k1, 1e-15) && md[(0, 1)] == c(0.0, 0.0));
}

fn herglotz_ok(g: &MetricGraph<f64>, p: &PhysicalParams<f64>, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..50 {
        let z = c(rng.gen_range(-4.0..4.0), rng.gen_range(1e-3..5.0));
        let m = assemble_m(g, z, p).unwrap();
        worst = worst.min(herglotz_min_eig(&m));
    }
    worst
}

#[test]
fn herglotz_on_the_corpus() {
    let (g, p, _) = builtin_model::<f64>();
    assert!(herglotz_min_eig(&assemble_m(&g, c(0.1, 0.5), &p).unwrap()) >= -1e-12);
    for (i, name) in CORPUS.iter().enumerate() {
        let (g, p, _) = load(name);
        let w = herglotz_ok(&g, &p, i as u64);
        assert!(w >= -1e-10, "{name}: {w}");
    }
}

#[test]
fn gap_reality_and_schwarz_symmetry() {
    for name in CORPUS {
        let (g, p, cm) = load(name);
        let a = p.threshold();
        for i in 0..21 {
            let x = -a * 0.999 + 1.998 * a * i as f64 / 20.0;
            let m = assemble_m(&g, c(x, 0.0), &p).unwrap();
            let im = m.iter().fold(0.0f64, |acc, z| acc.max(z.im.abs()));
            assert!(im <= 1e-13, "{name} at {x}: {im}");
            assert!((m.clone() - m.transpose()).camax() <= 1e-15);
        }
        // A and B carry 1/(ic) factors, so s(conj z) = eps conj(s(z)) with a
        // fixed unimodular eps per graph
        let mut eps: Option<Complex64> = None;
        for z in [c(0.3, 0.7), c(-2.0, 0.1), c(5.0, 2.0), c(0.0, 3.0)] {
            let (s, t) = (secular(&g, &cm, z, &p).unwrap(), secular(&g, &cm, z.conj(), &p).unwrap());
            let ratio = t / s.conj();
            assert!((ratio.norm() - 1.0).abs() < 1e-12, "{name}");
            let e = *eps.get_or_insert(ratio);
            assert!(close(ratio, e, 1e-12), "{name}");
        }
    }
}

#[test]
fn poles_only_outside_the_gap() {
    for name in CORPUS.iter().chain(&["model_star", "compact_star"]) {
        let (g, p, _) = load(name);
        let a = p.threshold();
        for i in 0..4001 {
            let x = -6.0 + 12.0 * i as f64 / 4000.0;
            if has_pole(&g, c(x, 0.0), &p) {
                assert!(x.abs() >= a);
            }
        }
        let l = g.edges().iter().filter_map(|e| e.length()).next().unwrap();
        // cos(l k) = 0 at k = pi / (2 l)
        let k = std::f64::consts::FRAC_PI_2 / l;
        let x = (p.light_speed.powi(2) * k * k + a * a).sqrt();
        assert!(has_pole(&g, c(x, 0.0), &p));
        assert!(matches!(assemble_m(&g, c(x, 0.0), &p), Err(Error::Pole { .. })));
    }
}

#[test]
fn model_secular_has_no_gap_zero() {
    let (g, p, cm) = builtin_model::<f64>();
    for i in 0..=180 {
        let x = -0.45 + 0.9 * i as f64 / 180.0;
        assert!(secular(&g, &cm, c(x, 0.0), &p).unwrap().norm() > 1.7);
        assert!(model_f(c(x, 0.0)).unwrap().re > 1.7);
    }
    for lambda in [0.0, 0.2, -0.3] {
        let err = eigenfunction_from_kernel(&g, &cm, lambda, &p).unwrap_err();
        match err {
            Error::KernelEmpty { sigma_min } => assert!(sigma_min > 1e-3),
            e => panic!("{e}"),
        }
    }
}

#[test]
fn model_minimizers() {
    let (g, p, cm) = builtin_model::<f64>();
    let s = local_minimizers(|x| secular(&g, &cm, c(x, 0.0), &p).map(|v| v.norm()), -2.0, 2.0, 4001);
    let f = local_minimizers(|x| model_f(c(x, 0.0)).map(|v| v.norm()), -2.0, 2.0, 4001);
    assert_eq!(s.len(), 2);
    assert!((s[0] + 0.5).abs() < 1e-8 && (s[1] - 0.5).abs() < 1e-8);
    // the printed f has a shallow extra minimum at z = 0 that s lacks
    assert_eq!(f.len(), 3);
    assert!((f[0] + 0.5).abs() < 1e-8 && f[1].abs() < 1e-6 && (f[2] - 0.5).abs() < 1e-8);
}

#[test]
fn defect_bases_solve_the_equation() {
    let p = PhysicalParams::new(0.5, 1.0).unwrap();
    let (g, _, _) = load("corpus_2");
    let mut total = 0;
    for z in [c(0.1, 0.0), c(0.3, 0.8), c(-2.0, 0.4)] {
        total = 0;
        for e in g.edges() {
            let basis = defect_basis(e, z, &p).unwrap();
            total += basis.len();
            for b in &basis {
                let psi = ClosedFormSpinor::new(vec![b.clone()]);
                let r = apply_dirac(&psi, &p).add(&psi.scale(-z));
                for x in [0.0, 0.25, 0.5] {
                    let (u, l) = r.eval(0, x);
                    let (pu, pl) = psi.eval(0, x);
                    assert!(u.norm().max(l.norm()) <= 1e-12 * (1.0 + pu.norm().max(pl.norm())));
                }
            }
            if let Some(l) = e.length() {
                let (u0, l0) = basis[0].eval(0.0);
                let (u1, l1) = basis[1].eval(0.0);
                assert!((u0 * l1 - u1 * l0).norm() > 0.5);
                let _ = l;
            }
        }
    }
    assert_eq!(total, 2 * g.segment_count() + g.halfline_count());
    let h = GraphBuilder::<f64>::new().halfline("h", "v").build().unwrap();
    let sol = defect_basis(h.edge(0), c(0.0, 0.0), &p).unwrap();
    let (u, l) = sol[0].eval(2.0);
    assert!(close(u, c((-1.0f64).exp(), 0.0), 1e-15) && close(l, c(0.0, (-1.0f64).exp()), 1e-15));
}

#[test]
fn interval_eigenfunction_from_kernel() {
    let (g, p, cm) = load("interval");
    let lambda = (1.0 + std::f64::consts::PI.powi(2)).sqrt();
    let psi = eigenfunction_from_kernel(&g, &cm, lambda, &p).unwrap();
    let r = apply_dirac(&psi, &p).add(&psi.scale(c(-lambda, 0.0)));
    for x in [0.0, 0.3, 0.9] {
        let (u, l) = r.eval(0, x);
        assert!(u.norm().max(l.norm()) < 1e-8);
    }
    assert!(vertex_residuals(&g, &psi).iter().all(|v| v.max_abs() < 1e-8));
    let (g0, g1) = trace_vectors(&g, &p, &psi);
    assert!(cm.residual(&g0, &g1).norm() < 1e-8);
    let (modes, _) = kernel_modes(&g, &cm, c(lambda, 0.0), &p, false, 1e-7).unwrap();
    assert_eq!(modes.len(), 1);
}
