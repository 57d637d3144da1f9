mod common;

use common::{c, load, CORPUS};
use gdirac_core::conditions::assemble;
use gdirac_core::graph::{apply_dirac, vertex_residuals, ClosedFormSpinor, GraphBuilder, MetricGraph, PhysicalParams};
use gdirac_core::model::builtin_model;
use gdirac_core::spectral::{
    essential_spectrum, gap_scan, gap_theorem_check, refine_root, segment_spectrum, spectral_report,
    terminal_pair_candidates, threshold_modes, ThresholdMode,
};
use gdirac_core::Error;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn eigen_residual(psi: &ClosedFormSpinor<f64>, lambda: f64, p: &PhysicalParams<f64>, g: &MetricGraph<f64>) -> f64 {
    let r = apply_dirac(psi, p).add(&psi.scale(c(-lambda, 0.0)));
    let mut worst: f64 = 0.0;
    for (e, edge) in g.edges().iter().enumerate() {
        let len = edge.length().unwrap_or(5.0);
        for i in 0..=10 {
            let (u, l) = r.eval(e, len * i as f64 / 10.0);
            worst = worst.max(u.norm()).max(l.norm());
        }
    }
    worst
}

#[test]
fn essential_rays() {
    for (m, cc, t) in [(0.5, 1.0, 0.5), (1.0, 1.0, 1.0), (2.0, 3.0, 18.0)] {
        let e = essential_spectrum(&PhysicalParams::new(m, cc).unwrap());
        assert_eq!(e.threshold, t);
    }
    let json = essential_spectrum(&PhysicalParams::new(0.5, 1.0).unwrap()).to_json();
    assert_eq!(json.to_string(), r#"{"neg":["-inf",-0.5],"pos":[0.5,"inf"]}"#);
}

#[test]
fn segment_spectrum_examples() {
    let one = PhysicalParams::new(1.0, 1.0).unwrap();
    let s: gdirac_core::spectral::SegmentSpectrum<f64> = segment_spectrum(1.0, &one, 0);
    assert!((s.shooting_pos[0] - 1.862_095_889_118_586_6).abs() < 1e-10);
    assert!((s.shooting_neg[0] + 1.862_095_889_118_586_6).abs() < 1e-10);
    let half = PhysicalParams::new(0.5, 1.0).unwrap();
    let s: gdirac_core::spectral::SegmentSpectrum<f64> = segment_spectrum(1.0, &half, 0);
    let expect = (0.25f64 + std::f64::consts::PI.powi(2) / 4.0).sqrt();
    assert!((s.shooting_pos[0] - expect).abs() < 1e-10);
    let lowest: Vec<f64> = [1.0, 2.0, 4.0, 8.0].iter().map(|&l| segment_spectrum(l, &half, 0).shooting_pos[0]).collect();
    assert!(lowest.windows(2).all(|w| w[1] < w[0]));
    assert!(lowest.iter().all(|&x| x > 0.5));
    assert!(lowest[3] - 0.5 < 0.04);
}

#[test]
fn dispersion_matches_shooting_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let (m, cc, l) = (rng.gen_range(0.2..2.0), rng.gen_range(0.3..3.0), rng.gen_range(0.3..3.0));
        let s: gdirac_core::spectral::SegmentSpectrum<f64> = segment_spectrum(l, &PhysicalParams::new(m, cc).unwrap(), 5);
        assert!(s.dispersion_matches, "m={m} c={cc} l={l}: {}", s.dispersion_error);
        for (x, y) in s.shooting_pos.iter().zip(&s.shooting_neg) {
            assert!((x + y).abs() <= 1e-10 * x);
        }
    }
}

#[test]
fn model_gap_scan() {
    let (g, p, cm) = builtin_model::<f64>();
    let scan = gap_scan(&g, &cm, &p, 400).unwrap();
    assert!(scan.candidates.is_empty() && scan.certified.is_empty());
    assert_eq!(scan.enclosed_zeros, 0);
    assert!((scan.minimum.0.abs() - (0.5 - scan.epsilon)).abs() < 1e-12);
    assert!((scan.minimum.1 - 16.0 / 9.0).abs() < 0.03);
}

#[test]
fn threshold_star_scan_has_minima_at_the_edges_only() {
    let (g, p, cm) = load("threshold_star");
    let scan = gap_scan(&g, &cm, &p, 1000).unwrap();
    assert!(scan.certified.is_empty());
    assert_eq!(scan.enclosed_zeros, 0);
    assert!(scan.minimum.0.abs() > 0.49);
}

#[test]
fn corpus_has_no_gap_roots() {
    for name in CORPUS {
        let (g, p, cm) = load(name);
        let scan = gap_scan(&g, &cm, &p, 400).unwrap();
        assert!(scan.certified.is_empty(), "{name}");
        assert_eq!(scan.enclosed_zeros, 0, "{name}");
    }
}

#[test]
fn refine_root_examples() {
    let (g, p, cm) = builtin_model::<f64>();
    let cert = refine_root(&g, &cm, &p, c(0.0, 0.0), 0.1).unwrap();
    assert_eq!(cert.winding, 0);
    assert!(cert.root.is_none());
    assert!(matches!(refine_root(&g, &cm, &p, c(0.45, 0.0), 0.1), Err(Error::ContourCrossesCut)));

    let (g, p, cm) = load("decoupled_segment");
    let exact = segment_spectrum(1.0, &p, 0).shooting_pos[0];
    let cert = refine_root(&g, &cm, &p, c(exact + 0.02, 0.01), 0.1).unwrap();
    assert_eq!(cert.winding, 1);
    let z = cert.root.unwrap();
    assert!((z.re - exact).abs() < 1e-9 && z.im.abs() < 1e-9, "{z}");
    assert!(cert.residual <= 1e-12);
}

fn check_modes(g: &MetricGraph<f64>, p: &PhysicalParams<f64>, modes: &[ThresholdMode<f64>]) {
    for m in modes {
        assert!(eigen_residual(&m.spinor, m.lambda, p, g) <= 1e-12);
        assert!(vertex_residuals(g, &m.spinor).iter().all(|r| r.max_abs() <= 1e-12));
    }
}

#[test]
fn threshold_kernels() {
    // a compact graph carries the constant mode at +mc^2
    let (g, p, cm) = load("compact_star");
    let modes = threshold_modes(&g, &cm, &p).unwrap();
    assert_eq!(modes.iter().filter(|m| m.lambda > 0.0).count(), 1);
    assert_eq!(modes.iter().filter(|m| m.lambda < 0.0).count(), 0);
    check_modes(&g, &p, &modes);

    // a cycle carries a circulating psi2 mode at -mc^2
    let (g, p, cm) = load("loop_halfline");
    let modes = threshold_modes(&g, &cm, &p).unwrap();
    assert_eq!(modes.len(), 1);
    assert!(modes[0].lambda < 0.0);
    assert_eq!(modes[0].support, vec![g.edge_index("loop").unwrap()]);
    check_modes(&g, &p, &modes);

    // noncompact trees have none
    for name in ["model_star", "threshold_star"] {
        let (g, p, cm) = load(name);
        assert!(threshold_modes(&g, &cm, &p).unwrap().is_empty(), "{name}");
    }
}

#[test]
fn terminal_pair_construction() {
    let (g, p, _) = load("threshold_star");
    let cands = terminal_pair_candidates(&g, &p);
    assert_eq!(cands.len(), 2);
    assert!(cands.iter().any(|m| m.lambda == 0.5) && cands.iter().any(|m| m.lambda == -0.5));
    let centre = g.vertex_index("v0").unwrap();
    let terminal: Vec<usize> = ["e2", "e3"].iter().map(|id| g.edge_index(id).unwrap()).collect();
    for m in &cands {
        assert!(eigen_residual(&m.spinor, m.lambda, &p, &g) <= 1e-14);
        let res = vertex_residuals(&g, &m.spinor);
        assert!(res[centre].max_abs() <= 1e-14);
        assert_eq!(m.support, terminal);
        // the pendant vertices see psi2 != 0
        assert!(res.iter().filter(|r| r.vertex != centre).all(|r| r.balance.norm() > 0.1));
    }
    let (m, p2, _) = builtin_model::<f64>();
    assert!(terminal_pair_candidates(&m, &p2).is_empty());

    let three = GraphBuilder::<f64>::new()
        .segment("a", "o", "x", 1.0)
        .segment("b", "o", "y", 1.5)
        .segment("d", "o", "z", 0.7)
        .halfline("h", "o")
        .build()
        .unwrap();
    let cands = terminal_pair_candidates(&three, &p);
    for sign in [1.0, -1.0] {
        let modes: Vec<_> = cands.iter().filter(|m| m.lambda * sign > 0.0).collect();
        assert!(modes.len() >= 2);
        // independence of the psi2 values at the centre
        let cols: Vec<_> = modes
            .iter()
            .map(|m| ["a", "b", "d"].map(|id| m.spinor.eval(three.edge_index(id).unwrap(), 0.0).1))
            .collect();
        let mat = DMatrix::from_fn(3, cols.len(), |i, j| cols[j][i]);
        assert_eq!(mat.rank(1e-10), modes.len());
    }
}

#[test]
fn gap_theorem_holds() {
    let h = 1.0 / 400.0;
    for name in CORPUS.iter().chain(&["model_star", "threshold_star"]) {
        let (g, p, cm) = load(name);
        let l = 12.0 * p.light_speed / p.threshold();
        let check = gap_theorem_check(&g, &cm, &p, h, (!g.is_compact()).then_some(l)).unwrap();
        assert!(check.pass, "{name}: deficit {}", check.deficit);
        assert!(check.deficit < 0.02 * p.threshold());
    }
}

#[test]
fn report_json() {
    let (g, p, _) = load("compact_star");
    let cm = assemble(&g, &p);
    let report = spectral_report(&g, &cm, &p, 2).unwrap();
    let json = report.to_json(&g);
    assert_eq!(json["essential"]["pos"][1], "inf");
    assert_eq!(json["gap_roots"].as_array().unwrap().len(), 0);
    assert_eq!(json["thresholds"][0]["lambda"], 1.0);
    assert_eq!(json["thresholds"][0]["edges"].as_array().unwrap().len(), 3);
    assert_eq!(json["segment_spectra"]["c"].as_array().unwrap().len(), 6);
}
