//! Essential spectrum, decoupled segment spectra, gap scans with
//! argument-principle certification, and threshold modes.

use nalgebra::DMatrix;
use num_complex::Complex;
use serde_json::{json, Value};

use crate::conditions::ConditionMatrices;
use crate::error::{Error, Result};
use crate::graph::{ClosedFormSpinor, Component, EdgeSpinor, End, MetricGraph, PhysicalParams};
use crate::oracle::{discretize, eigs_window};
use crate::scalar::{abs, imag_unit, real, Real};
use crate::weyl::{kernel_modes, normalize, regularized_secular, secular};

/// `(-inf, -mc^2] U [mc^2, inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EssentialSpectrum<T> {
    pub threshold: T,
}

impl<T: Real> EssentialSpectrum<T> {
    pub fn contains(&self, x: T) -> bool {
        x.abs() >= self.threshold
    }

    pub fn to_json(&self) -> Value {
        let t = self.threshold.to_f64_lossy();
        json!({ "neg": ["-inf", -t], "pos": [t, "inf"] })
    }
}

pub fn essential_spectrum<T: Real>(p: &PhysicalParams<T>) -> EssentialSpectrum<T> {
    EssentialSpectrum { threshold: p.threshold() }
}

/// Transfer matrix of `D psi = lambda psi` over `[0, length]`:
/// `psi1' = (i/c)(lambda + mc^2) psi2`, `psi2' = (i/c)(lambda - mc^2) psi1`.
pub fn transfer_matrix<T: Real>(lambda: T, length: T, p: &PhysicalParams<T>) -> DMatrix<Complex<T>> {
    let a = p.threshold();
    let i = imag_unit::<T>();
    let gen = DMatrix::from_row_slice(
        2,
        2,
        &[real(T::zero()), i * ((lambda + a) / p.light_speed), i * ((lambda - a) / p.light_speed), real(T::zero())],
    );
    (gen * real(length)).exp()
}

/// Eigenvalues of one segment with `psi1(0) = 0`, `psi2(l) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSpectrum<T> {
    pub length: T,
    /// `sqrt(c^2 pi^2 (j + 1/2)^2 / l^2 + m^2 c^4)`, `j = 0..=j_max`.
    pub dispersion: Vec<T>,
    /// `sqrt(2 m c^2 pi^2 (j + 1/2)^2 / l^2 + m^2 c^4)`, the alternative
    /// closed form, reported for comparison.
    pub alternative: Vec<T>,
    /// Positive roots of the shooting determinant, ascending.
    pub shooting_pos: Vec<T>,
    /// Negative roots, by decreasing value.
    pub shooting_neg: Vec<T>,
    /// `max |shooting - dispersion|` over both signs.
    pub dispersion_error: T,
    pub dispersion_matches: bool,
    pub alternative_matches: bool,
}

/// Shooting determinant `psi2(l)` for the solution with `(psi1, psi2)(0) = (0, 1)`.
pub fn shooting_determinant<T: Real>(lambda: T, length: T, p: &PhysicalParams<T>) -> T {
    transfer_matrix(lambda, length, p)[(1, 1)].re
}

fn bisect_root<T: Real>(f: impl Fn(T) -> T, mut lo: T, mut hi: T) -> T {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == T::zero() {
            return mid;
        }
        if (fm > T::zero()) == (flo > T::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / T::lit(2.0)
}

/// Roots of the shooting determinant on one side of the gap. The scan grid
/// is uniform in the momentum `k = sqrt(lambda^2 - m^2 c^4) / c` with ten
/// points per `pi / l`; roots are located from the transfer matrix alone.
fn shoot<T: Real>(length: T, p: &PhysicalParams<T>, count: usize, sign: T) -> Vec<T> {
    let a = p.threshold();
    let c = p.light_speed;
    let dk = T::pi() / (T::lit(10.0) * length);
    let at = |n: usize| {
        let k = dk * T::from_usize(n).unwrap();
        (c * c * k * k + a * a).sqrt()
    };
    let f = |x: T| shooting_determinant(sign * x, length, p);
    let mut roots = Vec::with_capacity(count);
    let mut n = 0;
    let mut x0 = at(0);
    let mut f0 = f(x0);
    while roots.len() < count {
        n += 1;
        let x1 = at(n);
        let f1 = f(x1);
        if f1 == T::zero() {
            roots.push(sign * x1);
        } else if f0 != T::zero() && (f0 > T::zero()) != (f1 > T::zero()) {
            roots.push(sign * bisect_root(f, x0, x1));
        }
        x0 = x1;
        f0 = f1;
    }
    roots
}

pub fn segment_spectrum<T: Real>(length: T, p: &PhysicalParams<T>, j_max: usize) -> SegmentSpectrum<T> {
    let a = p.threshold();
    let c = p.light_speed;
    let pi = T::pi();
    let (mut dispersion, mut alternative) = (Vec::new(), Vec::new());
    for j in 0..=j_max {
        let q = pi * (T::from_usize(j).unwrap() + T::lit(0.5)) / length;
        dispersion.push((c * c * q * q + a * a).sqrt());
        alternative.push((T::lit(2.0) * a * q * q + a * a).sqrt());
    }
    let shooting_pos = shoot(length, p, j_max + 1, T::one());
    let shooting_neg = shoot(length, p, j_max + 1, -T::one());
    let mut dispersion_error = T::zero();
    let mut alt_error = T::zero();
    for j in 0..=j_max {
        for s in [shooting_pos[j], -shooting_neg[j]] {
            dispersion_error = dispersion_error.max((s - dispersion[j]).abs());
            alt_error = alt_error.max((s - alternative[j]).abs());
        }
    }
    let tol = T::lit(1e-10) * dispersion[j_max].max(T::one());
    SegmentSpectrum {
        length,
        dispersion,
        alternative,
        shooting_pos,
        shooting_neg,
        dispersion_error,
        dispersion_matches: dispersion_error <= tol,
        alternative_matches: alt_error <= tol,
    }
}

/// Outcome of an argument-principle certification.
#[derive(Debug, Clone, PartialEq)]
pub struct RootCertificate<T> {
    pub center: Complex<T>,
    pub radius: T,
    /// Rounded winding number of the secular function around the circle.
    pub winding: i64,
    /// Raw quadrature value of the winding number.
    pub winding_raw: T,
    /// Newton-refined root when `winding >= 1`.
    pub root: Option<Complex<T>>,
    /// `|s(root)|` relative to the largest `|s|` on the contour.
    pub residual: T,
}

fn on_cut_risk<T: Real>(g: &MetricGraph<T>, p: &PhysicalParams<T>, z0: Complex<T>, r: T) -> bool {
    if g.is_compact() || z0.im.abs() >= r {
        return false;
    }
    let half = (r * r - z0.im * z0.im).sqrt();
    z0.re.abs() + half >= p.threshold()
}

/// Counts zeros of the secular function inside `|z - z0| < radius` by the
/// argument principle (trapezoid rule on `s'/s`, `s'` by central
/// differences) and refines them by Newton's method.
///
/// Works with the pole-free form `s(z) prod cos(l_e k(z))`, whose zeros are
/// the eigenvalues. For graphs with half-lines the disk must stay off the
/// cuts.
pub fn refine_root<T: Real>(
    g: &MetricGraph<T>,
    cm: &ConditionMatrices<T>,
    p: &PhysicalParams<T>,
    z0: Complex<T>,
    radius: T,
) -> Result<RootCertificate<T>> {
    if on_cut_risk(g, p, z0, radius) {
        return Err(Error::ContourCrossesCut);
    }
    let f = |z: Complex<T>| regularized_secular(g, cm, z, p);
    let two_pi = T::two_pi();
    let mut nodes = 128usize;
    let (winding_raw, scale) = loop {
        let eta = radius * T::lit(1e-5);
        let mut acc = Complex::new(T::zero(), T::zero());
        let mut scale = T::zero();
        let mut smallest = T::max_value().unwrap();
        for j in 0..nodes {
            let t = two_pi * T::from_usize(j).unwrap() / T::from_usize(nodes).unwrap();
            let w = Complex::new(t.cos(), t.sin());
            let z = z0 + w * radius;
            let s = f(z)?;
            let ds = (f(z + real(eta))? - f(z - real(eta))?) / real(T::lit(2.0) * eta);
            let m = abs(s);
            scale = scale.max(m);
            smallest = smallest.min(m);
            // dz = i r w dt
            acc += ds / s * imag_unit::<T>() * w * radius;
            if m == T::zero() {
                return Err(Error::ContourTouchesPole);
            }
        }
        if smallest <= T::lit(1e-10) * scale {
            return Err(Error::ContourTouchesPole);
        }
        let n = acc / (imag_unit::<T>() * two_pi) * (two_pi / T::from_usize(nodes).unwrap());
        let err = (n.re - n.re.round()).abs();
        if err < T::lit(0.05) || nodes >= 8192 {
            break (n.re, scale);
        }
        nodes *= 2;
    };
    let winding = winding_raw.round().to_f64_lossy() as i64;
    let mut cert = RootCertificate { center: z0, radius, winding, winding_raw, root: None, residual: T::one() };
    if winding < 1 {
        return Ok(cert);
    }
    let target = T::lit(1e-12) * scale.max(T::one());
    let newton = |mult: T| -> Result<Option<(Complex<T>, T)>> {
        let mut z = z0;
        let mut best: Option<(Complex<T>, T)> = None;
        for _ in 0..80 {
            let s = f(z)?;
            let m = abs(s);
            if best.is_none_or(|b| m < b.1) {
                best = Some((z, m));
            }
            if m <= target {
                break;
            }
            let eta = (radius * T::lit(1e-6)).max(abs(z) * T::lit(1e-9));
            let ds = (f(z + real(eta))? - f(z - real(eta))?) / real(T::lit(2.0) * eta);
            if abs(ds) == T::zero() {
                break;
            }
            let step = s / ds * mult;
            z -= step;
            if abs(z - z0) > radius {
                break;
            }
            if abs(step) <= T::machine_eps() * abs(z).max(T::one()) {
                break;
            }
        }
        Ok(best)
    };
    let mut found = newton(T::one())?;
    if winding > 1 && found.is_none_or(|b| b.1 > target) {
        let alt = newton(T::from_i64(winding).unwrap())?;
        if let (Some(a), Some(b)) = (alt, found) {
            if a.1 < b.1 {
                found = Some(a);
            }
        }
    }
    if let Some((z, m)) = found {
        cert.root = Some(z);
        cert.residual = m / scale.max(T::one());
    }
    Ok(cert)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapScan<T> {
    pub samples: usize,
    pub epsilon: T,
    /// `(z, |s(z)|)` of the smallest sampled value.
    pub minimum: (T, T),
    /// Interior local minima of `|s|` below the candidate threshold.
    pub candidates: Vec<(T, T)>,
    /// Candidates confirmed as roots.
    pub certified: Vec<RootCertificate<T>>,
    /// Winding number of the secular function around an ellipse enclosing
    /// `[-mc^2 + eps, mc^2 - eps]`.
    pub enclosed_zeros: i64,
}

fn gap_winding<T: Real>(
    g: &MetricGraph<T>,
    cm: &ConditionMatrices<T>,
    p: &PhysicalParams<T>,
    eps: T,
) -> Result<i64> {
    // accumulated argument along the ellipse, refined until two
    // resolutions agree
    let a = p.threshold();
    let (ax, by) = (a - eps / T::lit(2.0), eps);
    let mut previous: Option<i64> = None;
    let mut nodes = 512usize;
    loop {
        let mut total = T::zero();
        let mut last: Option<Complex<T>> = None;
        let mut first: Option<Complex<T>> = None;
        for j in 0..nodes {
            let t = T::two_pi() * T::from_usize(j).unwrap() / T::from_usize(nodes).unwrap();
            let z = Complex::new(ax * t.cos(), by * t.sin());
            let s = regularized_secular(g, cm, z, p)?;
            if let Some(prev) = last {
                total += { let q = s / prev; q.im.atan2(q.re) };
            } else {
                first = Some(s);
            }
            last = Some(s);
        }
        if let (Some(f), Some(l)) = (first, last) {
            total += { let q = f / l; q.im.atan2(q.re) };
        }
        let n = (total / T::two_pi()).round().to_f64_lossy() as i64;
        if previous == Some(n) || nodes >= 1 << 16 {
            return Ok(n);
        }
        previous = Some(n);
        nodes *= 4;
    }
}

/// Samples `|s|` on `(-mc^2 + eps, mc^2 - eps)`, `eps = 1e-4 mc^2`, and
/// certifies candidate minima.
pub fn gap_scan<T: Real>(
    g: &MetricGraph<T>,
    cm: &ConditionMatrices<T>,
    p: &PhysicalParams<T>,
    n_samples: usize,
) -> Result<GapScan<T>> {
    let n = n_samples.max(100);
    let a = p.threshold();
    let eps = T::lit(1e-4) * a;
    let lo = -a + eps;
    let width = (a - eps) - lo;
    let xs: Vec<T> = (0..n).map(|i| lo + width * T::from_usize(i).unwrap() / T::from_usize(n - 1).unwrap()).collect();
    let vals = xs
        .iter()
        .map(|&x| secular(g, cm, real(x), p).map(|s| abs(s)))
        .collect::<Result<Vec<T>>>()?;
    let scale = vals.iter().fold(T::zero(), |m, &v| m.max(v)).max(T::one());
    let mut minimum = (xs[0], vals[0]);
    for (&x, &v) in xs.iter().zip(&vals) {
        if v < minimum.1 {
            minimum = (x, v);
        }
    }
    let mut candidates = Vec::new();
    let mut certified = Vec::new();
    for i in 1..n - 1 {
        if vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1] && vals[i] <= T::lit(1e-6) * scale {
            candidates.push((xs[i], vals[i]));
            let radius = (width / T::from_usize(n - 1).unwrap()).min(a - xs[i].abs()) * T::lit(0.9);
            let cert = refine_root(g, cm, p, real(xs[i]), radius)?;
            if cert.winding >= 1 {
                certified.push(cert);
            }
        }
    }
    let enclosed_zeros = gap_winding(g, cm, p, eps)?;
    Ok(GapScan { samples: n, epsilon: eps, minimum, candidates, certified, enclosed_zeros })
}

/// Interior local minimizers of `f` on `[lo, hi]`: grid search on `n`
/// points, then golden-section refinement inside each bracketing pair of
/// neighbours. Points where `f` fails (poles) count as `+inf`.
pub fn local_minimizers<T: Real>(f: impl Fn(T) -> Result<T>, lo: T, hi: T, n: usize) -> Vec<T> {
    let n = n.max(3);
    let step = (hi - lo) / T::from_usize(n - 1).unwrap();
    let inf = T::max_value().unwrap();
    let eval = |x: T| f(x).ok().filter(|v| v.is_finite()).unwrap_or(inf);
    let xs: Vec<T> = (0..n).map(|i| lo + step * T::from_usize(i).unwrap()).collect();
    let ys: Vec<T> = xs.iter().map(|&x| eval(x)).collect();
    let ratio = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut out = Vec::new();
    for i in 1..n - 1 {
        if !(ys[i] < inf && ys[i] <= ys[i - 1] && ys[i] < ys[i + 1]) {
            continue;
        }
        let (mut a, mut b) = (xs[i - 1], xs[i + 1]);
        let mut c = b - ratio * (b - a);
        let mut d = a + ratio * (b - a);
        let (mut fc, mut fd) = (eval(c), eval(d));
        for _ in 0..200 {
            if b - a <= T::lit(4.0) * T::machine_eps() * (a.abs() + b.abs()).max(T::one()) {
                break;
            }
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - ratio * (b - a);
                fc = eval(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + ratio * (b - a);
                fd = eval(d);
            }
        }
        let x = (a + b) / T::lit(2.0);
        // both neighbours of a kink can bracket the same minimizer
        if out.last().is_none_or(|&y: &T| (x - y).abs() > step) {
            out.push(x);
        }
    }
    out
}

/// Eigenfunction at a threshold `+-mc^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdMode<T> {
    pub lambda: T,
    pub spinor: ClosedFormSpinor<T>,
    /// Edges where the mode does not vanish identically.
    pub support: Vec<usize>,
}

fn support<T: Real>(psi: &ClosedFormSpinor<T>) -> Vec<usize> {
    psi.edges
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.upper.terms().is_empty() || !e.lower.terms().is_empty())
        .map(|(i, _)| i)
        .collect()
}

/// Drops terms whose coefficients are round-off relative to the largest.
fn clean<T: Real>(psi: &ClosedFormSpinor<T>) -> ClosedFormSpinor<T> {
    use crate::graph::Term;
    let mag = |t: &Term<T>| match *t {
        Term::Poly { slope, offset } => abs(slope).max(abs(offset)),
        Term::Trig { cos, sin, .. } => abs(cos).max(abs(sin)),
        Term::Exp { amp, .. } => abs(amp),
    };
    let big = psi
        .edges
        .iter()
        .flat_map(|e| e.upper.terms().iter().chain(e.lower.terms()))
        .fold(T::zero(), |m, t| m.max(mag(t)));
    let keep = |c: &Component<T>| {
        Component::from_terms(c.terms().iter().copied().filter(|t| mag(t) > T::lit(1e-12) * big))
    };
    ClosedFormSpinor::new(psi.edges.iter().map(|e| EdgeSpinor::new(keep(&e.upper), keep(&e.lower))).collect())
}

/// Square-integrable eigenfunctions at `lambda = +-mc^2`.
///
/// At the thresholds the half-line solutions are constant and not square
/// integrable, so half-lines carry zero and the kernel is taken over the
/// linear solutions on the segments. Modes are L2-normalized and mutually
/// orthogonal in coefficient space.
pub fn threshold_modes<T: Real>(
    g: &MetricGraph<T>,
    cm: &ConditionMatrices<T>,
    p: &PhysicalParams<T>,
) -> Result<Vec<ThresholdMode<T>>> {
    let mut out = Vec::new();
    for lambda in [p.threshold(), -p.threshold()] {
        let (modes, _) = kernel_modes(g, cm, real(lambda), p, false, T::lit(1e-10))?;
        for m in modes {
            let psi = normalize(&clean(&m), g, T::zero());
            out.push(ThresholdMode { lambda, support: support(&psi), spinor: psi });
        }
    }
    Ok(out)
}

/// Literal terminal-pair construction: for every vertex with two or more
/// pendant segments, consecutive pairs `(e, f)` get
/// `psi = (2 i m c A s, A)` at `+mc^2` and `psi = (0, F)` at `-mc^2`, with
/// `A_f = -A_e`, `F_f = -F_e` and `s` the distance from the shared vertex;
/// every other edge carries zero. These satisfy the eigenvalue equation and
/// the conditions at the shared vertex; the conditions at the pendant
/// vertices are left to [`crate::graph::vertex_residuals`].
pub fn terminal_pair_candidates<T: Real>(g: &MetricGraph<T>, p: &PhysicalParams<T>) -> Vec<ThresholdMode<T>> {
    let terminal = g.terminal_segments();
    let mut out = Vec::new();
    let mc = p.mass * p.light_speed;
    let i = imag_unit::<T>();
    let zero = real(T::zero());
    for v in 0..g.vertices().len() {
        let here: Vec<_> = terminal.iter().filter(|(_, ep)| ep.vertex == v).collect();
        for pair in here.windows(2) {
            for lambda in [p.threshold(), -p.threshold()] {
                let mut psi = ClosedFormSpinor::zero(g.edges().len());
                for (k, (edge, ep)) in pair.iter().enumerate() {
                    let amp = real(if k == 0 { T::one() } else { -T::one() });
                    let len = g.edge(*edge).length().expect("terminal edges are segments");
                    // reversing the coordinate flips the sign of psi2
                    let (slope_sign, offset, flip) = match ep.end {
                        End::Zero => (T::one(), T::zero(), T::one()),
                        End::Far => (-T::one(), len, -T::one()),
                    };
                    psi.edges[*edge] = if lambda > T::zero() {
                        let s = i * amp * (T::lit(2.0) * mc);
                        EdgeSpinor::new(
                            Component::linear(s * slope_sign, s * offset),
                            Component::constant(amp * flip),
                        )
                    } else {
                        EdgeSpinor::new(Component::constant(zero), Component::constant(amp * flip))
                    };
                }
                let psi = normalize(&psi, g, T::zero());
                out.push(ThresholdMode { lambda, support: support(&psi), spinor: psi });
            }
        }
    }
    out
}

/// Evidence for `|lambda| >= mc^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapCheck<T> {
    pub scan: GapScan<T>,
    /// Smallest `|lambda|` among discrete eigenvalues near the gap.
    pub oracle_min_abs: Option<T>,
    /// `max(0, mc^2 - min |lambda|)`.
    pub deficit: T,
    pub h: T,
    pub pass: bool,
}

/// Passes iff the scan certifies no root inside the gap and the discrete
/// spectrum stays outside `(-mc^2 + tol, mc^2 - tol)` with
/// `tol = 0.02 mc^2`.
pub fn gap_theorem_check<T: Real>(
    g: &MetricGraph<T>,
    cm: &ConditionMatrices<T>,
    p: &PhysicalParams<T>,
    h: T,
    halfline_length: Option<T>,
) -> Result<GapCheck<T>> {
    let scan = gap_scan(g, cm, p, 400)?;
    let op = discretize(g, p, h, halfline_length)?;
    let a = p.threshold();
    let near = eigs_window(&op, -a * T::lit(1.1), a * T::lit(1.1)).eigenvalues;
    let oracle_min_abs = near.iter().map(|x| x.abs()).reduce(|x, y| x.min(y));
    let deficit = oracle_min_abs.map_or(T::zero(), |m| (a - m).max(T::zero()));
    let pass = scan.certified.is_empty() && scan.enclosed_zeros == 0 && deficit < T::lit(0.02) * a;
    Ok(GapCheck { scan, oracle_min_abs, deficit, h, pass })
}

/// Summary of the spectral picture of one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport<T> {
    pub essential: EssentialSpectrum<T>,
    pub gap_roots: Vec<T>,
    pub thresholds: Vec<ThresholdMode<T>>,
    /// Per segment `(edge id, eigenvalues of the decoupled segment)`.
    pub segment_spectra: Vec<(String, Vec<T>)>,
}

pub fn spectral_report<T: Real>(
    g: &MetricGraph<T>,
    cm: &ConditionMatrices<T>,
    p: &PhysicalParams<T>,
    j_max: usize,
) -> Result<SpectralReport<T>> {
    let scan = gap_scan(g, cm, p, 400)?;
    let gap_roots = scan.certified.iter().filter_map(|c| c.root.map(|z| z.re)).collect();
    let thresholds = threshold_modes(g, cm, p)?;
    let segment_spectra = g
        .edges()
        .iter()
        .filter_map(|e| e.length().map(|l| (e, l)))
        .map(|(e, l)| {
            let s = segment_spectrum(l, p, j_max);
            let mut all: Vec<T> = s.shooting_neg.iter().rev().chain(&s.shooting_pos).copied().collect();
            all.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
            (e.id.clone(), all)
        })
        .collect();
    Ok(SpectralReport { essential: essential_spectrum(p), gap_roots, thresholds, segment_spectra })
}

impl<T: Real> SpectralReport<T> {
    pub fn to_json(&self, g: &MetricGraph<T>) -> Value {
        let f = |x: T| x.to_f64_lossy();
        json!({
            "essential": self.essential.to_json(),
            "gap_roots": self.gap_roots.iter().map(|&x| f(x)).collect::<Vec<_>>(),
            "thresholds": self.thresholds.iter().map(|m| json!({
                "lambda": f(m.lambda),
                "edges": m.support.iter().map(|&e| g.edge(e).id.clone()).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "segment_spectra": self.segment_spectra.iter()
                .map(|(id, v)| (id.clone(), json!(v.iter().map(|&x| f(x)).collect::<Vec<_>>())))
                .collect::<serde_json::Map<_, _>>(),
        })
    }
}
