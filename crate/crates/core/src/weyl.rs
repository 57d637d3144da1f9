//! Branch of `k(z)`, Weyl blocks, the Weyl matrix and the secular function.

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex;

use crate::conditions::{trace_dimension, ConditionMatrices, TraceIndexMap};
use crate::error::{Error, Result};
use crate::graph::{ClosedFormSpinor, Component, Edge, EdgeKind, EdgeSpinor, End, MetricGraph, PhysicalParams};
use crate::scalar::{abs, imag_unit, real, Real};

/// `k(z)` and `k1(z)` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchScalar<T> {
    pub z: Complex<T>,
    pub k: Complex<T>,
    /// `c k / (z + m c^2)`; `None` at `z = -m c^2` where it blows up.
    pub k1: Option<Complex<T>>,
    /// `z` real with `|z| > m c^2`; values are limits from `Im z > 0`.
    pub on_cut: bool,
}

/// Evaluates `k(z) = (i/c) sqrt(m^2 c^4 - z^2)` on the plane cut along
/// `(-inf, -mc^2] U [mc^2, inf)`, so `Im k >= 0` and `k > 0` for real
/// `z > mc^2`. Real points on the cuts get their upper half-plane limit.
pub fn branch_eval<T: Real>(z: Complex<T>, p: &PhysicalParams<T>) -> BranchScalar<T> {
    let a = p.threshold();
    let c = p.light_speed;
    let zero = Complex::new(T::zero(), T::zero());
    let (k, on_cut) = if z.im == T::zero() && z.re.abs() >= a {
        let x = z.re;
        let q = ((x - a) * (x + a)).sqrt() / c;
        (real(if x < T::zero() { -q } else { q }), x.abs() > a)
    } else {
        let w = (real(a) - z) * (real(a) + z);
        (imag_unit::<T>() * w.sqrt() / c, false)
    };
    let zp = z + real(a);
    let k1 = if zp == zero {
        None
    } else if k == zero {
        Some(zero)
    } else {
        Some(k * c / zp)
    };
    BranchScalar { z, k, k1, on_cut }
}

/// `tan(w)`, without the `inf/inf` of the textbook formula at large `|Im w|`.
fn tan_stable<T: Real>(w: Complex<T>) -> Complex<T> {
    let (x2, y2) = (w.re * T::lit(2.0), w.im * T::lit(2.0));
    if y2.abs() > T::lit(40.0) {
        let e = (-y2.abs()).exp();
        let sign = if y2 > T::zero() { T::one() } else { -T::one() };
        return Complex::new(T::lit(2.0) * x2.sin() * e, sign * (T::one() - T::lit(2.0) * x2.cos() * e));
    }
    let den = x2.cos() + y2.cosh();
    Complex::new(x2.sin() / den, y2.sinh() / den)
}

/// `sec(w)`; `None` on a pole.
fn sec_stable<T: Real>(w: Complex<T>) -> Option<Complex<T>> {
    if w.im.abs() > T::lit(40.0) {
        // cos w ~ e^{|y|} e^{-i sign(y) x} / 2
        let sign = if w.im > T::zero() { T::one() } else { -T::one() };
        let mag = T::lit(2.0) * (-w.im.abs()).exp();
        return Some(Complex::new(mag * w.re.cos(), mag * sign * w.re.sin()));
    }
    let cos = w.cos();
    (abs(cos) > pole_tolerance()).then(|| real(T::one()) / cos)
}

/// `tan(w) / w`, finite at `w = 0`.
fn tan_over<T: Real>(w: Complex<T>) -> Complex<T> {
    if abs(w) < T::lit(1e-4) {
        let w2 = w * w;
        real(T::one()) + w2 / T::lit(3.0) + w2 * w2 * T::lit(2.0 / 15.0)
    } else {
        tan_stable(w) / w
    }
}

fn pole_tolerance<T: Real>() -> T {
    T::machine_eps() * T::lit(64.0)
}

/// Weyl block of one edge. Half-line: `[i c k1]`. Segment, slots ordered
/// (0-end, l-end):
///
/// `[[c k1 tan(lk), sec(lk)], [sec(lk), tan(lk)/(c k1)]]`,
///
/// evaluated as `(z - mc^2) l tau` and `(z + mc^2) l tau / c^2` with
/// `tau = tan(lk)/(lk)`, which stays finite at `k = 0`.
pub fn edge_weyl_block<T: Real>(e: &Edge<T>, z: Complex<T>, p: &PhysicalParams<T>) -> Result<DMatrix<Complex<T>>> {
    let br = branch_eval(z, p);
    let c = p.light_speed;
    let a = p.threshold();
    match e.kind {
        EdgeKind::HalfLine => {
            let k1 = br.k1.ok_or(Error::BranchPoint { z: z.re.to_f64_lossy() })?;
            Ok(DMatrix::from_element(1, 1, imag_unit::<T>() * c * k1))
        }
        EdgeKind::Segment { length } => {
            let w = br.k * length;
            let sec = sec_stable(w).ok_or_else(|| Error::Pole { edge: e.id.clone() })?;
            let lt = tan_over(w) * length;
            Ok(DMatrix::from_row_slice(
                2,
                2,
                &[(z - real(a)) * lt, sec, sec, (z + real(a)) * lt / (c * c)],
            ))
        }
    }
}

/// Weyl matrix at one point together with the secular value.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylEvaluation<T: Real> {
    pub z: Complex<T>,
    pub m: DMatrix<Complex<T>>,
    /// `det(B M(z) - A)`.
    pub secular: Complex<T>,
}

/// Block-diagonal `M(z)` laid out by the trace slots.
pub fn assemble_m<T: Real>(g: &MetricGraph<T>, z: Complex<T>, p: &PhysicalParams<T>) -> Result<DMatrix<Complex<T>>> {
    let map = TraceIndexMap::new(g);
    let n = map.dimension();
    let mut m = DMatrix::zeros(n, n);
    for (ei, e) in g.edges().iter().enumerate() {
        let slots = map.edge_slots(ei);
        let block = edge_weyl_block(e, z, p)?;
        for (bi, &si) in slots.iter().enumerate() {
            for (bj, &sj) in slots.iter().enumerate() {
                m[(si, sj)] = block[(bi, bj)];
            }
        }
    }
    Ok(m)
}

pub fn weyl_evaluation<T: Real>(
    g: &MetricGraph<T>,
    cm: &ConditionMatrices<T>,
    z: Complex<T>,
    p: &PhysicalParams<T>,
) -> Result<WeylEvaluation<T>> {
    let m = assemble_m(g, z, p)?;
    let secular = (&cm.b * &m - &cm.a).lu().determinant();
    Ok(WeylEvaluation { z, m, secular })
}

/// `det(B M(z) - A)`.
pub fn secular<T: Real>(
    g: &MetricGraph<T>,
    cm: &ConditionMatrices<T>,
    z: Complex<T>,
    p: &PhysicalParams<T>,
) -> Result<Complex<T>> {
    Ok(weyl_evaluation(g, cm, z, p)?.secular)
}

/// Whether some segment block has a pole at `z`.
pub fn has_pole<T: Real>(g: &MetricGraph<T>, z: Complex<T>, p: &PhysicalParams<T>) -> bool {
    let k = branch_eval(z, p).k;
    g.edges().iter().filter_map(|e| e.length()).any(|l| sec_stable(k * l).is_none())
}

/// Smallest eigenvalue of `Im M(z) = (M - M^*) / 2i`.
pub fn herglotz_min_eig<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    let im = (m - m.adjoint()) / (imag_unit::<T>() * T::lit(2.0));
    im.symmetric_eigenvalues().iter().fold(T::max_value().unwrap(), |acc, &x| acc.min(x))
}

/// Solutions of `D psi = z psi` on a segment that are entire in `z`:
/// `u` with `(psi1, psi2)(0) = (1, 0)` and `v` with `(0, 1)`.
pub fn segment_fundamental<T: Real>(z: Complex<T>, length: T, p: &PhysicalParams<T>) -> [EdgeSpinor<T>; 2] {
    let a = p.threshold();
    let c = p.light_speed;
    let k = branch_eval(z, p).k;
    let i = imag_unit::<T>();
    let zero = real(T::zero());
    let one = real(T::one());
    let minus = (z - real(a)) * i / c;
    let plus = (z + real(a)) * i / c;
    if abs(k) * length < T::lit(1e-9) {
        // sin(kx)/k -> x
        [
            EdgeSpinor::new(Component::constant(one), Component::linear(minus, zero)),
            EdgeSpinor::new(Component::linear(plus, zero), Component::constant(one)),
        ]
    } else {
        [
            EdgeSpinor::new(Component::trig(k, one, zero), Component::trig(k, zero, minus / k)),
            EdgeSpinor::new(Component::trig(k, zero, plus / k), Component::trig(k, one, zero)),
        ]
    }
}

/// The decaying solution `(e^{ikx}, k1 e^{ikx})` on a half-line.
pub fn halfline_solution<T: Real>(z: Complex<T>, p: &PhysicalParams<T>) -> Result<EdgeSpinor<T>> {
    let br = branch_eval(z, p);
    if br.on_cut {
        return Err(Error::Unsupported("no square-integrable half-line solution on the cut".into()));
    }
    let k1 = br.k1.ok_or(Error::BranchPoint { z: z.re.to_f64_lossy() })?;
    let one = real(T::one());
    Ok(EdgeSpinor::new(Component::exp(br.k, one), Component::exp(br.k, k1)))
}

/// Basis of the defect space `N_z` of one edge: two solutions on a segment,
/// the decaying one on a half-line.
pub fn defect_basis<T: Real>(e: &Edge<T>, z: Complex<T>, p: &PhysicalParams<T>) -> Result<Vec<EdgeSpinor<T>>> {
    match e.kind {
        EdgeKind::Segment { length } => Ok(segment_fundamental(z, length, p).to_vec()),
        EdgeKind::HalfLine => {
            let a = p.threshold();
            if z.im == T::zero() && z.re.abs() == a {
                return Err(Error::BranchPoint { z: z.re.to_f64_lossy() });
            }
            Ok(vec![halfline_solution(z, p)?])
        }
    }
}

/// Columns of the matching matrix: per segment its two fundamental
/// solutions, per half-line (when requested) the decaying solution.
#[derive(Debug, Clone)]
pub struct Matching<T: Real> {
    /// `A Gamma0(col) - B Gamma1(col)` for every column.
    pub phi: DMatrix<Complex<T>>,
    pub columns: Vec<(usize, EdgeSpinor<T>)>,
}

impl<T: Real> Matching<T> {
    pub fn spinor(&self, coeffs: &[Complex<T>], n_edges: usize) -> ClosedFormSpinor<T> {
        let mut psi = ClosedFormSpinor::zero(n_edges);
        for ((edge, col), &x) in self.columns.iter().zip(coeffs) {
            psi.edges[*edge] = psi.edges[*edge].add(&col.scale(x));
        }
        psi
    }
}

pub fn matching_matrix<T: Real>(
    g: &MetricGraph<T>,
    cm: &ConditionMatrices<T>,
    z: Complex<T>,
    p: &PhysicalParams<T>,
    with_halflines: bool,
) -> Result<Matching<T>> {
    let map = TraceIndexMap::new(g);
    let n = map.dimension();
    let c = p.light_speed;
    let mut columns = Vec::with_capacity(n);
    for (ei, e) in g.edges().iter().enumerate() {
        match e.kind {
            EdgeKind::Segment { length } => {
                for s in segment_fundamental(z, length, p) {
                    columns.push((ei, s));
                }
            }
            EdgeKind::HalfLine if with_halflines => columns.push((ei, halfline_solution(z, p)?)),
            EdgeKind::HalfLine => {}
        }
    }
    let mut g0 = DMatrix::zeros(n, columns.len());
    let mut g1 = DMatrix::zeros(n, columns.len());
    for (j, (ei, s)) in columns.iter().enumerate() {
        for si in map.edge_slots(*ei) {
            let slot = &map.slots[si];
            let x = match slot.end {
                End::Zero => T::zero(),
                End::Far => g.edge(*ei).length().expect("far ends are on segments"),
            };
            let (u, l) = s.eval(x);
            let pick = |comp| match comp {
                crate::conditions::Component::Upper => u,
                crate::conditions::Component::Lower => l,
            };
            g0[(si, j)] = pick(slot.gamma0.0) * slot.gamma0.1.value(c);
            g1[(si, j)] = pick(slot.gamma1.0) * slot.gamma1.1.value(c);
        }
    }
    let phi = &cm.a * g0 - &cm.b * g1;
    Ok(Matching { phi, columns })
}

/// `s(z) * prod_e cos(l_e k(z))`: equal to the secular function away from
/// the segment poles, but finite there, so its zeros are exactly the
/// eigenvalues. Computed as `(-1)^M det(Phi) / (ic)^{|E_s|}`.
pub fn regularized_secular<T: Real>(
    g: &MetricGraph<T>,
    cm: &ConditionMatrices<T>,
    z: Complex<T>,
    p: &PhysicalParams<T>,
) -> Result<Complex<T>> {
    let mm = matching_matrix(g, cm, z, p, true)?;
    let det = mm.phi.lu().determinant();
    let sign = if trace_dimension(g).is_multiple_of(2) { T::one() } else { -T::one() };
    let ic = imag_unit::<T>() * p.light_speed;
    let mut scale = real(T::one());
    for _ in 0..g.segment_count() {
        scale *= ic;
    }
    Ok(det * sign / scale)
}

/// Null vectors of the matching matrix whose singular value is below
/// `rel_tol * sigma_max`, as spinors.
pub fn kernel_modes<T: Real>(
    g: &MetricGraph<T>,
    cm: &ConditionMatrices<T>,
    z: Complex<T>,
    p: &PhysicalParams<T>,
    with_halflines: bool,
    rel_tol: T,
) -> Result<(Vec<ClosedFormSpinor<T>>, T)> {
    let mm = matching_matrix(g, cm, z, p, with_halflines)?;
    let ncols = mm.phi.ncols();
    if ncols == 0 {
        return Ok((Vec::new(), T::one()));
    }
    // pad to square so every column direction has a singular value
    let rows = mm.phi.nrows().max(ncols);
    let mut phi = DMatrix::zeros(rows, ncols);
    phi.view_mut((0, 0), mm.phi.shape()).copy_from(&mm.phi);
    let svd = phi.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let smax = svd.singular_values.iter().fold(T::zero(), |a, &s| a.max(s)).max(T::lit(f64::MIN_POSITIVE));
    let mut smallest = T::max_value().unwrap();
    let mut modes = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        let rel = s / smax;
        smallest = smallest.min(rel);
        if rel <= rel_tol {
            let coeffs: Vec<Complex<T>> = v_t.row(i).iter().map(|x| x.conj()).collect();
            modes.push(mm.spinor(&coeffs, g.edges().len()));
        }
    }
    Ok((modes, smallest))
}

/// Cut-off for half-line integrals: decay `e^{-2 Im k x}` reaches ~1e-30.
pub fn halfline_cutoff<T: Real>(z: Complex<T>, p: &PhysicalParams<T>) -> T {
    let im = branch_eval(z, p).k.im;
    if im > T::zero() {
        T::lit(35.0) / im
    } else {
        T::zero()
    }
}

/// Normalizes `psi` in L2, half-lines truncated by [`halfline_cutoff`].
pub fn normalize<T: Real>(psi: &ClosedFormSpinor<T>, g: &MetricGraph<T>, cutoff: T) -> ClosedFormSpinor<T> {
    let n2 = psi.norm_squared(g, cutoff, 2000);
    if n2 > T::zero() {
        psi.scale(real(T::one() / n2.sqrt()))
    } else {
        psi.clone()
    }
}

/// Eigenfunction for a real root `lambda` of the secular function. Inside
/// the gap half-lines carry the decaying solution; elsewhere they cannot
/// support an L2 eigenfunction and are set to zero.
pub fn eigenfunction_from_kernel<T: Real>(
    g: &MetricGraph<T>,
    cm: &ConditionMatrices<T>,
    lambda: T,
    p: &PhysicalParams<T>,
) -> Result<ClosedFormSpinor<T>> {
    let z = real(lambda);
    let in_gap = lambda.abs() < p.threshold();
    let (modes, smallest) = kernel_modes(g, cm, z, p, in_gap, T::lit(1e-7))?;
    let psi = modes
        .into_iter()
        .next()
        .ok_or(Error::KernelEmpty { sigma_min: smallest.to_f64_lossy() })?;
    Ok(normalize(&psi, g, halfline_cutoff(z, p)))
}
