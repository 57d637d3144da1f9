//! Trace slots and the vertex condition matrices `A Gamma0 = B Gamma1`.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::graph::{ClosedFormSpinor, End, MetricGraph, PhysicalParams, VertexCondition};
use crate::scalar::{abs, imag_unit, Real};

/// Spinor component read by a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Upper,
    Lower,
}

/// Multiplier applied to a trace before it enters a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Multiplier {
    One,
    /// `i c`
    IC,
}

impl Multiplier {
    pub fn value<T: Real>(self, c: T) -> Complex<T> {
        match self {
            Multiplier::One => Complex::new(T::one(), T::zero()),
            Multiplier::IC => imag_unit::<T>() * c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceSlot {
    pub edge: usize,
    pub end: End,
    pub vertex: usize,
    /// Trace stored in `Gamma0` at this slot.
    pub gamma0: (Component, Multiplier),
    /// Complementary trace of the same endpoint, stored in `Gamma1`.
    pub gamma1: (Component, Multiplier),
}

/// Slot `i` of both `Gamma0` and `Gamma1` belongs to endpoint `i` of the
/// graph's endpoint table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceIndexMap {
    pub slots: Vec<TraceSlot>,
}

impl TraceIndexMap {
    pub fn new<T: Real>(g: &MetricGraph<T>) -> Self {
        let slots = g
            .endpoints()
            .iter()
            .map(|p| {
                let (gamma0, gamma1) = match p.end {
                    End::Zero => ((Component::Upper, Multiplier::One), (Component::Lower, Multiplier::IC)),
                    End::Far => ((Component::Lower, Multiplier::IC), (Component::Upper, Multiplier::One)),
                };
                TraceSlot { edge: p.edge, end: p.end, vertex: p.vertex, gamma0, gamma1 }
            })
            .collect();
        Self { slots }
    }

    pub fn dimension(&self) -> usize {
        self.slots.len()
    }

    /// Slots of `edge` in order (0-end first).
    pub fn edge_slots(&self, edge: usize) -> Vec<usize> {
        (0..self.slots.len()).filter(|&i| self.slots[i].edge == edge).collect()
    }
}

/// `M = 2 |E_s| + |E_h|`.
pub fn trace_dimension<T: Real>(g: &MetricGraph<T>) -> usize {
    2 * g.segment_count() + g.halfline_count()
}

/// `(Gamma0 psi, Gamma1 psi)`.
pub fn trace_vectors<T: Real>(
    g: &MetricGraph<T>,
    p: &PhysicalParams<T>,
    psi: &ClosedFormSpinor<T>,
) -> (DVector<Complex<T>>, DVector<Complex<T>>) {
    let map = TraceIndexMap::new(g);
    let n = map.dimension();
    let mut g0 = DVector::zeros(n);
    let mut g1 = DVector::zeros(n);
    for (i, (slot, ep)) in map.slots.iter().zip(g.endpoints()).enumerate() {
        let (u, l) = psi.trace(g, *ep);
        let pick = |c: Component| match c {
            Component::Upper => u,
            Component::Lower => l,
        };
        g0[i] = pick(slot.gamma0.0) * slot.gamma0.1.value(p.light_speed);
        g1[i] = pick(slot.gamma1.0) * slot.gamma1.1.value(p.light_speed);
    }
    (g0, g1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionMatrices<T: Real> {
    pub a: DMatrix<Complex<T>>,
    pub b: DMatrix<Complex<T>>,
    /// Rows owned by each vertex.
    pub vertex_rows: Vec<Range<usize>>,
}

impl<T: Real> ConditionMatrices<T> {
    pub fn dimension(&self) -> usize {
        self.a.nrows()
    }

    /// `A Gamma0 - B Gamma1`.
    pub fn residual(&self, g0: &DVector<Complex<T>>, g1: &DVector<Complex<T>>) -> DVector<Complex<T>> {
        &self.a * g0 - &self.b * g1
    }

    /// The `M x 2M` juxtaposition `[A | B]`.
    pub fn juxtaposed(&self) -> DMatrix<Complex<T>> {
        let m = self.dimension();
        let mut ab = DMatrix::zeros(m, 2 * m);
        ab.view_mut((0, 0), (m, m)).copy_from(&self.a);
        ab.view_mut((0, m), (m, m)).copy_from(&self.b);
        ab
    }
}

/// Builds `A`, `B` vertex by vertex.
///
/// Kirchhoff vertex of degree `d`: `d - 1` rows equating consecutive psi1
/// traces and one row for the signed psi2 sum. Clamped vertex: one row
/// `psi1 = 0` per incident endpoint. A trace with coefficient `kappa` that
/// sits in `Gamma0` slot `s` with multiplier `mu` adds `kappa / mu` to
/// `A[r, s]`; in `Gamma1` it adds `-kappa / mu` to `B[r, s]`.
pub fn assemble<T: Real>(g: &MetricGraph<T>, p: &PhysicalParams<T>) -> ConditionMatrices<T> {
    let map = TraceIndexMap::new(g);
    let m = map.dimension();
    let mut a = DMatrix::zeros(m, m);
    let mut b = DMatrix::zeros(m, m);
    let mut vertex_rows = Vec::with_capacity(g.vertices().len());
    let mut row = 0;
    let c = p.light_speed;
    let mut put = |row: usize, slot: usize, comp: Component, kappa: Complex<T>| {
        let s = &map.slots[slot];
        if s.gamma0.0 == comp {
            a[(row, slot)] += kappa / s.gamma0.1.value(c);
        } else {
            b[(row, slot)] -= kappa / s.gamma1.1.value(c);
        }
    };
    let one = Complex::new(T::one(), T::zero());
    for v in 0..g.vertices().len() {
        let start = row;
        let inc = g.incident(v);
        match g.vertex_condition(v) {
            VertexCondition::Kirchhoff => {
                for w in inc.windows(2) {
                    put(row, w[0], Component::Upper, one);
                    put(row, w[1], Component::Upper, -one);
                    row += 1;
                }
                for &s in inc {
                    let sign = if g.endpoints()[s].end.balance_sign() > 0 { one } else { -one };
                    put(row, s, Component::Lower, sign);
                }
                row += 1;
            }
            VertexCondition::Clamped => {
                for &s in inc {
                    put(row, s, Component::Upper, one);
                    row += 1;
                }
            }
        }
        vertex_rows.push(start..row);
    }
    debug_assert_eq!(row, m);
    ConditionMatrices { a, b, vertex_rows }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfAdjointReport<T> {
    /// `max |(A B^* - B A^*)_{ij}|`.
    pub hermitian_residual: T,
    pub rank: usize,
    pub hermitian_compat: bool,
    pub rank_full: bool,
}

/// Checks `A B^* = B A^*` and `rank [A | B] = M`.
pub fn check_selfadjoint<T: Real>(cm: &ConditionMatrices<T>) -> Result<SelfAdjointReport<T>> {
    let (a, b) = (&cm.a, &cm.b);
    if !a.is_square() || a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!(
            "A is {:?}, B is {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let m = a.nrows();
    let comm = a * b.adjoint() - b * a.adjoint();
    let hermitian_residual = comm.iter().fold(T::zero(), |acc, z| acc.max(abs(*z)));
    let scale = max_abs(a).max(max_abs(b)).max(T::one());
    let eps = T::machine_eps();
    let hermitian_compat = hermitian_residual <= T::lit(64.0) * eps * scale * scale * T::from_usize(m.max(1)).unwrap();
    let rank = numerical_rank(&cm.juxtaposed(), eps);
    Ok(SelfAdjointReport { hermitian_residual, rank, hermitian_compat, rank_full: rank == m })
}

pub(crate) fn max_abs<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(abs(*z)))
}

/// Rank with the usual `max(rows, cols) * eps * sigma_max` cut-off.
pub fn numerical_rank<T: Real>(m: &DMatrix<Complex<T>>, eps: T) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().fold(T::zero(), |a, &s| a.max(s));
    if smax == T::zero() {
        return 0;
    }
    let tol = T::from_usize(m.nrows().max(m.ncols())).unwrap() * eps * smax * T::lit(16.0);
    sv.iter().filter(|&&s| s > tol).count()
}

/// Whether two condition pairs describe the same relation: equal row spaces
/// of `[A | B]`.
pub fn same_relation<T: Real>(x: &ConditionMatrices<T>, y: &ConditionMatrices<T>) -> bool {
    let (jx, jy) = (x.juxtaposed(), y.juxtaposed());
    if jx.shape() != jy.shape() {
        return false;
    }
    let mut stacked = DMatrix::zeros(jx.nrows() * 2, jx.ncols());
    stacked.view_mut((0, 0), jx.shape()).copy_from(&jx);
    stacked.view_mut((jx.nrows(), 0), jy.shape()).copy_from(&jy);
    let eps = T::machine_eps() * T::lit(1e3);
    let r = numerical_rank(&stacked, eps);
    r == numerical_rank(&jx, eps) && r == numerical_rank(&jy, eps)
}

/// Row-major `[[re, im], ...]` rows for JSON export.
pub fn matrix_to_json<T: Real>(m: &DMatrix<Complex<T>>) -> serde_json::Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re.to_f64_lossy(), m[(i, j)].im.to_f64_lossy()]).collect())
        .collect();
    serde_json::json!(rows)
}
