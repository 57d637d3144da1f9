//! The 3-star with one finite edge: two half-lines and a unit segment at a
//! common vertex, `m = 1/2`, `c = l = 1`.

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex;

use crate::conditions::ConditionMatrices;
use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, GraphDocument, MetricGraph, ModelCoupling, PhysicalParams};
use crate::scalar::{imag_unit, real, Real};
use crate::weyl::branch_eval;

/// The model graph. The far vertex of the segment is clamped when `a = 0`
/// (the coupling used for the secular computation); otherwise it carries
/// the Kirchhoff-type condition.
pub fn model_graph<T: Real>(clamped_far_end: bool) -> (MetricGraph<T>, PhysicalParams<T>) {
    let mut b = GraphBuilder::new()
        .halfline("e1", "v0")
        .halfline("e2", "v0")
        .segment("e3", "v0", "v1", T::one());
    if clamped_far_end {
        b = b.clamp("v1");
    }
    let g = b.build().expect("model graph is valid");
    (g, PhysicalParams::new(T::lit(0.5), T::one()).expect("positive parameters"))
}

/// Condition matrices of the model with coupling constants `a`, `b` in the
/// last row:
///
/// `A = (2/3) [[-2,1,1,0],[1,-2,1,0],[1,1,-2,0],[0,0,0,a]]`,
/// `B = -(2/3) i [[1,1,1,0],[1,1,1,0],[1,1,1,0],[0,0,0,b]]`.
pub fn model_conditions<T: Real>(a: Complex<T>, b: Complex<T>) -> ConditionMatrices<T> {
    let r = |x: f64| real(T::lit(x));
    let z = r(0.0);
    let two_thirds = T::lit(2.0 / 3.0);
    let am = DMatrix::from_row_slice(
        4,
        4,
        &[r(-2.0), r(1.0), r(1.0), z, r(1.0), r(-2.0), r(1.0), z, r(1.0), r(1.0), r(-2.0), z, z, z, z, a],
    ) * real(two_thirds);
    let o = r(1.0);
    let bm = DMatrix::from_row_slice(4, 4, &[o, o, o, z, o, o, o, z, o, o, o, z, z, z, z, b])
        * (-imag_unit::<T>() * two_thirds);
    ConditionMatrices { a: am, b: bm, vertex_rows: vec![0..3, 3..4] }
}

/// Builtin model instance: graph, parameters, and the matrices for
/// `a = 0`, `b = 1`.
pub fn builtin_model<T: Real>() -> (MetricGraph<T>, PhysicalParams<T>, ConditionMatrices<T>) {
    let (g, p) = model_graph(true);
    (g, p, model_conditions(real(T::zero()), real(T::one())))
}

/// Graph document of the builtin model, tagged with its coupling.
pub fn builtin_document() -> GraphDocument {
    let (g, p) = model_graph::<f64>(true);
    let mut doc = GraphDocument::from_graph(&g, &p);
    doc.model = Some(ModelCoupling { a: 0.0, b: 1.0 });
    doc
}

/// Graph, parameters and condition matrices of a document: the model
/// coupling when the document carries one, the assembled Kirchhoff-type
/// conditions otherwise.
pub fn realize<T: Real>(doc: &GraphDocument) -> Result<(MetricGraph<T>, PhysicalParams<T>, ConditionMatrices<T>)> {
    let (g, p) = doc.build::<T>()?;
    let cm = match doc.model {
        Some(ModelCoupling { a, b }) => {
            let (reference, _) = model_graph::<T>(a == 0.0);
            let same = g.edges().len() == 3
                && g.edges().iter().zip(reference.edges()).all(|(x, y)| {
                    x.id == y.id && x.from == y.from && x.to == y.to && x.length() == y.length()
                });
            if !same {
                return Err(Error::Malformed("model coupling requires the builtin 3-star layout".into()));
            }
            model_conditions(real(T::lit(a)), real(T::lit(b)))
        }
        None => crate::conditions::assemble(&g, &p),
    };
    Ok((g, p, cm))
}

/// Which closed form of `f` applies at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Real `z` with `|z| < 1/2`: `sqrt(4z^2 - 1)` is imaginary.
    Gap,
    /// Real `z` with `|z| >= 1/2`: `sqrt(4z^2 - 1)` is real.
    OutOfGap,
    Complex,
}

pub fn regime<T: Real>(z: Complex<T>) -> Regime {
    if z.im != T::zero() {
        Regime::Complex
    } else if z.re.abs() < T::lit(0.5) {
        Regime::Gap
    } else {
        Regime::OutOfGap
    }
}

/// The model's secular function in closed form,
///
/// `f(z) = -(8/9) i (sin(q/2) + sin(3q/2) + 2i) sec^4(q/2)`, `q = sqrt(4z^2 - 1)`,
///
/// with `q = 2 k(z)` on the branch of [`branch_eval`]. In the gap it is
/// `(8/9)(sinh(r/2) + sinh(3r/2) + 2) sech^4(r/2)`, `r = sqrt(1 - 4z^2)`; on
/// the real axis outside the gap `Re f = (16/9) sec^4(q/2)` and
/// `Im f = -(8/9)(sin(q/2) + sin(3q/2)) sec^4(q/2)`, where `q` takes the
/// sign of `z` (boundary values from `Im z > 0`).
pub fn model_f<T: Real>(z: Complex<T>) -> Result<Complex<T>> {
    let nine = T::lit(9.0);
    let pole = || Error::Pole { edge: "e3".into() };
    match regime(z) {
        Regime::Gap => {
            let h = (T::one() - T::lit(4.0) * z.re * z.re).sqrt() / T::lit(2.0);
            let sech = T::one() / h.cosh();
            let s2 = sech * sech;
            let v = T::lit(8.0) / nine * (h.sinh() + (T::lit(3.0) * h).sinh() + T::lit(2.0)) * s2 * s2;
            Ok(real(v))
        }
        Regime::OutOfGap => {
            let mut h = (T::lit(4.0) * z.re * z.re - T::one()).sqrt() / T::lit(2.0);
            if z.re < T::zero() {
                h = -h;
            }
            let cos = h.cos();
            if cos.abs() <= T::machine_eps() * T::lit(64.0) {
                return Err(pole());
            }
            let c2 = cos * cos;
            let sec4 = T::one() / (c2 * c2);
            Ok(Complex::new(
                T::lit(16.0) / nine * sec4,
                -T::lit(8.0) / nine * (h.sin() + (T::lit(3.0) * h).sin()) * sec4,
            ))
        }
        Regime::Complex => {
            let p = PhysicalParams::new(T::lit(0.5), T::one())?;
            let h = branch_eval(z, &p).k;
            let cos = h.cos();
            if cos.modulus() <= T::machine_eps() * T::lit(64.0) {
                return Err(pole());
            }
            let sec = real(T::one()) / cos;
            let sec2 = sec * sec;
            let i = imag_unit::<T>();
            let inner = h.sin() + (h * T::lit(3.0)).sin() + i * T::lit(2.0);
            Ok(-(i * inner) * sec2 * sec2 * (T::lit(8.0) / nine))
        }
    }
}
