use nalgebra::ComplexField;
use num_complex::Complex;

use super::{End, Endpoint, MetricGraph, PhysicalParams};
use crate::scalar::{abs, imag_unit, Real};

/// One closed-form building block of a spinor component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Term<T> {
    /// `slope * x + offset`
    Poly { slope: Complex<T>, offset: Complex<T> },
    /// `cos * cos(k x) + sin * sin(k x)`
    Trig { k: Complex<T>, cos: Complex<T>, sin: Complex<T> },
    /// `amp * exp(i k x)`
    Exp { k: Complex<T>, amp: Complex<T> },
}

impl<T: Real> Term<T> {
    pub fn eval(&self, x: T) -> Complex<T> {
        let x = Complex::new(x, T::zero());
        match *self {
            Term::Poly { slope, offset } => slope * x + offset,
            Term::Trig { k, cos, sin } => {
                let kx = k * x;
                cos * kx.cos() + sin * kx.sin()
            }
            Term::Exp { k, amp } => amp * (imag_unit::<T>() * k * x).exp(),
        }
    }

    pub fn derivative(&self) -> Term<T> {
        let zero = Complex::new(T::zero(), T::zero());
        match *self {
            Term::Poly { slope, .. } => Term::Poly { slope: zero, offset: slope },
            Term::Trig { k, cos, sin } => Term::Trig { k, cos: sin * k, sin: -(cos * k) },
            Term::Exp { k, amp } => Term::Exp { k, amp: imag_unit::<T>() * k * amp },
        }
    }

    pub fn scale(&self, s: Complex<T>) -> Term<T> {
        match *self {
            Term::Poly { slope, offset } => Term::Poly { slope: slope * s, offset: offset * s },
            Term::Trig { k, cos, sin } => Term::Trig { k, cos: cos * s, sin: sin * s },
            Term::Exp { k, amp } => Term::Exp { k, amp: amp * s },
        }
    }

    /// Adds `other` into `self` when both have the same shape.
    fn absorb(&mut self, other: &Term<T>) -> bool {
        match (self, other) {
            (Term::Poly { slope, offset }, Term::Poly { slope: s2, offset: o2 }) => {
                *slope += *s2;
                *offset += *o2;
                true
            }
            (Term::Trig { k, cos, sin }, Term::Trig { k: k2, cos: c2, sin: s2 }) if *k == *k2 => {
                *cos += *c2;
                *sin += *s2;
                true
            }
            (Term::Exp { k, amp }, Term::Exp { k: k2, amp: a2 }) if *k == *k2 => {
                *amp += *a2;
                true
            }
            _ => false,
        }
    }
}

/// A spinor component on one edge: a finite sum of [`Term`]s.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Component<T> {
    terms: Vec<Term<T>>,
}

impl<T: Real> Component<T> {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn constant(c: Complex<T>) -> Self {
        Self::linear(Complex::new(T::zero(), T::zero()), c)
    }

    pub fn linear(slope: Complex<T>, offset: Complex<T>) -> Self {
        Self { terms: vec![Term::Poly { slope, offset }] }
    }

    pub fn trig(k: Complex<T>, cos: Complex<T>, sin: Complex<T>) -> Self {
        Self { terms: vec![Term::Trig { k, cos, sin }] }
    }

    pub fn exp(k: Complex<T>, amp: Complex<T>) -> Self {
        Self { terms: vec![Term::Exp { k, amp }] }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = Term<T>>) -> Self {
        let mut out = Self::zero();
        for t in terms {
            out.push(t);
        }
        out
    }

    pub fn terms(&self) -> &[Term<T>] {
        &self.terms
    }

    pub fn push(&mut self, t: Term<T>) {
        if !self.terms.iter_mut().any(|s| s.absorb(&t)) {
            self.terms.push(t);
        }
    }

    pub fn eval(&self, x: T) -> Complex<T> {
        self.terms.iter().fold(Complex::new(T::zero(), T::zero()), |acc, t| acc + t.eval(x))
    }

    pub fn derivative(&self) -> Self {
        Self { terms: self.terms.iter().map(Term::derivative).collect() }
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self { terms: self.terms.iter().map(|t| t.scale(s)).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for t in &other.terms {
            out.push(*t);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EdgeSpinor<T> {
    pub upper: Component<T>,
    pub lower: Component<T>,
}

impl<T: Real> EdgeSpinor<T> {
    pub fn new(upper: Component<T>, lower: Component<T>) -> Self {
        Self { upper, lower }
    }

    pub fn zero() -> Self {
        Self::new(Component::zero(), Component::zero())
    }

    pub fn eval(&self, x: T) -> (Complex<T>, Complex<T>) {
        (self.upper.eval(x), self.lower.eval(x))
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::new(self.upper.scale(s), self.lower.scale(s))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.upper.add(&other.upper), self.lower.add(&other.lower))
    }
}

/// Per-edge closed-form spinor field, one entry per graph edge.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClosedFormSpinor<T> {
    pub edges: Vec<EdgeSpinor<T>>,
}

impl<T: Real> ClosedFormSpinor<T> {
    pub fn new(edges: Vec<EdgeSpinor<T>>) -> Self {
        Self { edges }
    }

    pub fn zero(n_edges: usize) -> Self {
        Self { edges: vec![EdgeSpinor::zero(); n_edges] }
    }

    pub fn eval(&self, edge: usize, x: T) -> (Complex<T>, Complex<T>) {
        self.edges[edge].eval(x)
    }

    /// `(psi1, psi2)` at an endpoint.
    pub fn trace(&self, g: &MetricGraph<T>, p: Endpoint) -> (Complex<T>, Complex<T>) {
        let x = match p.end {
            End::Zero => T::zero(),
            End::Far => g.edge(p.edge).length().expect("far end belongs to a segment"),
        };
        self.eval(p.edge, x)
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::new(self.edges.iter().map(|e| e.scale(s)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.edges.iter().zip(&other.edges).map(|(a, b)| a.add(b)).collect())
    }

    /// Squared L2 norm by composite Simpson, half-lines cut at `cutoff`.
    pub fn norm_squared(&self, g: &MetricGraph<T>, cutoff: T, panels: usize) -> T {
        let n = 2 * panels.max(1);
        let mut total = T::zero();
        for (e, psi) in g.edges().iter().zip(&self.edges) {
            let len = e.length().unwrap_or(cutoff);
            let h = len / T::from_usize(n).unwrap();
            let density = |x: T| {
                let (u, l) = psi.eval(x);
                u.norm_sqr() + l.norm_sqr()
            };
            let mut s = density(T::zero()) + density(len);
            for i in 1..n {
                let w = if i % 2 == 1 { T::lit(4.0) } else { T::lit(2.0) };
                s += w * density(h * T::from_usize(i).unwrap());
            }
            total += s * h / T::lit(3.0);
        }
        total
    }

    /// Largest pointwise modulus of `self - other` over `samples` points per
    /// edge (half-lines sampled on `[0, cutoff]`).
    pub fn max_difference(&self, other: &Self, g: &MetricGraph<T>, cutoff: T, samples: usize) -> T {
        let mut worst = T::zero();
        for (i, e) in g.edges().iter().enumerate() {
            let len = e.length().unwrap_or(cutoff);
            for s in 0..=samples {
                let x = len * T::from_usize(s).unwrap() / T::from_usize(samples.max(1)).unwrap();
                let (a1, a2) = self.eval(i, x);
                let (b1, b2) = other.eval(i, x);
                worst = worst.max(abs(a1 - b1)).max(abs(a2 - b2));
            }
        }
        worst
    }
}

/// Applies `D = -i c sigma1 d/dx + m c^2 sigma3` edgewise, in closed form.
pub fn apply_dirac<T: Real>(psi: &ClosedFormSpinor<T>, p: &PhysicalParams<T>) -> ClosedFormSpinor<T> {
    let ic = imag_unit::<T>() * p.light_speed;
    let mc2 = Complex::new(p.threshold(), T::zero());
    ClosedFormSpinor::new(
        psi.edges
            .iter()
            .map(|e| {
                let upper = e.lower.derivative().scale(-ic).add(&e.upper.scale(mc2));
                let lower = e.upper.derivative().scale(-ic).add(&e.lower.scale(-mc2));
                EdgeSpinor::new(upper, lower)
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn interval() -> MetricGraph<f64> {
        GraphBuilder::new().segment("e", "u", "v", 1.0).build().unwrap()
    }

    #[test]
    fn constant_upper_is_mass_eigenvector() {
        let p = PhysicalParams::new(0.5, 1.0).unwrap();
        let psi = ClosedFormSpinor::new(vec![EdgeSpinor::new(Component::constant(c(1.0, 0.0)), Component::zero())]);
        let d = apply_dirac(&psi, &p);
        let g = interval();
        assert!(d.max_difference(&psi.scale(c(0.5, 0.0)), &g, 1.0, 16) < 1e-15);
    }

    #[test]
    fn plane_wave_solves_eigen_equation() {
        let p = PhysicalParams::new(0.5, 1.0).unwrap();
        let lambda: f64 = 1.3;
        let k = (lambda * lambda - 0.25).sqrt();
        let k1 = k / (lambda + 0.5);
        let psi = ClosedFormSpinor::new(vec![EdgeSpinor::new(
            Component::trig(c(k, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
            Component::trig(c(k, 0.0), c(0.0, 0.0), c(0.0, k1)),
        )]);
        let d = apply_dirac(&psi, &p);
        let g = interval();
        assert!(d.max_difference(&psi.scale(c(lambda, 0.0)), &g, 1.0, 64) < 1e-14);
    }

    #[test]
    fn linear_threshold_profile() {
        // psi = (2 i m c A x + B, A) solves D psi = m c^2 psi
        let (m, cl) = (0.5, 1.0);
        let p = PhysicalParams::new(m, cl).unwrap();
        let (a, b) = (c(0.3, -0.7), c(1.1, 0.2));
        let psi = ClosedFormSpinor::new(vec![EdgeSpinor::new(
            Component::linear(c(0.0, 2.0 * m * cl) * a, b),
            Component::constant(a),
        )]);
        let d = apply_dirac(&psi, &p);
        assert!(d.max_difference(&psi.scale(c(m * cl * cl, 0.0)), &interval(), 1.0, 16) < 1e-15);
    }

    #[test]
    fn exponential_derivative() {
        let t = Term::Exp { k: c(0.0, 0.5), amp: c(2.0, 0.0) };
        // d/dx 2 e^{-x/2} = -e^{-x/2}
        let d = t.derivative().eval(1.0);
        assert!((d - c(-(-0.5f64).exp(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn simpson_norm_of_constant() {
        let g: MetricGraph<f64> = GraphBuilder::new().segment("e", "u", "v", 2.0).halfline("h", "v").build().unwrap();
        let psi = ClosedFormSpinor::new(vec![
            EdgeSpinor::new(Component::constant(c(1.0, 0.0)), Component::constant(c(0.0, 1.0))),
            EdgeSpinor::new(Component::exp(c(0.0, 1.0), c(1.0, 0.0)), Component::zero()),
        ]);
        // 2 * 2 + int_0^30 e^{-2x} dx
        let expect = 4.0 + 0.5 * (1.0 - (-60.0f64).exp());
        assert!((psi.norm_squared(&g, 30.0, 4000) - expect).abs() < 1e-10);
    }

    #[test]
    fn like_terms_merge() {
        let mut comp = Component::trig(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        comp.push(Term::Trig { k: c(1.0, 0.0), cos: c(0.0, 0.0), sin: c(2.0, 0.0) });
        comp.push(Term::Poly { slope: c(1.0, 0.0), offset: c(0.0, 0.0) });
        assert_eq!(comp.terms().len(), 2);
    }
}
