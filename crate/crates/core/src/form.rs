//! Finite-dimensional form-domain identities: the quadratic K-functional,
//! interpolation norms and fractional powers of `A = 1 + f^2`.

use nalgebra::DVector;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::oracle::EigenSystem;
use crate::scalar::Real;

/// Multiplication operator `f` on a finite measure space, with
/// `A_i = 1 + f_i^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierSurrogate<T> {
    f: Vec<T>,
    a: Vec<T>,
}

impl<T: Real> MultiplierSurrogate<T> {
    pub fn new(f: Vec<T>) -> Result<Self> {
        if f.is_empty() {
            return Err(Error::InvalidArgument("surrogate needs at least one mode".into()));
        }
        if f.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("multiplier values must be finite".into()));
        }
        let a = f.iter().map(|&x| T::one() + x * x).collect();
        Ok(Self { f, a })
    }

    /// Builds a surrogate directly from `A_i >= 1`.
    pub fn from_a(a: Vec<T>) -> Result<Self> {
        if a.iter().any(|&x| !(x >= T::one()) || !x.is_finite()) {
            return Err(Error::InvalidArgument("A_i must be finite and at least 1".into()));
        }
        Self::new(a.iter().map(|&x| (x - T::one()).sqrt()).collect()).map(|mut s| {
            s.a = a;
            s
        })
    }

    pub fn dimension(&self) -> usize {
        self.f.len()
    }

    pub fn f(&self) -> &[T] {
        &self.f
    }

    pub fn a(&self) -> &[T] {
        &self.a
    }

    fn check(&self, x: &[Complex<T>]) -> Result<()> {
        if x.len() != self.dimension() {
            return Err(Error::DimensionMismatch(format!("surrogate has {} modes, vector has {}", self.dimension(), x.len())));
        }
        Ok(())
    }
}

fn norm_sqr<T: Real>(z: &Complex<T>) -> T {
    z.re * z.re + z.im * z.im
}

/// `<tA/(1+tA) x, x>`.
pub fn k_functional_closed<T: Real>(s: &MultiplierSurrogate<T>, x: &[Complex<T>], t: T) -> Result<T> {
    s.check(x)?;
    if !(t > T::zero()) {
        return Err(Error::InvalidArgument("t must be positive".into()));
    }
    Ok(s.a.iter().zip(x).fold(T::zero(), |acc, (&a, xi)| acc + t * a / (T::one() + t * a) * norm_sqr(xi)))
}

/// Minimizing splitting of the K-functional.
#[derive(Debug, Clone, PartialEq)]
pub struct KSplitting<T> {
    pub value: T,
    pub x0: Vec<Complex<T>>,
    pub x1: Vec<Complex<T>>,
}

/// `||x0||_0^2 + t <A x1, x1>` for a given splitting.
pub fn k_objective<T: Real>(s: &MultiplierSurrogate<T>, x0: &[Complex<T>], x1: &[Complex<T>], t: T) -> T {
    s.a.iter()
        .zip(x0.iter().zip(x1))
        .fold(T::zero(), |acc, (&a, (u, v))| acc + norm_sqr(u) + t * a * norm_sqr(v))
}

/// Evaluates the K-functional at the stationary splitting
/// `x1 = (1 + tA)^{-1} x`, `x0 = x - x1`.
pub fn k_functional_direct<T: Real>(s: &MultiplierSurrogate<T>, x: &[Complex<T>], t: T) -> Result<KSplitting<T>> {
    s.check(x)?;
    if !(t > T::zero()) {
        return Err(Error::InvalidArgument("t must be positive".into()));
    }
    let x1: Vec<_> = s.a.iter().zip(x).map(|(&a, xi)| xi / (T::one() + t * a)).collect();
    let x0: Vec<_> = x.iter().zip(&x1).map(|(xi, yi)| xi - yi).collect();
    let value = k_objective(s, &x0, &x1, t);
    Ok(KSplitting { value, x0, x1 })
}

fn check_theta<T: Real>(theta: T) -> Result<()> {
    if !(theta > T::zero() && theta < T::one()) {
        return Err(Error::ThetaOutOfRange);
    }
    Ok(())
}

/// `pi / sin(pi theta)`, the constant relating the two norms.
pub fn beta_constant<T: Real>(theta: T) -> T {
    T::pi() / (T::pi() * theta).sin()
}

/// `int_0^inf t^{-theta} K(t, x) dt / t`, computed in `u = ln t` by
/// trapezoid refinement.
///
/// The window starts at `[-40, 40]` and is widened until the analytic tail
/// bounds `||x||^2 e^{-theta U} / theta` and
/// `<Ax, x> e^{-(1 - theta) U} / (1 - theta)` fall below `1e-12` of the
/// running value.
pub fn interpolation_norm<T: Real>(s: &MultiplierSurrogate<T>, x: &[Complex<T>], theta: T) -> Result<T> {
    s.check(x)?;
    check_theta(theta)?;
    let w: Vec<T> = x.iter().map(norm_sqr).collect();
    let l2 = w.iter().fold(T::zero(), |a, &b| a + b);
    if l2 == T::zero() {
        return Ok(T::zero());
    }
    let energy = s.a.iter().zip(&w).fold(T::zero(), |acc, (&a, &wi)| acc + a * wi);
    let integrand = |u: T| {
        let t = u.exp();
        let k = s.a.iter().zip(&w).fold(T::zero(), |acc, (&a, &wi)| acc + t * a / (T::one() + t * a) * wi);
        (-theta * u).exp() * k
    };
    let tol = T::lit(1e-12);
    let (mut lo, mut hi) = (T::lit(-40.0), T::lit(40.0));
    loop {
        let value = trapezoid(&integrand, lo, hi, T::lit(1e-10));
        let right = l2 * (-theta * hi).exp() / theta;
        let left = energy * ((T::one() - theta) * lo).exp() / (T::one() - theta);
        let mut grew = false;
        if right > tol * value {
            hi += T::lit(40.0);
            grew = true;
        }
        if left > tol * value {
            lo -= T::lit(40.0);
            grew = true;
        }
        if !grew || hi - lo > T::lit(4000.0) {
            return Ok(value);
        }
    }
}

/// Composite trapezoid on `[a, b]`, halving the step until two successive
/// values agree to `rel`.
fn trapezoid<T: Real>(f: &impl Fn(T) -> T, a: T, b: T, rel: T) -> T {
    let mut n = 256usize;
    let mut h = (b - a) / T::from_usize(n).unwrap();
    let mut sum = (f(a) + f(b)) / T::lit(2.0);
    for i in 1..n {
        sum += f(a + h * T::from_usize(i).unwrap());
    }
    let mut value = sum * h;
    for _ in 0..20 {
        // add midpoints of the current grid
        for i in 0..n {
            sum += f(a + h * (T::from_usize(i).unwrap() + T::lit(0.5)));
        }
        n *= 2;
        h /= T::lit(2.0);
        let next = sum * h;
        let done = (next - value).abs() <= rel * next.abs();
        value = next;
        if done {
            break;
        }
    }
    value
}

/// `<A^theta x, x>`.
pub fn power_norm<T: Real>(s: &MultiplierSurrogate<T>, x: &[Complex<T>], theta: T) -> Result<T> {
    s.check(x)?;
    Ok(s.a.iter().zip(x).fold(T::zero(), |acc, (&a, xi)| acc + a.powf(theta) * norm_sqr(xi)))
}

/// Surrogate with `f_i` the eigenvalues of a complete eigensystem, and the
/// coefficients of `y` in its eigenbasis.
pub fn spectral_surrogate<T: Real>(
    sys: &EigenSystem<T>,
    y: &DVector<Complex<T>>,
) -> Result<(MultiplierSurrogate<T>, Vec<Complex<T>>)> {
    let vectors = sys.vectors.as_ref().ok_or(Error::MissingDecomposition)?;
    if vectors.len() != y.len() || vectors.iter().any(|v| v.len() != y.len()) {
        return Err(Error::MissingDecomposition);
    }
    let coeffs = vectors.iter().map(|v| v.dotc(y)).collect();
    Ok((MultiplierSurrogate::new(sys.eigenvalues.clone())?, coeffs))
}

/// `<(1 + H^2)^{1/2} y, y>` for a discretized Dirac operator `H` with a
/// complete eigensystem; `y` is in the operator's symmetric coordinates.
pub fn dirac_form_norm<T: Real>(sys: &EigenSystem<T>, y: &DVector<Complex<T>>) -> Result<T> {
    let (s, c) = spectral_surrogate(sys, y)?;
    power_norm(&s, &c, T::lit(0.5))
}
