use nalgebra::DVector;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::chain::ChainOperator;
use super::discretize::{discretize, kirchhoff_laplacian, DiscreteOperator};
use super::eigs::eigs_window;
use crate::error::{Error, Result};
use crate::graph::{MetricGraph, PhysicalParams};
use crate::scalar::{abs, Real};

/// `max |<H x, y> - <x, H y>| / (|x| |y|)` over 20 seeded random pairs.
pub fn symmetry_residual<T: Real>(op: &DiscreteOperator<T>) -> T {
    let n = op.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut draw = || {
        DVector::from_fn(n, |_, _| Complex::new(T::lit(rng.gen_range(-1.0..1.0)), T::lit(rng.gen_range(-1.0..1.0))))
    };
    let mut worst = T::zero();
    for _ in 0..20 {
        let (x, y) = (draw(), draw());
        let lhs = op.apply(&x).dotc(&y);
        let rhs = x.dotc(&op.apply(&y));
        worst = worst.max(abs(lhs - rhs) / (x.norm() * y.norm()));
    }
    worst
}

/// Number of the smallest eigenvalues `>= from` wanted; grows the window
/// until enough are found.
fn lowest_from<T: Real>(op: &ChainOperator<T>, from: T, count: usize) -> Vec<T> {
    let bound = op.gershgorin_bound() + T::one();
    let mut width = T::one();
    loop {
        let top = (from + width).min(bound);
        let v = op.eigenvalues_in(from, top);
        if v.len() >= count || top >= bound {
            return v.into_iter().take(count).collect();
        }
        width *= T::lit(4.0);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SquareReport<T> {
    /// `(lambda^2 - m^2 c^4) / c^2` for the lowest positive Dirac eigenvalues.
    pub mapped: Vec<T>,
    /// Lowest eigenvalues of the grid Kirchhoff Laplacian.
    pub laplacian: Vec<T>,
    /// `max |a - b| / max(1, |b|)`.
    pub max_mismatch: T,
}

/// Compares the squared Dirac spectrum with the Kirchhoff Laplacian built
/// independently on the same grid.
pub fn square_spectrum_check<T: Real>(
    g: &MetricGraph<T>,
    p: &PhysicalParams<T>,
    h: T,
    modes: usize,
) -> Result<SquareReport<T>> {
    if !g.is_compact() {
        return Err(Error::NonCompact);
    }
    let op = discretize(g, p, h, None)?;
    let a = p.threshold();
    let c2 = p.light_speed * p.light_speed;
    let lambdas = lowest_from(&op.chain, a - T::lit(1e-9) * a.max(T::one()), modes);
    let mapped: Vec<T> = lambdas.iter().map(|&l| ((l * l - a * a) / c2).max(T::zero())).collect();
    let (_, lap) = kirchhoff_laplacian(g, h, None)?;
    let laplacian = lowest_from(&lap, -T::one(), modes);
    let max_mismatch = mapped
        .iter()
        .zip(&laplacian)
        .fold(T::zero(), |acc, (&x, &y)| acc.max((x - y).abs() / y.abs().max(T::one())));
    Ok(SquareReport { mapped, laplacian, max_mismatch })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport<T> {
    pub h: Vec<T>,
    pub values: Vec<T>,
    pub errors: Vec<T>,
    /// Mean of `log2(e(h) / e(h/2))` over consecutive pairs; `None` when
    /// saturated.
    pub order: Option<T>,
    /// Errors already below `1e-12`.
    pub saturated: bool,
}

/// Tracks the discrete eigenvalue closest to `target` over `h_list`.
pub fn convergence_study<T: Real>(
    g: &MetricGraph<T>,
    p: &PhysicalParams<T>,
    target: T,
    h_list: &[T],
    halfline_length: Option<T>,
) -> Result<ConvergenceReport<T>> {
    let half_width = T::lit(0.05) * target.abs().max(p.threshold());
    let mut values = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let op = discretize(g, p, h, halfline_length)?;
        let eigs = eigs_window(&op, target - half_width, target + half_width).eigenvalues;
        let best = eigs
            .into_iter()
            .min_by(|a, b| (*a - target).abs().partial_cmp(&(*b - target).abs()).expect("finite"))
            .ok_or(Error::EigenvalueLost { target: target.to_f64_lossy() })?;
        values.push(best);
    }
    let errors: Vec<T> = values.iter().map(|&v| (v - target).abs()).collect();
    let saturated = errors.iter().all(|&e| e < T::lit(1e-12));
    let order = if saturated || errors.len() < 2 {
        None
    } else {
        let mut sum = T::zero();
        let mut n = 0;
        for w in errors.windows(2) {
            if w[1] > T::zero() {
                sum += (w[0] / w[1]).ln() / T::lit(2.0).ln();
                n += 1;
            }
        }
        (n > 0).then(|| sum / T::from_usize(n).unwrap())
    };
    Ok(ConvergenceReport { h: h_list.to_vec(), values, errors, order, saturated })
}

/// Eigenvalues of the discrete operator strictly inside the gap shrunk by
/// `margin` on each side.
pub fn gap_eigenvalues<T: Real>(op: &DiscreteOperator<T>, margin: T) -> Vec<T> {
    let a = op.params.threshold();
    eigs_window(op, -a + margin, a - margin).eigenvalues
}
