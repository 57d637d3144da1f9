use nalgebra::DVector;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::discretize::DiscreteOperator;
use crate::error::{Error, Result};
use crate::scalar::{real, Real};

/// Grid samples of a spinor: psi1 at nodes `0..=cells` (zero where pinned),
/// psi2 at midpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledEdge<T> {
    pub spacing: T,
    pub upper: Vec<Complex<T>>,
    pub lower: Vec<Complex<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledSpinor<T> {
    pub edges: Vec<SampledEdge<T>>,
}

impl<T: Real> SampledSpinor<T> {
    /// Weighted discrete L2 norm squared (nodes and midpoints, vertex nodes
    /// with half weight per incident edge).
    pub fn norm_squared(&self) -> T {
        let mut s = T::zero();
        for e in &self.edges {
            let n = e.upper.len();
            for (j, u) in e.upper.iter().enumerate() {
                let w = if j == 0 || j + 1 == n { e.spacing / T::lit(2.0) } else { e.spacing };
                s += w * u.norm_sqr();
            }
            for l in &e.lower {
                s += e.spacing * l.norm_sqr();
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem<T: Real> {
    /// Ascending.
    pub eigenvalues: Vec<T>,
    /// Unit eigenvectors in symmetric coordinates, when computed.
    pub vectors: Option<Vec<DVector<Complex<T>>>>,
}

impl<T: Real> EigenSystem<T> {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn sampled(&self, op: &DiscreteOperator<T>) -> Result<Vec<SampledSpinor<T>>> {
        let v = self.vectors.as_ref().ok_or(Error::MissingDecomposition)?;
        Ok(v.iter().map(|y| sample(op, y)).collect())
    }
}

/// Converts a vector in symmetric coordinates back to grid values.
pub fn sample<T: Real>(op: &DiscreteOperator<T>, y: &DVector<Complex<T>>) -> SampledSpinor<T> {
    let val = |row: usize| y[row] / op.weights[row].sqrt();
    let zero = Complex::new(T::zero(), T::zero());
    SampledSpinor {
        edges: op
            .grids
            .iter()
            .map(|g| SampledEdge {
                spacing: g.spacing,
                upper: g.nodes.iter().map(|n| n.map(val).unwrap_or(zero)).collect(),
                lower: g.mids.iter().map(|&r| val(r)).collect(),
            })
            .collect(),
    }
}

/// All eigenvalues in `[a, b)`.
pub fn eigs_window<T: Real>(op: &DiscreteOperator<T>, a: T, b: T) -> EigenSystem<T> {
    EigenSystem { eigenvalues: op.chain.eigenvalues_in(a, b), vectors: None }
}

/// Eigenvalues in `[a, b)` with eigenvectors by inverse iteration;
/// vectors of (near-)degenerate eigenvalues are orthogonalized.
pub fn eigs_window_with_vectors<T: Real>(op: &DiscreteOperator<T>, a: T, b: T) -> EigenSystem<T> {
    let eigenvalues = op.chain.eigenvalues_in(a, b);
    let n = op.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut vectors: Vec<DVector<Complex<T>>> = Vec::with_capacity(eigenvalues.len());
    let cluster_tol = T::lit(1e-8) * eigenvalues.iter().fold(T::one(), |m, x| m.max(x.abs()));
    for (i, &lambda) in eigenvalues.iter().enumerate() {
        let cluster: Vec<usize> =
            (0..i).filter(|&j| (eigenvalues[j] - lambda).abs() <= cluster_tol).collect();
        let mut x = DVector::from_fn(n, |_, _| {
            Complex::new(T::lit(rng.gen_range(-1.0..1.0)), T::lit(rng.gen_range(-1.0..1.0)))
        });
        for _ in 0..4 {
            for &j in &cluster {
                let proj = vectors[j].dotc(&x);
                x -= &vectors[j] * proj;
            }
            x = op.chain.solve_shifted(lambda, &x);
            let nrm = x.norm();
            if nrm > T::zero() {
                x /= real(nrm);
            }
        }
        for &j in &cluster {
            let proj = vectors[j].dotc(&x);
            x -= &vectors[j] * proj;
        }
        let nrm = x.norm();
        if nrm > T::zero() {
            x /= real(nrm);
        }
        vectors.push(x);
    }
    EigenSystem { eigenvalues, vectors: Some(vectors) }
}

/// Full dense eigen-decomposition; for small grids only.
pub fn dense_eigensystem<T: Real>(op: &DiscreteOperator<T>) -> EigenSystem<T> {
    let eig = op.matrix.to_dense().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).expect("finite eigenvalues"));
    EigenSystem {
        eigenvalues: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        vectors: Some(order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect()),
    }
}

/// `max_i ||H v_i - lambda_i v_i||` over the stored vectors.
pub fn eigen_residual<T: Real>(op: &DiscreteOperator<T>, sys: &EigenSystem<T>) -> Result<T> {
    let v = sys.vectors.as_ref().ok_or(Error::MissingDecomposition)?;
    Ok(v.iter().zip(&sys.eigenvalues).fold(T::zero(), |acc, (x, &l)| {
        let r = op.apply(x) - x * real(l);
        acc.max(r.norm() / x.norm())
    }))
}
