//! Hermitian operators made of a few vertex unknowns and long tridiagonal
//! chains attached to them at their ends.
//!
//! Eigenvalues are found by spectrum slicing: the number of eigenvalues
//! below `sigma` is the inertia of `T - sigma` (chains, Sturm recurrence)
//! plus the inertia of the small Schur complement on the vertex block.
//! Linear solves use the same block elimination, giving inverse iteration
//! for eigenvectors in `O(N)` per step.

use std::collections::HashMap;
use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::scalar::{abs, Real};

/// Sparse Hermitian matrix as `(row, col, value)` triplets, assembled row by
/// row so that Hermiticity is a property to check, not an assumption.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    pub n: usize,
    pub entries: Vec<(usize, usize, Complex<T>)>,
}

impl<T: Real> SparseMatrix<T> {
    pub fn new(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    pub fn push(&mut self, row: usize, col: usize, v: Complex<T>) {
        self.entries.push((row, col, v));
    }

    pub fn apply(&self, x: &DVector<Complex<T>>) -> DVector<Complex<T>> {
        let mut y = DVector::zeros(self.n);
        for &(i, j, v) in &self.entries {
            y[i] += v * x[j];
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<Complex<T>> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
        }
        m
    }

    fn lookup(&self) -> HashMap<(usize, usize), Complex<T>> {
        let mut map = HashMap::with_capacity(self.entries.len());
        for &(i, j, v) in &self.entries {
            *map.entry((i, j)).or_insert_with(|| Complex::new(T::zero(), T::zero())) += v;
        }
        map
    }

    /// `max |H_ij - conj(H_ji)|` over stored entries.
    pub fn hermiticity_residual(&self) -> T {
        let map = self.lookup();
        let zero = Complex::new(T::zero(), T::zero());
        map.iter().fold(T::zero(), |acc, (&(i, j), &v)| {
            let t = map.get(&(j, i)).copied().unwrap_or(zero);
            acc.max(abs(v - t.conj()))
        })
    }

    pub fn max_abs(&self) -> T {
        self.entries.iter().fold(T::zero(), |acc, e| acc.max(abs(e.2)))
    }
}

/// Layout of one chain: contiguous unknowns `range`, optionally attached at
/// its first and last element to the unknowns `head` and `tail` (global
/// indices of core unknowns).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainLayout {
    pub range: Range<usize>,
    pub head: Option<usize>,
    pub tail: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
struct Chain<T> {
    start: usize,
    diag: Vec<T>,
    /// `T[i, i+1]`
    off: Vec<Complex<T>>,
    /// `(core position, H[core, first])`
    head: Option<(usize, Complex<T>)>,
    /// `(core position, H[core, last])`
    tail: Option<(usize, Complex<T>)>,
}

/// One splitting of the unknowns into a small dense core and chains.
#[derive(Debug, Clone, PartialEq)]
struct Partition<T> {
    core: Vec<usize>,
    core_diag: Vec<T>,
    /// `(i, j, H[core_i, core_j])`, `i < j`.
    core_off: Vec<(usize, usize, Complex<T>)>,
    chains: Vec<Chain<T>>,
}

/// Per-chain quantities at one shift.
struct Elimination<T> {
    negatives: usize,
    inv_first: T,
    inv_last: T,
    inv_corner: Complex<T>,
}

/// Hermitian operator made of a few vertex unknowns (`0..n_vertex`) and
/// tridiagonal chains hanging between them.
///
/// Inertia and solves go through the Schur complement on a small core. When
/// a chain block is itself nearly singular at the shift (chain and graph
/// spectra can coincide, e.g. Dirichlet and Neumann grids on an interval),
/// that complement is huge and its inertia unreliable, so a second
/// splitting with two elements peeled off every chain end into the core is
/// kept, and each query uses the splitting with the smaller complement.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainOperator<T> {
    n: usize,
    n_vertex: usize,
    partitions: Vec<Partition<T>>,
    tiny: T,
}

const PEEL: usize = 2;

impl<T: Real> ChainOperator<T> {
    /// Reads the structured operator out of a sparse matrix. Entries outside
    /// the declared structure are ignored; [`Self::to_sparse`] gives back
    /// what the solver sees.
    pub fn from_sparse(m: &SparseMatrix<T>, n_vertex: usize, layout: &[ChainLayout]) -> Self {
        let map = m.lookup();
        let base: Vec<usize> = (0..n_vertex).collect();
        let mut partitions = vec![Self::partition(&map, base.clone(), layout)];
        let mut core = base;
        let mut peeled = Vec::with_capacity(layout.len());
        for l in layout {
            let r = l.range.clone();
            let cut_head = if l.head.is_some() { PEEL } else { 0 };
            let cut_tail = if l.tail.is_some() { PEEL } else { 0 };
            if r.len() <= cut_head + cut_tail + 1 {
                core.extend(r);
                continue;
            }
            core.extend(r.start..r.start + cut_head);
            core.extend(r.end - cut_tail..r.end);
            let inner = r.start + cut_head..r.end - cut_tail;
            peeled.push(ChainLayout {
                head: if cut_head > 0 { Some(inner.start - 1) } else { None },
                tail: if cut_tail > 0 { Some(inner.end) } else { None },
                range: inner,
            });
        }
        if core.len() > n_vertex {
            partitions.push(Self::partition(&map, core, &peeled));
        }
        let scale = m.max_abs().max(T::one());
        Self { n: m.n, n_vertex, partitions, tiny: T::machine_eps() * T::machine_eps() * scale }
    }

    fn partition(map: &HashMap<(usize, usize), Complex<T>>, core: Vec<usize>, layout: &[ChainLayout]) -> Partition<T> {
        let zero = Complex::new(T::zero(), T::zero());
        let get = |i: usize, j: usize| map.get(&(i, j)).copied().unwrap_or(zero);
        let pos: HashMap<usize, usize> = core.iter().enumerate().map(|(p, &g)| (g, p)).collect();
        let core_diag = core.iter().map(|&v| get(v, v).re).collect();
        let mut core_off = Vec::new();
        for (i, &a) in core.iter().enumerate() {
            for (j, &b) in core.iter().enumerate().skip(i + 1) {
                let v = get(a, b);
                if v != zero {
                    core_off.push((i, j, v));
                }
            }
        }
        let chains = layout
            .iter()
            .map(|l| {
                let r = l.range.clone();
                Chain {
                    start: r.start,
                    diag: r.clone().map(|i| get(i, i).re).collect(),
                    off: (r.start..r.end.saturating_sub(1)).map(|i| get(i, i + 1)).collect(),
                    head: l.head.map(|v| (pos[&v], get(v, r.start))),
                    tail: l.tail.map(|v| (pos[&v], get(v, r.end - 1))),
                }
            })
            .collect();
        Partition { core, core_diag, core_off, chains }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn n_vertex(&self) -> usize {
        self.n_vertex
    }

    /// The structured operator as triplets (both triangles).
    pub fn to_sparse(&self) -> SparseMatrix<T> {
        let p = &self.partitions[0];
        let mut m = SparseMatrix::new(self.n);
        for (i, &d) in p.core_diag.iter().enumerate() {
            m.push(p.core[i], p.core[i], Complex::new(d, T::zero()));
        }
        for &(i, j, x) in &p.core_off {
            m.push(p.core[i], p.core[j], x);
            m.push(p.core[j], p.core[i], x.conj());
        }
        for c in &p.chains {
            for (i, &d) in c.diag.iter().enumerate() {
                m.push(c.start + i, c.start + i, Complex::new(d, T::zero()));
            }
            for (i, &e) in c.off.iter().enumerate() {
                m.push(c.start + i, c.start + i + 1, e);
                m.push(c.start + i + 1, c.start + i, e.conj());
            }
            let last = c.start + c.diag.len() - 1;
            for (end, idx) in [(c.head, c.start), (c.tail, last)] {
                if let Some((v, x)) = end {
                    m.push(p.core[v], idx, x);
                    m.push(idx, p.core[v], x.conj());
                }
            }
        }
        m
    }

    /// Bound on the spectral radius (Gershgorin).
    pub fn gershgorin_bound(&self) -> T {
        let mut rows = vec![T::zero(); self.n];
        for e in &self.to_sparse().entries {
            rows[e.0] += abs(e.2);
        }
        rows.into_iter().fold(T::zero(), |a, b| a.max(b))
    }

    fn guard(&self, d: T) -> T {
        if d.abs() < self.tiny {
            self.tiny
        } else {
            d
        }
    }

    fn eliminate(&self, c: &Chain<T>, sigma: T) -> Elimination<T> {
        let n = c.diag.len();
        let mut negatives = 0;
        let mut delta = self.guard(c.diag[0] - sigma);
        // (T^{-1})_{1,r} = prod_{i<r} (-e_i / delta_i) / delta_r
        let mut corner = Complex::new(T::one(), T::zero());
        if delta < T::zero() {
            negatives += 1;
        }
        for i in 1..n {
            let e = c.off[i - 1];
            corner *= -e / delta;
            delta = self.guard(c.diag[i] - sigma - e.norm_sqr() / delta);
            if delta < T::zero() {
                negatives += 1;
            }
        }
        let inv_last = T::one() / delta;
        let inv_corner = corner * inv_last;
        let mut back = self.guard(c.diag[n - 1] - sigma);
        for i in (0..n - 1).rev() {
            back = self.guard(c.diag[i] - sigma - c.off[i].norm_sqr() / back);
        }
        Elimination { negatives, inv_first: T::one() / back, inv_last, inv_corner }
    }

    /// Schur complement on the core and the chain negative count.
    fn schur(&self, p: &Partition<T>, sigma: T) -> (DMatrix<Complex<T>>, usize) {
        let nc = p.core.len();
        let mut s = DMatrix::zeros(nc, nc);
        for v in 0..nc {
            s[(v, v)] = Complex::new(p.core_diag[v] - sigma, T::zero());
        }
        for &(i, j, x) in &p.core_off {
            s[(i, j)] += x;
            s[(j, i)] += x.conj();
        }
        let mut negatives = 0;
        for c in &p.chains {
            let el = self.eliminate(c, sigma);
            negatives += el.negatives;
            if let Some((v, x)) = c.head {
                s[(v, v)] -= Complex::new(x.norm_sqr() * el.inv_first, T::zero());
            }
            if let Some((w, y)) = c.tail {
                s[(w, w)] -= Complex::new(y.norm_sqr() * el.inv_last, T::zero());
            }
            if let (Some((v, x)), Some((w, y))) = (c.head, c.tail) {
                let cross = x * el.inv_corner * y.conj();
                s[(v, w)] -= cross;
                s[(w, v)] -= cross.conj();
            }
        }
        (s, negatives)
    }

    /// Complement of the best conditioned splitting at `sigma`.
    fn best_schur(&self, sigma: T) -> (usize, DMatrix<Complex<T>>, usize) {
        let mut best: Option<(usize, DMatrix<Complex<T>>, usize, T)> = None;
        for (i, p) in self.partitions.iter().enumerate() {
            let (s, neg) = self.schur(p, sigma);
            let size = s.iter().fold(T::zero(), |a, z| a.max(abs(*z)));
            if best.as_ref().is_none_or(|b| size < b.3) {
                best = Some((i, s, neg, size));
            }
        }
        let (i, s, neg, _) = best.expect("at least one splitting");
        (i, s, neg)
    }

    /// Number of eigenvalues strictly below `sigma`.
    pub fn count_below(&self, sigma: T) -> usize {
        let (_, s, mut negatives) = self.best_schur(sigma);
        if s.nrows() > 0 {
            negatives += s.symmetric_eigenvalues().iter().filter(|&&x| x < T::zero()).count();
        }
        negatives
    }

    /// All eigenvalues in `[a, b)`, ascending, by bisection on counts.
    pub fn eigenvalues_in(&self, a: T, b: T) -> Vec<T> {
        let mut out = Vec::new();
        if !(a < b) {
            return out;
        }
        let (na, nb) = (self.count_below(a), self.count_below(b));
        self.bisect(a, b, na, nb, 0, &mut out);
        out
    }

    fn bisect(&self, a: T, b: T, na: usize, nb: usize, depth: usize, out: &mut Vec<T>) {
        if nb <= na {
            return;
        }
        let mid = (a + b) / T::lit(2.0);
        let tol = T::lit(4.0) * T::machine_eps() * (a.abs().max(b.abs()).max(T::one()));
        if b - a <= tol || depth > 200 {
            out.extend(std::iter::repeat_n(mid, nb - na));
            return;
        }
        // counts are monotone in exact arithmetic; rounding at a cluster
        // of exact eigenvalues must not create or destroy any
        let nm = self.count_below(mid).clamp(na, nb);
        self.bisect(a, mid, na, nm, depth + 1, out);
        self.bisect(mid, b, nm, nb, depth + 1, out);
    }

    fn thomas(&self, c: &Chain<T>, sigma: T, rhs: &mut [Complex<T>]) {
        let n = c.diag.len();
        let mut delta = vec![T::zero(); n];
        delta[0] = self.guard(c.diag[0] - sigma);
        for i in 1..n {
            let e = c.off[i - 1];
            let l = e.conj() / delta[i - 1];
            let prev = rhs[i - 1];
            rhs[i] -= l * prev;
            delta[i] = self.guard(c.diag[i] - sigma - e.norm_sqr() / delta[i - 1]);
        }
        rhs[n - 1] /= delta[n - 1];
        for i in (0..n - 1).rev() {
            let next = rhs[i + 1];
            rhs[i] = (rhs[i] - c.off[i] * next) / delta[i];
        }
    }

    /// Solves `(H - sigma) x = b` by block elimination.
    pub fn solve_shifted(&self, sigma: T, b: &DVector<Complex<T>>) -> DVector<Complex<T>> {
        let (pi, s, _) = self.best_schur(sigma);
        let p = &self.partitions[pi];
        let nc = p.core.len();
        let mut x = b.clone();
        let mut rv = DVector::from_iterator(nc, p.core.iter().map(|&g| b[g]));
        for c in &p.chains {
            let n = c.diag.len();
            let mut y: Vec<Complex<T>> = (0..n).map(|i| b[c.start + i]).collect();
            self.thomas(c, sigma, &mut y);
            if let Some((v, h)) = c.head {
                rv[v] -= h * y[0];
            }
            if let Some((v, t)) = c.tail {
                rv[v] -= t * y[n - 1];
            }
        }
        let xv = if nc > 0 {
            let mut s = s;
            let scale = s.iter().fold(T::zero(), |a, z| a.max(abs(*z))).max(T::one());
            for v in 0..nc {
                if abs(s[(v, v)]) < self.tiny {
                    s[(v, v)] += Complex::new(self.tiny * scale, T::zero());
                }
            }
            s.lu().solve(&rv).unwrap_or_else(|| DVector::from_element(nc, Complex::new(T::one(), T::zero())))
        } else {
            rv
        };
        for (v, &g) in p.core.iter().enumerate() {
            x[g] = xv[v];
        }
        for c in &p.chains {
            let n = c.diag.len();
            let mut y: Vec<Complex<T>> = (0..n).map(|i| b[c.start + i]).collect();
            if let Some((v, h)) = c.head {
                y[0] -= h.conj() * xv[v];
            }
            if let Some((v, t)) = c.tail {
                y[n - 1] -= t.conj() * xv[v];
            }
            self.thomas(c, sigma, &mut y);
            for (i, yi) in y.into_iter().enumerate() {
                x[c.start + i] = yi;
            }
        }
        x
    }
}
