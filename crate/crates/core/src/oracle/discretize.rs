//! Staggered-grid discretization of the Dirac operator on a metric graph.
//!
//! psi1 lives on grid nodes, psi2 on cell midpoints. Vertex nodes are shared
//! by the incident edges, so continuity of psi1 is built in; the vertex row
//! carries the signed sum of the adjacent psi2 values. Half-lines are cut at
//! `L` with `psi1(L) = 0`, clamped vertices drop their psi1 unknown.
//!
//! The matrix is stored in symmetric coordinates `y = W^{1/2} psi`, where
//! `W` holds the quadrature weights (`h_e` inside an edge, half the incident
//! spacings at a vertex), so the operator is Hermitian in the plain inner
//! product.

use nalgebra::DVector;
use num_complex::Complex;

use super::chain::{ChainLayout, ChainOperator, SparseMatrix};
use crate::error::{Error, Result};
use crate::graph::{End, MetricGraph, PhysicalParams, VertexCondition};
use crate::scalar::{imag_unit, Real};

/// What a row of the discrete operator stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dof {
    /// psi1 at a vertex.
    Vertex(usize),
    /// psi1 at interior node `index` of `edge`.
    Node { edge: usize, index: usize },
    /// psi2 at midpoint `index + 1/2` of `edge`.
    Mid { edge: usize, index: usize },
}

/// Grid of one edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeGrid<T> {
    pub spacing: T,
    pub cells: usize,
    /// Row of psi1 at nodes `0..=cells`; `None` where psi1 is pinned to 0.
    pub nodes: Vec<Option<usize>>,
    /// Row of psi2 at midpoints `0..cells`.
    pub mids: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct DiscreteOperator<T: Real> {
    pub params: PhysicalParams<T>,
    pub h: T,
    pub halfline_length: Option<T>,
    pub grids: Vec<EdgeGrid<T>>,
    pub vertex_dofs: Vec<Option<usize>>,
    pub dofs: Vec<Dof>,
    /// Quadrature weight of each row.
    pub weights: Vec<T>,
    pub matrix: SparseMatrix<T>,
    pub(crate) layout: Vec<ChainLayout>,
    pub(crate) chain: ChainOperator<T>,
}

impl<T: Real> DiscreteOperator<T> {
    pub fn dimension(&self) -> usize {
        self.dofs.len()
    }

    /// Row of `(edge, component, grid index)`: component 1 indexes nodes,
    /// component 2 midpoints.
    pub fn row(&self, edge: usize, component: u8, index: usize) -> Option<usize> {
        let g = self.grids.get(edge)?;
        match component {
            1 => g.nodes.get(index).copied().flatten(),
            2 => g.mids.get(index).copied(),
            _ => None,
        }
    }

    pub fn hermiticity_residual(&self) -> T {
        self.matrix.hermiticity_residual()
    }

    pub fn apply(&self, y: &DVector<Complex<T>>) -> DVector<Complex<T>> {
        self.matrix.apply(y)
    }

    pub fn chain_operator(&self) -> &ChainOperator<T> {
        &self.chain
    }

    /// Copy with the vertex row of `v` negated in its psi2 couplings, as a
    /// wrong balance sign would produce. Breaks Hermiticity on purpose.
    pub fn with_flipped_balance(&self, v: usize) -> Self {
        let mut out = self.clone();
        if let Some(row) = self.vertex_dofs[v] {
            for e in out.matrix.entries.iter_mut() {
                if e.0 == row && e.1 != row {
                    e.2 = -e.2;
                }
            }
            out.chain = ChainOperator::from_sparse(&out.matrix, self.chain.n_vertex(), &self.layout);
        }
        out
    }
}

/// Builds the grid bookkeeping shared by the Dirac operator and the
/// Laplacian: vertex rows first, then edge rows in chain order.
struct Grid<T> {
    vertex_dofs: Vec<Option<usize>>,
    weights_vertex: Vec<T>,
    spacing: Vec<T>,
    cells: Vec<usize>,
}

fn grid<T: Real>(g: &MetricGraph<T>, h: T, l: Option<T>) -> Grid<T> {
    let mut spacing = Vec::new();
    let mut cells = Vec::new();
    for e in g.edges() {
        let len = e.length().or(l).expect("half-lines need a truncation length");
        let n = (len / h).ceil().to_f64_lossy().max(1.0) as usize;
        cells.push(n);
        spacing.push(len / T::from_usize(n).unwrap());
    }
    let mut vertex_dofs = vec![None; g.vertices().len()];
    let mut next = 0;
    for (v, d) in vertex_dofs.iter_mut().enumerate() {
        if g.vertex_condition(v) == VertexCondition::Kirchhoff {
            *d = Some(next);
            next += 1;
        }
    }
    let mut weights_vertex = vec![T::zero(); g.vertices().len()];
    for p in g.endpoints() {
        weights_vertex[p.vertex] += spacing[p.edge] / T::lit(2.0);
    }
    Grid { vertex_dofs, weights_vertex, spacing, cells }
}

fn check_preconditions<T: Real>(g: &MetricGraph<T>, p: &PhysicalParams<T>, h: T, l: Option<T>) -> Result<()> {
    if !(h > T::zero()) {
        return Err(Error::Discretization("grid spacing must be positive".into()));
    }
    if let Some(min) = g.min_segment_length() {
        if h > min / T::lit(8.0) {
            return Err(Error::Discretization(format!(
                "h = {h} exceeds min(l_e)/8 = {}",
                min / T::lit(8.0)
            )));
        }
    }
    if !g.is_compact() {
        let need = T::lit(10.0) * p.light_speed / p.threshold();
        match l {
            Some(l) if l >= need => {}
            _ => {
                return Err(Error::Discretization(format!("half-lines need L >= 10 c/(m c^2) = {need}")))
            }
        }
    }
    Ok(())
}

/// Discretizes `D` with spacing at most `h`; half-lines are truncated at
/// `halfline_length`.
pub fn discretize<T: Real>(
    g: &MetricGraph<T>,
    p: &PhysicalParams<T>,
    h: T,
    halfline_length: Option<T>,
) -> Result<DiscreteOperator<T>> {
    check_preconditions(g, p, h, halfline_length)?;
    let gr = grid(g, h, halfline_length);
    let nv = gr.vertex_dofs.iter().flatten().count();
    let mut dofs: Vec<Dof> = (0..g.vertices().len())
        .filter(|&v| gr.vertex_dofs[v].is_some())
        .map(Dof::Vertex)
        .collect();
    let mut weights: Vec<T> = (0..g.vertices().len())
        .filter(|&v| gr.vertex_dofs[v].is_some())
        .map(|v| gr.weights_vertex[v])
        .collect();
    let mut grids = Vec::with_capacity(g.edges().len());
    let mut layout = Vec::with_capacity(g.edges().len());
    for (ei, e) in g.edges().iter().enumerate() {
        let n = gr.cells[ei];
        let hs = gr.spacing[ei];
        let start = dofs.len();
        let mut nodes = vec![None; n + 1];
        let mut mids = vec![0; n];
        nodes[0] = gr.vertex_dofs[e.from];
        if let Some(to) = e.to {
            nodes[n] = gr.vertex_dofs[to];
        }
        for j in 0..n {
            mids[j] = dofs.len();
            dofs.push(Dof::Mid { edge: ei, index: j });
            weights.push(hs);
            if j + 1 < n {
                nodes[j + 1] = Some(dofs.len());
                dofs.push(Dof::Node { edge: ei, index: j + 1 });
                weights.push(hs);
            }
        }
        layout.push(ChainLayout {
            range: start..dofs.len(),
            head: gr.vertex_dofs[e.from],
            tail: e.to.and_then(|t| gr.vertex_dofs[t]),
        });
        grids.push(EdgeGrid { spacing: hs, cells: n, nodes, mids });
    }

    let ndof = dofs.len();
    let mc2 = p.threshold();
    let ic = imag_unit::<T>() * p.light_speed;
    let mut m = SparseMatrix::new(ndof);
    let sq = |x: T| x.sqrt();
    for (row, dof) in dofs.iter().enumerate() {
        match *dof {
            Dof::Vertex(v) => {
                m.push(row, row, Complex::new(mc2, T::zero()));
                for &pi in g.incident(v) {
                    let ep = g.endpoints()[pi];
                    let gd = &grids[ep.edge];
                    let (mid, sign) = match ep.end {
                        End::Zero => (gd.mids[0], T::one()),
                        End::Far => (gd.mids[gd.cells - 1], -T::one()),
                    };
                    m.push(row, mid, -ic * sign / (sq(gr.weights_vertex[v]) * sq(gd.spacing)));
                }
            }
            Dof::Node { edge, index } => {
                let hs = grids[edge].spacing;
                m.push(row, row, Complex::new(mc2, T::zero()));
                m.push(row, grids[edge].mids[index], -ic / hs);
                m.push(row, grids[edge].mids[index - 1], ic / hs);
            }
            Dof::Mid { edge, index } => {
                let gd = &grids[edge];
                let hs = gd.spacing;
                m.push(row, row, Complex::new(-mc2, T::zero()));
                // -ic (psi1_{j+1} - psi1_j) / h, scaled by sqrt(h / w_node)
                for (node, s) in [(index + 1, T::one()), (index, -T::one())] {
                    if let Some(col) = gd.nodes[node] {
                        let w = weights[col];
                        m.push(row, col, -ic * s / hs * sq(hs / w));
                    }
                }
            }
        }
    }
    let chain = ChainOperator::from_sparse(&m, nv, &layout);
    Ok(DiscreteOperator {
        params: *p,
        h,
        halfline_length: if g.is_compact() { None } else { halfline_length },
        grids,
        vertex_dofs: gr.vertex_dofs,
        dofs,
        weights,
        matrix: m,
        layout,
        chain,
    })
}

/// Grid Kirchhoff Laplacian on the psi1 nodes of the same grid as
/// [`discretize`]: continuity at vertices, derivative balance as the
/// natural boundary condition, `psi = 0` at clamped vertices and at
/// truncated half-line ends. Symmetric coordinates as for the Dirac matrix.
pub fn kirchhoff_laplacian<T: Real>(
    g: &MetricGraph<T>,
    h: T,
    halfline_length: Option<T>,
) -> Result<(SparseMatrix<T>, ChainOperator<T>)> {
    if !(h > T::zero()) {
        return Err(Error::Discretization("grid spacing must be positive".into()));
    }
    if !g.is_compact() && halfline_length.is_none() {
        return Err(Error::Discretization("half-lines need a truncation length".into()));
    }
    let gr = grid(g, h, halfline_length);
    let nv = gr.vertex_dofs.iter().flatten().count();
    let mut weights: Vec<T> = (0..g.vertices().len())
        .filter(|&v| gr.vertex_dofs[v].is_some())
        .map(|v| gr.weights_vertex[v])
        .collect();
    // node rows per edge, 0..=cells
    let mut rows: Vec<Vec<Option<usize>>> = Vec::new();
    let mut layout = Vec::new();
    for (ei, e) in g.edges().iter().enumerate() {
        let n = gr.cells[ei];
        let mut r = vec![None; n + 1];
        r[0] = gr.vertex_dofs[e.from];
        if let Some(t) = e.to {
            r[n] = gr.vertex_dofs[t];
        }
        let start = weights.len();
        for slot in r.iter_mut().take(n).skip(1) {
            *slot = Some(weights.len());
            weights.push(gr.spacing[ei]);
        }
        if weights.len() > start {
            layout.push(ChainLayout {
                range: start..weights.len(),
                head: gr.vertex_dofs[e.from],
                tail: e.to.and_then(|t| gr.vertex_dofs[t]),
            });
        }
        rows.push(r);
    }
    // quadratic form sum over cells |psi_{j+1} - psi_j|^2 / h, pushed row by row
    let mut m = SparseMatrix::new(weights.len());
    let mut row_entries: Vec<Vec<(usize, T)>> = vec![Vec::new(); weights.len()];
    for (ei, r) in rows.iter().enumerate() {
        let inv = T::one() / gr.spacing[ei];
        for j in 0..gr.cells[ei] {
            let (a, b) = (r[j], r[j + 1]);
            for (x, y) in [(a, b), (b, a)] {
                if let Some(x) = x {
                    row_entries[x].push((x, inv));
                    if let Some(y) = y {
                        row_entries[x].push((y, -inv));
                    }
                }
            }
        }
    }
    for (i, ents) in row_entries.into_iter().enumerate() {
        for (j, q) in ents {
            m.push(i, j, Complex::new(q / (weights[i] * weights[j]).sqrt(), T::zero()));
        }
    }
    let op = ChainOperator::from_sparse(&m, nv, &layout);
    Ok((m, op))
}
