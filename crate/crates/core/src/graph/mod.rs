//! Metric graphs, physical parameters and closed-form spinor fields.
//!
//! Bounded edges are intervals `[0, l]`, half-lines are `[0, inf)` with the
//! vertex at coordinate 0. A graph is compact iff it has no half-line.

mod document;
mod spinor;

pub mod corpus;
pub use document::{parse_graph, EdgeDocument, EdgeKindTag, GraphDocument, ModelCoupling};
pub use spinor::{apply_dirac, ClosedFormSpinor, Component, EdgeSpinor, Term};

use std::collections::HashMap;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{abs, Real};

/// Mass and speed of light, natural units with hbar = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams<T> {
    pub mass: T,
    pub light_speed: T,
}

impl<T: Real> PhysicalParams<T> {
    pub fn new(mass: T, light_speed: T) -> Result<Self> {
        let ok = |x: T| x > T::zero() && x.is_finite();
        if !ok(mass) || !ok(light_speed) {
            return Err(Error::BadParams);
        }
        Ok(Self { mass, light_speed })
    }

    /// Gap threshold `m c^2`.
    #[inline]
    pub fn threshold(&self) -> T {
        self.mass * self.light_speed * self.light_speed
    }

    #[inline]
    pub fn c(&self) -> T {
        self.light_speed
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeKind<T> {
    Segment { length: T },
    HalfLine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge<T> {
    pub id: String,
    pub kind: EdgeKind<T>,
    /// Vertex at coordinate 0.
    pub from: usize,
    /// Vertex at coordinate `l`; `None` for half-lines.
    pub to: Option<usize>,
}

impl<T: Real> Edge<T> {
    pub fn length(&self) -> Option<T> {
        match self.kind {
            EdgeKind::Segment { length } => Some(length),
            EdgeKind::HalfLine => None,
        }
    }

    pub fn is_segment(&self) -> bool {
        matches!(self.kind, EdgeKind::Segment { .. })
    }
}

/// Which end of an edge an endpoint is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum End {
    /// Coordinate 0.
    Zero,
    /// Coordinate `l` of a segment.
    Far,
}

impl End {
    /// Sign of the psi2 trace in the balance condition: `+` at 0, `-` at `l`.
    #[inline]
    pub fn balance_sign(self) -> i8 {
        match self {
            End::Zero => 1,
            End::Far => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Endpoint {
    pub edge: usize,
    pub end: End,
    pub vertex: usize,
}

/// Condition imposed at a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VertexCondition {
    /// psi1 continuous, signed psi2 traces sum to zero.
    #[default]
    Kirchhoff,
    /// psi1 vanishes at every incident endpoint; psi2 free.
    Clamped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph<T> {
    vertices: Vec<String>,
    edges: Vec<Edge<T>>,
    conditions: Vec<VertexCondition>,
    endpoints: Vec<Endpoint>,
    incidence: Vec<Vec<usize>>,
}

impl<T: Real> MetricGraph<T> {
    /// Validates and builds a graph. Endpoint table order is edge order, a
    /// segment contributing its 0-end then its `l`-end.
    pub fn new(
        vertices: Vec<String>,
        edges: Vec<Edge<T>>,
        conditions: Vec<VertexCondition>,
    ) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Malformed("no vertices".into()));
        }
        if conditions.len() != vertices.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} vertex conditions for {} vertices",
                conditions.len(),
                vertices.len()
            )));
        }
        let mut seen = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if seen.insert(v.as_str(), i).is_some() {
                return Err(Error::Malformed(format!("duplicate vertex `{v}`")));
            }
        }
        let mut ids = HashMap::new();
        let mut endpoints = Vec::new();
        for (ei, e) in edges.iter().enumerate() {
            if ids.insert(e.id.as_str(), ei).is_some() {
                return Err(Error::Malformed(format!("duplicate edge `{}`", e.id)));
            }
            let dangling = |v: usize| Error::DanglingEndpoint {
                edge: e.id.clone(),
                vertex: format!("#{v}"),
            };
            if e.from >= vertices.len() {
                return Err(dangling(e.from));
            }
            endpoints.push(Endpoint { edge: ei, end: End::Zero, vertex: e.from });
            match (e.kind, e.to) {
                (EdgeKind::Segment { length }, Some(to)) => {
                    if !(length > T::zero() && length.is_finite()) {
                        return Err(Error::BadLength { edge: e.id.clone() });
                    }
                    if to >= vertices.len() {
                        return Err(dangling(to));
                    }
                    endpoints.push(Endpoint { edge: ei, end: End::Far, vertex: to });
                }
                (EdgeKind::HalfLine, None) => {}
                (EdgeKind::Segment { .. }, None) => {
                    return Err(Error::Malformed(format!("segment `{}` lacks a far vertex", e.id)))
                }
                (EdgeKind::HalfLine, Some(_)) => {
                    return Err(Error::Malformed(format!("half-line `{}` has a far vertex", e.id)))
                }
            }
        }
        let mut incidence = vec![Vec::new(); vertices.len()];
        for (pi, p) in endpoints.iter().enumerate() {
            incidence[p.vertex].push(pi);
        }
        let g = Self { vertices, edges, conditions, endpoints, incidence };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for e in &self.edges {
            if let Some(to) = e.to {
                let (a, b) = (find(&mut parent, e.from), find(&mut parent, to));
                parent[a] = b;
            }
        }
        let root = find(&mut parent, 0);
        (0..n).all(|v| find(&mut parent, v) == root)
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> &Edge<T> {
        &self.edges[i]
    }

    pub fn vertex_condition(&self, v: usize) -> VertexCondition {
        self.conditions[v]
    }

    pub fn vertex_conditions(&self) -> &[VertexCondition] {
        &self.conditions
    }

    /// All endpoints; segment ends count twice, half-lines once.
    pub fn endpoints(&self) -> &[Endpoint] {
        &self.endpoints
    }

    /// Indices into [`Self::endpoints`] of the endpoints sitting at `v`.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incidence[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incidence[v].len()
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn segment_count(&self) -> usize {
        self.edges.iter().filter(|e| e.is_segment()).count()
    }

    pub fn halfline_count(&self) -> usize {
        self.edges.len() - self.segment_count()
    }

    pub fn is_compact(&self) -> bool {
        self.halfline_count() == 0
    }

    pub fn min_segment_length(&self) -> Option<T> {
        self.edges.iter().filter_map(|e| e.length()).reduce(|a, b| a.min(b))
    }

    pub fn compact_core(&self) -> CompactCore {
        let segments: Vec<usize> =
            (0..self.edges.len()).filter(|&i| self.edges[i].is_segment()).collect();
        let mut vertices: Vec<usize> = segments
            .iter()
            .flat_map(|&i| [self.edges[i].from, self.edges[i].to.unwrap_or(self.edges[i].from)])
            .collect();
        vertices.sort_unstable();
        vertices.dedup();
        CompactCore { segments, vertices }
    }

    /// Edges with exactly one endpoint of degree 1 other than their base,
    /// i.e. segments hanging off the rest of the graph. Returns
    /// `(edge, attached endpoint)` pairs.
    pub fn terminal_segments(&self) -> Vec<(usize, Endpoint)> {
        let mut out = Vec::new();
        for (ei, e) in self.edges.iter().enumerate() {
            let Some(to) = e.to else { continue };
            if to == e.from {
                continue;
            }
            let (d0, d1) = (self.degree(e.from), self.degree(to));
            let pi = |end| {
                *self
                    .endpoints
                    .iter()
                    .find(|p| p.edge == ei && p.end == end)
                    .expect("segment endpoints are in the table")
            };
            if d1 == 1 && d0 > 1 {
                out.push((ei, pi(End::Zero)));
            } else if d0 == 1 && d1 > 1 {
                out.push((ei, pi(End::Far)));
            }
        }
        out
    }

    /// Cycle rank `|E_s| - |V_core| + components` of the compact core.
    pub fn core_cycle_rank(&self) -> usize {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut cycles = 0;
        for e in &self.edges {
            if let Some(to) = e.to {
                let (a, b) = (find(&mut parent, e.from), find(&mut parent, to));
                if a == b {
                    cycles += 1;
                } else {
                    parent[a] = b;
                }
            }
        }
        cycles
    }
}

/// Sub-graph of bounded edges, as index lists into the parent graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompactCore {
    pub segments: Vec<usize>,
    pub vertices: Vec<usize>,
}

/// Fluent construction for tests and builtin graphs.
#[derive(Debug, Clone, Default)]
pub struct GraphBuilder<T> {
    vertices: Vec<String>,
    edges: Vec<(String, Option<T>, String, Option<String>)>,
    clamped: Vec<String>,
}

impl<T: Real> GraphBuilder<T> {
    pub fn new() -> Self {
        Self { vertices: Vec::new(), edges: Vec::new(), clamped: Vec::new() }
    }

    fn touch(&mut self, v: &str) {
        if !self.vertices.iter().any(|x| x == v) {
            self.vertices.push(v.to_string());
        }
    }

    pub fn segment(mut self, id: &str, from: &str, to: &str, length: T) -> Self {
        self.touch(from);
        self.touch(to);
        self.edges.push((id.into(), Some(length), from.into(), Some(to.into())));
        self
    }

    pub fn halfline(mut self, id: &str, from: &str) -> Self {
        self.touch(from);
        self.edges.push((id.into(), None, from.into(), None));
        self
    }

    pub fn clamp(mut self, v: &str) -> Self {
        self.clamped.push(v.into());
        self
    }

    pub fn build(self) -> Result<MetricGraph<T>> {
        let index = |name: &str| self.vertices.iter().position(|v| v == name);
        let mut edges = Vec::with_capacity(self.edges.len());
        for (id, len, from, to) in &self.edges {
            let kind = match len {
                Some(l) => EdgeKind::Segment { length: *l },
                None => EdgeKind::HalfLine,
            };
            edges.push(Edge {
                id: id.clone(),
                kind,
                from: index(from).expect("builder registers vertices"),
                to: to.as_deref().map(|t| index(t).expect("builder registers vertices")),
            });
        }
        let mut conditions = vec![VertexCondition::Kirchhoff; self.vertices.len()];
        for v in &self.clamped {
            let i = index(v).ok_or_else(|| Error::Malformed(format!("unknown vertex `{v}`")))?;
            conditions[i] = VertexCondition::Clamped;
        }
        MetricGraph::new(self.vertices.clone(), edges, conditions)
    }
}

/// Residuals of the vertex conditions at one vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexResidual<T> {
    pub vertex: usize,
    /// Kirchhoff: `max |psi1_e(v) - psi1_f(v)|`. Clamped: `max |psi1_e(v)|`.
    pub continuity: T,
    /// Kirchhoff: signed sum of psi2 traces. Clamped: zero (no condition).
    pub balance: Complex<T>,
}

impl<T: Real> VertexResidual<T> {
    pub fn max_abs(&self) -> T {
        self.continuity.max(abs(self.balance))
    }
}

pub fn vertex_residuals<T: Real>(
    g: &MetricGraph<T>,
    psi: &ClosedFormSpinor<T>,
) -> Vec<VertexResidual<T>> {
    (0..g.vertices().len())
        .map(|v| {
            let traces: Vec<(Complex<T>, Complex<T>, End)> = g
                .incident(v)
                .iter()
                .map(|&pi| {
                    let p = g.endpoints()[pi];
                    let (u, l) = psi.trace(g, p);
                    (u, l, p.end)
                })
                .collect();
            match g.vertex_condition(v) {
                VertexCondition::Kirchhoff => {
                    let mut continuity = T::zero();
                    for i in 0..traces.len() {
                        for j in i + 1..traces.len() {
                            continuity = continuity.max(abs(traces[i].0 - traces[j].0));
                        }
                    }
                    let balance = traces.iter().fold(Complex::new(T::zero(), T::zero()), |acc, t| {
                        if t.2.balance_sign() > 0 {
                            acc + t.1
                        } else {
                            acc - t.1
                        }
                    });
                    VertexResidual { vertex: v, continuity, balance }
                }
                VertexCondition::Clamped => VertexResidual {
                    vertex: v,
                    continuity: traces.iter().fold(T::zero(), |m, t| m.max(abs(t.0))),
                    balance: Complex::new(T::zero(), T::zero()),
                },
            }
        })
        .collect()
}
