use serde::{Deserialize, Serialize};

use super::{Edge, EdgeKind, MetricGraph, PhysicalParams, VertexCondition};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// On-disk graph description.
///
/// ```json
/// {"mass": 0.5, "c": 1.0, "vertices": ["v0", "v1"],
///  "edges": [{"id": "e3", "kind": "segment", "length": 1.0, "from": "v0", "to": "v1"},
///            {"id": "e1", "kind": "halfline", "from": "v0"}]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub mass: f64,
    pub c: f64,
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeDocument>,
    /// Vertices where psi1 vanishes instead of the Kirchhoff-type condition.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub clamped: Vec<String>,
    /// Coupling constants `(a, b)` of the builtin 3-star; when present the
    /// document denotes that model and its condition matrices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelCoupling>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelCoupling {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDocument {
    pub id: String,
    pub kind: EdgeKindTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    pub from: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKindTag {
    Segment,
    Halfline,
}

impl GraphDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph documents always serialize")
    }

    pub fn build<T: Real>(&self) -> Result<(MetricGraph<T>, PhysicalParams<T>)> {
        let params = PhysicalParams::new(T::lit(self.mass), T::lit(self.c))?;
        let index = |edge: &str, v: &str| {
            self.vertices.iter().position(|x| x == v).ok_or_else(|| Error::DanglingEndpoint {
                edge: edge.to_string(),
                vertex: v.to_string(),
            })
        };
        let mut edges = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            let from = index(&e.id, &e.from)?;
            let (kind, to) = match e.kind {
                EdgeKindTag::Segment => {
                    let length = e
                        .length
                        .ok_or_else(|| Error::Malformed(format!("segment `{}` has no length", e.id)))?;
                    if !(length > 0.0 && length.is_finite()) {
                        return Err(Error::BadLength { edge: e.id.clone() });
                    }
                    let to = e
                        .to
                        .as_deref()
                        .ok_or_else(|| Error::Malformed(format!("segment `{}` has no `to` vertex", e.id)))?;
                    (EdgeKind::Segment { length: T::lit(length) }, Some(index(&e.id, to)?))
                }
                EdgeKindTag::Halfline => {
                    if e.length.is_some() || e.to.is_some() {
                        return Err(Error::Malformed(format!(
                            "half-line `{}` takes neither `length` nor `to`",
                            e.id
                        )));
                    }
                    (EdgeKind::HalfLine, None)
                }
            };
            edges.push(Edge { id: e.id.clone(), kind, from, to });
        }
        let mut conditions = vec![VertexCondition::Kirchhoff; self.vertices.len()];
        for v in &self.clamped {
            let i = self
                .vertices
                .iter()
                .position(|x| x == v)
                .ok_or_else(|| Error::Malformed(format!("clamped vertex `{v}` is not declared")))?;
            conditions[i] = VertexCondition::Clamped;
        }
        let g = MetricGraph::new(self.vertices.clone(), edges, conditions)?;
        Ok((g, params))
    }

    pub fn from_graph<T: Real>(g: &MetricGraph<T>, p: &PhysicalParams<T>) -> Self {
        let name = |v: usize| g.vertices()[v].clone();
        Self {
            mass: p.mass.to_f64_lossy(),
            c: p.light_speed.to_f64_lossy(),
            vertices: g.vertices().to_vec(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeDocument {
                    id: e.id.clone(),
                    kind: if e.is_segment() { EdgeKindTag::Segment } else { EdgeKindTag::Halfline },
                    length: e.length().map(Real::to_f64_lossy),
                    from: name(e.from),
                    to: e.to.map(name),
                })
                .collect(),
            clamped: (0..g.vertices().len())
                .filter(|&v| g.vertex_condition(v) == VertexCondition::Clamped)
                .map(name)
                .collect(),
            model: None,
        }
    }
}

/// Parses and validates a graph document.
pub fn parse_graph<T: Real>(text: &str) -> Result<(MetricGraph<T>, PhysicalParams<T>)> {
    GraphDocument::from_json(text)?.build()
}
