//! Seeded random graphs and the named test graphs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EdgeDocument, EdgeKindTag, GraphDocument};

pub const CORPUS_SEED: u64 = 20_240_917;
pub const CORPUS_SIZE: usize = 5;

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

fn segment(id: String, from: &str, to: &str, length: f64) -> EdgeDocument {
    EdgeDocument { id, kind: EdgeKindTag::Segment, length: Some(length), from: from.into(), to: Some(to.into()) }
}

fn halfline(id: String, from: &str) -> EdgeDocument {
    EdgeDocument { id, kind: EdgeKindTag::Halfline, length: None, from: from.into(), to: None }
}

/// A random tree with 2 to 4 segments of length in `[0.5, 2]` and 1 or 2
/// half-lines, at most 6 edges, `m` and `c` in `[0.5, 1.5]`.
pub fn random_tree<R: Rng>(rng: &mut R) -> GraphDocument {
    let n_seg = rng.gen_range(2..=4);
    let n_half = rng.gen_range(1..=2);
    let mut vertices = vec!["v0".to_string()];
    let mut edges = Vec::new();
    for i in 0..n_seg {
        let parent = vertices[rng.gen_range(0..vertices.len())].clone();
        let child = format!("v{}", vertices.len());
        edges.push(segment(format!("s{i}"), &parent, &child, round3(rng.gen_range(0.5..=2.0))));
        vertices.push(child);
    }
    for i in 0..n_half {
        let at = vertices[rng.gen_range(0..vertices.len())].clone();
        edges.push(halfline(format!("h{i}"), &at));
    }
    GraphDocument {
        mass: round3(rng.gen_range(0.5..=1.5)),
        c: round3(rng.gen_range(0.5..=1.5)),
        vertices,
        edges,
        clamped: Vec::new(),
        model: None,
    }
}

/// The fixed five-graph corpus.
pub fn corpus() -> Vec<GraphDocument> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    (0..CORPUS_SIZE).map(|_| random_tree(&mut rng)).collect()
}

fn document(mass: f64, c: f64, vertices: &[&str], edges: Vec<EdgeDocument>, clamped: &[&str]) -> GraphDocument {
    GraphDocument {
        mass,
        c,
        vertices: vertices.iter().map(|v| v.to_string()).collect(),
        edges,
        clamped: clamped.iter().map(|v| v.to_string()).collect(),
        model: None,
    }
}

/// Named graphs used by the tests, as `(file stem, document)`.
pub fn named() -> Vec<(String, GraphDocument)> {
    let mut out: Vec<(String, GraphDocument)> =
        corpus().into_iter().enumerate().map(|(i, d)| (format!("corpus_{i}"), d)).collect();
    out.push(("model_star".into(), crate::model::builtin_document()));
    out.push((
        "threshold_star".into(),
        document(
            0.5,
            1.0,
            &["v0", "v1", "v2"],
            vec![halfline("e1".into(), "v0"), segment("e2".into(), "v0", "v1", 1.0), segment("e3".into(), "v0", "v2", 1.0)],
            &[],
        ),
    ));
    out.push((
        "compact_star".into(),
        document(
            1.0,
            1.0,
            &["v0", "v1", "v2", "v3"],
            vec![
                segment("a".into(), "v0", "v1", 1.0),
                segment("b".into(), "v0", "v2", 1.0),
                segment("c".into(), "v0", "v3", 2.0),
            ],
            &[],
        ),
    ));
    out.push((
        "interval".into(),
        document(1.0, 1.0, &["v0", "v1"], vec![segment("e".into(), "v0", "v1", 1.0)], &[]),
    ));
    out.push((
        "loop_halfline".into(),
        document(
            1.0,
            1.0,
            &["v0"],
            vec![segment("loop".into(), "v0", "v0", 2.0), halfline("h".into(), "v0")],
            &[],
        ),
    ));
    out.push((
        "decoupled_segment".into(),
        document(0.5, 1.0, &["v0", "v1"], vec![segment("e".into(), "v0", "v1", 1.0)], &["v0"]),
    ));
    out
}
