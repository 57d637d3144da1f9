#![allow(dead_code)]

use std::path::PathBuf;

use gdirac_core::conditions::ConditionMatrices;
use gdirac_core::graph::{GraphDocument, MetricGraph, PhysicalParams};
use gdirac_core::model::realize;
use gdirac_core::Complex64;

pub const CORPUS: [&str; 5] = ["corpus_0", "corpus_1", "corpus_2", "corpus_3", "corpus_4"];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(format!("{name}.json"))
}

pub fn document(name: &str) -> GraphDocument {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture exists");
    GraphDocument::from_json(&text).expect("fixture parses")
}

pub fn load(name: &str) -> (MetricGraph<f64>, PhysicalParams<f64>, ConditionMatrices<f64>) {
    realize(&document(name)).expect("fixture builds")
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
