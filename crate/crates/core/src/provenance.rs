//! Content hashes that identify reports and name output files.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::geometry::{ArcSet, CurveSpec};

/// Hex SHA-256 of the compact JSON form of `value`.
pub fn content_hash<T: Serialize + ?Sized>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("report types serialize infallibly");
    let digest = Sha256::digest(&bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Inputs and settings sufficient to reproduce a solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub curve: CurveSpec,
    pub arcs: Vec<[f64; 2]>,
    pub h_target: Option<f64>,
    pub refinements: usize,
    pub vertices: usize,
    pub triangles: usize,
    pub solver: String,
    pub version: String,
    /// Hash of every other field.
    pub hash: String,
}

impl Provenance {
    pub fn new(arcs: &ArcSet, h_target: Option<f64>, refinements: usize, vertices: usize, triangles: usize) -> Self {
        let mut p = Provenance {
            curve: arcs.curve().spec().clone(),
            arcs: arcs.pairs(),
            h_target,
            refinements,
            vertices,
            triangles,
            solver: "p1-fem/schur-dtn/dense-cholesky-eig".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            hash: String::new(),
        };
        p.hash = content_hash(&p);
        p
    }
}
