//! JSON schemas for networks, spectra, partitions and D-N maps.
//!
//! Output is deterministic: object keys are sorted and every float is written
//! as `{:.16e}` (17 significant digits).

use crate::dtn::{DtnError, DtnMap, Partition};
use crate::function::ArcFn;
use crate::network::{ArcSpec, Network, NetworkError, Vertex};
use crate::spectral::Spectrum;
use crate::sphere::UnitVec3;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::io::{self, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("non-finite number in {0}")]
    NotFinite(&'static str),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Partition(#[from] DtnError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexJson {
    pub id: usize,
    pub xyz: [f64; 3],
    pub boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcJson {
    pub id: usize,
    pub start_vertex: usize,
    pub end_vertex: usize,
    pub pole: [f64; 3],
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkJson {
    pub vertices: Vec<VertexJson>,
    pub arcs: Vec<ArcJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceJson {
    pub arc_ids: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionJson {
    pub pieces: Vec<PieceJson>,
    pub cut_vertices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueJson {
    pub lambda: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcCoeffJson {
    pub id: usize,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenfunctionJson {
    pub lambda: f64,
    pub arcs: Vec<ArcCoeffJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumJson {
    pub eigenvalues: Vec<EigenvalueJson>,
    pub eigenfunctions: Vec<EigenfunctionJson>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtnJson {
    /// Boundary vertex ids; `V` is ordered by vertex, then by incident arc.
    pub boundary: Vec<usize>,
    /// Domain basis as rows (one per basis vector) in `V` coordinates.
    pub basis: Vec<Vec<f64>>,
    pub matrix: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub asymmetry: f64,
    pub index: usize,
    pub nullity: usize,
}

/// Network JSON in canonical form: re-parsing it rebuilds the same numbers bit for bit.
pub fn network_to_json(net: &Network) -> NetworkJson {
    let mut j = raw_network_json(net);
    for _ in 0..8 {
        let Ok(again) = network_from_json(&j) else { break };
        let next = raw_network_json(&again);
        if next == j {
            break;
        }
        j = next;
    }
    j
}

fn raw_network_json(net: &Network) -> NetworkJson {
    NetworkJson {
        vertices: net
            .vertices()
            .iter()
            .map(|v| VertexJson { id: v.id, xyz: v.position.to_array(), boundary: v.boundary })
            .collect(),
        arcs: net
            .arc_specs()
            .into_iter()
            .map(|a| ArcJson { id: a.id, start_vertex: a.start_vertex, end_vertex: a.end_vertex, pole: a.pole, length: a.length })
            .collect(),
    }
}

pub fn network_from_json(j: &NetworkJson) -> Result<Network, IoError> {
    let finite = |x: &[f64]| x.iter().all(|v| v.is_finite());
    let mut vertices = Vec::with_capacity(j.vertices.len());
    for v in &j.vertices {
        if !finite(&v.xyz) {
            return Err(IoError::NotFinite("vertex xyz"));
        }
        let position = UnitVec3::new(v.xyz[0], v.xyz[1], v.xyz[2]).map_err(NetworkError::from)?;
        vertices.push(Vertex { id: v.id, position, boundary: v.boundary });
    }
    let mut arcs = Vec::with_capacity(j.arcs.len());
    for a in &j.arcs {
        if !finite(&a.pole) || !a.length.is_finite() {
            return Err(IoError::NotFinite("arc"));
        }
        arcs.push(ArcSpec { id: a.id, start_vertex: a.start_vertex, end_vertex: a.end_vertex, pole: a.pole, length: a.length });
    }
    Ok(Network::new(vertices, &arcs)?)
}

pub fn partition_to_json(p: &Partition) -> PartitionJson {
    PartitionJson {
        pieces: p.piece_arc_ids().into_iter().map(|arc_ids| PieceJson { arc_ids }).collect(),
        cut_vertices: p.cut_ids(),
    }
}

pub fn partition_from_json(net: &Network, j: &PartitionJson) -> Result<Partition, IoError> {
    let pieces: Vec<Vec<usize>> = j.pieces.iter().map(|p| p.arc_ids.clone()).collect();
    Ok(Partition::from_pieces(net, &pieces, &j.cut_vertices)?)
}

pub fn spectrum_to_json(net: &Network, s: &Spectrum) -> SpectrumJson {
    let mut eigenfunctions = Vec::new();
    for e in &s.eigenvalues {
        for f in &e.functions {
            let arcs = f
                .arcs
                .iter()
                .zip(net.arcs())
                .map(|(g, a)| {
                    let (ca, cb) = match g {
                        ArcFn::Series(s) => (s.coeffs.first().copied().unwrap_or(0.0), s.coeffs.get(1).copied().unwrap_or(0.0)),
                        ArcFn::Sampled(_) => (f64::NAN, f64::NAN),
                    };
                    ArcCoeffJson { id: a.id, a: ca, b: cb }
                })
                .collect();
            eigenfunctions.push(EigenfunctionJson { lambda: e.lambda, arcs });
        }
    }
    SpectrumJson {
        eigenvalues: s.eigenvalues.iter().map(|e| EigenvalueJson { lambda: e.lambda, multiplicity: e.multiplicity }).collect(),
        eigenfunctions,
        warnings: s.warnings.clone(),
    }
}

pub fn dtn_to_json(net: &Network, q_tilde: &[usize], t: &DtnMap) -> DtnJson {
    let rows = |m: &nalgebra::DMatrix<f64>| -> Vec<Vec<f64>> { (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect() };
    DtnJson {
        boundary: q_tilde.iter().map(|&v| net.vertices()[v].id).collect(),
        basis: rows(&t.basis.transpose()),
        matrix: rows(&t.matrix),
        eigenvalues: t.eigenvalues.clone(),
        asymmetry: t.asymmetry,
        index: t.index(),
        nullity: t.nullity(),
    }
}

/// Pretty printer that writes floats with 17 significant digits.
struct Fixed17 {
    inner: PrettyFormatter<'static>,
}

impl Formatter for Fixed17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

/// Canonical JSON text: sorted keys, fixed float format, trailing newline.
pub fn to_canonical<T: Serialize>(value: &T) -> Result<String, IoError> {
    let v: Value = serde_json::to_value(value)?;
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fixed17 { inner: PrettyFormatter::new() });
    v.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::File { path: path.display().to_string(), source })
}

pub fn read_network(path: &Path) -> Result<Network, IoError> {
    let j: NetworkJson = serde_json::from_str(&read_text(path)?)?;
    network_from_json(&j)
}

pub fn read_partition(net: &Network, path: &Path) -> Result<Partition, IoError> {
    let j: PartitionJson = serde_json::from_str(&read_text(path)?)?;
    partition_from_json(net, &j)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), IoError> {
    let err = |source| IoError::File { path: path.display().to_string(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(contents.as_bytes()).map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn network_round_trip_is_byte_identical() {
        for name in ["tetrahedron", "three-half-circles", "prism3", "type63"] {
            let net = catalog::build(name).unwrap();
            let a = to_canonical(&network_to_json(&net)).unwrap();
            let j: NetworkJson = serde_json::from_str(&a).unwrap();
            let b = to_canonical(&network_to_json(&network_from_json(&j).unwrap())).unwrap();
            assert_eq!(a, b, "{name}");
        }
    }

    #[test]
    fn floats_have_seventeen_digits() {
        let s = to_canonical(&serde_json::json!({"b": 0.1, "a": 1.0})).unwrap();
        assert!(s.contains("\"a\": 1.0000000000000000e0"));
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert_eq!(serde_json::from_str::<Value>(&s).unwrap()["b"].as_f64(), Some(0.1));
    }

    #[test]
    fn malformed_input_is_an_error() {
        assert!(serde_json::from_str::<NetworkJson>("{\"vertices\": [").is_err());
        let j = NetworkJson {
            vertices: vec![VertexJson { id: 1, xyz: [0.0, 0.0, 0.0], boundary: false }],
            arcs: vec![],
        };
        assert!(network_from_json(&j).is_err());
    }
}
