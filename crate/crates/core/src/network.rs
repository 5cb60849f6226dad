//! Combinatorial and geometric networks of great arcs, with the vertex value spaces.

use crate::sphere::{arcs_cross, balance_residual, tangent_frame, Endpoint, GeomError, GreatArc, UnitVec3, Vec3};
use nalgebra::{DMatrix, SymmetricEigen};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Distance within which an arc endpoint binds to a vertex.
pub const VERTEX_TOL: f64 = 1e-8;
/// Relative singular value threshold for the rank of the pole matrix.
pub const RANK_TOL: f64 = 1e-9;
/// Tolerance used by the pairwise embeddedness test.
pub const EMBED_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("duplicate {kind} id {id}")]
    DuplicateId { kind: &'static str, id: usize },
    #[error("arc {arc} references unknown vertex {vertex}")]
    UnknownVertex { arc: usize, vertex: usize },
    #[error("unknown arc id {0}")]
    UnknownArc(usize),
    #[error("unknown vertex id {0}")]
    UnknownVertexId(usize),
    #[error("arc {0} is a self-loop")]
    SelfLoop(usize),
    #[error("arc {arc}: endpoint misses vertex by {dist:e}")]
    EndpointMismatch { arc: usize, dist: f64 },
    #[error("arcs {0} and {1} intersect away from a shared vertex")]
    NotEmbedded(usize, usize),
    #[error("vertex {0} has no incident arc")]
    IsolatedVertex(usize),
    #[error("network is disconnected")]
    Disconnected,
    #[error("network has boundary vertices")]
    NotClosed,
    #[error("vertex {0} is a boundary vertex")]
    BoundaryVertex(usize),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: usize,
    pub position: UnitVec3,
    pub boundary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arc {
    pub id: usize,
    /// Vertex index (not id) of the start point.
    pub start: usize,
    pub end: usize,
    pub geom: GreatArc,
}

impl Arc {
    pub fn vertex(&self, e: Endpoint) -> usize {
        match e {
            Endpoint::Start => self.start,
            Endpoint::End => self.end,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Incidence {
    /// Arc index.
    pub arc: usize,
    pub end: Endpoint,
}

/// Arc description by vertex ids, as read from files.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcSpec {
    pub id: usize,
    pub start_vertex: usize,
    pub end_vertex: usize,
    pub pole: [f64; 3],
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    vertices: Vec<Vertex>,
    arcs: Vec<Arc>,
    incidence: Vec<Vec<Incidence>>,
}

impl Network {
    /// Builds a network from vertex records and arc records keyed by vertex id.
    /// Arc starts are snapped to their start vertex; the end must lie within
    /// `VERTEX_TOL` of the end vertex.
    pub fn new(vertices: Vec<Vertex>, arcs: &[ArcSpec]) -> Result<Network, NetworkError> {
        let mut index = BTreeMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.id, i).is_some() {
                return Err(NetworkError::DuplicateId { kind: "vertex", id: v.id });
            }
        }
        let mut built = Vec::with_capacity(arcs.len());
        for a in arcs {
            let s = *index
                .get(&a.start_vertex)
                .ok_or(NetworkError::UnknownVertex { arc: a.id, vertex: a.start_vertex })?;
            let e = *index
                .get(&a.end_vertex)
                .ok_or(NetworkError::UnknownVertex { arc: a.id, vertex: a.end_vertex })?;
            if s == e {
                return Err(NetworkError::SelfLoop(a.id));
            }
            let p = vertices[s].position;
            let pole = UnitVec3::new(a.pole[0], a.pole[1], a.pole[2])?;
            let d = pole.dot(&p);
            let g = GreatArc::new(p, if d.abs() <= 64.0 * f64::EPSILON { pole } else { UnitVec3::from_vec(pole.vec() - d * p.vec())? }, a.length)?;
            let dist = (g.end().vec() - vertices[e].position.vec()).norm();
            if dist > VERTEX_TOL || pole.dot(&p).abs() > VERTEX_TOL {
                return Err(NetworkError::EndpointMismatch { arc: a.id, dist });
            }
            let g = GreatArc::with_pole(p, vertices[e].position, g.pole())?;
            built.push(Arc { id: a.id, start: s, end: e, geom: g });
        }
        Self::assemble(vertices, built)
    }

    /// Minor arcs between the given points; ids are `1..`.
    pub fn from_edges(points: &[Vec3], edges: &[(usize, usize)], boundary: &[usize]) -> Result<Network, NetworkError> {
        let mut vertices = Vec::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            vertices.push(Vertex {
                id: i + 1,
                position: UnitVec3::from_vec(*p)?,
                boundary: boundary.contains(&i),
            });
        }
        let mut arcs = Vec::with_capacity(edges.len());
        for (k, &(a, b)) in edges.iter().enumerate() {
            if a == b {
                return Err(NetworkError::SelfLoop(k + 1));
            }
            let g = GreatArc::between(vertices[a].position, vertices[b].position)?;
            arcs.push(Arc { id: k + 1, start: a, end: b, geom: g });
        }
        Self::assemble(vertices, arcs)
    }

    /// Validates and indexes already-bound arcs.
    pub(crate) fn assemble(vertices: Vec<Vertex>, arcs: Vec<Arc>) -> Result<Network, NetworkError> {
        let mut ids = BTreeSet::new();
        for a in &arcs {
            if !ids.insert(a.id) {
                return Err(NetworkError::DuplicateId { kind: "arc", id: a.id });
            }
            if a.start == a.end {
                return Err(NetworkError::SelfLoop(a.id));
            }
            for (e, v) in [(Endpoint::Start, a.start), (Endpoint::End, a.end)] {
                let dist = (a.geom.endpoint(e).vec() - vertices[v].position.vec()).norm();
                if dist > VERTEX_TOL {
                    return Err(NetworkError::EndpointMismatch { arc: a.id, dist });
                }
            }
        }
        let mut vids = BTreeSet::new();
        for v in &vertices {
            if !vids.insert(v.id) {
                return Err(NetworkError::DuplicateId { kind: "vertex", id: v.id });
            }
        }
        let mut incidence = vec![Vec::new(); vertices.len()];
        for (i, a) in arcs.iter().enumerate() {
            incidence[a.start].push(Incidence { arc: i, end: Endpoint::Start });
            incidence[a.end].push(Incidence { arc: i, end: Endpoint::End });
        }
        for (v, inc) in incidence.iter().enumerate() {
            if inc.is_empty() {
                return Err(NetworkError::IsolatedVertex(vertices[v].id));
            }
        }
        for i in 0..arcs.len() {
            for j in i + 1..arcs.len() {
                if arcs_cross(&arcs[i].geom, &arcs[j].geom, EMBED_TOL) {
                    return Err(NetworkError::NotEmbedded(arcs[i].id, arcs[j].id));
                }
            }
        }
        Ok(Network { vertices, arcs, incidence })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }
    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }
    pub fn incidence(&self, v: usize) -> &[Incidence] {
        &self.incidence[v]
    }
    pub fn degree(&self, v: usize) -> usize {
        self.incidence[v].len()
    }
    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_index(&self, id: usize) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }
    pub fn arc_index(&self, id: usize) -> Option<usize> {
        self.arcs.iter().position(|a| a.id == id)
    }

    pub fn interior(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertices.len()).filter(|&v| !self.vertices[v].boundary)
    }
    pub fn boundary(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertices.len()).filter(|&v| self.vertices[v].boundary)
    }
    pub fn is_closed(&self) -> bool {
        self.vertices.iter().all(|v| !v.boundary)
    }

    /// Closed and every vertex a triple junction.
    pub fn is_triple_junction(&self) -> bool {
        self.is_closed() && (0..self.vertices.len()).all(|v| self.degree(v) == 3)
    }

    pub fn total_length(&self) -> f64 {
        self.arcs.iter().map(|a| a.geom.length()).sum()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for inc in &self.incidence[v] {
                let a = &self.arcs[inc.arc];
                let w = a.vertex(inc.end.other());
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// `(V, E, F)` with `F` from Euler's formula.
    pub fn euler_counts(&self) -> Result<(usize, usize, usize), NetworkError> {
        if !self.is_closed() {
            return Err(NetworkError::NotClosed);
        }
        if !self.is_connected() {
            return Err(NetworkError::Disconnected);
        }
        let v = self.vertices.len();
        let e = self.arcs.len();
        Ok((v, e, 2 + e - v))
    }

    pub fn outward_tangents(&self, v: usize) -> Vec<UnitVec3> {
        self.incidence[v]
            .iter()
            .map(|inc| self.arcs[inc.arc].geom.outward_tangent(inc.end))
            .collect()
    }

    /// Poles of the arcs incident to `v`, in incidence order.
    pub fn incident_poles(&self, v: usize) -> Vec<Vec3> {
        self.incidence[v].iter().map(|inc| self.arcs[inc.arc].geom.pole().vec()).collect()
    }

    pub fn balance_residual(&self, v: usize) -> f64 {
        balance_residual(&self.outward_tangents(v))
    }

    /// Largest tangent-sum norm over interior vertices.
    pub fn max_balance_residual(&self) -> f64 {
        self.interior().map(|v| self.balance_residual(v)).fold(0.0, f64::max)
    }

    /// Largest deviation of a pairwise junction angle from `2pi/3` over triple junctions.
    pub fn max_angle_defect(&self) -> f64 {
        let target = 2.0 * std::f64::consts::PI / 3.0;
        let mut worst = 0.0f64;
        for v in self.interior() {
            let t = self.outward_tangents(v);
            if t.len() != 3 {
                continue;
            }
            for i in 0..3 {
                for j in i + 1..3 {
                    let ang = t[i].dot(&t[j]).clamp(-1.0, 1.0).acos();
                    worst = worst.max((ang - target).abs());
                }
            }
        }
        worst
    }

    fn next_vertex_id(&self) -> usize {
        self.vertices.iter().map(|v| v.id).max().unwrap_or(0) + 1
    }
    fn next_arc_id(&self) -> usize {
        self.arcs.iter().map(|a| a.id).max().unwrap_or(0) + 1
    }

    /// Splits arc `arc_id` at `t * length` into two arcs sharing the pole. The first
    /// piece keeps the id; the new double point and second piece take fresh ids.
    pub fn refine(&self, arc_id: usize, t: f64) -> Result<Network, NetworkError> {
        let i = self.arc_index(arc_id).ok_or(NetworkError::UnknownArc(arc_id))?;
        let (g1, g2) = self.arcs[i].geom.split(t)?;
        let mut vertices = self.vertices.clone();
        let m = vertices.len();
        vertices.push(Vertex { id: self.next_vertex_id(), position: g1.end(), boundary: false });
        let mut arcs = self.arcs.clone();
        let end = arcs[i].end;
        arcs[i] = Arc { id: arc_id, start: arcs[i].start, end: m, geom: g1 };
        arcs.insert(i + 1, Arc { id: self.next_arc_id(), start: m, end, geom: g2 });
        Self::assemble(vertices, arcs)
    }

    /// Reverses arc `arc_id`: swaps its endpoints and negates its pole.
    pub fn flip_orientation(&self, arc_id: usize) -> Result<Network, NetworkError> {
        let i = self.arc_index(arc_id).ok_or(NetworkError::UnknownArc(arc_id))?;
        let mut arcs = self.arcs.clone();
        let a = &self.arcs[i];
        arcs[i] = Arc { id: a.id, start: a.end, end: a.start, geom: a.geom.reversed() };
        Self::assemble(self.vertices.clone(), arcs)
    }

    /// Copy with the given vertex ids turned into boundary vertices.
    pub fn with_boundary(&self, ids: &[usize]) -> Result<Network, NetworkError> {
        let mut n = self.clone();
        for &id in ids {
            let v = self.vertex_index(id).ok_or(NetworkError::UnknownVertexId(id))?;
            n.vertices[v].boundary = true;
        }
        Ok(n)
    }

    /// Copy with every vertex position replaced; arcs become minor arcs between them.
    pub fn with_positions(&self, positions: &[UnitVec3]) -> Result<Network, NetworkError> {
        let mut vertices = self.vertices.clone();
        for (v, p) in vertices.iter_mut().zip(positions) {
            v.position = *p;
        }
        let mut arcs = Vec::with_capacity(self.arcs.len());
        for a in &self.arcs {
            let g = GreatArc::between(vertices[a.start].position, vertices[a.end].position)?;
            arcs.push(Arc { geom: g, ..a.clone() });
        }
        Self::assemble(vertices, arcs)
    }

    /// Sub-network on a set of arc indices; `boundary` lists vertex indices that become
    /// boundary vertices (parent boundary vertices stay boundary).
    pub fn restrict(&self, arc_indices: &[usize], boundary: &BTreeSet<usize>) -> Result<(Network, Vec<usize>), NetworkError> {
        let mut map = BTreeMap::new();
        let mut vertices = Vec::new();
        let mut parent_index = Vec::new();
        let mut arcs = Vec::new();
        for &i in arc_indices {
            let a = &self.arcs[i];
            let mut ends = [0usize; 2];
            for (k, v) in [a.start, a.end].into_iter().enumerate() {
                let idx = *map.entry(v).or_insert_with(|| {
                    let p = &self.vertices[v];
                    vertices.push(Vertex {
                        id: p.id,
                        position: p.position,
                        boundary: p.boundary || boundary.contains(&v),
                    });
                    parent_index.push(v);
                    vertices.len() - 1
                });
                ends[k] = idx;
            }
            arcs.push(Arc { id: a.id, start: ends[0], end: ends[1], geom: a.geom });
        }
        Ok((Self::assemble(vertices, arcs)?, parent_index))
    }

    pub fn arc_specs(&self) -> Vec<ArcSpec> {
        self.arcs
            .iter()
            .map(|a| ArcSpec {
                id: a.id,
                start_vertex: self.vertices[a.start].id,
                end_vertex: self.vertices[a.end].id,
                pole: a.geom.pole().to_array(),
                length: a.geom.length(),
            })
            .collect()
    }
}

/// Orthonormal bases of `V1(P)` (columns of `b1`) and `V2(P)` (columns of `b2`).
#[derive(Debug, Clone, PartialEq)]
pub struct VertexSpace {
    pub b1: DMatrix<f64>,
    pub b2: DMatrix<f64>,
}

impl VertexSpace {
    pub fn dim1(&self) -> usize {
        self.b1.ncols()
    }
    pub fn dim2(&self) -> usize {
        self.b2.ncols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexSpaces {
    spaces: Vec<Option<VertexSpace>>,
    /// Interior vertex indices whose pole matrix has rank zero.
    pub degenerate: Vec<usize>,
}

impl VertexSpaces {
    pub fn get(&self, v: usize) -> Option<&VertexSpace> {
        self.spaces[v].as_ref()
    }
}

/// Orthonormal basis of the orthogonal complement of the column space of `b` in `R^n`.
pub fn complement(b: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    let k = b.ncols();
    if k == 0 {
        return DMatrix::identity(n, n);
    }
    let p = DMatrix::identity(n, n) - b * b.transpose();
    let eig = SymmetricEigen::new(p);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &c| eig.eigenvalues[c].total_cmp(&eig.eigenvalues[a]));
    let cols: Vec<_> = idx[..n - k].iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// `V1` / `V2` bases at a point with the given incident unit normals.
pub fn vertex_space_for_poles(p: &UnitVec3, poles: &[Vec3]) -> VertexSpace {
    let j = poles.len();
    let (e1, e2) = tangent_frame(p);
    let m = DMatrix::from_fn(j, 2, |r, c| poles[r].dot(if c == 0 { &e1 } else { &e2 }));
    let svd = crate::linalg::svd(&m, true, false);
    let u = svd.u.expect("left singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cols: Vec<_> = order
        .iter()
        .filter(|&&i| smax > 0.0 && svd.singular_values[i] > RANK_TOL * smax)
        .map(|&i| u.column(i).into_owned())
        .collect();
    let b1 = if cols.is_empty() { DMatrix::zeros(j, 0) } else { DMatrix::from_columns(&cols) };
    let b2 = complement(&b1, j);
    VertexSpace { b1, b2 }
}

pub fn vertex_spaces(net: &Network) -> VertexSpaces {
    let mut spaces = vec![None; net.num_vertices()];
    let mut degenerate = Vec::new();
    for v in net.interior() {
        let s = vertex_space_for_poles(&net.vertices()[v].position, &net.incident_poles(v));
        if s.dim1() == 0 {
            degenerate.push(v);
        }
        spaces[v] = Some(s);
    }
    VertexSpaces { spaces, degenerate }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn circle() -> Network {
        let pts = [Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::new(-1.0, 0.0, 0.0), Vec3::new(0.0, -1.0, 0.0)];
        Network::from_edges(&pts, &[(0, 1), (1, 2), (2, 3), (3, 0)], &[]).unwrap()
    }

    #[test]
    fn double_point_spaces() {
        let n = circle();
        let vs = vertex_spaces(&n);
        let s = vs.get(1).unwrap();
        assert_eq!(s.dim1(), 1);
        let r = 1.0 / 2f64.sqrt();
        assert!((s.b1[(0, 0)].abs() - r).abs() < 1e-12 && (s.b1[(0, 0)] - s.b1[(1, 0)]).abs() < 1e-12);
        assert!((s.b2[(0, 0)] + s.b2[(1, 0)]).abs() < 1e-12);
    }

    #[test]
    fn opposite_poles_double_point() {
        let n = circle().flip_orientation(2).unwrap();
        let s = vertex_spaces(&n).get(1).unwrap().clone();
        assert_eq!(s.dim1(), 1);
        assert!((s.b1[(0, 0)] + s.b1[(1, 0)]).abs() < 1e-12);
    }

    #[test]
    fn refine_and_flip_bookkeeping() {
        let n = circle();
        let r = n.refine(1, 0.3).unwrap();
        assert_eq!(r.num_arcs(), 5);
        assert!((r.total_length() - 2.0 * PI).abs() < 1e-14);
        let f = n.flip_orientation(3).unwrap().flip_orientation(3).unwrap();
        assert_eq!(f.arcs()[2].start, n.arcs()[2].start);
        assert!((f.arcs()[2].geom.pole().vec() - n.arcs()[2].geom.pole().vec()).norm() < 1e-15);
        assert_eq!(n.euler_counts().unwrap(), (4, 4, 2));
    }

    #[test]
    fn rejects_crossing_and_loops() {
        let pts = [
            Vec3::new(1.0, -0.5, 0.0),
            Vec3::new(1.0, 0.5, 0.0),
            Vec3::new(1.0, 0.0, -0.5),
            Vec3::new(1.0, 0.0, 0.5),
        ];
        assert!(matches!(
            Network::from_edges(&pts, &[(0, 1), (2, 3)], &[]),
            Err(NetworkError::NotEmbedded(1, 2))
        ));
        assert!(matches!(Network::from_edges(&pts, &[(0, 0)], &[]), Err(NetworkError::SelfLoop(_))));
    }

    #[test]
    fn spec_round_trip() {
        let n = circle().refine(2, 0.5).unwrap();
        let m = Network::new(n.vertices().to_vec(), &n.arc_specs()).unwrap();
        for (a, b) in n.arcs().iter().zip(m.arcs()) {
            assert!((a.geom.length() - b.geom.length()).abs() < 1e-15);
        }
    }
}
