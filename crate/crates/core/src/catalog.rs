//! The ten equiangular nets and a stationarizer for arbitrary combinatorics.
//!
//! Arc lengths of the optimized entries, from the converged builds:
//!
//! | entry  | lengths (count)                            |
//! |--------|--------------------------------------------|
//! | type44 | 0.23666 (4), 1.01677 (8), 1.46262 (6)      |
//! | type63 | 0.18376 (3), 0.61548 (6), 1.23096 (12)     |
//! | type82 | 0.37399 (8), 0.91540 (8), 1.23096 (8)      |
//!
//! The `type82` standard cut splits the net into eight isometric stable pieces. Each
//! piece has a 4x4 D-N map with entries about a = -0.2973, b = -0.4098, |c| = 0.6533,
//! d = -0.2463. The glued 16x16 map has eigenvalues -1.0457 (2), -1.0080 (2),
//! -0.7177 (2), -0.7071 (2), -0.4926, 0 (3), 0.6762 (2), 0.8742 (2).

use crate::network::{ArcSpec, Network, NetworkError, Vertex};
use crate::sphere::{tangent_frame, UnitVec3, Vec3};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("unknown catalog entry {0:?}")]
    UnknownName(String),
    #[error("stationarizer stalled after {iterations} iterations at residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("arc {0} collapsed")]
    Collapsed(usize),
    #[error("arc {0} has antipodal endpoints")]
    Antipodal(usize),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construction {
    Explicit,
    OneParameter,
    Optimized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub name: &'static str,
    /// `(V, E, F)`.
    pub counts: (usize, usize, usize),
    pub construction: Construction,
    pub triple_junction: bool,
}

const fn entry(name: &'static str, v: usize, e: usize, f: usize, c: Construction, tj: bool) -> CatalogEntry {
    CatalogEntry { name, counts: (v, e, f), construction: c, triple_junction: tj }
}

static ENTRIES: [CatalogEntry; 10] = [
    entry("great-circle", 2, 2, 2, Construction::Explicit, false),
    entry("three-half-circles", 2, 3, 3, Construction::Explicit, true),
    entry("tetrahedron", 4, 6, 4, Construction::Explicit, true),
    entry("cube", 8, 12, 6, Construction::Explicit, true),
    entry("dodecahedron", 20, 30, 12, Construction::Explicit, true),
    entry("prism3", 6, 9, 5, Construction::OneParameter, true),
    entry("prism5", 10, 15, 7, Construction::OneParameter, true),
    entry("type44", 12, 18, 8, Construction::Optimized, true),
    entry("type63", 14, 21, 9, Construction::Optimized, true),
    entry("type82", 16, 24, 10, Construction::Optimized, true),
];

pub fn entries() -> &'static [CatalogEntry] {
    &ENTRIES
}

pub fn find(name: &str) -> Option<&'static CatalogEntry> {
    ENTRIES.iter().find(|e| e.name == name)
}

pub fn build(name: &str) -> Result<Network, CatalogError> {
    let opts = StationarizeOptions::default();
    match name {
        "great-circle" => Ok(great_circle()),
        "three-half-circles" => Ok(three_half_circles()),
        "tetrahedron" => Ok(Network::from_edges(&tetrahedron_points(), &TETRA_EDGES, &[])?),
        "cube" => {
            let (p, e) = cube_skeleton();
            Ok(Network::from_edges(&p, &e, &[])?)
        }
        "dodecahedron" => {
            let (p, e) = dodecahedron_skeleton();
            Ok(Network::from_edges(&p, &e, &[])?)
        }
        "prism3" => Ok(stationarize_latitude(3)?.1),
        "prism5" => Ok(stationarize_latitude(5)?.1),
        "type44" | "type63" | "type82" => {
            let (p, e) = match name {
                "type44" => type44_guess(0.3, 0.9, PI / 4.0),
                "type63" => type63_guess(0.5, 25f64.to_radians()),
                _ => type82_guess(0.8, 0.3),
            };
            let net = Network::from_edges(&p, &e, &[])?;
            Ok(stationarize(&net, &opts)?.0)
        }
        _ => Err(CatalogError::UnknownName(name.to_string())),
    }
}

fn unit(v: Vec3) -> Vec3 {
    v.normalize()
}

fn sph(theta: f64, az: f64) -> Vec3 {
    Vec3::new(theta.sin() * az.cos(), theta.sin() * az.sin(), theta.cos())
}

fn great_circle() -> Network {
    let vertices = vec![
        Vertex { id: 1, position: UnitVec3::new(1.0, 0.0, 0.0).unwrap(), boundary: false },
        Vertex { id: 2, position: UnitVec3::new(-1.0, 0.0, 0.0).unwrap(), boundary: false },
    ];
    let arcs = [
        ArcSpec { id: 1, start_vertex: 1, end_vertex: 2, pole: [0.0, 0.0, 1.0], length: PI },
        ArcSpec { id: 2, start_vertex: 2, end_vertex: 1, pole: [0.0, 0.0, 1.0], length: PI },
    ];
    Network::new(vertices, &arcs).expect("great circle is valid")
}

fn three_half_circles() -> Network {
    let vertices = vec![
        Vertex { id: 1, position: UnitVec3::new(0.0, 0.0, 1.0).unwrap(), boundary: false },
        Vertex { id: 2, position: UnitVec3::new(0.0, 0.0, -1.0).unwrap(), boundary: false },
    ];
    let arcs: Vec<ArcSpec> = (0..3)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / 3.0;
            ArcSpec { id: k + 1, start_vertex: 1, end_vertex: 2, pole: [-t.sin(), t.cos(), 0.0], length: PI }
        })
        .collect();
    Network::new(vertices, &arcs).expect("three half circles are valid")
}

/// Arcs 1-3 leave vertex 1; arcs 4-6 form the opposite triangle.
pub const TETRA_EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (3, 2), (1, 3), (2, 1)];

pub fn tetrahedron_points() -> Vec<Vec3> {
    [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)]
        .iter()
        .map(|&(x, y, z)| unit(Vec3::new(x, y, z)))
        .collect()
}

fn cube_skeleton() -> (Vec<Vec3>, Vec<(usize, usize)>) {
    let sign = |b: usize| if b == 1 { -1.0 } else { 1.0 };
    let p = (0..8).map(|i| unit(Vec3::new(sign((i >> 2) & 1), sign((i >> 1) & 1), sign(i & 1)))).collect();
    let mut e = Vec::new();
    for i in 0..8usize {
        for j in i + 1..8usize {
            if (i ^ j).count_ones() == 1 {
                e.push((i, j));
            }
        }
    }
    (p, e)
}

fn dodecahedron_skeleton() -> (Vec<Vec3>, Vec<(usize, usize)>) {
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    let mut raw = Vec::new();
    for &x in &[1.0, -1.0] {
        for &y in &[1.0, -1.0] {
            for &z in &[1.0, -1.0] {
                raw.push(Vec3::new(x, y, z));
            }
        }
    }
    for &a in &[1.0, -1.0] {
        for &b in &[1.0, -1.0] {
            raw.push(Vec3::new(0.0, a / g, b * g));
            raw.push(Vec3::new(a / g, b * g, 0.0));
            raw.push(Vec3::new(a * g, 0.0, b / g));
        }
    }
    let edge = 2.0 / g;
    let mut e = Vec::new();
    for i in 0..raw.len() {
        for j in i + 1..raw.len() {
            if ((raw[i] - raw[j]).norm() - edge).abs() < 1e-9 {
                e.push((i, j));
            }
        }
    }
    (raw.into_iter().map(unit).collect(), e)
}

/// Initial guess with the S4 symmetry `(x, y, z) -> (y, -x, -z)` exchanging the two halves.
pub fn type44_guess(tt: f64, ta: f64, beta: f64) -> (Vec<Vec3>, Vec<(usize, usize)>) {
    let top = [sph(tt, PI), sph(tt, 0.0), sph(ta, PI - beta), sph(ta, beta), sph(ta, PI + beta), sph(ta, -beta)];
    let s4 = |p: &Vec3| Vec3::new(p.y, -p.x, -p.z);
    let mut pts: Vec<Vec3> = top.to_vec();
    pts.extend(top.iter().map(s4));
    let half = [(0, 1), (0, 2), (1, 3), (2, 3), (0, 4), (1, 5), (4, 5)];
    let mut e: Vec<(usize, usize)> = half.to_vec();
    e.extend(half.iter().map(|&(a, b)| (a + 6, b + 6)));
    let az = |p: &Vec3| p.y.atan2(p.x);
    for i in 2..6 {
        let j = (6..12)
            .min_by(|&a, &b| {
                let da = ((az(&pts[a]) - az(&pts[i]) + PI).rem_euclid(2.0 * PI) - PI).abs();
                let db = ((az(&pts[b]) - az(&pts[i]) + PI).rem_euclid(2.0 * PI) - PI).abs();
                da.total_cmp(&db)
            })
            .unwrap();
        e.push((i, j));
    }
    (pts, e)
}

/// Initial guess with a 3-fold axis through the two polar triple junctions.
pub fn type63_guess(h: f64, delta: f64) -> (Vec<Vec3>, Vec<(usize, usize)>) {
    let mut p = vec![Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, -1.0)];
    let r = (1.0 - h * h).sqrt();
    for k in 0..3 {
        let t = (120.0 * k as f64).to_radians();
        p.push(Vec3::new(r * t.cos(), r * t.sin(), h));
        p.push(Vec3::new(r * t.cos(), r * t.sin(), -h));
        p.push(Vec3::new((t - delta).cos(), (t - delta).sin(), 0.0));
        p.push(Vec3::new((t + delta).cos(), (t + delta).sin(), 0.0));
    }
    let (t, b, l, rr) = (|k: usize| 2 + 4 * k, |k: usize| 3 + 4 * k, |k: usize| 4 + 4 * k, |k: usize| 5 + 4 * k);
    let mut e = Vec::new();
    for k in 0..3 {
        e.extend([(0, t(k)), (1, b(k)), (t(k), l(k)), (t(k), rr(k)), (b(k), l(k)), (b(k), rr(k)), (l(k), rr((k + 2) % 3))]);
    }
    (p, e)
}

/// Initial guess: two polar squares joined through a zig-zag ring of eight vertices.
pub fn type82_guess(z1: f64, z2: f64) -> (Vec<Vec3>, Vec<(usize, usize)>) {
    let ring = |az: f64, z: f64| {
        let r = (1.0 - z * z).sqrt();
        Vec3::new(r * az.cos(), r * az.sin(), z)
    };
    let mut p = Vec::new();
    for k in 0..4 {
        p.push(ring((45.0 + 90.0 * k as f64).to_radians(), z1));
    }
    for k in 0..4 {
        p.push(ring((90.0 + 90.0 * k as f64).to_radians(), -z1));
    }
    for i in 0..8 {
        let z = if i % 2 == 0 { z2 } else { -z2 };
        p.push(ring((45.0 + 45.0 * i as f64).to_radians(), z));
    }
    let ri = |i: usize| 8 + i % 8;
    let mut e = Vec::new();
    for k in 0..4 {
        e.extend([(k, (k + 1) % 4), (4 + k, 4 + (k + 1) % 4), (k, ri(2 * k)), (4 + k, ri(2 * k + 1))]);
    }
    for i in 0..8 {
        e.push((ri(i), ri(i + 1)));
    }
    (p, e)
}

fn prism_points(n: usize, phi: f64) -> Vec<Vec3> {
    let mut p = Vec::with_capacity(2 * n);
    for z in [phi.sin(), -phi.sin()] {
        for k in 0..n {
            let t = 2.0 * PI * k as f64 / n as f64;
            p.push(Vec3::new(phi.cos() * t.cos(), phi.cos() * t.sin(), z));
        }
    }
    p
}

fn prism_edges(n: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for k in 0..n {
        e.extend([(k, (k + 1) % n), (n + k, n + (k + 1) % n), (k, n + k)]);
    }
    e
}

/// North component of the unit tangent from a ring vertex toward its ring neighbour.
fn ring_north(n: usize, phi: f64) -> f64 {
    let p = prism_points(n, phi);
    let (a, b) = (p[0], p[1]);
    let d = (b - a.dot(&b) * a).normalize();
    let north = (Vec3::new(0.0, 0.0, 1.0) - a.z * a).normalize();
    d.dot(&north)
}

/// Latitude `phi` of the prism over a regular `n`-gon where the vertical arc
/// balances the two ring arcs, and the resulting net.
pub fn stationarize_latitude(n: usize) -> Result<(f64, Network), CatalogError> {
    let (mut lo, mut hi) = (1e-6, PI / 2.0 - 1e-6);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if ring_north(n, mid) < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let phi = 0.5 * (lo + hi);
    Ok((phi, Network::from_edges(&prism_points(n, phi), &prism_edges(n), &[])?))
}

#[derive(Debug, Clone)]
pub struct StationarizeOptions {
    pub max_iters: usize,
    pub tol: f64,
    pub fd_step: f64,
    pub armijo: f64,
    pub backtrack: f64,
}

impl Default for StationarizeOptions {
    fn default() -> Self {
        StationarizeOptions { max_iters: 200, tol: 1e-10, fd_step: 1e-7, armijo: 1e-4, backtrack: 0.5 }
    }
}

#[derive(Debug, Clone, Default)]
pub struct StationarizeReport {
    pub iterations: usize,
    pub residual: f64,
    /// `0.5 * sum_P |sum_j tau_P^j|^2` at each accepted iterate.
    pub merit_history: Vec<f64>,
    pub length_history: Vec<f64>,
}

struct Balance<'a> {
    edges: &'a [(usize, usize)],
    interior: &'a [usize],
    nv: usize,
}

impl Balance<'_> {
    fn tangents(&self, x: &[Vec3]) -> Result<Vec<Vec3>, CatalogError> {
        let mut t = vec![Vec3::zeros(); self.nv];
        for (k, &(a, b)) in self.edges.iter().enumerate() {
            let c = x[a].dot(&x[b]);
            if c < -1.0 + 1e-12 {
                return Err(CatalogError::Antipodal(k + 1));
            }
            if (x[a] - x[b]).norm() < 1e-6 {
                return Err(CatalogError::Collapsed(k + 1));
            }
            for (p, q) in [(a, b), (b, a)] {
                t[p] -= (x[q] - x[p].dot(&x[q]) * x[p]).normalize();
            }
        }
        Ok(t)
    }

    fn residual(&self, x: &[Vec3]) -> Result<DVector<f64>, CatalogError> {
        let t = self.tangents(x)?;
        Ok(DVector::from_iterator(3 * self.interior.len(), self.interior.iter().flat_map(|&v| [t[v].x, t[v].y, t[v].z])))
    }

    fn worst(&self, r: &DVector<f64>) -> f64 {
        (0..self.interior.len()).map(|k| r.rows(3 * k, 3).norm()).fold(0.0, f64::max)
    }

    fn length(&self, x: &[Vec3]) -> f64 {
        self.edges.iter().map(|&(a, b)| x[a].dot(&x[b]).clamp(-1.0, 1.0).acos()).sum()
    }
}

fn retract(x: &[Vec3], interior: &[usize], frames: &[(Vec3, Vec3)], delta: &DVector<f64>, t: f64) -> Vec<Vec3> {
    let mut y = x.to_vec();
    for (k, &v) in interior.iter().enumerate() {
        let (e1, e2) = frames[k];
        y[v] = (x[v] + t * (delta[2 * k] * e1 + delta[2 * k + 1] * e2)).normalize();
    }
    y
}

/// Drives interior vertices to a configuration where the outward tangents balance.
///
/// Damped Gauss-Newton on the merit `0.5 |r|^2` with `r` the stacked balance vectors;
/// the Jacobian in per-vertex tangent frames is taken by central differences, steps
/// use a pseudo-inverse and Armijo backtracking. Boundary vertices stay fixed.
pub fn stationarize(net: &Network, opts: &StationarizeOptions) -> Result<(Network, StationarizeReport), CatalogError> {
    let edges: Vec<(usize, usize)> = net.arcs().iter().map(|a| (a.start, a.end)).collect();
    let interior: Vec<usize> = net.interior().collect();
    let bal = Balance { edges: &edges, interior: &interior, nv: net.num_vertices() };
    let mut x: Vec<Vec3> = net.vertices().iter().map(|v| v.position.vec()).collect();
    let mut r = bal.residual(&x)?;
    let mut report = StationarizeReport::default();
    let mut merit = 0.5 * r.norm_squared();
    report.merit_history.push(merit);
    report.length_history.push(bal.length(&x));
    if bal.worst(&r) < opts.tol {
        report.residual = bal.worst(&r);
        return Ok((net.clone(), report));
    }
    for it in 1..=opts.max_iters {
        let frames: Vec<(Vec3, Vec3)> = interior
            .iter()
            .map(|&v| tangent_frame(&UnitVec3::from_vec(x[v]).expect("unit position")))
            .collect();
        let n = 2 * interior.len();
        let mut jac = DMatrix::zeros(r.len(), n);
        for c in 0..n {
            let mut e = DVector::zeros(n);
            e[c] = opts.fd_step;
            let rp = bal.residual(&retract(&x, &interior, &frames, &e, 1.0))?;
            let rm = bal.residual(&retract(&x, &interior, &frames, &e, -1.0))?;
            jac.set_column(c, &((rp - rm) / (2.0 * opts.fd_step)));
        }
        let svd = crate::linalg::svd(&jac, true, true);
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let delta = -svd.solve(&r, 1e-10 * smax).expect("svd solve");
        let slope = (jac.transpose() * &r).dot(&delta);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let y = retract(&x, &interior, &frames, &delta, t);
            if let Ok(ry) = bal.residual(&y) {
                let m = 0.5 * ry.norm_squared();
                if m <= merit + opts.armijo * t * slope {
                    accepted = Some((y, ry, m));
                    break;
                }
            }
            t *= opts.backtrack;
        }
        let Some((y, ry, m)) = accepted else {
            return Err(CatalogError::NotConverged { iterations: it, residual: bal.worst(&r) });
        };
        x = y;
        r = ry;
        merit = m;
        report.merit_history.push(merit);
        report.length_history.push(bal.length(&x));
        report.iterations = it;
        report.residual = bal.worst(&r);
        if report.residual < opts.tol {
            let pos: Vec<UnitVec3> = x.iter().map(|p| UnitVec3::from_vec(*p).expect("unit")).collect();
            return Ok((net.with_positions(&pos)?, report));
        }
    }
    Err(CatalogError::NotConverged { iterations: opts.max_iters, residual: report.residual })
}

/// Gradient of total length with respect to each vertex position: the sum of outward
/// unit tangents, which already lies in the tangent plane.
pub fn length_gradient(net: &Network) -> Vec<Vec3> {
    (0..net.num_vertices())
        .map(|v| net.outward_tangents(v).iter().fold(Vec3::zeros(), |s, t| s + t.vec()))
        .collect()
}

/// The refined net and cut vertex ids of the standard partition of a catalog entry.
pub fn standard_cut(name: &str) -> Result<(Network, Vec<usize>), CatalogError> {
    let net = build(name)?;
    let midpoints = |net: Network, arcs: &[usize]| -> Result<(Network, Vec<usize>), CatalogError> {
        let mut n = net;
        let mut cut = Vec::new();
        for &a in arcs {
            let id = n.vertices().iter().map(|v| v.id).max().unwrap_or(0) + 1;
            n = n.refine(a, 0.5)?;
            cut.push(id);
        }
        Ok((n, cut))
    };
    let pos = |net: &Network, v: usize| net.vertices()[v].position.vec();
    match name {
        "tetrahedron" => {
            let ids: Vec<usize> = net.arcs().iter().map(|a| a.id).collect();
            midpoints(net, &ids)
        }
        "cube" => {
            let cut = net
                .vertices()
                .iter()
                .filter(|v| {
                    let neg = [v.position.x(), v.position.y(), v.position.z()].iter().filter(|&&c| c < 0.0).count();
                    neg % 2 == 0
                })
                .map(|v| v.id)
                .collect();
            Ok((net, cut))
        }
        "dodecahedron" => {
            let even: Vec<usize> = net
                .vertices()
                .iter()
                .filter(|v| {
                    let p = v.position.vec() * 3f64.sqrt();
                    let cube = p.iter().all(|c| (c.abs() - 1.0).abs() < 1e-9);
                    cube && p.iter().filter(|&&c| c < 0.0).count() % 2 == 0
                })
                .map(|v| v.id)
                .collect();
            let axial: Vec<usize> = net
                .arcs()
                .iter()
                .filter(|a| {
                    let m = (pos(&net, a.start) + pos(&net, a.end)).normalize();
                    m.iter().any(|c| (c.abs() - 1.0).abs() < 1e-9)
                })
                .map(|a| a.id)
                .collect();
            let (n, mut cut) = midpoints(net, &axial)?;
            cut.extend(even);
            Ok((n, cut))
        }
        "prism3" | "prism5" | "type44" => {
            let vertical: Vec<usize> = net
                .arcs()
                .iter()
                .filter(|a| pos(&net, a.start).z * pos(&net, a.end).z < 0.0)
                .map(|a| a.id)
                .collect();
            midpoints(net, &vertical)
        }
        "type63" => {
            let poles: Vec<usize> = net.vertices().iter().filter(|v| v.position.z().abs() > 1.0 - 1e-9).map(|v| v.id).collect();
            let equatorial: Vec<usize> = net
                .arcs()
                .iter()
                .filter(|a| pos(&net, a.start).z.abs() < 1e-6 && pos(&net, a.end).z.abs() < 1e-6)
                .map(|a| a.id)
                .collect();
            let (n, mut cut) = midpoints(net, &equatorial)?;
            cut.extend(poles);
            Ok((n, cut))
        }
        "type82" => {
            let cut: Vec<usize> = net
                .arcs()
                .iter()
                .enumerate()
                .filter(|(i, _)| *i >= 16 || i % 4 < 2)
                .map(|(_, a)| a.id)
                .collect();
            midpoints(net, &cut)
        }
        _ => {
            if find(name).is_some() {
                Ok((net, vec![]))
            } else {
                Err(CatalogError::UnknownName(name.to_string()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Rotation3;

    #[test]
    fn platonic_balance_and_lengths() {
        let t = build("tetrahedron").unwrap();
        let l = (-1.0f64 / 3.0).acos();
        assert!(t.arcs().iter().all(|a| (a.geom.length() - l).abs() < 1e-10));
        for name in ["tetrahedron", "cube", "dodecahedron", "three-half-circles"] {
            let n = build(name).unwrap();
            assert!(n.max_balance_residual() < 1e-10, "{name}");
            assert!(n.max_angle_defect() < 1e-7, "{name}");
        }
    }

    #[test]
    fn counts_match_euler() {
        for e in entries() {
            let n = build(e.name).unwrap();
            assert_eq!(n.euler_counts().unwrap(), e.counts, "{}", e.name);
            assert!(n.max_balance_residual() < 1e-8, "{}", e.name);
            if e.triple_junction {
                assert!(n.max_angle_defect() < 1e-7, "{}", e.name);
                assert!(n.is_triple_junction());
            }
        }
    }

    fn invariant(net: &Network, rot: &Rotation3<f64>) -> bool {
        let pts: Vec<Vec3> = net.vertices().iter().map(|v| v.position.vec()).collect();
        pts.iter().all(|p| pts.iter().any(|q| (rot * p - q).norm() < 1e-9))
    }

    #[test]
    fn polyhedral_symmetry() {
        let z = Vec3::z_axis();
        let d = nalgebra::Unit::new_normalize(Vec3::new(1.0, 1.0, 1.0));
        let t = build("tetrahedron").unwrap();
        assert!(invariant(&t, &Rotation3::from_axis_angle(&d, 2.0 * PI / 3.0)));
        assert!(invariant(&t, &Rotation3::from_axis_angle(&z, PI)));
        let c = build("cube").unwrap();
        assert!(invariant(&c, &Rotation3::from_axis_angle(&z, PI / 2.0)));
        assert!(invariant(&c, &Rotation3::from_axis_angle(&d, 2.0 * PI / 3.0)));
        let g = (1.0 + 5f64.sqrt()) / 2.0;
        let f = nalgebra::Unit::new_normalize(Vec3::new(0.0, g, 1.0));
        let dd = build("dodecahedron").unwrap();
        assert!(invariant(&dd, &Rotation3::from_axis_angle(&f, 2.0 * PI / 5.0)));
        assert!(invariant(&dd, &Rotation3::from_axis_angle(&d, 2.0 * PI / 3.0)));
    }

    #[test]
    fn latitude_prism() {
        for (n, f) in [(3, 5), (5, 7)] {
            let (_, net) = stationarize_latitude(n).unwrap();
            assert_eq!(net.euler_counts().unwrap(), (2 * n, 3 * n, f));
            assert!(net.max_balance_residual() < 1e-12);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (p, e) = type63_guess(0.5, 0.4);
        let net = Network::from_edges(&p, &e, &[]).unwrap();
        let g = length_gradient(&net);
        let h = 1e-6;
        for v in [0, 3, 7] {
            let (e1, _) = tangent_frame(&net.vertices()[v].position);
            let moved = |s: f64| {
                let mut pos: Vec<UnitVec3> = net.vertices().iter().map(|x| x.position).collect();
                pos[v] = UnitVec3::from_vec(pos[v].vec() + s * e1).unwrap();
                net.with_positions(&pos).unwrap().total_length()
            };
            let fd = (moved(h) - moved(-h)) / (2.0 * h);
            assert!((fd - g[v].dot(&e1)).abs() < 1e-6, "{fd} vs {}", g[v].dot(&e1));
        }
    }

    #[test]
    fn stationary_input_is_fixed_point() {
        let t = build("tetrahedron").unwrap();
        let (s, rep) = stationarize(&t, &StationarizeOptions::default()).unwrap();
        assert_eq!(rep.iterations, 0);
        assert_eq!(s, t);
    }

    #[test]
    fn merit_is_monotone() {
        let (p, e) = type82_guess(0.8, 0.3);
        let net = Network::from_edges(&p, &e, &[]).unwrap();
        let (_, rep) = stationarize(&net, &StationarizeOptions::default()).unwrap();
        assert!(rep.merit_history.windows(2).all(|w| w[1] <= w[0]));
    }
}
