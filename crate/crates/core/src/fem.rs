//! Piecewise-linear finite elements on each arc, with vertex values tied to `V1(P)`.
//!
//! Eigenvalues of the pencil `(K - dM, M)` are located by Sylvester inertia counts of
//! `K - (d + sigma) M`: the interior chain of every arc is eliminated by a tridiagonal
//! `LDL^T`, leaving a small dense Schur complement on the vertex unknowns.

use crate::linalg::sym_eigenvalues;
use crate::spectral::SpectralProblem;
use crate::sphere::Endpoint;
use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

struct EndMap {
    offset: usize,
    row: DVector<f64>,
}

struct Layout {
    ends: Vec<[Option<EndMap>; 2]>,
    vertex_dofs: usize,
}

fn layout(prob: &SpectralProblem) -> Layout {
    let net = &prob.net;
    let mut offsets = vec![0usize; net.num_vertices()];
    let mut nv = 0;
    for v in 0..net.num_vertices() {
        offsets[v] = nv;
        if let Some(s) = prob.spaces.get(v) {
            nv += s.dim1();
        }
    }
    let mut ends: Vec<[Option<EndMap>; 2]> = (0..net.num_arcs()).map(|_| [None, None]).collect();
    for v in 0..net.num_vertices() {
        let Some(s) = prob.spaces.get(v) else { continue };
        for (pos, inc) in net.incidence(v).iter().enumerate() {
            let slot = if inc.end == Endpoint::Start { 0 } else { 1 };
            ends[inc.arc][slot] = Some(EndMap {
                offset: offsets[v],
                row: s.b1.row(pos).transpose(),
            });
        }
    }
    Layout { ends, vertex_dofs: nv }
}

/// Number of unknowns of the constrained P1 space.
pub fn fem_dofs(prob: &SpectralProblem, m: usize) -> usize {
    prob.net.num_arcs() * (m - 1) + layout(prob).vertex_dofs
}

fn add_outer(s: &mut DMatrix<f64>, a: &EndMap, b: &EndMap, c: f64) {
    for (i, x) in a.row.iter().enumerate() {
        for (j, y) in b.row.iter().enumerate() {
            s[(a.offset + i, b.offset + j)] += c * x * y;
        }
    }
}

/// Number of discrete eigenvalues strictly below `sigma` with `m` elements per arc.
pub fn count_below(prob: &SpectralProblem, m: usize, sigma: f64) -> usize {
    let lay = layout(prob);
    count_with(prob, &lay, m, sigma)
}

fn count_with(prob: &SpectralProblem, lay: &Layout, m: usize, sigma: f64) -> usize {
    assert!(m >= 2, "need at least two elements per arc");
    let mut neg = 0;
    let mut s = DMatrix::zeros(lay.vertex_dofs, lay.vertex_dofs);
    let n = m - 1;
    let mut piv = vec![0.0; n];
    for (i, arc) in prob.net.arcs().iter().enumerate() {
        let h = arc.geom.length() / m as f64;
        let c = prob.d[i] + sigma;
        let diag = 2.0 / h - c * 4.0 * h / 6.0;
        let off = -1.0 / h - c * h / 6.0;
        let e = 1.0 / h - c * 2.0 * h / 6.0;
        for k in 0..n {
            let mut p = if k == 0 { diag } else { diag - off * off / piv[k - 1] };
            if p == 0.0 {
                p = f64::MIN_POSITIVE;
            }
            piv[k] = p;
            if p < 0.0 {
                neg += 1;
            }
        }
        let solve = |rhs_first: bool| -> Vec<f64> {
            let mut w = vec![0.0; n];
            w[if rhs_first { 0 } else { n - 1 }] = 1.0;
            for k in 1..n {
                w[k] -= off / piv[k - 1] * w[k - 1];
            }
            for k in 0..n {
                w[k] /= piv[k];
            }
            for k in (0..n - 1).rev() {
                let l = off / piv[k];
                w[k] -= l * w[k + 1];
            }
            w
        };
        let y = solve(true);
        let s00 = e - off * off * y[0];
        let s0m = -off * off * y[n - 1];
        let z = solve(false);
        let smm = e - off * off * z[n - 1];
        let [a, b] = &lay.ends[i];
        if let Some(a) = a {
            add_outer(&mut s, a, a, s00);
        }
        if let Some(b) = b {
            add_outer(&mut s, b, b, smm);
        }
        if let (Some(a), Some(b)) = (a, b) {
            add_outer(&mut s, a, b, s0m);
            add_outer(&mut s, b, a, s0m);
        }
    }
    neg + sym_eigenvalues(&s).iter().filter(|&&x| x < 0.0).count()
}

/// Lowest `count` eigenvalues of the P1 discretization with `m` elements per arc.
pub fn fem_oracle(prob: &SpectralProblem, m: usize, count: usize) -> Vec<f64> {
    assert!(m >= 4, "need at least four elements per arc");
    let lay = layout(prob);
    let total = prob.net.num_arcs() * (m - 1) + lay.vertex_dofs;
    let want = count.min(total);
    let dmax = prob.d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let floor = -dmax - 1.0;
    let mut top = 1.0f64;
    while count_with(prob, &lay, m, top) < want {
        top = 2.0 * top + 1.0;
    }
    let mut out = Vec::with_capacity(want);
    for k in 1..=want {
        let mut lo = out.last().cloned().unwrap_or(floor).max(floor) - 1e-12;
        let mut hi = top;
        while hi - lo > 1e-14 * (1.0 + lo.abs().max(hi.abs())) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if count_with(prob, &lay, m, mid) >= k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    out
}

/// Richardson extrapolation `(4 lambda_(2m) - lambda_m) / 3` of the lowest eigenvalues.
pub fn fem_richardson(prob: &SpectralProblem, m: usize, count: usize) -> Vec<f64> {
    let a = fem_oracle(prob, m, count);
    let b = fem_oracle(prob, 2 * m, count);
    a.iter().zip(&b).map(|(x, y)| (4.0 * y - x) / 3.0).collect()
}

/// Stiffness and mass matrices of the constrained space, assembled densely.
pub fn fem_matrices(prob: &SpectralProblem, m: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let lay = layout(prob);
    let ne = prob.net.num_arcs();
    let n = ne * (m - 1) + lay.vertex_dofs;
    let base = ne * (m - 1);
    let mut k = DMatrix::zeros(n, n);
    let mut mm = DMatrix::zeros(n, n);
    for (i, arc) in prob.net.arcs().iter().enumerate() {
        let h = arc.geom.length() / m as f64;
        let node = |j: usize| -> Vec<(usize, f64)> {
            if j == 0 || j == m {
                match &lay.ends[i][if j == 0 { 0 } else { 1 }] {
                    Some(e) => e.row.iter().enumerate().map(|(r, c)| (base + e.offset + r, *c)).collect(),
                    None => vec![],
                }
            } else {
                vec![(i * (m - 1) + j - 1, 1.0)]
            }
        };
        for el in 0..m {
            let nodes = [node(el), node(el + 1)];
            for a in 0..2 {
                for b in 0..2 {
                    let ke = if a == b { 1.0 / h } else { -1.0 / h };
                    let me = if a == b { 2.0 * h / 6.0 } else { h / 6.0 };
                    for &(p, cp) in &nodes[a] {
                        for &(q, cq) in &nodes[b] {
                            k[(p, q)] += cp * cq * (ke - prob.d[i] * me);
                            mm[(p, q)] += cp * cq * me;
                        }
                    }
                }
            }
        }
    }
    (k, mm)
}

/// All eigenvalues of the dense generalized problem (small `m` only).
pub fn fem_dense(prob: &SpectralProblem, m: usize) -> Vec<f64> {
    let (k, mm) = fem_matrices(prob, m);
    let l = Cholesky::new(mm).expect("mass matrix is positive definite").l();
    let li = l.clone().try_inverse().expect("invertible factor");
    let c = &li * k * li.transpose();
    let c = 0.5 * (&c + c.transpose());
    let mut e: Vec<f64> = SymmetricEigen::new(c).eigenvalues.iter().cloned().collect();
    e.sort_by(|a, b| a.total_cmp(b));
    e
}
