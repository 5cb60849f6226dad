//! Dirichlet problems with boundary data, Dirichlet-to-Neumann maps of pieces, and the
//! glued map on a cut set together with the index and nullity decomposition checks.

use crate::function::{integrate, NetworkFunction};
use crate::linalg::{column_space, intersection, lstsq, null_space, sym_eigenvalues};
use crate::network::{complement, Network, NetworkError};
use crate::spectral::{
    energy_matrix, gram_matrix, index_nullity, particular, secular_matrix, vertex_residuals, vertex_traces, with_homogeneous,
    SpectralError, SpectralProblem,
};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Relative rank tolerance for null spaces and traces.
pub const TRACE_RANK_TOL: f64 = 1e-9;
/// Projector-sum tolerance for subspace intersections.
pub const INTERSECT_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DtnError {
    #[error("boundary data has {got} entries, expected {expected}")]
    DataShape { got: usize, expected: usize },
    #[error("vertex {0} is not a boundary vertex")]
    NotBoundary(usize),
    #[error("boundary data is not orthogonal to the null traces (defect {0:e})")]
    NotOrthogonal(f64),
    #[error("extension system is inconsistent (residual {0:e})")]
    Inconsistent(f64),
    #[error("Dirichlet-to-Neumann matrix is not symmetric (defect {0:e})")]
    Asymmetric(f64),
    #[error("ledger identity fails: {0}")]
    Ledger(String),
    #[error("invalid partition: {0}")]
    Partition(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Outward-derivative trace operator on the listed boundary vertices at `lambda = 0`,
/// rows in vertex order then incidence order.
fn trace_rows(prob: &SpectralProblem, q: &[usize], derivative: bool) -> DMatrix<f64> {
    let blocks: Vec<DMatrix<f64>> = q
        .iter()
        .map(|&v| {
            let (val, der) = vertex_traces(prob, 0.0, v);
            if derivative {
                der
            } else {
                val
            }
        })
        .collect();
    let n = 2 * prob.net.num_arcs();
    let m: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(m, n);
    let mut r = 0;
    for b in blocks {
        out.view_mut((r, 0), b.shape()).copy_from(&b);
        r += b.nrows();
    }
    out
}

/// Secular right-hand side with the Dirichlet rows of the vertices in `q` set to `g`.
fn dirichlet_rhs(prob: &SpectralProblem, q: &[usize], g: &DVector<f64>) -> DVector<f64> {
    let mut rows = BTreeMap::new();
    let mut r = 0;
    for v in 0..prob.net.num_vertices() {
        rows.insert(v, r);
        r += prob.net.degree(v);
    }
    let mut t = DVector::zeros(r);
    let mut k = 0;
    for &v in q {
        for j in 0..prob.net.degree(v) {
            t[rows[&v] + j] = g[k];
            k += 1;
        }
    }
    t
}

fn check_boundary(prob: &SpectralProblem, q: &[usize]) -> Result<usize, DtnError> {
    let mut n = 0;
    for &v in q {
        if prob.spaces.get(v).is_some() {
            return Err(DtnError::NotBoundary(prob.net.vertices()[v].id));
        }
        n += prob.net.degree(v);
    }
    Ok(n)
}

/// Null space `J` at `lambda = 0` and its outward-derivative traces on `q_tilde`.
#[derive(Debug, Clone)]
pub struct NullTraceData {
    pub q_tilde: Vec<usize>,
    /// Coefficient vectors (columns) of an L2-orthonormal basis of `J`.
    pub null_basis: DMatrix<f64>,
    /// Orthonormal basis of the derivative traces `D` in `V(q_tilde)`.
    pub trace_basis: DMatrix<f64>,
    /// Orthonormal basis of `D^perp` in `V(q_tilde)`.
    pub complement: DMatrix<f64>,
    /// Coefficient vectors of an L2-orthonormal basis of `I0`.
    pub i0_basis: DMatrix<f64>,
}

impl NullTraceData {
    pub fn nullity(&self) -> usize {
        self.null_basis.ncols()
    }
    pub fn dim_trace(&self) -> usize {
        self.trace_basis.ncols()
    }
    pub fn dim_i0(&self) -> usize {
        self.i0_basis.ncols()
    }
}

/// Re-orthonormalizes coefficient columns under the Gram matrix `g`.
fn gram_orthonormal(k: &DMatrix<f64>, g: &DMatrix<f64>) -> DMatrix<f64> {
    if k.ncols() == 0 {
        return k.clone();
    }
    let m = k.transpose() * g * k;
    let eig = SymmetricEigen::new(0.5 * (&m + m.transpose()));
    let scale = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| 1.0 / x.max(1e-300).sqrt()));
    k * eig.eigenvectors * scale
}

pub fn null_trace_data(prob: &SpectralProblem, q_tilde: &[usize]) -> Result<NullTraceData, DtnError> {
    let n = check_boundary(prob, q_tilde)?;
    let m0 = secular_matrix(prob, 0.0);
    let g = gram_matrix(prob, 0.0);
    let j = gram_orthonormal(&null_space(&m0, TRACE_RANK_TOL, 0.0), &g);
    let dtr = trace_rows(prob, q_tilde, true);
    let d = &dtr * &j;
    let trace_basis = column_space(&d, TRACE_RANK_TOL, 1.0);
    let comp = complement(&trace_basis, n);
    let ker = if j.ncols() == 0 { DMatrix::zeros(0, 0) } else { null_space(&d, TRACE_RANK_TOL, 1.0) };
    let i0 = if j.ncols() == 0 { DMatrix::zeros(j.nrows(), 0) } else { gram_orthonormal(&(&j * ker), &g) };
    Ok(NullTraceData { q_tilde: q_tilde.to_vec(), null_basis: j, trace_basis, complement: comp, i0_basis: i0 })
}

/// Result of a Dirichlet solve at `lambda = 0`.
#[derive(Debug, Clone)]
pub enum DirichletOutcome {
    Solved(NetworkFunction),
    /// Values of `int f v + sum_Q g dv/dtau` over a basis of `J`.
    Obstructed(Vec<f64>),
}

/// Solves `u'' + d u = f` with `u = g` on the boundary vertices (all of them, vertex then
/// incidence order) under the interior vertex conditions. Sources are per-arc monomials.
pub fn dirichlet_solve(prob: &SpectralProblem, g: &DVector<f64>, sources: &[Vec<f64>]) -> Result<DirichletOutcome, DtnError> {
    let q: Vec<usize> = prob.net.boundary().collect();
    let n = check_boundary(prob, &q)?;
    if g.len() != n {
        return Err(DtnError::DataShape { got: g.len(), expected: n });
    }
    if sources.len() != prob.net.num_arcs() {
        return Err(DtnError::DataShape { got: sources.len(), expected: prob.net.num_arcs() });
    }
    let mus = prob.mus(0.0);
    let part: Vec<_> = mus.iter().zip(sources).map(|(&mu, f)| particular(mu, f)).collect();
    let rhs = dirichlet_rhs(prob, &q, g) - vertex_residuals(prob, &NetworkFunction::from_series(part.clone()));
    let data = null_trace_data(prob, &q)?;
    let j = &data.null_basis;
    if j.ncols() > 0 {
        let dtr = trace_rows(prob, &q, true);
        let funcs: Vec<f64> = (0..j.ncols())
            .map(|k| {
                let v = NetworkFunction::from_coefficients(&mus, &j.column(k).into_owned());
                let src: f64 = prob
                    .net
                    .arcs()
                    .iter()
                    .enumerate()
                    .map(|(i, a)| {
                        integrate(a.geom.length(), |s| {
                            let f: f64 = sources[i].iter().enumerate().map(|(p, c)| c * s.powi(p as i32)).sum();
                            f * v.arcs[i].value(s)
                        })
                    })
                    .sum();
                src + g.dot(&(&dtr * j.column(k)))
            })
            .collect();
        let scale = 1.0 + g.norm() + sources.iter().flatten().map(|c| c.abs()).sum::<f64>();
        if funcs.iter().any(|x| x.abs() > 1e-8 * scale) {
            return Ok(DirichletOutcome::Obstructed(funcs));
        }
    }
    let m0 = secular_matrix(prob, 0.0);
    let (mut x, res) = lstsq(&m0, &rhs, 1e-11);
    if res > 1e-8 * (1.0 + rhs.norm()) {
        return Err(DtnError::Inconsistent(res));
    }
    if j.ncols() > 0 {
        let gm = gram_matrix(prob, 0.0);
        x -= j * (j.transpose() * &gm * &x);
    }
    Ok(DirichletOutcome::Solved(with_homogeneous(&part, &x)))
}

/// Coefficients of the L-extension of `g in D^perp`: `Lu = 0`, `u = g` on `q_tilde`,
/// zero on the other boundary vertices, derivative traces orthogonal to `D`, `u perp I0`.
pub fn l_extension_coefficients(prob: &SpectralProblem, data: &NullTraceData, g: &DVector<f64>) -> Result<DVector<f64>, DtnError> {
    let n = data.complement.nrows();
    if g.len() != n {
        return Err(DtnError::DataShape { got: g.len(), expected: n });
    }
    let defect = (data.trace_basis.transpose() * g).norm();
    if defect > 1e-9 * g.norm().max(1.0) {
        return Err(DtnError::NotOrthogonal(defect));
    }
    let m0 = secular_matrix(prob, 0.0);
    let dtr = trace_rows(prob, &data.q_tilde, true);
    let gm = gram_matrix(prob, 0.0);
    let rows_d = data.trace_basis.transpose() * &dtr;
    let rows_i = data.i0_basis.transpose() * &gm;
    let e = m0.ncols();
    let total = m0.nrows() + rows_d.nrows() + rows_i.nrows();
    let mut a = DMatrix::zeros(total, e);
    a.view_mut((0, 0), m0.shape()).copy_from(&m0);
    a.view_mut((m0.nrows(), 0), rows_d.shape()).copy_from(&rows_d);
    a.view_mut((m0.nrows() + rows_d.nrows(), 0), rows_i.shape()).copy_from(&rows_i);
    let mut b = DVector::zeros(total);
    b.rows_mut(0, m0.nrows()).copy_from(&dirichlet_rhs(prob, &data.q_tilde, g));
    let (x, res) = lstsq(&a, &b, 1e-12);
    if res > 1e-8 * (1.0 + g.norm()) {
        return Err(DtnError::Inconsistent(res));
    }
    Ok(x)
}

pub fn l_extension(prob: &SpectralProblem, data: &NullTraceData, g: &DVector<f64>) -> Result<NetworkFunction, DtnError> {
    let x = l_extension_coefficients(prob, data, g)?;
    Ok(NetworkFunction::from_coefficients(&prob.mus(0.0), &x))
}

#[derive(Debug, Clone)]
pub struct DtnMap {
    /// Orthonormal domain basis (columns) inside `V(q_tilde)`.
    pub basis: DMatrix<f64>,
    pub matrix: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    /// Largest entry of `T - T^T` before symmetrization.
    pub asymmetry: f64,
}

impl DtnMap {
    fn from_matrix(basis: DMatrix<f64>, t: DMatrix<f64>) -> Result<Self, DtnError> {
        let asymmetry = (&t - t.transpose()).abs().max();
        if asymmetry > 1e-7 {
            return Err(DtnError::Asymmetric(asymmetry));
        }
        let matrix = 0.5 * (&t + t.transpose());
        let eigenvalues = sym_eigenvalues(&matrix);
        Ok(DtnMap { basis, matrix, eigenvalues, asymmetry })
    }

    pub fn zero_threshold(&self) -> f64 {
        let norm = self.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max);
        1e-8 * (1.0 + norm)
    }

    pub fn index(&self) -> usize {
        let t = self.zero_threshold();
        self.eigenvalues.iter().filter(|&&x| x < -t).count()
    }

    pub fn nullity(&self) -> usize {
        let t = self.zero_threshold();
        self.eigenvalues.iter().filter(|&&x| x.abs() <= t).count()
    }
}

/// D-N map on `D^perp` together with the extension coefficients of its basis vectors.
fn dtn_with_extensions(prob: &SpectralProblem, data: &NullTraceData) -> Result<(DtnMap, Vec<DVector<f64>>), DtnError> {
    let w = &data.complement;
    let dtr = trace_rows(prob, &data.q_tilde, true);
    let ext: Vec<DVector<f64>> =
        (0..w.ncols()).map(|k| l_extension_coefficients(prob, data, &w.column(k).into_owned())).collect::<Result<_, _>>()?;
    let k = w.ncols();
    let mut t = DMatrix::zeros(k, k);
    for (c, x) in ext.iter().enumerate() {
        let tr = w.transpose() * (&dtr * x);
        t.set_column(c, &tr);
    }
    Ok((DtnMap::from_matrix(w.clone(), t)?, ext))
}

/// Dirichlet-to-Neumann map of `prob` with respect to the boundary vertices `q_tilde`.
pub fn dtn_map(prob: &SpectralProblem, q_tilde: &[usize]) -> Result<DtnMap, DtnError> {
    let data = null_trace_data(prob, q_tilde)?;
    Ok(dtn_with_extensions(prob, &data)?.0)
}

/// A subnetwork of a partition. Cut vertices become boundary vertices of the piece.
#[derive(Debug, Clone)]
pub struct Piece {
    pub net: Network,
    /// Parent arc index of each piece arc.
    pub arcs: Vec<usize>,
    /// Parent vertex index of each piece vertex.
    pub parent_vertex: Vec<usize>,
    /// Piece vertex indices that come from cut vertices.
    pub q_tilde: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Partition {
    pub parent: Network,
    /// Parent vertex indices of the cut set.
    pub cut: Vec<usize>,
    pub pieces: Vec<Piece>,
}

impl Partition {
    /// Pieces are the classes of arcs linked through vertices outside the cut.
    pub fn from_cut(parent: &Network, cut_ids: &[usize]) -> Result<Partition, DtnError> {
        let cut = Self::cut_indices(parent, cut_ids)?;
        let cutset: BTreeSet<usize> = cut.iter().cloned().collect();
        let e = parent.num_arcs();
        let mut root: Vec<usize> = (0..e).collect();
        fn find(r: &mut Vec<usize>, x: usize) -> usize {
            let mut x = x;
            while r[x] != x {
                r[x] = r[r[x]];
                x = r[x];
            }
            x
        }
        for v in 0..parent.num_vertices() {
            if cutset.contains(&v) {
                continue;
            }
            let inc = parent.incidence(v);
            for w in inc.windows(2) {
                let (a, b) = (find(&mut root, w[0].arc), find(&mut root, w[1].arc));
                root[a] = b;
            }
        }
        let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..e {
            let r = find(&mut root, i);
            classes.entry(r).or_default().push(i);
        }
        let mut groups: Vec<Vec<usize>> = classes.into_values().collect();
        groups.sort();
        Self::assemble(parent, cut, groups)
    }

    /// Pieces given explicitly by arc ids.
    pub fn from_pieces(parent: &Network, pieces: &[Vec<usize>], cut_ids: &[usize]) -> Result<Partition, DtnError> {
        let cut = Self::cut_indices(parent, cut_ids)?;
        let mut owner = vec![usize::MAX; parent.num_arcs()];
        let mut groups = Vec::new();
        for (p, ids) in pieces.iter().enumerate() {
            if ids.is_empty() {
                return Err(DtnError::Partition(format!("piece {} is empty", p + 1)));
            }
            let mut g = Vec::new();
            for &id in ids {
                let i = parent.arc_index(id).ok_or_else(|| DtnError::Partition(format!("unknown arc id {id}")))?;
                if owner[i] != usize::MAX {
                    return Err(DtnError::Partition(format!("arc {id} appears twice")));
                }
                owner[i] = p;
                g.push(i);
            }
            groups.push(g);
        }
        if let Some(i) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(DtnError::Partition(format!("arc {} is in no piece", parent.arcs()[i].id)));
        }
        let cutset: BTreeSet<usize> = cut.iter().cloned().collect();
        for v in 0..parent.num_vertices() {
            let owners: BTreeSet<usize> = parent.incidence(v).iter().map(|inc| owner[inc.arc]).collect();
            if owners.len() > 1 && !cutset.contains(&v) {
                return Err(DtnError::Partition(format!(
                    "vertex {} joins two pieces but is not a cut vertex",
                    parent.vertices()[v].id
                )));
            }
        }
        Self::assemble(parent, cut, groups)
    }

    fn cut_indices(parent: &Network, ids: &[usize]) -> Result<Vec<usize>, DtnError> {
        let mut seen = BTreeSet::new();
        ids.iter()
            .map(|&id| {
                let v = parent.vertex_index(id).ok_or_else(|| DtnError::Partition(format!("unknown vertex id {id}")))?;
                if parent.vertices()[v].boundary {
                    return Err(DtnError::Partition(format!("cut vertex {id} is a boundary vertex")));
                }
                if !seen.insert(v) {
                    return Err(DtnError::Partition(format!("cut vertex {id} listed twice")));
                }
                Ok(v)
            })
            .collect()
    }

    fn assemble(parent: &Network, cut: Vec<usize>, groups: Vec<Vec<usize>>) -> Result<Partition, DtnError> {
        let cutset: BTreeSet<usize> = cut.iter().cloned().collect();
        let pieces = groups
            .into_iter()
            .map(|arcs| {
                let (net, parent_vertex) = parent.restrict(&arcs, &cutset)?;
                let q_tilde = (0..net.num_vertices()).filter(|&v| cutset.contains(&parent_vertex[v])).collect();
                Ok(Piece { net, arcs, parent_vertex, q_tilde })
            })
            .collect::<Result<Vec<_>, DtnError>>()?;
        Ok(Partition { parent: parent.clone(), cut, pieces })
    }

    /// Piece arc ids, for serialization.
    pub fn piece_arc_ids(&self) -> Vec<Vec<usize>> {
        self.pieces.iter().map(|p| p.arcs.iter().map(|&i| self.parent.arcs()[i].id).collect()).collect()
    }

    pub fn cut_ids(&self) -> Vec<usize> {
        self.cut.iter().map(|&v| self.parent.vertices()[v].id).collect()
    }

    /// Offsets of each cut vertex inside `V(cut)`.
    fn offsets(&self) -> (BTreeMap<usize, usize>, usize) {
        let mut off = BTreeMap::new();
        let mut n = 0;
        for &v in &self.cut {
            off.insert(v, n);
            n += self.parent.degree(v);
        }
        (off, n)
    }

    /// `V(cut) x V(q_tilde_i)` coordinate embedding of piece `i`.
    pub fn embedding(&self, i: usize) -> DMatrix<f64> {
        let (off, n) = self.offsets();
        let p = &self.pieces[i];
        let m: usize = p.q_tilde.iter().map(|&v| p.net.degree(v)).sum();
        let mut e = DMatrix::zeros(n, m);
        let mut c = 0;
        for &v in &p.q_tilde {
            let pv = p.parent_vertex[v];
            for inc in p.net.incidence(v) {
                let parc = p.arcs[inc.arc];
                let pos = self
                    .parent
                    .incidence(pv)
                    .iter()
                    .position(|x| x.arc == parc && x.end == inc.end)
                    .expect("piece incidence exists in the parent");
                e[(off[&pv] + pos, c)] = 1.0;
                c += 1;
            }
        }
        e
    }

    /// Block-diagonal `V1` and `V2` bases of the cut set.
    pub fn cut_spaces(&self, parent: &SpectralProblem) -> (DMatrix<f64>, DMatrix<f64>) {
        let (off, n) = self.offsets();
        let k1: usize = self.cut.iter().map(|&v| parent.spaces.get(v).unwrap().dim1()).sum();
        let mut b1 = DMatrix::zeros(n, k1);
        let mut b2 = DMatrix::zeros(n, n - k1);
        let (mut c1, mut c2) = (0, 0);
        for &v in &self.cut {
            let s = parent.spaces.get(v).unwrap();
            b1.view_mut((off[&v], c1), s.b1.shape()).copy_from(&s.b1);
            b2.view_mut((off[&v], c2), s.b2.shape()).copy_from(&s.b2);
            c1 += s.dim1();
            c2 += s.dim2();
        }
        (b1, b2)
    }

    pub fn piece_problem(&self, parent: &SpectralProblem, i: usize) -> Result<SpectralProblem, DtnError> {
        let p = &self.pieces[i];
        Ok(SpectralProblem::with_potential(p.net.clone(), p.arcs.iter().map(|&a| parent.d[a]).collect())?)
    }
}

#[derive(Debug, Clone)]
pub struct SpaceLedger {
    pub dim_v: usize,
    pub dim_v1: usize,
    pub dim_v2: usize,
    pub v1_bar: DMatrix<f64>,
    pub v2_bar: DMatrix<f64>,
    pub f1: DMatrix<f64>,
    pub f2: DMatrix<f64>,
}

impl SpaceLedger {
    pub fn dims(&self) -> [usize; 4] {
        [self.v1_bar.ncols(), self.v2_bar.ncols(), self.f1.ncols(), self.f2.ncols()]
    }

    pub fn holds(&self) -> bool {
        let [a, b, c, d] = self.dims();
        a + c == self.dim_v1 && b + d == self.dim_v2 && a + b + c + d == self.dim_v
    }
}

#[derive(Debug, Clone)]
pub struct PieceData {
    pub problem: SpectralProblem,
    pub traces: NullTraceData,
    pub dtn: DtnMap,
    pub extensions: Vec<DVector<f64>>,
    pub embedding: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct GluedDtn {
    pub tbar: DtnMap,
    pub ledger: SpaceLedger,
    pub pieces: Vec<PieceData>,
    /// Largest `|(T g, h) - L(u_g, u_h)|` over basis pairs of `V1bar`.
    pub green_defect: f64,
}

/// Glues the pieces' D-N maps and projects onto `V1bar = What ∩ V1(cut)`.
pub fn glued_dtn(partition: &Partition, parent: &SpectralProblem) -> Result<GluedDtn, DtnError> {
    let pieces: Vec<PieceData> = (0..partition.pieces.len())
        .into_par_iter()
        .map(|i| {
            let problem = partition.piece_problem(parent, i)?;
            let traces = null_trace_data(&problem, &partition.pieces[i].q_tilde)?;
            let (dtn, extensions) = dtn_with_extensions(&problem, &traces)?;
            Ok(PieceData { problem, traces, dtn, extensions, embedding: partition.embedding(i) })
        })
        .collect::<Result<_, DtnError>>()?;
    let (b1, b2) = partition.cut_spaces(parent);
    let n = b1.nrows();
    let hcat = |mats: Vec<DMatrix<f64>>| {
        let k: usize = mats.iter().map(|m| m.ncols()).sum();
        let mut out = DMatrix::zeros(n, k);
        let mut c = 0;
        for m in mats {
            out.view_mut((0, c), m.shape()).copy_from(&m);
            c += m.ncols();
        }
        out
    };
    let w_hat = hcat(pieces.iter().map(|p| &p.embedding * &p.traces.complement).collect());
    let d_hat = hcat(pieces.iter().map(|p| &p.embedding * &p.traces.trace_basis).collect());
    let mut t_full = DMatrix::zeros(n, n);
    for p in &pieces {
        let w = &p.embedding * &p.dtn.basis;
        t_full += &w * &p.dtn.matrix * w.transpose();
    }
    let v1_bar = intersection(&w_hat, &b1, INTERSECT_TOL);
    let ledger = SpaceLedger {
        dim_v: n,
        dim_v1: b1.ncols(),
        dim_v2: b2.ncols(),
        v2_bar: intersection(&w_hat, &b2, INTERSECT_TOL),
        f1: intersection(&d_hat, &b1, INTERSECT_TOL),
        f2: intersection(&d_hat, &b2, INTERSECT_TOL),
        v1_bar,
    };
    if !ledger.holds() {
        let [a, b, c, d] = ledger.dims();
        return Err(DtnError::Ledger(format!(
            "V1bar {a}, V2bar {b}, F1 {c}, F2 {d} against V1 {}, V2 {}, V {}",
            ledger.dim_v1, ledger.dim_v2, ledger.dim_v
        )));
    }
    let u1 = &ledger.v1_bar;
    let tbar = DtnMap::from_matrix(u1.clone(), u1.transpose() * &t_full * u1)?;
    let green_defect = green_defect(&pieces, &tbar);
    Ok(GluedDtn { tbar, ledger, pieces, green_defect })
}

/// Compares `(Tbar g, h)` with the sum over pieces of the energy of the L-extensions.
fn green_defect(pieces: &[PieceData], tbar: &DtnMap) -> f64 {
    let k = tbar.basis.ncols();
    let ext: Vec<Vec<DVector<f64>>> = pieces
        .iter()
        .map(|p| {
            let local = p.embedding.transpose() * &tbar.basis;
            let coords = p.dtn.basis.transpose() * local;
            (0..k)
                .map(|c| {
                    let mut x = DVector::zeros(2 * p.problem.net.num_arcs());
                    for (r, e) in p.extensions.iter().enumerate() {
                        x += e * coords[(r, c)];
                    }
                    x
                })
                .collect()
        })
        .collect();
    let energies: Vec<DMatrix<f64>> = pieces.iter().map(|p| energy_matrix(&p.problem, 0.0)).collect();
    let mut worst = 0.0f64;
    for a in 0..k {
        for b in 0..k {
            let e: f64 = ext.iter().zip(&energies).map(|(x, m)| (x[a].transpose() * m * &x[b])[(0, 0)]).sum();
            worst = worst.max((tbar.matrix[(a, b)] - e).abs());
        }
    }
    worst
}

#[derive(Debug, Clone, Serialize)]
pub struct PieceCounts {
    pub index: usize,
    pub nullity: usize,
    pub dim_trace: usize,
    pub dim_i0: usize,
    pub dim_complement: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct IndexReport {
    pub lhs: usize,
    pub sum_piece_index: usize,
    pub tbar_index: usize,
    pub dim_f1: usize,
    pub rhs: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct NullityReport {
    pub lhs: usize,
    pub tbar_nullity: usize,
    pub dim_f2: usize,
    pub sum_i0: usize,
    pub rhs: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorollaryReport {
    pub lhs: usize,
    pub sum_piece: usize,
    pub tbar_index: usize,
    pub tbar_nullity: usize,
    pub rhs: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub parent_index: usize,
    pub parent_nullity: usize,
    pub pieces: Vec<PieceCounts>,
    pub ledger: [usize; 4],
    pub dim_v: usize,
    pub dim_v1: usize,
    pub dim_v2: usize,
    pub tbar_eigenvalues: Vec<f64>,
    pub tbar_asymmetry: f64,
    pub green_defect: f64,
    pub index: IndexReport,
    pub nullity: NullityReport,
    pub corollary: CorollaryReport,
    pub warnings: Vec<String>,
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        self.index.pass && self.nullity.pass && self.corollary.pass
    }
}

/// Computes both sides of the index and nullity decompositions and their sum.
pub fn verify_partition(partition: &Partition, parent: &SpectralProblem) -> Result<VerifyReport, DtnError> {
    let whole = index_nullity(parent)?;
    let glued = glued_dtn(partition, parent)?;
    let mut warnings = whole.warnings.clone();
    let pieces = glued
        .pieces
        .par_iter()
        .map(|p| {
            let inul = index_nullity(&p.problem)?;
            Ok((
                PieceCounts {
                    index: inul.index,
                    nullity: inul.nullity,
                    dim_trace: p.traces.dim_trace(),
                    dim_i0: p.traces.dim_i0(),
                    dim_complement: p.traces.complement.ncols(),
                },
                inul.warnings,
                p.traces.nullity(),
            ))
        })
        .collect::<Result<Vec<_>, DtnError>>()?;
    let mut counts = Vec::new();
    for (k, (c, w, nul)) in pieces.into_iter().enumerate() {
        warnings.extend(w);
        if c.nullity != nul || c.dim_trace + c.dim_i0 != nul {
            warnings.push(format!(
                "piece {}: nullity {} but null space {} = traces {} + I0 {}",
                k + 1,
                c.nullity,
                nul,
                c.dim_trace,
                c.dim_i0
            ));
        }
        counts.push(c);
    }
    let [_, _, f1, f2] = glued.ledger.dims();
    let ti = glued.tbar.index();
    let tn = glued.tbar.nullity();
    let sum_ind: usize = counts.iter().map(|c| c.index).sum();
    let sum_nul: usize = counts.iter().map(|c| c.nullity).sum();
    let sum_i0: usize = counts.iter().map(|c| c.dim_i0).sum();
    let index = IndexReport {
        lhs: whole.index,
        sum_piece_index: sum_ind,
        tbar_index: ti,
        dim_f1: f1,
        rhs: sum_ind + ti + f1,
        pass: whole.index == sum_ind + ti + f1,
    };
    let nullity = NullityReport {
        lhs: whole.nullity,
        tbar_nullity: tn,
        dim_f2: f2,
        sum_i0,
        rhs: tn + f2 + sum_i0,
        pass: whole.nullity == tn + f2 + sum_i0,
    };
    let lhs = whole.index + whole.nullity;
    let corollary = CorollaryReport {
        lhs,
        sum_piece: sum_ind + sum_nul,
        tbar_index: ti,
        tbar_nullity: tn,
        rhs: sum_ind + sum_nul + ti + tn,
        pass: lhs == sum_ind + sum_nul + ti + tn,
    };
    Ok(VerifyReport {
        parent_index: whole.index,
        parent_nullity: whole.nullity,
        pieces: counts,
        ledger: glued.ledger.dims(),
        dim_v: glued.ledger.dim_v,
        dim_v1: glued.ledger.dim_v1,
        dim_v2: glued.ledger.dim_v2,
        tbar_eigenvalues: glued.tbar.eigenvalues.clone(),
        tbar_asymmetry: glued.tbar.asymmetry,
        green_defect: glued.green_defect,
        index,
        nullity,
        corollary,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{GreatArc, UnitVec3};
    use std::f64::consts::PI;

    fn single_arc(l: f64) -> SpectralProblem {
        let a = UnitVec3::new(1.0, 0.0, 0.0).unwrap();
        let b = UnitVec3::new(l.cos(), l.sin(), 0.0).unwrap();
        let g = GreatArc::with_pole(a, b, UnitVec3::new(0.0, 0.0, 1.0).unwrap()).unwrap();
        use crate::network::{ArcSpec, Vertex};
        let vertices = vec![
            Vertex { id: 1, position: g.start(), boundary: true },
            Vertex { id: 2, position: g.end(), boundary: true },
        ];
        let spec = ArcSpec { id: 1, start_vertex: 1, end_vertex: 2, pole: [0.0, 0.0, 1.0], length: l };
        SpectralProblem::new(Network::new(vertices, &[spec]).unwrap())
    }

    #[test]
    fn single_arc_closed_form() {
        for l in [0.3, PI / 3.0, PI / 2.0, 2.0 * PI / 3.0, 2.5] {
            let p = single_arc(l);
            let t = dtn_map(&p, &[0, 1]).unwrap();
            let want = [[1.0 / l.tan(), -1.0 / l.sin()], [-1.0 / l.sin(), 1.0 / l.tan()]];
            for r in 0..2 {
                for c in 0..2 {
                    assert!((t.matrix[(r, c)] - want[r][c]).abs() < 1e-10, "l={l}");
                }
            }
        }
    }

    #[test]
    fn dirichlet_obstruction_at_pi() {
        let p = single_arc(PI);
        let g = DVector::from_vec(vec![1.0, 0.5]);
        match dirichlet_solve(&p, &g, &[vec![]]).unwrap() {
            DirichletOutcome::Obstructed(f) => assert!((f[0].abs() - 1.5 * (2.0 / PI).sqrt()).abs() < 1e-8),
            DirichletOutcome::Solved(_) => panic!("expected obstruction"),
        }
        let ok = DVector::from_vec(vec![1.0, -1.0]);
        assert!(matches!(dirichlet_solve(&p, &ok, &[vec![]]).unwrap(), DirichletOutcome::Solved(_)));
    }

    #[test]
    fn dirichlet_zero_and_interpolant() {
        let l = 1.1;
        let p = single_arc(l);
        let DirichletOutcome::Solved(z) = dirichlet_solve(&p, &DVector::zeros(2), &[vec![]]).unwrap() else { panic!() };
        assert!(z.l2_norm(&p.net) < 1e-14);
        let g = DVector::from_vec(vec![0.4, -0.7]);
        let DirichletOutcome::Solved(u) = dirichlet_solve(&p, &g, &[vec![]]).unwrap() else { panic!() };
        for s in [0.0, 0.5, l] {
            let want = (0.4 * (l - s).sin() - 0.7 * s.sin()) / l.sin();
            assert!((u.arcs[0].value(s) - want).abs() < 1e-12);
        }
    }
}
