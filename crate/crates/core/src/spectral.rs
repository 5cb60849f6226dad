//! Eigenvalues of `L = u'' + d u` under the vertex conditions `u in V1`, `du/dtau in V2`
//! and `u = 0` on boundary vertices, via the secular matrix in the entire basis.

use crate::fem;
use crate::function::{integrate, orthonormalize, phi, ArcSeries, FunctionError, NetworkFunction};
use crate::linalg::{columns, full_svd, null_space};
use crate::network::{vertex_spaces, Network, VertexSpaces};
use crate::sphere::{rotation_normal_trace, Endpoint, RotationField, UnitVec3};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("potential has {got} entries for {expected} arcs")]
    PotentialShape { got: usize, expected: usize },
    #[error("potential is not finite")]
    PotentialNotFinite,
    #[error("empty or reversed window [{0}, {1}]")]
    BadWindow(f64, f64),
    #[error("interior vertex {0} has a degenerate value space")]
    Degenerate(usize),
    #[error("eigenvalue count mismatch below {at}: secular {secular}, fem bracket [{fem_low}, {fem_high}]")]
    CountMismatch { at: f64, secular: usize, fem_low: usize, fem_high: usize },
    #[error("system is singular at lambda = {lambda} (sigma_min / sigma_max = {ratio:e})")]
    Singular { lambda: f64, ratio: f64 },
    #[error("function is not an eigenfunction (residual {0:e})")]
    NotEigenfunction(f64),
    #[error(transparent)]
    Function(#[from] FunctionError),
}

/// Network, vertex spaces and a per-arc constant potential `d`.
#[derive(Debug, Clone)]
pub struct SpectralProblem {
    pub net: Network,
    pub spaces: VertexSpaces,
    pub d: Vec<f64>,
}

impl SpectralProblem {
    /// `d = 1` on every arc.
    pub fn new(net: Network) -> Self {
        let d = vec![1.0; net.num_arcs()];
        let spaces = vertex_spaces(&net);
        SpectralProblem { net, spaces, d }
    }

    pub fn with_potential(net: Network, d: Vec<f64>) -> Result<Self, SpectralError> {
        if d.len() != net.num_arcs() {
            return Err(SpectralError::PotentialShape { got: d.len(), expected: net.num_arcs() });
        }
        if d.iter().any(|x| !x.is_finite()) {
            return Err(SpectralError::PotentialNotFinite);
        }
        let spaces = vertex_spaces(&net);
        Ok(SpectralProblem { net, spaces, d })
    }

    pub fn mus(&self, lambda: f64) -> Vec<f64> {
        self.d.iter().map(|d| d + lambda).collect()
    }

    pub fn max_d(&self) -> f64 {
        self.d.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Lower bound `-max d` of the spectrum.
    pub fn floor(&self) -> f64 {
        -self.max_d()
    }
}

/// Value and outward-derivative rows of an arc end in the `(A, B)` coordinates.
fn end_rows(mu: f64, l: f64, e: Endpoint) -> ([f64; 2], [f64; 2]) {
    match e {
        Endpoint::Start => ([1.0, 0.0], [0.0, -1.0]),
        Endpoint::End => {
            let c = phi(0, mu, l);
            let s = phi(1, mu, l);
            ([c, s], [-mu * s, c])
        }
    }
}

/// Value (`j x 2E`) and outward-derivative trace matrices at vertex `v`.
pub fn vertex_traces(prob: &SpectralProblem, lambda: f64, v: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let net = &prob.net;
    let inc = net.incidence(v);
    let mut val = DMatrix::zeros(inc.len(), 2 * net.num_arcs());
    let mut der = val.clone();
    for (r, i) in inc.iter().enumerate() {
        let (a, b) = end_rows(prob.d[i.arc] + lambda, net.arcs()[i.arc].geom.length(), i.end);
        for c in 0..2 {
            val[(r, 2 * i.arc + c)] = a[c];
            der[(r, 2 * i.arc + c)] = b[c];
        }
    }
    (val, der)
}

/// Stacks the condition rows at one vertex from its value and derivative vectors.
fn condition_rows<T>(prob: &SpectralProblem, v: usize, vals: T, ders: T, vcat: impl Fn(Vec<T>) -> T, apply: impl Fn(&DMatrix<f64>, &T) -> T) -> T {
    match prob.spaces.get(v) {
        Some(s) => vcat(vec![apply(&s.b2.transpose(), &vals), apply(&s.b1.transpose(), &ders)]),
        None => vals,
    }
}

fn vstack(blocks: Vec<DMatrix<f64>>) -> DMatrix<f64> {
    let n = blocks.first().map(|b| b.ncols()).unwrap_or(0);
    let m: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(m, n);
    let mut r = 0;
    for b in blocks {
        out.view_mut((r, 0), b.shape()).copy_from(&b);
        r += b.nrows();
    }
    out
}

/// `M(lambda)`, a `2E x 2E` matrix. Rows run over vertices in order: interior vertices
/// contribute `B2^T values` then `B1^T derivatives`, boundary vertices their values.
pub fn secular_matrix(prob: &SpectralProblem, lambda: f64) -> DMatrix<f64> {
    let blocks = (0..prob.net.num_vertices())
        .map(|v| {
            let (val, der) = vertex_traces(prob, lambda, v);
            condition_rows(prob, v, val, der, vstack, |a, b| a * b)
        })
        .collect();
    vstack(blocks)
}

/// Secular-ordered condition rows evaluated on an arbitrary function.
pub fn vertex_residuals(prob: &SpectralProblem, f: &NetworkFunction) -> DVector<f64> {
    let mut out = Vec::new();
    for v in 0..prob.net.num_vertices() {
        let vals = f.values_at_vertex(&prob.net, v);
        let ders = f.derivatives_at_vertex(&prob.net, v);
        let r = condition_rows(
            prob,
            v,
            DMatrix::from_column_slice(vals.len(), 1, vals.as_slice()),
            DMatrix::from_column_slice(ders.len(), 1, ders.as_slice()),
            vstack,
            |a, b| a * b,
        );
        out.extend(r.iter().cloned());
    }
    DVector::from_vec(out)
}

/// Row indices of the Dirichlet rows of each boundary vertex, in incidence order.
pub fn boundary_rows(prob: &SpectralProblem) -> Vec<(usize, std::ops::Range<usize>)> {
    let mut r = 0;
    let mut out = Vec::new();
    for v in 0..prob.net.num_vertices() {
        let j = prob.net.degree(v);
        if prob.spaces.get(v).is_none() {
            out.push((v, r..r + j));
        }
        r += j;
    }
    out
}

/// L2 Gram matrix of the `(C, S)` basis functions at `lambda` (block diagonal).
pub fn gram_matrix(prob: &SpectralProblem, lambda: f64) -> DMatrix<f64> {
    arc_blocks(prob, lambda, |mu, l, dd| {
        let _ = dd;
        let f = |a: usize, b: usize| integrate(l, |s| phi(a, mu, s) * phi(b, mu, s));
        [f(0, 0), f(0, 1), f(1, 1)]
    })
}

/// Matrix of `sum_i int u' v' - d_i u v` on `(C, S)` coefficient vectors.
pub fn energy_matrix(prob: &SpectralProblem, lambda: f64) -> DMatrix<f64> {
    arc_blocks(prob, lambda, |mu, l, dd| {
        let dc = |s: f64| -mu * phi(1, mu, s);
        let ds = |s: f64| phi(0, mu, s);
        let c = |s: f64| phi(0, mu, s);
        let sn = |s: f64| phi(1, mu, s);
        [
            integrate(l, |s| dc(s) * dc(s) - dd * c(s) * c(s)),
            integrate(l, |s| dc(s) * ds(s) - dd * c(s) * sn(s)),
            integrate(l, |s| ds(s) * ds(s) - dd * sn(s) * sn(s)),
        ]
    })
}

fn arc_blocks(prob: &SpectralProblem, lambda: f64, f: impl Fn(f64, f64, f64) -> [f64; 3]) -> DMatrix<f64> {
    let e = prob.net.num_arcs();
    let mut g = DMatrix::zeros(2 * e, 2 * e);
    for (i, a) in prob.net.arcs().iter().enumerate() {
        let [p, q, r] = f(prob.d[i] + lambda, a.geom.length(), prob.d[i]);
        g[(2 * i, 2 * i)] = p;
        g[(2 * i, 2 * i + 1)] = q;
        g[(2 * i + 1, 2 * i)] = q;
        g[(2 * i + 1, 2 * i + 1)] = r;
    }
    g
}

#[derive(Debug, Clone)]
pub struct Eigenvalue {
    pub lambda: f64,
    pub multiplicity: usize,
    /// `sigma_min / sigma_max` of the secular matrix at `lambda`.
    pub sigma_ratio: f64,
    /// L2-orthonormal eigenfunctions.
    pub functions: Vec<NetworkFunction>,
}

#[derive(Debug, Clone, Default)]
pub struct Spectrum {
    pub eigenvalues: Vec<Eigenvalue>,
    pub warnings: Vec<String>,
}

impl Spectrum {
    /// Eigenvalues repeated by multiplicity.
    pub fn flat(&self) -> Vec<f64> {
        self.eigenvalues.iter().flat_map(|e| std::iter::repeat(e.lambda).take(e.multiplicity)).collect()
    }

    pub fn count_below(&self, x: f64) -> usize {
        self.eigenvalues.iter().filter(|e| e.lambda < x).map(|e| e.multiplicity).sum()
    }
}

#[derive(Debug, Clone)]
pub struct ScanOptions {
    pub step: f64,
    pub polish_tol: f64,
    pub declare_tol: f64,
    pub mult_tol: f64,
    pub fem_m: usize,
    pub fem_delta: f64,
    pub max_rescans: usize,
    pub reconcile: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            step: 1e-2,
            polish_tol: 1e-10,
            declare_tol: 1e-8,
            mult_tol: 1e-7,
            fem_m: 64,
            fem_delta: 0.02,
            max_rescans: 2,
            reconcile: true,
        }
    }
}

fn ratio(prob: &SpectralProblem, lambda: f64) -> f64 {
    let s = crate::linalg::svd(&secular_matrix(prob, lambda), false, false).singular_values;
    let mx = s.iter().cloned().fold(0.0, f64::max);
    let mn = s.iter().cloned().fold(f64::INFINITY, f64::min);
    if mx == 0.0 {
        0.0
    } else {
        mn / mx
    }
}

/// Samples `(lambda, sigma_min, sigma_min / sigma_max)` on a uniform grid.
pub fn sigma_trace(prob: &SpectralProblem, a: f64, b: f64, step: f64) -> Vec<(f64, f64, f64)> {
    let n = ((b - a) / step).ceil().max(1.0) as usize;
    (0..=n)
        .into_par_iter()
        .map(|k| {
            let x = if k == n { b } else { a + k as f64 * step };
            let s = crate::linalg::svd(&secular_matrix(prob, x), false, false).singular_values;
            let mx = s.iter().cloned().fold(0.0, f64::max);
            let mn = s.iter().cloned().fold(f64::INFINITY, f64::min);
            (x, mn, if mx > 0.0 { mn / mx } else { 0.0 })
        })
        .collect()
}

fn grid(a: f64, b: f64, step: f64) -> Vec<f64> {
    let n = ((b - a) / step).ceil().max(1.0) as usize;
    (0..=n).map(|k| if k == n { b } else { a + k as f64 * step }).collect()
}

fn local_minima(f: &[f64]) -> Vec<usize> {
    let n = f.len();
    (0..n)
        .filter(|&k| (k == 0 || f[k] <= f[k - 1]) && (k + 1 == n || f[k] <= f[k + 1]))
        .filter(|&k| !(k > 0 && f[k] == f[k - 1]))
        .collect()
}

fn golden(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (fa, fb) = (g(a), g(b));
    let (a0, b0) = (a, b);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = g(c);
    let mut fd = g(d);
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = g(d);
        }
    }
    let x = 0.5 * (a + b);
    let mut best = (x, g(x));
    for cand in [(a0, fa), (b0, fb), (c, fc), (d, fd)] {
        if cand.1 < best.1 {
            best = cand;
        }
    }
    best
}

/// Candidate minima of `sigma_min / sigma_max` on `[a, b]`, polished.
fn scan(prob: &SpectralProblem, a: f64, b: f64, opts: &ScanOptions, step: f64) -> Vec<(f64, f64)> {
    let xs = grid(a, b, step);
    let fs: Vec<f64> = xs.par_iter().map(|&x| ratio(prob, x)).collect();
    let mut found: Vec<(f64, f64)> = local_minima(&fs)
        .into_par_iter()
        .flat_map_iter(|k| {
            let lo = xs[k.saturating_sub(1)];
            let hi = xs[(k + 1).min(xs.len() - 1)];
            let fx = grid(lo, hi, step / 10.0);
            let ff: Vec<f64> = fx.iter().map(|&x| ratio(prob, x)).collect();
            local_minima(&ff)
                .into_iter()
                .map(|j| {
                    let l = fx[j.saturating_sub(1)];
                    let h = fx[(j + 1).min(fx.len() - 1)];
                    golden(|x| ratio(prob, x), l, h, opts.polish_tol)
                })
                .collect::<Vec<_>>()
        })
        .filter(|&(_, f)| f < opts.declare_tol)
        .collect();
    found.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for p in found {
        match out.last_mut() {
            Some(q) if (p.0 - q.0).abs() < 1e-7 => {
                if p.1 < q.1 {
                    *q = p;
                }
            }
            _ => out.push(p),
        }
    }
    out
}

fn eigenpair(prob: &SpectralProblem, lambda: f64, opts: &ScanOptions) -> Eigenvalue {
    let m = secular_matrix(prob, lambda);
    let (s, v) = full_svd(&m);
    let smax = s.first().cloned().unwrap_or(0.0);
    let mult = s.iter().filter(|&&x| x < opts.mult_tol * smax).count().max(1);
    let n = v.ncols();
    let ker = columns(&v, n - mult..n);
    let mus = prob.mus(lambda);
    let funcs = (0..mult)
        .map(|k| NetworkFunction::from_coefficients(&mus, &ker.column(k).into_owned()))
        .collect();
    let functions = orthonormalize(funcs, &prob.net, 1e-12);
    Eigenvalue {
        lambda,
        multiplicity: mult,
        sigma_ratio: s.last().cloned().unwrap_or(0.0) / smax,
        functions,
    }
}

/// Eigenvalues in `[a, b]` with multiplicities and eigenfunctions.
///
/// The secular count is reconciled against P1 inertia counts at the window ends and
/// between consecutive eigenvalues; on disagreement the scan is redone with a finer grid.
pub fn eigenvalues(prob: &SpectralProblem, a: f64, b: f64) -> Result<Spectrum, SpectralError> {
    eigenvalues_with(prob, a, b, &ScanOptions::default())
}

pub fn eigenvalues_with(prob: &SpectralProblem, a: f64, b: f64, opts: &ScanOptions) -> Result<Spectrum, SpectralError> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(SpectralError::BadWindow(a, b));
    }
    if let Some(&v) = prob.spaces.degenerate.first() {
        return Err(SpectralError::Degenerate(prob.net.vertices()[v].id));
    }
    let mut warnings = Vec::new();
    let floor = prob.floor() - 1e-9;
    let start = if a < floor {
        warnings.push(format!("window start {a} clipped to {floor}"));
        floor
    } else {
        a
    };
    // Counts are only certified from the spectral floor upward.
    let scan_from = floor;
    let mut step = opts.step;
    let mut attempt = 0;
    loop {
        let roots = scan(prob, scan_from, b, opts, step);
        let eig: Vec<Eigenvalue> = roots.par_iter().map(|&(x, _)| eigenpair(prob, x, opts)).collect();
        let spec = Spectrum { eigenvalues: eig, warnings: vec![] };
        match reconcile(prob, &spec, scan_from, b, opts) {
            Ok(()) => {
                let eigenvalues = spec.eigenvalues.into_iter().filter(|e| e.lambda >= start - 1e-12).collect();
                return Ok(Spectrum { eigenvalues, warnings });
            }
            Err(e) if attempt >= opts.max_rescans => return Err(e),
            Err(e) => {
                warnings.push(format!("{e}; rescanning with step {}", step / 10.0));
                step /= 10.0;
                attempt += 1;
            }
        }
    }
}

fn reconcile(prob: &SpectralProblem, spec: &Spectrum, a: f64, b: f64, opts: &ScanOptions) -> Result<(), SpectralError> {
    if !opts.reconcile {
        return Ok(());
    }
    let mut points = vec![b];
    for w in spec.eigenvalues.windows(2) {
        points.push(0.5 * (w[0].lambda + w[1].lambda));
    }
    if let Some(f) = spec.eigenvalues.first() {
        points.push(0.5 * (a + f.lambda).min(f.lambda - 1e-6));
    }
    let m = opts.fem_m;
    let hmax = prob.net.arcs().iter().map(|a| a.geom.length()).fold(0.0, f64::max) / m as f64;
    let dmax = prob.max_d();
    points.into_par_iter().try_for_each(|x| {
        let delta = opts.fem_delta + (x + dmax).powi(2) * hmax * hmax / 4.0;
        let secular = spec.count_below(x);
        let low = fem::count_below(prob, m, x);
        let high = fem::count_below(prob, m, x + delta);
        if low <= secular && secular <= high {
            Ok(())
        } else {
            Err(SpectralError::CountMismatch { at: x, secular, fem_low: low, fem_high: high })
        }
    })
}

/// Morse index and nullity with the spectrum they were read from.
#[derive(Debug, Clone)]
pub struct IndexNullity {
    pub index: usize,
    pub nullity: usize,
    pub spectrum: Spectrum,
    pub warnings: Vec<String>,
}

pub const NULL_EPS: f64 = 1e-6;

/// `Ind` counts eigenvalues below `-NULL_EPS`, `Nul` those in `[-NULL_EPS, NULL_EPS]`.
pub fn index_nullity(prob: &SpectralProblem) -> Result<IndexNullity, SpectralError> {
    index_nullity_in(prob, prob.floor() - 1e-9, 0.5)
}

pub fn index_nullity_in(prob: &SpectralProblem, a: f64, b: f64) -> Result<IndexNullity, SpectralError> {
    index_nullity_with(prob, a, b, &ScanOptions::default())
}

pub fn index_nullity_with(prob: &SpectralProblem, a: f64, b: f64, opts: &ScanOptions) -> Result<IndexNullity, SpectralError> {
    let spectrum = eigenvalues_with(prob, a, b, opts)?;
    let mut warnings = spectrum.warnings.clone();
    let mut index = 0;
    let mut nullity = 0;
    for e in &spectrum.eigenvalues {
        if e.lambda < -NULL_EPS {
            index += e.multiplicity;
        } else if e.lambda <= NULL_EPS {
            nullity += e.multiplicity;
        }
        if e.lambda.abs() > NULL_EPS && e.lambda.abs() < 10.0 * NULL_EPS {
            warnings.push(format!("eigenvalue {:e} is close to the nullity threshold", e.lambda));
        }
    }
    Ok(IndexNullity { index, nullity, spectrum, warnings })
}

/// Orthonormal basis of admissible per-arc constant functions (eigenfunctions for `lambda = -d`).
pub fn locally_constant_space(net: &Network, spaces: &VertexSpaces) -> Vec<NetworkFunction> {
    let e = net.num_arcs();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for v in 0..net.num_vertices() {
        let inc = net.incidence(v);
        let pick = DMatrix::from_fn(inc.len(), e, |r, c| if inc[r].arc == c { 1.0 } else { 0.0 });
        let block = match spaces.get(v) {
            Some(s) => s.b2.transpose() * pick,
            None => pick,
        };
        for r in 0..block.nrows() {
            rows.push(block.row(r).iter().cloned().collect());
        }
    }
    let a = DMatrix::from_fn(rows.len(), e, |r, c| rows[r][c]);
    let ker = null_space(&a, 1e-9, 1.0);
    let funcs = (0..ker.ncols())
        .map(|k| NetworkFunction::from_series((0..e).map(|i| ArcSeries::new(0.0, vec![ker[(i, k)]])).collect()))
        .collect();
    orthonormalize(funcs, net, 1e-10)
}

/// Normal speeds of the three coordinate rotations, orthonormalized; each is checked
/// against the vertex conditions at `lambda = 0` (requires `d = 1`).
pub fn rotation_nullspace(prob: &SpectralProblem) -> Result<Vec<NetworkFunction>, SpectralError> {
    let axes = [UnitVec3::new(1.0, 0.0, 0.0), UnitVec3::new(0.0, 1.0, 0.0), UnitVec3::new(0.0, 0.0, 1.0)];
    let funcs: Vec<NetworkFunction> = axes
        .iter()
        .map(|ax| {
            let field = RotationField::new(ax.clone().expect("unit axis"), 1.0);
            NetworkFunction::from_series(
                prob.net
                    .arcs()
                    .iter()
                    .map(|a| {
                        let (p, q) = rotation_normal_trace(&field, &a.geom);
                        ArcSeries::homogeneous(1.0, p, q)
                    })
                    .collect(),
            )
        })
        .collect();
    let out = orthonormalize(funcs, &prob.net, 1e-10);
    for f in &out {
        let r = vertex_residuals(prob, f).norm();
        let ode = prob.d.iter().map(|d| (d - 1.0).abs()).fold(0.0, f64::max);
        if r > 1e-8 || ode > 0.0 {
            return Err(SpectralError::NotEigenfunction(r.max(ode)));
        }
    }
    Ok(out)
}

/// Per-arc coefficients of a homogeneous solution minimizing the secular residual
/// `M(lambda) x = rhs`, failing when `M(lambda)` is numerically singular.
fn solve_regular(m: &DMatrix<f64>, rhs: &DVector<f64>, lambda: f64) -> Result<DVector<f64>, SpectralError> {
    let s = crate::linalg::svd(m, false, false).singular_values;
    let mx = s.iter().cloned().fold(0.0, f64::max);
    let mn = s.iter().cloned().fold(f64::INFINITY, f64::min);
    if mx == 0.0 || mn < 1e-12 * mx {
        return Err(SpectralError::Singular { lambda, ratio: if mx > 0.0 { mn / mx } else { 0.0 } });
    }
    Ok(m.clone().lu().solve(rhs).expect("nonsingular"))
}

/// Particular solution of `u'' + mu u = f` with `f = sum_k p_k s^k` given by monomials.
pub fn particular(mu: f64, monomials: &[f64]) -> ArcSeries {
    let mut coeffs = vec![0.0, 0.0];
    let mut fact = 1.0;
    for (k, p) in monomials.iter().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        coeffs.push(p * fact);
    }
    ArcSeries::new(mu, coeffs)
}

/// Adds the homogeneous coefficients `x` to a particular solution.
pub fn with_homogeneous(part: &[ArcSeries], x: &DVector<f64>) -> NetworkFunction {
    NetworkFunction::from_series(
        part.iter()
            .enumerate()
            .map(|(i, p)| {
                let mut c = p.coeffs.clone();
                c.resize(c.len().max(2), 0.0);
                c[0] += x[2 * i];
                c[1] += x[2 * i + 1];
                ArcSeries::new(p.mu, c)
            })
            .collect(),
    )
}

/// Solves `(L - sigma) w = f` with `w = 0` on the boundary and the vertex conditions.
/// `sources[i]` holds the monomial coefficients of `f` on arc `i`.
pub fn shifted_solve(prob: &SpectralProblem, sigma: f64, sources: &[Vec<f64>]) -> Result<NetworkFunction, SpectralError> {
    let lambda = -sigma;
    if sources.len() != prob.net.num_arcs() {
        return Err(FunctionError::Shape { got: sources.len(), expected: prob.net.num_arcs() }.into());
    }
    let mus = prob.mus(lambda);
    let part: Vec<ArcSeries> = mus.iter().zip(sources).map(|(&mu, f)| particular(mu, f)).collect();
    let r = vertex_residuals(prob, &NetworkFunction::from_series(part.clone()));
    let m = secular_matrix(prob, lambda);
    let x = solve_regular(&m, &(-r), lambda)?;
    Ok(with_homogeneous(&part, &x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::GreatArc;
    use std::f64::consts::PI;

    fn circle(n: usize) -> Network {
        use crate::network::{ArcSpec, Vertex};
        let vertices = (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                Vertex { id: k + 1, position: UnitVec3::new(t.cos(), t.sin(), 0.0).unwrap(), boundary: false }
            })
            .collect();
        let arcs: Vec<ArcSpec> = (0..n)
            .map(|k| ArcSpec {
                id: k + 1,
                start_vertex: k + 1,
                end_vertex: (k + 1) % n + 1,
                pole: [0.0, 0.0, 1.0],
                length: 2.0 * PI / n as f64,
            })
            .collect();
        Network::new(vertices, &arcs).unwrap()
    }

    fn single_arc(l: f64) -> Network {
        let a = UnitVec3::new(1.0, 0.0, 0.0).unwrap();
        let b = UnitVec3::new(l.cos(), l.sin(), 0.0).unwrap();
        let g = GreatArc::with_pole(a, b, UnitVec3::new(0.0, 0.0, 1.0).unwrap()).unwrap();
        Network::from_edges(&[g.start().vec(), g.end().vec()], &[(0, 1)], &[0, 1]).unwrap()
    }

    #[test]
    fn string_spectrum() {
        let l = 2.0;
        let p = SpectralProblem::new(single_arc(l));
        let s = eigenvalues(&p, -1.5, 10.0).unwrap();
        let want: Vec<f64> = (1..)
            .map(|k| (k as f64 * PI / l).powi(2) - 1.0)
            .take_while(|&x| x <= 10.0)
            .collect();
        let got = s.flat();
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-8, "{g} vs {w}");
        }
    }

    #[test]
    fn circle_spectrum() {
        let p = SpectralProblem::new(circle(2));
        let s = eigenvalues(&p, -1.5, 3.5).unwrap();
        let got: Vec<(f64, usize)> = s.eigenvalues.iter().map(|e| (e.lambda, e.multiplicity)).collect();
        let want = [(-1.0, 1), (0.0, 2), (3.0, 2)];
        assert_eq!(got.len(), 3);
        for (g, w) in got.iter().zip(&want) {
            assert!((g.0 - w.0).abs() < 1e-8);
            assert_eq!(g.1, w.1);
        }
        for e in &s.eigenvalues {
            for f in &e.functions {
                assert!(vertex_residuals(&p, f).norm() < 1e-8);
                assert!((f.l2_norm(&p.net) - 1.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn secular_size() {
        let p = SpectralProblem::new(circle(3));
        assert_eq!(secular_matrix(&p, 0.3).shape(), (6, 6));
    }

    #[test]
    fn shifted_solve_residual() {
        let p = SpectralProblem::new(circle(3));
        let sources = vec![vec![1.0, 0.5], vec![0.0, 0.0, 2.0], vec![-1.0]];
        let w = shifted_solve(&p, 2.5, &sources).unwrap();
        assert!(vertex_residuals(&p, &w).norm() < 1e-10);
        for (i, f) in w.arcs.iter().enumerate() {
            let crate::function::ArcFn::Series(a) = f else { panic!() };
            for &s in &[0.1f64, 0.7, 1.5] {
                let src: f64 = sources[i].iter().enumerate().map(|(k, c)| c * s.powi(k as i32)).sum();
                let lhs = a.second_derivative(s) + (1.0 - 2.5) * a.value(s);
                assert!((lhs - src).abs() < 1e-10);
            }
        }
        let zero = shifted_solve(&p, 2.5, &vec![vec![]; 3]).unwrap();
        assert!(zero.l2_norm(&p.net) < 1e-14);
    }

    #[test]
    fn energy_matches_bilinear() {
        let p = SpectralProblem::new(circle(3));
        let x = DVector::from_vec(vec![0.3, -1.0, 0.2, 0.5, 1.1, 0.0]);
        let f = NetworkFunction::from_coefficients(&p.mus(0.4), &x);
        let e = (x.transpose() * energy_matrix(&p, 0.4) * &x)[(0, 0)];
        assert!((e - f.bilinear(&f, &p.net, &p.d)).abs() < 1e-12);
        let g = (x.transpose() * gram_matrix(&p, 0.4) * &x)[(0, 0)];
        assert!((g - f.l2_inner(&f, &p.net)).abs() < 1e-12);
    }
}
