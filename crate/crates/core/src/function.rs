//! Functions on networks: per-arc series in the entire basis `Phi_n(mu, s)` or
//! sampled nodal values, with quadrature, traces and the index form.

use crate::network::{Network, VertexSpaces};
use crate::sphere::Endpoint;
use gauss_quad::legendre::GaussLegendre;
use nalgebra::DVector;
use std::sync::OnceLock;
use thiserror::Error;

const GAUSS_POINTS: usize = 48;

fn gauss() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        GaussLegendre::new(GAUSS_POINTS.try_into().unwrap())
            .as_node_weight_pairs()
            .to_vec()
    })
}

/// Integral of `f` over `[0, l]` by a 48-point Gauss-Legendre rule.
pub fn integrate(l: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let h = 0.5 * l;
    gauss().iter().map(|&(x, w)| w * f(h * (x + 1.0))).sum::<f64>() * h
}

/// `Phi_n(mu, s) = sum_m (-mu)^m s^(n+2m) / (n+2m)!`.
///
/// `Phi_0 = C`, `Phi_1 = S`, `Phi_n' = Phi_(n-1)` and `(d^2/ds^2 + mu) Phi_(k+2) = s^k / k!`.
pub fn phi(n: usize, mu: f64, s: f64) -> f64 {
    match n {
        0 => cos_basis(mu, s),
        1 => sin_basis(mu, s),
        _ => {
            let mut term = 1.0;
            for k in 1..=n {
                term *= s / k as f64;
            }
            let mut sum = term;
            let mut k = n;
            for _ in 0..400 {
                term *= -mu * s * s / (((k + 1) * (k + 2)) as f64);
                k += 2;
                sum += term;
                if term.abs() <= 1e-17 * sum.abs().max(1e-300) {
                    break;
                }
            }
            sum
        }
    }
}

fn cos_basis(mu: f64, s: f64) -> f64 {
    if mu > 0.0 {
        (mu.sqrt() * s).cos()
    } else if mu < 0.0 {
        ((-mu).sqrt() * s).cosh()
    } else {
        1.0
    }
}

fn sin_basis(mu: f64, s: f64) -> f64 {
    if mu > 0.0 {
        let w = mu.sqrt();
        (w * s).sin() / w
    } else if mu < 0.0 {
        let w = (-mu).sqrt();
        (w * s).sinh() / w
    } else {
        s
    }
}

/// `u(s) = sum_n c_n Phi_n(mu, s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcSeries {
    pub mu: f64,
    pub coeffs: Vec<f64>,
}

impl ArcSeries {
    pub fn new(mu: f64, coeffs: Vec<f64>) -> Self {
        ArcSeries { mu, coeffs }
    }

    /// Homogeneous solution `A C + B S` of `u'' + mu u = 0`.
    pub fn homogeneous(mu: f64, a: f64, b: f64) -> Self {
        ArcSeries { mu, coeffs: vec![a, b] }
    }

    /// Polynomial `sum_k p_k s^k` written in the `mu = 0` basis.
    pub fn from_monomials(p: &[f64]) -> Self {
        let mut f = 1.0;
        let coeffs = p
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                if k > 0 {
                    f *= k as f64;
                }
                c * f
            })
            .collect();
        ArcSeries { mu: 0.0, coeffs }
    }

    pub fn value(&self, s: f64) -> f64 {
        self.coeffs.iter().enumerate().map(|(n, c)| c * phi(n, self.mu, s)).sum()
    }

    pub fn derivative(&self, s: f64) -> f64 {
        let mut d = 0.0;
        for (n, c) in self.coeffs.iter().enumerate() {
            d += if n == 0 { -self.mu * c * phi(1, self.mu, s) } else { c * phi(n - 1, self.mu, s) };
        }
        d
    }

    pub fn second_derivative(&self, s: f64) -> f64 {
        let mut d = -self.mu * self.value(s);
        let mut f = 1.0;
        let mut p = 1.0;
        for (k, c) in self.coeffs.iter().skip(2).enumerate() {
            if k > 0 {
                f *= k as f64;
                p *= s;
            }
            d += c * p / f;
        }
        d
    }

    /// `u'' + mu u` as a polynomial in the `s^k / k!` basis.
    pub fn forcing(&self) -> Vec<f64> {
        self.coeffs.iter().skip(2).cloned().collect()
    }
}

/// Nodal values on a uniform grid of an arc.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledArc {
    pub length: f64,
    pub values: Vec<f64>,
}

impl SampledArc {
    fn h(&self) -> f64 {
        self.length / (self.values.len() - 1) as f64
    }

    pub fn value(&self, s: f64) -> f64 {
        let m = self.values.len() - 1;
        let x = (s / self.h()).clamp(0.0, m as f64);
        let k = (x.floor() as usize).min(m - 1);
        let t = x - k as f64;
        self.values[k] * (1.0 - t) + self.values[k + 1] * t
    }

    pub fn derivative(&self, s: f64) -> f64 {
        let m = self.values.len() - 1;
        let k = ((s / self.h()).floor().max(0.0) as usize).min(m - 1);
        (self.values[k + 1] - self.values[k]) / self.h()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArcFn {
    Series(ArcSeries),
    Sampled(SampledArc),
}

impl ArcFn {
    pub fn value(&self, s: f64) -> f64 {
        match self {
            ArcFn::Series(a) => a.value(s),
            ArcFn::Sampled(a) => a.value(s),
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match self {
            ArcFn::Series(a) => a.derivative(s),
            ArcFn::Sampled(a) => a.derivative(s),
        }
    }

    fn grid(&self) -> Option<usize> {
        match self {
            ArcFn::Sampled(a) => Some(a.values.len() - 1),
            _ => None,
        }
    }
}

/// Composite Simpson rule on `m` panels (odd `m` falls back to the trapezoid rule on the last panel).
pub fn simpson(l: f64, m: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = l / m as f64;
    let even = m - m % 2;
    let mut sum = 0.0;
    for k in (0..even).step_by(2) {
        let a = k as f64 * h;
        sum += h / 3.0 * (f(a) + 4.0 * f(a + h) + f(a + 2.0 * h));
    }
    if m % 2 == 1 {
        sum += 0.5 * h * (f(l - h) + f(l));
    }
    sum
}

/// Integrals `(int u v, int u' v')` over an arc of length `l`.
pub fn arc_products(l: f64, u: &ArcFn, v: &ArcFn) -> (f64, f64) {
    match (u.grid(), v.grid()) {
        (None, None) => (
            integrate(l, |s| u.value(s) * v.value(s)),
            integrate(l, |s| u.derivative(s) * v.derivative(s)),
        ),
        (a, b) => {
            let m = a.unwrap_or(0).max(b.unwrap_or(0)).max(64);
            let h = l / m as f64;
            let mass = simpson(l, m, |s| u.value(s) * v.value(s));
            let stiff = (0..m)
                .map(|k| {
                    let s = (k as f64 + 0.5) * h;
                    u.derivative(s) * v.derivative(s) * h
                })
                .sum();
            (mass, stiff)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkFunction {
    pub arcs: Vec<ArcFn>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunctionError {
    #[error("function has {got} arcs, network has {expected}")]
    Shape { got: usize, expected: usize },
    #[error("function is not admissible at vertex {vertex} (residual {residual:e})")]
    NotAdmissible { vertex: usize, residual: f64 },
}

impl NetworkFunction {
    pub fn zero(net: &Network) -> Self {
        NetworkFunction {
            arcs: net.arcs().iter().map(|_| ArcFn::Series(ArcSeries::new(0.0, vec![]))).collect(),
        }
    }

    pub fn from_series(series: Vec<ArcSeries>) -> Self {
        NetworkFunction { arcs: series.into_iter().map(ArcFn::Series).collect() }
    }

    /// Per-arc `(A, B)` in the homogeneous basis with `mu_i = d_i + lambda`.
    pub fn from_coefficients(mus: &[f64], x: &DVector<f64>) -> Self {
        NetworkFunction::from_series(
            mus.iter()
                .enumerate()
                .map(|(i, &mu)| ArcSeries::homogeneous(mu, x[2 * i], x[2 * i + 1]))
                .collect(),
        )
    }

    pub fn value_at(&self, net: &Network, arc: usize, e: Endpoint) -> f64 {
        let s = match e {
            Endpoint::Start => 0.0,
            Endpoint::End => net.arcs()[arc].geom.length(),
        };
        self.arcs[arc].value(s)
    }

    pub fn outward_derivative_at(&self, net: &Network, arc: usize, e: Endpoint) -> f64 {
        match e {
            Endpoint::Start => -self.arcs[arc].derivative(0.0),
            Endpoint::End => self.arcs[arc].derivative(net.arcs()[arc].geom.length()),
        }
    }

    /// Values of the incident arcs at vertex `v`, incidence order.
    pub fn values_at_vertex(&self, net: &Network, v: usize) -> DVector<f64> {
        DVector::from_iterator(
            net.degree(v),
            net.incidence(v).iter().map(|inc| self.value_at(net, inc.arc, inc.end)),
        )
    }

    pub fn derivatives_at_vertex(&self, net: &Network, v: usize) -> DVector<f64> {
        DVector::from_iterator(
            net.degree(v),
            net.incidence(v).iter().map(|inc| self.outward_derivative_at(net, inc.arc, inc.end)),
        )
    }

    /// Largest violation of `values in V1` at interior vertices and `u = 0` at boundary vertices.
    pub fn admissibility_residual(&self, net: &Network, spaces: &VertexSpaces) -> (usize, f64) {
        let mut worst = (0, 0.0f64);
        for v in 0..net.num_vertices() {
            let vals = self.values_at_vertex(net, v);
            let r = match spaces.get(v) {
                Some(s) => (s.b2.transpose() * &vals).norm(),
                None => vals.norm(),
            };
            if r > worst.1 {
                worst = (v, r);
            }
        }
        worst
    }

    /// Largest violation of `outward derivatives in V2` at interior vertices.
    pub fn compatibility_residual(&self, net: &Network, spaces: &VertexSpaces) -> f64 {
        net.interior()
            .map(|v| {
                let s = spaces.get(v).unwrap();
                (s.b1.transpose() * self.derivatives_at_vertex(net, v)).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn l2_inner(&self, other: &NetworkFunction, net: &Network) -> f64 {
        net.arcs()
            .iter()
            .enumerate()
            .map(|(i, a)| arc_products(a.geom.length(), &self.arcs[i], &other.arcs[i]).0)
            .sum()
    }

    pub fn l2_norm(&self, net: &Network) -> f64 {
        self.l2_inner(self, net).sqrt()
    }

    /// `sum_i int u' v' - d_i u v` without admissibility checks.
    pub fn bilinear(&self, other: &NetworkFunction, net: &Network, d: &[f64]) -> f64 {
        net.arcs()
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let (m, k) = arc_products(a.geom.length(), &self.arcs[i], &other.arcs[i]);
                k - d[i] * m
            })
            .sum()
    }

    pub fn scaled(&self, c: f64) -> NetworkFunction {
        NetworkFunction {
            arcs: self
                .arcs
                .iter()
                .map(|f| match f {
                    ArcFn::Series(a) => ArcFn::Series(ArcSeries::new(a.mu, a.coeffs.iter().map(|x| x * c).collect())),
                    ArcFn::Sampled(a) => ArcFn::Sampled(SampledArc {
                        length: a.length,
                        values: a.values.iter().map(|x| x * c).collect(),
                    }),
                })
                .collect(),
        }
    }

    /// `self + c other` for series with matching `mu` on every arc.
    pub fn axpy(&self, c: f64, other: &NetworkFunction) -> Option<NetworkFunction> {
        let mut arcs = Vec::with_capacity(self.arcs.len());
        for (a, b) in self.arcs.iter().zip(&other.arcs) {
            match (a, b) {
                (ArcFn::Series(x), ArcFn::Series(y)) if x.mu == y.mu || x.coeffs.is_empty() || y.coeffs.is_empty() => {
                    let n = x.coeffs.len().max(y.coeffs.len());
                    let coeffs = (0..n)
                        .map(|k| x.coeffs.get(k).unwrap_or(&0.0) + c * y.coeffs.get(k).unwrap_or(&0.0))
                        .collect();
                    let mu = if x.coeffs.is_empty() { y.mu } else { x.mu };
                    arcs.push(ArcFn::Series(ArcSeries::new(mu, coeffs)));
                }
                (ArcFn::Sampled(x), ArcFn::Sampled(y)) if x.values.len() == y.values.len() => {
                    arcs.push(ArcFn::Sampled(SampledArc {
                        length: x.length,
                        values: x.values.iter().zip(&y.values).map(|(p, q)| p + c * q).collect(),
                    }));
                }
                _ => return None,
            }
        }
        Some(NetworkFunction { arcs })
    }
}

/// Index form `Q(phi, psi) = sum_i int phi' psi' - d_i phi psi` on admissible functions.
pub fn index_form(
    net: &Network,
    spaces: &VertexSpaces,
    phi: &NetworkFunction,
    psi: &NetworkFunction,
    d: &[f64],
) -> Result<f64, FunctionError> {
    for f in [phi, psi] {
        if f.arcs.len() != net.num_arcs() {
            return Err(FunctionError::Shape { got: f.arcs.len(), expected: net.num_arcs() });
        }
        let scale = 1.0 + f.l2_norm(net);
        let (v, r) = f.admissibility_residual(net, spaces);
        if r > 1e-8 * scale {
            return Err(FunctionError::NotAdmissible { vertex: net.vertices()[v].id, residual: r });
        }
    }
    Ok(phi.bilinear(psi, net, d))
}

/// Modified Gram-Schmidt in `L^2`, dropping members whose residual norm is below `tol`.
pub fn orthonormalize(funcs: Vec<NetworkFunction>, net: &Network, tol: f64) -> Vec<NetworkFunction> {
    let mut out: Vec<NetworkFunction> = Vec::new();
    for f in funcs {
        let mut g = f;
        for _ in 0..2 {
            for q in &out {
                let c = g.l2_inner(q, net);
                g = g.axpy(-c, q).expect("compatible representations");
            }
        }
        let n = g.l2_norm(net);
        if n > tol {
            out.push(g.scaled(1.0 / n));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_identities() {
        for &mu in &[-1.3, -1e-6, 0.0, 1e-7, 0.8, 2.5] {
            for &s in &[0.0, 0.4, 1.9, 3.0] {
                assert!((phi(0, mu, s) - phi(2, mu, s) * -mu - 1.0).abs() < 1e-12);
                let h = 1e-5;
                for n in 1..6 {
                    let d = (phi(n, mu, s + h) - phi(n, mu, s - h)) / (2.0 * h);
                    assert!((d - phi(n - 1, mu, s)).abs() < 1e-8, "n={n} mu={mu} s={s}");
                }
            }
        }
    }

    #[test]
    fn monomials_round_trip() {
        let p = ArcSeries::from_monomials(&[1.0, -2.0, 0.5, 3.0]);
        let s: f64 = 0.7;
        let v = 1.0 - 2.0 * s + 0.5 * s * s + 3.0 * s.powi(3);
        assert!((p.value(s) - v).abs() < 1e-14);
        assert!((p.derivative(s) - (-2.0 + s + 9.0 * s * s)).abs() < 1e-14);
        assert!((p.second_derivative(s) - (1.0 + 18.0 * s)).abs() < 1e-13);
    }

    #[test]
    fn forcing_of_particular_solution() {
        let u = ArcSeries::new(0.6, vec![0.3, -0.2, 1.0, 2.0]);
        for &s in &[0.0, 0.5, 1.5] {
            let lhs = u.second_derivative(s) + 0.6 * u.value(s);
            assert!((lhs - (1.0 + 2.0 * s)).abs() < 1e-12);
        }
    }

    #[test]
    fn gauss_is_exact_on_trig() {
        let l = 2.3;
        let r = integrate(l, |s| s.sin() * s.sin());
        assert!((r - (l / 2.0 - (2.0 * l).sin() / 4.0)).abs() < 1e-14);
    }

    #[test]
    fn simpson_matches() {
        let r = simpson(1.0, 64, |s| s * s * s);
        assert!((r - 0.25).abs() < 1e-15);
    }
}
