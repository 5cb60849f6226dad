use geonet::catalog;
use geonet::dtn::{verify_partition, DtnError, Partition};
use geonet::function::{index_form, ArcSeries, NetworkFunction};
use geonet::network::{vertex_spaces, Network};
use geonet::spectral::{eigenvalues, Eigenvalue, SpectralProblem};
use geonet::sphere::Endpoint;
use proptest::prelude::*;
use std::sync::OnceLock;

const SMALL: [&str; 4] = ["tetrahedron", "prism3", "cube", "three-half-circles"];

fn nets() -> &'static Vec<(Network, Vec<f64>)> {
    static NETS: OnceLock<Vec<(Network, Vec<f64>)>> = OnceLock::new();
    NETS.get_or_init(|| {
        SMALL
            .iter()
            .map(|n| {
                let net = catalog::build(n).unwrap();
                let p = SpectralProblem::new(net.clone());
                (net, eigenvalues(&p, p.floor() - 1e-9, 2.5).unwrap().flat())
            })
            .collect()
    })
}

fn spectrum_of(net: &Network) -> Vec<f64> {
    let p = SpectralProblem::new(net.clone());
    eigenvalues(&p, p.floor() - 1e-9, 2.5).unwrap().flat()
}

fn same_spectrum(a: &[f64], b: &[f64]) -> Result<(), TestCaseError> {
    prop_assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        prop_assert!((x - y).abs() < 1e-8, "{} vs {}", x, y);
    }
    Ok(())
}

/// Admissible function: vertex values in `V1(P)` (zero on the boundary), linear along
/// each arc plus a cubic bump that vanishes at both ends.
fn admissible(net: &Network, vertex_coeffs: &[f64], bumps: &[f64]) -> NetworkFunction {
    let spaces = vertex_spaces(net);
    let mut ends = vec![[0.0f64; 2]; net.num_arcs()];
    let mut k = 0;
    for v in 0..net.num_vertices() {
        let Some(s) = spaces.get(v) else { continue };
        let r = nalgebra::DVector::from_fn(s.dim1(), |i, _| vertex_coeffs[(k + i) % vertex_coeffs.len()]);
        k += s.dim1();
        let vals = &s.b1 * r;
        for (pos, inc) in net.incidence(v).iter().enumerate() {
            ends[inc.arc][if inc.end == Endpoint::Start { 0 } else { 1 }] = vals[pos];
        }
    }
    let series = net
        .arcs()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let l = a.geom.length();
            let [u0, u1] = ends[i];
            let (c0, c1) = (bumps[(2 * i) % bumps.len()], bumps[(2 * i + 1) % bumps.len()]);
            // u0 + (u1 - u0) s / l + s (l - s) (c0 + c1 s)
            ArcSeries::from_monomials(&[u0, (u1 - u0) / l + c0 * l, c1 * l - c0, -c1])
        })
        .collect();
    NetworkFunction::from_series(series)
}

fn eigenpairs() -> &'static Vec<(SpectralProblem, Vec<Eigenvalue>)> {
    static PAIRS: OnceLock<Vec<(SpectralProblem, Vec<Eigenvalue>)>> = OnceLock::new();
    PAIRS.get_or_init(|| {
        ["tetrahedron", "prism3"]
            .iter()
            .map(|n| {
                let p = SpectralProblem::new(catalog::build(n).unwrap());
                let e = eigenvalues(&p, p.floor() - 1e-9, 3.0).unwrap().eigenvalues;
                (p, e)
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 50, ..ProptestConfig::default() })]

    #[test]
    fn refinement_keeps_spectrum(which in 0usize..4, arc in 0usize..12, t in 0.15f64..0.85, twice in any::<bool>()) {
        let (net, base) = &nets()[which];
        let id = net.arcs()[arc % net.num_arcs()].id;
        let mut r = net.refine(id, t).unwrap();
        if twice {
            r = r.refine(id, 0.5).unwrap();
        }
        prop_assert!((r.total_length() - net.total_length()).abs() < 1e-12);
        prop_assert!(r.max_balance_residual() < 1e-8);
        same_spectrum(base, &spectrum_of(&r))?;
    }

    #[test]
    fn orientation_keeps_spectrum(which in 0usize..4, arcs in prop::collection::vec(0usize..12, 1..4)) {
        let (net, base) = &nets()[which];
        let mut r = net.clone();
        for a in arcs {
            r = r.flip_orientation(net.arcs()[a % net.num_arcs()].id).unwrap();
        }
        prop_assert!((r.total_length() - net.total_length()).abs() < 1e-12);
        same_spectrum(base, &spectrum_of(&r))?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn weak_form_identity(v in prop::collection::vec(-1.0f64..1.0, 8), b in prop::collection::vec(-1.0f64..1.0, 8)) {
        for (p, eig) in eigenpairs() {
            let psi = admissible(&p.net, &v, &b);
            let n = psi.l2_norm(&p.net);
            prop_assume!(n > 1e-3);
            let psi = psi.scaled(1.0 / n);
            for e in eig {
                for phi in &e.functions {
                    let q = index_form(&p.net, &p.spaces, phi, &psi, &p.d).unwrap();
                    let r = q - e.lambda * phi.l2_inner(&psi, &p.net);
                    prop_assert!(r.abs() < 1e-7, "lambda {} residual {:e}", e.lambda, r);
                }
            }
        }
    }

    #[test]
    fn index_form_is_symmetric(which in 0usize..4, v in prop::collection::vec(-1.0f64..1.0, 6), w in prop::collection::vec(-1.0f64..1.0, 6)) {
        let (net, _) = &nets()[which];
        let spaces = vertex_spaces(net);
        let d = vec![1.0; net.num_arcs()];
        let f = admissible(net, &v[..3], &v[3..]);
        let g = admissible(net, &w[..3], &w[3..]);
        let a = index_form(net, &spaces, &f, &g, &d).unwrap();
        let b = index_form(net, &spaces, &g, &f, &d).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn incidence_count_is_twice_edges(which in 0usize..4, arc in 0usize..12, t in 0.1f64..0.9) {
        let (net, _) = &nets()[which];
        let r = net.refine(net.arcs()[arc % net.num_arcs()].id, t).unwrap();
        let total: usize = (0..r.num_vertices()).map(|v| r.degree(v)).sum();
        prop_assert_eq!(total, 2 * r.num_arcs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    /// Random cut sets on the refined tetrahedron. Either the trace ledger fails to close
    /// (reported as `DtnError::Ledger`, never silently) or every decomposition holds.
    #[test]
    fn random_partitions_decompose(mask in 1u32..(1 << 10)) {
        let (net, mids) = catalog::standard_cut("tetrahedron").unwrap();
        let ids: Vec<usize> = net.vertices().iter().map(|v| v.id).collect();
        let cut: Vec<usize> = ids.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, &id)| id).collect();
        prop_assert_eq!(ids.len(), 4 + mids.len());
        let Ok(part) = Partition::from_cut(&net, &cut) else { return Ok(()) };
        let r = match verify_partition(&part, &SpectralProblem::new(net)) {
            Ok(r) => r,
            Err(DtnError::Ledger(_)) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(format!("{cut:?}: {e}"))),
        };
        prop_assert!(r.index.pass && r.nullity.pass && r.corollary.pass, "{:?}", cut);
        let [v1b, v2b, f1, f2] = r.ledger;
        prop_assert_eq!(v1b + f1, r.dim_v1);
        prop_assert_eq!(v2b + f2, r.dim_v2);
        prop_assert_eq!(v1b + v2b + f1 + f2, r.dim_v);
        prop_assert!(r.tbar_asymmetry < 1e-9);
        prop_assert!(r.green_defect < 1e-8);
        for p in &r.pieces {
            prop_assert_eq!(p.dim_trace + p.dim_i0, p.nullity);
        }
    }
}

#[test]
fn standard_partitions_identities() {
    for name in ["tetrahedron", "cube", "dodecahedron", "prism3", "prism5", "type44", "type63", "type82"] {
        let (net, cut) = catalog::standard_cut(name).unwrap();
        let part = Partition::from_cut(&net, &cut).unwrap();
        let r = verify_partition(&part, &SpectralProblem::new(net.clone())).unwrap();
        let dim_v: usize = part.cut.iter().map(|&v| net.degree(v)).sum();
        assert_eq!(r.dim_v, dim_v, "{name}");
        let [v1b, v2b, f1, f2] = r.ledger;
        assert_eq!(v1b + f1, r.dim_v1, "{name}");
        assert_eq!(v2b + f2, r.dim_v2, "{name}");
        assert_eq!(v1b + v2b + f1 + f2, r.dim_v, "{name}");
        assert!(r.tbar_asymmetry < 1e-9, "{name}");
        assert!(r.green_defect < 1e-8, "{name}");
        for p in &r.pieces {
            assert_eq!(p.dim_trace + p.dim_i0, p.nullity, "{name}");
        }
        assert!(r.pass(), "{name}");
    }
}

#[test]
fn scaling_a_piece_map_keeps_signs() {
    let (net, cut) = catalog::standard_cut("prism3").unwrap();
    let part = Partition::from_cut(&net, &cut).unwrap();
    let g = geonet::dtn::glued_dtn(&part, &SpectralProblem::new(net)).unwrap();
    let t = &g.pieces[0].dtn;
    for alpha in [0.1, 2.0, 37.0] {
        let e = geonet::linalg::sym_eigenvalues(&(t.matrix.clone() * alpha));
        for (x, y) in e.iter().zip(&t.eigenvalues) {
            assert!(y.abs() < 1e-8 && x.abs() < 1e-6 || x.signum() == y.signum());
        }
    }
}
