//! Perturbs the tetrahedral net and drives it back to a stationary configuration.
use geonet::catalog::{self, StationarizeOptions};
use geonet::sphere::{tangent_frame, UnitVec3};

fn main() {
    let net = catalog::build("tetrahedron").unwrap();
    let moved: Vec<UnitVec3> = net
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let (e1, e2) = tangent_frame(&v.position);
            let t = 1.3 * i as f64 + 0.4;
            UnitVec3::from_vec(v.position.vec() + 1e-2 * (t.cos() * e1 + t.sin() * e2)).unwrap()
        })
        .collect();
    let start = net.with_positions(&moved).unwrap();
    println!("perturbed balance residual {:.3e}", start.max_balance_residual());
    let (out, rep) = catalog::stationarize(&start, &StationarizeOptions::default()).unwrap();
    for (k, m) in rep.merit_history.iter().enumerate() {
        println!("iter {k:>2}  merit {m:.3e}");
    }
    let l = (-1.0f64 / 3.0).acos();
    let err = out.arcs().iter().map(|a| (a.geom.length() - l).abs()).fold(0.0, f64::max);
    println!("iterations {}  residual {:.1e}  max length error {:.1e}", rep.iterations, rep.residual, err);
}
