//! D-N map of a single Dirichlet arc against [[cot l, -csc l], [-csc l, cot l]].
use geonet::network::{ArcSpec, Network, Vertex};
use geonet::sphere::UnitVec3;
use geonet::{dtn, spectral::SpectralProblem};
use std::f64::consts::PI;

fn arc(l: f64) -> Network {
    let vertices = vec![
        Vertex { id: 1, position: UnitVec3::new(1.0, 0.0, 0.0).unwrap(), boundary: true },
        Vertex { id: 2, position: UnitVec3::new(l.cos(), l.sin(), 0.0).unwrap(), boundary: true },
    ];
    let arcs = [ArcSpec { id: 1, start_vertex: 1, end_vertex: 2, pole: [0.0, 0.0, 1.0], length: l }];
    Network::new(vertices, &arcs).unwrap()
}

fn main() {
    for l in [0.3, PI / 3.0, PI / 2.0, 2.0 * PI / 3.0, 2.5] {
        let t = dtn::dtn_map(&SpectralProblem::new(arc(l)), &[0, 1]).unwrap();
        let m = &t.basis * &t.matrix * t.basis.transpose();
        println!(
            "l={l:.4}  T=[[{:.6}, {:.6}], [{:.6}, {:.6}]]  cot={:.6} -csc={:.6}",
            m[(0, 0)],
            m[(0, 1)],
            m[(1, 0)],
            m[(1, 1)],
            1.0 / l.tan(),
            -1.0 / l.sin()
        );
    }
}
