//! Locally constant eigenfunctions at lambda = -1 and rotation fields at lambda = 0.
use geonet::{catalog, spectral::*};

fn main() {
    for name in ["tetrahedron", "cube", "type63"] {
        let prob = SpectralProblem::new(catalog::build(name).unwrap());
        let lc = locally_constant_space(&prob.net, &prob.spaces);
        let rot = rotation_nullspace(&prob).unwrap();
        let worst = rot.iter().map(|f| vertex_residuals(&prob, f).amax()).fold(0.0, f64::max);
        println!("{name}: locally constant dim {}, rotation null space dim {}, residual {:.1e}", lc.len(), rot.len(), worst);
    }
}
