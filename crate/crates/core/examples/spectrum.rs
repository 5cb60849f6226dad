//! Eigenvalues of the tetrahedral net in [-1, 4] with the residual of each eigenfunction.
use geonet::{catalog, spectral::*};

fn main() {
    let prob = SpectralProblem::new(catalog::build("tetrahedron").unwrap());
    let spec = eigenvalues(&prob, -1.0 - 1e-9, 4.0).unwrap();
    for e in &spec.eigenvalues {
        let worst = e.functions.iter().map(|f| vertex_residuals(&prob, f).amax()).fold(0.0, f64::max);
        println!("lambda = {:>15.10}  multiplicity {}  vertex residual {:.1e}", e.lambda, e.multiplicity, worst);
    }
}
