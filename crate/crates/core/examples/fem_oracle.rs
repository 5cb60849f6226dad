//! Compares secular eigenvalues below 0.5 with Richardson-extrapolated P1 elements.
use geonet::{catalog, fem, spectral::*};

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "cube".to_string());
    let prob = SpectralProblem::new(catalog::build(&name).unwrap());
    let exact = index_nullity(&prob).unwrap().spectrum.flat();
    let rich = fem::fem_richardson(&prob, 128, exact.len());
    println!("{name}: {} eigenvalues below 0.5", exact.len());
    for (x, y) in exact.iter().zip(&rich) {
        println!("{x:>20.12} {y:>20.12}  diff {:.1e}", (x - y).abs());
    }
}
