//! Spectrum of the glued D-N map on the eight-piece partition of the 8-2 net.
use geonet::{catalog, dtn, spectral::SpectralProblem};

fn main() {
    let (net, cut) = catalog::standard_cut("type82").unwrap();
    let part = dtn::Partition::from_cut(&net, &cut).unwrap();
    let g = dtn::glued_dtn(&part, &SpectralProblem::new(net)).unwrap();
    let first = &g.pieces[0].dtn;
    println!("piece D-N map ({}x{}):\n{:.6}", first.matrix.nrows(), first.matrix.ncols(), first.basis.clone() * &first.matrix * first.basis.transpose());
    println!("glued map is {}x{}", g.tbar.matrix.nrows(), g.tbar.matrix.ncols());
    for x in &g.tbar.eigenvalues {
        println!("{x:>14.8}");
    }
    println!("index {}  nullity {}  positive {}", g.tbar.index(), g.tbar.nullity(), g.tbar.eigenvalues.len() - g.tbar.index() - g.tbar.nullity());
}
