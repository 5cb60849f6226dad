//! Checks the index and nullity decompositions on the standard partition of each polyhedral net.
use geonet::{catalog, dtn, spectral::SpectralProblem};

fn main() {
    let names: Vec<String> = std::env::args().skip(1).collect();
    let names = if names.is_empty() {
        ["tetrahedron", "cube", "dodecahedron", "prism3", "prism5", "type44", "type63", "type82"].map(String::from).to_vec()
    } else {
        names
    };
    for name in names {
        let (net, cut) = catalog::standard_cut(&name).unwrap();
        let part = dtn::Partition::from_cut(&net, &cut).unwrap();
        let r = dtn::verify_partition(&part, &SpectralProblem::new(net)).unwrap();
        let pieces: Vec<_> = r.pieces.iter().map(|p| (p.index, p.nullity)).collect();
        println!("{name}: {} pieces {:?}", pieces.len(), pieces);
        println!("  V1 = {}, (V1bar, V2bar, F1, F2) = {:?}, green defect {:.1e}", r.dim_v1, r.ledger, r.green_defect);
        println!("  Ind {} = {} + {} + {}", r.index.lhs, r.index.sum_piece_index, r.index.tbar_index, r.index.dim_f1);
        println!("  Nul {} = {} + {} + {}", r.nullity.lhs, r.nullity.tbar_nullity, r.nullity.dim_f2, r.nullity.sum_i0);
        println!("  Ind+Nul {} = {}  {}", r.corollary.lhs, r.corollary.rhs, if r.pass() { "pass" } else { "FAIL" });
    }
}
