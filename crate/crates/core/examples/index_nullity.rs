//! Morse index and nullity of the nine triple-junction nets against F - 1 and 3.
use geonet::{catalog, spectral::*};

fn main() {
    for e in catalog::entries().iter().filter(|e| e.triple_junction) {
        let prob = SpectralProblem::new(catalog::build(e.name).unwrap());
        let r = index_nullity(&prob).unwrap();
        let ok = r.index + 1 == e.counts.2 && r.nullity == 3;
        println!("{:<20} F={:<3} Ind={:<3} Nul={} {}", e.name, e.counts.2, r.index, r.nullity, if ok { "ok" } else { "MISMATCH" });
    }
}
