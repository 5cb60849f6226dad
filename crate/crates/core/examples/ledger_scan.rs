//! Runs the decomposition check over every cut set of the refined tetrahedron.
use geonet::{catalog, dtn, spectral::SpectralProblem};

fn main() {
    let (net, _) = catalog::standard_cut("tetrahedron").unwrap();
    let prob = SpectralProblem::new(net.clone());
    let ids: Vec<usize> = net.vertices().iter().map(|v| v.id).collect();
    let (mut ok, mut ledger, mut other, mut invalid) = (0, 0, 0, 0);
    for mask in 1u32..(1 << ids.len()) {
        let cut: Vec<usize> = ids.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, &id)| id).collect();
        let Ok(part) = dtn::Partition::from_cut(&net, &cut) else { invalid += 1; continue };
        match dtn::verify_partition(&part, &prob) {
            Ok(r) if r.pass() => ok += 1,
            Ok(_) => { other += 1; println!("theorem fails: {cut:?}") }
            Err(dtn::DtnError::Ledger(m)) => { ledger += 1; if ledger <= 3 { println!("ledger: {cut:?} {m}") } }
            Err(e) => { other += 1; println!("error: {cut:?} {e}") }
        }
    }
    println!("pass {ok}, ledger diagnostic {ledger}, other {other}, invalid cut {invalid}");
}
