//! Builds every catalog net and prints its combinatorics, total length and balance.
use geonet::catalog;

fn main() {
    for e in catalog::entries() {
        let net = catalog::build(e.name).expect("catalog builds");
        println!(
            "{:<20} V={:<3} E={:<3} F={:<3} length={:.10} balance={:.1e} angle defect={:.1e}",
            e.name,
            net.num_vertices(),
            net.num_arcs(),
            e.counts.2,
            net.total_length(),
            net.max_balance_residual(),
            net.max_angle_defect()
        );
    }
}
