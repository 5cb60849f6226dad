//! Distinct arc lengths of the optimized catalog nets.
use geonet::catalog;

fn main() {
    for name in ["type44", "type63", "type82"] {
        let net = catalog::build(name).unwrap();
        let mut ls: Vec<f64> = net.arcs().iter().map(|a| a.geom.length()).collect();
        ls.sort_by(f64::total_cmp);
        let mut distinct: Vec<(f64, usize)> = Vec::new();
        for l in ls {
            match distinct.last_mut() {
                Some((x, n)) if (l - *x).abs() < 1e-7 => *n += 1,
                _ => distinct.push((l, 1)),
            }
        }
        let text: Vec<String> = distinct.iter().map(|(l, n)| format!("{l:.5} (x{n})")).collect();
        println!("{name}: {}", text.join(", "));
    }
}
