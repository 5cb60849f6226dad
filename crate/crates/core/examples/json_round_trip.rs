//! Writes the cube net as canonical JSON and checks that re-reading it is lossless.
use geonet::{catalog, io};

fn main() {
    let net = catalog::build("cube").unwrap();
    let text = io::to_canonical(&io::network_to_json(&net)).unwrap();
    let back = io::network_from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    let again = io::to_canonical(&io::network_to_json(&back)).unwrap();
    println!("{} bytes, sha256 {}", text.len(), io::sha256_hex(text.as_bytes()));
    println!("byte identical after round trip: {}", text == again);
}
