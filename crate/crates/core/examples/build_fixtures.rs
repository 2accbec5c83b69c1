//! Regenerates the fixture corpus: `cargo run --example build_fixtures [DIR]`.

use std::path::PathBuf;

fn main() {
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures"));
    if let Err(e) = ethoscan::fixtures::write_corpus(&root) {
        eprintln!("error: {e}");
        std::process::exit(2);
    }
    println!("wrote {} cases to {}", ethoscan::fixtures::build_corpus().len(), root.display());
}
