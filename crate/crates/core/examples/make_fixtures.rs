//! Writes the synthetic datasets, attribute spec and run config.
//!
//! Usage: `cargo run -p cat-core --example make_fixtures -- <dir>`

use std::path::PathBuf;

fn main() -> Result<(), cat_core::CatError> {
    let dir = std::env::args_os().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("fixtures"));
    cat_core::synthetic::write_fixture_set(&dir)?;
    println!("wrote fixtures to {}", dir.display());
    Ok(())
}
