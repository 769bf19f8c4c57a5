//! Writes the bundled problem instances as `.dl`/`.hyp`/`.obs` files.
//!
//! cargo run -p pap-core --example write_instances -- <dir>

use std::path::PathBuf;

use pap_core::encodings::{blocksworld_files, network_files, strategic_files, BlocksInstance, MarketInstance};

fn main() -> std::io::Result<()> {
    let dir: PathBuf = std::env::args_os().nth(1).unwrap_or_else(|| "instances".into()).into();
    std::fs::create_dir_all(&dir)?;
    let instances = [
        ("network", network_files()),
        ("strategic", strategic_files(&MarketInstance::italian_market())),
        ("blocks", blocksworld_files(&BlocksInstance::six_blocks())),
    ];
    for (stem, files) in instances {
        for p in files.write_to(&dir, stem)? {
            println!("{}", p.display());
        }
    }
    Ok(())
}
