//! Load a TOML run description and run it through the library, the way the
//! `stablab experiment` subcommand does. Defaults to `configs/knn.toml`.

use std::path::PathBuf;

use stablab::config::Config;
use stablab::harness::run_experiment;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs/knn.toml"));
    let config = Config::load(&path)?;
    print!("{}", config.render());
    let base = path.parent().unwrap_or_else(|| ".".as_ref());
    let result = run_experiment(&config.experiment(base)?)?;
    println!("{}", serde_json::to_string_pretty(&result)?);
    Ok(())
}
