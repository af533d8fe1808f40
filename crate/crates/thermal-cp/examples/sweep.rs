//! Temperature sweep of a scene file, written as a result table.
//!
//! cargo run --release --example sweep -- scenes/pec_sphere.toml

use std::path::PathBuf;

use thermal_cp::cli::{parse_range, run_sweep, Engine, Sweep};
use thermal_cp::scene::Scene;
use thermal_cp::table::Table;

fn main() -> thermal_cp::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/scenes/pec_sphere.toml")));
    let engine = Engine::new(Scene::read(&path)?)?;
    let (table, err) = run_sweep(&engine, &Sweep::Temperature(parse_range("0:600:100")?));
    if let Some(e) = err {
        return Err(e);
    }
    let text = table.render(false);
    print!("{text}");
    let back = Table::parse(&text)?;
    assert_eq!(back.render(false), text);
    Ok(())
}
