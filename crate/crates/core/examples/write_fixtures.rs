//! Regenerate the `.map` fixtures shipped in `fixtures/`.
//!
//! ```text
//! cargo run --example write_fixtures -- fixtures
//! ```

use std::fs;
use std::path::PathBuf;

use covplan::simulator::{corridor_world, false_opening_world, hall_world, standard_maze};

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    fs::create_dir_all(&dir)?;
    let worlds = [
        ("maze", standard_maze()),
        ("corridor", corridor_world()),
        ("hall", hall_world()),
        ("false_opening", false_opening_world().0),
    ];
    for (name, grid) in worlds {
        let path = dir.join(format!("{name}.map"));
        fs::write(&path, grid.to_map_string())?;
        println!(
            "{:<24} {}x{} cells, {:.1} m2 reachable",
            path.display(),
            grid.width(),
            grid.height(),
            grid.reachable_area()
        );
    }
    Ok(())
}
