//! Regenerates the bundled Manhattan-grid scene and deployment.
//!
//!     cargo run -p midband-core --example generate_manhattan -- data/

use midband::synthetic::{manhattan_deployment, manhattan_scene, ManhattanParams};
use std::path::PathBuf;

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    let p = ManhattanParams::default();
    let scene = serde_json::to_string_pretty(&manhattan_scene(&p)).unwrap() + "\n";
    let dep = serde_json::to_string_pretty(&manhattan_deployment(&p)).unwrap() + "\n";
    midband::pipeline::write_atomic(&dir.join("manhattan_scene.json"), scene.as_bytes()).unwrap();
    midband::pipeline::write_atomic(&dir.join("manhattan_deployment.json"), dep.as_bytes())
        .unwrap();
}
