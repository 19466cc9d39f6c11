#![allow(dead_code)]

use midband::deployment::{load_deployment, Deployment, GnbDefaults};
use midband::scene::{load_scene, MaterialTable, Scene};
use std::path::{Path, PathBuf};

pub fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

pub fn bundled_scene() -> Scene {
    load_scene(&data("manhattan_scene.json"), &MaterialTable::default()).unwrap()
}

pub fn bundled_deployment() -> Deployment {
    load_deployment(&data("manhattan_deployment.json"), GnbDefaults::default()).unwrap()
}
