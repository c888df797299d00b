#![allow(dead_code)]

pub mod gen;
pub mod oracle;
pub mod scaler;
pub mod synthetic;

use std::path::PathBuf;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}
