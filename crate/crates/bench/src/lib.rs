//! Fixture loading shared by the benchmarks.

use std::path::PathBuf;

use ladisc_core::Instance;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/solomon")
}

/// First `n` customers of a bundled Solomon file.
pub fn fixture(name: &str, n: usize) -> Instance {
    let path = data_dir().join(format!("{name}.txt"));
    Instance::from_file(&path)
        .and_then(|i| i.truncate(n))
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
