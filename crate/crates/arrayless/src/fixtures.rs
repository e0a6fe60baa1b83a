//! Example programs shipped with the crate.

use arrayless_core::{parse, Program};

pub const SQUARES: &str = include_str!("../fixtures/squares.c");
pub const SQUARES_TRANSFORMED: &str = include_str!("../fixtures/squares.transformed.c");
pub const SUMS: &str = include_str!("../fixtures/sums.c");
pub const HALVES: &str = include_str!("../fixtures/halves.c");

/// `(name, source)` for every input fixture.
pub const ALL: [(&str, &str); 3] = [("squares", SQUARES), ("sums", SUMS), ("halves", HALVES)];

pub fn load(src: &str) -> Program {
    parse(src).expect("fixture parses")
}

pub fn fixture_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}
