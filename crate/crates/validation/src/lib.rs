//! End-to-end acceptance checks live in `tests/acceptance.rs`.
//!
//! They sit in their own package so that `cargo test --workspace` runs them
//! after every other suite.
