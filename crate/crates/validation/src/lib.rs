//! Holds the acceptance suite in `tests/acceptance.rs`. The package name sorts
//! after the other workspace members, so `cargo test --workspace` runs every
//! unit and integration test before the long acceptance binary.
