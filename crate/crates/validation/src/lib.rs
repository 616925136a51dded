//! Holds the `acceptance` test target (`tests/acceptance.rs`), which checks the
//! library and CLI end to end and prints one PASS/FAIL line per criterion.
//!
//! ```text
//! cargo test --release -p igmd-validation --test acceptance
//! ```
