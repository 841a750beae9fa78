//! Holds the acceptance suite in `tests/acceptance.rs`. Kept as its own
//! package so the suite runs after the unit and property tests of the other
//! crates.
