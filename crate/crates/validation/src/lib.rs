//! Acceptance checks for the steckin toolkit live in `tests/acceptance.rs`.
