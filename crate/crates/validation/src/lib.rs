//! Acceptance suite for `bdscore`; see `tests/acceptance.rs`.
