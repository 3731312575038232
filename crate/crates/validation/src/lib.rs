//! Acceptance suite for the polyent workspace; see `tests/acceptance.rs`.
