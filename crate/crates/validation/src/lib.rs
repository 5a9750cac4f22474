//! Acceptance suite for the giant-atom simulator; see `tests/acceptance.rs`.
