//! Acceptance suite (in progress).
