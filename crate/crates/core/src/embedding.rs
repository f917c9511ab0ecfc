//! Logical-circuit embedding (in progress).
