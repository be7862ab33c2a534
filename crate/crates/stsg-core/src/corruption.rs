//! Feature corruption harness (placeholder).
