//! Desk-scale differentiable pipeline (placeholder).
