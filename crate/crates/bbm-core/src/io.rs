//! Serialization (placeholder).
