//! Growth profiles (placeholder).
