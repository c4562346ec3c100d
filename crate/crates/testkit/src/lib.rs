//! Shared test support: a random MiniLang generator whose metrics come
//! from its own syntax tree, and curated fixtures.

pub mod fixtures;
pub mod gen;
