//! Smell detection and validated LLM refactoring.

pub mod analysis;
pub mod config;
pub mod engine;
pub mod gate;
pub mod health;
pub mod lang;
pub mod model;
pub mod smells;
pub mod validation;
