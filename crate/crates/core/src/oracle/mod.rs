//! Independent reference computations used to check the engine.

pub mod diagrams;
pub mod programs;
pub mod worlds;
pub mod random;
pub mod saturation;
