//! Kohn-Nirenberg quantization on the torus grid.

mod field;
mod generator;
mod grid;
mod operator;

pub use field::ComplexField;
pub use generator::{assemble_generator, truncated_modes, GeneratorMatrix};
pub use grid::Grid;
pub use operator::{apply_b, apply_multiplier, apply_w, laplacian, DampingOperator};
