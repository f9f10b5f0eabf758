pub mod diagnostics;
pub mod image;
pub mod linalg;
pub mod problems;
pub mod prox;
pub mod rng;
pub mod splitting;
