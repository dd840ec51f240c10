//! Discrete potential theory on Sierpinski-carpet-like self-similar fractals.

pub mod catalog;
pub mod cellgraph;
pub mod claims;
pub mod error;
pub mod exactnum;
pub mod experiment;
pub mod geometry;
pub mod hiprec;
pub mod ifs_file;
pub mod potential;
pub mod quadtree;

pub use error::{Error, Result};
pub use exactnum::{QuadNumber, Rounding};
pub use geometry::{IFSystem, Isometry, Similarity, Square, Word};
