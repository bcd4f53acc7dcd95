//! Φ-functions, modular and Luxemburg norms, and the centered maximal
//! operator on sampled fields over 1-D and 2-D grids.

pub mod error;
pub mod grid;
pub mod maximal;
pub mod modular;
pub mod phi;
pub mod report;
pub mod roots;
pub mod runner;
pub mod sobolev;
pub mod spatial;

pub use error::{Error, Result};
