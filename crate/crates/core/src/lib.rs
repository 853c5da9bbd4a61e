//! Simulation relations, interfaces, and controller concretization for
//! abstraction-based control of finite transition systems, plus a grid
//! abstraction layer for continuous dynamics with growth bounds.

pub mod concretize;
pub mod error;
pub mod generators;
pub mod grid;
pub mod interface;
pub mod io;
pub mod relation;
pub mod synthesis;
pub mod system;

pub use error::{Error, Result};
