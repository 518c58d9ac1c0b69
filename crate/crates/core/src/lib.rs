// SPDX-License-Identifier: Apache-2.0

//! Lindblad dynamics on finite chains with analytically deformed generators
//! and executable light-cone certificates.

pub mod bounds;
pub mod error;
pub mod evolve;
pub mod linalg;
pub mod liouvillian;
pub mod model;
pub mod sampling;
pub mod verify;

pub use error::{Error, Result};
