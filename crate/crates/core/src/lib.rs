//! Verification of universal ternary sums `x(ax+1) + y(by+1) + z(cz+1)` by
//! congruence transfer between quadratic forms in one genus.

pub mod bitmap;
pub mod bundled;
pub mod cache;
pub mod error;
pub mod pipelines;
pub mod qform;
pub mod repenum;
pub mod transfer;
pub mod universality;

pub use error::{Error, Result};
pub use qform::{evaluate, similitude_check, GramMatrix, IntVector3, Mat3, OrderClass, Similitude};
pub use repenum::{count, representations, represented_set, ProgressionSpec, RepSet};
