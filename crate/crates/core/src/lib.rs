// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod optim;
pub mod pipeline;
pub mod pose_planner;
pub mod proximity;
pub mod roadmap;
pub mod scenario;
pub mod smoother;
pub mod so3;
pub mod voronoi;

pub use error::{Error, Result};
pub use geometry::{Dim, Point, RigidPose, Superquadric, WorldBox};
