//! Exact pinned algebraic distances and point-plane incidences over F_p.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod field;
pub mod incidence;
pub mod plane;

pub use error::{Error, Result};
pub use field::{PrimeModulus, Residue};
pub use incidence::{IncidenceInstance, Plane, Point3};
pub use plane::{Point2, PointSet2};
