pub mod error;
pub mod estimates;
pub mod geometry;
pub mod linalg;
pub mod nonlinearity;
pub mod profile1d;
pub mod scalar;
pub mod solver;
pub mod stability;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Nonlinearity = nonlinearity::Nonlinearity<f64>;
pub type Profile = profile1d::Profile1D<f64>;
pub type Grid = geometry::TriangleGrid<f64>;
pub type Field = solver::Field<f64>;
pub type SaddleField = solver::SaddleField<f64>;
pub type EtaFamily = stability::EtaFamily<f64>;
