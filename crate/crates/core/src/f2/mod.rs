//! GF(2) machinery: generating matrices, digital-net point generation,
//! digit interlacing, and net-quality verification.

pub mod matrix;
pub mod points;
pub mod quality;

pub use matrix::{BitMatrix, GeneratingMatrixSet};
pub use points::{
    digit_vector, generate_digital_net, interlace, sequence_to_net, DyadicPoint, PointSet,
};
pub use quality::{check_equidistribution, verify_order_sigma_t};
