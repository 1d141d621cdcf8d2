//! Matrix and vector file formats.

pub mod ddm;
pub mod mtx;
pub mod vector;

pub use ddm::{decode_ddm, encode_ddm, read_ddm, write_ddm, DdmError};
pub use mtx::{parse_matrix_market, read_matrix_market, MtxError};
pub use vector::{format_vector, parse_vector, read_vector, write_vector, VectorError};
