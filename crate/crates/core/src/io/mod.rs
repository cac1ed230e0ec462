//! Artifact writers: legacy VTK, Matrix Market and CSV with a metadata block.

pub mod csv;
pub mod matrix_market;
pub mod vtk;

pub use self::csv::{fmt_f64, read_csv, write_csv, CsvTable, Metadata};
pub use self::matrix_market::{read_matrix_market, write_matrix_market};
pub use self::vtk::{write_vtk, PointData};
