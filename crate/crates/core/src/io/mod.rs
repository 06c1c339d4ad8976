//! Rasters in, configuration in, CSV and rasters out.

pub mod config;
pub mod output;
pub mod raster;

pub use config::{load_config, RunConfig};
pub use raster::{read_esri_ascii, write_esri_ascii, Raster};
