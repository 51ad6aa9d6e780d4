//! Synthetic data, metrics, image export and the on-disk tensor container.

pub mod container;
pub mod image;
pub mod metrics;
pub mod phantom;

pub use container::{load_container, save_container, Dtype, Entry, Payload, TensorContainer};
pub use image::{export_error_map, export_magnitude_image, magnitude_pgm};
pub use metrics::snr_db;
pub use phantom::make_phantom;
