//! Ellipse detection and 3d circle pose recovery.
//!
//! The crate is organised as a pipeline:
//!
//! 1. [`raster`] – grey/colour image containers, PNM I/O and the integral image.
//! 2. [`detect`] – local-mean thresholding, blob labelling, star fill, blob
//!    moments, the equivalent-ellipse filter and wheel pair selection.
//! 3. [`conic`] – ellipse covariance geometry and the ellipse → circle normal map.
//! 4. [`rot`] – quaternion rotations.
//! 5. [`pose`] – similarity transforms aligning circle models to ellipses, with
//!    the discrete ambiguity enumeration for two-wheel vehicles.
//! 6. [`synth`] – ground-truth renderer and the built-in fixtures.
//!
//! Image coordinates: x grows to the right, y grows downward, the origin is the
//! centre of the top-left pixel. The third axis is chosen so that circle normals
//! pointing away from the observer have a negative z component.

pub mod conic;
pub mod detect;
pub mod error;
pub mod pose;
pub mod raster;
pub mod rot;
pub mod synth;

pub use error::{Error, Result};

pub use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
