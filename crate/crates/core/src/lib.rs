//! Gyro-guided deblurring and keypoint rectification for rolling-shutter
//! cameras.
//!
//! The pipeline integrates gyroscope samples into an orientation trajectory,
//! predicts a per-block linear blur field from it, checks that prediction
//! against the image, and deconvolves each block with a precomputed sparse
//! inverse kernel. Keypoints can be mapped onto a common frame time, and the
//! `eval` module scores detectors on the result.

pub mod blurfield;
pub mod cli;
pub mod deconv;
pub mod error;
pub mod eval;
pub mod imaging;
pub mod imu;
pub mod validation;

pub use blurfield::{estimate_blur_field, rectify_keypoints, BlurField, BlurVector, CameraRig};
pub use deconv::{build_bank, deblur_image, KernelBank};
pub use error::{Error, Result};
pub use eval::{Homography, Keypoint};
pub use imaging::Image;
pub use imu::{integrate_gyro, GyroSample, OrientationTrajectory};
pub use validation::{validate_field, Granularity, ValidationConfig};
