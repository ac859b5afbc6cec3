//! Multi-frequency imaging of perfectly conducting cracks from synthetic
//! multi-static response (MSR) data.
//!
//! The pipeline runs scene → MSR assembly → noise → SVD → imaging map:
//!
//! - [`scene`]: crack geometry, incidence directions, frequencies, grids.
//! - [`specfun`]: Bessel `J0`/`J1` and direction-average kernels.
//! - [`forward`]: MSR assembly and seeded noise injection.
//! - [`imaging`]: SVD, rank selection, steering vectors, the imaging
//!   functional and its closed-form point spread function.
//! - [`cli`]: scenario configuration, orchestration and file export.

pub mod cli;
pub mod error;
pub mod forward;
pub mod imaging;
pub mod scene;
pub mod specfun;

pub use error::{Error, Result};
pub use forward::{add_noise, assemble_msr, Convention, MsrMatrix, NoiseSpec};
pub use imaging::{
    evaluate_map, imaging_value, psf_closed_form, select_rank, steering, svd, FrequencyTerm,
    ImagingMap, SvdResult,
};
pub use scene::{
    discretize, make_directions, make_frequencies, Crack, CrackShape, DirectionSet, FrequencyGrid,
    ImagingGrid, Point2, ScattererCloud,
};
pub use specfun::{bessel_j0, bessel_j1, circle_sum, quadrature_oracle_psf};
