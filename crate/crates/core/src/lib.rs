//! Zonotope geometry and the multidimensional Gini index.
//!
//! A dataset `{y_1, ..., y_N}` in the non-negative orthant defines the
//! zonotope `Z = sum_n [0, y_n]`. Its Gini volume is `V(Z) / V(P_Z)`, where
//! `P_Z` is the axis-aligned box spanned by the main diagonal `sum_n y_n`.
//! The same ratio, taken with the zonoid of a distribution and the box below
//! its mean, gives the generalized Gini index; for a lifted univariate
//! distribution it coincides with the classical Gini coefficient.
//!
//! The geometry is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below name the `f64` instantiations. Sampling and Monte Carlo
//! estimation always run in `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convergence;
pub mod error;
pub mod gini;
pub mod measures;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod volume;
pub mod zonotope;

pub use convergence::{gc_experiment, summarize, ConvergenceTrace, GcOptions, TraceSummary};
pub use error::{Error, Result};
pub use gini::{
    classical_gini_pairwise, empirical_lorenz_curve, generalized_gini, gini_volume, lorenz_curve,
    GiniMethod, GiniReport, LorenzCurve,
};
pub use measures::{read_csv, read_csv_path, EmpiricalMeasure, ReferenceDistribution, Sampler};
pub use scalar::{CompensatedSum, Scalar};
pub use volume::{
    exact_volume, exact_volume_with_guard, fast_volume_2d, mc_volume, parallelotope_volume,
    VolumeMethod, VolumeResult,
};
pub use zonotope::{
    hausdorff_estimate, mean_zonotope, support_of_measure, total_zonotope, Direction, DirectionSet,
    HausdorffEstimate, Zonotope,
};

pub type EmpiricalMeasure64 = EmpiricalMeasure<f64>;
pub type EmpiricalMeasure32 = EmpiricalMeasure<f32>;
pub type Zonotope64 = Zonotope<f64>;
pub type Zonotope32 = Zonotope<f32>;
pub type Direction64 = Direction<f64>;
pub type Direction32 = Direction<f32>;
pub type VolumeResult64 = VolumeResult<f64>;
pub type GiniReport64 = GiniReport<f64>;
pub type LorenzCurve64 = LorenzCurve<f64>;
