//! Empirical-measure convergence experiments: Gini estimates and Hausdorff
//! gaps of `Z(mu_N)` across a schedule of sample sizes and repeated trials.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gini::{generalized_gini, gini_volume, GiniMethod};
use crate::measures::ReferenceDistribution;
use crate::rng::derive_seed;
use crate::stats::Summary;
use crate::volume::VolumeMethod;
use crate::zonotope::{mean_zonotope, DirectionSet, Zonotope};

const TAG_SAMPLE: u64 = 1;
const TAG_FALLBACK_MC: u64 = 2;
const TAG_REFERENCE_SAMPLE: u64 = 3;
const TAG_REFERENCE_GINI: u64 = 4;
const TAG_DIRECTIONS: u64 = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct GcOptions {
    /// Directions per Hausdorff estimate; `None` skips the Hausdorff trace.
    pub hausdorff_budget: Option<usize>,
    /// Monte Carlo tuples for the reference Gini when no closed form exists.
    pub reference_tuples: usize,
    /// Reference zonotope size as a multiple of the largest scheduled `N`.
    pub reference_multiplier: usize,
    /// Tuples used when a sample is too large for exact enumeration.
    pub fallback_tuples: usize,
}

impl Default for GcOptions {
    fn default() -> Self {
        Self {
            hausdorff_budget: Some(64),
            reference_tuples: 1_000_000,
            reference_multiplier: 16,
            fallback_tuples: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceSource {
    ClosedForm,
    MonteCarlo,
}

/// One `(trial, N)` cell of the experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub n: usize,
    /// `None` when the sample mean has a zero coordinate.
    pub gini_hat: Option<f64>,
    pub stderr: Option<f64>,
    pub method: Option<VolumeMethod>,
    pub hausdorff_lb: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTrace {
    pub distribution: ReferenceDistribution,
    pub schedule: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub reference_gini: f64,
    pub reference_stderr: f64,
    pub reference_source: ReferenceSource,
    pub hausdorff_budget: Option<usize>,
    pub reference_size: Option<usize>,
    /// Ordered by trial, then by schedule position.
    pub records: Vec<TrialRecord>,
}

impl ConvergenceTrace {
    pub fn records_for(&self, n: usize) -> impl Iterator<Item = &TrialRecord> {
        self.records.iter().filter(move |r| r.n == n)
    }
}

fn validate_schedule(schedule: &[usize]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::InvalidSchedule("schedule is empty".into()));
    }
    if schedule[0] == 0 {
        return Err(Error::InvalidSchedule(
            "sample sizes must be positive".into(),
        ));
    }
    if schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSchedule(
            "sample sizes must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Runs the experiment. Every random draw is seeded from `(seed, trial, N)`
/// alone, so a trial's records do not change when `trials` grows, and the
/// trace is identical for any thread count.
pub fn gc_experiment(
    dist: &ReferenceDistribution,
    schedule: &[usize],
    trials: usize,
    seed: u64,
    opts: &GcOptions,
) -> Result<ConvergenceTrace> {
    validate_schedule(schedule)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if let Some(axis) = dist.mean().iter().position(|v| !(*v > 0.0)) {
        return Err(Error::DegenerateMean { axis });
    }

    let (reference_gini, reference_stderr, reference_source) = match dist.closed_form_gini() {
        Some(g) => (g, 0.0, ReferenceSource::ClosedForm),
        None => {
            let report = generalized_gini(
                dist,
                opts.reference_tuples,
                derive_seed(seed, &[TAG_REFERENCE_GINI]),
            )?;
            (
                report.gini,
                report.stderr.unwrap_or(0.0),
                ReferenceSource::MonteCarlo,
            )
        }
    };

    let max_n = *schedule.last().expect("validated non-empty");
    let reference: Option<Zonotope<f64>> = match opts.hausdorff_budget {
        Some(_) => {
            let size = max_n.saturating_mul(opts.reference_multiplier.max(1));
            let sample = dist.sample(size, derive_seed(seed, &[TAG_REFERENCE_SAMPLE]))?;
            Some(mean_zonotope(&sample))
        }
        None => None,
    };
    let direction_seed = derive_seed(seed, &[TAG_DIRECTIONS]);

    let cells: Vec<(usize, usize)> = (0..trials)
        .flat_map(|t| schedule.iter().map(move |&n| (t, n)))
        .collect();
    let records = cells
        .par_iter()
        .map(|&(trial, n)| {
            let sample =
                dist.sample(n, derive_seed(seed, &[TAG_SAMPLE, trial as u64, n as u64]))?;
            let report = match gini_volume(&sample, GiniMethod::Auto) {
                Err(Error::CombinationOverflow { .. }) => gini_volume(
                    &sample,
                    GiniMethod::MonteCarlo {
                        tuples: opts.fallback_tuples,
                        seed: derive_seed(seed, &[TAG_FALLBACK_MC, trial as u64, n as u64]),
                    },
                )
                .map(Some),
                Err(Error::DegenerateParallelotope { .. }) => Ok(None),
                other => other.map(Some),
            }?;
            let hausdorff_lb = match (&reference, opts.hausdorff_budget) {
                (Some(reference), Some(budget)) => {
                    let z = mean_zonotope(&sample);
                    let set = DirectionSet::for_pair(&z, reference, budget, direction_seed)?;
                    Some(set.max_gap(&z, reference)?)
                }
                _ => None,
            };
            Ok(TrialRecord {
                trial,
                n,
                gini_hat: report.map(|r| r.gini),
                stderr: report.and_then(|r| r.stderr),
                method: report.map(|r| r.method),
                hausdorff_lb,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ConvergenceTrace {
        distribution: dist.clone(),
        schedule: schedule.to_vec(),
        trials,
        seed,
        reference_gini,
        reference_stderr,
        reference_source,
        hausdorff_budget: opts.hausdorff_budget,
        reference_size: reference.as_ref().map(Zonotope::len),
        records,
    })
}

/// Statistics across trials for one sample size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeSummary {
    pub n: usize,
    pub defined: usize,
    pub undefined: usize,
    pub gini: Option<Summary>,
    /// `|gini_hat - reference_gini|`.
    pub abs_error: Option<Summary>,
    pub hausdorff: Option<Summary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceSummary {
    pub reference_gini: f64,
    pub sizes: Vec<SizeSummary>,
    pub median_error_strictly_decreasing: bool,
    pub hausdorff_median_non_increasing: Option<bool>,
}

pub fn summarize(trace: &ConvergenceTrace) -> TraceSummary {
    let sizes: Vec<SizeSummary> = trace
        .schedule
        .iter()
        .map(|&n| {
            let ginis: Vec<f64> = trace.records_for(n).filter_map(|r| r.gini_hat).collect();
            let errors: Vec<f64> = ginis
                .iter()
                .map(|g| (g - trace.reference_gini).abs())
                .collect();
            let hausdorff: Vec<f64> = trace
                .records_for(n)
                .filter_map(|r| r.hausdorff_lb)
                .collect();
            SizeSummary {
                n,
                defined: ginis.len(),
                undefined: trace.records_for(n).count() - ginis.len(),
                gini: Summary::of(&ginis),
                abs_error: Summary::of(&errors),
                hausdorff: Summary::of(&hausdorff),
            }
        })
        .collect();
    let error_medians: Option<Vec<f64>> = sizes
        .iter()
        .map(|s| s.abs_error.map(|e| e.median))
        .collect();
    let median_error_strictly_decreasing =
        error_medians.is_some_and(|m| m.windows(2).all(|w| w[1] < w[0]));
    let hausdorff_median_non_increasing = sizes
        .iter()
        .map(|s| s.hausdorff.map(|h| h.median))
        .collect::<Option<Vec<f64>>>()
        .map(|m| m.windows(2).all(|w| w[1] <= w[0]));
    TraceSummary {
        reference_gini: trace.reference_gini,
        sizes,
        median_error_strictly_decreasing,
        hausdorff_median_non_increasing,
    }
}
