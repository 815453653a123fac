//! Gini volume of datasets, generalized Gini index of distributions, and
//! generalized Lorenz curves.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{EmpiricalMeasure, ReferenceDistribution};
use crate::scalar::{CompensatedSum, Scalar};
use crate::volume::{
    binomial, exact_volume, fast_volume_2d, mc_volume, parallelotope_volume, VolumeMethod,
    VolumeResult,
};
use crate::zonotope::total_zonotope;

/// Largest subset count `GiniMethod::Auto` will enumerate exactly.
pub const AUTO_EXACT_LIMIT: u128 = 20_000_000;

pub const DEFAULT_LORENZ_GRID: usize = 512;

/// Volume engine used for the numerator of the Gini volume.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GiniMethod {
    /// `Fast2d` in the plane, `Exact` up to [`AUTO_EXACT_LIMIT`] subsets.
    Auto,
    Exact,
    Fast2d,
    /// With-replacement resampling of the dataset, scaled by `N^d`.
    MonteCarlo {
        tuples: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GiniReport<T> {
    pub gini: T,
    pub zonotope_volume: T,
    pub parallelotope_volume: T,
    pub method: VolumeMethod,
    pub stderr: Option<T>,
    /// Dataset size, or Monte Carlo tuples for a reference distribution.
    pub n_points: usize,
    pub dim: usize,
}

impl<T: Scalar> GiniReport<T> {
    fn from_volumes(
        volume: VolumeResult<T>,
        parallelotope: T,
        n_points: usize,
        dim: usize,
    ) -> Self {
        Self {
            gini: volume.value / parallelotope,
            zonotope_volume: volume.value,
            parallelotope_volume: parallelotope,
            method: volume.method,
            stderr: volume.stderr.map(|s| s / parallelotope),
            n_points,
            dim,
        }
    }
}

/// Gini volume `V(Z) / V(P_Z)` of a dataset's total production zonotope.
///
/// Fails with `DegenerateParallelotope` when some coordinate of `sum y_n` is 0.
pub fn gini_volume<T: Scalar>(
    mu: &EmpiricalMeasure<T>,
    method: GiniMethod,
) -> Result<GiniReport<T>> {
    let (n, d) = (mu.len(), mu.dim());
    let diagonal = mu.total();
    if let Some(axis) = diagonal.iter().position(|v| !(*v > T::zero())) {
        return Err(Error::DegenerateParallelotope { axis });
    }
    let parallelotope = parallelotope_volume(&diagonal)?;
    let z = total_zonotope(mu);
    let volume = match method {
        GiniMethod::Exact => exact_volume(&z)?,
        GiniMethod::Fast2d => fast_volume_2d(&z)?,
        GiniMethod::Auto if d == 2 => fast_volume_2d(&z)?,
        GiniMethod::Auto => {
            let combinations = binomial(n, d);
            if combinations > AUTO_EXACT_LIMIT {
                return Err(Error::CombinationOverflow {
                    combinations,
                    guard: AUTO_EXACT_LIMIT,
                });
            }
            exact_volume(&z)?
        }
        GiniMethod::MonteCarlo { tuples, seed } => {
            let estimate = mc_volume(mu, d, tuples, seed)?;
            let homothety = T::from_usize_lossy(n).powi(d as i32);
            VolumeResult {
                value: T::lit(estimate.value),
                method: estimate.method,
                stderr: estimate.stderr.map(T::lit),
                terms: estimate.terms,
                degenerate: estimate.degenerate,
            }
            .scaled(homothety)
        }
    };
    Ok(GiniReport::from_volumes(volume, parallelotope, n, d))
}

/// Generalized Gini index `V(Z(mu)) / V(P(mu))` with a Monte Carlo numerator
/// and the closed-form mean in the denominator.
pub fn generalized_gini(
    dist: &ReferenceDistribution,
    tuples: usize,
    seed: u64,
) -> Result<GiniReport<f64>> {
    let mean = dist.mean();
    if let Some(axis) = mean.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::DegenerateMean { axis });
    }
    let parallelotope = parallelotope_volume(&mean)?;
    let volume = mc_volume(dist, dist.dim(), tuples, seed)?;
    Ok(GiniReport::from_volumes(
        volume,
        parallelotope,
        tuples,
        dist.dim(),
    ))
}

/// Generalized Lorenz curve `t -> (t, int_0^t Q(s) ds)` on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LorenzCurve<T> {
    pub nodes: Vec<(T, T)>,
    pub mean: T,
}

impl<T: Scalar> LorenzCurve<T> {
    /// Dual curve: point reflection through `(1/2, mean/2)`, reordered so `t`
    /// increases.
    pub fn dual(&self) -> Self {
        Self {
            nodes: self
                .nodes
                .iter()
                .rev()
                .map(|&(t, v)| (T::one() - t, self.mean - v))
                .collect(),
            mean: self.mean,
        }
    }

    /// Classical Gini coefficient from the curve: the area between the
    /// diagonal and the curve over half the box area (trapezoid rule).
    pub fn gini(&self) -> T {
        let area = self
            .nodes
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) * T::lit(0.5))
            .collect::<CompensatedSum<T>>()
            .value();
        T::one() - area / (self.mean * T::lit(0.5))
    }
}

fn check_grid(grid: usize) -> Result<()> {
    if grid < 2 {
        return Err(Error::InvalidParameter(format!(
            "Lorenz grid needs at least 2 intervals, got {grid}"
        )));
    }
    Ok(())
}

/// Lorenz curve of a univariate reference distribution (closed forms).
pub fn lorenz_curve(dist: &ReferenceDistribution, grid: usize) -> Result<LorenzCurve<f64>> {
    check_grid(grid)?;
    if !dist.is_univariate() {
        return Err(Error::NotUnivariate(dist.dim()));
    }
    let nodes = (0..=grid)
        .map(|k| {
            let t = k as f64 / grid as f64;
            dist.partial_quantile_integral(t).map(|v| (t, v))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LorenzCurve {
        mean: dist.mean()[0],
        nodes,
    })
}

/// Lorenz curve of a univariate dataset. The quantile function is piecewise
/// constant, so node values are exact up to the final rounding.
pub fn empirical_lorenz_curve<T: Scalar>(
    mu: &EmpiricalMeasure<T>,
    grid: usize,
) -> Result<LorenzCurve<T>> {
    check_grid(grid)?;
    let sorted = mu.sorted_values()?;
    let n = sorted.len();
    let mut prefix = Vec::with_capacity(n + 1);
    let mut acc = CompensatedSum::new();
    prefix.push(T::zero());
    for &x in &sorted {
        acc.add(x);
        prefix.push(acc.value());
    }
    let nf = T::from_usize_lossy(n);
    let gf = T::from_usize_lossy(grid);
    let nodes = (0..=grid)
        .map(|k| {
            // t * N = k * N / grid = full + rem / grid
            let scaled = k as u128 * n as u128;
            let full = (scaled / grid as u128) as usize;
            let rem = (scaled % grid as u128) as usize;
            let partial = if rem == 0 {
                T::zero()
            } else {
                sorted[full] * T::from_usize_lossy(rem) / gf
            };
            (T::from_usize_lossy(k) / gf, (prefix[full] + partial) / nf)
        })
        .collect();
    Ok(LorenzCurve {
        mean: prefix[n] / nf,
        nodes,
    })
}

/// Classical Gini coefficient `sum_{i,j} |x_i - x_j| / (2 N^2 mean)` in
/// `O(N log N)` by sorting and prefix sums.
pub fn classical_gini_pairwise<T: Scalar>(values: &[T]) -> Result<T> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let mut prefix = CompensatedSum::new();
    let mut pairs = CompensatedSum::new();
    for (j, &x) in sorted.iter().enumerate() {
        pairs.add(T::from_usize_lossy(j) * x - prefix.value());
        prefix.add(x);
    }
    let total = prefix.value();
    if !(total > T::zero()) {
        return Err(Error::ZeroMean);
    }
    Ok(pairs.value() / (T::from_usize_lossy(sorted.len()) * total))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn measure(rows: &[&[f64]]) -> EmpiricalMeasure<f64> {
        EmpiricalMeasure::from_rows(rows.iter().copied()).unwrap()
    }

    #[test]
    fn limit_cases() {
        let axes = measure(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(gini_volume(&axes, GiniMethod::Exact).unwrap().gini, 1.0);
        let line = measure(&[&[1.0, 1.0], &[2.0, 2.0], &[5.0, 5.0]]);
        assert_eq!(gini_volume(&line, GiniMethod::Auto).unwrap().gini, 0.0);
    }

    #[test]
    fn degenerate_diagonal_is_an_error() {
        let mu = measure(&[&[1.0, 0.0], &[2.0, 0.0]]);
        assert_eq!(
            gini_volume(&mu, GiniMethod::Auto),
            Err(Error::DegenerateParallelotope { axis: 1 })
        );
    }

    #[test]
    fn pairwise_examples() {
        assert_eq!(classical_gini_pairwise(&[1.0, 1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(classical_gini_pairwise(&[0.0, 1.0]).unwrap(), 0.5);
        assert_eq!(classical_gini_pairwise(&[1.0, 3.0]).unwrap(), 0.25);
        assert_eq!(classical_gini_pairwise::<f64>(&[]), Err(Error::EmptyInput));
        assert_eq!(classical_gini_pairwise(&[0.0, 0.0]), Err(Error::ZeroMean));
    }

    #[test]
    fn lorenz_of_two_points() {
        let mu = measure(&[&[1.0], &[3.0]]);
        let curve = empirical_lorenz_curve(&mu, 4).unwrap();
        assert_eq!(curve.nodes[2], (0.5, 0.5));
        assert_eq!(curve.nodes[4], (1.0, 2.0));
        assert_eq!(curve.nodes[0], (0.0, 0.0));
        let dual = curve.dual();
        assert_eq!(dual.nodes[0], (0.0, 0.0));
        assert_eq!(dual.nodes[2], (0.5, 1.5));
        assert!(matches!(
            empirical_lorenz_curve(&measure(&[&[1.0, 2.0]]), 4),
            Err(Error::NotUnivariate(2))
        ));
    }
}
