//! Zonotopes as generator lists: Minkowski sums of segments `[0, g_i]`.

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::measures::{EmpiricalMeasure, Sampler};
use crate::rng;
use crate::scalar::{dot, CompensatedSum, Scalar};
use crate::stats::RunningStats;

/// Draws evaluated per random stream in [`support_of_measure`].
const SUPPORT_BLOCK: usize = 4096;

/// The body `sum_i [0, g_i]`. Generators may repeat or be zero; no vertex or
/// facet representation is ever built.
#[derive(Debug, Clone, PartialEq)]
pub struct Zonotope<T> {
    coords: Vec<T>,
    dim: usize,
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

impl<T: Scalar> Zonotope<T> {
    /// Zonotope with no generators, i.e. the origin. Neutral for Minkowski sums.
    pub fn empty(dim: usize) -> Self {
        assert!(dim >= 1, "zonotope dimension must be positive");
        Self {
            coords: Vec::new(),
            dim,
        }
    }

    pub fn from_generators<R: AsRef<[T]>>(
        dim: usize,
        generators: impl IntoIterator<Item = R>,
    ) -> Result<Self> {
        let mut z = Self::empty(dim);
        for (i, g) in generators.into_iter().enumerate() {
            let g = g.as_ref();
            check_dim(dim, g.len())?;
            if let Some(coord) = g.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { point: i, coord });
            }
            z.coords.extend_from_slice(g);
        }
        Ok(z)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of generators.
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn generator(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn generators(&self) -> std::slice::ChunksExact<'_, T> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[T] {
        &self.coords
    }

    /// `sum_i g_i`, the far end of the main diagonal.
    pub fn diagonal(&self) -> Vec<T> {
        (0..self.dim)
            .map(|k| {
                self.generators()
                    .map(|g| g[k])
                    .collect::<CompensatedSum<T>>()
                    .value()
            })
            .collect()
    }

    /// Multiplies every generator by `factor`.
    pub fn scale(&self, factor: T) -> Self {
        Self {
            coords: self.coords.iter().map(|&v| v * factor).collect(),
            dim: self.dim,
        }
    }

    /// Minkowski sum: concatenation of generator lists.
    pub fn minkowski_concat(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        Ok(Self {
            coords,
            dim: self.dim,
        })
    }

    /// Image under the linear map whose matrix has the given rows.
    pub fn linear_image<R: AsRef<[T]>>(&self, rows: &[R]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        for row in rows {
            check_dim(self.dim, row.as_ref().len())?;
        }
        let coords = self
            .generators()
            .flat_map(|g| rows.iter().map(move |r| dot(r.as_ref(), g)))
            .collect();
        Ok(Self {
            coords,
            dim: rows.len(),
        })
    }

    /// Support function `h(xi) = sum_i max(<g_i, xi>, 0)`.
    pub fn support(&self, xi: &Direction<T>) -> Result<T> {
        check_dim(self.dim, xi.dim())?;
        Ok(self.support_raw(xi.components()).0)
    }

    /// Support value together with `sum_i sum_k |g_ik xi_k|`, which bounds its
    /// rounding error.
    fn support_raw(&self, xi: &[T]) -> (T, T) {
        let mut value = CompensatedSum::new();
        let mut mass = T::zero();
        for g in self.generators() {
            let t = dot(g, xi);
            if t > T::zero() {
                value.add(t);
            }
            mass = mass
                + g.iter()
                    .zip(xi)
                    .fold(T::zero(), |acc, (&a, &b)| acc + (a * b).abs());
        }
        (value.value(), mass)
    }
}

/// Short-run total production set: generators are the points verbatim.
pub fn total_zonotope<T: Scalar>(mu: &EmpiricalMeasure<T>) -> Zonotope<T> {
    Zonotope {
        coords: mu.as_flat().to_vec(),
        dim: mu.dim(),
    }
}

/// Empirical zonoid: generators `y_n / N`, so `total = N * mean`.
pub fn mean_zonotope<T: Scalar>(mu: &EmpiricalMeasure<T>) -> Zonotope<T> {
    let n = T::from_usize_lossy(mu.len());
    Zonotope {
        coords: mu.as_flat().iter().map(|&v| v / n).collect(),
        dim: mu.dim(),
    }
}

/// A unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction<T> {
    components: Vec<T>,
}

impl<T: Scalar> Direction<T> {
    fn tolerance() -> T {
        T::lit(1e-12).max(T::epsilon() * T::lit(8.0))
    }

    /// Accepts a vector whose Euclidean norm is already 1.
    pub fn unit(components: Vec<T>) -> Result<Self> {
        let norm = dot(&components, &components).sqrt();
        if components.is_empty() || !((norm - T::one()).abs() <= Self::tolerance()) {
            return Err(Error::InvalidParameter(format!(
                "direction must have unit norm, got {norm}"
            )));
        }
        Ok(Self { components })
    }

    /// Normalizes a non-zero finite vector.
    pub fn normalize(components: Vec<T>) -> Result<Self> {
        let norm = dot(&components, &components).sqrt();
        if components.is_empty() || !norm.is_finite() || norm <= T::zero() {
            return Err(Error::InvalidParameter(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        Ok(Self {
            components: components.into_iter().map(|v| v / norm).collect(),
        })
    }

    /// Unit vector along coordinate `axis`, with the given sign.
    pub fn axis(dim: usize, axis: usize, positive: bool) -> Self {
        let mut components = vec![T::zero(); dim];
        components[axis] = if positive { T::one() } else { -T::one() };
        Self { components }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[T] {
        &self.components
    }

    pub fn negate(&self) -> Self {
        Self {
            components: self.components.iter().map(|&v| -v).collect(),
        }
    }
}

/// Uniformly distributed unit vector (normalized Gaussian, inverse-CDF draws).
pub fn random_direction<T: Scalar>(rng: &mut rng::StreamRng, dim: usize) -> Direction<T> {
    let normal = Normal::new(0.0, 1.0).expect("valid normal parameters");
    loop {
        let v: Vec<T> = (0..dim)
            .map(|_| T::lit(normal.inverse_cdf(rng::open_unit(rng))))
            .collect();
        if let Ok(d) = Direction::normalize(v) {
            return d;
        }
    }
}

/// Monte Carlo estimate of the zonoid support `E[max(<X, xi>, 0)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupportEstimate {
    pub estimate: f64,
    pub stderr: f64,
}

pub fn support_of_measure<S: Sampler + ?Sized>(
    dist: &S,
    xi: &Direction<f64>,
    samples: usize,
    seed: u64,
) -> Result<SupportEstimate> {
    check_dim(dist.dim(), xi.dim())?;
    if samples < 2 {
        return Err(Error::InvalidParameter(format!(
            "support estimation needs at least 2 samples, got {samples}"
        )));
    }
    let dim = dist.dim();
    let blocks = samples.div_ceil(SUPPORT_BLOCK);
    let partials: Vec<RunningStats> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let count = SUPPORT_BLOCK.min(samples - b * SUPPORT_BLOCK);
            let mut rng = rng::stream(seed, b as u64);
            let mut x = vec![0.0; dim];
            let mut stats = RunningStats::default();
            for _ in 0..count {
                dist.draw(&mut rng, &mut x);
                stats.push(dot(&x, xi.components()).max(0.0));
            }
            stats
        })
        .collect();
    let mut total = RunningStats::default();
    partials.iter().for_each(|p| total.merge(p));
    Ok(SupportEstimate {
        estimate: total.mean(),
        stderr: total.std_err(),
    })
}

/// Fixed set of unit directions on which support functions are compared.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet<T> {
    dim: usize,
    directions: Vec<Direction<T>>,
}

/// Result of [`hausdorff_estimate`]: a lower bound on the Hausdorff distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HausdorffEstimate<T> {
    pub lower_bound: T,
    pub directions_used: usize,
}

impl<T: Scalar> DirectionSet<T> {
    pub fn new(dim: usize, directions: Vec<Direction<T>>) -> Result<Self> {
        for d in &directions {
            check_dim(dim, d.dim())?;
        }
        Ok(Self { dim, directions })
    }

    /// Directions for comparing `a` and `b`, at most `budget` of them:
    /// `+-e_i`, `+-` the normalized sum and difference of the two diagonals,
    /// normalized generators sampled evenly from both bodies, then seeded
    /// uniform directions. The set does not depend on the order of `a`, `b`.
    pub fn for_pair(a: &Zonotope<T>, b: &Zonotope<T>, budget: usize, seed: u64) -> Result<Self> {
        check_dim(a.dim, b.dim)?;
        let dim = a.dim;
        if budget < 2 * dim {
            return Err(Error::InvalidParameter(format!(
                "direction budget {budget} is below 2 * dim = {}",
                2 * dim
            )));
        }
        let mut directions = Vec::with_capacity(budget);
        for axis in 0..dim {
            directions.push(Direction::axis(dim, axis, true));
            directions.push(Direction::axis(dim, axis, false));
        }
        let (da, db) = (a.diagonal(), b.diagonal());
        let sum: Vec<T> = da.iter().zip(&db).map(|(&x, &y)| x + y).collect();
        let diff: Vec<T> = da.iter().zip(&db).map(|(&x, &y)| x - y).collect();
        for v in [sum, diff] {
            if directions.len() + 2 > budget {
                break;
            }
            if let Ok(d) = Direction::normalize(v) {
                directions.push(d.negate());
                directions.push(d);
            }
        }
        let per_body = (budget - directions.len()) / 4;
        for z in [a, b] {
            directions.extend(strided_generator_directions(z, per_body));
        }
        let mut rng = rng::stream(seed, 0);
        while directions.len() < budget {
            directions.push(random_direction(&mut rng, dim));
        }
        Ok(Self { dim, directions })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn directions(&self) -> &[Direction<T>] {
        &self.directions
    }

    /// `max_xi |h_a(xi) - h_b(xi)|` over the set. Gaps that fall inside the
    /// rounding error of the two support evaluations count as zero, so the
    /// result stays a lower bound on the distance of the represented bodies.
    pub fn max_gap(&self, a: &Zonotope<T>, b: &Zonotope<T>) -> Result<T> {
        check_dim(self.dim, a.dim)?;
        check_dim(self.dim, b.dim)?;
        let noise = T::epsilon() * T::from_usize_lossy(self.dim + 6);
        let gaps: Vec<T> = self
            .directions
            .par_iter()
            .map(|xi| {
                let (ha, ma) = a.support_raw(xi.components());
                let (hb, mb) = b.support_raw(xi.components());
                ((ha - hb).abs() - noise * (ma + mb)).max(T::zero())
            })
            .collect();
        Ok(gaps.into_iter().fold(T::zero(), T::max))
    }
}

fn strided_generator_directions<T: Scalar>(z: &Zonotope<T>, count: usize) -> Vec<Direction<T>> {
    let nonzero: Vec<&[T]> = z
        .generators()
        .filter(|g| g.iter().any(|v| !v.is_zero()))
        .collect();
    let take = count.min(nonzero.len());
    (0..take)
        .filter_map(|i| Direction::normalize(nonzero[i * nonzero.len() / take].to_vec()).ok())
        .collect()
}

/// Direction-sampled lower bound on the Hausdorff distance between `a` and `b`.
pub fn hausdorff_estimate<T: Scalar>(
    a: &Zonotope<T>,
    b: &Zonotope<T>,
    budget: usize,
    seed: u64,
) -> Result<HausdorffEstimate<T>> {
    let set = DirectionSet::for_pair(a, b, budget, seed)?;
    Ok(HausdorffEstimate {
        lower_bound: set.max_gap(a, b)?,
        directions_used: set.len(),
    })
}
