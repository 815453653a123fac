//! Empirical measures, reference distributions and seeded sampling.

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Serialize, Serializer};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::rng::{self, StreamRng, SAMPLE_BLOCK};
use crate::scalar::{CompensatedSum, Scalar};

/// Uniform atomic measure `(1/N) * sum of Dirac masses` on a finite point set
/// in the non-negative orthant.
///
/// Points are stored row-major in one buffer. Weights are implicit; duplicate
/// and zero points are kept as given.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure<T> {
    coords: Vec<T>,
    dim: usize,
}

impl<T: Scalar> EmpiricalMeasure<T> {
    /// Builds a measure from equal-length rows of finite, non-negative values.
    pub fn from_rows<R: AsRef<[T]>>(rows: impl IntoIterator<Item = R>) -> Result<Self> {
        let mut coords = Vec::new();
        let mut dim = None;
        for row in rows {
            let row = row.as_ref();
            let expected = *dim.get_or_insert(row.len());
            if row.len() != expected {
                return Err(Error::DimensionMismatch {
                    expected,
                    found: row.len(),
                });
            }
            coords.extend_from_slice(row);
        }
        match dim {
            None => Err(Error::EmptyInput),
            Some(0) => Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            }),
            Some(dim) => Self::from_flat(coords, dim),
        }
    }

    /// Builds a measure from a row-major buffer of `N * dim` values.
    pub fn from_flat(coords: Vec<T>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if coords.is_empty() {
            return Err(Error::EmptyInput);
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        for (i, &v) in coords.iter().enumerate() {
            let (point, coord) = (i / dim, i % dim);
            if !v.is_finite() {
                return Err(Error::NonFinite { point, coord });
            }
            if v < T::zero() {
                return Err(Error::NegativeComponent { point, coord });
            }
        }
        Ok(Self { coords, dim })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> std::slice::ChunksExact<'_, T> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[T] {
        &self.coords
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.points().map(<[T]>::to_vec).collect()
    }

    /// Coordinate-wise sum of all points (the main diagonal of the total zonotope).
    pub fn total(&self) -> Vec<T> {
        (0..self.dim)
            .map(|k| compensated_column(self, k).value())
            .collect()
    }

    /// First moment `(1/N) * sum y_n`.
    pub fn mean(&self) -> Vec<T> {
        let n = T::from_usize_lossy(self.len());
        self.total().into_iter().map(|s| s / n).collect()
    }

    fn univariate_values(&self) -> Result<&[T]> {
        if self.dim != 1 {
            return Err(Error::NotUnivariate(self.dim));
        }
        Ok(&self.coords)
    }

    /// Order statistics of a univariate measure.
    pub fn sorted_values(&self) -> Result<Vec<T>> {
        let mut values = self.univariate_values()?.to_vec();
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        Ok(values)
    }

    /// Left-continuous quantile `inf { x : F(x) >= s }`: the smallest order
    /// statistic `x_(k)` with `k/N >= s`.
    pub fn quantile(&self, s: f64) -> Result<T> {
        check_level(s)?;
        let sorted = self.sorted_values()?;
        Ok(sorted[quantile_rank(sorted.len(), s)])
    }

    /// Lifted measure: `{x_i}` becomes `{(1, x_i)}`.
    pub fn lift(&self) -> Result<Self> {
        let values = self.univariate_values()?;
        let coords = values.iter().flat_map(|&x| [T::one(), x]).collect();
        Ok(Self { coords, dim: 2 })
    }

    /// Converts the coordinates to another scalar type.
    pub fn cast<U: Scalar>(&self) -> EmpiricalMeasure<U> {
        EmpiricalMeasure {
            coords: self
                .coords
                .iter()
                .map(|v| U::from_f64(v.to_f64_lossy()).unwrap_or_else(U::nan))
                .collect(),
            dim: self.dim,
        }
    }
}

fn compensated_column<T: Scalar>(mu: &EmpiricalMeasure<T>, k: usize) -> CompensatedSum<T> {
    mu.points().map(|p| p[k]).collect()
}

fn check_level(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange(s))
    }
}

/// Zero-based index of the smallest `k` (1-based) with `k/N >= s`.
pub(crate) fn quantile_rank(n: usize, s: f64) -> usize {
    let nf = n as f64;
    let mut k = ((s * nf).ceil() as usize).clamp(1, n);
    while k > 1 && (k - 1) as f64 / nf >= s {
        k -= 1;
    }
    while k < n && (k as f64 / nf) < s {
        k += 1;
    }
    k - 1
}

/// Reads a CSV dataset: one point per row, numeric columns, `.` decimals.
///
/// Rows and columns in errors are 1-based; rows count physical lines.
pub fn read_csv<T: Scalar, R: Read>(reader: R, has_header: bool) -> Result<EmpiricalMeasure<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut coords: Vec<T> = Vec::new();
    let mut dim: Option<usize> = None;
    let mut record = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                let row = e.position().map_or(0, |p| p.line());
                return Err(Error::Parse {
                    row,
                    column: 0,
                    message: e.to_string(),
                });
            }
        }
        let row = record.position().map_or(0, |p| p.line());
        let expected = *dim.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::Parse {
                row,
                column: (record.len().min(expected) + 1) as u64,
                message: format!("expected {expected} fields, found {}", record.len()),
            });
        }
        for (j, field) in record.iter().enumerate() {
            let column = (j + 1) as u64;
            let err = |message: String| Error::Parse {
                row,
                column,
                message,
            };
            let value: f64 = field
                .parse()
                .map_err(|_| err(format!("not a number: {field:?}")))?;
            if !value.is_finite() {
                return Err(err(format!("non-finite value {field:?}")));
            }
            if value < 0.0 {
                return Err(err(format!("negative component {value}")));
            }
            coords.push(T::lit(value));
        }
    }
    match dim {
        None => Err(Error::EmptyInput),
        Some(d) => EmpiricalMeasure::from_flat(coords, d),
    }
}

pub fn read_csv_path<T: Scalar>(
    path: impl AsRef<Path>,
    has_header: bool,
) -> Result<EmpiricalMeasure<T>> {
    let file = std::fs::File::open(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    read_csv(std::io::BufReader::new(file), has_header)
}

/// Shape of a reference distribution. Construct through
/// [`ReferenceDistribution`] so parameters are validated.
#[derive(Debug, Clone, PartialEq)]
pub enum DistributionKind {
    Exponential { rate: f64 },
    Uniform { low: f64, high: f64 },
    LogNormal { location: f64, scale: f64 },
    DiracPoint { point: Vec<f64> },
    ProductOfUnivariates { factors: Vec<ReferenceDistribution> },
    LiftOfUnivariate { inner: Box<ReferenceDistribution> },
}

/// A distribution on the non-negative orthant with finite first moment.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceDistribution {
    kind: DistributionKind,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("valid normal parameters")
}

impl ReferenceDistribution {
    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(invalid(format!(
                "exponential rate must be positive, got {rate}"
            )));
        }
        Ok(Self {
            kind: DistributionKind::Exponential { rate },
        })
    }

    pub fn uniform(low: f64, high: f64) -> Result<Self> {
        if !(low.is_finite() && high.is_finite() && 0.0 <= low && low < high) {
            return Err(invalid(format!(
                "uniform bounds need 0 <= a < b, got ({low}, {high})"
            )));
        }
        Ok(Self {
            kind: DistributionKind::Uniform { low, high },
        })
    }

    pub fn lognormal(location: f64, scale: f64) -> Result<Self> {
        if !(location.is_finite() && scale.is_finite() && scale > 0.0) {
            return Err(invalid(format!(
                "lognormal needs finite location and positive scale, got ({location}, {scale})"
            )));
        }
        Ok(Self {
            kind: DistributionKind::LogNormal { location, scale },
        })
    }

    pub fn dirac(point: Vec<f64>) -> Result<Self> {
        if point.is_empty() {
            return Err(invalid("dirac point needs at least one coordinate"));
        }
        if point.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid(
                "dirac point coordinates must be finite and non-negative",
            ));
        }
        Ok(Self {
            kind: DistributionKind::DiracPoint { point },
        })
    }

    pub fn product(factors: Vec<ReferenceDistribution>) -> Result<Self> {
        if factors.is_empty() {
            return Err(invalid("product needs at least one factor"));
        }
        if let Some(f) = factors.iter().find(|f| f.dim() != 1) {
            return Err(Error::NotUnivariate(f.dim()));
        }
        Ok(Self {
            kind: DistributionKind::ProductOfUnivariates { factors },
        })
    }

    /// `delta_1 (x) inner`: first coordinate is 1, second drawn from `inner`.
    pub fn lift(inner: ReferenceDistribution) -> Result<Self> {
        if inner.dim() != 1 {
            return Err(Error::NotUnivariate(inner.dim()));
        }
        Ok(Self {
            kind: DistributionKind::LiftOfUnivariate {
                inner: Box::new(inner),
            },
        })
    }

    pub fn kind(&self) -> &DistributionKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            DistributionKind::Exponential { .. }
            | DistributionKind::Uniform { .. }
            | DistributionKind::LogNormal { .. } => 1,
            DistributionKind::DiracPoint { point } => point.len(),
            DistributionKind::ProductOfUnivariates { factors } => factors.len(),
            DistributionKind::LiftOfUnivariate { .. } => 2,
        }
    }

    pub fn is_univariate(&self) -> bool {
        self.dim() == 1
    }

    /// Closed-form first moment.
    pub fn mean(&self) -> Vec<f64> {
        match &self.kind {
            DistributionKind::Exponential { rate } => vec![1.0 / rate],
            DistributionKind::Uniform { low, high } => vec![0.5 * (low + high)],
            DistributionKind::LogNormal { location, scale } => {
                vec![(location + 0.5 * scale * scale).exp()]
            }
            DistributionKind::DiracPoint { point } => point.clone(),
            DistributionKind::ProductOfUnivariates { factors } => {
                factors.iter().flat_map(|f| f.mean()).collect()
            }
            DistributionKind::LiftOfUnivariate { inner } => {
                let mut m = vec![1.0];
                m.extend(inner.mean());
                m
            }
        }
    }

    /// Quantile function of a univariate distribution.
    pub fn quantile(&self, s: f64) -> Result<f64> {
        check_level(s)?;
        self.univariate_quantile(s)
    }

    fn univariate_quantile(&self, s: f64) -> Result<f64> {
        match &self.kind {
            DistributionKind::Exponential { rate } => Ok(-(-s).ln_1p() / rate),
            DistributionKind::Uniform { low, high } => Ok(low + (high - low) * s),
            DistributionKind::LogNormal { location, scale } => {
                Ok((location + scale * standard_normal().inverse_cdf(s)).exp())
            }
            DistributionKind::DiracPoint { point } if point.len() == 1 => Ok(point[0]),
            DistributionKind::ProductOfUnivariates { factors } if factors.len() == 1 => {
                factors[0].univariate_quantile(s)
            }
            _ => Err(Error::NotUnivariate(self.dim())),
        }
    }

    /// `int_0^t Q(s) ds` for a univariate distribution, in closed form.
    pub fn partial_quantile_integral(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::OutOfRange(t));
        }
        match &self.kind {
            DistributionKind::Exponential { rate } => {
                let tail = if t < 1.0 {
                    (1.0 - t) * (-t).ln_1p()
                } else {
                    0.0
                };
                Ok((t + tail) / rate)
            }
            DistributionKind::Uniform { low, high } => Ok(low * t + 0.5 * (high - low) * t * t),
            DistributionKind::LogNormal { scale, .. } => {
                let mean = self.mean()[0];
                Ok(if t <= 0.0 {
                    0.0
                } else if t >= 1.0 {
                    mean
                } else {
                    let n = standard_normal();
                    mean * n.cdf(n.inverse_cdf(t) - scale)
                })
            }
            DistributionKind::DiracPoint { point } if point.len() == 1 => Ok(point[0] * t),
            DistributionKind::ProductOfUnivariates { factors } if factors.len() == 1 => {
                factors[0].partial_quantile_integral(t)
            }
            _ => Err(Error::NotUnivariate(self.dim())),
        }
    }

    /// Classical (pairwise) Gini coefficient of a univariate distribution.
    pub fn classical_gini(&self) -> Result<f64> {
        match &self.kind {
            DistributionKind::Exponential { .. } => Ok(0.5),
            DistributionKind::Uniform { low, high } => Ok((high - low) / (3.0 * (high + low))),
            DistributionKind::LogNormal { scale, .. } => {
                Ok(2.0 * standard_normal().cdf(scale / std::f64::consts::SQRT_2) - 1.0)
            }
            DistributionKind::DiracPoint { point } if point.len() == 1 => {
                if point[0] > 0.0 {
                    Ok(0.0)
                } else {
                    Err(Error::DegenerateMean { axis: 0 })
                }
            }
            DistributionKind::ProductOfUnivariates { factors } if factors.len() == 1 => {
                factors[0].classical_gini()
            }
            _ => Err(Error::NotUnivariate(self.dim())),
        }
    }

    /// Gini index of the zonoid when a closed form is known.
    pub fn closed_form_gini(&self) -> Option<f64> {
        if self.mean().iter().any(|&m| m <= 0.0) {
            return None;
        }
        match &self.kind {
            _ if self.dim() == 1 => Some(1.0),
            DistributionKind::DiracPoint { .. } => Some(0.0),
            DistributionKind::LiftOfUnivariate { inner } => inner.classical_gini().ok(),
            _ => None,
        }
    }

    /// `n` i.i.d. draws. Identical `(self, n, seed)` gives identical output,
    /// independent of the rayon pool size.
    pub fn sample(&self, n: usize, seed: u64) -> Result<EmpiricalMeasure<f64>> {
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        let dim = self.dim();
        let blocks = n.div_ceil(SAMPLE_BLOCK);
        let parts: Vec<Vec<f64>> = (0..blocks)
            .into_par_iter()
            .map(|b| {
                let count = SAMPLE_BLOCK.min(n - b * SAMPLE_BLOCK);
                let mut rng = rng::stream(seed, b as u64);
                let mut out = vec![0.0; count * dim];
                for p in out.chunks_exact_mut(dim) {
                    self.draw(&mut rng, p);
                }
                out
            })
            .collect();
        EmpiricalMeasure::from_flat(parts.concat(), dim)
    }
}

/// Anything that produces i.i.d. points in a fixed dimension.
pub trait Sampler: Sync {
    fn dim(&self) -> usize;
    fn draw(&self, rng: &mut StreamRng, out: &mut [f64]);
}

impl Sampler for ReferenceDistribution {
    fn dim(&self) -> usize {
        ReferenceDistribution::dim(self)
    }

    fn draw(&self, rng: &mut StreamRng, out: &mut [f64]) {
        match &self.kind {
            DistributionKind::DiracPoint { point } => out.copy_from_slice(point),
            DistributionKind::ProductOfUnivariates { factors } => {
                for (f, slot) in factors.iter().zip(out.chunks_exact_mut(1)) {
                    f.draw(rng, slot);
                }
            }
            DistributionKind::LiftOfUnivariate { inner } => {
                out[0] = 1.0;
                inner.draw(rng, &mut out[1..]);
            }
            _ => {
                let u = rng::open_unit(rng);
                out[0] = self.univariate_quantile(u).expect("univariate kind");
            }
        }
    }
}

/// Resampling with replacement from the atoms.
impl<T: Scalar> Sampler for EmpiricalMeasure<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn draw(&self, rng: &mut StreamRng, out: &mut [f64]) {
        let i = rng::index_below(rng, self.len());
        for (o, v) in out.iter_mut().zip(self.point(i)) {
            *o = v.to_f64_lossy();
        }
    }
}

impl fmt::Display for ReferenceDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            DistributionKind::Exponential { rate } => write!(f, "exp:{rate}"),
            DistributionKind::Uniform { low, high } => write!(f, "unif:{low}:{high}"),
            DistributionKind::LogNormal { location, scale } => {
                write!(f, "lognorm:{location}:{scale}")
            }
            DistributionKind::DiracPoint { point } => {
                let parts: Vec<String> = point.iter().map(f64::to_string).collect();
                write!(f, "dirac:{}", parts.join(","))
            }
            DistributionKind::ProductOfUnivariates { factors } => {
                let parts: Vec<String> = factors.iter().map(ToString::to_string).collect();
                write!(f, "prod:{}", parts.join(";"))
            }
            DistributionKind::LiftOfUnivariate { inner } => write!(f, "lift:{inner}"),
        }
    }
}

impl Serialize for ReferenceDistribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

fn parse_number(text: &str) -> Result<f64> {
    text.trim()
        .parse()
        .map_err(|_| invalid(format!("not a number: {text:?}")))
}

/// Parses `exp:RATE | unif:A:B | lognorm:M:S | dirac:V1,...,Vd |
/// lift:<univariate> | prod:<spec>;<spec>;...`.
impl FromStr for ReferenceDistribution {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let (head, rest) = text
            .split_once(':')
            .ok_or_else(|| invalid(format!("distribution spec {text:?} has no ':'")))?;
        match head {
            "exp" => Self::exponential(parse_number(rest)?),
            "unif" => {
                let (a, b) = rest
                    .split_once(':')
                    .ok_or_else(|| invalid("unif needs unif:A:B"))?;
                Self::uniform(parse_number(a)?, parse_number(b)?)
            }
            "lognorm" => {
                let (m, s) = rest
                    .split_once(':')
                    .ok_or_else(|| invalid("lognorm needs lognorm:M:S"))?;
                Self::lognormal(parse_number(m)?, parse_number(s)?)
            }
            "dirac" => Self::dirac(rest.split(',').map(parse_number).collect::<Result<_>>()?),
            "lift" => Self::lift(rest.parse()?),
            "prod" => Self::product(rest.split(';').map(str::parse).collect::<Result<_>>()?),
            other => Err(invalid(format!("unknown distribution {other:?}"))),
        }
    }
}
