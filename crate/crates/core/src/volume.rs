//! Volume engines for zonotopes and zonoids.
//!
//! The volume of `sum_i [0, g_i]` in dimension `d` is the sum of `|det|` over
//! all `d`-element generator subsets. [`exact_volume`] enumerates the subsets,
//! [`fast_volume_2d`] evaluates the same sum in `O(N log N)` for `d = 2`, and
//! [`mc_volume`] estimates `E|det(X_1, ..., X_d)| / d!` for a sampler.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::Sampler;
use crate::rng;
use crate::scalar::{cmp_finite, CompensatedSum, Scalar};
use crate::stats::RunningStats;
use crate::zonotope::Zonotope;

/// Default cap on the number of subsets [`exact_volume`] will enumerate.
pub const DEFAULT_COMBINATION_GUARD: u128 = 1_000_000_000;

/// Subsets per work unit. Fixed so the reduction tree never depends on the
/// number of threads.
const COMBINATION_CHUNK: u128 = 1 << 15;

/// Tuples per random stream in [`mc_volume`].
const TUPLE_BLOCK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeMethod {
    ExactEnumeration,
    #[serde(rename = "fast_2d")]
    Fast2d,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeResult<T> {
    pub value: T,
    pub method: VolumeMethod,
    /// Standard error; present only for Monte Carlo estimates.
    pub stderr: Option<T>,
    /// Determinants or sample tuples evaluated.
    pub terms: u64,
    /// Fewer generators than dimensions: the body is flat.
    pub degenerate: bool,
}

impl<T: Scalar> VolumeResult<T> {
    fn flat(method: VolumeMethod) -> Self {
        Self {
            value: T::zero(),
            method,
            stderr: None,
            terms: 0,
            degenerate: true,
        }
    }

    /// Rescales value and error, e.g. for the `N^d` homothety.
    pub fn scaled(self, factor: T) -> Self {
        Self {
            value: self.value * factor,
            stderr: self.stderr.map(|s| s * factor),
            ..self
        }
    }
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral; divide by gcd first to delay overflow.
        let num = (n - i) as u128;
        let den = (i + 1) as u128;
        let g = gcd(acc, den);
        let (a, d) = (acc / g, den / g);
        let num = num / d;
        acc = match a.checked_mul(num) {
            Some(v) => v,
            None => return u128::MAX,
        };
    }
    acc
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Determinant of the row-major `d x d` matrix in `m`. Clobbers `m` for `d >= 4`.
pub(crate) fn determinant<T: Scalar>(m: &mut [T], d: usize) -> T {
    match d {
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        3 => {
            m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
                + m[2] * (m[3] * m[7] - m[4] * m[6])
        }
        _ => lu_determinant(m, d),
    }
}

fn lu_determinant<T: Scalar>(m: &mut [T], d: usize) -> T {
    let mut det = T::one();
    for col in 0..d {
        let pivot = (col..d)
            .max_by(|&i, &j| cmp_finite(m[i * d + col].abs(), m[j * d + col].abs()))
            .expect("non-empty range");
        if m[pivot * d + col].is_zero() {
            return T::zero();
        }
        if pivot != col {
            for k in 0..d {
                m.swap(pivot * d + k, col * d + k);
            }
            det = -det;
        }
        let p = m[col * d + col];
        det = det * p;
        for row in col + 1..d {
            let f = m[row * d + col] / p;
            if f.is_zero() {
                continue;
            }
            for k in col + 1..d {
                m[row * d + k] = m[row * d + k] - f * m[col * d + k];
            }
        }
    }
    det
}

/// Writes the lexicographic combination of the given rank into `out`.
fn unrank_combination(mut rank: u128, n: usize, out: &mut [usize]) {
    let k = out.len();
    let mut next = 0;
    for (pos, slot) in out.iter_mut().enumerate() {
        let mut c = next;
        loop {
            let count = binomial(n - c - 1, k - pos - 1);
            if rank < count {
                break;
            }
            rank -= count;
            c += 1;
        }
        *slot = c;
        next = c + 1;
    }
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
        return false;
    };
    idx[i] += 1;
    for j in i + 1..k {
        idx[j] = idx[j - 1] + 1;
    }
    true
}

/// Exact volume by determinant enumeration, refusing more than
/// [`DEFAULT_COMBINATION_GUARD`] subsets.
pub fn exact_volume<T: Scalar>(z: &Zonotope<T>) -> Result<VolumeResult<T>> {
    exact_volume_with_guard(z, DEFAULT_COMBINATION_GUARD)
}

/// Exact volume with an explicit subset guard.
///
/// Subsets are visited in lexicographic order and cut into fixed chunks; each
/// chunk is summed with compensation and the chunk sums are combined in order,
/// so the result is bitwise identical for any thread count.
pub fn exact_volume_with_guard<T: Scalar>(z: &Zonotope<T>, guard: u128) -> Result<VolumeResult<T>> {
    let (n, d) = (z.len(), z.dim());
    if n < d {
        return Ok(VolumeResult::flat(VolumeMethod::ExactEnumeration));
    }
    let combinations = binomial(n, d);
    if combinations > guard {
        return Err(Error::CombinationOverflow {
            combinations,
            guard,
        });
    }
    let chunks = combinations.div_ceil(COMBINATION_CHUNK);
    let partials: Vec<CompensatedSum<T>> = (0..chunks as u64)
        .into_par_iter()
        .map(|chunk| {
            let start = chunk as u128 * COMBINATION_CHUNK;
            let count = COMBINATION_CHUNK.min(combinations - start);
            let mut idx = vec![0; d];
            unrank_combination(start, n, &mut idx);
            let mut matrix = vec![T::zero(); d * d];
            let mut acc = CompensatedSum::new();
            for step in 0..count {
                for (row, &g) in matrix.chunks_exact_mut(d).zip(&idx) {
                    row.copy_from_slice(z.generator(g));
                }
                acc.add(determinant(&mut matrix, d).abs());
                if step + 1 < count {
                    next_combination(&mut idx, n);
                }
            }
            acc
        })
        .collect();
    let mut total = CompensatedSum::new();
    partials.iter().for_each(|p| total.merge(p));
    Ok(VolumeResult {
        value: total.value(),
        method: VolumeMethod::ExactEnumeration,
        stderr: None,
        terms: u64::try_from(combinations).unwrap_or(u64::MAX),
        degenerate: false,
    })
}

/// Volume of the box `{0 <= z <= diag}`.
pub fn parallelotope_volume<T: Scalar>(diag: &[T]) -> Result<T> {
    for (coord, &v) in diag.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite { point: 0, coord });
        }
        if v < T::zero() {
            return Err(Error::NegativeComponent { point: 0, coord });
        }
    }
    Ok(diag.iter().fold(T::one(), |acc, &v| acc * v))
}

/// Planar zonotope area `sum_{i<j} |cross(g_i, g_j)|` in `O(N log N)`.
///
/// Generators are flipped into the half-plane of angles `[0, pi)` (which
/// leaves every `|cross|` unchanged) and sorted by angle. For sorted `i < j`
/// the cross product is non-negative, so the sum collapses to
/// `sum_j cross(prefix_j, g_j)` with `prefix_j = sum_{i<j} g_i`.
pub fn fast_volume_2d<T: Scalar>(z: &Zonotope<T>) -> Result<VolumeResult<T>> {
    if z.dim() != 2 {
        return Err(Error::NotTwoDimensional(z.dim()));
    }
    if z.len() < 2 {
        return Ok(VolumeResult::flat(VolumeMethod::Fast2d));
    }
    let mut gens: Vec<(T, T)> = z
        .generators()
        .filter(|g| !(g[0].is_zero() && g[1].is_zero()))
        .map(|g| {
            let (x, y) = (g[0], g[1]);
            if y < T::zero() || (y.is_zero() && x < T::zero()) {
                (-x, -y)
            } else {
                (x, y)
            }
        })
        .collect();
    gens.sort_by(|a, b| cmp_finite(a.1.atan2(a.0), b.1.atan2(b.0)));
    let mut px = CompensatedSum::new();
    let mut py = CompensatedSum::new();
    let mut total = CompensatedSum::new();
    for &(x, y) in &gens {
        total.add(px.value() * y - py.value() * x);
        px.add(x);
        py.add(y);
    }
    Ok(VolumeResult {
        value: total.value().max(T::zero()),
        method: VolumeMethod::Fast2d,
        stderr: None,
        terms: z.len() as u64,
        degenerate: false,
    })
}

/// Monte Carlo estimate of the zonoid volume `E|det(X_1..X_d)| / d!`.
///
/// For an empirical sampler (with-replacement tuples) this is an unbiased
/// estimate of the volume of the mean zonotope; repeated rows give `det = 0`
/// exactly as the missing subsets do in the exact sum.
pub fn mc_volume<S: Sampler + ?Sized>(
    dist: &S,
    d: usize,
    tuples: usize,
    seed: u64,
) -> Result<VolumeResult<f64>> {
    if dist.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: dist.dim(),
        });
    }
    if tuples < 30 {
        return Err(Error::InvalidParameter(format!(
            "Monte Carlo volume needs at least 30 tuples, got {tuples}"
        )));
    }
    let blocks = tuples.div_ceil(TUPLE_BLOCK);
    let partials: Vec<RunningStats> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let count = TUPLE_BLOCK.min(tuples - b * TUPLE_BLOCK);
            let mut rng = rng::stream(seed, b as u64);
            let mut matrix = vec![0.0; d * d];
            let mut stats = RunningStats::default();
            for _ in 0..count {
                for row in matrix.chunks_exact_mut(d) {
                    dist.draw(&mut rng, row);
                }
                stats.push(determinant(&mut matrix, d).abs());
            }
            stats
        })
        .collect();
    let mut total = RunningStats::default();
    partials.iter().for_each(|p| total.merge(p));
    let factorial: f64 = (1..=d).map(|k| k as f64).product();
    Ok(VolumeResult {
        value: total.mean() / factorial,
        method: VolumeMethod::MonteCarlo,
        stderr: Some(total.std_err() / factorial),
        terms: tuples as u64,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(128, 3), 341_376);
        assert_eq!(binomial(512, 3), 22_238_720);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(10_000, 5000), u128::MAX);
    }

    #[test]
    fn unranking_matches_successor() {
        let (n, k) = (9, 4);
        let mut idx = vec![0, 1, 2, 3];
        let mut out = vec![0; k];
        for rank in 0..binomial(n, k) {
            unrank_combination(rank, n, &mut out);
            assert_eq!(out, idx, "rank {rank}");
            next_combination(&mut idx, n);
        }
        assert!(!next_combination(&mut [5, 6, 7, 8], n));
    }

    #[test]
    fn lu_matches_closed_forms() {
        let m: [f64; 9] = [2.0, -1.0, 0.5, 3.0, 1.0, 4.0, -2.0, 0.0, 1.5];
        let closed = determinant(&mut m.clone(), 3);
        let lu = lu_determinant(&mut m.clone(), 3);
        assert!((closed - lu).abs() < 1e-12);
        let mut perm4 = [
            0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0,
        ];
        assert_eq!(determinant(&mut perm4, 4), 1.0);
    }

    #[test]
    fn small_instances() {
        let z = Zonotope::from_generators(2, [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]).unwrap();
        assert_eq!(exact_volume(&z).unwrap().value, 3.0);
        assert_eq!(fast_volume_2d(&z).unwrap().value, 3.0);
        let line = Zonotope::from_generators(2, [[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]).unwrap();
        assert_eq!(exact_volume(&line).unwrap().value, 0.0);
        let short = Zonotope::from_generators(3, [[1.0, 0.0, 0.0]]).unwrap();
        let r = exact_volume(&short).unwrap();
        assert!(r.degenerate && r.value == 0.0);
    }

    #[test]
    fn guard_is_enforced() {
        let gens: Vec<[f64; 3]> = (0..50).map(|i| [i as f64, 1.0, 2.0]).collect();
        let z = Zonotope::from_generators(3, gens).unwrap();
        assert_eq!(
            exact_volume_with_guard(&z, 100),
            Err(Error::CombinationOverflow {
                combinations: 19_600,
                guard: 100
            })
        );
    }

    #[test]
    fn parallelotope_cases() {
        assert_eq!(parallelotope_volume(&[2.0, 2.0]).unwrap(), 4.0);
        assert_eq!(parallelotope_volume(&[1.0; 5]).unwrap(), 1.0);
        assert_eq!(parallelotope_volume(&[2.0, 0.0]).unwrap(), 0.0);
        assert!(parallelotope_volume(&[1.0, -1.0]).is_err());
    }
}
