//! Seeded synthetic dose deposition matrices.
//!
//! A [`MatrixProfile`] describes a matrix family by its shape, non-zero
//! ratio, empty-row fraction and a log-normal row-length law. [`generate`]
//! draws one member of that family. The draw sequence is fixed so the same
//! profile produces the same matrix on every platform:
//!
//! * The generator is xoshiro256** seeded through SplitMix64
//!   (`Xoshiro256StarStar::seed_from_u64`).
//! * `uniform()` is `(next_u64() >> 11) * 2^-53`, in `[0, 1)`.
//! * Per row, in row order: one uniform decides emptiness
//!   (`u < empty_row_fraction`). A non-empty row then draws two uniforms for
//!   a Box-Muller normal `z = sqrt(-2 ln(1 - u1)) cos(2 pi u2)`, takes the
//!   length `round(exp(mu + sigma z))` clamped to `[1, cols]`, draws a window
//!   centre `floor(u * cols)`, picks distinct offsets inside the window with
//!   Floyd's algorithm (`floor(u * (j + 1))` per step), then draws one value
//!   per sorted column, `2^-14 + (1 - 2^-14) u`, rounded to binary16.
//!
//! The window spans `max(locality_window, length)` columns centred on the
//! drawn column and shifted inward at the matrix edges.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use thiserror::Error;

use crate::half::{encode_half, HalfBits};
use crate::sparse::{ColIndices, CsrMatrix, DenseVector, IndexWidth, SparseError, Values};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error(
        "inconsistent profile: target nnz ratio {target} but the row-length law implies {expected:.6}"
    )]
    InconsistentProfile { target: f64, expected: f64 },
    #[error("unknown profile {0:?} (built-in: liver-desk, prostate-desk)")]
    UnknownProfile(String),
    #[error("profile file {path}: {message}")]
    ProfileFile { path: String, message: String },
    #[error(transparent)]
    Sparse(#[from] SparseError),
}

/// Relative tolerance between the target nnz ratio and the ratio implied by
/// the empty-row fraction and the row-length law.
pub const RATIO_TOLERANCE: f64 = 0.10;

/// Smallest positive normal binary16 value; lower bound of generated doses.
const MIN_DOSE: f64 = 1.0 / 16384.0;

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixProfile {
    pub rows: usize,
    pub cols: usize,
    pub target_nnz_ratio: f64,
    pub empty_row_fraction: f64,
    pub row_length_log_mean: f64,
    pub row_length_log_sigma: f64,
    pub locality_window: usize,
    pub seed: u64,
}

impl MatrixProfile {
    /// Liver beam 1 shrunk to 1/100 of the rows and 1/10 of the columns,
    /// keeping the 0.73% nnz ratio, ~70% empty rows and 5.6% of non-empty
    /// rows below 32 entries.
    pub fn liver_desk() -> Self {
        MatrixProfile {
            rows: 29_700,
            cols: 6_800,
            target_nnz_ratio: 0.0073,
            empty_row_fraction: 0.70,
            row_length_log_mean: 4.766,
            row_length_log_sigma: 0.828,
            locality_window: 2_048,
            seed: 1,
        }
    }

    /// Prostate beam 1 shrunk the same way: 1.81% nnz ratio, ~70% empty
    /// rows, 14.2% of non-empty rows below 32 entries.
    pub fn prostate_desk() -> Self {
        MatrixProfile {
            rows: 10_300,
            cols: 509,
            target_nnz_ratio: 0.0181,
            empty_row_fraction: 0.70,
            row_length_log_mean: 3.4714,
            row_length_log_sigma: 0.02,
            locality_window: 192,
            seed: 1,
        }
    }

    pub fn builtin(name: &str) -> Result<Self, GenError> {
        match name {
            "liver-desk" => Ok(Self::liver_desk()),
            "prostate-desk" => Ok(Self::prostate_desk()),
            other => Err(GenError::UnknownProfile(other.to_string())),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let fail = |msg: String| Err(GenError::InvalidProfile(msg));
        if self.rows == 0 || self.cols == 0 {
            return fail(format!(
                "rows and cols must be at least 1, got {}x{}",
                self.rows, self.cols
            ));
        }
        if self.rows as u64 > u32::MAX as u64 {
            return fail(format!(
                "{} rows exceed the supported 32-bit range",
                self.rows
            ));
        }
        for (name, v) in [
            ("target_nnz_ratio", self.target_nnz_ratio),
            ("empty_row_fraction", self.empty_row_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return fail(format!("{name} = {v} outside [0, 1]"));
            }
        }
        if !self.row_length_log_mean.is_finite() {
            return fail("row_length_log_mean must be finite".into());
        }
        if !(self.row_length_log_sigma >= 0.0 && self.row_length_log_sigma.is_finite()) {
            return fail(format!(
                "row_length_log_sigma = {} must be >= 0",
                self.row_length_log_sigma
            ));
        }
        if self.locality_window == 0 || self.locality_window > self.cols {
            return fail(format!(
                "locality_window = {} outside [1, {}]",
                self.locality_window, self.cols
            ));
        }
        Ok(())
    }

    /// Expected length of a non-empty row after rounding and clamping,
    /// by midpoint quadrature over the standard normal.
    pub fn expected_row_length(&self) -> f64 {
        const STEPS: usize = 40_000;
        const SPAN: f64 = 10.0;
        if self.row_length_log_sigma == 0.0 {
            return self.length_for(0.0) as f64;
        }
        let dz = 2.0 * SPAN / STEPS as f64;
        let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        (0..STEPS)
            .map(|k| {
                let z = -SPAN + (k as f64 + 0.5) * dz;
                self.length_for(z) as f64 * norm * (-0.5 * z * z).exp() * dz
            })
            .sum()
    }

    pub fn expected_nnz_ratio(&self) -> f64 {
        (1.0 - self.empty_row_fraction) * self.expected_row_length() / self.cols as f64
    }

    /// Fail unless the target ratio is within [`RATIO_TOLERANCE`] of the
    /// ratio the other parameters imply.
    pub fn check_consistency(&self) -> Result<(), GenError> {
        let expected = if self.empty_row_fraction >= 1.0 {
            0.0
        } else {
            self.expected_nnz_ratio()
        };
        let target = self.target_nnz_ratio;
        let consistent = if target == 0.0 {
            expected == 0.0
        } else {
            ((expected - target) / target).abs() <= RATIO_TOLERANCE
        };
        if consistent {
            Ok(())
        } else {
            Err(GenError::InconsistentProfile { target, expected })
        }
    }

    fn length_for(&self, z: f64) -> usize {
        let raw = (self.row_length_log_mean + self.row_length_log_sigma * z)
            .exp()
            .round();
        if raw.is_nan() || raw < 1.0 {
            1
        } else if raw >= self.cols as f64 {
            self.cols
        } else {
            raw as usize
        }
    }

    /// Parse a `key = value` profile. `#` starts a comment. Keys not
    /// present keep the values of `base`.
    pub fn parse_config(text: &str, base: MatrixProfile) -> Result<Self, String> {
        let mut p = base;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value", lineno + 1))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |e: &dyn fmt::Display| format!("line {}: {key}: {e}", lineno + 1);
            match key {
                "rows" => p.rows = parse(value).map_err(|e| bad(&e))?,
                "cols" => p.cols = parse(value).map_err(|e| bad(&e))?,
                "target_nnz_ratio" => p.target_nnz_ratio = parse(value).map_err(|e| bad(&e))?,
                "empty_row_fraction" => p.empty_row_fraction = parse(value).map_err(|e| bad(&e))?,
                "row_length_log_mean" => {
                    p.row_length_log_mean = parse(value).map_err(|e| bad(&e))?
                }
                "row_length_log_sigma" => {
                    p.row_length_log_sigma = parse(value).map_err(|e| bad(&e))?
                }
                "locality_window" => p.locality_window = parse(value).map_err(|e| bad(&e))?,
                "seed" => p.seed = parse(value).map_err(|e| bad(&e))?,
                other => return Err(format!("line {}: unknown key {other:?}", lineno + 1)),
            }
        }
        Ok(p)
    }

    /// Load a profile file on top of `base`.
    pub fn load(path: &Path, base: MatrixProfile) -> Result<Self, GenError> {
        let file_err = |message: String| GenError::ProfileFile {
            path: path.display().to_string(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| file_err(e.to_string()))?;
        Self::parse_config(&text, base).map_err(file_err)
    }

    pub fn to_config(&self) -> String {
        format!(
            "rows = {}\ncols = {}\ntarget_nnz_ratio = {}\nempty_row_fraction = {}\n\
             row_length_log_mean = {}\nrow_length_log_sigma = {}\nlocality_window = {}\nseed = {}\n",
            self.rows,
            self.cols,
            self.target_nnz_ratio,
            self.empty_row_fraction,
            self.row_length_log_mean,
            self.row_length_log_sigma,
            self.locality_window,
            self.seed
        )
    }
}

fn parse<T: FromStr>(s: &str) -> Result<T, T::Err> {
    s.parse()
}

/// Portable sampling on top of xoshiro256**.
struct Sampler(Xoshiro256StarStar);

impl Sampler {
    fn new(seed: u64) -> Self {
        Sampler(Xoshiro256StarStar::seed_from_u64(seed))
    }

    #[inline]
    fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Integer in `[0, n)`.
    #[inline]
    fn below(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }

    fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

/// `n` doubles uniform in `[0, 1)` from the same pinned stream as the
/// generator.
pub fn seeded_uniform_vector(n: usize, seed: u64) -> DenseVector {
    let mut rng = Sampler::new(seed);
    DenseVector::from((0..n).map(|_| rng.uniform()).collect::<Vec<_>>())
}

/// Draw a matrix from `p`. Values are binary16; column indices use the
/// narrowest width that fits `p.cols`.
pub fn generate(p: &MatrixProfile) -> Result<CsrMatrix, GenError> {
    p.validate()?;
    p.check_consistency()?;

    let mut rng = Sampler::new(p.seed);
    let mut row_ptr = Vec::with_capacity(p.rows + 1);
    row_ptr.push(0u64);
    let mut cols: Vec<u32> = Vec::new();
    let mut values: Vec<HalfBits> = Vec::new();
    let mut marks = vec![false; p.cols];

    for _ in 0..p.rows {
        if rng.uniform() >= p.empty_row_fraction {
            let len = p.length_for(rng.normal());
            let width = p.locality_window.max(len).min(p.cols);
            let centre = rng.below(p.cols);
            let start = centre.saturating_sub(width / 2).min(p.cols - width);

            // Floyd: `len` distinct offsets from [0, width).
            let window = &mut marks[start..start + width];
            for j in width - len..width {
                let t = rng.below(j + 1);
                if window[t] {
                    window[j] = true;
                } else {
                    window[t] = true;
                }
            }
            for (off, m) in window.iter_mut().enumerate() {
                if *m {
                    *m = false;
                    cols.push((start + off) as u32);
                    let dose = MIN_DOSE + (1.0 - MIN_DOSE) * rng.uniform();
                    values.push(encode_half(dose).expect("dose is finite"));
                }
            }
        }
        row_ptr.push(cols.len() as u64);
    }

    let col_indices = match IndexWidth::narrowest_for(p.cols) {
        IndexWidth::U16 => ColIndices::U16(cols.into_iter().map(|c| c as u16).collect()),
        IndexWidth::U32 => ColIndices::U32(cols),
    };
    Ok(CsrMatrix::new(
        p.rows,
        p.cols,
        row_ptr,
        col_indices,
        Values::Half(values),
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Straight transcription of SplitMix64 and xoshiro256** from their
    /// published reference code, to pin the generator stream.
    fn reference_stream(seed: u64, n: usize) -> Vec<u64> {
        let mut sm = seed;
        let mut splitmix = || {
            sm = sm.wrapping_add(0x9E3779B97F4A7C15);
            let mut z = sm;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
            z ^ (z >> 31)
        };
        let mut s = [splitmix(), splitmix(), splitmix(), splitmix()];
        (0..n)
            .map(|_| {
                let result = s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
                let t = s[1] << 17;
                s[2] ^= s[0];
                s[3] ^= s[1];
                s[1] ^= s[2];
                s[0] ^= s[3];
                s[2] ^= t;
                s[3] = s[3].rotate_left(45);
                result
            })
            .collect()
    }

    #[test]
    fn generator_stream_is_pinned() {
        for seed in [0, 1, 7, u64::MAX] {
            let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
            let ours: Vec<u64> = (0..16).map(|_| rng.next_u64()).collect();
            assert_eq!(ours, reference_stream(seed, 16), "seed {seed}");
        }
    }

    #[test]
    fn uniform_range() {
        let mut s = Sampler::new(3);
        for _ in 0..10_000 {
            let u = s.uniform();
            assert!((0.0..1.0).contains(&u));
            assert!(s.below(7) < 7);
        }
    }

    fn tiny_profile() -> MatrixProfile {
        MatrixProfile {
            rows: 2_000,
            cols: 300,
            target_nnz_ratio: 0.3 * 20.0 / 300.0,
            empty_row_fraction: 0.7,
            row_length_log_mean: 20f64.ln(),
            row_length_log_sigma: 0.0,
            locality_window: 40,
            seed: 11,
        }
    }

    #[test]
    fn all_empty_profile() {
        let p = MatrixProfile {
            empty_row_fraction: 1.0,
            target_nnz_ratio: 0.0,
            ..tiny_profile()
        };
        let m = generate(&p).unwrap();
        assert_eq!(m.nnz(), 0);
        assert_eq!(m.rows(), 2_000);
    }

    #[test]
    fn fixed_length_rows_and_window() {
        let m = generate(&tiny_profile()).unwrap();
        assert!(m.validate().is_valid());
        for r in 0..m.rows() {
            let range = m.row_range(r);
            assert!(range.is_empty() || range.len() == 20);
            if let (Some(first), Some(last)) = (range.clone().next(), range.clone().last()) {
                assert!(m.col_indices().get(last) - m.col_indices().get(first) < 40);
            }
            for j in range {
                let v = m.values().get(j);
                assert!((MIN_DOSE..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn rows_longer_than_window_widen_it() {
        let p = MatrixProfile {
            cols: 50,
            target_nnz_ratio: 0.3 * 45.0 / 50.0,
            row_length_log_mean: 45f64.ln(),
            locality_window: 8,
            ..tiny_profile()
        };
        let m = generate(&p).unwrap();
        assert!(m.validate().is_valid());
        assert!((0..m.rows()).all(|r| matches!(m.row_len(r), 0 | 45)));
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let p = MatrixProfile::prostate_desk();
        let a = generate(&p).unwrap();
        assert_eq!(a, generate(&p).unwrap());
        assert_ne!(a, generate(&p.clone().with_seed(2)).unwrap());
    }

    #[test]
    fn inconsistent_profiles_rejected() {
        let p = MatrixProfile {
            target_nnz_ratio: 0.5,
            ..tiny_profile()
        };
        assert!(matches!(
            generate(&p),
            Err(GenError::InconsistentProfile { .. })
        ));
        let p = MatrixProfile {
            target_nnz_ratio: 0.0,
            ..tiny_profile()
        };
        assert!(matches!(
            generate(&p),
            Err(GenError::InconsistentProfile { .. })
        ));
        assert!(MatrixProfile::liver_desk().check_consistency().is_ok());
        assert!(MatrixProfile::prostate_desk().check_consistency().is_ok());
    }

    #[test]
    fn invalid_profiles_rejected() {
        for p in [
            MatrixProfile {
                rows: 0,
                ..tiny_profile()
            },
            MatrixProfile {
                empty_row_fraction: 1.5,
                ..tiny_profile()
            },
            MatrixProfile {
                locality_window: 301,
                ..tiny_profile()
            },
            MatrixProfile {
                locality_window: 0,
                ..tiny_profile()
            },
            MatrixProfile {
                row_length_log_sigma: -1.0,
                ..tiny_profile()
            },
        ] {
            assert!(
                matches!(generate(&p), Err(GenError::InvalidProfile(_))),
                "{p:?}"
            );
        }
    }

    #[test]
    fn expected_length_quadrature() {
        // Lengths never clamp here, so E[exp(mu + sigma z)] = exp(mu + sigma^2 / 2)
        // up to the rounding to integers.
        let p = MatrixProfile {
            cols: 100_000,
            locality_window: 100,
            row_length_log_mean: 5.0,
            row_length_log_sigma: 0.5,
            ..tiny_profile()
        };
        let exact = (5.0f64 + 0.125).exp();
        assert!((p.expected_row_length() - exact).abs() < 0.5);
    }

    #[test]
    fn config_round_trip() {
        let p = MatrixProfile::prostate_desk().with_seed(99);
        let text = p.to_config();
        assert_eq!(
            MatrixProfile::parse_config(&text, MatrixProfile::liver_desk()).unwrap(),
            p
        );
        let partial = MatrixProfile::parse_config(
            "# comment\nseed = 5\n\nrows=100 # inline\n",
            MatrixProfile::liver_desk(),
        )
        .unwrap();
        assert_eq!(partial.seed, 5);
        assert_eq!(partial.rows, 100);
        assert_eq!(partial.cols, 6_800);
        assert!(MatrixProfile::parse_config("bogus = 1", MatrixProfile::liver_desk()).is_err());
        assert!(MatrixProfile::parse_config("rows", MatrixProfile::liver_desk()).is_err());
        assert!(MatrixProfile::parse_config("rows = -3", MatrixProfile::liver_desk()).is_err());
    }

    #[test]
    fn builtin_names() {
        assert_eq!(
            MatrixProfile::builtin("liver-desk").unwrap(),
            MatrixProfile::liver_desk()
        );
        assert_eq!(
            MatrixProfile::builtin("prostate-desk").unwrap(),
            MatrixProfile::prostate_desk()
        );
        assert!(MatrixProfile::builtin("lung").is_err());
    }
}
