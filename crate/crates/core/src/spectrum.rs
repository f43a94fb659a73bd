//! Quasienergies, gap-ratio statistics and the Poisson / COE references.
//!
//! Gaps are taken along the sorted quasienergies inside the zone with no
//! wrap-around gap across the zone edge. A gap below `1e-12·ω` is treated as
//! an exact degeneracy: every ratio that uses it is dropped and counted in
//! [`RatioSample::discarded_degenerate`].

use std::f64::consts::{LN_2, PI, TAU};

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{JunctionError, Result};
use crate::linalg::unitarity_error;
use crate::propagator::FloquetOperator;
use crate::quadrature;

/// Relative gap size below which two levels count as degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// Tolerance on `|λ| = 1` for eigenvalues of a unitary.
pub const EIGENVALUE_MODULUS_TOL: f64 = 1e-9;

const UNITARITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasienergySpectrum {
    /// Sorted, inside `(-ω/2, ω/2]`.
    pub values: Vec<f64>,
    pub angular_frequency: f64,
}

/// Folds `energy` into the zone `(-ω/2, ω/2]`.
pub fn fold_into_zone(energy: f64, angular_frequency: f64) -> f64 {
    let half = 0.5 * angular_frequency;
    let mut e = energy - angular_frequency * (energy / angular_frequency).round();
    if e <= -half {
        e += angular_frequency;
    } else if e > half {
        e -= angular_frequency;
    }
    e
}

/// Eigenvalues of a unitary matrix via the complex Schur form.
pub fn unitary_eigenvalues(u: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let err = unitarity_error(u);
    if !(err < UNITARITY_TOL) {
        return Err(JunctionError::NonUnitary(err));
    }
    let schur = Schur::try_new(u.clone(), 1e-15, 10_000).ok_or(JunctionError::EigenFailure)?;
    let eigenvalues = schur.eigenvalues().ok_or(JunctionError::EigenFailure)?;
    let values: Vec<Complex64> = eigenvalues.iter().copied().collect();
    if let Some(bad) = values.iter().find(|z| (z.norm() - 1.0).abs() > EIGENVALUE_MODULUS_TOL) {
        return Err(JunctionError::NonUnitary((bad.norm() - 1.0).abs()));
    }
    Ok(values)
}

/// Quasienergies `ε = -arg(λ)/T` of the Floquet operator.
pub fn quasienergies(floquet: &FloquetOperator) -> Result<QuasienergySpectrum> {
    let omega = floquet.angular_frequency();
    let mut values: Vec<f64> = unitary_eigenvalues(floquet.unitary.matrix())?
        .iter()
        .map(|z| fold_into_zone(-z.arg() / floquet.period, omega))
        .collect();
    values.sort_by(f64::total_cmp);
    Ok(QuasienergySpectrum { values, angular_frequency: omega })
}

/// Pooled gap ratios.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RatioSample {
    pub ratios: Vec<f64>,
    pub discarded_degenerate: usize,
    /// `(source id, ratios contributed)` in pooling order.
    pub sources: Vec<(usize, usize)>,
}

impl RatioSample {
    pub fn len(&self) -> usize {
        self.ratios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratios.is_empty()
    }

    pub fn mean(&self) -> Option<f64> {
        if self.ratios.is_empty() {
            None
        } else {
            Some(self.ratios.iter().sum::<f64>() / self.ratios.len() as f64)
        }
    }

    /// Appends `other` after the existing ratios.
    pub fn extend(&mut self, other: RatioSample) {
        self.ratios.extend(other.ratios);
        self.discarded_degenerate += other.discarded_degenerate;
        self.sources.extend(other.sources);
    }

    /// Concatenates samples in the given order.
    pub fn pool(samples: impl IntoIterator<Item = RatioSample>) -> RatioSample {
        let mut pooled = RatioSample::default();
        for s in samples {
            pooled.extend(s);
        }
        pooled
    }

    fn sorted(&self) -> Vec<f64> {
        let mut v = self.ratios.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Fraction of ratios in `[lo, hi)`.
    pub fn mass_in(&self, lo: f64, hi: f64) -> f64 {
        if self.ratios.is_empty() {
            return 0.0;
        }
        self.ratios.iter().filter(|&&r| r >= lo && r < hi).count() as f64 / self.ratios.len() as f64
    }
}

/// Gap ratios `min(δ_α, δ_{α+1}) / max(δ_α, δ_{α+1})` of one sorted level
/// sequence. `scale` sets the degeneracy threshold `1e-12·scale`.
pub fn gap_ratios_of(levels: &[f64], scale: f64, source: usize) -> Result<RatioSample> {
    if levels.len() < 3 {
        return Err(JunctionError::TooFewLevels(levels.len()));
    }
    let threshold = DEGENERACY_THRESHOLD * scale.abs();
    let mut sorted = levels.to_vec();
    sorted.sort_by(f64::total_cmp);
    let gaps: Vec<f64> = sorted.windows(2).map(|w| w[1] - w[0]).collect();
    let mut ratios = Vec::with_capacity(gaps.len() - 1);
    let mut discarded = 0;
    for pair in gaps.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a < threshold || b < threshold {
            discarded += 1;
            continue;
        }
        ratios.push(a.min(b) / a.max(b));
    }
    let count = ratios.len();
    Ok(RatioSample { ratios, discarded_degenerate: discarded, sources: vec![(source, count)] })
}

pub fn gap_ratios(spectrum: &QuasienergySpectrum, source: usize) -> Result<RatioSample> {
    gap_ratios_of(&spectrum.values, spectrum.angular_frequency, source)
}

fn check_unit_interval(r: f64) -> Result<()> {
    if (0.0..=1.0).contains(&r) {
        Ok(())
    } else {
        Err(JunctionError::RatioOutOfDomain(r))
    }
}

/// `P(r) = 2/(1+r)²` for uncorrelated levels.
pub fn poisson_density(r: f64) -> Result<f64> {
    check_unit_interval(r)?;
    Ok(2.0 / (1.0 + r).powi(2))
}

/// `∫_0^r 2/(1+s)² ds = 2r/(1+r)`.
pub fn poisson_cdf(r: f64) -> f64 {
    let r = r.clamp(0.0, 1.0);
    2.0 * r / (1.0 + r)
}

/// `2 ln 2 - 1`.
pub fn poisson_mean() -> f64 {
    2.0 * LN_2 - 1.0
}

/// Inverse of [`poisson_cdf`].
pub fn poisson_quantile(u: f64) -> f64 {
    u / (2.0 - u)
}

/// The closed-form COE ratio density exactly as published:
///
/// ```text
/// (2/3){ sin(2πr/(r+1))/(2πr²) + 1/(1+r)² + sin(2π/(r+1))/(2π) }
///   - (2/3){ cos(2π/(r+1))/(2πr²) + cos(2πr/(r+1))/(r(r+1)) }
/// ```
///
/// As printed it diverges like `-1/(3πr²)` at small `r`, so it is not a
/// probability density (see [`check_printed_coe`]); the sampled reference
/// from [`sample_coe_reference`] replaces it wherever a density is needed.
pub fn coe_density(r: f64) -> Result<f64> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(JunctionError::RatioOutOfDomain(r));
    }
    let a = 2.0 * PI * r / (r + 1.0);
    let b = 2.0 * PI / (r + 1.0);
    let first = a.sin() / (TAU * r * r) + 1.0 / (1.0 + r).powi(2) + b.sin() / TAU;
    let second = b.cos() / (TAU * r * r) + a.cos() / (r * (r + 1.0));
    Ok(2.0 / 3.0 * (first - second))
}

/// Default lower cutoff for quadratures of [`coe_density`].
pub const COE_QUADRATURE_CUTOFF: f64 = 1e-3;

/// `∫_{r_min}^1 r P_COE(r) dr` with the printed density.
pub fn coe_mean(r_min: f64) -> f64 {
    quadrature::integrate(|r| r * coe_density(r).unwrap_or(0.0), r_min, 1.0, 1e-12)
}

/// Numerical health check of the printed COE density on `[r_min, 1]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrintedCoeCheck {
    pub r_min: f64,
    pub normalization: f64,
    pub mean: f64,
    pub min_density: f64,
    /// Normalized to 1e-3 and non-negative on the grid.
    pub valid: bool,
}

pub fn check_printed_coe(r_min: f64) -> PrintedCoeCheck {
    let normalization = quadrature::integrate(|r| coe_density(r).unwrap_or(0.0), r_min, 1.0, 1e-12);
    let min_density = (0..=1000)
        .map(|k| r_min + (1.0 - r_min) * k as f64 / 1000.0)
        .map(|r| coe_density(r).unwrap_or(f64::NAN))
        .fold(f64::INFINITY, f64::min);
    PrintedCoeCheck {
        r_min,
        normalization,
        mean: coe_mean(r_min),
        min_density,
        valid: (normalization - 1.0).abs() < 1e-3 && min_density >= 0.0,
    }
}

/// Haar-random unitary via QR of a complex Ginibre matrix with the phases of
/// `R`'s diagonal divided out.
pub fn haar_unitary(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let z = DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for (j, mut col) in q.column_iter_mut().enumerate() {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        col *= phase;
    }
    q
}

/// Gap ratios of `count` COE matrices `S = WᵀW` with Haar `W`. Matrix `k`
/// draws from ChaCha8 stream `k` keyed by `seed`, so the sample does not
/// depend on scheduling.
pub fn sample_coe_reference(dim: usize, count: usize, seed: u64) -> Result<RatioSample> {
    if dim < 4 {
        return Err(JunctionError::TooFewLevels(dim));
    }
    let samples = (0..count)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let w = haar_unitary(dim, &mut rng);
            let s = w.transpose() * &w;
            let phases: Vec<f64> = unitary_eigenvalues(&s)?.iter().map(|z| z.arg()).collect();
            gap_ratios_of(&phases, TAU, k)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RatioSample::pool(samples))
}

/// Reference distribution for a KS distance.
pub enum Reference<'a> {
    Poisson,
    Cdf(&'a dyn Fn(f64) -> f64),
    Sample(&'a RatioSample),
}

/// Kolmogorov–Smirnov distance `sup |F_sample - F_ref|`.
pub fn ks_distance(sample: &RatioSample, reference: &Reference<'_>) -> Result<f64> {
    if sample.is_empty() {
        return Err(JunctionError::EmptySample);
    }
    let xs = sample.sorted();
    match reference {
        Reference::Poisson => Ok(ks_against_cdf(&xs, &poisson_cdf)),
        Reference::Cdf(cdf) => Ok(ks_against_cdf(&xs, *cdf)),
        Reference::Sample(other) => {
            if other.is_empty() {
                return Err(JunctionError::EmptySample);
            }
            Ok(ks_two_sample(&xs, &other.sorted()))
        }
    }
}

fn ks_against_cdf(sorted: &[f64], cdf: &dyn Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((( i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut best: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    best
}

/// One histogram bin with reference overlays; densities integrate to one
/// over `[0, 1]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistogramRow {
    pub r_bin_lo: f64,
    pub r_bin_hi: f64,
    pub empirical_density: f64,
    /// Exact bin average of `2/(1+r)²`.
    pub poisson_density: f64,
    /// Bin density of the sampled COE reference.
    pub coe_density: f64,
}

pub fn ratio_histogram(sample: &RatioSample, coe_reference: &RatioSample, bins: usize) -> Vec<HistogramRow> {
    let width = 1.0 / bins as f64;
    let counts = |s: &RatioSample| {
        let mut c = vec![0usize; bins];
        for &r in &s.ratios {
            c[((r / width) as usize).min(bins - 1)] += 1;
        }
        let total = s.len().max(1) as f64;
        c.into_iter().map(move |k| k as f64 / total / width).collect::<Vec<_>>()
    };
    let empirical = counts(sample);
    let coe = counts(coe_reference);
    (0..bins)
        .map(|b| {
            let lo = b as f64 * width;
            let hi = (b + 1) as f64 * width;
            HistogramRow {
                r_bin_lo: lo,
                r_bin_hi: hi,
                empirical_density: empirical[b],
                poisson_density: (poisson_cdf(hi) - poisson_cdf(lo)) / width,
                coe_density: coe[b],
            }
        })
        .collect()
}
