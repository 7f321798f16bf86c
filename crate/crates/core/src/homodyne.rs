//! Seeded Monte Carlo homodyne data: inverse-CDF sampling of quadrature
//! distributions behind a detection-loss channel.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cavity::csv_err;
use crate::error::{check_closed, Error, Result};
use crate::fock::DensityMatrix;
use crate::format::sig9;
use crate::hermite::fill_wavefunctions;
use crate::loss::apply_loss;

/// Quadrature values are confined to `[-X_MAX, X_MAX]`.
pub const X_MAX: f64 = 10.0;
/// Points in each cumulative table.
pub const TABLE_POINTS: usize = 4096;
const CACHE_LIMIT: usize = 256;

pub const DATASET_CSV_HEADER: &str = "theta,x";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRecord {
    pub theta: f64,
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub seed: u64,
    pub n_samples: usize,
    /// Whether a detection-loss channel was applied while sampling.
    pub eta_d_applied: bool,
    pub eta_d: f64,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureDataset {
    pub records: Vec<QuadratureRecord>,
    pub meta: DatasetMeta,
}

impl QuadratureDataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Writes the `theta,x` table with 9 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_records_csv(&self.records, out)
    }

    pub fn meta_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.meta)?)
    }
}

pub fn write_records_csv<W: Write>(records: &[QuadratureRecord], mut out: W) -> Result<()> {
    writeln!(out, "{DATASET_CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{},{}", sig9(r.theta), sig9(r.x))?;
    }
    Ok(())
}

/// Parses a `theta,x` table; errors carry the offending line number.
pub fn read_records_csv<R: Read>(input: R) -> Result<Vec<QuadratureRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if header != ["theta", "x"] {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header {DATASET_CSV_HEADER:?}, found {:?}", header.join(",")),
        });
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_err)?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let bad = |message: String| Error::Parse { line, message };
        if row.len() != 2 {
            return Err(bad(format!("expected 2 fields, found {}", row.len())));
        }
        let field = |i: usize| -> Result<f64> {
            let v: f64 = row[i]
                .parse()
                .map_err(|_| bad(format!("cannot parse {:?} as a number", &row[i])))?;
            if !v.is_finite() {
                return Err(bad(format!("non-finite value {v}")));
            }
            Ok(v)
        };
        let (theta, x) = (field(0)?, field(1)?);
        if x.abs() > X_MAX {
            return Err(bad(format!("quadrature {x} outside [-{X_MAX}, {X_MAX}]")));
        }
        out.push(QuadratureRecord { theta, x });
    }
    Ok(out)
}

/// How local-oscillator phases are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PhaseSchedule {
    /// i.i.d. uniform on [0, π).
    UniformRandom,
    /// Cycles through `steps` equispaced phases `kπ/steps`.
    Stepped { steps: usize },
}

/// Phase for each of `n` samples. Random phases use their own RNG stream so
/// they never correlate with the quadrature draws for the same seed.
pub fn phase_schedule(kind: PhaseSchedule, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Unsupported("phase schedule needs n > 0".into()));
    }
    match kind {
        PhaseSchedule::UniformRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(u64::MAX);
            Ok((0..n).map(|_| PI * rng.random::<f64>()).collect())
        }
        PhaseSchedule::Stepped { steps: 0 } => Err(Error::Unsupported("stepped schedule needs steps > 0".into())),
        PhaseSchedule::Stepped { steps } => Ok((0..n).map(|k| (k % steps) as f64 * PI / steps as f64).collect()),
    }
}

/// Inverse-CDF sampler for one state, with cumulative tables cached per phase.
#[derive(Debug)]
pub struct QuadratureSampler {
    xs: Vec<f64>,
    // harmonics[d][i] = Σ_m ρ_{m,m+d} ψ_m(x_i) ψ_{m+d}(x_i)
    harmonics: Vec<Vec<Complex64>>,
    phase_free: bool,
    cache: HashMap<u64, Arc<Vec<f64>>>,
}

impl QuadratureSampler {
    pub fn new(rho: &DensityMatrix) -> Result<Self> {
        let d = rho.dim();
        let h = 2.0 * X_MAX / (TABLE_POINTS - 1) as f64;
        let xs: Vec<f64> = (0..TABLE_POINTS).map(|i| -X_MAX + i as f64 * h).collect();
        let mut harmonics = vec![vec![Complex64::new(0.0, 0.0); TABLE_POINTS]; d];
        let mut psi = vec![0.0; d];
        for (i, &x) in xs.iter().enumerate() {
            fill_wavefunctions(&mut psi, x)?;
            for (k, row) in harmonics.iter_mut().enumerate() {
                row[i] = (0..d - k).map(|m| rho.get(m, m + k) * (psi[m] * psi[m + k])).sum();
            }
        }
        let phase_free = harmonics[1..].iter().all(|row| row.iter().all(|z| z.norm() == 0.0));
        Ok(Self {
            xs,
            harmonics,
            phase_free,
            cache: HashMap::new(),
        })
    }

    fn density(&self, theta: f64, i: usize) -> f64 {
        let mut p = self.harmonics[0][i].re;
        if !self.phase_free {
            for (k, row) in self.harmonics.iter().enumerate().skip(1) {
                p += 2.0 * (row[i] * Complex64::from_polar(1.0, k as f64 * theta)).re;
            }
        }
        p.max(0.0)
    }

    fn table(&mut self, theta: f64) -> Arc<Vec<f64>> {
        let key = if self.phase_free { 0 } else { theta.to_bits() };
        if let Some(t) = self.cache.get(&key) {
            return Arc::clone(t);
        }
        let h = self.xs[1] - self.xs[0];
        let mut cdf = Vec::with_capacity(TABLE_POINTS);
        cdf.push(0.0);
        let mut prev = self.density(theta, 0);
        for i in 1..TABLE_POINTS {
            let cur = self.density(theta, i);
            cdf.push(cdf[i - 1] + 0.5 * h * (prev + cur));
            prev = cur;
        }
        let total = cdf[TABLE_POINTS - 1];
        cdf.iter_mut().for_each(|c| *c /= total);
        let t = Arc::new(cdf);
        if self.cache.len() >= CACHE_LIMIT {
            self.cache.clear();
        }
        self.cache.insert(key, Arc::clone(&t));
        t
    }

    /// Quadrature with cumulative probability `u ∈ [0, 1)` at phase `theta`.
    pub fn draw(&mut self, theta: f64, u: f64) -> f64 {
        let cdf = self.table(theta);
        // first index with cdf > u
        let hi = cdf.partition_point(|c| *c <= u).clamp(1, TABLE_POINTS - 1);
        let lo = hi - 1;
        let span = cdf[hi] - cdf[lo];
        let frac = if span > 0.0 { (u - cdf[lo]) / span } else { 0.5 };
        self.xs[lo] + frac * (self.xs[hi] - self.xs[lo])
    }

    /// The tabulated (piecewise-linear) CDF the sampler inverts.
    pub fn cdf(&mut self, theta: f64, x: f64) -> f64 {
        let cdf = self.table(theta);
        if x <= -X_MAX {
            return 0.0;
        }
        if x >= X_MAX {
            return 1.0;
        }
        let h = self.xs[1] - self.xs[0];
        let pos = (x + X_MAX) / h;
        let lo = (pos.floor() as usize).min(TABLE_POINTS - 2);
        let frac = pos - lo as f64;
        cdf[lo] + frac * (cdf[lo + 1] - cdf[lo])
    }
}

/// Draws one quadrature per scheduled phase from `apply_loss(rho, eta_d)`.
pub fn sample(rho: &DensityMatrix, eta_d: f64, phases: &[f64], seed: u64) -> Result<QuadratureDataset> {
    sample_partitioned(rho, eta_d, phases, seed, 1)
}

/// As [`sample`], with the sample index range split into `partitions`
/// contiguous chunks drawn in parallel. Chunk `k` uses RNG stream `k` of
/// `seed`, so the output depends only on `(seed, partitions)` and one
/// partition reproduces [`sample`] exactly.
pub fn sample_partitioned(
    rho: &DensityMatrix,
    eta_d: f64,
    phases: &[f64],
    seed: u64,
    partitions: usize,
) -> Result<QuadratureDataset> {
    check_closed("eta_d", eta_d, 0.0, 1.0, "[0, 1]")?;
    if phases.is_empty() {
        return Err(Error::Unsupported("sample count must be positive".into()));
    }
    if partitions == 0 {
        return Err(Error::Unsupported("partitions must be positive".into()));
    }
    let lossy = apply_loss(rho, eta_d)?;
    let base = QuadratureSampler::new(&lossy)?;
    let chunk = phases.len().div_ceil(partitions);
    let records: Vec<QuadratureRecord> = phases
        .par_chunks(chunk)
        .enumerate()
        .map(|(k, part)| {
            let mut sampler = QuadratureSampler {
                xs: base.xs.clone(),
                harmonics: base.harmonics.clone(),
                phase_free: base.phase_free,
                cache: HashMap::new(),
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            part.iter()
                .map(|&theta| {
                    let u: f64 = rng.random();
                    QuadratureRecord {
                        theta,
                        x: sampler.draw(theta, u),
                    }
                })
                .collect::<Vec<_>>()
        })
        .flatten()
        .collect();
    Ok(QuadratureDataset {
        meta: DatasetMeta {
            seed,
            n_samples: records.len(),
            eta_d_applied: eta_d < 1.0,
            eta_d,
            source: format!("dim-{} state, detection efficiency {}", rho.dim(), eta_d),
        },
        records,
    })
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}
