//! Passive pump enhancement cavity: build-up, finesse, impedance matching
//! and the single-/two-photon rate curves that follow from the build-up.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::sig9;

/// Input-coupler reflectivity `R_i` and lumped round-trip reflectivity `R_m`
/// (`1 − R_m` is every intracavity loss other than the coupler).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavitySpec {
    pub r_in: f64,
    pub r_loop: f64,
}

impl CavitySpec {
    pub fn new(r_in: f64, r_loop: f64) -> Result<Self> {
        let spec = Self { r_in, r_loop };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("r_in", self.r_in), ("r_loop", self.r_loop)] {
            if !(v.is_finite() && (0.0..1.0).contains(&v)) {
                return Err(Error::domain(name, v, "[0, 1)"));
            }
        }
        Ok(())
    }

    fn round_trip_amplitude(&self) -> Result<f64> {
        self.validate()?;
        let g = (self.r_in * self.r_loop).sqrt();
        if g >= 1.0 {
            return Err(Error::DivergentCavity);
        }
        Ok(g)
    }
}

/// Pulse repetition rate (Hz) and single-pass parametric gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateModel {
    pub rep_rate: f64,
    pub base_gain: f64,
}

impl RateModel {
    pub fn new(rep_rate: f64, base_gain: f64) -> Result<Self> {
        let m = Self { rep_rate, base_gain };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rep_rate.is_finite() && self.rep_rate > 0.0) {
            return Err(Error::domain("rep_rate", self.rep_rate, "(0, ∞)"));
        }
        if !(0.0..1.0).contains(&self.base_gain) {
            return Err(Error::NonPhysicalGain(self.base_gain));
        }
        Ok(())
    }
}

/// Intracavity power build-up `(1 − R_i) / (1 − √(R_i R_m))²`.
pub fn enhancement(spec: &CavitySpec) -> Result<f64> {
    let g = spec.round_trip_amplitude()?;
    Ok((1.0 - spec.r_in) / ((1.0 - g) * (1.0 - g)))
}

/// Finesse `π (R_i R_m)^{1/4} / (1 − √(R_i R_m))`.
pub fn finesse(spec: &CavitySpec) -> Result<f64> {
    let g = spec.round_trip_amplitude()?;
    Ok(PI * g.sqrt() / (1.0 - g))
}

/// Input-coupler reflectivity maximizing [`enhancement`] for a given loop
/// reflectivity.
///
/// Solves the stationarity condition `√(R_m/R_i)(1 − R_i) = 1 − √(R_i R_m)`
/// by bisection; the left side minus the right is strictly decreasing in `R_i`.
pub fn optimal_input_coupler(r_loop: f64) -> Result<f64> {
    if !(r_loop.is_finite() && (0.0..1.0).contains(&r_loop)) {
        return Err(Error::domain("r_loop", r_loop, "[0, 1)"));
    }
    let slope = |ri: f64| (r_loop / ri).sqrt() * (1.0 - ri) - (1.0 - (ri * r_loop).sqrt());
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if r_loop == 0.0 {
        return Ok(0.0);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Inclusive `start..=stop` sweep in steps of `step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for Sweep {
    fn default() -> Self {
        Self {
            start: 0.80,
            stop: 0.999,
            step: 1e-3,
        }
    }
}

impl Sweep {
    pub fn single(v: f64) -> Self {
        Self {
            start: v,
            stop: v,
            step: 1.0,
        }
    }

    /// Grid values, computed as `start + k·step` and rounded to 12 decimals
    /// so that nominal points such as 0.93 land exactly.
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.step.is_finite()) || self.step <= 0.0 {
            return Err(Error::domain("sweep step", self.step, "(0, ∞)"));
        }
        if self.stop < self.start {
            return Ok(Vec::new());
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        Ok((0..=n)
            .map(|k| ((self.start + k as f64 * self.step) * 1e12).round() / 1e12)
            .collect())
    }
}

/// Single-pass heralded rates the curves are scaled from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub rate1_hz: f64,
    pub rate2_hz: f64,
}

/// One row of the rate-curve table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub r_m: f64,
    pub r_i: f64,
    pub enhancement: f64,
    pub rate1_hz: f64,
    pub rate2_hz: f64,
    pub rate1_gain: f64,
    pub rate2_gain: f64,
}

pub const RATE_CSV_HEADER: &str = "r_m,r_i,enhancement,rate1_hz,rate2_hz,rate1_gain,rate2_gain";

/// Single-photon rate scales with the build-up `𝓔`, two-photon with `𝓔²`.
/// Rows are ordered by `R_i` (outer, as given) then `R_m`.
pub fn rate_curves(r_in_list: &[f64], r_loop: &Sweep, baseline: Baseline) -> Result<Vec<RateRow>> {
    for (name, v) in [
        ("baseline rate1", baseline.rate1_hz),
        ("baseline rate2", baseline.rate2_hz),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::domain(name, v, "(0, ∞)"));
        }
    }
    let loops = r_loop.values()?;
    if loops.is_empty() || r_in_list.is_empty() {
        return Err(Error::Unsupported("empty cavity sweep".into()));
    }
    let pairs: Vec<(f64, f64)> = r_in_list
        .iter()
        .flat_map(|&ri| loops.iter().map(move |&rm| (ri, rm)))
        .collect();
    pairs
        .par_iter()
        .map(|&(ri, rm)| {
            let e = enhancement(&CavitySpec::new(ri, rm)?)?;
            let g2 = e * e;
            Ok(RateRow {
                r_m: rm,
                r_i: ri,
                enhancement: e,
                rate1_hz: baseline.rate1_hz * e,
                rate2_hz: baseline.rate2_hz * g2,
                rate1_gain: e,
                rate2_gain: g2,
            })
        })
        .collect()
}

/// Index of the row closest to `(r_m, r_i)`.
pub fn nearest_row(rows: &[RateRow], r_m: f64, r_i: f64) -> Option<usize> {
    rows.iter()
        .enumerate()
        .map(|(k, r)| (k, (r.r_m - r_m).hypot(r.r_i - r_i)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| k)
}

pub fn write_rate_csv<W: Write>(rows: &[RateRow], mut out: W) -> Result<()> {
    writeln!(out, "{RATE_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            sig9(r.r_m),
            sig9(r.r_i),
            sig9(r.enhancement),
            sig9(r.rate1_hz),
            sig9(r.rate2_hz),
            sig9(r.rate1_gain),
            sig9(r.rate2_gain)
        )?;
    }
    Ok(())
}

pub fn read_rate_csv<R: std::io::Read>(input: R) -> Result<Vec<RateRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(csv_err)?.iter().collect::<Vec<_>>().join(",");
    if header != RATE_CSV_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header {RATE_CSV_HEADER:?}, found {header:?}"),
        });
    }
    rdr.deserialize().map(|r| r.map_err(csv_err)).collect()
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}
