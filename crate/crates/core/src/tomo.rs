//! Maximum-likelihood reconstruction from homodyne data.
//!
//! Each record contributes a POVM element: the ideal projector onto the
//! quadrature eigenstate, pulled back through the detection-loss channel
//! (`Π^η = Λ*_η(Π)`), so the estimate refers to the state before detection.
//! The full mode iterates `ρ ← N[R ρ R]`; when an undiluted step would lower
//! the likelihood it falls back to the diluted map `(I + εR) ρ (I + εR)`,
//! which increases it for small enough `ε`. The diagonal mode runs
//! expectation–maximization over photon-number populations.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, PhotonDistribution, DEFAULT_DIM};
use crate::hermite::fill_wavefunctions;
use crate::homodyne::QuadratureRecord;
use crate::loss::apply_loss_adjoint;

/// Smallest per-record probability treated as supported.
pub const MIN_SUPPORT: f64 = 1e-300;
/// Allowed likelihood decrease attributed to rounding.
pub const LIKELIHOOD_SLACK: f64 = 1e-12;
const CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TomoMode {
    Full,
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Binning {
    /// One POVM element per record.
    Unbinned,
    /// Counts on an `x_bins × phase_bins` grid, POVMs at bin centres.
    Histogram { x_bins: usize, phase_bins: usize },
}

impl Binning {
    pub fn histogram() -> Self {
        Binning::Histogram {
            x_bins: 200,
            phase_bins: 12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TomoConfig {
    pub dim: usize,
    /// Detection efficiency assumed by the correction; 1 disables it.
    pub eta_d: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub mode: TomoMode,
    pub binning: Binning,
}

impl Default for TomoConfig {
    fn default() -> Self {
        Self {
            dim: DEFAULT_DIM,
            eta_d: 1.0,
            tol: 1e-9,
            max_iter: 5000,
            mode: TomoMode::Full,
            binning: Binning::Unbinned,
        }
    }
}

impl TomoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 || self.dim > crate::hermite::MAX_ORDER {
            return Err(Error::domain("dim", self.dim as f64, "[2, 170]"));
        }
        if !(self.eta_d > 0.0 && self.eta_d <= 1.0) {
            return Err(Error::domain("eta_d", self.eta_d, "(0, 1]"));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(Error::domain("tol", self.tol, "[0, ∞)"));
        }
        if let Binning::Histogram { x_bins, phase_bins } = self.binning {
            if x_bins == 0 || phase_bins == 0 {
                return Err(Error::Unsupported("histogram binning needs positive bin counts".into()));
            }
        }
        Ok(())
    }
}

/// Convergence record of an iterative reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    pub loglik: f64,
    pub converged: bool,
    /// Log-likelihood of every iterate, starting point first.
    #[serde(skip)]
    pub loglik_trace: Vec<f64>,
}

/// Ideal quadrature projector `Π_{ab} = e^{i(a−b)θ} ψ_a(x) ψ_b(x)`, so that
/// `Tr(ρ Π) = p(x|θ)`.
pub fn ideal_projector(x: f64, theta: f64, dim: usize) -> Result<DMatrix<Complex64>> {
    let mut psi = vec![0.0; dim];
    fill_wavefunctions(&mut psi, x)?;
    let v: Vec<Complex64> = (0..dim)
        .map(|n| Complex64::from_polar(psi[n], n as f64 * theta))
        .collect();
    Ok(DMatrix::from_fn(dim, dim, |a, b| v[a] * v[b].conj()))
}

/// Efficiency-corrected POVM element `Λ*_η(Π(x, θ))`.
pub fn povm_element(x: f64, theta: f64, cfg: &TomoConfig) -> Result<DMatrix<Complex64>> {
    let ideal = ideal_projector(x, theta, cfg.dim)?;
    if cfg.eta_d == 1.0 {
        return Ok(ideal);
    }
    apply_loss_adjoint(&ideal, cfg.eta_d)
}

/// A POVM element with a multiplicity (1 per record, or a bin count).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPovm {
    pub weight: f64,
    pub op: DMatrix<Complex64>,
}

// Maps θ into [0, π) using p(x|θ + π) = p(−x|θ).
fn fold_phase(theta: f64, x: f64) -> (f64, f64) {
    let t = theta.rem_euclid(2.0 * PI);
    if t >= PI {
        (t - PI, -x)
    } else {
        (t, x)
    }
}

/// Builds the weighted POVM list for `records` under `cfg.binning`.
pub fn build_povms(records: &[QuadratureRecord], cfg: &TomoConfig) -> Result<Vec<WeightedPovm>> {
    cfg.validate()?;
    if records.is_empty() {
        return Err(Error::Unsupported("empty dataset".into()));
    }
    match cfg.binning {
        Binning::Unbinned => records
            .par_iter()
            .map(|r| {
                Ok(WeightedPovm {
                    weight: 1.0,
                    op: povm_element(r.x, r.theta, cfg)?,
                })
            })
            .collect(),
        Binning::Histogram { x_bins, phase_bins } => {
            let folded: Vec<(f64, f64)> = records.iter().map(|r| fold_phase(r.theta, r.x)).collect();
            let (lo, hi) = folded
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, x)| {
                    (lo.min(*x), hi.max(*x))
                });
            let width = ((hi - lo) / x_bins as f64).max(1e-9);
            let mut counts = vec![0usize; x_bins * phase_bins];
            for (t, x) in &folded {
                let i = (((x - lo) / width) as usize).min(x_bins - 1);
                let j = ((t / PI * phase_bins as f64) as usize).min(phase_bins - 1);
                counts[j * x_bins + i] += 1;
            }
            counts
                .iter()
                .enumerate()
                .filter(|(_, c)| **c > 0)
                .map(|(k, &c)| {
                    let (j, i) = (k / x_bins, k % x_bins);
                    let x = lo + (i as f64 + 0.5) * width;
                    let theta = (j as f64 + 0.5) * PI / phase_bins as f64;
                    Ok(WeightedPovm {
                        weight: c as f64,
                        op: povm_element(x, theta, cfg)?,
                    })
                })
                .collect()
        }
    }
}

fn probability(rho: &DMatrix<Complex64>, op: &DMatrix<Complex64>) -> f64 {
    let d = rho.nrows();
    let mut acc = 0.0;
    for a in 0..d {
        acc += rho[(a, a)].re * op[(a, a)].re;
        for b in (a + 1)..d {
            acc += 2.0 * (rho[(a, b)] * op[(b, a)]).re;
        }
    }
    acc
}

fn loglik(rho: &DMatrix<Complex64>, povms: &[WeightedPovm]) -> Result<f64> {
    let parts: Vec<Result<f64>> = povms
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(c, chunk)| {
            let mut s = 0.0;
            for (k, e) in chunk.iter().enumerate() {
                let p = probability(rho, &e.op);
                if p.is_nan() || p < MIN_SUPPORT {
                    return Err(Error::NumericalSupport {
                        index: c * CHUNK + k,
                        value: p,
                    });
                }
                s += e.weight * p.ln();
            }
            Ok(s)
        })
        .collect();
    parts.into_iter().sum()
}

// R(ρ) = Σ_j w_j Π_j / p_j / Σ_j w_j, reduced over fixed chunks in order.
fn r_operator(rho: &DMatrix<Complex64>, povms: &[WeightedPovm], total_weight: f64) -> DMatrix<Complex64> {
    let d = rho.nrows();
    let parts: Vec<DMatrix<Complex64>> = povms
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = DMatrix::zeros(d, d);
            for e in chunk {
                let p = probability(rho, &e.op);
                acc += e.op.scale(e.weight / p);
            }
            acc
        })
        .collect();
    let mut r = parts.into_iter().fold(DMatrix::zeros(d, d), |a, b| a + b);
    r.unscale_mut(total_weight);
    (&r + r.adjoint()).scale(0.5)
}

fn congruence(rho: &DMatrix<Complex64>, k: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let m = k * rho * k.adjoint();
    let h = (&m + m.adjoint()).scale(0.5);
    let tr = h.trace().re;
    h.unscale(tr)
}

/// Full-matrix reconstruction over an explicit POVM list, calling `observe`
/// with every iterate (including the maximally mixed start).
pub fn maxlik_povms_observed(
    povms: &[WeightedPovm],
    cfg: &TomoConfig,
    mut observe: impl FnMut(usize, &DensityMatrix, f64),
) -> Result<(DensityMatrix, Diagnostics)> {
    cfg.validate()?;
    if povms.is_empty() {
        return Err(Error::Unsupported("empty dataset".into()));
    }
    if povms.iter().any(|e| e.op.nrows() != cfg.dim || e.op.ncols() != cfg.dim) {
        return Err(Error::Shape(format!("POVM elements must be {0}x{0}", cfg.dim)));
    }
    let total_weight: f64 = povms.iter().map(|e| e.weight).sum();
    let identity = DMatrix::<Complex64>::identity(cfg.dim, cfg.dim);
    let mut rho = DensityMatrix::maximally_mixed(cfg.dim)?.into_matrix();
    let mut ll = loglik(&rho, povms)?;
    let mut trace = vec![ll];
    observe(0, &DensityMatrix::from_matrix(rho.clone())?, ll);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iter {
        iterations += 1;
        let r = r_operator(&rho, povms, total_weight);
        let mut next = congruence(&rho, &r);
        let mut next_ll = loglik(&next, povms).unwrap_or(f64::NEG_INFINITY);
        let mut eps = 1.0;
        while next_ll < ll - LIKELIHOOD_SLACK && eps > 1e-12 {
            let k = &identity + r.scale(eps);
            next = congruence(&rho, &k);
            next_ll = loglik(&next, povms).unwrap_or(f64::NEG_INFINITY);
            eps *= 0.5;
        }
        if next_ll < ll - LIKELIHOOD_SLACK {
            // no ascent direction left at machine precision
            converged = true;
            iterations -= 1;
            break;
        }
        let gain = (next_ll - ll) / ll.abs().max(f64::MIN_POSITIVE);
        debug_assert!(next_ll >= ll - LIKELIHOOD_SLACK);
        rho = next;
        ll = next_ll;
        trace.push(ll);
        observe(iterations, &DensityMatrix::from_matrix(rho.clone())?, ll);
        if gain < cfg.tol {
            converged = true;
            break;
        }
    }
    Ok((
        DensityMatrix::from_matrix(rho)?,
        Diagnostics {
            iterations,
            loglik: ll,
            converged,
            loglik_trace: trace,
        },
    ))
}

pub fn maxlik_povms(povms: &[WeightedPovm], cfg: &TomoConfig) -> Result<(DensityMatrix, Diagnostics)> {
    maxlik_povms_observed(povms, cfg, |_, _, _| {})
}

/// Full density-matrix reconstruction of `records`.
pub fn maxlik(records: &[QuadratureRecord], cfg: &TomoConfig) -> Result<(DensityMatrix, Diagnostics)> {
    maxlik_povms(&build_povms(records, cfg)?, cfg)
}

/// Expectation–maximization over the populations only, with
/// `h_n(x) = (Π^η(x))_{nn}`.
pub fn diagonal_maxlik(records: &[QuadratureRecord], cfg: &TomoConfig) -> Result<(PhotonDistribution, Diagnostics)> {
    let povms = build_povms(records, cfg)?;
    diagonal_maxlik_povms(&povms, cfg)
}

pub fn diagonal_maxlik_povms(povms: &[WeightedPovm], cfg: &TomoConfig) -> Result<(PhotonDistribution, Diagnostics)> {
    cfg.validate()?;
    if povms.is_empty() {
        return Err(Error::Unsupported("empty dataset".into()));
    }
    let d = cfg.dim;
    let h: Vec<(f64, Vec<f64>)> = povms
        .iter()
        .map(|e| (e.weight, (0..d).map(|n| e.op[(n, n)].re.max(0.0)).collect()))
        .collect();
    let total_weight: f64 = h.iter().map(|(w, _)| w).sum();
    let eval = |probs: &[f64]| -> Result<(f64, Vec<f64>)> {
        let parts: Vec<Result<(f64, Vec<f64>)>> = h
            .par_chunks(CHUNK)
            .enumerate()
            .map(|(c, chunk)| {
                let mut ll = 0.0;
                let mut grad = vec![0.0; d];
                for (k, (w, hn)) in chunk.iter().enumerate() {
                    let p: f64 = probs.iter().zip(hn).map(|(a, b)| a * b).sum();
                    if p.is_nan() || p < MIN_SUPPORT {
                        return Err(Error::NumericalSupport {
                            index: c * CHUNK + k,
                            value: p,
                        });
                    }
                    ll += w * p.ln();
                    for n in 0..d {
                        grad[n] += w * hn[n] / p;
                    }
                }
                Ok((ll, grad))
            })
            .collect();
        let mut ll = 0.0;
        let mut grad = vec![0.0; d];
        for part in parts {
            let (l, g) = part?;
            ll += l;
            grad.iter_mut().zip(g).for_each(|(a, b)| *a += b);
        }
        Ok((ll, grad))
    };

    let mut probs = vec![1.0 / d as f64; d];
    let (mut ll, mut grad) = eval(&probs)?;
    let mut trace = vec![ll];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        let mut next: Vec<f64> = probs.iter().zip(&grad).map(|(p, g)| p * g / total_weight).collect();
        let s: f64 = next.iter().sum();
        next.iter_mut().for_each(|p| *p /= s);
        let (next_ll, next_grad) = eval(&next)?;
        let gain = (next_ll - ll) / ll.abs().max(f64::MIN_POSITIVE);
        debug_assert!(next_ll >= ll - LIKELIHOOD_SLACK);
        probs = next;
        ll = next_ll;
        grad = next_grad;
        trace.push(ll);
        if gain < cfg.tol {
            converged = true;
            break;
        }
    }
    Ok((
        PhotonDistribution::new(probs)?,
        Diagnostics {
            iterations,
            loglik: ll,
            converged,
            loglik_trace: trace,
        },
    ))
}

/// Runs the reconstruction selected by `cfg.mode`.
pub fn reconstruct(records: &[QuadratureRecord], cfg: &TomoConfig) -> Result<(DensityMatrix, Diagnostics)> {
    match cfg.mode {
        TomoMode::Full => maxlik(records, cfg),
        TomoMode::Diagonal => {
            let (p, diag) = diagonal_maxlik(records, cfg)?;
            Ok((p.to_density_matrix(), diag))
        }
    }
}
