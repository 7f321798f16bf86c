//! Truncated Fock-space states.
//!
//! # Quadrature convention
//!
//! Quadratures are `x_θ = (a e^{-iθ} + a† e^{iθ}) / √2`, so the vacuum has
//! variance 1/2 and ground-state wavefunction `π^{-1/4} exp(-x²/2)`. Every
//! routine in the crate (wavefunctions, Wigner kernels, the sampler and the
//! tomography POVMs) uses this single normalization.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default Fock cutoff: the reconstruction space spans |0⟩..|4⟩.
pub const DEFAULT_DIM: usize = 5;

/// Tail probability above the cutoff at which a truncation warning is due.
pub const TRUNCATION_WARN: f64 = 1e-4;

/// Marker for the fixed quadrature normalization (vacuum variance 1/2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct QuadratureConvention;

impl QuadratureConvention {
    pub const VACUUM_VARIANCE: f64 = 0.5;

    /// `π^{-1/4}`, the ground-state wavefunction at the origin.
    pub fn ground_state_peak() -> f64 {
        std::f64::consts::PI.powf(-0.25)
    }
}

/// Density operator on the Fock states |0⟩..|dim−1⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Wraps a square matrix. No physical validation; see [`validate`](Self::validate).
    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::Shape(format!(
                "{}x{} is not a non-empty square matrix",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self { m })
    }

    pub fn from_diagonal(probs: &[f64]) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Shape("empty diagonal".into()));
        }
        let d = probs.len();
        let mut m = DMatrix::zeros(d, d);
        for (n, &p) in probs.iter().enumerate() {
            m[(n, n)] = Complex64::new(p, 0.0);
        }
        Ok(Self { m })
    }

    /// Maximally mixed state `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("dim must be positive".into()));
        }
        Self::from_diagonal(&vec![1.0 / dim as f64; dim])
    }

    /// Pure state built from (unnormalized) amplitudes.
    pub fn pure(amplitudes: &[Complex64]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if amplitudes.is_empty() || norm <= 0.0 || !norm.is_finite() {
            return Err(Error::Shape("pure state needs a nonzero amplitude vector".into()));
        }
        let d = amplitudes.len();
        let m = DMatrix::from_fn(d, d, |i, j| amplitudes[i] * amplitudes[j].conj() / norm);
        Ok(Self { m })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.m
    }

    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.m[(m, n)]
    }

    pub fn trace(&self) -> f64 {
        self.m.diagonal().iter().map(|z| z.re).sum()
    }

    /// Photon-number populations `ρ_nn`.
    pub fn diagonal(&self) -> Vec<f64> {
        self.m.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn purity(&self) -> f64 {
        (&self.m * &self.m).trace().re
    }

    /// Largest `|ρ_mn|` with `m ≠ n`.
    pub fn max_off_diagonal(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    worst = worst.max(self.m[(i, j)].norm());
                }
            }
        }
        worst
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        self.max_off_diagonal() <= tol
    }

    /// Keeps only the populations (the phase-averaged state).
    pub fn phase_averaged(&self) -> Self {
        Self::from_diagonal(&self.diagonal()).expect("dim > 0")
    }

    /// Largest deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        (&self.m - self.m.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.m + self.m.adjoint()).scale(0.5);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Checks Hermiticity (1e-12), unit trace (1e-10) and positivity (-1e-10).
    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > 1e-12 {
            return Err(Error::domain("hermiticity error", herm, "[0, 1e-12]"));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() >= 1e-10 {
            return Err(Error::domain("trace", tr, "1 ± 1e-10"));
        }
        let ev = self.min_eigenvalue();
        if ev < -1e-10 {
            return Err(Error::domain("smallest eigenvalue", ev, "[-1e-10, ∞)"));
        }
        Ok(())
    }

    /// Symmetrizes to the Hermitian part and rescales to unit trace.
    pub fn normalized(&self) -> Self {
        let h = (&self.m + self.m.adjoint()).scale(0.5);
        let tr = h.trace().re;
        Self { m: h.unscale(tr) }
    }

    /// Embeds into a larger cutoff (zero padding) or truncates to a smaller one.
    pub fn resized(&self, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("dim must be positive".into()));
        }
        let old = self.dim();
        let m = DMatrix::from_fn(dim, dim, |i, j| {
            if i < old && j < old {
                self.m[(i, j)]
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Ok(Self { m })
    }

    /// `Tr(ρ A)` for an operator of matching dimension.
    pub fn expectation(&self, op: &DMatrix<Complex64>) -> Complex64 {
        let d = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                acc += self.m[(i, j)] * op[(j, i)];
            }
        }
        acc
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&DensityMatrixJson::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: DensityMatrixJson = serde_json::from_str(s)?;
        raw.try_into()
    }
}

/// On-disk form: `{"dim": N, "re": [[...]], "im": [[...]]}`, row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityMatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&DensityMatrix> for DensityMatrixJson {
    fn from(rho: &DensityMatrix) -> Self {
        let d = rho.dim();
        let rows = |f: fn(Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..d).map(|i| (0..d).map(|j| f(rho.get(i, j))).collect()).collect()
        };
        Self {
            dim: d,
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }
}

impl TryFrom<DensityMatrixJson> for DensityMatrix {
    type Error = Error;

    fn try_from(raw: DensityMatrixJson) -> Result<Self> {
        let d = raw.dim;
        let square = |rows: &Vec<Vec<f64>>| rows.len() == d && rows.iter().all(|r| r.len() == d);
        if d == 0 || !square(&raw.re) || !square(&raw.im) {
            return Err(Error::Shape(format!("re/im must both be {d}x{d}")));
        }
        let m = DMatrix::from_fn(d, d, |i, j| Complex64::new(raw.re[i][j], raw.im[i][j]));
        DensityMatrix::from_matrix(m)
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DensityMatrixJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = DensityMatrixJson::deserialize(d)?;
        raw.try_into().map_err(serde::de::Error::custom)
    }
}

/// Probability vector over photon number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonDistribution {
    probs: Vec<f64>,
}

impl PhotonDistribution {
    /// Validates nonnegativity and unit sum (1e-10).
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Shape("empty distribution".into()));
        }
        if let Some(&p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::domain("probability", p, "[0, 1]"));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > 1e-10 {
            return Err(Error::domain("probability sum", s, "1 ± 1e-10"));
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    pub fn to_density_matrix(&self) -> DensityMatrix {
        DensityMatrix::from_diagonal(&self.probs).expect("non-empty")
    }
}

/// Pure Fock state |n⟩⟨n| in a `dim`-dimensional space.
pub fn fock_state(n: usize, dim: usize) -> Result<DensityMatrix> {
    if n >= dim {
        return Err(Error::Cutoff { n, dim });
    }
    let mut probs = vec![0.0; dim];
    probs[n] = 1.0;
    DensityMatrix::from_diagonal(&probs)
}

/// Photon-number marginal of a two-mode squeezed vacuum with gain `lambda`,
/// `p_n ∝ (1 − λ²) λ^{2n}`, renormalized over the cutoff.
pub fn squeezed_marginal(lambda: f64, dim: usize) -> Result<PhotonDistribution> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::NonPhysicalGain(lambda));
    }
    if dim == 0 {
        return Err(Error::Shape("dim must be positive".into()));
    }
    let l2 = lambda * lambda;
    let mut probs: Vec<f64> = (0..dim).map(|n| (1.0 - l2) * l2.powi(n as i32)).collect();
    let s: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= s);
    PhotonDistribution::new(probs)
}

/// Probability mass of the untruncated squeezed marginal at n ≥ dim, `λ^{2·dim}`.
pub fn squeezed_tail_mass(lambda: f64, dim: usize) -> f64 {
    (lambda * lambda).powi(dim as i32)
}

/// Binomial coefficient as a float; exact for the small arguments used here.
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fock_states() {
        assert_eq!(fock_state(0, 5).unwrap().diagonal(), vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(fock_state(2, 5).unwrap().diagonal(), vec![0.0, 0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(fock_state(5, 5), Err(Error::Cutoff { n: 5, dim: 5 })));
        fock_state(3, 5).unwrap().validate().unwrap();
    }

    #[test]
    fn squeezed_marginal_values() {
        assert_eq!(squeezed_marginal(0.0, 5).unwrap().probs(), &[1.0, 0.0, 0.0, 0.0, 0.0]);
        let p = squeezed_marginal(0.1, 5).unwrap();
        assert_abs_diff_eq!(p.probs()[1] / p.probs()[0], 0.01, epsilon = 1e-14);
        let p = squeezed_marginal(0.5, 60).unwrap();
        for n in 0..10 {
            assert_abs_diff_eq!(p.probs()[n], 0.75 * 0.25f64.powi(n as i32), epsilon = 1e-14);
        }
        assert!(p.probs().windows(2).all(|w| w[1] <= w[0]));
        assert!(matches!(squeezed_marginal(1.0, 5), Err(Error::NonPhysicalGain(_))));
        assert!(squeezed_marginal(-0.1, 5).is_err());
    }

    #[test]
    fn tail_mass() {
        assert_abs_diff_eq!(squeezed_tail_mass(0.5, 2), 0.0625, epsilon = 1e-15);
    }

    #[test]
    fn json_layout() {
        let rho = DensityMatrix::pure(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&rho.to_json().unwrap()).unwrap();
        assert_eq!(v["dim"], 2);
        assert_abs_diff_eq!(v["im"][1][0].as_f64().unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(v["im"][0][1].as_f64().unwrap(), -0.5, epsilon = 1e-15);
        let back = DensityMatrix::from_json(&rho.to_json().unwrap()).unwrap();
        assert_eq!(back, rho);
        assert!(DensityMatrix::from_json(r#"{"dim":2,"re":[[1,0]],"im":[[0,0],[0,0]]}"#).is_err());
    }

    #[test]
    fn validation_catches_bad_states() {
        let bad = DensityMatrix::from_diagonal(&[1.2, -0.2]).unwrap();
        assert!(bad.validate().is_err());
        let ok = DensityMatrix::maximally_mixed(4).unwrap();
        ok.validate().unwrap();
        assert_abs_diff_eq!(ok.purity(), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(4, 0), 1.0);
        assert_eq!(binomial(2, 3), 0.0);
    }
}
