//! Conditional state preparation with two on/off detectors behind a beam
//! splitter in the idler arm.
//!
//! Signal and idler carry identical photon numbers, so a click pattern on the
//! idler side reweights the photon-number distribution of the signal:
//! `w_n = P_source(n) · P(pattern | n)`.

use serde::{Deserialize, Serialize};

use crate::cavity::{enhancement, CavitySpec, RateModel};
use crate::error::{Error, Result};
use crate::fock::{binomial, squeezed_marginal, DensityMatrix};

/// Idler detector outcomes. The four non-composite patterns
/// (`None`, `AOnly`, `BOnly`, `Both`) are mutually exclusive and exhaustive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ClickPattern {
    None,
    AOnly,
    BOnly,
    /// Exactly one of the two detectors fired.
    AOrBSingle,
    Both,
}

impl std::fmt::Display for ClickPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ClickPattern::None => "NONE",
            ClickPattern::AOnly => "A_ONLY",
            ClickPattern::BOnly => "B_ONLY",
            ClickPattern::AOrBSingle => "A_OR_B_SINGLE",
            ClickPattern::Both => "BOTH",
        };
        f.write_str(s)
    }
}

/// Beam splitter and detector parameters of the herald arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeraldSpec {
    /// Transmittance toward detector A.
    #[serde(default = "default_split")]
    pub split: f64,
    /// Lumped idler efficiency (filters, coupling, detector).
    pub eta_click: f64,
    /// Dark-count probability per detector per pulse.
    #[serde(default)]
    pub dark: f64,
    pub pattern: ClickPattern,
}

fn default_split() -> f64 {
    0.5
}

impl HeraldSpec {
    pub fn new(eta_click: f64, pattern: ClickPattern) -> Self {
        Self {
            split: 0.5,
            eta_click,
            dark: 0.0,
            pattern,
        }
    }

    pub fn with_pattern(self, pattern: ClickPattern) -> Self {
        Self { pattern, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.split > 0.0 && self.split < 1.0) {
            return Err(Error::domain("split", self.split, "(0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.eta_click) {
            return Err(Error::domain("eta_click", self.eta_click, "[0, 1]"));
        }
        if !(0.0..1.0).contains(&self.dark) {
            return Err(Error::domain("dark", self.dark, "[0, 1)"));
        }
        Ok(())
    }
}

/// Probability of `pattern` given `n` photons in the idler.
///
/// Each photon independently reaches A with probability `s` and is detected
/// with probability `η`, so `P(A silent | n) = (1−d)(1 − sη)ⁿ`,
/// `P(B silent | n) = (1−d)(1 − (1−s)η)ⁿ` and
/// `P(both silent | n) = (1−d)² (1 − η)ⁿ`; the rest follows by
/// inclusion–exclusion. The differences are evaluated as sums of
/// nonnegative terms so that, for example, `P(BOTH | 1)` is exactly zero
/// without dark counts.
pub fn click_probability(pattern: ClickPattern, n: usize, spec: &HeraldSpec) -> f64 {
    let HeraldSpec {
        split: s,
        eta_click: eta,
        dark: d,
        ..
    } = *spec;
    let u = s * eta; // detected at A
    let v = (1.0 - s) * eta; // detected at B
    let q = 1.0 - eta; // missed
    let k = n as i32;
    let silent = q.powi(k);
    // photons fire A (resp. B) but not the other detector
    let only_a = fired_only(u, q, n);
    let only_b = fired_only(v, q, n);
    // photons fire both: i ≥ 1 detections at A, at least one of the rest at B
    let both: f64 = (1..=n)
        .map(|i| binomial(n, i) * u.powi(i as i32) * fired_only(v, q, n - i))
        .sum();
    let a_only = (1.0 - d) * (only_a + d * silent);
    let b_only = (1.0 - d) * (only_b + d * silent);
    let p = match pattern {
        ClickPattern::None => (1.0 - d) * (1.0 - d) * silent,
        ClickPattern::AOnly => a_only,
        ClickPattern::BOnly => b_only,
        ClickPattern::AOrBSingle => a_only + b_only,
        ClickPattern::Both => both + d * (only_a + only_b) + d * d * silent,
    };
    p.clamp(0.0, 1.0)
}

// (q + w)^m − q^m = w Σ_{j<m} (q + w)^j q^{m−1−j}
fn fired_only(w: f64, q: f64, m: usize) -> f64 {
    (0..m)
        .map(|j| (q + w).powi(j as i32) * q.powi((m - 1 - j) as i32))
        .sum::<f64>()
        * w
}

/// Heralded signal state with its per-pulse success probability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeraldOutcome {
    pub state: DensityMatrix,
    pub prob_per_pulse: f64,
    pub rate_hz: Option<f64>,
}

impl HeraldOutcome {
    pub fn with_rep_rate(mut self, rep_rate: f64) -> Self {
        self.rate_hz = Some(self.prob_per_pulse * rep_rate);
        self
    }
}

/// Unnormalized signal weights `w_n` for photon numbers `0..dim`.
pub fn herald_weights(lambda: f64, spec: &HeraldSpec, dim: usize) -> Result<Vec<f64>> {
    spec.validate()?;
    let source = squeezed_marginal(lambda, dim)?;
    Ok(source
        .probs()
        .iter()
        .enumerate()
        .map(|(n, p)| p * click_probability(spec.pattern, n, spec))
        .collect())
}

pub fn herald_state(lambda: f64, spec: &HeraldSpec, dim: usize) -> Result<HeraldOutcome> {
    let w = herald_weights(lambda, spec, dim)?;
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return Err(Error::ImpossibleHerald {
            pattern: spec.pattern.to_string(),
        });
    }
    let probs: Vec<f64> = w.iter().map(|v| v / total).collect();
    Ok(HeraldOutcome {
        state: DensityMatrix::from_diagonal(&probs)?,
        prob_per_pulse: total,
        rate_hz: None,
    })
}

/// Smallest cutoff whose squeezed-marginal tail is below 1e-16 (at least 5).
pub fn adaptive_cutoff(lambda: f64) -> usize {
    let l2 = lambda * lambda;
    let mut dim = 5;
    while l2.powi(dim as i32) > 1e-16 && dim < crate::hermite::MAX_ORDER {
        dim += 1;
    }
    dim
}

/// Heralded one- and two-photon rates in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedRates {
    pub r1_hz: f64,
    pub r2_hz: f64,
}

/// `R1` from the exactly-one-click pattern, `R2` from the both-click pattern.
pub fn predicted_rates(model: &RateModel, spec: &HeraldSpec) -> Result<PredictedRates> {
    model.validate()?;
    let dim = adaptive_cutoff(model.base_gain);
    let prob = |pattern| -> Result<f64> {
        Ok(herald_weights(model.base_gain, &spec.with_pattern(pattern), dim)?
            .iter()
            .sum())
    };
    Ok(PredictedRates {
        r1_hz: model.rep_rate * prob(ClickPattern::AOrBSingle)?,
        r2_hz: model.rep_rate * prob(ClickPattern::Both)?,
    })
}

/// Low-gain two-photon rate implied by a single-photon rate: `R1² / (2𝓡)`.
pub fn two_photon_rate_law(r1_hz: f64, rep_rate: f64) -> f64 {
    r1_hz * r1_hz / (2.0 * rep_rate)
}

/// Scales the gain amplitude by `√𝓔` for a pump power build-up `𝓔`.
pub fn apply_cavity(model: &RateModel, cavity: &CavitySpec) -> Result<RateModel> {
    model.validate()?;
    let e = enhancement(cavity)?;
    let gain = model.base_gain * e.sqrt();
    if gain >= 1.0 {
        return Err(Error::NonPhysicalGain(gain));
    }
    Ok(RateModel {
        base_gain: gain,
        ..*model
    })
}
