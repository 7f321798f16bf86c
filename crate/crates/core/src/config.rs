//! JSON simulation configuration and the pipelines built on it.

use serde::{Deserialize, Serialize};

use crate::cavity::{enhancement, finesse, CavitySpec, RateModel};
use crate::error::{Error, Result};
use crate::fock::{squeezed_tail_mass, DensityMatrix, DEFAULT_DIM, TRUNCATION_WARN};
use crate::herald::{apply_cavity, herald_state, predicted_rates, two_photon_rate_law, HeraldSpec, PredictedRates};
use crate::homodyne::{phase_schedule, sample, PhaseSchedule, QuadratureDataset};
use crate::loss::apply_loss;
use crate::tomo::TomoConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    /// Single-pass parametric gain.
    pub lambda: f64,
    #[serde(default = "default_rep_rate")]
    pub rep_rate_hz: f64,
    /// Fock cutoff of the simulated signal state.
    #[serde(default = "default_dim")]
    pub dim: usize,
}

fn default_rep_rate() -> f64 {
    82e6
}

fn default_dim() -> usize {
    DEFAULT_DIM
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossConfig {
    #[serde(default = "one")]
    pub eta_prep: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self { eta_prep: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionConfig {
    #[serde(default = "one")]
    pub eta_d: f64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self { eta_d: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    pub n_samples: usize,
    #[serde(default = "default_schedule")]
    pub schedule: PhaseSchedule,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_schedule() -> PhaseSchedule {
    PhaseSchedule::UniformRandom
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            n_samples: 7000,
            schedule: PhaseSchedule::UniformRandom,
            seed: None,
        }
    }
}

/// Externally measured rates to compare the rate law against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceRates {
    pub r1_hz: f64,
    #[serde(default)]
    pub r2_hz: Option<f64>,
    #[serde(default)]
    pub r2_uncertainty_hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub source: SourceConfig,
    #[serde(default)]
    pub cavity: Option<CavitySpec>,
    pub herald: HeraldSpec,
    #[serde(default)]
    pub losses: LossConfig,
    #[serde(default)]
    pub detection: DetectionConfig,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub tomo: TomoConfig,
    #[serde(default)]
    pub reference: Option<ReferenceRates>,
}

fn field(path: &str, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

fn in_range(path: &str, v: f64, lo: f64, hi: f64, lo_open: bool, hi_open: bool) -> Result<()> {
    let ok = v.is_finite() && if lo_open { v > lo } else { v >= lo } && if hi_open { v < hi } else { v <= hi };
    if ok {
        Ok(())
    } else {
        let l = if lo_open { '(' } else { '[' };
        let h = if hi_open { ')' } else { ']' };
        Err(field(path, format!("{v} is outside {l}{lo}, {hi}{h}")))
    }
}

impl SimulationConfig {
    /// Parses JSON, reporting the field path of the first problem.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            field(&path, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| field(&path.display().to_string(), e.to_string()))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        in_range("source.lambda", self.source.lambda, 0.0, 1.0, false, true)?;
        in_range(
            "source.rep_rate_hz",
            self.source.rep_rate_hz,
            0.0,
            f64::MAX,
            true,
            false,
        )?;
        if !(1..=crate::hermite::MAX_ORDER).contains(&self.source.dim) {
            return Err(field("source.dim", "must be in [1, 170]"));
        }
        if let Some(c) = &self.cavity {
            in_range("cavity.r_in", c.r_in, 0.0, 1.0, false, true)?;
            in_range("cavity.r_loop", c.r_loop, 0.0, 1.0, false, true)?;
            let gain = self.source.lambda * enhancement(c)?.sqrt();
            if gain >= 1.0 {
                return Err(field("cavity", format!("cavity-scaled gain {gain} is not below 1")));
            }
        }
        in_range("herald.split", self.herald.split, 0.0, 1.0, true, true)?;
        in_range("herald.eta_click", self.herald.eta_click, 0.0, 1.0, false, false)?;
        in_range("herald.dark", self.herald.dark, 0.0, 1.0, false, true)?;
        in_range("losses.eta_prep", self.losses.eta_prep, 0.0, 1.0, false, false)?;
        in_range("detection.eta_d", self.detection.eta_d, 0.0, 1.0, false, false)?;
        if self.sampling.n_samples == 0 {
            return Err(field("sampling.n_samples", "must be positive"));
        }
        if let PhaseSchedule::Stepped { steps: 0 } = self.sampling.schedule {
            return Err(field("sampling.schedule.steps", "must be positive"));
        }
        if self.tomo.dim < 2 || self.tomo.dim > crate::hermite::MAX_ORDER {
            return Err(field("tomo.dim", "must be in [2, 170]"));
        }
        in_range("tomo.eta_d", self.tomo.eta_d, 0.0, 1.0, true, false)?;
        in_range("tomo.tol", self.tomo.tol, 0.0, f64::MAX, false, false)?;
        self.tomo.validate().map_err(|e| field("tomo", e.to_string()))?;
        if let Some(r) = &self.reference {
            in_range("reference.r1_hz", r.r1_hz, 0.0, f64::MAX, false, false)?;
        }
        Ok(())
    }

    pub fn rate_model(&self) -> RateModel {
        RateModel {
            rep_rate: self.source.rep_rate_hz,
            base_gain: self.source.lambda,
        }
    }

    /// Gain after the optional cavity build-up.
    pub fn effective_model(&self) -> Result<RateModel> {
        match &self.cavity {
            Some(c) => apply_cavity(&self.rate_model(), c),
            None => Ok(self.rate_model()),
        }
    }

    /// Tail of the source distribution above the simulation cutoff, when it
    /// exceeds the warning threshold.
    pub fn truncation_warning(&self) -> Result<Option<f64>> {
        let tail = squeezed_tail_mass(self.effective_model()?.base_gain, self.source.dim);
        Ok((tail > TRUNCATION_WARN).then_some(tail))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityGains {
    pub enhancement: f64,
    pub finesse: f64,
    pub rate1_gain: f64,
    pub rate2_gain: f64,
}

/// Rate law evaluated on an externally measured single-photon rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateLawCheck {
    pub r1_hz: f64,
    pub rep_rate_hz: f64,
    /// `R1² / (2𝓡)`.
    pub r2_formula_hz: f64,
    pub r2_measured_hz: Option<f64>,
    pub r2_measured_uncertainty_hz: Option<f64>,
    /// Whether the formula lies within the measured value ± its uncertainty;
    /// informational only, nothing is fitted to make it so.
    pub within_uncertainty: Option<bool>,
}

impl RateLawCheck {
    pub fn new(reference: &ReferenceRates, rep_rate_hz: f64) -> Self {
        let r2 = two_photon_rate_law(reference.r1_hz, rep_rate_hz);
        let within = match (reference.r2_hz, reference.r2_uncertainty_hz) {
            (Some(m), Some(u)) => Some((r2 - m).abs() <= u),
            _ => None,
        };
        Self {
            r1_hz: reference.r1_hz,
            rep_rate_hz,
            r2_formula_hz: r2,
            r2_measured_hz: reference.r2_hz,
            r2_measured_uncertainty_hz: reference.r2_uncertainty_hz,
            within_uncertainty: within,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub rep_rate_hz: f64,
    pub lambda_single_pass: f64,
    pub lambda_effective: f64,
    pub single_pass: PredictedRates,
    pub predicted: PredictedRates,
    /// `R1²/(2𝓡)` from the predicted `R1`, next to the predicted `R2`.
    pub r2_rate_law_hz: f64,
    pub cavity: Option<CavityGains>,
    pub reference: Option<RateLawCheck>,
}

pub fn rate_report(cfg: &SimulationConfig) -> Result<RateReport> {
    let base = cfg.rate_model();
    let eff = cfg.effective_model()?;
    let single_pass = predicted_rates(&base, &cfg.herald)?;
    let predicted = predicted_rates(&eff, &cfg.herald)?;
    let cavity = match &cfg.cavity {
        Some(c) => {
            let gain = |a: f64, b: f64| if b > 0.0 { a / b } else { f64::NAN };
            Some(CavityGains {
                enhancement: enhancement(c)?,
                finesse: finesse(c)?,
                rate1_gain: gain(predicted.r1_hz, single_pass.r1_hz),
                rate2_gain: gain(predicted.r2_hz, single_pass.r2_hz),
            })
        }
        None => None,
    };
    Ok(RateReport {
        rep_rate_hz: base.rep_rate,
        lambda_single_pass: base.base_gain,
        lambda_effective: eff.base_gain,
        single_pass,
        predicted,
        r2_rate_law_hz: two_photon_rate_law(predicted.r1_hz, base.rep_rate),
        cavity,
        reference: cfg.reference.as_ref().map(|r| RateLawCheck::new(r, base.rep_rate)),
    })
}

/// Heralded state summary written next to the simulated data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeraldReport {
    pub pattern: String,
    pub prob_per_pulse: f64,
    pub rate_hz: f64,
    pub rates: RateReport,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    /// Heralded signal after preparation loss, before detection.
    pub state: DensityMatrix,
    pub dataset: QuadratureDataset,
    pub report: HeraldReport,
}

/// Herald → preparation loss → homodyne sampling with detection loss.
pub fn simulate(cfg: &SimulationConfig, seed: u64) -> Result<Simulation> {
    let eff = cfg.effective_model()?;
    let outcome = herald_state(eff.base_gain, &cfg.herald, cfg.source.dim)?;
    let state = apply_loss(&outcome.state, cfg.losses.eta_prep)?;
    let phases = phase_schedule(cfg.sampling.schedule, cfg.sampling.n_samples, seed)?;
    let mut dataset = sample(&state, cfg.detection.eta_d, &phases, seed)?;
    dataset.meta.source = format!(
        "{} herald, lambda {}, eta_prep {}, eta_d {}",
        cfg.herald.pattern, eff.base_gain, cfg.losses.eta_prep, cfg.detection.eta_d
    );
    Ok(Simulation {
        state,
        dataset,
        report: HeraldReport {
            pattern: cfg.herald.pattern.to_string(),
            prob_per_pulse: outcome.prob_per_pulse,
            rate_hz: outcome.prob_per_pulse * eff.rep_rate,
            rates: rate_report(cfg)?,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::herald::ClickPattern;

    const BASIC: &str = r#"{
        "source": {"lambda": 0.01},
        "cavity": {"r_in": 0.90, "r_loop": 0.93},
        "herald": {"eta_click": 1.0, "pattern": "BOTH"},
        "losses": {"eta_prep": 0.81},
        "detection": {"eta_d": 0.67},
        "sampling": {"n_samples": 100, "seed": 42},
        "tomo": {"eta_d": 0.67}
    }"#;

    #[test]
    fn parses_with_defaults() {
        let cfg = SimulationConfig::from_json(BASIC).unwrap();
        assert_eq!(cfg.source.rep_rate_hz, 82e6);
        assert_eq!(cfg.source.dim, 5);
        assert_eq!(cfg.herald.pattern, ClickPattern::Both);
        assert_eq!(cfg.sampling.schedule, PhaseSchedule::UniformRandom);
        assert_eq!(cfg.tomo.dim, 5);
    }

    #[test]
    fn reports_field_paths() {
        let bad = BASIC.replace(r#""eta_click": 1.0"#, r#""eta_click": "high""#);
        match SimulationConfig::from_json(&bad) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "herald.eta_click"),
            other => panic!("{other:?}"),
        }
        let bad = BASIC.replace(r#""eta_prep": 0.81"#, r#""eta_prep": 1.81"#);
        match SimulationConfig::from_json(&bad) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "losses.eta_prep"),
            other => panic!("{other:?}"),
        }
        let bad = BASIC.replace(r#""lambda": 0.01"#, r#""lambda": 0.5"#);
        match SimulationConfig::from_json(&bad) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "cavity"),
            other => panic!("{other:?}"),
        }
        let bad = BASIC.replace(r#""pattern": "BOTH""#, r#""pattern": "SOMETIMES""#);
        assert!(matches!(SimulationConfig::from_json(&bad), Err(Error::Config { .. })));
        let bad = BASIC.replace(r#""seed": 42"#, r#""seed": 42, "colour": 1"#);
        match SimulationConfig::from_json(&bad) {
            Err(Error::Config { path, .. }) => assert!(path.starts_with("sampling"), "{path}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cavity_free_config_gives_single_pass_rates() {
        let mut cfg = SimulationConfig::from_json(BASIC).unwrap();
        cfg.cavity = None;
        let r = rate_report(&cfg).unwrap();
        assert_eq!(r.single_pass, r.predicted);
        assert!(r.cavity.is_none());
    }

    #[test]
    fn simulate_pipeline() {
        let cfg = SimulationConfig::from_json(BASIC).unwrap();
        let sim = simulate(&cfg, 42).unwrap();
        assert_eq!(sim.dataset.len(), 100);
        sim.state.validate().unwrap();
        assert!((sim.state.get(2, 2).re - 0.6561).abs() < 0.01);
        let again = simulate(&cfg, 42).unwrap();
        assert_eq!(sim.dataset, again.dataset);
    }

    #[test]
    fn zero_gain_single_click_is_impossible() {
        let mut cfg = SimulationConfig::from_json(BASIC).unwrap();
        cfg.source.lambda = 0.0;
        cfg.herald.pattern = ClickPattern::AOrBSingle;
        assert!(matches!(simulate(&cfg, 1), Err(Error::ImpossibleHerald { .. })));
        let r = rate_report(&cfg).unwrap();
        assert_eq!((r.predicted.r1_hz, r.predicted.r2_hz), (0.0, 0.0));
    }

    #[test]
    fn rate_law_reference() {
        let check = RateLawCheck::new(
            &ReferenceRates {
                r1_hz: 5.8e3,
                r2_hz: Some(0.14),
                r2_uncertainty_hz: Some(0.05),
            },
            82e6,
        );
        assert!((check.r2_formula_hz - 0.205).abs() < 1e-3);
        assert_eq!(check.within_uncertainty, Some(false));
    }
}
