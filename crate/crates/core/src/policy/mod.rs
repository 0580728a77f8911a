//! Augmentation sub-policies and the adaptive sampler that picks one per
//! mini-batch.
//!
//! A sub-policy makes one choice in each of four categories: amplitude,
//! speed, placement and hardware. In signal mode the same categories map to
//! magnitude, time, rotation and jitter transforms.

mod apply;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::rng_from_seed;
use crate::ppda::PlacementPerturbation;

pub use apply::{
    apply, apply_ppda, apply_stda, draw_ppda, draw_stda, AugmentInput, MagnitudeDraw, PlacementDraw,
    PpdaDraw, Seeds, SimulationWindow, StdaDraw,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AugMode {
    /// Signal-space transforms on windows.
    Stda,
    /// Parameter-space transforms followed by re-synthesis.
    Ppda,
}

impl std::fmt::Display for AugMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AugMode::Stda => "stda",
            AugMode::Ppda => "ppda",
        })
    }
}

impl std::str::FromStr for AugMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stda" => Ok(AugMode::Stda),
            "ppda" => Ok(AugMode::Ppda),
            other => Err(Error::param("mode", format!("unknown mode `{other}`"))),
        }
    }
}

/// Scaling or warping, with an index into the configured option grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleOrWarp {
    Scale(usize),
    Warp(usize),
}

/// One choice per category; `None` is the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubPolicy {
    pub amplitude: Option<ScaleOrWarp>,
    pub speed: Option<ScaleOrWarp>,
    pub placement: Option<usize>,
    pub hardware: Option<usize>,
}

impl SubPolicy {
    pub const IDENTITY: SubPolicy = SubPolicy {
        amplitude: None,
        speed: None,
        placement: None,
        hardware: None,
    };

    pub fn is_identity(&self) -> bool {
        *self == SubPolicy::IDENTITY
    }

    /// Checks every option index against the grids in `cfg`.
    pub fn validate(&self, cfg: &PolicyConfig) -> Result<()> {
        let check = |ok: bool, what: &'static str| {
            if ok {
                Ok(())
            } else {
                Err(Error::param(what, "option index out of range for the configured grid"))
            }
        };
        match self.amplitude {
            Some(ScaleOrWarp::Scale(i)) => check(i < cfg.amplitude.scale_sigma.len(), "amplitude")?,
            Some(ScaleOrWarp::Warp(i)) => check(i < cfg.amplitude.warp.len(), "amplitude")?,
            None => {}
        }
        match self.speed {
            Some(ScaleOrWarp::Scale(i)) => check(i < cfg.speed.scale_ranges.len(), "speed")?,
            Some(ScaleOrWarp::Warp(i)) => check(i < cfg.speed.warp.len(), "speed")?,
            None => {}
        }
        if let Some(i) = self.placement {
            check(i < cfg.placement.len(), "placement")?;
        }
        if let Some(i) = self.hardware {
            check(i < cfg.hardware.noise_sigma.len(), "hardware")?;
        }
        Ok(())
    }
}

impl std::fmt::Display for SubPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sw = |c: Option<ScaleOrWarp>| match c {
            None => "-".to_string(),
            Some(ScaleOrWarp::Scale(i)) => format!("scale[{i}]"),
            Some(ScaleOrWarp::Warp(i)) => format!("warp[{i}]"),
        };
        let ix = |c: Option<usize>| c.map_or("-".to_string(), |i| format!("[{i}]"));
        write!(
            f,
            "amplitude={} speed={} placement={} hardware={}",
            sw(self.amplitude),
            sw(self.speed),
            ix(self.placement),
            ix(self.hardware)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnitudeWarpOption {
    pub sigma: f64,
    pub knots: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWarpOption {
    pub knots: usize,
    pub max_speed_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeGrid {
    pub scale_sigma: Vec<f64>,
    pub warp: Vec<MagnitudeWarpOption>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeedGrid {
    /// `β ~ U[lo, hi]` per option.
    pub scale_ranges: Vec<[f64; 2]>,
    pub warp: Vec<TimeWarpOption>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlacementOption {
    /// Orientation perturbation of the simulated sensors.
    pub perturb: PlacementPerturbation,
    /// Borrow the placement of another subject before perturbing.
    pub swap_subjects: bool,
    /// Per-axis range of the random rotation used in signal mode.
    pub rotation_range_deg: f64,
}

impl Default for PlacementOption {
    fn default() -> Self {
        PlacementOption {
            perturb: PlacementPerturbation::default(),
            swap_subjects: false,
            rotation_range_deg: 180.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardwareGrid {
    pub noise_sigma: Vec<f64>,
    /// Bias per axis `U[−range, range]` in simulation mode.
    pub bias_range: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMode {
    /// Identity vs one fixed augmentation, 50/50.
    Binary,
    /// Every combination of per-category options.
    Combinatorial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RotationScope {
    #[default]
    Window,
    Batch,
}

/// The policy document: mode, sampler settings and parameter grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    pub mode: AugMode,
    pub sampling: SamplingMode,
    /// The augmentation paired with identity in binary sampling.
    pub binary_augmentation: Option<SubPolicy>,
    pub learning_rate: f64,
    pub probability_floor: f64,
    /// Joints whose angles amplitude transforms scale; `None` means all.
    pub joint_mask: Option<Vec<usize>>,
    /// Whether signal-mode rotation angles are drawn per window or per batch.
    pub rotation_scope: RotationScope,
    pub amplitude: AmplitudeGrid,
    pub speed: SpeedGrid,
    pub placement: Vec<PlacementOption>,
    pub hardware: HardwareGrid,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            mode: AugMode::Ppda,
            sampling: SamplingMode::Combinatorial,
            binary_augmentation: None,
            learning_rate: 0.1,
            probability_floor: 0.05,
            joint_mask: None,
            rotation_scope: RotationScope::Window,
            amplitude: AmplitudeGrid {
                scale_sigma: vec![0.1, 0.2, 0.4, 0.6],
                warp: [(0.2, 2), (0.2, 4), (0.4, 2), (0.4, 4)]
                    .map(|(sigma, knots)| MagnitudeWarpOption { sigma, knots })
                    .to_vec(),
            },
            speed: SpeedGrid {
                scale_ranges: vec![[0.7, 0.9], [1.1, 1.3], [0.75, 1.5], [0.5, 2.0]],
                warp: [(2, 1.5), (2, 2.0), (4, 1.5), (4, 2.0)]
                    .map(|(knots, max_speed_ratio)| TimeWarpOption {
                        knots,
                        max_speed_ratio,
                    })
                    .to_vec(),
            },
            placement: vec![PlacementOption::default()],
            hardware: HardwareGrid {
                noise_sigma: vec![0.05, 0.1, 0.15, 0.2],
                bias_range: 1.0,
            },
        }
    }
}

/// Number of choices per category, identity included.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptionCounts {
    pub amplitude: usize,
    pub speed: usize,
    pub placement: usize,
    pub hardware: usize,
}

impl OptionCounts {
    pub fn total(&self) -> usize {
        self.amplitude * self.speed * self.placement * self.hardware
    }
}

impl PolicyConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: PolicyConfig = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("policy config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::param("learning_rate", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.probability_floor) {
            return Err(Error::param("probability_floor", "must lie in [0, 1)"));
        }
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !self.amplitude.scale_sigma.iter().all(|&s| nonneg(s)) {
            return Err(Error::param("amplitude.scale_sigma", "sigma must be >= 0"));
        }
        if !self.amplitude.warp.iter().all(|w| nonneg(w.sigma) && w.knots >= 2) {
            return Err(Error::param("amplitude.warp", "need sigma >= 0 and knots >= 2"));
        }
        if !self
            .speed
            .scale_ranges
            .iter()
            .all(|[lo, hi]| lo.is_finite() && *lo > 0.0 && hi >= lo && hi.is_finite())
        {
            return Err(Error::param("speed.scale_ranges", "need 0 < lo <= hi"));
        }
        if !self
            .speed
            .warp
            .iter()
            .all(|w| w.knots >= 2 && w.max_speed_ratio > 1.0 && w.max_speed_ratio.is_finite())
        {
            return Err(Error::param("speed.warp", "need knots >= 2 and max_speed_ratio > 1"));
        }
        if !self.placement.iter().all(|p| nonneg(p.rotation_range_deg)) {
            return Err(Error::param("placement.rotation_range_deg", "must be >= 0"));
        }
        if !self.hardware.noise_sigma.iter().all(|&s| nonneg(s)) || !nonneg(self.hardware.bias_range) {
            return Err(Error::param("hardware", "sigma and bias_range must be >= 0"));
        }
        if let Some(aug) = &self.binary_augmentation {
            aug.validate(self)?;
        }
        Ok(())
    }

    pub fn option_counts(&self) -> OptionCounts {
        OptionCounts {
            amplitude: 1 + self.amplitude.scale_sigma.len() + self.amplitude.warp.len(),
            speed: 1 + self.speed.scale_ranges.len() + self.speed.warp.len(),
            placement: 1 + self.placement.len(),
            hardware: 1 + self.hardware.noise_sigma.len(),
        }
    }

    /// Every sub-policy, identity first, amplitude varying slowest.
    pub fn enumerate(&self) -> Vec<SubPolicy> {
        let scale_or_warp = |scale: usize, warp: usize| {
            std::iter::once(None)
                .chain((0..scale).map(|i| Some(ScaleOrWarp::Scale(i))))
                .chain((0..warp).map(|i| Some(ScaleOrWarp::Warp(i))))
                .collect::<Vec<_>>()
        };
        let indexed = |n: usize| std::iter::once(None).chain((0..n).map(Some)).collect::<Vec<_>>();
        let amplitude = scale_or_warp(self.amplitude.scale_sigma.len(), self.amplitude.warp.len());
        let speed = scale_or_warp(self.speed.scale_ranges.len(), self.speed.warp.len());
        let placement = indexed(self.placement.len());
        let hardware = indexed(self.hardware.noise_sigma.len());
        let mut out = Vec::with_capacity(self.option_counts().total());
        for &a in &amplitude {
            for &s in &speed {
                for &p in &placement {
                    for &h in &hardware {
                        out.push(SubPolicy {
                            amplitude: a,
                            speed: s,
                            placement: p,
                            hardware: h,
                        });
                    }
                }
            }
        }
        out
    }
}

/// Sub-policies with sampling weights and the derived probabilities.
///
/// Probabilities mix the normalized weights with a uniform floor:
/// `pᵢ = (1 − ε)·wᵢ/Σw + ε/k`, so every sub-policy keeps at least `ε/k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyState {
    subpolicies: Vec<SubPolicy>,
    weights: Vec<f64>,
    probabilities: Vec<f64>,
    sampling: SamplingMode,
    learning_rate: f64,
    floor: f64,
}

impl PolicyState {
    /// Explicit weights. Weights must be finite, nonnegative, with a positive sum.
    pub fn with_weights(
        subpolicies: Vec<SubPolicy>,
        weights: Vec<f64>,
        sampling: SamplingMode,
        learning_rate: f64,
        floor: f64,
    ) -> Result<Self> {
        if subpolicies.is_empty() {
            return Err(Error::param("subpolicies", "empty sub-policy set"));
        }
        if weights.len() != subpolicies.len() {
            return Err(Error::LengthMismatch {
                field: "weights".into(),
                expected: subpolicies.len(),
                found: weights.len(),
            });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::param("weights", "need finite nonnegative weights with positive sum"));
        }
        if !(learning_rate.is_finite() && learning_rate > 0.0) {
            return Err(Error::param("learning_rate", "must be positive"));
        }
        if !(0.0..1.0).contains(&floor) {
            return Err(Error::param("probability_floor", "must lie in [0, 1)"));
        }
        let mut state = PolicyState {
            subpolicies,
            weights,
            probabilities: Vec::new(),
            sampling,
            learning_rate,
            floor,
        };
        state.refresh_probabilities();
        Ok(state)
    }

    /// Identity and `aug`, equally likely.
    pub fn build_binary(aug: SubPolicy, learning_rate: f64, floor: f64) -> Result<Self> {
        if aug.is_identity() {
            return Err(Error::param("augmentation", "binary policy needs a non-identity augmentation"));
        }
        PolicyState::with_weights(
            vec![SubPolicy::IDENTITY, aug],
            vec![1.0, 1.0],
            SamplingMode::Binary,
            learning_rate,
            floor,
        )
    }

    /// The full Cartesian product of the configured options, uniform.
    pub fn build_combinatorial(cfg: &PolicyConfig) -> Result<Self> {
        let all = cfg.enumerate();
        let k = all.len();
        PolicyState::with_weights(
            all,
            vec![1.0; k],
            SamplingMode::Combinatorial,
            cfg.learning_rate,
            cfg.probability_floor,
        )
    }

    pub fn from_config(cfg: &PolicyConfig) -> Result<Self> {
        cfg.validate()?;
        match cfg.sampling {
            SamplingMode::Combinatorial => PolicyState::build_combinatorial(cfg),
            SamplingMode::Binary => {
                let aug = cfg.binary_augmentation.ok_or_else(|| {
                    Error::param("binary_augmentation", "binary sampling needs an augmentation")
                })?;
                PolicyState::build_binary(aug, cfg.learning_rate, cfg.probability_floor)
            }
        }
    }

    fn refresh_probabilities(&mut self) {
        let k = self.weights.len() as f64;
        let total: f64 = self.weights.iter().sum();
        let floor = self.floor;
        self.probabilities = self
            .weights
            .iter()
            .map(|w| (1.0 - floor) * w / total + floor / k)
            .collect();
    }

    pub fn subpolicies(&self) -> &[SubPolicy] {
        &self.subpolicies
    }

    pub fn subpolicy(&self, index: usize) -> Option<&SubPolicy> {
        self.subpolicies.get(index)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn sampling(&self) -> SamplingMode {
        self.sampling
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn len(&self) -> usize {
        self.subpolicies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subpolicies.is_empty()
    }

    /// A reusable categorical sampler over the current probabilities.
    pub fn sampler(&self) -> WeightedIndex<f64> {
        WeightedIndex::new(&self.probabilities).expect("probabilities are a valid distribution")
    }

    /// One categorical draw, deterministic in `seed`.
    pub fn sample(&self, seed: u64) -> usize {
        self.sampler().sample(&mut rng_from_seed(seed))
    }

    /// Exponentiated-gradient step: `wᵢ ← wᵢ·exp(η·r̄ᵢ)` with `r̄ᵢ` the mean
    /// reward reported for `i` (zero when unreported).
    pub fn update_weights(&self, rewards: &[(usize, f64)]) -> Result<PolicyState> {
        if rewards.is_empty() {
            return Ok(self.clone());
        }
        let k = self.len();
        let mut sum = vec![0.0; k];
        let mut count = vec![0usize; k];
        for &(i, r) in rewards {
            if i >= k {
                return Err(Error::IndexOutOfRange { index: i, len: k });
            }
            if !r.is_finite() {
                return Err(Error::param("reward", format!("non-finite reward for sub-policy {i}")));
            }
            sum[i] += r;
            count[i] += 1;
        }
        let mut log_w: Vec<f64> = self
            .weights
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let mean = if count[i] > 0 { sum[i] / count[i] as f64 } else { 0.0 };
                w.ln() + self.learning_rate * mean
            })
            .collect();
        // rescale so the largest weight is 1
        let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for lw in &mut log_w {
            *lw -= max;
        }
        let mut next = self.clone();
        next.weights = log_w.into_iter().map(|lw| lw.exp().max(f64::MIN_POSITIVE)).collect();
        next.refresh_probabilities();
        Ok(next)
    }

    /// Whether all probabilities equal `1/k` within `tol`.
    pub fn is_uniform(&self, tol: f64) -> bool {
        let p = 1.0 / self.len() as f64;
        self.probabilities.iter().all(|q| (q - p).abs() <= tol)
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::{Distribution as _, Normal};

    use super::*;

    fn aug() -> SubPolicy {
        SubPolicy {
            hardware: Some(1),
            ..Default::default()
        }
    }

    #[test]
    fn binary_is_even() {
        let s = PolicyState::build_binary(aug(), 0.1, 0.05).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.probabilities(), &[0.5, 0.5]);
        assert!(PolicyState::build_binary(SubPolicy::IDENTITY, 0.1, 0.05).is_err());
    }

    #[test]
    fn binary_sampling_frequency() {
        let s = PolicyState::build_binary(aug(), 0.1, 0.05).unwrap();
        let sampler = s.sampler();
        let mut rng = rng_from_seed(3);
        let n = 100_000;
        let identity = (0..n).filter(|_| sampler.sample(&mut rng) == 0).count();
        assert!((identity as f64 / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn default_space_has_810_uniform_entries() {
        let cfg = PolicyConfig::default();
        let counts = cfg.option_counts();
        assert_eq!(
            (counts.amplitude, counts.speed, counts.placement, counts.hardware),
            (9, 9, 2, 5)
        );
        let s = PolicyState::build_combinatorial(&cfg).unwrap();
        assert_eq!(s.len(), 810);
        assert!(s.is_uniform(1e-15));
        assert!(s.subpolicies()[0].is_identity());
        let unique: std::collections::HashSet<_> = s.subpolicies().iter().collect();
        assert_eq!(unique.len(), 810);
        for sp in s.subpolicies() {
            sp.validate(&cfg).unwrap();
        }
    }

    #[test]
    fn empty_grids_give_identity_only() {
        let cfg = PolicyConfig {
            amplitude: AmplitudeGrid { scale_sigma: vec![], warp: vec![] },
            speed: SpeedGrid { scale_ranges: vec![], warp: vec![] },
            placement: vec![],
            hardware: HardwareGrid { noise_sigma: vec![], bias_range: 1.0 },
            ..Default::default()
        };
        let s = PolicyState::build_combinatorial(&cfg).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.sample(5), 0);
    }

    #[test]
    fn degenerate_weights_always_pick_first() {
        let s = PolicyState::with_weights(
            vec![SubPolicy::IDENTITY, aug(), aug()],
            vec![1.0, 0.0, 0.0],
            SamplingMode::Combinatorial,
            0.1,
            0.0,
        )
        .unwrap();
        for seed in 0..1000 {
            assert_eq!(s.sample(seed), 0);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let s = PolicyState::build_combinatorial(&PolicyConfig::default()).unwrap();
        assert_eq!(s.sample(99), s.sample(99));
    }

    #[test]
    fn update_rules() {
        let s = PolicyState::build_combinatorial(&PolicyConfig::default()).unwrap();
        assert_eq!(s.update_weights(&[]).unwrap().probabilities(), s.probabilities());
        let next = s.update_weights(&[(7, 0.4)]).unwrap();
        assert!(next.probabilities()[7] > s.probabilities()[7]);
        assert!(s.update_weights(&[(0, f64::NAN)]).is_err());
        assert!(s.update_weights(&[(810, 1.0)]).is_err());
    }

    #[test]
    fn bandit_finds_best_arm() {
        let means = [0.0, 0.1, 0.3];
        let mut wins = 0;
        for seed in 0..20u64 {
            let mut s = PolicyState::with_weights(
                vec![SubPolicy::IDENTITY, aug(), SubPolicy { hardware: Some(2), ..Default::default() }],
                vec![1.0; 3],
                SamplingMode::Combinatorial,
                0.5,
                0.05,
            )
            .unwrap();
            let mut rng = rng_from_seed(seed);
            let noise = Normal::new(0.0, 0.1).unwrap();
            for round in 0..200 {
                let arm = s.sample(crate::noise::derive_seed(seed, "round", round));
                let r = means[arm] + noise.sample(&mut rng);
                s = s.update_weights(&[(arm, r)]).unwrap();
            }
            if s.probabilities()[2] > 0.8 {
                wins += 1;
            }
            let _: f64 = rng.random();
        }
        assert!(wins >= 18, "{wins}/20");
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = PolicyConfig::default();
        assert_eq!(PolicyConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        assert!(PolicyConfig::from_json(r#"{"learning_rate": -1}"#).is_err());
        assert!(PolicyConfig::from_json(r#"{"bogus": 1}"#).is_err());
        let binary = PolicyConfig::from_json(
            r#"{"sampling": "binary", "binary_augmentation": {"speed": {"warp": 1}}}"#,
        )
        .unwrap();
        let s = PolicyState::from_config(&binary).unwrap();
        assert_eq!(s.subpolicies()[1].speed, Some(ScaleOrWarp::Warp(1)));
        let bad = PolicyConfig::from_json(r#"{"sampling": "binary", "binary_augmentation": {"hardware": 9}}"#);
        assert!(bad.is_err());
    }

    proptest! {
        #[test]
        fn probabilities_stay_normalized_and_floored(
            rounds in prop::collection::vec(prop::collection::vec((0usize..5, -5.0f64..5.0), 0..6), 1..30),
            floor in 0.0f64..0.5,
            eta in 0.01f64..3.0,
        ) {
            let mut s = PolicyState::with_weights(vec![SubPolicy::IDENTITY; 5], vec![1.0; 5], SamplingMode::Combinatorial, eta, floor).unwrap();
            for rewards in rounds {
                s = s.update_weights(&rewards).unwrap();
                let total: f64 = s.probabilities().iter().sum();
                prop_assert!((total - 1.0).abs() < 1e-12);
                prop_assert!(s.probabilities().iter().all(|&p| p >= floor / 5.0 - 1e-15));
                prop_assert!(s.weights().iter().all(|&w| w > 0.0));
            }
        }
    }
}
