//! The frequency-shift topology-detection protocol, its sample-count
//! heuristic, the classical streaming-particle baseline, and the scaling study
//! comparing the two.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::angles::circular_diff;
use crate::error::{QlgaError, Result};
use crate::evolution::build_evolution;
use crate::lattice::{FieldConfig, Lattice, MassAngle, Topology, WaveFunction};
use crate::spectral::{dispersion, spectrum};
use crate::wavepacket::{
    frequency_distribution, prepare_packet, sample_frequencies, summarize, FrequencyDistribution, PacketSpec,
};

/// `A·|L|` closer than this to a multiple of 2π is rejected.
pub const HOLONOMY_TOL: f64 = 1e-9;
/// Sample counts are never calibrated beyond this.
pub const MAX_CALIBRATED_SAMPLES: usize = 1024;
/// Stream bit reserved for calibration draws so they never reuse trial streams.
const CALIBRATION_STREAM: u64 = 1 << 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Periodic,
    Bounded,
}

impl Decision {
    pub fn of(topology: &Topology) -> Self {
        if topology.is_periodic() {
            Decision::Periodic
        } else {
            Decision::Bounded
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Decision::Periodic => "periodic",
            Decision::Bounded => "bounded",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionConfig {
    pub lattice_size: usize,
    pub theta: MassAngle,
    pub a_uniform: f64,
    pub packet: PacketSpec,
    pub n_samples: usize,
    pub epsilon: f64,
    pub seed: u64,
}

impl DetectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lattice_size < 3 {
            return Err(QlgaError::LatticeTooSmall(self.lattice_size));
        }
        if !self.a_uniform.is_finite() {
            return Err(QlgaError::NonFinite("A_uniform"));
        }
        if self.a_uniform <= 0.0 {
            return Err(QlgaError::InvalidParameter(format!(
                "A_uniform must be positive, got {}",
                self.a_uniform
            )));
        }
        let delta = self.a_uniform * self.lattice_size as f64;
        if circular_diff(delta, 0.0).abs() < HOLONOMY_TOL {
            return Err(QlgaError::InvalidParameter(format!(
                "A·|L| = {delta} is a multiple of 2π; the topologies are indistinguishable"
            )));
        }
        if self.n_samples == 0 {
            return Err(QlgaError::InvalidParameter("n_samples must be at least 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(QlgaError::InvalidParameter(format!(
                "epsilon must lie in (0,1), got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// `ω̄₀ = ω₊(θ, k0, A=0)`, known to the experimenter without the topology.
    pub fn baseline_mean(&self) -> f64 {
        dispersion(self.theta, self.packet.k0, 0.0).0
    }

    pub fn threshold(&self) -> f64 {
        self.baseline_mean() + self.a_uniform / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub decision: Decision,
    pub sample_mean: f64,
    pub baseline_mean: f64,
    pub threshold: f64,
    pub samples_used: usize,
    pub ground_truth: Decision,
    pub correct: bool,
}

/// Everything a detection trial needs except the random draws: the packet's
/// frequency law under `U^{(0,A)}` on the ground-truth lattice.
#[derive(Debug, Clone)]
pub struct PreparedDetection {
    config: DetectionConfig,
    ground_truth: Topology,
    distribution: FrequencyDistribution,
}

impl PreparedDetection {
    pub fn new(config: &DetectionConfig, ground_truth: Topology) -> Result<Self> {
        config.validate()?;
        let lattice = Lattice::new(config.lattice_size, ground_truth)?;
        let psi = prepare_packet(&lattice, config.theta, &config.packet)?;
        Self::with_state(config, ground_truth, &psi, 0)
    }

    /// Measures `U^t ψ` instead of `ψ`; the law is stationary, so the result
    /// should not depend on `steps`.
    pub fn with_state(
        config: &DetectionConfig,
        ground_truth: Topology,
        psi: &WaveFunction,
        steps: usize,
    ) -> Result<Self> {
        config.validate()?;
        let lattice = Lattice::new(config.lattice_size, ground_truth)?;
        config.packet.check(&lattice)?;
        let fields = FieldConfig::uniform_vector(config.lattice_size, config.a_uniform)?;
        let u = build_evolution(&lattice, config.theta, &fields)?;
        let evolved = u.evolve(psi, steps)?;
        let distribution = frequency_distribution(&evolved, &spectrum(&u)?)?;
        Ok(Self {
            config: *config,
            ground_truth,
            distribution,
        })
    }

    pub fn config(&self) -> &DetectionConfig {
        &self.config
    }

    pub fn distribution(&self) -> &FrequencyDistribution {
        &self.distribution
    }

    /// One trial with `n` samples drawn from stream `stream` of the
    /// configured seed.
    pub fn trial_with(&self, n: usize, stream: u64) -> Result<ExperimentReport> {
        let samples = sample_frequencies(&self.distribution, n, self.config.seed, stream);
        let summary = summarize(&samples)?;
        let threshold = self.config.threshold();
        let decision = if summary.mean > threshold {
            Decision::Periodic
        } else {
            Decision::Bounded
        };
        let ground_truth = Decision::of(&self.ground_truth);
        Ok(ExperimentReport {
            decision,
            sample_mean: summary.mean,
            baseline_mean: self.config.baseline_mean(),
            threshold,
            samples_used: n,
            ground_truth,
            correct: decision == ground_truth,
        })
    }

    pub fn trial(&self, stream: u64) -> Result<ExperimentReport> {
        self.trial_with(self.config.n_samples, stream)
    }

    /// Fraction of misclassified trials over streams `first_stream..first_stream+trials`.
    pub fn error_rate(&self, n: usize, trials: usize, first_stream: u64) -> Result<f64> {
        if trials == 0 {
            return Err(QlgaError::InvalidParameter("trials must be at least 1".into()));
        }
        let wrong = (0..trials as u64)
            .into_par_iter()
            .map(|t| self.trial_with(n, first_stream + t).map(|r| usize::from(!r.correct)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .sum::<usize>();
        Ok(wrong as f64 / trials as f64)
    }
}

/// Builds `U^{(0,A)}` on the ground-truth lattice, measures the packet and
/// decides `Periodic` iff the sample mean exceeds `ω̄₀ + A/2`. Samples come
/// from stream 0 of `config.seed`.
pub fn run_detection(config: &DetectionConfig, ground_truth: Topology) -> Result<ExperimentReport> {
    PreparedDetection::new(config, ground_truth)?.trial(0)
}

/// `n = ⌈(2·z(1−ε)·σ_ω / shift)²⌉`, at least 1: the normal-approximation
/// sample count for a threshold halfway across `shift`.
pub fn required_samples(sigma_omega: f64, shift: f64, epsilon: f64) -> Result<usize> {
    if shift.is_nan() || shift <= 0.0 || !shift.is_finite() {
        return Err(QlgaError::InvalidParameter(format!(
            "shift must be positive, got {shift}"
        )));
    }
    if sigma_omega.is_nan() || sigma_omega < 0.0 || !sigma_omega.is_finite() {
        return Err(QlgaError::InvalidParameter(format!(
            "sigma_omega must be non-negative, got {sigma_omega}"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(QlgaError::InvalidParameter(format!(
            "epsilon must lie in (0,1), got {epsilon}"
        )));
    }
    let z = Normal::standard().inverse_cdf(1.0 - epsilon);
    let n = (2.0 * z * sigma_omega / shift).powi(2).ceil();
    Ok((n as usize).max(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalRun {
    pub start_site: usize,
    pub direction: i8,
    /// `None` when the cutoff fired before any velocity flip.
    pub steps_to_detect: Option<usize>,
    pub decision: Decision,
}

impl ClassicalRun {
    /// Steps actually taken: the flip time, or the cutoff.
    pub fn steps_taken(&self, cutoff: usize) -> usize {
        self.steps_to_detect.unwrap_or(cutoff)
    }
}

/// Streams a single classical particle until its velocity reverses at a wall
/// (decide `Bounded`) or `cutoff` steps elapse (decide `Periodic`). A
/// particle arriving at the last site before a wall, or already facing the
/// wall there, turns around in that step.
pub fn classical_baseline(lattice: &Lattice, start: usize, direction: i8, cutoff: usize) -> Result<ClassicalRun> {
    let n = lattice.size();
    if start >= n {
        return Err(QlgaError::InvalidParameter(format!(
            "start site {start} outside lattice of size {n}"
        )));
    }
    if direction != 1 && direction != -1 {
        return Err(QlgaError::InvalidParameter(format!(
            "direction must be ±1, got {direction}"
        )));
    }
    if cutoff < 2 * n {
        return Err(QlgaError::InvalidParameter(format!(
            "cutoff must be at least 2|L| = {}",
            2 * n
        )));
    }
    let mut x = start;
    let mut v = direction;
    for t in 1..=cutoff {
        let ahead = if v > 0 { lattice.right_of(x) } else { lattice.left_of(x) };
        match ahead {
            None => v = -v,
            Some(next) => {
                x = next;
                let beyond = if v > 0 { lattice.right_of(x) } else { lattice.left_of(x) };
                if beyond.is_none() {
                    v = -v;
                }
            }
        }
        if v != direction {
            return Ok(ClassicalRun {
                start_site: start,
                direction,
                steps_to_detect: Some(t),
                decision: Decision::Bounded,
            });
        }
    }
    Ok(ClassicalRun {
        start_site: start,
        direction,
        steps_to_detect: None,
        decision: Decision::Periodic,
    })
}

pub fn default_cutoff(lattice: &Lattice) -> usize {
    2 * lattice.size()
}

/// Every `(start, direction)` pair, starts ascending, `+1` before `−1`.
pub fn enumerate_classical(lattice: &Lattice) -> Result<Vec<ClassicalRun>> {
    let cutoff = default_cutoff(lattice);
    (0..lattice.size())
        .flat_map(|x| [1i8, -1].map(|d| (x, d)))
        .map(|(x, d)| classical_baseline(lattice, x, d, cutoff))
        .collect()
}

/// Mean steps over uniformly random start and direction, by enumeration.
pub fn enumeration_mean(lattice: &Lattice) -> Result<f64> {
    let cutoff = default_cutoff(lattice);
    let runs = enumerate_classical(lattice)?;
    Ok(runs.iter().map(|r| r.steps_taken(cutoff) as f64).sum::<f64>() / runs.len() as f64)
}

/// Closed form of [`enumeration_mean`] on a segment: `(|L|−1)/2 + 1/|L|`.
pub fn bounded_mean_steps(size: usize) -> f64 {
    let n = size as f64;
    (n - 1.0) / 2.0 + 1.0 / n
}

/// `trials` runs with start and direction drawn uniformly from `seed`.
pub fn classical_trials(lattice: &Lattice, trials: usize, seed: u64) -> Result<Vec<ClassicalRun>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cutoff = default_cutoff(lattice);
    (0..trials)
        .map(|_| {
            let start = rng.random_range(0..lattice.size());
            let direction = if rng.random::<bool>() { 1 } else { -1 };
            classical_baseline(lattice, start, direction, cutoff)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(QlgaError::SizeMismatch {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(QlgaError::InvalidParameter("a fit needs at least two points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(QlgaError::InvalidParameter("fit abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub theta: MassAngle,
    pub a_uniform: f64,
    pub k0: f64,
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
    /// Skip calibration and use this sample count at every size.
    pub fixed_samples: Option<usize>,
}

impl ScalingConfig {
    /// `θ = π/6`, `A = 0.2`, `k0 = π/2`, `ε = 0.05`, 500 trials per topology.
    pub fn standard(seed: u64) -> Self {
        Self {
            theta: MassAngle::new(std::f64::consts::FRAC_PI_6).expect("valid angle"),
            a_uniform: 0.2,
            k0: std::f64::consts::FRAC_PI_2,
            epsilon: 0.05,
            trials: 500,
            seed,
            fixed_samples: None,
        }
    }

    fn detection(&self, size: usize, n_samples: usize) -> Result<DetectionConfig> {
        let mut packet = PacketSpec::centered(size);
        packet.k0 = self.k0;
        let config = DetectionConfig {
            lattice_size: size,
            theta: self.theta,
            a_uniform: self.a_uniform,
            packet,
            n_samples,
            epsilon: self.epsilon,
            seed: self.seed,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub size: usize,
    pub quantum_n_samples: usize,
    pub quantum_error_rate: f64,
    pub periodic_error_rate: f64,
    pub bounded_error_rate: f64,
    pub periodic_mean_shift: f64,
    pub bounded_mean_shift: f64,
    pub frequency_std: f64,
    pub classical_mean_steps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingTable {
    pub n_samples: usize,
    /// Whether the calibration error target `ε/2` was reached at the
    /// smallest size before hitting [`MAX_CALIBRATED_SAMPLES`].
    pub calibrated: bool,
    pub rows: Vec<ScalingRow>,
}

fn trial_stream(size_index: usize, topology_index: usize) -> u64 {
    ((size_index as u64) << 33) | ((topology_index as u64) << 32)
}

struct SizeExperiment {
    periodic: PreparedDetection,
    bounded: PreparedDetection,
}

impl SizeExperiment {
    fn new(config: &DetectionConfig) -> Result<Self> {
        Ok(Self {
            periodic: PreparedDetection::new(config, Topology::Periodic)?,
            bounded: PreparedDetection::new(config, Topology::walls())?,
        })
    }

    fn error_rates(&self, n: usize, trials: usize, stream_base: u64) -> Result<(f64, f64)> {
        Ok((
            self.periodic.error_rate(n, trials, stream_base)?,
            self.bounded.error_rate(n, trials, stream_base | (1 << 32))?,
        ))
    }
}

/// Runs the detection protocol at every size with one sample count, chosen
/// at the smallest size, next to the classical baseline's exact mean.
///
/// Calibration starts from [`required_samples`] for the periodic packet's
/// frequency spread and doubles until the misclassification rate over both
/// topologies (on calibration streams) is at most `ε/2`.
pub fn scaling_study(sizes: &[usize], config: &ScalingConfig) -> Result<ScalingTable> {
    if sizes.is_empty() {
        return Err(QlgaError::InvalidParameter("no sizes given".into()));
    }
    if let Some(&bad) = sizes.iter().find(|s| **s < 3) {
        return Err(QlgaError::LatticeTooSmall(bad));
    }
    if config.trials == 0 {
        return Err(QlgaError::InvalidParameter("trials must be at least 1".into()));
    }
    let smallest = *sizes.iter().min().expect("non-empty");
    let (n_samples, calibrated) = match config.fixed_samples {
        Some(0) => return Err(QlgaError::InvalidParameter("n_samples must be at least 1".into())),
        Some(n) => (n, true),
        None => calibrate(smallest, config)?,
    };

    let rows = sizes
        .iter()
        .enumerate()
        .map(|(i, &size)| {
            let detection = config.detection(size, n_samples)?;
            let exp = SizeExperiment::new(&detection)?;
            let (p_err, b_err) = exp.error_rates(n_samples, config.trials, trial_stream(i, 0))?;
            let baseline = detection.baseline_mean();
            Ok(ScalingRow {
                size,
                quantum_n_samples: n_samples,
                quantum_error_rate: 0.5 * (p_err + b_err),
                periodic_error_rate: p_err,
                bounded_error_rate: b_err,
                periodic_mean_shift: exp.periodic.distribution().mean() - baseline,
                bounded_mean_shift: exp.bounded.distribution().mean() - baseline,
                frequency_std: exp.periodic.distribution().std(),
                classical_mean_steps: enumeration_mean(&Lattice::bounded(size)?)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScalingTable {
        n_samples,
        calibrated,
        rows,
    })
}

fn calibrate(size: usize, config: &ScalingConfig) -> Result<(usize, bool)> {
    let probe = config.detection(size, 1)?;
    let exp = SizeExperiment::new(&probe)?;
    let sigma = exp.periodic.distribution().std();
    let mut n = required_samples(sigma, config.a_uniform, config.epsilon)?.min(MAX_CALIBRATED_SAMPLES);
    loop {
        let (p_err, b_err) = exp.error_rates(n, config.trials, CALIBRATION_STREAM)?;
        if 0.5 * (p_err + b_err) <= config.epsilon / 2.0 {
            return Ok((n, true));
        }
        if n >= MAX_CALIBRATED_SAMPLES {
            return Ok((n, false));
        }
        n = (2 * n).min(MAX_CALIBRATED_SAMPLES);
    }
}
