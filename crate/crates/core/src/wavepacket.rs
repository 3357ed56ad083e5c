//! Wave-packet preparation, projective frequency measurement in the
//! eigenbasis of the applied evolution, and reproducible sampling.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::angles::{circular_diff, wrap_pi};
use crate::error::{QlgaError, Result};
use crate::lattice::{Lattice, MassAngle, WaveFunction};
use crate::spectral::{dispersion, Spectrum, DEGENERACY_TOL};

/// Sample values must stay this far inside `(-π, π)` for [`summarize`].
pub const WRAP_MARGIN: f64 = 0.1;
/// States must be normalized to this accuracy before measurement.
pub const NORMALIZATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Positive,
    Negative,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Positive => 1.0,
            Branch::Negative => -1.0,
        }
    }
}

/// Gaussian packet parameters. `sigma = ∞` gives the plane-wave limit (only
/// meaningful on a ring).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacketSpec {
    pub k0: f64,
    pub x0: usize,
    pub sigma: f64,
    pub branch: Branch,
}

impl PacketSpec {
    pub fn new(k0: f64, x0: usize, sigma: f64, branch: Branch) -> Result<Self> {
        if !k0.is_finite() {
            return Err(QlgaError::NonFinite("k0"));
        }
        if sigma.is_nan() || sigma <= 0.0 {
            return Err(QlgaError::InvalidParameter(format!(
                "packet width must be positive, got {sigma}"
            )));
        }
        Ok(Self { k0, x0, sigma, branch })
    }

    /// Right-moving positive-frequency packet at `k0 = π/2`, centred, with
    /// width `|L|/8`.
    pub fn centered(size: usize) -> Self {
        Self {
            k0: std::f64::consts::FRAC_PI_2,
            x0: size / 2,
            sigma: size as f64 / 8.0,
            branch: Branch::Positive,
        }
    }

    pub fn plane_wave(k0: f64, branch: Branch) -> Result<Self> {
        Self::new(k0, 0, f64::INFINITY, branch)
    }

    pub fn is_plane_wave(&self) -> bool {
        self.sigma.is_infinite()
    }

    /// Site and margin constraints for the given lattice.
    pub fn check(&self, lattice: &Lattice) -> Result<()> {
        let n = lattice.size();
        if self.x0 >= n {
            return Err(QlgaError::InvalidParameter(format!(
                "packet centre {} outside lattice of size {n}",
                self.x0
            )));
        }
        if !lattice.is_periodic() {
            let margin = self.x0.min(n - 1 - self.x0) as f64;
            if margin < 3.0 * self.sigma {
                return Err(QlgaError::PacketMargin {
                    x0: self.x0,
                    sigma: self.sigma,
                    size: n,
                });
            }
        }
        Ok(())
    }
}

/// Unit eigenvector of the reduced block `M(q)` on the chosen branch, with
/// eigenvalue `e^{-iω_branch(q)}`.
pub fn branch_spinor(theta: MassAngle, q: f64, branch: Branch) -> [Complex64; 2] {
    let (wp, wm) = dispersion(theta, q, 0.0);
    let omega = match branch {
        Branch::Positive => wp,
        Branch::Negative => wm,
    };
    let lambda = Complex64::from_polar(1.0, -omega);
    let (s, c) = theta.value().sin_cos();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let e_plus = Complex64::from_polar(1.0, q);
    let e_minus = Complex64::from_polar(1.0, -q);
    if s == 0.0 {
        // M(q) = diag(e^{iq}, e^{-iq}); pick the column carrying λ
        return if (e_minus - lambda).norm() <= (e_plus - lambda).norm() {
            [zero, one]
        } else {
            [one, zero]
        };
    }
    let i = Complex64::i();
    let a = [i * s * e_minus, lambda - c * e_plus];
    let b = [lambda - c * e_minus, i * s * e_plus];
    let norm = |v: &[Complex64; 2]| (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    let (na, nb) = (norm(&a), norm(&b));
    let (v, n) = if na >= nb { (a, na) } else { (b, nb) };
    [v[0] / n, v[1] / n]
}

fn envelope_distance(lattice: &Lattice, x: usize, x0: usize) -> f64 {
    let d = x.abs_diff(x0);
    if lattice.is_periodic() {
        d.min(lattice.size() - d) as f64
    } else {
        d as f64
    }
}

/// `ψ(x) ∝ exp(−d(x,x0)²/(4σ²)) e^{ik0x} χ_branch(k0)`, normalized.
pub fn prepare_packet(lattice: &Lattice, theta: MassAngle, spec: &PacketSpec) -> Result<WaveFunction> {
    spec.check(lattice)?;
    let chi = branch_spinor(theta, spec.k0, spec.branch);
    let mut amplitudes = Vec::with_capacity(lattice.dim());
    for x in 0..lattice.size() {
        let envelope = if spec.is_plane_wave() {
            1.0
        } else {
            let d = envelope_distance(lattice, x, spec.x0);
            (-(d * d) / (4.0 * spec.sigma * spec.sigma)).exp()
        };
        let carrier = Complex64::from_polar(envelope, spec.k0 * x as f64);
        amplitudes.push(carrier * chi[0]);
        amplitudes.push(carrier * chi[1]);
    }
    WaveFunction::from_amplitudes(amplitudes)?.normalize()
}

/// Outcome law of a projective frequency measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyDistribution {
    /// Distinct eigenphases, ascending.
    pub support: Vec<f64>,
    pub probabilities: Vec<f64>,
}

impl FrequencyDistribution {
    /// Builds a distribution from explicit atoms; probabilities must be
    /// non-negative and sum to one within 1e-10.
    pub fn from_atoms(support: Vec<f64>, probabilities: Vec<f64>) -> Result<Self> {
        if support.len() != probabilities.len() {
            return Err(QlgaError::SizeMismatch {
                expected: support.len(),
                found: probabilities.len(),
            });
        }
        if support.is_empty() {
            return Err(QlgaError::EmptySamples);
        }
        if support.iter().chain(&probabilities).any(|v| !v.is_finite()) {
            return Err(QlgaError::NonFinite("distribution"));
        }
        if probabilities.iter().any(|p| *p < 0.0) {
            return Err(QlgaError::InvalidParameter("negative probability".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(QlgaError::InvalidParameter(format!("probabilities sum to {total}")));
        }
        let mut atoms: Vec<(f64, f64)> = support.into_iter().zip(probabilities).collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (support, probabilities) = atoms.into_iter().unzip();
        Ok(Self { support, probabilities })
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.support.iter().zip(&self.probabilities).map(|(w, p)| w * p).sum()
    }

    pub fn std(&self) -> f64 {
        let m = self.mean();
        self.support
            .iter()
            .zip(&self.probabilities)
            .map(|(w, p)| p * (w - m).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Probability of a strictly negative outcome.
    pub fn negative_weight(&self) -> f64 {
        self.support
            .iter()
            .zip(&self.probabilities)
            .filter(|(w, _)| **w < 0.0)
            .map(|(_, p)| p)
            .sum()
    }

    /// Total-variation distance, treating atoms closer than `tol` on the
    /// circle as the same outcome.
    pub fn total_variation(&self, other: &Self, tol: f64) -> f64 {
        let mut atoms: Vec<(f64, f64)> = self
            .support
            .iter()
            .zip(&self.probabilities)
            .map(|(w, p)| (*w, *p))
            .chain(other.support.iter().zip(&other.probabilities).map(|(w, p)| (*w, -*p)))
            .collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut clusters: Vec<(f64, f64)> = Vec::new();
        for (w, p) in atoms {
            match clusters.last_mut() {
                Some(last) if circular_diff(w, last.0).abs() <= tol => last.1 += p,
                _ => clusters.push((w, p)),
            }
        }
        if clusters.len() > 1 {
            let last = clusters.len() - 1;
            if circular_diff(clusters[0].0, clusters[last].0).abs() <= tol {
                let tail = clusters.pop().expect("non-empty").1;
                clusters[0].1 += tail;
            }
        }
        0.5 * clusters.iter().map(|(_, p)| p.abs()).sum::<f64>()
    }
}

/// `p_g = Σ_{j∈g} |⟨v_j|ψ⟩|²` over the degeneracy groups of `spectrum`.
pub fn frequency_distribution(psi: &WaveFunction, spectrum: &Spectrum) -> Result<FrequencyDistribution> {
    let dim = spectrum.len();
    if psi.amplitudes().len() != dim {
        return Err(QlgaError::SizeMismatch {
            expected: dim,
            found: psi.amplitudes().len(),
        });
    }
    let norm = psi.norm_sqr();
    if (norm - 1.0).abs() > NORMALIZATION_TOL {
        return Err(QlgaError::InvalidParameter(format!(
            "state must be normalized, has squared norm {norm}"
        )));
    }
    let vectors = spectrum.eigenvectors();
    let amps = psi.amplitudes();
    let overlap = |j: usize| -> f64 {
        let ip: Complex64 = (0..dim).map(|i| vectors[(i, j)].conj() * amps[i]).sum();
        ip.norm_sqr()
    };
    let phases = spectrum.eigenphases();
    let mut atoms: Vec<(f64, f64)> = spectrum
        .groups()
        .iter()
        .map(|g| {
            let anchor = phases[g.start % dim];
            let offset: f64 = g.clone().map(|j| circular_diff(phases[j % dim], anchor)).sum::<f64>() / g.len() as f64;
            let p: f64 = g.clone().map(|j| overlap(j % dim)).sum();
            (wrap_pi(anchor + offset), p)
        })
        .collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    debug_assert!(atoms.windows(2).all(|w| w[1].0 - w[0].0 > DEGENERACY_TOL));
    let (support, probabilities) = atoms.into_iter().unzip();
    Ok(FrequencyDistribution { support, probabilities })
}

/// `n` independent draws by inverse CDF. The output is a pure function of
/// `(dist, n, seed, stream)`.
pub fn sample_frequencies(dist: &FrequencyDistribution, n: usize, seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let cumulative: Vec<f64> = dist
        .probabilities
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    let total = *cumulative.last().unwrap_or(&0.0);
    let last_atom = dist.probabilities.iter().rposition(|p| *p > 0.0).unwrap_or(0);
    (0..n)
        .map(|_| {
            let u: f64 = rng.random::<f64>() * total;
            let idx = cumulative.partition_point(|c| *c <= u).min(last_atom);
            dist.support[idx]
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub mean: f64,
    /// Sample standard deviation (`n − 1` denominator; zero for one sample).
    pub std: f64,
}

pub fn summarize(samples: &[f64]) -> Result<SampleSummary> {
    if samples.is_empty() {
        return Err(QlgaError::EmptySamples);
    }
    let bound = std::f64::consts::PI - WRAP_MARGIN;
    if let Some(bad) = samples.iter().find(|w| w.is_nan() || w.abs() >= bound) {
        return Err(QlgaError::Wraparound(*bad));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let std = if samples.len() > 1 {
        (samples.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(SampleSummary { mean, std })
}
