//! Lattices, wave functions and field configurations.
//!
//! Amplitudes are stored site-major: index `2 * x + c`, where `c = 0` is the
//! left-mover `ψ₋₁(x)` and `c = 1` the right-mover `ψ₊₁(x)`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angles::reduce_tau;
use crate::error::{QlgaError, Result};

/// Velocity label of a spin component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mover {
    Left = 0,
    Right = 1,
}

impl Mover {
    pub const fn offset(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Topology {
    Periodic,
    /// Reflecting ends; the boundary phases are stored reduced to `[0, 2π)`.
    Bounded {
        zeta_left: f64,
        zeta_right: f64,
    },
}

impl Topology {
    pub fn bounded(zeta_left: f64, zeta_right: f64) -> Result<Self> {
        if !zeta_left.is_finite() || !zeta_right.is_finite() {
            return Err(QlgaError::NonFinite("boundary phase"));
        }
        Ok(Topology::Bounded {
            zeta_left: reduce_tau(zeta_left),
            zeta_right: reduce_tau(zeta_right),
        })
    }

    /// Bounded lattice with both boundary phases zero.
    pub const fn walls() -> Self {
        Topology::Bounded {
            zeta_left: 0.0,
            zeta_right: 0.0,
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, Topology::Periodic)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Topology::Periodic => "periodic",
            Topology::Bounded { .. } => "bounded",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    size: usize,
    topology: Topology,
}

impl Lattice {
    pub fn new(size: usize, topology: Topology) -> Result<Self> {
        if size < 3 {
            return Err(QlgaError::LatticeTooSmall(size));
        }
        Ok(Self { size, topology })
    }

    pub fn periodic(size: usize) -> Result<Self> {
        Self::new(size, Topology::Periodic)
    }

    pub fn bounded(size: usize) -> Result<Self> {
        Self::new(size, Topology::walls())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn is_periodic(&self) -> bool {
        self.topology.is_periodic()
    }

    /// Hilbert-space dimension `2|L|`.
    pub fn dim(&self) -> usize {
        2 * self.size
    }

    /// The site to the left of `x`, if any (wraps on a ring).
    pub fn left_of(&self, x: usize) -> Option<usize> {
        match (x, self.topology) {
            (0, Topology::Periodic) => Some(self.size - 1),
            (0, _) => None,
            (x, _) => Some(x - 1),
        }
    }

    /// The site to the right of `x`, if any (wraps on a ring).
    pub fn right_of(&self, x: usize) -> Option<usize> {
        if x + 1 < self.size {
            Some(x + 1)
        } else if self.is_periodic() {
            Some(0)
        } else {
            None
        }
    }
}

/// Mass angle `θ` of the homogeneous weight family, restricted to `[0, π/2]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct MassAngle(f64);

impl MassAngle {
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(QlgaError::NonFinite("mass angle"));
        }
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(QlgaError::InvalidParameter(format!(
                "mass angle {theta} outside [0, pi/2]"
            )));
        }
        Ok(Self(theta))
    }

    pub const fn massless() -> Self {
        Self(0.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveFunction {
    amplitudes: Vec<Complex64>,
}

impl WaveFunction {
    pub fn zero(lattice: &Lattice) -> Self {
        Self {
            amplitudes: vec![Complex64::new(0.0, 0.0); lattice.dim()],
        }
    }

    /// Wraps a site-major amplitude vector; its length must be even and at least 6.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        if !amplitudes.len().is_multiple_of(2) {
            return Err(QlgaError::InvalidParameter(format!(
                "amplitude vector of odd length {}",
                amplitudes.len()
            )));
        }
        if amplitudes.len() < 6 {
            return Err(QlgaError::LatticeTooSmall(amplitudes.len() / 2));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(QlgaError::NonFinite("amplitudes"));
        }
        Ok(Self { amplitudes })
    }

    /// A single unit amplitude at `(x, mover)`.
    pub fn localized(lattice: &Lattice, x: usize, mover: Mover) -> Result<Self> {
        if x >= lattice.size() {
            return Err(QlgaError::InvalidParameter(format!(
                "site {x} outside lattice of size {}",
                lattice.size()
            )));
        }
        let mut psi = Self::zero(lattice);
        psi.amplitudes[2 * x + mover.offset()] = Complex64::new(1.0, 0.0);
        Ok(psi)
    }

    pub fn sites(&self) -> usize {
        self.amplitudes.len() / 2
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn get(&self, x: usize, mover: Mover) -> Complex64 {
        self.amplitudes[2 * x + mover.offset()]
    }

    pub fn spinor(&self, x: usize) -> [Complex64; 2] {
        [self.amplitudes[2 * x], self.amplitudes[2 * x + 1]]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(QlgaError::ZeroState);
        }
        Ok(Self {
            amplitudes: self.amplitudes.iter().map(|a| a / n).collect(),
        })
    }

    fn check_same_size(&self, other_len: usize) -> Result<()> {
        if self.amplitudes.len() != other_len {
            return Err(QlgaError::SizeMismatch {
                expected: self.amplitudes.len(),
                found: other_len,
            });
        }
        Ok(())
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &WaveFunction) -> Result<Complex64> {
        self.check_same_size(other.amplitudes.len())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Multiplies both components at site `x` by `e^{-iα(x)}`.
    pub fn apply_site_phase(&self, alpha: &[f64]) -> Result<Self> {
        self.check_same_size(2 * alpha.len())?;
        let amplitudes = self
            .amplitudes
            .chunks_exact(2)
            .zip(alpha)
            .flat_map(|(pair, &a)| {
                let phase = Complex64::from_polar(1.0, -a);
                [pair[0] * phase, pair[1] * phase]
            })
            .collect();
        Ok(Self { amplitudes })
    }

    pub fn max_abs_diff(&self, other: &WaveFunction) -> Result<f64> {
        self.check_same_size(other.amplitudes.len())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// Scalar potential `φ(x)` per site and vector potential `A(x)` per link
/// `(x-1, x)`, both in radians of phase per timestep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    phi: Vec<f64>,
    a: Vec<f64>,
}

impl FieldConfig {
    pub fn new(phi: Vec<f64>, a: Vec<f64>) -> Result<Self> {
        if phi.len() != a.len() {
            return Err(QlgaError::SizeMismatch {
                expected: phi.len(),
                found: a.len(),
            });
        }
        if phi.iter().any(|v| !v.is_finite()) {
            return Err(QlgaError::NonFinite("scalar potential"));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(QlgaError::NonFinite("vector potential"));
        }
        Ok(Self { phi, a })
    }

    pub fn zero(size: usize) -> Self {
        Self {
            phi: vec![0.0; size],
            a: vec![0.0; size],
        }
    }

    /// `φ ≡ 0`, `A ≡ a`.
    pub fn uniform_vector(size: usize, a: f64) -> Result<Self> {
        Self::new(vec![0.0; size], vec![a; size])
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn vector(&self) -> &[f64] {
        &self.a
    }

    pub(crate) fn check_lattice(&self, lattice: &Lattice) -> Result<()> {
        if self.len() != lattice.size() {
            return Err(QlgaError::SizeMismatch {
                expected: lattice.size(),
                found: self.len(),
            });
        }
        Ok(())
    }
}

/// Two consecutive time slices `α(t, ·)` and `α(t+1, ·)` of a gauge function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeFunction {
    alpha_t: Vec<f64>,
    alpha_next: Vec<f64>,
}

impl GaugeFunction {
    pub fn new(alpha_t: Vec<f64>, alpha_next: Vec<f64>) -> Result<Self> {
        if alpha_t.len() != alpha_next.len() {
            return Err(QlgaError::SizeMismatch {
                expected: alpha_t.len(),
                found: alpha_next.len(),
            });
        }
        if alpha_t.iter().chain(&alpha_next).any(|v| !v.is_finite()) {
            return Err(QlgaError::NonFinite("gauge function"));
        }
        Ok(Self { alpha_t, alpha_next })
    }

    /// Time-independent gauge function.
    pub fn time_independent(alpha: Vec<f64>) -> Result<Self> {
        Self::new(alpha.clone(), alpha)
    }

    pub fn identity(size: usize) -> Self {
        Self {
            alpha_t: vec![0.0; size],
            alpha_next: vec![0.0; size],
        }
    }

    pub fn len(&self) -> usize {
        self.alpha_t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha_t.is_empty()
    }

    pub fn alpha_t(&self) -> &[f64] {
        &self.alpha_t
    }

    pub fn alpha_next(&self) -> &[f64] {
        &self.alpha_next
    }

    pub(crate) fn check_lattice(&self, lattice: &Lattice) -> Result<()> {
        if self.len() != lattice.size() {
            return Err(QlgaError::SizeMismatch {
                expected: lattice.size(),
                found: self.len(),
            });
        }
        Ok(())
    }
}
