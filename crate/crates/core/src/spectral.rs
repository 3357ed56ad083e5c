//! Eigen-analysis of the evolution operator.
//!
//! Eigenvalues are written `λ = e^{-iω}` with the eigenphase (frequency)
//! `ω ∈ (-π, π]`. For a normal matrix the complex Schur form is diagonal, so
//! the Schur vectors are an orthonormal eigenbasis; residuals
//! `‖Uv − λv‖₂` are recomputed and enforced after every decomposition.

use std::ops::Range;

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angles::{circular_diff, wrap_pi};
use crate::error::{QlgaError, Result};
use crate::evolution::{build_evolution, unitarity_residual, Block, EvolutionOperator};
use crate::lattice::{FieldConfig, Lattice, MassAngle, Topology};

/// Eigenphases closer than this are one degenerate group.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Maximum accepted eigenpair residual.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Inputs further than this from unitary are rejected before diagonalizing.
pub const UNITARITY_GATE: f64 = 1e-10;
/// Flow levels must stay this far from every endpoint eigenphase.
pub const GENERIC_LEVEL_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenphases: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
    residuals: Vec<f64>,
    groups: Vec<Range<usize>>,
}

impl Spectrum {
    /// Sorted ascending in `(-π, π]`.
    pub fn eigenphases(&self) -> &[f64] {
        &self.eigenphases
    }

    /// Column `j` is the eigenvector of `eigenphases()[j]`.
    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Degeneracy groups as index ranges into the sorted eigenphases. A group
    /// straddling `±π` is stored as the last range wrapping past the end, so
    /// ranges index modulo `len()`.
    pub fn groups(&self) -> &[Range<usize>] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.eigenphases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenphases.is_empty()
    }

    pub fn eigenvalue(&self, j: usize) -> Complex64 {
        Complex64::from_polar(1.0, -self.eigenphases[j])
    }
}

/// Full eigendecomposition of a unitary evolution operator.
pub fn spectrum(u: &EvolutionOperator) -> Result<Spectrum> {
    spectrum_of_matrix(u.dense())
}

/// Full eigendecomposition of any unitary matrix (e.g. a gauge-transformed
/// operator).
pub fn spectrum_of_matrix(m: &DMatrix<Complex64>) -> Result<Spectrum> {
    if !m.is_square() {
        return Err(QlgaError::SizeMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let unitarity = unitarity_residual(m);
    if unitarity > UNITARITY_GATE {
        return Err(QlgaError::NotUnitary(unitarity));
    }
    let n = m.nrows();
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 200 * n.max(10))
        .ok_or_else(|| QlgaError::Solver("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();

    let mut order: Vec<(f64, usize)> = (0..n).map(|j| (wrap_pi(-t[(j, j)].arg()), j)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let eigenphases: Vec<f64> = order.iter().map(|(w, _)| *w).collect();
    let mut vectors = DMatrix::from_fn(n, n, |i, j| q[(i, order[j].1)]);

    let groups = degeneracy_groups(&eigenphases);
    for g in &groups {
        orthonormalize_group(&mut vectors, g, n);
    }

    let image = m * &vectors;
    let residuals: Vec<f64> = (0..n)
        .map(|j| {
            let lambda = Complex64::from_polar(1.0, -eigenphases[j]);
            (0..n)
                .map(|i| (image[(i, j)] - lambda * vectors[(i, j)]).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    if worst > RESIDUAL_TOL || !worst.is_finite() {
        return Err(QlgaError::ResidualTooLarge {
            residual: worst,
            tolerance: RESIDUAL_TOL,
        });
    }

    Ok(Spectrum {
        eigenphases,
        eigenvectors: vectors,
        residuals,
        groups,
    })
}

/// Chains sorted phases into groups whose neighbours differ by at most
/// [`DEGENERACY_TOL`], merging the first and last groups across `±π`.
pub fn degeneracy_groups(sorted: &[f64]) -> Vec<Range<usize>> {
    let n = sorted.len();
    if n == 0 {
        return Vec::new();
    }
    let mut groups = Vec::new();
    let mut start = 0;
    for j in 1..n {
        if sorted[j] - sorted[j - 1] > DEGENERACY_TOL {
            groups.push(start..j);
            start = j;
        }
    }
    groups.push(start..n);
    if groups.len() > 1 && circular_diff(sorted[0], sorted[n - 1]).abs() <= DEGENERACY_TOL {
        let first = groups.remove(0);
        let last = groups.pop().expect("at least two groups");
        groups.push(last.start..n + first.end);
    }
    groups
}

fn orthonormalize_group(vectors: &mut DMatrix<Complex64>, group: &Range<usize>, n: usize) {
    if group.len() < 2 {
        return;
    }
    let cols: Vec<usize> = group.clone().map(|j| j % n).collect();
    for (k, &j) in cols.iter().enumerate() {
        for &p in &cols[..k] {
            let proj: Complex64 = (0..n).map(|i| vectors[(i, p)].conj() * vectors[(i, j)]).sum();
            for i in 0..n {
                let v = vectors[(i, p)];
                vectors[(i, j)] -= proj * v;
            }
        }
        let norm = vectors.column(j).norm();
        vectors.column_mut(j).unscale_mut(norm);
    }
}

/// `M(q) = e^{-iq} w₋₁ + e^{iq} w₊₁`, the action of the homogeneous ring
/// operator on plane waves `e^{ikx} χ` with `q = k + A`.
pub fn reduced_block(theta: MassAngle, q: f64) -> Block {
    let w = crate::evolution::weights(theta);
    w.w_minus * Complex64::from_polar(1.0, -q) + w.w_plus * Complex64::from_polar(1.0, q)
}

/// The two eigenphases `(ω₊, ω₋) = ±arccos(cos θ · cos(k + A))` of the
/// reduced block.
pub fn dispersion(theta: MassAngle, k: f64, a_uniform: f64) -> (f64, f64) {
    let c = (theta.value().cos() * (k + a_uniform).cos()).clamp(-1.0, 1.0);
    let w = c.acos();
    (w, -w)
}

/// Sorted closed-form eigenphases of the homogeneous ring operator with
/// `φ ≡ 0` and uniform `A = δ/|L|`.
pub fn analytic_ring_spectrum(size: usize, theta: MassAngle, delta: f64) -> Vec<f64> {
    let mut out: Vec<f64> = (0..size)
        .flat_map(|n| {
            let k = std::f64::consts::TAU * n as f64 / size as f64;
            let (p, m) = dispersion(theta, k, delta / size as f64);
            [wrap_pi(p), wrap_pi(m)]
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Largest difference between two sorted phase lists, measured on the circle.
pub fn sorted_phase_distance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "spectra of different sizes");
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    // phases within tolerance of ±π may sort to opposite ends; fold them to +π
    for v in a.iter_mut().chain(b.iter_mut()) {
        if (*v + std::f64::consts::PI).abs() < 1e-7 {
            *v += std::f64::consts::TAU;
        }
    }
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter()
        .zip(&b)
        .map(|(x, y)| circular_diff(*x, *y).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trend {
    Constant,
    NonDecreasing,
    NonIncreasing,
    Mixed,
}

/// Monotonicity of a tracked branch; steps within `tol` count as flat.
pub fn branch_trend(values: &[f64], tol: f64) -> Trend {
    let mut rises = false;
    let mut falls = false;
    for w in values.windows(2) {
        let d = w[1] - w[0];
        if d > tol {
            rises = true;
        } else if d < -tol {
            falls = true;
        }
    }
    match (rises, falls) {
        (false, false) => Trend::Constant,
        (true, false) => Trend::NonDecreasing,
        (false, true) => Trend::NonIncreasing,
        (true, true) => Trend::Mixed,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralFlowResult {
    pub size: usize,
    pub theta: f64,
    pub topology: Topology,
    /// Uniform grid over `[0, 2π]`, endpoints included.
    pub delta_grid: Vec<f64>,
    /// Sorted eigenphases at each grid point.
    pub phases: Vec<Vec<f64>>,
    /// Continuous (unwrapped) branches, `branches[b][i]` at `delta_grid[i]`.
    pub branches: Vec<Vec<f64>>,
}

impl SpectralFlowResult {
    /// Bounded lattices have a δ-independent spectrum; their flow is zero.
    pub fn is_trivial(&self) -> bool {
        !self.topology.is_periodic()
    }

    pub fn trends(&self, tol: f64) -> Vec<Trend> {
        self.branches.iter().map(|b| branch_trend(b, tol)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowCount {
    pub up: usize,
    pub down: usize,
}

impl FlowCount {
    pub fn total(&self) -> usize {
        self.up + self.down
    }

    pub fn net(&self) -> i64 {
        self.up as i64 - self.down as i64
    }
}

/// Sweeps `δ` over `[0, 2π]` with `φ ≡ 0`, `A ≡ δ/|L|`, diagonalizing at each
/// grid point (in parallel) and continuing branches by predicted nearest phase.
pub fn spectral_flow(lattice: &Lattice, theta: MassAngle, n_delta: usize) -> Result<SpectralFlowResult> {
    if n_delta < 2 {
        return Err(QlgaError::InvalidParameter(format!(
            "n_delta must be at least 2, got {n_delta}"
        )));
    }
    let size = lattice.size();
    let delta_grid: Vec<f64> = (0..n_delta)
        .map(|i| std::f64::consts::TAU * i as f64 / (n_delta - 1) as f64)
        .collect();
    let phases: Vec<Vec<f64>> = delta_grid
        .par_iter()
        .map(|&delta| {
            let fields = FieldConfig::uniform_vector(size, delta / size as f64)?;
            let u = build_evolution(lattice, theta, &fields)?;
            Ok(spectrum(&u)?.eigenphases)
        })
        .collect::<Result<_>>()?;
    let branches = track_branches(&phases)?;
    Ok(SpectralFlowResult {
        size,
        theta: theta.value(),
        topology: lattice.topology(),
        delta_grid,
        phases,
        branches,
    })
}

fn min_distinct_gap(sorted: &[f64]) -> Option<f64> {
    let n = sorted.len();
    (0..n)
        .map(|j| {
            let next = sorted[(j + 1) % n];
            let gap = if j + 1 == n {
                next + std::f64::consts::TAU - sorted[j]
            } else {
                next - sorted[j]
            };
            gap.abs()
        })
        .filter(|g| *g > DEGENERACY_TOL)
        .min_by(f64::total_cmp)
}

/// Continues branches across a table of sorted phase lists. Each branch is
/// extrapolated linearly from its last two points and matched greedily to the
/// nearest unclaimed phase (lifted to the branch's sheet). From the third grid
/// point on, the largest prediction error must stay below half the smallest
/// non-degenerate level spacing.
pub fn track_branches(phases: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let Some(first) = phases.first() else {
        return Ok(Vec::new());
    };
    let m = first.len();
    let mut branches: Vec<Vec<f64>> = first.iter().map(|&w| vec![w]).collect();
    let mut pairs: Vec<(f64, usize, usize, f64)> = Vec::with_capacity(m * m);
    for (i, candidates) in phases.iter().enumerate().skip(1) {
        if candidates.len() != m {
            return Err(QlgaError::SizeMismatch {
                expected: m,
                found: candidates.len(),
            });
        }
        pairs.clear();
        for (b, branch) in branches.iter().enumerate() {
            let last = branch[i - 1];
            let predicted = if i >= 2 { 2.0 * last - branch[i - 2] } else { last };
            for (c, &cand) in candidates.iter().enumerate() {
                let lifted = cand + std::f64::consts::TAU * ((predicted - cand) / std::f64::consts::TAU).round();
                pairs.push(((lifted - predicted).abs(), b, c, lifted));
            }
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        let mut branch_done = vec![false; m];
        let mut cand_done = vec![false; m];
        let mut worst = 0.0f64;
        let mut assigned = 0;
        for &(dist, b, c, lifted) in &pairs {
            if branch_done[b] || cand_done[c] {
                continue;
            }
            branch_done[b] = true;
            cand_done[c] = true;
            branches[b].push(lifted);
            worst = worst.max(dist);
            assigned += 1;
            if assigned == m {
                break;
            }
        }
        if i >= 2 {
            if let Some(gap) = min_distinct_gap(candidates) {
                if worst >= 0.5 * gap {
                    return Err(QlgaError::AmbiguousTracking {
                        index: i,
                        error: worst,
                        half_gap: 0.5 * gap,
                    });
                }
            }
        }
    }
    Ok(branches)
}

/// Up- and down-crossings of the level `level + 2πm` (any integer `m`) by the
/// tracked branches over the sweep.
pub fn flow_crossings(result: &SpectralFlowResult, level: f64) -> Result<FlowCount> {
    if !level.is_finite() {
        return Err(QlgaError::NonFinite("flow level"));
    }
    let endpoints = [result.phases.first(), result.phases.last()];
    for phases in endpoints.into_iter().flatten() {
        if phases
            .iter()
            .any(|w| circular_diff(*w, level).abs() < GENERIC_LEVEL_TOL)
        {
            return Err(QlgaError::NonGenericLevel {
                level,
                tolerance: GENERIC_LEVEL_TOL,
            });
        }
    }
    let sheet = |w: f64| ((w - level) / std::f64::consts::TAU).floor() as i64;
    let mut count = FlowCount { up: 0, down: 0 };
    for branch in &result.branches {
        for pair in branch.windows(2) {
            let d = sheet(pair[1]) - sheet(pair[0]);
            if d > 0 {
                count.up += d as usize;
            } else {
                count.down += (-d) as usize;
            }
        }
    }
    Ok(count)
}

/// Number of branch crossings (either direction) through a generic level.
pub fn flow_count(result: &SpectralFlowResult, level: f64) -> Result<usize> {
    Ok(flow_crossings(result, level)?.total())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::build_evolution;
    use crate::gauge::transform_operator;
    use crate::lattice::GaugeFunction;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, PI, TAU};

    /// Eigenvalues of a 2×2 matrix from its characteristic polynomial,
    /// converted to eigenphases and sorted descending (ω₊ first).
    fn quadratic_eigenphases(m: &Block) -> (f64, f64) {
        let tr = m[(0, 0)] + m[(1, 1)];
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        let disc = (tr * tr - 4.0 * det).sqrt();
        let l1 = (tr + disc) / 2.0;
        let l2 = (tr - disc) / 2.0;
        let (a, b) = (wrap_pi(-l1.arg()), wrap_pi(-l2.arg()));
        if a >= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    #[test]
    fn dispersion_matches_reduced_block_diagonalization() {
        for &theta in &[0.0, 0.1, FRAC_PI_6, 1.0, 1.4, FRAC_PI_2] {
            let th = MassAngle::new(theta).unwrap();
            for i in 0..200 {
                let q = -PI + TAU * (i as f64 + 0.5) / 200.0;
                let (p, m) = dispersion(th, q, 0.0);
                let (bp, bm) = quadratic_eigenphases(&reduced_block(th, q));
                assert!((p - bp).abs() < 1e-7, "theta={theta} q={q}: {p} vs {bp}");
                assert!((m - bm).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn dispersion_examples() {
        let massless = MassAngle::massless();
        let (p, m) = dispersion(massless, 0.7, 0.2);
        assert!((p - 0.9).abs() < 1e-12 && (m + 0.9).abs() < 1e-12);
        let th = MassAngle::new(FRAC_PI_6).unwrap();
        let (p, m) = dispersion(th, 0.0, 0.0);
        assert!((p - FRAC_PI_6).abs() < 1e-12 && (m + FRAC_PI_6).abs() < 1e-12);
        let (p, _) = dispersion(th, FRAC_PI_2, 0.0);
        assert!((p - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn positive_branch_moves_right() {
        let th = MassAngle::new(0.4).unwrap();
        let h = 1e-6;
        for i in 1..20 {
            let k = PI * i as f64 / 20.0;
            let v = (dispersion(th, k + h, 0.0).0 - dispersion(th, k - h, 0.0).0) / (2.0 * h);
            assert!(v > 0.0);
        }
    }

    #[test]
    fn continuum_limit_of_dispersion() {
        for i in 0..=10 {
            for j in 0..=10 {
                let (theta, k) = (0.01 * i as f64, 0.01 * j as f64);
                let (p, _) = dispersion(MassAngle::new(theta).unwrap(), k, 0.0);
                let r2 = theta * theta + k * k;
                assert!((p - r2.sqrt()).abs() <= 0.5 * r2.powf(1.5) + 1e-15);
            }
        }
    }

    #[test]
    fn massless_four_site_ring() {
        let lat = Lattice::periodic(4).unwrap();
        let u = build_evolution(&lat, MassAngle::massless(), &FieldConfig::zero(4)).unwrap();
        let s = spectrum(&u).unwrap();
        let expect = [-FRAC_PI_2, -FRAC_PI_2, 0.0, 0.0, FRAC_PI_2, FRAC_PI_2, PI, PI];
        assert!(sorted_phase_distance(s.eigenphases(), &expect) < 1e-12);
        assert_eq!(s.len(), 8);
        assert!(s.max_residual() < 1e-12);
    }

    #[test]
    fn spectrum_contract_on_random_operators() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for trial in 0..6 {
            let n = rng.random_range(3..=24usize);
            let lat = if trial % 2 == 0 {
                Lattice::periodic(n).unwrap()
            } else {
                Lattice::new(n, Topology::bounded(0.3, 1.1).unwrap()).unwrap()
            };
            let fields = FieldConfig::new(
                (0..n).map(|_| rng.random_range(-PI..PI)).collect(),
                (0..n).map(|_| rng.random_range(-PI..PI)).collect(),
            )
            .unwrap();
            let u = build_evolution(&lat, MassAngle::new(rng.random_range(0.0..1.5)).unwrap(), &fields).unwrap();
            let s = spectrum(&u).unwrap();
            assert_eq!(s.len(), 2 * n);
            assert!(s.eigenphases().windows(2).all(|w| w[0] <= w[1]));
            assert!(s.eigenphases().iter().all(|w| *w > -PI && *w <= PI));
            for j in 0..s.len() {
                assert!((s.eigenvectors().column(j).norm() - 1.0).abs() < 1e-12);
                assert!((s.eigenvalue(j).norm() - 1.0).abs() < 1e-10);
            }
            let gram = s.eigenvectors().adjoint() * s.eigenvectors();
            assert!(unitarity_residual(&gram) < 1e-10 || (gram - DMatrix::identity(2 * n, 2 * n)).norm() < 1e-10);
        }
    }

    #[test]
    fn degenerate_eigenspaces_are_orthonormal() {
        // the homogeneous ring has ±k degeneracy
        let lat = Lattice::periodic(12).unwrap();
        let u = build_evolution(&lat, MassAngle::new(0.3).unwrap(), &FieldConfig::zero(12)).unwrap();
        let s = spectrum(&u).unwrap();
        assert!(s.groups().iter().any(|g| g.len() == 2));
        let v = s.eigenvectors();
        let gram = v.adjoint() * v;
        let id = DMatrix::<Complex64>::identity(24, 24);
        assert!(crate::gauge::max_entry_diff(&gram, &id) < 1e-12);
    }

    #[test]
    fn non_unitary_input_is_rejected() {
        let lat = Lattice::periodic(5).unwrap();
        let u = build_evolution(&lat, MassAngle::new(0.3).unwrap(), &FieldConfig::zero(5)).unwrap();
        let broken = u.with_zeroed_block(1, 2);
        assert!(matches!(spectrum(&broken), Err(QlgaError::NotUnitary(_))));
    }

    #[test]
    fn ring_spectrum_matches_closed_form() {
        for &n in &[4usize, 9, 16] {
            for &theta in &[0.0, FRAC_PI_6, 1.0] {
                for &delta in &[0.0, 1.0, PI, 4.0] {
                    let lat = Lattice::periodic(n).unwrap();
                    let th = MassAngle::new(theta).unwrap();
                    let u =
                        build_evolution(&lat, th, &FieldConfig::uniform_vector(n, delta / n as f64).unwrap()).unwrap();
                    let numeric = spectrum(&u).unwrap();
                    let analytic = analytic_ring_spectrum(n, th, delta);
                    assert!(sorted_phase_distance(numeric.eigenphases(), &analytic) < 1e-9);
                }
            }
        }
    }

    #[test]
    fn bounded_spectrum_ignores_vector_potential() {
        let lat = Lattice::bounded(16).unwrap();
        let th = MassAngle::new(FRAC_PI_6).unwrap();
        let s0 = spectrum(&build_evolution(&lat, th, &FieldConfig::zero(16)).unwrap()).unwrap();
        let s1 = spectrum(&build_evolution(&lat, th, &FieldConfig::uniform_vector(16, 0.3).unwrap()).unwrap()).unwrap();
        assert!(sorted_phase_distance(s0.eigenphases(), s1.eigenphases()) < 1e-9);
    }

    #[test]
    fn spectrum_is_invariant_under_diagonal_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let lat = Lattice::periodic(10).unwrap();
        let fields = FieldConfig::new(vec![0.0; 10], (0..10).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let u = build_evolution(&lat, MassAngle::new(0.8).unwrap(), &fields).unwrap();
        let g = GaugeFunction::time_independent((0..10).map(|_| rng.random_range(-3.0..3.0)).collect()).unwrap();
        let t = transform_operator(&u, &g).unwrap();
        let a = spectrum(&u).unwrap();
        let b = spectrum_of_matrix(&t).unwrap();
        assert!(sorted_phase_distance(a.eigenphases(), b.eigenphases()) < 1e-9);
    }

    #[test]
    fn degeneracy_groups_wrap_around_pi() {
        let g = degeneracy_groups(&[-PI + 1e-12, -1.0, -1.0 + 1e-10, 0.5, PI]);
        assert_eq!(g, vec![1..3, 3..4, 4..6]);
        let single = degeneracy_groups(&[0.1]);
        assert_eq!(single, vec![0..1]);
    }

    #[test]
    fn massless_flow_shifts_each_branch_by_one_level() {
        let lat = Lattice::periodic(8).unwrap();
        let flow = spectral_flow(&lat, MassAngle::massless(), 33).unwrap();
        let mut up = 0;
        let mut down = 0;
        for b in &flow.branches {
            let shift = b.last().unwrap() - b[0];
            if (shift - TAU / 8.0).abs() < 1e-9 {
                up += 1;
            } else if (shift + TAU / 8.0).abs() < 1e-9 {
                down += 1;
            }
        }
        assert_eq!((up, down), (8, 8));
        for level in [0.1, 1.0, -2.5, 3.0] {
            assert_eq!(flow_count(&flow, level).unwrap(), 2);
            assert_eq!(flow_crossings(&flow, level).unwrap().net(), 0);
        }
        assert!(matches!(flow_count(&flow, 0.0), Err(QlgaError::NonGenericLevel { .. })));
    }

    #[test]
    fn massive_flow_has_no_crossings_in_the_gap() {
        let lat = Lattice::periodic(16).unwrap();
        let flow = spectral_flow(&lat, MassAngle::new(FRAC_PI_6).unwrap(), 64).unwrap();
        assert_eq!(flow.phases.len(), 64);
        assert!(flow.phases.iter().all(|p| p.len() == 32));
        for level in [0.05, -0.3, 0.5] {
            assert_eq!(flow_count(&flow, level).unwrap(), 0);
        }
        assert_eq!(flow_count(&flow, 1.3).unwrap(), 2);
    }

    #[test]
    fn bounded_flow_is_flat() {
        let lat = Lattice::bounded(10).unwrap();
        let flow = spectral_flow(&lat, MassAngle::new(0.5).unwrap(), 16).unwrap();
        assert!(flow.is_trivial());
        for b in &flow.branches {
            assert!(b.iter().all(|w| (w - b[0]).abs() < 1e-9));
        }
        assert_eq!(flow_count(&flow, 1.234).unwrap(), 0);
    }

    #[test]
    fn flow_needs_two_grid_points() {
        let lat = Lattice::periodic(4).unwrap();
        assert!(spectral_flow(&lat, MassAngle::massless(), 1).is_err());
    }

    #[test]
    fn coarse_grid_is_reported() {
        let phases = vec![vec![0.0, 1.0], vec![0.2, 1.0], vec![0.4, 1.0], vec![1.0, 0.95]];
        let sorted: Vec<Vec<f64>> = phases
            .into_iter()
            .map(|mut p| {
                p.sort_by(f64::total_cmp);
                p
            })
            .collect();
        assert!(matches!(
            track_branches(&sorted),
            Err(QlgaError::AmbiguousTracking { .. })
        ));
    }

    #[test]
    fn trend_classification() {
        assert_eq!(branch_trend(&[0.0, 0.1, 0.1, 0.3], 1e-9), Trend::NonDecreasing);
        assert_eq!(branch_trend(&[0.0, -0.1], 1e-9), Trend::NonIncreasing);
        assert_eq!(branch_trend(&[0.0, 1e-12], 1e-9), Trend::Constant);
        assert_eq!(branch_trend(&[0.0, 1.0, 0.5], 1e-9), Trend::Mixed);
    }
}
