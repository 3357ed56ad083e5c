//! Local U(1) gauge transformations of states, operators and potentials,
//! gauge fixing of the vector potential, and the Wilson loop.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angles::{circular_diff, reduce_tau};
use crate::error::{QlgaError, Result};
use crate::evolution::EvolutionOperator;
use crate::lattice::{FieldConfig, GaugeFunction, Lattice, WaveFunction};

/// Tolerance on Wilson-loop agreement used by [`gauge_equivalent`].
pub const WILSON_TOLERANCE: f64 = 1e-10;

/// The holonomy `e^{iδ}` of the vector potential around a ring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilsonLoop {
    /// `δ` reduced to `[0, 2π)`.
    pub delta: f64,
    pub unit_complex: Complex64,
}

/// `Ψ' = D[e^{-iα(t,x)}] Ψ`.
pub fn transform_state(psi: &WaveFunction, g: &GaugeFunction) -> Result<WaveFunction> {
    psi.apply_site_phase(g.alpha_t())
}

/// `U' = D[e^{-iα(t+1,x)}] U D[e^{iα(t,x)}]`.
pub fn transform_operator(u: &EvolutionOperator, g: &GaugeFunction) -> Result<DMatrix<Complex64>> {
    g.check_lattice(u.lattice())?;
    let left: Vec<Complex64> = g.alpha_next().iter().map(|&a| Complex64::from_polar(1.0, -a)).collect();
    let right: Vec<Complex64> = g.alpha_t().iter().map(|&a| Complex64::from_polar(1.0, a)).collect();
    let dense = u.dense();
    Ok(DMatrix::from_fn(dense.nrows(), dense.ncols(), |i, j| {
        left[i / 2] * dense[(i, j)] * right[j / 2]
    }))
}

/// Sites preceding `x` for the spatial difference: wraps on a ring, and uses
/// `α(-1) = 0` on a bounded lattice (only `A'(0)` sees it, and that entry
/// never enters the evolution there).
fn previous(lattice: &Lattice, values: &[f64], x: usize) -> f64 {
    match lattice.left_of(x) {
        Some(l) => values[l],
        None => 0.0,
    }
}

/// `φ' = φ + Δ_t α(t+1,·)`, `A' = A + Δ_x α(t+1,·)`.
pub fn transform_fields(fields: &FieldConfig, g: &GaugeFunction, lattice: &Lattice) -> Result<FieldConfig> {
    fields.check_lattice(lattice)?;
    g.check_lattice(lattice)?;
    let next = g.alpha_next();
    let phi = fields
        .phi()
        .iter()
        .zip(next.iter().zip(g.alpha_t()))
        .map(|(p, (an, at))| p + an - at)
        .collect();
    let a = fields
        .vector()
        .iter()
        .enumerate()
        .map(|(x, a)| a + next[x] - previous(lattice, next, x))
        .collect();
    FieldConfig::new(phi, a)
}

/// `α(t,·) ≡ 0`, `α(t+1,x) = −Σ_{y≤x} A(y)`. After [`transform_fields`] the
/// vector potential vanishes on every link except `x = 0`.
pub fn gauge_fix(fields: &FieldConfig, lattice: &Lattice) -> Result<GaugeFunction> {
    fields.check_lattice(lattice)?;
    let partial: Vec<f64> = fields
        .vector()
        .iter()
        .scan(0.0, |acc, a| {
            *acc -= a;
            Some(*acc)
        })
        .collect();
    GaugeFunction::new(vec![0.0; lattice.size()], partial)
}

pub fn wilson_loop(fields: &FieldConfig, lattice: &Lattice) -> Result<WilsonLoop> {
    if !lattice.is_periodic() {
        return Err(QlgaError::RequiresPeriodic("the Wilson loop"));
    }
    fields.check_lattice(lattice)?;
    let total: f64 = fields.vector().iter().sum();
    Ok(WilsonLoop {
        delta: reduce_tau(total),
        unit_complex: Complex64::from_polar(1.0, total),
    })
}

/// Whether two single-step field configurations give gauge-equivalent
/// evolutions. Scalar potentials must agree; on a bounded lattice every
/// vector potential is then equivalent, on a ring the Wilson loops must agree
/// modulo 2π.
pub fn gauge_equivalent(a: &FieldConfig, b: &FieldConfig, lattice: &Lattice) -> Result<bool> {
    a.check_lattice(lattice)?;
    b.check_lattice(lattice)?;
    let same_phi = a
        .phi()
        .iter()
        .zip(b.phi())
        .all(|(x, y)| circular_diff(*x, *y).abs() <= WILSON_TOLERANCE);
    if !same_phi {
        return Ok(false);
    }
    if !lattice.is_periodic() {
        return Ok(true);
    }
    let wa = wilson_loop(a, lattice)?;
    let wb = wilson_loop(b, lattice)?;
    Ok(circular_diff(wa.delta, wb.delta).abs() <= WILSON_TOLERANCE)
}

/// Compares every block of `transform_operator(u, g)` with its closed form
///
/// ```text
/// U'_{x-1,x} = e^{-iΔ_tα(t+1,x)   + iΔ_xα(t+1,x)} U_{x-1,x}
/// U'_{x,x-1} = e^{-iΔ_tα(t+1,x-1) − iΔ_xα(t+1,x)} U_{x,x-1}
/// ```
///
/// (and `e^{-iΔ_tα(t+1,x)}` on the closed boundary channels); every other
/// block must stay zero. Returns the largest entrywise deviation.
pub fn verify_block_formulas(u: &EvolutionOperator, g: &GaugeFunction) -> Result<f64> {
    let lattice = u.lattice();
    g.check_lattice(lattice)?;
    let n = lattice.size();
    let transformed = transform_operator(u, g)?;
    let dt: Vec<f64> = g.alpha_next().iter().zip(g.alpha_t()).map(|(a, b)| a - b).collect();
    let dx = |x: usize| g.alpha_next()[x] - previous(lattice, g.alpha_next(), x);

    let mut expected_phase = vec![vec![None::<Complex64>; n]; n];
    let first = if lattice.is_periodic() { 0 } else { 1 };
    for x in first..n {
        let l = lattice.left_of(x).expect("column has a left neighbour");
        expected_phase[l][x] = Some(Complex64::from_polar(1.0, -dt[x] + dx(x)));
        expected_phase[x][l] = Some(Complex64::from_polar(1.0, -dt[l] - dx(x)));
    }
    if !lattice.is_periodic() {
        expected_phase[0][0] = Some(Complex64::from_polar(1.0, -dt[0]));
        expected_phase[n - 1][n - 1] = Some(Complex64::from_polar(1.0, -dt[n - 1]));
    }

    let original = u.dense();
    let mut worst = 0.0f64;
    for (row, phases) in expected_phase.iter().enumerate() {
        for (col, phase) in phases.iter().enumerate() {
            let factor = phase.unwrap_or(Complex64::new(0.0, 0.0));
            for i in 0..2 {
                for j in 0..2 {
                    let (r, c) = (2 * row + i, 2 * col + j);
                    let expect = factor * original[(r, c)];
                    worst = worst.max((transformed[(r, c)] - expect).norm());
                    if phase.is_none() {
                        worst = worst.max(transformed[(r, c)].norm());
                    }
                }
            }
        }
    }
    Ok(worst)
}

pub fn max_entry_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    assert_eq!(a.shape(), b.shape(), "matrix shapes differ");
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{build_evolution, unitarity_residual};
    use crate::lattice::{MassAngle, Topology};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{PI, TAU};

    fn random_vec(rng: &mut ChaCha8Rng, n: usize, span: f64) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-span..span)).collect()
    }

    fn random_fields(rng: &mut ChaCha8Rng, n: usize) -> FieldConfig {
        FieldConfig::new(random_vec(rng, n, PI), random_vec(rng, n, PI)).unwrap()
    }

    fn lattices(n: usize) -> [Lattice; 2] {
        [
            Lattice::periodic(n).unwrap(),
            Lattice::new(n, Topology::bounded(0.8, -2.1).unwrap()).unwrap(),
        ]
    }

    #[test]
    fn constant_gauge_leaves_operator_unchanged() {
        let lat = Lattice::periodic(6).unwrap();
        let u = build_evolution(&lat, MassAngle::new(0.5).unwrap(), &FieldConfig::zero(6)).unwrap();
        let g = GaugeFunction::time_independent(vec![1.234; 6]).unwrap();
        let t = transform_operator(&u, &g).unwrap();
        assert!(max_entry_diff(&t, u.dense()) < 1e-15);
    }

    #[test]
    fn transformed_operator_is_unitary_with_superdiagonal_phases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for lat in lattices(10) {
            let fields = random_fields(&mut rng, 10);
            let u = build_evolution(&lat, MassAngle::new(0.9).unwrap(), &fields).unwrap();
            let g = GaugeFunction::new(random_vec(&mut rng, 10, 5.0), random_vec(&mut rng, 10, 5.0)).unwrap();
            let t = transform_operator(&u, &g).unwrap();
            assert!(unitarity_residual(&t) <= 1e-12);
            // superdiagonal block (x-1, x): e^{-iα(t+1,x-1)+iα(t,x)} times the original block
            for x in 2..10 {
                let factor = Complex64::from_polar(1.0, -g.alpha_next()[x - 1] + g.alpha_t()[x]);
                for i in 0..2 {
                    for j in 0..2 {
                        let (r, c) = (2 * (x - 1) + i, 2 * x + j);
                        assert!((t[(r, c)] - factor * u.dense()[(r, c)]).norm() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn identity_gauge_leaves_fields_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for lat in lattices(7) {
            let f = random_fields(&mut rng, 7);
            let out = transform_fields(&f, &GaugeFunction::identity(7), &lat).unwrap();
            assert_eq!(out, f);
        }
    }

    #[test]
    fn time_independent_gauge_only_moves_vector_potential() {
        let lat = Lattice::periodic(6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_fields(&mut rng, 6);
        let alpha = random_vec(&mut rng, 6, 3.0);
        let g = GaugeFunction::time_independent(alpha.clone()).unwrap();
        let out = transform_fields(&f, &g, &lat).unwrap();
        assert_eq!(out.phi(), f.phi());
        for x in 0..6 {
            let prev = alpha[(x + 5) % 6];
            assert!((out.vector()[x] - (f.vector()[x] + alpha[x] - prev)).abs() < 1e-15);
        }
    }

    #[test]
    fn commuting_diagram_with_time_dependent_gauge() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in [3, 4, 9, 16] {
            for lat in lattices(n) {
                let theta = MassAngle::new(rng.random_range(0.0..1.5)).unwrap();
                let fields = random_fields(&mut rng, n);
                let g = GaugeFunction::new(random_vec(&mut rng, n, 6.0), random_vec(&mut rng, n, 6.0)).unwrap();
                let u = build_evolution(&lat, theta, &fields).unwrap();
                let via_operator = transform_operator(&u, &g).unwrap();
                let via_fields = build_evolution(&lat, theta, &transform_fields(&fields, &g, &lat).unwrap()).unwrap();
                assert!(max_entry_diff(&via_operator, via_fields.dense()) <= 1e-12);
            }
        }
    }

    #[test]
    fn gauge_covariance_of_a_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for lat in lattices(12) {
            let u = build_evolution(&lat, MassAngle::new(0.6).unwrap(), &random_fields(&mut rng, 12)).unwrap();
            let g = GaugeFunction::new(random_vec(&mut rng, 12, 4.0), random_vec(&mut rng, 12, 4.0)).unwrap();
            let psi = WaveFunction::from_amplitudes(
                (0..24)
                    .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect(),
            )
            .unwrap();
            let t = transform_operator(&u, &g).unwrap();
            let psi_prime = transform_state(&psi, &g).unwrap();
            let lhs = &t * nalgebra::DVector::from_column_slice(psi_prime.amplitudes());
            let rhs = u.step(&psi).unwrap().apply_site_phase(g.alpha_next()).unwrap();
            for (a, b) in lhs.iter().zip(rhs.amplitudes()) {
                assert!((a - b).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn gauge_fix_removes_vector_potential() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let zero = GaugeFunction::identity(8);
        assert_eq!(
            gauge_fix(&FieldConfig::zero(8), &Lattice::periodic(8).unwrap()).unwrap(),
            zero
        );
        for lat in lattices(8) {
            let f = FieldConfig::new(vec![0.0; 8], random_vec(&mut rng, 8, 2.0)).unwrap();
            let g = gauge_fix(&f, &lat).unwrap();
            assert!(g.alpha_t().iter().all(|&a| a == 0.0));
            let fixed = transform_fields(&f, &g, &lat).unwrap();
            for x in 1..8 {
                assert!(fixed.vector()[x].abs() < 1e-14);
            }
            if lat.is_periodic() {
                let w = wilson_loop(&f, &lat).unwrap();
                let rebuilt = Complex64::from_polar(1.0, fixed.vector()[0]);
                assert!((rebuilt - w.unit_complex).norm() < 1e-12);
            } else {
                // equals the A = 0 operator carrying only the φ' phases
                let theta = MassAngle::new(0.4).unwrap();
                let u_fixed = build_evolution(&lat, theta, &fixed).unwrap();
                let no_a = FieldConfig::new(fixed.phi().to_vec(), vec![0.0; 8]).unwrap();
                let u_ref = build_evolution(&lat, theta, &no_a).unwrap();
                assert!(max_entry_diff(u_fixed.dense(), u_ref.dense()) < 1e-14);
            }
        }
    }

    #[test]
    fn wilson_loop_values_and_topology_guard() {
        let lat = Lattice::periodic(16).unwrap();
        let w0 = wilson_loop(&FieldConfig::zero(16), &lat).unwrap();
        assert_eq!(w0.delta, 0.0);
        assert_eq!(w0.unit_complex, Complex64::new(1.0, 0.0));
        let a = 0.3;
        let w = wilson_loop(&FieldConfig::uniform_vector(16, a).unwrap(), &lat).unwrap();
        assert!((w.unit_complex - Complex64::from_polar(1.0, 16.0 * a)).norm() < 1e-12);
        assert!((w.delta - reduce_tau(16.0 * a)).abs() < 1e-12);
        assert!((w.unit_complex.norm() - 1.0).abs() < 1e-12);
        let bounded = Lattice::bounded(16).unwrap();
        assert_eq!(
            wilson_loop(&FieldConfig::zero(16), &bounded),
            Err(QlgaError::RequiresPeriodic("the Wilson loop"))
        );
    }

    #[test]
    fn wilson_loop_is_gauge_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let lat = Lattice::periodic(11).unwrap();
        for _ in 0..20 {
            let f = random_fields(&mut rng, 11);
            let g = GaugeFunction::new(random_vec(&mut rng, 11, 9.0), random_vec(&mut rng, 11, 9.0)).unwrap();
            let before = wilson_loop(&f, &lat).unwrap();
            let after = wilson_loop(&transform_fields(&f, &g, &lat).unwrap(), &lat).unwrap();
            assert!((before.unit_complex - after.unit_complex).norm() <= 1e-12);
        }
    }

    #[test]
    fn block_formulas_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for lat in lattices(8) {
            let u = build_evolution(&lat, MassAngle::new(0.3).unwrap(), &random_fields(&mut rng, 8)).unwrap();
            assert_eq!(verify_block_formulas(&u, &GaugeFunction::identity(8)).unwrap(), 0.0);
            let g = GaugeFunction::new(random_vec(&mut rng, 8, 3.0), random_vec(&mut rng, 8, 3.0)).unwrap();
            assert!(verify_block_formulas(&u, &g).unwrap() <= 1e-13);
        }
    }

    #[test]
    fn equivalence_classes() {
        let ring = Lattice::periodic(5).unwrap();
        let walls = Lattice::bounded(5).unwrap();
        let a = FieldConfig::new(vec![0.0; 5], vec![0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
        let b = FieldConfig::uniform_vector(5, 0.3).unwrap();
        let c = FieldConfig::uniform_vector(5, 0.3 + TAU / 5.0).unwrap();
        let d = FieldConfig::uniform_vector(5, 0.1).unwrap();
        assert!(gauge_equivalent(&a, &b, &ring).unwrap());
        assert!(gauge_equivalent(&b, &c, &ring).unwrap());
        assert!(!gauge_equivalent(&b, &d, &ring).unwrap());
        assert!(gauge_equivalent(&b, &d, &walls).unwrap());
        let e = FieldConfig::new(vec![0.2; 5], vec![0.3; 5]).unwrap();
        assert!(!gauge_equivalent(&b, &e, &walls).unwrap());
    }
}
