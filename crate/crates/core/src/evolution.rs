//! The global evolution operator `U^{(φ,A)}` on periodic and bounded lattices.
//!
//! Row `x` of blocks reads its left neighbour through `w₋₁` and its right
//! neighbour through `w₊₁`:
//!
//! ```text
//! ψ(t+1,x) = e^{-iφ(x-1) - iA(x)} w₋₁ ψ(t,x-1) + e^{-iφ(x+1) + iA(x+1)} w₊₁ ψ(t,x+1)
//! ```
//!
//! so block `(x-1, x)` is `e^{-iφ(x)+iA(x)} w₊₁` and block `(x, x-1)` is
//! `e^{-iφ(x-1)-iA(x)} w₋₁`. The scalar potential multiplies every block of
//! its column; `A(x)` is the phase of the link between `x-1` and `x`.
//!
//! On a bounded lattice the blocks `(0,1)` and `(|L|-1,|L|-2)` are replaced by
//! the reflection blocks [`boundary_block_left`] and [`boundary_block_right`].
//! The reflecting rule never populates `ψ₋₁(0)` or `ψ₊₁(|L|-1)`; those two
//! channels are closed on themselves (phase `e^{-iφ}` of their column) so that
//! `U` is unitary on the full `2|L|`-dimensional space.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use crate::error::{QlgaError, Result};
use crate::lattice::{FieldConfig, Lattice, MassAngle, Topology, WaveFunction};

pub type Block = Matrix2<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// The homogeneous parity-invariant weights `w₋₁(θ)`, `w₊₁(θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub w_minus: Block,
    pub w_plus: Block,
}

pub fn weights(theta: MassAngle) -> Weights {
    let (s, c) = theta.value().sin_cos();
    let c = Complex64::new(c, 0.0);
    let is = Complex64::new(0.0, s);
    Weights {
        w_minus: Block::new(ZERO, is, ZERO, c),
        w_plus: Block::new(c, ZERO, is, ZERO),
    }
}

/// Left reflection block `[[0, 0], [i e^{iζ}, 0]]`: a left-mover arriving at
/// site 0 leaves as a right-mover.
pub fn boundary_block_left(zeta: f64) -> Block {
    Block::new(ZERO, ZERO, I * Complex64::from_polar(1.0, zeta), ZERO)
}

/// Right reflection block `[[0, i e^{iζ}], [0, 0]]`, the parity image of the
/// left one.
pub fn boundary_block_right(zeta: f64) -> Block {
    Block::new(ZERO, I * Complex64::from_polar(1.0, zeta), ZERO, ZERO)
}

/// `‖M†M − I‖_max`.
pub fn unitarity_residual(m: &DMatrix<Complex64>) -> f64 {
    let n = m.ncols();
    let g = m.adjoint() * m;
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

/// `U` together with the data it was built from.
#[derive(Debug, Clone)]
pub struct EvolutionOperator {
    dense: DMatrix<Complex64>,
    lattice: Lattice,
    theta: MassAngle,
    fields: FieldConfig,
}

fn put_block(m: &mut DMatrix<Complex64>, row: usize, col: usize, block: &Block) {
    for i in 0..2 {
        for j in 0..2 {
            m[(2 * row + i, 2 * col + j)] += block[(i, j)];
        }
    }
}

pub fn build_evolution(lattice: &Lattice, theta: MassAngle, fields: &FieldConfig) -> Result<EvolutionOperator> {
    fields.check_lattice(lattice)?;
    if fields.phi().iter().chain(fields.vector()).any(|v| !v.is_finite()) {
        return Err(QlgaError::NonFinite("field configuration"));
    }
    let n = lattice.size();
    let w = weights(theta);
    let phi = fields.phi();
    let a = fields.vector();
    let phase = |angle: f64| Complex64::from_polar(1.0, angle);
    let mut dense = DMatrix::from_element(2 * n, 2 * n, ZERO);

    match lattice.topology() {
        Topology::Periodic => {
            for x in 0..n {
                let left = (x + n - 1) % n;
                put_block(&mut dense, left, x, &(w.w_plus * phase(-phi[x] + a[x])));
                put_block(&mut dense, x, left, &(w.w_minus * phase(-phi[left] - a[x])));
            }
        }
        Topology::Bounded { zeta_left, zeta_right } => {
            for x in 1..n {
                let up = if x == 1 {
                    boundary_block_left(zeta_left)
                } else {
                    w.w_plus
                };
                let down = if x == n - 1 {
                    boundary_block_right(zeta_right)
                } else {
                    w.w_minus
                };
                put_block(&mut dense, x - 1, x, &(up * phase(-phi[x] + a[x])));
                put_block(&mut dense, x, x - 1, &(down * phase(-phi[x - 1] - a[x])));
            }
            dense[(0, 0)] = phase(-phi[0]);
            dense[(2 * n - 1, 2 * n - 1)] = phase(-phi[n - 1]);
        }
    }

    Ok(EvolutionOperator {
        dense,
        lattice: *lattice,
        theta,
        fields: fields.clone(),
    })
}

impl EvolutionOperator {
    pub fn dense(&self) -> &DMatrix<Complex64> {
        &self.dense
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn theta(&self) -> MassAngle {
        self.theta
    }

    pub fn fields(&self) -> &FieldConfig {
        &self.fields
    }

    pub fn dim(&self) -> usize {
        self.dense.nrows()
    }

    /// The 2×2 block coupling input site `col` to output site `row`.
    pub fn block(&self, row: usize, col: usize) -> Block {
        self.dense.fixed_view::<2, 2>(2 * row, 2 * col).into_owned()
    }

    pub fn check_unitarity(&self) -> f64 {
        unitarity_residual(&self.dense)
    }

    /// Copy with one block zeroed, for fault-injection checks.
    pub fn with_zeroed_block(&self, row: usize, col: usize) -> Self {
        let mut out = self.clone();
        out.dense.view_mut((2 * row, 2 * col), (2, 2)).fill(ZERO);
        out
    }

    fn check_state(&self, psi: &WaveFunction) -> Result<()> {
        if psi.sites() != self.lattice.size() {
            return Err(QlgaError::SizeMismatch {
                expected: self.lattice.size(),
                found: psi.sites(),
            });
        }
        Ok(())
    }

    /// `UΨ` through the dense matrix.
    pub fn step_dense(&self, psi: &WaveFunction) -> Result<WaveFunction> {
        self.check_state(psi)?;
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        WaveFunction::from_amplitudes((&self.dense * v).as_slice().to_vec())
    }

    /// `UΨ` evaluated site by site from the local update rule, without the
    /// dense matrix.
    pub fn step(&self, psi: &WaveFunction) -> Result<WaveFunction> {
        self.check_state(psi)?;
        let n = self.lattice.size();
        let w = weights(self.theta);
        let phi = self.fields.phi();
        let a = self.fields.vector();
        let apply = |m: &Block, v: [Complex64; 2], ph: f64| -> [Complex64; 2] {
            let p = Complex64::from_polar(1.0, ph);
            [
                p * (m[(0, 0)] * v[0] + m[(0, 1)] * v[1]),
                p * (m[(1, 0)] * v[0] + m[(1, 1)] * v[1]),
            ]
        };
        let (zeta_l, zeta_r, periodic) = match self.lattice.topology() {
            Topology::Periodic => (0.0, 0.0, true),
            Topology::Bounded { zeta_left, zeta_right } => (zeta_left, zeta_right, false),
        };
        let left_reflect = boundary_block_left(zeta_l);
        let right_reflect = boundary_block_right(zeta_r);

        let mut out = Vec::with_capacity(2 * n);
        for x in 0..n {
            let mut acc = [ZERO; 2];
            if let Some(l) = self.lattice.left_of(x) {
                let m = if !periodic && x == n - 1 {
                    &right_reflect
                } else {
                    &w.w_minus
                };
                let c = apply(m, psi.spinor(l), -phi[l] - a[x]);
                acc[0] += c[0];
                acc[1] += c[1];
            }
            if let Some(r) = self.lattice.right_of(x) {
                let m = if !periodic && r == 1 { &left_reflect } else { &w.w_plus };
                let c = apply(m, psi.spinor(r), -phi[r] + a[r]);
                acc[0] += c[0];
                acc[1] += c[1];
            }
            if !periodic && x == 0 {
                acc[0] += Complex64::from_polar(1.0, -phi[0]) * psi.spinor(0)[0];
            }
            if !periodic && x == n - 1 {
                acc[1] += Complex64::from_polar(1.0, -phi[n - 1]) * psi.spinor(n - 1)[1];
            }
            out.extend_from_slice(&acc);
        }
        WaveFunction::from_amplitudes(out)
    }

    /// `U^t Ψ` through the matrix-free rule.
    pub fn evolve(&self, psi: &WaveFunction, steps: usize) -> Result<WaveFunction> {
        let mut current = psi.clone();
        for _ in 0..steps {
            current = self.step(&current)?;
        }
        Ok(current)
    }
}
