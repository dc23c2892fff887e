//! Dense Liouvillian generators on the column-stacked density matrix and
//! their fixed-step integration.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::density::{DensityMatrix, EG, GE};
use super::LindbladError;
use crate::integrate::substeps;
use crate::model::{PhysicalRates, RateTable};

const POSITIVITY_ABORT: f64 = -1e-6;
const PSD_TOL: f64 = 1e-12;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Waveguide-induced and intrinsic rates of the two-atom master equation,
/// all in angular-frequency units (rotating frame).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TwoAtomRates {
    pub gamma11: f64,
    pub gamma22: f64,
    pub gamma12: f64,
    pub u11: f64,
    pub u22: f64,
    pub u12: f64,
    /// Intrinsic decay, per atom.
    pub gamma1: f64,
    /// Pure dephasing, per atom.
    pub gamma2: f64,
}

impl TwoAtomRates {
    /// Pure coherent exchange at `j_eff`.
    pub fn exchange(j_eff: f64) -> Self {
        Self {
            u12: 2.0 * j_eff,
            ..Self::default()
        }
    }

    /// Exchange at `j_eff` with individual waveguide dissipation only.
    pub fn individual(gamma11: f64, gamma22: f64, j_eff: f64) -> Self {
        Self {
            gamma11,
            gamma22,
            ..Self::exchange(j_eff)
        }
    }

    pub fn from_physical(p: &PhysicalRates) -> Self {
        Self {
            gamma11: p.gamma[0][0],
            gamma22: p.gamma[1][1],
            gamma12: p.gamma[0][1],
            u11: p.u[0][0],
            u22: p.u[1][1],
            u12: p.u[0][1],
            gamma1: 0.0,
            gamma2: 0.0,
        }
    }

    pub fn from_table(table: &RateTable, g: f64, xi: f64) -> Self {
        Self::from_physical(&table.physical(g, xi))
    }

    pub fn with_intrinsic(mut self, gamma1: f64, gamma2: f64) -> Self {
        self.gamma1 = gamma1;
        self.gamma2 = gamma2;
        self
    }

    /// `U₁₂/2`.
    pub fn j_eff(&self) -> f64 {
        self.u12 / 2.0
    }

    /// `δ = Γ₁₁ + Γ₂₂`.
    pub fn total_loss(&self) -> f64 {
        self.gamma11 + self.gamma22
    }

    /// `Δ = Γ₁₁ − Γ₂₂`.
    pub fn loss_imbalance(&self) -> f64 {
        self.gamma11 - self.gamma22
    }

    /// `K = Δ² − 16 j_eff²`.
    pub fn discriminant(&self) -> f64 {
        let d = self.loss_imbalance();
        let j = self.j_eff();
        d * d - 16.0 * j * j
    }

    /// Mirror image: atom labels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            gamma11: self.gamma22,
            gamma22: self.gamma11,
            u11: self.u22,
            u22: self.u11,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<(), LindbladError> {
        let all = [
            self.gamma11,
            self.gamma22,
            self.gamma12,
            self.u11,
            self.u22,
            self.u12,
            self.gamma1,
            self.gamma2,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(LindbladError::NonFiniteRate);
        }
        if self.gamma1 < 0.0 || self.gamma2 < 0.0 {
            return Err(LindbladError::NegativeRate);
        }
        let scale = self.gamma11.abs().max(self.gamma22.abs()).max(self.gamma12.abs());
        let det = self.gamma11 * self.gamma22 - self.gamma12 * self.gamma12;
        if self.gamma11 < 0.0 || self.gamma22 < 0.0 || det < -PSD_TOL * scale * scale.max(1.0) {
            return Err(LindbladError::IndefiniteDissipation {
                gamma11: self.gamma11,
                gamma22: self.gamma22,
                gamma12: self.gamma12,
            });
        }
        Ok(())
    }

    fn scale(&self) -> f64 {
        [
            self.gamma11,
            self.gamma22,
            self.gamma12,
            self.u11 / 2.0,
            self.u22 / 2.0,
            self.j_eff(),
            self.gamma1,
            self.gamma2,
        ]
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max)
    }
}

/// A linear generator `dρ/dt = L[ρ]` acting on column-stacked `ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    dim: usize,
    matrix: DMatrix<Complex64>,
    rate_scale: f64,
}

fn left(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    DMatrix::identity(a.nrows(), a.nrows()).kronecker(a)
}

fn right(b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    b.transpose().kronecker(&DMatrix::identity(b.nrows(), b.nrows()))
}

/// Superoperator of `ρ ↦ aρb`.
fn sandwich(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    b.transpose().kronecker(a)
}

fn commutator(h: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (left(h) - right(h)) * Complex64::new(0.0, -1.0)
}

/// `Σ_ij c_ij/2 (2 L_j ρ L_i† − L_i†L_j ρ − ρ L_i†L_j)`.
fn kossakowski(ops: &[DMatrix<Complex64>], coef: &[Vec<f64>]) -> DMatrix<Complex64> {
    let d = ops[0].nrows();
    let mut out = DMatrix::zeros(d * d, d * d);
    for (i, li) in ops.iter().enumerate() {
        let li_dag = li.adjoint();
        for (j, lj) in ops.iter().enumerate() {
            let cij = coef[i][j];
            if cij == 0.0 {
                continue;
            }
            let prod = &li_dag * lj;
            let term = sandwich(lj, &li_dag) * c(2.0) - left(&prod) - right(&prod);
            out += term * c(cij / 2.0);
        }
    }
    out
}

/// Single-qubit operators in the `|g⟩, |e⟩` basis.
fn lowering() -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(2, 2);
    m[(0, 1)] = c(1.0);
    m
}

fn pauli_z() -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(2, 2);
    m[(0, 0)] = c(-1.0);
    m[(1, 1)] = c(1.0);
    m
}

fn on_atom(op: &DMatrix<Complex64>, which: usize) -> DMatrix<Complex64> {
    let id = DMatrix::identity(2, 2);
    if which == 0 {
        op.kronecker(&id)
    } else {
        id.kronecker(op)
    }
}

impl Liouvillian {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|v| *v == Complex64::new(0.0, 0.0))
    }

    /// Largest rate entering the generator; sets the default step.
    pub fn rate_scale(&self) -> f64 {
        self.rate_scale
    }

    /// `10⁻³ / rate_scale`, or unbounded for a vanishing generator.
    pub fn default_dt(&self) -> f64 {
        if self.rate_scale > 0.0 {
            1e-3 / self.rate_scale
        } else {
            f64::INFINITY
        }
    }

    pub fn apply(&self, rho: &DensityMatrix) -> DMatrix<Complex64> {
        let v = DVector::from_vec(rho.to_vec());
        let out = &self.matrix * v;
        DMatrix::from_column_slice(self.dim, self.dim, out.as_slice())
    }

    /// The RK4 update for a linear autonomous system,
    /// `I + hL + (hL)²/2 + (hL)³/6 + (hL)⁴/24`.
    fn rk4_step_matrix(&self, h: f64) -> DMatrix<Complex64> {
        let n = self.matrix.nrows();
        let hl = &self.matrix * c(h);
        let mut out = DMatrix::identity(n, n);
        let mut term = DMatrix::identity(n, n);
        for k in 1..=4 {
            term = &term * &hl * c(1.0 / k as f64);
            out += &term;
        }
        out
    }
}

/// Generator of the single-atom equation
/// `ρ̇ = 2Re(A) σ⁻ρσ⁺ − A σ⁺σ⁻ρ − A* ρσ⁺σ⁻` (rotating frame).
pub fn single_atom_liouvillian(a: Complex64) -> Result<Liouvillian, LindbladError> {
    if !(a.re >= 0.0) || !a.im.is_finite() {
        return Err(LindbladError::NegativeDecay(a.re));
    }
    let sm = lowering();
    let sp = sm.adjoint();
    let n = &sp * &sm;
    let matrix = sandwich(&sm, &sp) * c(2.0 * a.re) - left(&n) * a - right(&n) * a.conj();
    Ok(Liouvillian {
        dim: 2,
        matrix,
        rate_scale: a.norm(),
    })
}

/// Two-atom generator: Lamb shifts `U_ii/2`, exchange `U₁₂/2`, collective
/// dissipation `Γ_ij`, intrinsic decay `γ₁` and `σᶻ` dephasing `γ₂`.
pub fn build_liouvillian(r: &TwoAtomRates) -> Result<Liouvillian, LindbladError> {
    r.validate()?;
    let s1 = on_atom(&lowering(), 0);
    let s2 = on_atom(&lowering(), 1);
    let n1 = s1.adjoint() * &s1;
    let n2 = s2.adjoint() * &s2;
    let exchange = s1.adjoint() * &s2 + s2.adjoint() * &s1;
    let h = &n1 * c(r.u11 / 2.0) + &n2 * c(r.u22 / 2.0) + exchange * c(r.u12 / 2.0);

    let mut matrix = commutator(&h);
    let ops = [s1, s2];
    matrix += kossakowski(
        &ops,
        &[
            vec![r.gamma11 + r.gamma1, r.gamma12],
            vec![r.gamma12, r.gamma22 + r.gamma1],
        ],
    );
    if r.gamma2 != 0.0 {
        let id = DMatrix::<Complex64>::identity(16, 16);
        for which in 0..2 {
            let z = on_atom(&pauli_z(), which);
            matrix += (sandwich(&z, &z) - &id) * c(r.gamma2 / 2.0);
        }
    }
    Ok(Liouvillian {
        dim: 4,
        matrix,
        rate_scale: r.scale(),
    })
}

/// Integrates `ρ̇ = L[ρ]` with fixed-step RK4 and returns `ρ` at every grid
/// time. `dt` defaults to [`Liouvillian::default_dt`]. `ρ` is re-Hermitized
/// after every step; trace is never renormalized.
pub fn evolve_density(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    dt: Option<f64>,
) -> Result<Vec<DensityMatrix>, LindbladError> {
    if rho0.dim() != l.dim {
        return Err(LindbladError::Dimension(rho0.dim()));
    }
    let dt = dt.unwrap_or_else(|| l.default_dt());
    if !(dt > 0.0) {
        return Err(LindbladError::BadStep(dt));
    }
    let d = l.dim;
    let mut steps: HashMap<u64, DMatrix<Complex64>> = HashMap::new();
    let mut v = DVector::from_vec(rho0.to_vec());
    let mut t = 0.0;
    let mut out = Vec::with_capacity(t_grid.len());
    for &target in t_grid {
        if !(target >= t) {
            return Err(LindbladError::BadGrid);
        }
        let n = substeps(target - t, dt);
        if n > 0 {
            let h = (target - t) / n as f64;
            let p = steps
                .entry(h.to_bits())
                .or_insert_with(|| l.rk4_step_matrix(h));
            for _ in 0..n {
                v = &*p * &v;
                hermitize(&mut v, d);
            }
        }
        t = target;
        let rho = DensityMatrix::from_vec_hermitized(v.as_slice(), d);
        let min_eig = rho.min_eigenvalue();
        if min_eig < POSITIVITY_ABORT {
            return Err(LindbladError::PositivityViolation { time: t, min_eig });
        }
        out.push(rho);
    }
    Ok(out)
}

fn hermitize(v: &mut DVector<Complex64>, d: usize) {
    for j in 0..d {
        for i in 0..=j {
            let a = v[j * d + i];
            let b = v[i * d + j];
            let m = (a + b.conj()) * 0.5;
            v[j * d + i] = m;
            v[i * d + j] = m.conj();
        }
    }
}

/// Runs [`evolve_density`] at `dt` and `dt/2` and fails unless every entry
/// of every output agrees within `tolerance`.
pub fn evolve_density_checked(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    dt: Option<f64>,
    tolerance: f64,
) -> Result<Vec<DensityMatrix>, LindbladError> {
    let dt = dt.unwrap_or_else(|| l.default_dt());
    let coarse = evolve_density(l, rho0, t_grid, Some(dt))?;
    let fine = evolve_density(l, rho0, t_grid, Some(dt / 2.0))?;
    let deviation = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a.matrix() - b.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    if deviation > tolerance {
        return Err(LindbladError::AccuracyCheck {
            deviation,
            tolerance,
        });
    }
    Ok(fine)
}

/// Integrates the single-atom equation for rate `a`.
pub fn single_atom_evolve(
    a: Complex64,
    rho0: &DensityMatrix,
    t_grid: &[f64],
) -> Result<Vec<DensityMatrix>, LindbladError> {
    let l = single_atom_liouvillian(a)?;
    evolve_density(&l, rho0, t_grid, None)
}

/// Initial state with atom `which` excited and the other in `|g⟩`.
pub fn one_excited(which: usize) -> DensityMatrix {
    DensityMatrix::basis(4, if which == 0 { EG } else { GE }).expect("dim 4")
}
