use nalgebra::DMatrix;
use num_complex::Complex64;

use super::LindbladError;

/// Index of `|e⟩` on atom 0 or 1 within the two-atom basis
/// `|gg⟩, |ge⟩, |eg⟩, |ee⟩` (atom 1 is the left tensor factor).
pub const GG: usize = 0;
pub const GE: usize = 1;
pub const EG: usize = 2;
pub const EE: usize = 3;

/// Density matrix of one (`|g⟩, |e⟩`) or two atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self, LindbladError> {
        if !m.is_square() || !(m.nrows() == 2 || m.nrows() == 4) {
            return Err(LindbladError::Dimension(m.nrows()));
        }
        Ok(Self { m })
    }

    /// `|i⟩⟨i|` in a `dim`-dimensional basis.
    pub fn basis(dim: usize, index: usize) -> Result<Self, LindbladError> {
        let mut m = DMatrix::zeros(dim, dim);
        if index < dim {
            m[(index, index)] = Complex64::new(1.0, 0.0);
        }
        Self::from_matrix(m)
    }

    /// `|ψ⟩⟨ψ|` for a normalized `ψ`.
    pub fn pure(psi: &[Complex64]) -> Result<Self, LindbladError> {
        let n = psi.len();
        Self::from_matrix(DMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj()))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }

    pub fn trace(&self) -> Complex64 {
        self.m.trace()
    }

    /// `max |ρ − ρ†|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.m[(i, j)] - self.m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.m + self.m.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation(&self, psi: &[Complex64]) -> f64 {
        let n = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += psi[i].conj() * self.m[(i, j)] * psi[j];
            }
        }
        acc.re
    }

    /// Excited-state population of atom `which` (0 or 1 for two atoms).
    pub fn excited_population(&self, which: usize) -> f64 {
        match (self.dim(), which) {
            (2, _) => self.m[(1, 1)].re,
            (_, 0) => self.m[(EG, EG)].re + self.m[(EE, EE)].re,
            _ => self.m[(GE, GE)].re + self.m[(EE, EE)].re,
        }
    }

    pub(crate) fn to_vec(&self) -> Vec<Complex64> {
        // column stacking
        self.m.iter().copied().collect()
    }

    pub(crate) fn from_vec_hermitized(v: &[Complex64], dim: usize) -> Self {
        let m = DMatrix::from_column_slice(dim, dim, v);
        let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        Self { m }
    }
}

/// `(|eg⟩ − i|ge⟩)/√2`.
pub fn bell_target() -> [Complex64; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut psi = [Complex64::new(0.0, 0.0); 4];
    psi[EG] = Complex64::new(s, 0.0);
    psi[GE] = Complex64::new(0.0, -s);
    psi
}

/// `F = √⟨ψ|ρ|ψ⟩` against the maximally entangled exchange target.
pub fn bell_fidelity(rho: &DensityMatrix) -> Result<f64, LindbladError> {
    if rho.dim() != 4 {
        return Err(LindbladError::Dimension(rho.dim()));
    }
    Ok(rho.expectation(&bell_target()).max(0.0).sqrt().min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fidelity_of_target_and_product_state() {
        let target = DensityMatrix::pure(&bell_target()).unwrap();
        assert!((bell_fidelity(&target).unwrap() - 1.0).abs() < 1e-15);
        let eg = DensityMatrix::basis(4, EG).unwrap();
        assert!((bell_fidelity(&eg).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        let single = DensityMatrix::basis(2, 1).unwrap();
        assert!(bell_fidelity(&single).is_err());
    }

    #[test]
    fn invariants_of_mixed_state() {
        let mut m = DMatrix::zeros(4, 4);
        m[(EG, EG)] = Complex64::new(0.6, 0.0);
        m[(GE, GE)] = Complex64::new(0.4, 0.0);
        m[(EG, GE)] = Complex64::new(0.0, 0.2);
        m[(GE, EG)] = Complex64::new(0.0, -0.2);
        let rho = DensityMatrix::from_matrix(m).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-15);
        assert_eq!(rho.hermiticity_residual(), 0.0);
        // block eigenvalues 0.5 ± √0.05, plus the empty gg/ee levels
        assert!(rho.min_eigenvalue().abs() < 1e-12);
        assert!((rho.excited_population(0) - 0.6).abs() < 1e-15);
        assert!((rho.excited_population(1) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_dimension() {
        assert!(DensityMatrix::from_matrix(DMatrix::zeros(3, 3)).is_err());
    }
}
