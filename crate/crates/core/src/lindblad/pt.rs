//! Spectrum of the single-excitation effective Hamiltonian
//! `H = J(σ₁⁺σ₂⁻ + h.c.) − iΓ₁₁/2 |e⟩₁⟨e| − iΓ₂₂/2 |e⟩₂⟨e|`.

use num_complex::Complex64;

/// Relative `|K| / (Δ² + 16J²)` treated as coalescence.
const COALESCENCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PtPhase {
    /// `K < 0`: equal decay, split frequencies.
    Symmetric,
    /// `K = 0`: the two eigenvalues coalesce.
    ExceptionalPoint,
    /// `K > 0`: zero frequencies, split decay.
    Broken,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtSpectrum {
    pub plus: Complex64,
    pub minus: Complex64,
    pub discriminant: f64,
    pub phase: PtPhase,
}

/// `ω± = −iδ/4 ± √(−K)/4` with `K = (Γ₁₁ − Γ₂₂)² − 16 j_eff²`.
pub fn pt_eigenfrequencies(gamma11: f64, gamma22: f64, j_eff: f64) -> PtSpectrum {
    let delta = gamma11 + gamma22;
    let imbalance = gamma11 - gamma22;
    let scale = imbalance * imbalance + 16.0 * j_eff * j_eff;
    let k = imbalance * imbalance - 16.0 * j_eff * j_eff;
    let centre = Complex64::new(0.0, -delta / 4.0);
    let phase = if k.abs() <= COALESCENCE_TOL * scale {
        PtPhase::ExceptionalPoint
    } else if k < 0.0 {
        PtPhase::Symmetric
    } else {
        PtPhase::Broken
    };
    let split = match phase {
        PtPhase::ExceptionalPoint => Complex64::new(0.0, 0.0),
        _ => Complex64::new(-k, 0.0).sqrt() / 4.0,
    };
    PtSpectrum {
        plus: centre + split,
        minus: centre - split,
        discriminant: k,
        phase,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermitian_limit() {
        let s = pt_eigenfrequencies(0.0, 0.0, 0.8);
        assert_eq!(s.phase, PtPhase::Symmetric);
        assert!((s.plus - Complex64::new(0.8, 0.0)).norm() < 1e-15);
        assert!((s.minus - Complex64::new(-0.8, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn exceptional_point() {
        let s = pt_eigenfrequencies(0.0, 4.0, 1.0);
        assert_eq!(s.phase, PtPhase::ExceptionalPoint);
        assert_eq!(s.plus, s.minus);
        assert_eq!(s.plus, Complex64::new(0.0, -1.0));
    }

    #[test]
    fn realizable_nonreciprocal_point() {
        let j = 1.0;
        let s = pt_eigenfrequencies(0.0, 2.0 * j, j);
        assert_eq!(s.phase, PtPhase::Symmetric);
        let r3 = 3f64.sqrt() / 2.0;
        assert!((s.plus - Complex64::new(r3, -0.5)).norm() < 1e-15);
        assert!((s.minus - Complex64::new(-r3, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn broken_phase() {
        let s = pt_eigenfrequencies(6.0, 0.0, 1.0);
        assert_eq!(s.phase, PtPhase::Broken);
        assert_eq!(s.plus.re, 0.0);
        assert_eq!(s.minus.re, 0.0);
        assert!(s.plus.im != s.minus.im);
    }
}
