//! Exact Gaussian-integer arithmetic for the waveguide-induced coefficients.
//!
//! At resonance every connection-point pair contributes one fourth root of
//! unity, so each coefficient is a Gaussian integer times `g²/(2ξ)`. Keeping
//! them as integers makes `Γ = 0` tests exact.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg};

use num_complex::Complex64;

use super::ModelError;

/// A coefficient `(re_units + i·im_units) · g²/(2ξ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ExactCoefficient {
    pub re_units: i64,
    pub im_units: i64,
}

impl ExactCoefficient {
    pub const ZERO: Self = Self::new(0, 0);
    pub const ONE: Self = Self::new(1, 0);
    pub const I: Self = Self::new(0, 1);

    pub const fn new(re_units: i64, im_units: i64) -> Self {
        Self { re_units, im_units }
    }

    pub fn is_zero(self) -> bool {
        self.re_units == 0 && self.im_units == 0
    }

    pub fn conj(self) -> Self {
        Self::new(self.re_units, -self.im_units)
    }

    /// `2·Re(A)` in units of `g²/ξ`, which equals `re_units`.
    pub fn dissipation_units(self) -> i64 {
        self.re_units
    }

    /// `2·Im(A)` in units of `g²/ξ`, which equals `im_units`.
    pub fn shift_units(self) -> i64 {
        self.im_units
    }

    /// Materializes the physical value for coupling `g` and hopping `xi`.
    pub fn to_complex(self, g: f64, xi: f64) -> Complex64 {
        let unit = g * g / (2.0 * xi);
        Complex64::new(self.re_units as f64 * unit, self.im_units as f64 * unit)
    }
}

impl Add for ExactCoefficient {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re_units + rhs.re_units, self.im_units + rhs.im_units)
    }
}

impl AddAssign for ExactCoefficient {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Mul for ExactCoefficient {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.re_units * rhs.re_units - self.im_units * rhs.im_units,
            self.re_units * rhs.im_units + self.im_units * rhs.re_units,
        )
    }
}

impl Mul<i64> for ExactCoefficient {
    type Output = Self;
    fn mul(self, rhs: i64) -> Self {
        Self::new(self.re_units * rhs, self.im_units * rhs)
    }
}

impl Neg for ExactCoefficient {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re_units, -self.im_units)
    }
}

impl fmt::Display for ExactCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.im_units < 0 { '-' } else { '+' };
        write!(
            f,
            "({}{}{}i)·g²/(2ξ)",
            self.re_units,
            sign,
            self.im_units.abs()
        )
    }
}

/// `i^{|d| mod 4}`, the phase picked up between two resonant connection
/// points separated by `d` sites.
pub fn phase_unit(separation: i64) -> ExactCoefficient {
    match separation.unsigned_abs() % 4 {
        0 => ExactCoefficient::new(1, 0),
        1 => ExactCoefficient::new(0, 1),
        2 => ExactCoefficient::new(-1, 0),
        _ => ExactCoefficient::new(0, -1),
    }
}

/// Self-coefficient of a giant atom whose two legs are `separation` sites
/// apart: `A = (g²/ξ)(1 + i^N)`.
pub fn single_atom_coefficient(separation: u64) -> Result<ExactCoefficient, ModelError> {
    if separation == 0 {
        return Err(ModelError::CoincidentLegs);
    }
    let sep = separation as i64;
    // Four ordered pairs: two on-site terms, two cross terms.
    Ok((ExactCoefficient::ONE + phase_unit(sep)) * 2)
}

/// Coefficient between two atoms with legs `a` and `b`:
/// the sum of the four cross phases (already in units of `g²/(2ξ)`).
pub fn pair_coefficient(a: [i64; 2], b: [i64; 2]) -> ExactCoefficient {
    let mut acc = ExactCoefficient::ZERO;
    for &x in &a {
        for &y in &b {
            acc += phase_unit(x - y);
        }
    }
    acc
}

/// Dissipation regime of a single giant atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `A = 0`
    DecoherenceFree,
    /// Real `A > 0`, like a small atom with coupling `2g`.
    SmallAtomLike,
    /// Complex `A` carrying a Lamb shift.
    LambShifted,
}

pub fn classify_single(separation: u64) -> Result<Regime, ModelError> {
    let a = single_atom_coefficient(separation)?;
    Ok(if a.is_zero() {
        Regime::DecoherenceFree
    } else if a.im_units == 0 {
        Regime::SmallAtomLike
    } else {
        Regime::LambShifted
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_units() {
        assert_eq!(phase_unit(0), ExactCoefficient::ONE);
        assert_eq!(phase_unit(3), ExactCoefficient::new(0, -1));
        assert_eq!(phase_unit(-6), ExactCoefficient::new(-1, 0));
        assert_eq!(phase_unit(-1), ExactCoefficient::I);
    }

    #[test]
    fn single_atom_values() {
        // units of g²/(2ξ): 2g²/ξ == 4 units, g²/ξ == 2 units
        assert_eq!(single_atom_coefficient(2).unwrap(), ExactCoefficient::ZERO);
        assert_eq!(single_atom_coefficient(4).unwrap(), ExactCoefficient::new(4, 0));
        assert_eq!(single_atom_coefficient(3).unwrap(), ExactCoefficient::new(2, -2));
        assert_eq!(single_atom_coefficient(1).unwrap(), ExactCoefficient::new(2, 2));
        assert!(matches!(
            single_atom_coefficient(0),
            Err(ModelError::CoincidentLegs)
        ));
    }

    #[test]
    fn regimes() {
        assert_eq!(classify_single(6).unwrap(), Regime::DecoherenceFree);
        assert_eq!(classify_single(8).unwrap(), Regime::SmallAtomLike);
        assert_eq!(classify_single(5).unwrap(), Regime::LambShifted);
    }

    #[test]
    fn materialized_value() {
        let a = single_atom_coefficient(3).unwrap().to_complex(0.05, 1.0);
        assert!((a.re - 0.0025).abs() < 1e-15);
        assert!((a.im + 0.0025).abs() < 1e-15);
    }

    #[test]
    fn gaussian_product() {
        assert_eq!(ExactCoefficient::I * ExactCoefficient::I, -ExactCoefficient::ONE);
        assert_eq!(ExactCoefficient::new(1, 2).conj(), ExactCoefficient::new(1, -2));
    }
}
