//! Domain types and the exact Markovian coefficient algebra.

mod coefficient;
mod search;

pub use coefficient::{
    classify_single, pair_coefficient, phase_unit, single_atom_coefficient, ExactCoefficient,
    Regime,
};
pub use search::{
    search_geometries, CanonicalGeometry, Comparison, ConstraintParseError, RateConstraint,
    RateName, RatePredicate,
};

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("hopping xi must be positive, got {0}")]
    NonPositiveHopping(f64),
    #[error("resonator loss kappa must be non-negative, got {0}")]
    NegativeLoss(f64),
    #[error("chain needs at least 3 sites, got {0}")]
    ChainTooShort(usize),
    #[error("a giant atom needs two distinct connection sites")]
    CoincidentLegs,
    #[error("coupling g must be positive, got {0}")]
    NonPositiveCoupling(f64),
    #[error("atom count must be 1 or 2, got {0}")]
    AtomCount(usize),
    #[error("site {site} outside chain of length {n_sites}")]
    SiteOutOfRange { site: i64, n_sites: usize },
    #[error("atoms share connection site {0}")]
    SharedSite(i64),
    #[error("atom {index} frequency {omega} is detuned from omega_c = {omega_c}; closed-form rates need resonance")]
    NotResonant { index: usize, omega: f64, omega_c: f64 },
    #[error("atoms have unequal couplings ({0} vs {1})")]
    UnequalCoupling(f64, f64),
    #[error("intrinsic rate {name} must be non-negative, got {value}")]
    NegativeIntrinsic { name: &'static str, value: f64 },
}

/// Coupled-resonator waveguide parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveguideConfig {
    pub omega_c: f64,
    pub xi: f64,
    pub kappa: f64,
    pub n_sites: usize,
}

impl WaveguideConfig {
    pub fn new(omega_c: f64, xi: f64, kappa: f64, n_sites: usize) -> Result<Self, ModelError> {
        let w = Self {
            omega_c,
            xi,
            kappa,
            n_sites,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.xi > 0.0) {
            return Err(ModelError::NonPositiveHopping(self.xi));
        }
        if !(self.kappa >= 0.0) {
            return Err(ModelError::NegativeLoss(self.kappa));
        }
        if self.n_sites < 3 {
            return Err(ModelError::ChainTooShort(self.n_sites));
        }
        Ok(())
    }

    /// `ω_k = ω_c − 2ξ cos k`.
    pub fn dispersion(&self, k: f64) -> f64 {
        self.omega_c - 2.0 * self.xi * k.cos()
    }

    pub fn band_edges(&self) -> (f64, f64) {
        (self.omega_c - 2.0 * self.xi, self.omega_c + 2.0 * self.xi)
    }
}

/// `ω_k = ω_c − 2ξ cos k` for a waveguide.
pub fn dispersion(k: f64, w: &WaveguideConfig) -> f64 {
    w.dispersion(k)
}

/// A two-level emitter attached to the chain at two sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GiantAtom {
    pub omega: f64,
    pub g: f64,
    pub sites: [i64; 2],
    /// Intrinsic decay rate into non-waveguide channels.
    pub gamma1: f64,
    /// Pure dephasing rate.
    pub gamma2: f64,
}

impl GiantAtom {
    pub fn new(omega: f64, g: f64, sites: [i64; 2]) -> Self {
        Self {
            omega,
            g,
            sites,
            gamma1: 0.0,
            gamma2: 0.0,
        }
    }

    pub fn with_intrinsic(mut self, gamma1: f64, gamma2: f64) -> Self {
        self.gamma1 = gamma1;
        self.gamma2 = gamma2;
        self
    }

    /// `N = |n₁ − n₂|`.
    pub fn size(&self) -> u64 {
        (self.sites[0] - self.sites[1]).unsigned_abs()
    }

    fn validate(&self) -> Result<(), ModelError> {
        if self.sites[0] == self.sites[1] {
            return Err(ModelError::CoincidentLegs);
        }
        if !(self.g > 0.0) {
            return Err(ModelError::NonPositiveCoupling(self.g));
        }
        if !(self.gamma1 >= 0.0) {
            return Err(ModelError::NegativeIntrinsic {
                name: "gamma1",
                value: self.gamma1,
            });
        }
        if !(self.gamma2 >= 0.0) {
            return Err(ModelError::NegativeIntrinsic {
                name: "gamma2",
                value: self.gamma2,
            });
        }
        Ok(())
    }
}

/// One or two giant atoms and their connection sites.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomGeometry {
    atoms: Vec<GiantAtom>,
}

impl AtomGeometry {
    pub fn new(atoms: Vec<GiantAtom>) -> Result<Self, ModelError> {
        if atoms.is_empty() || atoms.len() > 2 {
            return Err(ModelError::AtomCount(atoms.len()));
        }
        for a in &atoms {
            a.validate()?;
        }
        if let [a, b] = atoms.as_slice() {
            for s in a.sites {
                if b.sites.contains(&s) {
                    return Err(ModelError::SharedSite(s));
                }
            }
        }
        Ok(Self { atoms })
    }

    pub fn single(atom: GiantAtom) -> Result<Self, ModelError> {
        Self::new(vec![atom])
    }

    pub fn pair(first: GiantAtom, second: GiantAtom) -> Result<Self, ModelError> {
        Self::new(vec![first, second])
    }

    pub fn atoms(&self) -> &[GiantAtom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn min_site(&self) -> i64 {
        self.atoms.iter().flat_map(|a| a.sites).min().unwrap_or(0)
    }

    pub fn max_site(&self) -> i64 {
        self.atoms.iter().flat_map(|a| a.sites).max().unwrap_or(0)
    }

    pub fn span(&self) -> i64 {
        self.max_site() - self.min_site()
    }

    /// Same geometry with every site shifted by `offset`.
    pub fn translated(&self, offset: i64) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|a| GiantAtom {
                sites: [a.sites[0] + offset, a.sites[1] + offset],
                ..*a
            })
            .collect();
        Self { atoms }
    }

    /// Translates the geometry so that it sits in the middle of a chain of
    /// `n_sites` resonators.
    pub fn centered(&self, n_sites: usize) -> Self {
        let target_min = (n_sites as i64 - self.span()) / 2;
        self.translated(target_min - self.min_site())
    }

    pub fn check_within(&self, n_sites: usize) -> Result<(), ModelError> {
        for s in self.atoms.iter().flat_map(|a| a.sites) {
            if s < 0 || s >= n_sites as i64 {
                return Err(ModelError::SiteOutOfRange { site: s, n_sites });
            }
        }
        Ok(())
    }

    fn check_resonant(&self, w: &WaveguideConfig) -> Result<(), ModelError> {
        let tol = 1e-12 * w.omega_c.abs().max(1.0);
        for (index, a) in self.atoms.iter().enumerate() {
            if (a.omega - w.omega_c).abs() > tol {
                return Err(ModelError::NotResonant {
                    index,
                    omega: a.omega,
                    omega_c: w.omega_c,
                });
            }
        }
        Ok(())
    }
}

/// Waveguide-induced self-coefficient of a single resonant giant atom.
pub fn atom_coefficient(w: &WaveguideConfig, atom: &GiantAtom) -> Result<ExactCoefficient, ModelError> {
    w.validate()?;
    let geom = AtomGeometry::single(*atom)?;
    geom.check_resonant(w)?;
    single_atom_coefficient(atom.size())
}

/// Exact coefficient matrix `A_ij` in units of `g²/(2ξ)`.
///
/// `Γ_ij = 2 Re A_ij` and `U_ij = 2 Im A_ij` are then integers in units of
/// `g²/ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RateTable {
    pub a: [[ExactCoefficient; 2]; 2],
}

impl RateTable {
    pub fn from_sites(first: [i64; 2], second: [i64; 2]) -> Result<Self, ModelError> {
        let a11 = single_atom_coefficient((first[0] - first[1]).unsigned_abs())?;
        let a22 = single_atom_coefficient((second[0] - second[1]).unsigned_abs())?;
        let a12 = pair_coefficient(first, second);
        Ok(Self {
            a: [[a11, a12], [a12, a22]],
        })
    }

    /// `Γ_ij` in units of `g²/ξ`.
    pub fn gamma_units(&self) -> [[i64; 2]; 2] {
        self.a.map(|row| row.map(ExactCoefficient::dissipation_units))
    }

    /// `U_ij` in units of `g²/ξ`.
    pub fn u_units(&self) -> [[i64; 2]; 2] {
        self.a.map(|row| row.map(ExactCoefficient::shift_units))
    }

    /// Six independent rates `[Γ₁₁, Γ₂₂, Γ₁₂, U₁₁, U₂₂, U₁₂]` in units of `g²/ξ`.
    pub fn six_units(&self) -> [i64; 6] {
        let g = self.gamma_units();
        let u = self.u_units();
        [g[0][0], g[1][1], g[0][1], u[0][0], u[1][1], u[0][1]]
    }

    /// `j_eff = U₁₂/2` in units of `g²/ξ`.
    pub fn j_eff_units(&self) -> f64 {
        self.a[0][1].im_units as f64 / 2.0
    }

    /// Physical rates for coupling `g` and hopping `xi`.
    pub fn physical(&self, g: f64, xi: f64) -> PhysicalRates {
        let unit = g * g / xi;
        let gamma = self.gamma_units().map(|r| r.map(|v| v as f64 * unit));
        let u = self.u_units().map(|r| r.map(|v| v as f64 * unit));
        PhysicalRates {
            gamma,
            u,
            j_eff: u[0][1] / 2.0,
        }
    }

    pub fn swapped(&self) -> Self {
        let a = self.a;
        Self {
            a: [[a[1][1], a[1][0]], [a[0][1], a[0][0]]],
        }
    }
}

/// Rates materialized in angular-frequency units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalRates {
    pub gamma: [[f64; 2]; 2],
    pub u: [[f64; 2]; 2],
    pub j_eff: f64,
}

/// Rate table for a resonant two-atom geometry with equal couplings.
pub fn coefficient_matrix(w: &WaveguideConfig, geom: &AtomGeometry) -> Result<RateTable, ModelError> {
    w.validate()?;
    let [first, second] = geom.atoms() else {
        return Err(ModelError::AtomCount(geom.len()));
    };
    geom.check_resonant(w)?;
    if first.g != second.g {
        return Err(ModelError::UnequalCoupling(first.g, second.g));
    }
    RateTable::from_sites(first.sites, second.sites)
}

/// Interleaving order of two atoms' connection sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Topology {
    Separate,
    Nested,
    Braided,
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::Separate => "separate",
            Topology::Nested => "nested",
            Topology::Braided => "braided",
        })
    }
}

pub fn classify_sites(first: [i64; 2], second: [i64; 2]) -> Result<Topology, ModelError> {
    for s in first {
        if second.contains(&s) {
            return Err(ModelError::SharedSite(s));
        }
    }
    if first[0] == first[1] || second[0] == second[1] {
        return Err(ModelError::CoincidentLegs);
    }
    let (a0, a1) = (first[0].min(first[1]), first[0].max(first[1]));
    let (b0, b1) = (second[0].min(second[1]), second[0].max(second[1]));
    Ok(if a1 < b0 || b1 < a0 {
        Topology::Separate
    } else if (a0 < b0 && b1 < a1) || (b0 < a0 && a1 < b1) {
        Topology::Nested
    } else {
        Topology::Braided
    })
}

pub fn classify_topology(geom: &AtomGeometry) -> Result<Topology, ModelError> {
    match geom.atoms() {
        [a, b] => classify_sites(a.sites, b.sites),
        other => Err(ModelError::AtomCount(other.len())),
    }
}
