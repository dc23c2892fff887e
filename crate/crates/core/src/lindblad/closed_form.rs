//! Closed-form dynamics of two exchange-coupled atoms with individual
//! dissipation (`U₁₁ = U₂₂ = Γ₁₂ = 0`, no intrinsic channels).
//!
//! With `δ = Γ₁₁ + Γ₂₂`, `Δ = Γ₁₁ − Γ₂₂`, `K = Δ² − 16J²` and
//! `M±(t) = e^{−√K t/2} ± e^{√K t/2}`:
//!
//! ```text
//! P₁(t) = e^{−δt/2}/(2K) [(Δ² − 8J²) M₊ + √K Δ M₋ − 16J²]
//! P₂(t) = e^{−δt/2}/(2K) [(Δ² − 8J²) M₊ − √K Δ M₋ − 16J²]
//! T(t)  = (4J²/K) e^{−δt/2} (e^{√K t/2} + e^{−√K t/2} − 2)
//! ```
//!
//! Near `K = 0` the same expressions are evaluated through entire functions
//! of `z = K t²/4`, which removes the removable singularity.

use num_complex::Complex64;

use super::TwoAtomRates;

/// Below this `|K| / (Δ² + 16J²)` the entire-function route is used.
const NEAR_EXCEPTIONAL: f64 = 1e-6;
const IMAG_TOL: f64 = 1e-10;

/// `P_e(t) = e^{−2 Re(A) t}`.
pub fn markov_pe(a: Complex64, t: f64) -> f64 {
    (-2.0 * a.re * t).exp()
}

/// First-order fidelity estimate `1 − πγ₁/(8J) − πγ₂/(16J)`.
pub fn fidelity_linear_estimate(gamma1: f64, gamma2: f64, j_eff: f64) -> f64 {
    use std::f64::consts::PI;
    1.0 - PI * gamma1 / (8.0 * j_eff) - PI * gamma2 / (16.0 * j_eff)
}

struct Params {
    delta: f64,
    imbalance: f64,
    j: f64,
    k: f64,
}

impl Params {
    fn of(r: &TwoAtomRates) -> Self {
        Self {
            delta: r.total_loss(),
            imbalance: r.loss_imbalance(),
            j: r.j_eff(),
            k: r.discriminant(),
        }
    }

    fn near_exceptional(&self) -> bool {
        let scale = self.imbalance * self.imbalance + 16.0 * self.j * self.j;
        self.k.abs() <= NEAR_EXCEPTIONAL * scale
    }
}

fn taylor(z: f64, offset: u32) -> f64 {
    // Σ z^n / (2n + offset)!
    let mut term = 1.0;
    for m in 1..=offset {
        term /= m as f64;
    }
    let mut sum = term;
    for n in 1..40u32 {
        let a = 2 * n + offset;
        term *= z / ((a - 1) as f64 * a as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// `cosh √z`, `sinh √z / √z`, `(cosh √z − 1)/z` for real `z` of either sign.
fn entire(z: f64) -> (f64, f64, f64) {
    if z.abs() < 1e-2 {
        return (taylor(z, 0), taylor(z, 1), taylor(z, 2));
    }
    let (c, s) = if z > 0.0 {
        let r = z.sqrt();
        (r.cosh(), r.sinh() / r)
    } else {
        let r = (-z).sqrt();
        (r.cos(), r.sin() / r)
    };
    (c, s, (c - 1.0) / z)
}

fn checked_real(v: Complex64) -> f64 {
    assert!(
        v.im.abs() <= IMAG_TOL * (1.0 + v.re.abs()),
        "closed form left imaginary residue {}",
        v.im
    );
    v.re
}

fn self_population(t: f64, p: &Params, sign: f64) -> f64 {
    let decay = (-p.delta * t / 2.0).exp();
    if p.near_exceptional() {
        let (c, s, d) = entire(p.k * t * t / 4.0);
        return decay * (c + 2.0 * p.j * p.j * t * t * d - sign * p.imbalance * t * s / 2.0);
    }
    let sk = Complex64::new(p.k, 0.0).sqrt();
    let (m_plus, m_minus) = m_pm(sk, t);
    let bracket = m_plus * (p.imbalance * p.imbalance - 8.0 * p.j * p.j)
        + sk * m_minus * (sign * p.imbalance)
        - 16.0 * p.j * p.j;
    checked_real(bracket * decay / (2.0 * p.k))
}

fn m_pm(sk: Complex64, t: f64) -> (Complex64, Complex64) {
    let a = (-sk * t / 2.0).exp();
    let b = (sk * t / 2.0).exp();
    (a + b, a - b)
}

/// Population kept by atom 1 when it starts excited.
pub fn p1_closed(t: f64, r: &TwoAtomRates) -> f64 {
    self_population(t, &Params::of(r), 1.0)
}

/// Population kept by atom 2 when it starts excited.
pub fn p2_closed(t: f64, r: &TwoAtomRates) -> f64 {
    self_population(t, &Params::of(r), -1.0)
}

/// Population transferred to the other atom; identical in both directions.
pub fn transmission_closed(t: f64, r: &TwoAtomRates) -> f64 {
    let p = Params::of(r);
    let decay = (-p.delta * t / 2.0).exp();
    if p.near_exceptional() {
        let (_, _, d) = entire(p.k * t * t / 4.0);
        return 2.0 * p.j * p.j * t * t * decay * d;
    }
    let sk = Complex64::new(p.k, 0.0).sqrt();
    let (m_plus, _) = m_pm(sk, t);
    checked_real((m_plus - 2.0) * (4.0 * p.j * p.j / p.k) * decay)
}

/// Variants transcribed with a squared `K` in the `P₂` denominator and a
/// linear `K t/2` exponent in `T`. Both fail the master-equation check and
/// are kept only to document that.
pub mod misprinted {
    use super::*;

    pub fn p2_squared_denominator(t: f64, r: &TwoAtomRates) -> f64 {
        let p = Params::of(r);
        p2_closed(t, r) / p.k
    }

    pub fn transmission_linear_exponent(t: f64, r: &TwoAtomRates) -> f64 {
        let p = Params::of(r);
        let decay = (-p.delta * t / 2.0).exp();
        let e = p.k * t / 2.0;
        4.0 * p.j * p.j / p.k * decay * (e.exp() + (-e).exp() - 2.0)
    }
}
