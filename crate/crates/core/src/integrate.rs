//! Fixed-step classical fourth-order Runge-Kutta for linear complex systems
//! `dy/dt = G y`.

use num_complex::Complex64;

/// A linear right-hand side `y ↦ G y`.
pub trait LinearGenerator {
    fn dim(&self) -> usize;
    /// Writes `G x` into `out`.
    fn apply(&self, x: &[Complex64], out: &mut [Complex64]);
}

/// Reusable RK4 scratch space for one system size.
pub struct Rk4 {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); dim];
        Self {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }

    /// Advances `y` by one step of size `h`.
    pub fn step<G: LinearGenerator + ?Sized>(&mut self, gen: &G, y: &mut [Complex64], h: f64) {
        let half = 0.5 * h;
        gen.apply(y, &mut self.k1);
        for ((t, yi), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k1) {
            *t = yi + k * half;
        }
        gen.apply(&self.tmp, &mut self.k2);
        for ((t, yi), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k2) {
            *t = yi + k * half;
        }
        gen.apply(&self.tmp, &mut self.k3);
        for ((t, yi), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k3) {
            *t = yi + k * h;
        }
        gen.apply(&self.tmp, &mut self.k4);
        let sixth = h / 6.0;
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += (self.k1[i] + (self.k2[i] + self.k3[i]) * 2.0 + self.k4[i]) * sixth;
        }
    }
}

/// Number of equal substeps of size at most `dt` covering `span`.
pub fn substeps(span: f64, dt: f64) -> usize {
    if span <= 0.0 {
        return 0;
    }
    // Tolerate grid spacings that are integer multiples of dt up to rounding.
    let n = span / dt;
    let rounded = n.round();
    if (n - rounded).abs() < 1e-9 * rounded.max(1.0) {
        rounded.max(1.0) as usize
    } else {
        n.ceil() as usize
    }
}
