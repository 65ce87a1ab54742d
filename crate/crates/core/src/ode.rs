//! Dormand–Prince 5(4) embedded Runge–Kutta pair with adaptive step control.

/// Step-size control settings.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, h_min: 1e-14, max_steps: 1_000_000 }
    }
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { rtol: tol, atol: tol * 1e-2, ..Self::default() }
    }
}

/// Why an integration stopped short of its target.
#[derive(Debug, Clone, PartialEq)]
pub enum Halt<E> {
    /// The caller's guard rejected an accepted state.
    Guard { t: f64, reason: E },
    /// Step size fell below `h_min` (stiffness, singularity or NaN in the field).
    StepUnderflow { t: f64 },
    MaxSteps { t: f64 },
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrator state that can be advanced through a sequence of output times
/// while keeping its step-size history.
#[derive(Debug, Clone)]
pub struct Dopri5<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    h: f64,
    opts: OdeOptions,
    pub steps: usize,
}

fn combine<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

impl<const N: usize> Dopri5<N> {
    pub fn new(t0: f64, y0: [f64; N], opts: OdeOptions) -> Self {
        Self { t: t0, y: y0, h: 0.0, opts, steps: 0 }
    }

    /// Advances to `t_target` exactly. `guard` sees each accepted state.
    pub fn advance_to<F, G, E>(&mut self, mut f: F, t_target: f64, mut guard: G) -> Result<(), Halt<E>>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
        G: FnMut(f64, &[f64; N]) -> Option<E>,
    {
        let span = t_target - self.t;
        if span == 0.0 {
            return Ok(());
        }
        let dir = span.signum();
        if self.h == 0.0 {
            self.h = self.initial_step(&mut f, span);
        }
        let mut h = self.h.abs().min(span.abs());
        loop {
            let remaining = (t_target - self.t) * dir;
            if remaining <= 0.0 {
                return Ok(());
            }
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            if self.steps >= self.opts.max_steps {
                return Err(Halt::MaxSteps { t: self.t });
            }
            let hs = h * dir;
            let (y_new, err) = self.trial(&mut f, hs);
            if err.is_finite() && err <= 1.0 {
                self.t = if last { t_target } else { self.t + hs };
                self.y = y_new;
                self.steps += 1;
                if let Some(reason) = guard(self.t, &self.y) {
                    return Err(Halt::Guard { t: self.t, reason });
                }
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                // keep a truncated final step from shrinking the next one
                if !last || fac < 1.0 {
                    self.h = h * fac;
                }
                h = self.h;
            } else {
                let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
                h *= fac;
                self.h = h;
                if h < self.opts.h_min {
                    return Err(Halt::StepUnderflow { t: self.t });
                }
            }
        }
    }

    fn initial_step<F: FnMut(f64, &[f64; N]) -> [f64; N]>(&self, f: &mut F, span: f64) -> f64 {
        let k = f(self.t, &self.y);
        let mut d0: f64 = 0.0;
        let mut d1: f64 = 0.0;
        for (y, k) in self.y.iter().zip(&k) {
            let sc = self.opts.atol + self.opts.rtol * y.abs();
            d0 = d0.max((y / sc).abs());
            d1 = d1.max((k / sc).abs());
        }
        let h = if d0 < 1e-5 || d1 < 1e-5 || !d1.is_finite() { 1e-6 } else { 0.01 * d0 / d1 };
        h.min(span.abs()).max(self.opts.h_min * 10.0)
    }

    fn trial<F: FnMut(f64, &[f64; N]) -> [f64; N]>(&self, f: &mut F, h: f64) -> ([f64; N], f64) {
        let (t, y) = (self.t, &self.y);
        let k1 = f(t, y);
        let k2 = f(t + C2 * h, &combine(y, h, &[(A21, &k1)]));
        let k3 = f(t + C3 * h, &combine(y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * h, &combine(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(t + C5 * h, &combine(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(
            t + h,
            &combine(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = combine(y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = f(t + h, &y_new);
        let mut acc = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = self.opts.atol + self.opts.rtol * y[i].abs().max(y_new[i].abs());
            acc += (e / sc).powi(2);
        }
        let err = (acc / N as f64).sqrt();
        let finite = y_new.iter().all(|v| v.is_finite());
        (y_new, if finite { err } else { f64::NAN })
    }
}
