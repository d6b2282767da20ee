//! Adaptive explicit Runge–Kutta 5(4) (Dormand–Prince) for small fixed-size
//! systems. Integration may run forward or backward in the independent
//! variable.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on |h|.
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
        }
    }
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

#[inline]
fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])], h: f64) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Stateful stepper: owns the current point `(t, y)` and the step size
/// suggestion carried between steps.
#[derive(Clone, Debug)]
pub struct Integrator<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    h: f64,
    opts: OdeOptions,
    steps: usize,
}

impl<const N: usize> Integrator<N> {
    pub fn new(t0: f64, y0: [f64; N], opts: OdeOptions) -> Self {
        Self {
            t: t0,
            y: y0,
            h: 0.0,
            opts,
            steps: 0,
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// One Dormand–Prince step of signed size `h` from the current point,
    /// without error control. Returns the fifth-order solution and the
    /// embedded error estimate.
    pub fn trial<F>(&self, f: &F, h: f64) -> ([f64; N], [f64; N])
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let (t, y) = (self.t, &self.y);
        let k1 = f(t, y);
        let k2 = f(t + C2 * h, &axpy(y, &[(A21, &k1)], h));
        let k3 = f(t + C3 * h, &axpy(y, &[(A31, &k1), (A32, &k2)], h));
        let k4 = f(
            t + C4 * h,
            &axpy(y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h),
        );
        let k5 = f(
            t + C5 * h,
            &axpy(y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
        );
        let k6 = f(
            t + h,
            &axpy(
                y,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                h,
            ),
        );
        let y5 = axpy(
            y,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
            h,
        );
        let k7 = f(t + h, &y5);
        let mut err = [0.0; N];
        for i in 0..N {
            err[i] =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        (y5, err)
    }

    fn error_norm(&self, y_new: &[f64; N], err: &[f64; N]) -> f64 {
        let mut acc = 0.0;
        for i in 0..N {
            let scale = self.opts.atol + self.opts.rtol * self.y[i].abs().max(y_new[i].abs());
            acc += (err[i] / scale).powi(2);
        }
        (acc / N as f64).sqrt()
    }

    /// Take one accepted adaptive step toward `t_limit`, never stepping past it.
    pub fn step_toward<F>(&mut self, f: &F, t_limit: f64) -> Result<()>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let span = t_limit - self.t;
        if span == 0.0 {
            return Ok(());
        }
        let dir = span.signum();
        if self.h == 0.0 || self.h.signum() != dir {
            self.h = dir * (span.abs() * 1e-3).min(self.opts.h_max);
        }
        loop {
            if self.steps >= self.opts.max_steps {
                return Err(Error::IntegrationFailure(format!(
                    "step budget of {} exhausted at t = {}",
                    self.opts.max_steps, self.t
                )));
            }
            let mut h = self.h.abs().min(self.opts.h_max).min(span.abs()) * dir;
            let last = (h.abs() - span.abs()).abs() <= 1e-15 * span.abs().max(1.0);
            if last {
                h = span;
            }
            let (y_new, err) = self.trial(f, h);
            let norm = self.error_norm(&y_new, &err);
            self.steps += 1;
            if norm.is_finite() && norm <= 1.0 && y_new.iter().all(|v| v.is_finite()) {
                self.t = if last { t_limit } else { self.t + h };
                self.y = y_new;
                let grow = if norm == 0.0 {
                    5.0
                } else {
                    (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0)
                };
                // keep the pre-clip size so a short final hop does not shrink later steps
                self.h = dir * (self.h.abs().max(h.abs()) * grow).min(self.opts.h_max);
                return Ok(());
            }
            let shrink = if norm.is_finite() {
                (0.9 * norm.powf(-0.25)).clamp(0.1, 0.5)
            } else {
                0.1
            };
            self.h = h * shrink;
            if self.h.abs() <= 1e-14 * self.t.abs().max(1e-300) || self.h.abs() < 1e-300 {
                return Err(Error::IntegrationFailure(format!(
                    "step size underflow at t = {}",
                    self.t
                )));
            }
        }
    }

    pub fn advance_to<F>(&mut self, f: &F, t_target: f64) -> Result<()>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        while self.t != t_target {
            self.step_toward(f, t_target)?;
        }
        Ok(())
    }

    /// Reposition the integrator, e.g. after landing on a breakpoint.
    pub fn reset(&mut self, t: f64, y: [f64; N]) {
        self.t = t;
        self.y = y;
    }
}

/// Integrate from `t0` to `t1` and return the state at `t1`.
pub fn integrate<F, const N: usize>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    opts: OdeOptions,
) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut it = Integrator::new(t0, y0, opts);
    it.advance_to(&f, t1)?;
    Ok(it.y)
}

/// Integrate through the monotone sequence `ts` (starting at `t0`), returning
/// the state at each output point.
pub fn integrate_dense<F, const N: usize>(
    f: F,
    t0: f64,
    y0: [f64; N],
    ts: &[f64],
    opts: OdeOptions,
) -> Result<Vec<[f64; N]>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut it = Integrator::new(t0, y0, opts);
    let mut out = Vec::with_capacity(ts.len());
    for &t in ts {
        it.advance_to(&f, t)?;
        out.push(it.y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let y = integrate(
            |_, y: &[f64; 1]| [-y[0]],
            0.0,
            [1.0],
            5.0,
            OdeOptions::default(),
        )
        .unwrap();
        assert!((y[0] - (-5.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn harmonic_oscillator_backward() {
        let f = |_, y: &[f64; 2]| [y[1], -y[0]];
        let y = integrate(
            f,
            3.0,
            [3.0f64.sin(), 3.0f64.cos()],
            0.0,
            OdeOptions::default(),
        )
        .unwrap();
        assert!(y[0].abs() < 1e-10);
        assert!((y[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn dense_output_matches_closed_form() {
        let ts: Vec<f64> = (1..=10).map(|i| i as f64 * 0.3).collect();
        let ys = integrate_dense(
            |t, _: &[f64; 1]| [2.0 * t],
            0.0,
            [0.0],
            &ts,
            OdeOptions::default(),
        )
        .unwrap();
        for (t, y) in ts.iter().zip(&ys) {
            assert!((y[0] - t * t).abs() < 1e-12);
        }
    }

    #[test]
    fn blowup_reports_failure() {
        let opts = OdeOptions {
            max_steps: 10_000,
            ..Default::default()
        };
        let r = integrate(|_, y: &[f64; 1]| [y[0] * y[0]], 0.0, [1.0], 2.0, opts);
        assert!(matches!(r, Err(Error::IntegrationFailure(_))));
    }
}
