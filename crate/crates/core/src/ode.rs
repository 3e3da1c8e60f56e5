//! Dormand–Prince 5(4) embedded Runge–Kutta integrator with adaptive steps.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// 5th-order weights (equal to the last row of `A`, FSAL).
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
/// Difference between the 5th- and embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const MAX_STEPS: usize = 1_000_000;

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    /// Local error tolerance, used both as absolute and relative bound.
    pub tol: f64,
    pub max_steps: usize,
}

impl Dopri5 {
    pub fn new(tol: f64) -> Self {
        Self { tol, max_steps: MAX_STEPS }
    }

    /// Integrates `y' = f(t, y)` from `(t0, y0)` and returns the state at
    /// every time of `outputs` (non-decreasing, all `≥ t0`).
    ///
    /// A right-hand side that fails at a stage rejects the step and halves
    /// it; the integration stops once the step underflows.
    pub fn integrate<const N: usize, F>(
        &self,
        mut f: F,
        t0: f64,
        y0: [f64; N],
        outputs: &[f64],
    ) -> Result<Vec<[f64; N]>>
    where
        F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    {
        if !(self.tol > 0.0) {
            return Err(Error::Domain(format!("ODE tolerance {} must be > 0", self.tol)));
        }
        let mut out = Vec::with_capacity(outputs.len());
        let mut t = t0;
        let mut y = y0;
        let span = outputs.last().map_or(0.0, |&t1| t1 - t0);
        let mut h = initial_step(span, self.tol);
        let mut k0 = f(t, &y)?;
        let mut steps = 0usize;

        for &target in outputs {
            if target < t {
                return Err(Error::Domain(format!("output time {target} precedes {t}")));
            }
            while t < target {
                steps += 1;
                if steps > self.max_steps {
                    return Err(Error::Integration { t, reason: "step budget exhausted".into() });
                }
                let h_min = 1e-14 * t.abs().max(1.0);
                let last = target - t <= h * (1.0 + 1e-12);
                let step = if last { target - t } else { h };
                if step < h_min && !last {
                    return Err(Error::Integration { t, reason: format!("step size underflow (h = {step:e})") });
                }
                match self.attempt(&mut f, t, &y, &k0, step) {
                    Ok((y_new, k_last, err)) if err <= 1.0 => {
                        t = if last { target } else { t + step };
                        y = y_new;
                        k0 = k_last;
                        let grow = if err == 0.0 { MAX_FACTOR } else { SAFETY * err.powf(-0.2) };
                        // keep the pre-clipping size when the step was shortened to land on target
                        h = h.max(step) * grow.clamp(MIN_FACTOR, MAX_FACTOR);
                    }
                    Ok((_, _, err)) => {
                        h = step * (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
                    }
                    Err(_) => {
                        h = 0.5 * step;
                    }
                }
                if h < h_min {
                    return Err(Error::Integration { t, reason: format!("step size underflow (h = {h:e})") });
                }
            }
            out.push(y);
        }
        Ok(out)
    }

    fn attempt<const N: usize, F>(
        &self,
        f: &mut F,
        t: f64,
        y: &[f64; N],
        k0: &[f64; N],
        h: f64,
    ) -> Result<([f64; N], [f64; N], f64)>
    where
        F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    {
        let mut k = [[0.0; N]; 7];
        k[0] = *k0;
        for s in 1..7 {
            let mut ys = *y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            k[s] = f(t + C[s] * h, &ys)?;
        }
        let mut y_new = *y;
        let mut err_sq = 0.0;
        for i in 0..N {
            let mut incr = 0.0;
            let mut err = 0.0;
            for s in 0..7 {
                incr += B5[s] * k[s][i];
                err += E[s] * k[s][i];
            }
            y_new[i] += h * incr;
            let scale = self.tol * (1.0 + y[i].abs().max(y_new[i].abs()));
            err_sq += (h * err / scale).powi(2);
        }
        let err = (err_sq / N as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::Integration { t, reason: "non-finite error estimate".into() });
        }
        Ok((y_new, k[6], err))
    }
}

fn initial_step(span: f64, tol: f64) -> f64 {
    if span <= 0.0 {
        return 1e-3;
    }
    (span * 1e-3).max(span * tol.powf(0.2) * 0.1)
}
