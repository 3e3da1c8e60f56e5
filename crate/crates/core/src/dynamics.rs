//! State evolution: exact affine maps and, independently, numerical
//! integration of the time-local master equation in Bloch form.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{
    bloch_map, decay_rates, decoherence_at, dephasing_map, ohmic_upsilon_path, AffineBlochMap, Family,
    ModelSpec, SINGULAR_FLOOR,
};
use crate::error::{domain, Error, Result};
use crate::ode::Dopri5;
use crate::qubit::BlochVector;

pub const DEFAULT_ODE_TOL: f64 = 1e-9;
pub const DEFAULT_GRID_POINTS: usize = 2000;

/// Uniform grid `t0, …, t1` with `n_points ≥ 2` samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub n_points: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, n_points: usize) -> Result<Self> {
        if !(t0 >= 0.0 && t0.is_finite() && t1.is_finite()) {
            return Err(domain(format!("grid start {t0} must be finite and >= 0")));
        }
        if !(t1 > t0) {
            return Err(domain(format!("grid end {t1} must exceed start {t0}")));
        }
        if n_points < 2 {
            return Err(domain("a time grid needs at least 2 points"));
        }
        Ok(Self { t0, t1, n_points })
    }

    /// `[0, 10 τ]` with [`DEFAULT_GRID_POINTS`] points, `τ` the model's time unit.
    pub fn default_for(model: &ModelSpec) -> Self {
        Self {
            t0: 0.0,
            t1: 10.0 * model.time_scale(),
            n_points: DEFAULT_GRID_POINTS,
        }
    }

    pub fn step(&self) -> f64 {
        (self.t1 - self.t0) / (self.n_points - 1) as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.t1
        } else {
            self.t0 + i as f64 * self.step()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.time(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<BlochVector>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.grid.times()
    }

    /// Largest Euclidean distance between corresponding states.
    pub fn max_distance(&self, other: &Trajectory) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| (*a - *b).norm())
            .fold(0.0, f64::max)
    }
}

/// `n(t) = Λ_t[n0]` through the exact affine map.
pub fn evolve(model: &ModelSpec, n0: BlochVector, t: f64) -> Result<BlochVector> {
    n0.validate()?;
    let n = bloch_map(model, t)?.apply(&n0);
    n.validate()?;
    Ok(n)
}

pub fn trajectory(model: &ModelSpec, n0: BlochVector, grid: TimeGrid) -> Result<Trajectory> {
    n0.validate()?;
    let states = bloch_maps(model, &grid.times())?
        .iter()
        .map(|map| {
            let n = map.apply(&n0);
            n.validate()?;
            Ok(n)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory { grid, states })
}

/// Exact maps at every grid time. The Ohmic model integrates `Υ` once along
/// the grid instead of once per point.
pub fn bloch_maps(model: &ModelSpec, times: &[f64]) -> Result<Vec<AffineBlochMap>> {
    match *model {
        ModelSpec::OhmicDephasing { omega_c, s } => {
            model.validate()?;
            if times.first().is_some_and(|&t| !(t >= 0.0)) {
                return Err(domain("times must be >= 0"));
            }
            Ok(ohmic_upsilon_path(omega_c, s, times)?
                .into_iter()
                .map(|u| dephasing_map(Complex64::new((-u).exp(), 0.0)))
                .collect())
        }
        _ => times.iter().map(|&t| bloch_map(model, t)).collect(),
    }
}

/// Bloch-space generator `(A, b)` of `ṅ = A(t) n + b(t)`.
pub fn generator(model: &ModelSpec, t: f64) -> Result<(Matrix3<f64>, Vector3<f64>)> {
    let r = decay_rates(model, t)?;
    let h = r.h_z;
    Ok(match model.family() {
        Family::Dephasing => {
            let g = r.gamma[2];
            (
                Matrix3::new(-2.0 * g, -h, 0.0, h, -2.0 * g, 0.0, 0.0, 0.0, 0.0),
                Vector3::zeros(),
            )
        }
        Family::AmplitudeDamping => {
            let g = r.gamma[0];
            (
                Matrix3::new(-0.5 * g, h, 0.0, -h, -0.5 * g, 0.0, 0.0, 0.0, -g),
                Vector3::new(0.0, 0.0, g),
            )
        }
        Family::Pauli => {
            let [g1, g2, g3] = r.gamma;
            (
                Matrix3::from_diagonal(&Vector3::new(
                    -2.0 * (g2 + g3),
                    -2.0 * (g1 + g3),
                    -2.0 * (g1 + g2),
                )),
                Vector3::zeros(),
            )
        }
    })
}

/// Integrates the generator with an adaptive Dormand–Prince pair at local
/// tolerance `tol`. Refuses to cross the non-differentiable points of the
/// `tan` Pauli channel, where the master equation and the map part ways.
///
/// Zeros of a closed-form decoherence factor on the real axis are poles of
/// the rates but only apparent singularities of the dynamics (the solution
/// is entire in `t`). The integrator goes around them through complex time
/// with the analytically continued generator and returns to the real axis.
pub fn ode_oracle_trajectory(
    model: &ModelSpec,
    n0: BlochVector,
    grid: TimeGrid,
    tol: f64,
) -> Result<Trajectory> {
    n0.validate()?;
    model.validate()?;
    if !(tol > 0.0) {
        return Err(domain(format!("ODE tolerance {tol} must be > 0")));
    }
    if let Some(t) = model.kink_in(grid.t0, grid.t1) {
        return Err(Error::Integration {
            t,
            reason: "rate singularity of the tan Pauli channel".into(),
        });
    }
    let solver = Dopri5::new(tol);
    let windows = detour_windows(model, &grid);
    let mut cursor = (grid.t0, evolve(model, n0, grid.t0)?.as_array());
    // state at the left edge of each window, where every detour starts
    let mut edges: Vec<Option<[f64; 3]>> = vec![None; windows.len()];
    let mut states = Vec::with_capacity(grid.n_points);
    for target in grid.times() {
        while let Some(k) = windows.iter().position(|w| cursor.0 < w.c && w.left() < target) {
            let w = windows[k];
            if cursor.0 < w.left() {
                cursor = (w.left(), real_segment(model, &solver, cursor, &[w.left()])?[0]);
                edges[k] = Some(cursor.1);
            }
            if target <= w.c {
                break;
            }
            let start = edges[k].ok_or_else(|| Error::Internal("detour without a start".into()))?;
            cursor = (w.right(), w.go_around(model, &solver, (w.left(), start))?);
        }
        let y = if target < cursor.0 {
            // inside a window, back along the real axis from its right edge
            real_part(complex_segment(model, &solver, to_complex(cursor.1), cursor.0.into(), target.into())?)
        } else {
            let y = real_segment(model, &solver, cursor, &[target])?[0];
            cursor = (target, y);
            y
        };
        states.push(BlochVector::new_unchecked(y[0], y[1], y[2]));
    }
    Ok(Trajectory { grid, states })
}

type Complex3 = [Complex64; 3];

fn to_complex(y: [f64; 3]) -> Complex3 {
    y.map(|v| Complex64::new(v, 0.0))
}

fn real_part(y: Complex3) -> [f64; 3] {
    y.map(|v| v.re)
}

fn real_segment(
    model: &ModelSpec,
    solver: &Dopri5,
    (t0, y0): (f64, [f64; 3]),
    outputs: &[f64],
) -> Result<Vec<[f64; 3]>> {
    let rhs = |t: f64, y: &[f64; 3]| -> Result<[f64; 3]> {
        let (a, b) = generator(model, t)?;
        let d = a * Vector3::new(y[0], y[1], y[2]) + b;
        Ok([d[0], d[1], d[2]])
    };
    solver.integrate(rhs, t0, y0, outputs)
}

/// Straight path `p0 → p1` in the complex time plane.
fn complex_segment(model: &ModelSpec, solver: &Dopri5, y0: Complex3, p0: Complex64, p1: Complex64) -> Result<Complex3> {
    let dp = p1 - p0;
    let rhs = |s: f64, y: &[f64; 6]| -> Result<[f64; 6]> {
        let (a, b) = complex_generator(model, p0 + dp * s)?;
        let n = Vector3::new(
            Complex64::new(y[0], y[1]),
            Complex64::new(y[2], y[3]),
            Complex64::new(y[4], y[5]),
        );
        let d = (a * n + b) * dp;
        Ok([d[0].re, d[0].im, d[1].re, d[1].im, d[2].re, d[2].im])
    };
    let flat = [y0[0].re, y0[0].im, y0[1].re, y0[1].im, y0[2].re, y0[2].im];
    let y = solver.integrate(rhs, 0.0, flat, &[1.0])?[0];
    Ok([
        Complex64::new(y[0], y[1]),
        Complex64::new(y[2], y[3]),
        Complex64::new(y[4], y[5]),
    ])
}

/// Generator at complex `t`. With `k = Ġ/G` and `k̃(t) = conj k(conj t)`,
/// the real-axis `Re k` and `Im k` continue as `(k + k̃)/2` and `(k − k̃)/2i`.
fn complex_generator(model: &ModelSpec, t: Complex64) -> Result<(Matrix3<Complex64>, Vector3<Complex64>)> {
    let unsupported = || Error::UnsupportedModel {
        operation: "complex-time generator",
        model: model.name(),
    };
    let log_derivative = |t: Complex64| -> Result<Complex64> {
        let (g, dg) = decoherence_at(model, t).ok_or_else(unsupported)?;
        if g.norm() < SINGULAR_FLOOR {
            return Err(Error::SingularRate { t: t.re });
        }
        Ok(dg / g)
    };
    let k = log_derivative(t)?;
    let k_tilde = log_derivative(t.conj())?.conj();
    let re = (k + k_tilde) * 0.5;
    let im = (k - k_tilde) * Complex64::new(0.0, -0.5);
    let zero = Complex64::new(0.0, 0.0);
    Ok(match model.family() {
        // γ = −Re k / 2, h = −Im k
        Family::Dephasing => (
            Matrix3::new(re, im, zero, -im, re, zero, zero, zero, zero),
            Vector3::zeros(),
        ),
        // γ = −2 Re k, h = −Im k
        Family::AmplitudeDamping => (
            Matrix3::new(re, -im, zero, im, re, zero, zero, zero, re * 2.0),
            Vector3::new(zero, zero, -re * 2.0),
        ),
        Family::Pauli => return Err(unsupported()),
    })
}

/// Real interval `(c − r, c + r)` around a real pole of the rates, crossed
/// at height `r` above the axis.
#[derive(Debug, Clone, Copy)]
struct Window {
    c: f64,
    r: f64,
}

impl Window {
    fn left(&self) -> f64 {
        self.c - self.r
    }

    fn right(&self) -> f64 {
        self.c + self.r
    }

    /// Goes from real `a` left of the window to its right edge through the
    /// upper half plane.
    fn go_around(&self, model: &ModelSpec, solver: &Dopri5, (a, y): (f64, [f64; 3])) -> Result<[f64; 3]> {
        let lift = Complex64::new(0.0, self.r);
        let (l, r) = (Complex64::from(a), Complex64::from(self.right()));
        let y = complex_segment(model, solver, to_complex(y), l, l + lift)?;
        let y = complex_segment(model, solver, y, l + lift, r + lift)?;
        Ok(real_part(complex_segment(model, solver, y, r + lift, r)?))
    }
}

/// Zeros of `G` within reach of the real span of the grid, found from the
/// local minima of `|G|` on a fine sampling and polished by complex Newton.
fn detour_windows(model: &ModelSpec, grid: &TimeGrid) -> Vec<Window> {
    let g_at = |t: Complex64| decoherence_at(model, t);
    if g_at(Complex64::new(grid.t0, 0.0)).is_none() {
        return Vec::new();
    }
    let tau = model.time_scale();
    let r0 = 0.25 * tau;
    let span = grid.t1 - grid.t0;
    let n = ((span / (tau / 50.0)).ceil() as usize).max(200);
    let samples: Vec<(f64, f64)> = (0..=n)
        .map(|i| {
            let t = grid.t0 + span * i as f64 / n as f64;
            (t, g_at(Complex64::new(t, 0.0)).map_or(f64::INFINITY, |(g, _)| g.norm()))
        })
        .collect();

    let mut zeros: Vec<Complex64> = Vec::new();
    for w in samples.windows(3) {
        let (t, m) = w[1];
        if !(m <= w[0].1 && m <= w[2].1) {
            continue;
        }
        let Some(z) = newton_zero(&g_at, Complex64::new(t, 0.0), tau) else {
            continue;
        };
        let in_span = z.re > grid.t0 && z.re - r0 < grid.t1;
        if in_span && zeros.iter().all(|q| (q - z).norm() > 1e-6 * tau) {
            zeros.push(z);
        }
    }
    zeros.sort_by(|a, b| a.re.total_cmp(&b.re));

    let mut out: Vec<Window> = Vec::with_capacity(zeros.len());
    for (i, z) in zeros.iter().enumerate() {
        let mut r = r0.min(0.5 * (z.re - grid.t0));
        if let Some(next) = zeros.get(i + 1) {
            r = r.min(0.4 * (next.re - z.re));
        }
        if let Some(prev) = zeros.get(i.wrapping_sub(1)) {
            r = r.min(0.4 * (z.re - prev.re));
        }
        // Off-axis zeros (and their mirror images, poles of the continued
        // generator too) are passed at a safe distance on the real axis.
        if z.im.abs() > 1e-3 * r {
            continue;
        }
        out.push(Window { c: z.re, r });
    }
    out
}

fn newton_zero<F>(g_at: &F, mut t: Complex64, tau: f64) -> Option<Complex64>
where
    F: Fn(Complex64) -> Option<(Complex64, Complex64)>,
{
    for _ in 0..60 {
        let (g, dg) = g_at(t)?;
        if dg.norm() == 0.0 {
            return None;
        }
        let step = g / dg;
        if step.norm() > tau {
            return None;
        }
        t -= step;
        if step.norm() <= 1e-15 * tau.max(t.norm()) {
            return Some(t);
        }
    }
    let (g, _) = g_at(t)?;
    (g.norm() < 1e-10).then_some(t)
}
