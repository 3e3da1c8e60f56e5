//! Speed of evolution from the curvature of the fidelity with the initial
//! state, `g(t) = −2 d²F/dt²`, plus scans of the initial speed.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{
    bloch_map, dephasing_map, initial_speed_squared_closed_form, ohmic_upsilon_path,
    pauli_eigenvalues, table1_region, Family, ModelSpec, RegionVerdict,
};
use crate::channel::{decoherence_function, decoherence_second_derivative, pauli};
use crate::error::{domain, Error, Result};
use crate::qubit::{bloch_from_angles, fidelity_with_pure, PureStateAngles};

/// Default finite-difference step, in the model's natural time unit.
pub const DEFAULT_FD_STEP: f64 = 1e-4;
/// Relative tolerance of the finite-difference cross-checks in a scan.
pub const FD_CHECK_TOL: f64 = 1e-3;
/// Successive differences smaller than this break strict monotonicity.
pub const MONOTONE_TIE: f64 = 1e-12;
/// Step of the five-point stencil on `G` for the Ohmic `G̈`.
const OHMIC_G_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedSample {
    pub t: f64,
    /// `g(t)`, a signed curvature; the speed itself is its root where `g ≥ 0`.
    pub v_squared: f64,
}

impl SpeedSample {
    pub fn speed(&self) -> Option<f64> {
        (self.v_squared >= 0.0).then(|| self.v_squared.sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stencil {
    /// `(2F(t) − 5F(t+h) + 4F(t+2h) − F(t+3h)) / h²`
    Forward,
    /// `(F(t−h) − 2F(t) + F(t+h)) / h²`
    Central,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdSpeed {
    pub sample: SpeedSample,
    pub h: f64,
    pub stencil: Stencil,
    /// Set when the step is coarse for the model or the stencil straddles a
    /// non-differentiable point.
    pub warning: Option<String>,
}

/// `F(ρ(0), ρ(t))` for the pure initial state at `angles`.
pub fn fidelity_to_initial(model: &ModelSpec, angles: PureStateAngles, t: f64) -> Result<f64> {
    let n0 = bloch_from_angles(angles)?;
    fidelity_with_pure(n0, bloch_map(model, t)?.apply(&n0))
}

/// The same fidelity from the per-family closed forms in `G` or `λ_j`.
pub fn fidelity_closed_form(model: &ModelSpec, angles: PureStateAngles, t: f64) -> Result<f64> {
    let theta = angles.theta;
    let (s2, c) = (theta.sin().powi(2), theta.cos());
    Ok(match model.family() {
        Family::Dephasing => {
            let g = decoherence_function(model, t)?;
            0.25 * (3.0 + (2.0 * theta).cos() + 2.0 * g.re * s2)
        }
        Family::AmplitudeDamping => {
            let g = decoherence_function(model, t)?;
            let half = (0.5 * theta).sin().powi(2);
            0.5 * (1.0 + c - 2.0 * g.norm_sqr() * c * half + g.re * s2)
        }
        Family::Pauli => {
            let [l1, _, l3] = pauli_eigenvalues(model, t)?;
            0.25 * (2.0 + l1 + l3 + (l3 - l1) * (2.0 * theta).cos())
        }
    })
}

/// Fidelities along non-decreasing `times`. The Ohmic model shares one
/// quadrature along the stencil so its error does not enter the differences.
fn fidelity_curve(model: &ModelSpec, angles: PureStateAngles, times: &[f64]) -> Result<Vec<f64>> {
    match *model {
        ModelSpec::OhmicDephasing { omega_c, s } => {
            model.validate()?;
            let n0 = bloch_from_angles(angles)?;
            ohmic_upsilon_path(omega_c, s, times)?
                .into_iter()
                .map(|u| {
                    let g = Complex64::new((-u).exp(), 0.0);
                    fidelity_with_pure(n0, dephasing_map(g).apply(&n0))
                })
                .collect()
        }
        _ => times.iter().map(|&t| fidelity_to_initial(model, angles, t)).collect(),
    }
}

/// `g(t) = −2 F''(t)` by finite differences of [`fidelity_to_initial`].
/// The forward stencil is used for `t < 3h` (always at `t = 0`), the central
/// one beyond.
pub fn speed_squared_fd(model: &ModelSpec, angles: PureStateAngles, t: f64, h: f64) -> Result<FdSpeed> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(domain(format!("step h = {h} must be finite and > 0")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(domain(format!("time t = {t} must be finite and >= 0")));
    }
    let (stencil, times, weights): (_, Vec<f64>, &[f64]) = if t < 3.0 * h {
        (Stencil::Forward, (0..4).map(|k| t + k as f64 * h).collect(), &[2.0, -5.0, 4.0, -1.0])
    } else {
        (Stencil::Central, vec![t - h, t, t + h], &[1.0, -2.0, 1.0])
    };
    let f = fidelity_curve(model, angles, &times)?;
    if let Some(bad) = f.iter().find(|v| !v.is_finite()) {
        return Err(Error::Internal(format!("non-finite fidelity {bad} in stencil")));
    }
    let second = f.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / (h * h);

    let span = (times[0], times[times.len() - 1]);
    let warning = if let Some(k) = model.kink_in(span.0, span.1) {
        Some(format!("stencil [{}, {}] straddles the kink at t = {k}", span.0, span.1))
    } else if h > 1e-2 * model.time_scale() {
        Some(format!(
            "step h = {h} is coarse for the model time scale {}",
            model.time_scale()
        ))
    } else {
        None
    };
    Ok(FdSpeed {
        sample: SpeedSample { t, v_squared: -2.0 * second },
        h,
        stencil,
        warning,
    })
}

/// The closed-form speeds in `G̈` (dephasing) or `λ̈_j` (Pauli).
/// The amplitude-damping model has no such form here and must go through
/// [`speed_squared_fd`].
pub fn analytic_speed_squared(model: &ModelSpec, theta: f64, t: f64) -> Result<f64> {
    model.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(domain(format!("time t = {t} must be finite and >= 0")));
    }
    match model.family() {
        Family::Dephasing => {
            let gdd = match *model {
                ModelSpec::OhmicDephasing { omega_c, s } => ohmic_g_second_derivative(omega_c, s, t)?,
                _ => decoherence_second_derivative(model, t)
                    .ok_or_else(|| Error::Internal("missing closed-form G''".into()))?
                    .re,
            };
            Ok(-gdd * theta.sin().powi(2))
        }
        Family::Pauli => {
            let margin = 3.0 * DEFAULT_FD_STEP;
            if let Some(k) = model.kink_in((t - margin).max(0.0), t + margin) {
                return Err(domain(format!("t = {t} is within {margin} of the kink at {k}")));
            }
            let [l1, _, l3] = pauli::second_derivatives(model, t)
                .ok_or_else(|| Error::Internal("missing Pauli second derivatives".into()))?;
            Ok(-0.5 * (l1 + l3 + (l3 - l1) * (2.0 * theta).cos()))
        }
        Family::AmplitudeDamping => Err(Error::UnsupportedModel {
            operation: "analytic_speed_squared (use speed_squared_fd)",
            model: model.name(),
        }),
    }
}

/// Five-point `G̈` for the Ohmic model. `Υ` is even in `t`, so points left
/// of the origin are folded onto the positive axis.
fn ohmic_g_second_derivative(omega_c: f64, s: f64, t: f64) -> Result<f64> {
    let h = OHMIC_G_STEP / omega_c;
    let offsets = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let mut abs_times: Vec<f64> = offsets.iter().map(|k| (t + k * h).abs()).collect();
    abs_times.sort_by(f64::total_cmp);
    abs_times.dedup();
    let upsilon = ohmic_upsilon_path(omega_c, s, &abs_times)?;
    let g = |k: f64| {
        let tau = (t + k * h).abs();
        let i = abs_times.iter().position(|&a| a == tau).expect("stencil point");
        (-upsilon[i]).exp()
    };
    Ok((-g(-2.0) + 16.0 * g(-1.0) - 30.0 * g(0.0) + 16.0 * g(1.0) - g(2.0)) / (12.0 * h * h))
}

/// Values of a scanned parameter: `n_points` evenly spaced over
/// `[start, end]`, or over `(start, end]` when `open_start` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamRange {
    pub start: f64,
    pub end: f64,
    pub n_points: usize,
    #[serde(default)]
    pub open_start: bool,
}

impl ParamRange {
    pub fn closed(start: f64, end: f64, n_points: usize) -> Self {
        Self { start, end, n_points, open_start: false }
    }

    pub fn open_start(start: f64, end: f64, n_points: usize) -> Self {
        Self { start, end, n_points, open_start: true }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.end.is_finite()) {
            return Err(domain("range bounds must be finite"));
        }
        if self.end <= self.start {
            return Err(domain(format!("empty range [{}, {}]", self.start, self.end)));
        }
        let min = if self.open_start { 1 } else { 2 };
        if self.n_points < min {
            return Err(domain(format!("a range needs at least {min} points")));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.n_points;
        let width = self.end - self.start;
        if self.open_start {
            (1..=n).map(|i| self.start + width * i as f64 / n as f64).collect()
        } else {
            (0..n)
                .map(|i| if i + 1 == n { self.end } else { self.start + width * i as f64 / (n - 1) as f64 })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    StrictlyIncreasing,
    StrictlyDecreasing,
    NonMonotonic,
}

impl Monotonicity {
    /// Verdict on successive values, ties within [`MONOTONE_TIE`] counting
    /// as violations.
    pub fn of(values: &[f64]) -> Self {
        let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
        if diffs.iter().all(|&d| d > MONOTONE_TIE) {
            Monotonicity::StrictlyIncreasing
        } else if diffs.iter().all(|&d| d < -MONOTONE_TIE) {
            Monotonicity::StrictlyDecreasing
        } else {
            Monotonicity::NonMonotonic
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub value: f64,
    pub v0_squared: f64,
    pub region: RegionVerdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdCheck {
    pub value: f64,
    pub closed_form: f64,
    pub finite_difference: f64,
    /// `|fd − closed| / max(1, |closed|)`
    pub error: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub model: String,
    pub parameter: String,
    pub theta: f64,
    pub points: Vec<ScanPoint>,
    pub verdict: Monotonicity,
    pub fd_checks: Vec<FdCheck>,
}

impl MonotonicityReport {
    pub fn fd_checks_passed(&self) -> bool {
        self.fd_checks.iter().all(|c| c.passed)
    }
}

/// Scans the closed-form `v(0)²` over the model's driving parameter.
pub fn initial_speed_scan(
    template: &ModelSpec,
    parameter: &str,
    range: ParamRange,
    theta: f64,
) -> Result<MonotonicityReport> {
    range.validate()?;
    if parameter != template.driving_parameter() {
        return Err(domain(format!(
            "'{parameter}' is not the driving parameter of the {} model ('{}')",
            template.name(),
            template.driving_parameter()
        )));
    }
    let angles = PureStateAngles::new(theta, 0.0)?;
    let values = range.values();
    let mut points = Vec::with_capacity(values.len());
    for &value in &values {
        let model = template.with_parameter(parameter, value)?;
        points.push(ScanPoint {
            value,
            v0_squared: initial_speed_squared_closed_form(&model, theta)?,
            region: table1_region(&model)?,
        });
    }
    let n = points.len();
    let mut picks = vec![0, n / 2, n - 1];
    picks.dedup();
    let fd_checks = picks
        .into_iter()
        .map(|i| {
            let p = points[i];
            let model = template.with_parameter(parameter, p.value)?;
            let fd = speed_squared_fd(&model, angles, 0.0, DEFAULT_FD_STEP)?.sample.v_squared;
            let error = (fd - p.v0_squared).abs() / p.v0_squared.abs().max(1.0);
            Ok(FdCheck {
                value: p.value,
                closed_form: p.v0_squared,
                finite_difference: fd,
                error,
                passed: error <= FD_CHECK_TOL,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let verdict = Monotonicity::of(&points.iter().map(|p| p.v0_squared).collect::<Vec<_>>());
    Ok(MonotonicityReport {
        model: template.name().to_string(),
        parameter: parameter.to_string(),
        theta,
        points,
        verdict,
        fd_checks,
    })
}

/// Signed curvature `g(t)` over a grid, by finite differences.
pub fn speed_curve(model: &ModelSpec, angles: PureStateAngles, times: &[f64], h: f64) -> Result<Vec<FdSpeed>> {
    times.iter().map(|&t| speed_squared_fd(model, angles, t, h)).collect()
}
