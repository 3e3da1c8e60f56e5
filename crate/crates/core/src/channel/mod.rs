//! The six single-qubit channel families: decoherence functions, time-local
//! rates, exact affine Bloch maps and the closed-form initial speeds.
//!
//! All parameters are dimensionless multiples of a reference frequency chosen
//! by the caller (`ω_c` for the Ohmic model, `Δn·ω` for the photon model,
//! `λ` for the Jaynes–Cummings and Pauli models); times are in inverse units
//! of the same frequency.

mod jaynes_cummings;
mod ohmic;
pub(crate) mod pauli;
mod polarization;
mod table1;

use std::fmt;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::qubit::BlochVector;

pub use jaynes_cummings::coupling_w;
pub use ohmic::{ohmic_rate, ohmic_upsilon, ohmic_upsilon_path, OHMIC_QUADRATURE_TOL};
pub use table1::{
    initial_speed_squared_closed_form, jc_detuned_initial_speed_squared, jc_resonant_initial_speed_squared,
    table1_region, Claim, RegionVerdict,
};

/// Below this modulus the decoherence factor is treated as zero and the
/// rates derived from it as divergent.
pub const SINGULAR_FLOOR: f64 = 1e-12;

/// One of the six channel families with its physical parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    /// Pure dephasing by a zero-temperature bosonic bath with Ohmic-class
    /// spectral density of cut-off `omega_c` and Ohmicity `s`.
    #[serde(rename = "ohmic")]
    OhmicDephasing { omega_c: f64, s: f64 },
    /// Photon polarization dephased by its bimodal frequency distribution
    /// (peaks at `omega1`, `omega2`, common width `sigma`, weight angle `xi`)
    /// through a birefringent element with index difference `delta_n`.
    #[serde(rename = "polarization")]
    PolarizationDephasing {
        delta_n: f64,
        sigma: f64,
        omega1: f64,
        omega2: f64,
        xi: f64,
    },
    /// Two-level atom in a lossy cavity with Lorentzian spectral density of
    /// width `lambda`, effective coupling `gamma_m` and detuning `delta`.
    #[serde(rename = "jaynes_cummings")]
    JaynesCummings {
        lambda: f64,
        gamma_m: f64,
        delta: f64,
    },
    /// Pauli channel with `γ1 = γ2 = λ/2`, `γ3 = −(ω/2) tanh(ωt)`.
    PauliTanh { lambda: f64, omega: f64 },
    /// Pauli channel with `γ1 = γ2 = λ/2`, `γ3 = (ω/2) tan(ωt)`.
    PauliTan { lambda: f64, omega: f64 },
}

/// Structural class of a model, which fixes the shape of its Bloch map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Dephasing,
    AmplitudeDamping,
    Pauli,
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::OhmicDephasing { .. } => "ohmic",
            ModelSpec::PolarizationDephasing { .. } => "polarization",
            ModelSpec::JaynesCummings { .. } => "jaynes_cummings",
            ModelSpec::PauliTanh { .. } => "pauli_tanh",
            ModelSpec::PauliTan { .. } => "pauli_tan",
        }
    }

    pub fn family(&self) -> Family {
        match self {
            ModelSpec::OhmicDephasing { .. } | ModelSpec::PolarizationDephasing { .. } => {
                Family::Dephasing
            }
            ModelSpec::JaynesCummings { .. } => Family::AmplitudeDamping,
            ModelSpec::PauliTanh { .. } | ModelSpec::PauliTan { .. } => Family::Pauli,
        }
    }

    pub fn parameter_names(&self) -> &'static [&'static str] {
        match self {
            ModelSpec::OhmicDephasing { .. } => &["omega_c", "s"],
            ModelSpec::PolarizationDephasing { .. } => &["delta_n", "sigma", "omega1", "omega2", "xi"],
            ModelSpec::JaynesCummings { .. } => &["lambda", "gamma_m", "delta"],
            ModelSpec::PauliTanh { .. } | ModelSpec::PauliTan { .. } => &["lambda", "omega"],
        }
    }

    /// The parameter that drives the Markovian / non-Markovian crossover.
    pub fn driving_parameter(&self) -> &'static str {
        match self {
            ModelSpec::OhmicDephasing { .. } => "s",
            ModelSpec::PolarizationDephasing { .. } => "xi",
            ModelSpec::JaynesCummings { .. } => "gamma_m",
            ModelSpec::PauliTanh { .. } | ModelSpec::PauliTan { .. } => "omega",
        }
    }

    pub fn parameter(&self, name: &str) -> Option<f64> {
        let v = match (self, name) {
            (ModelSpec::OhmicDephasing { omega_c, .. }, "omega_c") => omega_c,
            (ModelSpec::OhmicDephasing { s, .. }, "s") => s,
            (ModelSpec::PolarizationDephasing { delta_n, .. }, "delta_n") => delta_n,
            (ModelSpec::PolarizationDephasing { sigma, .. }, "sigma") => sigma,
            (ModelSpec::PolarizationDephasing { omega1, .. }, "omega1") => omega1,
            (ModelSpec::PolarizationDephasing { omega2, .. }, "omega2") => omega2,
            (ModelSpec::PolarizationDephasing { xi, .. }, "xi") => xi,
            (ModelSpec::JaynesCummings { lambda, .. }, "lambda") => lambda,
            (ModelSpec::JaynesCummings { gamma_m, .. }, "gamma_m") => gamma_m,
            (ModelSpec::JaynesCummings { delta, .. }, "delta") => delta,
            (ModelSpec::PauliTanh { lambda, .. } | ModelSpec::PauliTan { lambda, .. }, "lambda") => lambda,
            (ModelSpec::PauliTanh { omega, .. } | ModelSpec::PauliTan { omega, .. }, "omega") => omega,
            _ => return None,
        };
        Some(*v)
    }

    /// Copy of `self` with parameter `name` set to `value`, validated.
    pub fn with_parameter(&self, name: &str, value: f64) -> Result<ModelSpec> {
        let mut out = *self;
        let slot = match (&mut out, name) {
            (ModelSpec::OhmicDephasing { omega_c, .. }, "omega_c") => omega_c,
            (ModelSpec::OhmicDephasing { s, .. }, "s") => s,
            (ModelSpec::PolarizationDephasing { delta_n, .. }, "delta_n") => delta_n,
            (ModelSpec::PolarizationDephasing { sigma, .. }, "sigma") => sigma,
            (ModelSpec::PolarizationDephasing { omega1, .. }, "omega1") => omega1,
            (ModelSpec::PolarizationDephasing { omega2, .. }, "omega2") => omega2,
            (ModelSpec::PolarizationDephasing { xi, .. }, "xi") => xi,
            (ModelSpec::JaynesCummings { lambda, .. }, "lambda") => lambda,
            (ModelSpec::JaynesCummings { gamma_m, .. }, "gamma_m") => gamma_m,
            (ModelSpec::JaynesCummings { delta, .. }, "delta") => delta,
            (ModelSpec::PauliTanh { lambda, .. } | ModelSpec::PauliTan { lambda, .. }, "lambda") => lambda,
            (ModelSpec::PauliTanh { omega, .. } | ModelSpec::PauliTan { omega, .. }, "omega") => omega,
            _ => {
                return Err(domain(format!(
                    "parameter '{name}' does not belong to the {} model",
                    self.name()
                )))
            }
        };
        *slot = value;
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self
            .parameter_names()
            .iter()
            .all(|p| self.parameter(p).is_some_and(f64::is_finite));
        if !finite {
            return Err(domain(format!("{} model has non-finite parameters", self.name())));
        }
        match *self {
            ModelSpec::OhmicDephasing { omega_c, s } => {
                require(omega_c > 0.0, "omega_c must be > 0")?;
                require(s > 0.0, "s must be > 0")
            }
            ModelSpec::PolarizationDephasing { sigma, xi, .. } => {
                require(sigma >= 0.0, "sigma must be >= 0")?;
                require(
                    (0.0..=std::f64::consts::FRAC_PI_2).contains(&xi),
                    "xi must lie in [0, pi/2]",
                )
            }
            ModelSpec::JaynesCummings { lambda, gamma_m, .. } => {
                require(lambda > 0.0, "lambda must be > 0")?;
                require(gamma_m >= 0.0, "gamma_m must be >= 0")
            }
            ModelSpec::PauliTanh { lambda, omega } => {
                require(lambda > 0.0, "lambda must be > 0")?;
                require((0.0..=lambda).contains(&omega), "omega must satisfy 0 <= omega <= lambda")
            }
            ModelSpec::PauliTan { lambda, omega } => {
                require(lambda >= 0.0, "lambda must be >= 0")?;
                require(omega >= 0.0, "omega must be >= 0")
            }
        }
    }

    /// Natural time unit of the model (inverse of its reference frequency).
    pub fn time_scale(&self) -> f64 {
        let f = match *self {
            ModelSpec::OhmicDephasing { omega_c, .. } => omega_c,
            ModelSpec::PolarizationDephasing { delta_n, sigma, omega1, omega2, .. } => {
                delta_n.abs() * sigma.max(omega1.abs()).max(omega2.abs())
            }
            ModelSpec::JaynesCummings { lambda, .. } => lambda,
            ModelSpec::PauliTanh { lambda, omega } | ModelSpec::PauliTan { lambda, omega } => {
                lambda.max(omega)
            }
        };
        if f > 0.0 {
            1.0 / f
        } else {
            1.0
        }
    }

    /// First time in `[t0, t1]` at which a rate of this model is known to
    /// diverge on a kink of its map, if any. Only the `tan` Pauli channel
    /// has such points (`ωt = π/2 + kπ`); zeros of a smooth decoherence
    /// factor are not reported here.
    pub fn kink_in(&self, t0: f64, t1: f64) -> Option<f64> {
        match *self {
            ModelSpec::PauliTan { omega, .. } if omega > 0.0 => {
                let half = std::f64::consts::FRAC_PI_2;
                let k = ((omega * t0 - half) / std::f64::consts::PI).ceil().max(0.0);
                let t = (half + k * std::f64::consts::PI) / omega;
                (t <= t1).then_some(t)
            }
            _ => None,
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name())?;
        for (i, p) in self.parameter_names().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}={}", self.parameter(p).unwrap_or(f64::NAN))?;
        }
        write!(f, ")")
    }
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(domain(msg))
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("time t = {t} must be finite and >= 0")))
    }
}

/// Canonical time-local rates of a model.
///
/// For the Pauli channels `gamma` holds `(γ1, γ2, γ3)`. Single-dissipator
/// families populate one slot: dephasing in `γ3` (the `σ_z` channel),
/// amplitude damping in `γ1`. `h_z` is the angular frequency of the
/// coherent rotation carried by the imaginary part of `−Ġ/G`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateVector {
    pub gamma: [f64; 3],
    pub h_z: f64,
}

/// `n ↦ M n + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineBlochMap {
    pub m: Matrix3<f64>,
    pub b: Vector3<f64>,
}

impl AffineBlochMap {
    pub fn identity() -> Self {
        Self {
            m: Matrix3::identity(),
            b: Vector3::zeros(),
        }
    }

    pub fn apply(&self, n: &BlochVector) -> BlochVector {
        BlochVector::from_vector(&(self.m * n.to_vector() + self.b))
    }

    /// Whether every sampled unit vector is mapped into the closed ball.
    pub fn preserves_ball<'a, I>(&self, samples: I, tol: f64) -> bool
    where
        I: IntoIterator<Item = &'a BlochVector>,
    {
        samples
            .into_iter()
            .all(|n| self.apply(n).norm() <= 1.0 + tol)
    }
}

/// `G(t)` for the dephasing and Jaynes–Cummings models.
pub fn decoherence_function(model: &ModelSpec, t: f64) -> Result<Complex64> {
    model.validate()?;
    check_time(t)?;
    if t == 0.0 && model.family() != Family::Pauli {
        return Ok(Complex64::new(1.0, 0.0));
    }
    match *model {
        ModelSpec::OhmicDephasing { omega_c, s } => {
            Ok(Complex64::new((-ohmic_upsilon(omega_c, s, t)?).exp(), 0.0))
        }
        ModelSpec::PolarizationDephasing { .. } => Ok(polarization::derivatives(model, t).0),
        ModelSpec::JaynesCummings { .. } => Ok(jaynes_cummings::derivatives(model, t).0),
        ModelSpec::PauliTanh { .. } | ModelSpec::PauliTan { .. } => Err(Error::UnsupportedModel {
            operation: "decoherence_function",
            model: model.name(),
        }),
    }
}

/// `(G, Ġ)` analytically continued to complex `t`, for the models whose
/// decoherence factor is an entire function in closed form.
pub(crate) fn decoherence_at(model: &ModelSpec, t: Complex64) -> Option<(Complex64, Complex64)> {
    match model {
        ModelSpec::PolarizationDephasing { .. } => {
            let (g, dg, _) = polarization::derivatives_at(model, t);
            Some((g, dg))
        }
        ModelSpec::JaynesCummings { .. } => Some(jaynes_cummings::derivatives_at(model, t)),
        _ => None,
    }
}

/// `G̈(t)` where it has a closed form (photon model only).
pub fn decoherence_second_derivative(model: &ModelSpec, t: f64) -> Option<Complex64> {
    match model {
        ModelSpec::PolarizationDephasing { .. } => Some(polarization::derivatives(model, t).2),
        _ => None,
    }
}

pub fn decay_rates(model: &ModelSpec, t: f64) -> Result<RateVector> {
    model.validate()?;
    check_time(t)?;
    match *model {
        ModelSpec::OhmicDephasing { omega_c, s } => Ok(RateVector {
            gamma: [0.0, 0.0, ohmic_rate(omega_c, s, t)],
            h_z: 0.0,
        }),
        ModelSpec::PolarizationDephasing { .. } => {
            let (g, dg, _) = polarization::derivatives(model, t);
            let k = log_derivative(g, dg, t)?;
            // Coherences decay as e^{−2∫γ}, so γ = −Re(Ġ/G)/2.
            Ok(RateVector {
                gamma: [0.0, 0.0, -0.5 * k.re],
                h_z: -k.im,
            })
        }
        ModelSpec::JaynesCummings { .. } => {
            let (g, dg) = jaynes_cummings::derivatives(model, t);
            let k = log_derivative(g, dg, t)?;
            Ok(RateVector {
                gamma: [-2.0 * k.re, 0.0, 0.0],
                h_z: -k.im,
            })
        }
        ModelSpec::PauliTanh { lambda, omega } => Ok(RateVector {
            gamma: [0.5 * lambda, 0.5 * lambda, -0.5 * omega * (omega * t).tanh()],
            h_z: 0.0,
        }),
        ModelSpec::PauliTan { lambda, omega } => {
            let (sin, cos) = (omega * t).sin_cos();
            if omega > 0.0 && cos.abs() < SINGULAR_FLOOR {
                return Err(Error::SingularRate { t });
            }
            Ok(RateVector {
                gamma: [0.5 * lambda, 0.5 * lambda, 0.5 * omega * sin / cos],
                h_z: 0.0,
            })
        }
    }
}

fn log_derivative(g: Complex64, dg: Complex64, t: f64) -> Result<Complex64> {
    if g.norm() < SINGULAR_FLOOR {
        return Err(Error::SingularRate { t });
    }
    let k = dg / g;
    if k.re.is_finite() && k.im.is_finite() {
        Ok(k)
    } else {
        Err(Error::SingularRate { t })
    }
}

/// `(λ1, λ2, λ3)` of the Pauli channels; `λ2 = λ1` throughout.
pub fn pauli_eigenvalues(model: &ModelSpec, t: f64) -> Result<[f64; 3]> {
    model.validate()?;
    check_time(t)?;
    pauli::eigenvalues(model, t).ok_or(Error::UnsupportedModel {
        operation: "pauli_eigenvalues",
        model: model.name(),
    })
}

pub fn bloch_map(model: &ModelSpec, t: f64) -> Result<AffineBlochMap> {
    model.validate()?;
    check_time(t)?;
    if t == 0.0 {
        return Ok(AffineBlochMap::identity());
    }
    match model.family() {
        Family::Dephasing => Ok(dephasing_map(decoherence_function(model, t)?)),
        Family::AmplitudeDamping => Ok(damping_map(decoherence_function(model, t)?)),
        Family::Pauli => {
            let [l1, l2, l3] = pauli_eigenvalues(model, t)?;
            Ok(AffineBlochMap {
                m: Matrix3::from_diagonal(&Vector3::new(l1, l2, l3)),
                b: Vector3::zeros(),
            })
        }
    }
}

/// `x − i y ↦ G (x − i y)`, `z` fixed.
pub(crate) fn dephasing_map(g: Complex64) -> AffineBlochMap {
    AffineBlochMap {
        m: Matrix3::new(g.re, g.im, 0.0, -g.im, g.re, 0.0, 0.0, 0.0, 1.0),
        b: Vector3::zeros(),
    }
}

/// `x + i y ↦ G (x + i y)`, `z ↦ |G|² z + 1 − |G|²`.
pub(crate) fn damping_map(g: Complex64) -> AffineBlochMap {
    let g2 = g.norm_sqr();
    AffineBlochMap {
        m: Matrix3::new(g.re, -g.im, 0.0, g.im, g.re, 0.0, 0.0, 0.0, g2),
        b: Vector3::new(0.0, 0.0, 1.0 - g2),
    }
}
