use serde::{Deserialize, Serialize};

use super::{coupling_w, ModelSpec};
use crate::error::{domain, Result};
use crate::special::gamma;

/// Closed-form squared initial speed `v(0)²` (signed; units of frequency²).
pub fn initial_speed_squared_closed_form(model: &ModelSpec, theta: f64) -> Result<f64> {
    model.validate()?;
    if !theta.is_finite() {
        return Err(domain("theta must be finite"));
    }
    let sin2 = theta.sin().powi(2);
    let cos2 = theta.cos().powi(2);
    Ok(match *model {
        ModelSpec::OhmicDephasing { omega_c, s } => 2.0 * omega_c * omega_c * gamma(s + 1.0) * sin2,
        ModelSpec::PolarizationDephasing { delta_n, sigma, omega1, omega2, xi } => {
            let (w1, w2) = (omega1 * omega1, omega2 * omega2);
            0.5 * delta_n * delta_n
                * (2.0 * sigma * sigma + w1 + w2 - (w2 - w1) * (2.0 * xi).cos())
                * sin2
        }
        ModelSpec::JaynesCummings { lambda, gamma_m, delta } => {
            if delta == 0.0 {
                jc_resonant_initial_speed_squared(lambda, gamma_m, theta)
            } else {
                jc_detuned_initial_speed_squared(lambda, gamma_m, delta, theta)
            }
        }
        ModelSpec::PauliTanh { lambda, omega } => {
            -4.0 * lambda * lambda * cos2 - (lambda * lambda + omega * omega) * sin2
        }
        ModelSpec::PauliTan { lambda, omega } => {
            -4.0 * lambda * lambda * cos2 - (lambda * lambda - omega * omega) * sin2
        }
    })
}

/// `γ_M²λ² sin⁴(θ/2)`, the resonant amplitude-damping row.
pub fn jc_resonant_initial_speed_squared(lambda: f64, gamma_m: f64, theta: f64) -> f64 {
    gamma_m * gamma_m * lambda * lambda * (0.5 * theta).sin().powi(4)
}

/// `(4W² − Δ²) sin⁴(θ/2)`, the detuned amplitude-damping row.
pub fn jc_detuned_initial_speed_squared(lambda: f64, gamma_m: f64, delta: f64, theta: f64) -> f64 {
    let w = coupling_w(lambda, gamma_m, delta);
    (4.0 * w * w - delta * delta) * (0.5 * theta).sin().powi(4)
}

/// A Markovianity-column entry of the summary table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    Yes,
    No,
    /// No backflow for any value of the driving parameter.
    NoneEver,
    /// No closed-form region is available; resolve numerically.
    Numeric,
}

impl Claim {
    /// `Some(true)` for a definite presence claim, `Some(false)` for absence.
    pub fn as_bool(self) -> Option<bool> {
        match self {
            Claim::Yes => Some(true),
            Claim::No | Claim::NoneEver => Some(false),
            Claim::Numeric => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionVerdict {
    pub indivisible: Claim,
    pub backflow: Claim,
}

fn both(flag: bool) -> RegionVerdict {
    let c = if flag { Claim::Yes } else { Claim::No };
    RegionVerdict { indivisible: c, backflow: c }
}

/// Closed-form CP-indivisibility and backflow claims for the model's
/// parameters, or [`Claim::Numeric`] where no closed form is stated.
pub fn table1_region(model: &ModelSpec) -> Result<RegionVerdict> {
    model.validate()?;
    Ok(match *model {
        ModelSpec::OhmicDephasing { s, .. } => both(s > 2.0),
        ModelSpec::PolarizationDephasing { .. } => RegionVerdict {
            indivisible: Claim::Numeric,
            backflow: Claim::Numeric,
        },
        ModelSpec::JaynesCummings { lambda, gamma_m, delta } => {
            if delta == 0.0 {
                both(gamma_m > 0.5 * lambda)
            } else {
                RegionVerdict {
                    indivisible: Claim::Numeric,
                    backflow: Claim::Numeric,
                }
            }
        }
        ModelSpec::PauliTanh { omega, .. } => RegionVerdict {
            indivisible: if omega > 0.0 { Claim::Yes } else { Claim::No },
            backflow: Claim::NoneEver,
        },
        ModelSpec::PauliTan { omega, .. } => both(omega > 0.0),
    })
}
