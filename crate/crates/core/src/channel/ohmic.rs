use crate::error::Result;
use crate::special::{adaptive_simpson, gamma};

/// Absolute tolerance on `Υ(t)` for the adaptive quadrature.
pub const OHMIC_QUADRATURE_TOL: f64 = 1e-10;

/// `γ(t) = ω_c [1 + (ω_c t)²]^{−s/2} Γ(s) sin(s·arctan(ω_c t))`.
pub fn ohmic_rate(omega_c: f64, s: f64, t: f64) -> f64 {
    omega_c * gamma(s) * reduced_rate(s, omega_c * t)
}

fn reduced_rate(s: f64, x: f64) -> f64 {
    (1.0 + x * x).powf(-0.5 * s) * (s * x.atan()).sin()
}

/// `Υ(t) = 2 ∫₀ᵗ γ(t′) dt′`, integrated in the reduced variable `x = ω_c t`.
pub fn ohmic_upsilon(omega_c: f64, s: f64, t: f64) -> Result<f64> {
    let scale = 2.0 * gamma(s);
    let inner = adaptive_simpson(|x| reduced_rate(s, x), 0.0, omega_c * t, OHMIC_QUADRATURE_TOL / scale)?;
    Ok(scale * inner)
}

/// `Υ` at each of the non-decreasing `times`, the first by a full
/// quadrature and the rest by adding short integrals between neighbours.
/// Nearby values then share their quadrature error, which keeps finite
/// differences across them clean.
pub fn ohmic_upsilon_path(omega_c: f64, s: f64, times: &[f64]) -> Result<Vec<f64>> {
    let Some(&first) = times.first() else {
        return Ok(Vec::new());
    };
    let scale = 2.0 * gamma(s);
    let tol = OHMIC_QUADRATURE_TOL / scale;
    let mut acc = adaptive_simpson(|x| reduced_rate(s, x), 0.0, omega_c * first, tol)?;
    let mut out = Vec::with_capacity(times.len());
    out.push(scale * acc);
    for w in times.windows(2) {
        if w[1] < w[0] {
            return Err(crate::error::domain("times must be non-decreasing"));
        }
        acc += adaptive_simpson(|x| reduced_rate(s, x), omega_c * w[0], omega_c * w[1], tol)?;
        out.push(scale * acc);
    }
    Ok(out)
}
