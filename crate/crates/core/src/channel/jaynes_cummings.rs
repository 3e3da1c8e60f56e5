use num_complex::Complex64;

use super::ModelSpec;

/// Below this `|Ωt/2|` the ratio `sinh(z)/z` switches to its Taylor series.
const SERIES_SWITCH: f64 = 1e-6;

/// `W = γ_M λ / 2 + Δ² / 4`, taken literally. At `Δ = 0` this reproduces the
/// resonant initial speed `γ_M² λ² sin⁴(θ/2)`; the mixed units of the two
/// terms are left as they are rather than guessing a normalization.
pub fn coupling_w(lambda: f64, gamma_m: f64, delta: f64) -> f64 {
    0.5 * gamma_m * lambda + 0.25 * delta * delta
}

/// `Ω = √(λ² − 2iλΔ − 4W²)`, principal branch.
fn omega(lambda: f64, gamma_m: f64, delta: f64) -> Complex64 {
    let w = coupling_w(lambda, gamma_m, delta);
    Complex64::new(lambda * lambda - 4.0 * w * w, -2.0 * lambda * delta).sqrt()
}

fn sinhc(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_SWITCH {
        Complex64::new(1.0, 0.0) + z * z / 6.0
    } else {
        z.sinh() / z
    }
}

/// `(G, Ġ)` for
/// `G(t) = e^{−(λ−iΔ)t/2} [cosh(Ωt/2) + ((λ−iΔ)/Ω) sinh(Ωt/2)]`,
/// written through `sinh(z)/z` so that `Ω → 0` needs no special case.
pub(super) fn derivatives(model: &ModelSpec, t: f64) -> (Complex64, Complex64) {
    derivatives_at(model, Complex64::new(t, 0.0))
}

/// Same as [`derivatives`], analytically continued to complex `t`.
pub(super) fn derivatives_at(model: &ModelSpec, t: Complex64) -> (Complex64, Complex64) {
    let ModelSpec::JaynesCummings { lambda, gamma_m, delta } = *model else {
        unreachable!("Jaynes-Cummings derivatives called for {}", model.name());
    };
    let a = Complex64::new(0.5 * lambda, -0.5 * delta);
    let om = omega(lambda, gamma_m, delta);
    let z = om * (0.5 * t);
    let decay = (-a * t).exp();
    let ch = z.cosh();
    let sc = sinhc(z);
    let g = decay * (ch + a * t * sc);
    // d/dt cosh(Ωt/2) = (Ω²t/4)·sinh(z)/z ; d/dt [(2a/Ω) sinh(Ωt/2)] = a cosh(Ωt/2)
    let dg = -a * g + decay * (om * om * t * 0.25 * sc + a * ch);
    (g, dg)
}
