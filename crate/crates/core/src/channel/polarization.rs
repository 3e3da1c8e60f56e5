use num_complex::Complex64;

use super::ModelSpec;

/// `(G, Ġ, G̈)` for
/// `G(t) = e^{−σ²Δn²t²/2} (cos²ξ e^{iω₁Δn t} + sin²ξ e^{iω₂Δn t})`.
pub(super) fn derivatives(model: &ModelSpec, t: f64) -> (Complex64, Complex64, Complex64) {
    derivatives_at(model, Complex64::new(t, 0.0))
}

/// Same as [`derivatives`], analytically continued to complex `t`.
pub(super) fn derivatives_at(model: &ModelSpec, t: Complex64) -> (Complex64, Complex64, Complex64) {
    let ModelSpec::PolarizationDephasing { delta_n, sigma, omega1, omega2, xi } = *model else {
        unreachable!("polarization derivatives called for {}", model.name());
    };
    let c = (sigma * delta_n).powi(2);
    let env = (-0.5 * c * t * t).exp();
    let d_env = -c * t * env;
    let dd_env = (t * t * (c * c) - c) * env;

    let (s, co) = xi.sin_cos();
    let peaks = [(co * co, omega1 * delta_n), (s * s, omega2 * delta_n)];
    let mut b = Complex64::new(0.0, 0.0);
    let mut db = b;
    let mut ddb = b;
    for (w, freq) in peaks {
        let phase = (Complex64::i() * freq * t).exp() * w;
        b += phase;
        db += phase * Complex64::new(0.0, freq);
        ddb -= phase * (freq * freq);
    }
    (
        b * env,
        db * env + b * d_env,
        ddb * env + db * (2.0 * d_env) + b * dd_env,
    )
}
