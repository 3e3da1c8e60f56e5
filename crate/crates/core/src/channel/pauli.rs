use super::ModelSpec;

pub(super) fn eigenvalues(model: &ModelSpec, t: f64) -> Option<[f64; 3]> {
    let (l1, l3) = match *model {
        ModelSpec::PauliTanh { lambda, omega } => {
            // e^{−λt} cosh(ωt), written to stay finite for large t
            let l1 = 0.5 * (((omega - lambda) * t).exp() + (-(omega + lambda) * t).exp());
            (l1, (-2.0 * lambda * t).exp())
        }
        ModelSpec::PauliTan { lambda, omega } => (
            (-lambda * t).exp() * (omega * t).cos().abs(),
            (-2.0 * lambda * t).exp(),
        ),
        _ => return None,
    };
    Some([l1, l1, l3])
}

/// Closed-form `(λ̈1, λ̈2, λ̈3)`. For the `tan` channel this is the one-sided
/// value on the branch containing `t`; callers keep away from the kinks.
pub(crate) fn second_derivatives(model: &ModelSpec, t: f64) -> Option<[f64; 3]> {
    let (dd1, dd3) = match *model {
        ModelSpec::PauliTanh { lambda, omega } => {
            let (ch, sh) = ((omega * t).cosh(), (omega * t).sinh());
            let dd1 = (-lambda * t).exp() * ((lambda * lambda + omega * omega) * ch - 2.0 * lambda * omega * sh);
            (dd1, 4.0 * lambda * lambda * (-2.0 * lambda * t).exp())
        }
        ModelSpec::PauliTan { lambda, omega } => {
            let (s, c) = (omega * t).sin_cos();
            let sign = if c < 0.0 { -1.0 } else { 1.0 };
            let dd1 = sign * (-lambda * t).exp() * ((lambda * lambda - omega * omega) * c + 2.0 * lambda * omega * s);
            (dd1, 4.0 * lambda * lambda * (-2.0 * lambda * t).exp())
        }
        _ => return None,
    };
    Some([dd1, dd1, dd3])
}
