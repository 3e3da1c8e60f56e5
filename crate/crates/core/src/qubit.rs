//! Bloch-vector state algebra for a single qubit.
//!
//! States are carried as real Bloch vectors `n` with `ρ = (I + n·σ)/2`. Pure
//! states built from polar/azimuthal angles follow the convention
//! `n = (sinθ cosφ, −sinθ sinφ, cosθ)`, shared by every model in the crate.
//! Fidelity and trace distance are invariant under the `y → −y` reflection,
//! so the sign of the azimuth never changes a reported number.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Slack allowed on `|n| ≤ 1` for vectors produced by numerical maps.
pub const BLOCH_TOLERANCE: f64 = 1e-9;

/// Tolerance on trace, hermiticity and eigenvalue positivity of density matrices.
pub const DENSITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const ORIGIN: BlochVector = BlochVector { x: 0.0, y: 0.0, z: 0.0 };

    /// Builds a vector and checks it lies in the closed unit ball (up to
    /// [`BLOCH_TOLERANCE`]).
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = Self { x, y, z };
        n.validate()?;
        Ok(n)
    }

    /// Builds a vector without the ball check.
    pub const fn new_unchecked(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x.is_finite() && self.y.is_finite() && self.z.is_finite()) {
            return Err(domain(format!("non-finite Bloch vector {self:?}")));
        }
        let bound = 1.0 + BLOCH_TOLERANCE;
        if self.norm_squared() > bound * bound {
            return Err(domain(format!(
                "Bloch vector {self:?} has norm {} > 1",
                self.norm()
            )));
        }
        Ok(())
    }

    pub fn norm_squared(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// `1 − |n|²`, clamped at zero for vectors within the validity slack.
    pub fn mixedness(&self) -> f64 {
        (1.0 - self.norm_squared()).max(0.0)
    }

    pub fn to_vector(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new_unchecked(v[0], v[1], v[2])
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl Add for BlochVector {
    type Output = BlochVector;
    fn add(self, rhs: Self) -> Self {
        Self::new_unchecked(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for BlochVector {
    type Output = BlochVector;
    fn sub(self, rhs: Self) -> Self {
        Self::new_unchecked(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for BlochVector {
    type Output = BlochVector;
    fn mul(self, k: f64) -> Self {
        Self::new_unchecked(self.x * k, self.y * k, self.z * k)
    }
}

/// Polar and azimuthal angles of a pure state `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PureStateAngles {
    pub theta: f64,
    pub phi: f64,
}

impl PureStateAngles {
    /// `θ ∈ [0, π]`, `φ ∈ [0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(domain(format!("theta = {theta} outside [0, pi]")));
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(domain(format!("phi = {phi} outside [0, 2pi)")));
        }
        Ok(Self { theta, phi })
    }

    /// Angles of the antipodal state, `(π − θ, φ + π mod 2π)`.
    pub fn antipode(&self) -> Self {
        let mut phi = self.phi + PI;
        if phi >= 2.0 * PI {
            phi -= 2.0 * PI;
        }
        Self { theta: PI - self.theta, phi }
    }
}

pub fn bloch_from_angles(angles: PureStateAngles) -> Result<BlochVector> {
    let PureStateAngles { theta, phi } = PureStateAngles::new(angles.theta, angles.phi)?;
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Ok(BlochVector::new_unchecked(st * cp, -st * sp, ct))
}

/// Hermitian, unit-trace, positive semidefinite 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix2 {
    m: [[Complex64; 2]; 2],
}

impl DensityMatrix2 {
    pub fn new(m: [[Complex64; 2]; 2]) -> Result<Self> {
        let rho = Self { m };
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > DENSITY_TOLERANCE || tr.im.abs() > DENSITY_TOLERANCE {
            return Err(domain(format!("density matrix trace {tr} != 1")));
        }
        let herm = (m[0][1] - m[1][0].conj()).norm()
            + m[0][0].im.abs()
            + m[1][1].im.abs();
        if herm > DENSITY_TOLERANCE {
            return Err(domain("density matrix is not Hermitian"));
        }
        let (_, low) = rho.eigenvalues();
        if low < -DENSITY_TOLERANCE {
            return Err(domain(format!("density matrix has eigenvalue {low} < 0")));
        }
        Ok(rho)
    }

    pub fn entries(&self) -> [[Complex64; 2]; 2] {
        self.m
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    /// Eigenvalues `(high, low)` of the Hermitian matrix.
    pub fn eigenvalues(&self) -> (f64, f64) {
        hermitian_eigenvalues(&self.m)
    }

    pub fn to_bloch(&self) -> BlochVector {
        let c = self.m[0][1];
        BlochVector::new_unchecked(2.0 * c.re, -2.0 * c.im, (self.m[0][0] - self.m[1][1]).re)
    }
}

type Mat2 = [[Complex64; 2]; 2];

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn hermitian_eigenvalues(m: &Mat2) -> (f64, f64) {
    let half_trace = 0.5 * (m[0][0].re + m[1][1].re);
    let half_gap = 0.5 * (m[0][0].re - m[1][1].re);
    let r = (half_gap * half_gap + m[0][1].norm_sqr()).sqrt();
    (half_trace + r, half_trace - r)
}

/// Square root of a positive semidefinite Hermitian matrix by spectral
/// decomposition, together with its two eigenvalues `(high, low)`.
fn hermitian_sqrt(m: &Mat2) -> Result<(Mat2, f64, f64)> {
    let (hi, lo) = hermitian_eigenvalues(m);
    if lo < -DENSITY_TOLERANCE {
        return Err(domain(format!("matrix is not positive semidefinite (eigenvalue {lo})")));
    }
    let (hi, lo) = (hi.max(0.0), lo.max(0.0));
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let gap = hi - lo;
    let root = if gap <= f64::EPSILON * hi.max(1.0) {
        let s = Complex64::new(hi.sqrt(), 0.0);
        [[s, zero], [zero, s]]
    } else {
        // P_hi = (m − lo·I)/gap, P_lo = I − P_hi
        let mut p_hi = *m;
        p_hi[0][0] -= lo;
        p_hi[1][1] -= lo;
        let (sh, sl) = (hi.sqrt(), lo.sqrt());
        let mut out = [[zero; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let ph = p_hi[i][j] / gap;
                let id = if i == j { one } else { zero };
                out[i][j] = ph * sh + (id - ph) * sl;
            }
        }
        out
    };
    Ok((root, hi, lo))
}

pub fn density_from_bloch(n: BlochVector) -> Result<DensityMatrix2> {
    n.validate()?;
    let half = 0.5;
    let m = [
        [
            Complex64::new(half * (1.0 + n.z), 0.0),
            Complex64::new(half * n.x, -half * n.y),
        ],
        [
            Complex64::new(half * n.x, half * n.y),
            Complex64::new(half * (1.0 - n.z), 0.0),
        ],
    ];
    // Vectors inside the validity slack may sit a hair outside the PSD cone.
    Ok(DensityMatrix2 { m })
}

/// Uhlmann fidelity from Bloch vectors,
/// `½[1 + n1·n2 + √((1−|n1|²)(1−|n2|²))]`.
pub fn fidelity(n1: BlochVector, n2: BlochVector) -> Result<f64> {
    n1.validate()?;
    n2.validate()?;
    let root = (n1.mixedness() * n2.mixedness()).sqrt();
    Ok((0.5 * (1.0 + n1.dot(&n2) + root)).clamp(0.0, 1.0))
}

/// Fidelity between a state known to be pure and an arbitrary state. The
/// mixedness term vanishes identically, which avoids amplifying rounding in
/// `1 − |n|²` when the result is differentiated numerically.
pub fn fidelity_with_pure(pure: BlochVector, n: BlochVector) -> Result<f64> {
    n.validate()?;
    Ok((0.5 * (1.0 + pure.dot(&n))).clamp(0.0, 1.0))
}

/// Uhlmann fidelity `(Tr √(√ρ1 ρ2 √ρ1))²` evaluated with explicit matrix
/// square roots. Independent of the Bloch-vector formula; used to check it.
pub fn fidelity_matrix_oracle(rho1: &DensityMatrix2, rho2: &DensityMatrix2) -> Result<f64> {
    let (root1, a_hi, a_lo) = hermitian_sqrt(&rho1.m)?;
    let (b_hi, b_lo) = hermitian_eigenvalues(&rho2.m);
    if b_lo < -DENSITY_TOLERANCE {
        return Err(domain(format!("matrix is not positive semidefinite (eigenvalue {b_lo})")));
    }
    let inner = mat_mul(&mat_mul(&root1, &rho2.m), &root1);
    let trace = (inner[0][0] + inner[1][1]).re;
    // det(√ρ1 ρ2 √ρ1) = det ρ1 · det ρ2, taken from the spectra so that the
    // small eigenvalue does not suffer cancellation.
    let det = (a_hi * a_lo) * (b_hi * b_lo.max(0.0));
    let disc = (trace * trace - 4.0 * det).max(0.0).sqrt();
    let mu_hi = 0.5 * (trace + disc);
    let mu_lo = if mu_hi > 0.0 { det / mu_hi } else { 0.0 };
    let root_sum = mu_hi.max(0.0).sqrt() + mu_lo.max(0.0).sqrt();
    Ok(root_sum * root_sum)
}

/// Trace distance `½|n1 − n2|`.
pub fn trace_distance(n1: BlochVector, n2: BlochVector) -> Result<f64> {
    n1.validate()?;
    n2.validate()?;
    Ok((0.5 * (n1 - n2).norm()).min(1.0))
}

impl TryFrom<[f64; 3]> for BlochVector {
    type Error = Error;
    fn try_from(a: [f64; 3]) -> Result<Self> {
        BlochVector::new(a[0], a[1], a[2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn diag(a: f64, b: f64) -> DensityMatrix2 {
        DensityMatrix2::new([[c(a), c(0.0)], [c(0.0), c(b)]]).unwrap()
    }

    #[test]
    fn angles_to_bloch() {
        let n = bloch_from_angles(PureStateAngles::new(0.0, 0.0).unwrap()).unwrap();
        assert_eq!(n.as_array(), [0.0, 0.0, 1.0]);
        let s = bloch_from_angles(PureStateAngles::new(PI, 0.0).unwrap()).unwrap();
        assert_abs_diff_eq!(s.z, -1.0);
        assert_abs_diff_eq!(s.x, 0.0, epsilon = 1e-15);
        let e = bloch_from_angles(PureStateAngles::new(FRAC_PI_2, FRAC_PI_2).unwrap()).unwrap();
        assert_abs_diff_eq!(e.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.y, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.z, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn angles_out_of_range() {
        assert!(PureStateAngles::new(-0.1, 0.0).is_err());
        assert!(PureStateAngles::new(PI + 1e-9, 0.0).is_err());
        assert!(PureStateAngles::new(1.0, 2.0 * PI).is_err());
        assert!(bloch_from_angles(PureStateAngles { theta: 4.0, phi: 0.0 }).is_err());
    }

    #[test]
    fn density_matrices() {
        let up = density_from_bloch(BlochVector::new(0.0, 0.0, 1.0).unwrap()).unwrap();
        assert_eq!(up.entries(), [[c(1.0), c(0.0)], [c(0.0), c(0.0)]]);
        let mixed = density_from_bloch(BlochVector::ORIGIN).unwrap();
        assert_eq!(mixed.entries(), [[c(0.5), c(0.0)], [c(0.0), c(0.5)]]);
        let plus = density_from_bloch(BlochVector::new(1.0, 0.0, 0.0).unwrap()).unwrap();
        for row in plus.entries() {
            for v in row {
                assert_abs_diff_eq!(v.re, 0.5);
                assert_abs_diff_eq!(v.im, 0.0);
            }
        }
        assert!(density_from_bloch(BlochVector::new_unchecked(1.0, 1.0, 0.0)).is_err());
        assert_eq!(plus.to_bloch(), BlochVector::new(1.0, 0.0, 0.0).unwrap());
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix2::new([[c(0.6), c(0.0)], [c(0.0), c(0.6)]]).is_err());
        assert!(DensityMatrix2::new([[c(1.2), c(0.0)], [c(0.0), c(-0.2)]]).is_err());
        let skew = [[c(0.5), Complex64::new(0.1, 0.1)], [Complex64::new(0.1, 0.1), c(0.5)]];
        assert!(DensityMatrix2::new(skew).is_err());
    }

    #[test]
    fn ball_tolerance() {
        assert!(BlochVector::new(0.0, 0.0, 1.0 + 0.5e-9).is_ok());
        assert!(BlochVector::new(0.0, 0.0, 1.0 + 1e-8).is_err());
        assert!(BlochVector::new(f64::NAN, 0.0, 0.0).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let n = BlochVector::new(0.6, 0.0, 0.8).unwrap();
        assert_abs_diff_eq!(fidelity(n, n).unwrap(), 1.0, epsilon = 1e-15);
        let up = BlochVector::new(0.0, 0.0, 1.0).unwrap();
        let down = BlochVector::new(0.0, 0.0, -1.0).unwrap();
        assert_eq!(fidelity(up, down).unwrap(), 0.0);
        let x = BlochVector::new(1.0, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(fidelity(x, BlochVector::ORIGIN).unwrap(), 0.5);
        assert!(fidelity(BlochVector::new_unchecked(2.0, 0.0, 0.0), up).is_err());
    }

    #[test]
    fn matrix_oracle_examples() {
        let up = diag(1.0, 0.0);
        let down = diag(0.0, 1.0);
        let mixed = diag(0.5, 0.5);
        assert_abs_diff_eq!(fidelity_matrix_oracle(&up, &up).unwrap(), 1.0);
        assert_abs_diff_eq!(fidelity_matrix_oracle(&up, &down).unwrap(), 0.0);
        assert_abs_diff_eq!(fidelity_matrix_oracle(&up, &mixed).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn matrix_oracle_rejects_non_psd() {
        let bad = DensityMatrix2 {
            m: [[c(1.1), c(0.0)], [c(0.0), c(-0.1)]],
        };
        let ok = diag(0.5, 0.5);
        assert!(fidelity_matrix_oracle(&bad, &ok).is_err());
        assert!(fidelity_matrix_oracle(&ok, &bad).is_err());
    }

    #[test]
    fn trace_distance_examples() {
        let up = BlochVector::new(0.0, 0.0, 1.0).unwrap();
        let down = BlochVector::new(0.0, 0.0, -1.0).unwrap();
        assert_eq!(trace_distance(up, down).unwrap(), 1.0);
        assert_eq!(trace_distance(up, up).unwrap(), 0.0);
        assert_eq!(trace_distance(up, BlochVector::ORIGIN).unwrap(), 0.5);
    }

    fn ball_point() -> impl Strategy<Value = BlochVector> {
        (0.0..1.0f64, 0.0..PI, 0.0..2.0 * PI).prop_map(|(u, th, ph)| {
            let r = u.cbrt();
            BlochVector::new_unchecked(r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos())
        })
    }

    fn sphere_point() -> impl Strategy<Value = BlochVector> {
        (0.0..=PI, 0.0..2.0 * PI)
            .prop_map(|(th, ph)| bloch_from_angles(PureStateAngles { theta: th, phi: ph }).unwrap())
    }

    proptest! {
        #[test]
        fn fidelity_symmetric(a in ball_point(), b in ball_point()) {
            prop_assert_eq!(fidelity(a, b).unwrap(), fidelity(b, a).unwrap());
        }

        #[test]
        fn fidelity_matches_matrix_oracle(a in ball_point(), b in ball_point()) {
            let f = fidelity(a, b).unwrap();
            let g = fidelity_matrix_oracle(
                &density_from_bloch(a).unwrap(),
                &density_from_bloch(b).unwrap(),
            ).unwrap();
            prop_assert!((f - g).abs() < 1e-10, "{} vs {}", f, g);
        }

        #[test]
        fn trace_distance_metric(a in ball_point(), b in ball_point(), c in ball_point()) {
            let ab = trace_distance(a, b).unwrap();
            prop_assert!((0.0..=1.0).contains(&ab));
            let ac = trace_distance(a, c).unwrap();
            let cb = trace_distance(c, b).unwrap();
            prop_assert!(ab <= ac + cb + 1e-15);
        }

        #[test]
        fn pure_fidelity_and_distance(a in sphere_point(), b in sphere_point()) {
            let f = fidelity(a, b).unwrap();
            let d = trace_distance(a, b).unwrap();
            prop_assert!((f + d * d - 1.0).abs() < 1e-10);
        }
    }
}
