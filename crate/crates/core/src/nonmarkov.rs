//! Non-Markovianity diagnostics: trace-distance backflow (BLP measure) and
//! divisibility, both from the signs of the canonical rates and from the
//! complete positivity of intermediate maps.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{bloch_map, decay_rates, AffineBlochMap, ModelSpec};
use crate::dynamics::{bloch_maps, TimeGrid};
use crate::error::{domain, Error, Result};
use crate::qubit::{bloch_from_angles, BlochVector, PureStateAngles};
use crate::speed::ParamRange;

/// Discrete slopes of `D(t)` above this count as backflow.
pub const BACKFLOW_SLOPE: f64 = 1e-10;
/// BLP values at or below this are reported as zero backflow.
pub const BLP_ZERO: f64 = 1e-8;
/// Canonical rates below this are negative.
pub const RATE_THRESHOLD: f64 = -1e-12;
/// Choi eigenvalues below this mark a non-CP intermediate map.
pub const CHOI_THRESHOLD: f64 = -1e-10;
/// `T(s)` with a larger condition number is not inverted.
pub const CONDITION_LIMIT: f64 = 1e12;
/// Default horizon, in units of the model time scale.
pub const DEFAULT_HORIZON: f64 = 10.0;

/// `D(t)` sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDistanceCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

pub type StatePair = (PureStateAngles, PureStateAngles);

pub fn trace_distance_curve(model: &ModelSpec, pair: StatePair, grid: TimeGrid) -> Result<TraceDistanceCurve> {
    let times = grid.times();
    let maps = bloch_maps(model, &times)?;
    let (a, b) = (bloch_from_angles(pair.0)?, bloch_from_angles(pair.1)?);
    let values = maps.iter().map(|m| distance_under(m, a, b)).collect();
    Ok(TraceDistanceCurve { times, values })
}

fn distance_under(map: &AffineBlochMap, a: BlochVector, b: BlochVector) -> f64 {
    // the offset cancels in the difference
    0.5 * (map.m * (a.to_vector() - b.to_vector())).norm()
}

/// Maximal intervals where the discrete slope of `D` exceeds
/// [`BACKFLOW_SLOPE`]. Slopes live at segment midpoints; the ends of an
/// interval are where the linearly interpolated slope crosses the threshold.
pub fn backflow_intervals(curve: &TraceDistanceCurve) -> Vec<Interval> {
    let (t, d) = (&curve.times, &curve.values);
    if t.len() < 3 || t.len() != d.len() {
        return Vec::new();
    }
    let slopes: Vec<(f64, f64)> = t
        .windows(2)
        .zip(d.windows(2))
        .map(|(tw, dw)| (0.5 * (tw[0] + tw[1]), (dw[1] - dw[0]) / (tw[1] - tw[0])))
        .collect();
    let crossing = |(m0, s0): (f64, f64), (m1, s1): (f64, f64)| {
        let f = ((BACKFLOW_SLOPE - s0) / (s1 - s0)).clamp(0.0, 1.0);
        m0 + f * (m1 - m0)
    };
    let (first, last) = (t[0], t[t.len() - 1]);
    let mut out = Vec::new();
    let mut i = 0;
    while i < slopes.len() {
        if slopes[i].1 <= BACKFLOW_SLOPE {
            i += 1;
            continue;
        }
        let start = if i == 0 { first } else { crossing(slopes[i - 1], slopes[i]) };
        let mut j = i;
        while j + 1 < slopes.len() && slopes[j + 1].1 > BACKFLOW_SLOPE {
            j += 1;
        }
        let end = if j + 1 == slopes.len() { last } else { crossing(slopes[j], slopes[j + 1]) };
        out.push(Interval { start: start.max(first), end: end.min(last) });
        i = j + 1;
    }
    out
}

/// `Σ [D(end) − D(start)]` with `D` interpolated linearly on the curve.
pub fn backflow_total(curve: &TraceDistanceCurve, intervals: &[Interval]) -> f64 {
    let at = |x: f64| interpolate(&curve.times, &curve.values, x);
    intervals.iter().map(|iv| at(iv.end) - at(iv.start)).sum::<f64>().max(0.0)
}

fn interpolate(t: &[f64], v: &[f64], x: f64) -> f64 {
    let k = t.partition_point(|&ti| ti <= x).clamp(1, t.len() - 1);
    let f = (x - t[k - 1]) / (t[k] - t[k - 1]);
    v[k - 1] + f * (v[k] - v[k - 1])
}

/// Pure-state pairs searched by [`blp_measure`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PairSearch {
    pub theta_points: usize,
    pub phi_points: usize,
    /// Samples of `D(t)` over the horizon.
    pub time_points: usize,
    /// One golden-section pass in `θ` then `φ` around the best grid pair.
    pub refine: bool,
    /// Every pair of grid states instead of antipodal pairs only.
    pub exhaustive: bool,
}

impl Default for PairSearch {
    fn default() -> Self {
        Self { theta_points: 8, phi_points: 8, time_points: 2000, refine: true, exhaustive: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlpResult {
    pub measure: f64,
    pub optimal_pair: StatePair,
    pub backflow_intervals: Vec<Interval>,
}

/// BLP measure over `[0, horizon]`: the largest total increase of the trace
/// distance over the searched pairs. Interval ends are found on the grid;
/// `D` is then evaluated there from the exact map.
pub fn blp_measure(model: &ModelSpec, horizon: f64, search: PairSearch) -> Result<BlpResult> {
    model.validate()?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(domain(format!("horizon {horizon} must be finite and > 0")));
    }
    if search.theta_points < 2 || search.phi_points < 1 {
        return Err(domain("pair search needs >= 2 theta and >= 1 phi points"));
    }
    let grid = TimeGrid::new(0.0, horizon, search.time_points)?;
    let times = grid.times();
    let maps = bloch_maps(model, &times)?;
    let score = |pair: StatePair| -> Result<(f64, Vec<Interval>)> {
        let (a, b) = (bloch_from_angles(pair.0)?, bloch_from_angles(pair.1)?);
        let curve = TraceDistanceCurve {
            times: times.clone(),
            values: maps.iter().map(|m| distance_under(m, a, b)).collect(),
        };
        let intervals = backflow_intervals(&curve);
        let mut total = 0.0;
        for iv in &intervals {
            let d = |t: f64| bloch_map(model, t).map(|m| distance_under(&m, a, b));
            total += d(iv.end)? - d(iv.start)?;
        }
        Ok((total.max(0.0), intervals))
    };

    let theta_max = if search.exhaustive { std::f64::consts::PI } else { std::f64::consts::FRAC_PI_2 };
    let tau = std::f64::consts::TAU;
    let mut states = Vec::new();
    for i in 0..search.theta_points {
        for j in 0..search.phi_points {
            let theta = theta_max * i as f64 / (search.theta_points - 1) as f64;
            let phi = tau * j as f64 / search.phi_points as f64;
            states.push(PureStateAngles::new(theta, phi)?);
        }
    }
    let pairs: Vec<StatePair> = if search.exhaustive {
        let mut v = Vec::new();
        for (i, a) in states.iter().enumerate() {
            for b in &states[i + 1..] {
                v.push((*a, *b));
            }
        }
        v
    } else {
        states.iter().map(|a| (*a, a.antipode())).collect()
    };

    let mut best: Option<(f64, StatePair, Vec<Interval>)> = None;
    for pair in pairs {
        let (n, iv) = score(pair)?;
        if best.as_ref().is_none_or(|b| n > b.0) {
            best = Some((n, pair, iv));
        }
    }
    let (mut measure, mut pair, mut intervals) = best.ok_or_else(|| Error::Internal("no pairs searched".into()))?;

    if search.refine && !search.exhaustive {
        let d_theta = theta_max / (search.theta_points - 1) as f64;
        let d_phi = tau / search.phi_points as f64;
        let antipodal = |theta: f64, phi: f64| -> Result<StatePair> {
            let a = PureStateAngles::new(theta, phi.rem_euclid(tau))?;
            Ok((a, a.antipode()))
        };
        let phi0 = pair.0.phi;
        let (lo, hi) = ((pair.0.theta - d_theta).max(0.0), (pair.0.theta + d_theta).min(theta_max));
        let theta = golden_max(lo, hi, |th| Ok(score(antipodal(th, phi0)?)?.0))?;
        let phi = golden_max(phi0 - d_phi, phi0 + d_phi, |ph| Ok(score(antipodal(theta, ph)?)?.0))?;
        let candidate = antipodal(theta, phi)?;
        let (n, iv) = score(candidate)?;
        if n > measure {
            (measure, pair, intervals) = (n, candidate, iv);
        }
    }
    Ok(BlpResult { measure, optimal_pair: pair, backflow_intervals: intervals })
}

fn golden_max<F: FnMut(f64) -> Result<f64>>(mut lo: f64, mut hi: f64, mut f: F) -> Result<f64> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    for _ in 0..40 {
        if f1 >= f2 {
            hi = x2;
            (x2, f2) = (x1, f1);
            x1 = hi - r * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            (x1, f1) = (x2, f2);
            x2 = lo + r * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { x1 } else { x2 })
}

/// Evidence that a dynamics is not CP-divisible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Canonical rate `index` (0-based, `γ1..γ3`) negative at `t`.
    Rate { index: usize, t: f64, rate: f64 },
    /// Intermediate map `Λ(t, s)` with a negative Choi eigenvalue.
    Choi { s: f64, t: f64, min_eigenvalue: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Divisibility {
    Divisible,
    Indivisible { witness: Witness },
}

impl Divisibility {
    pub fn is_indivisible(&self) -> bool {
        matches!(self, Divisibility::Indivisible { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivisibilityReport {
    pub divisibility: Divisibility,
    /// Grid points left out because a rate or `T(s)⁻¹` was singular there.
    pub skipped: Vec<f64>,
}

/// Divisible iff every canonical rate is `≥ −1e-12` on the grid. Points
/// with divergent rates are skipped and listed.
pub fn rate_sign_divisibility(model: &ModelSpec, grid: TimeGrid) -> Result<DivisibilityReport> {
    model.validate()?;
    let mut skipped = Vec::new();
    for t in grid.times() {
        let rates = match decay_rates(model, t) {
            Ok(r) => r,
            Err(Error::SingularRate { .. }) => {
                skipped.push(t);
                continue;
            }
            Err(e) => return Err(e),
        };
        if let Some((index, &rate)) = rates.gamma.iter().enumerate().find(|(_, g)| **g < RATE_THRESHOLD) {
            return Ok(DivisibilityReport {
                divisibility: Divisibility::Indivisible { witness: Witness::Rate { index, t, rate } },
                skipped,
            });
        }
    }
    if skipped.len() == grid.n_points {
        return Err(Error::SingularRate { t: grid.t0 });
    }
    Ok(DivisibilityReport { divisibility: Divisibility::Divisible, skipped })
}

/// Pauli transfer matrix `[[1, 0], [b, M]]` of a map on `r = (1, n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTransferMatrix(pub Matrix4<f64>);

impl PauliTransferMatrix {
    pub fn identity() -> Self {
        Self(Matrix4::identity())
    }

    pub fn from_affine(map: &AffineBlochMap) -> Self {
        let mut t = Matrix4::zeros();
        t[(0, 0)] = 1.0;
        for i in 0..3 {
            t[(i + 1, 0)] = map.b[i];
            for j in 0..3 {
                t[(i + 1, j + 1)] = map.m[(i, j)];
            }
        }
        Self(t)
    }

    pub fn diagonal(l1: f64, l2: f64, l3: f64) -> Self {
        Self(Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, l1, l2, l3)))
    }

    /// Ratio of largest to smallest singular value.
    pub fn condition_number(&self) -> f64 {
        let sv = self.0.singular_values();
        let (max, min) = (sv.max(), sv.min());
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }
}

pub fn ptm(model: &ModelSpec, t: f64) -> Result<PauliTransferMatrix> {
    Ok(PauliTransferMatrix::from_affine(&bloch_map(model, t)?))
}

/// `T(t) T(s)⁻¹`, the map taking the state at `s` to the state at `t`.
pub fn intermediate_map(model: &ModelSpec, s: f64, t: f64) -> Result<PauliTransferMatrix> {
    if !(0.0 <= s && s <= t) {
        return Err(domain(format!("need 0 <= s <= t, got s = {s}, t = {t}")));
    }
    intermediate_from(&ptm(model, s)?, &ptm(model, t)?, s)
}

fn intermediate_from(ts: &PauliTransferMatrix, tt: &PauliTransferMatrix, s: f64) -> Result<PauliTransferMatrix> {
    let condition = ts.condition_number();
    if !(condition < CONDITION_LIMIT) {
        return Err(Error::SingularIntermediate { s, condition });
    }
    let inv = ts
        .0
        .try_inverse()
        .ok_or(Error::SingularIntermediate { s, condition })?;
    Ok(PauliTransferMatrix(tt.0 * inv))
}

fn pauli_matrices() -> [Matrix2<Complex64>; 4] {
    let (o, l, i) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0));
    [
        Matrix2::new(l, o, o, l),
        Matrix2::new(o, l, l, o),
        Matrix2::new(o, -i, i, o),
        Matrix2::new(l, o, o, -l),
    ]
}

/// Choi matrix `¼ Σ T[ν,μ] σ_μᵀ ⊗ σ_ν`, of unit trace.
pub fn choi_matrix(t: &PauliTransferMatrix) -> Matrix4<Complex64> {
    let sigma = pauli_matrices();
    let mut c = Matrix4::<Complex64>::zeros();
    for (mu, s_mu) in sigma.iter().enumerate() {
        for (nu, s_nu) in sigma.iter().enumerate() {
            let w = t.0[(nu, mu)];
            if w != 0.0 {
                c += s_mu.transpose().kronecker(s_nu) * Complex64::new(0.25 * w, 0.0);
            }
        }
    }
    c
}

pub fn choi_min_eigenvalue(t: &PauliTransferMatrix) -> Result<f64> {
    let c = choi_matrix(t);
    let skew = (c - c.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if skew > 1e-10 {
        return Err(Error::Internal(format!("Choi matrix is not Hermitian (deviation {skew:e})")));
    }
    let eig = c.symmetric_eigen();
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Triangular `(s, t)` grid: `s = kH/n` for `k < n`, `t = jH/n` for `j > k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StGrid {
    pub horizon: f64,
    pub n: usize,
}

impl StGrid {
    pub fn new(horizon: f64, n: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) || n < 1 {
            return Err(domain("an (s, t) grid needs horizon > 0 and n >= 1"));
        }
        Ok(Self { horizon, n })
    }

    pub fn default_for(model: &ModelSpec) -> Self {
        Self { horizon: DEFAULT_HORIZON * model.time_scale(), n: 40 }
    }

    fn times(&self) -> Vec<f64> {
        (0..=self.n).map(|k| self.horizon * k as f64 / self.n as f64).collect()
    }
}

/// Divisible iff every intermediate map on the grid has Choi eigenvalues
/// `≥ −1e-10`. Ill-conditioned `T(s)` rows are skipped; the most negative
/// eigenvalue found is the witness.
pub fn cp_divisibility_scan(model: &ModelSpec, grid: StGrid) -> Result<DivisibilityReport> {
    model.validate()?;
    let times = grid.times();
    let ptms: Vec<PauliTransferMatrix> = bloch_maps(model, &times)?
        .iter()
        .map(PauliTransferMatrix::from_affine)
        .collect();
    let mut skipped = Vec::new();
    let mut worst: Option<Witness> = None;
    let mut worst_value = f64::INFINITY;
    for k in 0..grid.n {
        let s = times[k];
        for j in k + 1..=grid.n {
            let tilde = match intermediate_from(&ptms[k], &ptms[j], s) {
                Ok(m) => m,
                Err(Error::SingularIntermediate { .. }) => {
                    skipped.push(s);
                    break;
                }
                Err(e) => return Err(e),
            };
            let e = choi_min_eigenvalue(&tilde)?;
            if e < worst_value {
                worst_value = e;
                worst = Some(Witness::Choi { s, t: times[j], min_eigenvalue: e });
            }
        }
    }
    if skipped.len() == grid.n {
        return Err(Error::SingularIntermediate { s: 0.0, condition: f64::INFINITY });
    }
    let divisibility = match worst {
        Some(witness) if worst_value < CHOI_THRESHOLD => Divisibility::Indivisible { witness },
        _ => Divisibility::Divisible,
    };
    Ok(DivisibilityReport { divisibility, skipped })
}

/// Everything the crate says about the memory effects of one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonMarkovReport {
    pub model: String,
    pub horizon: f64,
    pub blp_measure: f64,
    pub backflow_intervals: Vec<Interval>,
    pub optimal_pair: StatePair,
    pub pair_search: PairSearch,
    pub rate_divisibility: DivisibilityReport,
    pub cp_divisibility: DivisibilityReport,
}

impl NonMarkovReport {
    pub fn has_backflow(&self) -> bool {
        self.blp_measure > BLP_ZERO
    }
}

pub fn analyze(model: &ModelSpec, horizon: f64, search: PairSearch, st: StGrid) -> Result<NonMarkovReport> {
    let blp = blp_measure(model, horizon, search)?;
    let rate_grid = TimeGrid::new(0.0, horizon, search.time_points)?;
    Ok(NonMarkovReport {
        model: model.to_string(),
        horizon,
        blp_measure: blp.measure,
        backflow_intervals: blp.backflow_intervals,
        optimal_pair: blp.optimal_pair,
        pair_search: search,
        rate_divisibility: rate_sign_divisibility(model, rate_grid)?,
        cp_divisibility: cp_divisibility_scan(model, st)?,
    })
}

/// Which property a transition search tracks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Criterion {
    /// `blp_measure > BLP_ZERO` over the horizon.
    Backflow { horizon: f64, search: PairSearch },
    /// CP-indivisible on the `(s, t)` grid.
    CpIndivisible { grid: StGrid },
    /// A negative canonical rate on the time grid.
    RateSign { grid: TimeGrid },
}

impl Criterion {
    pub fn holds(&self, model: &ModelSpec) -> Result<bool> {
        Ok(match *self {
            Criterion::Backflow { horizon, search } => blp_measure(model, horizon, search)?.measure > BLP_ZERO,
            Criterion::CpIndivisible { grid } => cp_divisibility_scan(model, grid)?.divisibility.is_indivisible(),
            Criterion::RateSign { grid } => rate_sign_divisibility(model, grid)?.divisibility.is_indivisible(),
        })
    }
}

/// Values of `parameter` where `criterion` switches, located by scanning
/// `range` and bisecting each switch down to `tol`.
pub fn locate_transitions(
    template: &ModelSpec,
    parameter: &str,
    range: ParamRange,
    criterion: Criterion,
    tol: f64,
) -> Result<Vec<f64>> {
    range.validate()?;
    if !(tol > 0.0) {
        return Err(domain("bisection tolerance must be > 0"));
    }
    let eval = |v: f64| criterion.holds(&template.with_parameter(parameter, v)?);
    let values = range.values();
    let flags = values.iter().map(|&v| eval(v)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for k in 1..values.len() {
        if flags[k] != flags[k - 1] {
            out.push(bisect(values[k - 1], values[k], flags[k - 1], tol, eval)?);
        }
    }
    Ok(out)
}

/// Bisection for the switch of a boolean property between `lo` (where it
/// equals `at_lo`) and `hi`.
pub fn bisect<F: Fn(f64) -> Result<bool>>(mut lo: f64, mut hi: f64, at_lo: bool, tol: f64, f: F) -> Result<f64> {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid)? == at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
