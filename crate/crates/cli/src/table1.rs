//! Reproduction report for the summary table: closed-form initial speeds
//! against finite differences, region claims against the numerical
//! diagnostics and the monotonicity of `v(0)²` in each driving parameter.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6};
use std::fmt::Write as _;

use qdyn_core::nonmarkov::{blp_measure, cp_divisibility_scan, StGrid, BLP_ZERO};
use qdyn_core::{
    initial_speed_scan, initial_speed_squared_closed_form, speed_squared_fd, table1_region, ModelSpec, Monotonicity,
    PairSearch, ParamRange, PureStateAngles, RegionVerdict,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::run::CONVENTION;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Table1Settings {
    /// Finite-difference step of the forward stencil at `t = 0`.
    pub h: f64,
    /// Allowed `|fd − closed| / max(|closed|, 1)`.
    pub fd_rel: f64,
    /// Horizon of the region diagnostics, in model time units.
    pub horizon: f64,
    pub st_points: usize,
    pub pair_search: PairSearch,
    /// Multiplies the Ohmic closed form, i.e. perturbs `Γ(s+1)`. Only for
    /// checking that the report catches a wrong formula.
    pub ohmic_gamma_scale: f64,
}

impl Default for Table1Settings {
    fn default() -> Self {
        Self {
            h: 1e-4,
            fd_rel: 1e-3,
            horizon: 10.0,
            st_points: 40,
            pair_search: PairSearch::default(),
            ohmic_gamma_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedCheck {
    pub value: f64,
    pub theta: f64,
    pub closed_form: f64,
    pub finite_difference: f64,
    pub error: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComputedRegion {
    pub indivisible: bool,
    pub backflow: bool,
    pub blp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionCheck {
    pub value: f64,
    pub claimed: RegionVerdict,
    pub computed: ComputedRegion,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityCheck {
    pub model: ModelSpec,
    pub range: ParamRange,
    pub expected: Monotonicity,
    pub found: Monotonicity,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub row: usize,
    pub model: ModelSpec,
    pub parameter: String,
    pub speed_checks: Vec<SpeedCheck>,
    pub region_checks: Vec<RegionCheck>,
    pub monotonicity: Vec<MonotonicityCheck>,
    /// Computation errors, each of which fails the row.
    pub diagnostics: Vec<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Report {
    pub convention: String,
    pub settings: Table1Settings,
    pub rows: Vec<Table1Row>,
    pub passed: bool,
}

struct RowSpec {
    model: ModelSpec,
    values: Vec<f64>,
    scans: Vec<(ModelSpec, ParamRange, Monotonicity)>,
}

const THETAS: [f64; 3] = [FRAC_PI_6, FRAC_PI_2, 5.0 * FRAC_PI_6];

fn row_specs() -> Vec<RowSpec> {
    let photon = |omega1, omega2| ModelSpec::PolarizationDephasing { delta_n: 1.0, sigma: 0.3, omega1, omega2, xi: 0.0 };
    let jc = |delta| ModelSpec::JaynesCummings { lambda: 1.0, gamma_m: 1.0, delta };
    let tanh = ModelSpec::PauliTanh { lambda: 1.0, omega: 0.5 };
    let tan = ModelSpec::PauliTan { lambda: 1.0, omega: 1.0 };
    let ohmic = ModelSpec::OhmicDephasing { omega_c: 1.0, s: 1.0 };
    use Monotonicity::*;
    vec![
        RowSpec {
            model: ohmic,
            values: vec![0.5, 1.0, 2.0, 3.0, 4.0],
            scans: vec![(ohmic, ParamRange::closed(2.05, 5.0, 64), StrictlyIncreasing)],
        },
        RowSpec {
            model: photon(1.0, 2.0),
            values: vec![0.0, FRAC_PI_4, FRAC_PI_2],
            scans: vec![
                (photon(1.0, 2.0), ParamRange::closed(0.0, FRAC_PI_2, 64), StrictlyIncreasing),
                (photon(2.0, 1.0), ParamRange::closed(0.0, FRAC_PI_2, 64), StrictlyDecreasing),
            ],
        },
        RowSpec {
            model: jc(0.0),
            values: vec![0.1, 0.5, 1.0, 5.0],
            scans: vec![(jc(0.0), ParamRange::closed(0.6, 5.0, 64), StrictlyIncreasing)],
        },
        RowSpec { model: jc(0.5), values: vec![1.0], scans: vec![] },
        RowSpec {
            model: tanh,
            values: vec![0.0, 0.5, 1.0],
            scans: vec![(tanh, ParamRange::open_start(0.0, 1.0, 64), StrictlyDecreasing)],
        },
        RowSpec {
            model: tan,
            values: vec![0.0, 1.0, 2.0],
            scans: vec![(tan, ParamRange::open_start(0.0, 3.0, 64), StrictlyIncreasing)],
        },
    ]
}

/// Relative error with a unit floor on the scale.
pub fn speed_error(fd: f64, closed: f64) -> f64 {
    (fd - closed).abs() / closed.abs().max(1.0)
}

/// Runs every row. Failures are recorded in the rows, never raised.
pub fn table1_report(settings: &Table1Settings) -> Table1Report {
    let rows: Vec<Table1Row> = row_specs()
        .into_par_iter()
        .enumerate()
        .map(|(i, spec)| run_row(i + 1, spec, settings))
        .collect();
    let passed = rows.iter().all(|r| r.passed);
    Table1Report { convention: CONVENTION.to_string(), settings: *settings, rows, passed }
}

fn run_row(row: usize, spec: RowSpec, settings: &Table1Settings) -> Table1Row {
    let parameter = spec.model.driving_parameter().to_string();
    let mut diagnostics = Vec::new();
    let mut speed_checks = Vec::new();
    let mut region_checks = Vec::new();
    for &value in &spec.values {
        let model = match spec.model.with_parameter(&parameter, value) {
            Ok(m) => m,
            Err(e) => {
                diagnostics.push(format!("{parameter} = {value}: {e}"));
                continue;
            }
        };
        for theta in THETAS {
            match speed_check(&model, value, theta, settings) {
                Ok(c) => speed_checks.push(c),
                Err(e) => diagnostics.push(format!("{model}, theta = {theta}: {e}")),
            }
        }
        match region_check(&model, value, settings) {
            Ok(c) => region_checks.push(c),
            Err(e) => diagnostics.push(format!("{model} regions: {e}")),
        }
    }
    let mut monotonicity = Vec::new();
    for (model, range, expected) in spec.scans {
        match initial_speed_scan(&model, &parameter, range, FRAC_PI_2) {
            Ok(r) => monotonicity.push(MonotonicityCheck {
                model,
                range,
                expected,
                found: r.verdict,
                passed: r.verdict == expected,
            }),
            Err(e) => diagnostics.push(format!("{model} monotonicity: {e}")),
        }
    }
    let passed = diagnostics.is_empty()
        && speed_checks.iter().all(|c| c.passed)
        && region_checks.iter().all(|c| c.passed)
        && monotonicity.iter().all(|c| c.passed);
    Table1Row { row, model: spec.model, parameter, speed_checks, region_checks, monotonicity, diagnostics, passed }
}

fn speed_check(model: &ModelSpec, value: f64, theta: f64, settings: &Table1Settings) -> qdyn_core::Result<SpeedCheck> {
    let mut closed_form = initial_speed_squared_closed_form(model, theta)?;
    if matches!(model, ModelSpec::OhmicDephasing { .. }) {
        closed_form *= settings.ohmic_gamma_scale;
    }
    let angles = PureStateAngles::new(theta, 0.0)?;
    let finite_difference = speed_squared_fd(model, angles, 0.0, settings.h)?.sample.v_squared;
    let error = speed_error(finite_difference, closed_form);
    Ok(SpeedCheck { value, theta, closed_form, finite_difference, error, passed: error <= settings.fd_rel })
}

fn region_check(model: &ModelSpec, value: f64, settings: &Table1Settings) -> qdyn_core::Result<RegionCheck> {
    let claimed = table1_region(model)?;
    let horizon = settings.horizon * model.time_scale();
    let blp = blp_measure(model, horizon, settings.pair_search)?.measure;
    let cp = cp_divisibility_scan(model, StGrid::new(horizon, settings.st_points)?)?;
    let computed = ComputedRegion { indivisible: cp.divisibility.is_indivisible(), backflow: blp > BLP_ZERO, blp };
    let agrees = |claim: qdyn_core::Claim, found: bool| claim.as_bool().is_none_or(|c| c == found);
    let passed = agrees(claimed.indivisible, computed.indivisible) && agrees(claimed.backflow, computed.backflow);
    Ok(RegionCheck { value, claimed, computed, passed })
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Human-readable rendering of the report.
pub fn render_text(report: &Table1Report) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# {}", report.convention);
    let st = &report.settings;
    let _ = writeln!(s, "# h = {:e}, fd tolerance = {:e}, horizon = {} time units", st.h, st.fd_rel, st.horizon);
    for row in &report.rows {
        let _ = writeln!(s, "\nrow {}: {} ({}) {}", row.row, row.model.name(), row.parameter, verdict(row.passed));
        for c in &row.speed_checks {
            let _ = writeln!(
                s,
                "  v0^2 {} = {:<8.5} theta = {:.4}: closed {:+.10e} fd {:+.10e} err {:.2e} {}",
                row.parameter,
                c.value,
                c.theta,
                c.closed_form,
                c.finite_difference,
                c.error,
                verdict(c.passed)
            );
        }
        for c in &row.region_checks {
            let _ = writeln!(
                s,
                "  region {} = {:<8.5}: claimed indivisible {:?} backflow {:?}; computed indivisible {} backflow {} (blp {:.3e}) {}",
                row.parameter,
                c.value,
                c.claimed.indivisible,
                c.claimed.backflow,
                c.computed.indivisible,
                c.computed.backflow,
                c.computed.blp,
                verdict(c.passed)
            );
        }
        for c in &row.monotonicity {
            let _ = writeln!(
                s,
                "  monotonicity in {} on {}{}, {}] ({} points, theta = pi/2, varying {}): expected {:?} found {:?} {}",
                row.parameter,
                if c.range.open_start { "(" } else { "[" },
                c.range.start,
                c.range.end,
                c.range.n_points,
                c.model,
                c.expected,
                c.found,
                verdict(c.passed)
            );
        }
        for d in &row.diagnostics {
            let _ = writeln!(s, "  error: {d}");
        }
    }
    let _ = writeln!(s, "\noverall: {}", verdict(report.passed));
    s
}
