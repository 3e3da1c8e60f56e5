//! Single-qubit open-system dynamics.
//!
//! The crate models five qubit channels (two pure-dephasing baths, the
//! Jaynes–Cummings amplitude-damping model and two Pauli channels), evolves states under their exact maps or by integrating the
//! time-local master equation, and measures the speed of evolution from the
//! curvature of the fidelity together with two non-Markovianity diagnostics:
//! trace-distance backflow and CP-divisibility of intermediate maps.
//!
//! ```
//! use qdyn_core::{bloch_from_angles, blp_measure, trajectory, ModelSpec, PairSearch, PureStateAngles, TimeGrid};
//!
//! # fn main() -> qdyn_core::Result<()> {
//! let model = ModelSpec::OhmicDephasing { omega_c: 1.0, s: 3.0 };
//! let n0 = bloch_from_angles(PureStateAngles::new(std::f64::consts::FRAC_PI_2, 0.0)?)?;
//! let traj = trajectory(&model, n0, TimeGrid::new(0.0, 10.0, 2000)?)?;
//! let blp = blp_measure(&model, 10.0, PairSearch::default())?;
//! assert_eq!(traj.states.len(), 2000);
//! assert!(blp.measure > 1e-3);
//! # Ok(())
//! # }
//! ```

pub mod channel;
pub mod dynamics;
pub mod error;
pub mod nonmarkov;
mod ode;
pub mod qubit;
pub mod special;
pub mod speed;

pub use channel::{
    bloch_map, decay_rates, decoherence_function, initial_speed_squared_closed_form,
    pauli_eigenvalues, table1_region, AffineBlochMap, Claim, Family, ModelSpec, RateVector,
    RegionVerdict,
};
pub use dynamics::{bloch_maps, evolve, generator, ode_oracle_trajectory, trajectory, TimeGrid, Trajectory};
pub use error::{Error, Result};
pub use nonmarkov::{
    analyze, backflow_intervals, blp_measure, choi_matrix, choi_min_eigenvalue, cp_divisibility_scan,
    intermediate_map, locate_transitions, ptm, rate_sign_divisibility, trace_distance_curve,
    Divisibility, DivisibilityReport, NonMarkovReport, PairSearch, PauliTransferMatrix, StGrid,
    Witness,
};
pub use speed::{
    analytic_speed_squared, fidelity_to_initial, initial_speed_scan, speed_squared_fd, FdSpeed,
    Monotonicity, MonotonicityReport, ParamRange, SpeedSample,
};
pub use qubit::{
    bloch_from_angles, density_from_bloch, fidelity, fidelity_matrix_oracle, trace_distance,
    BlochVector, DensityMatrix2, PureStateAngles,
};
