//! Ball-and-gas model, exact-diagonalisation evolution and ergodic
//! time-fraction statistics.

pub mod ball_gas;
pub mod evolution;
pub mod qet;

pub use ball_gas::{BallGasConfig, BallGasModel, Exclusion};
pub use evolution::{check_nondegeneracy, energy_coefficients, evolve, NondegeneracyReport};
pub use qet::{
    cell_weights, check_qet_condition, diagonal_ensemble, ergodic_fraction, min_occupied_gap,
    project_into_shell, qet_time_series, state_from_shell, temporal_std, uniform_times, CellCondition,
    QetTimeSeries, ShellPolicy, ShellState,
};
