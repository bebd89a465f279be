//! Simulation harness and file-based tooling behind the `jointrisk` binary.
//!
//! The binary is a thin clap layer; everything it does is reachable here so
//! tests and the acceptance suite can drive it in-process.

pub mod evaluate;
pub mod figures;
pub mod io;
pub mod model_file;
pub mod simulate;
pub mod stats;
pub mod table1;

pub use model_file::ModelFile;
pub use simulate::{run_simulation, ResultRow, SimulationOutput, SimulationPlan, Status};
