//! Energy-aware flexible job-shop scheduling with machine multi-states.
//!
//! Operations choose a machine and a speed gear; jobs pay a setup whenever a
//! machine switches to them; machines between operations either idle at a low
//! gear or drop to standby. [`optimizer::run`] searches the trade-off between
//! makespan and total energy with the D-DEPSO swarm, and [`oracle`] gives the
//! exact front for instances small enough to enumerate.

pub mod benchmark;
pub mod encoding;
pub mod energy;
pub mod local_search;
pub mod metrics;
pub mod model;
pub mod optimizer;
pub mod oracle;
pub mod sample;

pub use encoding::{decode, Chromosome, MessageMatrices};
pub use energy::{total_energy, EnergyBreakdown};
pub use model::{ProblemInstance, ScheduleTable, ScheduledRow, Time};
pub use optimizer::{run, AlgorithmConfig, Objectives, ParetoArchive};
