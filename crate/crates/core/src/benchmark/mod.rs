//! Benchmark plumbing: classic FJSP base files, the multi-state extension and
//! the JSON instance format.

pub mod base;
pub mod generator;
pub mod instance_file;

pub use base::{parse_base, random_base, write_base, BaseFjspInstance, BaseOption, BaseShape, ParseError};
pub use generator::{extend_instance, GeneratorError, GeneratorParams, Range};
pub use instance_file::{read_instance, write_instance, InstanceFileError, Real, INSTANCE_SCHEMA_VERSION};

/// A 10-job, 6-machine base in the size class of the smallest classic
/// Brandimarte instance (randomly generated, not the published data).
pub const MK_SIZED_BASE: &str = include_str!("../../data/mk_10x6.fjs");

/// A 10-job, 5-machine base with 15-25 operations per job, in the size class of
/// the classic Dauzère-Pérès instances (randomly generated).
pub const DP_SIZED_BASE: &str = include_str!("../../data/dp_10x5.fjs");
