//! Two-qubit teleportation resources under noisy channels, weak measurement
//! and measurement reversal.

pub mod channels;
pub mod error;
pub mod experiments;
pub mod matkernel;
pub mod metrics;
pub mod states;
pub mod weakmeas;

pub use channels::{noise_function, KrausSet, NoiseFamily, NoiseModel, Regime};
pub use error::{Error, Result};
pub use experiments::{GridCell, MetricSeries, Scenario};
pub use matkernel::{Complex, ComplexMatrix};
pub use metrics::MetricRecord;
pub use states::{BellTypeParams, CorrelationMatrix, TwoQubitState};
pub use weakmeas::{MeasurementMode, ProtocolOutcome, WeakMeasConfig};
