//! One-particle quantum lattice gas automaton in one dimension: evolution
//! operators on rings and bounded segments, gauge structure, spectra and
//! spectral flow, wave-packet frequency measurement, and a topology-detection
//! experiment with its classical baseline.

pub mod angles;
pub mod cli;
pub mod error;
pub mod evolution;
pub mod experiment;
pub mod gauge;
pub mod lattice;
pub mod spectral;
pub mod wavepacket;

pub use error::{QlgaError, Result};
pub use evolution::{build_evolution, EvolutionOperator};
pub use lattice::{FieldConfig, GaugeFunction, Lattice, MassAngle, Mover, Topology, WaveFunction};
pub use spectral::{dispersion, flow_count, spectral_flow, spectrum, SpectralFlowResult, Spectrum};
