//! Discrete-time quantum walks of one and two photons on a 2D synthetic
//! lattice.
//!
//! A walk is a [`Protocol`], an ordered list of coin plates `C(ω)` and
//! polarization-dependent translation plates `T_x(δ)`, `T_y(δ)`, applied to
//! photons localized on lattice sites. The numerical core is generic over
//! the real type ([`Real`], implemented for `f32` and `f64`); the aliases
//! at the crate root fix it to one of the two.
//!
//! Modules:
//!
//! - [`lattice`], [`protocol`], [`walk`]: modes, plates and unitaries;
//! - [`parser`]: the textual protocol language;
//! - [`single`], [`two_photon`]: one- and two-photon output statistics;
//! - [`analysis`]: similarities, the non-classicality witness, bootstrap;
//! - [`optics`]: bench geometry and loss budget;
//! - [`counts`], [`io`]: coincidence-count correction and file formats.

pub mod analysis;
pub mod counts;
pub mod error;
pub mod io;
pub mod lattice;
pub mod optics;
pub mod parser;
pub mod protocol;
pub mod scalar;
pub mod single;
pub mod two_photon;
pub mod walk;

pub use analysis::{
    linearize_site, similarity_1p, similarity_2p, violation_map, BootstrapConfig, SimilarityResult,
    ViolationEntry, ViolationResult,
};
pub use counts::{correct_counts, CorrectedCounts, CountsMetadata, CountsRecord};
pub use error::{Result, WalkError};
pub use lattice::{CoinState, LatticeExtent, ModeIndex, Site};
pub use parser::{format_protocol, parse_protocol, ParseDiagnostic};
pub use protocol::{Axis, PlateOp, Protocol};
pub use scalar::Real;
pub use single::{InitialStateSpec, Polarization, PositionDistribution};
pub use two_photon::{IndistinguishabilityModel, PositionPairDistribution, TwoPhotonDistribution};
pub use walk::{StepUnitary, WalkState};

pub type WalkState64 = WalkState<f64>;
pub type WalkState32 = WalkState<f32>;
pub type StepUnitary64 = StepUnitary<f64>;
pub type StepUnitary32 = StepUnitary<f32>;
pub type InitialStateSpec64 = InitialStateSpec<f64>;
pub type InitialStateSpec32 = InitialStateSpec<f32>;
pub type PositionDistribution64 = PositionDistribution<f64>;
pub type PositionDistribution32 = PositionDistribution<f32>;
pub type TwoPhotonDistribution64 = TwoPhotonDistribution<f64>;
pub type TwoPhotonDistribution32 = TwoPhotonDistribution<f32>;
pub type PositionPairDistribution64 = PositionPairDistribution<f64>;
pub type PositionPairDistribution32 = PositionPairDistribution<f32>;
pub type IndistinguishabilityModel64 = IndistinguishabilityModel<f64>;
pub type IndistinguishabilityModel32 = IndistinguishabilityModel<f32>;
