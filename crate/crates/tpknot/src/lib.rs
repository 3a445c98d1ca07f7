//! Numerical toolkit for discrete closed curves on R/Z: scale-invariant
//! tangent-point energies, their tangent-field reformulation, fractional
//! Gagliardo seminorms, first-variation machinery, energy-descent flow with
//! an embeddedness guard, energy-concentration detection, and band gluing of
//! sampled fields.
//!
//! All double sums use the periodic product trapezoid rule with the diagonal
//! excluded and reduce pairwise in a fixed order, so results are reproducible
//! independent of threading.

pub mod curve;
pub mod energy;
pub mod error;
pub mod flow;
pub mod gluing;
pub mod quad;
pub mod sobolev;
pub mod variation;
pub mod vec3;
pub mod verify;
pub mod zoo;

pub use curve::{geodesic_distance, Curve, EnergyParams, Interval, TangentField};
pub use energy::{
    e_energy, k_factor, mu_kernel, tangent_point_radius, tp_energy, tp_energy_local,
    tp_equals_e_check, EnergyValue, LocalMode,
};
pub use error::{KnotError, Result};
pub use flow::{detect_concentration, lsc_probe, minimize, FlowConfig, FlowTrace};
pub use gluing::{comparison_map, luckhaus_estimate_report, luckhaus_glue, LineField};
pub use sobolev::{
    embedding_check, gagliardo_seminorm, gap_estimate_report, identification_averaged,
    identification_taylor, SeminormDomain, SeminormSpec,
};
pub use variation::{
    el_breakdown, fd_variation_oracle, tp_first_variation, tp_gradient, ElBreakdown,
    EtaWeight, VariationField,
};
pub use vec3::Vec3;
