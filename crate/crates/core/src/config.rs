use serde::{Deserialize, Serialize};

/// Every numerical threshold used by the library, in one place.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Accepted `unitarity_defect` when wrapping a matrix as a gate.
    pub unitarity: f64,
    /// Smallest singular value, relative to the largest, accepted by the polar projection.
    pub rank: f64,
    /// Defect below which a rearrangement counts as unitary in duality classification.
    pub classification: f64,
    /// Linear entropy below which a column state counts as a product state.
    pub product: f64,
    /// Overlap modulus above `1 - phase_identity` means two vectors agree up to phase.
    pub phase_identity: f64,
    /// Entry magnitude defining the support pattern for block detection.
    pub support: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            unitarity: 1e-10,
            rank: 1e-12,
            classification: 1e-8,
            product: 1e-8,
            phase_identity: 1e-8,
            support: 1e-6,
        }
    }
}
