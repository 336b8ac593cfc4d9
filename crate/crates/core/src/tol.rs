//! Default tolerances. Functions that take a tolerance accept these as defaults.

use serde::{Deserialize, Serialize};

/// Hyperboloid membership, |(X,X) + 1|.
pub const HYPERBOLOID: f64 = 1e-9;
/// Group element checks, ‖gᵀe♯g − e♯‖.
pub const GROUP: f64 = 1e-10;
/// Lie algebra checks, ‖A♯ + A‖.
pub const LIE: f64 = 1e-10;
/// |Tr g − 3| below this is treated as parabolic.
pub const HYPERBOLIC: f64 = 1e-10;
/// Relator residual for a valid representation.
pub const RELATOR: f64 = 1e-9;
/// Relator tangency for a valid cocycle.
pub const TANGENCY: f64 = 1e-8;
/// Central difference step.
pub const FD_STEP: f64 = 1e-4;
/// Below |k| = |½ Tr A²| the exponential uses its Taylor branch.
pub const EXP_TAYLOR: f64 = 1e-8;
/// Matching of identified boundary vertices.
pub const PAIRING: f64 = 1e-9;

/// The tolerance set embedded in reports.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ToleranceSet {
    pub hyperboloid: f64,
    pub group: f64,
    pub lie: f64,
    pub hyperbolic: f64,
    pub relator: f64,
    pub tangency: f64,
    pub fd_step: f64,
    pub pairing: f64,
}

impl Default for ToleranceSet {
    fn default() -> Self {
        Self {
            hyperboloid: HYPERBOLOID,
            group: GROUP,
            lie: LIE,
            hyperbolic: HYPERBOLIC,
            relator: RELATOR,
            tangency: TANGENCY,
            fd_step: FD_STEP,
            pairing: PAIRING,
        }
    }
}
