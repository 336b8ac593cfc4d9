//! Lorentzian geometry of genus-2 surfaces: so(2,1) algebra, Fuchsian representations,
//! measured multicurves, earthquakes and discrete p-Schatten harmonic maps.

pub mod cocycle;
pub mod dd;
pub mod earthquake;
pub mod error;
pub mod fuchsian;
pub mod lamination;
pub mod lorentz;
pub mod mesh;
pub mod pharmonic;
pub mod tol;

pub use error::{Error, Result};
pub use lorentz::{GroupElem, LieAlg, MinkVec};
