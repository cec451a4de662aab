//! Construction and numerical verification of a radial metric of class C^{2,1}
//! that admits only a C^{1,1} rotationally symmetric isometric embedding, together
//! with the accumulating-disc metric built from it.
//!
//! Modules, bottom-up:
//!
//! - [`profile`]: the radial profiles `f` and their exact derivatives.
//! - [`curvature`]: Gauss curvature of `dρ² + f²dθ²` by three routes.
//! - [`embedding`]: the surface-of-revolution embedding, its meshes and residuals.
//! - [`assembly`]: the disc layout and the Cartesian metric field `h`.
//! - [`regularity`]: norm estimates, decay fits and tail sums per disc.
//! - [`lemma_lab`]: empirical harnesses for the supporting geometric lemmas.
//! - [`verify`]: the acceptance checks as a reproducible report.

// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::excessive_precision
)]

pub mod assembly;
pub mod curvature;
pub mod embedding;
pub mod error;
pub mod format;
pub mod lemma_lab;
pub mod numeric;
pub mod profile;
pub mod regularity;
pub mod verify;

pub use error::{Error, Result};
pub use profile::{make_pogorelov_profile, ProfileKind, RadialProfile, Side};
