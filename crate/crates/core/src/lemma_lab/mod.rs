//! Empirical harnesses for the supporting lemmas: a second-derivative bound for
//! convex functions, the curvature law along rulings of developable surfaces,
//! affine chords of surface patches and the sagitta estimate.

pub mod affine;
pub mod convex;
pub mod ruling;
pub mod sagitta;

pub use affine::{affine_segment_detect, Chord, DiscMap};
pub use convex::{convex_bound_check, generate_convex_cases, ConvexCase, ConvexCheck};
pub use ruling::{ruling_curvature_fit, RuledFamily, RuledSample, RulingFit};
pub use sagitta::{sagitta, Sagitta};
