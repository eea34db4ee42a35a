//! Numerical laboratory for zeros of harmonic polynomials `p(z) + conj(q(z))`.
//!
//! * [`cpoly`]: dense complex polynomials, root finding, rational functions.
//! * [`hroots`]: finding and certifying zeros of harmonic polynomials.
//! * [`newton`]: Newton polygons, Minkowski sums and mixed areas.
//! * [`construct`]: the `S`/`T` extremal constructions and root-count sweeps.
//! * [`lemniscate`]: tracing the critical lemniscate `|p'/q'| = 1`.
//! * [`caustic`]: caustics, cusps, winding profiles and the two-zero search.
//! * [`report`] and [`svg`]: serializable reports and figure rendering.

pub mod caustic;
pub mod construct;
pub mod cpoly;
pub mod error;
pub mod hroots;
pub mod lemniscate;
pub mod newton;
pub mod presets;
pub mod report;
pub mod svg;

pub use cpoly::{CPoly, RationalFn};
pub use error::{Error, Result};
pub use hroots::{find_all_zeros, HarmonicPoly, Orientation, Root, RootSet, SearchOptions};
