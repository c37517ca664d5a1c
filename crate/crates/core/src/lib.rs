//! Deformations of cusped real hyperbolic lattices into SU(n,1).
//!
//! * [`ring`]: exact Laurent polynomials over Q with the unit-circle involution.
//! * [`words`]: presentations, words and matrix representations.
//! * [`figure8`]: the figure-eight knot group family into SU(3,1).
//! * [`bending`]: bending deformations along a totally geodesic hypersurface.
//! * [`chgeom`]: projective-model geometry of complex hyperbolic space and
//!   the finite horoball audits.

pub mod bending;
pub mod chgeom;
pub mod error;
pub mod figure8;
pub mod numeric;
pub mod ring;
pub mod words;

pub use error::{Error, Result};
pub use numeric::{NumMatrix, NumVector};
pub use ring::{RingMatrix, StarLaurent};
pub use words::{ExactRep, NumericRep, Presentation, Representation, Word};
