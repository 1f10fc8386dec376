//! Recurrence along polynomial return-time sets, computed on finite
//! windows of the integers.
//!
//! * [`windows`]: windowed subsets of `Z` and their largeness profiles.
//! * [`polys`]: integer polynomials and the changes of variable used on
//!   return sets.
//! * [`systems`]: concrete systems with closed-form orbits.
//! * [`returns`]: visit sets and polynomial return sets.
//! * [`spectral`]: eigenvalue groups and Kronecker correlation sequences.
//! * [`lab`]: scenario files, experiments and reports.

pub mod lab;
pub mod polys;
pub mod returns;
pub mod spectral;
pub mod systems;
pub mod windows;

pub use polys::{IntPoly, Modulus, PolyTuple};
pub use systems::{Point, Region, Scalar, SystemSpec};
pub use windows::{GapProfile, PwsProfile, WindowSet};
pub use spectral::{EigenGroup, FourierData};
