//! Desk-scale laboratory for measure-preserving dynamics.
//!
//! Every object here is finite or symbolic and every measure is an exact
//! rational (or a big integer count), so statements that hold "in the limit"
//! for genuine transformations can be checked as exact identities on finite
//! models:
//!
//! * [`dynamics`]: permutations of equal-mass atoms, atom sets and Rokhlin towers.
//! * [`involutions`]: factoring a cyclic permutation into three involutions.
//! * [`rank_one`]: cutting-and-stacking constructions with spacers and their
//!   exact correlation sequences.
//! * [`recurrence`]: triple intersections, ergodic averages along progressions.
//! * [`ledrappier`]: harmonic GF(2) fields on a cylinder and their threads.
//! * [`mosaic`]: tilings by `k×k` and non-touching `1×1` squares, counted by
//!   transfer matrices.
//! * [`f2`]: cylinder sets over the Bernoulli shift of the free group on two
//!   generators and the search for cross-shaped Rokhlin families.

pub mod dynamics;
pub mod f2;
pub mod involutions;
pub mod ledrappier;
pub mod measure;
pub mod mosaic;
pub mod rank_one;
pub mod recurrence;
pub mod rng;

pub use dynamics::{AtomSet, DynamicsError, FinitePermutationSystem, Tower};
pub use measure::{Fraction, Measure};
