//! Constructive verification toolkit for convexity off thin plane sets.
//!
//! The crate builds, with exact rational arithmetic wherever a claim is
//! exact, the objects behind a family of convex-analysis counterexamples:
//!
//! * [`interval_sets`] — Cantor-type subsets of the line as finite
//!   interval unions with removed-gap bookkeeping, plus the Cantor
//!   function;
//! * [`plane_sets`] — compact plane sets (products, the Holey Devil's
//!   Staircase, Koch polylines) as resolution-indexed outer covers with
//!   sound disjointness queries;
//! * [`thinness`] — certified searches for transparent segments and
//!   directional scans;
//! * [`counterexample`] — the piecewise-quadratic stripe family: a
//!   non-convex function that is locally convex off a planar product
//!   set, with closed-form Hessians and neighbourhood convexity
//!   certificates;
//! * [`convexity_checks`] — generic midpoint scanners and the
//!   separately-convex diagonal probe;
//! * [`koch_bounds`] — exact-rational product identities and the
//!   divergent recurrence for the Koch curve's central vertical line;
//! * [`extension`] — numerical continuous extension of locally convex
//!   functions across thin obstacles.
//!
//! Searches and scans are deterministic given their seed; a returned
//! witness is always re-checkable on its own.

pub mod convexity_checks;
pub mod counterexample;
pub mod extension;
pub mod interval_sets;
pub mod koch_bounds;
pub mod plane_sets;
pub mod rational;
pub mod thinness;

pub use rational::Rat;
