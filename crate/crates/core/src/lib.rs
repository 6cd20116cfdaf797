//! Exact construction of a closed set whose points all have density arbitrarily
//! close to one at small scales while no uniform density threshold exists, with
//! certified density bounds and explicit witnesses.
//!
//! Geometry ([`interval`], [`address`], [`construction`], [`density`]) is
//! generic over [`Scalar`]; certificates ([`witness`], [`suites`]) are exact
//! and work over [`Rational`] only.

pub mod address;
pub mod construction;
pub mod density;
pub mod error;
pub mod interval;
pub mod scalar;
pub mod suites;
pub mod witness;

pub use address::{a_value, r_value, Address};
pub use error::{Error, Result};
pub use interval::{Interval, IntervalSet};
pub use scalar::Scalar;

/// Arbitrary-precision rational; the exact scalar of every certificate.
pub type Rational = num_rational::BigRational;

pub type RatInterval = Interval<Rational>;
pub type RatIntervalSet = IntervalSet<Rational>;
pub type RatTruncatedSet = construction::TruncatedSet<Rational>;

pub type F64Interval = Interval<f64>;
pub type F64IntervalSet = IntervalSet<f64>;
pub type F64TruncatedSet = construction::TruncatedSet<f64>;
