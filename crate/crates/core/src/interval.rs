//! Intervals with exact endpoints and finite disjoint unions of them.
//!
//! Endpoint openness is tracked exactly so that disjointness of closures can
//! be certified, but every length and measure ignores it: the Lebesgue
//! measure of a boundary point is zero.

use std::cmp::Ordering;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{cmp_scalar, max_of, min_of, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Interval<T> {
    lo: T,
    hi: T,
    lo_open: bool,
    hi_open: bool,
}

impl<T: Scalar> Interval<T> {
    /// Rejects `lo > hi` and degenerate intervals carrying an open bound.
    pub fn new(lo: T, hi: T, lo_open: bool, hi_open: bool) -> Result<Self> {
        if lo > hi {
            return Err(Error::MalformedInterval(format!("lo {lo} > hi {hi}")));
        }
        if lo == hi && (lo_open || hi_open) {
            return Err(Error::MalformedInterval(format!(
                "degenerate interval at {lo} must be closed"
            )));
        }
        Ok(Self {
            lo,
            hi,
            lo_open,
            hi_open,
        })
    }

    pub fn closed(lo: T, hi: T) -> Result<Self> {
        Self::new(lo, hi, false, false)
    }

    pub fn open(lo: T, hi: T) -> Result<Self> {
        Self::new(lo, hi, true, true)
    }

    pub fn point(p: T) -> Self {
        Self {
            lo: p.clone(),
            hi: p,
            lo_open: false,
            hi_open: false,
        }
    }

    pub fn lo(&self) -> &T {
        &self.lo
    }

    pub fn hi(&self) -> &T {
        &self.hi
    }

    pub fn lo_open(&self) -> bool {
        self.lo_open
    }

    pub fn hi_open(&self) -> bool {
        self.hi_open
    }

    pub fn length(&self) -> T {
        self.hi.clone() - self.lo.clone()
    }

    pub fn closure(&self) -> Self {
        Self {
            lo: self.lo.clone(),
            hi: self.hi.clone(),
            lo_open: false,
            hi_open: false,
        }
    }

    pub fn contains(&self, x: &T) -> bool {
        let above = if self.lo_open { *x > self.lo } else { *x >= self.lo };
        let below = if self.hi_open { *x < self.hi } else { *x <= self.hi };
        above && below
    }

    pub fn contains_in_interior(&self, x: &T) -> bool {
        *x > self.lo && *x < self.hi
    }

    /// Point-set inclusion `self ⊆ other`.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        let lo_ok = other.lo < self.lo || (other.lo == self.lo && (!other.lo_open || self.lo_open));
        let hi_ok = self.hi < other.hi || (self.hi == other.hi && (!other.hi_open || self.hi_open));
        lo_ok && hi_ok
    }

    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let (lo, lo_open) = match cmp_scalar(&self.lo, &other.lo) {
            Ordering::Greater => (self.lo.clone(), self.lo_open),
            Ordering::Less => (other.lo.clone(), other.lo_open),
            Ordering::Equal => (self.lo.clone(), self.lo_open || other.lo_open),
        };
        let (hi, hi_open) = match cmp_scalar(&self.hi, &other.hi) {
            Ordering::Less => (self.hi.clone(), self.hi_open),
            Ordering::Greater => (other.hi.clone(), other.hi_open),
            Ordering::Equal => (self.hi.clone(), self.hi_open || other.hi_open),
        };
        Self::new(lo, hi, lo_open, hi_open).ok()
    }

    /// Measure of the intersection; never materializes it.
    pub fn overlap_length(&self, other: &Self) -> T {
        let lo = max_of(&self.lo, &other.lo);
        let hi = min_of(&self.hi, &other.hi);
        if hi > lo {
            hi - lo
        } else {
            T::zero()
        }
    }

    pub fn closures_disjoint(&self, other: &Self) -> bool {
        self.hi < other.lo || other.hi < self.lo
    }

    /// `self ∩ (-∞, bound)` or `self ∩ (-∞, bound]`.
    fn below(&self, bound: &T, inclusive: bool) -> Option<Self> {
        let (hi, hi_open) = match cmp_scalar(&self.hi, bound) {
            Ordering::Less => (self.hi.clone(), self.hi_open),
            Ordering::Equal => (self.hi.clone(), self.hi_open || !inclusive),
            Ordering::Greater => (bound.clone(), !inclusive),
        };
        Self::new(self.lo.clone(), hi, self.lo_open, hi_open).ok()
    }

    /// `self ∩ (bound, ∞)` or `self ∩ [bound, ∞)`.
    fn above(&self, bound: &T, inclusive: bool) -> Option<Self> {
        let (lo, lo_open) = match cmp_scalar(&self.lo, bound) {
            Ordering::Greater => (self.lo.clone(), self.lo_open),
            Ordering::Equal => (self.lo.clone(), self.lo_open || !inclusive),
            Ordering::Less => (bound.clone(), !inclusive),
        };
        Self::new(lo, self.hi.clone(), lo_open, self.hi_open).ok()
    }
}

impl<T: Scalar> fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lo_open { '(' } else { '[' };
        let r = if self.hi_open { ')' } else { ']' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

#[derive(Serialize, Deserialize)]
struct RawInterval {
    lo: String,
    hi: String,
    lo_open: bool,
    hi_open: bool,
}

impl<T: Scalar> Serialize for Interval<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RawInterval {
            lo: self.lo.render(),
            hi: self.hi.render(),
            lo_open: self.lo_open,
            hi_open: self.hi_open,
        }
        .serialize(serializer)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for Interval<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawInterval::deserialize(deserializer)?;
        let lo = T::parse_scalar(&raw.lo).map_err(D::Error::custom)?;
        let hi = T::parse_scalar(&raw.hi).map_err(D::Error::custom)?;
        Interval::new(lo, hi, raw.lo_open, raw.hi_open).map_err(D::Error::custom)
    }
}

/// Sorted, pairwise disjoint, maximal finite union of intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalSet<T> {
    parts: Vec<Interval<T>>,
}

impl<T: Scalar> Default for IntervalSet<T> {
    fn default() -> Self {
        Self::empty()
    }
}

fn lo_order<T: Scalar>(a: &Interval<T>, b: &Interval<T>) -> Ordering {
    cmp_scalar(&a.lo, &b.lo).then(a.lo_open.cmp(&b.lo_open))
}

impl<T: Scalar> IntervalSet<T> {
    pub fn empty() -> Self {
        Self { parts: Vec::new() }
    }

    pub fn single(part: Interval<T>) -> Self {
        Self { parts: vec![part] }
    }

    /// Canonical form of an arbitrary list of intervals.
    ///
    /// Two parts merge exactly when their union is an interval: overlapping
    /// parts always merge, touching parts merge unless both are open at the
    /// shared endpoint.
    pub fn normalize(mut raw: Vec<Interval<T>>) -> Self {
        raw.sort_by(lo_order);
        let mut parts: Vec<Interval<T>> = Vec::with_capacity(raw.len());
        for next in raw {
            if let Some(cur) = parts.last_mut() {
                let joins = match cmp_scalar(&next.lo, &cur.hi) {
                    Ordering::Less => true,
                    Ordering::Equal => !(cur.hi_open && next.lo_open),
                    Ordering::Greater => false,
                };
                if joins {
                    match cmp_scalar(&next.hi, &cur.hi) {
                        Ordering::Greater => {
                            cur.hi = next.hi;
                            cur.hi_open = next.hi_open;
                        }
                        Ordering::Equal => cur.hi_open = cur.hi_open && next.hi_open,
                        Ordering::Less => {}
                    }
                    continue;
                }
            }
            parts.push(next);
        }
        Self { parts }
    }

    /// Validating constructor from raw `(lo, hi, lo_open, hi_open)` tuples.
    pub fn from_bounds(raw: Vec<(T, T, bool, bool)>) -> Result<Self> {
        let parts = raw
            .into_iter()
            .map(|(lo, hi, lo_open, hi_open)| Interval::new(lo, hi, lo_open, hi_open))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::normalize(parts))
    }

    pub fn parts(&self) -> &[Interval<T>] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn measure(&self) -> T {
        self.parts
            .iter()
            .fold(T::zero(), |acc, p| acc + p.length())
    }

    /// Parts whose closure meets the closure of `j`.
    pub fn parts_near(&self, j: &Interval<T>) -> &[Interval<T>] {
        let start = self.parts.partition_point(|p| p.hi < j.lo);
        let end = self.parts.partition_point(|p| p.lo <= j.hi);
        if start >= end {
            &[]
        } else {
            &self.parts[start..end]
        }
    }

    pub fn contains(&self, x: &T) -> bool {
        self.part_containing(x).is_some()
    }

    pub fn part_containing(&self, x: &T) -> Option<&Interval<T>> {
        self.parts_near(&Interval::point(x.clone()))
            .iter()
            .find(|p| p.contains(x))
    }

    pub fn intersect(&self, j: &Interval<T>) -> Self {
        let parts = self
            .parts_near(j)
            .iter()
            .filter_map(|p| p.intersect(j))
            .collect();
        Self { parts }
    }

    /// `measure(self.intersect(j))` without building the intersection.
    pub fn measure_within(&self, j: &Interval<T>) -> T {
        self.parts_near(j)
            .iter()
            .fold(T::zero(), |acc, p| acc + p.overlap_length(j))
    }

    pub fn intersect_set(&self, other: &Self) -> Self {
        let parts = other
            .parts
            .iter()
            .flat_map(|j| self.intersect(j).parts)
            .collect();
        Self::normalize(parts)
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut parts = self.parts.clone();
        parts.extend(other.parts.iter().cloned());
        Self::normalize(parts)
    }

    pub fn subtract(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.parts.len());
        for part in &self.parts {
            let mut rest = Some(part.clone());
            for cut in other.parts_near(part) {
                let Some(cur) = rest.take() else { break };
                if let Some(left) = cur.below(&cut.lo, cut.lo_open) {
                    out.push(left);
                }
                rest = cur.above(&cut.hi, cut.hi_open);
            }
            out.extend(rest);
        }
        Self::normalize(out)
    }

    /// Whether the closures of all parts are pairwise disjoint.
    pub fn closures_disjoint(&self) -> bool {
        self.parts.windows(2).all(|w| w[0].hi < w[1].lo)
    }
}

impl<T: Scalar> FromIterator<Interval<T>> for IntervalSet<T> {
    fn from_iter<I: IntoIterator<Item = Interval<T>>>(iter: I) -> Self {
        Self::normalize(iter.into_iter().collect())
    }
}

impl<T: Scalar> fmt::Display for IntervalSet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "∅");
        }
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, " ∪ ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl<T: Scalar> Serialize for IntervalSet<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.parts.serialize(serializer)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for IntervalSet<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let parts = Vec::<Interval<T>>::deserialize(deserializer)?;
        Ok(Self::normalize(parts))
    }
}

/// Whether the closures of `intervals` are pairwise disjoint (sort and sweep).
pub fn closures_pairwise_disjoint<T: Scalar>(intervals: &[Interval<T>]) -> bool {
    let mut sorted: Vec<&Interval<T>> = intervals.iter().collect();
    sorted.sort_by(|a, b| lo_order(a, b));
    sorted.windows(2).all(|w| w[0].hi < w[1].lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use proptest::prelude::*;

    fn q(s: &str) -> Rational {
        Rational::parse_scalar(s).unwrap()
    }

    fn c(lo: &str, hi: &str) -> Interval<Rational> {
        Interval::closed(q(lo), q(hi)).unwrap()
    }

    fn o(lo: &str, hi: &str) -> Interval<Rational> {
        Interval::open(q(lo), q(hi)).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let s = IntervalSet::normalize(vec![c("0", "1"), c("1", "2")]);
        assert_eq!(s.parts(), &[c("0", "2")]);

        let s = IntervalSet::normalize(vec![c("2", "3"), c("0", "1")]);
        assert_eq!(s.parts(), &[c("0", "1"), c("2", "3")]);

        assert!(IntervalSet::<Rational>::normalize(vec![]).is_empty());
    }

    #[test]
    fn touching_open_ends_stay_split() {
        let s = IntervalSet::normalize(vec![o("0", "1"), o("1", "2")]);
        assert_eq!(s.len(), 2);
        assert!(!s.contains(&q("1")));

        let half_open = Interval::new(q("0"), q("1"), false, true).unwrap();
        let s = IntervalSet::normalize(vec![half_open, c("1", "2")]);
        assert_eq!(s.parts(), &[c("0", "2")]);
    }

    #[test]
    fn malformed_rejected() {
        assert!(Interval::closed(q("1"), q("0")).is_err());
        assert!(Interval::open(q("1"), q("1")).is_err());
        assert!(IntervalSet::from_bounds(vec![(q("2"), q("1"), false, false)]).is_err());
    }

    #[test]
    fn measure_examples() {
        assert_eq!(IntervalSet::single(c("-1", "1")).measure(), q("2"));
        let s = IntervalSet::normalize(vec![c("0", "1/2"), c("3/4", "1")]);
        assert_eq!(s.measure(), q("3/4"));
    }

    #[test]
    fn intersect_examples() {
        let s = IntervalSet::single(c("0", "2"));
        assert_eq!(s.intersect(&c("1", "3")).parts(), &[c("1", "2")]);
        let s = IntervalSet::single(c("0", "1"));
        assert!(s.intersect(&c("2", "3")).is_empty());
    }

    #[test]
    fn subtract_examples() {
        let s = IntervalSet::single(c("-1", "1"));
        let t = IntervalSet::single(o("3/8", "2/5"));
        let d = s.subtract(&t);
        assert_eq!(d.parts(), &[c("-1", "3/8"), c("2/5", "1")]);

        assert_eq!(s.subtract(&IntervalSet::empty()), s);

        let u = IntervalSet::single(c("0", "1"));
        assert!(u.subtract(&u).is_empty());
    }

    #[test]
    fn subtract_closed_leaves_open_edges() {
        let s = IntervalSet::single(c("0", "3"));
        let d = s.subtract(&IntervalSet::single(c("1", "2")));
        assert_eq!(d.len(), 2);
        assert!(d.parts()[0].hi_open() && d.parts()[1].lo_open());
        assert_eq!(d.measure(), q("2"));
    }

    #[test]
    fn serde_shape() {
        let s = IntervalSet::single(o("3/8", "2/5"));
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(
            json,
            r#"[{"lo":"3/8","hi":"2/5","lo_open":true,"hi_open":true}]"#
        );
        let back: IntervalSet<Rational> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        let bad = r#"[{"lo":"1","hi":"0","lo_open":false,"hi_open":false}]"#;
        assert!(serde_json::from_str::<IntervalSet<Rational>>(bad).is_err());
    }

    #[test]
    fn generic_over_floats() {
        let s = IntervalSet::normalize(vec![
            Interval::closed(0.0f64, 0.5).unwrap(),
            Interval::closed(0.25, 1.0).unwrap(),
        ]);
        assert_eq!(s.measure(), 1.0);
    }

    fn arb_interval() -> impl Strategy<Value = Interval<Rational>> {
        (-40i64..40, 0i64..20, 1i64..8, any::<bool>(), any::<bool>()).prop_map(
            |(lo, len, den, lo_open, hi_open)| {
                let lo = Rational::ratio(lo, den);
                let hi = lo.clone() + Rational::ratio(len, den);
                let degenerate = len == 0;
                Interval::new(lo, hi, lo_open && !degenerate, hi_open && !degenerate).unwrap()
            },
        )
    }

    fn arb_set() -> impl Strategy<Value = IntervalSet<Rational>> {
        prop::collection::vec(arb_interval(), 0..8).prop_map(IntervalSet::normalize)
    }

    /// Brute-force overlap check between raw intervals.
    fn any_positive_overlap(raw: &[Interval<Rational>]) -> bool {
        for (i, a) in raw.iter().enumerate() {
            for b in &raw[i + 1..] {
                if a.overlap_length(b) > Rational::from_int(0) {
                    return true;
                }
            }
        }
        false
    }

    proptest! {
        #[test]
        fn normalize_measure_vs_sum(raw in prop::collection::vec(arb_interval(), 0..10)) {
            let total = raw.iter().fold(Rational::from_int(0), |a, p| a + p.length());
            let s = IntervalSet::normalize(raw.clone());
            prop_assert!(s.measure() <= total);
            prop_assert_eq!(s.measure() == total, !any_positive_overlap(&raw));
        }

        #[test]
        fn canonical_form_invariants(raw in prop::collection::vec(arb_interval(), 0..10)) {
            let s = IntervalSet::normalize(raw.clone());
            for w in s.parts().windows(2) {
                prop_assert!(w[0].hi() <= w[1].lo());
                // maximal: touching parts must both be open there
                if w[0].hi() == w[1].lo() {
                    prop_assert!(w[0].hi_open() && w[1].lo_open());
                }
            }
            // same point set, sampled at every endpoint and midpoint
            for p in &raw {
                for x in [p.lo().clone(), p.hi().clone(), (p.lo().clone() + p.hi().clone()).half()] {
                    let in_raw = raw.iter().any(|r| r.contains(&x));
                    prop_assert_eq!(s.contains(&x), in_raw);
                }
            }
        }

        #[test]
        fn inclusion_exclusion(a in arb_set(), b in arb_set()) {
            let union = a.union(&b).measure();
            let inter = a.intersect_set(&b).measure();
            prop_assert_eq!(union + inter, a.measure() + b.measure());
        }

        #[test]
        fn subtract_additivity(a in arb_set(), b in arb_set()) {
            let diff = a.subtract(&b);
            prop_assert_eq!(diff.measure(), a.measure() - a.intersect_set(&b).measure());
            prop_assert!(diff.intersect_set(&b).measure() == Rational::from_int(0));
        }

        #[test]
        fn intersect_bounded(a in arb_set(), j in arb_interval()) {
            let m = a.intersect(&j).measure();
            prop_assert!(m <= a.measure() && m <= j.length());
            prop_assert_eq!(m, a.measure_within(&j));
        }

        #[test]
        fn rational_text_round_trip(n in -1_000_000i64..1_000_000, d in 1i64..1_000_000) {
            let r = Rational::ratio(n, d);
            prop_assert_eq!(Rational::parse_scalar(&r.render()).unwrap(), r);
        }
    }
}
