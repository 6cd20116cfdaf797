//! The removal families, the set they carve out of `[-1, 1]`, and finite
//! truncations of it with exact accounting of what was left out.
//!
//! Every address `(n₁, …, n_k)` with point `a` and gap `r` removes two open
//! intervals of length `α_k·r` (`α_k = 10^{-k}`) at the outer ends of
//! `[a − r/2, a + r/2]`. Gaps at depth `k` sum to `2^{-1}·16^{1−k}`, so the
//! removed mass is the geometric series `Σ_k 2·10^{-k}·2^{-1}·16^{1−k} = 16/159`.
//!
//! All strict descendants of an address live inside its K-interval
//! `[a_{…,n_k+1}, a_{…,n_k}]`, and the children with index `>= n` live below
//! `a_{…,n} + r_{…,n}/2`. Both facts let truncations localize the omitted mass
//! with closed-form subtree totals.

use std::fmt;

use num_bigint::BigUint;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::address::{a_value, r_value, Address};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::scalar::{cmp_scalar, min_of, Scalar};
use crate::Rational;

fn positive_depth(k: usize) -> Result<i64> {
    if k == 0 {
        return Err(Error::NonPositive { what: "depth k" });
    }
    Ok(k as i64)
}

/// `α_k = 10^{-k}`.
pub fn alpha<T: Scalar>(k: usize) -> Result<T> {
    Ok(T::pow10(-positive_depth(k)?))
}

/// `γ_k = 1 − 10^{-k}`.
pub fn gamma<T: Scalar>(k: usize) -> Result<T> {
    Ok(T::one() - alpha::<T>(k)?)
}

fn alpha_at<T: Scalar>(addr: &Address) -> T {
    T::pow10(-(addr.depth() as i64))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RemovalPair<T> {
    pub addr: Address,
    pub left: Interval<T>,
    pub right: Interval<T>,
}

impl<T: Scalar> RemovalPair<T> {
    /// Length of each half; `α_k · r`.
    pub fn half_length(&self) -> T {
        self.left.length()
    }
}

/// Length of each of the two removals at `addr`.
pub fn removal_length<T: Scalar>(addr: &Address) -> T {
    alpha_at::<T>(addr) * r_value::<T>(addr)
}

pub fn removal_pair<T: Scalar>(addr: &Address) -> RemovalPair<T> {
    let a = a_value::<T>(addr);
    let r = r_value::<T>(addr);
    let alpha = alpha_at::<T>(addr);
    let half = r.half();
    let inner = (T::ratio(1, 2) - alpha) * r;
    let left = Interval::open(a.clone() - half.clone(), a.clone() - inner.clone())
        .expect("alpha < 1/2 keeps the removal non-degenerate");
    let right = Interval::open(a.clone() + inner, a + half)
        .expect("alpha < 1/2 keeps the removal non-degenerate");
    RemovalPair {
        addr: addr.clone(),
        left,
        right,
    }
}

/// `(J^L, J^R) = ([a − r/2, a], [a, a + r/2])`.
pub fn j_pair<T: Scalar>(addr: &Address) -> (Interval<T>, Interval<T>) {
    let a = a_value::<T>(addr);
    let half = r_value::<T>(addr).half();
    (
        Interval::closed(a.clone() - half.clone(), a.clone()).expect("r > 0"),
        Interval::closed(a.clone(), a + half).expect("r > 0"),
    )
}

/// `K = [a_{…,n_k+1}, a_{…,n_k}]`, of length `r`.
pub fn k_interval<T: Scalar>(addr: &Address) -> Interval<T> {
    Interval::closed(a_value::<T>(&addr.parent_successor()), a_value::<T>(addr))
        .expect("successor point lies below")
}

/// `16/159`, the total length of all removal intervals.
pub fn total_removal_mass<T: Scalar>() -> T {
    T::ratio(16, 159)
}

/// Total removal length among the strict descendants of `addr`:
/// `2·r·α_k / 159`.
pub fn subtree_tail_mass<T: Scalar>(addr: &Address) -> T {
    T::from_int(2) * r_value::<T>(addr) * alpha_at::<T>(addr) / T::from_int(159)
}

/// Total removal length of the children `n, n+1, …` of `parent` (top-level
/// addresses when `parent` is `None`) together with all their descendants.
pub fn sibling_tail_mass<T: Scalar>(parent: Option<&Address>, from: u32) -> Result<T> {
    let lead = Address::child_of(parent, from)?;
    // each child with its subtree carries 2·α·r·(160/159); gaps halve per index
    Ok(T::from_int(640) * alpha_at::<T>(&lead) * r_value::<T>(&lead) / T::from_int(159))
}

enum Visit<'a, T> {
    Node(&'a Address, &'a T),
    /// Children `from, from+1, …` of a parent, none of them enumerated.
    Tail { hull: Interval<T>, mass: T },
}

/// A parent in the walk: its address, the point of its successor (the floor
/// of its K-interval) and its gap.
struct Parent<'a, T> {
    addr: &'a Address,
    floor: T,
    r: T,
}

/// Walks the removal tree, pruning every group of siblings whose hull has no
/// overlap with `window`. Nodes with `α_k·r >= eps` are reported
/// individually; the first sibling below the threshold closes its group.
/// Points and gaps are updated incrementally down the tree.
fn walk<T: Scalar>(
    parent: Option<Parent<'_, T>>,
    eps: &T,
    window: &Interval<T>,
    visit: &mut dyn FnMut(Visit<'_, T>),
) {
    let depth = parent.as_ref().map_or(1, |p| p.addr.depth() + 1);
    let alpha = T::pow10(-(depth as i64));
    let floor = parent.as_ref().map_or_else(T::zero, |p| p.floor.clone());
    // child n: a = floor + step_n, r = step_n / 2 (depth >= 2);
    // top level: a = 2^-n, r = a / 2
    let mut step = match &parent {
        Some(p) => p.r.clone() / T::from_int(16),
        None => T::ratio(1, 2),
    };
    let mut n = 1u32;
    loop {
        let a = floor.clone() + step.clone();
        let r = step.half();
        let hull = Interval::closed(floor.clone(), a.clone() + r.half()).expect("hull is ordered");
        if hull.overlap_length(window).is_zero() {
            return;
        }
        let length = alpha.clone() * r.clone();
        if length < *eps {
            let mass = T::from_int(640) * length / T::from_int(159);
            visit(Visit::Tail { hull, mass });
            return;
        }
        let node = Address::child_of(parent.as_ref().map(|p| p.addr), n).expect("n >= 1");
        visit(Visit::Node(&node, &a));
        let next_step = step.half();
        walk(
            Some(Parent {
                addr: &node,
                floor: floor.clone() + next_step.clone(),
                r,
            }),
            eps,
            window,
            visit,
        );
        step = next_step;
        n += 1;
    }
}

fn whole_line<T: Scalar>() -> Interval<T> {
    Interval::closed(-T::one(), T::one()).expect("[-1, 1]")
}

/// All removal pairs with `α_k·r >= eps`, depth-major then by decreasing point.
pub fn enumerate_removals<T: Scalar>(eps: &T) -> Result<Vec<RemovalPair<T>>> {
    if *eps <= T::zero() {
        return Err(Error::NonPositive { what: "epsilon" });
    }
    let mut nodes: Vec<(Address, T)> = Vec::new();
    walk(None, eps, &whole_line(), &mut |v| {
        if let Visit::Node(addr, a) = v {
            nodes.push((addr.clone(), a.clone()));
        }
    });
    nodes.sort_by(|(x, ax), (y, ay)| x.depth().cmp(&y.depth()).then(cmp_scalar(ay, ax)));
    Ok(nodes.iter().map(|(addr, _)| removal_pair(addr)).collect())
}

/// Upper bound on the measure of the non-enumerated removals inside `window`.
pub fn removal_slack<T: Scalar>(eps: &T, window: &Interval<T>) -> T {
    let mut total = T::zero();
    walk(None, eps, window, &mut |v| {
        if let Visit::Tail { hull, mass } = v {
            total = total.clone() + min_of(&mass, &hull.overlap_length(window));
        }
    });
    total
}

/// How the gap between `upper` and the true set is localized.
#[derive(Clone, Debug, PartialEq)]
pub enum SlackModel<T> {
    /// `upper` is the set itself.
    Exact,
    /// Removal tree truncated at the set's epsilon.
    Removals,
    /// `upper \ pieces` lies inside the set.
    Pieces(IntervalSet<T>),
    /// Nothing beyond the global omitted mass.
    Global,
}

/// Finite outer approximation of a set: the set lies inside `upper`, and
/// `upper` exceeds it by at most `omitted_mass`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSet<T> {
    pub epsilon: T,
    pub omitted_mass: T,
    pub upper: IntervalSet<T>,
    pub model: SlackModel<T>,
}

impl<T: Scalar> TruncatedSet<T> {
    /// A set known exactly (no slack).
    pub fn exact(set: IntervalSet<T>) -> Self {
        Self {
            epsilon: T::zero(),
            omitted_mass: T::zero(),
            upper: set,
            model: SlackModel::Exact,
        }
    }

    /// Upper bound on `|(upper \ E) ∩ j|`.
    pub fn slack_in(&self, j: &Interval<T>) -> T {
        let local = match &self.model {
            SlackModel::Exact => return T::zero(),
            SlackModel::Removals => removal_slack(&self.epsilon, j),
            SlackModel::Pieces(pieces) => pieces.measure_within(j),
            SlackModel::Global => self.omitted_mass.clone(),
        };
        min_of(&local, &self.omitted_mass)
    }

    /// Certified lower bound on the measure of the set.
    pub fn measure_lower(&self) -> T {
        self.upper.measure() - self.omitted_mass.clone()
    }
}

/// `[-1, 1]` minus every removal with `α_k·r >= eps`.
pub fn truncate<T: Scalar>(eps: &T) -> Result<TruncatedSet<T>> {
    let pairs = enumerate_removals(eps)?;
    let mut removed_mass = T::zero();
    let mut cuts = Vec::with_capacity(2 * pairs.len());
    for pair in pairs {
        removed_mass = removed_mass + pair.half_length() * T::from_int(2);
        cuts.push(pair.left);
        cuts.push(pair.right);
    }
    let upper = IntervalSet::single(whole_line()).subtract(&IntervalSet::normalize(cuts));
    Ok(TruncatedSet {
        epsilon: eps.clone(),
        omitted_mass: total_removal_mass::<T>() - removed_mass,
        upper,
        model: SlackModel::Removals,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", bound = "")]
enum RawModel<T: Scalar> {
    Exact,
    Removals,
    Pieces {
        pieces: IntervalSet<T>,
    },
    Global,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "")]
struct RawTruncated<T: Scalar> {
    epsilon: String,
    omitted_mass: String,
    upper: IntervalSet<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    slack_model: Option<RawModel<T>>,
}

impl<T: Scalar> Serialize for TruncatedSet<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let slack_model = Some(match &self.model {
            SlackModel::Exact => RawModel::Exact,
            SlackModel::Removals => RawModel::Removals,
            SlackModel::Pieces(p) => RawModel::Pieces { pieces: p.clone() },
            SlackModel::Global => RawModel::Global,
        });
        RawTruncated {
            epsilon: self.epsilon.render(),
            omitted_mass: self.omitted_mass.render(),
            upper: self.upper.clone(),
            slack_model,
        }
        .serialize(serializer)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for TruncatedSet<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawTruncated::<T>::deserialize(deserializer)?;
        let epsilon = T::parse_scalar(&raw.epsilon).map_err(D::Error::custom)?;
        let omitted_mass = T::parse_scalar(&raw.omitted_mass).map_err(D::Error::custom)?;
        if omitted_mass < T::zero() {
            return Err(D::Error::custom("omitted_mass must be non-negative"));
        }
        let model = match raw.slack_model {
            None | Some(RawModel::Global) => SlackModel::Global,
            Some(RawModel::Exact) => SlackModel::Exact,
            Some(RawModel::Removals) => {
                if epsilon <= T::zero() {
                    return Err(D::Error::custom("removal model needs a positive epsilon"));
                }
                SlackModel::Removals
            }
            Some(RawModel::Pieces { pieces }) => SlackModel::Pieces(pieces),
        };
        Ok(Self {
            epsilon,
            omitted_mass,
            upper: raw.upper,
            model,
        })
    }
}

/// Directed rational enclosures of the two endpoints of an interval whose
/// endpoints may be irrational.
#[derive(Clone, Debug, PartialEq)]
pub struct EnclosedInterval {
    pub lo_bounds: (Rational, Rational),
    pub hi_bounds: (Rational, Rational),
}

/// `(lo, hi)` with `lo <= √n <= hi` and `hi − lo <= tol`.
pub fn sqrt_enclosure(n: u64, tol: &Rational) -> Result<(Rational, Rational)> {
    if *tol <= Rational::from_int(0) {
        return Err(Error::NonPositive { what: "tolerance" });
    }
    let mut bits = 0i64;
    while Rational::pow2(-bits) > *tol {
        bits += 1;
    }
    let scale = BigUint::from(1u8) << (2 * bits as usize);
    let root = (BigUint::from(n) * scale).sqrt();
    let denom = Rational::pow2(bits);
    let lo = Rational::from_integer(root.clone().into()) / denom.clone();
    if lo.clone() * lo.clone() == Rational::from_int(n as i64) {
        return Ok((lo.clone(), lo));
    }
    let hi = Rational::from_integer((root + BigUint::from(1u8)).into()) / denom;
    Ok((lo, hi))
}

/// Enclosure of `[n^{-n-1/2}, n^{-n}]`; the right endpoint is exact.
pub fn wd_component(n: u64, tol: &Rational) -> Result<EnclosedInterval> {
    if n < 2 {
        return Err(Error::InvalidSequence(format!("component index {n} < 2")));
    }
    let right = Rational::powi(n as i64, -(n as i64));
    let (s_lo, s_hi) = sqrt_enclosure(n, tol)?;
    Ok(EnclosedInterval {
        lo_bounds: (right.clone() / s_hi, right.clone() / s_lo),
        hi_bounds: (right.clone(), right),
    })
}

/// Geometric majorant of `Σ_{m>N} m^{-m}`: `(N+1)^{-(N+1)} / (1 − 1/(N+1))`.
pub fn wd_tail_majorant(n: u64) -> Rational {
    let next = n as i64 + 1;
    Rational::powi(next, -next) / (Rational::from_int(1) - Rational::ratio(1, next))
}

/// Outer approximation of `{0} ∪ ⋃_{n>=2} [n^{-n-1/2}, n^{-n}]`.
///
/// Components `2..=N` use the lower enclosure of their left endpoint; the
/// tail and the point `0` are covered by the block `[0, (N+1)^{-(N+1)}]`.
/// Slack pieces are the block and the endpoint enclosure slivers.
pub fn wd_example(n_max: u64, tol: &Rational) -> Result<TruncatedSet<Rational>> {
    if n_max < 2 {
        return Err(Error::InvalidSequence(format!("N = {n_max} < 2")));
    }
    let next = n_max as i64 + 1;
    let block = Interval::closed(Rational::from_int(0), Rational::powi(next, -next))?;
    let mut upper = vec![block.clone()];
    let mut pieces = vec![block];
    for n in 2..=n_max {
        let comp = wd_component(n, tol)?;
        let (ql, qu) = comp.lo_bounds;
        upper.push(Interval::closed(ql.clone(), comp.hi_bounds.0)?);
        if ql < qu {
            pieces.push(Interval::closed(ql, qu)?);
        }
    }
    let pieces = IntervalSet::normalize(pieces);
    Ok(TruncatedSet {
        epsilon: tol.clone(),
        omitted_mass: pieces.measure(),
        upper: IntervalSet::normalize(upper),
        model: SlackModel::Pieces(pieces),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FigureKind {
    IL,
    IR,
    JL,
    JR,
    K,
}

impl fmt::Display for FigureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::IL => "IL",
            Self::IR => "IR",
            Self::JL => "JL",
            Self::JR => "JR",
            Self::K => "K",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FigureRow<T> {
    pub addr: Address,
    pub kind: FigureKind,
    pub interval: Interval<T>,
}

/// The labeled I/J/K intervals of every address up to the given caps,
/// depth-major then by decreasing point.
pub fn figure_rows<T: Scalar>(max_depth: usize, max_index: u32) -> Vec<FigureRow<T>> {
    let mut addrs: Vec<(Address, T)> = Address::all_up_to(max_depth, max_index)
        .into_iter()
        .map(|a| {
            let v = a_value::<T>(&a);
            (a, v)
        })
        .collect();
    addrs.sort_by(|(x, ax), (y, ay)| x.depth().cmp(&y.depth()).then(cmp_scalar(ay, ax)));
    let mut rows = Vec::with_capacity(addrs.len() * 5);
    for (addr, _) in addrs {
        let pair = removal_pair::<T>(&addr);
        let (jl, jr) = j_pair::<T>(&addr);
        let k = k_interval::<T>(&addr);
        for (kind, interval) in [
            (FigureKind::IL, pair.left),
            (FigureKind::IR, pair.right),
            (FigureKind::JL, jl),
            (FigureKind::JR, jr),
            (FigureKind::K, k),
        ] {
            rows.push(FigureRow {
                addr: addr.clone(),
                kind,
                interval,
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::closures_pairwise_disjoint;

    fn q(s: &str) -> Rational {
        Rational::parse_scalar(s).unwrap()
    }

    fn addr(v: &[u32]) -> Address {
        Address::new(v.to_vec()).unwrap()
    }

    #[test]
    fn alpha_gamma() {
        assert_eq!(alpha::<Rational>(1).unwrap(), q("1/10"));
        assert_eq!(gamma::<Rational>(2).unwrap(), q("99/100"));
        assert_eq!(
            gamma::<Rational>(7).unwrap() + alpha::<Rational>(7).unwrap(),
            q("1")
        );
        assert!(alpha::<Rational>(0).is_err());
        assert!(gamma::<Rational>(0).is_err());
    }

    #[test]
    fn removal_pair_of_first_address() {
        let p = removal_pair::<Rational>(&addr(&[1]));
        assert_eq!(p.left, Interval::open(q("3/8"), q("2/5")).unwrap());
        assert_eq!(p.right, Interval::open(q("3/5"), q("5/8")).unwrap());
    }

    #[test]
    fn removal_lengths_and_clearance() {
        let a23 = addr(&[2, 3]);
        let p = removal_pair::<Rational>(&a23);
        let expected = alpha::<Rational>(2).unwrap() * r_value::<Rational>(&a23);
        assert_eq!(p.left.length(), expected);
        assert_eq!(p.right.length(), expected);

        let a11 = addr(&[1, 1]);
        let p = removal_pair::<Rational>(&a11);
        let a = a_value::<Rational>(&a11);
        let quarter = r_value::<Rational>(&a11) / Rational::from_int(4);
        let core = Interval::closed(a.clone() - quarter.clone(), a + quarter).unwrap();
        assert!(p.left.closures_disjoint(&core));
        assert!(p.right.closures_disjoint(&core));
    }

    #[test]
    fn j_and_k_intervals() {
        let (jl, jr) = j_pair::<Rational>(&addr(&[1]));
        assert_eq!(jl, Interval::closed(q("3/8"), q("1/2")).unwrap());
        assert_eq!(jr, Interval::closed(q("1/2"), q("5/8")).unwrap());

        let k = k_interval::<Rational>(&addr(&[1, 1]));
        assert_eq!(k, Interval::closed(q("33/128"), q("17/64")).unwrap());
        assert_eq!(k.length(), q("1/128"));

        let first_child = k_interval::<Rational>(&addr(&[1, 1]));
        assert_eq!(first_child.length(), r_value::<Rational>(&addr(&[1])) / Rational::from_int(32));
    }

    #[test]
    fn enumeration_thresholds() {
        let e = enumerate_removals::<Rational>(&q("1/20")).unwrap();
        assert!(e.iter().all(|p| p.addr != addr(&[1])));
        let e = enumerate_removals::<Rational>(&q("1/100")).unwrap();
        assert_eq!(e[0].addr, addr(&[1]));
        assert!(enumerate_removals::<Rational>(&q("1")).unwrap().is_empty());
        assert!(enumerate_removals::<Rational>(&q("0")).is_err());
    }

    #[test]
    fn enumeration_is_exactly_the_threshold_set() {
        // brute force over a box that certainly contains every qualifying address
        let eps = Rational::pow2(-20);
        let listed: Vec<Address> = enumerate_removals::<Rational>(&eps)
            .unwrap()
            .into_iter()
            .map(|p| p.addr)
            .collect();
        let brute: Vec<Address> = Address::all_up_to(3, 16)
            .into_iter()
            .filter(|a| removal_length::<Rational>(a) >= eps)
            .collect();
        assert_eq!(listed.len(), brute.len());
        for a in &brute {
            assert!(listed.contains(a), "{a} missing");
        }
        for w in listed.windows(2) {
            let ordered = w[0].depth() < w[1].depth()
                || (w[0].depth() == w[1].depth()
                    && a_value::<Rational>(&w[0]) > a_value::<Rational>(&w[1]));
            assert!(ordered, "{} before {}", w[0], w[1]);
        }
    }

    #[test]
    fn closures_disjoint_at_moderate_epsilon() {
        let pairs = enumerate_removals::<Rational>(&Rational::pow2(-20)).unwrap();
        let all: Vec<_> = pairs.iter().flat_map(|p| [p.left.closure(), p.right.closure()]).collect();
        assert!(closures_pairwise_disjoint(&all));
        assert!(all.iter().all(|i| *i.lo() > q("0") && *i.hi() <= q("5/8")));
    }

    #[test]
    fn subtree_masses() {
        assert_eq!(subtree_tail_mass::<Rational>(&addr(&[1])), q("1/3180"));
        assert_eq!(sibling_tail_mass::<Rational>(None, 1).unwrap(), q("16/159"));
        // a tail of siblings is the first sibling's full mass plus the rest
        let p = addr(&[2]);
        let lead = p.child(3).unwrap();
        let whole = sibling_tail_mass::<Rational>(Some(&p), 3).unwrap();
        let rest = sibling_tail_mass::<Rational>(Some(&p), 4).unwrap();
        let own = Rational::from_int(2) * removal_length::<Rational>(&lead);
        assert_eq!(whole, rest + own + subtree_tail_mass::<Rational>(&lead));
    }

    #[test]
    fn subtree_mass_matches_deep_enumeration() {
        // removals strictly below (1) enumerated deeply approach 1/3180 from below
        let target = addr(&[1]);
        let inside = |p: &RemovalPair<Rational>| {
            p.addr.depth() > 1 && p.addr.indices()[0] == 1
        };
        let mut last = Rational::from_int(0);
        for bits in [16, 22, 28] {
            let eps = Rational::pow2(-bits);
            let sum = enumerate_removals::<Rational>(&eps)
                .unwrap()
                .iter()
                .filter(|p| inside(p))
                .fold(Rational::from_int(0), |acc, p| acc + p.half_length() * Rational::from_int(2));
            assert!(sum >= last);
            assert!(sum < subtree_tail_mass::<Rational>(&target));
            last = sum;
        }
        let gap = subtree_tail_mass::<Rational>(&target) - last;
        assert!(gap < Rational::pow10(-6), "gap {gap}");
    }

    #[test]
    fn truncate_examples() {
        let t = truncate::<Rational>(&q("1")).unwrap();
        assert_eq!(t.upper.parts(), &[Interval::closed(q("-1"), q("1")).unwrap()]);
        assert_eq!(t.omitted_mass, q("16/159"));

        let t = truncate::<Rational>(&q("1/100")).unwrap();
        assert!(!t.upper.contains(&q("39/100")));
        assert!(!t.upper.contains(&q("61/100")));
        assert!(t.upper.contains(&q("3/8")));
        assert!(t.upper.contains(&q("2/5")));
    }

    #[test]
    fn truncation_refines_monotonically() {
        let coarse = truncate::<Rational>(&Rational::pow2(-8)).unwrap();
        let fine = truncate::<Rational>(&Rational::pow2(-12)).unwrap();
        assert!(fine.omitted_mass < coarse.omitted_mass);
        assert_eq!(fine.upper.subtract(&coarse.upper).measure(), Rational::from_int(0));
        assert!(fine.measure_lower() >= coarse.measure_lower());
        assert!(fine.measure_lower() <= fine.upper.measure());
    }

    #[test]
    fn local_slack_is_bounded_by_global() {
        let t = truncate::<Rational>(&Rational::pow2(-10)).unwrap();
        let whole = Interval::closed(q("-1"), q("1")).unwrap();
        assert_eq!(t.slack_in(&whole), t.omitted_mass);
        let left = Interval::closed(q("-1"), q("0")).unwrap();
        assert_eq!(t.slack_in(&left), Rational::from_int(0));
        let k = k_interval::<Rational>(&addr(&[1]));
        assert!(t.slack_in(&k) <= subtree_tail_mass::<Rational>(&addr(&[1])) + t.omitted_mass.clone());
    }

    #[test]
    fn truncated_set_json() {
        let t = truncate::<Rational>(&q("1/100")).unwrap();
        let json = serde_json::to_value(&t).unwrap();
        assert_eq!(json["epsilon"], "1/100");
        assert_eq!(json["slack_model"]["kind"], "removals");
        let back: TruncatedSet<Rational> = serde_json::from_value(json).unwrap();
        assert_eq!(back, t);

        let bare = r#"{"epsilon":"1","omitted_mass":"16/159","upper":[]}"#;
        let t: TruncatedSet<Rational> = serde_json::from_str(bare).unwrap();
        assert_eq!(t.model, SlackModel::Global);
    }

    #[test]
    fn sqrt_enclosures() {
        let tol = Rational::pow10(-20);
        for n in [2u64, 3, 5, 6, 7] {
            let (lo, hi) = sqrt_enclosure(n, &tol).unwrap();
            let n_q = Rational::from_int(n as i64);
            assert!(lo.clone() * lo.clone() <= n_q && n_q <= hi.clone() * hi.clone());
            assert!(hi - lo <= tol);
        }
        let (lo, hi) = sqrt_enclosure(4, &tol).unwrap();
        assert_eq!(lo, Rational::from_int(2));
        assert_eq!(hi, Rational::from_int(2));
    }

    #[test]
    fn wd_first_component() {
        let tol = Rational::pow10(-12);
        let c = wd_component(2, &tol).unwrap();
        for q_end in [&c.lo_bounds.0, &c.lo_bounds.1] {
            assert!(*q_end > q("176/1000") && *q_end < q("177/1000"));
        }
        let t = wd_example(2, &tol).unwrap();
        let comp = Interval::closed(c.lo_bounds.0.clone(), q("1/4")).unwrap();
        assert!(comp.is_subset_of(t.upper.part_containing(&q("1/5")).unwrap()));
        assert_eq!(wd_tail_majorant(2), q("1/18"));
    }

    #[test]
    fn figure_rows_are_deterministic() {
        let rows = figure_rows::<Rational>(1, 4);
        assert_eq!(rows.len(), 20);
        assert_eq!(rows[0].addr, addr(&[1]));
        assert_eq!(rows[0].kind, FigureKind::IL);
        assert!(figure_rows::<Rational>(0, 4).is_empty());
        assert_eq!(rows, figure_rows::<Rational>(1, 4));
    }
}
