//! Adversarial searches against claimed density-type sequences, and
//! certificates that re-check every inequality without repeating the search.
//!
//! * non-UDT: given `(γ_n, δ_n)`, nested intervals `I_k` around construction
//!   points where the larger one-sided density drops below `γ_k` at a radius
//!   below `δ_k`.
//! * non-SUDT: given `(γ_n, δ_n)`, a nested K-chain on which the fixed pair
//!   `γ′_n = 1 − 2^{-n}`, `δ′_n = 2^{-100n}` keeps holding while `(γ_n, δ_n)`
//!   fails infinitely often.
//! * finite unions: constant deltas that make every point a member.
//!
//! Everything here is exact and works over [`Rational`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::address::{a_value, r_value, Address};
use crate::construction::{alpha, k_interval, removal_length, truncate, TruncatedSet};
use crate::density::{in_e_gamma_delta, max_one_sided_density, Tri};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::scalar::Scalar;
use crate::Rational;

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod rat {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::scalar::Scalar;
    use crate::Rational;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&q.render())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        Rational::parse_scalar(&s).map_err(D::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for q in v {
                seq.serialize_element(&q.render())?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            Vec::<String>::deserialize(d)?
                .iter()
                .map(|s| Rational::parse_scalar(s).map_err(D::Error::custom))
                .collect()
        }
    }
}

fn q(n: i64) -> Rational {
    Rational::from_int(n)
}

/// Raw terms of a sequence: `c·q^n` or an explicit list (`n` is 1-based).
#[derive(Clone, Debug, PartialEq)]
pub enum Sequence {
    Geometric { c: Rational, q: Rational },
    Table(Vec<Rational>),
}

impl Sequence {
    pub fn term(&self, n: usize) -> Result<Rational> {
        if n == 0 {
            return Err(Error::InvalidSequence("terms are indexed from 1".into()));
        }
        match self {
            Sequence::Geometric { c, q } => Ok(c.clone() * num_traits::pow(q.clone(), n)),
            Sequence::Table(v) => v.get(n - 1).cloned().ok_or_else(|| {
                Error::RangeExhausted(format!("table has {} terms, term {n} requested", v.len()))
            }),
        }
    }

    pub fn table_len(&self) -> Option<usize> {
        match self {
            Sequence::Geometric { .. } => None,
            Sequence::Table(v) => Some(v.len()),
        }
    }

    fn validate_shape(&self) -> Result<()> {
        match self {
            Sequence::Geometric { c, q } => {
                if *c <= Rational::from_int(0) {
                    return Err(Error::InvalidSequence(format!("coefficient {c} must be positive")));
                }
                if *q <= Rational::from_int(0) || *q >= Rational::from_int(1) {
                    return Err(Error::InvalidSequence(format!("ratio {q} must lie in (0, 1)")));
                }
            }
            Sequence::Table(v) => {
                if v.is_empty() {
                    return Err(Error::InvalidSequence("empty table".into()));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sequence::Geometric { c, q } => write!(f, "geom:{}:{}", c.render(), q.render()),
            Sequence::Table(v) => {
                let items: Vec<String> = v.iter().map(Scalar::render).collect();
                write!(f, "table:{}", items.join(","))
            }
        }
    }
}

impl FromStr for Sequence {
    type Err = Error;

    /// `geom:C:Q` or `table:a,b,c`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSequence(format!("expected geom:C:Q or table:a,b,..., got {s:?}"));
        let (kind, rest) = s.trim().split_once(':').ok_or_else(bad)?;
        let seq = match kind {
            "geom" => {
                let (c, q) = rest.split_once(':').ok_or_else(bad)?;
                Sequence::Geometric {
                    c: Rational::parse_scalar(c)?,
                    q: Rational::parse_scalar(q)?,
                }
            }
            "table" => Sequence::Table(
                rest.split(',')
                    .map(Rational::parse_scalar)
                    .collect::<Result<Vec<_>>>()?,
            ),
            _ => return Err(bad()),
        };
        seq.validate_shape()?;
        Ok(seq)
    }
}

impl Serialize for Sequence {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Sequence {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `γ_n`: a geometric sequence stands for `1 − c·q^n`, a table for itself.
pub fn gamma_term(seq: &Sequence, n: usize) -> Result<Rational> {
    match seq {
        Sequence::Geometric { .. } => Ok(q(1) - seq.term(n)?),
        Sequence::Table(_) => seq.term(n),
    }
}

/// A pair `γ_n ↗ 1`, `δ_n ↘ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct SequenceSpec {
    gamma: Sequence,
    delta: Sequence,
}

#[derive(Deserialize)]
struct RawSpec {
    gamma: Sequence,
    delta: Sequence,
}

impl TryFrom<RawSpec> for SequenceSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        SequenceSpec::new(raw.gamma, raw.delta)
    }
}

impl SequenceSpec {
    /// Tables are checked on their whole range: `γ` strictly increasing and
    /// below 1, `δ` positive and nonincreasing.
    pub fn new(gamma: Sequence, delta: Sequence) -> Result<Self> {
        gamma.validate_shape()?;
        delta.validate_shape()?;
        if let Sequence::Table(v) = &gamma {
            if v.iter().any(|g| *g >= q(1)) {
                return Err(Error::InvalidSequence("gamma terms must be below 1".into()));
            }
            if v.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidSequence("gamma must be strictly increasing".into()));
            }
        }
        if let Sequence::Table(v) = &delta {
            if v.iter().any(|d| *d <= q(0)) {
                return Err(Error::InvalidSequence("delta terms must be positive".into()));
            }
            if v.windows(2).any(|w| w[0] < w[1]) {
                return Err(Error::InvalidSequence("delta must be nonincreasing".into()));
            }
        }
        Ok(Self { gamma, delta })
    }

    /// `γ_n = 1 − c_γ q_γ^n`, `δ_n = c_δ q_δ^n`.
    pub fn geometric(cg: Rational, qg: Rational, cd: Rational, qd: Rational) -> Result<Self> {
        Self::new(
            Sequence::Geometric { c: cg, q: qg },
            Sequence::Geometric { c: cd, q: qd },
        )
    }

    pub fn gamma(&self, n: usize) -> Result<Rational> {
        gamma_term(&self.gamma, n)
    }

    pub fn delta(&self, n: usize) -> Result<Rational> {
        self.delta.term(n)
    }

    pub fn gamma_sequence(&self) -> &Sequence {
        &self.gamma
    }

    pub fn delta_sequence(&self) -> &Sequence {
        &self.delta
    }
}

const COARSEN_SCAN_CAP: usize = 100_000;

/// `δ_n = min{δ̃_{n′} : γ̃_{n′} < 1 − 10^{-(n+1)}}` for `n = 1..=n_max`.
///
/// Since `δ̃` is nonincreasing the minimum is taken at the largest qualifying
/// `n′`. When no `n′` qualifies nothing constrains `δ_n` and `δ̃_1` is used.
pub fn derive_coarse_deltas(fine: &SequenceSpec, n_max: usize) -> Result<Vec<Rational>> {
    let mut out = Vec::with_capacity(n_max);
    let mut last = 0usize;
    for n in 1..=n_max {
        let target = q(1) - Rational::pow10(-(n as i64 + 1));
        // qualifying sets grow with n, so resume from the previous answer
        let mut m = last;
        loop {
            if let Some(len) = fine.gamma.table_len() {
                if m == len {
                    return Err(Error::RangeExhausted(format!(
                        "all {len} gamma terms lie below {}; cannot bound the qualifying set for n = {n}",
                        target.render()
                    )));
                }
            }
            if m >= COARSEN_SCAN_CAP {
                return Err(Error::RangeExhausted(format!(
                    "more than {COARSEN_SCAN_CAP} gamma terms below {}",
                    target.render()
                )));
            }
            if fine.gamma(m + 1)? < target {
                m += 1;
            } else {
                break;
            }
        }
        last = m;
        out.push(fine.delta(m.max(1))?);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelStatus {
    /// `I_k` is certified disjoint from `E^{γ_k,δ_k}`.
    Certified,
    /// `γ_k <= 1 − 2α_k`: the construction cannot exclude anything here.
    Vacuous,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessLevel {
    pub k: usize,
    pub address: Address,
    /// `n_k`, the last index of `address`.
    pub chosen_index: u32,
    #[serde(with = "rat")]
    pub point: Rational,
    /// `r_x = r_value(address) / 2`.
    #[serde(with = "rat")]
    pub scale: Rational,
    /// Half-width `ρ = α_k·r_x/2` of `interval`.
    #[serde(with = "rat")]
    pub radius: Rational,
    pub interval: Interval<Rational>,
    #[serde(with = "rat")]
    pub density_hi: Rational,
    #[serde(with = "rat")]
    pub gamma: Rational,
    #[serde(with = "rat")]
    pub delta: Rational,
    pub status: LevelStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessCertificate {
    #[serde(with = "rat")]
    pub epsilon: Rational,
    pub levels: Vec<WitnessLevel>,
    pub enclosure: Interval<Rational>,
}

impl WitnessCertificate {
    pub fn certified_levels(&self) -> usize {
        self.levels
            .iter()
            .filter(|l| l.status == LevelStatus::Certified)
            .count()
    }
}

fn level_geometry(addr: &Address, k: usize) -> Result<(Rational, Rational, Rational)> {
    let x = a_value::<Rational>(addr);
    let r_x = r_value::<Rational>(addr) / q(2);
    let rho = alpha::<Rational>(k)? * r_x.clone() / q(2);
    Ok((x, r_x, rho))
}

fn centered(x: &Rational, rho: &Rational) -> Interval<Rational> {
    Interval::closed(x.clone() - rho.clone(), x.clone() + rho.clone()).expect("rho > 0")
}

fn nests_in(inner: &Interval<Rational>, outer: &Interval<Rational>) -> bool {
    inner.lo() > outer.lo()
        && inner.hi() < outer.hi()
        && inner.length() * q(2) <= outer.length()
}

fn excludes(hi: &Rational, rho: &Rational, r_x: &Rational, gamma: &Rational) -> bool {
    // every x′ within ρ has density at most hi + ρ/r_x at radius r_x
    hi.clone() + rho.clone() / r_x.clone() < *gamma
}

/// Nested intervals `I_1 ⊃ … ⊃ I_levels`, each disjoint from `E^{γ_k,δ_k}`
/// unless marked vacuous.
///
/// The level-`k` point is `a` of `(n₁−1, …, n_{k−1}−1, n_k)`; these points
/// accumulate at the level-`(k−1)` point as `n_k` grows. `n_k > 1` is the
/// smallest index with `r_x < δ_k` whose interval nests strictly inside
/// `I_{k−1}` with at most half its length.
pub fn find_non_udt_witness(
    seq: &SequenceSpec,
    levels: usize,
    eps: &Rational,
    cap: u32,
) -> Result<WitnessCertificate> {
    if levels == 0 {
        return Err(Error::NonPositive { what: "levels" });
    }
    let t = truncate(eps)?;
    let mut outer = Interval::closed(q(-1), q(1))?;
    let mut prefix: Vec<u32> = Vec::new();
    let mut out = Vec::with_capacity(levels);
    for k in 1..=levels {
        let gamma = seq.gamma(k)?;
        let delta = seq.delta(k)?;
        let mut chosen = None;
        for n in 2..=cap {
            let mut idx = prefix.clone();
            idx.push(n);
            let addr = Address::new(idx)?;
            let (x, r_x, rho) = level_geometry(&addr, k)?;
            let interval = centered(&x, &rho);
            if r_x < delta && nests_in(&interval, &outer) {
                chosen = Some((n, addr, x, r_x, rho, interval));
                break;
            }
        }
        let (n, addr, x, r_x, rho, interval) = chosen.ok_or_else(|| Error::CapExceeded {
            cap,
            during: format!("choosing n_{k}"),
        })?;

        let alpha_k = alpha::<Rational>(k)?;
        let status = if gamma <= q(1) - q(2) * alpha_k {
            LevelStatus::Vacuous
        } else {
            LevelStatus::Certified
        };
        let density_hi = max_one_sided_density(&t, &x, &r_x)?.hi;
        if status == LevelStatus::Certified {
            let needed = removal_length::<Rational>(&addr);
            if needed < *eps {
                return Err(Error::NeedsFinerEpsilon {
                    level: k,
                    epsilon: eps.render(),
                    required: needed.render(),
                });
            }
            if !excludes(&density_hi, &rho, &r_x, &gamma) {
                return Err(Error::Certificate(format!(
                    "level {k}: density bound {} plus neighbourhood margin {} is not below gamma {}",
                    density_hi.render(),
                    (rho.clone() / r_x.clone()).render(),
                    gamma.render()
                )));
            }
        }
        out.push(WitnessLevel {
            k,
            address: addr,
            chosen_index: n,
            point: x,
            scale: r_x,
            radius: rho,
            interval: interval.clone(),
            density_hi,
            gamma,
            delta,
            status,
        });
        prefix.push(n - 1);
        outer = interval;
    }
    Ok(WitnessCertificate {
        epsilon: eps.clone(),
        enclosure: outer,
        levels: out,
    })
}

/// The full argument against a claimed UDT pair `(γ̃, δ̃)`: coarsen onto
/// `γ_n = 1 − 10^{-n}` and run the nested search there.
pub fn attack_udt(
    fine: &SequenceSpec,
    levels: usize,
    eps: &Rational,
    cap: u32,
) -> Result<WitnessCertificate> {
    let deltas = derive_coarse_deltas(fine, levels)?;
    let coarse = SequenceSpec::new(
        Sequence::Geometric {
            c: q(1),
            q: Rational::ratio(1, 10),
        },
        Sequence::Table(deltas),
    )?;
    find_non_udt_witness(&coarse, levels, eps, cap)
}

fn reject(msg: String) -> Error {
    Error::Certificate(msg)
}

/// Re-derives every level of `cert` from its fields, recomputing densities
/// on a fresh truncation at the recorded epsilon.
pub fn verify_non_udt(cert: &WitnessCertificate) -> Result<()> {
    let t = truncate(&cert.epsilon)?;
    verify_non_udt_on(cert, &t)
}

pub fn verify_non_udt_on(cert: &WitnessCertificate, t: &TruncatedSet<Rational>) -> Result<()> {
    if cert.levels.is_empty() {
        return Err(reject("no levels".into()));
    }
    let mut outer = Interval::closed(q(-1), q(1))?;
    let mut prefix: Vec<u32> = Vec::new();
    for (i, level) in cert.levels.iter().enumerate() {
        let k = i + 1;
        let fail = |what: &str| reject(format!("level {k}: {what}"));
        if level.k != k {
            return Err(fail("levels out of order"));
        }
        let idx = level.address.indices();
        if idx.len() != k || idx[..k - 1] != prefix[..] || idx[k - 1] != level.chosen_index {
            return Err(fail("address does not continue the decremented chain"));
        }
        if level.chosen_index < 2 {
            return Err(fail("chosen index must exceed 1"));
        }
        let (x, r_x, rho) = level_geometry(&level.address, k)?;
        if x != level.point || r_x != level.scale || rho != level.radius {
            return Err(fail("point, scale or radius disagree with the address"));
        }
        if level.interval != centered(&x, &rho) || !nests_in(&level.interval, &outer) {
            return Err(fail("interval does not nest"));
        }
        if level.scale >= level.delta {
            return Err(fail("scale is not below delta"));
        }
        let alpha_k = alpha::<Rational>(k)?;
        let vacuous = level.gamma <= q(1) - q(2) * alpha_k;
        match level.status {
            LevelStatus::Vacuous if !vacuous => {
                return Err(fail("marked vacuous but gamma exceeds 1 − 2α_k"));
            }
            LevelStatus::Vacuous => {}
            LevelStatus::Certified => {
                let hi = max_one_sided_density(t, &x, &r_x)?.hi;
                if hi > level.density_hi {
                    return Err(fail("recorded density bound is too small"));
                }
                if !excludes(&hi, &rho, &r_x, &level.gamma) {
                    return Err(fail("density bound is not below gamma"));
                }
            }
        }
        prefix.push(level.chosen_index - 1);
        outer = level.interval.clone();
    }
    if cert.enclosure != outer {
        return Err(reject("enclosure is not the last interval".into()));
    }
    Ok(())
}

/// The fixed pair `γ′_n = 1 − 2^{-n}`, `δ′_n = 2^{-100n}`.
pub fn base_prime_sequences() -> SequenceSpec {
    SequenceSpec::geometric(q(1), Rational::ratio(1, 2), q(1), Rational::pow2(-100))
        .expect("valid constants")
}

/// Base of the induction: `m′_1 = 1`, `k′_1 = 10`, `n′_1 = … = n′_10 = 1`.
pub const BASE_M_PRIME: usize = 1;
pub const BASE_K_PRIME: usize = 10;

/// Floor condition at `(k′, m′)`: `δ′_{m′} < r(n′_1..n′_{k′})` and
/// `γ′_{m′} < 1 − 384α_{k′}`, so the floor lemma puts the K-interval into
/// `E^{γ′_{m′},δ′_{m′}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckA {
    pub k_prime: usize,
    pub m_prime: usize,
    #[serde(with = "rat")]
    pub delta_prime: Rational,
    #[serde(with = "rat")]
    pub r_prefix: Rational,
    #[serde(with = "rat")]
    pub gamma_prime: Rational,
    #[serde(with = "rat")]
    pub floor: Rational,
    pub passed: bool,
}

/// Ceiling condition: `2·r(n′_1..n′_{k′+1}) < δ_m` and
/// `γ_m > 1 − α_{k′+1}/4`, so the K-interval one level down misses
/// `E^{γ_m,δ_m}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckB {
    pub m: usize,
    #[serde(with = "rat")]
    pub two_r: Rational,
    #[serde(with = "rat")]
    pub delta_m: Rational,
    #[serde(with = "rat")]
    pub gamma_m: Rational,
    #[serde(with = "rat")]
    pub ceiling: Rational,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SudtStep {
    pub j: usize,
    pub check_a: CheckA,
    /// `n′_{k′_j+1}`.
    pub n_next: u32,
    pub check_b: CheckB,
    /// `i_j`; `k′_{j+1} = k′_j + i_j`, `m′_{j+1} = m′_j + i_j`.
    pub i: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SudtCertificate {
    pub attacked: SequenceSpec,
    pub prime: SequenceSpec,
    pub steps: Vec<SudtStep>,
    /// Floor condition after the last step.
    pub closing_a: CheckA,
    /// `n′_1, …, n′_{k′_{j_max+1}}`.
    pub n_prime: Vec<u32>,
    /// K-interval of the full `n′` address; contains the limit point.
    pub enclosure: Interval<Rational>,
    pub note: String,
}

const SUDT_NOTE: &str = "condition (a) is checked through the small-radius floor on the whole K-interval; condition (b) through the 1 - alpha/4 ceiling at radius 2r";

fn check_a(prime: &SequenceSpec, n_prime: &[u32], m_prime: usize) -> Result<CheckA> {
    let k_prime = n_prime.len();
    let addr = Address::new(n_prime.to_vec())?;
    let delta_prime = prime.delta(m_prime)?;
    let r_prefix = r_value::<Rational>(&addr);
    let gamma_prime = prime.gamma(m_prime)?;
    let floor = q(1) - q(384) * alpha::<Rational>(k_prime)?;
    let passed = delta_prime < r_prefix && gamma_prime < floor;
    Ok(CheckA {
        k_prime,
        m_prime,
        delta_prime,
        r_prefix,
        gamma_prime,
        floor,
        passed,
    })
}

fn check_b(seq: &SequenceSpec, n_prime_next: &[u32], m: usize) -> Result<CheckB> {
    let addr = Address::new(n_prime_next.to_vec())?;
    let two_r = q(2) * r_value::<Rational>(&addr);
    let delta_m = seq.delta(m)?;
    let gamma_m = seq.gamma(m)?;
    let ceiling = q(1) - alpha::<Rational>(addr.depth())? / q(4);
    let passed = two_r < delta_m && gamma_m > ceiling;
    Ok(CheckB {
        m,
        two_r,
        delta_m,
        gamma_m,
        ceiling,
        passed,
    })
}

/// Runs `j_max` steps of the induction against the attacked pair `seq`.
/// Every "large enough" choice is the smallest qualifying integer, searched
/// up to `cap`.
pub fn find_non_sudt_witness(seq: &SequenceSpec, j_max: usize, cap: u32) -> Result<SudtCertificate> {
    if j_max == 0 {
        return Err(Error::NonPositive { what: "j_max" });
    }
    let prime = base_prime_sequences();
    let cap_usize = cap as usize;
    let mut n_prime = vec![1u32; BASE_K_PRIME];
    let mut m_prime = BASE_M_PRIME;
    let mut m_prev = 0usize;
    let mut steps = Vec::with_capacity(j_max);
    let mut a = check_a(&prime, &n_prime, m_prime)?;
    if !a.passed {
        return Err(Error::Certificate("base case fails".into()));
    }
    for j in 1..=j_max {
        let k_prime = n_prime.len();
        let ceiling = q(1) - alpha::<Rational>(k_prime + 1)? / q(4);
        let m = (m_prev + 1..=cap_usize)
            .find(|&m| seq.gamma(m).is_ok_and(|g| g > ceiling))
            .ok_or_else(|| Error::CapExceeded {
                cap,
                during: format!("choosing m_{j}"),
            })?;
        let delta_m = seq.delta(m)?;
        let n_next = (1..=cap)
            .find(|&n| {
                let mut idx = n_prime.clone();
                idx.push(n);
                let addr = Address::new(idx).expect("indices >= 1");
                q(2) * r_value::<Rational>(&addr) < delta_m
            })
            .ok_or_else(|| Error::CapExceeded {
                cap,
                during: format!("choosing n'_{}", k_prime + 1),
            })?;
        let mut next = n_prime.clone();
        next.push(n_next);
        let b = check_b(seq, &next, m)?;
        debug_assert!(b.passed);

        let mut found = None;
        for i in 1..=cap_usize {
            let mut idx = next.clone();
            idx.extend(std::iter::repeat_n(1, i - 1));
            let candidate = check_a(&prime, &idx, m_prime + i)?;
            if candidate.passed {
                found = Some((i, idx, candidate));
                break;
            }
        }
        let (i, idx, next_a) = found.ok_or_else(|| Error::CapExceeded {
            cap,
            during: format!("choosing i_{j}"),
        })?;
        steps.push(SudtStep {
            j,
            check_a: a,
            n_next,
            check_b: b,
            i,
        });
        n_prime = idx;
        m_prime += i;
        m_prev = m;
        a = next_a;
    }
    let enclosure = k_interval::<Rational>(&Address::new(n_prime.clone())?);
    Ok(SudtCertificate {
        attacked: seq.clone(),
        prime,
        steps,
        closing_a: a,
        n_prime,
        enclosure,
        note: SUDT_NOTE.into(),
    })
}

/// Recomputes every check of `cert` from its sequences and indices.
pub fn verify_non_sudt(cert: &SudtCertificate) -> Result<()> {
    if cert.prime != base_prime_sequences() {
        return Err(reject("prime sequences differ from 1 - 2^-n, 2^-100n".into()));
    }
    if cert.steps.is_empty() {
        return Err(reject("no steps".into()));
    }
    let n = &cert.n_prime;
    if n.len() < BASE_K_PRIME || n[..BASE_K_PRIME].iter().any(|&v| v != 1) {
        return Err(reject("base indices must be ten ones".into()));
    }
    let mut k_prime = BASE_K_PRIME;
    let mut m_prime = BASE_M_PRIME;
    let mut m_prev = 0usize;
    for (idx, step) in cert.steps.iter().enumerate() {
        let j = idx + 1;
        let fail = |what: &str| reject(format!("step {j}: {what}"));
        if step.j != j || step.i == 0 {
            return Err(fail("malformed step"));
        }
        let k_next = k_prime + step.i;
        if n.len() < k_next
            || n[k_prime] != step.n_next
            || n[k_prime + 1..k_next].iter().any(|&v| v != 1)
        {
            return Err(fail("indices do not match the recorded choices"));
        }
        let a = check_a(&cert.prime, &n[..k_prime], m_prime)?;
        if !a.passed || a != step.check_a {
            return Err(fail("floor condition fails"));
        }
        if step.check_b.m <= m_prev {
            return Err(fail("m_j is not increasing"));
        }
        let b = check_b(&cert.attacked, &n[..=k_prime], step.check_b.m)?;
        if !b.passed || b != step.check_b {
            return Err(fail("ceiling condition fails"));
        }
        m_prev = step.check_b.m;
        k_prime = k_next;
        m_prime += step.i;
    }
    if n.len() != k_prime {
        return Err(reject("trailing indices".into()));
    }
    let closing = check_a(&cert.prime, n, m_prime)?;
    if !closing.passed || closing != cert.closing_a {
        return Err(reject("closing floor condition fails".into()));
    }
    if cert.enclosure != k_interval::<Rational>(&Address::new(n.clone())?) {
        return Err(reject("enclosure is not the final K-interval".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteCheck {
    #[serde(with = "rat")]
    pub point: Rational,
    #[serde(with = "rat")]
    pub gamma: Rational,
    pub result: Tri,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteSudtCertificate {
    pub components: IntervalSet<Rational>,
    #[serde(with = "rat")]
    pub delta: Rational,
    #[serde(with = "rat::vec")]
    pub gammas: Vec<Rational>,
    pub checks: Vec<FiniteCheck>,
}

/// Constant `δ_n = L_min / 2` for a finite union of non-degenerate closed
/// intervals with shortest component `L_min`: at any point of a component,
/// the longer side has length at least `L_min / 2`, so its density is 1 for
/// every `r <= δ_n`. Membership is checked at each component's endpoints
/// and midpoint (the point with the shortest longer side).
pub fn sudt_deltas_finite_union(
    s: &IntervalSet<Rational>,
    gammas: &Sequence,
    n_max: usize,
) -> Result<(Vec<Rational>, FiniteSudtCertificate)> {
    if s.is_empty() {
        return Err(Error::DegenerateComponent("empty set".into()));
    }
    for part in s.parts() {
        if part.lo_open() || part.hi_open() || part.lo() >= part.hi() {
            return Err(Error::DegenerateComponent(part.to_string()));
        }
    }
    let l_min = s
        .parts()
        .iter()
        .map(Interval::length)
        .reduce(|a, b| if a <= b { a } else { b })
        .expect("non-empty");
    let delta = l_min / q(2);
    let gammas: Vec<Rational> = (1..=n_max)
        .map(|n| gamma_term(gammas, n))
        .collect::<Result<_>>()?;
    let cert = FiniteSudtCertificate {
        checks: finite_checks(s, &delta, &gammas)?,
        components: s.clone(),
        delta: delta.clone(),
        gammas,
    };
    if let Some(bad) = cert.checks.iter().find(|c| c.result != Tri::Yes) {
        return Err(Error::Certificate(format!(
            "membership at {} for gamma {} is {:?}",
            bad.point.render(),
            bad.gamma.render(),
            bad.result
        )));
    }
    Ok((vec![delta; n_max], cert))
}

fn finite_checks(
    s: &IntervalSet<Rational>,
    delta: &Rational,
    gammas: &[Rational],
) -> Result<Vec<FiniteCheck>> {
    let t = TruncatedSet::exact(s.clone());
    let mut out = Vec::new();
    for part in s.parts() {
        let mid = (part.lo().clone() + part.hi().clone()) / q(2);
        for point in [part.lo().clone(), mid, part.hi().clone()] {
            for gamma in gammas {
                let result = in_e_gamma_delta(&t, &point, gamma, delta, delta, None)?;
                out.push(FiniteCheck {
                    point: point.clone(),
                    gamma: gamma.clone(),
                    result,
                });
            }
        }
    }
    Ok(out)
}

pub fn verify_sudt_finite(cert: &FiniteSudtCertificate) -> Result<()> {
    let l_min = cert
        .components
        .parts()
        .iter()
        .map(Interval::length)
        .reduce(|a, b| if a <= b { a } else { b })
        .ok_or_else(|| reject("no components".into()))?;
    if cert.delta.clone() * q(2) > l_min || cert.delta <= q(0) {
        return Err(reject("delta exceeds half the shortest component".into()));
    }
    let checks = finite_checks(&cert.components, &cert.delta, &cert.gammas)?;
    if checks != cert.checks || checks.iter().any(|c| c.result != Tri::Yes) {
        return Err(reject("membership checks do not reproduce".into()));
    }
    Ok(())
}

/// Any certificate, tagged by `type` in JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
#[allow(clippy::large_enum_variant)] // built once per run, never stored in bulk
pub enum Certificate {
    NonUdt(WitnessCertificate),
    NonSudt(SudtCertificate),
    SudtFinite(FiniteSudtCertificate),
}

impl Certificate {
    pub fn verify(&self) -> Result<()> {
        match self {
            Certificate::NonUdt(c) => verify_non_udt(c),
            Certificate::NonSudt(c) => verify_non_sudt(c),
            Certificate::SudtFinite(c) => verify_sudt_finite(c),
        }
    }
}

/// `|[a(successor), a(child 1)]| / r`: the share of K where points of the
/// construction can accumulate. Always `1/16`.
pub fn abar_sparsity_check(addr: &Address) -> Rational {
    let bottom = a_value::<Rational>(&addr.parent_successor());
    let top = a_value::<Rational>(&addr.child(1).expect("1 is a valid index"));
    (top - bottom) / r_value::<Rational>(addr)
}
