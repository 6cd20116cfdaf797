//! Named batches of exact checks over bounded address ranges.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::address::{a_value, r_value, r_value_by_difference, Address};
use crate::construction::{alpha, enumerate_removals, k_interval, truncate, TruncatedSet};
use crate::density::{max_one_sided_density, measure_in};
use crate::error::{Error, Result};
use crate::interval::closures_pairwise_disjoint;
use crate::scalar::Scalar;
use crate::witness::{base_prime_sequences, BASE_K_PRIME, BASE_M_PRIME};
use crate::Rational;

pub const MAX_DEPTH: usize = 4;
pub const MAX_INDEX: u32 = 12;
/// Finest accepted epsilon is `2^-MAX_EPSILON_BITS`.
pub const MAX_EPSILON_BITS: i64 = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Calc,
    Lemma,
    Kicsi,
    Base2,
    Disjoint,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Calc,
        Suite::Lemma,
        Suite::Kicsi,
        Suite::Base2,
        Suite::Disjoint,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Calc => "calc",
            Suite::Lemma => "lemma",
            Suite::Kicsi => "kicsi",
            Suite::Base2 => "base2",
            Suite::Disjoint => "disjoint",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::InvalidSequence(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub suite: Suite,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub depth: usize,
    pub index: u32,
    pub epsilon: Rational,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            depth: 3,
            index: 6,
            epsilon: Rational::pow2(-40),
        }
    }
}

impl SuiteConfig {
    /// Rejects caps beyond the documented limits before any work starts.
    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 || self.index == 0 {
            return Err(Error::NonPositive { what: "depth and index caps" });
        }
        if self.depth > MAX_DEPTH {
            return Err(Error::CapExceeded {
                cap: MAX_DEPTH as u32,
                during: format!("validating depth {}", self.depth),
            });
        }
        if self.index > MAX_INDEX {
            return Err(Error::CapExceeded {
                cap: MAX_INDEX,
                during: format!("validating index {}", self.index),
            });
        }
        if self.epsilon <= Rational::from_int(0) {
            return Err(Error::NonPositive { what: "epsilon" });
        }
        if self.epsilon < Rational::pow2(-MAX_EPSILON_BITS) {
            return Err(Error::CapExceeded {
                cap: MAX_EPSILON_BITS as u32,
                during: format!("validating epsilon {} (finest is 2^-50)", self.epsilon.render()),
            });
        }
        Ok(())
    }
}

struct Collector {
    suite: Suite,
    out: Vec<CheckResult>,
}

impl Collector {
    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.out.push(CheckResult {
            suite: self.suite,
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }
}

fn q(s: &str) -> Rational {
    Rational::parse_scalar(s).expect("literal")
}

pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    cfg.validate()?;
    let mut c = Collector {
        suite,
        out: Vec::new(),
    };
    match suite {
        Suite::Calc => calc(&mut c, cfg),
        Suite::Lemma => lemma(&mut c, &truncate(&cfg.epsilon)?, cfg),
        Suite::Kicsi => kicsi(&mut c, &truncate(&cfg.epsilon)?, cfg)?,
        Suite::Base2 => base2(&mut c)?,
        Suite::Disjoint => disjoint(&mut c, cfg)?,
    }
    Ok(c.out)
}

fn calc(c: &mut Collector, cfg: &SuiteConfig) {
    let worked = [
        (vec![1], "1/2"),
        (vec![2], "1/4"),
        (vec![1, 1], "17/64"),
        (vec![1, 2], "33/128"),
    ];
    for (idx, want) in worked {
        let addr = Address::new(idx).expect("valid");
        let got = a_value::<Rational>(&addr);
        c.push(format!("a{addr}"), got == q(want), format!("{} (expected {want})", got.render()));
    }
    let r11 = r_value_by_difference::<Rational>(&Address::new(vec![1, 1]).expect("valid"));
    c.push("r(1,1)", r11 == q("1/128"), r11.render());

    let mut failures = Vec::new();
    let all = Address::all_up_to(cfg.depth, cfg.index);
    for addr in &all {
        let succ = addr.parent_successor();
        let a = a_value::<Rational>(addr);
        let a_succ = a_value::<Rational>(&succ);
        for n in 1..=cfg.index {
            let ch = a_value::<Rational>(&addr.child(n).expect("n >= 1"));
            if !(a_succ < ch && ch < a) {
                failures.push(format!("(i) at {addr}, child {n}"));
            }
        }
        let r_succ = a_succ.clone() - a_value::<Rational>(&succ.parent_successor());
        if r_succ * Rational::from_int(2) != a.clone() - a_succ {
            failures.push(format!("(ii) at {addr}"));
        }
        if r_value::<Rational>(addr) != r_value_by_difference::<Rational>(addr) {
            failures.push(format!("closed form at {addr}"));
        }
    }
    c.push(
        format!("ordering, halving, closed form on {} addresses", all.len()),
        failures.is_empty(),
        failures.first().cloned().unwrap_or_else(|| "ok".into()),
    );
}

fn lemma(c: &mut Collector, t: &TruncatedSet<Rational>, cfg: &SuiteConfig) {
    for addr in Address::all_up_to(cfg.depth, cfg.index) {
        let k = k_interval::<Rational>(&addr);
        let alpha_k = alpha::<Rational>(addr.depth()).expect("depth >= 1");
        let need = (Rational::from_int(1) - Rational::from_int(2) * alpha_k) * k.length();
        let got = measure_in(t, &k).lo;
        c.push(
            format!("|E ∩ K{addr}|"),
            got >= need,
            format!("lo {} vs {}", got.to_decimal(12), need.to_decimal(12)),
        );
    }
}

fn kicsi(c: &mut Collector, t: &TruncatedSet<Rational>, cfg: &SuiteConfig) -> Result<()> {
    for addr in Address::all_up_to(cfg.depth.min(2), cfg.index) {
        let k = k_interval::<Rational>(&addr);
        let r = Rational::from_int(2) * r_value::<Rational>(&addr);
        let ceiling = Rational::from_int(1) - alpha::<Rational>(addr.depth())? / Rational::from_int(4);
        let mut samples = vec![k.lo().clone(), k.hi().clone()];
        samples.push((k.lo().clone() + k.hi().clone()) / Rational::from_int(2));
        for n in 1..=cfg.index {
            samples.push(a_value(&addr.child(n)?));
        }
        samples.retain(|x| t.upper.contains(x));
        let worst = samples
            .iter()
            .map(|x| max_one_sided_density(t, x, &r).map(|d| d.hi))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .reduce(|a, b| if a >= b { a } else { b });
        match worst {
            Some(hi) => c.push(
                format!("ceiling on K{addr} ({} points)", samples.len()),
                hi <= ceiling,
                format!("hi {} vs {}", hi.to_decimal(12), ceiling.to_decimal(12)),
            ),
            None => c.push(format!("ceiling on K{addr}"), false, "no sample survives truncation"),
        }
    }
    Ok(())
}

fn base2(c: &mut Collector) -> Result<()> {
    let prime = base_prime_sequences();
    let r = r_value::<Rational>(&Address::ones(BASE_K_PRIME)?);
    let d = prime.delta(BASE_M_PRIME)?;
    c.push(
        "delta'_1 < r(1 x 10)",
        d == Rational::pow2(-100) && r == Rational::pow2(-47) && d < r,
        format!("{} < {}", d.to_decimal(12), r.to_decimal(12)),
    );
    let g = prime.gamma(BASE_M_PRIME)?;
    let floor = Rational::from_int(1) - Rational::from_int(384) * alpha::<Rational>(BASE_K_PRIME)?;
    c.push(
        "gamma'_1 < 1 - 384 alpha_10",
        g == q("1/2") && g < floor,
        format!("{} < {}", g.render(), floor.render()),
    );
    Ok(())
}

fn disjoint(c: &mut Collector, cfg: &SuiteConfig) -> Result<()> {
    let pairs = enumerate_removals(&cfg.epsilon)?;
    let closures: Vec<_> = pairs
        .iter()
        .flat_map(|p| [p.left.closure(), p.right.closure()])
        .collect();
    c.push(
        format!("{} closed removals pairwise disjoint", closures.len()),
        closures_pairwise_disjoint(&closures),
        format!("epsilon {}", cfg.epsilon.render()),
    );
    let inside = closures
        .iter()
        .all(|i| *i.lo() > Rational::from_int(0) && *i.hi() <= q("5/8"));
    c.push("removals inside (0, 5/8]", inside, "");
    Ok(())
}
