//! Certified bounds on one-sided densities `|E ∩ [x, x+r]| / r` and
//! `|E ∩ [x−r, x]| / r` computed from a [`TruncatedSet`].
//!
//! Open and closed query windows are not distinguished: they have the same
//! measure.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::address::{a_value, r_value, Address};
use crate::construction::{alpha, k_interval, TruncatedSet};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::scalar::{max_of, min_of, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct DensityBound<T> {
    pub lo: T,
    pub hi: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Left,
    Right,
    Max,
}

impl Mode {
    fn sides(self) -> &'static [Side] {
        match self {
            Mode::Left => &[Side::Left],
            Mode::Right => &[Side::Right],
            Mode::Max => &[Side::Left, Side::Right],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tri {
    Yes,
    No,
    Unknown,
}

fn check_radius<T: Scalar>(r: &T) -> Result<()> {
    if *r <= T::zero() {
        return Err(Error::NonPositive { what: "radius r" });
    }
    Ok(())
}

/// `[x−r, x]` or `[x, x+r]`.
pub fn window<T: Scalar>(x: &T, r: &T, side: Side) -> Interval<T> {
    let (lo, hi) = match side {
        Side::Left => (x.clone() - r.clone(), x.clone()),
        Side::Right => (x.clone(), x.clone() + r.clone()),
    };
    Interval::closed(lo, hi).expect("r >= 0")
}

/// Two-sided bound on `|E ∩ j|`.
pub fn measure_in<T: Scalar>(t: &TruncatedSet<T>, j: &Interval<T>) -> DensityBound<T> {
    let hi = t.upper.measure_within(j);
    let lo = max_of(&(hi.clone() - t.slack_in(j)), &T::zero());
    DensityBound { lo, hi }
}

pub fn one_sided_density<T: Scalar>(
    t: &TruncatedSet<T>,
    x: &T,
    r: &T,
    side: Side,
) -> Result<DensityBound<T>> {
    check_radius(r)?;
    let m = measure_in(t, &window(x, r, side));
    Ok(DensityBound {
        lo: m.lo / r.clone(),
        hi: m.hi / r.clone(),
    })
}

pub fn max_one_sided_density<T: Scalar>(
    t: &TruncatedSet<T>,
    x: &T,
    r: &T,
) -> Result<DensityBound<T>> {
    let left = one_sided_density(t, x, r, Side::Left)?;
    let right = one_sided_density(t, x, r, Side::Right)?;
    Ok(DensityBound {
        lo: max_of(&left.lo, &right.lo),
        hi: max_of(&left.hi, &right.hi),
    })
}

fn density_in_mode<T: Scalar>(
    t: &TruncatedSet<T>,
    x: &T,
    r: &T,
    mode: Mode,
) -> Result<DensityBound<T>> {
    match mode {
        Mode::Left => one_sided_density(t, x, r, Side::Left),
        Mode::Right => one_sided_density(t, x, r, Side::Right),
        Mode::Max => max_one_sided_density(t, x, r),
    }
}

/// `r ↦ c/r + s` on one piece.
struct Hyperbola<T> {
    c: T,
    s: T,
}

impl<T: Scalar> Hyperbola<T> {
    fn at(&self, r: &T) -> T {
        self.c.clone() / r.clone() + self.s.clone()
    }
}

/// `min_{r ∈ [ra, rb]} max_i f_i(r)`. Each `f_i` is monotone, so the minimum
/// sits at an endpoint or where two of them cross.
fn min_of_max<T: Scalar>(fs: &[Hyperbola<T>], ra: &T, rb: &T) -> T {
    let mut candidates = vec![ra.clone(), rb.clone()];
    for (i, f) in fs.iter().enumerate() {
        for g in &fs[i + 1..] {
            if f.s != g.s {
                let r = (f.c.clone() - g.c.clone()) / (g.s.clone() - f.s.clone());
                if r > *ra && r < *rb {
                    candidates.push(r);
                }
            }
        }
    }
    let value = |r: &T| {
        fs.iter()
            .map(|f| f.at(r))
            .reduce(|a, b| max_of(&a, &b))
            .expect("at least one side")
    };
    candidates
        .iter()
        .map(value)
        .reduce(|a, b| min_of(&a, &b))
        .expect("two endpoints")
}

/// Certified bound on `inf_{r ∈ [r_lo, r_hi]}` of the density in `mode`.
///
/// On `upper` the numerator is piecewise linear in `r` with slope 0 or 1, so
/// each side is `c/r + s` between consecutive breakpoints. For the lower
/// bound the slack at the right end of a piece is charged to the whole piece.
pub fn inf_density_over_range<T: Scalar>(
    t: &TruncatedSet<T>,
    x: &T,
    r_lo: &T,
    r_hi: &T,
    mode: Mode,
) -> Result<DensityBound<T>> {
    if *r_lo <= T::zero() || r_lo > r_hi {
        return Err(Error::DegenerateRange {
            lo: r_lo.render(),
            hi: r_hi.render(),
        });
    }
    if r_lo == r_hi {
        return density_in_mode(t, x, r_lo, mode);
    }

    let sides = mode.sides();
    let mut breaks = vec![r_lo.clone(), r_hi.clone()];
    for &side in sides {
        let reach = window(x, r_hi, side);
        for part in t.upper.parts_near(&reach) {
            for e in [part.lo(), part.hi()] {
                let r = match side {
                    Side::Left => x.clone() - e.clone(),
                    Side::Right => e.clone() - x.clone(),
                };
                if r > *r_lo && r < *r_hi {
                    breaks.push(r);
                }
            }
        }
    }
    breaks.sort_by(crate::scalar::cmp_scalar);
    breaks.dedup();

    // numerator and slack per side at every breakpoint
    let table: Vec<Vec<(T, T)>> = sides
        .iter()
        .map(|&side| {
            breaks
                .iter()
                .map(|r| {
                    let j = window(x, r, side);
                    (t.upper.measure_within(&j), t.slack_in(&j))
                })
                .collect()
        })
        .collect();

    let mut lo: Option<T> = None;
    let mut hi: Option<T> = None;
    for p in 0..breaks.len() - 1 {
        let (ra, rb) = (&breaks[p], &breaks[p + 1]);
        let mut upper_fs = Vec::with_capacity(sides.len());
        let mut lower_fs = Vec::with_capacity(sides.len());
        for col in &table {
            let (na, _) = &col[p];
            let (nb, sb) = &col[p + 1];
            let s = (nb.clone() - na.clone()) / (rb.clone() - ra.clone());
            let c = na.clone() - s.clone() * ra.clone();
            lower_fs.push(Hyperbola {
                c: c.clone() - sb.clone(),
                s: s.clone(),
            });
            upper_fs.push(Hyperbola { c, s });
        }
        let piece_hi = min_of_max(&upper_fs, ra, rb);
        let piece_lo = max_of(&min_of_max(&lower_fs, ra, rb), &T::zero());
        hi = Some(match hi {
            Some(h) => min_of(&h, &piece_hi),
            None => piece_hi,
        });
        lo = Some(match lo {
            Some(l) => min_of(&l, &piece_lo),
            None => piece_lo,
        });
    }
    Ok(DensityBound {
        lo: lo.expect("at least one piece"),
        hi: hi.expect("at least one piece"),
    })
}

/// `(r′_k, 1 − 384·α_k)`: for every `x ∈ Ā ∩ K(chain[k−1])` and every
/// `r ∈ (0, r′_k)` the larger one-sided density of `E` is at least the bound.
/// The floor comes from the two-case analysis of scales between consecutive
/// K-intervals and is not recomputed here.
pub fn small_r_floor_certificate<T: Scalar>(chain: &[Address], k: usize) -> Result<(T, T)> {
    if k == 0 || chain.len() != k {
        return Err(Error::NotNested(format!(
            "expected {k} addresses, got {}",
            chain.len()
        )));
    }
    if chain[0].depth() != 1 {
        return Err(Error::NotNested(format!("{} is not a top-level address", chain[0])));
    }
    for w in chain.windows(2) {
        if w[1].parent().as_ref() != Some(&w[0]) {
            return Err(Error::NotNested(format!("{} is not a child of {}", w[1], w[0])));
        }
    }
    let bound = T::one() - T::from_int(384) * alpha::<T>(k)?;
    Ok((r_value::<T>(&chain[k - 1]), bound))
}

/// Evidence that the density stays high at all radii below some floor.
#[derive(Clone, Debug, PartialEq)]
pub enum SmallRCertificate<T> {
    /// `[x, x+radius]` (or `[x−radius, x]`) lies inside the set.
    SolidSide { side: Side, radius: T },
    /// `x = a_value(anchor)` with `anchor` extending the last chain element,
    /// so `x ∈ A ∩ K(chain[k−1])` and the small-radius floor applies.
    Floor { chain: Vec<Address>, anchor: Address },
}

fn solid_side<T: Scalar>(t: &TruncatedSet<T>, x: &T, radius: &T, side: Side) -> bool {
    if *radius <= T::zero() {
        return false;
    }
    let j = window(x, radius, side);
    t.upper.parts().iter().any(|p| j.is_subset_of(p)) && t.slack_in(&j).is_zero()
}

/// Checks `cert` for `x` and returns `(radius, bound)`: the density is at
/// least `bound` for every `r` in `(0, radius)`.
pub fn check_small_r_certificate<T: Scalar>(
    t: &TruncatedSet<T>,
    x: &T,
    cert: &SmallRCertificate<T>,
) -> Result<(T, T)> {
    match cert {
        SmallRCertificate::SolidSide { side, radius } => {
            if !solid_side(t, x, radius, *side) {
                return Err(Error::Certificate(format!(
                    "{side} side of radius {} at {} is not inside the set",
                    radius.render(),
                    x.render()
                )));
            }
            // radius itself is covered as well, which is more than needed
            Ok((radius.clone(), T::one()))
        }
        SmallRCertificate::Floor { chain, anchor } => {
            let (radius, bound) = small_r_floor_certificate::<T>(chain, chain.len())?;
            let last = chain.last().expect("non-empty chain");
            let extends = anchor.depth() >= last.depth()
                && anchor.indices()[..last.depth()] == *last.indices();
            if !extends {
                return Err(Error::Certificate(format!("{anchor} does not extend {last}")));
            }
            if a_value::<T>(anchor) != *x {
                return Err(Error::Certificate(format!(
                    "{} is not the point of {anchor}",
                    x.render()
                )));
            }
            debug_assert!(k_interval::<T>(last).contains(x));
            Ok((radius, bound))
        }
    }
}

/// Three-valued membership of `x` in `E^{γ,δ}`: the larger one-sided density
/// is at least `γ` at every `r ∈ (0, δ]`.
///
/// Radii in `[r_floor, δ]` are handled exactly; `(0, r_floor)` needs a
/// certificate. Without one, a solid side of radius `r_floor` is tried.
pub fn in_e_gamma_delta<T: Scalar>(
    t: &TruncatedSet<T>,
    x: &T,
    gamma: &T,
    delta: &T,
    r_floor: &T,
    small_r_certificate: Option<&SmallRCertificate<T>>,
) -> Result<Tri> {
    if *r_floor <= T::zero() || r_floor > delta {
        return Err(Error::DegenerateRange {
            lo: r_floor.render(),
            hi: delta.render(),
        });
    }
    let inf = inf_density_over_range(t, x, r_floor, delta, Mode::Max)?;
    if inf.hi < *gamma {
        return Ok(Tri::No);
    }
    if inf.lo < *gamma {
        return Ok(Tri::Unknown);
    }
    let covered = match small_r_certificate {
        Some(cert) => match check_small_r_certificate(t, x, cert) {
            Ok((radius, bound)) => radius >= *r_floor && bound >= *gamma,
            Err(_) => false,
        },
        None => [Side::Left, Side::Right]
            .iter()
            .any(|&side| solid_side(t, x, r_floor, side)),
    };
    Ok(if covered { Tri::Yes } else { Tri::Unknown })
}

/// Increment of `f(y) = |E ∩ [0, y]|` (signed) between `x` and `y`, as
/// bounds on `|f(y) − f(x)|`.
fn primitive_increment<T: Scalar>(t: &TruncatedSet<T>, x: &T, y: &T) -> DensityBound<T> {
    let (lo, hi) = if y < x { (y, x) } else { (x, y) };
    measure_in(t, &Interval::closed(lo.clone(), hi.clone()).expect("ordered"))
}

/// `M_f(x, r) = sup_{|y−x| ≤ r} |f(x) − f(y)| / r` for the primitive `f` of
/// the indicator of `E`. Since `f` is monotone the supremum is attained at
/// `y = x ± r`, which makes this the larger one-sided density.
pub fn m_f<T: Scalar>(t: &TruncatedSet<T>, x: &T, r: &T) -> Result<DensityBound<T>> {
    check_radius(r)?;
    let below = primitive_increment(t, x, &(x.clone() - r.clone()));
    let above = primitive_increment(t, x, &(x.clone() + r.clone()));
    Ok(DensityBound {
        lo: max_of(&below.lo, &above.lo) / r.clone(),
        hi: max_of(&below.hi, &above.hi) / r.clone(),
    })
}
