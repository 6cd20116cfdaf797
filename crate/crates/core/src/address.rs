//! Index sequences `(n₁, …, n_k)` naming the points of the construction and
//! their gap lengths.
//!
//! Depth-one points are `a_n = 2^{-n}`. A child of `(n₁, …, n_k)` sits above
//! the successor point `(n₁, …, n_k + 1)` by `2^{-(n+3)}` times the parent
//! gap, so the gap of every address has the closed form
//! `2^{-(n₁+1)} · Π_{i≥2} 2^{-(n_i+4)}`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cmp_scalar, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Address(Vec<u32>);

impl TryFrom<Vec<u32>> for Address {
    type Error = Error;

    fn try_from(indices: Vec<u32>) -> Result<Self> {
        Address::new(indices)
    }
}

impl From<Address> for Vec<u32> {
    fn from(addr: Address) -> Self {
        addr.0
    }
}

impl Address {
    pub fn new(indices: Vec<u32>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidAddress("address must be non-empty".into()));
        }
        if indices.contains(&0) {
            return Err(Error::InvalidAddress(format!(
                "indices must be >= 1, got {indices:?}"
            )));
        }
        Ok(Self(indices))
    }

    pub fn top(n: u32) -> Result<Self> {
        Self::new(vec![n])
    }

    /// `(1, 1, …, 1)` with `depth` ones.
    pub fn ones(depth: usize) -> Result<Self> {
        Self::new(vec![1; depth])
    }

    pub fn indices(&self) -> &[u32] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn last(&self) -> u32 {
        *self.0.last().expect("addresses are non-empty")
    }

    pub fn parent(&self) -> Option<Self> {
        (self.0.len() > 1).then(|| Self(self.0[..self.0.len() - 1].to_vec()))
    }

    /// `(n₁, …, n_{k−1}, n_k + 1)`.
    pub fn parent_successor(&self) -> Self {
        let mut next = self.0.clone();
        *next.last_mut().expect("addresses are non-empty") += 1;
        Self(next)
    }

    pub fn child(&self, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidAddress("child index must be >= 1".into()));
        }
        let mut next = self.0.clone();
        next.push(n);
        Ok(Self(next))
    }

    /// Child of `parent`, or the depth-one address `(n)` when `parent` is `None`.
    pub fn child_of(parent: Option<&Self>, n: u32) -> Result<Self> {
        match parent {
            Some(p) => p.child(n),
            None => Self::top(n),
        }
    }

    /// All addresses of depth `1..=max_depth` with every index `<= max_index`,
    /// depth-major and lexicographic within a depth.
    pub fn all_up_to(max_depth: usize, max_index: u32) -> Vec<Self> {
        let mut out = Vec::new();
        let mut layer: Vec<Vec<u32>> = vec![Vec::new()];
        for _ in 0..max_depth {
            let mut next = Vec::with_capacity(layer.len() * max_index as usize);
            for prefix in &layer {
                for n in 1..=max_index {
                    let mut v = prefix.clone();
                    v.push(n);
                    next.push(v);
                }
            }
            out.extend(next.iter().cloned().map(Self));
            layer = next;
        }
        out
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ")")
    }
}

/// The point `a_{n₁…n_k}`, by the defining recursion.
pub fn a_value<T: Scalar>(addr: &Address) -> T {
    match addr.parent() {
        None => T::pow2(-i64::from(addr.last())),
        Some(parent) => {
            let base = a_value::<T>(&parent.parent_successor());
            base + T::pow2(-(i64::from(addr.last()) + 3)) * r_value::<T>(&parent)
        }
    }
}

/// The gap `r_{n₁…n_k} = a_{n₁…n_k} − a_{n₁…n_k+1}`, by closed form.
pub fn r_value<T: Scalar>(addr: &Address) -> T {
    T::pow2(-r_exponent(addr))
}

/// `e` with `r_value(addr) = 2^{-e}`.
pub fn r_exponent(addr: &Address) -> i64 {
    let idx = addr.indices();
    let head = i64::from(idx[0]) + 1;
    idx[1..].iter().fold(head, |acc, &n| acc + i64::from(n) + 4)
}

/// The gap computed from its definition as a difference of points.
pub fn r_value_by_difference<T: Scalar>(addr: &Address) -> T {
    a_value::<T>(addr) - a_value::<T>(&addr.parent_successor())
}

/// Geometric order of two addresses (by exact point value).
pub fn cmp_by_value(a: &Address, b: &Address) -> Ordering {
    cmp_scalar(&a_value::<crate::Rational>(a), &a_value::<crate::Rational>(b))
}
