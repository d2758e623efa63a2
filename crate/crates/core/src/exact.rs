//! Exact arithmetic for metric values.
//!
//! An `ℓ_p` distance between lattice points is the `p`-th root of an integer,
//! so every distance here is stored as `power^(1/index)` with a rational
//! `power`. Single values compare exactly by raising both sides to a common
//! index. Sums of such values (needed for the half-sum expansive conditions)
//! go through [`RadicalSum`], which decides signs exactly: radicals are first
//! merged into classes whose ratios are rational; distinct classes are
//! linearly independent over `Q`, so the sum vanishes only when every class
//! coefficient does, and otherwise interval refinement terminates.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn integer(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Parses `7`, `-3/4` or a finite decimal such as `0.25`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = |e: &dyn fmt::Display| Error::invalid(format!("bad rational {s:?}: {e}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|e| bad(&e))?;
        let d: BigInt = d.trim().parse().map_err(|e| bad(&e))?;
        if d.is_zero() {
            return Err(bad(&"zero denominator"));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad(&"malformed decimal"));
        }
        let negative = whole.trim_start().starts_with('-');
        let w: BigInt = if whole.is_empty() || whole == "-" {
            BigInt::zero()
        } else {
            whole.parse().map_err(|e| bad(&e))?
        };
        let f: BigInt = frac.parse().map_err(|e| bad(&e))?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let f = BigRational::new(f, scale);
        let w = BigRational::from_integer(w);
        return Ok(if negative { w - f } else { w + f });
    }
    let n: BigInt = s.parse().map_err(|e| bad(&e))?;
    Ok(BigRational::from_integer(n))
}

pub fn format_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn to_biguint(n: &BigInt) -> BigUint {
    n.to_biguint().expect("nonnegative integer")
}

/// The exact `k`-th root of `n`, if `n` is a perfect power.
fn exact_root(n: &BigUint, k: u32) -> Option<BigUint> {
    let r = n.nth_root(k);
    (r.pow(k) == *n).then_some(r)
}

/// A nonnegative real `power^(1/index)`.
#[derive(Clone, Debug)]
pub struct Distance {
    index: u32,
    power: BigRational,
}

impl Distance {
    pub fn zero() -> Self {
        Self::from_rational(BigRational::zero())
    }

    pub fn from_integer(n: u64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// Panics on a negative value.
    pub fn from_rational(q: BigRational) -> Self {
        assert!(!q.is_negative(), "distance must be nonnegative");
        Self { index: 1, power: q }
    }

    /// `power^(1/index)`, collapsed to a rational when the root is exact.
    pub fn root(power: BigRational, index: u32) -> Self {
        assert!(index >= 1, "root index must be positive");
        assert!(!power.is_negative(), "distance must be nonnegative");
        if index == 1 {
            return Self { index, power };
        }
        let num = to_biguint(power.numer());
        let den = to_biguint(power.denom());
        if let (Some(a), Some(b)) = (exact_root(&num, index), exact_root(&den, index)) {
            return Self::from_rational(BigRational::new(a.into(), b.into()));
        }
        Self { index, power }
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    /// The value raised to `index`.
    pub fn power(&self) -> &BigRational {
        &self.power
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        (self.index == 1).then_some(&self.power)
    }

    pub fn is_zero(&self) -> bool {
        self.power.is_zero()
    }

    /// `k * self` for a nonnegative rational `k`.
    pub fn scale(&self, k: &BigRational) -> Distance {
        assert!(!k.is_negative(), "scale factor must be nonnegative");
        Distance::root(k.pow(self.index as i32) * &self.power, self.index)
    }

    /// `self / other`; `None` when `other` is zero.
    pub fn ratio(&self, other: &Distance) -> Option<Distance> {
        if other.is_zero() {
            return None;
        }
        let l = self.index.lcm(&other.index);
        let a = self.power.pow((l / self.index) as i32);
        let b = other.power.pow((l / other.index) as i32);
        Some(Distance::root(a / b, l))
    }

    pub fn to_f64(&self) -> f64 {
        let p = self.power.to_f64().unwrap_or(f64::INFINITY);
        if self.index == 1 {
            p
        } else {
            p.powf(1.0 / self.index as f64)
        }
    }
}

impl From<BigRational> for Distance {
    fn from(q: BigRational) -> Self {
        Distance::from_rational(q)
    }
}

impl PartialEq for Distance {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Distance {}

impl PartialOrd for Distance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Distance {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.index == other.index {
            return self.power.cmp(&other.power);
        }
        let l = self.index.lcm(&other.index);
        let a = self.power.pow((l / self.index) as i32);
        let b = other.power.pow((l / other.index) as i32);
        a.cmp(&b)
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = format_rational(&self.power);
        match self.index {
            1 => write!(f, "{p}"),
            2 => write!(f, "sqrt({p})"),
            k => write!(f, "({p})^(1/{k})"),
        }
    }
}

impl Serialize for Distance {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A finite sum `Σ c_i · d_i` with rational coefficients of any sign.
#[derive(Clone, Debug, Default)]
pub struct RadicalSum {
    terms: Vec<(BigRational, Distance)>,
}

impl RadicalSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn plus(mut self, coeff: BigRational, d: &Distance) -> Self {
        self.terms.push((coeff, d.clone()));
        self
    }

    pub fn plus_distance(self, d: &Distance) -> Self {
        self.plus(BigRational::one(), d)
    }

    pub fn minus(self, coeff: BigRational, d: &Distance) -> Self {
        self.plus(-coeff, d)
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(c, d)| c.to_f64().unwrap_or(0.0) * d.to_f64())
            .sum()
    }

    /// Exact sign of the sum.
    pub fn signum(&self) -> Ordering {
        let live: Vec<&(BigRational, Distance)> = self
            .terms
            .iter()
            .filter(|(c, d)| !c.is_zero() && !d.is_zero())
            .collect();
        if live.is_empty() {
            return Ordering::Equal;
        }
        let l = live.iter().fold(1u32, |acc, (_, d)| acc.lcm(&d.index));

        // c * d = (c / b) * N^(1/l) with N = a * b^(l-1) where d^l = a / b.
        let mut classes: Vec<(BigUint, BigRational)> = Vec::new();
        for (c, d) in live {
            let q = d.power.pow((l / d.index) as i32);
            let a = to_biguint(q.numer());
            let b = to_biguint(q.denom());
            let n = &a * b.pow(l - 1);
            let coeff = c / BigRational::from_integer(BigInt::from(b));
            let mut merged = false;
            for (rep, acc) in classes.iter_mut() {
                let m = &n * rep.pow(l - 1);
                if let Some(r) = exact_root(&m, l) {
                    // N^(1/l) = (r / rep) * rep^(1/l)
                    let factor = BigRational::new(r.into(), rep.clone().into());
                    *acc += coeff.clone() * factor;
                    merged = true;
                    break;
                }
            }
            if !merged {
                classes.push((n, coeff));
            }
        }
        classes.retain(|(_, c)| !c.is_zero());
        if classes.is_empty() {
            return Ordering::Equal;
        }

        let mut bits: u64 = 32;
        loop {
            let scale = BigUint::one() << bits;
            let denom = BigRational::from_integer(BigInt::from(scale.clone()));
            let mut lower = BigRational::zero();
            let mut upper = BigRational::zero();
            for (n, c) in &classes {
                let shifted = n * scale.pow(l);
                let r = shifted.nth_root(l);
                let exact = r.pow(l) == shifted;
                let lo = BigRational::from_integer(BigInt::from_biguint(Sign::Plus, r.clone())) / &denom;
                let hi = if exact {
                    lo.clone()
                } else {
                    BigRational::from_integer(BigInt::from_biguint(Sign::Plus, r + 1u32)) / &denom
                };
                if c.is_positive() {
                    lower += c * &lo;
                    upper += c * &hi;
                } else {
                    lower += c * &hi;
                    upper += c * &lo;
                }
            }
            if lower.is_positive() {
                return Ordering::Greater;
            }
            if upper.is_negative() {
                return Ordering::Less;
            }
            if lower == upper {
                return Ordering::Equal;
            }
            bits *= 2;
        }
    }
}
