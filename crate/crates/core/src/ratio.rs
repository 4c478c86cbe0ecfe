//! Exact fractions for approximation bounds and the accuracy parameter.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Exact nonnegative fraction compared by cross-multiplication.
#[derive(Debug, Clone, Copy)]
pub struct Frac {
    pub num: i128,
    pub den: i128,
}

impl Frac {
    pub fn int(v: i128) -> Self {
        Frac { num: v, den: 1 }
    }

    pub fn new(num: i128, den: i128) -> Self {
        assert!(den > 0, "denominator must be positive");
        Frac { num, den }
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `value ≤ self · reference`, exactly.
    pub fn admits(self, value: i64, reference: i64) -> bool {
        (value as i128) * self.den <= self.num * reference as i128
    }
}

impl std::ops::Mul for Frac {
    type Output = Frac;

    fn mul(self, o: Frac) -> Frac {
        reduce(self.num * o.num, self.den * o.den)
    }
}

impl std::ops::Add for Frac {
    type Output = Frac;

    fn add(self, o: Frac) -> Frac {
        reduce(self.num * o.den + o.num * self.den, self.den * o.den)
    }
}

fn reduce(num: i128, den: i128) -> Frac {
    let g = gcd(num, den);
    Frac { num: num / g, den: den / g }
}

impl fmt::Display for Frac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl PartialEq for Frac {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Frac {}

impl PartialOrd for Frac {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frac {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

/// Harmonic number `H_k = 1 + 1/2 + … + 1/k` as an exact fraction.
pub fn harmonic(k: usize) -> Frac {
    let mut num: i128 = 0;
    let mut den: i128 = 1;
    for j in 1..=k as i128 {
        num = num * j + den;
        den *= j;
        let g = gcd(num, den);
        num /= g;
        den /= g;
    }
    Frac { num, den }
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs().max(1)
}

/// Positive rational accuracy parameter, parsed from `0.5`, `1/2`, or `2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Epsilon {
    pub num: u64,
    pub den: u64,
}

impl Epsilon {
    pub fn new(num: u64, den: u64) -> Result<Self, Error> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidParameter("epsilon must be positive".into()));
        }
        let g = gcd(num as i128, den as i128) as u64;
        Ok(Epsilon { num: num / g, den: den / g })
    }

    pub fn as_frac(&self) -> Frac {
        Frac::new(self.num as i128, self.den as i128)
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Epsilon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::InvalidParameter(format!("cannot parse epsilon from {s:?}"));
        let s = s.trim();
        if let Some((a, b)) = s.split_once('/') {
            return Epsilon::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 18 || !frac.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let den = 10u64.pow(frac.len() as u32);
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let fr: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let num = int.checked_mul(den).and_then(|x| x.checked_add(fr)).ok_or_else(bad)?;
        Epsilon::new(num, den)
    }
}
