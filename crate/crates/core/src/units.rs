//! Fixed-point time and distance values.
//!
//! Solomon data uses integer coordinates and windows, and distances are
//! truncated to one decimal, so every time and cost that appears in a model
//! is an exact multiple of 0.1. Storing tenths as integers keeps all
//! comparisons exact.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// A time or distance measured in tenths of a unit.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Tenths(pub i64);

impl Tenths {
    pub const ZERO: Tenths = Tenths(0);
    pub const MAX: Tenths = Tenths(i64::MAX / 4);

    /// Whole units, e.g. `Tenths::units(5) == Tenths(50)`.
    pub const fn units(v: i64) -> Self {
        Tenths(v * 10)
    }

    #[inline]
    pub const fn raw(self) -> i64 {
        self.0
    }

    /// Value in natural units.
    #[inline]
    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 10.0
    }

    /// Rounds a value in natural units to the nearest tenth.
    pub fn from_f64_round(v: f64) -> Self {
        Tenths((v * 10.0).round() as i64)
    }

    /// Truncated Euclidean distance between two points, `floor(10 * d) / 10`.
    ///
    /// Integer coordinates go through an exact integer square root so that
    /// perfect squares never lose a tenth to floating-point error.
    pub fn euclid_floor(ax: f64, ay: f64, bx: f64, by: f64) -> Self {
        let dx = ax - bx;
        let dy = ay - by;
        if ax.fract() == 0.0 && ay.fract() == 0.0 && bx.fract() == 0.0 && by.fract() == 0.0 {
            let sq = (dx * dx + dy * dy) as i64 * 100;
            return Tenths(isqrt(sq));
        }
        Tenths(((dx * dx + dy * dy).sqrt() * 10.0 + 1e-9).floor() as i64)
    }

    /// Parses a decimal literal with at most one fractional digit that is
    /// significant; further digits are truncated.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
        {
            return None;
        }
        let whole: i64 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().ok()?
        };
        let tenth = frac_part
            .chars()
            .next()
            .map(|c| c.to_digit(10).unwrap() as i64)
            .unwrap_or(0);
        let v = whole * 10 + tenth;
        Some(Tenths(if neg { -v } else { v }))
    }
}

fn isqrt(n: i64) -> i64 {
    if n <= 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as i64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

impl fmt::Display for Tenths {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let a = self.0.unsigned_abs();
        write!(f, "{}{}.{}", sign, a / 10, a % 10)
    }
}

impl Add for Tenths {
    type Output = Tenths;
    fn add(self, rhs: Tenths) -> Tenths {
        Tenths(self.0 + rhs.0)
    }
}

impl Sub for Tenths {
    type Output = Tenths;
    fn sub(self, rhs: Tenths) -> Tenths {
        Tenths(self.0 - rhs.0)
    }
}

impl Neg for Tenths {
    type Output = Tenths;
    fn neg(self) -> Tenths {
        Tenths(-self.0)
    }
}

impl AddAssign for Tenths {
    fn add_assign(&mut self, rhs: Tenths) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Tenths {
    fn sub_assign(&mut self, rhs: Tenths) {
        self.0 -= rhs.0;
    }
}

impl Sum for Tenths {
    fn sum<I: Iterator<Item = Tenths>>(iter: I) -> Tenths {
        Tenths(iter.map(|t| t.0).sum())
    }
}
