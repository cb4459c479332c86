//! Exact angles stored as rational multiples of π.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// An angle `r·π` with `r` an exact, reduced rational.
///
/// All pulse areas, optical phases and free-evolution angles are carried in
/// this form so that periodicity arguments (for example "every kinetic angle
/// is a multiple of π/8") can be decided exactly. Conversion to `f64` only
/// happens when a matrix element is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Angle(Rational64);

impl Angle {
    pub const ZERO: Angle = Angle(Rational64::new_raw(0, 1));
    pub const PI: Angle = Angle(Rational64::new_raw(1, 1));

    /// `numer/denom · π`. Panics if `denom == 0`.
    pub fn pi_frac(numer: i64, denom: i64) -> Self {
        Angle(Rational64::new(numer, denom))
    }

    /// Const constructor; `numer/denom` must already be reduced with `denom > 0`.
    pub const fn pi_frac_raw(numer: i64, denom: i64) -> Self {
        Angle(Rational64::new_raw(numer, denom))
    }

    pub fn from_ratio(r: Rational64) -> Self {
        Angle(r)
    }

    /// The coefficient of π.
    pub fn ratio(self) -> Rational64 {
        self.0
    }

    pub fn numer(self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(self) -> i64 {
        *self.0.denom()
    }

    pub fn is_zero(self) -> bool {
        self.0.is_zero()
    }

    /// Value in radians.
    pub fn radians(self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN) * std::f64::consts::PI
    }

    /// True when the angle is an integer multiple of `π/denom`.
    pub fn is_multiple_of_pi_over(self, denom: i64) -> bool {
        (self.0 * Rational64::from_integer(denom)).is_integer()
    }

    pub fn scale(self, factor: Rational64) -> Self {
        Angle(self.0 * factor)
    }
}

impl Add for Angle {
    type Output = Angle;
    fn add(self, rhs: Angle) -> Angle {
        Angle(self.0 + rhs.0)
    }
}

impl Sub for Angle {
    type Output = Angle;
    fn sub(self, rhs: Angle) -> Angle {
        Angle(self.0 - rhs.0)
    }
}

impl Neg for Angle {
    type Output = Angle;
    fn neg(self) -> Angle {
        Angle(-self.0)
    }
}

impl Mul<Rational64> for Angle {
    type Output = Angle;
    fn mul(self, rhs: Rational64) -> Angle {
        self.scale(rhs)
    }
}

/// Formats the π coefficient: `0`, `1`, `-3/8`.
impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_ratio(f, self.0)
    }
}

pub(crate) fn write_ratio(f: &mut impl fmt::Write, r: Rational64) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

pub(crate) fn format_ratio(r: Rational64) -> String {
    let mut s = String::new();
    write_ratio(&mut s, r).expect("writing to a String cannot fail");
    s
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed rational `{0}`")]
pub struct ParseRatioError(pub String);

/// Parses `n`, `-n`, `n/d` or `-n/d` into a reduced rational.
pub fn parse_ratio(text: &str) -> Result<Rational64, ParseRatioError> {
    let err = || ParseRatioError(text.to_string());
    let t = text.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: i64 = num.parse().map_err(|_| err())?;
    let den: i64 = den.parse().map_err(|_| err())?;
    if den == 0 {
        return Err(err());
    }
    Ok(Rational64::new(num, den))
}

impl FromStr for Angle {
    type Err = ParseRatioError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_ratio(s).map(Angle)
    }
}

impl Serialize for Angle {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
