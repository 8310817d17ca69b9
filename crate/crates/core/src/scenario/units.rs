//! Strings such as `"511 keV"`, `"1 MHz"` or `"300 m"` parsed into SI values.
//!
//! Decimal prefixes are applied by shifting the decimal exponent of the
//! literal before it is parsed, so `"1 nm"` is the correctly rounded `1e-9`.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;

use crate::constants::{electronvolt, PhysicalConstants};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dimension {
    Energy,
    Frequency,
    Length,
    Time,
    Potential,
    ElectricField,
    /// Kilograms, or a rest energy written in electronvolts.
    Mass,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dimension::Energy => "energy (eV, J)",
            Dimension::Frequency => "frequency (Hz)",
            Dimension::Length => "length (m)",
            Dimension::Time => "time (s)",
            Dimension::Potential => "potential (V)",
            Dimension::ElectricField => "electric field (V/m)",
            Dimension::Mass => "mass (kg, eV/c^2)",
        };
        f.write_str(s)
    }
}

const PREFIXES: [(&str, i32); 13] = [
    ("a", -18),
    ("f", -15),
    ("p", -12),
    ("n", -9),
    ("u", -6),
    ("\u{b5}", -6),
    ("\u{3bc}", -6),
    ("m", -3),
    ("c", -2),
    ("k", 3),
    ("M", 6),
    ("G", 9),
    ("T", 12),
];

/// Base symbol, extra decimal exponent, and the SI factor applied after parsing.
fn bases(dim: Dimension) -> Vec<(&'static str, i32, f64)> {
    let c = PhysicalConstants::si().c;
    match dim {
        Dimension::Energy => vec![("eV", 0, electronvolt()), ("J", 0, 1.0)],
        Dimension::Frequency => vec![("Hz", 0, 1.0)],
        Dimension::Length => vec![("m", 0, 1.0)],
        Dimension::Time => vec![("s", 0, 1.0)],
        Dimension::Potential => vec![("V", 0, 1.0)],
        Dimension::ElectricField => vec![("V/m", 0, 1.0)],
        Dimension::Mass => {
            vec![("g", -3, 1.0), ("eV/c^2", 0, electronvolt() / (c * c)), ("eV", 0, electronvolt() / (c * c))]
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitError(pub String);

impl fmt::Display for UnitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UnitError {}

fn split(text: &str) -> Result<(&str, &str), UnitError> {
    let mut parts = text.split_whitespace();
    let number = parts.next().ok_or_else(|| UnitError("empty quantity".into()))?;
    let unit = parts.next().unwrap_or("");
    if parts.next().is_some() {
        return Err(UnitError(format!("expected `<number> <unit>`, got {text:?}")));
    }
    Ok((number, unit))
}

/// Parses `number * 10^shift` with a single rounding.
fn parse_shifted(number: &str, shift: i32) -> Result<f64, UnitError> {
    let bad = || UnitError(format!("invalid number {number:?}"));
    let plain: f64 = number.parse().map_err(|_| bad())?;
    if !plain.is_finite() || number.contains(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E') {
        return Err(bad());
    }
    if shift == 0 {
        return Ok(plain);
    }
    let shifted = match number.find(['e', 'E']) {
        Some(i) => {
            let exp: i32 = number[i + 1..].parse().map_err(|_| bad())?;
            format!("{}e{}", &number[..i], exp + shift)
        }
        None => format!("{number}e{shift}"),
    };
    let v: f64 = shifted.parse().map_err(|_| bad())?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

fn resolve(unit: &str, dim: Dimension) -> Option<(i32, f64)> {
    for (base, exp, factor) in bases(dim) {
        if unit == base {
            return Some((exp, factor));
        }
        if let Some(prefix) = unit.strip_suffix(base) {
            if let Some((_, p)) = PREFIXES.iter().find(|(s, _)| *s == prefix) {
                return Some((exp + p, factor));
            }
        }
    }
    None
}

/// SI value of `text`, which must carry a unit of dimension `dim`.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, UnitError> {
    let (number, unit) = split(text)?;
    if unit.is_empty() {
        return Err(UnitError(format!("{text:?} needs a unit of {dim}")));
    }
    let (shift, factor) =
        resolve(unit, dim).ok_or_else(|| UnitError(format!("unit {unit:?} is not a unit of {dim}")))?;
    Ok(parse_shifted(number, shift)? * factor)
}

/// Velocity as a fraction of `c`: a bare number, `"0.6 c"`, or `"3e6 m/s"`.
pub fn parse_beta(text: &str) -> Result<f64, UnitError> {
    let (number, unit) = split(text)?;
    let c = PhysicalConstants::si().c;
    match unit {
        "" | "c" => parse_shifted(number, 0),
        "m/s" => Ok(parse_shifted(number, 0)? / c),
        "km/s" => Ok(parse_shifted(number, 3)? / c),
        other => Err(UnitError(format!("unit {other:?} is not a velocity (c, m/s, km/s)"))),
    }
}

macro_rules! quantity {
    ($(#[$doc:meta])* $name:ident, $dim:expr) => {
        $(#[$doc])*
        #[derive(Clone, Copy, Debug, PartialEq)]
        pub struct $name(pub f64);

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let text = String::deserialize(d)?;
                parse_quantity(&text, $dim).map($name).map_err(de::Error::custom)
            }
        }
    };
}

quantity!(
    /// Joules.
    Energy,
    Dimension::Energy
);
quantity!(
    /// Hertz (ordinary, not angular).
    Frequency,
    Dimension::Frequency
);
quantity!(
    /// Metres.
    Length,
    Dimension::Length
);
quantity!(
    /// Seconds.
    Time,
    Dimension::Time
);
quantity!(
    /// Volts.
    Potential,
    Dimension::Potential
);
quantity!(
    /// Volts per metre.
    ElectricField,
    Dimension::ElectricField
);
quantity!(
    /// Kilograms.
    Mass,
    Dimension::Mass
);

/// Dimensionless `v / c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Beta(pub f64);

impl<'de> Deserialize<'de> for Beta {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct BetaVisitor;
        impl Visitor<'_> for BetaVisitor {
            type Value = Beta;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number (fraction of c) or a velocity string")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Beta, E> {
                Ok(Beta(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Beta, E> {
                Ok(Beta(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Beta, E> {
                Ok(Beta(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Beta, E> {
                parse_beta(v).map(Beta).map_err(E::custom)
            }
        }
        d.deserialize_any(BetaVisitor)
    }
}
