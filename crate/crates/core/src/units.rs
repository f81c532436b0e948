//! Unit-suffixed quantities.
//!
//! Config files may spell a quantity either as a bare number (already SI) or
//! as a string `"<number> <unit>"`, e.g. `"1e-5 cm"` or `"2 g/cm^3"`. The
//! serde helpers in this module normalise both forms to SI `f64`.

use serde::{Deserialize, Deserializer};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Density,
    Rate,
    Angle,
    Mass,
    Action,
}

#[derive(Debug, Error, PartialEq)]
pub enum UnitError {
    #[error("cannot parse number in quantity {0:?}")]
    BadNumber(String),
    #[error("unknown {dim:?} unit {unit:?}")]
    UnknownUnit { dim: Dimension, unit: String },
}

const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
const ELECTRON_VOLT: f64 = 1.602_176_634e-19;

fn unit_factor(dim: Dimension, unit: &str) -> Option<f64> {
    let u: String = unit.chars().filter(|c| !c.is_whitespace()).collect();
    let f = match dim {
        Dimension::Length => match u.as_str() {
            "m" => 1.0,
            "km" => 1e3,
            "cm" => 1e-2,
            "mm" => 1e-3,
            "um" | "µm" | "μm" => 1e-6,
            "nm" => 1e-9,
            "pm" => 1e-12,
            "fm" => 1e-15,
            _ => return None,
        },
        Dimension::Density => match u.as_str() {
            "kg/m^3" | "kg/m3" | "kg·m^-3" | "kg*m^-3" => 1.0,
            "g/cm^3" | "g/cm3" | "g/cc" | "g/ml" | "g/mL" => 1e3,
            "kg/l" | "kg/L" => 1e3,
            _ => return None,
        },
        Dimension::Rate => match u.as_str() {
            "1/s" | "/s" | "s^-1" | "s-1" | "Hz" | "hz" => 1.0,
            _ => return None,
        },
        Dimension::Angle => match u.as_str() {
            "rad" => 1.0,
            "deg" | "°" => std::f64::consts::PI / 180.0,
            _ => return None,
        },
        Dimension::Mass => match u.as_str() {
            "kg" => 1.0,
            "g" => 1e-3,
            "u" | "Da" | "amu" => ATOMIC_MASS_UNIT,
            _ => return None,
        },
        Dimension::Action => match u.as_str() {
            "J*s" | "J·s" | "Js" => 1.0,
            "eV*s" | "eV·s" | "eVs" => ELECTRON_VOLT,
            _ => return None,
        },
    };
    Some(f)
}

/// Parses `"<number> [unit]"` into SI. A missing unit means the number is
/// already SI.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, UnitError> {
    let text = text.trim();
    let split = text
        .find(char::is_whitespace)
        .or_else(|| text.find(|c: char| !(c.is_ascii_digit() || "+-.eE".contains(c))))
        .unwrap_or(text.len());
    let (num, unit) = text.split_at(split);
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| UnitError::BadNumber(text.to_string()))?;
    let unit = unit.trim();
    if unit.is_empty() {
        return Ok(value);
    }
    let factor = unit_factor(dim, unit).ok_or_else(|| UnitError::UnknownUnit {
        dim,
        unit: unit.to_string(),
    })?;
    // dividing by an exact 10ⁿ rounds "20 um" to 2e-5 rather than 1.9999999999999998e-5
    let inverse = 1.0 / factor;
    if factor < 1.0 && (inverse.round() - inverse).abs() < 1e-9 * inverse {
        return Ok(value / inverse.round());
    }
    Ok(value * factor)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Raw {
    Number(f64),
    Text(String),
}

fn quantity<'de, D: Deserializer<'de>>(d: D, dim: Dimension) -> Result<f64, D::Error> {
    match Raw::deserialize(d)? {
        Raw::Number(x) => Ok(x),
        Raw::Text(s) => parse_quantity(&s, dim).map_err(serde::de::Error::custom),
    }
}

pub fn length<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    quantity(d, Dimension::Length)
}

pub fn density<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    quantity(d, Dimension::Density)
}

pub fn rate<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    quantity(d, Dimension::Rate)
}

pub fn angle<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    quantity(d, Dimension::Angle)
}

pub fn mass<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    quantity(d, Dimension::Mass)
}

pub fn action<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    quantity(d, Dimension::Action)
}

pub fn opt_density<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
    match Option::<Raw>::deserialize(d)? {
        None => Ok(None),
        Some(Raw::Number(x)) => Ok(Some(x)),
        Some(Raw::Text(s)) => parse_quantity(&s, Dimension::Density)
            .map(Some)
            .map_err(serde::de::Error::custom),
    }
}

pub fn opt_length<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
    match Option::<Raw>::deserialize(d)? {
        None => Ok(None),
        Some(Raw::Number(x)) => Ok(Some(x)),
        Some(Raw::Text(s)) => parse_quantity(&s, Dimension::Length)
            .map(Some)
            .map_err(serde::de::Error::custom),
    }
}
