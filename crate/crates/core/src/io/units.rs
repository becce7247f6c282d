//! Physical quantities with explicit units at the text boundary.

use crate::constants::TWO_PI;
use crate::error::{Error, Result};

/// What a config value measures; decides which units are accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Angular rate stored in rad/s; "Hz" units mean cycles and are scaled by 2π.
    AngularRate,
    /// Samples per second; only Hz units.
    SampleRate,
    Time,
    Temperature,
    Mass,
    Angle,
    Decibel,
    Dimensionless,
}

fn prefix(p: &str) -> Option<f64> {
    Some(match p {
        "" => 1.0,
        "k" => 1e3,
        "M" => 1e6,
        "G" => 1e9,
        "m" => 1e-3,
        "u" | "µ" => 1e-6,
        "n" => 1e-9,
        "p" => 1e-12,
        _ => return None,
    })
}

/// Parses "10 GHz", "1.4e6 rad/s", "294 K" into the SI value of `kind`.
pub fn parse_quantity(key: &str, text: &str, kind: Kind) -> Result<f64> {
    let text = text.trim();
    let (num, unit) = match text.find(char::is_whitespace) {
        Some(i) => (&text[..i], text[i..].trim()),
        None => (text, ""),
    };
    let v: f64 = num
        .parse()
        .map_err(|_| Error::validation(key, format!("`{num}` is not a number")))?;
    if !v.is_finite() {
        return Err(Error::validation(key, "must be finite"));
    }
    let bad = || Error::validation(key, format!("unit `{unit}` not accepted for {kind:?}"));
    let scaled = |base: &str| -> Option<f64> { unit.strip_suffix(base).and_then(prefix) };
    let out = match kind {
        Kind::Dimensionless => {
            if !unit.is_empty() {
                return Err(bad());
            }
            v
        }
        Kind::AngularRate => {
            if unit == "rad/s" {
                v
            } else {
                v * TWO_PI * scaled("Hz").ok_or_else(bad)?
            }
        }
        Kind::SampleRate => v * scaled("Hz").ok_or_else(bad)?,
        Kind::Time => v * scaled("s").ok_or_else(bad)?,
        Kind::Temperature => v * scaled("K").ok_or_else(bad)?,
        Kind::Mass => {
            if unit == "kg" {
                v
            } else {
                v * 1e-3 * scaled("g").ok_or_else(bad)?
            }
        }
        Kind::Angle => {
            if unit != "rad" {
                return Err(bad());
            }
            v
        }
        Kind::Decibel => {
            if unit != "dB" {
                return Err(bad());
            }
            v
        }
    };
    if unit.is_empty() && kind != Kind::Dimensionless {
        return Err(Error::validation(key, format!("missing unit for {kind:?}")));
    }
    Ok(out)
}

/// Canonical text of an SI value (shortest round-trip float, base unit).
pub fn format_quantity(v: f64, kind: Kind) -> String {
    let unit = match kind {
        Kind::AngularRate => " rad/s",
        Kind::SampleRate => " Hz",
        Kind::Time => " s",
        Kind::Temperature => " K",
        Kind::Mass => " kg",
        Kind::Angle => " rad",
        Kind::Decibel => " dB",
        Kind::Dimensionless => "",
    };
    format!("{v:?}{unit}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hz_is_cycles() {
        let w = parse_quantity("k", "10 GHz", Kind::AngularRate).unwrap();
        assert!((w - TWO_PI * 1e10).abs() < 1.0);
        assert_eq!(parse_quantity("k", "5 rad/s", Kind::AngularRate).unwrap(), 5.0);
        assert_eq!(parse_quantity("k", "64 MHz", Kind::SampleRate).unwrap(), 64e6);
    }

    #[test]
    fn units_required_and_checked() {
        assert!(parse_quantity("k", "10", Kind::AngularRate).is_err());
        assert!(parse_quantity("k", "10 K", Kind::AngularRate).is_err());
        assert!(parse_quantity("k", "3 Hz", Kind::Dimensionless).is_err());
        assert!(parse_quantity("k", "x K", Kind::Temperature).is_err());
        assert_eq!(parse_quantity("k", "20 ms", Kind::Time).unwrap(), 0.02);
        assert_eq!(parse_quantity("k", "1 pg", Kind::Mass).unwrap(), 1e-15);
    }

    #[test]
    fn canonical_round_trip() {
        for (v, k) in [(1.234e10, Kind::AngularRate), (0.1, Kind::Dimensionless), (294.0, Kind::Temperature)] {
            let s = format_quantity(v, k);
            assert_eq!(parse_quantity("k", &s, k).unwrap(), v);
        }
    }
}
