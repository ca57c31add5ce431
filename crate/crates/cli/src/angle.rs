use std::f64::consts::PI;

use serde::{de, Deserialize, Deserializer};

/// Parses an angle in radians: a plain number, or a rational multiple of π
/// such as `pi`, `pi/2`, `3pi/4`, `3*pi/4`, `0.75pi`.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let s: String = text.trim().to_ascii_lowercase().chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse angle {text:?} (radians, or a multiple of pi such as 3pi/4)");
    let value = if let Some(pos) = s.find("pi") {
        let (head, rest) = (&s[..pos], &s[pos + 2..]);
        let head = head.strip_suffix('*').unwrap_or(head);
        let coef = match head {
            "" | "+" => 1.0,
            "-" => -1.0,
            h => h.parse::<f64>().map_err(|_| bad())?,
        };
        let denom = match rest {
            "" => 1.0,
            r => r.strip_prefix('/').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?,
        };
        coef * PI / denom
    } else {
        s.parse::<f64>().map_err(|_| bad())?
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

/// Serde helper accepting either a number or a π-shorthand string.
pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }
    match Repr::deserialize(d)? {
        Repr::Num(v) => Ok(v),
        Repr::Str(s) => parse_angle(&s).map_err(de::Error::custom),
    }
}
