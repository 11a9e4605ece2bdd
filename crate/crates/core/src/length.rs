use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// A length scale that may diverge.
///
/// Divergent correlation lengths are a first-class result (they mark phase
/// boundaries and stalled RG flows), so they get their own variant instead
/// of a large float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Length {
    Finite(f64),
    Infinite,
}

impl Length {
    /// `-1 / ln(ratio)` for a modulus ratio in `[0, 1]`; ratios within `tol`
    /// of one diverge.
    pub fn from_ratio(ratio: f64, tol: f64) -> Length {
        if ratio >= 1.0 - tol {
            Length::Infinite
        } else if ratio <= 0.0 {
            Length::Finite(0.0)
        } else {
            Length::Finite(-1.0 / ratio.ln())
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Length::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            Length::Finite(v) => Some(v),
            Length::Infinite => None,
        }
    }

    /// Plain float view, with `f64::INFINITY` for the divergent case.
    pub fn as_f64(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Length::Finite(v) => write!(f, "{v:.16e}"),
            Length::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Length {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Length::Finite(v) => s.serialize_f64(*v),
            Length::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Length {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Length::Finite(v)),
            Raw::Text(t) if t == "inf" => Ok(Length::Infinite),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("bad length `{t}`"))),
        }
    }
}
