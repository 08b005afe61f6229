//! Exact rationals and their `"p/q"` text form.

use num_rational::Rational64;
use serde::{Deserialize, Deserializer, Serializer};

pub type Q = Rational64;

/// Parses `"3"`, `"-3/4"`.
pub fn parse_rational(text: &str) -> Option<Q> {
    let text = text.trim();
    match text.split_once('/') {
        Some((p, q)) => {
            let q: i64 = q.trim().parse().ok()?;
            (q != 0).then_some(())?;
            Some(Q::new(p.trim().parse().ok()?, q))
        }
        None => Some(Q::from_integer(text.parse().ok()?)),
    }
}

pub fn format_rational(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawEntry {
    Int(i64),
    Text(String),
}

fn from_raw(raw: RawEntry) -> Result<Q, String> {
    match raw {
        RawEntry::Int(n) => Ok(Q::from_integer(n)),
        RawEntry::Text(s) => parse_rational(&s).ok_or_else(|| format!("bad rational {s:?}")),
    }
}

/// Serde adapter for a vector of rationals written as strings (integers accepted on input).
pub mod vec_serde {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Q], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(format_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
        let raw: Vec<RawEntry> = Vec::deserialize(d)?;
        raw.into_iter()
            .map(from_raw)
            .collect::<Result<_, _>>()
            .map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for dense matrices of rationals.
pub mod matrix_serde {
    use super::*;

    pub fn serialize<S: Serializer>(m: &[Vec<Q>], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(
            m.iter()
                .map(|row| row.iter().map(format_rational).collect::<Vec<_>>()),
        )
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Q>>, D::Error> {
        let raw: Vec<Vec<RawEntry>> = Vec::deserialize(d)?;
        raw.into_iter()
            .map(|row| row.into_iter().map(from_raw).collect::<Result<Vec<_>, _>>())
            .collect::<Result<_, _>>()
            .map_err(serde::de::Error::custom)
    }
}
