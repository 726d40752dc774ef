use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact rational exponent.
pub type Exponent = Ratio<i64>;

pub fn rat(n: i64, d: i64) -> Exponent {
    Ratio::new(n, d)
}

pub fn parse_ratio(s: &str) -> Result<Exponent> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("not a rational number: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Ratio::new(n, d))
        }
        None => Ok(Ratio::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn format_ratio(r: &Exponent) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub mod ratio_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Exponent, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_ratio(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Exponent, D::Error> {
        let s = String::deserialize(d)?;
        parse_ratio(&s).map_err(serde::de::Error::custom)
    }
}

/// Decay rate: a rational power or `Infinite` for exponential decay.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kappa {
    Finite(Exponent),
    Infinite,
}

impl Kappa {
    pub fn finite(&self) -> Option<Exponent> {
        match self {
            Kappa::Finite(k) => Some(*k),
            Kappa::Infinite => None,
        }
    }
}

impl PartialOrd for Kappa {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Kappa {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Kappa::Finite(a), Kappa::Finite(b)) => a.cmp(b),
            (Kappa::Finite(_), Kappa::Infinite) => Ordering::Less,
            (Kappa::Infinite, Kappa::Finite(_)) => Ordering::Greater,
            (Kappa::Infinite, Kappa::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Kappa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kappa::Finite(k) => f.write_str(&format_ratio(k)),
            Kappa::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Kappa {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Kappa {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "inf" {
            Ok(Kappa::Infinite)
        } else {
            parse_ratio(&s).map(Kappa::Finite).map_err(serde::de::Error::custom)
        }
    }
}

/// Lebesgue exponents `(p, q)` stored as reciprocals; `1/inf = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LebesguePair {
    pub inv_p: Exponent,
    pub inv_q: Exponent,
}

fn parse_exponent(s: &str) -> Result<Exponent> {
    let t = s.trim();
    if matches!(t, "inf" | "infinity" | "∞") {
        return Ok(Exponent::zero());
    }
    let v = parse_ratio(t)?;
    if v < Exponent::one() {
        return Err(Error::InvalidArgument(format!("Lebesgue exponent {t} is below 1")));
    }
    Ok(v.recip())
}

fn format_exponent(inv: &Exponent) -> String {
    if inv.is_zero() {
        "inf".into()
    } else {
        format_ratio(&inv.recip())
    }
}

impl LebesguePair {
    pub fn new(p: &str, q: &str) -> Result<Self> {
        Ok(Self {
            inv_p: parse_exponent(p)?,
            inv_q: parse_exponent(q)?,
        })
    }

    pub fn l1_linf() -> Self {
        Self {
            inv_p: Exponent::one(),
            inv_q: Exponent::zero(),
        }
    }

    pub fn l2_l2() -> Self {
        Self {
            inv_p: rat(1, 2),
            inv_q: rat(1, 2),
        }
    }

    /// The dual pair `(p, p')`.
    pub fn dual(inv_p: Exponent) -> Result<Self> {
        if inv_p < rat(1, 2) || inv_p > Exponent::one() {
            return Err(Error::InvalidArgument("dual pairs need 1 <= p <= 2".into()));
        }
        Ok(Self {
            inv_p,
            inv_q: Exponent::one() - inv_p,
        })
    }

    /// `1/p - 1/q`.
    pub fn gap(&self) -> Exponent {
        self.inv_p - self.inv_q
    }

    pub fn is_dual(&self) -> bool {
        self.inv_p + self.inv_q == Exponent::one()
    }

    pub fn p(&self) -> String {
        format_exponent(&self.inv_p)
    }

    pub fn q(&self) -> String {
        format_exponent(&self.inv_q)
    }
}

impl fmt::Display for LebesguePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.p(), self.q())
    }
}

impl FromStr for LebesguePair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let (p, q) = inner
            .split_once(',')
            .ok_or_else(|| Error::InvalidArgument(format!("expected \"p,q\", got {s:?}")))?;
        Self::new(p, q)
    }
}

#[derive(Serialize, Deserialize)]
struct PairRepr {
    p: String,
    q: String,
}

impl Serialize for LebesguePair {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PairRepr {
            p: self.p(),
            q: self.q(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LebesguePair {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PairRepr::deserialize(d)?;
        LebesguePair::new(&r.p, &r.q).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_parse_and_print() {
        let p = LebesguePair::new("4/3", "4").unwrap();
        assert_eq!(p.inv_p, rat(3, 4));
        assert_eq!(p.gap(), rat(1, 2));
        assert!(p.is_dual());
        assert_eq!(p.to_string(), "(4/3, 4)");
        let q: LebesguePair = "1,inf".parse().unwrap();
        assert_eq!(q, LebesguePair::l1_linf());
        let json = serde_json::to_string(&q).unwrap();
        assert_eq!(json, r#"{"p":"1","q":"inf"}"#);
        assert_eq!(serde_json::from_str::<LebesguePair>(&json).unwrap(), q);
        assert!(LebesguePair::new("1/2", "2").is_err());
        assert!(parse_ratio("1/0").is_err());
    }

    #[test]
    fn kappa_order() {
        assert!(Kappa::Finite(rat(1, 2)) < Kappa::Finite(rat(3, 2)));
        assert!(Kappa::Finite(rat(100, 1)) < Kappa::Infinite);
        assert_eq!(serde_json::to_string(&Kappa::Infinite).unwrap(), "\"inf\"");
        let k: Kappa = serde_json::from_str("\"-1/2\"").unwrap();
        assert_eq!(k, Kappa::Finite(rat(-1, 2)));
    }
}
