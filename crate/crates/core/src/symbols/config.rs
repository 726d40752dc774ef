use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::MonomialPoly;
use super::spec::{LowerTerm, SymbolSpec};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermEntry {
    pub alpha: Vec<u32>,
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrincipalEntry {
    pub degree: usize,
    pub terms: Vec<TermEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerEntry {
    pub alpha: Vec<u32>,
    pub r: u32,
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// On-disk form of a [`SymbolSpec`]. Principal degrees that are absent are zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolFile {
    pub dimension: usize,
    pub order: usize,
    #[serde(default)]
    pub principal: Vec<PrincipalEntry>,
    #[serde(default)]
    pub lower: Vec<LowerEntry>,
}

impl SymbolFile {
    pub fn to_spec(&self) -> Result<SymbolSpec> {
        let n = self.dimension;
        let mut principal: Vec<MonomialPoly> =
            (0..self.order).map(|_| MonomialPoly::zero(n)).collect();
        for (idx, p) in self.principal.iter().enumerate() {
            if p.degree == 0 || p.degree > self.order {
                return Err(Error::Config {
                    path: format!("principal[{idx}].degree"),
                    message: format!("degree {} outside 1..={}", p.degree, self.order),
                });
            }
            for (t_idx, t) in p.terms.iter().enumerate() {
                if t.alpha.len() != n {
                    return Err(Error::Config {
                        path: format!("principal[{idx}].terms[{t_idx}].alpha"),
                        message: format!("expected {n} exponents, got {}", t.alpha.len()),
                    });
                }
                principal[p.degree - 1].add_term(t.alpha.clone(), Complex64::new(t.re, t.im));
            }
        }
        for (idx, t) in self.lower.iter().enumerate() {
            if t.alpha.len() != n {
                return Err(Error::Config {
                    path: format!("lower[{idx}].alpha"),
                    message: format!("expected {n} exponents, got {}", t.alpha.len()),
                });
            }
        }
        let lower = self
            .lower
            .iter()
            .map(|t| LowerTerm {
                alpha: t.alpha.clone(),
                r: t.r,
                c: Complex64::new(t.re, t.im),
            })
            .collect();
        SymbolSpec::new(self.order, n, principal, lower)
    }

    pub fn from_spec(s: &SymbolSpec) -> Self {
        let principal = s
            .principal()
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(idx, p)| PrincipalEntry {
                degree: idx + 1,
                terms: p
                    .terms()
                    .map(|(a, c)| TermEntry {
                        alpha: a.clone(),
                        re: c.re,
                        im: c.im,
                    })
                    .collect(),
            })
            .collect();
        let lower = s
            .lower()
            .iter()
            .map(|t| LowerEntry {
                alpha: t.alpha.clone(),
                r: t.r,
                re: t.c.re,
                im: t.c.im,
            })
            .collect();
        Self {
            dimension: s.dimension(),
            order: s.order(),
            principal,
            lower,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::corpus;

    #[test]
    fn parses_dissipative_wave() {
        let text = r#"{"dimension":1,"order":2,
            "principal":[{"degree":2,"terms":[{"alpha":[2],"re":-1.0}]}],
            "lower":[{"alpha":[0],"r":1,"im":-1.0}]}"#;
        let f: SymbolFile = serde_json::from_str(text).unwrap();
        assert_eq!(f.to_spec().unwrap(), corpus::dissipative_wave(1, 1.0));
    }

    #[test]
    fn round_trip_grad() {
        let s = corpus::grad13();
        let text = serde_json::to_string(&SymbolFile::from_spec(&s)).unwrap();
        let back: SymbolFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_spec().unwrap(), s);
    }

    #[test]
    fn bad_degree_reports_path() {
        let text = r#"{"dimension":1,"order":2,"principal":[{"degree":3,"terms":[]}]}"#;
        let f: SymbolFile = serde_json::from_str(text).unwrap();
        match f.to_spec() {
            Err(Error::Config { path, .. }) => assert_eq!(path, "principal[0].degree"),
            other => panic!("{other:?}"),
        }
    }
}
