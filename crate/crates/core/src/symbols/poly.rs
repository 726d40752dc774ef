use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients below this magnitude are treated as exact zeros and dropped.
pub const ZERO_PRUNE: f64 = 1e-300;

/// Sparse multivariate polynomial with complex coefficients.
///
/// Keys are multi-indices of length `dimension`; zero coefficients are never
/// stored. The same type carries polynomials in `xi` alone and polynomials in
/// `(tau, xi)` where the first exponent belongs to `tau`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonomialPoly {
    dimension: usize,
    terms: BTreeMap<Vec<u32>, Complex64>,
}

impl MonomialPoly {
    pub fn zero(dimension: usize) -> Self {
        Self {
            dimension,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dimension: usize, c: Complex64) -> Self {
        let mut p = Self::zero(dimension);
        p.add_term(vec![0; dimension], c);
        p
    }

    /// The coordinate polynomial `x_i`.
    pub fn variable(dimension: usize, i: usize) -> Self {
        let mut alpha = vec![0; dimension];
        alpha[i] = 1;
        let mut p = Self::zero(dimension);
        p.add_term(alpha, Complex64::new(1.0, 0.0));
        p
    }

    pub fn monomial(alpha: Vec<u32>, c: Complex64) -> Self {
        let mut p = Self::zero(alpha.len());
        p.add_term(alpha, c);
        p
    }

    pub fn from_terms<I>(dimension: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Complex64)>,
    {
        let mut p = Self::zero(dimension);
        for (alpha, c) in terms {
            if alpha.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    got: alpha.len(),
                });
            }
            p.add_term(alpha, c);
        }
        Ok(p)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, alpha: &[u32]) -> Complex64 {
        self.terms.get(alpha).copied().unwrap_or_default()
    }

    /// Adds `c * x^alpha`, removing the entry if it cancels exactly.
    pub fn add_term(&mut self, alpha: Vec<u32>, c: Complex64) {
        debug_assert_eq!(alpha.len(), self.dimension);
        let updated = self.terms.get(&alpha).copied().unwrap_or_default() + c;
        if updated.norm() < ZERO_PRUNE {
            self.terms.remove(&alpha);
        } else {
            self.terms.insert(alpha, updated);
        }
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|a| a.iter().sum()).max()
    }

    /// True when every stored term has total degree exactly `degree`.
    pub fn is_homogeneous_of(&self, degree: u32) -> bool {
        self.terms.keys().all(|a| a.iter().sum::<u32>() == degree)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.dimension);
        for (a, v) in &self.terms {
            out.add_term(a.clone(), v * c);
        }
        out
    }

    pub fn eval_real(&self, x: &[f64]) -> Complex64 {
        debug_assert_eq!(x.len(), self.dimension);
        self.terms
            .iter()
            .map(|(alpha, c)| {
                let m: f64 = alpha
                    .iter()
                    .zip(x)
                    .map(|(&e, &xi)| xi.powi(e as i32))
                    .product();
                c * m
            })
            .sum()
    }

    pub fn eval_complex(&self, x: &[Complex64]) -> Complex64 {
        debug_assert_eq!(x.len(), self.dimension);
        self.terms
            .iter()
            .map(|(alpha, c)| {
                let m: Complex64 = alpha
                    .iter()
                    .zip(x)
                    .map(|(&e, xi)| xi.powu(e))
                    .product();
                c * m
            })
            .sum()
    }

    /// Partial derivative with respect to variable `i`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.dimension);
        for (alpha, c) in &self.terms {
            if alpha[i] > 0 {
                let mut beta = alpha.clone();
                beta[i] -= 1;
                out.add_term(beta, c * alpha[i] as f64);
            }
        }
        out
    }

    /// Prepends a new variable (index 0) with exponent zero everywhere.
    pub fn with_leading_variable(&self) -> Self {
        let mut out = Self::zero(self.dimension + 1);
        for (alpha, c) in &self.terms {
            let mut beta = Vec::with_capacity(alpha.len() + 1);
            beta.push(0);
            beta.extend_from_slice(alpha);
            out.add_term(beta, *c);
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(self.dimension, Complex64::new(1.0, 0.0));
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Maximum coefficient magnitude, used for relative thresholds.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl Add for &MonomialPoly {
    type Output = MonomialPoly;

    fn add(self, rhs: &MonomialPoly) -> MonomialPoly {
        assert_eq!(self.dimension, rhs.dimension);
        let mut out = self.clone();
        for (a, c) in &rhs.terms {
            out.add_term(a.clone(), *c);
        }
        out
    }
}

impl Sub for &MonomialPoly {
    type Output = MonomialPoly;

    fn sub(self, rhs: &MonomialPoly) -> MonomialPoly {
        self + &(-rhs)
    }
}

impl Neg for &MonomialPoly {
    type Output = MonomialPoly;

    fn neg(self) -> MonomialPoly {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &MonomialPoly {
    type Output = MonomialPoly;

    fn mul(self, rhs: &MonomialPoly) -> MonomialPoly {
        assert_eq!(self.dimension, rhs.dimension);
        let mut out = MonomialPoly::zero(self.dimension);
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                let sum: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(sum, ca * cb);
            }
        }
        out
    }
}
