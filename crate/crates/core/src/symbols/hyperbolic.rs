use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::MonomialPoly;
use super::spec::TauPolynomial;
use crate::error::{Error, Result};
use crate::roots::solve_roots;

/// Roots with `|Im| <= REAL_TOL * (1 + |tau|)` are treated as real.
const REAL_TOL: f64 = 1e-9;

/// Interlacing `p_1 <= q_1 <= p_2 <= ... <= q_{m-1} <= p_m` of sorted real
/// root lists. With `strict` every inequality must be strict.
pub fn interlacing_check(roots_p: &[f64], roots_q: &[f64], strict: bool) -> Result<bool> {
    if roots_p.is_empty() || roots_q.len() + 1 != roots_p.len() {
        return Err(Error::InvalidArgument(format!(
            "interlacing needs lengths m and m-1, got {} and {}",
            roots_p.len(),
            roots_q.len()
        )));
    }
    let le = |a: f64, b: f64| if strict { a < b } else { a <= b };
    Ok(roots_q
        .iter()
        .enumerate()
        .all(|(i, &q)| le(roots_p[i], q) && le(q, roots_p[i + 1])))
}

/// Outcome of [`hermite_triple_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HermiteVerdict {
    /// Interlacing of `L_m` with `L_{m-1}`; `None` when `L_{m-1}` vanishes.
    pub upper_pair: Option<bool>,
    /// Interlacing of `L_{m-1}` with `L_{m-2}`; `None` when `L_{m-1}` vanishes.
    pub lower_pair: Option<bool>,
    /// Minimum of `Im tau` over the roots of `L_m - i L_{m-1} - L_{m-2}`.
    pub min_im_root: f64,
    pub passed: bool,
}

/// Coefficients in descending powers of `tau` of a polynomial in `(tau, xi)`
/// at a fixed `xi`, with vanishing leading coefficients stripped.
pub fn tau_coefficients(poly: &MonomialPoly, xi: &[f64]) -> Result<Vec<Complex64>> {
    if poly.dimension() != xi.len() + 1 {
        return Err(Error::DimensionMismatch {
            expected: poly.dimension().saturating_sub(1),
            got: xi.len(),
        });
    }
    let deg = poly.terms().map(|(a, _)| a[0] as usize).max().unwrap_or(0);
    let mut c = vec![Complex64::default(); deg + 1];
    for (alpha, v) in poly.terms() {
        let mono: f64 = alpha[1..]
            .iter()
            .zip(xi)
            .map(|(&e, &x)| x.powi(e as i32))
            .product();
        c[deg - alpha[0] as usize] += v * mono;
    }
    let scale = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let first = c
        .iter()
        .position(|v| v.norm() > 1e-14 * scale)
        .unwrap_or(c.len());
    Ok(c[first..].to_vec())
}

fn real_roots(coeffs: &[Complex64]) -> Result<Option<Vec<f64>>> {
    if coeffs.len() <= 1 {
        return Ok(Some(Vec::new()));
    }
    let roots = solve_roots(&TauPolynomial::monic_from(coeffs)?, None)?;
    if roots.iter().any(|r| r.im.abs() > REAL_TOL * (1.0 + r.norm())) {
        return Ok(None);
    }
    let mut re: Vec<f64> = roots.iter().map(|r| r.re).collect();
    re.sort_by(f64::total_cmp);
    Ok(Some(re))
}

fn pair_ok(p: &[Complex64], q: &[Complex64]) -> Result<bool> {
    if p.len() != q.len() + 1 {
        return Ok(false);
    }
    match (real_roots(p)?, real_roots(q)?) {
        (Some(rp), Some(rq)) => interlacing_check(&rp, &rq, false),
        _ => Ok(false),
    }
}

/// Hermite-type check of a triple `(L_m, L_{m-1}, L_{m-2})` of homogeneous
/// polynomials in `(tau, xi)` at one frequency: both pairs interlace and
/// `L_m - i L_{m-1} - L_{m-2}` has roots in the closed upper half plane.
pub fn hermite_triple_check(
    lm: &MonomialPoly,
    lm1: &MonomialPoly,
    lm2: &MonomialPoly,
    xi: &[f64],
) -> Result<HermiteVerdict> {
    let dim = lm.dimension();
    if lm1.dimension() != dim || lm2.dimension() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: if lm1.dimension() != dim { lm1.dimension() } else { lm2.dimension() },
        });
    }
    let m = lm.total_degree().unwrap_or(0);
    if m == 0 || !lm.is_homogeneous_of(m) {
        return Err(Error::InvalidSymbol("L_m must be homogeneous of positive degree".into()));
    }
    if !lm1.is_homogeneous_of(m - 1) || (m >= 2 && !lm2.is_homogeneous_of(m - 2)) {
        return Err(Error::InvalidSymbol(
            "triple members must be homogeneous of degrees m, m-1, m-2".into(),
        ));
    }
    let cm = tau_coefficients(lm, xi)?;
    let (upper_pair, lower_pair) = if lm1.is_zero() {
        (None, None)
    } else {
        let cm1 = tau_coefficients(lm1, xi)?;
        let cm2 = tau_coefficients(lm2, xi)?;
        let lower = if lm2.is_zero() || cm2.len() <= 1 {
            true
        } else {
            pair_ok(&cm1, &cm2)?
        };
        (Some(pair_ok(&cm, &cm1)?), Some(lower))
    };
    let i = Complex64::new(0.0, 1.0);
    let combined = &(lm - &lm1.scale(i)) - lm2;
    let roots = solve_roots(&TauPolynomial::monic_from(&tau_coefficients(&combined, xi)?)?, None)?;
    let min_im_root = roots.iter().map(|r| r.im).fold(f64::INFINITY, f64::min);
    let stable = min_im_root >= -REAL_TOL * (1.0 + roots.iter().map(|r| r.norm()).fold(0.0, f64::max));
    let passed = stable && upper_pair.unwrap_or(true) && lower_pair.unwrap_or(true);
    Ok(HermiteVerdict {
        upper_pair,
        lower_pair,
        min_im_root,
        passed,
    })
}
