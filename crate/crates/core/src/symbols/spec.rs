use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::MonomialPoly;
use crate::error::{Error, Result};

/// One lower-order term `c * xi^alpha * tau^r` with `|alpha| + r <= m - 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerTerm {
    pub alpha: Vec<u32>,
    pub r: u32,
    pub c: Complex64,
}

/// Full symbol `L(tau, xi) = tau^m + sum_j P_j(xi) tau^(m-j) + sum c_{alpha,r} xi^alpha tau^r`.
///
/// The leading coefficient is implicit and equal to one. Roots with
/// `Im tau >= 0` correspond to non-growing modes `exp(i tau t)`; an equation
/// written with `d/dt` maps onto this form through `d/dt = i tau`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolSpec {
    order: usize,
    dimension: usize,
    /// `principal[j - 1]` is `P_j`, homogeneous of degree `j`.
    principal: Vec<MonomialPoly>,
    lower: Vec<LowerTerm>,
}

/// Monic polynomial in `tau` at a fixed frequency.
///
/// `coeffs[j]` multiplies `tau^(m - j)`; `coeffs[0] == 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct TauPolynomial {
    coeffs: Vec<Complex64>,
}

impl TauPolynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("empty tau polynomial".into()));
        }
        if coeffs[0] != Complex64::new(1.0, 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tau polynomial must be monic, leading coefficient is {}",
                coeffs[0]
            )));
        }
        Ok(Self { coeffs })
    }

    /// Builds a monic polynomial by dividing through by the leading coefficient.
    pub fn monic_from(coeffs: &[Complex64]) -> Result<Self> {
        let lead = *coeffs
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty tau polynomial".into()))?;
        if lead.norm() == 0.0 {
            return Err(Error::InvalidArgument("zero leading coefficient".into()));
        }
        let mut c: Vec<Complex64> = coeffs.iter().map(|v| v / lead).collect();
        c[0] = Complex64::new(1.0, 0.0);
        Ok(Self { coeffs: c })
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for r in roots {
            let mut next = c.clone();
            next.push(Complex64::default());
            for j in 1..next.len() {
                next[j] -= r * c[j - 1];
            }
            c = next;
        }
        Self { coeffs: c }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `tau^(m - j)`.
    pub fn coeff(&self, j: usize) -> Complex64 {
        self.coeffs[j]
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .fold(Complex64::default(), |acc, c| acc * z + c)
    }

    /// Value and first derivative by Horner.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::default();
        let mut dp = Complex64::default();
        for c in &self.coeffs {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative_coeffs(&self) -> Vec<Complex64> {
        let m = self.degree();
        (0..m)
            .map(|j| self.coeffs[j] * (m - j) as f64)
            .collect()
    }

    /// Root-size scale `max(1, max_j |c_j|^(1/j))`.
    pub fn root_scale(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| c.norm().powf(1.0 / j as f64))
            .fold(1.0, f64::max)
    }

    /// Upper bound `2 max(1, max_j |c_j|^(1/j))` on every root modulus.
    pub fn root_bound(&self) -> f64 {
        2.0 * self.root_scale()
    }

    /// Normwise backward error `|p(z)| / (max_j |c_j| * sum_k |z|^k)`.
    pub fn relative_residual(&self, z: Complex64) -> f64 {
        let az = z.norm();
        let cmax = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let powers = (0..=self.degree()).fold(0.0, |acc, _| acc * az + 1.0);
        self.eval(z).norm() / (cmax * powers)
    }

    /// Discriminant normalised so that `tau^2 + b tau + c` gives `b^2 - 4c`.
    ///
    /// Computed as `(-1)^(m(m-1)/2) Res(p, p')` from the Sylvester matrix; the
    /// leading coefficient is one so no further division is needed.
    pub fn discriminant(&self) -> Complex64 {
        let m = self.degree();
        if m <= 1 {
            return Complex64::new(1.0, 0.0);
        }
        let dp = self.derivative_coeffs();
        let size = 2 * m - 1;
        let mut syl = DMatrix::<Complex64>::zeros(size, size);
        // m - 1 shifted rows of p, then m shifted rows of p'.
        for row in 0..m - 1 {
            for (k, c) in self.coeffs.iter().enumerate() {
                syl[(row, row + k)] = *c;
            }
        }
        for row in 0..m {
            for (k, c) in dp.iter().enumerate() {
                syl[(m - 1 + row, row + k)] = *c;
            }
        }
        let res = syl.lu().determinant();
        if (m * (m - 1) / 2) % 2 == 1 {
            -res
        } else {
            res
        }
    }

    /// Companion matrix acting on the state `(u, D_t u, ..., D_t^(m-1) u)`.
    pub fn companion(&self) -> DMatrix<Complex64> {
        let m = self.degree();
        let mut c = DMatrix::<Complex64>::zeros(m, m);
        for i in 0..m.saturating_sub(1) {
            c[(i, i + 1)] = Complex64::new(1.0, 0.0);
        }
        for j in 1..=m {
            c[(m - 1, m - j)] = -self.coeffs[j];
        }
        c
    }
}

/// Verdict of the necessary condition on the `tau^(m-1)` lower coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum StabilityVerdict {
    /// `Im c_{0,m-1} <= 0`. When the coefficient is real, stable roots must
    /// all lie on the real axis.
    Pass { im_coefficient: f64, all_roots_real_required: bool },
    Fail { im_coefficient: f64 },
}

impl StabilityVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, StabilityVerdict::Pass { .. })
    }
}

/// Values of `L` and its first and second partial derivatives at `(tau, xi)`.
#[derive(Clone, Debug)]
pub struct SymbolPartials {
    pub value: Complex64,
    pub d_tau: Complex64,
    pub d_tau_tau: Complex64,
    pub d_xi: DVector<Complex64>,
    pub d_xi_tau: DVector<Complex64>,
    pub d_xi_xi: DMatrix<Complex64>,
}

impl SymbolSpec {
    pub fn new(
        order: usize,
        dimension: usize,
        principal: Vec<MonomialPoly>,
        lower: Vec<LowerTerm>,
    ) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidSymbol("order must be at least 1".into()));
        }
        if dimension == 0 {
            return Err(Error::InvalidSymbol("dimension must be at least 1".into()));
        }
        if principal.len() != order {
            return Err(Error::InvalidSymbol(format!(
                "expected {order} principal polynomials, got {}",
                principal.len()
            )));
        }
        for (idx, p) in principal.iter().enumerate() {
            let j = idx + 1;
            if p.dimension() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    got: p.dimension(),
                });
            }
            if !p.is_homogeneous_of(j as u32) {
                return Err(Error::InvalidSymbol(format!(
                    "P_{j} is not homogeneous of degree {j}"
                )));
            }
        }
        for t in &lower {
            if t.alpha.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    got: t.alpha.len(),
                });
            }
            let deg = t.alpha.iter().sum::<u32>() as usize + t.r as usize;
            if deg + 1 > order {
                return Err(Error::InvalidSymbol(format!(
                    "lower term xi^{:?} tau^{} has order {deg} >= m = {order}",
                    t.alpha, t.r
                )));
            }
        }
        let lower = lower
            .into_iter()
            .filter(|t| t.c.norm() >= super::poly::ZERO_PRUNE)
            .collect();
        Ok(Self {
            order,
            dimension,
            principal,
            lower,
        })
    }

    /// Splits a polynomial in `(tau, xi)` (variable 0 is `tau`) into principal and
    /// lower parts. The `tau^m` coefficient must be a nonzero constant; the
    /// polynomial is divided by it.
    pub fn from_tau_xi_poly(poly: &MonomialPoly) -> Result<Self> {
        let dimension = poly
            .dimension()
            .checked_sub(1)
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::InvalidSymbol("polynomial needs tau and xi variables".into()))?;
        let order = poly
            .terms()
            .map(|(a, _)| a[0] as usize)
            .max()
            .ok_or_else(|| Error::InvalidSymbol("zero polynomial".into()))?;
        if order == 0 {
            return Err(Error::InvalidSymbol("polynomial does not depend on tau".into()));
        }
        let mut lead_key = vec![0u32; dimension + 1];
        lead_key[0] = order as u32;
        let lead = poly.coefficient(&lead_key);
        if lead.norm() == 0.0 {
            return Err(Error::InvalidSymbol(
                "coefficient of tau^m depends on xi; operator is not of the required form".into(),
            ));
        }
        let mut principal: Vec<MonomialPoly> =
            (0..order).map(|_| MonomialPoly::zero(dimension)).collect();
        let mut lower = Vec::new();
        for (alpha, c) in poly.terms() {
            let r = alpha[0] as usize;
            let xi_alpha: Vec<u32> = alpha[1..].to_vec();
            let xi_deg: usize = xi_alpha.iter().sum::<u32>() as usize;
            let c = c / lead;
            if r + xi_deg > order {
                return Err(Error::InvalidSymbol(format!(
                    "term tau^{r} xi^{xi_alpha:?} exceeds order {order} (degree overflow)"
                )));
            }
            if r == order {
                continue;
            }
            if r + xi_deg == order {
                principal[order - r - 1].add_term(xi_alpha, c);
            } else {
                lower.push(LowerTerm {
                    alpha: xi_alpha,
                    r: r as u32,
                    c,
                });
            }
        }
        Self::new(order, dimension, principal, lower)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn principal(&self) -> &[MonomialPoly] {
        &self.principal
    }

    pub fn lower(&self) -> &[LowerTerm] {
        &self.lower
    }

    pub fn is_homogeneous(&self) -> bool {
        self.lower.is_empty()
    }

    fn check_dimension(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: xi.len(),
            });
        }
        Ok(())
    }

    /// `L(., xi)` as a monic polynomial in `tau`.
    pub fn evaluate(&self, xi: &[f64]) -> Result<TauPolynomial> {
        self.check_dimension(xi)?;
        let mut coeffs = self.principal_coeffs(xi);
        for t in &self.lower {
            let j = self.order - t.r as usize;
            let mono: f64 = t
                .alpha
                .iter()
                .zip(xi)
                .map(|(&e, &x)| x.powi(e as i32))
                .product();
            coeffs[j] += t.c * mono;
        }
        Ok(TauPolynomial { coeffs })
    }

    /// `L_m(., xi)`: the same evaluation with every lower-order term dropped.
    pub fn principal_polynomial(&self, xi: &[f64]) -> Result<TauPolynomial> {
        self.check_dimension(xi)?;
        Ok(TauPolynomial {
            coeffs: self.principal_coeffs(xi),
        })
    }

    fn principal_coeffs(&self, xi: &[f64]) -> Vec<Complex64> {
        let mut coeffs = Vec::with_capacity(self.order + 1);
        coeffs.push(Complex64::new(1.0, 0.0));
        coeffs.extend(self.principal.iter().map(|p| p.eval_real(xi)));
        coeffs
    }

    pub fn discriminant_at(&self, xi: &[f64]) -> Result<Complex64> {
        Ok(self.evaluate(xi)?.discriminant())
    }

    /// The lower coefficient `c_{0,m-1}` of `tau^(m-1)`.
    pub fn tau_m_minus_one_coefficient(&self) -> Complex64 {
        self.lower
            .iter()
            .filter(|t| t.r as usize + 1 == self.order && t.alpha.iter().all(|&a| a == 0))
            .map(|t| t.c)
            .sum()
    }

    /// Necessary condition for `Im tau_k >= 0`: the imaginary part of the
    /// `tau^(m-1)` lower coefficient must be non-positive.
    pub fn necessary_stability_check(&self) -> StabilityVerdict {
        let im = self.tau_m_minus_one_coefficient().im;
        if im > 0.0 {
            StabilityVerdict::Fail { im_coefficient: im }
        } else {
            StabilityVerdict::Pass {
                im_coefficient: im,
                all_roots_real_required: im == 0.0,
            }
        }
    }

    /// The symbol as a polynomial in `(tau, xi)` with `tau` as variable 0.
    pub fn to_tau_xi_poly(&self) -> MonomialPoly {
        let n = self.dimension;
        let mut lead = vec![0u32; n + 1];
        lead[0] = self.order as u32;
        let mut poly = MonomialPoly::monomial(lead, Complex64::new(1.0, 0.0));
        for (idx, p) in self.principal.iter().enumerate() {
            let r = (self.order - idx - 1) as u32;
            for (alpha, c) in p.terms() {
                let mut key = Vec::with_capacity(n + 1);
                key.push(r);
                key.extend_from_slice(alpha);
                poly.add_term(key, *c);
            }
        }
        for t in &self.lower {
            let mut key = Vec::with_capacity(n + 1);
            key.push(t.r);
            key.extend_from_slice(&t.alpha);
            poly.add_term(key, t.c);
        }
        poly
    }

    /// Sum of coefficient magnitudes of `L(., xi)`, the scale for residual checks.
    pub fn coefficient_mass(&self, xi: &[f64]) -> Result<f64> {
        Ok(self.evaluate(xi)?.coeffs().iter().map(|c| c.norm()).sum())
    }

    /// Analytic partial derivatives of `L` up to second order at `(tau, xi)`.
    pub fn partials(&self, tau: Complex64, xi: &[f64]) -> Result<SymbolPartials> {
        self.check_dimension(xi)?;
        let n = self.dimension;
        let mut out = SymbolPartials {
            value: Complex64::default(),
            d_tau: Complex64::default(),
            d_tau_tau: Complex64::default(),
            d_xi: DVector::zeros(n),
            d_xi_tau: DVector::zeros(n),
            d_xi_xi: DMatrix::zeros(n, n),
        };
        let mut visit = |r: u32, alpha: &[u32], c: Complex64| {
            let tp = |e: u32| -> Complex64 {
                if e == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    tau.powu(e)
                }
            };
            let xp = |i: usize, e: u32| -> f64 {
                if e == 0 {
                    1.0
                } else {
                    xi[i].powi(e as i32)
                }
            };
            let xmono = |skip: &[(usize, u32)]| -> f64 {
                // product of xi_i^(alpha_i - d_i) times falling factorial coefficients
                let mut v = 1.0;
                for i in 0..n {
                    let d: u32 = skip.iter().filter(|(k, _)| *k == i).map(|(_, d)| *d).sum();
                    if alpha[i] < d {
                        return 0.0;
                    }
                    let mut coeff = 1.0;
                    for s in 0..d {
                        coeff *= (alpha[i] - s) as f64;
                    }
                    v *= coeff * xp(i, alpha[i] - d);
                }
                v
            };
            let t0 = tp(r);
            let t1 = if r >= 1 { tp(r - 1) * r as f64 } else { Complex64::default() };
            let t2 = if r >= 2 {
                tp(r - 2) * (r * (r - 1)) as f64
            } else {
                Complex64::default()
            };
            let x0 = xmono(&[]);
            out.value += c * t0 * x0;
            out.d_tau += c * t1 * x0;
            out.d_tau_tau += c * t2 * x0;
            for i in 0..n {
                let xi_ = xmono(&[(i, 1)]);
                out.d_xi[i] += c * t0 * xi_;
                out.d_xi_tau[i] += c * t1 * xi_;
                for j in 0..n {
                    out.d_xi_xi[(i, j)] += c * t0 * xmono(&[(i, 1), (j, 1)]);
                }
            }
        };
        visit(self.order as u32, &vec![0; n], Complex64::new(1.0, 0.0));
        for (idx, p) in self.principal.iter().enumerate() {
            let r = (self.order - idx - 1) as u32;
            for (alpha, c) in p.terms() {
                visit(r, alpha, *c);
            }
        }
        for t in &self.lower {
            visit(t.r, &t.alpha, t.c);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::corpus;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn dissipative_wave_at_unit_frequency() {
        let s = corpus::dissipative_wave(1, 1.0);
        let p = s.evaluate(&[1.0]).unwrap();
        assert_eq!(p.coeffs(), &[cx(1.0, 0.0), cx(0.0, -1.0), cx(-1.0, 0.0)]);
        let pp = s.principal_polynomial(&[1.0]).unwrap();
        assert_eq!(pp.coeffs(), &[cx(1.0, 0.0), cx(0.0, 0.0), cx(-1.0, 0.0)]);
    }

    #[test]
    fn klein_gordon_mass_only_at_origin() {
        let s = corpus::klein_gordon(1, 1.0);
        let p = s.evaluate(&[0.0]).unwrap();
        assert_eq!(p.coeffs(), &[cx(1.0, 0.0), cx(0.0, 0.0), cx(-1.0, 0.0)]);
        let pp = s.principal_polynomial(&[3.0]).unwrap();
        assert!(close(pp.coeff(2), cx(-9.0, 0.0), 1e-14));
    }

    #[test]
    fn wave_homogeneous_evaluation() {
        let s = corpus::wave(2);
        let p = s.evaluate(&[3.0, 4.0]).unwrap();
        assert!(close(p.coeff(2), cx(-25.0, 0.0), 1e-12));
        assert!(close(p.coeff(1), cx(0.0, 0.0), 0.0));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let s = corpus::wave(2);
        assert!(matches!(
            s.evaluate(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn discriminant_small_cases() {
        let s = corpus::dissipative_wave(1, 1.0);
        let d = s.discriminant_at(&[0.5]).unwrap();
        // (-i)^2 - 4 (-1/4) = 0
        assert!(d.norm() < 1e-14, "{d}");
        let w = corpus::wave(1);
        let d = w.discriminant_at(&[1.0]).unwrap();
        assert!(close(d, cx(4.0, 0.0), 1e-13));
    }

    #[test]
    fn discriminant_matches_root_products_for_cubic() {
        let roots = [cx(1.0, 0.5), cx(-2.0, 0.0), cx(0.3, -1.0)];
        let p = TauPolynomial::from_roots(&roots);
        let mut oracle = cx(1.0, 0.0);
        for i in 0..3 {
            for j in i + 1..3 {
                oracle *= (roots[i] - roots[j]).powu(2);
            }
        }
        assert!(close(p.discriminant(), oracle, 1e-12 * oracle.norm()));
    }

    #[test]
    fn stability_check_cases() {
        assert!(corpus::dissipative_wave(1, 1.0).necessary_stability_check().passed());
        let anti = corpus::dissipative_wave(1, -1.0).necessary_stability_check();
        assert_eq!(anti, StabilityVerdict::Fail { im_coefficient: 1.0 });
        match corpus::wave(3).necessary_stability_check() {
            StabilityVerdict::Pass {
                all_roots_real_required,
                ..
            } => assert!(all_roots_real_required),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tau_xi_poly_round_trip() {
        let s = corpus::negative_mass_wave(1.0, 1.0, -1.0);
        let back = SymbolSpec::from_tau_xi_poly(&s.to_tau_xi_poly()).unwrap();
        for xi in [0.0, 0.7, 2.0] {
            let a = s.evaluate(&[xi]).unwrap();
            let b = back.evaluate(&[xi]).unwrap();
            for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                assert!(close(*x, *y, 1e-14));
            }
        }
    }

    #[test]
    fn rejects_inhomogeneous_principal_part() {
        let bad = MonomialPoly::monomial(vec![1], cx(1.0, 0.0));
        let err = SymbolSpec::new(2, 1, vec![MonomialPoly::zero(1), bad], vec![]);
        assert!(err.is_err());
    }

    #[test]
    fn partials_match_finite_differences() {
        let s = corpus::klein_gordon(2, 1.3);
        let tau = cx(0.4, 0.2);
        let xi = [0.7, -0.3];
        let p = s.partials(tau, &xi).unwrap();
        let h = 1e-5;
        let val = |t: Complex64, x: &[f64]| s.evaluate(x).unwrap().eval(t);
        let fd_tau = (val(tau + h, &xi) - val(tau - h, &xi)) / (2.0 * h);
        assert!(close(p.d_tau, fd_tau, 1e-8));
        for i in 0..2 {
            let mut xp = xi;
            let mut xm = xi;
            xp[i] += h;
            xm[i] -= h;
            let fd = (val(tau, &xp) - val(tau, &xm)) / (2.0 * h);
            assert!(close(p.d_xi[i], fd, 1e-8));
        }
        assert!(close(p.d_xi_xi[(0, 0)], cx(-2.0, 0.0), 1e-12));
        assert!(close(p.d_tau_tau, cx(2.0, 0.0), 1e-12));
    }
}
