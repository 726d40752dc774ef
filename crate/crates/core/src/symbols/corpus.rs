//! Built-in symbols.

use num_complex::Complex64;
use serde::Serialize;

use super::fokker_planck::fokker_planck_symbol;
use super::poly::MonomialPoly;
use super::spec::{LowerTerm, SymbolSpec};
use crate::error::{Error, Result};

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// `-c^2 |xi|^2` in `n` variables.
fn minus_norm_sq(n: usize, c: f64) -> MonomialPoly {
    let mut p = MonomialPoly::zero(n);
    for i in 0..n {
        let mut a = vec![0; n];
        a[i] = 2;
        p.add_term(a, re(-c * c));
    }
    p
}

fn second_order(n: usize, c: f64, lower: Vec<LowerTerm>) -> SymbolSpec {
    SymbolSpec::new(2, n, vec![MonomialPoly::zero(n), minus_norm_sq(n, c)], lower)
        .expect("valid second-order symbol")
}

/// `u_tt - Δu = 0`: `tau^2 - |xi|^2`.
pub fn wave(n: usize) -> SymbolSpec {
    second_order(n, 1.0, vec![])
}

/// `u_tt - Δu + mu^2 u = 0`: `tau^2 - |xi|^2 - mu^2`.
pub fn klein_gordon(n: usize, mu: f64) -> SymbolSpec {
    second_order(
        n,
        1.0,
        vec![LowerTerm {
            alpha: vec![0; n],
            r: 0,
            c: re(-mu * mu),
        }],
    )
}

/// `u_tt - Δu + delta u_t = 0`: `tau^2 - i delta tau - |xi|^2`.
pub fn dissipative_wave(n: usize, delta: f64) -> SymbolSpec {
    second_order(
        n,
        1.0,
        vec![LowerTerm {
            alpha: vec![0; n],
            r: 1,
            c: Complex64::new(0.0, -delta),
        }],
    )
}

/// `u_tt - c^2 u_xx + delta u_t + mu u = 0` in one dimension:
/// `tau^2 - i delta tau - c^2 xi^2 - mu`.
pub fn negative_mass_wave(c: f64, delta: f64, mu: f64) -> SymbolSpec {
    second_order(
        1,
        c,
        vec![
            LowerTerm {
                alpha: vec![0],
                r: 1,
                c: Complex64::new(0.0, -delta),
            },
            LowerTerm {
                alpha: vec![0],
                r: 0,
                c: re(-mu),
            },
        ],
    )
}

/// `tau^4 - xi_1^4 - xi_2^4`. Not hyperbolic; its real positive root
/// `(xi_1^4 + xi_2^4)^(1/4)` has convex level sets with flat points.
pub fn quartic_2d() -> SymbolSpec {
    let z = MonomialPoly::zero(2);
    let p4 = MonomialPoly::from_terms(2, vec![(vec![4, 0], re(-1.0)), (vec![0, 4], re(-1.0))])
        .expect("two variables");
    SymbolSpec::new(4, 2, vec![z.clone(), z.clone(), z, p4], vec![]).expect("valid quartic")
}

/// One term `coef * |xi|^d * omega^a * (alpha beta)^b` of the Grad 13-moment
/// dispersion relation, with `omega = tau/|xi|`, `alpha = xi_1^2/|xi|^2`,
/// `beta = xi_2^2/|xi|^2`.
struct GradTerm {
    coef: f64,
    d: u32,
    a: u32,
    b: u32,
}

const fn gt(coef: f64, d: u32, a: u32, b: u32) -> GradTerm {
    GradTerm { coef, d, a, b }
}

fn grad_q9() -> Vec<GradTerm> {
    vec![
        gt(1.0, 9, 9, 0),
        gt(-103.0 / 25.0, 9, 7, 0),
        gt(21.0 / 5.0, 9, 5, 0),
        gt(-21.0 / 5.0 * 912.0 / 2625.0, 9, 5, 1),
        gt(-27.0 / 25.0, 9, 3, 0),
        gt(27.0 / 25.0 * 432.0 / 675.0, 9, 3, 1),
    ]
}

fn grad_q8() -> Vec<GradTerm> {
    vec![
        gt(13.0 / 3.0, 8, 8, 0),
        gt(-1094.0 / 75.0, 8, 6, 0),
        gt(1381.0 / 125.0, 8, 4, 0),
        gt(-1381.0 / 125.0 * 2032.0 / 6905.0, 8, 4, 1),
        gt(-264.0 / 125.0, 8, 2, 0),
        gt(264.0 / 125.0 * 143.0 / 330.0, 8, 2, 1),
    ]
}

fn grad_q7() -> Vec<GradTerm> {
    vec![
        gt(67.0 / 9.0, 7, 7, 0),
        gt(-497.0 / 25.0, 7, 5, 0),
        gt(3943.0 / 375.0, 7, 3, 0),
        gt(-3943.0 / 375.0 * 832.0 / 3943.0, 7, 3, 1),
        gt(-159.0 / 125.0, 7, 1, 0),
        gt(159.0 / 125.0 * 48.0 / 159.0, 7, 1, 1),
    ]
}

fn grad_q6() -> Vec<GradTerm> {
    vec![
        gt(19.0 / 3.0, 6, 6, 0),
        gt(-2908.0 / 225.0, 6, 4, 0),
        gt(13.0 / 3.0, 6, 2, 0),
        gt(-13.0 / 3.0 * 32.0 / 325.0, 6, 2, 1),
        gt(-6.0 / 25.0, 6, 0, 0),
    ]
}

fn grad_q5() -> Vec<GradTerm> {
    vec![
        gt(8.0 / 3.0, 5, 5, 0),
        gt(-178.0 / 45.0, 5, 3, 0),
        gt(2.0 / 3.0, 5, 1, 0),
    ]
}

fn grad_q4() -> Vec<GradTerm> {
    vec![gt(4.0 / 9.0, 4, 4, 0), gt(-4.0 / 9.0, 4, 2, 0)]
}

/// Rewrites `|xi|^d omega^a (alpha beta)^b` as
/// `tau^a (xi_1^2 + xi_2^2)^((d - a - 4b)/2) xi_1^(2b) xi_2^(2b)`.
fn grad_polynomial(terms: &[GradTerm], weight: Complex64) -> MonomialPoly {
    let vars = 3;
    let r2 = &MonomialPoly::monomial(vec![0, 2, 0], re(1.0))
        + &MonomialPoly::monomial(vec![0, 0, 2], re(1.0));
    let mut out = MonomialPoly::zero(vars);
    for t in terms {
        let rest = t.d - t.a - 4 * t.b;
        assert!(rest % 2 == 0, "odd power of |xi| in Grad term");
        let head = MonomialPoly::monomial(vec![t.a, 2 * t.b, 2 * t.b], weight * t.coef);
        out = &out + &(&head * &r2.pow(rest / 2));
    }
    out
}

/// Linearised 13-moment Grad system in two dimensions: the degree-9
/// determinant `Q9 - i Q8 - Q7 + i Q6 + Q5 - i Q4`.
pub fn grad13() -> SymbolSpec {
    let i = Complex64::new(0.0, 1.0);
    let parts = [
        (grad_q9(), re(1.0)),
        (grad_q8(), -i),
        (grad_q7(), re(-1.0)),
        (grad_q6(), i),
        (grad_q5(), re(1.0)),
        (grad_q4(), -i),
    ];
    let mut total = MonomialPoly::zero(3);
    for (terms, w) in &parts {
        total = &total + &grad_polynomial(terms, *w);
    }
    SymbolSpec::from_tau_xi_poly(&total).expect("valid Grad symbol")
}

/// Catalogue entry.
#[derive(Clone, Debug, Serialize)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub dimension: usize,
    pub order: usize,
    pub equation: &'static str,
    pub source: &'static str,
}

const CATALOG: &[(&str, &str, &str)] = &[
    ("wave_1d", "u_tt - u_xx = 0", "free wave equation"),
    ("wave_2d", "u_tt - Δu = 0", "free wave equation"),
    ("wave_3d", "u_tt - Δu = 0", "free wave equation"),
    ("kg_1d", "u_tt - u_xx + u = 0", "Klein-Gordon equation, mass 1"),
    ("kg_2d", "u_tt - Δu + u = 0", "Klein-Gordon equation, mass 1"),
    ("dissipative_wave_1d", "u_tt - u_xx + u_t = 0", "dissipative wave equation"),
    ("dissipative_wave_2d", "u_tt - Δu + u_t = 0", "dissipative wave equation"),
    ("anti_dissipative_1d", "u_tt - u_xx - u_t = 0", "dissipative wave equation with the damping sign flipped"),
    ("negative_mass_1d", "u_tt - u_xx + u_t - u = 0", "wave equation with dissipation 1 and negative mass -1"),
    ("negative_mass_undamped_1d", "u_tt - u_xx - u = 0", "wave equation with negative mass -1 and no dissipation"),
    ("fp_1_1", "det(tau I + A xi - i B), level 1, n = 1", "Hermite-Galerkin truncation of the kinetic Fokker-Planck equation"),
    ("fp_2_1", "det(tau I + A xi - i B), level 2, n = 1", "Hermite-Galerkin truncation of the kinetic Fokker-Planck equation"),
    ("fp_1_2", "det(tau I + sum A_j xi_j - i B), level 1, n = 2", "Hermite-Galerkin truncation of the kinetic Fokker-Planck equation"),
    ("grad13", "Q9 - i Q8 - Q7 + i Q6 + Q5 - i Q4", "linearised 13-moment Grad system of gas dynamics, two dimensions"),
    ("quartic_2d", "tau^4 - xi_1^4 - xi_2^4", "model root (xi_1^4 + xi_2^4)^(1/4) with flat points on its level sets"),
];

/// Builds the named symbol.
pub fn symbol(name: &str) -> Result<SymbolSpec> {
    Ok(match name {
        "wave_1d" => wave(1),
        "wave_2d" => wave(2),
        "wave_3d" => wave(3),
        "kg_1d" => klein_gordon(1, 1.0),
        "kg_2d" => klein_gordon(2, 1.0),
        "dissipative_wave_1d" => dissipative_wave(1, 1.0),
        "dissipative_wave_2d" => dissipative_wave(2, 1.0),
        "anti_dissipative_1d" => dissipative_wave(1, -1.0),
        "negative_mass_1d" => negative_mass_wave(1.0, 1.0, -1.0),
        "negative_mass_undamped_1d" => negative_mass_wave(1.0, 0.0, -1.0),
        "fp_1_1" => fokker_planck_symbol(1, 1)?.1,
        "fp_2_1" => fokker_planck_symbol(2, 1)?.1,
        "fp_1_2" => fokker_planck_symbol(1, 2)?.1,
        "grad13" => grad13(),
        "quartic_2d" => quartic_2d(),
        other => return Err(Error::UnknownCorpus(other.to_string())),
    })
}

pub fn names() -> impl Iterator<Item = &'static str> {
    CATALOG.iter().map(|(n, _, _)| *n)
}

pub fn entry(name: &str) -> Result<CorpusEntry> {
    let (name, equation, source) = CATALOG
        .iter()
        .find(|(n, _, _)| *n == name)
        .copied()
        .ok_or_else(|| Error::UnknownCorpus(name.to_string()))?;
    let s = symbol(name)?;
    Ok(CorpusEntry {
        name,
        dimension: s.dimension(),
        order: s.order(),
        equation,
        source,
    })
}

pub fn list() -> Vec<CorpusEntry> {
    names().map(|n| entry(n).expect("catalogue entries build")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalogue_builds() {
        let all = list();
        assert!(all.len() >= 7);
        assert!(matches!(symbol("nope"), Err(Error::UnknownCorpus(_))));
    }

    #[test]
    fn grad_principal_on_axis() {
        let s = grad13();
        assert_eq!(s.order(), 9);
        assert_eq!(s.dimension(), 2);
        let p = s.principal_polynomial(&[1.0, 0.0]).unwrap();
        // tau^3 (tau^6 - 103/25 tau^4 + 21/5 tau^2 - 27/25)
        let want = [1.0, 0.0, -103.0 / 25.0, 0.0, 21.0 / 5.0, 0.0, -27.0 / 25.0, 0.0, 0.0, 0.0];
        for (c, w) in p.coeffs().iter().zip(want) {
            assert!((c - re(w)).norm() < 1e-12, "{c} vs {w}");
        }
    }

    #[test]
    fn grad_matches_direct_evaluation() {
        // Evaluate the (omega, alpha, beta) form directly at a generic point.
        let s = grad13();
        let xi = [0.6_f64, -1.3_f64];
        let tau = Complex64::new(0.7, 0.2);
        let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
        let w = tau / r;
        let ab = (xi[0] * xi[0] / (r * r)) * (xi[1] * xi[1] / (r * r));
        let i = Complex64::new(0.0, 1.0);
        let q9 = r.powi(9)
            * w.powu(3)
            * (w.powu(6) - 103.0 / 25.0 * w.powu(4)
                + 21.0 / 5.0 * w.powu(2) * (1.0 - 912.0 / 2625.0 * ab)
                - 27.0 / 25.0 * (1.0 - 432.0 / 675.0 * ab));
        let q8 = r.powi(8)
            * w.powu(2)
            * (13.0 / 3.0 * w.powu(6) - 1094.0 / 75.0 * w.powu(4)
                + 1381.0 / 125.0 * w.powu(2) * (1.0 - 2032.0 / 6905.0 * ab)
                - 264.0 / 125.0 * (1.0 - 143.0 / 330.0 * ab));
        let q7 = r.powi(7)
            * w
            * (67.0 / 9.0 * w.powu(6) - 497.0 / 25.0 * w.powu(4)
                + 3943.0 / 375.0 * w.powu(2) * (1.0 - 832.0 / 3943.0 * ab)
                - 159.0 / 125.0 * (1.0 - 48.0 / 159.0 * ab));
        let q6 = r.powi(6)
            * (19.0 / 3.0 * w.powu(6) - 2908.0 / 225.0 * w.powu(4)
                + 13.0 / 3.0 * w.powu(2) * (1.0 - 32.0 / 325.0 * ab)
                - 6.0 / 25.0);
        let q5 = r.powi(5) * w * (8.0 / 3.0 * w.powu(4) - 178.0 / 45.0 * w.powu(2) + 2.0 / 3.0);
        let q4 = 4.0 / 9.0 * r.powi(4) * w.powu(2) * (w.powu(2) - 1.0);
        let direct = q9 - i * q8 - q7 + i * q6 + q5 - i * q4;
        let ours = s.evaluate(&xi).unwrap().eval(tau);
        assert!((direct - ours).norm() < 1e-10 * direct.norm().max(1.0));
    }

    #[test]
    fn quartic_root() {
        let s = quartic_2d();
        let p = s.evaluate(&[1.0, 1.0]).unwrap();
        let t = 2f64.powf(0.25);
        assert!(p.eval(re(t)).norm() < 1e-12);
    }
}
