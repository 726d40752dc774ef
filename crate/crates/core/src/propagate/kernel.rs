use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::symbols::{SymbolSpec, TauPolynomial};

/// Minimal root gap, relative to the root scale, for the closed-form
/// amplitudes to be used.
pub const AMPLITUDE_GAP: f64 = 1e-3;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Companion matrix acting on `(u, D_t u, ..., D_t^{m-1} u)`.
pub fn companion(s: &SymbolSpec, xi: &[f64]) -> Result<DMatrix<Complex64>> {
    Ok(s.evaluate(xi)?.companion())
}

fn balancing(p: &TauPolynomial) -> Vec<f64> {
    let rho = p.root_scale();
    (0..p.degree()).map(|i| rho.powi(i as i32)).collect()
}

/// `exp(i t C)` for the companion of `p`, computed on the balanced matrix
/// `D^-1 C D` with `D = diag(rho^i)`.
pub fn propagator_poly(p: &TauPolynomial, t: f64) -> Result<DMatrix<Complex64>> {
    let m = p.degree();
    let d = balancing(p);
    let c = p.companion();
    let scaled = DMatrix::from_fn(m, m, |i, j| c[(i, j)] * (d[j] / d[i]) * I * t);
    let e = scaled.exp();
    let out = DMatrix::from_fn(m, m, |i, j| e[(i, j)] * (d[i] / d[j]));
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Overflow {
            xi: Vec::new(),
            min_im: f64::NAN,
        });
    }
    Ok(out)
}

/// `Phi(t, xi) = exp(i t C(xi))`; row 0 holds `E_j(t, xi)`.
pub fn propagator(s: &SymbolSpec, xi: &[f64], t: f64) -> Result<DMatrix<Complex64>> {
    if t < 0.0 {
        return Err(Error::InvalidArgument(format!("propagator needs t >= 0, got {t}")));
    }
    let p = s.evaluate(xi)?;
    propagator_poly(&p, t).map_err(|e| match e {
        Error::Overflow { .. } => {
            let min_im = crate::roots::solve_roots(&p, None)
                .map(|r| r.iter().map(|z| z.im).fold(f64::INFINITY, f64::min))
                .unwrap_or(f64::NAN);
            Error::Overflow {
                xi: xi.to_vec(),
                min_im,
            }
        }
        e => e,
    })
}

/// Elementary symmetric polynomials `e_0 .. e_len` of `z`.
fn elementary(z: &[Complex64]) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(0.0, 0.0); z.len() + 1];
    e[0] = Complex64::new(1.0, 0.0);
    for (i, &zi) in z.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            e[k] = e[k] + e[k - 1] * zi;
        }
    }
    e
}

/// Smallest pairwise distance between roots.
pub fn min_gap(roots: &[Complex64]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..roots.len() {
        for j in 0..i {
            g = g.min((roots[i] - roots[j]).norm());
        }
    }
    g
}

/// `A_j^k = (-1)^j e_{m-j-1}(tau_l, l != k) / prod_{l != k} (tau_l - tau_k)`,
/// so that `E_j = sum_k A_j^k e^{i tau_k t}`.
pub fn vandermonde_amplitudes(roots: &[Complex64], j: usize) -> Result<Vec<Complex64>> {
    let m = roots.len();
    if j >= m {
        return Err(Error::InvalidArgument(format!("index {j} out of range for order {m}")));
    }
    let scale = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let gap = min_gap(roots);
    if gap < AMPLITUDE_GAP * scale {
        return Err(Error::NearMultipleRoot {
            xi: Vec::new(),
            derivative: gap,
            threshold: AMPLITUDE_GAP * scale,
        });
    }
    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
    Ok((0..m)
        .map(|k| {
            let others: Vec<Complex64> = (0..m).filter(|&l| l != k).map(|l| roots[l]).collect();
            let e = elementary(&others);
            let denom: Complex64 = others.iter().map(|&t| t - roots[k]).product();
            sign * e[m - j - 1] / denom
        })
        .collect())
}

/// `D_t^r E_j(t)` for all `j`, from the closed form when the roots are well
/// separated and from the matrix exponential otherwise.
pub fn kernel_row(p: &TauPolynomial, roots: &[Complex64], t: f64, r: u32) -> Result<Vec<Complex64>> {
    let m = p.degree();
    let scale = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if min_gap(roots) >= AMPLITUDE_GAP * scale {
        let waves: Vec<Complex64> = roots
            .iter()
            .map(|&tau| tau.powi(r as i32) * (I * tau * t).exp())
            .collect();
        (0..m)
            .map(|j| {
                let a = vandermonde_amplitudes(roots, j)?;
                Ok(a.iter().zip(&waves).map(|(a, w)| a * w).sum())
            })
            .collect()
    } else {
        let phi = propagator_poly(p, t)?;
        let c = p.companion();
        let mut row = DMatrix::<Complex64>::zeros(1, m);
        row[(0, 0)] = Complex64::new(1.0, 0.0);
        for _ in 0..r {
            row = &row * &c;
        }
        let out = row * phi;
        Ok(out.iter().copied().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roots::solve_roots;
    use crate::symbols::corpus;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn companion_spectra() {
        let c = companion(&corpus::wave(1), &[1.0]).unwrap();
        let mut ev: Vec<f64> = c.eigenvalues().unwrap().iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);

        let c = companion(&corpus::dissipative_wave(1, 1.0), &[1.0]).unwrap();
        let ev = c.eigenvalues().unwrap();
        for want in [cx(3f64.sqrt() / 2.0, 0.5), cx(-(3f64.sqrt()) / 2.0, 0.5)] {
            assert!(ev.iter().any(|z| (z - want).norm() < 1e-12));
        }
        let c = companion(&corpus::klein_gordon(1, 1.0), &[0.0]).unwrap();
        let ev = c.eigenvalues().unwrap();
        assert!(ev.iter().any(|z| (z - cx(1.0, 0.0)).norm() < 1e-14));
        assert!(ev.iter().any(|z| (z - cx(-1.0, 0.0)).norm() < 1e-14));
    }

    #[test]
    fn wave_and_jordan_values() {
        let t = 0.7;
        let phi = propagator(&corpus::wave(1), &[1.0], t).unwrap();
        assert!((phi[(0, 1)] - cx(0.0, t.sin())).norm() < 1e-13);
        assert!((phi[(0, 0)] - cx(t.cos(), 0.0)).norm() < 1e-13);
        let t = 3.0;
        let phi = propagator(&corpus::dissipative_wave(1, 1.0), &[0.5], t).unwrap();
        assert!((phi[(0, 1)] - cx(0.0, t * (-t / 2.0).exp())).norm() < 1e-12);
    }

    #[test]
    fn identity_at_zero_and_semigroup() {
        let s = corpus::dissipative_wave(2, 1.0);
        let xi = [0.3, -0.8];
        let phi0 = propagator(&s, &xi, 0.0).unwrap();
        assert_eq!(phi0, DMatrix::identity(2, 2));
        let a = propagator(&s, &xi, 1.3).unwrap();
        let b = propagator(&s, &xi, 2.1).unwrap();
        let ab = propagator(&s, &xi, 3.4).unwrap();
        assert!((a * b - ab).norm() < 1e-9);
    }

    #[test]
    fn amplitude_oracles() {
        let r = [cx(0.3, 0.1), cx(-1.2, 0.4)];
        let a1 = vandermonde_amplitudes(&r, 1).unwrap();
        assert!((a1[0] - (r[0] - r[1]).inv()).norm() < 1e-14);
        assert!((a1[1] - (r[1] - r[0]).inv()).norm() < 1e-14);
        let a0 = vandermonde_amplitudes(&r, 0).unwrap();
        assert!((a0[0] - r[1] / (r[1] - r[0])).norm() < 1e-14);
        assert!((a0[1] + r[0] / (r[1] - r[0])).norm() < 1e-14);

        let r3 = [cx(1.0, 0.0), cx(2.0, 0.0), cx(3.0, 0.0)];
        let a2 = vandermonde_amplitudes(&r3, 2).unwrap();
        // Brute-force solve of sum_k A^k tau_k^l = delta_{l2}.
        let v = DMatrix::from_fn(3, 3, |l, k| r3[k].powi(l as i32));
        let rhs = nalgebra::DVector::from_vec(vec![cx(0.0, 0.0), cx(0.0, 0.0), cx(1.0, 0.0)]);
        let sol = v.lu().solve(&rhs).unwrap();
        for k in 0..3 {
            assert!((a2[k] - sol[k]).norm() < 1e-13);
        }
        assert!((a2[0] - cx(0.5, 0.0)).norm() < 1e-14);
        assert!((a2[1] - cx(-1.0, 0.0)).norm() < 1e-14);
        assert!((a2[2] - cx(0.5, 0.0)).norm() < 1e-14);
        assert!(vandermonde_amplitudes(&[cx(1.0, 0.0), cx(1.0, 1e-9)], 0).is_err());
    }

    #[test]
    fn closed_form_matches_exponential() {
        let s = corpus::klein_gordon(2, 1.0);
        let xi = [0.4, 1.1];
        let p = s.evaluate(&xi).unwrap();
        let roots = solve_roots(&p, None).unwrap();
        for t in [0.1, 1.0, 10.0] {
            let row = kernel_row(&p, &roots, t, 0).unwrap();
            let phi = propagator(&s, &xi, t).unwrap();
            for j in 0..2 {
                assert!((row[j] - phi[(0, j)]).norm() < 1e-10);
            }
            let d1 = kernel_row(&p, &roots, t, 1).unwrap();
            for j in 0..2 {
                assert!((d1[j] - phi[(1, j)]).norm() < 1e-10);
            }
        }
    }
}
