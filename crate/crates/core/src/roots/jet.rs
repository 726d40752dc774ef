use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbols::SymbolSpec;

/// Relative size of `|dL/dtau|` below which a root is treated as multiple.
pub const SIMPLE_ROOT_TOL: f64 = 1e-8;

/// Value, gradient and Hessian of a simple root `tau_k(xi)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RootJet {
    pub tau: Complex64,
    pub gradient: DVector<Complex64>,
    pub hessian: DMatrix<Complex64>,
}

/// Newton-polishes `seed` on `L(., xi)` and differentiates the implicit relation
/// `L(tau(xi), xi) = 0` twice.
pub fn root_jet(s: &SymbolSpec, xi: &[f64], seed: Complex64) -> Result<RootJet> {
    let p = s.evaluate(xi)?;
    let mut tau = seed;
    for _ in 0..8 {
        let (v, d) = p.eval_with_derivative(tau);
        if d.norm() == 0.0 {
            break;
        }
        let step = v / d;
        tau -= step;
        if step.norm() <= 1e-16 * (1.0 + tau.norm()) {
            break;
        }
    }
    let m = s.order();
    let rho = tau.norm();
    let scale: f64 = (0..m)
        .map(|j| (m - j) as f64 * p.coeff(j).norm() * rho.powi((m - j - 1) as i32))
        .sum();
    let d = s.partials(tau, xi)?;
    let threshold = SIMPLE_ROOT_TOL * scale;
    if d.d_tau.norm() < threshold {
        return Err(Error::NearMultipleRoot {
            xi: xi.to_vec(),
            derivative: d.d_tau.norm(),
            threshold,
        });
    }
    let n = xi.len();
    let grad = DVector::from_fn(n, |i, _| -d.d_xi[i] / d.d_tau);
    let hess = DMatrix::from_fn(n, n, |i, j| {
        -(d.d_xi_xi[(i, j)]
            + d.d_xi_tau[i] * grad[j]
            + d.d_xi_tau[j] * grad[i]
            + d.d_tau_tau * grad[i] * grad[j])
            / d.d_tau
    });
    Ok(RootJet {
        tau,
        gradient: grad,
        hessian: hess,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{corpus, fokker_planck_symbol};

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn klein_gordon_at_origin() {
        let j = root_jet(&corpus::klein_gordon(1, 1.0), &[0.0], cx(0.9, 0.0)).unwrap();
        assert!((j.tau - cx(1.0, 0.0)).norm() < 1e-14);
        assert!(j.gradient[0].norm() < 1e-14);
        assert!((j.hessian[(0, 0)] - cx(1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn wave_hessian_has_rank_one() {
        let j = root_jet(&corpus::wave(2), &[1.0, 0.0], cx(1.0, 0.0)).unwrap();
        assert!((j.gradient[0] - cx(1.0, 0.0)).norm() < 1e-14);
        assert!(j.gradient[1].norm() < 1e-14);
        assert!(j.hessian[(0, 0)].norm() < 1e-14);
        assert!((j.hessian[(1, 1)] - cx(1.0, 0.0)).norm() < 1e-14);
        assert!(j.hessian[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn fokker_planck_second_derivative() {
        let (_, s) = fokker_planck_symbol(1, 1).unwrap();
        let j = root_jet(&s, &[0.0], cx(0.0, 0.0)).unwrap();
        assert!((j.hessian[(0, 0)] - cx(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn double_root_is_rejected() {
        let r = root_jet(&corpus::dissipative_wave(1, 1.0), &[0.5], cx(0.0, 0.5));
        assert!(matches!(r, Err(Error::NearMultipleRoot { .. })));
    }
}
