use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::symbols::{SymbolSpec, TauPolynomial};

/// Iteration cap for the simultaneous iteration.
pub const MAX_ITERATIONS: usize = 200;

/// Largest accepted normwise backward error of a root.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// All roots of a monic polynomial by Aberth–Ehrlich iteration with Newton
/// polishing.
///
/// With `warm` guesses the returned roots are matched to the guesses by
/// minimal total displacement, so `roots[k]` continues label `k`.
pub fn solve_roots(p: &TauPolynomial, warm: Option<&[Complex64]>) -> Result<Vec<Complex64>> {
    let m = p.degree();
    if let Some(w) = warm {
        if w.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: w.len(),
            });
        }
    }
    // Exact zero roots are split off before iterating.
    let zeros = (0..m).take_while(|&i| p.coeff(m - i) == Complex64::default()).count();
    let mut roots = if zeros == 0 {
        nonzero_roots(p, warm)?
    } else {
        let coeffs: Vec<Complex64> = (0..=m - zeros).map(|i| p.coeff(i)).collect();
        nonzero_roots(&TauPolynomial::new(coeffs)?, None)?
    };
    roots.resize(m, Complex64::default());
    Ok(match warm {
        Some(w) if m > 1 => {
            let perm = assign(w, &roots);
            perm.iter().map(|&i| roots[i]).collect()
        }
        _ => roots,
    })
}

fn nonzero_roots(p: &TauPolynomial, warm: Option<&[Complex64]>) -> Result<Vec<Complex64>> {
    Ok(match p.degree() {
        0 => Vec::new(),
        1 => vec![-p.coeff(1)],
        2 => quadratic(p.coeff(1), p.coeff(2)).to_vec(),
        _ => aberth(p, warm)
            .or_else(|_| aberth(p, None))
            .or_else(|_| eigen_roots(p))?,
    })
}

/// Roots of `z^2 + b z + c` without cancellation.
fn quadratic(b: Complex64, c: Complex64) -> [Complex64; 2] {
    let sq = (b * b - 4.0 * c).sqrt();
    let plus = b + sq;
    let minus = b - sq;
    let big = if plus.norm() >= minus.norm() { plus } else { minus };
    if big.norm() == 0.0 {
        return [Complex64::default(); 2];
    }
    let q = -0.5 * big;
    [q, c / q]
}

fn aberth(p: &TauPolynomial, warm: Option<&[Complex64]>) -> Result<Vec<Complex64>> {
    let m = p.degree();
    let scale = p.root_scale();
    let mut z: Vec<Complex64> = match warm {
        Some(w) => {
            let mut z = w.to_vec();
            // Coincident guesses stall the iteration; spread them slightly.
            for k in 0..m {
                for j in 0..k {
                    if (z[k] - z[j]).norm() <= 1e-10 * scale {
                        let angle = 0.7 + k as f64;
                        z[k] += Complex64::from_polar(1e-6 * scale, angle);
                    }
                }
            }
            z
        }
        None => {
            let center = -p.coeff(1) / m as f64;
            (0..m)
                .map(|k| {
                    let angle = 2.0 * std::f64::consts::PI * k as f64 / m as f64 + 0.4;
                    center + Complex64::from_polar(scale, angle)
                })
                .collect()
        }
    };

    let mut converged = vec![false; m];
    for _ in 0..MAX_ITERATIONS {
        let mut all_done = true;
        for k in 0..m {
            if converged[k] {
                continue;
            }
            let (v, dv) = p.eval_with_derivative(z[k]);
            if v.norm() == 0.0 {
                converged[k] = true;
                continue;
            }
            let ratio = if dv.norm() == 0.0 {
                // Step off a critical point of p.
                Complex64::from_polar(1e-8 * scale, 0.3 + k as f64)
            } else {
                v / dv
            };
            let repulsion: Complex64 = (0..m)
                .filter(|&j| j != k)
                .map(|j| {
                    let d = z[k] - z[j];
                    if d.norm() == 0.0 {
                        Complex64::default()
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let denom = Complex64::new(1.0, 0.0) - ratio * repulsion;
            let corr = if denom.norm() == 0.0 { ratio } else { ratio / denom };
            z[k] -= corr;
            let small_step = corr.norm() <= 1e-15 * z[k].norm().max(scale * 1e-3);
            if small_step || p.relative_residual(z[k]) <= 2.0 * f64::EPSILON {
                converged[k] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            break;
        }
    }

    for zk in z.iter_mut() {
        polish(p, zk);
    }

    let worst = z
        .iter()
        .map(|&r| p.relative_residual(r))
        .fold(0.0, f64::max);
    if worst > RESIDUAL_TOL || z.iter().any(|r| !r.re.is_finite() || !r.im.is_finite()) {
        return Err(Error::NoConvergence {
            iterations: MAX_ITERATIONS,
            residual: worst,
        });
    }
    Ok(z)
}

/// Eigenvalues of the companion matrix, polished.
fn eigen_roots(p: &TauPolynomial) -> Result<Vec<Complex64>> {
    let mut z: Vec<Complex64> = p
        .companion()
        .eigenvalues()
        .ok_or(Error::NoConvergence {
            iterations: MAX_ITERATIONS,
            residual: f64::INFINITY,
        })?
        .iter()
        .copied()
        .collect();
    for zk in z.iter_mut() {
        polish(p, zk);
    }
    let worst = z
        .iter()
        .map(|&r| p.relative_residual(r))
        .fold(0.0, f64::max);
    if worst > RESIDUAL_TOL {
        return Err(Error::NoConvergence {
            iterations: MAX_ITERATIONS,
            residual: worst,
        });
    }
    Ok(z)
}

/// Two guarded Newton steps; a step is kept only if it lowers the residual.
fn polish(p: &TauPolynomial, z: &mut Complex64) {
    for _ in 0..2 {
        let (v, dv) = p.eval_with_derivative(*z);
        if dv.norm() == 0.0 || v.norm() == 0.0 {
            return;
        }
        let cand = *z - v / dv;
        if p.eval(cand).norm() < v.norm() {
            *z = cand;
        } else {
            return;
        }
    }
}

/// Root of `L(., xi)` closest to `seed`.
pub fn nearest_root(s: &SymbolSpec, xi: &[f64], seed: Complex64) -> Result<Complex64> {
    let roots = solve_roots(&s.evaluate(xi)?, None)?;
    Ok(roots
        .into_iter()
        .min_by(|a, b| (a - seed).norm().total_cmp(&(b - seed).norm()))
        .expect("at least one root"))
}

/// Matches `next` to the labels of `prev` by minimal total displacement.
///
/// Returns `perm` with `next[perm[k]]` continuing label `k`. Exhaustive over
/// all permutations up to six roots; greedy nearest-pair above that. Ties are
/// broken lexicographically on `(Re, Im)` of the displaced roots.
pub fn assign(prev: &[Complex64], next: &[Complex64]) -> Vec<usize> {
    let m = prev.len();
    debug_assert_eq!(m, next.len());
    if m <= 6 {
        assign_exhaustive(prev, next)
    } else {
        assign_greedy(prev, next)
    }
}

fn lex_cmp(a: Complex64, b: Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn assign_exhaustive(prev: &[Complex64], next: &[Complex64]) -> Vec<usize> {
    let m = prev.len();
    let mut perm: Vec<usize> = (0..m).collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let cost = |perm: &[usize]| -> f64 {
        perm.iter()
            .enumerate()
            .map(|(k, &i)| (prev[k] - next[i]).norm())
            .sum()
    };
    let better = |cand: &[usize], c: f64, best: &Option<(f64, Vec<usize>)>| -> bool {
        match best {
            None => true,
            Some((bc, bp)) => {
                let tol = 1e-12 * bc.max(1e-300);
                if c < bc - tol {
                    true
                } else if c <= bc + tol {
                    // tie: lexicographically smaller displaced sequence wins
                    for (a, b) in cand.iter().zip(bp) {
                        match lex_cmp(next[*a], next[*b]) {
                            std::cmp::Ordering::Less => return true,
                            std::cmp::Ordering::Greater => return false,
                            std::cmp::Ordering::Equal => {}
                        }
                    }
                    false
                } else {
                    false
                }
            }
        }
    };
    // Heap's algorithm over all permutations.
    let mut c = vec![0usize; m];
    let c0 = cost(&perm);
    best = if better(&perm, c0, &best) {
        Some((c0, perm.clone()))
    } else {
        best
    };
    let mut i = 0;
    while i < m {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            let cc = cost(&perm);
            if better(&perm, cc, &best) {
                best = Some((cc, perm.clone()));
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best.map(|(_, p)| p).unwrap_or_else(|| (0..m).collect())
}

fn assign_greedy(prev: &[Complex64], next: &[Complex64]) -> Vec<usize> {
    let m = prev.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(m * m);
    for (k, p) in prev.iter().enumerate() {
        for (i, q) in next.iter().enumerate() {
            pairs.push(((p - q).norm(), k, i));
        }
    }
    pairs.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(lex_cmp(next[a.2], next[b.2]))
            .then(a.1.cmp(&b.1))
    });
    let mut perm = vec![usize::MAX; m];
    let mut used = vec![false; m];
    for (_, k, i) in pairs {
        if perm[k] == usize::MAX && !used[i] {
            perm[k] = i;
            used[i] = true;
        }
    }
    // Collision repair: any label left unmatched takes the nearest free root.
    for k in 0..m {
        if perm[k] == usize::MAX {
            let i = (0..m)
                .filter(|&i| !used[i])
                .min_by(|&a, &b| (prev[k] - next[a]).norm().total_cmp(&(prev[k] - next[b]).norm()))
                .expect("a free root remains");
            perm[k] = i;
            used[i] = true;
        }
    }
    perm
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| lex_cmp(*a, *b));
        v
    }

    #[test]
    fn dissipative_quadratic_matches_formula() {
        let p = TauPolynomial::new(vec![cx(1.0, 0.0), cx(0.0, -1.0), cx(-1.0, 0.0)]).unwrap();
        let r = sorted(solve_roots(&p, None).unwrap());
        let s3 = 3f64.sqrt();
        let expected = sorted(vec![cx(s3 / 2.0, 0.5), cx(-s3 / 2.0, 0.5)]);
        for (a, b) in r.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn pure_wave_quadratic() {
        let p = TauPolynomial::new(vec![cx(1.0, 0.0), cx(0.0, 0.0), cx(-25.0, 0.0)]).unwrap();
        let r = sorted(solve_roots(&p, None).unwrap());
        assert!((r[0] - cx(-5.0, 0.0)).norm() < 1e-14);
        assert!((r[1] - cx(5.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn warm_start_preserves_labels() {
        let p = TauPolynomial::from_roots(&[cx(-1.0, 0.0), cx(0.0, 0.0), cx(1.0, 0.0)]);
        let warm = [cx(0.9, 0.01), cx(-1.1, 0.0), cx(0.05, -0.02)];
        let r = solve_roots(&p, Some(&warm)).unwrap();
        assert!((r[0] - cx(1.0, 0.0)).norm() < 1e-13);
        assert!((r[1] - cx(-1.0, 0.0)).norm() < 1e-13);
        assert!(r[2].norm() < 1e-13);
    }

    #[test]
    fn high_degree_with_clusters() {
        let roots = [
            cx(1.0, 0.0),
            cx(1.0 + 1e-4, 0.0),
            cx(-2.0, 1.0),
            cx(0.0, 3.0),
            cx(0.5, -0.5),
            cx(-1.0, -1.0),
            cx(2.0, 2.0),
            cx(0.0, 0.0),
            cx(3.0, 0.1),
        ];
        let p = TauPolynomial::from_roots(&roots);
        let r = solve_roots(&p, None).unwrap();
        for z in &r {
            assert!(p.relative_residual(*z) <= RESIDUAL_TOL);
            assert!(z.norm() <= p.root_bound());
        }
        for want in &roots {
            let best = r.iter().map(|z| (z - want).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-6, "{want} missing, nearest at {best:e}");
        }
    }

    #[test]
    fn exact_double_root() {
        let p = TauPolynomial::from_roots(&[cx(0.0, 0.5), cx(0.0, 0.5), cx(1.0, 0.0)]);
        let r = solve_roots(&p, None).unwrap();
        let near: Vec<_> = r.iter().filter(|z| (*z - cx(0.0, 0.5)).norm() < 1e-6).collect();
        assert_eq!(near.len(), 2);
    }

    #[test]
    fn greedy_assignment_is_a_permutation() {
        let prev: Vec<Complex64> = (0..8).map(|k| cx(k as f64, 0.0)).collect();
        let next: Vec<Complex64> = (0..8).rev().map(|k| cx(k as f64 + 0.1, 0.0)).collect();
        let perm = assign(&prev, &next);
        let mut seen = perm.clone();
        seen.sort();
        assert_eq!(seen, (0..8).collect::<Vec<_>>());
        for (k, &i) in perm.iter().enumerate() {
            assert!((prev[k] - next[i]).norm() < 0.2);
        }
    }
}
