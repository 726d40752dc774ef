use num_complex::Complex64;

use super::poly::MonomialPoly;
use super::spec::SymbolSpec;
use super::system::{system_dispersion, SystemMatrix, MAX_SYSTEM_SIZE};
use crate::error::{Error, Result};

/// Multi-indices of length `n` with `|alpha| <= level`, graded lexicographic.
pub fn multi_indices(level: usize, n: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for degree in 0..=level as u32 {
        let mut current = vec![0u32; n];
        push_degree(&mut out, &mut current, 0, degree);
    }
    out
}

fn push_degree(out: &mut Vec<Vec<u32>>, current: &mut Vec<u32>, pos: usize, remaining: u32) {
    let n = current.len();
    if pos + 1 == n {
        current[pos] = remaining;
        out.push(current.clone());
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e;
        push_degree(out, current, pos + 1, remaining - e);
    }
    current[pos] = 0;
}

/// Galerkin truncation of the kinetic Fokker-Planck equation in Hermite
/// moments up to `|alpha| <= level` in `n` velocity dimensions.
///
/// Returns the matrix `-sum_j A_j xi_j + i B` together with its dispersion
/// symbol `det(tau I + sum_j A_j xi_j - i B)`.
pub fn fokker_planck_symbol(level: usize, n: usize) -> Result<(SystemMatrix, SymbolSpec)> {
    if level == 0 {
        return Err(Error::InvalidArgument("Fokker-Planck level must be at least 1".into()));
    }
    if !(1..=3).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "Fokker-Planck dimension must be 1, 2 or 3, got {n}"
        )));
    }
    let basis = multi_indices(level, n);
    let size = basis.len();
    if size > MAX_SYSTEM_SIZE {
        return Err(Error::InvalidArgument(format!(
            "Fokker-Planck level {level} in dimension {n} has {size} moments (max {MAX_SYSTEM_SIZE})"
        )));
    }
    let index_of = |alpha: &[u32]| basis.iter().position(|b| b.as_slice() == alpha);
    let mut entries = vec![vec![MonomialPoly::zero(n); size]; size];
    for (col, alpha) in basis.iter().enumerate() {
        let b = alpha.iter().sum::<u32>() as f64;
        entries[col][col].add_term(vec![0; n], Complex64::new(0.0, b));
        for j in 0..n {
            let mut key = vec![0u32; n];
            key[j] = 1;
            if alpha[j] > 0 {
                let mut down = alpha.clone();
                down[j] -= 1;
                let row = index_of(&down).expect("lower moment in basis");
                entries[row][col].add_term(key.clone(), Complex64::new(-(alpha[j] as f64), 0.0));
            }
            let mut up = alpha.clone();
            up[j] += 1;
            if let Some(row) = index_of(&up) {
                entries[row][col].add_term(key, Complex64::new(-1.0, 0.0));
            }
        }
    }
    let matrix = SystemMatrix::new(n, entries)?;
    let symbol = system_dispersion(&matrix)?;
    Ok((matrix, symbol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roots::solve_roots;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn graded_lex_order() {
        let b = multi_indices(2, 2);
        assert_eq!(
            b,
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![0, 1],
                vec![2, 0],
                vec![1, 1],
                vec![0, 2]
            ]
        );
    }

    #[test]
    fn level_one_line_is_dissipative_wave() {
        let (_, s) = fokker_planck_symbol(1, 1).unwrap();
        for xi in [0.0, 0.3, 2.0] {
            let p = s.evaluate(&[xi]).unwrap();
            assert!((p.coeff(1) - cx(0.0, -1.0)).norm() < 1e-15);
            assert!((p.coeff(2) - cx(-xi * xi, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn origin_factorisation_level_two() {
        let (_, s) = fokker_planck_symbol(2, 1).unwrap();
        let mut roots = solve_roots(&s.evaluate(&[0.0]).unwrap(), None).unwrap();
        roots.sort_by(|a, b| a.im.total_cmp(&b.im));
        for (r, want) in roots.iter().zip([0.0, 1.0, 2.0]) {
            assert!((r - cx(0.0, want)).norm() < 1e-10, "{r}");
        }
    }

    #[test]
    fn trace_identity_gives_stability_pass() {
        for (level, n) in [(1, 1), (2, 1), (3, 1), (1, 2), (2, 2), (1, 3)] {
            let (_, s) = fokker_planck_symbol(level, n).unwrap();
            let trace: f64 = multi_indices(level, n)
                .iter()
                .map(|a| a.iter().sum::<u32>() as f64)
                .sum();
            let c = s.tau_m_minus_one_coefficient();
            assert!((c.im + trace).abs() < 1e-12, "{level} {n}: {c}");
            assert!(s.necessary_stability_check().passed());
        }
    }

    #[test]
    fn single_root_at_origin() {
        for (level, n) in [(1, 1), (2, 1), (2, 2), (1, 3)] {
            let (_, s) = fokker_planck_symbol(level, n).unwrap();
            let p = s.evaluate(&vec![0.0; n]).unwrap();
            let m = p.degree();
            assert!(p.coeff(m).norm() < 1e-14);
            assert!(p.coeff(m - 1).norm() > 1e-6);
        }
    }

    #[test]
    fn out_of_range_is_rejected() {
        assert!(fokker_planck_symbol(0, 1).is_err());
        assert!(fokker_planck_symbol(1, 4).is_err());
        assert!(fokker_planck_symbol(3, 3).is_err());
    }
}
