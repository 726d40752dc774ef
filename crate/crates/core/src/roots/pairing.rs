use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::RootField;
use super::solver::solve_roots;
use crate::error::{Error, Result};
use crate::symbols::SymbolSpec;

/// Growth exponent of the deviation above which pairing is declared unbounded.
const GROWTH_SLOPE_LIMIT: f64 = 0.25;

/// Pairing of full roots with principal roots at large frequencies.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Pairing {
    /// `principal_label[k]`: rank, in `(Re, Im)` order, of the principal root
    /// paired with `tau_k`.
    pub principal_label: Vec<usize>,
    /// `sup |tau_k - phi_{principal_label[k]}|` over the large-frequency nodes.
    pub sup_deviation: Vec<f64>,
    /// Log-log slope of the deviation against `|xi|` over the outer shell.
    pub growth_slope: f64,
}

impl Pairing {
    pub fn max_deviation(&self) -> f64 {
        self.sup_deviation.iter().copied().fold(0.0, f64::max)
    }
}

fn sorted_principal(s: &SymbolSpec, xi: &[f64]) -> Result<Vec<Complex64>> {
    let mut phi = solve_roots(&s.principal_polynomial(xi)?, None)?;
    phi.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(phi)
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(m - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, m - 1);
            out.push(q);
        }
    }
    out
}

/// Matches each tracked root to a principal root so that the sup of
/// `|tau_k - phi_k|` over nodes with `|xi| >= R/2` is minimal, and checks that
/// the deviation does not grow over the outer 20% of radii.
pub fn pair_principal(field: &RootField, s: &SymbolSpec) -> Result<Pairing> {
    let m = s.order();
    let points = field.points();
    let rmax = points
        .iter()
        .map(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let large: Vec<usize> = (0..field.len())
        .filter(|&k| !field.is_flagged(k))
        .filter(|&k| points[k].iter().map(|v| v * v).sum::<f64>().sqrt() >= 0.5 * rmax)
        .collect();
    if large.is_empty() {
        return Err(Error::InvalidArgument("grid has no large-frequency nodes".into()));
    }
    let principal: Vec<Vec<Complex64>> = large
        .iter()
        .map(|&k| sorted_principal(s, &points[k]))
        .collect::<Result<_>>()?;
    let candidates: Vec<Vec<usize>> = if m <= 6 {
        permutations(m)
    } else {
        // Per-node nearest matching of the outermost node.
        let last = large.len() - 1;
        let perm = super::solver::assign(&principal[last], &field.roots[large[last]]);
        let mut inverse = vec![0; m];
        for (phi_idx, &tau_idx) in perm.iter().enumerate() {
            inverse[tau_idx] = phi_idx;
        }
        vec![inverse]
    };
    let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
    for cand in candidates {
        let mut sup = vec![0.0f64; m];
        for (i, &node) in large.iter().enumerate() {
            for k in 0..m {
                let d = (field.roots[node][k] - principal[i][cand[k]]).norm();
                sup[k] = sup[k].max(d);
            }
        }
        let worst = sup.iter().copied().fold(0.0, f64::max);
        if best.as_ref().is_none_or(|(w, _, _)| worst < *w) {
            best = Some((worst, cand, sup));
        }
    }
    let (_, label, sup) = best.expect("at least one candidate");

    // Growth check on the outer shell.
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, &node) in large.iter().enumerate() {
        let r = points[node].iter().map(|v| v * v).sum::<f64>().sqrt();
        if r < 0.8 * rmax {
            continue;
        }
        let dev = (0..m)
            .map(|k| (field.roots[node][k] - principal[i][label[k]]).norm())
            .fold(0.0, f64::max);
        if dev > 1e-12 * (1.0 + r) {
            xs.push(r.ln());
            ys.push(dev.ln());
        }
    }
    let growth_slope = if xs.len() >= 3 {
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        if sxx > 0.0 {
            sxy / sxx
        } else {
            0.0
        }
    } else {
        0.0
    };
    if growth_slope > GROWTH_SLOPE_LIMIT {
        return Err(Error::UnboundedPairing { slope: growth_slope });
    }
    Ok(Pairing {
        principal_label: label,
        sup_deviation: sup,
        growth_slope,
    })
}
