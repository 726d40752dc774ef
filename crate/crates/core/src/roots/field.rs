use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::FrequencyGrid;
use super::solver::{assign, solve_roots};
use crate::error::{Error, Result};
use crate::symbols::{SymbolSpec, TauPolynomial};

/// Relative discriminant level below which a node is multiplicity-flagged.
pub const MULTIPLICITY_TOL: f64 = 1e-10;

/// Roots closer than this times the root scale belong to one cluster at a
/// refined multiplicity point.
const CLUSTER_TOL: f64 = 1e-3;

/// Multiplicity information attached to a flagged node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coincidence {
    /// Refined frequency where the discriminant vanishes inside the node's cell.
    pub point: Vec<f64>,
    /// Labels whose roots coincide there.
    pub labels: Vec<usize>,
    /// Common root value.
    pub tau: Complex64,
}

/// Continuously labelled roots over a frequency grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RootField {
    pub grid: FrequencyGrid,
    pub order: usize,
    /// `roots[node][k]` is `tau_k` at the node.
    pub roots: Vec<Vec<Complex64>>,
    /// `|disc L(., xi)|` per node.
    pub discriminant: Vec<f64>,
    /// Worst normwise backward error per node.
    pub residual: Vec<f64>,
    /// Multiplicity flags with their refined coincidence data.
    pub coincidences: Vec<Option<Coincidence>>,
}

impl RootField {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn is_flagged(&self, node: usize) -> bool {
        self.coincidences[node].is_some()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        self.grid.points()
    }

    /// CSV with one line per node and label.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let n = self.grid.dimension();
        let mut header = String::from("node");
        for i in 0..n {
            header.push_str(&format!(",xi{}", i + 1));
        }
        header.push_str(",k,re,im,abs_discriminant");
        writeln!(out, "{header}")?;
        for (node, roots) in self.roots.iter().enumerate() {
            let xi = self.grid.point(node);
            let coords: String = xi.iter().map(|x| format!(",{x:e}")).collect();
            for (k, r) in roots.iter().enumerate() {
                writeln!(
                    out,
                    "{node}{coords},{},{:e},{:e},{:e}",
                    k + 1,
                    r.re,
                    r.im,
                    self.discriminant[node]
                )?;
            }
        }
        Ok(())
    }
}

/// `max(1, max_j |c_j|^(1/j))`.
fn root_scale(p: &TauPolynomial) -> f64 {
    p.root_scale()
}

fn disc_abs(s: &SymbolSpec, xi: &[f64]) -> Result<(f64, f64)> {
    let p = s.evaluate(xi)?;
    Ok((p.discriminant().norm(), root_scale(&p)))
}

/// Threshold on `|disc|` for a polynomial with the given root scale.
pub fn multiplicity_threshold(order: usize, scale: f64) -> f64 {
    MULTIPLICITY_TOL * scale.powi(2 * order as i32 - 2)
}

/// Minimises `|disc|` over the box `center +- half` by damped Gauss-Newton on
/// the real and imaginary parts.
fn refine_zero(s: &SymbolSpec, center: &[f64], half: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = center.len();
    let disc = |x: &[f64]| -> Result<Complex64> { s.discriminant_at(x) };
    let mut x = center.to_vec();
    let mut fx = disc(&x)?;
    let h_fd: Vec<f64> = half.iter().map(|h| (h * 1e-4).max(1e-12)).collect();
    let mut damping = 1e-3;
    for _ in 0..80 {
        if fx.norm() == 0.0 {
            break;
        }
        // Jacobian rows: Re, Im; columns: xi_i.
        let mut jac = nalgebra::DMatrix::<f64>::zeros(2, n);
        for i in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h_fd[i];
            xm[i] -= h_fd[i];
            let d = (disc(&xp)? - disc(&xm)?) / (2.0 * h_fd[i]);
            jac[(0, i)] = d.re;
            jac[(1, i)] = d.im;
        }
        let r = nalgebra::DVector::from_vec(vec![fx.re, fx.im]);
        let jt = jac.transpose();
        let mut improved = false;
        for _ in 0..12 {
            let mut a = &jt * &jac;
            let diag_scale = (0..n).map(|i| a[(i, i)]).fold(0.0, f64::max).max(1e-300);
            for i in 0..n {
                a[(i, i)] += damping * diag_scale;
            }
            let Some(step) = a.lu().solve(&(-(&jt * &r))) else {
                damping *= 10.0;
                continue;
            };
            let cand: Vec<f64> = (0..n)
                .map(|i| (x[i] + step[i]).clamp(center[i] - half[i], center[i] + half[i]))
                .collect();
            let fc = disc(&cand)?;
            if fc.norm() < fx.norm() {
                x = cand;
                fx = fc;
                damping = (damping * 0.3).max(1e-12);
                improved = true;
                break;
            }
            damping *= 10.0;
        }
        if !improved {
            break;
        }
    }
    Ok((x, fx.norm()))
}

/// Decides whether a node's cell contains a zero of the discriminant.
fn detect_coincidence(s: &SymbolSpec, grid: &FrequencyGrid, node: usize) -> Result<Option<Coincidence>> {
    let xi = grid.point(node);
    let extent = grid.cell_extent(node);
    let (d0, scale) = disc_abs(s, &xi)?;
    let m = s.order();
    let thresh = multiplicity_threshold(m, scale);
    let n = xi.len();
    let candidate = if d0 < thresh {
        true
    } else {
        let mut grad2 = 0.0;
        for i in 0..n {
            let h = extent[i] * 1e-3;
            let mut xp = xi.clone();
            let mut xm = xi.clone();
            xp[i] += h;
            xm[i] -= h;
            let g = (s.discriminant_at(&xp)? - s.discriminant_at(&xm)?).norm() / (2.0 * h);
            grad2 += g * g;
        }
        let diag = extent.iter().map(|e| e * e).sum::<f64>().sqrt();
        d0 <= 2.0 * grad2.sqrt() * diag
    };
    if !candidate {
        return Ok(None);
    }
    let half: Vec<f64> = extent.iter().map(|e| 0.5 * e).collect();
    let (point, dmin) = if d0 < thresh {
        (xi.clone(), d0)
    } else {
        refine_zero(s, &xi, &half)?
    };
    let p = s.evaluate(&point)?;
    if dmin >= multiplicity_threshold(m, root_scale(&p)) {
        return Ok(None);
    }
    let roots = solve_roots(&p, None)?;
    let tol = CLUSTER_TOL * root_scale(&p);
    // Closest pair seeds the cluster; every root near it joins.
    let mut best = (0, 1, f64::INFINITY);
    for a in 0..m {
        for b in a + 1..m {
            let d = (roots[a] - roots[b]).norm();
            if d < best.2 {
                best = (a, b, d);
            }
        }
    }
    if m < 2 || best.2 > tol {
        return Ok(None);
    }
    let center = (roots[best.0] + roots[best.1]) * 0.5;
    let members: Vec<usize> = (0..m).filter(|&k| (roots[k] - center).norm() <= tol).collect();
    let tau = members.iter().map(|&k| roots[k]).sum::<Complex64>() / members.len() as f64;
    Ok(Some(Coincidence {
        point,
        labels: members,
        tau,
    }))
}

struct NodeState {
    roots: Vec<Complex64>,
    reference: Option<Vec<Complex64>>,
    residual: f64,
}

fn solve_node(
    s: &SymbolSpec,
    xi: &[f64],
    warm: Option<&[Complex64]>,
    flagged: bool,
) -> Result<NodeState> {
    let p = s.evaluate(xi)?;
    let roots = solve_roots(&p, warm)?;
    let residual = roots
        .iter()
        .map(|r| p.relative_residual(*r))
        .fold(0.0, f64::max);
    let reference = if flagged {
        warm.map(<[Complex64]>::to_vec)
    } else {
        Some(roots.clone())
    };
    Ok(NodeState {
        roots,
        reference,
        residual,
    })
}

/// Solves `L(tau, xi) = 0` at every node and labels the roots continuously.
///
/// Labels propagate along the grid's tracking tree. Each node is matched to
/// the roots of its nearest unflagged ancestor, so labels are frozen through
/// multiplicity-flagged cells.
pub fn track_field(s: &SymbolSpec, grid: &FrequencyGrid) -> Result<RootField> {
    if grid.dimension() != s.dimension() {
        return Err(Error::DimensionMismatch {
            expected: s.dimension(),
            got: grid.dimension(),
        });
    }
    let len = grid.len();
    let points = grid.points();
    let coincidences: Vec<Option<Coincidence>> = (0..len)
        .into_par_iter()
        .map(|k| detect_coincidence(s, grid, k))
        .collect::<Result<_>>()?;
    let discriminant: Vec<f64> = points
        .par_iter()
        .map(|x| s.discriminant_at(x).map(|d| d.norm()))
        .collect::<Result<_>>()?;

    let mut states: Vec<Option<NodeState>> = (0..len).map(|_| None).collect();
    let root = grid.node(&grid.center());
    states[root] = Some(solve_node(s, &points[root], None, coincidences[root].is_some())?);
    for stage in grid.stages() {
        let solved: Vec<Vec<(usize, NodeState)>> = stage
            .par_iter()
            .map(|line| {
                let mut local: Vec<(usize, NodeState)> = Vec::with_capacity(line.len());
                for &node in line {
                    let parent = grid.parent(node).expect("non-root node");
                    let reference = local
                        .iter()
                        .rev()
                        .find(|(k, _)| *k == parent)
                        .map(|(_, st)| st.reference.clone())
                        .unwrap_or_else(|| {
                            states[parent].as_ref().expect("parent solved").reference.clone()
                        });
                    let st = solve_node(
                        s,
                        &points[node],
                        reference.as_deref(),
                        coincidences[node].is_some(),
                    )?;
                    local.push((node, st));
                }
                Ok(local)
            })
            .collect::<Result<_>>()?;
        for line in solved {
            for (node, st) in line {
                states[node] = Some(st);
            }
        }
    }
    let mut roots = Vec::with_capacity(len);
    let mut residual = Vec::with_capacity(len);
    for st in states {
        let st = st.expect("every node is reached by the tracking tree");
        roots.push(st.roots);
        residual.push(st.residual);
    }
    // Participating labels were found on a fresh solve; express them in the
    // tracked labelling of the node.
    let coincidences = coincidences
        .into_iter()
        .enumerate()
        .map(|(node, c)| {
            c.map(|mut c| {
                let p = s.evaluate(&c.point).expect("dimension checked");
                if let Ok(fresh) = solve_roots(&p, None) {
                    let perm = assign(&roots[node], &fresh);
                    let mut labels: Vec<usize> = c
                        .labels
                        .iter()
                        .filter_map(|&f| perm.iter().position(|&q| q == f))
                        .collect();
                    labels.sort_unstable();
                    c.labels = labels;
                }
                c
            })
        })
        .collect();
    Ok(RootField {
        grid: grid.clone(),
        order: s.order(),
        roots,
        discriminant,
        residual,
        coincidences,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roots::grid::Axis;
    use crate::symbols::corpus;

    #[test]
    fn dissipative_branches_merge_at_half() {
        let s = corpus::dissipative_wave(1, 1.0);
        let g = FrequencyGrid::cartesian(vec![Axis::new(0.0, 2.0, 512).unwrap()]).unwrap();
        let f = track_field(&s, &g).unwrap();
        let flagged: Vec<usize> = (0..f.len()).filter(|&k| f.is_flagged(k)).collect();
        assert!(!flagged.is_empty());
        for &k in &flagged {
            let c = f.coincidences[k].as_ref().unwrap();
            assert!((c.point[0] - 0.5).abs() < 1e-4, "{:?}", c.point);
            assert_eq!(c.labels, vec![0, 1]);
        }
        // closed-form branches away from the merge point
        for k in 0..f.len() {
            let xi = g.point(k)[0];
            let sq = Complex64::new(4.0 * xi * xi - 1.0, 0.0).sqrt();
            let a = (Complex64::new(0.0, 1.0) + sq) * 0.5;
            let b = (Complex64::new(0.0, 1.0) - sq) * 0.5;
            let r = &f.roots[k];
            let ok = ((r[0] - a).norm() < 1e-7 && (r[1] - b).norm() < 1e-7)
                || ((r[0] - b).norm() < 1e-7 && (r[1] - a).norm() < 1e-7);
            assert!(ok, "xi={xi}");
            assert!(f.residual[k] < 1e-10);
        }
    }

    #[test]
    fn klein_gordon_never_flags() {
        let s = corpus::klein_gordon(2, 1.0);
        let g = FrequencyGrid::cube(2, 2.0, 21).unwrap();
        let f = track_field(&s, &g).unwrap();
        assert!((0..f.len()).all(|k| !f.is_flagged(k)));
        let gap = f
            .roots
            .iter()
            .map(|r| (r[0] - r[1]).norm())
            .fold(f64::INFINITY, f64::min);
        assert!((gap - 2.0).abs() < 1e-12);
    }

    #[test]
    fn wave_flags_only_origin() {
        let s = corpus::wave(2);
        let g = FrequencyGrid::cube(2, 1.0, 21).unwrap();
        let f = track_field(&s, &g).unwrap();
        let flagged: Vec<usize> = (0..f.len()).filter(|&k| f.is_flagged(k)).collect();
        assert_eq!(flagged, vec![g.node(&[10, 10])]);
    }

    #[test]
    fn labels_are_continuous_for_simple_roots() {
        let s = corpus::klein_gordon(1, 1.0);
        let g = FrequencyGrid::cube(1, 3.0, 61).unwrap();
        let f = track_field(&s, &g).unwrap();
        for k in 1..f.len() {
            for l in 0..2 {
                assert!((f.roots[k][l] - f.roots[k - 1][l]).norm() < 0.2);
            }
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let s = corpus::wave(1);
        let g = FrequencyGrid::cube(1, 1.0, 3).unwrap();
        let f = track_field(&s, &g).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 3 * 2);
        assert!(text.starts_with("node,xi1,k,re,im,abs_discriminant"));
    }
}
