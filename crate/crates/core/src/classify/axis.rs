use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::multiplicity::estimate_codimension;
use super::{dist, norm, Region};
use crate::error::Result;
use crate::roots::{nearest_root, root_jet, RootField};
use crate::symbols::SymbolSpec;

/// `|Im tau| <= AXIS_TOL (1 + |tau|)` counts as lying on the real axis.
pub const AXIS_TOL: f64 = 1e-9;
/// `inf Im tau > SEPARATION_TOL` is reported as separated from the axis.
pub const SEPARATION_TOL: f64 = 1e-3;
/// Refined contact points must satisfy `Im tau <= CONTACT_TOL (1 + |tau|)`.
const CONTACT_TOL: f64 = 1e-7;

fn on_axis(t: Complex64) -> bool {
    t.im.abs() <= AXIS_TOL * (1.0 + t.norm())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityScan {
    pub stable: bool,
    pub min_im: f64,
    pub argmin: Vec<f64>,
    pub label: usize,
}

/// Minimum of `Im tau_k` over the nodes of `region` (all nodes if `None`).
pub fn stability_scan(field: &RootField, region: Option<&[usize]>) -> StabilityScan {
    let all: Vec<usize>;
    let nodes = match region {
        Some(r) => r,
        None => {
            all = (0..field.len()).collect();
            &all
        }
    };
    let mut best = (f64::INFINITY, 0usize, 0usize, 0.0);
    for &node in nodes {
        for (k, t) in field.roots[node].iter().enumerate() {
            if t.im < best.0 {
                best = (t.im, node, k, t.norm());
            }
        }
    }
    let (min_im, node, label, abs) = best;
    StabilityScan {
        stable: min_im >= -AXIS_TOL * (1.0 + abs),
        min_im,
        argmin: if nodes.is_empty() { vec![] } else { field.grid.point(node) },
        label,
    }
}

/// Where a root touches the real axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactPoint {
    pub point: Vec<f64>,
    pub tau: Complex64,
    /// Lies on the boundary of the excluded ball rather than in the interior.
    pub boundary: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactSet {
    pub points: Vec<ContactPoint>,
    pub isolated: bool,
    pub at_origin: bool,
    /// Codimension of the contact set.
    pub codimension: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AxisKind {
    Separated {
        delta: f64,
    },
    OnAxis,
    MeetsFiniteOrder {
        s: u32,
        s_fit: f64,
        c0: f64,
        s1: Option<u32>,
        s1_fit: Option<f64>,
        c1: Option<f64>,
        contact: ContactSet,
    },
    Unclassified {
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisBehavior {
    pub label: usize,
    #[serde(flatten)]
    pub kind: AxisKind,
    pub low_confidence: bool,
    /// The raw order fit rounded to an odd integer and was moved to the
    /// nearest even one.
    pub parity_rounded: bool,
    pub fit_rms: Option<f64>,
}

impl AxisBehavior {
    fn plain(label: usize, kind: AxisKind) -> Self {
        Self {
            label,
            kind,
            low_confidence: false,
            parity_rounded: false,
            fit_rms: None,
        }
    }
}

/// Least squares line `y = a + b x`; returns `(a, b, rms)`.
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rms = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - a - b * x).powi(2))
        .sum::<f64>()
        / nf)
        .sqrt();
    Some((a, b, rms))
}

/// Newton iteration on `grad Im tau = 0` inside the cell around `start`.
fn refine_minimum(
    s: &SymbolSpec,
    start: &[f64],
    tau0: Complex64,
    half: &[f64],
) -> Result<(Vec<f64>, Complex64)> {
    let n = start.len();
    let mut x = start.to_vec();
    let mut tau = tau0;
    for _ in 0..30 {
        let Ok(jet) = root_jet(s, &x, tau) else { break };
        tau = jet.tau;
        let g = DVector::from_fn(n, |i, _| jet.gradient[i].im);
        let h = DMatrix::from_fn(n, n, |i, j| jet.hessian[(i, j)].im);
        let Some(step) = h.lu().solve(&(-&g)) else { break };
        let cand: Vec<f64> = (0..n)
            .map(|i| (x[i] + step[i]).clamp(start[i] - half[i], start[i] + half[i]))
            .collect();
        let t = nearest_root(s, &cand, tau)?;
        if t.im >= tau.im {
            break;
        }
        let moved = dist(&cand, &x);
        x = cand;
        tau = t;
        if moved < 1e-14 {
            break;
        }
    }
    Ok((x, tau))
}

/// Points where root `k` touches the real axis inside `region`: nodes on the
/// axis, refined local minima of `Im tau_k`, and boundary contacts on the
/// excluded ball.
pub fn find_contacts(
    s: &SymbolSpec,
    field: &RootField,
    k: usize,
    region: &Region,
) -> Result<Vec<ContactPoint>> {
    let grid = &field.grid;
    let member = region.membership(field.len());
    let mut out: Vec<ContactPoint> = Vec::new();
    for &node in region.nodes {
        let t = field.roots[node][k];
        let xi = grid.point(node);
        if on_axis(t) {
            let boundary = region.exclusion_radius > 0.0
                && norm(&xi) - region.exclusion_radius <= 0.5 * grid.step();
            out.push(ContactPoint {
                point: xi.clone(),
                tau: t,
                boundary,
            });
            continue;
        }
        if t.im > SEPARATION_TOL {
            continue;
        }
        let neighbors = grid.neighbors(node);
        let in_region: Vec<usize> = neighbors.iter().copied().filter(|&j| member[j]).collect();
        if in_region.iter().any(|&j| field.roots[j][k].im < t.im) {
            continue;
        }
        let on_edge = in_region.len() < neighbors.len();
        if on_edge && region.exclusion_radius > 0.0 {
            let r = norm(&xi);
            if r > 0.0 && r - region.exclusion_radius <= 1.5 * grid.step() {
                let p: Vec<f64> = xi.iter().map(|v| v * region.exclusion_radius / r).collect();
                let tp = nearest_root(s, &p, t)?;
                if tp.im.abs() <= CONTACT_TOL * (1.0 + tp.norm()) {
                    out.push(ContactPoint {
                        point: p,
                        tau: tp,
                        boundary: true,
                    });
                    continue;
                }
            }
        }
        let half: Vec<f64> = grid.cell_extent(node).iter().map(|e| 0.5 * e).collect();
        let (p, tp) = refine_minimum(s, &xi, t, &half)?;
        if tp.im.abs() <= CONTACT_TOL * (1.0 + tp.norm()) {
            out.push(ContactPoint {
                point: p,
                tau: tp,
                boundary: false,
            });
        }
    }
    // Neighbouring minima refine to the same point.
    let h = grid.step();
    let mut merged: Vec<ContactPoint> = Vec::with_capacity(out.len());
    for c in out {
        if !merged
            .iter()
            .any(|d| d.boundary == c.boundary && dist(&d.point, &c.point) < 0.5 * h)
        {
            merged.push(c);
        }
    }
    Ok(merged)
}

/// Classifies how root `k` sits relative to the real axis on `region`.
pub fn axis_behavior(
    s: &SymbolSpec,
    field: &RootField,
    k: usize,
    region: &Region,
) -> Result<AxisBehavior> {
    let grid = &field.grid;
    if region.nodes.is_empty() {
        return Ok(AxisBehavior::plain(
            k,
            AxisKind::Unclassified {
                reason: "empty region".into(),
            },
        ));
    }
    let vals: Vec<Complex64> = region.nodes.iter().map(|&j| field.roots[j][k]).collect();
    let min_im = vals.iter().map(|t| t.im).fold(f64::INFINITY, f64::min);
    if min_im > SEPARATION_TOL {
        let delta = refined_separation(s, field, k, region, min_im)?;
        if delta > SEPARATION_TOL {
            return Ok(AxisBehavior::plain(k, AxisKind::Separated { delta }));
        }
    }
    if vals.iter().all(|&t| on_axis(t)) {
        return Ok(AxisBehavior::plain(k, AxisKind::OnAxis));
    }
    let contacts = find_contacts(s, field, k, region)?;
    if contacts.is_empty() {
        return Ok(AxisBehavior {
            low_confidence: true,
            ..AxisBehavior::plain(k, AxisKind::Separated { delta: min_im.max(0.0) })
        });
    }
    let h = grid.step();
    let upper = (20.0 * h).min(region.max_fit_distance);
    let on_axis_nodes = contacts.iter().filter(|c| !c.boundary).count();
    if on_axis_nodes * 4 > region.nodes.len() {
        return Ok(AxisBehavior::plain(
            k,
            AxisKind::Unclassified {
                reason: "root lies on the real axis over an open set and leaves it".into(),
            },
        ));
    }

    let dist_to_set = |x: &[f64]| {
        contacts
            .iter()
            .map(|c| dist(x, &c.point))
            .fold(f64::INFINITY, f64::min)
    };
    let avoid = |x: &[f64]| region.avoid.iter().any(|p| dist(x, p) < 4.0 * h);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ys_abs = Vec::new();
    for (&node, t) in region.nodes.iter().zip(&vals) {
        let xi = grid.point(node);
        let d = dist_to_set(&xi);
        if d < 2.0 * h || d > upper || avoid(&xi) || t.im <= 0.0 {
            continue;
        }
        xs.push(d.ln());
        ys.push(t.im.ln());
        ys_abs.push(t.norm().ln());
    }
    let Some((a, s_fit, rms)) = linear_fit(&xs, &ys).filter(|_| xs.len() >= 3) else {
        return Ok(AxisBehavior {
            low_confidence: true,
            ..AxisBehavior::plain(
                k,
                AxisKind::Unclassified {
                    reason: format!("too few samples ({}) to fit the contact order", xs.len()),
                },
            )
        });
    };
    if s_fit < 0.5 {
        return Ok(AxisBehavior {
            low_confidence: true,
            fit_rms: Some(rms),
            ..AxisBehavior::plain(
                k,
                AxisKind::Unclassified {
                    reason: format!("contact order fit {s_fit:.2} is not positive"),
                },
            )
        });
    }

    let isolated = contacts.len() == 1
        || contacts.iter().enumerate().all(|(i, c)| {
            contacts
                .iter()
                .enumerate()
                .all(|(j, d)| i == j || dist(&c.point, &d.point) > 3.0 * h)
        });
    let interior = contacts.iter().all(|c| !c.boundary);
    let nearest = s_fit.round().max(1.0) as u32;
    let (order, parity_rounded) = if isolated && interior {
        let even = (2.0 * (s_fit / 2.0).round()).max(2.0) as u32;
        (even, nearest % 2 == 1)
    } else {
        (nearest, false)
    };
    let at_origin = contacts.iter().all(|c| norm(&c.point) <= 0.5 * h + 1e-12);
    let zero_root = contacts
        .iter()
        .all(|c| c.tau.norm() <= CONTACT_TOL * (1.0 + c.tau.norm()));
    let (s1, s1_fit, c1) = if zero_root {
        match linear_fit(&xs, &ys_abs) {
            Some((a1, b1, _)) => (Some(b1.round().max(1.0) as u32), Some(b1), Some(a1.exp())),
            None => (None, None, None),
        }
    } else {
        (None, None, None)
    };
    let n = grid.dimension() as u32;
    let codimension = if isolated {
        n
    } else {
        let pts: Vec<Vec<f64>> = contacts.iter().map(|c| c.point.clone()).collect();
        estimate_codimension(&pts, grid).map(|f| f.codimension).unwrap_or(n)
    };
    let low_confidence = rms > 0.1 || (s_fit - order as f64).abs() > 0.3;
    Ok(AxisBehavior {
        label: k,
        kind: AxisKind::MeetsFiniteOrder {
            s: order,
            s_fit,
            c0: a.exp(),
            s1,
            s1_fit,
            c1,
            contact: ContactSet {
                points: contacts,
                isolated,
                at_origin,
                codimension,
            },
        },
        low_confidence,
        parity_rounded,
        fit_rms: Some(rms),
    })
}

/// Re-checks the separation at quarter steps inside the cells of the
/// region's boundary nodes.
fn refined_separation(
    s: &SymbolSpec,
    field: &RootField,
    k: usize,
    region: &Region,
    min_im: f64,
) -> Result<f64> {
    let grid = &field.grid;
    let member = region.membership(field.len());
    let mut delta = min_im;
    for &node in region.nodes {
        let nbs = grid.neighbors(node);
        if nbs.iter().all(|&j| member[j]) {
            continue;
        }
        let xi = grid.point(node);
        let t = field.roots[node][k];
        for &j in &nbs {
            let xj = grid.point(j);
            for frac in [0.25, 0.5] {
                let p: Vec<f64> = xi.iter().zip(&xj).map(|(a, b)| a + frac * (b - a)).collect();
                if region.exclusion_radius > 0.0 && norm(&p) < region.exclusion_radius {
                    continue;
                }
                delta = delta.min(nearest_root(s, &p, t)?.im);
            }
        }
    }
    Ok(delta)
}
