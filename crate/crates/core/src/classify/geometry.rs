use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{norm, subsample};
use crate::error::{Error, Result};
use crate::roots::{nearest_root, root_jet, RootField};
use crate::symbols::SymbolSpec;

/// Highest contact order resolved; flatter contacts are reported as infinite.
pub const CAP_ORDER: u32 = 8;
const CURVE_SAMPLES: usize = 17;
/// Half-width of a traced curve relative to `|sigma|`.
const HALF_WIDTH: f64 = 0.1;
/// Scaled Taylor coefficients below this (relative to `|sigma|`) are noise.
const COEFF_TOL: f64 = 1e-8;
const RANDOM_PLANES: usize = 8;

/// Samples of `Sigma_lambda` cut by the plane through `sigma` spanned by the
/// normal and a tangent direction, as a graph `v(u)` over the tangent line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelCurve {
    pub lambda: f64,
    pub sigma: Vec<f64>,
    pub normal: Vec<f64>,
    pub tangent: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Offsets `u` where no bracketing interval was found.
    pub skipped: Vec<f64>,
}

impl LevelCurve {
    pub fn point(&self, i: usize) -> Vec<f64> {
        (0..self.sigma.len())
            .map(|d| self.sigma[d] + self.u[i] * self.tangent[d] + self.v[i] * self.normal[d])
            .collect()
    }
}

fn axpy(base: &[f64], a: f64, x: &[f64], b: f64, y: &[f64]) -> Vec<f64> {
    (0..base.len()).map(|i| base[i] + a * x[i] + b * y[i]).collect()
}

fn bisect(mut f: impl FnMut(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<Option<f64>> {
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(Some(lo));
    }
    if flo.signum() == fhi.signum() {
        return Ok(None);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(Some(mid));
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Traces `{Re tau = lambda}` near `sigma` in the plane spanned by the unit
/// normal `Re grad tau / |Re grad tau|` and `tangent`. Each offset `u` is
/// solved for `v` by bracketed bisection, following the root from `seed`.
pub fn level_set_trace(
    s: &SymbolSpec,
    seed: Complex64,
    sigma: &[f64],
    tangent: &[f64],
    half_width: f64,
    samples: usize,
) -> Result<LevelCurve> {
    let jet = root_jet(s, sigma, seed)?;
    let lambda = jet.tau.re;
    let g: Vec<f64> = jet.gradient.iter().map(|z| z.re).collect();
    let gn = norm(&g);
    if gn == 0.0 {
        return Err(Error::InvalidArgument("level set is singular at sigma".into()));
    }
    let normal: Vec<f64> = g.iter().map(|x| x / gn).collect();
    let dot: f64 = tangent.iter().zip(&normal).map(|(a, b)| a * b).sum();
    let t: Vec<f64> = tangent.iter().zip(&normal).map(|(a, b)| a - dot * b).collect();
    let tn = norm(&t);
    if tn < 1e-12 {
        return Err(Error::InvalidArgument("tangent direction parallel to the normal".into()));
    }
    let tangent: Vec<f64> = t.iter().map(|x| x / tn).collect();

    let half = samples / 2;
    let offsets: Vec<f64> = (0..samples)
        .map(|i| half_width * (i as f64 - half as f64) / half.max(1) as f64)
        .collect();
    let mut values: Vec<Option<(f64, Complex64)>> = vec![None; samples];
    values[half] = Some((0.0, jet.tau));
    // Walk outward from the centre in both directions.
    for dir in [1i64, -1] {
        let mut prev = (0.0f64, jet.tau);
        let mut i = half as i64 + dir;
        while i >= 0 && (i as usize) < samples {
            let u = offsets[i as usize];
            let seed_tau = prev.1;
            let mut value = |v: f64| -> Result<f64> {
                let x = axpy(sigma, u, &tangent, v, &normal);
                Ok(nearest_root(s, &x, seed_tau)?.re - lambda)
            };
            let du = half_width / half.max(1) as f64;
            let mut width = 2.0 * du + 1e-3 * norm(sigma);
            let mut found = None;
            for _ in 0..8 {
                if let Some(v) = bisect(&mut value, prev.0 - width, prev.0 + width)? {
                    found = Some(v);
                    break;
                }
                width *= 2.0;
            }
            match found {
                Some(v) => {
                    let x = axpy(sigma, u, &tangent, v, &normal);
                    let tau = nearest_root(s, &x, seed_tau)?;
                    values[i as usize] = Some((v, tau));
                    prev = (v, tau);
                }
                None => break,
            }
            i += dir;
        }
    }
    let mut u = Vec::new();
    let mut v = Vec::new();
    let mut skipped = Vec::new();
    for (i, val) in values.iter().enumerate() {
        match val {
            Some((vv, _)) => {
                u.push(offsets[i]);
                v.push(*vv);
            }
            None => skipped.push(offsets[i]),
        }
    }
    Ok(LevelCurve {
        lambda,
        sigma: sigma.to_vec(),
        normal,
        tangent,
        u,
        v,
        skipped,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactOrder {
    Finite(u32),
    Infinite,
}

/// Least `k >= 2` whose Taylor coefficient of `v(u)` is above the noise floor,
/// from a least squares fit on `u^0 .. u^CAP_ORDER` in the scaled variable
/// `u / max|u|`. Returns the order and a low-confidence flag.
pub fn contact_order(u: &[f64], v: &[f64], scale: f64) -> Result<(ContactOrder, bool)> {
    if u.len() < 9 {
        return Err(Error::TooFewSamples { found: u.len() });
    }
    let umax = u.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let cols = CAP_ORDER as usize + 1;
    let a = DMatrix::from_fn(u.len(), cols, |i, k| (u[i] / umax).powi(k as i32));
    let b = DVector::from_column_slice(v);
    let coeffs = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let tol = COEFF_TOL * scale;
    for k in 2..cols {
        let c = coeffs[k].abs();
        if c > tol {
            return Ok((ContactOrder::Finite(k as u32), c < 100.0 * tol));
        }
    }
    Ok((ContactOrder::Infinite, false))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactSample {
    pub lambda: f64,
    pub sigma: Vec<f64>,
    /// Contact order per sampled plane.
    pub orders: Vec<ContactOrder>,
    pub convex: bool,
    /// Side of the tangent line the curves lie on.
    pub orientation: i8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactIndex {
    /// Every traced curve lies on one side of its tangent line, with the
    /// same orientation everywhere.
    pub convex: bool,
    pub gamma: ContactOrder,
    pub gamma0: ContactOrder,
    pub planes_per_point: usize,
    pub low_confidence: bool,
    pub samples: Vec<ContactSample>,
}

fn tangent_directions(normal: &[f64], rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = normal.len();
    if n == 2 {
        return vec![vec![-normal[1], normal[0]]];
    }
    let project = |e: Vec<f64>| -> Option<Vec<f64>> {
        let d: f64 = e.iter().zip(normal).map(|(a, b)| a * b).sum();
        let p: Vec<f64> = e.iter().zip(normal).map(|(a, b)| a - d * b).collect();
        let pn = norm(&p);
        (pn > 0.1).then(|| p.iter().map(|x| x / pn).collect())
    };
    let mut out: Vec<Vec<f64>> = (0..n)
        .filter_map(|i| project((0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()))
        .collect();
    while out.len() < n + RANDOM_PLANES {
        let e: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if let Some(p) = project(e) {
            out.push(p);
        }
    }
    out
}

/// Sign of the curve relative to its tangent line: `1`, `-1`, or `0` when it
/// crosses or is flat.
fn side(curve: &LevelCurve, tol: f64) -> i8 {
    let pos = curve.v.iter().any(|&v| v > tol);
    let neg = curve.v.iter().any(|&v| v < -tol);
    let second: Vec<f64> = curve
        .v
        .windows(3)
        .map(|w| w[0] - 2.0 * w[1] + w[2])
        .collect();
    let dpos = second.iter().any(|&d| d > tol);
    let dneg = second.iter().any(|&d| d < -tol);
    match (pos, neg, dpos, dneg) {
        (true, false, _, false) => 1,
        (false, true, false, _) => -1,
        _ => 0,
    }
}

/// Convexity of the level sets of root `k` through the sample nodes, with
/// `gamma = max` and `gamma0 = max over points of min over planes` of the
/// contact orders.
pub fn convexity_indices(
    s: &SymbolSpec,
    field: &RootField,
    k: usize,
    nodes: &[usize],
    max_points: usize,
    seed: u64,
) -> Result<Option<ContactIndex>> {
    let n = field.grid.dimension();
    if n < 2 {
        return Ok(None);
    }
    let mut candidates: Vec<usize> = nodes
        .iter()
        .copied()
        .filter(|&j| norm(&field.grid.point(j)) > 0.0)
        .collect();
    if n == 2 {
        candidates.sort_by(|&a, &b| {
            let pa = field.grid.point(a);
            let pb = field.grid.point(b);
            pa[1].atan2(pa[0]).total_cmp(&pb[1].atan2(pb[0])).then(a.cmp(&b))
        });
    }
    let points = subsample(&candidates, max_points);
    let per_point: Vec<Option<ContactSample>> = points
        .par_iter()
        .enumerate()
        .map(|(i, &node)| {
            let sigma = field.grid.point(node);
            let seed_tau = field.roots[node][k];
            let Ok(jet) = root_jet(s, &sigma, seed_tau) else {
                return Ok(None);
            };
            let g: Vec<f64> = jet.gradient.iter().map(|z| z.re).collect();
            let gn = norm(&g);
            if gn < 1e-8 * (1.0 + jet.tau.norm()) {
                return Ok(None);
            }
            let normal: Vec<f64> = g.iter().map(|x| x / gn).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let scale = norm(&sigma);
            let mut orders = Vec::new();
            let mut convex = true;
            let mut orientation = 0i8;
            for t in tangent_directions(&normal, &mut rng) {
                let curve = level_set_trace(s, jet.tau, &sigma, &t, HALF_WIDTH * scale, CURVE_SAMPLES)?;
                if curve.u.len() < 9 {
                    continue;
                }
                let (order, _) = contact_order(&curve.u, &curve.v, scale)?;
                let sd = side(&curve, COEFF_TOL * scale);
                if sd == 0 || (orientation != 0 && sd != orientation) {
                    convex = false;
                }
                orientation = sd;
                orders.push(order);
            }
            if orders.is_empty() {
                return Ok(None);
            }
            Ok(Some(ContactSample {
                lambda: jet.tau.re,
                sigma,
                orders,
                convex,
                orientation,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let samples: Vec<ContactSample> = per_point.into_iter().flatten().collect();
    if samples.is_empty() {
        return Ok(None);
    }
    let gamma = samples
        .iter()
        .flat_map(|c| c.orders.iter().copied())
        .max()
        .expect("nonempty");
    let gamma0 = samples
        .iter()
        .map(|c| c.orders.iter().copied().min().expect("nonempty"))
        .max()
        .expect("nonempty");
    let convex = samples
        .iter()
        .all(|c| c.convex && c.orientation == samples[0].orientation);
    if s.is_homogeneous() {
        if let ContactOrder::Finite(g) = gamma {
            if convex && g as usize > s.order() {
                return Err(Error::Abstain(format!(
                    "contact order {g} exceeds the bound {} for homogeneous roots",
                    s.order()
                )));
            }
        }
    }
    let planes_per_point = samples.iter().map(|c| c.orders.len()).max().unwrap_or(0);
    Ok(Some(ContactIndex {
        convex,
        gamma,
        gamma0,
        planes_per_point,
        low_confidence: samples.len() < points.len() / 2,
        samples,
    }))
}
