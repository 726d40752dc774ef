use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::axis::linear_fit;
use super::dist;
use crate::error::{Error, Result};
use crate::roots::{FrequencyGrid, GridKind, RootField};

/// Number of geometric scales in a codimension fit.
const SCALES: usize = 8;
const MIN_SCALES: usize = 4;
/// Lattice size cap per axis for tube measures.
const MAX_LATTICE_PER_AXIS: usize = 400;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodimensionFit {
    pub codimension: u32,
    pub slope: f64,
    pub rms: f64,
    pub epsilons: Vec<f64>,
    pub measures: Vec<f64>,
}

/// Frequencies where a fixed group of roots coincide.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplicitySet {
    pub labels: Vec<usize>,
    /// Number of coinciding roots.
    pub multiplicity: usize,
    pub nodes: Vec<usize>,
    /// Refined coincidence points, one per node.
    pub points: Vec<Vec<f64>>,
    pub components: usize,
    pub codimension: u32,
    pub fit: Option<CodimensionFit>,
    /// The common root is real on the set.
    pub contains_axis: bool,
    /// Common root value at the first point.
    pub tau: Complex64,
}

/// Slope of `log meas(M^eps)` against `log eps` for `eps` in `[2h, 20h]`,
/// with the tube measure counted on a lattice of spacing `h/2`.
pub fn estimate_codimension(points: &[Vec<f64>], grid: &FrequencyGrid) -> Result<CodimensionFit> {
    let n = grid.dimension();
    if points.is_empty() {
        return Err(Error::InvalidArgument("empty set has no codimension".into()));
    }
    let h = grid.step();
    let eps: Vec<f64> = (0..SCALES)
        .map(|i| 2.0 * h * 10f64.powf(i as f64 / (SCALES - 1) as f64))
        .collect();
    let reach = eps[SCALES - 1] + h;
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for p in points {
        for i in 0..n {
            lo[i] = lo[i].min(p[i] - reach);
            hi[i] = hi[i].max(p[i] + reach);
        }
    }
    let spacing: Vec<f64> = (0..n)
        .map(|i| (0.5 * h).max((hi[i] - lo[i]) / MAX_LATTICE_PER_AXIS as f64))
        .collect();
    let counts: Vec<usize> = (0..n)
        .map(|i| ((hi[i] - lo[i]) / spacing[i]).ceil() as usize + 1)
        .collect();
    let total: usize = counts.iter().product();
    let cell: f64 = spacing.iter().product();
    let nearest: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut rest = idx;
            let mut x = vec![0.0; n];
            for i in (0..n).rev() {
                x[i] = lo[i] + spacing[i] * (rest % counts[i]) as f64;
                rest /= counts[i];
            }
            points
                .iter()
                .map(|p| dist(&x, p))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let measures: Vec<f64> = eps
        .iter()
        .map(|&e| nearest.iter().filter(|&&d| d <= e).count() as f64 * cell)
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = eps
        .iter()
        .zip(&measures)
        .filter(|(_, &m)| m > 0.0)
        .map(|(e, m)| (e.ln(), m.ln()))
        .unzip();
    if xs.len() < MIN_SCALES {
        return Err(Error::TooFewScales { found: xs.len() });
    }
    let (_, slope, rms) = linear_fit(&xs, &ys).ok_or(Error::TooFewScales { found: xs.len() })?;
    let codimension = slope.round().clamp(1.0, n as f64) as u32;
    Ok(CodimensionFit {
        codimension,
        slope,
        rms,
        epsilons: eps,
        measures,
    })
}

fn chebyshev_adjacent(grid: &FrequencyGrid, a: &[usize], b: &[usize]) -> bool {
    let shape = grid.shape();
    a.iter().zip(b).enumerate().all(|(axis, (&x, &y))| {
        let d = x.abs_diff(y);
        let periodic = matches!(grid.kind(), GridKind::Polar { .. }) && axis == 1;
        d <= 1 || (periodic && d == shape[axis] - 1)
    })
}

/// Flagged nodes grouped by the set of coinciding labels.
pub fn detect_multiplicities(field: &RootField) -> Result<Vec<MultiplicitySet>> {
    let grid = &field.grid;
    let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (node, c) in field.coincidences.iter().enumerate() {
        if let Some(c) = c {
            let mut labels = c.labels.clone();
            labels.sort_unstable();
            groups.entry(labels).or_default().push(node);
        }
    }
    let mut out = Vec::with_capacity(groups.len());
    for (labels, nodes) in groups {
        let idx: Vec<Vec<usize>> = nodes.iter().map(|&j| grid.multi_index(j)).collect();
        let mut component = vec![usize::MAX; nodes.len()];
        let mut components = 0;
        for start in 0..nodes.len() {
            if component[start] != usize::MAX {
                continue;
            }
            component[start] = components;
            let mut stack = vec![start];
            while let Some(a) = stack.pop() {
                for b in 0..nodes.len() {
                    if component[b] == usize::MAX && chebyshev_adjacent(grid, &idx[a], &idx[b]) {
                        component[b] = components;
                        stack.push(b);
                    }
                }
            }
            components += 1;
        }
        let coincidences: Vec<_> = nodes
            .iter()
            .map(|&j| field.coincidences[j].as_ref().expect("flagged"))
            .collect();
        let points: Vec<Vec<f64>> = coincidences.iter().map(|c| c.point.clone()).collect();
        let contains_axis = coincidences
            .iter()
            .all(|c| c.tau.im.abs() <= 1e-6 * (1.0 + c.tau.norm()));
        let n = grid.dimension() as u32;
        let distinct = {
            let h = grid.step();
            let mut reps: Vec<&Vec<f64>> = Vec::new();
            for p in &points {
                if !reps.iter().any(|q| dist(p, q) < 3.0 * h) {
                    reps.push(p);
                }
            }
            reps.len()
        };
        let (codimension, fit) = if distinct == components && nodes.len() <= components * 3usize.pow(n) {
            // Isolated points.
            (n, None)
        } else {
            let fit = estimate_codimension(&points, grid)?;
            (fit.codimension, Some(fit))
        };
        out.push(MultiplicitySet {
            multiplicity: labels.len(),
            labels,
            tau: coincidences[0].tau,
            nodes,
            points,
            components,
            codimension,
            fit,
            contains_axis,
        });
    }
    Ok(out)
}
