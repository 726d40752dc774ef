use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::axis::linear_fit;
use super::{norm, subsample, Region};
use crate::error::Result;
use crate::roots::{root_jet, RootField, RootJet};
use crate::symbols::SymbolSpec;

/// Singular values below this fraction of the largest count as zero.
const RANK_TOL: f64 = 1e-6;
const MAX_SAMPLES: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HessianKind {
    /// `|det Hess| >= C (1 + |xi|)^-M` with fitted `M` (absent when the
    /// region is too narrow to fit it).
    NonDegenerate { m_exponent: Option<f64> },
    RankDeficient { rank: usize },
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HessianClass {
    #[serde(flatten)]
    pub kind: HessianKind,
    pub samples: usize,
    pub min_rank: usize,
    pub max_rank: usize,
    pub min_abs_det: f64,
    /// Smallest `|d tau / d r|` along rays over the samples away from the origin.
    pub min_radial_derivative: Option<f64>,
}

pub(crate) fn sample_jets(
    s: &SymbolSpec,
    field: &RootField,
    k: usize,
    nodes: &[usize],
    max: usize,
) -> Result<Vec<(Vec<f64>, RootJet)>> {
    subsample(nodes, max)
        .par_iter()
        .map(|&node| {
            let xi = field.grid.point(node);
            let jet = root_jet(s, &xi, field.roots[node][k])?;
            Ok((xi, jet))
        })
        .collect()
}

fn rank(jet: &RootJet) -> usize {
    let sv = jet.hessian.clone().svd(false, false).singular_values;
    let top = sv.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&v| v > RANK_TOL * top).count()
}

/// Hessian class of root `k` over `region`.
pub fn hessian_class(
    s: &SymbolSpec,
    field: &RootField,
    k: usize,
    region: &Region,
) -> Result<HessianClass> {
    let n = field.grid.dimension();
    let jets = sample_jets(s, field, k, region.nodes, MAX_SAMPLES)?;
    let ranks: Vec<usize> = jets.iter().map(|(_, j)| rank(j)).collect();
    let dets: Vec<f64> = jets.iter().map(|(_, j)| j.hessian.determinant().norm()).collect();
    let min_rank = ranks.iter().copied().min().unwrap_or(0);
    let max_rank = ranks.iter().copied().max().unwrap_or(0);
    let min_abs_det = dets.iter().copied().fold(f64::INFINITY, f64::min);
    let radial: Vec<f64> = jets
        .iter()
        .filter(|(xi, _)| norm(xi) > 1e-12)
        .map(|(xi, j)| {
            let r = norm(xi);
            xi.iter()
                .zip(j.gradient.iter())
                .map(|(x, g)| g * (x / r))
                .sum::<num_complex::Complex64>()
                .norm()
        })
        .collect();
    let min_radial_derivative = radial.iter().copied().reduce(f64::min);

    let kind = if jets.is_empty() {
        HessianKind::Degenerate
    } else if min_rank == n {
        let rmax = jets.iter().map(|(x, _)| norm(x)).fold(0.0, f64::max);
        let (xs, ys): (Vec<f64>, Vec<f64>) = jets
            .iter()
            .zip(&dets)
            .filter(|((x, _), _)| norm(x) >= 0.5 * rmax)
            .map(|((x, _), d)| ((1.0 + norm(x).powi(2)).sqrt().ln(), d.ln()))
            .unzip();
        let span = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - xs.iter().copied().fold(f64::INFINITY, f64::min);
        let m_exponent = if xs.len() >= 3 && span > 0.4 {
            linear_fit(&xs, &ys).map(|(_, b, _)| -b)
        } else {
            None
        };
        HessianKind::NonDegenerate { m_exponent }
    } else if min_rank == max_rank {
        HessianKind::RankDeficient { rank: min_rank }
    } else {
        HessianKind::Degenerate
    };
    Ok(HessianClass {
        kind,
        samples: jets.len(),
        min_rank,
        max_rank,
        min_abs_det,
        min_radial_derivative,
    })
}
