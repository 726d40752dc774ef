//! Decay envelopes `K(t)` and rates `kappa_{p,q}` from zone reports.

pub mod exponent;
pub mod strichartz;
pub mod table;

use serde::{Deserialize, Serialize};

pub use exponent::{format_ratio, parse_ratio, rat, Exponent, Kappa, LebesguePair};
pub use strichartz::{strichartz_pair, StrichartzExponents};
pub use table::{
    combine, row_bounded_freq, row_large_freq, row_multiplicity, table_rows, DerivativeGain,
    KFactor, TableRow,
};

use crate::classify::{AxisKind, ZoneKind, ZoneReport, SEPARATION_TOL};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayPrediction {
    pub pair: LebesguePair,
    /// Time derivative order.
    pub r: u32,
    /// Space derivative order `|alpha|`.
    pub alpha: u32,
    /// Slowest row, after derivative gains.
    pub k: KFactor,
    pub kappa: Kappa,
    /// All rows entering the maximum.
    pub rows: Vec<KFactor>,
    /// Shrinking-region rows, reported but kept out of `k`.
    pub qualified: Vec<KFactor>,
    /// Derivative gains of the binding row.
    pub gain: DerivativeGain,
    pub sobolev: String,
    pub strichartz: Option<StrichartzExponents>,
}

/// `K(t)` and `kappa` for `pair` with `r` time and `alpha` space derivatives.
pub fn predict(report: &ZoneReport, pair: LebesguePair, r: u32, alpha: u32) -> Result<DecayPrediction> {
    let rows = table_rows(report, &pair)?;
    let (qualified, main): (Vec<KFactor>, Vec<KFactor>) = rows
        .iter()
        .map(|k| k.with_derivatives(r, alpha))
        .partition(|k| k.shrinking);
    let k = combine(&main)?;
    let kappa = k.kappa();
    let strichartz = pair.is_dual().then(|| strichartz_pair(pair, kappa));
    Ok(DecayPrediction {
        pair,
        r,
        alpha,
        gain: k.gain,
        kappa,
        sobolev: format!(
            "N_p >= {}(1/p - 1/q) + |alpha| + r, with N_p - l derivatives on f_l",
            report.dimension
        ),
        k,
        rows: main,
        qualified,
        strichartz,
    })
}

/// `kappa_{2,2} (2/p') + kappa_{1,inf} (1/p - 1/p')` for a dual pair.
pub fn interpolated_kappa(k22: Kappa, k1inf: Kappa, pair: &LebesguePair) -> Option<Kappa> {
    if !pair.is_dual() {
        return None;
    }
    match (k22, k1inf) {
        (Kappa::Finite(a), Kappa::Finite(b)) => {
            Some(Kappa::Finite(a * (pair.inv_q * 2) + b * pair.gap()))
        }
        _ => Some(Kappa::Infinite),
    }
}

/// Two-term envelope `<t>^{-n/2} + e^{-epsilon t}` of a strongly stable symbol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrongStability {
    #[serde(with = "exponent::ratio_str")]
    pub polynomial_rate: Exponent,
    pub epsilon: f64,
    pub contact_label: usize,
    pub envelope: String,
}

/// Certifies strong stability from the report: stable, a single root meets
/// the axis and only at the origin with `tau = 0` there, and every root stays
/// away from the axis at the grid edge.
pub fn fp_prediction(report: &ZoneReport) -> Result<StrongStability> {
    let fail = |clause: &str| Err(Error::Abstain(format!("not strongly stable: {clause}")));
    if !report.stable() {
        return fail("stability fails");
    }
    let mut label = None;
    for zone in &report.zones {
        if zone.kind == ZoneKind::Excluded {
            return fail("part of the frequency space is excluded");
        }
        for rc in &zone.roots {
            match &rc.axis.kind {
                AxisKind::OnAxis => return fail("a root lies on the real axis"),
                AxisKind::Unclassified { reason } => return fail(reason),
                AxisKind::MeetsFiniteOrder { contact, s1, .. } => {
                    if !contact.at_origin || s1.is_none() {
                        return fail("a root meets the axis away from the origin or with tau != 0");
                    }
                    if label.is_some_and(|l| l != rc.label) {
                        return fail("more than one root meets the axis");
                    }
                    label = Some(rc.label);
                }
                AxisKind::Separated { .. } => {}
            }
        }
    }
    if report.multiplicities.iter().any(|m| m.contains_axis) {
        return fail("roots coincide on the axis");
    }
    let Some(label) = label else {
        return fail("no root meets the axis at the origin");
    };
    let epsilon = report.edge_min_im.iter().copied().fold(f64::INFINITY, f64::min);
    if !(epsilon > SEPARATION_TOL) {
        return fail("liminf Im tau vanishes at the grid edge");
    }
    let polynomial_rate = -rat(report.dimension as i64, 2);
    Ok(StrongStability {
        envelope: format!(
            "<t>^({}) + e^(-{epsilon:.4} t)",
            format_ratio(&polynomial_rate)
        ),
        polynomial_rate,
        epsilon,
        contact_label: label,
    })
}
