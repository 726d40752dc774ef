use std::cmp::Ordering;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::exponent::{format_ratio, ratio_str, rat, Exponent, Kappa, LebesguePair};
use crate::classify::{
    AxisKind, ContactOrder, HessianKind, MultiplicitySet, RootClass, Zone, ZoneKind, ZoneReport,
};
use crate::error::{Error, Result};

/// Radial derivatives below this fail the regularity required by the
/// starred on-axis rows.
pub const REGULARITY_TOL: f64 = 1e-6;

/// Rows of the two decay tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableRow {
    LargeAwayFromAxis,
    LargeNonDegenerate,
    LargeRankDeficient,
    LargeConvex,
    LargeNonConvex,
    BoundedAwayFromAxis,
    BoundedCoinciding,
    BoundedNonDegenerate,
    BoundedConvex,
    BoundedNonConvex,
    OnAxisMultiplicity,
    FiniteOrder,
}

impl TableRow {
    pub const ALL: [TableRow; 12] = [
        TableRow::LargeAwayFromAxis,
        TableRow::LargeNonDegenerate,
        TableRow::LargeRankDeficient,
        TableRow::LargeConvex,
        TableRow::LargeNonConvex,
        TableRow::BoundedAwayFromAxis,
        TableRow::BoundedCoinciding,
        TableRow::BoundedNonDegenerate,
        TableRow::BoundedConvex,
        TableRow::BoundedNonConvex,
        TableRow::OnAxisMultiplicity,
        TableRow::FiniteOrder,
    ];

    pub fn large_frequency(&self) -> bool {
        matches!(
            self,
            TableRow::LargeAwayFromAxis
                | TableRow::LargeNonDegenerate
                | TableRow::LargeRankDeficient
                | TableRow::LargeConvex
                | TableRow::LargeNonConvex
        )
    }

    pub fn formula(&self) -> &'static str {
        match self {
            TableRow::LargeAwayFromAxis | TableRow::BoundedAwayFromAxis => "e^{-delta t}",
            TableRow::LargeNonDegenerate | TableRow::BoundedNonDegenerate => {
                "<t>^{-(n/2)(1/p-1/q)}"
            }
            TableRow::LargeRankDeficient => "<t>^{-((n-1)/2)(1/p-1/q)}",
            TableRow::LargeConvex | TableRow::BoundedConvex => "<t>^{-((n-1)/gamma)(1/p-1/q)}",
            TableRow::LargeNonConvex | TableRow::BoundedNonConvex => {
                "<t>^{-(1/gamma0)(1/p-1/q)}"
            }
            TableRow::BoundedCoinciding => "<t>^L e^{-delta t}",
            TableRow::OnAxisMultiplicity => "<t>^{L-1-l}",
            TableRow::FiniteOrder => "<t>^{L-1-(l/s)(1/p-1/q)}",
        }
    }
}

/// Gains in the polynomial rate per derivative.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivativeGain {
    /// Extra decay per time derivative, `s1/s`.
    #[serde(with = "opt_ratio")]
    pub per_time_derivative: Option<Exponent>,
    /// Extra decay per space derivative, `1/s`, when the axis is met only at
    /// the origin.
    #[serde(with = "opt_ratio")]
    pub per_space_derivative: Option<Exponent>,
}

mod opt_ratio {
    use super::super::exponent::{format_ratio, parse_ratio, Exponent};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Exponent>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_some(&format_ratio(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Exponent>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| parse_ratio(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

impl DerivativeGain {
    pub fn total(&self, r: u32, alpha: u32) -> Exponent {
        let t = self.per_time_derivative.unwrap_or_default() * r as i64;
        let a = self.per_space_derivative.unwrap_or_default() * alpha as i64;
        t + a
    }

    pub fn is_empty(&self) -> bool {
        self.per_time_derivative.is_none() && self.per_space_derivative.is_none()
    }
}

/// `K(t) = <t>^(rho + lambda) e^(-delta t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KFactor {
    #[serde(with = "ratio_str")]
    pub rho: Exponent,
    pub lambda: i64,
    pub delta: f64,
    pub row: TableRow,
    pub zone: Option<usize>,
    pub label: Option<usize>,
    /// Valid only as an `L^1 -> L^inf` rate in a shrinking neighbourhood.
    pub shrinking: bool,
    pub gain: DerivativeGain,
}

impl KFactor {
    pub fn polynomial(rho: Exponent, lambda: i64, row: TableRow) -> Self {
        Self {
            rho,
            lambda,
            delta: 0.0,
            row,
            zone: None,
            label: None,
            shrinking: false,
            gain: DerivativeGain::default(),
        }
    }

    pub fn exponential(delta: f64, lambda: i64, row: TableRow) -> Self {
        Self {
            delta,
            ..Self::polynomial(Exponent::zero(), lambda, row)
        }
    }

    fn at(mut self, zone: usize, label: Option<usize>) -> Self {
        self.zone = Some(zone);
        self.label = label;
        self
    }

    pub fn kappa(&self) -> Kappa {
        if self.delta > 0.0 {
            Kappa::Infinite
        } else {
            Kappa::Finite(-(self.rho + self.lambda))
        }
    }

    /// Total order in which `Greater` decays more slowly.
    pub fn slowness(&self, other: &Self) -> Ordering {
        other
            .delta
            .total_cmp(&self.delta)
            .then((self.rho + self.lambda).cmp(&(other.rho + other.lambda)))
            .then(self.lambda.cmp(&other.lambda))
            .then(other.row.cmp(&self.row))
            .then(other.zone.cmp(&self.zone))
            .then(other.label.cmp(&self.label))
            .then(self.shrinking.cmp(&other.shrinking))
    }

    /// Applies derivative gains to the polynomial part.
    pub fn with_derivatives(&self, r: u32, alpha: u32) -> Self {
        let mut k = self.clone();
        k.rho -= self.gain.total(r, alpha);
        k
    }

    pub fn describe(&self) -> String {
        let mut s = String::new();
        if self.delta > 0.0 {
            if self.lambda != 0 {
                s.push_str(&format!("<t>^{} ", self.lambda));
            }
            s.push_str(&format!("e^(-{:.4} t)", self.delta));
        } else {
            s.push_str(&format!("<t>^({})", format_ratio(&(self.rho + self.lambda))));
        }
        s
    }
}

/// The slowest of `rows`.
pub fn combine(rows: &[KFactor]) -> Result<KFactor> {
    rows.iter()
        .max_by(|a, b| a.slowness(b))
        .cloned()
        .ok_or_else(|| Error::InvalidArgument("no table rows to combine".into()))
}

fn fastest(rows: Vec<KFactor>) -> Option<KFactor> {
    rows.into_iter().min_by(|a, b| a.slowness(b))
}

fn abstain_kind(rc: &RootClass) -> Option<Error> {
    match &rc.axis.kind {
        AxisKind::Unclassified { reason } => Some(Error::Abstain(format!(
            "root {}: unclassified ({reason})",
            rc.label
        ))),
        _ => None,
    }
}

/// On-axis candidate rows for one root; each is a valid bound, so the
/// fastest is kept.
fn on_axis_rows(rc: &RootClass, n: usize, gap: Exponent, large: bool) -> Vec<KFactor> {
    let n_i = n as i64;
    let mut rows = Vec::new();
    let regular = rc
        .hessian
        .as_ref()
        .and_then(|h| h.min_radial_derivative)
        .is_some_and(|d| d >= REGULARITY_TOL);
    if let Some(h) = &rc.hessian {
        match h.kind {
            HessianKind::NonDegenerate { .. } => rows.push(KFactor::polynomial(
                -rat(n_i, 2) * gap,
                0,
                if large {
                    TableRow::LargeNonDegenerate
                } else {
                    TableRow::BoundedNonDegenerate
                },
            )),
            HessianKind::RankDeficient { rank } if large && rank + 1 == n => rows.push(
                KFactor::polynomial(-rat(n_i - 1, 2) * gap, 0, TableRow::LargeRankDeficient),
            ),
            _ => {}
        }
    }
    if let Some(c) = &rc.contact {
        if large || regular {
            if let (true, ContactOrder::Finite(g)) = (c.convex, c.gamma) {
                rows.push(KFactor::polynomial(
                    -rat(n_i - 1, g as i64) * gap,
                    0,
                    if large {
                        TableRow::LargeConvex
                    } else {
                        TableRow::BoundedConvex
                    },
                ));
            }
            if let ContactOrder::Finite(g0) = c.gamma0 {
                rows.push(KFactor::polynomial(
                    -rat(1, g0 as i64) * gap,
                    0,
                    if large {
                        TableRow::LargeNonConvex
                    } else {
                        TableRow::BoundedNonConvex
                    },
                ));
            }
        }
    }
    rows
}

/// Row of the large-frequency table for one root.
pub fn row_large_freq(rc: &RootClass, n: usize, pair: &LebesguePair) -> Result<KFactor> {
    if let Some(e) = abstain_kind(rc) {
        return Err(e);
    }
    match &rc.axis.kind {
        AxisKind::Separated { delta } => {
            Ok(KFactor::exponential(*delta, 0, TableRow::LargeAwayFromAxis))
        }
        AxisKind::OnAxis => fastest(on_axis_rows(rc, n, pair.gap(), true)).ok_or_else(|| {
            Error::Abstain(format!(
                "root {}: on the axis at large frequencies with no Hessian or contact row",
                rc.label
            ))
        }),
        AxisKind::MeetsFiniteOrder { .. } => Err(Error::Abstain(format!(
            "root {}: meets the axis at large frequencies",
            rc.label
        ))),
        AxisKind::Unclassified { .. } => unreachable!("handled above"),
    }
}

fn finite_order_row(
    rc: &RootClass,
    multiplicity: usize,
    codimension: u32,
    gap: Exponent,
) -> Option<KFactor> {
    let AxisKind::MeetsFiniteOrder {
        s, s1, contact, ..
    } = &rc.axis.kind
    else {
        return None;
    };
    let s = *s as i64;
    let mut k = KFactor::polynomial(
        -rat(codimension as i64, s) * gap,
        multiplicity as i64 - 1,
        TableRow::FiniteOrder,
    );
    k.gain = DerivativeGain {
        per_time_derivative: s1.map(|s1| rat(s1 as i64, s)),
        per_space_derivative: contact.at_origin.then(|| rat(1, s)),
    };
    Some(k)
}

/// Rows of the bounded-frequency table for one root outside multiplicity
/// neighbourhoods.
pub fn row_bounded_freq(rc: &RootClass, n: usize, pair: &LebesguePair) -> Result<KFactor> {
    if let Some(e) = abstain_kind(rc) {
        return Err(e);
    }
    match &rc.axis.kind {
        AxisKind::Separated { delta } => {
            Ok(KFactor::exponential(*delta, 0, TableRow::BoundedAwayFromAxis))
        }
        AxisKind::OnAxis => fastest(on_axis_rows(rc, n, pair.gap(), false)).ok_or_else(|| {
            Error::Abstain(format!(
                "root {}: on the axis at bounded frequencies without a regular row",
                rc.label
            ))
        }),
        AxisKind::MeetsFiniteOrder { contact, .. } => {
            Ok(finite_order_row(rc, 1, contact.codimension, pair.gap()).expect("finite order"))
        }
        AxisKind::Unclassified { .. } => unreachable!("handled above"),
    }
}

/// Rows for a multiplicity neighbourhood: one row for the coinciding group
/// and one per remaining root.
pub fn row_multiplicity(
    zone: &Zone,
    set: &MultiplicitySet,
    n: usize,
    pair: &LebesguePair,
) -> Result<Vec<KFactor>> {
    let gap = pair.gap();
    let l = set.multiplicity as i64;
    let mut rows = Vec::new();
    let group: Vec<&RootClass> = zone
        .roots
        .iter()
        .filter(|rc| set.labels.contains(&rc.label))
        .collect();
    let meeting: Vec<&&RootClass> = group
        .iter()
        .filter(|rc| matches!(rc.axis.kind, AxisKind::MeetsFiniteOrder { .. }))
        .collect();
    if let Some(rc) = meeting.first() {
        let k = finite_order_row(rc, set.multiplicity, set.codimension, gap).expect("finite order");
        rows.push(k.at(zone.id, Some(rc.label)));
    } else if set.contains_axis {
        let mut k = KFactor::polynomial(-Exponent::from_integer(set.codimension as i64) * gap, l - 1, TableRow::OnAxisMultiplicity);
        k.shrinking = !gap.is_zero();
        rows.push(k.at(zone.id, None));
    } else {
        let mut delta = f64::INFINITY;
        for rc in &group {
            if let Some(e) = abstain_kind(rc) {
                return Err(e);
            }
            match rc.axis.kind {
                AxisKind::Separated { delta: d } => delta = delta.min(d),
                _ => {
                    return Err(Error::Abstain(format!(
                        "root {}: off-axis multiplicity with a root near the axis",
                        rc.label
                    )))
                }
            }
        }
        rows.push(KFactor::exponential(delta, l, TableRow::BoundedCoinciding).at(zone.id, None));
    }
    for rc in zone.roots.iter().filter(|rc| !set.labels.contains(&rc.label)) {
        rows.push(row_bounded_freq(rc, n, pair)?.at(zone.id, Some(rc.label)));
    }
    Ok(rows)
}

/// Every table row contributed by the report at `pair`.
pub fn table_rows(report: &ZoneReport, pair: &LebesguePair) -> Result<Vec<KFactor>> {
    if !report.stable() {
        return Err(Error::Abstain(format!(
            "stability fails (min Im tau = {:.3e} at {:?}); no decay expected",
            report.analyzed_stability.min_im, report.analyzed_stability.argmin
        )));
    }
    let n = report.dimension;
    let mut rows = Vec::new();
    for zone in &report.zones {
        match &zone.kind {
            ZoneKind::Excluded => {}
            ZoneKind::Large => {
                for rc in &zone.roots {
                    rows.push(row_large_freq(rc, n, pair)?.at(zone.id, Some(rc.label)));
                }
            }
            ZoneKind::Bounded | ZoneKind::Contact { .. } => {
                for rc in &zone.roots {
                    rows.push(row_bounded_freq(rc, n, pair)?.at(zone.id, Some(rc.label)));
                }
            }
            ZoneKind::Multiplicity { set } => {
                rows.extend(row_multiplicity(zone, &report.multiplicities[*set], n, pair)?);
            }
        }
    }
    Ok(rows)
}
