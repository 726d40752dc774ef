use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::axis::{axis_behavior, stability_scan, AxisBehavior, AxisKind, StabilityScan};
use super::geometry::{convexity_indices, ContactIndex};
use super::hessian::{hessian_class, HessianClass};
use super::multiplicity::{detect_multiplicities, MultiplicitySet};
use super::{dist, norm, Region, SEPARATION_TOL};
use crate::error::{Error, Result};
use crate::roots::{track_field, FrequencyGrid, RootField};
use crate::symbols::{StabilityVerdict, SymbolSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisOptions {
    /// Ball around the origin removed from the analysis (data cut-off).
    pub exclusion_radius: f64,
    /// Radius of multiplicity neighbourhoods; `4h` if absent.
    pub multiplicity_radius: Option<f64>,
    /// Radius of axis-contact neighbourhoods; `20h` if absent.
    pub contact_radius: Option<f64>,
    /// The large-frequency zone starts at this multiple of the largest
    /// special point.
    pub large_factor: f64,
    pub sigma_samples: usize,
    pub seed: u64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            exclusion_radius: 0.0,
            multiplicity_radius: None,
            contact_radius: None,
            large_factor: 1.5,
            sigma_samples: 48,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ZoneKind {
    Excluded,
    Multiplicity { set: usize },
    Contact { label: usize },
    Bounded,
    Large,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootClass {
    pub label: usize,
    pub axis: AxisBehavior,
    pub hessian: Option<HessianClass>,
    pub contact: Option<ContactIndex>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub id: usize,
    #[serde(flatten)]
    pub kind: ZoneKind,
    pub node_count: usize,
    /// Runs `[start, end]` of node indices.
    pub ranges: Vec<(usize, usize)>,
    pub radius_range: (f64, f64),
    pub roots: Vec<RootClass>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZoneReport {
    pub dimension: usize,
    pub order: usize,
    pub homogeneous: bool,
    pub grid_step: f64,
    pub necessary: StabilityVerdict,
    /// Over the whole grid.
    pub stability: StabilityScan,
    /// Over the analysed (non-excluded) nodes.
    pub analyzed_stability: StabilityScan,
    pub exclusion_radius: f64,
    pub r_large: f64,
    pub multiplicities: Vec<MultiplicitySet>,
    pub zones: Vec<Zone>,
    /// Per label, the smallest `Im tau` on the outer tenth of radii.
    pub edge_min_im: Vec<f64>,
}

impl ZoneReport {
    pub fn stable(&self) -> bool {
        self.analyzed_stability.stable
    }

    pub fn zone_of(&self, node: usize) -> Option<&Zone> {
        self.zones
            .iter()
            .find(|z| z.ranges.iter().any(|&(a, b)| a <= node && node <= b))
    }
}

fn runs(nodes: &[usize]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for &j in nodes {
        match out.last_mut() {
            Some((_, b)) if *b + 1 == j => *b = j,
            _ => out.push((j, j)),
        }
    }
    out
}

fn min_dist(x: &[f64], pts: &[Vec<f64>]) -> f64 {
    pts.iter().map(|p| dist(x, p)).fold(f64::INFINITY, f64::min)
}

fn classify_root(
    s: &SymbolSpec,
    field: &RootField,
    k: usize,
    region: &Region,
    kind: &ZoneKind,
    opts: &AnalysisOptions,
) -> Result<RootClass> {
    let grid = &field.grid;
    let mut axis = axis_behavior(s, field, k, region)?;
    if *kind == ZoneKind::Large {
        let edge = 0.9 * grid.max_radius();
        let near_axis_at_edge = region.nodes.iter().any(|&j| {
            norm(&grid.point(j)) >= edge && field.roots[j][k].im <= SEPARATION_TOL
        });
        let not_on_axis = !matches!(axis.kind, AxisKind::OnAxis);
        if near_axis_at_edge && not_on_axis {
            axis.kind = AxisKind::Unclassified {
                reason: "asymptotic: root approaches the real axis as |xi| grows".into(),
            };
        }
    }
    let (hessian, contact) = match (&axis.kind, kind) {
        (AxisKind::OnAxis, ZoneKind::Large | ZoneKind::Bounded | ZoneKind::Contact { .. }) => {
            let h = hessian_class(s, field, k, region)?;
            let band: Vec<usize> = if *kind == ZoneKind::Large {
                let r = grid.max_radius();
                let inner = 0.6 * r;
                let outer = 0.8 * r;
                let band: Vec<usize> = region
                    .nodes
                    .iter()
                    .copied()
                    .filter(|&j| (inner..=outer).contains(&norm(&grid.point(j))))
                    .collect();
                if band.is_empty() {
                    region.nodes.to_vec()
                } else {
                    band
                }
            } else {
                region.nodes.to_vec()
            };
            let c = convexity_indices(s, field, k, &band, opts.sigma_samples, opts.seed)?;
            (Some(h), c)
        }
        _ => (None, None),
    };
    Ok(RootClass {
        label: k,
        axis,
        hessian,
        contact,
    })
}

/// Partitions the grid into excluded, multiplicity, contact, bounded and
/// large-frequency zones and classifies every root on each.
pub fn build_zone_report(
    s: &SymbolSpec,
    field: &RootField,
    opts: &AnalysisOptions,
) -> Result<ZoneReport> {
    let grid = &field.grid;
    let h = grid.step();
    let m = field.order;
    let points = field.points();
    let radii: Vec<f64> = points.iter().map(|p| norm(p)).collect();
    let excl = opts.exclusion_radius;
    let analyzed: Vec<usize> = (0..field.len()).filter(|&j| radii[j] >= excl).collect();

    let multiplicities = detect_multiplicities(field)?;
    let mult_points: Vec<Vec<f64>> = multiplicities
        .iter()
        .flat_map(|m| m.points.iter().cloned())
        .filter(|p| norm(p) >= excl - h)
        .collect();
    let base_mult_radius = opts.multiplicity_radius.unwrap_or(4.0 * h);
    // Coincidence points each root has to stay clear of.
    let avoid_for = |k: usize| -> Vec<Vec<f64>> {
        multiplicities
            .iter()
            .filter(|m| m.labels.contains(&k))
            .flat_map(|m| m.points.iter().cloned())
            .filter(|p| norm(p) >= excl - h)
            .collect()
    };

    // Global axis contacts, away from the root's own multiplicities.
    let global_axis: Vec<AxisBehavior> = (0..m)
        .into_par_iter()
        .map(|k| {
            let avoid = avoid_for(k);
            let free: Vec<usize> = analyzed
                .iter()
                .copied()
                .filter(|&j| min_dist(&points[j], &avoid) >= base_mult_radius)
                .collect();
            let region = Region {
                exclusion_radius: excl,
                avoid,
                ..Region::new(&free)
            };
            axis_behavior(s, field, k, &region)
        })
        .collect::<Result<_>>()?;
    let contacts: Vec<(usize, Vec<Vec<f64>>)> = global_axis
        .iter()
        .filter_map(|ab| match &ab.kind {
            AxisKind::MeetsFiniteOrder { contact, .. } => Some((
                ab.label,
                contact.points.iter().map(|c| c.point.clone()).collect(),
            )),
            _ => None,
        })
        .collect();
    let gap_to_mult = |pts: &[Vec<f64>]| -> f64 {
        pts.iter()
            .map(|p| min_dist(p, &mult_points))
            .filter(|&d| d > h)
            .fold(f64::INFINITY, f64::min)
    };
    let mult_radius = contacts
        .iter()
        .map(|(_, p)| gap_to_mult(p) / 3.0)
        .fold(base_mult_radius, f64::min)
        .max(1.5 * h);
    let contact_radius = |pts: &[Vec<f64>]| -> f64 {
        let base = opts.contact_radius.unwrap_or(20.0 * h);
        base.min(0.5 * gap_to_mult(pts)).max(mult_radius)
    };
    let contact_radii: Vec<f64> = contacts.iter().map(|(_, p)| contact_radius(p)).collect();

    let special = mult_points
        .iter()
        .chain(contacts.iter().flat_map(|(_, p)| p.iter()))
        .map(|p| norm(p))
        .fold(0.0, f64::max);
    let r_large = opts.large_factor * special;

    // Zone assignment by priority.
    let mut zone_kinds: Vec<ZoneKind> = vec![ZoneKind::Excluded];
    zone_kinds.extend((0..multiplicities.len()).map(|set| ZoneKind::Multiplicity { set }));
    zone_kinds.extend(contacts.iter().map(|(label, _)| ZoneKind::Contact { label: *label }));
    zone_kinds.push(ZoneKind::Bounded);
    zone_kinds.push(ZoneKind::Large);
    let bounded_id = zone_kinds.len() - 2;
    let large_id = zone_kinds.len() - 1;
    let assignment: Vec<usize> = (0..field.len())
        .into_par_iter()
        .map(|j| {
            let x = &points[j];
            if radii[j] < excl {
                return 0;
            }
            for (i, set) in multiplicities.iter().enumerate() {
                if min_dist(x, &set.points) < mult_radius {
                    return 1 + i;
                }
            }
            for (i, (_, pts)) in contacts.iter().enumerate() {
                if min_dist(x, pts) < contact_radii[i] {
                    return 1 + multiplicities.len() + i;
                }
            }
            if radii[j] < r_large {
                bounded_id
            } else {
                large_id
            }
        })
        .collect();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); zone_kinds.len()];
    for (j, &z) in assignment.iter().enumerate() {
        members[z].push(j);
    }
    let covered: usize = members.iter().map(Vec::len).sum();
    if covered != field.len() {
        return Err(Error::UncoveredCells(field.len() - covered));
    }

    let mut zones = Vec::new();
    for (kind, nodes) in zone_kinds.into_iter().zip(members) {
        if nodes.is_empty() {
            continue;
        }
        let roots = if kind == ZoneKind::Excluded {
            Vec::new()
        } else {
            let max_fit = match kind {
                ZoneKind::Contact { label } => contacts
                    .iter()
                    .position(|(l, _)| *l == label)
                    .map_or(f64::INFINITY, |i| contact_radii[i]),
                _ => f64::INFINITY,
            };
            (0..m)
                .into_par_iter()
                .map(|k| {
                    let region = Region {
                        exclusion_radius: excl,
                        avoid: avoid_for(k),
                        max_fit_distance: max_fit,
                        ..Region::new(&nodes)
                    };
                    classify_root(s, field, k, &region, &kind, opts)
                })
                .collect::<Result<Vec<_>>>()?
        };
        let (rlo, rhi) = nodes.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &j| {
            (a.min(radii[j]), b.max(radii[j]))
        });
        zones.push(Zone {
            id: zones.len(),
            kind,
            node_count: nodes.len(),
            ranges: runs(&nodes),
            radius_range: (rlo, rhi),
            roots,
        });
    }

    let rmax = grid.max_radius();
    let edge: Vec<usize> = analyzed
        .iter()
        .copied()
        .filter(|&j| radii[j] >= 0.9 * rmax)
        .collect();
    let edge_min_im = (0..m)
        .map(|k| {
            edge.iter()
                .map(|&j| field.roots[j][k].im)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();

    Ok(ZoneReport {
        dimension: grid.dimension(),
        order: m,
        homogeneous: s.is_homogeneous(),
        grid_step: h,
        necessary: s.necessary_stability_check(),
        stability: stability_scan(field, None),
        analyzed_stability: stability_scan(field, Some(&analyzed)),
        exclusion_radius: excl,
        r_large,
        multiplicities,
        zones,
        edge_min_im,
    })
}

/// Tracks the roots over `grid` and builds the zone report.
pub fn analyze(
    s: &SymbolSpec,
    grid: &FrequencyGrid,
    opts: &AnalysisOptions,
) -> Result<(RootField, ZoneReport)> {
    let field = track_field(s, grid)?;
    let report = build_zone_report(s, &field, opts)?;
    Ok((field, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::HessianKind;
    use crate::roots::Axis;
    use crate::symbols::corpus;

    fn kinds(r: &ZoneReport) -> Vec<ZoneKind> {
        r.zones.iter().map(|z| z.kind.clone()).collect()
    }

    #[test]
    fn dissipative_1d_zones() {
        let s = corpus::dissipative_wave(1, 1.0);
        let g = FrequencyGrid::cube(1, 4.0, 1601).unwrap();
        let (_, r) = analyze(&s, &g, &AnalysisOptions::default()).unwrap();
        assert!(r.stable());
        assert_eq!(
            kinds(&r),
            vec![
                ZoneKind::Multiplicity { set: 0 },
                ZoneKind::Contact { label: r.zones[1].roots.iter().find(|c| matches!(c.axis.kind, AxisKind::MeetsFiniteOrder { .. })).unwrap().label },
                ZoneKind::Bounded,
                ZoneKind::Large
            ]
        );
        assert!((r.r_large - 0.75).abs() < 1e-6);
        assert_eq!(r.multiplicities[0].multiplicity, 2);
        let contact = &r.zones[1];
        let lower = contact
            .roots
            .iter()
            .find_map(|c| match &c.axis.kind {
                AxisKind::MeetsFiniteOrder { s, s1, contact, .. } => Some((*s, *s1, contact.at_origin)),
                _ => None,
            })
            .unwrap();
        assert_eq!(lower, (2, Some(2), true));
        for c in &r.zones[3].roots {
            match c.axis.kind {
                AxisKind::Separated { delta } => assert!((delta - 0.5).abs() < 0.05),
                ref other => panic!("{other:?}"),
            }
        }
        let n: usize = r.zones.iter().map(|z| z.node_count).sum();
        assert_eq!(n, g.len());
    }

    #[test]
    fn wave_2d_zones() {
        let s = corpus::wave(2);
        let g = FrequencyGrid::cube(2, 2.0, 41).unwrap();
        let (_, r) = analyze(&s, &g, &AnalysisOptions::default()).unwrap();
        assert_eq!(kinds(&r), vec![ZoneKind::Multiplicity { set: 0 }, ZoneKind::Large]);
        assert_eq!(r.multiplicities[0].codimension, 2);
        assert!(r.multiplicities[0].contains_axis);
        for c in &r.zones[1].roots {
            assert_eq!(c.axis.kind, AxisKind::OnAxis);
            assert_eq!(c.hessian.as_ref().unwrap().kind, HessianKind::RankDeficient { rank: 1 });
            let ci = c.contact.as_ref().unwrap();
            assert!(ci.convex);
            assert_eq!(ci.gamma, crate::classify::ContactOrder::Finite(2));
        }
    }

    #[test]
    fn klein_gordon_single_zone() {
        let s = corpus::klein_gordon(1, 1.0);
        let g = FrequencyGrid::cube(1, 64.0, 2001).unwrap();
        let (_, r) = analyze(&s, &g, &AnalysisOptions::default()).unwrap();
        assert_eq!(kinds(&r), vec![ZoneKind::Large]);
        for c in &r.zones[0].roots {
            assert_eq!(c.axis.kind, AxisKind::OnAxis);
            match c.hessian.as_ref().unwrap().kind {
                HessianKind::NonDegenerate { m_exponent: Some(m) } => assert!((m - 3.0).abs() < 0.3),
                ref other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn negative_mass_with_exclusion() {
        let s = corpus::negative_mass_wave(1.0, 1.0, -1.0);
        let g = FrequencyGrid::cartesian(vec![Axis::new(-4.0, 4.0, 1601).unwrap()]).unwrap();
        let opts = AnalysisOptions {
            exclusion_radius: 1.0,
            ..Default::default()
        };
        let (_, r) = analyze(&s, &g, &opts).unwrap();
        assert!(!r.stability.stable);
        assert!(r.stable());
        let contact = r
            .zones
            .iter()
            .find(|z| matches!(z.kind, ZoneKind::Contact { .. }))
            .unwrap();
        let s_order = contact
            .roots
            .iter()
            .find_map(|c| match &c.axis.kind {
                AxisKind::MeetsFiniteOrder { s, .. } => Some(*s),
                _ => None,
            })
            .unwrap();
        assert_eq!(s_order, 1);
        assert_eq!(r.multiplicities.len(), 1);
        assert!((super::norm(&r.multiplicities[0].points[0]) - 5f64.sqrt() / 2.0).abs() < 1e-6);
    }
}
