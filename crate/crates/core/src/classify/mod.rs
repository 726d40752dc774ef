//! Geometric facts about characteristic roots: axis behaviour, multiplicity
//! sets, Hessian class and convexity indices, assembled into zone reports.

pub mod axis;
pub mod geometry;
pub mod hessian;
pub mod multiplicity;
pub mod zones;

pub use axis::{
    axis_behavior, find_contacts, stability_scan, AxisBehavior, AxisKind, ContactPoint, ContactSet,
    StabilityScan, AXIS_TOL, SEPARATION_TOL,
};
pub use geometry::{
    contact_order, convexity_indices, level_set_trace, ContactIndex, ContactOrder, ContactSample,
    LevelCurve,
};
pub use hessian::{hessian_class, HessianClass, HessianKind};
pub use multiplicity::{detect_multiplicities, estimate_codimension, CodimensionFit, MultiplicitySet};
pub use zones::{analyze, build_zone_report, AnalysisOptions, RootClass, Zone, ZoneKind, ZoneReport};

/// Subset of grid nodes a classification runs on.
#[derive(Clone, Debug)]
pub struct Region<'a> {
    pub nodes: &'a [usize],
    /// Radius of a ball around the origin removed from the analysis.
    pub exclusion_radius: f64,
    /// Points whose `4h` neighbourhoods are left out of order fits.
    pub avoid: Vec<Vec<f64>>,
    /// Upper end of the distance window used for order fits.
    pub max_fit_distance: f64,
}

impl<'a> Region<'a> {
    pub fn new(nodes: &'a [usize]) -> Self {
        Self {
            nodes,
            exclusion_radius: 0.0,
            avoid: Vec::new(),
            max_fit_distance: f64::INFINITY,
        }
    }

    pub fn membership(&self, len: usize) -> Vec<bool> {
        let mut m = vec![false; len];
        for &j in self.nodes {
            m[j] = true;
        }
        m
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// At most `max` entries of `items`, evenly strided.
pub(crate) fn subsample<T: Copy>(items: &[T], max: usize) -> Vec<T> {
    if items.len() <= max || max == 0 {
        return items.to_vec();
    }
    (0..max)
        .map(|i| items[i * (items.len() - 1) / (max - 1).max(1)])
        .collect()
}
