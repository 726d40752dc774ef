use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform samples `min, min + step, ..., max` along one axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if count < 2 || !(max > min) || !min.is_finite() || !max.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "axis needs count >= 2 and max > min, got [{min}, {max}] x {count}"
            )));
        }
        Ok(Self { min, max, count })
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    pub fn value(&self, i: usize) -> f64 {
        self.min + self.step() * i as f64
    }

    /// Index of the sample closest to zero (or to the interval, if zero is outside).
    pub fn center(&self) -> usize {
        let i = (-self.min / self.step()).round();
        i.clamp(0.0, (self.count - 1) as f64) as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridKind {
    Cartesian { axes: Vec<Axis> },
    /// Two-dimensional polar lattice: radii times equally spaced angles.
    Polar { radius: Axis, directions: usize },
}

/// Sampling of frequency space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    kind: GridKind,
}

impl FrequencyGrid {
    pub fn cartesian(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidArgument("grid needs at least one axis".into()));
        }
        Ok(Self {
            kind: GridKind::Cartesian { axes },
        })
    }

    /// Cube `[-r, r]^n` with `count` samples per axis.
    pub fn cube(n: usize, r: f64, count: usize) -> Result<Self> {
        let axis = Axis::new(-r, r, count)?;
        Self::cartesian(vec![axis; n])
    }

    pub fn polar(radius: Axis, directions: usize) -> Result<Self> {
        if radius.min < 0.0 {
            return Err(Error::InvalidArgument("polar radii must be non-negative".into()));
        }
        if directions < 4 {
            return Err(Error::InvalidArgument("polar grid needs at least 4 directions".into()));
        }
        Ok(Self {
            kind: GridKind::Polar { radius, directions },
        })
    }

    pub fn kind(&self) -> &GridKind {
        &self.kind
    }

    pub fn dimension(&self) -> usize {
        match &self.kind {
            GridKind::Cartesian { axes } => axes.len(),
            GridKind::Polar { .. } => 2,
        }
    }

    /// Lattice shape: per-axis counts (radius then angle for polar grids).
    pub fn shape(&self) -> Vec<usize> {
        match &self.kind {
            GridKind::Cartesian { axes } => axes.iter().map(|a| a.count).collect(),
            GridKind::Polar { radius, directions } => vec![radius.count, *directions],
        }
    }

    fn periodic(&self, axis: usize) -> bool {
        matches!(self.kind, GridKind::Polar { .. }) && axis == 1
    }

    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major multi-index of a node, last axis fastest.
    pub fn multi_index(&self, node: usize) -> Vec<usize> {
        let shape = self.shape();
        let mut idx = vec![0; shape.len()];
        let mut rest = node;
        for a in (0..shape.len()).rev() {
            idx[a] = rest % shape[a];
            rest /= shape[a];
        }
        idx
    }

    pub fn node(&self, idx: &[usize]) -> usize {
        let shape = self.shape();
        idx.iter().zip(&shape).fold(0, |acc, (&i, &s)| acc * s + i)
    }

    pub fn point(&self, node: usize) -> Vec<f64> {
        let idx = self.multi_index(node);
        match &self.kind {
            GridKind::Cartesian { axes } => {
                axes.iter().zip(&idx).map(|(a, &i)| a.value(i)).collect()
            }
            GridKind::Polar { radius, directions } => {
                let r = radius.value(idx[0]);
                let th = std::f64::consts::TAU * idx[1] as f64 / *directions as f64;
                vec![r * th.cos(), r * th.sin()]
            }
        }
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|k| self.point(k)).collect()
    }

    /// Characteristic spacing `h`.
    pub fn step(&self) -> f64 {
        match &self.kind {
            GridKind::Cartesian { axes } => axes.iter().map(Axis::step).fold(0.0, f64::max),
            GridKind::Polar { radius, .. } => radius.step(),
        }
    }

    /// Per-axis spacings of the cell around a node, in frequency units.
    pub fn cell_extent(&self, node: usize) -> Vec<f64> {
        match &self.kind {
            GridKind::Cartesian { axes } => axes.iter().map(Axis::step).collect(),
            GridKind::Polar { radius, directions } => {
                let r = radius.value(self.multi_index(node)[0]).max(0.5 * radius.step());
                vec![radius.step(), r * std::f64::consts::TAU / *directions as f64]
            }
        }
    }

    /// Measure of the cell represented by a node.
    pub fn cell_volume(&self, node: usize) -> f64 {
        self.cell_extent(node).iter().product()
    }

    /// Largest `|xi|` over the grid.
    pub fn max_radius(&self) -> f64 {
        match &self.kind {
            GridKind::Cartesian { axes } => axes
                .iter()
                .map(|a| a.min.abs().max(a.max.abs()).powi(2))
                .sum::<f64>()
                .sqrt(),
            GridKind::Polar { radius, .. } => radius.max,
        }
    }

    /// Nodes differing by one step along one axis.
    pub fn neighbors(&self, node: usize) -> Vec<usize> {
        let shape = self.shape();
        let idx = self.multi_index(node);
        let mut out = Vec::with_capacity(2 * shape.len());
        for a in 0..shape.len() {
            for delta in [-1i64, 1] {
                let mut j = idx.clone();
                let v = idx[a] as i64 + delta;
                if self.periodic(a) {
                    j[a] = v.rem_euclid(shape[a] as i64) as usize;
                } else if v < 0 || v >= shape[a] as i64 {
                    continue;
                } else {
                    j[a] = v as usize;
                }
                let nb = self.node(&j);
                if nb != node && !out.contains(&nb) {
                    out.push(nb);
                }
            }
        }
        out
    }

    /// Root of the tracking tree.
    pub fn center(&self) -> Vec<usize> {
        match &self.kind {
            GridKind::Cartesian { axes } => axes.iter().map(Axis::center).collect(),
            GridKind::Polar { radius, .. } => vec![radius.center(), 0],
        }
    }

    /// Parent of a node in the tracking tree: one step towards the center
    /// along the last axis on which the node differs from it.
    pub fn parent(&self, node: usize) -> Option<usize> {
        let center = self.center();
        let mut idx = self.multi_index(node);
        for a in (0..idx.len()).rev() {
            if idx[a] != center[a] {
                if self.periodic(a) {
                    // Angles are walked in increasing order from the seed ray.
                    idx[a] -= 1;
                } else if idx[a] > center[a] {
                    idx[a] -= 1;
                } else {
                    idx[a] += 1;
                }
                return Some(self.node(&idx));
            }
        }
        None
    }

    /// Tracking stages. Stage `a` holds the lines along axis `a` whose
    /// coordinates on axes after `a` sit at the center; each line is ordered
    /// so that parents precede children.
    pub fn stages(&self) -> Vec<Vec<Vec<usize>>> {
        let shape = self.shape();
        let center = self.center();
        let n = shape.len();
        let mut stages = Vec::with_capacity(n);
        for a in 0..n {
            let mut lines = Vec::new();
            let prefix: usize = shape[..a].iter().product();
            for p in 0..prefix {
                let mut idx = center.clone();
                let mut rest = p;
                for b in (0..a).rev() {
                    idx[b] = rest % shape[b];
                    rest /= shape[b];
                }
                let mut line = Vec::with_capacity(shape[a]);
                let c = center[a];
                if self.periodic(a) {
                    for i in (c + 1)..shape[a] {
                        idx[a] = i;
                        line.push(self.node(&idx));
                    }
                } else {
                    for i in (c + 1)..shape[a] {
                        idx[a] = i;
                        line.push(self.node(&idx));
                    }
                    for i in (0..c).rev() {
                        idx[a] = i;
                        line.push(self.node(&idx));
                    }
                }
                if !line.is_empty() {
                    lines.push(line);
                }
            }
            stages.push(lines);
        }
        stages
    }

    /// Same lattice with the axis order of the sweep permuted: used to check
    /// that tracked multisets do not depend on the path.
    pub fn transposed(&self) -> Self {
        match &self.kind {
            GridKind::Cartesian { axes } => {
                let mut a = axes.clone();
                a.reverse();
                Self::cartesian(a).expect("same axes")
            }
            GridKind::Polar { .. } => self.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_round_trip() {
        let g = FrequencyGrid::cartesian(vec![
            Axis::new(-1.0, 1.0, 5).unwrap(),
            Axis::new(0.0, 2.0, 3).unwrap(),
        ])
        .unwrap();
        assert_eq!(g.len(), 15);
        for k in 0..g.len() {
            assert_eq!(g.node(&g.multi_index(k)), k);
        }
        assert_eq!(g.point(g.node(&[2, 1])), vec![0.0, 1.0]);
    }

    #[test]
    fn tree_covers_every_node_once() {
        for g in [
            FrequencyGrid::cube(2, 1.0, 7).unwrap(),
            FrequencyGrid::cube(3, 1.0, 4).unwrap(),
            FrequencyGrid::polar(Axis::new(0.0, 1.0, 5).unwrap(), 8).unwrap(),
        ] {
            let mut seen = vec![false; g.len()];
            let root = g.node(&g.center());
            seen[root] = true;
            assert_eq!(g.parent(root), None);
            for stage in g.stages() {
                for line in stage {
                    for node in line {
                        let p = g.parent(node).unwrap();
                        assert!(seen[p], "parent visited first");
                        assert!(!seen[node]);
                        seen[node] = true;
                    }
                }
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn invalid_axes() {
        assert!(Axis::new(1.0, 1.0, 4).is_err());
        assert!(Axis::new(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn polar_neighbors_wrap() {
        let g = FrequencyGrid::polar(Axis::new(0.0, 1.0, 3).unwrap(), 8).unwrap();
        let nb = g.neighbors(g.node(&[1, 0]));
        assert!(nb.contains(&g.node(&[1, 7])));
    }
}
