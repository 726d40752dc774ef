use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fraction of the energy allowed within two cells of the spatial edge.
pub const ALIASING_TOL: f64 = 1e-6;

const CHUNK: usize = 1 << 14;

/// Uniform frequency grid `xi_k = (k - N/2) dxi` on `[-R, R)^n` with its dual
/// spatial grid `x_j = (j - N/2) dx`, `dx = 2 pi / (N dxi)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralGrid {
    pub dimension: usize,
    /// Nodes per axis, even.
    pub count: usize,
    pub radius: f64,
}

impl SpectralGrid {
    pub fn new(dimension: usize, count: usize, radius: f64) -> Result<Self> {
        let g = Self {
            dimension,
            count,
            radius,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dimension) {
            return Err(Error::InvalidArgument(format!(
                "spectral grids support dimensions 1 to 3, got {}",
                self.dimension
            )));
        }
        if self.count < 4 || self.count % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "spectral grid needs an even count >= 4, got {}",
                self.count
            )));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad spectral radius {}", self.radius)));
        }
        Ok(())
    }

    /// Default grids: `2^14` nodes on `|xi| <= 64` in 1D, `1024^2` on `|xi| <= 3.2` in 2D.
    pub fn default_for(dimension: usize) -> Self {
        match dimension {
            1 => Self::new(1, 1 << 14, 64.0),
            2 => Self::new(2, 1024, 3.2),
            _ => Self::new(3, 128, 3.2),
        }
        .expect("valid default grid")
    }

    pub fn step(&self) -> f64 {
        2.0 * self.radius / self.count as f64
    }

    pub fn spatial_step(&self) -> f64 {
        2.0 * PI / (self.count as f64 * self.step())
    }

    pub fn len(&self) -> usize {
        self.count.pow(self.dimension as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn coordinate(&self, k: usize) -> f64 {
        (k as f64 - (self.count / 2) as f64) * self.step()
    }

    pub fn multi_index(&self, node: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dimension];
        let mut r = node;
        for a in (0..self.dimension).rev() {
            idx[a] = r % self.count;
            r /= self.count;
        }
        idx
    }

    pub fn frequency(&self, node: usize) -> Vec<f64> {
        self.multi_index(node).into_iter().map(|k| self.coordinate(k)).collect()
    }

    pub fn position(&self, node: usize) -> Vec<f64> {
        let dx = self.spatial_step();
        self.multi_index(node)
            .into_iter()
            .map(|j| (j as f64 - (self.count / 2) as f64) * dx)
            .collect()
    }

    pub fn frequency_cell(&self) -> f64 {
        self.step().powi(self.dimension as i32)
    }

    pub fn spatial_cell(&self) -> f64 {
        self.spatial_step().powi(self.dimension as i32)
    }

    fn parity(&self, node: usize) -> f64 {
        let s: usize = self.multi_index(node).into_iter().sum();
        if s % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Frequency-side profile of one Cauchy datum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Zero,
    /// `f = delta`, `f^ = 1`.
    Unit,
    /// `f(x) = exp(-|x|^2 / (2 sigma^2))`.
    Gaussian { sigma: f64 },
    /// Indicator of `r_min <= |xi| <= r_max`.
    Band { r_min: f64, r_max: f64 },
    /// `exp(-(|xi| - r0)^2 / (2 width^2))`.
    Ring { r0: f64, width: f64 },
}

impl Profile {
    pub fn value(&self, xi: &[f64]) -> f64 {
        let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        match *self {
            Profile::Zero => 0.0,
            Profile::Unit => 1.0,
            Profile::Gaussian { sigma } => {
                (2.0 * PI * sigma * sigma).powf(xi.len() as f64 / 2.0)
                    * (-0.5 * sigma * sigma * r * r).exp()
            }
            Profile::Band { r_min, r_max } => f64::from(r >= r_min && r <= r_max),
            Profile::Ring { r0, width } => (-0.5 * ((r - r0) / width).powi(2)).exp(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Profile::Zero | Profile::Unit => true,
            Profile::Gaussian { sigma } => sigma > 0.0 && sigma.is_finite(),
            Profile::Band { r_min, r_max } => r_min >= 0.0 && r_max > r_min && r_max.is_finite(),
            Profile::Ring { r0, width } => r0 >= 0.0 && r0.is_finite() && width > 0.0 && width.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("bad data profile {self:?}")))
        }
    }
}

/// Radial frequency window.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Window {
    #[default]
    None,
    /// `exp(1 - 1/(1 - (|xi|/radius)^2))` inside the ball, zero outside.
    Bump { radius: f64 },
}

impl Window {
    pub fn value(&self, xi: &[f64]) -> f64 {
        match *self {
            Window::None => 1.0,
            Window::Bump { radius } => {
                let q = xi.iter().map(|x| x * x).sum::<f64>() / (radius * radius);
                if q < 1.0 {
                    (1.0 - 1.0 / (1.0 - q)).exp()
                } else {
                    0.0
                }
            }
        }
    }
}

/// Cauchy data `d_t^l u(0) = f_l`, given by their Fourier transforms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CauchyData {
    /// `profiles[l]` is `f_l^`; missing entries are zero.
    pub profiles: Vec<Profile>,
    #[serde(default)]
    pub window: Window,
    /// Data vanish on `|xi| < exclusion_radius`.
    #[serde(default)]
    pub exclusion_radius: Option<f64>,
}

impl CauchyData {
    /// Data `f_j = delta`, all others zero.
    pub fn kernel(j: usize, window: Window) -> Self {
        let mut profiles = vec![Profile::Zero; j + 1];
        profiles[j] = Profile::Unit;
        Self {
            profiles,
            window,
            exclusion_radius: None,
        }
    }

    pub fn single(j: usize, profile: Profile) -> Self {
        let mut profiles = vec![Profile::Zero; j + 1];
        profiles[j] = profile;
        Self {
            profiles,
            window: Window::None,
            exclusion_radius: None,
        }
    }

    pub fn validate(&self, order: usize) -> Result<()> {
        if self.profiles.len() > order {
            return Err(Error::InvalidArgument(format!(
                "{} data profiles given for an order {order} equation",
                self.profiles.len()
            )));
        }
        if let Window::Bump { radius } = self.window {
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(Error::InvalidArgument(format!("bad window radius {radius}")));
            }
        }
        if let Some(r) = self.exclusion_radius {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(Error::InvalidArgument(format!("bad exclusion radius {r}")));
            }
        }
        self.profiles.iter().try_for_each(Profile::validate)
    }

    /// Window times spectral cutoff at `xi`.
    pub fn envelope(&self, xi: &[f64]) -> f64 {
        if let Some(r0) = self.exclusion_radius {
            if xi.iter().map(|x| x * x).sum::<f64>() < r0 * r0 {
                return 0.0;
            }
        }
        self.window.value(xi)
    }

    /// `f_l^(xi)` including window and cutoff.
    pub fn weights(&self, xi: &[f64]) -> Vec<f64> {
        let e = self.envelope(xi);
        self.profiles
            .iter()
            .map(|p| if e == 0.0 { 0.0 } else { e * p.value(xi) })
            .collect()
    }
}

fn chunked_sum<F>(values: &[Complex64], f: F) -> f64
where
    F: Fn(&Complex64) -> f64 + Sync,
{
    let parts: Vec<f64> = values
        .par_chunks(CHUNK)
        .map(|c| c.iter().map(&f).sum::<f64>())
        .collect();
    parts.into_iter().sum()
}

/// `(2 pi)^-n sum |u^|^2 dxi^n`, the frequency-side squared L2 norm.
pub fn frequency_energy(grid: &SpectralGrid, values: &[Complex64]) -> f64 {
    chunked_sum(values, |z| z.norm_sqr()) * grid.frequency_cell() / (2.0 * PI).powi(grid.dimension as i32)
}

/// Spatial samples on the dual grid.
#[derive(Clone, Debug)]
pub struct SpatialField {
    pub values: Vec<Complex64>,
    /// Squared L2 norm on the frequency side.
    pub frequency_energy: f64,
    pub edge_fraction: f64,
}

impl SpatialField {
    pub fn sup(&self) -> f64 {
        self.values
            .par_chunks(CHUNK)
            .map(|c| c.iter().map(|z| z.norm()).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max)
    }

    pub fn l2(&self, grid: &SpectralGrid) -> f64 {
        (chunked_sum(&self.values, |z| z.norm_sqr()) * grid.spatial_cell()).sqrt()
    }
}

fn transform_axis(data: &mut [Complex64], grid: &SpectralGrid, axis: usize) {
    let n = grid.count;
    let fft = FftPlanner::new().plan_fft_inverse(n);
    let stride = n.pow((grid.dimension - 1 - axis) as u32);
    if stride == 1 {
        data.par_chunks_mut(n).for_each(|line| fft.process(line));
        return;
    }
    data.par_chunks_mut(n * stride).for_each(|block| {
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for inner in 0..stride {
            for (k, v) in line.iter_mut().enumerate() {
                *v = block[k * stride + inner];
            }
            fft.process(&mut line);
            for (k, v) in line.iter().enumerate() {
                block[k * stride + inner] = *v;
            }
        }
    });
}

/// `u(x_j) = (2 pi)^-n sum_k e^{i x_j xi_k} u^(xi_k) dxi^n`, with the
/// aliasing check on the outer two cells of every axis.
pub fn inverse_transform(grid: &SpectralGrid, values: Vec<Complex64>) -> Result<SpatialField> {
    inverse_transform_above(grid, values, 0.0)
}

/// As [`inverse_transform`]; the aliasing check is skipped when the squared
/// norm is at most `floor`, i.e. the field is roundoff.
pub fn inverse_transform_above(
    grid: &SpectralGrid,
    mut values: Vec<Complex64>,
    floor: f64,
) -> Result<SpatialField> {
    if values.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: values.len(),
        });
    }
    let energy = frequency_energy(grid, &values);
    values
        .par_iter_mut()
        .enumerate()
        .for_each(|(k, v)| *v *= grid.parity(k));
    for axis in 0..grid.dimension {
        transform_axis(&mut values, grid, axis);
    }
    let half = grid.count / 2;
    let global = if (half * grid.dimension) % 2 == 0 { 1.0 } else { -1.0 };
    let scale = global * (grid.step() / (2.0 * PI)).powi(grid.dimension as i32);
    values
        .par_iter_mut()
        .enumerate()
        .for_each(|(j, v)| *v *= scale * grid.parity(j));

    let total = chunked_sum(&values, |z| z.norm_sqr());
    let n = grid.count;
    let edge: f64 = values
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(c, chunk)| {
            chunk
                .iter()
                .enumerate()
                .filter(|(i, _)| {
                    grid.multi_index(c * CHUNK + i)
                        .iter()
                        .any(|&k| k < 2 || k >= n - 2)
                })
                .map(|(_, z)| z.norm_sqr())
                .sum::<f64>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    let edge_fraction = if total > 0.0 { edge / total } else { 0.0 };
    if edge_fraction > ALIASING_TOL && energy > floor {
        return Err(Error::Aliasing {
            fraction: edge_fraction,
        });
    }
    Ok(SpatialField {
        values,
        frequency_energy: energy,
        edge_fraction,
    })
}
