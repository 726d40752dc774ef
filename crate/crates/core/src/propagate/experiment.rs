use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{kernel_row, min_gap, vandermonde_amplitudes, AMPLITUDE_GAP};
use super::spectral::{frequency_energy, inverse_transform, inverse_transform_above, CauchyData, SpectralGrid, Window};
use crate::error::{Error, Result};
use crate::roots::solve_roots;
use crate::symbols::{SymbolSpec, TauPolynomial};

/// Allowed negative `Im tau` on the data support, relative to the root scale.
pub const STABILITY_TOL: f64 = 1e-8;

/// Fields whose energy is below this fraction of the energy of their
/// uncancelled mode sum are roundoff and skip the aliasing check.
pub const ROUNDOFF_ENERGY: f64 = 1e-24;

/// Tolerated increase of `ln norm` between consecutive fit samples.
pub const MONOTONE_TOL: f64 = 0.05;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `count` geometrically spaced times on `[t0, t1]`.
pub fn geometric_ladder(t0: f64, t1: f64, count: usize) -> Result<Vec<f64>> {
    if !(t0 > 0.0 && t1 >= t0 && t1.is_finite()) || count == 0 {
        return Err(Error::InvalidArgument(format!(
            "bad time ladder [{t0}, {t1}] with {count} points"
        )));
    }
    if count == 1 {
        return Ok(vec![t0]);
    }
    let q = (t1 / t0).ln() / (count - 1) as f64;
    Ok((0..count)
        .map(|i| if i + 1 == count { t1 } else { t0 * (q * i as f64).exp() })
        .collect())
}

/// A decay experiment on one symbol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    pub grid: SpectralGrid,
    pub data: CauchyData,
    pub times: Vec<f64>,
    #[serde(default)]
    pub r: u32,
    /// Space multi-index; empty means no space derivative.
    #[serde(default)]
    pub alpha: Vec<u32>,
    /// Kernel index `j`; defaults to `m - 1`.
    #[serde(default)]
    pub kernel_index: Option<usize>,
    /// Also measure the kernel for `f_j = delta` under the data window.
    #[serde(default = "yes")]
    pub measure_kernel: bool,
}

fn yes() -> bool {
    true
}

impl Experiment {
    pub fn alpha_order(&self) -> u32 {
        self.alpha.iter().sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSample {
    pub t: f64,
    pub solution_l2: f64,
    pub solution_sup: f64,
    pub kernel_l2: Option<f64>,
    pub kernel_sup: Option<f64>,
    /// `sup_xi` of the kernel multiplier, the L2 -> L2 operator norm.
    pub kernel_multiplier: Option<f64>,
    /// Largest relative Parseval defect of the two syntheses.
    pub parseval_defect: f64,
}

/// Measured norms over the time ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagatorRun {
    pub symbol: String,
    pub grid: SpectralGrid,
    pub data: CauchyData,
    pub kernel_index: usize,
    pub r: u32,
    pub alpha: Vec<u32>,
    pub initial: NormSample,
    pub samples: Vec<NormSample>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    SolutionSup,
    SolutionL2,
    KernelSup,
    KernelL2,
    KernelMultiplier,
}

impl Measure {
    pub const ALL: [Measure; 5] = [
        Measure::SolutionL2,
        Measure::SolutionSup,
        Measure::KernelL2,
        Measure::KernelSup,
        Measure::KernelMultiplier,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Measure::SolutionSup => "solution_sup",
            Measure::SolutionL2 => "solution_l2",
            Measure::KernelSup => "kernel_sup",
            Measure::KernelL2 => "kernel_l2",
            Measure::KernelMultiplier => "kernel_multiplier",
        }
    }

    pub fn field(&self) -> &'static str {
        match self {
            Measure::SolutionSup | Measure::SolutionL2 => "solution",
            Measure::KernelSup | Measure::KernelL2 => "kernel",
            Measure::KernelMultiplier => "kernel_multiplier",
        }
    }

    pub fn q(&self) -> &'static str {
        match self {
            Measure::SolutionSup | Measure::KernelSup => "inf",
            _ => "2",
        }
    }

    pub fn of(&self, s: &NormSample) -> Option<f64> {
        match self {
            Measure::SolutionSup => Some(s.solution_sup),
            Measure::SolutionL2 => Some(s.solution_l2),
            Measure::KernelSup => s.kernel_sup,
            Measure::KernelL2 => s.kernel_l2,
            Measure::KernelMultiplier => s.kernel_multiplier,
        }
    }
}

impl PropagatorRun {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn series(&self, m: Measure) -> Result<Vec<f64>> {
        self.samples
            .iter()
            .map(|s| m.of(s))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::InvalidArgument(format!("run has no {} measurements", m.field())))
    }

    pub fn fit(&self, m: Measure, window: (f64, f64), mode: FitMode) -> Result<DecayFit> {
        fit_exponent(&self.times(), &self.series(m)?, window, mode)
    }

    /// Rows `t,field,q,r,alpha,norm`, one per time and measure.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,field,q,r,alpha,norm")?;
        let a: u32 = self.alpha.iter().sum();
        for s in &self.samples {
            for m in Measure::ALL {
                if let Some(v) = m.of(s) {
                    writeln!(w, "{},{},{},{},{},{:e}", s.t, m.field(), m.q(), self.r, a, v)?;
                }
            }
        }
        Ok(())
    }
}

enum Evaluator {
    /// `sum_k B_k e^{i tau_k t}` for solution and kernel.
    Closed {
        roots: Vec<Complex64>,
        solution: Vec<Complex64>,
        kernel: Vec<Complex64>,
    },
    /// Matrix exponential with per-index weights.
    Matrix {
        poly: TauPolynomial,
        roots: Vec<Complex64>,
        solution: Vec<Complex64>,
        kernel: Vec<Complex64>,
    },
    Zero,
}

impl Evaluator {
    fn at(&self, t: f64, r: u32) -> Result<(Complex64, Complex64)> {
        self.at_with_size(t, r).map(|(a, b, _)| (a, b))
    }

    /// Values and the uncancelled size `sum |term|` of both sums.
    fn at_with_size(&self, t: f64, r: u32) -> Result<(Complex64, Complex64, [f64; 2])> {
        let zero = Complex64::new(0.0, 0.0);
        match self {
            Evaluator::Zero => Ok((zero, zero, [0.0; 2])),
            Evaluator::Closed {
                roots,
                solution,
                kernel,
            } => {
                let mut a = zero;
                let mut b = zero;
                let mut size = [0.0; 2];
                for (k, &tau) in roots.iter().enumerate() {
                    let e = (I * tau * t).exp();
                    a += solution[k] * e;
                    b += kernel[k] * e;
                    size[0] += (solution[k] * e).norm();
                    size[1] += (kernel[k] * e).norm();
                }
                Ok((a, b, size))
            }
            Evaluator::Matrix {
                poly,
                roots,
                solution,
                kernel,
            } => {
                let row = kernel_row(poly, roots, t, r)?;
                let a = row.iter().zip(solution).map(|(e, w)| e * w).sum();
                let b = row.iter().zip(kernel).map(|(e, w)| e * w).sum();
                let size = [
                    row.iter().zip(solution).map(|(e, w)| (e * w).norm()).sum(),
                    row.iter().zip(kernel).map(|(e, w)| (e * w).norm()).sum(),
                ];
                Ok((a, b, size))
            }
        }
    }
}

/// Weights `(-i)^l f_l^` times the derivative factor `i^r (i xi)^alpha`.
fn index_weights(weights: &[f64], m: usize, factor: Complex64) -> Vec<Complex64> {
    (0..m)
        .map(|l| {
            let w = weights.get(l).copied().unwrap_or(0.0);
            factor * (-I).powi(l as i32) * w
        })
        .collect()
}

fn prepare(
    s: &SymbolSpec,
    xi: &[f64],
    ex: &Experiment,
    kernel_data: &CauchyData,
) -> Result<(Evaluator, f64)> {
    let m = s.order();
    let ws = ex.data.weights(xi);
    let wk = kernel_data.weights(xi);
    if ws.iter().all(|&w| w == 0.0) && wk.iter().all(|&w| w == 0.0) {
        return Ok((Evaluator::Zero, f64::INFINITY));
    }
    let mut factor = I.powi(ex.r as i32);
    for (x, &a) in xi.iter().zip(&ex.alpha) {
        factor *= (I * x).powi(a as i32);
    }
    let ws = index_weights(&ws, m, factor);
    let wk = index_weights(&wk, m, factor);
    let poly = s.evaluate(xi)?;
    let roots = solve_roots(&poly, None)?;
    let scale = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let min_im = roots.iter().map(|z| z.im).fold(f64::INFINITY, f64::min);
    if min_im < -STABILITY_TOL * scale {
        return Err(Error::Overflow {
            xi: xi.to_vec(),
            min_im,
        });
    }
    if min_gap(&roots) >= AMPLITUDE_GAP * scale {
        let amps: Vec<Vec<Complex64>> = (0..m)
            .map(|j| vandermonde_amplitudes(&roots, j))
            .collect::<Result<_>>()?;
        let combine = |w: &[Complex64]| -> Vec<Complex64> {
            (0..m)
                .map(|k| {
                    let a: Complex64 = (0..m).map(|l| w[l] * amps[l][k]).sum();
                    a * roots[k].powi(ex.r as i32)
                })
                .collect()
        };
        let solution = combine(&ws);
        let kernel = combine(&wk);
        Ok((
            Evaluator::Closed {
                roots,
                solution,
                kernel,
            },
            min_im,
        ))
    } else {
        Ok((
            Evaluator::Matrix {
                poly,
                roots,
                solution: ws,
                kernel: wk,
            },
            min_im,
        ))
    }
}

fn kernel_data(ex: &Experiment, j: usize) -> CauchyData {
    let mut k = CauchyData::kernel(j, ex.data.window.clone());
    k.exclusion_radius = ex.data.exclusion_radius;
    k
}

fn sample(
    grid: &SpectralGrid,
    nodes: &[Evaluator],
    t: f64,
    r: u32,
    with_kernel: bool,
    xi_of: impl Fn(usize) -> Vec<f64> + Sync,
) -> Result<NormSample> {
    let triples: Vec<(Complex64, Complex64, [f64; 2])> = nodes
        .par_iter()
        .map(|e| e.at_with_size(t, r))
        .collect::<Result<_>>()?;
    if let Some(k) = triples
        .iter()
        .position(|(a, b, _)| !(a.re.is_finite() && a.im.is_finite() && b.re.is_finite() && b.im.is_finite()))
    {
        return Err(Error::Overflow {
            xi: xi_of(k),
            min_im: f64::NAN,
        });
    }
    let mut sol = Vec::with_capacity(triples.len());
    let mut ker = Vec::with_capacity(triples.len());
    let mut sizes = [Vec::with_capacity(triples.len()), Vec::with_capacity(triples.len())];
    for (a, b, s) in triples {
        sol.push(a);
        ker.push(b);
        sizes[0].push(Complex64::new(s[0], 0.0));
        sizes[1].push(Complex64::new(s[1], 0.0));
    }
    let floors = sizes.map(|v| ROUNDOFF_ENERGY * frequency_energy(grid, &v));
    let defect = |l2: f64, e: f64| {
        if e > 0.0 {
            (l2 * l2 - e).abs() / e
        } else {
            0.0
        }
    };
    let us = inverse_transform_above(grid, sol, floors[0])?;
    let sl2 = us.l2(grid);
    let mut out = NormSample {
        t,
        solution_l2: sl2,
        solution_sup: us.sup(),
        kernel_l2: None,
        kernel_sup: None,
        kernel_multiplier: None,
        parseval_defect: defect(sl2, us.frequency_energy),
    };
    if with_kernel {
        out.kernel_multiplier = Some(ker.iter().map(|z| z.norm()).fold(0.0, f64::max));
        let uk = inverse_transform_above(grid, ker, floors[1])?;
        let kl2 = uk.l2(grid);
        out.kernel_l2 = Some(kl2);
        out.kernel_sup = Some(uk.sup());
        out.parseval_defect = out.parseval_defect.max(defect(kl2, uk.frequency_energy));
    }
    Ok(out)
}

/// Norms of `d_t^r d_x^alpha u(t)` and of the windowed kernel over the time
/// ladder, plus the `t = 0` sample.
pub fn run_decay_experiment(symbol: &str, s: &SymbolSpec, ex: &Experiment) -> Result<PropagatorRun> {
    ex.grid.validate()?;
    if ex.grid.dimension != s.dimension() {
        return Err(Error::DimensionMismatch {
            expected: s.dimension(),
            got: ex.grid.dimension,
        });
    }
    if !ex.alpha.is_empty() && ex.alpha.len() != s.dimension() {
        return Err(Error::DimensionMismatch {
            expected: s.dimension(),
            got: ex.alpha.len(),
        });
    }
    let m = s.order();
    ex.data.validate(m)?;
    if ex.times.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
        return Err(Error::InvalidArgument("times must be finite and non-negative".into()));
    }
    let j = ex.kernel_index.unwrap_or(m - 1);
    if j >= m {
        return Err(Error::InvalidArgument(format!("kernel index {j} out of range for order {m}")));
    }
    let kd = if ex.measure_kernel {
        kernel_data(ex, j)
    } else {
        CauchyData {
            profiles: vec![],
            window: Window::None,
            exclusion_radius: None,
        }
    };
    let grid = &ex.grid;
    let nodes: Vec<Evaluator> = (0..grid.len())
        .into_par_iter()
        .map(|k| prepare(s, &grid.frequency(k), ex, &kd).map(|(e, _)| e))
        .collect::<Result<_>>()?;
    let xi_of = |k: usize| grid.frequency(k);
    let initial = sample(grid, &nodes, 0.0, ex.r, ex.measure_kernel, xi_of)?;
    let samples = ex
        .times
        .iter()
        .map(|&t| sample(grid, &nodes, t, ex.r, ex.measure_kernel, xi_of))
        .collect::<Result<_>>()?;
    Ok(PropagatorRun {
        symbol: symbol.to_string(),
        grid: grid.clone(),
        data: ex.data.clone(),
        kernel_index: j,
        r: ex.r,
        alpha: ex.alpha.clone(),
        initial,
        samples,
    })
}

/// Spatial samples of `u(t)` for data `data` (no derivatives).
pub fn synthesize(
    s: &SymbolSpec,
    t: f64,
    grid: &SpectralGrid,
    data: &CauchyData,
) -> Result<super::spectral::SpatialField> {
    let ex = Experiment {
        grid: grid.clone(),
        data: data.clone(),
        times: vec![],
        r: 0,
        alpha: vec![],
        kernel_index: None,
        measure_kernel: false,
    };
    data.validate(s.order())?;
    let none = CauchyData {
        profiles: vec![],
        window: data.window.clone(),
        exclusion_radius: None,
    };
    let values: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (e, _) = prepare(s, &grid.frequency(k), &ex, &none)?;
            Ok(e.at(t, 0)?.0)
        })
        .collect::<Result<_>>()?;
    inverse_transform(grid, values)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    /// `norm ~ C t^{-rho}`.
    Power,
    /// `norm ~ C e^{-delta t}`.
    Exponential,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub mode: FitMode,
    /// `rho` or `delta`.
    pub exponent: f64,
    /// Twice the standard error of the slope.
    pub half_width: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    pub points: usize,
    pub rms: f64,
    pub low_confidence: bool,
}

/// Least squares of `ln norm` against `ln t` or `t` on the window.
pub fn fit_exponent(times: &[f64], norms: &[f64], window: (f64, f64), mode: FitMode) -> Result<DecayFit> {
    if times.len() != norms.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            got: norms.len(),
        });
    }
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(norms)
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .map(|(&t, &y)| (t, y))
        .collect();
    if pts.len() < 6 {
        return Err(Error::TooFewSamples { found: pts.len() });
    }
    if pts.iter().any(|&(t, y)| !(y > 0.0 && y.is_finite()) || !(t > 0.0)) {
        return Err(Error::InvalidArgument("fit needs positive finite norms and times".into()));
    }
    let xs: Vec<f64> = pts
        .iter()
        .map(|&(t, _)| match mode {
            FitMode::Power => t.ln(),
            FitMode::Exponential => t,
        })
        .collect();
    let ys: Vec<f64> = pts.iter().map(|&(_, y)| y.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::InvalidArgument("fit window has no spread in time".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let se = (rss / (n - 2.0) / sxx).sqrt();
    let low_confidence = ys.windows(2).any(|w| w[1] - w[0] > MONOTONE_TOL);
    Ok(DecayFit {
        mode,
        exponent: -slope,
        half_width: 2.0 * se,
        intercept,
        window,
        points: pts.len(),
        rms: (rss / n).sqrt(),
        low_confidence,
    })
}
