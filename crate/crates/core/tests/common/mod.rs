#![allow(dead_code)]

use hyperdisp_core::classify::{analyze, AnalysisOptions, AxisKind, ZoneReport};
use hyperdisp_core::predict::{interpolated_kappa, predict, rat, LebesguePair};
use hyperdisp_core::propagate::{kernel_row, min_gap, propagator, vandermonde_amplitudes};
use hyperdisp_core::roots::{root_jet, solve_roots, FrequencyGrid};
use hyperdisp_core::symbols::{corpus, SymbolSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn analysis_grid(n: usize) -> FrequencyGrid {
    match n {
        1 => FrequencyGrid::cube(1, 8.0, 1601),
        2 => FrequencyGrid::cube(2, 3.0, 121),
        _ => FrequencyGrid::cube(n, 3.0, 17),
    }
    .unwrap()
}

pub fn report_on(s: &SymbolSpec, grid: &FrequencyGrid) -> ZoneReport {
    analyze(s, grid, &AnalysisOptions::default()).unwrap().1
}

pub fn corpus_report(name: &str) -> ZoneReport {
    let s = corpus::symbol(name).unwrap();
    report_on(&s, &analysis_grid(s.dimension()))
}

pub fn roots_at(s: &SymbolSpec, xi: &[f64]) -> Vec<Complex64> {
    solve_roots(&s.evaluate(xi).unwrap(), None).unwrap()
}

/// Zones are disjoint, their runs match their counts and they cover the grid.
pub fn check_coverage(report: &ZoneReport, total: usize) -> Result<(), String> {
    let mut seen = vec![false; total];
    for zone in &report.zones {
        let mut count = 0;
        for &(a, b) in &zone.ranges {
            for j in a..=b {
                if seen[j] {
                    return Err(format!("node {j} in two zones"));
                }
                seen[j] = true;
                count += 1;
            }
        }
        if count != zone.node_count {
            return Err(format!("zone {} lists {count} nodes, reports {}", zone.id, zone.node_count));
        }
    }
    match seen.iter().filter(|&&v| !v).count() {
        0 => Ok(()),
        k => Err(format!("{k} uncovered nodes")),
    }
}

/// `gamma0 <= gamma`, and isolated interior contacts have even order.
pub fn check_contact_orders(report: &ZoneReport) -> Result<(), String> {
    for zone in &report.zones {
        for rc in &zone.roots {
            if let Some(c) = &rc.contact {
                if c.gamma0 > c.gamma {
                    return Err(format!("root {}: gamma0 {:?} > gamma {:?}", rc.label, c.gamma0, c.gamma));
                }
            }
            if let AxisKind::MeetsFiniteOrder { s, s_fit, contact, .. } = &rc.axis.kind {
                let interior = contact.points.iter().all(|p| !p.boundary);
                if contact.isolated && interior && s % 2 != 0 {
                    return Err(format!("root {}: odd s = {s}", rc.label));
                }
                if rc.axis.parity_rounded && s_fit.round().max(1.0) as u32 % 2 != 1 {
                    return Err(format!("root {}: parity flag on {s_fit}", rc.label));
                }
            }
        }
    }
    Ok(())
}

/// Dual-pair rates dominate the interpolation of the endpoint rates, with
/// equality when one row binds at both ends, and grow with the gap.
pub fn check_interpolation(report: &ZoneReport) -> Result<(), String> {
    let k22 = predict(report, LebesguePair::l2_l2(), 0, 0).map_err(|e| e.to_string())?;
    let k1 = predict(report, LebesguePair::l1_linf(), 0, 0).map_err(|e| e.to_string())?;
    let same = k22.k.row == k1.k.row && k22.k.zone == k1.k.zone && k22.k.label == k1.k.label;
    let mut previous = k22.kappa;
    for k in 7..=12 {
        let pair = LebesguePair::dual(rat(k, 12)).unwrap();
        let direct = predict(report, pair, 0, 0).map_err(|e| e.to_string())?.kappa;
        let interpolated = interpolated_kappa(k22.kappa, k1.kappa, &pair).unwrap();
        if direct < interpolated || (same && direct != interpolated) || direct < previous {
            return Err(format!("1/p = {k}/12: direct {direct}, interpolated {interpolated}"));
        }
        previous = direct;
    }
    Ok(())
}

fn eval_nodes(s: &SymbolSpec) -> Vec<Vec<f64>> {
    match s.dimension() {
        1 => FrequencyGrid::cube(1, 8.0, 2001),
        _ => FrequencyGrid::cube(s.dimension(), 3.0, 41),
    }
    .unwrap()
    .points()
}

/// Nodes where the Vandermonde sum and the matrix exponential agree to
/// `1e-8` relative, out of the nodes with well separated roots.
pub fn oracle_agreement(s: &SymbolSpec, t: f64) -> (usize, usize) {
    let m = s.order();
    let mut eligible = 0;
    let mut agree = 0;
    for xi in eval_nodes(s) {
        let roots = roots_at(s, &xi);
        let scale = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if min_gap(&roots) < 1e-2 * scale {
            continue;
        }
        eligible += 1;
        let phi = propagator(s, &xi, t).unwrap();
        let ok = (0..m).all(|j| {
            let terms: Vec<Complex64> = vandermonde_amplitudes(&roots, j)
                .unwrap()
                .iter()
                .zip(&roots)
                .map(|(a, tau)| a * (Complex64::i() * tau * t).exp())
                .collect();
            let sum: Complex64 = terms.iter().sum();
            let size: f64 = terms.iter().map(|z| z.norm()).sum();
            (sum - phi[(0, j)]).norm() <= 1e-8 * size.max(1e-300)
        });
        agree += ok as usize;
    }
    (agree, eligible)
}

/// A random root at `xi` with its distance to the others, when well separated.
fn simple_root(s: &SymbolSpec, xi: &[f64], rng: &mut ChaCha8Rng) -> Option<(Complex64, f64)> {
    let roots = solve_roots(&s.evaluate(xi).ok()?, None).ok()?;
    let k = rng.gen_range(0..roots.len());
    let scale = 1.0 + roots.iter().map(|r| r.norm()).fold(0.0, f64::max);
    let gap = roots
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != k)
        .map(|(_, r)| (r - roots[k]).norm())
        .fold(f64::INFINITY, f64::min);
    (gap > 0.1 * scale).then_some((roots[k], gap))
}

fn shifted(xi: &[f64], i: usize, h: f64) -> Vec<f64> {
    let mut x = xi.to_vec();
    x[i] += h;
    x
}

/// Fourth-order central difference from values at `2h, h, -h, -2h`.
fn difference(v: [Complex64; 4], h: f64) -> Complex64 {
    (-v[0] + 8.0 * v[1] - 8.0 * v[2] + v[3]) / (12.0 * h)
}

/// Gradient and Hessian of `samples` random simple roots against finite
/// differences, to `1e-6` relative.
pub fn check_jets(s: &SymbolSpec, samples: usize, seed: u64) -> Result<(), String> {
    let n = s.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut accepted = 0;
    let mut attempts = 0;
    while accepted < samples {
        attempts += 1;
        if attempts > 20 * samples {
            return Err(format!("only {accepted} simple roots in {attempts} draws"));
        }
        let xi: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let Some((tau, gap)) = simple_root(s, &xi, &mut rng) else { continue };
        let Ok(jet) = root_jet(s, &xi, tau) else { continue };
        let h = 1e-4 * gap.min(1.0);
        let scale = 1.0 + jet.tau.norm() + jet.gradient.norm() + jet.hessian.norm();
        for i in 0..n {
            let jets = [2.0, 1.0, -1.0, -2.0].map(|k| root_jet(s, &shifted(&xi, i, k * h), jet.tau));
            let jets: Vec<_> = jets.into_iter().collect::<Result<_, _>>().map_err(|e| e.to_string())?;
            let at = |f: &dyn Fn(usize) -> Complex64| difference([f(0), f(1), f(2), f(3)], h);
            let err = (at(&|k| jets[k].tau) - jet.gradient[i]).norm();
            if err > 1e-6 * scale {
                return Err(format!("xi = {xi:?}: d{i} off by {err:.2e}"));
            }
            for j in 0..n {
                let err = (at(&|k| jets[k].gradient[j]) - jet.hessian[(i, j)]).norm();
                if err > 1e-6 * scale {
                    return Err(format!("xi = {xi:?}: d{i}d{j} off by {err:.2e}"));
                }
            }
        }
        accepted += 1;
    }
    Ok(())
}

/// Near the double root of the dissipative wave, every `E_j` stays below
/// `C (1 + t) e^{-t/2}` with `C` the size of the kernel row at `t = 0`.
pub fn check_multiplicity_bound(times: &[f64]) -> Result<(), String> {
    let s = corpus::dissipative_wave(1, 1.0);
    for k in -10..=10 {
        let xi = [0.5 + k as f64 * 1e-7];
        let p = s.evaluate(&xi).unwrap();
        let roots = roots_at(&s, &xi);
        let row = |t: f64| kernel_row(&p, &roots, t, 0).map_err(|e| e.to_string());
        let c = row(0.0)?.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for &t in times {
            let bound = c * (1.0 + t) * (-t / 2.0).exp();
            if let Some(v) = row(t)?.iter().find(|v| v.norm() > bound) {
                return Err(format!("xi = {}, t = {t}: {:.3e} > {bound:.3e}", xi[0], v.norm()));
            }
        }
    }
    Ok(())
}
