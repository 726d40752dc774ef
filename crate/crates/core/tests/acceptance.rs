mod common;

use std::process::ExitCode;
use std::time::Instant;

use hyperdisp_core::classify::{AxisKind, ContactOrder, HessianKind, ZoneKind, ZoneReport};
use hyperdisp_core::predict::{fp_prediction, predict, rat, Kappa, LebesguePair};
use hyperdisp_core::propagate::{
    geometric_ladder, run_decay_experiment, CauchyData, Experiment, FitMode, Measure, Profile,
    SpectralGrid, Window,
};
use hyperdisp_core::roots::{root_jet, FrequencyGrid};
use hyperdisp_core::symbols::{corpus, fokker_planck_symbol, SymbolSpec};
use num_complex::Complex64;

use common::{
    analysis_grid, check_contact_orders, check_coverage, check_interpolation, check_jets,
    check_multiplicity_bound, corpus_report, oracle_agreement, report_on,
};

const FIT_WINDOW: (f64, f64) = (20.0, 400.0);
const RATE_TOL: f64 = 0.15;
const DERIVATIVE_RATE_TOL: f64 = 0.20;
const NEGATIVE_MASS_TOL: f64 = 0.20;
const HESSIAN_M_TOL: f64 = 0.3;
const ORACLE_FRACTION: f64 = 0.999;
const FP_RATIO_TOL: f64 = 0.05;
const FP_SECOND_DERIVATIVE_TOL: f64 = 1e-6;
const FP_EPSILON: (f64, f64) = (0.45, 0.55);
const LIMIT_1D_SECONDS: f64 = 60.0;
const LIMIT_2D_SECONDS: f64 = 120.0;

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ladder() -> Vec<f64> {
    geometric_ladder(1.0, 400.0, 24).unwrap()
}

fn experiment(grid: SpectralGrid, data: CauchyData, r: u32) -> Experiment {
    Experiment {
        measure_kernel: data.exclusion_radius.is_none(),
        grid,
        data,
        times: ladder(),
        r,
        alpha: vec![],
        kernel_index: None,
    }
}

fn fitted(name: &str, s: &SymbolSpec, ex: &Experiment, m: Measure) -> Result<f64, String> {
    let run = run_decay_experiment(name, s, ex).map_err(|e| e.to_string())?;
    let fit = run.fit(m, FIT_WINDOW, FitMode::Power).map_err(|e| e.to_string())?;
    Ok(fit.exponent)
}

fn timed_rate(
    name: &str,
    s: &SymbolSpec,
    ex: &Experiment,
    m: Measure,
    target: f64,
    tol: f64,
    limit: f64,
) -> Outcome {
    let start = Instant::now();
    let rate = fitted(name, s, ex, m)?;
    let secs = start.elapsed().as_secs_f64();
    ensure(
        (rate - target).abs() <= tol && secs < limit,
        format!("exponent {rate:.4} (target {target} +/- {tol}), {secs:.1} s (limit {limit} s)"),
    )
}

fn grid_1d(count: usize, radius: f64) -> SpectralGrid {
    SpectralGrid::new(1, count, radius).unwrap()
}

fn klein_gordon_kernel() -> Outcome {
    let ex = experiment(grid_1d(1 << 14, 64.0), CauchyData::kernel(1, Window::Bump { radius: 2.0 }), 0);
    let s = corpus::klein_gordon(1, 1.0);
    timed_rate("kg_1d", &s, &ex, Measure::KernelSup, 0.5, RATE_TOL, LIMIT_1D_SECONDS)
}

fn wave_2d_kernel() -> Outcome {
    let grid = SpectralGrid::new(2, 1024, 3.2).unwrap();
    let ex = experiment(grid, CauchyData::kernel(1, Window::Bump { radius: 2.5 }), 0);
    timed_rate("wave_2d", &corpus::wave(2), &ex, Measure::KernelSup, 0.5, RATE_TOL, LIMIT_2D_SECONDS)
}

fn dissipative_solution() -> Outcome {
    let start = Instant::now();
    let s = corpus::dissipative_wave(1, 1.0);
    let data = CauchyData::single(0, Profile::Gaussian { sigma: 1.0 });
    let r0 = fitted("dissipative_wave_1d", &s, &experiment(grid_1d(1 << 14, 64.0), data.clone(), 0), Measure::SolutionSup)?;
    let r1 = fitted("dissipative_wave_1d", &s, &experiment(grid_1d(1 << 14, 64.0), data, 1), Measure::SolutionSup)?;
    let secs = start.elapsed().as_secs_f64();
    ensure(
        (r0 - 0.5).abs() <= RATE_TOL && (r1 - 1.5).abs() <= DERIVATIVE_RATE_TOL && secs < LIMIT_1D_SECONDS,
        format!(
            "exponent {r0:.4} (target 0.5 +/- {RATE_TOL}), with d/dt {r1:.4} (target 1.5 +/- {DERIVATIVE_RATE_TOL}), {secs:.1} s"
        ),
    )
}

fn negative_mass() -> Outcome {
    let data = CauchyData {
        profiles: vec![Profile::Gaussian { sigma: 1.0 }],
        window: Window::None,
        exclusion_radius: Some(1.0),
    };
    let ex = experiment(grid_1d(1 << 18, 4.0), data, 0);
    let s = corpus::negative_mass_wave(1.0, 1.0, -1.0);
    timed_rate("negative_mass_1d", &s, &ex, Measure::SolutionSup, 1.0, NEGATIVE_MASS_TOL, LIMIT_1D_SECONDS)
}

fn contact_gammas(r: &ZoneReport) -> Vec<(ContactOrder, ContactOrder)> {
    r.zones
        .iter()
        .flat_map(|z| &z.roots)
        .filter_map(|rc| rc.contact.as_ref().map(|c| (c.gamma, c.gamma0)))
        .collect()
}

fn classification_fixed_points() -> Outcome {
    let mut notes = Vec::new();

    let d = corpus_report("dissipative_wave_1d");
    let contact = d.zones.iter().flat_map(|z| &z.roots).find_map(|rc| match &rc.axis.kind {
        AxisKind::MeetsFiniteOrder { s, s1, contact, .. } if contact.at_origin => Some((*s, *s1)),
        _ => None,
    });
    if contact != Some((2, Some(2))) {
        return Err(format!("dissipative wave contact {contact:?}, want s = s1 = 2"));
    }
    let ring = d.multiplicities.iter().any(|m| {
        m.multiplicity == 2 && m.points.iter().all(|p| (p[0].abs() - 0.5).abs() <= d.grid_step)
    });
    if !ring {
        return Err("dissipative wave: no double root at |xi| = 1/2".into());
    }
    notes.push("dissipative s=2 s1=2, L=2 at |xi|=1/2".to_string());

    for n in [1, 2] {
        let r = corpus_report(if n == 1 { "kg_1d" } else { "kg_2d" });
        let ms: Vec<f64> = r
            .zones
            .iter()
            .filter(|z| z.kind == ZoneKind::Large)
            .flat_map(|z| &z.roots)
            .filter_map(|rc| match rc.hessian.as_ref().map(|h| &h.kind) {
                Some(HessianKind::NonDegenerate { m_exponent }) => *m_exponent,
                _ => None,
            })
            .collect();
        let want = n as f64 + 2.0;
        if ms.len() != 2 || ms.iter().any(|m| (m - want).abs() > HESSIAN_M_TOL) {
            return Err(format!("Klein-Gordon n={n}: M = {ms:?}, want {want} +/- {HESSIAN_M_TOL}"));
        }
        notes.push(format!("KG n={n} M={:.2}", ms[0]));
    }

    for name in ["wave_2d", "wave_3d"] {
        let g = contact_gammas(&corpus_report(name));
        let two = ContactOrder::Finite(2);
        if g.is_empty() || g.iter().any(|&(a, b)| a != two || b != two) {
            return Err(format!("{name}: (gamma, gamma0) = {g:?}, want (2, 2)"));
        }
    }
    notes.push("wave gamma=gamma0=2".into());

    let g = contact_gammas(&corpus_report("quartic_2d"));
    if g.is_empty() || g.iter().any(|&(a, _)| a != ContactOrder::Finite(4)) {
        return Err(format!("quartic: gamma = {g:?}, want 4"));
    }
    notes.push("quartic gamma=4".into());
    Ok(notes.join(", "))
}

fn oracle_equivalence() -> Outcome {
    let mut worst = 1.0f64;
    for name in ["kg_2d", "dissipative_wave_1d", "fp_1_2"] {
        let s = corpus::symbol(name).unwrap();
        for t in [0.1, 1.0, 10.0] {
            let (agree, eligible) = oracle_agreement(&s, t);
            if eligible == 0 {
                return Err(format!("{name}: no eligible nodes"));
            }
            worst = worst.min(agree as f64 / eligible as f64);
        }
    }
    ensure(
        worst >= ORACLE_FRACTION,
        format!("worst agreement fraction {worst:.5} over 3 symbols x 3 times (need {ORACLE_FRACTION})"),
    )
}

fn jet_correctness() -> Outcome {
    let mut count = 0;
    for name in corpus::names() {
        let s = corpus::symbol(name).unwrap();
        check_jets(&s, 100, 11).map_err(|e| format!("{name}: {e}"))?;
        count += 1;
    }
    Ok(format!("100 samples on each of {count} corpus symbols within 1e-6"))
}

fn fokker_planck() -> Outcome {
    let (_, s) = fokker_planck_symbol(1, 1).map_err(|e| e.to_string())?;
    for x in [0.0, 0.5, 1.0, 3.0] {
        let p = s.evaluate(&[x]).map_err(|e| e.to_string())?;
        let want = [Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0), Complex64::new(-x * x, 0.0)];
        if p.coeffs() != want {
            return Err(format!("symbol at xi = {x}: {:?}", p.coeffs()));
        }
    }
    let xi = 1e-3;
    let lower = common::roots_at(&s, &[xi])
        .into_iter()
        .min_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap();
    let ratio = lower.im / (xi * xi);
    let jet = root_jet(&s, &[0.0], Complex64::default()).map_err(|e| e.to_string())?;
    let second = jet.hessian[(0, 0)];
    let r = report_on(&s, &FrequencyGrid::cube(1, 16.0, 3201).unwrap());
    let fp = fp_prediction(&r).map_err(|e| e.to_string())?;
    ensure(
        (ratio - 1.0).abs() <= FP_RATIO_TOL
            && (second - Complex64::new(0.0, 2.0)).norm() <= FP_SECOND_DERIVATIVE_TOL
            && fp.polynomial_rate == rat(-1, 2)
            && (FP_EPSILON.0..=FP_EPSILON.1).contains(&fp.epsilon),
        format!(
            "Im tau/xi^2 = {ratio:.4}, tau''(0) = {second:.7}, K(t) = {}",
            fp.envelope
        ),
    )
}

fn kappa_1inf(name: &str) -> Result<Kappa, String> {
    predict(&corpus_report(name), LebesguePair::l1_linf(), 0, 0)
        .map(|p| p.kappa)
        .map_err(|e| format!("{name}: {e}"))
}

fn table_totality() -> Outcome {
    let expected = [
        ("wave_2d", rat(1, 2)),
        ("wave_3d", rat(1, 1)),
        ("kg_1d", rat(1, 2)),
        ("kg_2d", rat(1, 1)),
        ("dissipative_wave_1d", rat(1, 2)),
        ("dissipative_wave_2d", rat(1, 1)),
    ];
    for (name, want) in expected {
        let got = kappa_1inf(name)?;
        if got != Kappa::Finite(want) {
            return Err(format!("{name}: kappa {got}, want {want}"));
        }
    }
    let kg = predict(&corpus_report("kg_1d"), LebesguePair::l1_linf(), 0, 0).unwrap();
    let st = kg.strichartz.ok_or("no Strichartz pair")?;
    if (st.q.as_deref(), st.q_prime.as_deref()) != (Some("4/3"), Some("4")) {
        return Err(format!("Strichartz pair {:?}, want (4/3, 4)", (st.q, st.q_prime)));
    }
    let mut checked = 0;
    for name in corpus::names() {
        let r = corpus_report(name);
        check_coverage(&r, analysis_grid(r.dimension).len()).map_err(|e| format!("{name}: {e}"))?;
        check_contact_orders(&r).map_err(|e| format!("{name}: {e}"))?;
        checked += 1;
    }
    for name in ["wave_2d", "wave_3d", "kg_1d", "kg_2d", "dissipative_wave_1d", "fp_1_1"] {
        check_interpolation(&corpus_report(name)).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(format!(
        "6 headline rates exact, Strichartz (4/3, 4), coverage and contact orders on {checked} symbols, interpolation on 6"
    ))
}

fn multiplicity_resolution() -> Outcome {
    check_multiplicity_bound(&[1.0, 10.0, 100.0])?;
    Ok("|E_j| <= C (1 + t) e^(-t/2) at t = 1, 10, 100 within 1e-6 of the double root".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("Klein-Gordon n=1 kernel decay", klein_gordon_kernel),
        ("wave n=2 kernel decay", wave_2d_kernel),
        ("dissipative wave n=1 solution decay", dissipative_solution),
        ("negative-mass wave, spectrally cut data", negative_mass),
        ("classification fixed points", classification_fixed_points),
        ("Vandermonde vs matrix exponential", oracle_equivalence),
        ("root jets vs finite differences", jet_correctness),
        ("Fokker-Planck N=1 n=1", fokker_planck),
        ("table totality and headline rates", table_totality),
        ("multiplicity resolution", multiplicity_resolution),
    ];
    let mut failed = 0;
    for (i, (title, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {title}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {title}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
