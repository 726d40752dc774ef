use std::collections::BTreeMap;

use hyperdisp_core::classify::{analyze as classify, ZoneReport};
use hyperdisp_core::predict::{fp_prediction, predict, DecayPrediction, Kappa, LebesguePair, StrongStability};
use hyperdisp_core::propagate::{
    run_decay_experiment, CauchyData, DecayFit, Experiment, FitMode, Measure, PropagatorRun, Window,
};
use hyperdisp_core::symbols::corpus::{self, CorpusEntry};
use hyperdisp_core::symbols::{SymbolFile, SymbolSpec};
use hyperdisp_core::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::config::{JobConfig, MeasureKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionEntry {
    pub pair: LebesguePair,
    pub r: u32,
    pub alpha: u32,
    #[serde(default)]
    pub prediction: Option<DecayPrediction>,
    #[serde(default)]
    pub abstained: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeOutput {
    pub symbol: String,
    pub report: ZoneReport,
    pub predictions: Vec<PredictionEntry>,
    #[serde(default)]
    pub strong_stability: Option<StrongStability>,
}

impl AnalyzeOutput {
    pub fn abstentions(&self) -> usize {
        self.predictions.iter().filter(|p| p.abstained.is_some()).count()
    }
}

fn prediction_entry(report: &ZoneReport, pair: LebesguePair, r: u32, alpha: u32) -> Result<PredictionEntry> {
    let (prediction, abstained) = match predict(report, pair, r, alpha) {
        Ok(p) => (Some(p), None),
        Err(Error::Abstain(why)) => (None, Some(why)),
        Err(e) => return Err(e),
    };
    Ok(PredictionEntry {
        pair,
        r,
        alpha,
        prediction,
        abstained,
    })
}

fn classify_symbol(cfg: &JobConfig, s: &SymbolSpec) -> Result<ZoneReport> {
    let grid = cfg.analysis_grid(s.dimension())?;
    Ok(classify(s, &grid, &cfg.analysis.options)?.1)
}

pub fn analyze(cfg: &JobConfig) -> Result<AnalyzeOutput> {
    let (symbol, s) = cfg.symbol()?;
    let report = classify_symbol(cfg, &s)?;
    let mut predictions = Vec::new();
    for pair in cfg.pairs() {
        predictions.push(prediction_entry(&report, pair, 0, 0)?);
    }
    for e in &cfg.sweep {
        let pair = e.pair.parse().expect("validated");
        let a = e.alpha.iter().sum();
        if !predictions.iter().any(|p| p.pair == pair && p.r == e.r && p.alpha == a) {
            predictions.push(prediction_entry(&report, pair, e.r, a)?);
        }
    }
    let strong_stability = fp_prediction(&report).ok();
    Ok(AnalyzeOutput {
        symbol,
        report,
        predictions,
        strong_stability,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitEntry {
    pub measure: Measure,
    #[serde(default)]
    pub fit: Option<DecayFit>,
    #[serde(default)]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateOutput {
    pub run: PropagatorRun,
    pub fits: Vec<FitEntry>,
}

fn experiment(cfg: &JobConfig, s: &SymbolSpec, r: u32, alpha: Vec<u32>) -> Result<Experiment> {
    let grid = cfg.spectral_grid(s.dimension());
    let data = cfg.simulation.data.clone().unwrap_or_else(|| {
        CauchyData::kernel(
            s.order() - 1,
            Window::Bump {
                radius: 0.8 * grid.radius,
            },
        )
    });
    Ok(Experiment {
        grid,
        data,
        times: cfg.simulation.times.times()?,
        r,
        alpha,
        kernel_index: cfg.simulation.kernel_index,
        measure_kernel: cfg.simulation.measure_kernel,
    })
}

pub fn simulate(cfg: &JobConfig) -> Result<SimulateOutput> {
    let (symbol, s) = cfg.symbol()?;
    let ex = experiment(cfg, &s, cfg.simulation.r, cfg.simulation.alpha.clone())?;
    let run = run_decay_experiment(&symbol, &s, &ex)?;
    let mode = cfg.fit.mode.unwrap_or(FitMode::Power);
    let fits = Measure::ALL
        .iter()
        .filter(|m| m.of(&run.initial).is_some())
        .map(|&measure| match run.fit(measure, cfg.fit.window, mode) {
            Ok(fit) => FitEntry {
                measure,
                fit: Some(fit),
                error: None,
            },
            Err(e) => FitEntry {
                measure,
                fit: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    Ok(SimulateOutput { run, fits })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Match,
    Mismatch,
    Abstained,
}

/// Where a predicted rate comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub zone: Option<usize>,
    pub row: String,
    pub label: Option<usize>,
    pub envelope: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyEntry {
    pub pair: LebesguePair,
    pub r: u32,
    pub alpha: Vec<u32>,
    pub measure: MeasureKind,
    pub kappa: Option<Kappa>,
    /// Predicted power rate, or exponential rate when `mode` is exponential.
    pub predicted: Option<f64>,
    pub measured: Option<f64>,
    pub half_width: Option<f64>,
    pub mode: Option<FitMode>,
    pub verdict: Verdict,
    pub reason: Option<String>,
    pub provenance: Option<Provenance>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub symbol: String,
    pub stable: bool,
    pub tolerance: f64,
    pub half_width_factor: f64,
    pub fit_window: (f64, f64),
    pub entries: Vec<VerifyEntry>,
    pub matches: usize,
    pub mismatches: usize,
    pub abstentions: usize,
}

impl VerifyReport {
    /// `--strict` exit status: 0 all match, 2 any mismatch, 3 abstentions only.
    pub fn strict_exit_code(&self) -> i32 {
        if self.mismatches > 0 {
            2
        } else if self.abstentions > 0 {
            3
        } else {
            0
        }
    }
}

fn measure_for(pair: &LebesguePair, kind: MeasureKind) -> Option<Measure> {
    let l1 = LebesguePair::l1_linf();
    let l2 = LebesguePair::l2_l2();
    match kind {
        MeasureKind::Kernel if *pair == l1 => Some(Measure::KernelSup),
        MeasureKind::Kernel if *pair == l2 => Some(Measure::KernelMultiplier),
        MeasureKind::Solution if *pair == l1 => Some(Measure::SolutionSup),
        MeasureKind::Solution if *pair == l2 => Some(Measure::SolutionL2),
        _ => None,
    }
}

fn abstained(
    pair: LebesguePair,
    r: u32,
    alpha: Vec<u32>,
    measure: MeasureKind,
    reason: String,
    kappa: Option<Kappa>,
) -> VerifyEntry {
    VerifyEntry {
        pair,
        r,
        alpha,
        measure,
        kappa,
        predicted: None,
        measured: None,
        half_width: None,
        mode: None,
        verdict: Verdict::Abstained,
        reason: Some(reason),
        provenance: None,
    }
}

pub fn verify(cfg: &JobConfig) -> Result<VerifyReport> {
    let (symbol, s) = cfg.symbol()?;
    let report = classify_symbol(cfg, &s)?;
    let sweep = if cfg.sweep.is_empty() {
        vec![crate::config::SweepEntry {
            pair: "1,inf".into(),
            r: 0,
            alpha: vec![],
            measure: MeasureKind::Kernel,
        }]
    } else {
        cfg.sweep.clone()
    };
    let tol = &cfg.tolerances;
    let mut runs: BTreeMap<(u32, Vec<u32>), PropagatorRun> = BTreeMap::new();
    let mut entries = Vec::new();
    for e in &sweep {
        let pair: LebesguePair = e.pair.parse().expect("validated");
        let order: u32 = e.alpha.iter().sum();
        let prediction = match predict(&report, pair, e.r, order) {
            Ok(p) => p,
            Err(Error::Abstain(why)) => {
                entries.push(abstained(pair, e.r, e.alpha.clone(), e.measure, why, None));
                continue;
            }
            Err(err) => return Err(err),
        };
        let Some(measure) = measure_for(&pair, e.measure) else {
            entries.push(abstained(
                pair,
                e.r,
                e.alpha.clone(),
                e.measure,
                format!("no {:?} measurement for {pair}", e.measure).to_lowercase(),
                Some(prediction.kappa),
            ));
            continue;
        };
        let key = (e.r, e.alpha.clone());
        if !runs.contains_key(&key) {
            let ex = experiment(cfg, &s, e.r, e.alpha.clone())?;
            runs.insert(key.clone(), run_decay_experiment(&symbol, &s, &ex)?);
        }
        let run = &runs[&key];
        let (mode, predicted) = match prediction.kappa {
            Kappa::Finite(k) => (FitMode::Power, *k.numer() as f64 / *k.denom() as f64),
            Kappa::Infinite => (FitMode::Exponential, prediction.k.delta),
        };
        let mode = cfg.fit.mode.unwrap_or(mode);
        let provenance = Some(Provenance {
            zone: prediction.k.zone,
            row: format!("{:?}", prediction.k.row),
            label: prediction.k.label,
            envelope: prediction.k.describe(),
        });
        let fit = match run.fit(measure, cfg.fit.window, mode) {
            Ok(f) => f,
            Err(err) => {
                let mut a = abstained(pair, e.r, e.alpha.clone(), e.measure, err.to_string(), Some(prediction.kappa));
                a.provenance = provenance;
                entries.push(a);
                continue;
            }
        };
        let allowed = tol.match_abs.max(tol.half_width_factor * fit.half_width);
        let verdict = if (predicted - fit.exponent).abs() <= allowed {
            Verdict::Match
        } else {
            Verdict::Mismatch
        };
        entries.push(VerifyEntry {
            pair,
            r: e.r,
            alpha: e.alpha.clone(),
            measure: e.measure,
            kappa: Some(prediction.kappa),
            predicted: Some(predicted),
            measured: Some(fit.exponent),
            half_width: Some(fit.half_width),
            mode: Some(mode),
            verdict,
            reason: fit.low_confidence.then(|| "low confidence: non-monotone tail".to_string()),
            provenance,
        });
    }
    let count = |v: Verdict| entries.iter().filter(|e| e.verdict == v).count();
    Ok(VerifyReport {
        symbol,
        stable: report.stable(),
        tolerance: tol.match_abs,
        half_width_factor: tol.half_width_factor,
        fit_window: cfg.fit.window,
        matches: count(Verdict::Match),
        mismatches: count(Verdict::Mismatch),
        abstentions: count(Verdict::Abstained),
        entries,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusShow {
    #[serde(flatten)]
    pub entry: CorpusEntry,
    pub homogeneous: bool,
    pub symbol: SymbolFile,
}

pub fn corpus_list() -> Vec<CorpusEntry> {
    corpus::list()
}

pub fn corpus_show(name: &str) -> Result<CorpusShow> {
    let entry = corpus::entry(name)?;
    let s = corpus::symbol(name)?;
    Ok(CorpusShow {
        entry,
        homogeneous: s.is_homogeneous(),
        symbol: SymbolFile::from_spec(&s),
    })
}
