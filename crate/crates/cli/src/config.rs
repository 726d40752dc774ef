use std::path::{Path, PathBuf};

use hyperdisp_core::classify::AnalysisOptions;
use hyperdisp_core::predict::LebesguePair;
use hyperdisp_core::propagate::{geometric_ladder, CauchyData, FitMode, SpectralGrid};
use hyperdisp_core::roots::{Axis, FrequencyGrid};
use hyperdisp_core::symbols::config::TermEntry;
use hyperdisp_core::symbols::{
    corpus, fokker_planck_symbol, system_dispersion, MonomialPoly, SymbolFile, SymbolSpec, SystemMatrix,
};
use hyperdisp_core::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SymbolSource {
    Corpus(String),
    Inline(SymbolFile),
    /// Path to a symbol file, relative to the config file.
    File(PathBuf),
    System(SystemEntry),
    FokkerPlanck { level: usize, dimension: usize },
}

/// `D_t U = A(D_x) U` with entries of degree at most one in `xi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemEntry {
    pub dimension: usize,
    pub entries: Vec<Vec<Vec<TermEntry>>>,
}

/// Frequency grid for the classification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridSpec {
    Cube { radius: f64, count: usize },
    Polar { radius: f64, radial_count: usize, directions: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub options: AnalysisOptions,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    /// Norms of the kernel for `f_j = delta`.
    #[default]
    Kernel,
    /// Norms of the solution for the configured data.
    Solution,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepEntry {
    /// `"p,q"`, e.g. `"1,inf"`.
    pub pair: String,
    #[serde(default)]
    pub r: u32,
    /// Space multi-index; empty for none.
    #[serde(default)]
    pub alpha: Vec<u32>,
    #[serde(default)]
    pub measure: MeasureKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeSpec {
    List(Vec<f64>),
    Ladder { start: f64, end: f64, count: usize },
}

impl Default for TimeSpec {
    fn default() -> Self {
        TimeSpec::Ladder {
            start: 1.0,
            end: 400.0,
            count: 24,
        }
    }
}

impl TimeSpec {
    pub fn times(&self) -> Result<Vec<f64>> {
        match self {
            TimeSpec::List(t) => {
                if t.is_empty() || t.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
                    return Err(config_error("simulation.times", "times must be finite, non-negative and non-empty"));
                }
                Ok(t.clone())
            }
            TimeSpec::Ladder { start, end, count } => geometric_ladder(*start, *end, *count)
                .map_err(|e| config_error("simulation.times", &e.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(default)]
    pub grid: Option<SpectralGrid>,
    /// Defaults to the kernel data `f_{m-1} = delta` under a bump window of
    /// radius `0.8 R`.
    #[serde(default)]
    pub data: Option<CauchyData>,
    #[serde(default)]
    pub times: TimeSpec,
    #[serde(default)]
    pub kernel_index: Option<usize>,
    #[serde(default = "yes")]
    pub measure_kernel: bool,
    /// Derivatives for `simulate`; `verify` takes them from the sweep.
    #[serde(default)]
    pub r: u32,
    #[serde(default)]
    pub alpha: Vec<u32>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            grid: None,
            data: None,
            times: TimeSpec::default(),
            kernel_index: None,
            measure_kernel: true,
            r: 0,
            alpha: vec![],
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    #[serde(default = "default_window")]
    pub window: (f64, f64),
    /// Forces the fit mode; by default power laws are fitted for finite
    /// predicted rates and exponentials otherwise.
    #[serde(default)]
    pub mode: Option<FitMode>,
}

fn default_window() -> (f64, f64) {
    (20.0, 400.0)
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            window: default_window(),
            mode: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Absolute exponent tolerance, in `(0, 1]`.
    #[serde(default = "default_match_abs")]
    pub match_abs: f64,
    /// Multiple of the fit half-width, in `[0, 10]`.
    #[serde(default = "default_hw_factor")]
    pub half_width_factor: f64,
}

fn default_match_abs() -> f64 {
    0.15
}

fn default_hw_factor() -> f64 {
    2.0
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            match_abs: default_match_abs(),
            half_width_factor: default_hw_factor(),
        }
    }
}

fn default_pairs() -> Vec<String> {
    vec!["1,inf".into(), "2,2".into(), "4/3,4".into()]
}

/// One config file drives every command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub symbol: SymbolSource,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    /// Pairs reported by `analyze` without derivatives.
    #[serde(default = "default_pairs")]
    pub pairs: Vec<String>,
    /// Entries predicted by `analyze` and checked by `verify`.
    #[serde(default)]
    pub sweep: Vec<SweepEntry>,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Directory of the config file; relative paths resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

pub fn config_error(path: &str, message: &str) -> Error {
    Error::Config {
        path: path.to_string(),
        message: message.to_string(),
    }
}

/// Parses a config, reporting the JSON path of the first schema error.
pub fn parse_config(text: &str) -> Result<JobConfig> {
    let mut de = serde_json::Deserializer::from_str(text);
    let cfg: JobConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Config {
            path: if path == "." { "<root>".into() } else { path },
            message: inner.to_string(),
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<JobConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut cfg = parse_config(&text)?;
    cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(cfg)
}

impl JobConfig {
    pub fn validate(&self) -> Result<()> {
        if let SymbolSource::Corpus(name) = &self.symbol {
            if !corpus::names().any(|n| n == name) {
                return Err(config_error("symbol.corpus", &format!("unknown corpus entry `{name}`")));
            }
        }
        for (i, p) in self.pairs.iter().enumerate() {
            p.parse::<LebesguePair>()
                .map_err(|e| config_error(&format!("pairs[{i}]"), &e.to_string()))?;
        }
        for (i, s) in self.sweep.iter().enumerate() {
            s.pair
                .parse::<LebesguePair>()
                .map_err(|e| config_error(&format!("sweep[{i}].pair"), &e.to_string()))?;
        }
        let t = &self.tolerances;
        if !(t.match_abs > 0.0 && t.match_abs <= 1.0) {
            return Err(config_error("tolerances.match_abs", "must lie in (0, 1]"));
        }
        if !(0.0..=10.0).contains(&t.half_width_factor) {
            return Err(config_error("tolerances.half_width_factor", "must lie in [0, 10]"));
        }
        let (a, b) = self.fit.window;
        if !(a > 0.0 && b > a && b.is_finite()) {
            return Err(config_error("fit.window", "need 0 < start < end"));
        }
        self.simulation.times.times()?;
        if let Some(g) = &self.simulation.grid {
            g.validate()
                .map_err(|e| config_error("simulation.grid", &e.to_string()))?;
        }
        match &self.analysis.grid {
            Some(GridSpec::Cube { radius, count }) if !(*radius > 0.0) || *count < 3 => {
                return Err(config_error("analysis.grid", "cube grids need radius > 0 and count >= 3"));
            }
            Some(GridSpec::Polar {
                radius,
                radial_count,
                directions,
            }) if !(*radius > 0.0) || *radial_count < 3 || *directions < 3 => {
                return Err(config_error(
                    "analysis.grid",
                    "polar grids need radius > 0, radial_count >= 3 and directions >= 3",
                ));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn pairs(&self) -> Vec<LebesguePair> {
        self.pairs.iter().map(|p| p.parse().expect("validated")).collect()
    }

    /// Symbol id and symbol.
    pub fn symbol(&self) -> Result<(String, SymbolSpec)> {
        let named = |id: String| self.name.clone().unwrap_or(id);
        match &self.symbol {
            SymbolSource::Corpus(name) => Ok((named(name.clone()), corpus::symbol(name)?)),
            SymbolSource::Inline(f) => Ok((named("inline".into()), f.to_spec()?)),
            SymbolSource::File(p) => {
                let path = self.base_dir.join(p);
                let text = std::fs::read_to_string(&path).map_err(|e| Error::Config {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
                let mut de = serde_json::Deserializer::from_str(&text);
                let f: SymbolFile = serde_path_to_error::deserialize(&mut de).map_err(|e| Error::Config {
                    path: format!("{}: {}", path.display(), e.path()),
                    message: e.into_inner().to_string(),
                })?;
                Ok((named(p.display().to_string()), f.to_spec()?))
            }
            SymbolSource::System(sys) => {
                let entries = sys
                    .entries
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|terms| {
                                MonomialPoly::from_terms(
                                    sys.dimension,
                                    terms.iter().map(|t| (t.alpha.clone(), Complex64::new(t.re, t.im))),
                                )
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                let a = SystemMatrix::new(sys.dimension, entries)?;
                Ok((named("system".into()), system_dispersion(&a)?))
            }
            SymbolSource::FokkerPlanck { level, dimension } => Ok((
                named(format!("fp_{level}_{dimension}")),
                fokker_planck_symbol(*level, *dimension)?.1,
            )),
        }
    }

    /// Classification grid, with per-dimension defaults.
    pub fn analysis_grid(&self, n: usize) -> Result<FrequencyGrid> {
        match &self.analysis.grid {
            Some(GridSpec::Cube { radius, count }) => FrequencyGrid::cube(n, *radius, *count),
            Some(GridSpec::Polar {
                radius,
                radial_count,
                directions,
            }) => FrequencyGrid::polar(Axis::new(0.0, *radius, *radial_count)?, *directions),
            None => match n {
                1 => FrequencyGrid::cube(1, 8.0, 1601),
                2 => FrequencyGrid::cube(2, 3.0, 121),
                _ => FrequencyGrid::cube(n, 3.0, 25),
            },
        }
    }

    pub fn spectral_grid(&self, n: usize) -> SpectralGrid {
        self.simulation
            .grid
            .clone()
            .unwrap_or_else(|| SpectralGrid::default_for(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_and_defaults() {
        let cfg = parse_config(r#"{"symbol": {"corpus": "kg_1d"}}"#).unwrap();
        assert_eq!(cfg.pairs.len(), 3);
        assert_eq!(cfg.fit.window, (20.0, 400.0));
        assert_eq!(cfg.simulation.times.times().unwrap().len(), 24);
        let (id, s) = cfg.symbol().unwrap();
        assert_eq!(id, "kg_1d");
        assert_eq!(s.order(), 2);
    }

    #[test]
    fn errors_carry_paths() {
        match parse_config(r#"{"symbol": {"corpus": "kg_1d"}, "fit": {"window": [20, "x"]}}"#) {
            Err(Error::Config { path, .. }) => assert!(path.starts_with("fit.window"), "{path}"),
            other => panic!("{other:?}"),
        }
        match parse_config(r#"{"symbol": {"corpus": "nope"}}"#) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "symbol.corpus"),
            other => panic!("{other:?}"),
        }
        match parse_config(r#"{"symbol": {"corpus": "kg_1d"}, "tolerances": {"match_abs": 5}}"#) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "tolerances.match_abs"),
            other => panic!("{other:?}"),
        }
        match parse_config(r#"{"symbol": {"corpus": "kg_1d"}, "bogus": 1}"#) {
            Err(Error::Config { message, .. }) => assert!(message.contains("bogus")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn system_source() {
        // D_t U = [[0, xi], [xi, 0]] U gives tau^2 - xi^2.
        let cfg = parse_config(
            r#"{"symbol": {"system": {"dimension": 1, "entries": [
                [[], [{"alpha": [1], "re": 1}]],
                [[{"alpha": [1], "re": 1}], []]
            ]}}}"#,
        )
        .unwrap();
        let (_, s) = cfg.symbol().unwrap();
        let p = s.evaluate(&[2.0]).unwrap();
        assert!((p.coeff(2) - Complex64::new(-4.0, 0.0)).norm() < 1e-14);
        assert!(p.coeff(1).norm() < 1e-14);
    }
}
