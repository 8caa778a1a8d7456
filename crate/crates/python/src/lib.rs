//! Python bindings for `clinchsim`.
//!
//! Rules, races, seasons and datasets are exposed as immutable classes.
//! Experiment reports and validation results come back as plain dicts and
//! lists with the same fields as the JSON output of the command line.

use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList, PyTuple};

use clinchsim::dataset::{builtin_reference, validate_against_reference, HistoryFixture};
use clinchsim::domain::{Dataset, Position, RaceResult, ScoringRule, SeasonOutcome};
use clinchsim::evaluate::{self, Evaluator};
use clinchsim::montecarlo::{self, DatasetSource, ExperimentConfig, DEFAULT_SEED};
use clinchsim::racegen::{enumerate_m2_distribution, generate_season_with, risk_averse_transform, Method, PairDraw};
use clinchsim::scoring::{
    self, format_rational, parse_rational, parse_rule_list, parse_rule_spec, preset_rule, Preset,
};
use clinchsim::{Error, RngStream};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn fraction<'py>(py: Python<'py>, r: &clinchsim::Points) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?
        .getattr("Fraction")?
        .call1((*r.numer(), *r.denom()))
}

fn positions(places: &[Option<u16>]) -> PyResult<Vec<Position>> {
    places.iter().map(|p| Position::try_from(*p).map_err(py_err)).collect()
}

fn parse_method(method: u8) -> PyResult<Method> {
    method.to_string().parse().map_err(py_err)
}

fn parse_pair(pair_draw: &str) -> PyResult<PairDraw> {
    pair_draw.parse().map_err(py_err)
}

/// A positional scoring rule, built from a spec such as `S4`, `G:1.3` or
/// `V:10,5,1`.
#[pyclass(name = "ScoringRule", module = "clinchsim_py", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyScoringRule(ScoringRule);

#[pymethods]
impl PyScoringRule {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        parse_rule_spec(spec).map(PyScoringRule).map_err(py_err)
    }

    /// Geometric rule with parameter `p`, given as a number or a string such
    /// as `"1.05"` or `"21/20"`.
    #[staticmethod]
    #[pyo3(signature = (p, places = 10))]
    fn geometric(p: &Bound<'_, PyAny>, places: usize) -> PyResult<Self> {
        let text = p.str()?.to_string();
        let p = parse_rational(&text).map_err(py_err)?;
        scoring::geometric_rule(p, places).map(PyScoringRule).map_err(py_err)
    }

    /// All rule specs in a comma-separated list.
    #[staticmethod]
    fn parse_list(specs: &str) -> PyResult<Vec<Self>> {
        Ok(parse_rule_list(specs)
            .map_err(py_err)?
            .into_iter()
            .map(PyScoringRule)
            .collect())
    }

    #[staticmethod]
    fn presets() -> Vec<String> {
        Preset::ALL.iter().map(|p| p.name().to_string()).collect()
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name().to_string()
    }

    #[getter]
    fn scores(&self) -> Vec<f64> {
        self.0.scores_f64()
    }

    /// Exact scores as `fractions.Fraction`.
    fn exact_scores<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyAny>>> {
        self.0.scores().iter().map(|s| fraction(py, s)).collect()
    }

    #[getter]
    fn geometric_p(&self) -> Option<String> {
        self.0.geometric_p().map(|p| format_rational(&p))
    }

    fn normalized(&self) -> Vec<f64> {
        scoring::normalize_to_100(&self.0)
            .iter()
            .map(|r| *r.numer() as f64 / *r.denom() as f64)
            .collect()
    }

    /// Points for a place (`None` for unclassified).
    #[pyo3(signature = (place))]
    fn points_for(&self, place: Option<u16>) -> PyResult<f64> {
        let pos = Position::try_from(place).map_err(py_err)?;
        let p = scoring::points_for(&self.0, pos);
        Ok(*p.numer() as f64 / *p.denom() as f64)
    }

    fn __len__(&self) -> usize {
        self.0.places()
    }

    fn __repr__(&self) -> String {
        format!("ScoringRule({:?})", self.0.name())
    }
}

/// One race: the place of every driver, `None` when unclassified.
#[pyclass(name = "RaceResult", module = "clinchsim_py", frozen, eq, hash, from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyRaceResult(RaceResult);

#[pymethods]
impl PyRaceResult {
    #[new]
    fn new(places: Vec<Option<u16>>) -> PyResult<Self> {
        RaceResult::new(positions(&places)?).map(PyRaceResult).map_err(py_err)
    }

    /// A partial result copied from a table: places may have gaps.
    #[staticmethod]
    fn excerpt(places: Vec<Option<u16>>) -> PyResult<Self> {
        RaceResult::excerpt(positions(&places)?)
            .map(PyRaceResult)
            .map_err(py_err)
    }

    #[getter]
    fn places(&self) -> Vec<Option<u16>> {
        self.0.positions().iter().map(|p| p.place()).collect()
    }

    #[getter]
    fn winner(&self) -> Option<usize> {
        self.0.winner().map(|d| d.rank())
    }

    #[getter]
    fn season(&self) -> Option<u16> {
        self.0.season()
    }

    fn __len__(&self) -> usize {
        self.0.driver_count()
    }

    fn __repr__(&self) -> String {
        format!("RaceResult({})", self.0)
    }
}

/// An ordered list of races over a common set of drivers.
#[pyclass(name = "Season", module = "clinchsim_py", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PySeason(SeasonOutcome);

#[pymethods]
impl PySeason {
    #[new]
    fn new(races: Vec<PyRaceResult>) -> PyResult<Self> {
        SeasonOutcome::new(races.into_iter().map(|r| r.0).collect())
            .map(PySeason)
            .map_err(py_err)
    }

    #[getter]
    fn races(&self) -> Vec<PyRaceResult> {
        self.0.races().iter().cloned().map(PyRaceResult).collect()
    }

    #[getter]
    fn driver_count(&self) -> usize {
        self.0.driver_count()
    }

    /// Points and wins per driver after `up_to` races (default: all).
    #[pyo3(signature = (rule, up_to = None))]
    fn standings<'py>(
        &self,
        py: Python<'py>,
        rule: &PyScoringRule,
        up_to: Option<usize>,
    ) -> PyResult<Bound<'py, PyList>> {
        let rows = evaluate::score_season(&self.0, &rule.0, up_to).map_err(py_err)?;
        let list = PyList::empty(py);
        for r in rows {
            let d = PyDict::new(py);
            d.set_item("driver", r.driver.rank())?;
            d.set_item("points", fraction(py, &r.points)?)?;
            d.set_item("wins", r.wins)?;
            list.append(d)?;
        }
        Ok(list)
    }

    /// Champion, clinch index, uninteresting races and whether the champion
    /// won a race. `seed` only matters when the title is decided by lot.
    #[pyo3(signature = (rule, seed = 0))]
    fn metrics<'py>(&self, py: Python<'py>, rule: &PyScoringRule, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let m = evaluate::season_metrics(&self.0, &rule.0, &mut RngStream::new(seed, 0)).map_err(py_err)?;
        to_py(py, &m)
    }

    fn clinch_index(&self, rule: &PyScoringRule, champion: usize) -> PyResult<usize> {
        let champ = clinchsim::DriverId::new(champion).map_err(py_err)?;
        Evaluator::new(&rule.0)
            .and_then(|e| e.clinch_index(&self.0, champ))
            .map_err(py_err)
    }

    /// The season with every race win of the reference champion turned into
    /// a second place.
    #[pyo3(signature = (reference = None, seed = 0))]
    fn risk_averse(&self, reference: Option<&PyScoringRule>, seed: u64) -> PyResult<Self> {
        let rule = reference.map_or_else(|| preset_rule(Preset::S4), |r| r.0.clone());
        risk_averse_transform(&self.0, &rule, &mut RngStream::new(seed, 0))
            .map(PySeason)
            .map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("Season({} races, {} drivers)", self.0.len(), self.0.driver_count())
    }
}

/// A pool of races to resample from.
#[pyclass(name = "Dataset", module = "clinchsim_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDataset(Dataset);

#[pymethods]
impl PyDataset {
    #[new]
    #[pyo3(signature = (name, races))]
    fn new(name: &str, races: Vec<PyRaceResult>) -> PyResult<Self> {
        Dataset::new(name, races.into_iter().map(|r| r.0).collect(), Vec::new())
            .map(PyDataset)
            .map_err(py_err)
    }

    /// `standard`, `small-margin` or `full`.
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        let which = name.parse().map_err(py_err)?;
        Ok(PyDataset(clinchsim::builtin_dataset(which)))
    }

    #[staticmethod]
    #[pyo3(signature = (path, driver_count = None))]
    fn load(path: PathBuf, driver_count: Option<usize>) -> PyResult<Self> {
        clinchsim::load_dataset(&path, driver_count)
            .map(PyDataset)
            .map_err(py_err)
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name().to_string()
    }

    #[getter]
    fn driver_count(&self) -> usize {
        self.0.driver_count()
    }

    #[getter]
    fn seasons(&self) -> Vec<u16> {
        self.0.seasons().to_vec()
    }

    #[getter]
    fn races(&self) -> Vec<PyRaceResult> {
        self.0.races().iter().cloned().map(PyRaceResult).collect()
    }

    /// A synthetic season of `races` races drawn with method 1 or 2.
    #[pyo3(signature = (races = 20, method = 2, seed = DEFAULT_SEED, stream = 0, pair_draw = "distinct"))]
    fn sample_season(&self, races: usize, method: u8, seed: u64, stream: u64, pair_draw: &str) -> PyResult<PySeason> {
        let mut rng = RngStream::new(seed, stream);
        generate_season_with(&self.0, parse_method(method)?, parse_pair(pair_draw)?, races, &mut rng)
            .map(PySeason)
            .map_err(py_err)
    }

    /// Exact method 2 race distribution as `{places tuple: Fraction}`.
    #[pyo3(signature = (pair_draw = "distinct"))]
    fn m2_distribution<'py>(&self, py: Python<'py>, pair_draw: &str) -> PyResult<Bound<'py, PyDict>> {
        let dist = enumerate_m2_distribution(&self.0, parse_pair(pair_draw)?).map_err(py_err)?;
        let out = PyDict::new(py);
        for (race, p) in &dist {
            let key = PyTuple::new(py, race.places())?;
            out.set_item(key, fraction(py, p)?)?;
        }
        Ok(out)
    }

    fn __len__(&self) -> usize {
        self.0.races().len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset({:?}, {} races, {} drivers)",
            self.0.name(),
            self.0.races().len(),
            self.0.driver_count()
        )
    }
}

#[allow(clippy::too_many_arguments)]
fn config(
    dataset: &str,
    method: u8,
    races: usize,
    reps: u64,
    rules: Option<&str>,
    seed: u64,
    risk_averse: bool,
    reference_rule: &str,
    threads: Option<usize>,
    pair_draw: &str,
) -> PyResult<ExperimentConfig> {
    let mut cfg = ExperimentConfig {
        dataset: DatasetSource::from_arg(dataset),
        method: parse_method(method)?,
        pair_draw: parse_pair(pair_draw)?,
        races_n: races,
        replications: reps,
        risk_averse,
        reference_rule: reference_rule.to_string(),
        master_seed: seed,
        threads,
        ..ExperimentConfig::default()
    };
    if let Some(rules) = rules {
        cfg.rules = parse_rule_list(rules)
            .map_err(py_err)?
            .iter()
            .map(|r| r.name().to_string())
            .collect();
    }
    Ok(cfg)
}

/// Simulates `reps` seasons and returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (dataset = "standard", method = 2, races = 20, reps = 100_000, rules = None, seed = DEFAULT_SEED,
                    risk_averse = true, reference_rule = "S4", threads = None, pair_draw = "distinct"))]
#[allow(clippy::too_many_arguments)]
fn run_experiment<'py>(
    py: Python<'py>,
    dataset: &str,
    method: u8,
    races: usize,
    reps: u64,
    rules: Option<&str>,
    seed: u64,
    risk_averse: bool,
    reference_rule: &str,
    threads: Option<usize>,
    pair_draw: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = config(
        dataset,
        method,
        races,
        reps,
        rules,
        seed,
        risk_averse,
        reference_rule,
        threads,
        pair_draw,
    )?;
    let report = py.detach(|| montecarlo::run_experiment(&cfg)).map_err(py_err)?;
    to_py(py, &report)
}

/// One report per season length in `races_from..=races_to`.
#[pyfunction]
#[pyo3(signature = (races_from = 3, races_to = 20, dataset = "standard", method = 2, reps = 10_000, rules = None,
                    seed = DEFAULT_SEED, risk_averse = true, reference_rule = "S4", threads = None, pair_draw = "distinct"))]
#[allow(clippy::too_many_arguments)]
fn sweep_races<'py>(
    py: Python<'py>,
    races_from: usize,
    races_to: usize,
    dataset: &str,
    method: u8,
    reps: u64,
    rules: Option<&str>,
    seed: u64,
    risk_averse: bool,
    reference_rule: &str,
    threads: Option<usize>,
    pair_draw: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = config(
        dataset,
        method,
        races_from,
        reps,
        rules,
        seed,
        risk_averse,
        reference_rule,
        threads,
        pair_draw,
    )?;
    let reports = py
        .detach(|| montecarlo::sweep_races(&cfg, races_from..=races_to))
        .map_err(py_err)?;
    to_py(py, &reports)
}

/// A bundled historical season (`f1-2002`, `gp125-1999`, `motogp-2020`)
/// with its driver names and the rule used that year.
#[pyfunction]
fn history_fixture(name: &str) -> PyResult<(PySeason, Vec<String>, PyScoringRule)> {
    let f: HistoryFixture = name.parse().map_err(py_err)?;
    Ok((
        PySeason(f.season()),
        f.drivers().iter().map(|s| s.to_string()).collect(),
        PyScoringRule(preset_rule(f.rule())),
    ))
}

/// Compares a bundled pool with the season reference table.
#[pyfunction]
#[pyo3(signature = (dataset = "full"))]
fn validate_dataset<'py>(py: Python<'py>, dataset: &str) -> PyResult<Bound<'py, PyAny>> {
    let ds = DatasetSource::from_arg(dataset).load(None).map_err(py_err)?;
    let reference: Vec<_> = builtin_reference()
        .into_iter()
        .filter(|r| ds.seasons().contains(&r.season))
        .collect();
    to_py(py, &validate_against_reference(&ds, &reference))
}

#[pymodule]
pub fn clinchsim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScoringRule>()?;
    m.add_class::<PyRaceResult>()?;
    m.add_class::<PySeason>()?;
    m.add_class::<PyDataset>()?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_races, m)?)?;
    m.add_function(wrap_pyfunction!(history_fixture, m)?)?;
    m.add_function(wrap_pyfunction!(validate_dataset, m)?)?;
    m.add("DEFAULT_SEED", DEFAULT_SEED)?;
    Ok(())
}
