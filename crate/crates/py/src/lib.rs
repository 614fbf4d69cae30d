//! Python bindings for `ded-core`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ded_core::error::DedError;
use ded_core::io;
use ded_core::linearize::{self, approx_error_report, default_samples};
use ded_core::milp::{build_milp, extract_solution};
use ded_core::model::{self, optimality_gap, schedule_cost, validate_schedule};
use ded_core::oracle::{self, enumerate_solve, TinyLimits};
use ded_core::solver::{self, BranchingRule, NodeSelection, SolverConfig};

fn err(e: DedError) -> PyErr {
    match e {
        DedError::EnumerationCap { .. } | DedError::Numerical(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// One thermal unit with a rippled quadratic cost curve.
#[pyclass(name = "GeneratorUnit", from_py_object)]
#[derive(Clone)]
pub struct PyUnit {
    inner: model::GeneratorUnit,
}

#[pymethods]
impl PyUnit {
    #[new]
    #[pyo3(signature = (alpha, beta, gamma, e, f, p_min, p_max, ramp_down, ramp_up, initial_power=None, id=0))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        alpha: f64,
        beta: f64,
        gamma: f64,
        e: f64,
        f: f64,
        p_min: f64,
        p_max: f64,
        ramp_down: f64,
        ramp_up: f64,
        initial_power: Option<f64>,
        id: usize,
    ) -> PyResult<Self> {
        let inner = model::GeneratorUnit {
            id,
            alpha,
            beta,
            gamma,
            e,
            f,
            p_min,
            p_max,
            ramp_down,
            ramp_up,
            initial_power,
        };
        inner.validate().map_err(err)?;
        Ok(PyUnit { inner })
    }

    #[getter]
    fn id(&self) -> usize {
        self.inner.id
    }
    #[getter]
    fn p_min(&self) -> f64 {
        self.inner.p_min
    }
    #[getter]
    fn p_max(&self) -> f64 {
        self.inner.p_max
    }

    fn true_cost(&self, p: f64) -> PyResult<f64> {
        self.inner.true_cost(p).map_err(err)
    }

    fn quadratic_cost(&self, p: f64) -> PyResult<f64> {
        self.inner.quadratic_cost(p).map_err(err)
    }

    fn vpe_cost(&self, p: f64) -> PyResult<f64> {
        self.inner.vpe_cost(p).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "GeneratorUnit(id={}, p_min={}, p_max={})",
            self.inner.id, self.inner.p_min, self.inner.p_max
        )
    }
}

/// Piecewise-linear cost of one unit.
#[pyclass(name = "PiecewiseCost", from_py_object)]
#[derive(Clone)]
pub struct PyPiecewise {
    inner: linearize::PiecewiseCost,
}

#[pymethods]
impl PyPiecewise {
    #[getter]
    fn num_segments(&self) -> usize {
        self.inner.num_segments
    }
    #[getter]
    fn breakpoints(&self) -> Vec<f64> {
        self.inner.breakpoints.clone()
    }
    #[getter]
    fn slopes(&self) -> Vec<f64> {
        self.inner.slopes.clone()
    }
    #[getter]
    fn intercepts(&self) -> Vec<f64> {
        self.inner.intercepts.clone()
    }

    fn approx_cost(&self, p: f64) -> PyResult<f64> {
        self.inner.approx_cost(p).map_err(err)
    }
}

/// Units, demand, and reserve requirements over a horizon.
#[pyclass(name = "SystemInstance", from_py_object)]
#[derive(Clone)]
pub struct PyInstance {
    inner: model::SystemInstance,
}

#[pymethods]
impl PyInstance {
    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        Ok(PyInstance {
            inner: io::parse_instance(path).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        let file = io::parse_instance_str(text).map_err(err)?;
        Ok(PyInstance { inner: file.instance })
    }

    /// Builds an instance without reserve products.
    #[staticmethod]
    fn from_units(units: Vec<PyUnit>, demand: Vec<f64>) -> PyResult<Self> {
        let horizon = demand.len();
        let units = units
            .into_iter()
            .enumerate()
            .map(|(i, u)| model::GeneratorUnit { id: i, ..u.inner })
            .collect();
        Ok(PyInstance {
            inner: model::SystemInstance::new(units, demand, Vec::new(), horizon).map_err(err)?,
        })
    }

    #[staticmethod]
    fn random(seed: u64, n_units: usize, n_periods: usize) -> PyResult<Self> {
        Ok(PyInstance {
            inner: oracle::random_instance(seed, n_units, n_periods).map_err(err)?,
        })
    }

    #[getter]
    fn horizon(&self) -> usize {
        self.inner.horizon
    }
    #[getter]
    fn demand(&self) -> Vec<f64> {
        self.inner.demand.clone()
    }
    #[getter]
    fn units(&self) -> Vec<PyUnit> {
        self.inner.units.iter().map(|u| PyUnit { inner: u.clone() }).collect()
    }

    fn is_statically_feasible(&self) -> bool {
        self.inner.is_statically_feasible()
    }

    fn duplicate(&self, k: usize) -> PyResult<Self> {
        Ok(PyInstance {
            inner: io::duplicate_system(&self.inner, k).map_err(err)?,
        })
    }

    /// True cost of a `[unit][period]` output matrix.
    fn schedule_cost(&self, power: Vec<Vec<f64>>) -> PyResult<f64> {
        schedule_cost(&self.inner, &model::Schedule::new(power)).map_err(err)
    }

    /// Returns `(is_feasible, worst_violation, violation descriptions)`.
    #[pyo3(signature = (power, tol=0.01))]
    fn validate_schedule(&self, power: Vec<Vec<f64>>, tol: f64) -> PyResult<(bool, f64, Vec<String>)> {
        let r = validate_schedule(&self.inner, &model::Schedule::new(power), tol).map_err(err)?;
        let text = r
            .violations
            .iter()
            .map(|v| match v.unit {
                Some(u) => format!("{} unit {} period {}: {}", v.kind, u, v.period, v.magnitude),
                None => format!("{} period {}: {}", v.kind, v.period, v.magnitude),
            })
            .collect();
        Ok((r.is_feasible, r.worst_violation, text))
    }

    fn __repr__(&self) -> String {
        format!(
            "SystemInstance(units={}, horizon={}, reserves={})",
            self.inner.num_units(),
            self.inner.horizon,
            self.inner.reserves.len()
        )
    }
}

#[pyfunction]
#[pyo3(signature = (unit, m_segments=2))]
fn build_piecewise(unit: &PyUnit, m_segments: usize) -> PyResult<PyPiecewise> {
    Ok(PyPiecewise {
        inner: linearize::build_piecewise(&unit.inner, m_segments).map_err(err)?,
    })
}

/// `(max_under, max_over, is_lower_approx)` on a `10 L + 1` grid.
#[pyfunction]
fn approx_error(unit: &PyUnit, pwc: &PyPiecewise) -> PyResult<(f64, f64, bool)> {
    let r = approx_error_report(&unit.inner, &pwc.inner, default_samples(&pwc.inner)).map_err(err)?;
    Ok((r.max_under, r.max_over, r.is_lower_approx))
}

fn result_dict<'py>(
    py: Python<'py>,
    inst: &model::SystemInstance,
    milp: &ded_core::milp::MilpInstance,
    r: &solver::BnbResult,
) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("status", r.status.to_string())?;
    d.set_item("milp_objective", r.incumbent_obj)?;
    d.set_item("best_bound", r.best_bound)?;
    d.set_item("rgap", r.achieved_rgap)?;
    d.set_item("nodes", r.nodes_processed)?;
    d.set_item("wall_time", r.wall_time)?;
    match &r.incumbent {
        Some(x) => {
            let s = extract_solution(milp, x, inst).map_err(err)?;
            let cost = schedule_cost(inst, &s).map_err(err)?;
            d.set_item("true_cost", cost)?;
            let ogap = optimality_gap(cost, r.best_bound).ok();
            d.set_item("ogap", ogap)?;
            d.set_item("power", s.power)?;
        }
        None => {
            d.set_item("true_cost", py.None())?;
            d.set_item("ogap", py.None())?;
            d.set_item("power", py.None())?;
        }
    }
    Ok(d)
}

fn linearized(inst: &model::SystemInstance, m: usize) -> PyResult<ded_core::milp::MilpInstance> {
    let pw = inst
        .units
        .iter()
        .map(|u| linearize::build_piecewise(u, m))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    build_milp(inst, &pw).map_err(err)
}

/// Linearizes and solves an instance with the built-in branch and bound.
#[pyfunction]
#[pyo3(signature = (
    instance, m_segments=2, rgap=0.0025, time_limit=None, node_limit=None, threads=1,
    seed=0, branching="most-fractional", node_selection="best-bound", heuristic=true
))]
#[allow(clippy::too_many_arguments)]
fn solve<'py>(
    py: Python<'py>,
    instance: &PyInstance,
    m_segments: usize,
    rgap: f64,
    time_limit: Option<f64>,
    node_limit: Option<usize>,
    threads: usize,
    seed: u64,
    branching: &str,
    node_selection: &str,
    heuristic: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = SolverConfig {
        rgap_target: rgap,
        time_limit: time_limit.unwrap_or(f64::INFINITY),
        node_limit: node_limit.unwrap_or(usize::MAX),
        threads,
        seed,
        branching_rule: branching.parse::<BranchingRule>().map_err(err)?,
        node_selection: node_selection.parse::<NodeSelection>().map_err(err)?,
        heuristic,
        ..SolverConfig::default()
    };
    let inst = &instance.inner;
    let milp = linearized(inst, m_segments)?;
    let r = py.detach(|| solver::solve_milp(&milp, &cfg)).map_err(err)?;
    result_dict(py, inst, &milp, &r)
}

/// Solves a tiny instance by enumerating every segment choice.
#[pyfunction]
#[pyo3(signature = (instance, m_segments=2, max_assignments=1_000_000))]
fn enumerate<'py>(
    py: Python<'py>,
    instance: &PyInstance,
    m_segments: usize,
    max_assignments: u128,
) -> PyResult<Bound<'py, PyDict>> {
    let inst = &instance.inner;
    let milp = linearized(inst, m_segments)?;
    let r = enumerate_solve(&milp, TinyLimits { max_assignments }).map_err(err)?;
    result_dict(py, inst, &milp, &r)
}

#[pymodule]
fn ded_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyUnit>()?;
    m.add_class::<PyPiecewise>()?;
    m.add_class::<PyInstance>()?;
    m.add_function(wrap_pyfunction!(build_piecewise, m)?)?;
    m.add_function(wrap_pyfunction!(approx_error, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate, m)?)?;
    Ok(())
}
