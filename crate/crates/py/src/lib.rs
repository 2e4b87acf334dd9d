//! Python module `twufp`. Weights and other rationals cross the boundary
//! as `fractions.Fraction`; inputs may be `int`, `str` (`"3/2"`) or
//! `Fraction`.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use twufp_core::approx::{solve_approx as approx_solve, GuessBudget, IntervalTree};
use twufp_core::exact::{brute_force_left_constrained_opt, brute_force_opt, exact_3dm as exact_matching, OracleLimits};
use twufp_core::gen::{random_3dm as draw_3dm, random_3dm_k as draw_3dm_k, random_instance as draw_instance};
use twufp_core::gen::{RandomParams, WindowShape};
use twufp_core::greedy::greedy_schedule;
use twufp_core::hardness::{self, ThreeDM};
use twufp_core::instance::{self, validate_instance, TaskId};
use twufp_core::io;
use twufp_core::numeric::{format_rational, parse_rational, Epsilon, Rational};
use twufp_core::profile::{CapacityProfile, EdgeRange};
use twufp_core::reductions;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn to_fraction<'py>(py: Python<'py>, r: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?
        .getattr("Fraction")?
        .call1((format_rational(r),))
}

fn from_py_rational(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    parse_rational(&obj.str()?.to_cow()?).map_err(value_err)
}

fn epsilon(obj: &Bound<'_, PyAny>) -> PyResult<Epsilon> {
    let eps = Epsilon::from_rational(&from_py_rational(obj)?).map_err(value_err)?;
    eps.ensure_at_most(2).map_err(value_err)?;
    Ok(eps)
}

fn limits(max_n: usize, max_m: u64, max_nodes: u64) -> OracleLimits {
    OracleLimits { max_n, max_m, max_nodes }
}

/// A problem instance: a path of `m` edges with capacities and a list of
/// tasks `(id, demand, weight, length, (window_lo, window_hi))`.
#[pyclass(name = "Instance", module = "twufp", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyInstance {
    inner: instance::Instance,
}

#[pymethods]
impl PyInstance {
    /// `capacities` lists one capacity per edge.
    #[new]
    fn new(
        capacities: Vec<u64>,
        tasks: Vec<(u64, u64, Bound<'_, PyAny>, u64, (u64, u64))>,
    ) -> PyResult<Self> {
        let m = capacities.len() as u64;
        if m == 0 {
            return Err(value_err("the path needs at least one edge"));
        }
        let caps = CapacityProfile::from_values(EdgeRange::new(1, m), &capacities);
        let mut list = Vec::with_capacity(tasks.len());
        for (id, demand, weight, length, (lo, hi)) in tasks {
            let window = EdgeRange::checked(lo, hi).ok_or_else(|| value_err(format!("empty window [{lo}, {hi}]")))?;
            list.push(instance::Task::new(id, demand, from_py_rational(&weight)?, length, window));
        }
        let inner = instance::Instance::new(m, caps, list).map_err(value_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: io::instance_from_json(text).map_err(value_err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        io::instance_to_json(&self.inner).map_err(value_err)
    }

    #[getter]
    fn m(&self) -> u64 {
        self.inner.m
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    /// `(first_edge, last_edge, capacity)` per constant segment.
    #[getter]
    fn capacities(&self) -> Vec<(u64, u64, u64)> {
        self.inner
            .capacities
            .segments()
            .iter()
            .map(|s| (s.range.lo, s.range.hi, s.value))
            .collect()
    }

    #[getter]
    fn tasks<'py>(&self, py: Python<'py>) -> PyResult<Vec<(u64, u64, Bound<'py, PyAny>, u64, (u64, u64))>> {
        self.inner
            .tasks
            .iter()
            .map(|t| Ok((t.id.0, t.demand, to_fraction(py, &t.weight)?, t.length, (t.window.lo, t.window.hi))))
            .collect()
    }

    fn is_span(&self) -> bool {
        self.inner.is_span()
    }

    fn reflect(&self) -> Self {
        Self {
            inner: self.inner.reflect(),
        }
    }

    /// Broken invariants as messages; empty when valid.
    fn validate(&self) -> Vec<String> {
        validate_instance(&self.inner).iter().map(|v| v.to_string()).collect()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Instance(m={}, n={})", self.inner.m, self.inner.n())
    }
}

/// Start edge per scheduled task id.
#[pyclass(name = "Schedule", module = "twufp", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySchedule {
    inner: instance::Schedule,
}

#[pymethods]
impl PySchedule {
    #[new]
    #[pyo3(signature = (starts=None))]
    fn new(starts: Option<BTreeMap<u64, u64>>) -> Self {
        Self {
            inner: starts
                .unwrap_or_default()
                .into_iter()
                .map(|(id, s)| (TaskId(id), s))
                .collect(),
        }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: io::schedule_from_json(text).map_err(value_err)?,
        })
    }

    fn to_json(&self) -> String {
        io::schedule_to_json(&self.inner)
    }

    fn starts(&self) -> BTreeMap<u64, u64> {
        self.inner.iter().map(|(id, s)| (id.0, s)).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Schedule({:?})", self.starts())
    }
}

/// A 3-dimensional matching instance over `[q]^3`; hyperedges are 1-based.
#[pyclass(name = "ThreeDM", module = "twufp", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyThreeDM {
    inner: ThreeDM,
}

#[pymethods]
impl PyThreeDM {
    #[new]
    #[pyo3(signature = (q, hyperedges, k_bound=None))]
    fn new(q: usize, hyperedges: Vec<(usize, usize, usize)>, k_bound: Option<usize>) -> PyResult<Self> {
        Ok(Self {
            inner: ThreeDM::new(q, hyperedges, k_bound).map_err(value_err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: io::three_dm_from_json(text).map_err(value_err)?,
        })
    }

    fn to_json(&self) -> String {
        io::three_dm_to_json(&self.inner)
    }

    #[getter]
    fn q(&self) -> usize {
        self.inner.q
    }

    #[getter]
    fn hyperedges(&self) -> Vec<(usize, usize, usize)> {
        self.inner.hyperedges.clone()
    }

    fn __repr__(&self) -> String {
        format!("ThreeDM(q={}, hyperedges={:?})", self.inner.q, self.inner.hyperedges)
    }
}

/// `{"feasible", "max_overload_ratio", "worst_edge"}`; the ratio is a
/// `Fraction`, or `inf` for load on a zero-capacity edge.
#[pyfunction]
#[pyo3(signature = (inst, schedule, augmentation=None))]
fn check_schedule<'py>(
    py: Python<'py>,
    inst: &PyInstance,
    schedule: &PySchedule,
    augmentation: Option<Bound<'py, PyAny>>,
) -> PyResult<Bound<'py, PyDict>> {
    let aug = match augmentation {
        Some(a) => from_py_rational(&a)?,
        None => Rational::from_integer(1.into()),
    };
    let report = instance::check_schedule(&inst.inner, &schedule.inner, &aug).map_err(value_err)?;
    let out = PyDict::new(py);
    out.set_item("feasible", report.feasible)?;
    match &report.max_overload_ratio {
        instance::OverloadRatio::Finite(r) => out.set_item("max_overload_ratio", to_fraction(py, r)?)?,
        instance::OverloadRatio::Infinite => out.set_item("max_overload_ratio", f64::INFINITY)?,
    }
    out.set_item("worst_edge", report.worst_edge)?;
    Ok(out)
}

#[pyfunction]
fn solution_weight<'py>(py: Python<'py>, inst: &PyInstance, schedule: &PySchedule) -> PyResult<Bound<'py, PyAny>> {
    to_fraction(py, &instance::solution_weight(&inst.inner, &schedule.inner).map_err(value_err)?)
}

/// Optimal value and schedule by exhaustive search.
#[pyfunction]
#[pyo3(signature = (inst, max_n=14, max_m=256, max_nodes=200_000_000))]
fn solve_exact<'py>(
    py: Python<'py>,
    inst: &PyInstance,
    max_n: usize,
    max_m: u64,
    max_nodes: u64,
) -> PyResult<(Bound<'py, PyAny>, PySchedule)> {
    let (v, s) = py
        .detach(|| brute_force_opt(&inst.inner, &limits(max_n, max_m, max_nodes)))
        .map_err(runtime_err)?;
    Ok((to_fraction(py, &v)?, PySchedule { inner: s }))
}

/// Best schedule in which every task is left constrained in the interval
/// tree over the path.
#[pyfunction]
#[pyo3(signature = (inst, max_n=14, max_m=256, max_nodes=200_000_000))]
fn solve_left_constrained<'py>(
    py: Python<'py>,
    inst: &PyInstance,
    max_n: usize,
    max_m: u64,
    max_nodes: u64,
) -> PyResult<(Bound<'py, PyAny>, PySchedule)> {
    let tree = IntervalTree::new(inst.inner.m);
    let (v, s) = py
        .detach(|| brute_force_left_constrained_opt(&inst.inner, &tree, &limits(max_n, max_m, max_nodes)))
        .map_err(runtime_err)?;
    Ok((to_fraction(py, &v)?, PySchedule { inner: s }))
}

/// Heaviest task first at its leftmost fitting start.
#[pyfunction]
fn solve_greedy(inst: &PyInstance) -> PySchedule {
    PySchedule {
        inner: greedy_schedule(&inst.inner),
    }
}

/// Runs the approximation. Returns `(schedule, objective, augmentation)`:
/// the schedule fits capacities scaled by `augmentation = 1 + 4 eps`.
/// `budget_width` caps each guess family; `None` enumerates everything.
#[pyfunction]
#[pyo3(signature = (inst, eps=None, budget_width=None))]
fn solve_approx<'py>(
    py: Python<'py>,
    inst: &PyInstance,
    eps: Option<Bound<'py, PyAny>>,
    budget_width: Option<usize>,
) -> PyResult<(PySchedule, Bound<'py, PyAny>, Bound<'py, PyAny>)> {
    let eps = match eps {
        Some(e) => epsilon(&e)?,
        None => Epsilon::reciprocal(4).map_err(value_err)?,
    };
    let budget = budget_width.map_or_else(GuessBudget::exhaustive, GuessBudget::bounded);
    let out = py
        .detach(|| approx_solve(&inst.inner, eps, &budget))
        .map_err(runtime_err)?;
    Ok((
        PySchedule { inner: out.schedule },
        to_fraction(py, &out.objective)?,
        to_fraction(py, &out.augmentation)?,
    ))
}

/// Normalized branches as `(instance, w_star, offset, group)` tuples.
#[pyfunction]
fn preprocess<'py>(
    py: Python<'py>,
    inst: &PyInstance,
    eps: Bound<'py, PyAny>,
) -> PyResult<Vec<(PyInstance, Bound<'py, PyAny>, u32, u32)>> {
    let branches = reductions::preprocess(&inst.inner, epsilon(&eps)?).map_err(value_err)?;
    branches
        .into_iter()
        .map(|(norm, token)| {
            Ok((
                PyInstance { inner: norm.inst },
                to_fraction(py, &token.w_star)?,
                token.offset,
                token.group,
            ))
        })
        .collect()
}

#[pyfunction]
fn pad_for_span(inst: &PyInstance) -> PyResult<PyInstance> {
    Ok(PyInstance {
        inner: reductions::pad_for_span(&inst.inner).map_err(value_err)?,
    })
}

/// Seeded random instance. `kind` is `"random"`, `"ufp-degenerate"` or
/// `"span"`.
#[pyfunction]
#[pyo3(signature = (n, m, seed, kind="random", max_demand=4, max_capacity=6, max_weight=10, fractional=false))]
#[allow(clippy::too_many_arguments)]
fn random_instance(
    n: usize,
    m: u64,
    seed: u64,
    kind: &str,
    max_demand: u64,
    max_capacity: u64,
    max_weight: u64,
    fractional: bool,
) -> PyResult<PyInstance> {
    let shape = match kind {
        "random" => WindowShape::Free,
        "ufp-degenerate" => WindowShape::Tight,
        "span" => WindowShape::Span,
        other => return Err(value_err(format!("unknown kind {other:?}"))),
    };
    if m == 0 {
        return Err(value_err("m must be at least 1"));
    }
    let p = RandomParams {
        n,
        m,
        max_demand,
        max_capacity,
        max_weight,
        fractional_weights: fractional,
    };
    Ok(PyInstance {
        inner: draw_instance(&p, shape, seed),
    })
}

#[pyfunction]
fn random_3dm(q: usize, edges: usize, seed: u64) -> PyResult<PyThreeDM> {
    Ok(PyThreeDM {
        inner: draw_3dm(q, edges, seed).map_err(value_err)?,
    })
}

#[pyfunction]
fn random_3dm_k(q: usize, k: usize, seed: u64) -> PyResult<PyThreeDM> {
    Ok(PyThreeDM {
        inner: draw_3dm_k(q, k, seed).map_err(value_err)?,
    })
}

#[pyfunction]
fn reduce_3dm_to_spanufp(k: &PyThreeDM) -> PyResult<PyInstance> {
    Ok(PyInstance {
        inner: hardness::reduce_3dm_to_spanufp(&k.inner).map_err(value_err)?,
    })
}

/// Schedule of the built instance packing the chosen hyperedges.
#[pyfunction]
fn matching_to_schedule(k: &PyThreeDM, matching: Vec<usize>) -> PyResult<PySchedule> {
    Ok(PySchedule {
        inner: hardness::matching_to_schedule(&k.inner, &matching).map_err(value_err)?,
    })
}

/// Hyperedges packed by a feasible schedule of the built instance.
#[pyfunction]
fn schedule_to_matching(k: &PyThreeDM, schedule: &PySchedule) -> PyResult<Vec<usize>> {
    hardness::schedule_to_matching(&k.inner, &schedule.inner).map_err(value_err)
}

/// Size and hyperedge indices of a maximum matching.
#[pyfunction]
#[pyo3(signature = (k, max_nodes=200_000_000))]
fn exact_3dm(py: Python<'_>, k: &PyThreeDM, max_nodes: u64) -> PyResult<(usize, Vec<usize>)> {
    let lim = OracleLimits {
        max_nodes,
        ..OracleLimits::default()
    };
    py.detach(|| exact_matching(&k.inner, &lim)).map_err(runtime_err)
}

#[pyfunction]
fn greedy_matching(k: &PyThreeDM) -> PyResult<Vec<usize>> {
    hardness::greedy_matching_lower_bound(&k.inner).map_err(value_err)
}

#[pymodule]
fn twufp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<PySchedule>()?;
    m.add_class::<PyThreeDM>()?;
    m.add_function(wrap_pyfunction!(check_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(solution_weight, m)?)?;
    m.add_function(wrap_pyfunction!(solve_exact, m)?)?;
    m.add_function(wrap_pyfunction!(solve_left_constrained, m)?)?;
    m.add_function(wrap_pyfunction!(solve_greedy, m)?)?;
    m.add_function(wrap_pyfunction!(solve_approx, m)?)?;
    m.add_function(wrap_pyfunction!(preprocess, m)?)?;
    m.add_function(wrap_pyfunction!(pad_for_span, m)?)?;
    m.add_function(wrap_pyfunction!(random_instance, m)?)?;
    m.add_function(wrap_pyfunction!(random_3dm, m)?)?;
    m.add_function(wrap_pyfunction!(random_3dm_k, m)?)?;
    m.add_function(wrap_pyfunction!(reduce_3dm_to_spanufp, m)?)?;
    m.add_function(wrap_pyfunction!(matching_to_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(schedule_to_matching, m)?)?;
    m.add_function(wrap_pyfunction!(exact_3dm, m)?)?;
    m.add_function(wrap_pyfunction!(greedy_matching, m)?)?;
    Ok(())
}
