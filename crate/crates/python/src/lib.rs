//! Python bindings: build a problem from program, hypothesis and
//! observation texts and run the reasoning tasks on it.

use std::collections::BTreeSet;

use pap_core::abduction::{self, AbductionError, PapSolver, SolveOptions};
use pap_core::ground::{default_integer_bound, ground};
use pap_core::model::{Atom, Interpretation};
use pap_core::parser::{parse_atom, parse_program};
use pap_core::weak::{best_models as core_best_models, OptimizeOptions};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

create_exception!(pap, InputError, PyValueError, "Malformed or invalid problem input.");
create_exception!(
    pap,
    InconsistentError,
    PyException,
    "The problem has no admissible solution."
);

fn input_err(e: impl ToString) -> PyErr {
    InputError::new_err(e.to_string())
}

fn task_err(e: AbductionError) -> PyErr {
    match e {
        AbductionError::Inconsistent => InconsistentError::new_err(e.to_string()),
        other => input_err(other),
    }
}

fn atoms_of(texts: &[String]) -> PyResult<Vec<Atom>> {
    texts.iter().map(|t| parse_atom(t).map_err(input_err)).collect()
}

fn names(i: &Interpretation) -> Vec<String> {
    i.iter().map(ToString::to_string).collect()
}

/// One solution: the chosen hypotheses, their penalty and a witness model.
#[pyclass(frozen, module = "pap")]
pub struct Solution {
    #[pyo3(get)]
    hypotheses: Vec<String>,
    #[pyo3(get)]
    cost: u128,
    #[pyo3(get)]
    witness: Vec<String>,
}

impl From<abduction::Solution> for Solution {
    fn from(s: abduction::Solution) -> Self {
        Solution {
            hypotheses: s.sorted_names(),
            cost: s.cost,
            witness: names(&s.witness),
        }
    }
}

#[pymethods]
impl Solution {
    fn __repr__(&self) -> String {
        format!("Solution(cost={}, hypotheses={:?})", self.cost, self.hypotheses)
    }
}

/// An abduction problem with penalization, translated and grounded once.
#[pyclass(frozen, module = "pap")]
pub struct Pap {
    solver: PapSolver,
}

#[pymethods]
impl Pap {
    #[new]
    #[pyo3(signature = (program, hypotheses, observations, int_bound = None))]
    fn new(program: &str, hypotheses: &str, observations: &str, int_bound: Option<u64>) -> PyResult<Self> {
        let pap = abduction::Pap::from_texts(program, hypotheses, observations).map_err(input_err)?;
        let solver = PapSolver::new(pap, int_bound).map_err(task_err)?;
        Ok(Pap { solver })
    }

    /// Hypotheses with their penalties, in declaration order.
    fn hypotheses(&self) -> Vec<(String, u64)> {
        let pap = self.solver.pap();
        pap.hypotheses()
            .iter()
            .map(ToString::to_string)
            .zip(pap.penalties().iter().copied())
            .collect()
    }

    /// The translated program with weak constraints, as text.
    fn translated_program(&self) -> String {
        self.solver.translated().program.to_string()
    }

    #[pyo3(signature = (all = false, trace = false, limit = None))]
    fn solve_optimal(&self, all: bool, trace: bool, limit: Option<usize>) -> PyResult<(u128, Vec<Solution>)> {
        let r = self
            .solver
            .solve_optimal(SolveOptions { trace, all, limit })
            .map_err(task_err)?;
        Ok((r.cost, r.solutions.into_iter().map(Solution::from).collect()))
    }

    /// Improving solutions met on the way to the optimum.
    fn trace(&self) -> PyResult<Vec<Solution>> {
        let r = self
            .solver
            .solve_optimal(SolveOptions {
                trace: true,
                ..Default::default()
            })
            .map_err(task_err)?;
        Ok(r.trace.into_iter().map(Solution::from).collect())
    }

    fn optimal_cost(&self) -> PyResult<u128> {
        self.solver.optimal_cost().map_err(task_err)
    }

    fn solve_optimal_greedy(&self) -> PyResult<Solution> {
        self.solver.solve_optimal_greedy().map(Solution::from).map_err(task_err)
    }

    fn is_consistent(&self) -> bool {
        self.solver.is_consistent()
    }

    fn is_admissible(&self, hypotheses: Vec<String>) -> PyResult<bool> {
        Ok(self.admissible_witness(hypotheses)?.is_some())
    }

    /// A stable model witnessing admissibility, or None.
    fn admissible_witness(&self, hypotheses: Vec<String>) -> PyResult<Option<Vec<String>>> {
        let s = atoms_of(&hypotheses)?;
        let w = self.solver.is_admissible(&s).map_err(task_err)?;
        Ok(w.as_ref().map(names))
    }

    fn is_optimal(&self, hypotheses: Vec<String>) -> PyResult<bool> {
        self.solver.is_optimal(&atoms_of(&hypotheses)?).map_err(task_err)
    }

    fn is_relevant(&self, hypothesis: &str) -> PyResult<bool> {
        let h = parse_atom(hypothesis).map_err(input_err)?;
        self.solver.is_relevant(&h).map_err(task_err)
    }

    fn is_necessary(&self, hypothesis: &str) -> PyResult<bool> {
        let h = parse_atom(hypothesis).map_err(input_err)?;
        self.solver.is_necessary(&h).map_err(task_err)
    }

    #[pyo3(signature = (limit = None))]
    fn enumerate_admissible(&self, limit: Option<usize>) -> Vec<Solution> {
        self.solver
            .enumerate_admissible(limit)
            .into_iter()
            .map(Solution::from)
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("Pap(hypotheses={})", self.solver.pap().hypotheses().len())
    }
}

fn ground_text(program: &str) -> PyResult<pap_core::ground::GroundProgram> {
    let p = parse_program(program).map_err(input_err)?;
    ground(&p, &BTreeSet::new(), default_integer_bound(&p, 0)).map_err(input_err)
}

/// Stable models of a program, each as a sorted list of atoms.
#[pyfunction]
#[pyo3(signature = (program, limit = None))]
fn stable_models(program: &str, limit: Option<usize>) -> PyResult<Vec<Vec<String>>> {
    let gp = ground_text(program)?;
    Ok(pap_core::stable::enumerate_stable_models(&gp, limit)
        .iter()
        .map(names)
        .collect())
}

/// Minimum cost under the program's weak constraints and every model at
/// that cost, or None without stable models.
#[pyfunction]
fn best_models(program: &str) -> PyResult<Option<(u128, Vec<Vec<String>>)>> {
    let gp = ground_text(program)?;
    let opts = OptimizeOptions {
        all: true,
        ..Default::default()
    };
    Ok(core_best_models(&gp, &opts).map(|r| {
        let models = r.models.iter().map(|m| names(&gp.interpretation_of(m))).collect();
        (r.cost, models)
    }))
}

#[pymodule]
pub fn pap(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Pap>()?;
    m.add_class::<Solution>()?;
    m.add_function(wrap_pyfunction!(stable_models, m)?)?;
    m.add_function(wrap_pyfunction!(best_models, m)?)?;
    m.add("InputError", m.py().get_type::<InputError>())?;
    m.add("InconsistentError", m.py().get_type::<InconsistentError>())?;
    Ok(())
}
