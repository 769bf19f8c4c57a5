//! Abduction with penalization: problems `<H, P, O, gamma>`, their
//! translation into programs with weak constraints, and solutions.

mod oracle;
mod tasks;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use crate::ground::GroundError;
use crate::model::{
    Atom, BodyElement, Interpretation, Literal, ModelError, Program, Rule, Symbol, Term, WeakConstraint,
};
use crate::parser::{parse_hypotheses, parse_observations, parse_program, ParseError};

pub use oracle::{brute_force_admissible, brute_force_opt, ORACLE_MAX_GUESS_ATOMS, ORACLE_MAX_HYPOTHESES};
pub use tasks::{OptimalSolutions, PapSolver, SolveOptions};

pub const SOL: &str = "_sol";
pub const NSOL: &str = "_nsol";

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum PapError {
    #[error("hypothesis {hypothesis} occurs in the head of rule `{rule}`")]
    HypothesisInHead { hypothesis: Atom, rule: String },
    #[error("hypothesis {0} is not ground")]
    NonGroundHypothesis(Atom),
    #[error("hypothesis {0} has no penalty")]
    MissingPenalty(Atom),
    #[error("hypothesis {0} is declared twice")]
    DuplicateHypothesis(Atom),
    #[error("observation {0} is not ground")]
    NonGroundObservation(Literal),
    #[error("predicate {0} is in the reserved `_` namespace")]
    FreshPredicateCollision(Symbol),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum AbductionError {
    #[error("the problem has no admissible solution")]
    Inconsistent,
    #[error("{0} is not a hypothesis")]
    NotAHypothesis(Atom),
    #[error("instance too large for the brute-force oracle: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Ground(#[from] GroundError),
}

/// Errors reading a problem from the three text forms.
#[derive(Debug, Error)]
pub enum InputError {
    #[error("{file}: {error}")]
    Parse { file: &'static str, error: ParseError },
    #[error(transparent)]
    Invalid(#[from] PapError),
}

/// Unvalidated problem data.
#[derive(Clone, Debug, Default)]
pub struct PapData {
    /// Hypotheses in declaration order.
    pub hypotheses: Vec<Atom>,
    pub penalties: BTreeMap<Atom, u64>,
    pub program: Program,
    pub observations: Vec<Literal>,
}

/// A validated problem of abduction with penalization.
#[derive(Clone, Debug)]
pub struct Pap {
    hypotheses: Vec<Atom>,
    penalties: Vec<u64>,
    program: Program,
    observations: Vec<Literal>,
}

/// Ground `h` is an instance of `pattern`.
fn matches(pattern: &Atom, h: &Atom) -> bool {
    if pattern.predicate != h.predicate || pattern.arity() != h.arity() {
        return false;
    }
    let mut binding: BTreeMap<&Symbol, &Term> = BTreeMap::new();
    pattern.args.iter().zip(&h.args).all(|(p, t)| match p {
        Term::Variable(v) => *binding.entry(v).or_insert(t) == t,
        other => other == t,
    })
}

fn reserved_predicate(p: &Program, hyps: &[Atom], obs: &[Literal]) -> Option<Symbol> {
    p.atoms()
        .chain(hyps.iter())
        .chain(obs.iter().map(|l| &l.atom))
        .map(|a| &a.predicate)
        .find(|s| s.is_reserved())
        .cloned()
}

/// Checks the problem invariants.
pub fn validate_pap(data: PapData) -> Result<Pap, PapError> {
    let PapData {
        hypotheses,
        penalties,
        program,
        observations,
    } = data;
    let mut seen = HashSet::new();
    for h in &hypotheses {
        if !h.is_ground() {
            return Err(PapError::NonGroundHypothesis(h.clone()));
        }
        if !seen.insert(h) {
            return Err(PapError::DuplicateHypothesis(h.clone()));
        }
    }
    let penalties = hypotheses
        .iter()
        .map(|h| {
            penalties
                .get(h)
                .copied()
                .ok_or_else(|| PapError::MissingPenalty(h.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    for o in &observations {
        if !o.atom.is_ground() {
            return Err(PapError::NonGroundObservation(o.clone()));
        }
    }
    if let Some(s) = reserved_predicate(&program, &hypotheses, &observations) {
        return Err(PapError::FreshPredicateCollision(s));
    }
    for r in &program.rules {
        let Some(head) = &r.head else { continue };
        if let Some(h) = hypotheses.iter().find(|h| matches(head, h)) {
            return Err(PapError::HypothesisInHead {
                hypothesis: h.clone(),
                rule: r.to_string(),
            });
        }
    }
    let mut arity_check = program.clone();
    arity_check.rules.extend(hypotheses.iter().cloned().map(Rule::fact));
    arity_check
        .rules
        .extend(observations.iter().map(|o| Rule::fact(o.atom.clone())));
    arity_check.check_arities()?;
    let mut obs = Vec::new();
    for o in observations {
        if !obs.contains(&o) {
            obs.push(o);
        }
    }
    Ok(Pap {
        hypotheses,
        penalties,
        program,
        observations: obs,
    })
}

impl Pap {
    pub fn new(hypotheses: Vec<(Atom, u64)>, program: Program, observations: Vec<Literal>) -> Result<Pap, PapError> {
        let penalties = hypotheses.iter().cloned().collect();
        validate_pap(PapData {
            hypotheses: hypotheses.into_iter().map(|(h, _)| h).collect(),
            penalties,
            program,
            observations,
        })
    }

    /// Parses and validates the program, hypothesis and observation texts.
    pub fn from_texts(program: &str, hypotheses: &str, observations: &str) -> Result<Pap, InputError> {
        let program = parse_program(program).map_err(|error| InputError::Parse { file: "program", error })?;
        let hyps = parse_hypotheses(hypotheses).map_err(|error| InputError::Parse {
            file: "hypotheses",
            error,
        })?;
        let obs = parse_observations(observations).map_err(|error| InputError::Parse {
            file: "observations",
            error,
        })?;
        Ok(Pap::new(
            hyps.into_iter().map(|d| (d.atom, d.penalty)).collect(),
            program,
            obs.into_iter().map(|d| d.literal).collect(),
        )?)
    }

    pub fn hypotheses(&self) -> &[Atom] {
        &self.hypotheses
    }

    pub fn penalties(&self) -> &[u64] {
        &self.penalties
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn observations(&self) -> &[Literal] {
        &self.observations
    }

    pub fn index_of(&self, h: &Atom) -> Option<usize> {
        self.hypotheses.iter().position(|x| x == h)
    }

    pub fn penalty(&self, h: &Atom) -> Option<u64> {
        self.index_of(h).map(|i| self.penalties[i])
    }

    /// `sum_gamma(S)`; atoms outside `H` are ignored.
    pub fn sum_penalty<'a>(&self, s: impl IntoIterator<Item = &'a Atom>) -> u128 {
        s.into_iter().filter_map(|h| self.penalty(h)).map(u128::from).sum()
    }

    /// Same problem with every penalty multiplied by `k`.
    pub fn scaled(&self, k: u64) -> Pap {
        let mut p = self.clone();
        for w in &mut p.penalties {
            *w *= k;
        }
        p
    }

    /// The observations hold in `i`.
    pub fn explains(&self, i: &Interpretation) -> bool {
        self.observations.iter().all(|o| i.contains(&o.atom) == o.is_positive())
    }

    /// Default integer bound: the largest integer constant plus `|H|`.
    pub fn default_integer_bound(&self) -> u64 {
        let max_obs = self
            .hypotheses
            .iter()
            .chain(self.observations.iter().map(|l| &l.atom))
            .flat_map(|a| a.args.iter())
            .filter_map(|t| match t {
                Term::Integer(n) => Some(*n),
                _ => None,
            })
            .max();
        self.program
            .max_integer()
            .max(max_obs)
            .unwrap_or(0)
            .saturating_add(self.hypotheses.len() as u64)
    }

    /// Constants of the hypotheses and observations.
    pub fn extra_constants(&self) -> BTreeSet<Term> {
        self.hypotheses
            .iter()
            .chain(self.observations.iter().map(|l| &l.atom))
            .flat_map(|a| a.args.iter().cloned())
            .collect()
    }
}

impl fmt::Display for Pap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "% program")?;
        write!(f, "{}", self.program)?;
        writeln!(f, "% hypotheses")?;
        for (h, w) in self.hypotheses.iter().zip(&self.penalties) {
            writeln!(f, "{h} [{w}].")?;
        }
        writeln!(f, "% observations")?;
        for o in &self.observations {
            writeln!(f, "{o}.")?;
        }
        Ok(())
    }
}

/// `lpw(P)`: the problem program extended with hypothesis choices, weak
/// constraints for the penalties and strong constraints for the
/// observations.
#[derive(Clone, Debug)]
pub struct TranslatedProgram {
    pub program: Program,
    /// `hypothesis_index[i - 1]` is `h_i`, selected by `_sol(i)`.
    pub hypothesis_index: Vec<Atom>,
}

pub fn sol_atom(i: usize) -> Atom {
    Atom::new(SOL, vec![Term::Integer(i as u64)])
}

pub fn nsol_atom(i: usize) -> Atom {
    Atom::new(NSOL, vec![Term::Integer(i as u64)])
}

pub fn translate_pap(pap: &Pap) -> Result<TranslatedProgram, PapError> {
    if let Some(s) = reserved_predicate(&pap.program, &pap.hypotheses, &pap.observations) {
        return Err(PapError::FreshPredicateCollision(s));
    }
    let mut q = pap.program.clone();
    for (k, (h, &w)) in pap.hypotheses.iter().zip(&pap.penalties).enumerate() {
        let i = k + 1;
        let pos = |a: Atom| -> BodyElement { Literal::positive(a).into() };
        let neg = |a: Atom| -> BodyElement { Literal::negative(a).into() };
        q.rules.push(Rule::new(h.clone(), vec![pos(sol_atom(i))]));
        q.rules.push(Rule::new(sol_atom(i), vec![neg(nsol_atom(i))]));
        q.rules.push(Rule::new(nsol_atom(i), vec![neg(sol_atom(i))]));
        q.weak_constraints.push(WeakConstraint::new(vec![pos(h.clone())], w));
    }
    for o in &pap.observations {
        let flipped = if o.is_positive() {
            Literal::negative(o.atom.clone())
        } else {
            Literal::positive(o.atom.clone())
        };
        q.rules.push(Rule::constraint(vec![flipped.into()]));
    }
    Ok(TranslatedProgram {
        program: q,
        hypothesis_index: pap.hypotheses.clone(),
    })
}

/// An admissible solution with its cost and a witness stable model.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Solution {
    /// Selected hypotheses in declaration order.
    pub hypotheses: Vec<Atom>,
    pub cost: u128,
    pub witness: Interpretation,
}

impl Solution {
    /// Hypotheses rendered and sorted as text.
    pub fn sorted_names(&self) -> Vec<String> {
        let mut v: Vec<String> = self.hypotheses.iter().map(ToString::to_string).collect();
        v.sort();
        v
    }

    pub fn hypothesis_set(&self) -> BTreeSet<Atom> {
        self.hypotheses.iter().cloned().collect()
    }
}

impl fmt::Display for Solution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}} cost {}", self.sorted_names().join(", "), self.cost)
    }
}

/// `S = H ∩ M`, with the witness restricted to atoms outside the reserved
/// namespace.
pub fn extract_solution(pap: &Pap, m: &Interpretation) -> Solution {
    let hypotheses: Vec<Atom> = pap.hypotheses.iter().filter(|h| m.contains(h)).cloned().collect();
    let cost = pap.sum_penalty(&hypotheses);
    let mut witness = m.clone();
    witness.retain(|a| !a.predicate.is_reserved());
    Solution {
        hypotheses,
        cost,
        witness,
    }
}
