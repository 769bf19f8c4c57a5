//! Reasoning tasks over a problem, all answered on one grounding of the
//! translated program.

use super::{extract_solution, translate_pap, AbductionError, Pap, Solution, TranslatedProgram};
use crate::ground::{ground, AtomId, GroundProgram};
use crate::model::{Atom, Interpretation, Program, Rule};
use crate::solver::AspSolver;
use crate::stable::{is_stratified, stratified_model};
use crate::weak::{best_models, model_within, objective_ids, OptimizeOptions};

#[derive(Clone, Copy, Debug, Default)]
pub struct SolveOptions {
    /// Record every improving solution met on the way to the optimum.
    pub trace: bool,
    /// Return every optimal solution rather than one.
    pub all: bool,
    pub limit: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct OptimalSolutions {
    pub cost: u128,
    pub solutions: Vec<Solution>,
    /// Improving solutions in the order found (with `trace`).
    pub trace: Vec<Solution>,
}

pub struct PapSolver {
    pap: Pap,
    translated: TranslatedProgram,
    gp: GroundProgram,
    /// Ground atom of every hypothesis, in declaration order.
    hyp_ids: Vec<AtomId>,
    integer_bound: u64,
    stratified: bool,
}

impl PapSolver {
    /// Translates and grounds the problem. `integer_bound` defaults to
    /// [`Pap::default_integer_bound`].
    pub fn new(pap: Pap, integer_bound: Option<u64>) -> Result<Self, AbductionError> {
        let integer_bound = integer_bound.unwrap_or_else(|| pap.default_integer_bound());
        let translated = translate_pap(&pap).expect("validated problems translate");
        let mut gp = ground(&translated.program, &pap.extra_constants(), integer_bound)?;
        let hyp_ids = pap.hypotheses().iter().map(|h| gp.intern(h)).collect();
        let stratified = is_stratified(pap.program());
        Ok(PapSolver {
            pap,
            translated,
            gp,
            hyp_ids,
            integer_bound,
            stratified,
        })
    }

    pub fn pap(&self) -> &Pap {
        &self.pap
    }

    pub fn translated(&self) -> &TranslatedProgram {
        &self.translated
    }

    pub fn ground_program(&self) -> &GroundProgram {
        &self.gp
    }

    pub fn integer_bound(&self) -> u64 {
        self.integer_bound
    }

    fn solution(&self, mask: &[bool]) -> Solution {
        let s = extract_solution(&self.pap, &self.gp.interpretation_of(mask));
        assert_eq!(
            objective_ids(&self.gp, mask),
            s.cost,
            "objective of a model differs from the penalty of its solution"
        );
        s
    }

    fn hyp_id(&self, h: &Atom) -> Result<AtomId, AbductionError> {
        self.pap
            .index_of(h)
            .map(|i| self.hyp_ids[i])
            .ok_or_else(|| AbductionError::NotAHypothesis(h.clone()))
    }

    /// Adm(P) is not empty.
    pub fn is_consistent(&self) -> bool {
        AspSolver::new(&self.gp).next_model(&[]).is_some()
    }

    /// A witness stable model of `P ∪ facts(s)` satisfying the observations.
    pub fn is_admissible(&self, s: &[Atom]) -> Result<Option<Interpretation>, AbductionError> {
        for h in s {
            self.hyp_id(h)?;
        }
        if self.stratified {
            self.admissible_stratified(s)
        } else {
            self.is_admissible_general(s)
        }
    }

    /// Polynomial path for stratified programs: evaluate `P ∪ facts(s)`
    /// stratum by stratum and test the observations.
    pub fn admissible_stratified(&self, s: &[Atom]) -> Result<Option<Interpretation>, AbductionError> {
        let mut p: Program = self.pap.program().clone();
        p.rules.extend(s.iter().cloned().map(Rule::fact));
        let gp = ground(&p, &self.pap.extra_constants(), self.integer_bound)?;
        let Some(model) = stratified_model(&gp) else {
            return self.is_admissible_general(s);
        };
        Ok(model.map(|m| gp.interpretation_of(&m)).filter(|i| self.pap.explains(i)))
    }

    fn is_admissible_general(&self, s: &[Atom]) -> Result<Option<Interpretation>, AbductionError> {
        let assumptions: Vec<(AtomId, bool)> = self
            .hyp_ids
            .iter()
            .zip(self.pap.hypotheses())
            .map(|(&id, h)| (id, s.contains(h)))
            .collect();
        Ok(AspSolver::new(&self.gp)
            .next_model(&assumptions)
            .map(|m| self.solution(&m).witness))
    }

    /// Admissibility through the general search, regardless of
    /// stratification.
    pub fn is_admissible_search(&self, s: &[Atom]) -> Result<Option<Interpretation>, AbductionError> {
        for h in s {
            self.hyp_id(h)?;
        }
        self.is_admissible_general(s)
    }

    /// Every admissible solution, each once.
    pub fn enumerate_admissible(&self, limit: Option<usize>) -> Vec<Solution> {
        let mut solver = AspSolver::new(&self.gp);
        let mut out = Vec::new();
        while limit.is_none_or(|l| out.len() < l) {
            let Some(m) = solver.next_model(&[]) else { break };
            solver.block(&m, Some(&self.hyp_ids));
            out.push(self.solution(&m));
        }
        out
    }

    /// Optimal solutions from the best models of the translated program.
    pub fn solve_optimal(&self, opts: SolveOptions) -> Result<OptimalSolutions, AbductionError> {
        let r = best_models(
            &self.gp,
            &OptimizeOptions {
                all: opts.all,
                limit: opts.limit,
                projection: Some(self.hyp_ids.clone()),
                assumptions: Vec::new(),
            },
        )
        .ok_or(AbductionError::Inconsistent)?;
        let solutions: Vec<Solution> = r.models.iter().map(|m| self.solution(m)).collect();
        let trace = if opts.trace {
            r.trace.iter().map(|(_, m)| self.solution(m)).collect()
        } else {
            Vec::new()
        };
        Ok(OptimalSolutions {
            cost: r.cost,
            solutions,
            trace,
        })
    }

    /// Optimal cost by binary search over `[0, sum_gamma(H)]`, each probe a
    /// cost-bounded model search.
    pub fn optimal_cost(&self) -> Result<u128, AbductionError> {
        if !self.is_consistent() {
            return Err(AbductionError::Inconsistent);
        }
        let (mut lo, mut hi) = (0u128, self.pap.sum_penalty(self.pap.hypotheses()));
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if model_within(&self.gp, mid, &[]).is_some() {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Ok(lo)
    }

    fn bounded_solver(&self) -> Result<(AspSolver<'_>, u128), AbductionError> {
        let c = self.optimal_cost()?;
        let mut solver = AspSolver::new(&self.gp);
        solver.set_cost_bound(c);
        Ok((solver, c))
    }

    /// Some optimal solution contains `h`.
    pub fn is_relevant(&self, h: &Atom) -> Result<bool, AbductionError> {
        let id = self.hyp_id(h)?;
        let (mut solver, _) = self.bounded_solver()?;
        Ok(solver.next_model(&[(id, true)]).is_some())
    }

    /// Every optimal solution contains `h`.
    pub fn is_necessary(&self, h: &Atom) -> Result<bool, AbductionError> {
        let id = self.hyp_id(h)?;
        let (mut solver, _) = self.bounded_solver()?;
        Ok(solver.next_model(&[(id, false)]).is_none())
    }

    /// `s` is admissible and nothing admissible is cheaper.
    pub fn is_optimal(&self, s: &[Atom]) -> Result<bool, AbductionError> {
        if self.is_admissible(s)?.is_none() {
            return Ok(false);
        }
        let cost = self.pap.sum_penalty(s);
        Ok(cost == 0 || model_within(&self.gp, cost - 1, &[]).is_none())
    }

    /// One optimal solution by scanning `H` in order and keeping each
    /// hypothesis that still allows an optimal extension.
    pub fn solve_optimal_greedy(&self) -> Result<Solution, AbductionError> {
        let (mut solver, _) = self.bounded_solver()?;
        let mut fixed: Vec<(AtomId, bool)> = Vec::new();
        let mut last = None;
        for &id in &self.hyp_ids {
            fixed.push((id, true));
            match solver.next_model(&fixed) {
                Some(m) => last = Some(m),
                None => fixed.last_mut().expect("just pushed").1 = false,
            }
        }
        let m = match last.filter(|m| fixed.iter().all(|&(id, v)| m[id.index()] == v)) {
            Some(m) => m,
            None => solver.next_model(&fixed).ok_or(AbductionError::Inconsistent)?,
        };
        Ok(self.solution(&m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solver(p: &str, h: &str, o: &str) -> PapSolver {
        PapSolver::new(Pap::from_texts(p, h, o).unwrap(), None).unwrap()
    }

    fn atom(s: &str) -> Atom {
        crate::parser::parse_atom(s).unwrap()
    }

    #[test]
    fn two_disjoint_optima() {
        let s = solver("ok :- p. ok :- q.", "p [1]. q [1].", "ok.");
        let r = s
            .solve_optimal(SolveOptions {
                all: true,
                ..Default::default()
            })
            .unwrap();
        assert_eq!(r.cost, 1);
        assert_eq!(r.solutions.len(), 2);
        for h in ["p", "q"] {
            assert!(s.is_relevant(&atom(h)).unwrap());
            assert!(!s.is_necessary(&atom(h)).unwrap());
        }
        assert_eq!(s.optimal_cost().unwrap(), 1);
        assert_eq!(s.solve_optimal_greedy().unwrap().hypotheses, vec![atom("p")]);
    }

    #[test]
    fn inconsistent_problem() {
        let s = solver("a :- h.", "h.", "a. not a.");
        assert!(!s.is_consistent());
        assert!(matches!(
            s.solve_optimal(SolveOptions::default()),
            Err(AbductionError::Inconsistent)
        ));
        assert!(matches!(s.is_relevant(&atom("h")), Err(AbductionError::Inconsistent)));
        assert!(s.enumerate_admissible(None).is_empty());
    }

    #[test]
    fn membership_is_checked() {
        let s = solver("ok :- p.", "p.", "ok.");
        assert!(matches!(
            s.is_relevant(&atom("zz")),
            Err(AbductionError::NotAHypothesis(_))
        ));
    }

    #[test]
    fn empty_hypotheses() {
        let s = solver("ok.", "", "ok.");
        let r = s.solve_optimal(SolveOptions::default()).unwrap();
        assert_eq!(r.cost, 0);
        assert!(r.solutions[0].hypotheses.is_empty());
    }

    #[test]
    fn stratified_admissibility_matches_search() {
        let s = solver("ok :- p, not q. bad :- q.", "p [1]. q [1].", "ok. not bad.");
        for set in [vec![], vec![atom("p")], vec![atom("q")], vec![atom("p"), atom("q")]] {
            let fast = s.is_admissible(&set).unwrap();
            let slow = s.is_admissible_search(&set).unwrap();
            assert_eq!(fast, slow);
        }
        assert!(s.is_admissible(&[atom("p")]).unwrap().is_some());
    }

    #[test]
    fn optimality_check() {
        let s = solver("ok :- p. ok :- q.", "p [1]. q [2].", "ok.");
        assert!(s.is_optimal(&[atom("p")]).unwrap());
        assert!(!s.is_optimal(&[atom("q")]).unwrap());
        assert!(!s.is_optimal(&[]).unwrap());
    }
}
