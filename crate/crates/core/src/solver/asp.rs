//! Stable model search for ground programs: Clark completion handed to the
//! CDCL engine, with loop nogoods added lazily for non-tight programs.

use std::collections::HashMap;

use super::cdcl::{Lit, SolveResult, Solver, Var};
use crate::ground::{AtomId, GroundProgram};
use crate::stable::{least_model_ids, DependencyGraph};

pub struct AspSolver<'g> {
    gp: &'g GroundProgram,
    sat: Solver,
    atom_var: Vec<Var>,
    /// Body literal of every rule, aligned with `gp.rules`.
    rule_body: Vec<Lit>,
    tight: bool,
    pub loop_nogoods: u64,
}

fn body_key(pos: &[AtomId], neg: &[AtomId]) -> (Vec<AtomId>, Vec<AtomId>) {
    let mut p = pos.to_vec();
    let mut n = neg.to_vec();
    p.sort();
    p.dedup();
    n.sort();
    n.dedup();
    (p, n)
}

impl<'g> AspSolver<'g> {
    pub fn new(gp: &'g GroundProgram) -> Self {
        let mut sat = Solver::new();
        let atom_var: Vec<Var> = (0..gp.atom_count()).map(|_| sat.new_var()).collect();
        let t = sat.new_var();
        let true_lit = Lit::new(t, true);
        sat.add_clause(&[true_lit]);
        let alit = |a: AtomId, positive: bool| Lit::new(atom_var[a.index()], positive);

        let mut bodies: HashMap<(Vec<AtomId>, Vec<AtomId>), Lit> = HashMap::new();
        let mut body_lit = |sat: &mut Solver, pos: &[AtomId], neg: &[AtomId]| -> Lit {
            let key = body_key(pos, neg);
            if let Some(&l) = bodies.get(&key) {
                return l;
            }
            let lits: Vec<Lit> = key
                .0
                .iter()
                .map(|&a| alit(a, true))
                .chain(key.1.iter().map(|&a| alit(a, false)))
                .collect();
            let l = match lits.len() {
                0 => true_lit,
                1 => lits[0],
                _ => {
                    let b = Lit::new(sat.new_var(), true);
                    let mut back = vec![b];
                    for &l in &lits {
                        sat.add_clause(&[!b, l]);
                        back.push(!l);
                    }
                    sat.add_clause(&back);
                    b
                }
            };
            bodies.insert(key, l);
            l
        };

        let mut rule_body = Vec::with_capacity(gp.rules.len());
        let mut support: Vec<Vec<Lit>> = vec![Vec::new(); gp.atom_count()];
        for r in &gp.rules {
            let b = body_lit(&mut sat, &r.pos, &r.neg);
            rule_body.push(b);
            match r.head {
                Some(h) => {
                    sat.add_clause(&[!b, alit(h, true)]);
                    support[h.index()].push(b);
                }
                None => {
                    sat.add_clause(&[!b]);
                }
            }
        }
        for (a, bs) in support.into_iter().enumerate() {
            let mut c = vec![Lit::new(atom_var[a], false)];
            c.extend(bs);
            sat.add_clause(&c);
        }
        let mut terms = Vec::new();
        for w in &gp.weak {
            if w.weight == 0 {
                continue;
            }
            let b = body_lit(&mut sat, &w.pos, &w.neg);
            terms.push((b, w.weight));
        }
        // cheap solutions first: try weak bodies false and decide them early
        for &(l, w) in &terms {
            sat.set_phase(l.var(), !l.is_positive());
            sat.boost(l.var(), 1.0 + (w as f64).log2().max(0.0));
        }
        sat.set_objective(terms);
        let tight = DependencyGraph::of_ground(gp).is_positively_acyclic();
        AspSolver {
            gp,
            sat,
            atom_var,
            rule_body,
            tight,
            loop_nogoods: 0,
        }
    }

    pub fn is_tight(&self) -> bool {
        self.tight
    }

    pub fn lit(&self, a: AtomId, positive: bool) -> Lit {
        Lit::new(self.atom_var[a.index()], positive)
    }

    /// Restricts the objective to `<= bound`.
    pub fn set_cost_bound(&mut self, bound: u128) {
        self.sat.set_bound(bound);
    }

    /// Adds a permanent clause over atoms: at least one literal must hold.
    pub fn add_atom_clause(&mut self, lits: &[(AtomId, bool)]) {
        let c: Vec<Lit> = lits.iter().map(|&(a, p)| self.lit(a, p)).collect();
        self.sat.add_clause(&c);
    }

    /// Excludes every future model that agrees with `mask` on `on` (all
    /// atoms when `None`).
    pub fn block(&mut self, mask: &[bool], on: Option<&[AtomId]>) {
        let c: Vec<(AtomId, bool)> = match on {
            Some(ids) => ids.iter().map(|&a| (a, !mask[a.index()])).collect(),
            None => (0..mask.len()).map(|i| (AtomId(i as u32), !mask[i])).collect(),
        };
        self.add_atom_clause(&c);
    }

    /// Next stable model satisfying the assumptions, as a membership mask.
    pub fn next_model(&mut self, assumptions: &[(AtomId, bool)]) -> Option<Vec<bool>> {
        let assumptions: Vec<Lit> = assumptions.iter().map(|&(a, p)| self.lit(a, p)).collect();
        let gp = self.gp;
        let atom_var = &self.atom_var;
        let rule_body = &self.rule_body;
        let tight = self.tight;
        let mut nogoods = 0;
        let mut check = |s: &Solver| -> Vec<Vec<Lit>> {
            if tight {
                return Vec::new();
            }
            let mask: Vec<bool> = atom_var
                .iter()
                .map(|&v| s.value(Lit::new(v, true)) == Some(true))
                .collect();
            let lm = least_model_ids(gp, &mask);
            let unfounded: Vec<usize> = (0..mask.len()).filter(|&i| mask[i] && !lm[i]).collect();
            if unfounded.is_empty() {
                return Vec::new();
            }
            let mut in_u = vec![false; mask.len()];
            for &i in &unfounded {
                in_u[i] = true;
            }
            let mut external = Vec::new();
            for (r, &b) in gp.rules.iter().zip(rule_body) {
                let Some(h) = r.head else { continue };
                if in_u[h.index()] && !r.pos.iter().any(|p| in_u[p.index()]) {
                    external.push(b);
                }
            }
            external.sort();
            external.dedup();
            nogoods += 1;
            unfounded
                .iter()
                .map(|&u| {
                    let mut c = vec![Lit::new(atom_var[u], false)];
                    c.extend(&external);
                    c
                })
                .collect()
        };
        let r = self.sat.solve(&assumptions, &mut check);
        self.loop_nogoods += nogoods;
        match r {
            SolveResult::Sat => Some(
                self.atom_var
                    .iter()
                    .map(|&v| self.sat.value(Lit::new(v, true)) == Some(true))
                    .collect(),
            ),
            SolveResult::Unsat => None,
        }
    }

    /// Objective value of a model mask.
    pub fn cost(&self, mask: &[bool]) -> u128 {
        cost_of(self.gp, mask)
    }
}

/// Sum of the weights of weak constraints whose bodies hold in `mask`.
pub fn cost_of(gp: &GroundProgram, mask: &[bool]) -> u128 {
    gp.weak
        .iter()
        .filter(|w| w.pos.iter().all(|a| mask[a.index()]) && w.neg.iter().all(|a| !mask[a.index()]))
        .map(|w| u128::from(w.weight))
        .sum()
}
