//! Brute-force reference for small problems, independent of the grounder
//! and the solver: naive instantiation over the Herbrand universe, then a
//! guess over the derivable atoms that occur negatively, each guess checked
//! against the least model of the reduct.

use std::collections::{BTreeMap, BTreeSet};

use super::{AbductionError, Pap, Solution};
use crate::model::{Atom, BodyElement, Comparison, Expr, Interpretation, Literal, Program, Rule, Symbol, Term};
use crate::stable::{least_model, reduct, PositiveRule};

pub const ORACLE_MAX_HYPOTHESES: usize = 16;
/// Limit on the atoms whose truth value must be guessed.
pub const ORACLE_MAX_GUESS_ATOMS: usize = 20;
const MAX_INSTANCES: usize = 200_000;

fn subst_term(t: &Term, s: &BTreeMap<Symbol, Term>) -> Term {
    match t {
        Term::Variable(v) => s[v].clone(),
        other => other.clone(),
    }
}

fn subst_atom(a: &Atom, s: &BTreeMap<Symbol, Term>) -> Atom {
    Atom {
        predicate: a.predicate.clone(),
        args: a.args.iter().map(|t| subst_term(t, s)).collect(),
    }
}

fn subst_expr(e: &Expr, s: &BTreeMap<Symbol, Term>) -> Expr {
    match e {
        Expr::Term(t) => Expr::Term(subst_term(t, s)),
        Expr::Sum(a, b) => Expr::Sum(subst_term(a, s), subst_term(b, s)),
    }
}

/// Every instance of every rule over `universe`, built-ins evaluated.
fn naive_ground(p: &Program, universe: &[Term]) -> Result<Program, AbductionError> {
    let mut out = Program::default();
    let mut count = 0usize;
    for r in &p.rules {
        let vars: Vec<Symbol> = r
            .head
            .iter()
            .flat_map(|h| h.variables())
            .chain(r.literals().flat_map(|l| l.atom.variables()))
            .chain(r.body.iter().flat_map(|b| {
                match b {
                    BodyElement::Builtin(c) => c
                        .left
                        .terms()
                        .chain(c.right.terms())
                        .filter_map(|t| match t {
                            Term::Variable(v) => Some(v),
                            _ => None,
                        })
                        .collect::<Vec<_>>(),
                    BodyElement::Literal(_) => Vec::new(),
                }
            }))
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let combos = universe
            .len()
            .checked_pow(vars.len() as u32)
            .filter(|&n| n <= MAX_INSTANCES)
            .ok_or_else(|| AbductionError::TooLarge(format!("rule `{r}` has too many instances")))?;
        count += combos;
        if count > MAX_INSTANCES {
            return Err(AbductionError::TooLarge("too many ground instances".into()));
        }
        let mut idx = vec![0usize; vars.len()];
        'instances: for _ in 0..combos {
            let s: BTreeMap<Symbol, Term> = vars
                .iter()
                .cloned()
                .zip(idx.iter().map(|&i| universe[i].clone()))
                .collect();
            for i in idx.iter_mut() {
                *i += 1;
                if *i < universe.len() {
                    break;
                }
                *i = 0;
            }
            let mut body = Vec::new();
            for b in &r.body {
                match b {
                    BodyElement::Literal(l) => body.push(BodyElement::Literal(Literal {
                        atom: subst_atom(&l.atom, &s),
                        polarity: l.polarity,
                    })),
                    BodyElement::Builtin(c) => {
                        let g = Comparison {
                            left: subst_expr(&c.left, &s),
                            op: c.op,
                            right: subst_expr(&c.right, &s),
                        };
                        if g.holds() != Some(true) {
                            continue 'instances;
                        }
                    }
                }
            }
            out.rules.push(Rule {
                head: r.head.as_ref().map(|h| subst_atom(h, &s)),
                body,
            });
        }
    }
    Ok(out)
}

/// Constants of the problem plus, when the program does arithmetic, every
/// integer up to the default bound.
fn universe(pap: &Pap) -> Result<Vec<Term>, AbductionError> {
    let mut u = pap.program().constants();
    u.extend(pap.extra_constants());
    let arithmetic = pap.program().rules.iter().flat_map(|r| &r.body).any(
        |b| matches!(b, BodyElement::Builtin(c) if matches!(c.left, Expr::Sum(..)) || matches!(c.right, Expr::Sum(..))),
    );
    if arithmetic {
        let bound = pap.default_integer_bound();
        if bound as usize > MAX_INSTANCES {
            return Err(AbductionError::TooLarge(format!("integer bound {bound}")));
        }
        u.extend((0..=bound).map(Term::Integer));
    }
    Ok(u.into_iter().collect())
}

/// A stable model of `ground` satisfying the observations. `fixed` atoms
/// are facts of `ground` that occur in no other head.
fn admissible_witness(pap: &Pap, ground: &Program, guess: &[Atom], fixed: &[Atom]) -> Option<Interpretation> {
    for bits in 0..1u64 << guess.len() {
        let g: Interpretation = guess
            .iter()
            .enumerate()
            .filter(|(i, _)| bits >> i & 1 == 1)
            .map(|(_, a)| a.clone())
            .chain(fixed.iter().cloned())
            .collect();
        let red = reduct(ground, &g).expect("ground");
        let m = least_model(&red.rules);
        // the reduct only depends on the negatively occurring atoms
        if guess.iter().any(|a| m.contains(a) != g.contains(a)) {
            continue;
        }
        if red.constraints.iter().any(|b| b.iter().all(|a| m.contains(a))) {
            continue;
        }
        if pap.explains(&m) {
            return Some(m);
        }
    }
    None
}

/// Every admissible solution, by enumerating all subsets of `H`.
pub fn brute_force_admissible(pap: &Pap) -> Result<Vec<Solution>, AbductionError> {
    let n = pap.hypotheses().len();
    if n > ORACLE_MAX_HYPOTHESES {
        return Err(AbductionError::TooLarge(format!("{n} hypotheses")));
    }
    let mut base = naive_ground(pap.program(), &universe(pap)?)?;
    // atoms underivable even with negation ignored and all of H assumed are
    // false in every stable model, and rules needing them never fire
    let relaxed: Vec<PositiveRule> = base
        .rules
        .iter()
        .filter_map(|r| {
            Some(PositiveRule {
                head: r.head.clone()?,
                body: r.positive_body().cloned().collect(),
            })
        })
        .chain(pap.hypotheses().iter().map(|h| PositiveRule {
            head: h.clone(),
            body: Vec::new(),
        }))
        .collect();
    let possible = least_model(&relaxed);
    base.rules.retain(|r| r.positive_body().all(|a| possible.contains(a)));
    // hypotheses are fixed per subset and need no guessing
    let guess: Vec<Atom> = base
        .rules
        .iter()
        .flat_map(|r| r.negative_body().cloned())
        .filter(|a| possible.contains(a) && !pap.hypotheses().contains(a))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if guess.len() > ORACLE_MAX_GUESS_ATOMS {
        return Err(AbductionError::TooLarge(format!("{} atoms to guess", guess.len())));
    }
    let mut out = Vec::new();
    for bits in 0..1u32 << n {
        let s: Vec<Atom> = pap
            .hypotheses()
            .iter()
            .enumerate()
            .filter(|(i, _)| bits >> i & 1 == 1)
            .map(|(_, h)| h.clone())
            .collect();
        let mut p = base.clone();
        p.rules.extend(s.iter().cloned().map(Rule::fact));
        if let Some(witness) = admissible_witness(pap, &p, &guess, &s) {
            out.push(Solution {
                cost: pap.sum_penalty(&s),
                hypotheses: s,
                witness,
            });
        }
    }
    Ok(out)
}

/// Every optimal solution.
pub fn brute_force_opt(pap: &Pap) -> Result<Vec<Solution>, AbductionError> {
    let adm = brute_force_admissible(pap)?;
    let Some(min) = adm.iter().map(|s| s.cost).min() else {
        return Ok(Vec::new());
    };
    Ok(adm.into_iter().filter(|s| s.cost == min).collect())
}
