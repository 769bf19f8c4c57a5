//! Instantiation of non-ground programs.
//!
//! Grounding runs in two phases. A semi-naive fixpoint first computes the
//! atoms that can possibly be derived (negative literals are ignored, so this
//! over-approximates every stable model). The rules, strong constraints and
//! weak constraints are then instantiated against that set: instances with a
//! positive body atom outside it are dropped, negative literals over atoms
//! outside it are removed (they are true in every stable model), and
//! built-in comparisons are evaluated and deleted.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::model::{
    compare_values, Atom, BodyElement, CmpOp, Comparison, Expr, Interpretation, Literal, Program, Rule, Symbol, Term,
    WeakConstraint,
};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct AtomId(pub u32);

impl AtomId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct GroundRule {
    pub head: Option<AtomId>,
    pub pos: Vec<AtomId>,
    pub neg: Vec<AtomId>,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct GroundWeak {
    pub pos: Vec<AtomId>,
    pub neg: Vec<AtomId>,
    pub weight: u64,
}

/// Constants available for instantiation together with the largest integer
/// that arithmetic may produce.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HerbrandUniverse {
    pub constants: BTreeSet<Term>,
    pub integer_bound: u64,
}

impl HerbrandUniverse {
    pub fn size(&self) -> usize {
        self.constants.len()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RuleKind {
    Rule,
    Weak,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SafetyViolation {
    pub kind: RuleKind,
    /// Index into `Program::rules` or `Program::weak_constraints`.
    pub index: usize,
    pub variables: Vec<Symbol>,
    pub text: String,
}

impl fmt::Display for SafetyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vars: Vec<_> = self.variables.iter().map(Symbol::as_str).collect();
        write!(f, "unsafe variable(s) {} in `{}`", vars.join(", "), self.text)
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum GroundError {
    #[error("program is not safe: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    UnsafeProgram(Vec<SafetyViolation>),
    #[error("integer {value} exceeds the integer bound {bound}")]
    IntegerOverflow { value: u64, bound: u64 },
    #[error("rule `{0}` is not ground")]
    NonGround(String),
}

/// A ground program over interned atoms. Every atom mentioned by a rule or
/// weak constraint belongs to the base.
#[derive(Clone, Debug, Default)]
pub struct GroundProgram {
    atoms: Vec<Atom>,
    index: HashMap<Atom, AtomId>,
    pub rules: Vec<GroundRule>,
    pub weak: Vec<GroundWeak>,
}

impl GroundProgram {
    /// Interns an already ground program without simplification. Built-ins
    /// are evaluated: instances with a false comparison are dropped.
    pub fn from_program(p: &Program) -> Result<Self, GroundError> {
        let mut g = GroundProgram::default();
        for r in &p.rules {
            if !r.is_ground() {
                return Err(GroundError::NonGround(r.to_string()));
            }
            if let Some((pos, neg)) = g.intern_body(&r.body) {
                let head = r.head.as_ref().map(|h| g.intern(h));
                g.rules.push(GroundRule { head, pos, neg });
            }
        }
        for w in &p.weak_constraints {
            if !w.body.iter().all(BodyElement::is_ground) {
                return Err(GroundError::NonGround(w.to_string()));
            }
            if let Some((pos, neg)) = g.intern_body(&w.body) {
                g.weak.push(GroundWeak {
                    pos,
                    neg,
                    weight: w.weight,
                });
            }
        }
        Ok(g)
    }

    fn intern_body(&mut self, body: &[BodyElement]) -> Option<(Vec<AtomId>, Vec<AtomId>)> {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for b in body {
            match b {
                BodyElement::Literal(l) => {
                    let id = self.intern(&l.atom);
                    let list = if l.is_positive() { &mut pos } else { &mut neg };
                    if !list.contains(&id) {
                        list.push(id);
                    }
                }
                BodyElement::Builtin(c) => {
                    if c.holds() != Some(true) {
                        return None;
                    }
                }
            }
        }
        Some((pos, neg))
    }

    pub fn intern(&mut self, atom: &Atom) -> AtomId {
        if let Some(&id) = self.index.get(atom) {
            return id;
        }
        let id = AtomId(self.atoms.len() as u32);
        self.atoms.push(atom.clone());
        self.index.insert(atom.clone(), id);
        id
    }

    pub fn atom(&self, id: AtomId) -> &Atom {
        &self.atoms[id.index()]
    }

    pub fn id_of(&self, atom: &Atom) -> Option<AtomId> {
        self.index.get(atom).copied()
    }

    /// The Herbrand base, in interning order.
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn to_program(&self) -> Program {
        let lit = |id: &AtomId, positive: bool| -> BodyElement {
            let a = self.atom(*id).clone();
            if positive {
                Literal::positive(a).into()
            } else {
                Literal::negative(a).into()
            }
        };
        let body = |pos: &[AtomId], neg: &[AtomId]| -> Vec<BodyElement> {
            pos.iter()
                .map(|a| lit(a, true))
                .chain(neg.iter().map(|a| lit(a, false)))
                .collect()
        };
        Program {
            rules: self
                .rules
                .iter()
                .map(|r| Rule {
                    head: r.head.map(|h| self.atom(h).clone()),
                    body: body(&r.pos, &r.neg),
                })
                .collect(),
            weak_constraints: self
                .weak
                .iter()
                .map(|w| WeakConstraint::new(body(&w.pos, &w.neg), w.weight))
                .collect(),
        }
    }

    /// Membership mask over the base. Returns `None` when the interpretation
    /// contains atoms outside the base.
    pub fn mask_of(&self, i: &Interpretation) -> Option<Vec<bool>> {
        let mut mask = vec![false; self.atoms.len()];
        for a in i.iter() {
            mask[self.id_of(a)?.index()] = true;
        }
        Some(mask)
    }

    pub fn interpretation_of(&self, mask: &[bool]) -> Interpretation {
        self.atoms
            .iter()
            .zip(mask)
            .filter(|(_, &b)| b)
            .map(|(a, _)| a.clone())
            .collect()
    }

    /// Adds a ground rule (interning its atoms).
    pub fn add_rule(&mut self, head: Option<&Atom>, pos: &[Atom], neg: &[Atom]) {
        let head = head.map(|h| self.intern(h));
        let pos = pos.iter().map(|a| self.intern(a)).collect();
        let neg = neg.iter().map(|a| self.intern(a)).collect();
        self.rules.push(GroundRule { head, pos, neg });
    }
}

impl fmt::Display for GroundProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_program())
    }
}

fn rule_vars(body: &[BodyElement], head: Option<&Atom>) -> BTreeSet<Symbol> {
    let mut vars = BTreeSet::new();
    if let Some(a) = head {
        vars.extend(a.variables().cloned());
    }
    for b in body {
        match b {
            BodyElement::Literal(l) => vars.extend(l.atom.variables().cloned()),
            BodyElement::Builtin(c) => vars.extend(cmp_vars(c)),
        }
    }
    vars
}

fn cmp_vars(c: &Comparison) -> impl Iterator<Item = Symbol> + '_ {
    c.left.terms().chain(c.right.terms()).filter_map(|t| match t {
        Term::Variable(v) => Some(v.clone()),
        _ => None,
    })
}

/// Variables that are bound by positive literals, or by an equality whose
/// other side only uses bound variables.
fn safe_vars(body: &[BodyElement]) -> BTreeSet<Symbol> {
    let mut safe: BTreeSet<Symbol> = body
        .iter()
        .filter_map(BodyElement::as_literal)
        .filter(|l| l.is_positive())
        .flat_map(|l| l.atom.variables().cloned())
        .collect();
    loop {
        let mut changed = false;
        for b in body {
            let BodyElement::Builtin(c) = b else { continue };
            if c.op != CmpOp::Eq {
                continue;
            }
            for (lhs, rhs) in [(&c.left, &c.right), (&c.right, &c.left)] {
                if let Expr::Term(Term::Variable(v)) = lhs {
                    let rhs_safe = rhs.terms().all(|t| match t {
                        Term::Variable(w) => safe.contains(w),
                        _ => true,
                    });
                    if rhs_safe && safe.insert(v.clone()) {
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return safe;
        }
    }
}

/// Reports every rule or weak constraint with a variable that is not bound
/// by a positive, non-built-in body literal (or by an equality over such
/// variables).
pub fn check_safety(p: &Program) -> Vec<SafetyViolation> {
    let mut out = Vec::new();
    let mut check = |kind, index, head: Option<&Atom>, body: &[BodyElement], text: String| {
        let safe = safe_vars(body);
        let bad: Vec<Symbol> = rule_vars(body, head)
            .into_iter()
            .filter(|v| !safe.contains(v))
            .collect();
        if !bad.is_empty() {
            out.push(SafetyViolation {
                kind,
                index,
                variables: bad,
                text,
            });
        }
    };
    for (i, r) in p.rules.iter().enumerate() {
        check(RuleKind::Rule, i, r.head.as_ref(), &r.body, r.to_string());
    }
    for (i, w) in p.weak_constraints.iter().enumerate() {
        check(RuleKind::Weak, i, None, &w.body, w.to_string());
    }
    out
}

// ---------------------------------------------------------------------------
// compiled rules

#[derive(Clone, Debug)]
enum Pat {
    Var(usize),
    Val(Term),
}

#[derive(Clone, Debug)]
struct CAtom {
    pred: Symbol,
    args: Vec<Pat>,
}

#[derive(Clone, Debug)]
enum CExpr {
    Pat(Pat),
    Sum(Pat, Pat),
}

#[derive(Clone, Debug)]
struct CCmp {
    left: CExpr,
    op: CmpOp,
    right: CExpr,
}

#[derive(Clone, Debug)]
enum Action {
    Check(usize),
    /// Bind variable from the evaluated expression of the other side.
    Assign {
        cmp: usize,
        var: usize,
        from_left: bool,
    },
}

#[derive(Clone, Debug)]
struct CRule {
    head: Option<CAtom>,
    pos: Vec<CAtom>,
    neg: Vec<CAtom>,
    cmps: Vec<CCmp>,
    nvars: usize,
    weight: Option<u64>,
}

struct Compiler {
    vars: HashMap<Symbol, usize>,
}

impl Compiler {
    fn pat(&mut self, t: &Term) -> Pat {
        match t {
            Term::Variable(v) => {
                let n = self.vars.len();
                Pat::Var(*self.vars.entry(v.clone()).or_insert(n))
            }
            other => Pat::Val(other.clone()),
        }
    }

    fn atom(&mut self, a: &Atom) -> CAtom {
        CAtom {
            pred: a.predicate.clone(),
            args: a.args.iter().map(|t| self.pat(t)).collect(),
        }
    }

    fn expr(&mut self, e: &Expr) -> CExpr {
        match e {
            Expr::Term(t) => CExpr::Pat(self.pat(t)),
            Expr::Sum(a, b) => CExpr::Sum(self.pat(a), self.pat(b)),
        }
    }
}

fn compile(head: Option<&Atom>, body: &[BodyElement], weight: Option<u64>) -> CRule {
    let mut c = Compiler { vars: HashMap::new() };
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut cmps = Vec::new();
    for b in body {
        match b {
            BodyElement::Literal(l) if l.is_positive() => pos.push(c.atom(&l.atom)),
            BodyElement::Literal(l) => neg.push(c.atom(&l.atom)),
            BodyElement::Builtin(cmp) => cmps.push(CCmp {
                left: c.expr(&cmp.left),
                op: cmp.op,
                right: c.expr(&cmp.right),
            }),
        }
    }
    let head = head.map(|h| c.atom(h));
    CRule {
        head,
        pos,
        neg,
        cmps,
        nvars: c.vars.len(),
        weight,
    }
}

fn pat_vars(p: &Pat) -> Option<usize> {
    match p {
        Pat::Var(v) => Some(*v),
        Pat::Val(_) => None,
    }
}

fn expr_vars(e: &CExpr) -> Vec<usize> {
    match e {
        CExpr::Pat(p) => pat_vars(p).into_iter().collect(),
        CExpr::Sum(a, b) => pat_vars(a).into_iter().chain(pat_vars(b)).collect(),
    }
}

#[derive(Default)]
struct Relation {
    tuples: Vec<Vec<Term>>,
    set: HashSet<Vec<Term>>,
    index: Vec<HashMap<Term, Vec<u32>>>,
}

impl Relation {
    fn insert(&mut self, tuple: Vec<Term>) -> bool {
        if self.set.contains(&tuple) {
            return false;
        }
        if self.index.len() < tuple.len() {
            self.index.resize_with(tuple.len(), HashMap::new);
        }
        let id = self.tuples.len() as u32;
        for (i, t) in tuple.iter().enumerate() {
            self.index[i].entry(t.clone()).or_default().push(id);
        }
        self.set.insert(tuple.clone());
        self.tuples.push(tuple);
        true
    }
}

#[derive(Default)]
struct Store {
    rels: HashMap<Symbol, Relation>,
}

impl Store {
    fn len(&self, pred: &Symbol) -> usize {
        self.rels.get(pred).map_or(0, |r| r.tuples.len())
    }

    fn contains(&self, pred: &Symbol, tuple: &[Term]) -> bool {
        self.rels.get(pred).is_some_and(|r| r.set.contains(tuple))
    }
}

fn eval_pat(p: &Pat, binding: &[Option<Term>]) -> Option<Term> {
    match p {
        Pat::Var(v) => binding[*v].clone(),
        Pat::Val(t) => Some(t.clone()),
    }
}

/// `None` when unbound; `Some(None)` when the expression is undefined
/// (sum over non-integers or overflow).
fn eval_expr(e: &CExpr, binding: &[Option<Term>]) -> Option<Option<Term>> {
    match e {
        CExpr::Pat(p) => eval_pat(p, binding).map(Some),
        CExpr::Sum(a, b) => {
            let (x, y) = (eval_pat(a, binding)?, eval_pat(b, binding)?);
            Some(match (x, y) {
                (Term::Integer(x), Term::Integer(y)) => x.checked_add(y).map(Term::Integer),
                _ => None,
            })
        }
    }
}

/// Builds the list of comparison actions to run after each join depth.
fn schedule(rule: &CRule, order: &[usize]) -> Vec<Vec<Action>> {
    let mut bound = vec![false; rule.nvars];
    let mut done = vec![false; rule.cmps.len()];
    let mut plan = Vec::with_capacity(order.len() + 1);
    for depth in 0..=order.len() {
        if depth > 0 {
            for p in &rule.pos[order[depth - 1]].args {
                if let Pat::Var(v) = p {
                    bound[*v] = true;
                }
            }
        }
        let mut actions = Vec::new();
        loop {
            let mut progress = false;
            for (i, c) in rule.cmps.iter().enumerate() {
                if done[i] {
                    continue;
                }
                let lv = expr_vars(&c.left);
                let rv = expr_vars(&c.right);
                let all = |vs: &[usize]| vs.iter().all(|v| bound[*v]);
                if all(&lv) && all(&rv) {
                    actions.push(Action::Check(i));
                    done[i] = true;
                    progress = true;
                } else if c.op == CmpOp::Eq {
                    let single = |e: &CExpr| match e {
                        CExpr::Pat(Pat::Var(v)) if !bound[*v] => Some(*v),
                        _ => None,
                    };
                    if let (Some(v), true) = (single(&c.left), all(&rv)) {
                        actions.push(Action::Assign {
                            cmp: i,
                            var: v,
                            from_left: false,
                        });
                        bound[v] = true;
                        done[i] = true;
                        progress = true;
                    } else if let (Some(v), true) = (single(&c.right), all(&lv)) {
                        actions.push(Action::Assign {
                            cmp: i,
                            var: v,
                            from_left: true,
                        });
                        bound[v] = true;
                        done[i] = true;
                        progress = true;
                    }
                }
            }
            if !progress {
                break;
            }
        }
        plan.push(actions);
    }
    plan
}

/// Greedy join order: most bound arguments first, then smallest relation.
fn join_order(rule: &CRule, store: &Store, first: Option<usize>) -> Vec<usize> {
    let mut bound = vec![false; rule.nvars];
    let mut order = Vec::with_capacity(rule.pos.len());
    let mut remaining: Vec<usize> = (0..rule.pos.len()).collect();
    let take = |i: usize, bound: &mut Vec<bool>, order: &mut Vec<usize>| {
        for p in &rule.pos[i].args {
            if let Pat::Var(v) = p {
                bound[*v] = true;
            }
        }
        order.push(i);
    };
    if let Some(f) = first {
        remaining.retain(|&i| i != f);
        take(f, &mut bound, &mut order);
    }
    while !remaining.is_empty() {
        let (k, _) = remaining
            .iter()
            .enumerate()
            .map(|(k, &i)| {
                let a = &rule.pos[i];
                let free = a.args.iter().filter(|p| matches!(p, Pat::Var(v) if !bound[*v])).count();
                (k, (free, store.len(&a.pred)))
            })
            .min_by_key(|(_, key)| *key)
            .expect("non-empty");
        let i = remaining.remove(k);
        take(i, &mut bound, &mut order);
    }
    order
}

struct Join<'a> {
    rule: &'a CRule,
    store: &'a Store,
    order: Vec<usize>,
    plan: Vec<Vec<Action>>,
    /// Tuple index range per position in `order`.
    ranges: Vec<(usize, usize)>,
    bound: u64,
}

impl Join<'_> {
    fn run(&self, emit: &mut dyn FnMut(&[Option<Term>])) {
        let mut binding = vec![None; self.rule.nvars];
        self.step(0, &mut binding, emit);
    }

    fn apply(&self, depth: usize, binding: &mut [Option<Term>], assigned: &mut Vec<usize>) -> bool {
        for action in &self.plan[depth] {
            match action {
                Action::Check(i) => {
                    let c = &self.rule.cmps[*i];
                    let l = eval_expr(&c.left, binding).expect("scheduled when bound");
                    let r = eval_expr(&c.right, binding).expect("scheduled when bound");
                    match (l, r) {
                        (Some(l), Some(r)) if compare_values(&l, c.op, &r) => {}
                        _ => return false,
                    }
                }
                Action::Assign { cmp, var, from_left } => {
                    let c = &self.rule.cmps[*cmp];
                    let src = if *from_left { &c.left } else { &c.right };
                    match eval_expr(src, binding).expect("scheduled when bound") {
                        Some(Term::Integer(n)) if n > self.bound => return false,
                        Some(t) => {
                            binding[*var] = Some(t);
                            assigned.push(*var);
                        }
                        None => return false,
                    }
                }
            }
        }
        true
    }

    fn step(&self, depth: usize, binding: &mut Vec<Option<Term>>, emit: &mut dyn FnMut(&[Option<Term>])) {
        let mut assigned = Vec::new();
        if self.apply(depth, binding, &mut assigned) {
            if depth == self.order.len() {
                emit(binding);
            } else {
                self.match_literal(depth, binding, emit);
            }
        }
        for v in assigned {
            binding[v] = None;
        }
    }

    fn match_literal(&self, depth: usize, binding: &mut Vec<Option<Term>>, emit: &mut dyn FnMut(&[Option<Term>])) {
        let lit = &self.rule.pos[self.order[depth]];
        let Some(rel) = self.store.rels.get(&lit.pred) else {
            return;
        };
        let (lo, hi) = self.ranges[depth];
        let hi = hi.min(rel.tuples.len());
        let key = lit
            .args
            .iter()
            .enumerate()
            .find_map(|(i, p)| eval_pat(p, binding).map(|t| (i, t)));
        let mut try_tuple = |idx: usize, binding: &mut Vec<Option<Term>>| {
            let tuple = &rel.tuples[idx];
            if tuple.len() != lit.args.len() {
                return;
            }
            let mut newly = Vec::new();
            let mut ok = true;
            for (p, t) in lit.args.iter().zip(tuple) {
                match p {
                    Pat::Val(v) => {
                        if v != t {
                            ok = false;
                            break;
                        }
                    }
                    Pat::Var(v) => match &binding[*v] {
                        Some(b) if b != t => {
                            ok = false;
                            break;
                        }
                        Some(_) => {}
                        None => {
                            binding[*v] = Some(t.clone());
                            newly.push(*v);
                        }
                    },
                }
            }
            if ok {
                self.step(depth + 1, binding, emit);
            }
            for v in newly {
                binding[v] = None;
            }
        };
        match key {
            Some((pos, value)) => {
                let Some(ids) = rel.index.get(pos).and_then(|m| m.get(&value)) else {
                    return;
                };
                for &idx in ids {
                    let idx = idx as usize;
                    if idx >= lo && idx < hi {
                        try_tuple(idx, binding);
                    }
                }
            }
            None => {
                for idx in lo..hi {
                    try_tuple(idx, binding);
                }
            }
        }
    }
}

fn instantiate(a: &CAtom, binding: &[Option<Term>]) -> Vec<Term> {
    a.args
        .iter()
        .map(|p| eval_pat(p, binding).expect("safe rules bind every variable"))
        .collect()
}

/// Default integer bound: the largest integer constant plus `extra`.
pub fn default_integer_bound(p: &Program, extra: u64) -> u64 {
    p.max_integer().unwrap_or(0).saturating_add(extra)
}

/// The Herbrand universe of `p` extended with `extra_constants`.
pub fn herbrand_universe(p: &Program, extra_constants: &BTreeSet<Term>, integer_bound: u64) -> HerbrandUniverse {
    let mut constants = p.constants();
    constants.extend(extra_constants.iter().cloned());
    HerbrandUniverse {
        constants,
        integer_bound,
    }
}

/// Largest integer constant subject to the bound. Arguments of atoms in the
/// reserved `_` namespace are internal indices and exempt.
fn max_bounded_integer(p: &Program, extra: &BTreeSet<Term>) -> Option<u64> {
    let int = |t: &Term| match t {
        Term::Integer(n) => Some(*n),
        _ => None,
    };
    let bodies = p
        .rules
        .iter()
        .flat_map(|r| r.body.iter())
        .chain(p.weak_constraints.iter().flat_map(|w| w.body.iter()));
    let builtins = bodies
        .filter_map(|b| match b {
            BodyElement::Builtin(c) => Some(c.left.terms().chain(c.right.terms()).filter_map(int).max()),
            BodyElement::Literal(_) => None,
        })
        .flatten();
    let atoms = p
        .atoms()
        .filter(|a| !a.predicate.is_reserved())
        .flat_map(|a| a.args.iter().filter_map(int));
    atoms.chain(builtins).chain(extra.iter().filter_map(int)).max()
}

/// Computes the simplified ground instantiation of a safe program.
pub fn ground(p: &Program, extra_constants: &BTreeSet<Term>, integer_bound: u64) -> Result<GroundProgram, GroundError> {
    let violations = check_safety(p);
    if !violations.is_empty() {
        return Err(GroundError::UnsafeProgram(violations));
    }
    if let Some(n) = max_bounded_integer(p, extra_constants) {
        if n > integer_bound {
            return Err(GroundError::IntegerOverflow {
                value: n,
                bound: integer_bound,
            });
        }
    }

    let rules: Vec<CRule> = p
        .rules
        .iter()
        .map(|r| compile(r.head.as_ref(), &r.body, None))
        .collect();
    let weak: Vec<CRule> = p
        .weak_constraints
        .iter()
        .map(|w| compile(None, &w.body, Some(w.weight)))
        .collect();

    let store = derive_possible(&rules, integer_bound);

    let mut out = GroundProgram::default();
    let mut seen_rules = HashSet::new();
    for rule in &rules {
        let order = join_order(rule, &store, None);
        let plan = schedule(rule, &order);
        let ranges = vec![(0, usize::MAX); order.len()];
        let join = Join {
            rule,
            store: &store,
            order,
            plan,
            ranges,
            bound: integer_bound,
        };
        join.run(&mut |b| {
            let (pos, neg) = instantiate_body(rule, b, &store, &mut out);
            let head = rule.head.as_ref().map(|h| {
                out.intern(&Atom {
                    predicate: h.pred.clone(),
                    args: instantiate(h, b),
                })
            });
            let gr = GroundRule { head, pos, neg };
            if seen_rules.insert(gr.clone()) {
                out.rules.push(gr);
            }
        });
    }
    for rule in &weak {
        let order = join_order(rule, &store, None);
        let plan = schedule(rule, &order);
        let ranges = vec![(0, usize::MAX); order.len()];
        let join = Join {
            rule,
            store: &store,
            order,
            plan,
            ranges,
            bound: integer_bound,
        };
        join.run(&mut |b| {
            let (pos, neg) = instantiate_body(rule, b, &store, &mut out);
            out.weak.push(GroundWeak {
                pos,
                neg,
                weight: rule.weight.unwrap_or(1),
            });
        });
    }
    Ok(out)
}

fn instantiate_body(
    rule: &CRule,
    b: &[Option<Term>],
    store: &Store,
    out: &mut GroundProgram,
) -> (Vec<AtomId>, Vec<AtomId>) {
    let mut pos = Vec::with_capacity(rule.pos.len());
    for a in &rule.pos {
        let id = out.intern(&Atom {
            predicate: a.pred.clone(),
            args: instantiate(a, b),
        });
        if !pos.contains(&id) {
            pos.push(id);
        }
    }
    let mut neg = Vec::new();
    for a in &rule.neg {
        let args = instantiate(a, b);
        if store.contains(&a.pred, &args) {
            let id = out.intern(&Atom {
                predicate: a.pred.clone(),
                args,
            });
            if !neg.contains(&id) {
                neg.push(id);
            }
        }
    }
    (pos, neg)
}

/// Semi-naive fixpoint of the positive part of all rules with a head.
fn derive_possible(rules: &[CRule], bound: u64) -> Store {
    let mut store = Store::default();
    let heads: Vec<&CRule> = rules.iter().filter(|r| r.head.is_some()).collect();
    // previous round's delta, as a tuple range per predicate
    let mut delta: HashMap<Symbol, (usize, usize)> = HashMap::new();
    let mut first = true;
    loop {
        let mut derived: Vec<(Symbol, Vec<Term>)> = Vec::new();
        for rule in &heads {
            let head = rule.head.as_ref().expect("filtered");
            let mut emit = |b: &[Option<Term>]| derived.push((head.pred.clone(), instantiate(head, b)));
            if first {
                let order = join_order(rule, &store, None);
                let plan = schedule(rule, &order);
                let ranges = vec![(0, usize::MAX); order.len()];
                Join {
                    rule,
                    store: &store,
                    order,
                    plan,
                    ranges,
                    bound,
                }
                .run(&mut emit);
                continue;
            }
            for (j, lit) in rule.pos.iter().enumerate() {
                let Some(&(lo, hi)) = delta.get(&lit.pred) else {
                    continue;
                };
                if lo == hi {
                    continue;
                }
                let order = join_order(rule, &store, Some(j));
                let plan = schedule(rule, &order);
                let mut ranges = vec![(0, usize::MAX); order.len()];
                ranges[0] = (lo, hi);
                Join {
                    rule,
                    store: &store,
                    order,
                    plan,
                    ranges,
                    bound,
                }
                .run(&mut emit);
            }
        }
        first = false;
        let before: HashMap<Symbol, usize> = derived.iter().map(|(p, _)| (p.clone(), store.len(p))).collect();
        let mut any = false;
        for (pred, tuple) in derived {
            if store.rels.entry(pred).or_default().insert(tuple) {
                any = true;
            }
        }
        if !any {
            return store;
        }
        delta = before
            .into_iter()
            .map(|(p, lo)| {
                let hi = store.len(&p);
                (p, (lo, hi))
            })
            .collect();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    fn ground_text(text: &str, bound: u64) -> GroundProgram {
        ground(&parse_program(text).unwrap(), &BTreeSet::new(), bound).unwrap()
    }

    fn rule_strings(g: &GroundProgram) -> BTreeSet<String> {
        g.to_program().rules.iter().map(ToString::to_string).collect()
    }

    #[test]
    fn safety() {
        let p = parse_program("p(X) :- q(X).").unwrap();
        assert!(check_safety(&p).is_empty());
        let p = parse_program("p(X) :- not q(X).").unwrap();
        let v = check_safety(&p);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].variables, vec![Symbol::new("X")]);
        let p = parse_program("badTour :- c(I,J), c(I,K), J != K.").unwrap();
        assert!(check_safety(&p).is_empty());
        let p = parse_program("on(B,L,T1) :- move(B,L,T), T1 = T + 1.").unwrap();
        assert!(check_safety(&p).is_empty());
        let p = parse_program("p(X) :- X = Y + 1, q(Z).").unwrap();
        assert_eq!(check_safety(&p)[0].variables.len(), 2);
    }

    #[test]
    fn unsafe_program_is_rejected() {
        let p = parse_program("p(X) :- not q(X).").unwrap();
        assert!(matches!(
            ground(&p, &BTreeSet::new(), 0),
            Err(GroundError::UnsafeProgram(_))
        ));
    }

    #[test]
    fn simple_instantiation() {
        let g = ground_text("q(1). q(2). p(X) :- q(X).", 2);
        let expected: BTreeSet<String> = ["q(1).", "q(2).", "p(1) :- q(1).", "p(2) :- q(2)."]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(rule_strings(&g), expected);
    }

    #[test]
    fn inequality_instances() {
        // all four c-atoms possible; I in {1,2}, J != K ordered pairs
        let g = ground_text("c(1,1). c(1,2). c(2,1). c(2,2). badTour :- c(I,J), c(I,K), J != K.", 2);
        let bad = g.rules.iter().filter(|r| r.head.is_some() && !r.pos.is_empty()).count();
        assert_eq!(bad, 4);
    }

    #[test]
    fn arithmetic_respects_bound() {
        let g = ground_text("t(0). t(1). t(2). t(3). s(T1) :- t(T), T1 = T + 1.", 3);
        let heads: BTreeSet<String> = g
            .rules
            .iter()
            .filter(|r| !r.pos.is_empty())
            .map(|r| g.atom(r.head.unwrap()).to_string())
            .collect();
        let expected: BTreeSet<String> = ["s(1)", "s(2)", "s(3)"].iter().map(|s| s.to_string()).collect();
        assert_eq!(heads, expected);
    }

    #[test]
    fn integer_constant_over_bound() {
        let p = parse_program("q(7).").unwrap();
        assert_eq!(
            ground(&p, &BTreeSet::new(), 3).unwrap_err(),
            GroundError::IntegerOverflow { value: 7, bound: 3 }
        );
    }

    #[test]
    fn recursion_reaches_fixpoint() {
        let g = ground_text("e(1,2). e(2,3). e(3,4). r(X,Y) :- e(X,Y). r(X,Z) :- r(X,Y), e(Y,Z).", 4);
        let derived: BTreeSet<String> = g
            .rules
            .iter()
            .filter_map(|r| r.head)
            .map(|h| g.atom(h).to_string())
            .filter(|s| s.starts_with("r("))
            .collect();
        assert_eq!(derived.len(), 6);
    }

    #[test]
    fn impossible_negative_literals_are_dropped() {
        let g = ground_text("a :- not b. c :- d.", 0);
        assert_eq!(g.rules.len(), 1);
        assert!(g.rules[0].neg.is_empty());
    }

    #[test]
    fn grounding_is_idempotent() {
        let text = "node(a). node(b). edge(a,b). r(X,X) :- node(X), not off(X). \
                    r(X,Z) :- r(X,Y), edge(Y,Z), not off(Z). off(X) :- node(X), not on(X). \
                    on(X) :- node(X), not off(X). :- r(a,b). :~ off(X). [2:]";
        let g1 = ground_text(text, 0);
        let g2 = ground(&g1.to_program(), &BTreeSet::new(), 0).unwrap();
        assert_eq!(rule_strings(&g1), rule_strings(&g2));
        assert_eq!(g1.weak.len(), g2.weak.len());
    }

    #[test]
    fn instance_count_respects_universe_bound() {
        let p = parse_program("c(1,2). c(2,1). c(1,3). c(3,1). c(2,3). c(3,2). b :- c(I,J), c(I,K), J != K.").unwrap();
        let u = herbrand_universe(&p, &BTreeSet::new(), 3);
        let g = ground(&p, &BTreeSet::new(), 3).unwrap();
        let max_vars = 3u32;
        assert!(g.rules.len() <= p.rules.len() * u.size().pow(max_vars));
    }
}
