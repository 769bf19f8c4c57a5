//! Abstract syntax for function-free normal logic programs and the basic
//! satisfaction relation between ground programs and interpretations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// An interned-by-value symbol name (predicate, constant or variable).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Names starting with an underscore are reserved for generated atoms.
    pub fn is_reserved(&self) -> bool {
        self.0.starts_with('_')
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Term {
    Constant(Symbol),
    Variable(Symbol),
    Integer(u64),
}

impl Term {
    pub fn constant(name: &str) -> Self {
        Term::Constant(Symbol::new(name))
    }

    pub fn variable(name: &str) -> Self {
        Term::Variable(Symbol::new(name))
    }

    pub fn is_ground(&self) -> bool {
        !matches!(self, Term::Variable(_))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Constant(s) | Term::Variable(s) => write!(f, "{s}"),
            Term::Integer(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Atom {
    pub predicate: Symbol,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: &str, args: Vec<Term>) -> Self {
        Atom {
            predicate: Symbol::new(predicate),
            args,
        }
    }

    /// A zero-arity atom.
    pub fn prop(predicate: &str) -> Self {
        Atom::new(predicate, Vec::new())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn variables(&self) -> impl Iterator<Item = &Symbol> {
        self.args.iter().filter_map(|t| match t {
            Term::Variable(v) => Some(v),
            _ => None,
        })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, t) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{t}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Literal {
    pub atom: Atom,
    pub polarity: Polarity,
}

impl Literal {
    pub fn positive(atom: Atom) -> Self {
        Literal {
            atom,
            polarity: Polarity::Positive,
        }
    }

    pub fn negative(atom: Atom) -> Self {
        Literal {
            atom,
            polarity: Polarity::Negative,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.polarity == Polarity::Positive
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.polarity {
            Polarity::Positive => write!(f, "{}", self.atom),
            Polarity::Negative => write!(f, "not {}", self.atom),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Gt,
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
        })
    }
}

/// One side of a built-in comparison: a term or the sum of two terms.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Expr {
    Term(Term),
    Sum(Term, Term),
}

impl Expr {
    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        let (a, b) = match self {
            Expr::Term(t) => (t, None),
            Expr::Sum(x, y) => (x, Some(y)),
        };
        std::iter::once(a).chain(b)
    }

    /// Evaluates a ground expression. Sums are only defined over integers.
    pub fn eval(&self) -> Option<Term> {
        match self {
            Expr::Term(t) if t.is_ground() => Some(t.clone()),
            Expr::Term(_) => None,
            Expr::Sum(Term::Integer(a), Term::Integer(b)) => a.checked_add(*b).map(Term::Integer),
            Expr::Sum(..) => None,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Term(t) => write!(f, "{t}"),
            Expr::Sum(a, b) => write!(f, "{a} + {b}"),
        }
    }
}

/// Built-in comparison `left op right`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Comparison {
    pub left: Expr,
    pub op: CmpOp,
    pub right: Expr,
}

impl Comparison {
    pub fn is_ground(&self) -> bool {
        self.left.terms().chain(self.right.terms()).all(Term::is_ground)
    }

    /// Truth value of a ground comparison. Integers order numerically and
    /// before constants; constants order lexicographically. Sums over
    /// non-integers (or overflowing sums) make the comparison false.
    pub fn holds(&self) -> Option<bool> {
        let l = self.left.eval();
        let r = self.right.eval();
        if !self.is_ground() {
            return None;
        }
        let (Some(l), Some(r)) = (l, r) else {
            return Some(false);
        };
        Some(compare_values(&l, self.op, &r))
    }
}

pub(crate) fn compare_values(l: &Term, op: CmpOp, r: &Term) -> bool {
    use std::cmp::Ordering;
    let ord = match (l, r) {
        (Term::Integer(a), Term::Integer(b)) => a.cmp(b),
        (Term::Integer(_), _) => Ordering::Less,
        (_, Term::Integer(_)) => Ordering::Greater,
        (a, b) => a.cmp(b),
    };
    match op {
        CmpOp::Eq => ord == Ordering::Equal,
        CmpOp::Ne => ord != Ordering::Equal,
        CmpOp::Lt => ord == Ordering::Less,
        CmpOp::Gt => ord == Ordering::Greater,
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.left, self.op, self.right)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum BodyElement {
    Literal(Literal),
    Builtin(Comparison),
}

impl BodyElement {
    pub fn is_ground(&self) -> bool {
        match self {
            BodyElement::Literal(l) => l.atom.is_ground(),
            BodyElement::Builtin(c) => c.is_ground(),
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            BodyElement::Literal(l) => Some(l),
            BodyElement::Builtin(_) => None,
        }
    }
}

impl From<Literal> for BodyElement {
    fn from(l: Literal) -> Self {
        BodyElement::Literal(l)
    }
}

impl fmt::Display for BodyElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyElement::Literal(l) => write!(f, "{l}"),
            BodyElement::Builtin(c) => write!(f, "{c}"),
        }
    }
}

fn write_body(f: &mut fmt::Formatter<'_>, body: &[BodyElement]) -> fmt::Result {
    for (i, b) in body.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{b}")?;
    }
    Ok(())
}

/// A normal rule; a missing head makes it a strong constraint.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Rule {
    pub head: Option<Atom>,
    pub body: Vec<BodyElement>,
}

impl Rule {
    pub fn fact(head: Atom) -> Self {
        Rule {
            head: Some(head),
            body: Vec::new(),
        }
    }

    pub fn new(head: Atom, body: Vec<BodyElement>) -> Self {
        Rule { head: Some(head), body }
    }

    pub fn constraint(body: Vec<BodyElement>) -> Self {
        Rule { head: None, body }
    }

    pub fn is_fact(&self) -> bool {
        self.head.is_some() && self.body.is_empty()
    }

    pub fn is_constraint(&self) -> bool {
        self.head.is_none()
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.body.iter().filter_map(BodyElement::as_literal)
    }

    /// B+(r)
    pub fn positive_body(&self) -> impl Iterator<Item = &Atom> {
        self.literals().filter(|l| l.is_positive()).map(|l| &l.atom)
    }

    /// B-(r)
    pub fn negative_body(&self) -> impl Iterator<Item = &Atom> {
        self.literals().filter(|l| !l.is_positive()).map(|l| &l.atom)
    }

    pub fn is_ground(&self) -> bool {
        self.head.as_ref().is_none_or(Atom::is_ground) && self.body.iter().all(BodyElement::is_ground)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.head, self.body.is_empty()) {
            (Some(h), true) => write!(f, "{h}."),
            (Some(h), false) => {
                write!(f, "{h} :- ")?;
                write_body(f, &self.body)?;
                f.write_str(".")
            }
            (None, _) => {
                f.write_str(":- ")?;
                write_body(f, &self.body)?;
                f.write_str(".")
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct WeakConstraint {
    pub body: Vec<BodyElement>,
    pub weight: u64,
}

impl WeakConstraint {
    pub fn new(body: Vec<BodyElement>, weight: u64) -> Self {
        WeakConstraint { body, weight }
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.body.iter().filter_map(BodyElement::as_literal)
    }
}

impl fmt::Display for WeakConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(":~ ")?;
        write_body(f, &self.body)?;
        write!(f, ". [{}:]", self.weight)
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Program {
    pub rules: Vec<Rule>,
    pub weak_constraints: Vec<WeakConstraint>,
}

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum ModelError {
    #[error("literal `{0}` is not ground")]
    NonGround(String),
    #[error("predicate `{predicate}` used with arity {found}, previously {expected}")]
    ArityClash {
        predicate: Symbol,
        expected: usize,
        found: usize,
    },
}

impl Program {
    pub fn new(rules: Vec<Rule>, weak_constraints: Vec<WeakConstraint>) -> Self {
        Program {
            rules,
            weak_constraints,
        }
    }

    pub fn is_ground(&self) -> bool {
        self.rules.iter().all(Rule::is_ground)
            && self
                .weak_constraints
                .iter()
                .all(|w| w.body.iter().all(BodyElement::is_ground))
    }

    /// Every atom occurring in the program, heads first, in source order.
    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.rules
            .iter()
            .flat_map(|r| r.head.iter().chain(r.literals().map(|l| &l.atom)))
            .chain(self.weak_constraints.iter().flat_map(|w| w.literals().map(|l| &l.atom)))
    }

    fn terms(&self) -> impl Iterator<Item = &Term> {
        let rule_terms = self.rules.iter().flat_map(|r| {
            r.head
                .iter()
                .flat_map(|h| h.args.iter())
                .chain(r.body.iter().flat_map(body_terms))
        });
        let weak_terms = self
            .weak_constraints
            .iter()
            .flat_map(|w| w.body.iter().flat_map(body_terms));
        rule_terms.chain(weak_terms)
    }

    pub fn constants(&self) -> BTreeSet<Term> {
        self.terms().filter(|t| t.is_ground()).cloned().collect()
    }

    pub fn max_integer(&self) -> Option<u64> {
        self.terms()
            .filter_map(|t| match t {
                Term::Integer(n) => Some(*n),
                _ => None,
            })
            .max()
    }

    /// Checks that every predicate is used with a single arity.
    pub fn check_arities(&self) -> Result<BTreeMap<Symbol, usize>, ModelError> {
        let mut arities = BTreeMap::new();
        for atom in self.atoms() {
            record_arity(&mut arities, atom)?;
        }
        Ok(arities)
    }
}

pub(crate) fn record_arity(arities: &mut BTreeMap<Symbol, usize>, atom: &Atom) -> Result<(), ModelError> {
    match arities.get(&atom.predicate) {
        Some(&n) if n != atom.arity() => Err(ModelError::ArityClash {
            predicate: atom.predicate.clone(),
            expected: n,
            found: atom.arity(),
        }),
        Some(_) => Ok(()),
        None => {
            arities.insert(atom.predicate.clone(), atom.arity());
            Ok(())
        }
    }
}

fn body_terms(b: &BodyElement) -> Box<dyn Iterator<Item = &Term> + '_> {
    match b {
        BodyElement::Literal(l) => Box::new(l.atom.args.iter()),
        BodyElement::Builtin(c) => Box::new(c.left.terms().chain(c.right.terms())),
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        for w in &self.weak_constraints {
            writeln!(f, "{w}")?;
        }
        Ok(())
    }
}

/// A finite set of ground atoms.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Interpretation(BTreeSet<Atom>);

impl Interpretation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_atoms<I: IntoIterator<Item = Atom>>(atoms: I) -> Result<Self, ModelError> {
        let mut i = Interpretation::new();
        for a in atoms {
            i.insert(a)?;
        }
        Ok(i)
    }

    pub fn insert(&mut self, atom: Atom) -> Result<bool, ModelError> {
        if !atom.is_ground() {
            return Err(ModelError::NonGround(atom.to_string()));
        }
        Ok(self.0.insert(atom))
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.0.contains(atom)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn atoms(&self) -> &BTreeSet<Atom> {
        &self.0
    }

    pub fn is_subset(&self, other: &Interpretation) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn retain(&mut self, f: impl FnMut(&Atom) -> bool) {
        self.0.retain(f)
    }
}

impl FromIterator<Atom> for Interpretation {
    /// Panics on non-ground atoms; use [`Interpretation::from_atoms`] for
    /// fallible construction.
    fn from_iter<T: IntoIterator<Item = Atom>>(iter: T) -> Self {
        Interpretation::from_atoms(iter).expect("interpretations hold ground atoms only")
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}

pub fn literal_true(l: &Literal, i: &Interpretation) -> Result<bool, ModelError> {
    if !l.atom.is_ground() {
        return Err(ModelError::NonGround(l.to_string()));
    }
    Ok(i.contains(&l.atom) == l.is_positive())
}

fn element_true(b: &BodyElement, i: &Interpretation) -> Result<bool, ModelError> {
    match b {
        BodyElement::Literal(l) => literal_true(l, i),
        BodyElement::Builtin(c) => c.holds().ok_or_else(|| ModelError::NonGround(c.to_string())),
    }
}

pub(crate) fn body_true(body: &[BodyElement], i: &Interpretation) -> Result<bool, ModelError> {
    for b in body {
        if !element_true(b, i)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A ground rule is satisfied when its head is true or its body is false.
/// Strong constraints have no head and are satisfied iff the body is false.
pub fn rule_satisfied(r: &Rule, i: &Interpretation) -> Result<bool, ModelError> {
    if let Some(h) = &r.head {
        if !h.is_ground() {
            return Err(ModelError::NonGround(h.to_string()));
        }
        if i.contains(h) {
            // still validate the body is ground
            for b in &r.body {
                if !b.is_ground() {
                    return Err(ModelError::NonGround(b.to_string()));
                }
            }
            return Ok(true);
        }
    }
    Ok(!body_true(&r.body, i)?)
}

/// True iff every rule and strong constraint of the ground program holds.
/// Weak constraints are ignored.
pub fn is_model(p: &Program, i: &Interpretation) -> Result<bool, ModelError> {
    for r in &p.rules {
        if !rule_satisfied(r, i)? {
            return Ok(false);
        }
    }
    Ok(true)
}
