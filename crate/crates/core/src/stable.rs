//! Reducts, least models, stable models and dependency graphs.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::ground::{AtomId, GroundProgram};
use crate::model::Atom;
use crate::model::{BodyElement, Interpretation, ModelError, Program, Symbol};
use crate::solver::AspSolver;

/// A definite rule `head :- body.` produced by the reduct.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PositiveRule {
    pub head: Atom,
    pub body: Vec<Atom>,
}

impl fmt::Display for PositiveRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            let body: Vec<String> = self.body.iter().map(ToString::to_string).collect();
            write!(f, " :- {}", body.join(", "))?;
        }
        write!(f, ".")
    }
}

/// Gelfond-Lifschitz reduct of a ground program. Constraints are not part
/// of the reduct proper; their positive bodies are kept aside.
#[derive(Clone, Debug, Default)]
pub struct Reduct {
    pub rules: Vec<PositiveRule>,
    pub constraints: Vec<Vec<Atom>>,
}

pub fn reduct(p: &Program, i: &Interpretation) -> Result<Reduct, ModelError> {
    let mut out = Reduct::default();
    'rules: for r in &p.rules {
        if !r.is_ground() {
            return Err(ModelError::NonGround(r.to_string()));
        }
        let mut body = Vec::new();
        for b in &r.body {
            match b {
                BodyElement::Literal(l) if l.is_positive() => body.push(l.atom.clone()),
                BodyElement::Literal(l) => {
                    if i.contains(&l.atom) {
                        continue 'rules;
                    }
                }
                BodyElement::Builtin(c) => {
                    if c.holds() != Some(true) {
                        continue 'rules;
                    }
                }
            }
        }
        match &r.head {
            Some(h) => out.rules.push(PositiveRule { head: h.clone(), body }),
            None => out.constraints.push(body),
        }
    }
    Ok(out)
}

/// Least model of a set of definite rules.
pub fn least_model(rules: &[PositiveRule]) -> Interpretation {
    let mut index: HashMap<&Atom, Vec<usize>> = HashMap::new();
    let mut missing: Vec<usize> = Vec::with_capacity(rules.len());
    let mut queue: Vec<&Atom> = Vec::new();
    let mut model = Interpretation::new();
    for (k, r) in rules.iter().enumerate() {
        let mut body = r.body.clone();
        body.sort();
        body.dedup();
        missing.push(body.len());
        for a in r.body.iter().collect::<std::collections::BTreeSet<_>>() {
            index.entry(a).or_default().push(k);
        }
        if body.is_empty() {
            queue.push(&r.head);
        }
    }
    while let Some(a) = queue.pop() {
        if model.contains(a) {
            continue;
        }
        model.insert(a.clone()).expect("ground");
        for &k in index.get(a).map(Vec::as_slice).unwrap_or(&[]) {
            missing[k] -= 1;
            if missing[k] == 0 {
                queue.push(&rules[k].head);
            }
        }
    }
    model
}

/// `i` is a stable model of the ground program `p`.
pub fn is_stable(p: &Program, i: &Interpretation) -> Result<bool, ModelError> {
    let red = reduct(p, i)?;
    if red.constraints.iter().any(|b| b.iter().all(|a| i.contains(a))) {
        return Ok(false);
    }
    Ok(least_model(&red.rules) == *i)
}

/// Least model of the reduct of `gp` with respect to `mask`.
pub fn least_model_ids(gp: &GroundProgram, mask: &[bool]) -> Vec<bool> {
    let n = gp.atom_count();
    let mut occurs: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut missing = vec![0usize; gp.rules.len()];
    let mut model = vec![false; n];
    let mut queue = Vec::new();
    for (k, r) in gp.rules.iter().enumerate() {
        let Some(h) = r.head else { continue };
        if r.neg.iter().any(|a| mask[a.index()]) {
            continue;
        }
        missing[k] = r.pos.len();
        for a in &r.pos {
            occurs[a.index()].push(k as u32);
        }
        if r.pos.is_empty() {
            queue.push(h);
        }
    }
    while let Some(a) = queue.pop() {
        if model[a.index()] {
            continue;
        }
        model[a.index()] = true;
        for &k in &occurs[a.index()] {
            let k = k as usize;
            missing[k] -= 1;
            if missing[k] == 0 {
                queue.push(gp.rules[k].head.expect("rule with head"));
            }
        }
    }
    model
}

fn constraint_violated(gp: &GroundProgram, mask: &[bool]) -> bool {
    gp.rules
        .iter()
        .any(|r| r.head.is_none() && r.pos.iter().all(|a| mask[a.index()]) && r.neg.iter().all(|a| !mask[a.index()]))
}

/// `mask` is a stable model of `gp`.
pub fn is_stable_ids(gp: &GroundProgram, mask: &[bool]) -> bool {
    !constraint_violated(gp, mask) && least_model_ids(gp, mask) == mask
}

/// Dependency graph with an edge from each head to each body atom (or
/// predicate), labelled negative when the body literal is negated.
#[derive(Clone, Debug)]
pub struct DependencyGraph<N> {
    pub nodes: Vec<N>,
    /// `(from, to, negative)`
    pub edges: Vec<(usize, usize, bool)>,
}

impl DependencyGraph<Symbol> {
    /// Predicate-level graph of a (possibly non-ground) program.
    pub fn of_program(p: &Program) -> Self {
        let mut ids: BTreeMap<Symbol, usize> = BTreeMap::new();
        let mut nodes = Vec::new();
        let mut id = |s: &Symbol, nodes: &mut Vec<Symbol>| {
            *ids.entry(s.clone()).or_insert_with(|| {
                nodes.push(s.clone());
                nodes.len() - 1
            })
        };
        let mut edges = Vec::new();
        for r in &p.rules {
            let Some(h) = &r.head else { continue };
            let hid = id(&h.predicate, &mut nodes);
            for l in r.literals() {
                let b = id(&l.atom.predicate, &mut nodes);
                edges.push((hid, b, !l.is_positive()));
            }
        }
        for a in p.atoms() {
            id(&a.predicate, &mut nodes);
        }
        DependencyGraph { nodes, edges }
    }
}

impl DependencyGraph<AtomId> {
    /// Atom-level graph of a ground program.
    pub fn of_ground(gp: &GroundProgram) -> Self {
        let mut edges = Vec::new();
        for r in &gp.rules {
            let Some(h) = r.head else { continue };
            edges.extend(r.pos.iter().map(|a| (h.index(), a.index(), false)));
            edges.extend(r.neg.iter().map(|a| (h.index(), a.index(), true)));
        }
        DependencyGraph {
            nodes: (0..gp.atom_count() as u32).map(AtomId).collect(),
            edges,
        }
    }
}

impl<N> DependencyGraph<N> {
    /// Strongly connected components, dependencies before dependents.
    /// With `positive_only`, negative edges are ignored.
    pub fn sccs(&self, positive_only: bool) -> Vec<Vec<usize>> {
        let n = self.nodes.len();
        let mut adj = vec![Vec::new(); n];
        for &(a, b, neg) in &self.edges {
            if !(positive_only && neg) {
                adj[a].push(b);
            }
        }
        // iterative Tarjan
        let mut index = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut out = Vec::new();
        let mut counter = 0;
        for root in 0..n {
            if index[root] != usize::MAX {
                continue;
            }
            let mut call: Vec<(usize, usize)> = vec![(root, 0)];
            index[root] = counter;
            low[root] = counter;
            counter += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some(&mut (v, ref mut next)) = call.last_mut() {
                if *next < adj[v].len() {
                    let w = adj[v][*next];
                    *next += 1;
                    if index[w] == usize::MAX {
                        index[w] = counter;
                        low[w] = counter;
                        counter += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        call.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                } else {
                    call.pop();
                    if let Some(&(u, _)) = call.last() {
                        low[u] = low[u].min(low[v]);
                    }
                    if low[v] == index[v] {
                        let mut comp = Vec::new();
                        loop {
                            let w = stack.pop().expect("on stack");
                            on_stack[w] = false;
                            comp.push(w);
                            if w == v {
                                break;
                            }
                        }
                        comp.sort_unstable();
                        out.push(comp);
                    }
                }
            }
        }
        out
    }

    fn component_of(&self, sccs: &[Vec<usize>]) -> Vec<usize> {
        let mut comp = vec![0; self.nodes.len()];
        for (i, c) in sccs.iter().enumerate() {
            for &v in c {
                comp[v] = i;
            }
        }
        comp
    }

    /// No cycle goes through a negative edge.
    pub fn is_stratified(&self) -> bool {
        let sccs = self.sccs(false);
        let comp = self.component_of(&sccs);
        self.edges.iter().all(|&(a, b, neg)| !neg || comp[a] != comp[b])
    }

    /// The positive part has no cycle (the program is tight).
    pub fn is_positively_acyclic(&self) -> bool {
        let sccs = self.sccs(true);
        let comp = self.component_of(&sccs);
        self.edges.iter().all(|&(a, b, neg)| neg || comp[a] != comp[b])
    }
}

/// The program is stratified (predicate level).
pub fn is_stratified(p: &Program) -> bool {
    DependencyGraph::of_program(p).is_stratified()
}

/// Evaluates a ground program whose atom graph is stratified, stratum by
/// stratum. Returns `None` when the program is not stratified, and
/// `Some(None)` when a constraint kills the unique candidate.
pub fn stratified_model(gp: &GroundProgram) -> Option<Option<Vec<bool>>> {
    let graph = DependencyGraph::of_ground(gp);
    let sccs = graph.sccs(false);
    let comp = graph.component_of(&sccs);
    if !graph.edges.iter().all(|&(a, b, neg)| !neg || comp[a] != comp[b]) {
        return None;
    }
    let mut by_comp: Vec<Vec<usize>> = vec![Vec::new(); sccs.len()];
    for (k, r) in gp.rules.iter().enumerate() {
        if let Some(h) = r.head {
            by_comp[comp[h.index()]].push(k);
        }
    }
    let mut mask = vec![false; gp.atom_count()];
    for rules in &by_comp {
        // negative atoms live in earlier components and are already final
        loop {
            let mut changed = false;
            for &k in rules {
                let r = &gp.rules[k];
                let h = r.head.expect("rule with head").index();
                if !mask[h] && r.pos.iter().all(|a| mask[a.index()]) && r.neg.iter().all(|a| !mask[a.index()]) {
                    mask[h] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }
    if constraint_violated(gp, &mask) {
        return Some(None);
    }
    Some(Some(mask))
}

/// Iterator over the stable models of a ground program.
pub struct StableModels<'g> {
    solver: AspSolver<'g>,
    remaining: Option<usize>,
    done: bool,
}

impl Iterator for StableModels<'_> {
    type Item = Vec<bool>;

    fn next(&mut self) -> Option<Vec<bool>> {
        if self.done || self.remaining == Some(0) {
            return None;
        }
        match self.solver.next_model(&[]) {
            Some(m) => {
                self.solver.block(&m, None);
                if let Some(r) = &mut self.remaining {
                    *r -= 1;
                }
                Some(m)
            }
            None => {
                self.done = true;
                None
            }
        }
    }
}

/// Enumerates stable models (as masks over the base of `gp`), at most
/// `limit` of them.
pub fn stable_models(gp: &GroundProgram, limit: Option<usize>) -> StableModels<'_> {
    StableModels {
        solver: AspSolver::new(gp),
        remaining: limit,
        done: false,
    }
}

/// Enumerates stable models as interpretations.
pub fn enumerate_stable_models(gp: &GroundProgram, limit: Option<usize>) -> Vec<Interpretation> {
    stable_models(gp, limit).map(|m| gp.interpretation_of(&m)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::ground;
    use crate::parser::parse_program;
    use std::collections::BTreeSet;

    fn gp(text: &str) -> GroundProgram {
        ground(&parse_program(text).unwrap(), &BTreeSet::new(), 10).unwrap()
    }

    fn models(text: &str) -> BTreeSet<String> {
        let g = gp(text);
        enumerate_stable_models(&g, None)
            .iter()
            .map(ToString::to_string)
            .collect()
    }

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn even_loop_has_two_models() {
        assert_eq!(models("a :- not b. b :- not a."), set(&["{a}", "{b}"]));
    }

    #[test]
    fn odd_loop_has_none() {
        assert!(models("a :- not a.").is_empty());
        assert!(models("a :- not b. b :- not c. c :- not a.").is_empty());
    }

    #[test]
    fn positive_loop_is_unfounded() {
        assert_eq!(models("a :- b. b :- a."), set(&["{}"]));
        assert_eq!(
            models("a :- b. b :- a. a :- not c. c :- not a."),
            set(&["{a, b}", "{c}"])
        );
    }

    #[test]
    fn constraints_filter() {
        assert_eq!(models("a :- not b. b :- not a. :- a."), set(&["{b}"]));
    }

    #[test]
    fn reduct_and_least_model() {
        let p = parse_program("a :- not b. b :- not a. c :- a.").unwrap();
        let i: Interpretation = ["a", "c"].iter().map(|s| Atom::prop(s)).collect();
        let r = reduct(&p, &i).unwrap();
        assert_eq!(r.rules.len(), 2);
        assert_eq!(least_model(&r.rules), i);
        assert!(is_stable(&p, &i).unwrap());
        let j: Interpretation = ["a"].iter().map(|s| Atom::prop(s)).collect();
        assert!(!is_stable(&p, &j).unwrap());
    }

    #[test]
    fn stratification() {
        assert!(is_stratified(&parse_program("a :- not b. b :- c.").unwrap()));
        assert!(!is_stratified(&parse_program("a :- not b. b :- not a.").unwrap()));
        let g = gp("p(1). q(X) :- p(X), not r(X). r(2).");
        let m = stratified_model(&g).unwrap().unwrap();
        let i = g.interpretation_of(&m);
        assert_eq!(i.to_string(), "{p(1), q(1), r(2)}");
        assert!(stratified_model(&gp("a :- not b. b :- not a.")).is_none());
    }

    #[test]
    fn scc_order_puts_dependencies_first() {
        let g = gp("a :- b. b :- c. c.");
        let graph = DependencyGraph::of_ground(&g);
        let order: Vec<usize> = graph.sccs(false).into_iter().flatten().collect();
        let pos = |name: &str| {
            let id = g.id_of(&Atom::prop(name)).unwrap().index();
            order.iter().position(|&x| x == id).unwrap()
        };
        assert!(pos("c") < pos("b") && pos("b") < pos("a"));
    }

    #[test]
    fn random_programs_match_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.gen_range(1..=6);
            let mut text = String::new();
            for _ in 0..rng.gen_range(1..=9) {
                let head = rng.gen_range(0..=n);
                if head == n {
                    text.push_str(":- ");
                } else {
                    text.push_str(&format!("a{head} :- "));
                }
                let k = rng.gen_range(1..=3);
                let body: Vec<String> = (0..k)
                    .map(|_| {
                        let a = rng.gen_range(0..n);
                        if rng.gen_bool(0.4) {
                            format!("not a{a}")
                        } else {
                            format!("a{a}")
                        }
                    })
                    .collect();
                text.push_str(&body.join(", "));
                text.push_str(".\n");
            }
            for i in 0..n {
                if rng.gen_bool(0.3) {
                    text.push_str(&format!("a{i} :- not b{i}. b{i} :- not a{i}.\n"));
                }
            }
            let p = parse_program(&text).unwrap();
            let g = GroundProgram::from_program(&p).unwrap();
            let found: BTreeSet<Vec<bool>> = stable_models(&g, None).collect();
            let mut expected = BTreeSet::new();
            for m in 0..1u32 << g.atom_count() {
                let mask: Vec<bool> = (0..g.atom_count()).map(|i| m >> i & 1 == 1).collect();
                let i = g.interpretation_of(&mask);
                if is_stable(&p, &i).unwrap() {
                    expected.insert(mask);
                }
            }
            assert_eq!(found, expected, "{text}");
        }
    }
}
