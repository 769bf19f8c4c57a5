//! Conflict-driven clause learning with a linear pseudo-Boolean upper bound
//! on an objective (`sum of weights of true terms <= bound`).
//!
//! Two-watched-literal propagation, first-UIP learning, VSIDS, phase saving
//! and Luby restarts. Clauses that arrive while a total assignment is on the
//! trail (loop nogoods) are treated as external conflicts.

use std::ops::Not;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Var(pub u32);

impl Var {
    fn idx(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit(var.0 * 2 + u32::from(!positive))
    }

    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    fn idx(self) -> usize {
        self.0 as usize
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SolveResult {
    Sat,
    Unsat,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Reason {
    None,
    Clause(u32),
    Bound,
}

struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

#[derive(Clone, Copy)]
struct Watch {
    clause: u32,
    blocker: Lit,
}

#[derive(Default)]
struct Objective {
    /// Sorted by decreasing weight.
    terms: Vec<(Lit, u64)>,
    /// Weight per literal index (0 when the literal is not a term).
    weight: Vec<u64>,
    sum: u128,
    bound: Option<u128>,
    dirty: bool,
}

#[derive(Default)]
struct VarHeap {
    heap: Vec<u32>,
    pos: Vec<Option<usize>>,
}

impl VarHeap {
    fn grow(&mut self, n: usize) {
        self.pos.resize(n, None);
    }

    fn contains(&self, v: u32) -> bool {
        self.pos[v as usize].is_some()
    }

    fn insert(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v);
        self.pos[v as usize] = Some(self.heap.len() - 1);
        self.up(self.heap.len() - 1, act);
    }

    fn increase(&mut self, v: u32, act: &[f64]) {
        if let Some(i) = self.pos[v as usize] {
            self.up(i, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("non-empty");
        self.pos[top as usize] = None;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = Some(0);
            self.down(0, act);
        }
        Some(top)
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let p = self.heap[parent];
            if act[p as usize] >= act[v as usize] {
                break;
            }
            self.heap[i] = p;
            self.pos[p as usize] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = Some(i);
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        loop {
            let l = 2 * i + 1;
            if l >= self.heap.len() {
                break;
            }
            let r = l + 1;
            let c = if r < self.heap.len() && act[self.heap[r] as usize] > act[self.heap[l] as usize] {
                r
            } else {
                l
            };
            let cv = self.heap[c];
            if act[cv as usize] <= act[v as usize] {
                break;
            }
            self.heap[i] = cv;
            self.pos[cv as usize] = Some(i);
            i = c;
        }
        self.heap[i] = v;
        self.pos[v as usize] = Some(i);
    }
}

fn luby(mut x: u64) -> u64 {
    let (mut size, mut seq) = (1u64, 0u32);
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    1 << seq
}

#[derive(Clone, Copy, Default, Debug)]
pub struct Stats {
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
}

pub struct Solver {
    clauses: Vec<Clause>,
    watches: Vec<Vec<Watch>>,
    assigns: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<Reason>,
    trail_pos: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    heap: VarHeap,
    phase: Vec<bool>,
    seen: Vec<bool>,
    obj: Objective,
    ok: bool,
    learnts: usize,
    max_learnts: f64,
    restart_round: u64,
    restart_conflicts: u64,
    pub stats: Stats,
}

impl Default for Solver {
    fn default() -> Self {
        Self::new()
    }
}

impl Solver {
    pub fn new() -> Self {
        Solver {
            clauses: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail_pos: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            cla_inc: 1.0,
            heap: VarHeap::default(),
            phase: Vec::new(),
            seen: Vec::new(),
            obj: Objective::default(),
            ok: true,
            learnts: 0,
            max_learnts: 4000.0,
            restart_round: 0,
            restart_conflicts: 0,
            stats: Stats::default(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    pub fn new_var(&mut self) -> Var {
        let v = Var(self.assigns.len() as u32);
        self.assigns.push(0);
        self.level.push(0);
        self.reason.push(Reason::None);
        self.trail_pos.push(0);
        self.activity.push(0.0);
        self.phase.push(false);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.obj.weight.push(0);
        self.obj.weight.push(0);
        self.heap.grow(self.assigns.len());
        self.heap.insert(v.0, &self.activity);
        v
    }

    pub fn is_ok(&self) -> bool {
        self.ok
    }

    pub fn set_phase(&mut self, v: Var, positive: bool) {
        self.phase[v.idx()] = positive;
    }

    /// Raises the initial activity of a variable so it is branched on early.
    pub fn boost(&mut self, v: Var, amount: f64) {
        self.activity[v.idx()] += amount;
        self.heap.increase(v.0, &self.activity);
    }

    pub fn value(&self, l: Lit) -> Option<bool> {
        match self.assigns[l.var().idx()] {
            0 => None,
            s => Some((s > 0) == l.is_positive()),
        }
    }

    fn lit_value(&self, l: Lit) -> i8 {
        let s = self.assigns[l.var().idx()];
        if l.is_positive() {
            s
        } else {
            -s
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Declares the objective terms. Must be called before search.
    pub fn set_objective(&mut self, terms: Vec<(Lit, u64)>) {
        let mut terms: Vec<(Lit, u64)> = terms.into_iter().filter(|t| t.1 > 0).collect();
        terms.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        for &(l, w) in &terms {
            self.obj.weight[l.idx()] += w;
        }
        // merge duplicates
        let mut merged: Vec<(Lit, u64)> = Vec::new();
        for (l, _) in terms {
            if !merged.iter().any(|m| m.0 == l) {
                merged.push((l, self.obj.weight[l.idx()]));
            }
        }
        merged.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        self.obj.terms = merged;
        self.obj.sum = self.trail.iter().map(|l| u128::from(self.obj.weight[l.idx()])).sum();
    }

    /// Restricts the objective to `<= bound`. Backtracks to the root.
    pub fn set_bound(&mut self, bound: u128) {
        self.backtrack(0);
        self.obj.bound = Some(bound);
        self.obj.dirty = true;
    }

    pub fn objective_value(&self) -> u128 {
        self.obj.sum
    }

    fn assign(&mut self, l: Lit, reason: Reason) {
        let v = l.var().idx();
        debug_assert_eq!(self.assigns[v], 0);
        self.assigns[v] = if l.is_positive() { 1 } else { -1 };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail_pos[v] = self.trail.len() as u32;
        self.trail.push(l);
        self.obj.sum += u128::from(self.obj.weight[l.idx()]);
    }

    fn backtrack(&mut self, lvl: u32) {
        if self.decision_level() <= lvl {
            return;
        }
        let start = self.trail_lim[lvl as usize];
        for i in (start..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var().idx();
            self.phase[v] = l.is_positive();
            self.assigns[v] = 0;
            self.reason[v] = Reason::None;
            self.obj.sum -= u128::from(self.obj.weight[l.idx()]);
            self.heap.insert(v as u32, &self.activity);
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(lvl as usize);
        self.qhead = self.trail.len();
    }

    /// Adds a clause at the root level. Returns false when the solver
    /// becomes inconsistent.
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        self.backtrack(0);
        if !self.ok {
            return false;
        }
        let mut c: Vec<Lit> = lits.to_vec();
        c.sort();
        c.dedup();
        if c.windows(2).any(|w| w[0] == !w[1]) {
            return true;
        }
        if c.iter().any(|&l| self.lit_value(l) > 0) {
            return true;
        }
        c.retain(|&l| self.lit_value(l) == 0);
        match c.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.assign(c[0], Reason::None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
                self.ok
            }
            _ => {
                self.attach(c, false);
                true
            }
        }
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool) -> u32 {
        let id = self.clauses.len() as u32;
        self.watches[lits[0].idx()].push(Watch {
            clause: id,
            blocker: lits[1],
        });
        self.watches[lits[1].idx()].push(Watch {
            clause: id,
            blocker: lits[0],
        });
        if learnt {
            self.learnts += 1;
        }
        self.clauses.push(Clause {
            lits,
            learnt,
            deleted: false,
            activity: 0.0,
        });
        id
    }

    fn bound_conflict(&self, max_pos: usize) -> Vec<Lit> {
        let bound = self.obj.bound.expect("bound set");
        let mut out = Vec::new();
        let mut acc = 0u128;
        for &(t, w) in &self.obj.terms {
            if self.lit_value(t) > 0 && (self.trail_pos[t.var().idx()] as usize) < max_pos {
                out.push(!t);
                acc += u128::from(w);
                if acc > bound {
                    break;
                }
            }
        }
        out
    }

    /// Propagates the objective bound. Returns a conflict when exceeded.
    fn propagate_bound(&mut self) -> Option<Vec<Lit>> {
        let bound = self.obj.bound?;
        if self.obj.sum > bound {
            return Some(self.bound_conflict(usize::MAX));
        }
        for i in 0..self.obj.terms.len() {
            let (t, w) = self.obj.terms[i];
            if self.obj.sum + u128::from(w) <= bound {
                break;
            }
            if self.lit_value(t) == 0 {
                self.assign(!t, Reason::Bound);
                self.stats.propagations += 1;
            }
        }
        None
    }

    fn propagate(&mut self) -> Option<Vec<Lit>> {
        if self.obj.dirty {
            self.obj.dirty = false;
            if let Some(c) = self.propagate_bound() {
                return Some(c);
            }
        }
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            if self.obj.weight[p.idx()] > 0 {
                if let Some(c) = self.propagate_bound() {
                    return Some(c);
                }
            }
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.idx()]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                let ci = w.clause as usize;
                if self.clauses[ci].deleted {
                    continue;
                }
                if self.lit_value(w.blocker) > 0 {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                {
                    let lits = &mut self.clauses[ci].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                }
                let first = self.clauses[ci].lits[0];
                if first != w.blocker && self.lit_value(first) > 0 {
                    ws[j] = Watch {
                        clause: w.clause,
                        blocker: first,
                    };
                    j += 1;
                    continue;
                }
                let mut moved = false;
                let len = self.clauses[ci].lits.len();
                for k in 2..len {
                    let l = self.clauses[ci].lits[k];
                    if self.lit_value(l) >= 0 {
                        self.clauses[ci].lits.swap(1, k);
                        self.watches[l.idx()].push(Watch {
                            clause: w.clause,
                            blocker: first,
                        });
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = Watch {
                    clause: w.clause,
                    blocker: first,
                };
                j += 1;
                if self.lit_value(first) < 0 {
                    conflict = Some(self.clauses[ci].lits.clone());
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.assign(first, Reason::Clause(w.clause));
                }
            }
            ws.truncate(j);
            // watches pushed for `false_lit` during the scan cannot exist: a
            // clause is only moved to a literal that is not false.
            let added = std::mem::replace(&mut self.watches[false_lit.idx()], ws);
            self.watches[false_lit.idx()].extend(added);
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    /// Antecedent literals (all false) of an implied variable, plus the
    /// implied literal itself.
    fn reason_lits(&self, v: Var, out: &mut Vec<Lit>) {
        out.clear();
        match self.reason[v.idx()] {
            Reason::None => {}
            Reason::Clause(c) => out.extend_from_slice(&self.clauses[c as usize].lits),
            Reason::Bound => {
                let implied = Lit::new(v, self.assigns[v.idx()] > 0);
                let term = !implied;
                let bound = self.obj.bound.expect("bound set");
                let pos = self.trail_pos[v.idx()];
                out.push(implied);
                let mut acc = u128::from(self.obj.weight[term.idx()]);
                for &(t, w) in &self.obj.terms {
                    if acc > bound {
                        break;
                    }
                    if t != term && self.lit_value(t) > 0 && self.trail_pos[t.var().idx()] < pos {
                        out.push(!t);
                        acc += u128::from(w);
                    }
                }
            }
        }
    }

    fn bump_var(&mut self, v: Var) {
        let a = &mut self.activity[v.idx()];
        *a += self.var_inc;
        if *a > 1e100 {
            for x in &mut self.activity {
                *x *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increase(v.0, &self.activity);
    }

    fn bump_clause(&mut self, c: u32) {
        let cl = &mut self.clauses[c as usize];
        if !cl.learnt {
            return;
        }
        cl.activity += self.cla_inc;
        if cl.activity > 1e20 {
            for c in &mut self.clauses {
                c.activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    fn analyze(&mut self, confl: Vec<Lit>) -> (Vec<Lit>, u32) {
        let current = self.decision_level();
        let mut learnt = vec![Lit(0)];
        let mut path = 0usize;
        let mut idx = self.trail.len();
        let mut p: Option<Lit> = None;
        let mut lits = confl;
        let mut buf = Vec::new();
        loop {
            for &q in &lits {
                let v = q.var();
                if p.is_some_and(|p| p.var() == v) {
                    continue;
                }
                if !self.seen[v.idx()] && self.level[v.idx()] > 0 {
                    self.seen[v.idx()] = true;
                    self.bump_var(v);
                    if self.level[v.idx()] >= current {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var().idx()] {
                    break;
                }
            }
            let pl = self.trail[idx];
            self.seen[pl.var().idx()] = false;
            path -= 1;
            p = Some(pl);
            if path == 0 {
                break;
            }
            if let Reason::Clause(c) = self.reason[pl.var().idx()] {
                self.bump_clause(c);
            }
            self.reason_lits(pl.var(), &mut buf);
            std::mem::swap(&mut lits, &mut buf);
        }
        learnt[0] = !p.expect("conflict at current level");

        // local minimization: drop literals implied by other learnt literals
        let mut keep = vec![learnt[0]];
        for &q in &learnt[1..] {
            let v = q.var();
            let redundant = self.reason[v.idx()] != Reason::None && {
                self.reason_lits(v, &mut buf);
                buf.iter()
                    .filter(|l| l.var() != v)
                    .all(|l| self.seen[l.var().idx()] || self.level[l.var().idx()] == 0)
            };
            if !redundant {
                keep.push(q);
            }
        }
        for &q in &learnt[1..] {
            self.seen[q.var().idx()] = false;
        }
        let mut learnt = keep;
        let mut bt = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var().idx()] > self.level[learnt[max_i].var().idx()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            bt = self.level[learnt[1].var().idx()];
        }
        (learnt, bt)
    }

    /// Analyzes a conflict at the current level, learns and asserts.
    fn resolve_conflict(&mut self, confl: Vec<Lit>) {
        self.stats.conflicts += 1;
        self.restart_conflicts += 1;
        let (learnt, bt) = self.analyze(confl);
        self.backtrack(bt);
        if learnt.len() == 1 {
            self.assign(learnt[0], Reason::None);
        } else {
            let asserting = learnt[0];
            let c = self.attach(learnt, true);
            self.bump_clause(c);
            self.assign(asserting, Reason::Clause(c));
        }
        self.var_inc /= 0.95;
        self.cla_inc /= 0.999;
    }

    /// Adds clauses violated by the current total assignment.
    fn add_violated(&mut self, clauses: Vec<Vec<Lit>>) -> bool {
        let mut conflict: Option<(u32, Vec<Lit>)> = None;
        let mut prepared = Vec::new();
        for mut c in clauses {
            c.sort();
            c.dedup();
            if c.is_empty() {
                self.ok = false;
                return false;
            }
            c.sort_by_key(|l| std::cmp::Reverse(self.level[l.var().idx()]));
            let lvl = self.level[c[0].var().idx()];
            if conflict.as_ref().is_none_or(|(l, _)| lvl < *l) {
                conflict = Some((lvl, c.clone()));
            }
            prepared.push(c);
        }
        let (lvl, confl) = conflict.expect("at least one clause");
        if lvl == 0 {
            self.ok = false;
            return false;
        }
        self.backtrack(lvl);
        for c in prepared {
            if c.len() == 1 {
                continue;
            }
            self.attach(c, false);
        }
        if confl.len() == 1 {
            self.backtrack(0);
            self.assign(confl[0], Reason::None);
        } else {
            self.resolve_conflict(confl);
        }
        true
    }

    fn reduce_db(&mut self) {
        let mut cands: Vec<usize> = (0..self.clauses.len())
            .filter(|&i| {
                let c = &self.clauses[i];
                c.learnt && !c.deleted && c.lits.len() > 2 && !self.locked(i)
            })
            .collect();
        cands.sort_by(|&a, &b| {
            self.clauses[a]
                .activity
                .partial_cmp(&self.clauses[b].activity)
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        for &i in cands.iter().take(cands.len() / 2) {
            self.clauses[i].deleted = true;
            self.clauses[i].lits = Vec::new();
            self.learnts -= 1;
        }
        for ws in &mut self.watches {
            let clauses = &self.clauses;
            ws.retain(|w| !clauses[w.clause as usize].deleted);
        }
    }

    fn locked(&self, i: usize) -> bool {
        let l = self.clauses[i].lits[0];
        self.lit_value(l) > 0 && self.reason[l.var().idx()] == Reason::Clause(i as u32)
    }

    /// Searches for a total assignment satisfying all clauses, the bound,
    /// the assumptions and `check`. `check` is called on total assignments
    /// and returns clauses violated by it (an empty list accepts).
    pub fn solve(&mut self, assumptions: &[Lit], check: &mut dyn FnMut(&Solver) -> Vec<Vec<Lit>>) -> SolveResult {
        if !self.ok {
            return SolveResult::Unsat;
        }
        // leave any previous model
        self.backtrack(0);
        loop {
            if let Some(confl) = self.propagate() {
                if self.decision_level() == 0 {
                    self.ok = false;
                    return SolveResult::Unsat;
                }
                self.resolve_conflict(confl);
                if self.restart_conflicts >= 100 * luby(self.restart_round) {
                    self.restart_conflicts = 0;
                    self.restart_round += 1;
                    self.stats.restarts += 1;
                    self.backtrack(0);
                }
                continue;
            }
            if self.learnts as f64 > self.max_learnts + self.trail.len() as f64 {
                self.reduce_db();
                self.max_learnts *= 1.1;
            }
            let dl = self.decision_level() as usize;
            if dl < assumptions.len() {
                let a = assumptions[dl];
                match self.lit_value(a) {
                    1 => self.trail_lim.push(self.trail.len()),
                    -1 => {
                        self.backtrack(0);
                        return SolveResult::Unsat;
                    }
                    _ => {
                        self.trail_lim.push(self.trail.len());
                        self.assign(a, Reason::None);
                    }
                }
                continue;
            }
            let mut next = None;
            while let Some(v) = self.heap.pop(&self.activity) {
                if self.assigns[v as usize] == 0 {
                    next = Some(Var(v));
                    break;
                }
            }
            match next {
                Some(v) => {
                    self.stats.decisions += 1;
                    self.trail_lim.push(self.trail.len());
                    let l = Lit::new(v, self.phase[v.idx()]);
                    self.assign(l, Reason::None);
                }
                None => {
                    let violated = check(self);
                    if violated.is_empty() {
                        return SolveResult::Sat;
                    }
                    if !self.add_violated(violated) {
                        return SolveResult::Unsat;
                    }
                }
            }
        }
    }
}
