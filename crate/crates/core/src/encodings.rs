//! Problem generators for the worked domains: network diagnosis, travelling
//! salesman, strategic companies, blocks world and the SAT gadget used for
//! the consistency reduction.
//!
//! Every generator writes the three text files and parses them back, so the
//! encodings double as parser fixtures.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::abduction::{AbductionError, InputError, Pap, PapSolver, Solution};

#[derive(Debug, Error)]
pub enum EncodingError {
    #[error("illegal configuration: {0}")]
    IllegalConfiguration(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error(transparent)]
    Input(#[from] InputError),
}

/// The `.dl`, `.hyp` and `.obs` texts of a problem.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PapFiles {
    pub program: String,
    pub hypotheses: String,
    pub observations: String,
}

impl PapFiles {
    /// Writes `<stem>.dl`, `<stem>.hyp` and `<stem>.obs` into `dir`.
    pub fn write_to(&self, dir: &Path, stem: &str) -> io::Result<[PathBuf; 3]> {
        let paths = [
            dir.join(format!("{stem}.dl")),
            dir.join(format!("{stem}.hyp")),
            dir.join(format!("{stem}.obs")),
        ];
        std::fs::write(&paths[0], &self.program)?;
        std::fs::write(&paths[1], &self.hypotheses)?;
        std::fs::write(&paths[2], &self.observations)?;
        Ok(paths)
    }
}

#[derive(Clone, Debug)]
pub struct EncodedPap {
    pub pap: Pap,
    pub files: PapFiles,
    /// Integer bound the encoding needs, when the default is not right.
    pub int_bound: Option<u64>,
}

impl EncodedPap {
    fn from_files(files: PapFiles, int_bound: Option<u64>) -> Result<Self, EncodingError> {
        let pap = Pap::from_texts(&files.program, &files.hypotheses, &files.observations)?;
        Ok(EncodedPap { pap, files, int_bound })
    }

    pub fn solver(&self) -> Result<PapSolver, AbductionError> {
        PapSolver::new(self.pap.clone(), self.int_bound)
    }
}

// ---------------------------------------------------------------------------
// network diagnosis

/// Nodes `a`..`f`, undirected links a-b, b-c, b-d, c-e, d-e, a-f, f-e.
/// Machine `a` cannot reach `e`; hypotheses say which machines are offline.
pub fn network_files() -> PapFiles {
    let mut program = String::new();
    for n in ["a", "b", "c", "d", "e", "f"] {
        writeln!(program, "node({n}).").unwrap();
    }
    for (x, y) in [
        ("a", "b"),
        ("b", "c"),
        ("b", "d"),
        ("c", "e"),
        ("d", "e"),
        ("a", "f"),
        ("f", "e"),
    ] {
        writeln!(program, "connected({x},{y}). connected({y},{x}).").unwrap();
    }
    program.push_str(
        "reaches(X,X) :- node(X), not offline(X).\n\
         reaches(X,Z) :- reaches(X,Y), connected(Y,Z), not offline(Z).\n",
    );
    let hypotheses = ["a", "b", "c", "d", "e", "f"]
        .iter()
        .map(|n| format!("offline({n}) [1].\n"))
        .collect();
    PapFiles {
        program,
        hypotheses,
        observations: "not offline(a).\nnot offline(e).\nnot reaches(a,e).\n".into(),
    }
}

pub fn network_pap() -> EncodedPap {
    EncodedPap::from_files(network_files(), None).expect("fixed instance is valid")
}

// ---------------------------------------------------------------------------
// travelling salesman

#[derive(Clone, Debug)]
pub struct TspInstance {
    pub n: usize,
    /// Cost of going from `i` to `j` (cities are `1..=n`).
    pub w: BTreeMap<(usize, usize), u64>,
}

impl TspInstance {
    pub fn new(n: usize, w: BTreeMap<(usize, usize), u64>) -> Result<Self, EncodingError> {
        if n < 2 {
            return Err(EncodingError::InvalidInstance("at least two cities are needed".into()));
        }
        for i in 1..=n {
            for j in 1..=n {
                if i != j && w.get(&(i, j)).is_none_or(|&c| c == 0) {
                    return Err(EncodingError::InvalidInstance(format!(
                        "no positive cost for ({i},{j})"
                    )));
                }
            }
        }
        Ok(TspInstance { n, w })
    }

    /// Symmetric instance with `w(i,j) = w(j,i) = cost(min, max)`.
    pub fn symmetric(n: usize, cost: impl Fn(usize, usize) -> u64) -> Result<Self, EncodingError> {
        let mut w = BTreeMap::new();
        for i in 1..=n {
            for j in 1..=n {
                if i != j {
                    w.insert((i, j), cost(i.min(j), i.max(j)));
                }
            }
        }
        Self::new(n, w)
    }

    /// Cheapest tour by trying every permutation of cities `2..=n`.
    pub fn brute_force_min(&self) -> u64 {
        fn go(t: &TspInstance, last: usize, left: &mut Vec<usize>, acc: u64, best: &mut u64) {
            if left.is_empty() {
                *best = (*best).min(acc + t.w[&(last, 1)]);
                return;
            }
            for k in 0..left.len() {
                let c = left.remove(k);
                go(t, c, left, acc + t.w[&(last, c)], best);
                left.insert(k, c);
            }
        }
        let mut best = u64::MAX;
        go(self, 1, &mut (2..=self.n).collect(), 0, &mut best);
        best
    }
}

pub fn tsp_files(t: &TspInstance) -> PapFiles {
    let mut program = String::new();
    for i in 1..=t.n {
        writeln!(program, "city({i}).").unwrap();
    }
    program.push_str(
        "visited(I) :- visited(J), c(J,I).\n\
         visited(1) :- c(J,1).\n\
         missedCity :- city(I), not visited(I).\n\
         badTour :- c(I,J), c(I,K), J != K.\n\
         badTour :- c(J,I), c(K,I), J != K.\n",
    );
    let mut hypotheses = String::new();
    for (&(i, j), w) in &t.w {
        if i != j {
            writeln!(hypotheses, "c({i},{j}) [{w}].").unwrap();
        }
    }
    PapFiles {
        program,
        hypotheses,
        observations: "not missedCity.\nnot badTour.\n".into(),
    }
}

pub fn tsp_pap(t: &TspInstance) -> Result<EncodedPap, EncodingError> {
    EncodedPap::from_files(tsp_files(t), None)
}

/// The cities in tour order starting from 1, when the selected `c` atoms
/// form a single Hamiltonian cycle.
pub fn decode_tour(n: usize, s: &Solution) -> Option<Vec<usize>> {
    let mut next = BTreeMap::new();
    for h in &s.hypotheses {
        let [a, b] = h.args.as_slice() else { return None };
        let (a, b) = (
            a.to_string().parse::<usize>().ok()?,
            b.to_string().parse::<usize>().ok()?,
        );
        if next.insert(a, b).is_some() {
            return None;
        }
    }
    if next.len() != n {
        return None;
    }
    let mut tour = vec![1];
    let mut cur = 1;
    loop {
        cur = *next.get(&cur)?;
        if cur == 1 {
            break;
        }
        if tour.contains(&cur) {
            return None;
        }
        tour.push(cur);
    }
    (tour.len() == n).then_some(tour)
}

// ---------------------------------------------------------------------------
// strategic companies

#[derive(Clone, Debug)]
pub struct MarketInstance {
    /// `(company, owner, percentage)`: `owner` holds that share of `company`.
    pub shares: Vec<(String, String, u32)>,
    /// `(good, company)`
    pub products: Vec<(String, String)>,
    pub buy_cost: BTreeMap<String, u64>,
    pub goods: Vec<String>,
}

impl MarketInstance {
    /// Eight food companies and six goods.
    pub fn italian_market() -> Self {
        let s = |a: &str| a.to_string();
        MarketInstance {
            shares: vec![
                (s("panino"), s("barilla"), 60),
                (s("budweiser"), s("saiwa"), 60),
                (s("parmalat"), s("frutto"), 30),
                (s("parmalat"), s("heineken"), 30),
                (s("candia"), s("saiwa"), 30),
                (s("candia"), s("frutto"), 25),
            ],
            products: vec![
                (s("pasta"), s("barilla")),
                (s("bread"), s("panino")),
                (s("tomatoes"), s("frutto")),
                (s("wine"), s("frutto")),
                (s("beer"), s("heineken")),
                (s("beer"), s("budweiser")),
                (s("milk"), s("parmalat")),
                (s("milk"), s("candia")),
            ],
            buy_cost: [
                ("barilla", 500),
                ("saiwa", 400),
                ("frutto", 350),
                ("panino", 150),
                ("budweiser", 300),
                ("heineken", 300),
                ("parmalat", 300),
                ("candia", 150),
            ]
            .into_iter()
            .map(|(c, w)| (s(c), w))
            .collect(),
            goods: ["pasta", "bread", "tomatoes", "wine", "beer", "milk"].map(s).to_vec(),
        }
    }

    fn validate(&self) -> Result<(), EncodingError> {
        if let Some((c, o, n)) = self.shares.iter().find(|s| !(1..=100).contains(&s.2)) {
            return Err(EncodingError::InvalidInstance(format!(
                "share({c},{o},{n}) out of 1..100"
            )));
        }
        let mut owned: BTreeMap<&str, u32> = BTreeMap::new();
        for (c, _, n) in &self.shares {
            *owned.entry(c).or_default() += n;
        }
        if let Some((c, n)) = owned.iter().find(|(_, &n)| n > 100) {
            return Err(EncodingError::InvalidInstance(format!("{n}% of {c} is owned")));
        }
        Ok(())
    }

    /// Companies controlled after buying `bought`: the fixpoint of the
    /// control rules, computed directly.
    pub fn controlled(&self, bought: &BTreeSet<String>) -> BTreeSet<String> {
        let mut ctl = bought.clone();
        loop {
            let mut add = Vec::new();
            for (x, y, n) in &self.shares {
                if ctl.contains(x) || !ctl.contains(y) {
                    continue;
                }
                let joint = self
                    .shares
                    .iter()
                    .any(|(x2, z, m)| x2 == x && z != y && ctl.contains(z) && n + m > 50);
                if *n > 50 || joint {
                    add.push(x.clone());
                }
            }
            if add.is_empty() {
                return ctl;
            }
            ctl.extend(add);
        }
    }

    pub fn produced(&self, bought: &BTreeSet<String>) -> BTreeSet<String> {
        let ctl = self.controlled(bought);
        self.products
            .iter()
            .filter(|(_, c)| ctl.contains(c))
            .map(|(g, _)| g.clone())
            .collect()
    }
}

pub fn strategic_files(m: &MarketInstance) -> PapFiles {
    let mut program = String::new();
    for (g, c) in &m.products {
        writeln!(program, "producedBy({g},{c}).").unwrap();
    }
    for (c, o, n) in &m.shares {
        writeln!(program, "share({c},{o},{n}).").unwrap();
    }
    program.push_str(
        "produced(X) :- producedBy(X,Y), controlled(Y).\n\
         controlled(X) :- bought(X).\n\
         controlled(X) :- share(X,Y,N), controlled(Y), N > 50.\n\
         controlled(X) :- share(X,Y,N), share(X,Z,M), controlled(Y), controlled(Z), M + N > 50, Y != Z.\n",
    );
    let mut hypotheses = String::new();
    for (c, w) in &m.buy_cost {
        writeln!(hypotheses, "bought({c}) [{w}].").unwrap();
    }
    let observations = m.goods.iter().map(|g| format!("produced({g}).\n")).collect();
    PapFiles {
        program,
        hypotheses,
        observations,
    }
}

pub fn strategic_pap(m: &MarketInstance) -> Result<EncodedPap, EncodingError> {
    m.validate()?;
    EncodedPap::from_files(strategic_files(m), None)
}

// ---------------------------------------------------------------------------
// blocks world

pub const TABLE: &str = "table";

#[derive(Clone, Debug)]
pub struct BlocksInstance {
    pub blocks: Vec<String>,
    /// Location of each block: another block or [`TABLE`].
    pub start: BTreeMap<String, String>,
    pub goal: BTreeMap<String, String>,
    pub last_time: u64,
    /// Cost of moving each block (1 when absent).
    pub weight: Option<BTreeMap<String, u64>>,
}

impl BlocksInstance {
    /// Six blocks: start `a` on `b`, `c` on `d` on `e` on `f`; goal the
    /// single tower `f e d c b a` (top first), with `a` on the table.
    pub fn six_blocks() -> Self {
        let s = |a: &str| a.to_string();
        let pairs = |v: &[(&str, &str)]| v.iter().map(|(b, l)| (s(b), s(l))).collect();
        BlocksInstance {
            blocks: ["a", "b", "c", "d", "e", "f"].map(s).to_vec(),
            start: pairs(&[
                ("a", "b"),
                ("b", TABLE),
                ("c", "d"),
                ("d", "e"),
                ("e", "f"),
                ("f", TABLE),
            ]),
            goal: pairs(&[("a", TABLE), ("b", "a"), ("c", "b"), ("d", "c"), ("e", "d"), ("f", "e")]),
            last_time: 6,
            weight: None,
        }
    }

    fn check_configuration(&self, name: &str, conf: &BTreeMap<String, String>) -> Result<(), EncodingError> {
        let err = |m: String| Err(EncodingError::IllegalConfiguration(format!("{name}: {m}")));
        let blocks: BTreeSet<&String> = self.blocks.iter().collect();
        if blocks.len() != self.blocks.len() {
            return err("duplicate block".into());
        }
        if blocks.iter().any(|b| b.as_str() == TABLE) {
            return err("`table` is not a block".into());
        }
        for b in &self.blocks {
            let Some(l) = conf.get(b) else {
                return err(format!("block {b} has no location"));
            };
            if l != TABLE && !blocks.contains(l) {
                return err(format!("block {b} is on unknown location {l}"));
            }
            if l == b {
                return err(format!("block {b} is on itself"));
            }
        }
        if let Some(b) = conf.keys().find(|b| !blocks.contains(b)) {
            return err(format!("unknown block {b}"));
        }
        let mut below: BTreeMap<&String, &String> = BTreeMap::new();
        for (b, l) in conf {
            if l != TABLE {
                if let Some(other) = below.insert(l, b) {
                    return err(format!("blocks {other} and {b} are both on {l}"));
                }
            }
        }
        for b in &self.blocks {
            let mut cur = b;
            for _ in 0..=self.blocks.len() {
                match conf.get(cur) {
                    Some(l) if l != TABLE => cur = l,
                    _ => break,
                }
                if cur == b {
                    return err(format!("cycle through {b}"));
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), EncodingError> {
        if self.last_time < 1 {
            return Err(EncodingError::InvalidInstance("lastTime must be at least 1".into()));
        }
        self.check_configuration("start", &self.start)?;
        self.check_configuration("goal", &self.goal)?;
        if let Some(w) = &self.weight {
            if let Some(b) = self.blocks.iter().find(|b| w.get(*b).is_none_or(|&x| x == 0)) {
                return Err(EncodingError::InvalidInstance(format!(
                    "block {b} has no positive weight"
                )));
            }
        }
        Ok(())
    }

    fn weight_of(&self, b: &str) -> u64 {
        self.weight.as_ref().and_then(|w| w.get(b).copied()).unwrap_or(1)
    }
}

pub fn blocksworld_files(b: &BlocksInstance) -> PapFiles {
    let mut program = String::new();
    for x in &b.blocks {
        writeln!(program, "block({x}).").unwrap();
    }
    for (x, l) in &b.start {
        writeln!(program, "on({x},{l},0).").unwrap();
    }
    program.push_str(
        "on(B,L,T1) :- move(B,L,T), T1 = T + 1.\n\
         on(B,L,T1) :- on(B,L,T), T1 = T + 1, not moved(B,T).\n\
         moved(B,T) :- move(B,_,T).\n\
         :- on(B,L,T), on(B,L1,T), L != L1.\n\
         :- on(B1,B,T), on(B2,B,T), B2 != B1, block(B).\n\
         :- on(B,B,T).\n\
         :- move(B,B1,T), move(B1,L,T).\n\
         :- move(B,L,T), on(B1,B,T), B != B1.\n",
    );
    let mut hypotheses = String::new();
    let locations: Vec<&str> = b.blocks.iter().map(String::as_str).chain([TABLE]).collect();
    for x in &b.blocks {
        for l in &locations {
            for t in 0..b.last_time {
                writeln!(hypotheses, "move({x},{l},{t}) [{}].", b.weight_of(x)).unwrap();
            }
        }
    }
    let observations = b
        .goal
        .iter()
        .map(|(x, l)| format!("on({x},{l},{}).\n", b.last_time))
        .collect();
    PapFiles {
        program,
        hypotheses,
        observations,
    }
}

pub fn blocksworld_pap(b: &BlocksInstance) -> Result<EncodedPap, EncodingError> {
    b.validate()?;
    EncodedPap::from_files(blocksworld_files(b), Some(b.last_time))
}

// ---------------------------------------------------------------------------
// SAT gadget

/// CNF over variables `1..=variables`; literals use the DIMACS sign
/// convention.
#[derive(Clone, Debug)]
pub struct CnfInstance {
    pub variables: usize,
    pub clauses: Vec<Vec<i32>>,
}

impl CnfInstance {
    pub fn validate(&self) -> Result<(), EncodingError> {
        for c in &self.clauses {
            if c.is_empty() {
                return Err(EncodingError::InvalidInstance("empty clause".into()));
            }
            if let Some(l) = c
                .iter()
                .find(|l| **l == 0 || l.unsigned_abs() as usize > self.variables)
            {
                return Err(EncodingError::InvalidInstance(format!("literal {l} out of range")));
            }
        }
        Ok(())
    }

    /// Truth-table satisfiability.
    pub fn is_satisfiable(&self) -> bool {
        (0..1u64 << self.variables).any(|m| {
            self.clauses
                .iter()
                .all(|c| c.iter().any(|&l| (m >> (l.unsigned_abs() - 1) & 1 == 1) == (l > 0)))
        })
    }
}

pub fn sat_files(f: &CnfInstance) -> PapFiles {
    let mut program = String::new();
    // a clause is contradicted when every literal is false
    for c in &f.clauses {
        let body: Vec<String> = c
            .iter()
            .map(|&l| {
                let v = l.unsigned_abs();
                if l > 0 {
                    format!("nx({v})")
                } else {
                    format!("x({v})")
                }
            })
            .collect();
        writeln!(program, "contr :- {}.", body.join(", ")).unwrap();
    }
    program.push_str("inconsistent :- x(J), nx(J).\nassigned(J) :- x(J).\nassigned(J) :- nx(J).\n");
    let all: Vec<String> = (1..=f.variables).map(|j| format!("assigned({j})")).collect();
    if all.is_empty() {
        program.push_str("allAssigned.\n");
    } else {
        writeln!(program, "allAssigned :- {}.", all.join(", ")).unwrap();
    }
    let mut hypotheses = String::new();
    for j in 1..=f.variables {
        writeln!(hypotheses, "x({j}) [0].\nnx({j}) [0].").unwrap();
    }
    PapFiles {
        program,
        hypotheses,
        observations: "not contr.\nnot inconsistent.\nallAssigned.\n".into(),
    }
}

pub fn sat_pap(f: &CnfInstance) -> Result<EncodedPap, EncodingError> {
    f.validate()?;
    EncodedPap::from_files(sat_files(f), None)
}
