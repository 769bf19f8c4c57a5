//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use pap_core::abduction::{brute_force_opt, Pap, PapSolver, SolveOptions};
use pap_core::encodings::{
    blocksworld_pap, decode_tour, network_pap, sat_pap, strategic_pap, tsp_pap, BlocksInstance, CnfInstance,
    MarketInstance, TspInstance,
};
use pap_core::ground::{ground, GroundProgram};
use pap_core::model::{Atom, Interpretation};
use pap_core::parser::{parse_atom_list, parse_program};
use pap_core::stable::{enumerate_stable_models, least_model, reduct};
use pap_core::weak::{best_models, objective, OptimizeOptions};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::{random_pap, solution_sets};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn atoms(s: &str) -> Vec<Atom> {
    parse_atom_list(s).unwrap()
}

fn names(v: &[&str]) -> Vec<String> {
    let mut v: Vec<String> = v.iter().map(|s| s.to_string()).collect();
    v.sort();
    v
}

fn network() -> Outcome {
    let solver = network_pap().solver().map_err(|e| e.to_string())?;
    let adm = solver.enumerate_admissible(None);
    let mut costs: Vec<u128> = adm.iter().map(|s| s.cost).collect();
    costs.sort();
    check(costs == [2, 3, 3, 3, 4], format!("admissible costs {costs:?}"))?;
    let expected: BTreeSet<Vec<String>> = [
        names(&["offline(b)", "offline(f)"]),
        names(&["offline(b)", "offline(c)", "offline(f)"]),
        names(&["offline(b)", "offline(d)", "offline(f)"]),
        names(&["offline(c)", "offline(d)", "offline(f)"]),
        names(&["offline(b)", "offline(c)", "offline(d)", "offline(f)"]),
    ]
    .into_iter()
    .collect();
    check(
        solution_sets(&adm) == expected,
        format!("admissible sets {:?}", solution_sets(&adm)),
    )?;
    let opt = solver
        .solve_optimal(SolveOptions {
            all: true,
            ..Default::default()
        })
        .map_err(|e| e.to_string())?;
    check(
        opt.cost == 2 && opt.solutions.len() == 1,
        format!("optimum {:?}", solution_sets(&opt.solutions)),
    )?;
    check(
        opt.solutions[0].sorted_names() == names(&["offline(b)", "offline(f)"]),
        "optimal solution is not {offline(b), offline(f)}",
    )?;
    for h in solver.pap().hypotheses() {
        let key = h.to_string() == "offline(b)" || h.to_string() == "offline(f)";
        let rel = solver.is_relevant(h).map_err(|e| e.to_string())?;
        let nec = solver.is_necessary(h).map_err(|e| e.to_string())?;
        check(
            rel == key && nec == key,
            format!("{h}: relevant {rel}, necessary {nec}"),
        )?;
    }
    Ok("Adm = S1..S5 with costs 2,3,3,3,4; Opt = {S1}; relevant = necessary = {offline(b), offline(f)}".into())
}

fn weak_kernel() -> Outcome {
    let p = parse_program("a :- c, not b. c. b :- c, not a. :~ a, c. [1:] :~ b. [2:] :~ a. [1:] :~ b, c. [1:]")
        .map_err(|e| e.to_string())?;
    let g = ground(&p, &BTreeSet::new(), 0).map_err(|e| e.to_string())?;
    let models = enumerate_stable_models(&g, None);
    let mut seen = BTreeMap::new();
    for m in &models {
        seen.insert(m.to_string(), objective(&p, m).map_err(|e| e.to_string())?);
    }
    let expected: BTreeMap<String, u128> = [("{a, c}".to_string(), 2), ("{b, c}".to_string(), 3)].into();
    check(seen == expected, format!("candidate models {seen:?}"))?;
    let best = best_models(
        &g,
        &OptimizeOptions {
            all: true,
            ..Default::default()
        },
    )
    .ok_or("no best model")?;
    let best_sets: Vec<String> = best.models.iter().map(|m| g.interpretation_of(m).to_string()).collect();
    check(
        best.cost == 2 && best_sets == ["{a, c}"],
        format!("best {best_sets:?} at {}", best.cost),
    )?;
    Ok("candidates {a,c}:2 {b,c}:3; best {a,c}".into())
}

fn stable_semantics() -> Outcome {
    let p = parse_program("a :- not b. b :- not a. c :- a. c :- b.").map_err(|e| e.to_string())?;
    let g = GroundProgram::from_program(&p).map_err(|e| e.to_string())?;
    let models: BTreeSet<String> = enumerate_stable_models(&g, None)
        .iter()
        .map(ToString::to_string)
        .collect();
    let expected: BTreeSet<String> = ["{a, c}".to_string(), "{b, c}".to_string()].into();
    check(models == expected, format!("stable models {models:?}"))?;
    for (m, reduct_text) in [("a. c.", "a. c :- a. c :- b."), ("b. c.", "b. c :- a. c :- b.")] {
        let i: Interpretation = atoms(m).into_iter().collect();
        let r = reduct(&p, &i).map_err(|e| e.to_string())?;
        let got: BTreeSet<String> = r.rules.iter().map(ToString::to_string).collect();
        let want: BTreeSet<String> = parse_program(reduct_text)
            .unwrap()
            .rules
            .iter()
            .map(ToString::to_string)
            .collect();
        check(got == want, format!("reduct w.r.t. {i}: {got:?}"))?;
        check(
            least_model(&r.rules) == i,
            format!("least model of the reduct w.r.t. {i}"),
        )?;
    }
    Ok("SM = {{a,c},{b,c}}; reducts and least models match".into())
}

fn strategic() -> Outcome {
    let enc = strategic_pap(&MarketInstance::italian_market()).map_err(|e| e.to_string())?;
    let solver = enc.solver().map_err(|e| e.to_string())?;
    let opt = solver
        .solve_optimal(SolveOptions {
            all: true,
            ..Default::default()
        })
        .map_err(|e| e.to_string())?;
    check(opt.cost == 1150, format!("optimal cost {}", opt.cost))?;
    check(
        solution_sets(&opt.solutions) == [names(&["bought(barilla)", "bought(frutto)", "bought(heineken)"])].into(),
        format!("optima {:?}", solution_sets(&opt.solutions)),
    )?;
    let alt = atoms("bought(barilla). bought(frutto). bought(saiwa).");
    check(
        solver.is_admissible(&alt).map_err(|e| e.to_string())?.is_some(),
        "saiwa alternative not admissible",
    )?;
    let cost = solver.pap().sum_penalty(&alt);
    check(cost == 1250, format!("saiwa alternative costs {cost}"))?;
    check(
        !solver.is_optimal(&alt).map_err(|e| e.to_string())?,
        "saiwa alternative reported optimal",
    )?;
    Ok(
        "unique optimum {barilla, frutto, heineken} = 1150; {barilla, frutto, saiwa} admissible at 1250, not optimal"
            .into(),
    )
}

fn blocks() -> Outcome {
    let enc = blocksworld_pap(&BlocksInstance::six_blocks()).map_err(|e| e.to_string())?;
    let solver = enc.solver().map_err(|e| e.to_string())?;
    let opt = solver
        .solve_optimal(SolveOptions::default())
        .map_err(|e| e.to_string())?;
    check(opt.cost == 6, format!("optimal cost {}", opt.cost))?;
    let seven =
        atoms("move(a,table,0). move(c,table,0). move(b,a,1). move(c,b,2). move(d,c,3). move(e,d,4). move(f,e,5).");
    check(
        solver.is_admissible(&seven).map_err(|e| e.to_string())?.is_some(),
        "seven-move plan not admissible",
    )?;
    check(solver.pap().sum_penalty(&seven) == 7, "seven-move plan cost")?;
    check(
        !solver.is_optimal(&seven).map_err(|e| e.to_string())?,
        "seven-move plan reported optimal",
    )?;
    Ok(format!(
        "optimal cost 6 (plan {}); seven-move plan admissible, not optimal",
        opt.solutions[0].sorted_names().join(" ")
    ))
}

fn random_corpus() -> Vec<Pap> {
    let mut rng = StdRng::seed_from_u64(2024);
    (0..250).map(|_| random_pap(&mut rng)).collect()
}

fn soundness_completeness() -> Outcome {
    let corpus = random_corpus();
    let mut consistent = 0;
    for (k, pap) in corpus.iter().enumerate() {
        let oracle = brute_force_opt(pap).map_err(|e| e.to_string())?;
        let solver = PapSolver::new(pap.clone(), None).map_err(|e| e.to_string())?;
        match solver.solve_optimal(SolveOptions {
            all: true,
            ..Default::default()
        }) {
            Ok(r) => {
                consistent += 1;
                check(
                    solution_sets(&r.solutions) == solution_sets(&oracle),
                    format!(
                        "instance {k}: solver {:?} vs oracle {:?}\n{pap}",
                        solution_sets(&r.solutions),
                        solution_sets(&oracle)
                    ),
                )?;
                for s in &r.solutions {
                    check(
                        s.cost == pap.sum_penalty(&s.hypotheses) && s.cost == r.cost,
                        format!("instance {k}: cost coupling"),
                    )?;
                }
            }
            Err(_) => check(
                oracle.is_empty(),
                format!("instance {k}: solver inconsistent, oracle not\n{pap}"),
            )?,
        }
    }
    Ok(format!(
        "{} random problems ({consistent} consistent), 0 mismatches",
        corpus.len()
    ))
}

fn task_procedures() -> Outcome {
    let corpus = random_corpus();
    for (k, pap) in corpus.iter().enumerate() {
        let oracle = brute_force_opt(pap).map_err(|e| e.to_string())?;
        let solver = PapSolver::new(pap.clone(), None).map_err(|e| e.to_string())?;
        if oracle.is_empty() {
            check(
                solver.optimal_cost().is_err(),
                format!("instance {k}: cost of inconsistent problem"),
            )?;
            continue;
        }
        let c = oracle[0].cost;
        let bs = solver.optimal_cost().map_err(|e| e.to_string())?;
        let greedy = solver.solve_optimal_greedy().map_err(|e| e.to_string())?;
        let opt = solver
            .solve_optimal(SolveOptions::default())
            .map_err(|e| e.to_string())?;
        check(
            bs == c && greedy.cost == c && opt.cost == c,
            format!(
                "instance {k}: oracle {c}, binary search {bs}, greedy {}, solve {}",
                greedy.cost, opt.cost
            ),
        )?;
        for h in pap.hypotheses() {
            let rel = oracle.iter().any(|s| s.hypotheses.contains(h));
            let nec = oracle.iter().all(|s| s.hypotheses.contains(h));
            let got_rel = solver.is_relevant(h).map_err(|e| e.to_string())?;
            let got_nec = solver.is_necessary(h).map_err(|e| e.to_string())?;
            check(
                rel == got_rel && nec == got_nec,
                format!("instance {k}, {h}: relevant {got_rel}/{rel}, necessary {got_nec}/{nec}"),
            )?;
        }
    }
    Ok(format!("{} random problems, 0 mismatches", corpus.len()))
}

fn sat_gadget() -> Outcome {
    let lits = [1, -1, 2, -2];
    let clauses: Vec<Vec<i32>> = (1..16u32)
        .map(|m| (0..4).filter(|i| m >> i & 1 == 1).map(|i| lits[i]).collect())
        .collect();
    let mut cnfs = vec![Vec::new()];
    for a in 0..clauses.len() {
        cnfs.push(vec![clauses[a].clone()]);
        for b in a + 1..clauses.len() {
            cnfs.push(vec![clauses[a].clone(), clauses[b].clone()]);
            for c in b + 1..clauses.len() {
                cnfs.push(vec![clauses[a].clone(), clauses[b].clone(), clauses[c].clone()]);
            }
        }
    }
    let mut instances: Vec<CnfInstance> = cnfs
        .into_iter()
        .map(|clauses| CnfInstance { variables: 2, clauses })
        .collect();
    let exhaustive = instances.len();
    let mut rng = StdRng::seed_from_u64(99);
    for _ in 0..100 {
        let r = rng.gen_range(3..=4);
        let clauses = (0..rng.gen_range(1..=12))
            .map(|_| {
                (0..rng.gen_range(1..=3))
                    .map(|_| {
                        let v = rng.gen_range(1..=r) as i32;
                        if rng.gen_bool(0.5) {
                            v
                        } else {
                            -v
                        }
                    })
                    .collect()
            })
            .collect();
        instances.push(CnfInstance { variables: r, clauses });
    }
    let mut sat = 0;
    for f in &instances {
        let solver = sat_pap(f)
            .map_err(|e| e.to_string())?
            .solver()
            .map_err(|e| e.to_string())?;
        let expected = f.is_satisfiable();
        sat += usize::from(expected);
        check(
            solver.is_consistent() == expected,
            format!("{:?}: expected {expected}", f.clauses),
        )?;
    }
    Ok(format!(
        "{exhaustive} exhaustive 2-variable CNFs + 100 random ({sat} satisfiable), 0 mismatches"
    ))
}

fn tsp() -> Outcome {
    let mut instances = Vec::new();
    for n in 2..=5usize {
        let pairs: Vec<(usize, usize)> = (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect();
        for m in 0..1u32 << pairs.len() {
            let t = TspInstance::symmetric(n, |i, j| {
                let k = pairs.iter().position(|&p| p == (i, j)).unwrap();
                1 + u64::from(m >> k & 1)
            })
            .unwrap();
            instances.push(t);
        }
    }
    let symmetric_small = instances.len();
    let mut rng = StdRng::seed_from_u64(5);
    for n in 3..=5 {
        for _ in 0..20 {
            let w: Vec<u64> = (0..n * n).map(|_| rng.gen_range(1..=9)).collect();
            instances.push(TspInstance::symmetric(n, |i, j| w[(i - 1) * n + j - 1]).unwrap());
        }
    }
    for _ in 0..50 {
        let n = rng.gen_range(2..=5);
        let mut w = BTreeMap::new();
        for i in 1..=n {
            for j in 1..=n {
                if i != j {
                    w.insert((i, j), rng.gen_range(1..=9));
                }
            }
        }
        instances.push(TspInstance::new(n, w).unwrap());
    }
    for t in &instances {
        let solver = tsp_pap(t)
            .map_err(|e| e.to_string())?
            .solver()
            .map_err(|e| e.to_string())?;
        let r = solver
            .solve_optimal(SolveOptions {
                all: true,
                ..Default::default()
            })
            .map_err(|e| e.to_string())?;
        let expected = u128::from(t.brute_force_min());
        check(
            r.cost == expected,
            format!("n={} {:?}: cost {} expected {expected}", t.n, t.w, r.cost),
        )?;
        for s in &r.solutions {
            check(decode_tour(t.n, s).is_some(), format!("not a Hamiltonian cycle: {s}"))?;
        }
    }
    Ok(format!(
        "{symmetric_small} exhaustive symmetric (n<=5, w in {{1,2}}) + 60 random symmetric (w<=9) + 50 asymmetric, 0 mismatches"
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("network diagnosis", network, Duration::from_secs(1)),
        ("weak-constraint kernel", weak_kernel, Duration::from_secs(1)),
        ("stable-model semantics", stable_semantics, Duration::from_secs(1)),
        ("strategic companies", strategic, Duration::from_secs(10)),
        ("blocks world", blocks, Duration::from_secs(60)),
        (
            "translation soundness/completeness",
            soundness_completeness,
            Duration::MAX,
        ),
        ("task procedures", task_procedures, Duration::MAX),
        ("SAT gadget", sat_gadget, Duration::MAX),
        ("TSP optimality", tsp, Duration::from_secs(30)),
    ];
    let mut failed = 0;
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if took > *limit => Err(format!("{msg}; took {took:.2?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("criterion {}: PASS {name} ({took:.2?}): {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {}: FAIL {name} ({took:.2?}): {msg}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
