mod common;

use std::collections::BTreeSet;

use pap_core::abduction::{brute_force_opt, Pap, PapSolver, SolveOptions};
use pap_core::ground::{ground, GroundError};
use pap_core::model::Atom;
use pap_core::parser::{parse_hypotheses, parse_observations, parse_program};
use pap_core::stable::enumerate_stable_models;
use pap_core::weak::{best_models, objective, OptimizeOptions};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::{random_pap, solution_sets};

fn pick<'a>(rng: &mut StdRng, v: &[&'a str]) -> &'a str {
    v[rng.gen_range(0..v.len())]
}

/// Safe first-order rules over a few constants, with arithmetic and
/// comparisons, hypotheses `h(c)` and `k`.
fn random_first_order(rng: &mut StdRng) -> Pap {
    let consts = ["a", "b", "1", "2"];
    let mut program = String::new();
    for _ in 0..rng.gen_range(0..4) {
        program.push_str(&format!("e({}, {}).\n", pick(rng, &consts), pick(rng, &consts)));
    }
    for _ in 0..rng.gen_range(1..5) {
        let mut body = vec![format!("e(X, {})", pick(rng, &["Y", "a", "1"]))];
        let bound_y = body[0].contains('Y');
        for _ in 0..rng.gen_range(0..3) {
            let v = if bound_y { pick(rng, &["X", "Y"]) } else { "X" };
            let lit = match rng.gen_range(0..5) {
                0 => format!("h({v})"),
                1 => format!("not p({v})"),
                2 => format!("not h({v})"),
                3 => "not k".to_string(),
                _ => format!("{v} != {}", pick(rng, &consts)),
            };
            body.push(lit);
        }
        let head = match rng.gen_range(0..4) {
            0 => "p(X)".to_string(),
            1 if bound_y => "r(X, Y)".to_string(),
            2 => "ok".to_string(),
            _ => "p(X)".to_string(),
        };
        program.push_str(&format!("{head} :- {}.\n", body.join(", ")));
    }
    if rng.gen_bool(0.5) {
        program.push_str("n(S) :- e(X, Y), h(X), S = X + Y.\nok :- n(S), S > 2.\n");
    }
    let mut hyps = String::new();
    for h in ["h(a)", "h(b)", "h(1)", "h(2)", "k"] {
        if rng.gen_bool(0.5) {
            hyps.push_str(&format!("{h} [{}].\n", rng.gen_range(0..4)));
        }
    }
    let obs = match rng.gen_range(0..3) {
        0 => "ok.",
        1 => "not ok.",
        _ => "",
    };
    Pap::from_texts(&program, &hyps, obs).expect("generated problems are valid")
}

fn check_against_oracle(pap: &Pap) -> Result<(), TestCaseError> {
    let oracle = brute_force_opt(pap).unwrap();
    let solver = PapSolver::new(pap.clone(), None).unwrap();
    match solver.solve_optimal(SolveOptions {
        all: true,
        ..Default::default()
    }) {
        Ok(r) => prop_assert_eq!(solution_sets(&r.solutions), solution_sets(&oracle), "{}", pap),
        Err(_) => prop_assert!(oracle.is_empty(), "{}", pap),
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn first_order_problems_match_the_oracle(seed in any::<u64>()) {
        let pap = random_first_order(&mut StdRng::seed_from_u64(seed));
        check_against_oracle(&pap)?;
    }

    #[test]
    fn printed_problems_parse_back(seed in any::<u64>()) {
        let pap = random_first_order(&mut StdRng::seed_from_u64(seed));
        let program = parse_program(&pap.program().to_string()).unwrap();
        prop_assert_eq!(&program, pap.program());
        let text = pap.to_string();
        let (p, rest) = text.split_once("% hypotheses\n").unwrap();
        let (h, o) = rest.split_once("% observations\n").unwrap();
        prop_assert_eq!(parse_program(p).unwrap(), program);
        let hyps = parse_hypotheses(h).unwrap();
        prop_assert_eq!(hyps.iter().map(|d| d.atom.clone()).collect::<Vec<_>>(), pap.hypotheses());
        prop_assert_eq!(hyps.iter().map(|d| d.penalty).collect::<Vec<_>>(), pap.penalties());
        let obs = parse_observations(o).unwrap();
        prop_assert_eq!(obs.iter().map(|d| d.literal.clone()).collect::<Vec<_>>(), pap.observations());
    }

    #[test]
    fn penalty_scaling_preserves_optima(seed in any::<u64>(), k in 1u64..7) {
        let pap = random_pap(&mut StdRng::seed_from_u64(seed));
        let a = PapSolver::new(pap.clone(), None).unwrap();
        let b = PapSolver::new(pap.scaled(k), None).unwrap();
        let all = SolveOptions { all: true, ..Default::default() };
        match (a.solve_optimal(all), b.solve_optimal(all)) {
            (Ok(x), Ok(y)) => {
                prop_assert_eq!(solution_sets(&x.solutions), solution_sets(&y.solutions));
                prop_assert_eq!(x.cost * u128::from(k), y.cost);
                prop_assert_eq!(b.optimal_cost().unwrap(), y.cost);
            }
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "scaling changed consistency"),
        }
    }

    #[test]
    fn necessary_implies_relevant(seed in any::<u64>()) {
        let pap = random_pap(&mut StdRng::seed_from_u64(seed));
        let solver = PapSolver::new(pap.clone(), None).unwrap();
        if !solver.is_consistent() {
            return Ok(());
        }
        let opt = solver.solve_optimal(SolveOptions { all: true, ..Default::default() }).unwrap();
        for h in pap.hypotheses() {
            let nec = solver.is_necessary(h).unwrap();
            prop_assert!(!nec || solver.is_relevant(h).unwrap());
            prop_assert_eq!(nec, opt.solutions.iter().all(|s| s.hypotheses.contains(h)));
        }
    }

    #[test]
    fn admissibility_paths_agree(seed in any::<u64>()) {
        let pap = random_first_order(&mut StdRng::seed_from_u64(seed));
        let solver = PapSolver::new(pap.clone(), None).unwrap();
        let adm = solution_sets(&solver.enumerate_admissible(None));
        let h = pap.hypotheses();
        for bits in 0..1u32 << h.len() {
            let s: Vec<Atom> = (0..h.len()).filter(|i| bits >> i & 1 == 1).map(|i| h[i].clone()).collect();
            let fast = solver.is_admissible(&s).unwrap();
            let slow = solver.is_admissible_search(&s).unwrap();
            prop_assert_eq!(fast.is_some(), slow.is_some());
            let mut names: Vec<String> = s.iter().map(ToString::to_string).collect();
            names.sort();
            prop_assert_eq!(fast.is_some(), adm.contains(&names));
            if let Some(w) = fast {
                prop_assert!(pap.explains(&w));
                prop_assert!(s.iter().all(|a| w.contains(a)));
            }
        }
    }

    #[test]
    fn trace_costs_decrease_to_the_optimum(seed in any::<u64>()) {
        let pap = random_pap(&mut StdRng::seed_from_u64(seed));
        let solver = PapSolver::new(pap.clone(), None).unwrap();
        let Ok(r) = solver.solve_optimal(SolveOptions { trace: true, ..Default::default() }) else {
            return Ok(());
        };
        let costs: Vec<u128> = r.trace.iter().map(|s| s.cost).collect();
        prop_assert!(costs.windows(2).all(|w| w[0] > w[1]));
        prop_assert_eq!(costs.last().copied(), Some(r.cost));
        for s in r.trace.iter().chain(&r.solutions) {
            prop_assert_eq!(s.cost, pap.sum_penalty(&s.hypotheses));
        }
    }

    #[test]
    fn best_models_are_cheapest_stable_models(seed in any::<u64>()) {
        let pap = random_pap(&mut StdRng::seed_from_u64(seed));
        let mut program = pap.program().clone();
        let mut rng = StdRng::seed_from_u64(seed ^ 1);
        let atoms: Vec<Atom> = program.atoms().cloned().collect();
        let mut weak = String::new();
        for _ in 0..rng.gen_range(0..5) {
            let a = &atoms[rng.gen_range(0..atoms.len())];
            weak.push_str(&format!(":~ {a}. [{}:]\n", rng.gen_range(1..5)));
        }
        program.weak_constraints.extend(parse_program(&weak).unwrap().weak_constraints);
        let gp = ground(&program, &BTreeSet::new(), 0).unwrap();
        let models = enumerate_stable_models(&gp, None);
        let best = best_models(&gp, &OptimizeOptions { all: true, ..Default::default() });
        let Some(min) = models.iter().map(|m| objective(&program, m).unwrap()).min() else {
            prop_assert!(best.is_none());
            return Ok(());
        };
        let expected: BTreeSet<String> = models
            .iter()
            .filter(|m| objective(&program, m).unwrap() == min)
            .map(ToString::to_string)
            .collect();
        let best = best.unwrap();
        prop_assert_eq!(best.cost, min);
        let got: BTreeSet<String> = best.models.iter().map(|m| gp.interpretation_of(m).to_string()).collect();
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn grounding_is_idempotent(seed in any::<u64>()) {
        let pap = random_first_order(&mut StdRng::seed_from_u64(seed));
        let bound = pap.default_integer_bound();
        let g1 = ground(pap.program(), &pap.extra_constants(), bound).unwrap();
        let g2 = ground(&g1.to_program(), &BTreeSet::new(), bound).unwrap();
        prop_assert_eq!(g1.to_program(), g2.to_program());
    }

    #[test]
    fn integer_bound_guard(bound in 0u64..20, top in 0u64..30) {
        let p = parse_program(&format!("n(0). n(Y) :- n(X), Y = X + 1, Y < {top}.")).unwrap();
        match ground(&p, &BTreeSet::new(), bound) {
            Ok(g) => {
                prop_assert!(top <= bound);
                let n = g.atoms().iter().filter(|a| a.predicate.as_str() == "n").count() as u64;
                prop_assert_eq!(n, top.max(1));
            }
            Err(e) => {
                prop_assert!(top > bound);
                let overflow = matches!(e, GroundError::IntegerOverflow { .. });
                prop_assert!(overflow);
            }
        }
    }
}
