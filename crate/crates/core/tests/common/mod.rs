#![allow(dead_code)]

use std::collections::BTreeSet;

use pap_core::abduction::{Pap, Solution};
use rand::rngs::StdRng;
use rand::Rng;

/// A random problem: at most 5 hypotheses, at most 10 atoms in total,
/// rules with negation (unstratified programs allowed), a few observations.
pub fn random_pap(rng: &mut StdRng) -> Pap {
    let n_h = rng.gen_range(0..=5);
    let n_q = rng.gen_range(1..=10 - n_h);
    let hyps: Vec<String> = (0..n_h).map(|i| format!("h{i}")).collect();
    let others: Vec<String> = (0..n_q).map(|i| format!("q{i}")).collect();
    let all: Vec<&String> = hyps.iter().chain(&others).collect();
    let mut program = String::new();
    for _ in 0..rng.gen_range(1..=8) {
        if rng.gen_bool(0.1) {
            program.push_str(":- ");
        } else {
            program.push_str(&others[rng.gen_range(0..n_q)]);
            program.push_str(" :- ");
        }
        let body: Vec<String> = (0..rng.gen_range(1..=3))
            .map(|_| {
                let a = all[rng.gen_range(0..all.len())];
                if rng.gen_bool(0.4) {
                    format!("not {a}")
                } else {
                    a.to_string()
                }
            })
            .collect();
        program.push_str(&body.join(", "));
        program.push_str(".\n");
    }
    let hyp_text: String = hyps
        .iter()
        .map(|h| format!("{h} [{}].\n", rng.gen_range(0..=5)))
        .collect();
    let obs: String = (0..rng.gen_range(0..=3))
        .map(|_| {
            let a = all[rng.gen_range(0..all.len())];
            if rng.gen_bool(0.3) {
                format!("not {a}.\n")
            } else {
                format!("{a}.\n")
            }
        })
        .collect();
    Pap::from_texts(&program, &hyp_text, &obs).expect("generated problems are valid")
}

pub fn solution_sets(v: &[Solution]) -> BTreeSet<Vec<String>> {
    v.iter().map(Solution::sorted_names).collect()
}
