//! Random stratified programs for oracle comparisons.

use std::collections::BTreeSet;

use ethoscan::rules::{Edb, Value};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

use super::naive::Db;

const EDB: &[(&str, usize)] = &[("e0", 1), ("e1", 2), ("e2", 2)];
const IDB: &[(&str, usize)] = &[("p0", 1), ("p1", 2), ("p2", 2), ("p3", 1)];
const VARS: &[&str] = &["X", "Y", "Z", "W"];

pub struct Program {
    pub text: String,
    pub facts: Vec<(String, Vec<i64>)>,
}

impl Program {
    pub fn edb(&self) -> Edb {
        let mut edb = Edb::new();
        // IDB predicates without a defining rule are legitimately empty.
        for (p, a) in EDB.iter().chain(IDB) {
            edb.declare(p, *a);
        }
        for (p, args) in &self.facts {
            edb.insert(p, args.iter().map(|n| Value::Int(*n)).collect());
        }
        edb
    }

    pub fn db(&self) -> Db {
        let mut db = Db::new();
        for (p, _) in EDB.iter().chain(IDB) {
            db.entry(p.to_string()).or_default();
        }
        for (p, args) in &self.facts {
            db.entry(p.clone())
                .or_default()
                .insert(args.iter().map(|n| Value::Int(*n)).collect());
        }
        db
    }
}

fn atom(rng: &mut StdRng, pred: &str, arity: usize, vars: &[&str]) -> String {
    let args: Vec<String> = (0..arity)
        .map(|_| {
            if rng.gen_bool(0.15) {
                rng.gen_range(0..6).to_string()
            } else {
                vars.choose(rng).unwrap().to_string()
            }
        })
        .collect();
    format!("{pred}({})", args.join(", "))
}

/// A random program with at most 8 rules and 30 facts. IDB predicate `p_i`
/// may depend positively on `p_j` for `j <= i` and negatively only for
/// `j < i`, so every generated program is stratified.
pub fn random_program(rng: &mut StdRng) -> Program {
    let nfacts = rng.gen_range(0..=30);
    let facts = (0..nfacts)
        .map(|_| {
            let (p, a) = EDB.choose(rng).unwrap();
            (p.to_string(), (0..*a).map(|_| rng.gen_range(0..6)).collect())
        })
        .collect();

    let nrules = rng.gen_range(1..=8);
    let mut rules = BTreeSet::new();
    let mut attempts = 0;
    while rules.len() < nrules && attempts < 100 {
        attempts += 1;
        let hi = rng.gen_range(0..IDB.len());
        let (head, head_arity) = IDB[hi];
        let npos = rng.gen_range(1..=3);
        let mut body = Vec::new();
        let mut pos_vars: Vec<String> = Vec::new();
        for _ in 0..npos {
            let choices: Vec<(&str, usize)> = EDB.iter().chain(IDB[..=hi].iter()).copied().collect();
            let (p, a) = *choices.choose(rng).unwrap();
            let text = atom(rng, p, a, VARS);
            for v in VARS {
                if text.contains(v) && !pos_vars.iter().any(|x| x == v) {
                    pos_vars.push(v.to_string());
                }
            }
            body.push(text);
        }
        if pos_vars.is_empty() {
            continue;
        }
        let bound: Vec<&str> = pos_vars.iter().map(String::as_str).collect();
        if rng.gen_bool(0.5) {
            let choices: Vec<(&str, usize)> = EDB.iter().chain(IDB[..hi].iter()).copied().collect();
            let (p, a) = *choices.choose(rng).unwrap();
            body.push(format!("not {}", atom(rng, p, a, &bound)));
        }
        if rng.gen_bool(0.3) {
            let b = ["lt", "gt", "eq", "not eq"].choose(rng).unwrap();
            body.push(format!("{b}({}, {})", bound.choose(rng).unwrap(), rng.gen_range(0..6)));
        }
        let head_args: Vec<&str> = (0..head_arity).map(|_| *bound.choose(rng).unwrap()).collect();
        rules.insert(format!("{head}({}) :- {}.", head_args.join(", "), body.join(", ")));
    }
    Program {
        text: rules.into_iter().collect::<Vec<_>>().join("\n"),
        facts,
    }
}
