//! Naive bottom-up evaluator used as an oracle for the semi-naive engine.
//!
//! Strata are computed by iterative relaxation and every rule is evaluated
//! by enumerating all assignments of its variables over the active domain,
//! so nothing here shares code with the engine's join planner.

use std::collections::{BTreeMap, BTreeSet};

use ethoscan::rules::{Builtin, Literal, Rule, Term, Value};

pub type Db = BTreeMap<String, BTreeSet<Vec<Value>>>;

fn strata(rules: &[Rule]) -> BTreeMap<String, usize> {
    let mut level: BTreeMap<String, usize> = BTreeMap::new();
    for r in rules {
        level.entry(r.head.predicate.clone()).or_insert(0);
        for l in &r.body {
            level.entry(l.atom().predicate.clone()).or_insert(0);
        }
    }
    let bound = level.len() + 1;
    loop {
        let mut changed = false;
        for r in rules {
            let mut need = level[&r.head.predicate];
            for l in &r.body {
                match l {
                    Literal::Positive(a) => need = need.max(level[&a.predicate]),
                    Literal::Negative(a) => need = need.max(level[&a.predicate] + 1),
                    Literal::Builtin { .. } => {}
                }
            }
            if need > level[&r.head.predicate] {
                assert!(need <= bound, "program is not stratifiable");
                level.insert(r.head.predicate.clone(), need);
                changed = true;
            }
        }
        if !changed {
            return level;
        }
    }
}

fn check_builtin(b: Builtin, args: &[Value]) -> bool {
    match b {
        Builtin::Lt => args[0] < args[1],
        Builtin::Gt => args[0] > args[1],
        Builtin::Eq => args[0] == args[1],
        other => panic!("oracle does not model builtin {other:?}"),
    }
}

fn ground(t: &Term, env: &BTreeMap<&str, Value>) -> Value {
    match t {
        Term::Const(c) => c.clone(),
        Term::Var(v) => env[v.as_str()].clone(),
    }
}

fn assignments<'a>(vars: &[&'a str], domain: &[Value]) -> Vec<BTreeMap<&'a str, Value>> {
    let mut out = vec![BTreeMap::new()];
    for v in vars {
        let mut next = Vec::with_capacity(out.len() * domain.len());
        for env in &out {
            for d in domain {
                let mut e = env.clone();
                e.insert(*v, d.clone());
                next.push(e);
            }
        }
        out = next;
    }
    out
}

/// Least model of `rules` over `edb`.
pub fn naive_fixpoint(rules: &[Rule], edb: &Db) -> Db {
    let mut db = edb.clone();
    let mut domain: BTreeSet<Value> = edb.values().flatten().flatten().cloned().collect();
    for r in rules {
        for t in r.head.args.iter().chain(r.body.iter().flat_map(|l| l.atom().args.iter())) {
            if let Term::Const(c) = t {
                domain.insert(c.clone());
            }
        }
    }
    let domain: Vec<Value> = domain.into_iter().collect();
    let levels = strata(rules);
    let max = levels.values().copied().max().unwrap_or(0);
    for r in rules {
        db.entry(r.head.predicate.clone()).or_default();
    }
    for level in 0..=max {
        let here: Vec<&Rule> = rules.iter().filter(|r| levels[&r.head.predicate] == level).collect();
        loop {
            let mut added = Vec::new();
            for r in &here {
                let mut vars: Vec<&str> = Vec::new();
                for t in r.head.args.iter().chain(r.body.iter().flat_map(|l| l.atom().args.iter())) {
                    if let Term::Var(v) = t {
                        if !vars.contains(&v.as_str()) {
                            vars.push(v);
                        }
                    }
                }
                for env in assignments(&vars, &domain) {
                    let ok = r.body.iter().all(|l| {
                        let args: Vec<Value> = l.atom().args.iter().map(|t| ground(t, &env)).collect();
                        let present = |p: &str| db.get(p).is_some_and(|rel| rel.contains(&args));
                        match l {
                            Literal::Positive(a) => present(&a.predicate),
                            Literal::Negative(a) => !present(&a.predicate),
                            Literal::Builtin { builtin, negated, .. } => check_builtin(*builtin, &args) != *negated,
                        }
                    });
                    if ok {
                        let fact: Vec<Value> = r.head.args.iter().map(|t| ground(t, &env)).collect();
                        if !db[&r.head.predicate].contains(&fact) {
                            added.push((r.head.predicate.clone(), fact));
                        }
                    }
                }
            }
            if added.is_empty() {
                break;
            }
            for (p, f) in added {
                db.get_mut(&p).unwrap().insert(f);
            }
        }
    }
    db
}
