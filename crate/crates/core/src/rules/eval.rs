//! Semi-naive bottom-up evaluation.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::{Builtin, Literal, Rule, Term, Value};
use super::builtins::{self, Outcome, RegexCache};
use super::{RuleError, RuleSet};

pub type Tuple = Vec<Value>;
pub type Relation = BTreeSet<Tuple>;

/// Upper bound on tuple visits during one evaluation. Programs without
/// function symbols always terminate; the counter exists to turn a runaway
/// evaluation into an error rather than a hang.
pub const DEFAULT_FUEL: u64 = 500_000_000;

#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    pub fuel: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { fuel: DEFAULT_FUEL }
    }
}

/// Extensional facts: declared predicates with their arities and tuples.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Edb {
    schema: BTreeMap<String, usize>,
    relations: BTreeMap<String, Relation>,
}

impl Edb {
    pub fn new() -> Self {
        Edb::default()
    }

    /// Declares a predicate so rules may reference it even with no facts.
    ///
    /// # Panics
    ///
    /// Panics if the predicate was declared with a different arity.
    pub fn declare(&mut self, predicate: &str, arity: usize) {
        let existing = *self.schema.entry(predicate.to_string()).or_insert(arity);
        assert_eq!(existing, arity, "predicate `{predicate}` redeclared with a different arity");
        self.relations.entry(predicate.to_string()).or_default();
    }

    pub fn insert(&mut self, predicate: &str, tuple: Vec<Value>) {
        self.declare(predicate, tuple.len());
        self.relations
            .get_mut(predicate)
            .expect("declared above")
            .insert(tuple);
    }

    pub fn extend(&mut self, other: Edb) {
        for (p, arity) in other.schema {
            self.declare(&p, arity);
        }
        for (p, rel) in other.relations {
            self.relations.entry(p).or_default().extend(rel);
        }
    }

    pub fn schema(&self) -> &BTreeMap<String, usize> {
        &self.schema
    }

    pub fn relation(&self, predicate: &str) -> Option<&Relation> {
        self.relations.get(predicate)
    }

    pub fn len(&self) -> usize {
        self.relations.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Result of evaluation: base relations plus every derived relation.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    relations: BTreeMap<String, Relation>,
    derived: BTreeSet<String>,
    fuel_used: u64,
}

impl Model {
    pub fn facts(&self, predicate: &str) -> impl Iterator<Item = &Tuple> {
        self.relations.get(predicate).into_iter().flatten()
    }

    pub fn contains(&self, predicate: &str, tuple: &[Value]) -> bool {
        self.relations
            .get(predicate)
            .is_some_and(|r| r.contains(tuple))
    }

    /// Relations of rule-head predicates only.
    pub fn derived(&self) -> BTreeMap<&str, &Relation> {
        self.derived
            .iter()
            .map(|p| (p.as_str(), &self.relations[p]))
            .collect()
    }

    pub fn derived_count(&self) -> usize {
        self.derived().values().map(|r| r.len()).sum()
    }

    pub fn fuel_used(&self) -> u64 {
        self.fuel_used
    }

    /// Checks a ground literal against the model.
    pub fn holds(&self, literal: &Literal) -> Result<bool, RuleError> {
        let atom = literal.atom();
        let values: Option<Vec<Value>> = atom
            .args
            .iter()
            .map(|t| match t {
                Term::Const(v) => Some(v.clone()),
                Term::Var(_) => None,
            })
            .collect();
        let values = values.ok_or_else(|| RuleError::UnsafeVariable {
            rule: literal.to_string(),
            variable: atom.vars().next().unwrap_or_default().to_string(),
        })?;
        match literal {
            Literal::Positive(_) => Ok(self.contains(&atom.predicate, &values)),
            Literal::Negative(_) => Ok(!self.contains(&atom.predicate, &values)),
            Literal::Builtin {
                builtin, negated, ..
            } => {
                let refs: Vec<Option<&Value>> = values.iter().map(Some).collect();
                match builtins::apply(*builtin, &refs, &mut RegexCache::default())? {
                    Outcome::Holds(h) => Ok(h != *negated),
                    Outcome::Bind(_) => unreachable!("all arguments are ground"),
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Slot {
    Var(usize),
    Const(Value),
}

#[derive(Debug, Clone)]
enum Step {
    Scan {
        predicate: String,
        args: Vec<Slot>,
    },
    Absent {
        predicate: String,
        args: Vec<Slot>,
    },
    Builtin {
        builtin: Builtin,
        args: Vec<Slot>,
        negated: bool,
    },
}

/// A rule with variables numbered and body literals ordered so every filter
/// runs once its inputs are bound.
#[derive(Debug, Clone)]
pub(crate) struct CompiledRule {
    pub(crate) rule_index: usize,
    nvars: usize,
    head: Vec<Slot>,
    steps: Vec<Step>,
}

impl CompiledRule {
    pub(crate) fn compile(rule_index: usize, rule: &Rule) -> Result<Self, RuleError> {
        fn slot<'r>(t: &'r Term, names: &mut Vec<&'r str>) -> Slot {
            match t {
                Term::Const(c) => Slot::Const(c.clone()),
                Term::Var(v) => {
                    let i = names.iter().position(|n| *n == v).unwrap_or_else(|| {
                        names.push(v);
                        names.len() - 1
                    });
                    Slot::Var(i)
                }
            }
        }
        let mut names: Vec<&str> = Vec::new();
        // Intern variables in a stable order before planning.
        let head: Vec<Slot> = rule.head.args.iter().map(|t| slot(t, &mut names)).collect();
        let body_slots: Vec<Vec<Slot>> = rule
            .body
            .iter()
            .map(|l| l.atom().args.iter().map(|t| slot(t, &mut names)).collect())
            .collect();

        let mut bound = vec![false; names.len()];
        let mut steps = Vec::with_capacity(rule.body.len());
        let mut pending: Vec<usize> = Vec::new();
        let is_bound = |s: &Slot, bound: &[bool]| match s {
            Slot::Const(_) => true,
            Slot::Var(i) => bound[*i],
        };

        let schedule = |pending: &mut Vec<usize>, bound: &mut Vec<bool>, steps: &mut Vec<Step>| loop {
            let ready = pending.iter().position(|&li| {
                let args = &body_slots[li];
                match &rule.body[li] {
                    Literal::Builtin {
                        builtin, negated, ..
                    } => args.iter().enumerate().all(|(pos, s)| {
                        is_bound(s, bound) || (!negated && builtin.output_position() == Some(pos))
                    }),
                    _ => args.iter().all(|s| is_bound(s, bound)),
                }
            });
            let Some(p) = ready else { break };
            let li = pending.remove(p);
            let args = body_slots[li].clone();
            match &rule.body[li] {
                Literal::Builtin {
                    builtin, negated, ..
                } => {
                    for s in &args {
                        if let Slot::Var(i) = s {
                            bound[*i] = true;
                        }
                    }
                    steps.push(Step::Builtin {
                        builtin: *builtin,
                        args,
                        negated: *negated,
                    });
                }
                lit => steps.push(Step::Absent {
                    predicate: lit.atom().predicate.clone(),
                    args,
                }),
            }
        };

        for (li, lit) in rule.body.iter().enumerate() {
            if !matches!(lit, Literal::Positive(_)) {
                pending.push(li);
            }
        }
        schedule(&mut pending, &mut bound, &mut steps);
        for (li, lit) in rule.body.iter().enumerate() {
            if let Literal::Positive(atom) = lit {
                for s in &body_slots[li] {
                    if let Slot::Var(i) = s {
                        bound[*i] = true;
                    }
                }
                steps.push(Step::Scan {
                    predicate: atom.predicate.clone(),
                    args: body_slots[li].clone(),
                });
                schedule(&mut pending, &mut bound, &mut steps);
            }
        }

        let unsafe_var = pending
            .iter()
            .flat_map(|&li| body_slots[li].iter())
            .chain(head.iter())
            .find_map(|s| match s {
                Slot::Var(i) if !bound[*i] => Some(names[*i]),
                _ => None,
            });
        if let Some(variable) = unsafe_var {
            return Err(RuleError::UnsafeVariable {
                rule: rule.to_string(),
                variable: variable.to_string(),
            });
        }

        Ok(CompiledRule {
            rule_index,
            nvars: names.len(),
            head,
            steps,
        })
    }
}

struct Ctx<'a> {
    relations: &'a BTreeMap<String, Relation>,
    delta: Option<(usize, &'a Relation)>,
    fuel_used: u64,
    fuel_limit: u64,
    regexes: RegexCache,
}

fn resolve<'v>(slot: &'v Slot, bindings: &'v [Option<Value>]) -> Option<&'v Value> {
    match slot {
        Slot::Const(c) => Some(c),
        Slot::Var(i) => bindings[*i].as_ref(),
    }
}

/// Depth-first join over `steps[i..]`. `emit` returns `false` to stop early;
/// the return value reports whether evaluation should continue.
fn solve(
    steps: &[Step],
    i: usize,
    bindings: &mut Vec<Option<Value>>,
    ctx: &mut Ctx<'_>,
    emit: &mut dyn FnMut(&[Option<Value>]) -> bool,
) -> Result<bool, RuleError> {
    let Some(step) = steps.get(i) else {
        return Ok(emit(bindings));
    };
    match step {
        Step::Scan { predicate, args } => {
            static EMPTY: Relation = BTreeSet::new();
            let rel = match ctx.delta {
                Some((at, delta)) if at == i => delta,
                _ => ctx.relations.get(predicate).unwrap_or(&EMPTY),
            };
            let first = args.first().and_then(|s| resolve(s, bindings)).cloned();
            let candidates: Box<dyn Iterator<Item = &Tuple>> = match first {
                Some(v) => Box::new(
                    rel.range(vec![v.clone()]..)
                        .take_while(move |t| t[0] == v),
                ),
                None => Box::new(rel.iter()),
            };
            let mut newly: Vec<usize> = Vec::with_capacity(args.len());
            for tuple in candidates {
                ctx.fuel_used += 1;
                if ctx.fuel_used > ctx.fuel_limit {
                    return Err(RuleError::FuelExhausted {
                        limit: ctx.fuel_limit,
                    });
                }
                newly.clear();
                let mut ok = true;
                for (slot, value) in args.iter().zip(tuple) {
                    match slot {
                        Slot::Const(c) => ok = c == value,
                        Slot::Var(v) => match &bindings[*v] {
                            Some(b) => ok = b == value,
                            None => {
                                bindings[*v] = Some(value.clone());
                                newly.push(*v);
                            }
                        },
                    }
                    if !ok {
                        break;
                    }
                }
                let keep_going = if ok {
                    solve(steps, i + 1, bindings, ctx, emit)?
                } else {
                    true
                };
                for v in &newly {
                    bindings[*v] = None;
                }
                if !keep_going {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Step::Absent { predicate, args } => {
            let tuple: Tuple = args
                .iter()
                .map(|s| resolve(s, bindings).cloned().expect("ground by plan"))
                .collect();
            if ctx
                .relations
                .get(predicate)
                .is_some_and(|r| r.contains(&tuple))
            {
                Ok(true)
            } else {
                solve(steps, i + 1, bindings, ctx, emit)
            }
        }
        Step::Builtin {
            builtin,
            args,
            negated,
        } => {
            let values: Vec<Option<Value>> = args.iter().map(|s| resolve(s, bindings).cloned()).collect();
            let refs: Vec<Option<&Value>> = values.iter().map(Option::as_ref).collect();
            match builtins::apply(*builtin, &refs, &mut ctx.regexes)? {
                Outcome::Holds(h) if h != *negated => solve(steps, i + 1, bindings, ctx, emit),
                Outcome::Holds(_) => Ok(true),
                Outcome::Bind(value) => {
                    let pos = builtin.output_position().expect("only binders bind");
                    let Slot::Var(v) = args[pos] else {
                        unreachable!("constant output is ground")
                    };
                    bindings[v] = Some(value);
                    let r = solve(steps, i + 1, bindings, ctx, emit);
                    bindings[v] = None;
                    r
                }
            }
        }
    }
}

fn instantiate(head: &[Slot], bindings: &[Option<Value>]) -> Tuple {
    head.iter()
        .map(|s| resolve(s, bindings).cloned().expect("head is range-restricted"))
        .collect()
}

/// Evaluates with default options.
pub fn evaluate_edb(rules: &RuleSet, edb: &Edb) -> Result<Model, RuleError> {
    evaluate_with(rules, edb, EvalOptions::default())
}

pub fn evaluate_with(rules: &RuleSet, edb: &Edb, options: EvalOptions) -> Result<Model, RuleError> {
    let heads = rules.head_predicates();
    for (predicate, &arity) in rules.arities() {
        match edb.schema().get(predicate) {
            Some(&declared) if declared != arity => {
                return Err(RuleError::Arity {
                    predicate: predicate.clone(),
                    expected: declared,
                    found: arity,
                })
            }
            None if !heads.contains(predicate.as_str()) => {
                return Err(RuleError::UnknownPredicate(predicate.clone()))
            }
            _ => {}
        }
    }

    let mut relations = edb.relations.clone();
    for h in &heads {
        relations.entry(h.to_string()).or_default();
    }
    let mut fuel_used = 0;
    let mut regexes = RegexCache::default();

    for stratum in rules.strata() {
        let compiled: Vec<&CompiledRule> = stratum.iter().map(|&ri| &rules.compiled[ri]).collect();
        let local: BTreeSet<&str> = stratum
            .iter()
            .map(|&ri| rules.rules[ri].head.predicate.as_str())
            .collect();

        let mut delta: BTreeMap<String, Relation> = BTreeMap::new();
        {
            let mut ctx = Ctx {
                relations: &relations,
                delta: None,
                fuel_used,
                fuel_limit: options.fuel,
                regexes,
            };
            for c in &compiled {
                let head_pred = &rules.rules[c.rule_index].head.predicate;
                let mut out = Vec::new();
                let mut bindings = vec![None; c.nvars];
                solve(&c.steps, 0, &mut bindings, &mut ctx, &mut |b| {
                    out.push(instantiate(&c.head, b));
                    true
                })?;
                let existing = &relations[head_pred];
                let entry = delta.entry(head_pred.clone()).or_default();
                entry.extend(out.into_iter().filter(|t| !existing.contains(t)));
            }
            fuel_used = ctx.fuel_used;
            regexes = ctx.regexes;
        }
        merge(&mut relations, &delta);

        while delta.values().any(|d| !d.is_empty()) {
            let mut next: BTreeMap<String, Relation> = BTreeMap::new();
            {
                let mut ctx = Ctx {
                    relations: &relations,
                    delta: None,
                    fuel_used,
                    fuel_limit: options.fuel,
                    regexes,
                };
                for c in &compiled {
                    let head_pred = &rules.rules[c.rule_index].head.predicate;
                    for (si, step) in c.steps.iter().enumerate() {
                        let Step::Scan { predicate, .. } = step else { continue };
                        if !local.contains(predicate.as_str()) {
                            continue;
                        }
                        let Some(d) = delta.get(predicate).filter(|d| !d.is_empty()) else {
                            continue;
                        };
                        ctx.delta = Some((si, d));
                        let mut out = Vec::new();
                        let mut bindings = vec![None; c.nvars];
                        solve(&c.steps, 0, &mut bindings, &mut ctx, &mut |b| {
                            out.push(instantiate(&c.head, b));
                            true
                        })?;
                        let existing = &relations[head_pred];
                        let entry = next.entry(head_pred.clone()).or_default();
                        entry.extend(out.into_iter().filter(|t| !existing.contains(t)));
                    }
                }
                ctx.delta = None;
                fuel_used = ctx.fuel_used;
                regexes = ctx.regexes;
            }
            merge(&mut relations, &next);
            delta = next;
        }
    }

    Ok(Model {
        relations,
        derived: heads.into_iter().map(str::to_string).collect(),
        fuel_used,
    })
}

fn merge(relations: &mut BTreeMap<String, Relation>, new: &BTreeMap<String, Relation>) {
    for (p, rel) in new {
        relations
            .entry(p.clone())
            .or_default()
            .extend(rel.iter().cloned());
    }
}

/// Finds a grounding of `rule`'s body in `model` that derives `fact`.
pub(crate) fn explain(
    compiled: &CompiledRule,
    rule: &Rule,
    model: &Model,
    fact: &[Value],
) -> Option<Vec<Literal>> {
    if fact.len() != compiled.head.len() {
        return None;
    }
    let mut bindings: Vec<Option<Value>> = vec![None; compiled.nvars];
    for (slot, value) in compiled.head.iter().zip(fact) {
        match slot {
            Slot::Const(c) if c != value => return None,
            Slot::Const(_) => {}
            Slot::Var(v) => match &bindings[*v] {
                Some(b) if b != value => return None,
                Some(_) => {}
                None => bindings[*v] = Some(value.clone()),
            },
        }
    }
    let mut ctx = Ctx {
        relations: &model.relations,
        delta: None,
        fuel_used: 0,
        fuel_limit: u64::MAX,
        regexes: RegexCache::default(),
    };
    let mut found: Option<Vec<Option<Value>>> = None;
    solve(&compiled.steps, 0, &mut bindings, &mut ctx, &mut |b| {
        found = Some(b.to_vec());
        false
    })
    .ok()?;
    let found = found?;

    // Map variable names to their bound values through the head and body order
    // used when compiling.
    let mut names: Vec<&str> = Vec::new();
    for t in rule
        .head
        .args
        .iter()
        .chain(rule.body.iter().flat_map(|l| l.atom().args.iter()))
    {
        if let Term::Var(v) = t {
            if !names.contains(&v.as_str()) {
                names.push(v);
            }
        }
    }
    let ground = |t: &Term| -> Term {
        match t {
            Term::Const(c) => Term::Const(c.clone()),
            Term::Var(v) => {
                let i = names.iter().position(|n| n == v).expect("interned");
                Term::Const(found[i].clone().expect("bound in solution"))
            }
        }
    };
    Some(
        rule.body
            .iter()
            .map(|lit| {
                let mut lit = lit.clone();
                let atom = match &mut lit {
                    Literal::Positive(a) | Literal::Negative(a) => a,
                    Literal::Builtin { atom, .. } => atom,
                };
                atom.args = atom.args.iter().map(ground).collect();
                lit
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::parse_rules;

    fn edge_edb(edges: &[(&str, &str)]) -> Edb {
        let mut edb = Edb::new();
        for (a, b) in edges {
            edb.insert("edge", vec![Value::from(*a), Value::from(*b)]);
        }
        edb
    }

    #[test]
    fn transitive_closure_of_chain() {
        let rs = parse_rules("reach(X, Y) :- edge(X, Y).\nreach(X, Z) :- reach(X, Y), edge(Y, Z).").unwrap();
        let model = evaluate_edb(&rs, &edge_edb(&[("a", "b"), ("b", "c")])).unwrap();
        let pairs: Vec<_> = model.facts("reach").cloned().collect();
        assert_eq!(pairs.len(), 3);
        assert!(model.contains("reach", &["a".into(), "c".into()]));
    }

    #[test]
    fn empty_rule_set_derives_nothing() {
        let rs = RuleSet::new(vec![]).unwrap();
        let model = evaluate_edb(&rs, &edge_edb(&[("a", "b")])).unwrap();
        assert_eq!(model.derived_count(), 0);
    }

    #[test]
    fn unknown_predicate_rejected() {
        let rs = parse_rules("a(X) :- nothing(X).").unwrap();
        assert_eq!(
            evaluate_edb(&rs, &Edb::new()).unwrap_err(),
            RuleError::UnknownPredicate("nothing".into())
        );
    }

    #[test]
    fn negation_and_builtins() {
        let rs = parse_rules(
            "big(X) :- num(X), gt(X, 2).\nsmall(X) :- num(X), not big(X).\nspan(X, D) :- when(X, A, B), days_between(A, B, D), not lt(D, 100).",
        )
        .unwrap();
        let mut edb = Edb::new();
        for n in 1..=4 {
            edb.insert("num", vec![Value::Int(n)]);
        }
        let d = |s: &str| Value::Date(chrono::NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap());
        edb.insert("when", vec!["x".into(), d("2021-01-01"), d("2021-07-05")]);
        edb.insert("when", vec!["y".into(), d("2021-01-01"), d("2021-01-05")]);
        let model = evaluate_edb(&rs, &edb).unwrap();
        let small: Vec<_> = model.facts("small").cloned().collect();
        assert_eq!(small, vec![vec![Value::Int(1)], vec![Value::Int(2)]]);
        let spans: Vec<_> = model.facts("span").cloned().collect();
        assert_eq!(spans, vec![vec!["x".into(), Value::Int(185)]]);
    }

    #[test]
    fn fuel_limit_trips() {
        let rs = parse_rules("reach(X, Y) :- edge(X, Y).\nreach(X, Z) :- reach(X, Y), edge(Y, Z).").unwrap();
        let edb = edge_edb(&[("a", "b"), ("b", "c"), ("c", "d")]);
        let err = evaluate_with(&rs, &edb, EvalOptions { fuel: 3 }).unwrap_err();
        assert_eq!(err, RuleError::FuelExhausted { limit: 3 });
    }

    #[test]
    fn explain_returns_grounded_body() {
        let rs = parse_rules("flag(X) :- num(X), not skip(X), gt(X, 1).\nskip(X) :- num(X), eq(X, 3).").unwrap();
        let mut edb = Edb::new();
        for n in 1..=3 {
            edb.insert("num", vec![Value::Int(n)]);
        }
        let model = evaluate_edb(&rs, &edb).unwrap();
        let trace = rs.explain(&model, "flag", &[Value::Int(2)]).unwrap();
        let text: Vec<String> = trace.iter().map(ToString::to_string).collect();
        assert_eq!(text, vec!["num(2)", "not skip(2)", "gt(2, 1)"]);
        for lit in &trace {
            assert!(model.holds(lit).unwrap());
        }
        assert!(rs.explain(&model, "flag", &[Value::Int(3)]).is_none());
    }

    #[test]
    fn repeated_variables_unify() {
        let rs = parse_rules("loop(X) :- edge(X, X).").unwrap();
        let model = evaluate_edb(&rs, &edge_edb(&[("a", "a"), ("a", "b")])).unwrap();
        assert_eq!(model.facts("loop").count(), 1);
    }
}
