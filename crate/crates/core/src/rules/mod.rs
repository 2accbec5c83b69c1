//! Horn-rule evaluation over repository facts.
//!
//! Rules are written in a small datalog dialect (see [`parser`]), checked for
//! range restriction and stratified negation, and evaluated bottom-up with
//! semi-naive iteration. Negation is negation-as-failure over the snapshot:
//! a fact that cannot be derived is false.

pub mod ast;
pub mod base;
mod builtins;
mod eval;
pub mod parser;
mod stratify;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub use ast::{Atom, Builtin, Literal, Rule, Term, Value};
pub use eval::{evaluate_edb, evaluate_with, EvalOptions, Edb, Model, Relation, Tuple, DEFAULT_FUEL};
pub use parser::parse_literal;

use crate::fact_model::FactStore;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsafe variable `{variable}` in rule `{rule}`: it must appear in a positive body atom")]
    UnsafeVariable { rule: String, variable: String },
    #[error("negation cycle through predicates {}", cycle.join(" -> "))]
    Stratification { cycle: Vec<String> },
    #[error("predicate `{predicate}` used with arity {found}, expected {expected}")]
    Arity {
        predicate: String,
        expected: usize,
        found: usize,
    },
    #[error("duplicate rule `{0}`")]
    DuplicateRule(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("type error in `{builtin}`: {message}")]
    BuiltinType {
        builtin: &'static str,
        message: String,
    },
    #[error("evaluation fuel exhausted after {limit} steps")]
    FuelExhausted { limit: u64 },
}

/// A validated, stratified set of rules.
#[derive(Debug, Clone)]
pub struct RuleSet {
    rules: Vec<Rule>,
    compiled: Vec<eval::CompiledRule>,
    strata: Vec<Vec<usize>>,
    arities: BTreeMap<String, usize>,
}

impl RuleSet {
    pub fn new(rules: Vec<Rule>) -> Result<Self, RuleError> {
        let mut seen = BTreeSet::new();
        for rule in &rules {
            if !seen.insert(rule.to_string()) {
                return Err(RuleError::DuplicateRule(rule.to_string()));
            }
        }
        let mut arities = BTreeMap::new();
        for rule in &rules {
            let atoms = std::iter::once(&rule.head).chain(rule.body.iter().map(Literal::atom));
            for atom in atoms {
                let expected = Builtin::lookup(&atom.predicate)
                    .map(Builtin::arity)
                    .unwrap_or_else(|| *arities.entry(atom.predicate.clone()).or_insert(atom.arity()));
                if expected != atom.arity() {
                    return Err(RuleError::Arity {
                        predicate: atom.predicate.clone(),
                        expected,
                        found: atom.arity(),
                    });
                }
            }
        }
        let compiled = rules
            .iter()
            .enumerate()
            .map(|(i, r)| eval::CompiledRule::compile(i, r))
            .collect::<Result<Vec<_>, _>>()?;
        let strata = stratify::stratify(&rules)?;
        Ok(RuleSet {
            rules,
            compiled,
            strata,
            arities,
        })
    }

    pub fn parse(text: &str) -> Result<Self, RuleError> {
        RuleSet::new(parser::parse_rule_list(text)?)
    }

    /// Returns a new set containing the rules of both.
    pub fn extend(&self, other: &RuleSet) -> Result<Self, RuleError> {
        RuleSet::new(self.rules.iter().chain(other.rules.iter()).cloned().collect())
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Rule indices grouped into evaluation strata, lowest first.
    pub fn strata(&self) -> &[Vec<usize>] {
        &self.strata
    }

    pub fn head_predicates(&self) -> BTreeSet<&str> {
        self.rules.iter().map(|r| r.head.predicate.as_str()).collect()
    }

    /// Every non-builtin predicate mentioned anywhere, with its arity.
    pub fn arities(&self) -> &BTreeMap<String, usize> {
        &self.arities
    }

    /// Whether some rule mentions `predicate` (head or body, builtins included).
    pub fn mentions(&self, predicate: &str) -> bool {
        self.arities.contains_key(predicate) || Builtin::lookup(predicate).is_some()
    }

    /// Grounded body literals of the first rule that derives `fact` in `model`.
    pub fn explain(&self, model: &Model, predicate: &str, fact: &[Value]) -> Option<Vec<Literal>> {
        self.compiled
            .iter()
            .filter(|c| self.rules[c.rule_index].head.predicate == predicate)
            .find_map(|c| eval::explain(c, &self.rules[c.rule_index], model, fact))
    }
}

/// Evaluates `rules` over the base facts exported by `store`.
pub fn evaluate(rules: &RuleSet, store: &FactStore) -> Result<Model, RuleError> {
    evaluate_edb(rules, &base::from_store(store))
}

/// Parses rule text into a validated [`RuleSet`].
pub fn parse_rules(text: &str) -> Result<RuleSet, RuleError> {
    RuleSet::parse(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_rule() {
        assert_eq!(parse_rules("a(X) :- b(X).").unwrap().rules().len(), 1);
    }

    #[test]
    fn unsafe_negated_variable() {
        let err = parse_rules("a(X) :- not b(X).").unwrap_err();
        assert!(matches!(err, RuleError::UnsafeVariable { ref variable, .. } if variable == "X"), "{err}");
    }

    #[test]
    fn unsafe_head_and_builtin_variables() {
        assert!(matches!(parse_rules("a(X, Y) :- b(X)."), Err(RuleError::UnsafeVariable { .. })));
        assert!(matches!(parse_rules("a(X) :- b(X), gt(Y, 0)."), Err(RuleError::UnsafeVariable { .. })));
        // days_between binds its third argument
        assert!(parse_rules("a(X, D) :- b(X, S, E), days_between(S, E, D), gt(D, 3).").is_ok());
        assert!(matches!(
            parse_rules("a(X) :- b(X, S), days_between(S, E, D)."),
            Err(RuleError::UnsafeVariable { .. })
        ));
    }

    #[test]
    fn negation_cycle_rejected() {
        let err = parse_rules("a(X) :- b(X), not a(X).").unwrap_err();
        assert_eq!(err, RuleError::Stratification { cycle: vec!["a".into()] });
        let err = parse_rules("p(X) :- e(X), not q(X).\nq(X) :- e(X), p(X).").unwrap_err();
        assert!(matches!(err, RuleError::Stratification { ref cycle } if cycle == &["p", "q"]), "{err}");
    }

    #[test]
    fn duplicates_and_arity() {
        assert!(matches!(parse_rules("a(X) :- b(X).\na(X) :- b(X)."), Err(RuleError::DuplicateRule(_))));
        assert!(matches!(parse_rules("a(X) :- b(X).\nc(X) :- b(X, X)."), Err(RuleError::Arity { .. })));
        assert!(matches!(parse_rules("a(X) :- b(X), gt(X)."), Err(RuleError::Arity { .. })));
    }

    #[test]
    fn strata_order_dependencies_first() {
        let rs = parse_rules("top(X) :- e(X), not mid(X).\nmid(X) :- e(X), not low(X).\nlow(X) :- e(X).").unwrap();
        let order: Vec<&str> = rs
            .strata()
            .iter()
            .map(|s| rs.rules()[s[0]].head.predicate.as_str())
            .collect();
        assert_eq!(order, vec!["low", "mid", "top"]);
    }
}
