use std::collections::HashMap;

use regex::Regex;

use super::ast::{Builtin, Value};
use super::RuleError;

pub(crate) enum Outcome {
    Holds(bool),
    Bind(Value),
}

/// Compiled regex patterns keyed by source text.
#[derive(Default)]
pub(crate) struct RegexCache {
    compiled: HashMap<String, Regex>,
}

impl RegexCache {
    fn get(&mut self, pattern: &str) -> Result<&Regex, RuleError> {
        if !self.compiled.contains_key(pattern) {
            let re = Regex::new(pattern).map_err(|e| RuleError::BuiltinType {
                builtin: Builtin::RegexMatch.name(),
                message: format!("invalid pattern `{pattern}`: {e}"),
            })?;
            self.compiled.insert(pattern.to_string(), re);
        }
        Ok(&self.compiled[pattern])
    }
}

fn type_error(builtin: Builtin, expected: &str, got: &Value) -> RuleError {
    RuleError::BuiltinType {
        builtin: builtin.name(),
        message: format!("expected {expected}, got {} {got}", got.type_name()),
    }
}

fn as_str(builtin: Builtin, v: &Value) -> Result<&str, RuleError> {
    match v {
        Value::Str(s) => Ok(s),
        other => Err(type_error(builtin, "string", other)),
    }
}

fn as_date(builtin: Builtin, v: &Value) -> Result<chrono::NaiveDate, RuleError> {
    match v {
        Value::Date(d) => Ok(*d),
        other => Err(type_error(builtin, "date", other)),
    }
}

fn compare(builtin: Builtin, a: &Value, b: &Value) -> Result<std::cmp::Ordering, RuleError> {
    if std::mem::discriminant(a) != std::mem::discriminant(b) {
        return Err(type_error(builtin, a.type_name(), b));
    }
    Ok(a.cmp(b))
}

/// Applies `builtin` to its arguments. Input positions are always ground;
/// the output position of `days_between` may be `None`.
pub(crate) fn apply(
    builtin: Builtin,
    args: &[Option<&Value>],
    regexes: &mut RegexCache,
) -> Result<Outcome, RuleError> {
    let arg = |i: usize| args[i].expect("builtin input is ground after safety check");
    let holds = |b: bool| Ok(Outcome::Holds(b));
    match builtin {
        Builtin::StringContains => {
            holds(as_str(builtin, arg(0))?.contains(as_str(builtin, arg(1))?))
        }
        Builtin::StartsWith => holds(as_str(builtin, arg(0))?.starts_with(as_str(builtin, arg(1))?)),
        Builtin::RegexMatch => {
            let text = as_str(builtin, arg(0))?;
            let pattern = as_str(builtin, arg(1))?;
            holds(regexes.get(pattern)?.is_match(text))
        }
        Builtin::DateBefore => holds(as_date(builtin, arg(0))? < as_date(builtin, arg(1))?),
        Builtin::DaysBetween => {
            let days = (as_date(builtin, arg(1))? - as_date(builtin, arg(0))?).num_days();
            match args[2] {
                Some(Value::Int(d)) => holds(*d == days),
                Some(other) => Err(type_error(builtin, "integer", other)),
                None => Ok(Outcome::Bind(Value::Int(days))),
            }
        }
        Builtin::Lt => holds(compare(builtin, arg(0), arg(1))?.is_lt()),
        Builtin::Gt => holds(compare(builtin, arg(0), arg(1))?.is_gt()),
        Builtin::Eq => holds(arg(0) == arg(1)),
    }
}
