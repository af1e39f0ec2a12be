use std::collections::BTreeSet;

use serde::Serialize;

use super::{check_invariants, BugInstance};
use crate::mutators::{is_identifier, CONDITION_LITERALS};
use crate::syntax::GrammarRegistry;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Advisory checks are reported but never fail an instance.
    pub advisory: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationOutcome {
    pub id: String,
    pub checks: Vec<CheckResult>,
}

impl ValidationOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.advisory)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Completeness, subtype match, and a parse-based stand-in for "has an adverse effect".
pub fn validate_instance(inst: &BugInstance) -> ValidationOutcome {
    let complete = check_invariants(inst);
    let completeness = CheckResult {
        name: "completeness",
        passed: complete.is_ok(),
        advisory: false,
        detail: match &complete {
            Ok(()) => "all fields present and consistent".into(),
            Err((field, message)) => format!("{field}: {message}"),
        },
    };

    let mismatched: Vec<usize> = inst
        .edits
        .iter()
        .filter(|e| {
            let candidates: Vec<u8> = if inst.subtype_index >= 20 {
                (1..=19).collect()
            } else {
                vec![inst.subtype_index]
            };
            !candidates.iter().any(|&s| edit_matches(s, &e.original_line, &e.buggy_line))
        })
        .map(|e| e.line)
        .collect();
    let subtype_match = CheckResult {
        name: "subtype_match",
        passed: !inst.edits.is_empty() && mismatched.is_empty(),
        advisory: false,
        detail: if inst.edits.is_empty() {
            "no edits".into()
        } else if mismatched.is_empty() {
            format!("every edit is producible by subtype {}", inst.subtype_index)
        } else {
            format!("lines {mismatched:?} are not producible by subtype {}", inst.subtype_index)
        },
    };

    let adverse = match GrammarRegistry::shared().parse(&inst.buggy_code, inst.language) {
        Ok(tree) if tree.root().has_error() => (true, "buggy code re-parses with an error node".into()),
        Ok(_) => (false, "buggy code parses cleanly".into()),
        Err(e) => (false, e.to_string()),
    };
    let adverse_effect = CheckResult {
        name: "adverse_effect",
        passed: adverse.0,
        advisory: true,
        detail: adverse.1,
    };

    ValidationOutcome { id: inst.id.clone(), checks: vec![completeness, subtype_match, adverse_effect] }
}

/// Every single-line subtype (1-19) whose rewrite rule can turn `original` into `buggy`.
pub fn classify_edit(original: &str, buggy: &str) -> BTreeSet<u8> {
    (1..=19).filter(|&s| edit_matches(s, original, buggy)).collect()
}

/// True if some split `original = P + R + S`, `buggy = P + I + S` has `R -> I` allowed
/// by `subtype`'s rewrite rule.
pub fn edit_matches(subtype: u8, original: &str, buggy: &str) -> bool {
    if original == buggy {
        return false;
    }
    let (a, b) = (original, buggy);
    let prefix = common_prefix(a, b);
    let suffix = common_suffix(a, b);
    let prefixes = (0..=prefix).filter(|&p| a.is_char_boundary(p));
    for p in prefixes {
        let max_s = suffix.min(a.len() - p).min(b.len() - p);
        for s in (0..=max_s).filter(|&s| a.is_char_boundary(a.len() - s)) {
            let r = &a[p..a.len() - s];
            let i = &b[p..b.len() - s];
            if rule_allows(subtype, r, i) {
                return true;
            }
        }
    }
    false
}

fn common_prefix(a: &str, b: &str) -> usize {
    a.bytes().zip(b.bytes()).take_while(|(x, y)| x == y).count()
}

fn common_suffix(a: &str, b: &str) -> usize {
    a.bytes().rev().zip(b.bytes().rev()).take_while(|(x, y)| x == y).count()
}

fn rule_allows(subtype: u8, r: &str, i: &str) -> bool {
    let deleted = |token: &str| r == token && i.is_empty();
    let swapped = |pairs: &[(&str, &str)]| pairs.iter().any(|&(x, y)| (r, i) == (x, y) || (r, i) == (y, x));
    match subtype {
        1 => r == "==" && i == "=",
        2 => r == "=" && i == "==",
        3 => deleted(")"),
        4 => deleted("]"),
        5 => deleted("}"),
        6 => deleted(":"),
        7 => deleted(","),
        8 => deleted(";"),
        9 => matches!(r, "#" | "//" | "/*") && matches!(i, "" | "#" | "//") && r != i,
        10 => !r.trim().is_empty() && is_identifier(i),
        11..=13 => is_identifier(r) && is_identifier(i),
        14 => same_shape_number(r, i) || same_shape_string(r, i) || (is_identifier(r) && is_identifier(i)),
        15 => i.len() == r.len() + 4 && i.starts_with('(') && i.ends_with(")/0") && &i[1..i.len() - 3] == r && !r.is_empty(),
        16 => swapped(&[("+", "-"), ("*", "/"), ("+=", "-="), ("*=", "/=")]),
        17 => dropped_operand(r, i),
        18 => swapped(&[("&&", "||"), ("and", "or")]),
        19 => {
            !r.trim().is_empty()
                && CONDITION_LITERALS.iter().any(|(_, t, f)| i == *t || i == *f)
        }
        _ => false,
    }
}

fn same_shape_number(r: &str, i: &str) -> bool {
    let shape = |s: &str| s.chars().map(|c| c == '.').collect::<Vec<_>>();
    crate::mutators::is_number_literal(r) && crate::mutators::is_number_literal(i) && shape(r) == shape(i)
}

fn same_shape_string(r: &str, i: &str) -> bool {
    let quoted = |s: &str| {
        let q = s.chars().next()?;
        (matches!(q, '"' | '\'') && s.len() >= 2 && s.ends_with(q)).then_some(q)
    };
    matches!((quoted(r), quoted(i)), (Some(x), Some(y)) if x == y) && r.chars().count() == i.chars().count()
}

/// `r` is `i` joined to another operand by an arithmetic operator, in either order.
fn dropped_operand(r: &str, i: &str) -> bool {
    if i.trim().is_empty() {
        return false;
    }
    let ops = ['+', '-', '*', '/', '%'];
    let left_kept = r.strip_prefix(i).map(|rest| rest.trim_start().starts_with(ops));
    let right_kept = r.strip_suffix(i).map(|rest| rest.trim_end().ends_with(ops));
    left_kept == Some(true) || right_kept == Some(true)
}
