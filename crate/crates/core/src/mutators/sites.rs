use std::collections::BTreeSet;
use std::ops::Range;

use super::catalog::OperatorSpec;
use super::pool::{import_segment, is_identifier, IdentKind};
use super::FileContext;
use crate::language::Language;
use crate::syntax::{GrammarRegistry, Node, Span, SyntaxError};

/// A place where an operator can apply its rewrite.
#[derive(Debug, Clone)]
pub struct MutationSite<'t> {
    pub operator: u8,
    pub target: &'t Node,
    /// Secondary node: the condition holding a logical token (18).
    pub aux: Option<&'t Node>,
    /// Bytes the rewrite replaces; always within one row.
    pub region: Range<usize>,
    pub span: Span,
}

impl MutationSite<'_> {
    /// 1-based line of the edit.
    pub fn line(&self) -> usize {
        self.span.start_row + 1
    }
}

const STRING_IMPORTS: &[&str] =
    &["interpreted_string_literal_content", "system_lib_string", "string_content"];

const LOGICAL_TOKENS: &[&str] = &["&&", "||", "and", "or"];
const ARITHMETIC_SWAPS: &[&str] = &["+", "-", "*", "/", "+=", "-=", "*=", "/="];

/// All legal sites for `op` in document order. An inapplicable operator yields none.
pub fn enumerate_sites<'t>(
    ctx: &FileContext<'t>,
    op: &OperatorSpec,
    registry: &GrammarRegistry,
) -> Result<Vec<MutationSite<'t>>, SyntaxError> {
    let Some(query) = op.site_query(ctx.language) else {
        return Ok(Vec::new());
    };
    let matches = registry.run_query(ctx.tree, ctx.source, query)?;
    let mut seen = BTreeSet::new();
    let mut sites = Vec::new();
    for m in matches {
        let Some(target) = m.get("target") else { continue };
        if target.is_missing || target.is_error {
            continue;
        }
        for (region, aux) in regions(ctx, op.index, target) {
            if !ctx.editable(&region) || !seen.insert((region.start, region.end)) {
                continue;
            }
            sites.push(MutationSite {
                operator: op.index,
                target,
                aux,
                span: ctx.span_of(&region),
                region,
            });
        }
    }
    sites.sort_by_key(|s| (s.region.start, s.region.end));
    Ok(sites)
}

type Region<'t> = (Range<usize>, Option<&'t Node>);

fn regions<'t>(ctx: &FileContext<'t>, op: u8, target: &'t Node) -> Vec<Region<'t>> {
    let src = ctx.source;
    let text = target.text(src);
    let whole = target.byte_range.clone();
    let one = |ok: bool| if ok { vec![(whole.clone(), None)] } else { Vec::new() };
    match op {
        1 => one(text == "=="),
        2 => one(text == "="),
        3..=6 => one(!text.is_empty()),
        7 => one(text == "," && between_named(ctx, target)),
        8 => one(text == ";" && ends_statement(ctx, target)),
        9 => comment_delimiter(text)
            .map(|d| vec![(whole.start..whole.start + d.len(), None)])
            .unwrap_or_default(),
        10 => one(target.named && !target.kind.contains("comment")),
        11 => {
            if STRING_IMPORTS.contains(&target.kind) {
                import_segment(text)
                    .map(|r| vec![(whole.start + r.start..whole.start + r.end, None)])
                    .unwrap_or_default()
            } else {
                one(is_identifier(text))
            }
        }
        12 => one(is_identifier(text) && class_like(ctx, text)),
        13 => one(is_identifier(text)),
        14 => one(argument_class(text).is_some()),
        15 | 17 => one(
            target.child_by_field("left").is_some() && target.child_by_field("right").is_some(),
        ),
        16 => one(ARITHMETIC_SWAPS.contains(&text)),
        18 => target
            .descendants()
            .filter(|n| !n.named && LOGICAL_TOKENS.contains(&n.kind) && n.text(src) == n.kind)
            .map(|n| (n.byte_range.clone(), Some(target)))
            .collect(),
        19 => condition_region(target, src).map(|r| vec![(r, None)]).unwrap_or_default(),
        _ => Vec::new(),
    }
}

fn between_named(ctx: &FileContext<'_>, comma: &Node) -> bool {
    let Some(parent) = ctx.tree.root().parent_of(comma) else {
        return false;
    };
    let Some(i) = parent.children.iter().position(|c| std::ptr::eq(c, comma)) else {
        return false;
    };
    let is_item = |n: Option<&Node>| n.is_some_and(|n| n.named && !n.kind.contains("comment"));
    i > 0 && is_item(parent.children.get(i - 1)) && is_item(parent.children.get(i + 1))
}

/// Only whitespace or a comment may follow the semicolon on its row.
fn ends_statement(ctx: &FileContext<'_>, semi: &Node) -> bool {
    let row = ctx.index.row_range(semi.span.start_row).expect("node row exists");
    let rest = ctx.source[semi.byte_range.end..row.end].trim();
    rest.is_empty() || rest.starts_with("//") || rest.starts_with("/*") || rest.starts_with('#')
}

/// Leading delimiter of a comment with a non-blank body.
pub(crate) fn comment_delimiter(text: &str) -> Option<&'static str> {
    let (delim, body) = if let Some(rest) = text.strip_prefix("//") {
        ("//", rest)
    } else if let Some(rest) = text.strip_prefix("/*") {
        ("/*", rest.strip_suffix("*/").unwrap_or(rest))
    } else if text.starts_with("#!") {
        return None;
    } else {
        ("#", text.strip_prefix('#')?)
    };
    (!body.trim().is_empty()).then_some(delim)
}

fn class_like(ctx: &FileContext<'_>, name: &str) -> bool {
    if !matches!(ctx.language, Language::Python | Language::Rust) {
        return true;
    }
    let pascal = name.chars().next().is_some_and(|c| c.is_uppercase())
        && name.chars().any(|c| c.is_lowercase());
    pascal || ctx.pool.has_kind(name, IdentKind::Class)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ArgClass {
    Number,
    /// Quote character and body length in chars.
    Str(char),
    Identifier,
}

pub(crate) fn argument_class(text: &str) -> Option<ArgClass> {
    if is_number(text) {
        return Some(ArgClass::Number);
    }
    if let Some(q) = text.chars().next().filter(|c| matches!(c, '"' | '\'')) {
        let body = text.strip_prefix(q)?.strip_suffix(q)?;
        let plain = !body.is_empty() && !body.contains(['\\', q, '$', '{', '}', '%', '#']);
        return plain.then_some(ArgClass::Str(q));
    }
    is_identifier(text).then_some(ArgClass::Identifier)
}

/// `[0-9]+(\.[0-9]+)?`
pub(crate) fn is_number(text: &str) -> bool {
    let mut parts = text.splitn(2, '.');
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    parts.next().is_some_and(digits) && parts.next().is_none_or(digits)
}

/// The condition text to replace, inside any enclosing parentheses.
fn condition_region(cond: &Node, src: &str) -> Option<Range<usize>> {
    if matches!(cond.kind, "let_condition" | "let_chain") {
        return None;
    }
    let mut range = cond.byte_range.clone();
    let text = &src[range.clone()];
    if cond.kind == "parenthesized_expression" && text.starts_with('(') && text.ends_with(')') {
        range = range.start + 1..range.end - 1;
    }
    let inner = &src[range.clone()];
    let lead = inner.len() - inner.trim_start().len();
    let trail = inner.len() - inner.trim_end().len();
    let range = range.start + lead..range.end - trail;
    let inner = &src[range.clone()];
    let literal = matches!(inner, "true" | "false" | "True" | "False" | "1" | "0" | "nil" | "None");
    (!literal && !inner.is_empty()).then_some(range)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mutators::Catalog;

    fn sites_for(src: &str, lang: Language, op: u8) -> Vec<(usize, String)> {
        let registry = GrammarRegistry::shared();
        let tree = registry.parse(src, lang).unwrap();
        let ctx = FileContext::new(&tree, src);
        let op = Catalog::builtin().get(op).unwrap();
        enumerate_sites(&ctx, op, registry)
            .unwrap()
            .iter()
            .map(|s| (s.line(), src[s.region.clone()].to_string()))
            .collect()
    }

    #[test]
    fn types_function_calls() {
        let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/types.py"))
            .unwrap();
        let registry = GrammarRegistry::shared();
        let tree = registry.parse(&src, Language::Python).unwrap();
        let ctx = FileContext::new(&tree, &src);
        let sites = enumerate_sites(&ctx, Catalog::builtin().get(13).unwrap(), registry).unwrap();
        let lines: Vec<usize> = sites.iter().map(|s| s.line()).collect();
        assert_eq!(lines, [3, 7, 16, 20, 24]);
        assert_eq!(sites[0].span, Span::new(2, 10, 2, 17));
        assert!(sites.iter().all(|s| &src[s.region.clone()] == "NewType"));
    }

    #[test]
    fn inapplicable_operator_has_no_sites() {
        assert!(sites_for("x = 1\n", Language::Python, 8).is_empty());
        assert!(sites_for("x = f(y)\n", Language::Python, 15).is_empty());
    }

    #[test]
    fn trailing_commas_are_not_sites() {
        let got = sites_for("xs = [1, 2, 3,]\n", Language::Python, 7);
        assert_eq!(got.len(), 2);
    }

    #[test]
    fn semicolons_must_end_the_line() {
        let src = "int main() {\n  for (int i = 0; i < 3; i++) { f(i); }\n  return 0; // done\n}\n";
        let got = sites_for(src, Language::C, 8);
        assert_eq!(got, vec![(3, ";".to_string())]);
    }

    #[test]
    fn logical_tokens_inside_conditions() {
        let src = "if a and (b or c):\n    pass\n";
        let got = sites_for(src, Language::Python, 18);
        assert_eq!(got, vec![(1, "and".into()), (1, "or".into())]);
        let src = "function f(a, b) { if (a && b) { return 1; } }\n";
        assert_eq!(sites_for(src, Language::JavaScript, 18), vec![(1, "&&".into())]);
    }

    #[test]
    fn constant_condition_regions() {
        let src = "int f(int a, int b) {\n  if (a > b) return 1;\n  if (1) return 2;\n  return 0;\n}\n";
        assert_eq!(sites_for(src, Language::C, 19), vec![(2, "a > b".into())]);
        let src = "def f(a):\n    if a > 0:\n        return 1\n";
        assert_eq!(sites_for(src, Language::Python, 19), vec![(2, "a > 0".into())]);
    }

    #[test]
    fn import_paths_use_last_segment() {
        let src = "package main\n\nimport (\n\t\"fmt\"\n\t\"net/http\"\n)\n";
        let got = sites_for(src, Language::Go, 11);
        assert_eq!(got, vec![(4, "fmt".into()), (5, "http".into())]);
        let got = sites_for("#include <stdio.h>\n#include \"util/list.h\"\n", Language::C, 11);
        assert_eq!(got, vec![(1, "stdio".into()), (2, "list".into())]);
    }

    #[test]
    fn python_class_calls_need_class_names() {
        let src = "class Box:\n    pass\n\nb = Box()\nn = len(b)\nc = Counter()\n";
        let got = sites_for(src, Language::Python, 12);
        assert_eq!(got, vec![(4, "Box".into()), (6, "Counter".into())]);
    }

    #[test]
    fn comment_delimiters() {
        assert_eq!(comment_delimiter("# note"), Some("#"));
        assert_eq!(comment_delimiter("// x"), Some("//"));
        assert_eq!(comment_delimiter("/* x */"), Some("/*"));
        assert_eq!(comment_delimiter("#!/usr/bin/env python"), None);
        assert_eq!(comment_delimiter("#   "), None);
        assert_eq!(comment_delimiter("/**/"), None);
    }

    #[test]
    fn argument_classes() {
        assert_eq!(argument_class("42"), Some(ArgClass::Number));
        assert_eq!(argument_class("3.14"), Some(ArgClass::Number));
        assert_eq!(argument_class("\"abc\""), Some(ArgClass::Str('"')));
        assert_eq!(argument_class("'a'"), Some(ArgClass::Str('\'')));
        assert_eq!(argument_class("\"\""), None);
        assert_eq!(argument_class("\"a\\n\""), None);
        assert_eq!(argument_class("f\"{x}\""), None);
        assert_eq!(argument_class("count"), Some(ArgClass::Identifier));
        assert_eq!(argument_class("0x1F"), None);
        assert_eq!(argument_class("1."), None);
    }

    #[test]
    fn binary_operands_required() {
        let got = sites_for("x = a + b * c\n", Language::Python, 17);
        assert_eq!(got, vec![(1, "a + b * c".into()), (1, "b * c".into())]);
    }
}
