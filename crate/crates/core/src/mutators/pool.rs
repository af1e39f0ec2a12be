//! Identifier pools: substitution candidates for reference errors.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::Serialize;

use crate::distance::levenshtein;
use crate::syntax::{Node, SyntaxTree};

/// What an identifier names, judged from where it occurs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum IdentKind {
    Function,
    Class,
    Variable,
    Module,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PoolEntry {
    pub count: usize,
    pub kinds: BTreeSet<IdentKind>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IdentifierPool {
    names: BTreeMap<String, PoolEntry>,
}

const IDENT_KINDS: &[&str] = &[
    "identifier",
    "type_identifier",
    "field_identifier",
    "property_identifier",
    "shorthand_property_identifier",
    "shorthand_property_identifier_pattern",
    "constant",
    "package_identifier",
];

const IMPORT_KINDS: &[&str] = &[
    "import_statement",
    "import_from_statement",
    "import_declaration",
    "import_spec",
    "use_declaration",
    "using_directive",
    "preproc_include",
];

const CLASS_DECLS: &[&str] = &[
    "class_definition",
    "class_declaration",
    "class",
    "struct_item",
    "enum_item",
    "trait_item",
    "struct_specifier",
    "interface_declaration",
    "enum_declaration",
    "record_declaration",
    "struct_declaration",
    "type_spec",
    "object_creation_expression",
    "new_expression",
];

const FUNCTION_DECLS: &[&str] = &[
    "function_definition",
    "function_declaration",
    "function_declarator",
    "method_declaration",
    "method_definition",
    "function_item",
    "function_signature_item",
    "method",
    "singleton_method",
    "constructor_declaration",
    "local_function_statement",
];

const CALLS: &[&str] = &["call", "call_expression", "invocation_expression", "method_invocation"];

const MEMBERS: &[&str] = &[
    "attribute",
    "member_expression",
    "field_expression",
    "selector_expression",
    "member_access_expression",
    "scoped_identifier",
];

impl IdentifierPool {
    pub fn from_names<'a>(names: impl IntoIterator<Item = (&'a str, IdentKind)>) -> Self {
        let mut pool = IdentifierPool::default();
        for (name, kind) in names {
            pool.add(name, kind);
        }
        pool
    }

    pub fn add(&mut self, name: &str, kind: IdentKind) {
        let entry = self.names.entry(name.to_string()).or_default();
        entry.count += 1;
        entry.kinds.insert(kind);
    }

    pub fn get(&self, name: &str) -> Option<&PoolEntry> {
        self.names.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.names.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = (&str, &PoolEntry)> {
        self.names.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn has_kind(&self, name: &str, kind: IdentKind) -> bool {
        self.names.get(name).is_some_and(|e| e.kinds.contains(&kind))
    }

    /// Picks a replacement for `target`: a same-kind near-name if any exists, else a
    /// same-kind dissimilar name, else any other identifier.
    pub fn pick_substitute<R: Rng + ?Sized>(
        &self,
        target: &str,
        preferred: &[IdentKind],
        rng: &mut R,
    ) -> Option<String> {
        let same_kind = |entry: &PoolEntry| preferred.iter().any(|k| entry.kinds.contains(k));
        let others: Vec<(&String, &PoolEntry)> =
            self.names.iter().filter(|(name, _)| name.as_str() != target).collect();
        let tiers: [Vec<&String>; 3] = [
            others
                .iter()
                .filter(|(n, e)| same_kind(e) && similar(target, n))
                .map(|(n, _)| *n)
                .collect(),
            others
                .iter()
                .filter(|(n, e)| same_kind(e) && dissimilar(target, n))
                .map(|(n, _)| *n)
                .collect(),
            others.iter().map(|(n, _)| *n).collect(),
        ];
        let tier = tiers.into_iter().find(|t| !t.is_empty())?;
        Some(tier[rng.gen_range(0..tier.len())].clone())
    }
}

/// Near-names: case-only difference, singular/plural pair, or edit distance of at most 2.
pub fn similar(a: &str, b: &str) -> bool {
    if a == b {
        return false;
    }
    a.to_lowercase() == b.to_lowercase() || is_plural_pair(a, b) || levenshtein(a, b) <= 2
}

/// Clearly unrelated names: edit distance above `max(3, ceil(0.5 * longest))`.
pub fn dissimilar(a: &str, b: &str) -> bool {
    let longest = a.chars().count().max(b.chars().count());
    levenshtein(a, b) > 3.max(longest.div_ceil(2))
}

fn is_plural_pair(a: &str, b: &str) -> bool {
    let plural_of = |s: &str, p: &str| {
        p == format!("{s}s")
            || p == format!("{s}es")
            || s.strip_suffix('y').is_some_and(|stem| p == format!("{stem}ies"))
    };
    plural_of(a, b) || plural_of(b, a)
}

/// Gathers every identifier in the tree with kind tags inferred from context.
/// Import paths given as strings (Go, C, Ruby) contribute their last segment as a module.
pub fn collect_identifiers(tree: &SyntaxTree, source: &str) -> IdentifierPool {
    let mut pool = IdentifierPool::default();
    let mut stack: Vec<(&Node, Vec<&Node>)> = vec![(tree.root(), Vec::new())];
    while let Some((node, ancestors)) = stack.pop() {
        if IDENT_KINDS.contains(&node.kind) && !node.byte_range.is_empty() {
            let text = node.text(source);
            if is_identifier(text) {
                pool.add(text, classify(node, &ancestors));
            }
        } else if is_import_path(node, &ancestors) {
            if let Some(range) = import_segment(node.text(source)) {
                pool.add(&node.text(source)[range], IdentKind::Module);
            }
        }
        if node.children.is_empty() {
            continue;
        }
        let mut next = ancestors.clone();
        next.push(node);
        for child in node.children.iter().rev() {
            stack.push((child, next.clone()));
        }
    }
    pool
}

fn is_import_path(node: &Node, ancestors: &[&Node]) -> bool {
    match node.kind {
        "interpreted_string_literal_content" | "system_lib_string" => {
            ancestors.iter().any(|a| IMPORT_KINDS.contains(&a.kind))
        }
        "string_content" => ancestors.iter().any(|a| a.kind == "preproc_include"),
        _ => false,
    }
}

fn classify(node: &Node, ancestors: &[&Node]) -> IdentKind {
    if ancestors.iter().any(|a| IMPORT_KINDS.contains(&a.kind)) || node.kind == "package_identifier" {
        return IdentKind::Module;
    }
    let parent = ancestors.last();
    let grandparent = ancestors.len().checked_sub(2).map(|i| ancestors[i]);
    let field = node.field.unwrap_or("");
    if let Some(parent) = parent {
        if FUNCTION_DECLS.contains(&parent.kind) && matches!(field, "name" | "declarator") {
            return IdentKind::Function;
        }
        if CALLS.contains(&parent.kind) && matches!(field, "function" | "method" | "name") {
            return IdentKind::Function;
        }
        if MEMBERS.contains(&parent.kind)
            && matches!(field, "attribute" | "property" | "field" | "name")
            && grandparent.is_some_and(|g| CALLS.contains(&g.kind))
            && parent.field == Some("function")
        {
            return IdentKind::Function;
        }
        if CLASS_DECLS.contains(&parent.kind) && matches!(field, "name" | "type" | "constructor") {
            return IdentKind::Class;
        }
    }
    if matches!(node.kind, "type_identifier" | "constant") {
        return IdentKind::Class;
    }
    IdentKind::Variable
}

pub(crate) fn is_identifier(text: &str) -> bool {
    let mut chars = text.chars();
    chars
        .next()
        .is_some_and(|c| c.is_alphabetic() || c == '_' || c == '$')
        && chars.all(|c| c.is_alphanumeric() || c == '_' || c == '$')
}

/// Byte range of the last path segment in an import path, extension and quoting removed:
/// `"github.com/x/strings"` -> `strings`, `<stdio.h>` -> `stdio`.
pub(crate) fn import_segment(text: &str) -> Option<std::ops::Range<usize>> {
    let trimmed_end = text.trim_end_matches(['"', '\'', '>']).len();
    let start = text[..trimmed_end]
        .rfind(['/', '<', '"', '\'', '\\'])
        .map(|i| i + 1)
        .unwrap_or(0);
    let mut end = trimmed_end;
    if let Some(dot) = text[start..end].find('.') {
        end = start + dot;
    }
    let segment = &text[start..end];
    is_identifier(segment).then_some(start..end)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::Language;
    use crate::syntax::GrammarRegistry;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fixture() -> String {
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/types.py")).unwrap()
    }

    #[test]
    fn similarity_classes() {
        assert!(similar("Schedule", "schedule"));
        assert!(similar("row", "rows"));
        assert!(similar("entry", "entries"));
        assert!(similar("index", "indx"));
        assert!(!similar("row", "row"));
        assert!(!similar("settings", "register"));
        assert!(dissimilar("settings", "register"));
        assert!(!dissimilar("dataList", "dataSet"));
        assert!(dissimilar("NewType", "Literal"));
    }

    #[test]
    fn pool_from_types_fixture() {
        let src = fixture();
        let tree = GrammarRegistry::shared().parse(&src, Language::Python).unwrap();
        let pool = collect_identifiers(&tree, &src);
        for name in ["NewType", "Literal", "Channel", "PGChannel", "JobId", "annotations"] {
            assert!(pool.contains(name), "{name}");
        }
        assert_eq!(pool.get("NewType").unwrap().count, 6);
        assert!(pool.has_kind("NewType", IdentKind::Function));
        assert!(pool.has_kind("NewType", IdentKind::Module));
        assert!(pool.has_kind("Channel", IdentKind::Variable));
        for (name, entry) in pool.names() {
            assert!(src.matches(name).count() >= entry.count.min(1));
        }
    }

    #[test]
    fn import_paths_contribute_modules() {
        let src = "package main\n\nimport (\n\t\"fmt\"\n\t\"net/http\"\n)\n";
        let tree = GrammarRegistry::shared().parse(src, Language::Go).unwrap();
        let pool = collect_identifiers(&tree, src);
        assert!(pool.has_kind("fmt", IdentKind::Module));
        assert!(pool.has_kind("http", IdentKind::Module));
        assert_eq!(import_segment("<stdio.h>"), Some(1..6));
        assert_eq!(import_segment("lib/x"), Some(4..5));
        assert_eq!(import_segment("net/http"), Some(4..8));
        assert_eq!(import_segment("../"), None);
    }

    #[test]
    fn substitute_prefers_near_names() {
        let pool = IdentifierPool::from_names([
            ("schedule", IdentKind::Function),
            ("Schedule", IdentKind::Function),
            ("register", IdentKind::Function),
            ("x", IdentKind::Variable),
        ]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            assert_eq!(
                pool.pick_substitute("schedule", &[IdentKind::Function], &mut rng).as_deref(),
                Some("Schedule")
            );
        }
        // no same-kind candidates: anything but the target
        let got = pool.pick_substitute("x", &[IdentKind::Module], &mut rng).unwrap();
        assert_ne!(got, "x");
        let lonely = IdentifierPool::from_names([("only", IdentKind::Variable)]);
        assert_eq!(lonely.pick_substitute("only", &[IdentKind::Variable], &mut rng), None);
    }
}
