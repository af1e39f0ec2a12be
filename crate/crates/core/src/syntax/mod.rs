//! Grammar-backend abstraction: concrete syntax trees with named node kinds and
//! row/column spans, declarative tree-pattern queries, and span surgery.
//!
//! Backends implement [`Grammar`] and are registered per language in a
//! [`GrammarRegistry`]. The built-in backend is tree-sitter for all eight languages.

mod text;
mod treesitter;

use std::any::Any;
use std::collections::{BTreeMap, HashMap};
use std::ops::Range;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::language::Language;

pub use text::{
    line_count, line_of, replace_span, replace_span_with, split_lines, LineIndex, RowPolicy, Span,
    SpanError,
};
pub use treesitter::TreeSitterGrammar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("no grammar registered for {0}")]
    UnregisteredLanguage(Language),
    #[error("query syntax error at row {row}, column {column}: {message}")]
    Query { row: usize, column: usize, offset: usize, message: String },
    #[error("parser for {0} produced no tree")]
    ParseFailed(Language),
    #[error("tree was produced by a different backend")]
    ForeignTree,
}

/// One node of a concrete syntax tree. Children are ordered by start position and
/// include anonymous tokens such as `)` or `==`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub kind: &'static str,
    /// Field name under which the parent holds this node, if any.
    pub field: Option<&'static str>,
    pub span: Span,
    pub byte_range: Range<usize>,
    pub named: bool,
    pub is_error: bool,
    pub is_missing: bool,
    pub children: Vec<Node>,
}

impl Node {
    pub fn text<'s>(&self, source: &'s str) -> &'s str {
        &source[self.byte_range.clone()]
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn child_by_field(&self, field: &str) -> Option<&Node> {
        self.children.iter().find(|c| c.field == Some(field))
    }

    pub fn named_children(&self) -> impl Iterator<Item = &Node> {
        self.children.iter().filter(|c| c.named)
    }

    /// Pre-order traversal including `self`.
    pub fn descendants(&self) -> Descendants<'_> {
        Descendants { stack: vec![self] }
    }

    /// True if this subtree contains an error or missing node.
    pub fn has_error(&self) -> bool {
        self.descendants().any(|n| n.is_error || n.is_missing)
    }

    /// Number of non-empty leaves, i.e. the token count of the subtree.
    pub fn leaf_count(&self) -> usize {
        self.descendants()
            .filter(|n| n.is_leaf() && !n.byte_range.is_empty())
            .count()
    }

    /// Byte ranges of every `ERROR` node in the subtree.
    pub fn error_ranges(&self) -> Vec<Range<usize>> {
        self.descendants()
            .filter(|n| n.is_error)
            .map(|n| n.byte_range.clone())
            .collect()
    }

    /// Follows a child-index path from this node.
    pub fn at_path(&self, path: &[usize]) -> Option<&Node> {
        path.iter().try_fold(self, |node, &i| node.children.get(i))
    }

    /// The node in this subtree whose children include `target` (by identity).
    pub fn parent_of(&self, target: &Node) -> Option<&Node> {
        let contains = |n: &Node| {
            n.byte_range.start <= target.byte_range.start && target.byte_range.end <= n.byte_range.end
        };
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            if node.children.iter().any(|c| std::ptr::eq(c, target)) {
                return Some(node);
            }
            stack.extend(node.children.iter().filter(|c| contains(c)));
        }
        None
    }
}

impl Drop for Node {
    // Iterative teardown; deeply nested trees would otherwise recurse once per level.
    fn drop(&mut self) {
        let mut stack = std::mem::take(&mut self.children);
        while let Some(mut node) = stack.pop() {
            stack.append(&mut node.children);
        }
    }
}

pub struct Descendants<'t> {
    stack: Vec<&'t Node>,
}

impl<'t> Iterator for Descendants<'t> {
    type Item = &'t Node;

    fn next(&mut self) -> Option<&'t Node> {
        let node = self.stack.pop()?;
        self.stack.extend(node.children.iter().rev());
        Some(node)
    }
}

/// A parsed file: the owned node tree plus whatever the backend needs for queries.
pub struct SyntaxTree {
    language: Language,
    root: Node,
    backend: Box<dyn Any + Send + Sync>,
}

impl std::fmt::Debug for SyntaxTree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SyntaxTree")
            .field("language", &self.language)
            .field("root", &self.root.kind)
            .finish()
    }
}

impl SyntaxTree {
    pub fn new(language: Language, root: Node, backend: Box<dyn Any + Send + Sync>) -> Self {
        SyntaxTree { language, root, backend }
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn backend<T: 'static>(&self) -> Option<&T> {
        self.backend.downcast_ref()
    }
}

/// Captures of one query match. Capture names are stored without the `@`.
#[derive(Debug, Clone)]
pub struct QueryMatch<'t> {
    pub pattern_index: usize,
    pub captures: BTreeMap<String, &'t Node>,
}

impl<'t> QueryMatch<'t> {
    pub fn get(&self, name: &str) -> Option<&'t Node> {
        self.captures.get(name).copied()
    }

    /// The capture enclosing the others: widest span, earliest start.
    fn outermost(&self) -> Option<&'t Node> {
        self.captures
            .values()
            .copied()
            .min_by_key(|n| (n.byte_range.start, std::cmp::Reverse(n.byte_range.end)))
    }
}

/// A parser + query engine for one language.
pub trait Grammar: Send + Sync {
    fn language(&self) -> Language;

    fn parse(&self, source: &str) -> Result<SyntaxTree, SyntaxError>;

    /// Runs `pattern` over `tree`. Implementations may return matches in any order;
    /// [`GrammarRegistry::run_query`] sorts them.
    fn query<'t>(
        &self,
        tree: &'t SyntaxTree,
        source: &str,
        pattern: &str,
    ) -> Result<Vec<QueryMatch<'t>>, SyntaxError>;
}

#[derive(Clone, Default)]
pub struct GrammarRegistry {
    grammars: HashMap<Language, Arc<dyn Grammar>>,
}

impl GrammarRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Registry with the tree-sitter backend for every supported language.
    pub fn builtin() -> Self {
        let mut registry = Self::empty();
        for lang in Language::ALL {
            registry.register(Arc::new(TreeSitterGrammar::new(lang)));
        }
        registry
    }

    /// Process-wide built-in registry; query compilation is cached inside it.
    pub fn shared() -> &'static GrammarRegistry {
        static SHARED: OnceLock<GrammarRegistry> = OnceLock::new();
        SHARED.get_or_init(GrammarRegistry::builtin)
    }

    pub fn register(&mut self, grammar: Arc<dyn Grammar>) {
        self.grammars.insert(grammar.language(), grammar);
    }

    pub fn supports(&self, language: Language) -> bool {
        self.grammars.contains_key(&language)
    }

    pub fn grammar(&self, language: Language) -> Result<&dyn Grammar, SyntaxError> {
        self.grammars
            .get(&language)
            .map(|g| g.as_ref())
            .ok_or(SyntaxError::UnregisteredLanguage(language))
    }

    pub fn parse(&self, source: &str, language: Language) -> Result<SyntaxTree, SyntaxError> {
        self.grammar(language)?.parse(source)
    }

    /// Matches in document order of their outermost capture.
    pub fn run_query<'t>(
        &self,
        tree: &'t SyntaxTree,
        source: &str,
        pattern: &str,
    ) -> Result<Vec<QueryMatch<'t>>, SyntaxError> {
        let mut matches = self.grammar(tree.language())?.query(tree, source, pattern)?;
        matches.sort_by_key(|m| {
            let outer = m.outermost();
            (
                outer.map(|n| n.byte_range.start).unwrap_or(0),
                std::cmp::Reverse(outer.map(|n| n.byte_range.end).unwrap_or(0)),
                m.pattern_index,
            )
        });
        Ok(matches)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_source_has_empty_root() {
        let tree = GrammarRegistry::shared().parse("", Language::Python).unwrap();
        let root = tree.root();
        assert!(root.children.is_empty());
        assert!(root.span.is_empty());
    }

    #[test]
    fn unbalanced_brace_yields_error_node() {
        let tree = GrammarRegistry::shared()
            .parse("int main() {\n  return 0;\n", Language::C)
            .unwrap();
        assert!(tree.root().has_error());
        let tree = GrammarRegistry::shared()
            .parse("fn main() {\n    let x = 1;\n", Language::Rust)
            .unwrap();
        assert!(tree.root().has_error());
    }

    #[test]
    fn unregistered_language_is_a_configuration_error() {
        let registry = GrammarRegistry::empty();
        assert_eq!(
            registry.parse("x = 1", Language::Python).unwrap_err(),
            SyntaxError::UnregisteredLanguage(Language::Python)
        );
    }

    #[test]
    fn tree_is_lossless() {
        let src = "def f(a, b):\n    return a + b  # sum\n";
        let tree = GrammarRegistry::shared().parse(src, Language::Python).unwrap();
        let root = tree.root();
        assert_eq!(root.byte_range, 0..src.len());
        for node in root.descendants() {
            for pair in node.children.windows(2) {
                assert!(pair[0].byte_range.end <= pair[1].byte_range.start);
            }
            for child in &node.children {
                assert!(child.byte_range.start >= node.byte_range.start);
                assert!(child.byte_range.end <= node.byte_range.end);
            }
        }
        // every non-whitespace byte is covered by some leaf
        let mut covered = vec![false; src.len()];
        for leaf in root.descendants().filter(|n| n.is_leaf()) {
            for i in leaf.byte_range.clone() {
                covered[i] = true;
            }
        }
        for (i, b) in src.bytes().enumerate() {
            assert!(covered[i] || b.is_ascii_whitespace(), "byte {i} uncovered");
        }
    }

    #[test]
    fn malformed_query_reports_position() {
        let tree = GrammarRegistry::shared().parse("x = 1\n", Language::Python).unwrap();
        let err = GrammarRegistry::shared()
            .run_query(&tree, "x = 1\n", "(call function: (identifier @f")
            .unwrap_err();
        assert!(matches!(err, SyntaxError::Query { .. }), "{err:?}");
    }

    #[test]
    fn absent_kind_matches_nothing() {
        let src = "x = 1\n";
        let tree = GrammarRegistry::shared().parse(src, Language::Python).unwrap();
        let matches = GrammarRegistry::shared()
            .run_query(&tree, src, "(call function: (identifier) @function) @call")
            .unwrap();
        assert!(matches.is_empty());
    }
}
