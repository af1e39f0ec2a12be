use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use streaming_iterator::StreamingIterator;
use tree_sitter::{Parser, Query, QueryCursor, Tree, TreeCursor};

use super::{Grammar, Node, QueryMatch, Span, SyntaxError, SyntaxTree};
use crate::language::Language;

/// tree-sitter backend for one language. Compiled queries are cached by pattern text.
pub struct TreeSitterGrammar {
    language: Language,
    ts_language: tree_sitter::Language,
    queries: Mutex<HashMap<String, Arc<Query>>>,
}

impl TreeSitterGrammar {
    pub fn new(language: Language) -> Self {
        let ts_language: tree_sitter::Language = match language {
            Language::C => tree_sitter_c::LANGUAGE.into(),
            Language::CSharp => tree_sitter_c_sharp::LANGUAGE.into(),
            Language::Go => tree_sitter_go::LANGUAGE.into(),
            Language::Java => tree_sitter_java::LANGUAGE.into(),
            Language::JavaScript => tree_sitter_javascript::LANGUAGE.into(),
            Language::Python => tree_sitter_python::LANGUAGE.into(),
            Language::Ruby => tree_sitter_ruby::LANGUAGE.into(),
            Language::Rust => tree_sitter_rust::LANGUAGE.into(),
        };
        TreeSitterGrammar { language, ts_language, queries: Mutex::new(HashMap::new()) }
    }

    fn compiled(&self, pattern: &str) -> Result<Arc<Query>, SyntaxError> {
        let mut cache = self.queries.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(q) = cache.get(pattern) {
            return Ok(Arc::clone(q));
        }
        let query = Query::new(&self.ts_language, pattern).map_err(|e| SyntaxError::Query {
            row: e.row,
            column: e.column,
            offset: e.offset,
            message: format!("{:?}: {}", e.kind, e.message),
        })?;
        let query = Arc::new(query);
        cache.insert(pattern.to_string(), Arc::clone(&query));
        Ok(query)
    }
}

impl Grammar for TreeSitterGrammar {
    fn language(&self) -> Language {
        self.language
    }

    fn parse(&self, source: &str) -> Result<SyntaxTree, SyntaxError> {
        let mut parser = Parser::new();
        parser
            .set_language(&self.ts_language)
            .expect("bundled grammar ABI is supported by the linked tree-sitter runtime");
        let tree = parser.parse(source, None).ok_or(SyntaxError::ParseFailed(self.language))?;
        let root = convert(&mut tree.walk());
        Ok(SyntaxTree::new(self.language, root, Box::new(tree)))
    }

    fn query<'t>(
        &self,
        tree: &'t SyntaxTree,
        source: &str,
        pattern: &str,
    ) -> Result<Vec<QueryMatch<'t>>, SyntaxError> {
        let ts_tree: &Tree = tree.backend().ok_or(SyntaxError::ForeignTree)?;
        let query = self.compiled(pattern)?;
        let names = query.capture_names();
        let mut cursor = QueryCursor::new();
        let mut matches = cursor.matches(&query, ts_tree.root_node(), source.as_bytes());
        let mut out = Vec::new();
        while let Some(m) = matches.next() {
            let mut captures = BTreeMap::new();
            for cap in m.captures {
                let name = names[cap.index as usize];
                if captures.contains_key(name) {
                    continue;
                }
                if let Some(node) = tree.root().at_path(&child_path(cap.node)) {
                    captures.insert(name.to_string(), node);
                }
            }
            out.push(QueryMatch { pattern_index: m.pattern_index, captures });
        }
        Ok(out)
    }
}

/// Child-index path from the root to `node`.
fn child_path(node: tree_sitter::Node<'_>) -> Vec<usize> {
    let mut path = Vec::new();
    let mut current = node;
    while let Some(parent) = current.parent() {
        let mut cursor = parent.walk();
        let idx = parent
            .children(&mut cursor)
            .position(|c| c.id() == current.id())
            .expect("node is a child of its parent");
        path.push(idx);
        current = parent;
    }
    path.reverse();
    path
}

struct Pending {
    node: Node,
}

fn header(cursor: &TreeCursor<'_>) -> Pending {
    let n = cursor.node();
    let (s, e) = (n.start_position(), n.end_position());
    Pending {
        node: Node {
            kind: n.kind(),
            field: cursor.field_name(),
            span: Span::new(s.row, s.column, e.row, e.column),
            byte_range: n.byte_range(),
            named: n.is_named(),
            is_error: n.is_error(),
            is_missing: n.is_missing(),
            children: Vec::new(),
        },
    }
}

// Iterative so deeply nested sources cannot overflow the stack.
fn convert(cursor: &mut TreeCursor<'_>) -> Node {
    let mut stack = vec![header(cursor)];
    loop {
        if cursor.goto_first_child() {
            stack.push(header(cursor));
            continue;
        }
        loop {
            let done = stack.pop().expect("stack holds the current node").node;
            match stack.last_mut() {
                None => return done,
                Some(parent) => parent.node.children.push(done),
            }
            if cursor.goto_next_sibling() {
                stack.push(header(cursor));
                break;
            }
            cursor.goto_parent();
        }
    }
}
