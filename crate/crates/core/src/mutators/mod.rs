//! The 22 bug operators: site enumeration, rewrite planning, multi-bug
//! composition and per-file injection under quotas and seeded randomness.

mod catalog;
mod compose;
mod inject;
mod pool;
mod rewrite;
mod sites;

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::language::Language;
use crate::syntax::{split_lines, LineIndex, Span, SyntaxTree};

pub use catalog::{Catalog, CatalogError, Category, OperatorSpec, Rewrite, CATALOG_VERSION};
pub use compose::{compose_multiple, SiteTable};
pub use inject::{inject_file, inject_file_with, instance_id, keyed_rng, InjectOutcome, SkipRecord};
pub use pool::{collect_identifiers, dissimilar, similar, IdentKind, IdentifierPool, PoolEntry};
pub use rewrite::{plan_mutation, plan_replacement, CONDITION_LITERALS};
pub use sites::{enumerate_sites, MutationSite};

pub(crate) use pool::is_identifier;
pub(crate) use sites::is_number as is_number_literal;

/// One changed line: the repair ground truth for that line.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EditRecord {
    /// 1-based.
    pub line: usize,
    pub original_line: String,
    pub buggy_line: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlannedEdit {
    pub span: Span,
    pub byte_range: Range<usize>,
    pub replacement: String,
}

/// Everything needed to produce a buggy file from the original.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MutationPlan {
    pub operator: u8,
    pub edits: Vec<PlannedEdit>,
    /// Sorted by line.
    pub records: Vec<EditRecord>,
    /// Sorted 1-based lines.
    pub locations: Vec<usize>,
    /// Single-line operator behind each record; `[operator]` for indices 1-19.
    pub components: Vec<u8>,
}

impl MutationPlan {
    pub fn apply(&self, source: &str) -> String {
        let mut edits: Vec<&PlannedEdit> = self.edits.iter().collect();
        edits.sort_by_key(|e| std::cmp::Reverse(e.byte_range.start));
        let mut out = source.to_string();
        for edit in edits {
            out.replace_range(edit.byte_range.clone(), &edit.replacement);
        }
        out
    }
}

/// Why a site, operator or file produced no instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum SkipReason {
    Inapplicable,
    NoSites,
    /// The identifier pool holds no distinct substitute.
    NoCandidate,
    NoChange,
    LineTooLong { chars: usize, limit: usize },
    InsufficientSites { needed: usize, available: usize },
    Duplicate,
    ParseFailed { message: String },
    QueryFailed { message: String },
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkipReason::Inapplicable => f.write_str("operator does not apply to this language"),
            SkipReason::NoSites => f.write_str("no eligible site"),
            SkipReason::NoCandidate => f.write_str("no distinct substitution candidate"),
            SkipReason::NoChange => f.write_str("rewrite left the line unchanged"),
            SkipReason::LineTooLong { chars, limit } => {
                write!(f, "mutated line has {chars} chars, limit {limit}")
            }
            SkipReason::InsufficientSites { needed, available } => {
                write!(f, "needs sites on {needed} distinct lines, found {available}")
            }
            SkipReason::Duplicate => f.write_str("duplicate of an earlier instance"),
            SkipReason::ParseFailed { message } => write!(f, "parse failed: {message}"),
            SkipReason::QueryFailed { message } => write!(f, "site query failed: {message}"),
        }
    }
}

/// Per-file state shared by all operators.
pub struct FileContext<'t> {
    pub language: Language,
    pub source: &'t str,
    pub tree: &'t SyntaxTree,
    pub index: LineIndex,
    pub pool: IdentifierPool,
    lines: Vec<&'t str>,
    max_line_chars: usize,
    error_ranges: Vec<Range<usize>>,
}

impl<'t> FileContext<'t> {
    pub fn new(tree: &'t SyntaxTree, source: &'t str) -> Self {
        let lines = split_lines(source);
        let max_line_chars = lines.iter().map(|l| l.chars().count()).max().unwrap_or(0);
        FileContext {
            language: tree.language(),
            source,
            tree,
            index: LineIndex::new(source),
            pool: collect_identifiers(tree, source),
            lines,
            max_line_chars,
            error_ranges: tree.root().error_ranges(),
        }
    }

    /// Text of 1-based `line`, newline excluded.
    pub fn line(&self, line: usize) -> Option<&'t str> {
        self.lines.get(line.checked_sub(1)?).copied()
    }

    pub fn max_line_chars(&self) -> usize {
        self.max_line_chars
    }

    pub fn span_of(&self, range: &Range<usize>) -> Span {
        let (sr, sc) = self.index.position(range.start);
        let (er, ec) = self.index.position(range.end);
        Span::new(sr, sc, er, ec)
    }

    /// Non-empty, within one row, and clear of pre-existing parse errors.
    pub(crate) fn editable(&self, range: &Range<usize>) -> bool {
        !range.is_empty()
            && !self.source[range.clone()].contains('\n')
            && !self
                .error_ranges
                .iter()
                .any(|e| e.start < range.end && range.start < e.end)
    }
}
