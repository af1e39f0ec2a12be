//! Row/column addressing and span-level string surgery.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A source range in 0-based rows and UTF-8 byte columns, end exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start_row: usize,
    pub start_col: usize,
    pub end_row: usize,
    pub end_col: usize,
}

impl Span {
    pub fn new(start_row: usize, start_col: usize, end_row: usize, end_col: usize) -> Self {
        Span { start_row, start_col, end_row, end_col }
    }

    pub fn start(&self) -> (usize, usize) {
        (self.start_row, self.start_col)
    }

    pub fn end(&self) -> (usize, usize) {
        (self.end_row, self.end_col)
    }

    pub fn is_single_row(&self) -> bool {
        self.start_row == self.end_row
    }

    pub fn is_empty(&self) -> bool {
        self.start() == self.end()
    }

    /// The span covering `len` bytes of replacement text written at this span's start.
    pub fn after_replacement(&self, len: usize) -> Span {
        Span::new(self.start_row, self.start_col, self.start_row, self.start_col + len)
    }
}

/// 1-based line number of the span's first row.
pub fn line_of(span: &Span) -> usize {
    span.start_row + 1
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpanError {
    #[error("position ({row}, {col}) lies outside the source")]
    OutOfBounds { row: usize, col: usize },
    #[error("span end precedes its start")]
    Inverted,
    #[error("span crosses rows {start_row}..={end_row}; single-row edits only")]
    MultiRow { start_row: usize, end_row: usize },
    #[error("replacement text contains a newline")]
    NewlineInReplacement,
    #[error("position ({row}, {col}) is not on a UTF-8 character boundary")]
    NotCharBoundary { row: usize, col: usize },
}

/// How [`replace_span_with`] treats spans that cross rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowPolicy {
    SingleRow,
    /// Multi-row spans are accepted; the replacement still may not contain a newline,
    /// so the rows collapse into one.
    AllowMultiRow,
}

/// Number of newline-delimited lines. `""` has 0 lines, `"a"` and `"a\n"` have 1.
pub fn line_count(text: &str) -> usize {
    let newlines = text.bytes().filter(|&b| b == b'\n').count();
    if text.is_empty() || text.ends_with('\n') {
        newlines
    } else {
        newlines + 1
    }
}

/// Lines without their terminating `\n`. Agrees with [`line_count`].
pub fn split_lines(text: &str) -> Vec<&str> {
    text.split_inclusive('\n')
        .map(|l| l.strip_suffix('\n').unwrap_or(l))
        .collect()
}

/// Byte offsets of row starts.
#[derive(Debug, Clone)]
pub struct LineIndex {
    starts: Vec<usize>,
    len: usize,
}

impl LineIndex {
    pub fn new(text: &str) -> Self {
        let mut starts = vec![0];
        starts.extend(text.match_indices('\n').map(|(i, _)| i + 1));
        LineIndex { starts, len: text.len() }
    }

    pub fn rows(&self) -> usize {
        self.starts.len()
    }

    /// Byte range of `row`'s content, newline excluded.
    pub fn row_range(&self, row: usize) -> Option<std::ops::Range<usize>> {
        let start = *self.starts.get(row)?;
        let end = match self.starts.get(row + 1) {
            Some(next) => next - 1,
            None => self.len,
        };
        Some(start..end)
    }

    pub fn offset(&self, row: usize, col: usize) -> Option<usize> {
        let range = self.row_range(row)?;
        (col <= range.end - range.start).then_some(range.start + col)
    }

    pub fn position(&self, offset: usize) -> (usize, usize) {
        let row = match self.starts.binary_search(&offset) {
            Ok(r) => r,
            Err(r) => r - 1,
        };
        (row, offset - self.starts[row])
    }
}

/// Replaces the spanned text, rejecting multi-row spans.
pub fn replace_span(source: &str, span: &Span, replacement: &str) -> Result<String, SpanError> {
    replace_span_with(source, span, replacement, RowPolicy::SingleRow)
}

pub fn replace_span_with(
    source: &str,
    span: &Span,
    replacement: &str,
    policy: RowPolicy,
) -> Result<String, SpanError> {
    if replacement.contains('\n') {
        return Err(SpanError::NewlineInReplacement);
    }
    if span.end() < span.start() {
        return Err(SpanError::Inverted);
    }
    if !span.is_single_row() && policy == RowPolicy::SingleRow {
        return Err(SpanError::MultiRow { start_row: span.start_row, end_row: span.end_row });
    }
    let index = LineIndex::new(source);
    let (start, end) = byte_range(source, &index, span)?;
    let mut out = String::with_capacity(source.len() + replacement.len());
    out.push_str(&source[..start]);
    out.push_str(replacement);
    out.push_str(&source[end..]);
    Ok(out)
}

pub(crate) fn byte_range(
    source: &str,
    index: &LineIndex,
    span: &Span,
) -> Result<(usize, usize), SpanError> {
    let resolve = |row, col| {
        let off = index.offset(row, col).ok_or(SpanError::OutOfBounds { row, col })?;
        if !source.is_char_boundary(off) {
            return Err(SpanError::NotCharBoundary { row, col });
        }
        Ok(off)
    };
    Ok((resolve(span.start_row, span.start_col)?, resolve(span.end_row, span.end_col)?))
}
