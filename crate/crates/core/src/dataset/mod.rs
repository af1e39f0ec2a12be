//! Bug instances: the data model, JSONL serialization, automated validation and
//! corpus statistics.

mod stats;
mod validate;

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::language::Language;
use crate::mutators::{Catalog, Category, EditRecord};
use crate::syntax::{line_count, split_lines};

pub use stats::{dataset_stats, CategoryShare, LanguageStats, StatsTable};
pub use validate::{classify_edit, edit_matches, validate_instance, CheckResult, ValidationOutcome};

/// One injected bug with its ground truth. Field order is the JSONL key order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BugInstance {
    pub id: String,
    pub repo: String,
    pub relative_path: String,
    pub language: Language,
    pub subtype_index: u8,
    pub subtype_name: String,
    pub category: Category,
    /// Sorted, distinct, 1-based.
    pub locations: Vec<usize>,
    /// Aligned with `locations`.
    pub edits: Vec<EditRecord>,
    pub original_code: String,
    pub buggy_code: String,
    pub token_count: usize,
    pub line_count: usize,
}

impl BugInstance {
    /// Number of edited lines the subtype calls for.
    pub fn arity(&self) -> usize {
        arity_of(self.subtype_index)
    }

    /// Original text of 1-based `line`.
    pub fn original_line(&self, line: usize) -> Option<&str> {
        split_lines(&self.original_code).get(line.checked_sub(1)?).copied()
    }
}

pub(crate) fn arity_of(subtype: u8) -> usize {
    match subtype {
        20..=22 => subtype as usize - 18,
        _ => 1,
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("write failed at byte offset {offset}: {source}")]
    Write { offset: u64, source: std::io::Error },
    #[error("read failed at line {line}: {source}")]
    Read { line: usize, source: std::io::Error },
    #[error("line {line}: malformed JSON: {message}")]
    Json { line: usize, message: String },
    #[error("line {line}: field `{field}`: {message}")]
    Field { line: usize, field: &'static str, message: String },
}

/// Writes one JSON object per instance. Returns the number written.
pub fn emit_jsonl<W: Write>(instances: &[BugInstance], mut sink: W) -> Result<usize, DatasetError> {
    let mut offset = 0u64;
    for inst in instances {
        let mut line = serde_json::to_vec(inst).expect("instances always serialize");
        line.push(b'\n');
        sink.write_all(&line).map_err(|source| DatasetError::Write { offset, source })?;
        offset += line.len() as u64;
    }
    sink.flush().map_err(|source| DatasetError::Write { offset, source })?;
    Ok(instances.len())
}

/// Reads instances, checking every invariant. Blank lines are ignored.
pub fn load_jsonl<R: BufRead>(source: R) -> Result<Vec<BugInstance>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let text = line.map_err(|source| DatasetError::Read { line: line_no, source })?;
        if text.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| DatasetError::Json { line: line_no, message: e.to_string() })?;
        let Value::Object(obj) = value else {
            return Err(DatasetError::Json { line: line_no, message: "expected an object".into() });
        };
        let inst = from_object(&obj).map_err(|(field, message)| DatasetError::Field {
            line: line_no,
            field,
            message,
        })?;
        check_invariants(&inst).map_err(|(field, message)| DatasetError::Field {
            line: line_no,
            field,
            message,
        })?;
        out.push(inst);
    }
    Ok(out)
}

type FieldError = (&'static str, String);

fn from_object(obj: &Map<String, Value>) -> Result<BugInstance, FieldError> {
    fn field<T: serde::de::DeserializeOwned>(
        obj: &Map<String, Value>,
        name: &'static str,
    ) -> Result<T, FieldError> {
        let v = obj.get(name).ok_or((name, "missing".to_string()))?;
        serde_json::from_value(v.clone()).map_err(|e| (name, e.to_string()))
    }
    Ok(BugInstance {
        id: field(obj, "id")?,
        repo: field(obj, "repo")?,
        relative_path: field(obj, "relative_path")?,
        language: field(obj, "language")?,
        subtype_index: field(obj, "subtype_index")?,
        subtype_name: field(obj, "subtype_name")?,
        category: field(obj, "category")?,
        locations: field(obj, "locations")?,
        edits: field(obj, "edits")?,
        original_code: field(obj, "original_code")?,
        buggy_code: field(obj, "buggy_code")?,
        token_count: field(obj, "token_count")?,
        line_count: field(obj, "line_count")?,
    })
}

/// Structural invariants of an instance; the error names the first offending field.
pub fn check_invariants(inst: &BugInstance) -> Result<(), FieldError> {
    let fail = |field: &'static str, message: String| Err((field, message));
    if inst.id.is_empty() {
        return fail("id", "empty".into());
    }
    let Some(spec) = Catalog::builtin().get(inst.subtype_index) else {
        return fail("subtype_index", format!("{} is not in 1..=22", inst.subtype_index));
    };
    if spec.name != inst.subtype_name {
        return fail("subtype_name", format!("expected {:?} for index {}", spec.name, spec.index));
    }
    if spec.category != inst.category {
        return fail("category", format!("expected {} for index {}", spec.category, spec.index));
    }
    let n = inst.locations.len();
    if !(1..=4).contains(&n) {
        return fail("locations", format!("{n} entries, expected 1 to 4"));
    }
    if inst.locations.windows(2).any(|w| w[0] >= w[1]) || inst.locations[0] == 0 {
        return fail("locations", "must be sorted, distinct and 1-based".into());
    }
    if n != inst.arity() {
        return fail("locations", format!("{n} entries, subtype arity is {}", inst.arity()));
    }
    if inst.edits.len() != n {
        return fail("edits", format!("{} records for {n} locations", inst.edits.len()));
    }
    let original = split_lines(&inst.original_code);
    let buggy = split_lines(&inst.buggy_code);
    let lines = line_count(&inst.original_code);
    if lines == 0 || inst.line_count != lines {
        return fail("line_count", format!("{} recorded, original has {lines}", inst.line_count));
    }
    if line_count(&inst.buggy_code) != lines || original.len() != buggy.len() {
        return fail("buggy_code", "line count differs from original_code".into());
    }
    for (edit, &loc) in inst.edits.iter().zip(&inst.locations) {
        if edit.line != loc {
            return fail("edits", format!("record for line {} where {loc} expected", edit.line));
        }
        if edit.original_line.contains('\n') || edit.buggy_line.contains('\n') {
            return fail("edits", format!("line {loc}: record contains a newline"));
        }
        if edit.original_line == edit.buggy_line {
            return fail("edits", format!("line {loc}: original and buggy lines are equal"));
        }
        if original.get(loc - 1) != Some(&edit.original_line.as_str()) {
            return fail("edits", format!("line {loc}: original_line does not match original_code"));
        }
        if buggy.get(loc - 1) != Some(&edit.buggy_line.as_str()) {
            return fail("edits", format!("line {loc}: buggy_line does not match buggy_code"));
        }
    }
    let changed: Vec<usize> = original
        .iter()
        .zip(&buggy)
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(i, _)| i + 1)
        .collect();
    if changed != inst.locations {
        return fail("buggy_code", format!("differs on lines {changed:?}, locations are {:?}", inst.locations));
    }
    Ok(())
}
