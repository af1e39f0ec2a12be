//! Repository screening and source-file discovery.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::language::Language;
use crate::syntax::line_count;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: not valid UTF-8")]
    InvalidUtf8 { path: PathBuf },
    #[error("manifest field `{field}`: {message}")]
    Manifest { field: &'static str, message: String },
    #[error("focus sidecar {path}: {message}")]
    Focus { path: PathBuf, message: String },
}

impl IngestError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        IngestError::Io { path: path.to_path_buf(), source }
    }
}

/// Repository metadata as stored in a manifest file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepoManifest {
    pub name: String,
    pub star_count: u64,
    /// ISO-8601 calendar date; checked by [`validate_manifest`].
    pub created_at: String,
    pub license_id: String,
    pub root: PathBuf,
}

impl RepoManifest {
    pub fn from_json(text: &str) -> Result<Self, IngestError> {
        serde_json::from_str(text)
            .map_err(|e| IngestError::Manifest { field: "<json>", message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self, IngestError> {
        let text = fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn created_date(&self) -> Result<NaiveDate, IngestError> {
        NaiveDate::parse_from_str(self.created_at.trim(), "%Y-%m-%d").map_err(|e| {
            IngestError::Manifest {
                field: "created_at",
                message: format!("`{}` is not a YYYY-MM-DD date ({e})", self.created_at),
            }
        })
    }
}

/// Repository and file screening thresholds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterPolicy {
    /// A repository must have strictly more stars than this.
    pub min_stars_exclusive: u64,
    /// Creation date must be on or after this day.
    pub created_on_or_after: NaiveDate,
    pub license_allow: Vec<String>,
    pub max_file_bytes: u64,
}

impl Default for FilterPolicy {
    fn default() -> Self {
        FilterPolicy {
            min_stars_exclusive: 100,
            created_on_or_after: NaiveDate::from_ymd_opt(2022, 1, 1).expect("valid date"),
            license_allow: vec!["MIT".to_string()],
            max_file_bytes: 1 << 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CriterionResult {
    pub criterion: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub repo: String,
    pub criteria: Vec<CriterionResult>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn criterion(&self, name: &str) -> Option<&CriterionResult> {
        self.criteria.iter().find(|c| c.criterion == name)
    }
}

pub fn validate_manifest(
    manifest: &RepoManifest,
    policy: &FilterPolicy,
) -> Result<ValidationReport, IngestError> {
    let created = manifest.created_date()?;
    let license_ok = policy
        .license_allow
        .iter()
        .any(|l| l.eq_ignore_ascii_case(manifest.license_id.trim()));
    let criteria = vec![
        CriterionResult {
            criterion: "stars",
            passed: manifest.star_count > policy.min_stars_exclusive,
            detail: format!("{} stars, need more than {}", manifest.star_count, policy.min_stars_exclusive),
        },
        CriterionResult {
            criterion: "created_at",
            passed: created >= policy.created_on_or_after,
            detail: format!("created {created}, cutoff {}", policy.created_on_or_after),
        },
        CriterionResult {
            criterion: "license",
            passed: license_ok,
            detail: format!("license `{}`, allowed {:?}", manifest.license_id, policy.license_allow),
        },
    ];
    let passed = criteria.iter().all(|c| c.passed);
    Ok(ValidationReport { repo: manifest.name.clone(), criteria, passed })
}

/// An inclusive, 1-based line range.
pub type LineRange = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceFile {
    pub repo: String,
    /// `/`-separated path relative to the repository root.
    pub relative_path: String,
    pub language: Language,
    pub content: String,
    pub line_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focus_lines: Option<Vec<LineRange>>,
}

impl SourceFile {
    pub fn new(
        repo: impl Into<String>,
        relative_path: impl Into<String>,
        language: Language,
        content: impl Into<String>,
    ) -> Self {
        let content = content.into();
        SourceFile {
            repo: repo.into(),
            relative_path: relative_path.into(),
            language,
            line_count: line_count(&content),
            content,
            focus_lines: None,
        }
    }

    pub fn in_focus(&self, line: usize) -> bool {
        self.focus_lines
            .as_ref()
            .is_some_and(|ranges| ranges.iter().any(|&(s, e)| (s..=e).contains(&line)))
    }
}

/// Reads one file. Content is kept byte-exact, including any trailing newline.
pub fn load_source_file(path: &Path, language: Language) -> Result<SourceFile, IngestError> {
    let bytes = fs::read(path).map_err(|e| IngestError::io(path, e))?;
    let content =
        String::from_utf8(bytes).map_err(|_| IngestError::InvalidUtf8 { path: path.to_path_buf() })?;
    Ok(SourceFile::new("", path.to_string_lossy(), language, content))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkipEntry {
    pub path: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct Discovery {
    pub files: Vec<SourceFile>,
    pub skipped: Vec<SkipEntry>,
}

/// Walks `root` and loads every file with a supported suffix, ordered by relative path.
/// Hidden entries are ignored; unreadable, oversized or non-UTF-8 files go to the skip log.
pub fn discover_files(root: &Path, repo: &str, policy: &FilterPolicy) -> Result<Discovery, IngestError> {
    let meta = fs::metadata(root).map_err(|e| IngestError::io(root, e))?;
    if !meta.is_dir() {
        return Err(IngestError::io(
            root,
            std::io::Error::new(std::io::ErrorKind::NotADirectory, "not a directory"),
        ));
    }
    let mut found = Vec::new();
    let walker = walkdir::WalkDir::new(root)
        .follow_links(false)
        .into_iter()
        .filter_entry(|e| e.depth() == 0 || !e.file_name().to_string_lossy().starts_with('.'));
    let mut discovery = Discovery::default();
    for entry in walker {
        let entry = match entry {
            Ok(e) => e,
            Err(err) => {
                let path = err.path().map(|p| p.display().to_string()).unwrap_or_default();
                discovery.skipped.push(SkipEntry { path, reason: err.to_string() });
                continue;
            }
        };
        if !entry.file_type().is_file() {
            continue;
        }
        let Some(language) = Language::from_path(entry.path()) else { continue };
        let rel = relative(root, entry.path());
        found.push((rel, entry.into_path(), language));
    }
    found.sort_by(|a, b| a.0.cmp(&b.0));

    for (rel, path, language) in found {
        let size = fs::metadata(&path).map(|m| m.len()).unwrap_or(0);
        if size > policy.max_file_bytes {
            discovery.skipped.push(SkipEntry {
                path: rel,
                reason: format!("{size} bytes exceeds cap of {}", policy.max_file_bytes),
            });
            continue;
        }
        match load_source_file(&path, language) {
            Ok(mut file) => {
                file.repo = repo.to_string();
                file.relative_path = rel;
                discovery.files.push(file);
            }
            Err(err) => discovery.skipped.push(SkipEntry { path: rel, reason: err.to_string() }),
        }
    }
    Ok(discovery)
}

fn relative(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

/// Parses a focus sidecar: `{"relative/path": [[start, end], ...]}`.
pub fn parse_focus_sidecar(text: &str, origin: &Path) -> Result<BTreeMap<String, Vec<LineRange>>, IngestError> {
    let err = |message: String| IngestError::Focus { path: origin.to_path_buf(), message };
    let map: BTreeMap<String, Vec<LineRange>> =
        serde_json::from_str(text).map_err(|e| err(e.to_string()))?;
    for (path, ranges) in &map {
        for &(s, e) in ranges {
            if s == 0 || s > e {
                return Err(err(format!("{path}: invalid range [{s}, {e}]")));
            }
        }
    }
    Ok(map)
}

pub fn load_focus_sidecar(path: &Path) -> Result<BTreeMap<String, Vec<LineRange>>, IngestError> {
    let text = fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
    parse_focus_sidecar(&text, path)
}

pub fn apply_focus(files: &mut [SourceFile], focus: &BTreeMap<String, Vec<LineRange>>) {
    for file in files {
        if let Some(ranges) = focus.get(&file.relative_path) {
            file.focus_lines = Some(ranges.clone());
        }
    }
}
