//! The eight source languages handled by the pipeline and their file suffixes.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Language {
    C,
    #[serde(rename = "C#")]
    CSharp,
    Go,
    Java,
    JavaScript,
    Python,
    Ruby,
    Rust,
}

impl Language {
    pub const ALL: [Language; 8] = [
        Language::C,
        Language::CSharp,
        Language::Go,
        Language::Java,
        Language::JavaScript,
        Language::Python,
        Language::Ruby,
        Language::Rust,
    ];

    /// One canonical suffix per language.
    pub fn from_extension(ext: &str) -> Option<Self> {
        match ext {
            "c" => Some(Language::C),
            "cs" => Some(Language::CSharp),
            "go" => Some(Language::Go),
            "java" => Some(Language::Java),
            "js" => Some(Language::JavaScript),
            "py" => Some(Language::Python),
            "rb" => Some(Language::Ruby),
            "rs" => Some(Language::Rust),
            _ => None,
        }
    }

    pub fn from_path(path: &Path) -> Option<Self> {
        path.extension()
            .and_then(|e| e.to_str())
            .and_then(Self::from_extension)
    }

    pub fn extension(self) -> &'static str {
        match self {
            Language::C => "c",
            Language::CSharp => "cs",
            Language::Go => "go",
            Language::Java => "java",
            Language::JavaScript => "js",
            Language::Python => "py",
            Language::Ruby => "rb",
            Language::Rust => "rs",
        }
    }

    /// Display name, also the JSON encoding.
    pub fn name(self) -> &'static str {
        match self {
            Language::C => "C",
            Language::CSharp => "C#",
            Language::Go => "Go",
            Language::Java => "Java",
            Language::JavaScript => "JavaScript",
            Language::Python => "Python",
            Language::Ruby => "Ruby",
            Language::Rust => "Rust",
        }
    }

    /// Directory name used for per-language query files.
    pub fn slug(self) -> &'static str {
        match self {
            Language::C => "c",
            Language::CSharp => "csharp",
            Language::Go => "go",
            Language::Java => "java",
            Language::JavaScript => "javascript",
            Language::Python => "python",
            Language::Ruby => "ruby",
            Language::Rust => "rust",
        }
    }

    /// Languages whose blocks are delimited by braces.
    pub fn is_brace_delimited(self) -> bool {
        !matches!(self, Language::Python | Language::Ruby)
    }

    /// Fenced-code-block tag used in prompts.
    pub fn fence_tag(self) -> &'static str {
        match self {
            Language::CSharp => "csharp",
            other => other.slug(),
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown language `{0}`")]
pub struct UnknownLanguage(pub String);

impl FromStr for Language {
    type Err = UnknownLanguage;

    /// Accepts display names, slugs and suffixes, case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        Language::ALL
            .into_iter()
            .find(|l| {
                l.name().to_ascii_lowercase() == lower || l.slug() == lower || l.extension() == lower
            })
            .or(match lower.as_str() {
                "c-sharp" | "c_sharp" => Some(Language::CSharp),
                "js" => Some(Language::JavaScript),
                _ => None,
            })
            .ok_or_else(|| UnknownLanguage(s.to_string()))
    }
}
