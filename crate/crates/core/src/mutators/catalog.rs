//! The operator catalog: 22 bug subtypes in four categories.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::language::Language;

include!(concat!(env!("OUT_DIR"), "/embedded_queries.rs"));

const BUILTIN_CATALOG: &str = include_str!("../../catalog.json");

/// Bumped whenever the shipped catalog text changes.
pub const CATALOG_VERSION: &str = "forge-catalog-1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    Syntax,
    Reference,
    Logic,
    Multiple,
}

impl Category {
    pub const ALL: [Category; 4] =
        [Category::Syntax, Category::Reference, Category::Logic, Category::Multiple];

    pub fn name(self) -> &'static str {
        match self {
            Category::Syntax => "Syntax",
            Category::Reference => "Reference",
            Category::Logic => "Logic",
            Category::Multiple => "Multiple",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rewrite rule identifiers; see [`crate::mutators::plan_mutation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rewrite {
    EqualToAssign,
    AssignToEqual,
    DeleteToken,
    CorruptComment,
    SwapIdentifier,
    MutateArgument,
    DivideByZero,
    SwapArithmetic,
    DropOperand,
    SwapLogical,
    ConstantCondition,
    Compose,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub index: u8,
    pub name: String,
    pub category: Category,
    pub description: String,
    /// Number of edited lines.
    pub arity: usize,
    pub applicability: BTreeSet<Language>,
    /// Query file name under `queries/<language>/`; absent for composite operators.
    pub query: Option<String>,
    pub rewrite: Rewrite,
}

impl OperatorSpec {
    pub fn applies_to(&self, language: Language) -> bool {
        self.applicability.contains(&language)
    }

    pub fn is_composite(&self) -> bool {
        self.rewrite == Rewrite::Compose
    }

    /// Query text for `language`, if the operator applies there.
    pub fn site_query(&self, language: Language) -> Option<&'static str> {
        if !self.applies_to(language) {
            return None;
        }
        let stem = self.query.as_deref()?.strip_suffix(".scm")?;
        EMBEDDED_QUERIES
            .iter()
            .find(|(lang, op, _)| *lang == language.slug() && *op == stem)
            .map(|(_, _, text)| *text)
    }

    /// Repository-relative location of the query file for `language`.
    pub fn query_path(&self, language: Language) -> Option<String> {
        self.query.as_ref().map(|q| format!("queries/{}/{q}", language.slug()))
    }
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("catalog is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("catalog must list indices 1..=22 exactly once, found {0:?}")]
    Indices(Vec<u8>),
    #[error("operator {index}: {message}")]
    Operator { index: u8, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    ops: Vec<OperatorSpec>,
}

impl Catalog {
    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        let mut ops: Vec<OperatorSpec> = serde_json::from_str(text)?;
        ops.sort_by_key(|o| o.index);
        let indices: Vec<u8> = ops.iter().map(|o| o.index).collect();
        if indices != (1..=22).collect::<Vec<u8>>() {
            return Err(CatalogError::Indices(indices));
        }
        for op in &ops {
            let bad = |message: &str| CatalogError::Operator { index: op.index, message: message.into() };
            let expected_arity = if op.index <= 19 { 1 } else { op.index as usize - 18 };
            if op.arity != expected_arity {
                return Err(bad("arity does not match index"));
            }
            if op.applicability.is_empty() {
                return Err(bad("empty applicability"));
            }
            if op.is_composite() != (op.index >= 20) {
                return Err(bad("only indices 20-22 compose"));
            }
        }
        Ok(Catalog { ops })
    }

    pub fn builtin() -> &'static Catalog {
        static BUILTIN: OnceLock<Catalog> = OnceLock::new();
        BUILTIN.get_or_init(|| Catalog::from_json(BUILTIN_CATALOG).expect("shipped catalog is valid"))
    }

    pub fn builtin_json() -> &'static str {
        BUILTIN_CATALOG
    }

    pub fn get(&self, index: u8) -> Option<&OperatorSpec> {
        self.ops.get(usize::from(index).checked_sub(1)?)
    }

    pub fn operators(&self) -> &[OperatorSpec] {
        &self.ops
    }

    /// Single-line operators (indices 1-19).
    pub fn single_line(&self) -> impl Iterator<Item = &OperatorSpec> {
        self.ops.iter().filter(|o| !o.is_composite())
    }
}
