//! AST-guided fault injection for multi-language code corpora, plus the kit that
//! prompts, parses and scores debugging answers against the injected ground truth.

pub mod dataset;
pub mod distance;
pub mod evalkit;
pub mod ingest;
pub mod language;
pub mod mutators;
pub mod report;
pub mod syntax;

pub use language::Language;
