use std::collections::BTreeMap;

use serde::Serialize;

use super::BugInstance;
use crate::language::Language;
use crate::mutators::Category;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LanguageStats {
    pub language: Language,
    pub instances: usize,
    pub avg_tokens: f64,
    pub max_tokens: usize,
    pub avg_lines: f64,
    pub max_lines: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryShare {
    pub category: Category,
    pub instances: usize,
    /// Percent of all instances.
    pub share: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StatsTable {
    pub total: usize,
    pub languages: Vec<LanguageStats>,
    pub categories: Vec<CategoryShare>,
}

impl StatsTable {
    pub fn share(&self, category: Category) -> f64 {
        self.categories
            .iter()
            .find(|c| c.category == category)
            .map(|c| c.share)
            .unwrap_or(0.0)
    }

    /// Markdown rendering, two decimals.
    pub fn to_markdown(&self) -> String {
        let mut out = String::from(
            "| Language | Instances | Avg Tokens | Max Tokens | Avg Lines | Max Lines |\n|---|---:|---:|---:|---:|---:|\n",
        );
        for l in &self.languages {
            out.push_str(&format!(
                "| {} | {} | {:.2} | {} | {:.2} | {} |\n",
                l.language, l.instances, l.avg_tokens, l.max_tokens, l.avg_lines, l.max_lines
            ));
        }
        out.push_str("\n| Category | Instances | Share |\n|---|---:|---:|\n");
        for c in &self.categories {
            out.push_str(&format!("| {} | {} | {:.2} |\n", c.category, c.instances, c.share));
        }
        out
    }
}

/// Per-language size statistics and per-category shares (percent, summing to 100).
pub fn dataset_stats(instances: &[BugInstance]) -> StatsTable {
    if instances.is_empty() {
        return StatsTable::default();
    }
    let mut by_lang: BTreeMap<Language, Vec<&BugInstance>> = BTreeMap::new();
    let mut by_cat: BTreeMap<Category, usize> = BTreeMap::new();
    for inst in instances {
        by_lang.entry(inst.language).or_default().push(inst);
        *by_cat.entry(inst.category).or_default() += 1;
    }
    let languages = by_lang
        .into_iter()
        .map(|(language, xs)| {
            let n = xs.len();
            LanguageStats {
                language,
                instances: n,
                avg_tokens: xs.iter().map(|i| i.token_count as f64).sum::<f64>() / n as f64,
                max_tokens: xs.iter().map(|i| i.token_count).max().unwrap_or(0),
                avg_lines: xs.iter().map(|i| i.line_count as f64).sum::<f64>() / n as f64,
                max_lines: xs.iter().map(|i| i.line_count).max().unwrap_or(0),
            }
        })
        .collect();
    let total = instances.len();
    let categories = by_cat
        .into_iter()
        .map(|(category, count)| CategoryShare {
            category,
            instances: count,
            share: 100.0 * count as f64 / total as f64,
        })
        .collect();
    StatsTable { total, languages, categories }
}
