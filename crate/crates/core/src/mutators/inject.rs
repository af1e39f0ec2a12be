use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::catalog::{Catalog, Category, OperatorSpec};
use super::compose::compose_multiple;
use super::rewrite::plan_mutation;
use super::sites::{enumerate_sites, MutationSite};
use super::{FileContext, MutationPlan, SkipReason};
use crate::dataset::BugInstance;
use crate::ingest::SourceFile;
use crate::syntax::{line_count, GrammarRegistry};

/// Composite operators try this many draws per wanted instance.
const COMPOSE_ATTEMPTS_PER_SLOT: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkipRecord {
    pub repo: String,
    pub relative_path: String,
    pub operator: Option<u8>,
    pub line: Option<usize>,
    #[serde(flatten)]
    pub reason: SkipReason,
}

#[derive(Debug, Clone, Default)]
pub struct InjectOutcome {
    pub instances: Vec<BugInstance>,
    pub skips: Vec<SkipRecord>,
}

/// Random stream keyed by (seed, repo, path, operator) so files and operators can be
/// processed in any order or in parallel.
pub fn keyed_rng(seed: u64, repo: &str, relative_path: &str, operator: u8) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    for part in [repo, relative_path] {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part.as_bytes());
    }
    hasher.update([operator]);
    ChaCha8Rng::from_seed(hasher.finalize().into())
}

/// Stable instance id. The buggy lines are hashed too, so two bugs on one line differ.
pub fn instance_id(
    repo: &str,
    relative_path: &str,
    subtype: u8,
    locations: &[usize],
    seed: u64,
    buggy_lines: &[&str],
) -> String {
    let mut hasher = Sha256::new();
    for part in [repo, relative_path] {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part.as_bytes());
    }
    hasher.update([subtype]);
    for l in locations {
        hasher.update((*l as u64).to_le_bytes());
    }
    hasher.update(seed.to_le_bytes());
    for b in buggy_lines {
        hasher.update((b.len() as u64).to_le_bytes());
        hasher.update(b.as_bytes());
    }
    hex::encode(&hasher.finalize()[..16])
}

/// Injects up to `quota` bugs per operator into one file, with the built-in grammars
/// and catalog.
pub fn inject_file(file: &SourceFile, ops: &[&OperatorSpec], quota: usize, seed: u64) -> InjectOutcome {
    inject_file_with(GrammarRegistry::shared(), Catalog::builtin(), file, ops, quota, seed)
}

pub fn inject_file_with(
    registry: &GrammarRegistry,
    catalog: &Catalog,
    file: &SourceFile,
    ops: &[&OperatorSpec],
    quota: usize,
    seed: u64,
) -> InjectOutcome {
    let mut out = InjectOutcome::default();
    let skip = |operator: Option<u8>, line: Option<usize>, reason: SkipReason| SkipRecord {
        repo: file.repo.clone(),
        relative_path: file.relative_path.clone(),
        operator,
        line,
        reason,
    };
    if quota == 0 || ops.is_empty() {
        return out;
    }
    let tree = match registry.parse(&file.content, file.language) {
        Ok(t) => t,
        Err(e) => {
            out.skips.push(skip(None, None, SkipReason::ParseFailed { message: e.to_string() }));
            return out;
        }
    };
    let ctx = FileContext::new(&tree, &file.content);
    let token_count = tree.root().leaf_count();
    let make = |op: &OperatorSpec, plan: &MutationPlan| {
        let buggy_lines: Vec<&str> = plan.records.iter().map(|r| r.buggy_line.as_str()).collect();
        BugInstance {
            id: instance_id(&file.repo, &file.relative_path, op.index, &plan.locations, seed, &buggy_lines),
            repo: file.repo.clone(),
            relative_path: file.relative_path.clone(),
            language: file.language,
            subtype_index: op.index,
            subtype_name: op.name.clone(),
            category: op.category,
            locations: plan.locations.clone(),
            edits: plan.records.clone(),
            original_code: file.content.clone(),
            buggy_code: plan.apply(&file.content),
            token_count,
            line_count: line_count(&file.content),
        }
    };

    let mut ordered: Vec<&OperatorSpec> = ops.to_vec();
    ordered.sort_by_key(|o| o.index);
    ordered.dedup_by_key(|o| o.index);

    let mut table: Option<Vec<(u8, Vec<MutationSite<'_>>)>> = None;
    for op in ordered {
        if !op.applies_to(file.language) {
            out.skips.push(skip(Some(op.index), None, SkipReason::Inapplicable));
            continue;
        }
        let mut rng = keyed_rng(seed, &file.repo, &file.relative_path, op.index);
        let mut seen = BTreeSet::new();
        let mut made = 0;
        if op.is_composite() {
            let table = table.get_or_insert_with(|| single_line_table(registry, catalog, &ctx));
            let n = op.arity;
            let mut last_failure = None;
            for _ in 0..quota * COMPOSE_ATTEMPTS_PER_SLOT {
                match compose_multiple(&ctx, table, n, &mut rng) {
                    Ok(plan) => {
                        let inst = make(op, &plan);
                        if seen.insert(inst.buggy_code.clone()) {
                            out.instances.push(inst);
                            made += 1;
                            if made == quota {
                                break;
                            }
                        }
                    }
                    Err(reason @ SkipReason::InsufficientSites { .. }) if made == 0 => {
                        last_failure = Some(reason);
                        break;
                    }
                    Err(reason) => last_failure = Some(reason),
                }
            }
            if made == 0 {
                out.skips.push(skip(Some(op.index), None, last_failure.unwrap_or(SkipReason::Duplicate)));
            }
            continue;
        }

        let mut sites = match enumerate_sites(&ctx, op, registry) {
            Ok(s) => s,
            Err(e) => {
                out.skips.push(skip(Some(op.index), None, SkipReason::QueryFailed { message: e.to_string() }));
                continue;
            }
        };
        if matches!(op.category, Category::Reference | Category::Logic)
            && file.focus_lines.is_some()
            && sites.iter().any(|s| file.in_focus(s.line()))
        {
            sites.retain(|s| file.in_focus(s.line()));
        }
        if sites.is_empty() {
            out.skips.push(skip(Some(op.index), None, SkipReason::NoSites));
            continue;
        }
        sites.shuffle(&mut rng);
        for site in &sites {
            match plan_mutation(&ctx, site, &mut rng) {
                Ok(plan) => {
                    let inst = make(op, &plan);
                    if !seen.insert(inst.buggy_code.clone()) {
                        out.skips.push(skip(Some(op.index), Some(site.line()), SkipReason::Duplicate));
                        continue;
                    }
                    out.instances.push(inst);
                    made += 1;
                    if made == quota {
                        break;
                    }
                }
                Err(reason) => out.skips.push(skip(Some(op.index), Some(site.line()), reason)),
            }
        }
    }
    out
}

fn single_line_table<'t>(
    registry: &GrammarRegistry,
    catalog: &Catalog,
    ctx: &FileContext<'t>,
) -> Vec<(u8, Vec<MutationSite<'t>>)> {
    catalog
        .single_line()
        .filter(|op| op.applies_to(ctx.language))
        .filter_map(|op| {
            let sites = enumerate_sites(ctx, op, registry).ok()?;
            (!sites.is_empty()).then_some((op.index, sites))
        })
        .collect()
}
