use std::collections::BTreeSet;

use rand::Rng;

use super::rewrite::plan_mutation;
use super::sites::MutationSite;
use super::{FileContext, MutationPlan, SkipReason};

/// Single-line sites grouped by operator index (1-19), ascending.
pub type SiteTable<'t> = [(u8, Vec<MutationSite<'t>>)];

/// Combines `n` single-line bugs on `n` distinct lines. Component operators are drawn
/// uniformly among those that still have a site on an unused line.
pub fn compose_multiple<R: Rng + ?Sized>(
    ctx: &FileContext<'_>,
    table: &SiteTable<'_>,
    n: usize,
    rng: &mut R,
) -> Result<MutationPlan, SkipReason> {
    let available = table
        .iter()
        .flat_map(|(_, sites)| sites.iter().map(|s| s.line()))
        .collect::<BTreeSet<_>>()
        .len();
    if available < n {
        return Err(SkipReason::InsufficientSites { needed: n, available });
    }
    let mut used_lines = BTreeSet::new();
    let mut rejected = BTreeSet::new();
    let mut parts: Vec<MutationPlan> = Vec::with_capacity(n);
    while parts.len() < n {
        let open: Vec<(usize, Vec<usize>)> = table
            .iter()
            .enumerate()
            .map(|(t, (_, sites))| {
                let free = (0..sites.len())
                    .filter(|&i| !used_lines.contains(&sites[i].line()) && !rejected.contains(&(t, i)))
                    .collect::<Vec<_>>();
                (t, free)
            })
            .filter(|(_, free)| !free.is_empty())
            .collect();
        if open.is_empty() {
            return Err(SkipReason::InsufficientSites { needed: n, available: parts.len() });
        }
        let (t, free) = &open[rng.gen_range(0..open.len())];
        let i = free[rng.gen_range(0..free.len())];
        let site = &table[*t].1[i];
        match plan_mutation(ctx, site, rng) {
            Ok(plan) => {
                used_lines.insert(site.line());
                parts.push(plan);
            }
            Err(_) => {
                rejected.insert((*t, i));
            }
        }
    }
    parts.sort_by_key(|p| p.locations[0]);
    Ok(MutationPlan {
        operator: 18 + n as u8,
        edits: parts.iter().flat_map(|p| p.edits.clone()).collect(),
        records: parts.iter().flat_map(|p| p.records.clone()).collect(),
        locations: parts.iter().map(|p| p.locations[0]).collect(),
        components: parts.iter().map(|p| p.operator).collect(),
    })
}
