use rand::seq::SliceRandom;
use rand::Rng;

use super::pool::IdentKind;
use super::sites::{argument_class, comment_delimiter, ArgClass, MutationSite};
use super::{EditRecord, FileContext, MutationPlan, PlannedEdit, SkipReason};
use crate::language::Language;

/// Literals a constant condition may become, per language: (true, false).
pub const CONDITION_LITERALS: &[(Language, &str, &str)] = &[
    (Language::C, "1", "0"),
    (Language::CSharp, "true", "false"),
    (Language::Go, "true", "false"),
    (Language::Java, "true", "false"),
    (Language::JavaScript, "true", "false"),
    (Language::Python, "True", "False"),
    (Language::Ruby, "true", "false"),
    (Language::Rust, "true", "false"),
];

const LETTERS: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";
const RETRIES: usize = 8;

/// Draws the operator's rewrite for `site` and turns it into a one-line plan.
pub fn plan_mutation<R: Rng + ?Sized>(
    ctx: &FileContext<'_>,
    site: &MutationSite<'_>,
    rng: &mut R,
) -> Result<MutationPlan, SkipReason> {
    let original = &ctx.source[site.region.clone()];
    let replacement = match site.operator {
        1 => "=".to_string(),
        2 => "==".to_string(),
        3..=8 => String::new(),
        9 => {
            let options: &[&str] = match comment_delimiter(site.target.text(ctx.source)) {
                Some("#") => &["", "//"],
                Some(_) => &["", "#"],
                None => return Err(SkipReason::NoChange),
            };
            options.choose(rng).expect("non-empty").to_string()
        }
        10 => substitute(ctx, original, &[IdentKind::Variable], rng)?,
        11 => substitute(ctx, original, &[IdentKind::Module, IdentKind::Class, IdentKind::Function], rng)?,
        12 => substitute(ctx, original, &[IdentKind::Class], rng)?,
        13 => substitute(ctx, original, &[IdentKind::Function], rng)?,
        14 => mutate_argument(ctx, original, rng)?,
        15 => format!("({original})/0"),
        16 => match original {
            "+" => "-",
            "-" => "+",
            "*" => "/",
            "/" => "*",
            "+=" => "-=",
            "-=" => "+=",
            "*=" => "/=",
            "/=" => "*=",
            _ => return Err(SkipReason::NoChange),
        }
        .to_string(),
        17 => {
            let side = if rng.gen_bool(0.5) { "left" } else { "right" };
            let operand = site.target.child_by_field(side).ok_or(SkipReason::NoChange)?;
            operand.text(ctx.source).to_string()
        }
        18 => match original {
            "&&" => "||",
            "||" => "&&",
            "and" => "or",
            "or" => "and",
            _ => return Err(SkipReason::NoChange),
        }
        .to_string(),
        19 => {
            let (_, t, f) = CONDITION_LITERALS
                .iter()
                .find(|(l, _, _)| *l == ctx.language)
                .expect("every language has condition literals");
            if rng.gen_bool(0.5) { t } else { f }.to_string()
        }
        _ => return Err(SkipReason::Inapplicable),
    };
    plan_replacement(ctx, site, &replacement)
}

/// One-line plan replacing the site's region with `replacement`.
pub fn plan_replacement(
    ctx: &FileContext<'_>,
    site: &MutationSite<'_>,
    replacement: &str,
) -> Result<MutationPlan, SkipReason> {
    let row = ctx.index.row_range(site.span.start_row).expect("site row exists");
    let original_line = &ctx.source[row.clone()];
    let buggy_line = format!(
        "{}{replacement}{}",
        &ctx.source[row.start..site.region.start],
        &ctx.source[site.region.end..row.end]
    );
    if buggy_line == original_line {
        return Err(SkipReason::NoChange);
    }
    let limit = 2 * ctx.max_line_chars();
    let chars = buggy_line.chars().count();
    if chars > limit {
        return Err(SkipReason::LineTooLong { chars, limit });
    }
    let line = site.line();
    Ok(MutationPlan {
        operator: site.operator,
        edits: vec![PlannedEdit {
            span: site.span,
            byte_range: site.region.clone(),
            replacement: replacement.to_string(),
        }],
        records: vec![EditRecord { line, original_line: original_line.to_string(), buggy_line }],
        locations: vec![line],
        components: vec![site.operator],
    })
}

fn substitute<R: Rng + ?Sized>(
    ctx: &FileContext<'_>,
    original: &str,
    preferred: &[IdentKind],
    rng: &mut R,
) -> Result<String, SkipReason> {
    ctx.pool.pick_substitute(original, preferred, rng).ok_or(SkipReason::NoCandidate)
}

fn mutate_argument<R: Rng + ?Sized>(
    ctx: &FileContext<'_>,
    original: &str,
    rng: &mut R,
) -> Result<String, SkipReason> {
    let class = argument_class(original).ok_or(SkipReason::NoChange)?;
    if class == ArgClass::Identifier {
        return substitute(ctx, original, &[IdentKind::Variable], rng);
    }
    for _ in 0..RETRIES {
        let candidate = match class {
            ArgClass::Number => random_number_like(original, rng),
            ArgClass::Str(q) => {
                let len = original.chars().count() - 2;
                let body: String = (0..len).map(|_| *LETTERS.choose(rng).expect("non-empty") as char).collect();
                format!("{q}{body}{q}")
            }
            ArgClass::Identifier => unreachable!(),
        };
        if candidate != original {
            return Ok(candidate);
        }
    }
    Err(SkipReason::NoChange)
}

/// Same shape as `original` (digits and an optional dot), leading digit never zero.
fn random_number_like<R: Rng + ?Sized>(original: &str, rng: &mut R) -> String {
    original
        .chars()
        .enumerate()
        .map(|(i, c)| match c {
            '.' => '.',
            _ if i == 0 => char::from(b'0' + rng.gen_range(1..=9)),
            _ => char::from(b'0' + rng.gen_range(0..=9)),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mutators::{enumerate_sites, Catalog, IdentifierPool};
    use crate::syntax::GrammarRegistry;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn first_plan(src: &str, lang: Language, op: u8, seed: u64) -> MutationPlan {
        let registry = GrammarRegistry::shared();
        let tree = registry.parse(src, lang).unwrap();
        let ctx = FileContext::new(&tree, src);
        let sites = enumerate_sites(&ctx, Catalog::builtin().get(op).unwrap(), registry).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        plan_mutation(&ctx, &sites[0], &mut rng).unwrap()
    }

    fn buggy(src: &str, lang: Language, op: u8) -> String {
        first_plan(src, lang, op, 7).records[0].buggy_line.clone()
    }

    #[test]
    fn types_substitution_reproduces_buggy_line() {
        let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/types.py"))
            .unwrap();
        let registry = GrammarRegistry::shared();
        let tree = registry.parse(&src, Language::Python).unwrap();
        let ctx = FileContext::new(&tree, &src);
        let sites = enumerate_sites(&ctx, Catalog::builtin().get(13).unwrap(), registry).unwrap();
        let plan = plan_replacement(&ctx, &sites[0], "Literal").unwrap();
        assert_eq!(plan.records[0].buggy_line, "Channel = Literal(\"Channel\", str)");
        assert_eq!(plan.locations, [3]);
        let expected = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/tests/fixtures/types_buggy.py"
        ))
        .unwrap();
        assert_eq!(plan.apply(&src), expected);
    }

    #[test]
    fn token_rewrites() {
        assert_eq!(buggy("if a == b:\n    pass\n", Language::Python, 1), "if a = b:");
        assert_eq!(buggy("x = 1\n", Language::Python, 2), "x == 1");
        assert_eq!(buggy("f(a)\n", Language::Python, 3), "f(a");
        assert_eq!(buggy("int x;\n", Language::C, 8), "int x");
    }

    #[test]
    fn logic_rewrites() {
        assert_eq!(buggy("x = a+b\n", Language::Python, 15), "x = (a+b)/0");
        assert_eq!(buggy("x = a + b\n", Language::Python, 16), "x = a - b");
        let dropped = buggy("x = a + b\n", Language::Python, 17);
        assert!(dropped == "x = a" || dropped == "x = b", "{dropped}");
        assert_eq!(
            buggy("function f(a, b) { if (a || b) { return 1; } }\n", Language::JavaScript, 18),
            "function f(a, b) { if (a && b) { return 1; } }"
        );
        let c = "int f(int a, int b) {\n  if (a > b) return 1;\n  return 0;\n}\n";
        let line = buggy(c, Language::C, 19);
        assert!(line == "  if (1) return 1;" || line == "  if (0) return 1;", "{line}");
        let java = "class A { int f(int a, int b) { if (a > b) { return 1; } return 0; } }\n";
        for seed in 0..4 {
            let line = first_plan(java, Language::Java, 19, seed).records[0].buggy_line.clone();
            assert!(line.contains("if (true)") || line.contains("if (false)"), "{line}");
        }
    }

    #[test]
    fn argument_rewrites_keep_length() {
        for seed in 0..20 {
            let plan = first_plan("f(1234)\n", Language::Python, 14, seed);
            let new = &plan.edits[0].replacement;
            assert_eq!(new.len(), 4);
            assert!(!new.starts_with('0') && new != "1234");
            let plan = first_plan("f(\"abc\")\n", Language::Python, 14, seed);
            let new = &plan.edits[0].replacement;
            assert_eq!(new.len(), 5);
            assert!(new.starts_with('"') && new.ends_with('"') && new != "\"abc\"");
        }
    }

    #[test]
    fn annotation_rewrites() {
        for seed in 0..10 {
            let line = first_plan("x = 1  # note\n", Language::Python, 9, seed).records[0].buggy_line.clone();
            assert!(line == "x = 1   note" || line == "x = 1  // note", "{line}");
        }
    }

    #[test]
    fn pool_without_candidates_is_a_skip() {
        let src = "def f():\n    return f\n";
        let registry = GrammarRegistry::shared();
        let tree = registry.parse(src, Language::Python).unwrap();
        let mut ctx = FileContext::new(&tree, src);
        let sites = enumerate_sites(&ctx, Catalog::builtin().get(10).unwrap(), registry).unwrap();
        ctx.pool = IdentifierPool::from_names([("f", IdentKind::Function)]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(plan_mutation(&ctx, &sites[0], &mut rng), Err(SkipReason::NoCandidate));
    }

    #[test]
    fn overlong_lines_are_rejected() {
        let src = "x = a+b\n";
        let registry = GrammarRegistry::shared();
        let tree = registry.parse(src, Language::Python).unwrap();
        let ctx = FileContext::new(&tree, src);
        let sites = enumerate_sites(&ctx, Catalog::builtin().get(15).unwrap(), registry).unwrap();
        let long = "y".repeat(20);
        assert!(matches!(
            plan_replacement(&ctx, &sites[0], &long),
            Err(SkipReason::LineTooLong { limit: 14, .. })
        ));
    }
}
