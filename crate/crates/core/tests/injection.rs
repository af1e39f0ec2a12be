use std::collections::BTreeMap;
use std::path::Path;

use forge_core::dataset::{check_invariants, validate_instance};
use forge_core::ingest::load_source_file;
use forge_core::mutators::{inject_file, Catalog, OperatorSpec};
use forge_core::syntax::GrammarRegistry;
use forge_core::Language;

const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../cli/tests/corpus/inventory/src");

fn all_ops() -> Vec<&'static OperatorSpec> {
    Catalog::builtin().operators().iter().collect()
}

#[test]
fn every_language_yields_valid_instances() {
    let mut per_language = BTreeMap::new();
    for entry in std::fs::read_dir(CORPUS).unwrap() {
        let path = entry.unwrap().path();
        let language = Language::from_path(&path).unwrap();
        let mut file = load_source_file(&path, language).unwrap();
        file.repo = "inventory".into();
        let out = inject_file(&file, &all_ops(), 5, 11);
        for inst in &out.instances {
            assert_eq!(check_invariants(inst), Ok(()), "{} {}", inst.relative_path, inst.subtype_index);
            let outcome = validate_instance(inst);
            assert!(outcome.passed(), "{:?}", outcome.checks);
        }
        per_language.insert(language, out.instances.len());
    }
    assert_eq!(per_language.len(), 8);
    for (language, n) in per_language {
        assert!(n >= 40, "{language}: {n}");
    }
}

#[test]
fn composite_instances_touch_distinct_lines() {
    let path = Path::new(CORPUS).join("ring.c");
    let file = load_source_file(&path, Language::C).unwrap();
    let catalog = Catalog::builtin();
    let ops: Vec<_> = (20..=22).map(|i| catalog.get(i).unwrap()).collect();
    let out = inject_file(&file, &ops, 5, 2);
    assert_eq!(out.instances.len(), 15);
    for inst in &out.instances {
        let mut lines = inst.locations.clone();
        lines.dedup();
        assert_eq!(lines.len(), inst.subtype_index as usize - 18);
    }
}

#[test]
fn every_grammar_parses_its_fixture_cleanly() {
    let registry = GrammarRegistry::shared();
    for entry in std::fs::read_dir(CORPUS).unwrap() {
        let path = entry.unwrap().path();
        let language = Language::from_path(&path).unwrap();
        let src = std::fs::read_to_string(&path).unwrap();
        let tree = registry.parse(&src, language).unwrap();
        assert!(!tree.root().has_error(), "{}", path.display());
    }
}
