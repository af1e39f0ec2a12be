//! Debugging-task evaluation: prompts, answer parsing, and the BI / OBL / ABL / ES / EM
//! metrics with an optional execution-based Pass@1.

mod metrics;
mod oracle;
mod prompt;
mod response;

pub use metrics::{
    ground_truth_response, score_abl, score_bi, score_em, score_es, score_instance, score_obl,
    score_pass1, MetricRecord,
};
pub use oracle::{patch_lines, CommandOracle, ExecutionOracle, OracleError, ReferenceOracle};
pub use prompt::{build_prompt, PromptBundle, CATALOG_HEADING, CODE_HEADING, INSTRUCTION_HEADING};
pub use response::{parse_response, ModelResponse};

#[cfg(test)]
pub(crate) mod tests {
    use crate::dataset::BugInstance;
    use crate::language::Language;
    use crate::mutators::{Category, EditRecord};

    pub(crate) fn types_instance() -> BugInstance {
        let original =
            std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/types.py")).unwrap();
        let buggy = original.replacen("Channel = NewType(", "Channel = Literal(", 1);
        BugInstance {
            id: "types".into(),
            repo: "procrastinate".into(),
            relative_path: "procrastinate/types.py".into(),
            language: Language::Python,
            subtype_index: 13,
            subtype_name: "wrong function call".into(),
            category: Category::Reference,
            locations: vec![3],
            edits: vec![EditRecord {
                line: 3,
                original_line: "Channel = NewType(\"Channel\", str)".into(),
                buggy_line: "Channel = Literal(\"Channel\", str)".into(),
            }],
            line_count: 27,
            original_code: original,
            buggy_code: buggy,
            token_count: 120,
        }
    }

    /// Double bug on lines 3 and 7.
    pub(crate) fn two_line_instance() -> BugInstance {
        let mut inst = types_instance();
        inst.id = "double".into();
        inst.subtype_index = 20;
        inst.subtype_name = "double bugs".into();
        inst.category = Category::Multiple;
        inst.buggy_code = inst.buggy_code.replacen("JobId = NewType(\"JobId\", int)", "JobId = NewType(\"JobId\" int)", 1);
        inst.locations = vec![3, 7];
        inst.edits.push(EditRecord {
            line: 7,
            original_line: "JobId = NewType(\"JobId\", int)".into(),
            buggy_line: "JobId = NewType(\"JobId\" int)".into(),
        });
        inst
    }

    #[test]
    fn fixtures_are_valid() {
        assert_eq!(crate::dataset::check_invariants(&types_instance()), Ok(()));
        assert_eq!(crate::dataset::check_invariants(&two_line_instance()), Ok(()));
    }
}
