use serde::Serialize;

use crate::dataset::BugInstance;
use crate::mutators::{Catalog, CATALOG_VERSION};
use crate::syntax::split_lines;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PromptBundle {
    pub instance_id: String,
    pub prompt_text: String,
    pub subtype_catalog_version: String,
    /// Code tokens plus whitespace-separated words of the surrounding text.
    pub token_estimate: usize,
}

pub const CODE_HEADING: &str = "## Code";
pub const CATALOG_HEADING: &str = "## Error types";
pub const INSTRUCTION_HEADING: &str = "## Instructions";

const INSTRUCTIONS: &str = "\
The code above may contain bugs of the types listed. Each line is prefixed with its
1-based line number and a `|` separator; the prefix is not part of the code.

1. Decide whether the code contains an error.
2. If it does, give the error type number from the list, the line numbers of every
   erroneous line, and for each of those lines the full corrected line.

Answer with exactly one fenced code block tagged `json` in this form:

```json
{\"has_error\": true, \"type\": 13, \"lines\": [3], \"repairs\": {\"3\": \"<full corrected line 3>\"}}
```

Keep the original indentation in repaired lines. If there is no error, answer
`{\"has_error\": false, \"type\": null, \"lines\": [], \"repairs\": {}}`.
";

/// Code, the subtype catalog, then the instructions, in that order.
pub fn build_prompt(inst: &BugInstance, catalog: &Catalog) -> PromptBundle {
    let lines = split_lines(&inst.buggy_code);
    let width = lines.len().max(1).to_string().len();
    let mut code = String::new();
    for (i, line) in lines.iter().enumerate() {
        code.push_str(&format!("{:>width$} | {line}\n", i + 1));
    }

    let mut types = String::new();
    for op in catalog.operators() {
        types.push_str(&format!("{}. {} ({}): {}\n", op.index, op.name, op.category, op.description));
    }

    let head = format!("{CODE_HEADING}\n\nFile: {}\n\n```{}\n", inst.relative_path, inst.language.fence_tag());
    let middle = format!("```\n\n{CATALOG_HEADING}\n\n{types}\n{INSTRUCTION_HEADING}\n\n");
    let prompt_text = format!("{head}{code}{middle}{INSTRUCTIONS}");

    let words = |s: &str| s.split_whitespace().count();
    let token_estimate = inst.token_count + words(&head) + words(&middle) + words(INSTRUCTIONS) + lines.len();
    PromptBundle {
        instance_id: inst.id.clone(),
        prompt_text,
        subtype_catalog_version: CATALOG_VERSION.to_string(),
        token_estimate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalkit::tests::types_instance;

    #[test]
    fn sections_in_order_with_every_subtype() {
        let inst = types_instance();
        let p = build_prompt(&inst, Catalog::builtin());
        let code = p.prompt_text.find(CODE_HEADING).unwrap();
        let types = p.prompt_text.find(CATALOG_HEADING).unwrap();
        let instr = p.prompt_text.find(INSTRUCTION_HEADING).unwrap();
        assert!(code < types && types < instr);
        for op in Catalog::builtin().operators() {
            assert!(p.prompt_text[types..instr].contains(&op.name), "{}", op.name);
        }
        assert!(p.prompt_text[code..types].contains(" 3 | Channel = Literal(\"Channel\", str)\n"));
        assert!(p.prompt_text.contains("```python\n"));
    }

    #[test]
    fn deterministic_and_counts_code_tokens() {
        let inst = types_instance();
        let a = build_prompt(&inst, Catalog::builtin());
        let b = build_prompt(&inst, Catalog::builtin());
        assert_eq!(a, b);
        assert!(a.token_estimate >= inst.token_count);
        assert_eq!(a.subtype_catalog_version, CATALOG_VERSION);
    }
}
