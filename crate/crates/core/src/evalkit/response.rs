use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// A model's structured answer.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelResponse {
    pub has_error: bool,
    pub predicted_subtype: Option<u8>,
    /// Sorted and distinct, 1-based.
    pub predicted_locations: Vec<usize>,
    /// Keys are a subset of `predicted_locations`.
    pub repairs: BTreeMap<usize, String>,
    pub raw_text: String,
    pub parse_failed: bool,
}

impl ModelResponse {
    /// The answer a model that never reports anything would give.
    pub fn empty() -> Self {
        ModelResponse { parse_failed: true, ..Default::default() }
    }

    /// Builds a normalized response: locations deduplicated, repairs outside them dropped,
    /// and every prediction cleared when `has_error` is false.
    pub fn new(
        has_error: bool,
        subtype: Option<u8>,
        locations: impl IntoIterator<Item = usize>,
        repairs: BTreeMap<usize, String>,
    ) -> Self {
        if !has_error {
            return ModelResponse::default();
        }
        let locations: BTreeSet<usize> = locations.into_iter().filter(|&l| l > 0).collect();
        let repairs = repairs
            .into_iter()
            .filter(|(l, _)| locations.contains(l))
            .map(|(l, text)| (l, text.trim_end_matches(['\n', '\r']).to_string()))
            .collect();
        ModelResponse {
            has_error,
            predicted_subtype: subtype.filter(|t| (1..=22).contains(t)),
            predicted_locations: locations.into_iter().collect(),
            repairs,
            raw_text: String::new(),
            parse_failed: false,
        }
    }

    /// The fenced JSON answer the prompt asks for.
    pub fn to_answer_text(&self) -> String {
        let repairs: serde_json::Map<String, Value> = self
            .repairs
            .iter()
            .map(|(l, r)| (l.to_string(), Value::String(r.clone())))
            .collect();
        let answer = serde_json::json!({
            "has_error": self.has_error,
            "type": self.predicted_subtype,
            "lines": self.predicted_locations,
            "repairs": repairs,
        });
        format!("```json\n{answer}\n```\n")
    }
}

fn fence_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?s)```[ \t]*([A-Za-z0-9_+#.-]*)[ \t]*\r?\n(.*?)```").unwrap())
}

/// Reads a model answer. Never fails: unusable text yields `parse_failed` and no error.
pub fn parse_response(text: &str) -> ModelResponse {
    let mut resp = fence_re()
        .captures_iter(text)
        .find_map(|c| from_json(c.get(2).map_or("", |m| m.as_str())))
        .or_else(|| from_json(text.trim()))
        .or_else(|| from_loose_text(text))
        .unwrap_or_else(ModelResponse::empty);
    resp.raw_text = text.to_string();
    resp
}

fn from_json(body: &str) -> Option<ModelResponse> {
    let Value::Object(obj) = serde_json::from_str::<Value>(body.trim()).ok()? else {
        return None;
    };
    if !["has_error", "type", "lines"].iter().any(|k| obj.contains_key(*k)) {
        return None;
    }
    let as_uint = |v: &Value| match v {
        Value::Number(n) => n.as_u64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    };
    let subtype = obj.get("type").and_then(as_uint).and_then(|t| u8::try_from(t).ok());
    let lines: Vec<usize> = match obj.get("lines") {
        Some(Value::Array(xs)) => xs.iter().filter_map(as_uint).map(|l| l as usize).collect(),
        Some(v) => as_uint(v).map(|l| vec![l as usize]).unwrap_or_default(),
        None => Vec::new(),
    };
    let repairs: BTreeMap<usize, String> = match obj.get("repairs") {
        Some(Value::Object(m)) => m
            .iter()
            .filter_map(|(k, v)| Some((k.trim().parse().ok()?, v.as_str()?.to_string())))
            .collect(),
        _ => BTreeMap::new(),
    };
    let has_error = match obj.get("has_error") {
        Some(Value::Bool(b)) => *b,
        Some(Value::String(s)) => s.eq_ignore_ascii_case("true"),
        _ => subtype.is_some() || !lines.is_empty(),
    };
    Some(ModelResponse::new(has_error, subtype, lines, repairs))
}

fn from_loose_text(text: &str) -> Option<ModelResponse> {
    static TYPE: OnceLock<Regex> = OnceLock::new();
    static LINES: OnceLock<Regex> = OnceLock::new();
    static REPAIR: OnceLock<Regex> = OnceLock::new();
    let type_re = TYPE.get_or_init(|| Regex::new(r#"(?i)"?\btype"?\s*[:=]\s*(\d+)"#).unwrap());
    let lines_re = LINES.get_or_init(|| Regex::new(r#"(?i)"?\blines"?\s*[:=]\s*\[([\d,\s]*)\]"#).unwrap());
    let repair_re = REPAIR.get_or_init(|| {
        Regex::new(r"(?i)\bline\s+(\d+)\s*:?[ \t]*\r?\n```[^\n]*\n([^\n]*)\r?\n").unwrap()
    });
    let subtype = type_re.captures(text).and_then(|c| c[1].parse::<u8>().ok());
    let lines: Vec<usize> = lines_re
        .captures(text)
        .map(|c| c[1].split(',').filter_map(|s| s.trim().parse().ok()).collect())
        .unwrap_or_default();
    if subtype.is_none() && lines.is_empty() {
        return None;
    }
    let repairs = repair_re
        .captures_iter(text)
        .filter_map(|c| Some((c[1].parse().ok()?, c[2].to_string())))
        .collect();
    Some(ModelResponse::new(true, subtype, lines, repairs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fenced_json_answer() {
        let text = "Here it is.\n```json\n{\"has_error\":true,\"type\":13,\"lines\":[3],\"repairs\":{\"3\":\"Channel = NewType(\\\"Channel\\\", str)\"}}\n```\n";
        let r = parse_response(text);
        assert!(r.has_error && !r.parse_failed);
        assert_eq!(r.predicted_subtype, Some(13));
        assert_eq!(r.predicted_locations, [3]);
        assert_eq!(r.repairs[&3], "Channel = NewType(\"Channel\", str)");
        assert_eq!(r.raw_text, text);
    }

    #[test]
    fn prose_is_a_parse_failure() {
        let r = parse_response("I think the code looks fine, mostly.");
        assert!(r.parse_failed && !r.has_error);
        assert!(r.predicted_locations.is_empty() && r.predicted_subtype.is_none());
    }

    #[test]
    fn lines_are_deduplicated() {
        let r = parse_response("```json\n{\"has_error\":true,\"type\":20,\"lines\":[7,3,3],\"repairs\":{\"9\":\"x\"}}\n```");
        assert_eq!(r.predicted_locations, [3, 7]);
        assert!(r.repairs.is_empty());
    }

    #[test]
    fn no_error_clears_predictions() {
        let r = parse_response("```json\n{\"has_error\":false,\"type\":3,\"lines\":[1]}\n```");
        assert!(!r.has_error && !r.parse_failed);
        assert!(r.predicted_locations.is_empty() && r.predicted_subtype.is_none());
    }

    #[test]
    fn skips_non_answer_blocks() {
        let text = "```python\nx = 1\n```\nthen\n```json\n{\"type\": 2, \"lines\": [1]}\n```";
        let r = parse_response(text);
        assert_eq!((r.has_error, r.predicted_subtype), (true, Some(2)));
    }

    #[test]
    fn loose_fallback() {
        let text = "type: 16\nlines: [4, 9]\nline 4:\n```\n    total = a + b\n```\n";
        let r = parse_response(text);
        assert!(r.has_error && !r.parse_failed);
        assert_eq!(r.predicted_subtype, Some(16));
        assert_eq!(r.predicted_locations, [4, 9]);
        assert_eq!(r.repairs[&4], "    total = a + b");
    }

    #[test]
    fn answer_text_round_trips() {
        let mut repairs = BTreeMap::new();
        repairs.insert(3, "  x = \"q\"  ".to_string());
        let r = ModelResponse::new(true, Some(14), [3], repairs);
        let back = parse_response(&r.to_answer_text());
        assert_eq!(
            (back.has_error, back.predicted_subtype, back.predicted_locations.clone(), back.repairs.clone()),
            (r.has_error, r.predicted_subtype, r.predicted_locations.clone(), r.repairs.clone())
        );
    }
}
