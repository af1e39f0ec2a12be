use serde::{Deserialize, Serialize};

use super::oracle::{patch_lines, ExecutionOracle};
use super::response::ModelResponse;
use crate::dataset::BugInstance;
use crate::distance::similarity;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub instance_id: String,
    pub bi: u8,
    pub obl: u8,
    pub abl: u8,
    pub es: f64,
    pub em: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pass1: Option<u8>,
    #[serde(default)]
    pub parse_failed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_error: Option<String>,
}

pub fn score_bi(truth: &BugInstance, resp: &ModelResponse) -> u8 {
    u8::from(resp.has_error && resp.predicted_subtype == Some(truth.subtype_index))
}

pub fn score_obl(truth: &BugInstance, resp: &ModelResponse) -> u8 {
    u8::from(truth.locations.iter().any(|l| resp.predicted_locations.contains(l)))
}

pub fn score_abl(truth: &BugInstance, resp: &ModelResponse) -> u8 {
    u8::from(
        !truth.locations.is_empty() && truth.locations.iter().all(|l| resp.predicted_locations.contains(l)),
    )
}

/// Mean line similarity over true locations; unlocated lines count 0 and a located
/// line without a repair is scored as left buggy.
pub fn score_es(truth: &BugInstance, resp: &ModelResponse) -> f64 {
    per_line_mean(truth, resp, similarity)
}

/// Fraction of true locations repaired exactly (trailing whitespace ignored).
pub fn score_em(truth: &BugInstance, resp: &ModelResponse) -> f64 {
    per_line_mean(truth, resp, |correct, answer| if correct == answer { 1.0 } else { 0.0 })
}

fn per_line_mean(truth: &BugInstance, resp: &ModelResponse, score: impl Fn(&str, &str) -> f64) -> f64 {
    if truth.locations.is_empty() {
        return 0.0;
    }
    let total: f64 = truth
        .edits
        .iter()
        .filter(|e| resp.predicted_locations.contains(&e.line))
        .map(|e| {
            let answer = resp.repairs.get(&e.line).unwrap_or(&e.buggy_line);
            score(e.original_line.trim_end(), answer.trim_end())
        })
        .sum();
    total / truth.locations.len() as f64
}

/// Applies the repairs on correctly located lines and asks the oracle. `None` when no
/// oracle covers the language.
pub fn score_pass1(
    truth: &BugInstance,
    resp: &ModelResponse,
    oracle: Option<&dyn ExecutionOracle>,
) -> Result<Option<u8>, super::OracleError> {
    let Some(oracle) = oracle.filter(|o| o.supports(truth.language)) else {
        return Ok(None);
    };
    let repairs = resp
        .repairs
        .iter()
        .filter(|(l, _)| truth.locations.contains(l))
        .map(|(l, r)| (*l, r.as_str()));
    let patched = patch_lines(&truth.buggy_code, repairs);
    oracle.run(truth, &patched).map(|ok| Some(u8::from(ok)))
}

pub fn score_instance(
    truth: &BugInstance,
    resp: &ModelResponse,
    oracle: Option<&dyn ExecutionOracle>,
) -> MetricRecord {
    let (pass1, oracle_error) = match score_pass1(truth, resp, oracle) {
        Ok(p) => (p, None),
        Err(e) => (None, Some(e.to_string())),
    };
    MetricRecord {
        instance_id: truth.id.clone(),
        bi: score_bi(truth, resp),
        obl: score_obl(truth, resp),
        abl: score_abl(truth, resp),
        es: score_es(truth, resp),
        em: score_em(truth, resp),
        pass1,
        parse_failed: resp.parse_failed,
        oracle_error,
    }
}

/// The response a model with perfect knowledge of the instance would give.
pub fn ground_truth_response(truth: &BugInstance) -> ModelResponse {
    let repairs = truth.edits.iter().map(|e| (e.line, e.original_line.clone())).collect();
    ModelResponse::new(true, Some(truth.subtype_index), truth.locations.iter().copied(), repairs)
}
