//! Versioned JSON report envelope.

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct Report<'a, P: Serialize, R: Serialize> {
    pub schema: u32,
    pub command: &'a str,
    pub params: P,
    pub result: R,
}

/// Pretty-printed JSON with a trailing newline. Field order follows the
/// struct declarations, so equal inputs give byte-identical output.
pub fn to_json<P: Serialize, R: Serialize>(command: &str, params: P, result: R) -> String {
    let report = Report {
        schema: SCHEMA_VERSION,
        command,
        params,
        result,
    };
    let mut out = serde_json::to_string_pretty(&report).expect("reports serialize");
    out.push('\n');
    out
}
