//! Bit-stable document rendering: shortest round-trip float text, CSV
//! assembly with the format-version/config header comments, and the JSON
//! envelope shared by all summary commands.

use crate::config::EffectiveConfig;

/// Format version stamped into every document this binary emits.
pub const FORMAT_VERSION: u32 = 1;

/// Shortest decimal text that parses back to exactly `x`. Non-finite
/// values render as `NaN` / `inf` / `-inf` (they never appear in config
/// embeds, only in data cells where a diagnostic is undefined).
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        (if x > 0.0 { "inf" } else { "-inf" }).to_string()
    } else {
        ryu::Buffer::new().format_finite(x).to_string()
    }
}

/// The two header comment lines shared by every CSV document. The config
/// is serialized with sorted keys, matching the JSON envelope.
pub fn csv_header(config: &EffectiveConfig) -> Vec<String> {
    let value = serde_json::to_value(config).expect("config has no non-finite numbers");
    vec![
        format!("# format-version: {FORMAT_VERSION}"),
        format!(
            "# config: {}",
            serde_json::to_string(&value).expect("JSON value serializes")
        ),
    ]
}

/// Assemble a CSV document: header comments, column header, data rows,
/// and commented footer lines. Always newline-terminated, `\n` only.
pub fn csv_document(
    config: &EffectiveConfig,
    columns: &str,
    rows: Vec<String>,
    footers: Vec<String>,
) -> String {
    let mut lines = csv_header(config);
    lines.push(columns.to_string());
    lines.extend(rows);
    lines.extend(footers);
    let mut text = lines.join("\n");
    text.push('\n');
    text
}

/// Assemble a JSON document: `format_version` and `config` plus the
/// payload entries, all keys sorted, pretty-printed, newline-terminated.
pub fn json_document(
    config: &EffectiveConfig,
    payload: Vec<(&str, serde_json::Value)>,
) -> String {
    let mut map = serde_json::Map::new();
    map.insert(
        "format_version".to_string(),
        serde_json::Value::from(FORMAT_VERSION),
    );
    map.insert(
        "config".to_string(),
        serde_json::to_value(config).expect("config has no non-finite numbers"),
    );
    for (key, value) in payload {
        map.insert(key.to_string(), value);
    }
    let mut text = serde_json::to_string_pretty(&serde_json::Value::Object(map))
        .expect("JSON value serializes");
    text.push('\n');
    text
}
