//! Reads model output into [`MappingProposal`]s. Two layouts are
//! understood: a markdown table whose header names the columns, and
//! labeled blocks (`Data Type: ...` followed by the other fields).

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::MappingProposal;
use crate::permission::qualify;
use crate::policy::Prohibition;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no mapping proposals found in response")]
pub struct NoProposalsFound;

/// A row or block that was skipped, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseWarning {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedResponse {
    pub proposals: Vec<MappingProposal>,
    pub warnings: Vec<ParseWarning>,
}

pub fn parse_mapping_response(text: &str, model_id: &str) -> Result<ParsedResponse, NoProposalsFound> {
    let lines: Vec<&str> = text.lines().collect();
    let mut out = ParsedResponse::default();
    parse_tables(&lines, model_id, &mut out);
    if out.proposals.is_empty() {
        parse_labeled(&lines, model_id, &mut out);
    }
    if out.proposals.is_empty() {
        return Err(NoProposalsFound);
    }
    Ok(out)
}

fn strip_markup(s: &str) -> &str {
    s.trim().trim_matches(|c| c == '*' || c == '`' || c == '_').trim()
}

fn parse_prohibition(s: &str) -> Option<Prohibition> {
    let lower = s.to_lowercase();
    if lower.contains("unconditional") {
        Some(Prohibition::Unconditional)
    } else if lower.contains("conditional") {
        Some(Prohibition::Conditional)
    } else {
        None
    }
}

/// Permission-looking tokens: upper-case constants (`READ_SMS`) or dotted
/// names. Prose around them is dropped.
fn permission_tokens(cell: &str) -> Vec<String> {
    let mut out = Vec::new();
    for raw in cell.split(|c: char| c == ',' || c == ';' || c == '/' || c.is_whitespace()) {
        let tok = raw.trim_matches(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '.')).trim_end_matches('.');
        let constant = tok.len() >= 3
            && tok.chars().all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_')
            && tok.starts_with(|c: char| c.is_ascii_uppercase());
        let dotted = tok.contains('.') && crate::permission::is_valid_permission_name(tok);
        if constant || dotted {
            let q = qualify(tok);
            if !out.contains(&q) {
                out.push(q);
            }
        }
    }
    out
}

fn split_row(line: &str) -> Option<Vec<&str>> {
    let t = line.trim();
    if !t.starts_with('|') {
        return None;
    }
    let inner = t.trim_start_matches('|');
    let inner = inner.strip_suffix('|').unwrap_or(inner);
    Some(inner.split('|').map(str::trim).collect())
}

fn is_separator(cells: &[&str]) -> bool {
    cells.iter().all(|c| !c.is_empty() && c.chars().all(|ch| ch == '-' || ch == ':' || ch == ' '))
}

struct Columns {
    data_type: usize,
    prohibition: usize,
    permissions: usize,
    notes: Option<usize>,
}

fn header_columns(cells: &[&str]) -> Option<Columns> {
    let find = |needle: &str| cells.iter().position(|c| strip_markup(c).to_lowercase().contains(needle));
    Some(Columns {
        data_type: find("data type")?,
        prohibition: find("prohibition")?,
        permissions: find("permission")?,
        notes: find("note"),
    })
}

fn build(
    data_type: &str,
    prohibition: &str,
    permissions: &str,
    notes: &str,
    model_id: &str,
    line: usize,
    out: &mut ParsedResponse,
) {
    let data_type = strip_markup(data_type);
    if data_type.is_empty() {
        out.warnings.push(ParseWarning { line, message: "empty data type".into() });
        return;
    }
    let Some(kind) = parse_prohibition(prohibition) else {
        out.warnings.push(ParseWarning { line, message: alloc::format!("unrecognized prohibition {:?}", prohibition.trim()) });
        return;
    };
    let permissions = permission_tokens(permissions);
    let notes = notes.trim().to_string();
    if permissions.is_empty() && notes.is_empty() {
        out.warnings.push(ParseWarning { line, message: alloc::format!("{data_type:?} has no permissions and no notes") });
        return;
    }
    out.proposals.push(MappingProposal {
        data_type: data_type.into(),
        prohibition: kind,
        prohibition_text: strip_markup(prohibition).into(),
        permissions,
        notes,
        model_id: model_id.into(),
    });
}

fn parse_tables(lines: &[&str], model_id: &str, out: &mut ParsedResponse) {
    let mut cols: Option<Columns> = None;
    for (i, line) in lines.iter().enumerate() {
        let Some(cells) = split_row(line) else {
            cols = None;
            continue;
        };
        if is_separator(&cells) {
            continue;
        }
        match &cols {
            None => cols = header_columns(&cells),
            Some(c) => {
                let get = |k: usize| cells.get(k).copied().unwrap_or("");
                let notes = c.notes.map(get).unwrap_or("");
                build(get(c.data_type), get(c.prohibition), get(c.permissions), notes, model_id, i + 1, out);
            }
        }
    }
}

enum Label {
    DataType,
    Prohibition,
    Permissions,
    Notes,
}

fn label_of(line: &str) -> Option<(Label, &str)> {
    let t = line.trim().trim_start_matches(|c: char| c == '-' || c == '*' || c == '#' || c.is_ascii_digit() || c == '.' || c == ' ');
    let (key, value) = t.split_once(':')?;
    let key = strip_markup(key).to_lowercase();
    let value = value.trim().trim_start_matches('*').trim();
    let label = if key.starts_with("data type") {
        Label::DataType
    } else if key.starts_with("prohibition") {
        Label::Prohibition
    } else if key.contains("permission") {
        Label::Permissions
    } else if key.starts_with("note") {
        Label::Notes
    } else {
        return None;
    };
    Some((label, value))
}

fn parse_labeled(lines: &[&str], model_id: &str, out: &mut ParsedResponse) {
    // (line, data type, prohibition, permissions, notes)
    let mut block: Option<(usize, String, String, String, String)> = None;
    let flush = |b: Option<(usize, String, String, String, String)>, out: &mut ParsedResponse| {
        if let Some((line, d, p, perms, n)) = b {
            build(&d, &p, &perms, &n, model_id, line, out);
        }
    };
    for (i, line) in lines.iter().enumerate() {
        let Some((label, value)) = label_of(line) else {
            continue;
        };
        match label {
            Label::DataType => {
                flush(block.take(), out);
                block = Some((i + 1, value.into(), String::new(), String::new(), String::new()));
            }
            Label::Prohibition => {
                if let Some(b) = block.as_mut() {
                    b.2 = value.into();
                }
            }
            Label::Permissions => {
                if let Some(b) = block.as_mut() {
                    b.3 = value.into();
                }
            }
            Label::Notes => {
                if let Some(b) = block.as_mut() {
                    b.4 = value.into();
                }
            }
        }
    }
    flush(block, out);
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE: &str = "\
Some preamble.

| Data Type | Prohibition Type | Android Permission(s) |
|---|---|---|
| File & media | Unconditional | READ_EXTERNAL_STORAGE, WRITE_EXTERNAL_STORAGE |
| Camera | Conditional (one-time) | CAMERA |
| Mystery | sometimes | X_Y |
";

    #[test]
    fn markdown_table() {
        let r = parse_mapping_response(TABLE, "m").unwrap();
        assert_eq!(r.proposals.len(), 2);
        assert_eq!(r.proposals[0].permissions, ["android.permission.READ_EXTERNAL_STORAGE", "android.permission.WRITE_EXTERNAL_STORAGE"]);
        assert_eq!(r.proposals[1].prohibition, Prohibition::Conditional);
        assert_eq!(r.proposals[1].prohibition_text, "Conditional (one-time)");
        assert_eq!(r.warnings.len(), 1);
        assert_eq!(r.warnings[0].line, 7);
    }

    #[test]
    fn labeled_blocks() {
        let text = "\
1. **Data Type:** Contact list
   - **Prohibition Type:** Unconditional
   - **Android Permissions:** `READ_CONTACTS`, `android.permission.GET_ACCOUNTS`
   - **Notes:** none
2. **Data Type:** SMS
   - **Prohibition Type:** Conditional
   - **Android Permissions:** N/A
   - **Notes:** no matching permission in scope
";
        let r = parse_mapping_response(text, "m").unwrap();
        assert_eq!(r.proposals.len(), 2);
        assert_eq!(r.proposals[0].data_type, "Contact list");
        assert_eq!(r.proposals[0].permissions, ["android.permission.READ_CONTACTS", "android.permission.GET_ACCOUNTS"]);
        assert!(r.proposals[1].permissions.is_empty());
        assert_eq!(r.proposals[1].notes, "no matching permission in scope");
    }

    #[test]
    fn nothing_usable() {
        assert_eq!(parse_mapping_response("I cannot help with that.", "m"), Err(NoProposalsFound));
    }
}
