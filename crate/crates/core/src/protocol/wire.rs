//! Line-oriented JSON wire format for broadcast records.

use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};

/// One measurement outcome announced to the users.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BroadcastRecord {
    pub session_id: String,
    pub trial: u64,
    /// Outcome index into the state set.
    pub r: usize,
    /// Digest of the state set the outcome refers to.
    pub digest: String,
}

/// Byte offset of a 1-based `(line, column)` position in `text`; column 0
/// (used for end-of-input errors) maps to the start of the line.
pub fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let mut start = 0;
    for (i, l) in text.split_inclusive('\n').enumerate() {
        if i + 1 == line {
            return (start + column.saturating_sub(1)).min(text.len());
        }
        start += l.len();
    }
    text.len()
}

/// Single line, no trailing newline.
pub fn serialize_record(record: &BroadcastRecord) -> String {
    serde_json::to_string(record).expect("serializable")
}

pub fn parse_record(line: &str) -> Result<BroadcastRecord> {
    let line = line.strip_suffix('\n').unwrap_or(line);
    if line.contains('\n') {
        return Err(Error::Parse {
            offset: line.find('\n').expect("contains newline"),
            message: "one record per line".into(),
        });
    }
    serde_json::from_str(line).map_err(|e| Error::Parse {
        offset: byte_offset(line, e.line(), e.column()),
        message: e.to_string(),
    })
}

/// Parses and checks the record against a known set of `outcomes` states
/// with the given digest.
pub fn parse_record_checked(line: &str, digest: &str, outcomes: usize) -> Result<BroadcastRecord> {
    let record = parse_record(line)?;
    if record.digest != digest {
        return Err(Error::Protocol(format!(
            "record digest {} does not match state set {digest}",
            record.digest
        )));
    }
    if record.r >= outcomes {
        return Err(validation(format!(
            "outcome index {} out of range for {outcomes} states",
            record.r
        )));
    }
    Ok(record)
}
