//! Token-stream files: one sequence per line, either as space-separated
//! decimal ids or as a JSON array of ids.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum IdFormat {
    /// `12 7 301`
    Ids,
    /// `[12,7,301]`
    Json,
}

/// Parses every line of `text` as one id sequence. `path` is only used in errors.
pub fn parse_sequences(text: &str, format: IdFormat, path: &Path) -> Result<Vec<Vec<u32>>> {
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            parse_line(line, format).map_err(|msg| Error::Parse {
                path: path.to_owned(),
                line: i + 1,
                msg,
            })
        })
        .collect()
}

fn parse_line(line: &str, format: IdFormat) -> std::result::Result<Vec<u32>, String> {
    match format {
        IdFormat::Ids => line
            .split_ascii_whitespace()
            .map(|t| t.parse::<u32>().map_err(|e| format!("bad id {t:?}: {e}")))
            .collect(),
        IdFormat::Json => {
            if line.trim().is_empty() {
                return Ok(Vec::new());
            }
            serde_json::from_str(line).map_err(|e| e.to_string())
        }
    }
}

pub fn read_sequences(path: &Path, format: IdFormat) -> Result<Vec<Vec<u32>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sequences(&text, format, path)
}

pub fn write_sequence<W: Write>(w: &mut W, ids: &[u32], format: IdFormat) -> std::io::Result<()> {
    match format {
        IdFormat::Ids => {
            for (i, id) in ids.iter().enumerate() {
                if i > 0 {
                    w.write_all(b" ")?;
                }
                write!(w, "{id}")?;
            }
        }
        IdFormat::Json => {
            serde_json::to_writer(&mut *w, ids)?;
        }
    }
    w.write_all(b"\n")
}

pub fn format_sequences(seqs: &[Vec<u32>], format: IdFormat) -> String {
    let mut buf = Vec::new();
    for s in seqs {
        write_sequence(&mut buf, s, format).expect("writing to a Vec cannot fail");
    }
    String::from_utf8(buf).expect("ids are ASCII")
}

/// Total token count across sequences.
pub fn total_tokens(seqs: &[Vec<u32>]) -> u64 {
    seqs.iter().map(|s| s.len() as u64).sum()
}
