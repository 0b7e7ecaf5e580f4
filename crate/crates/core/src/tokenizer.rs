//! Greedy longest-match subword tokenizer with UTF-8 byte fallback.
//!
//! Produces realistic baseline streams for the codec without depending on a
//! trained BPE model: at each position the longest vocabulary entry wins, and
//! a position no entry covers falls back to the raw UTF-8 bytes of one scalar.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tokenstream::{SemanticToken, VocabMap, RESERVED_IDS};

#[derive(Clone, Debug, Default)]
pub struct SubwordVocab {
    entries: HashMap<String, u32>,
    surfaces: HashMap<u32, String>,
    max_len: usize,
    map: VocabMap,
}

impl SubwordVocab {
    /// A vocabulary with no subwords: every character falls back to bytes.
    pub fn byte_only() -> Self {
        SubwordVocab::default()
    }

    /// Builds a vocabulary from explicit `(surface, id)` pairs.
    pub fn from_entries<I, S>(entries: I, map: VocabMap) -> Result<Self>
    where
        I: IntoIterator<Item = (S, u32)>,
        S: Into<String>,
    {
        let mut vocab = SubwordVocab {
            map,
            ..SubwordVocab::default()
        };
        for (surface, id) in entries {
            vocab.insert(surface.into(), id)?;
        }
        Ok(vocab)
    }

    /// Parses the plain-text format: one surface form per line, id = line
    /// index + offset, where the offset is one past the largest reserved id.
    /// Blank lines are skipped but still consume an id.
    pub fn from_lines(text: &str, map: VocabMap) -> Result<Self> {
        let offset = map.max_reserved_id() + 1;
        let mut vocab = SubwordVocab {
            map,
            ..SubwordVocab::default()
        };
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let id = u32::try_from(i)
                .ok()
                .and_then(|i| i.checked_add(offset))
                .ok_or_else(|| Error::Vocab("subword vocabulary too large".into()))?;
            vocab.insert(line.to_owned(), id)?;
        }
        Ok(vocab)
    }

    pub fn load(path: impl AsRef<Path>, map: VocabMap) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SubwordVocab::from_lines(&text, map)
    }

    fn insert(&mut self, surface: String, id: u32) -> Result<()> {
        if surface.is_empty() {
            return Err(Error::Vocab(format!("empty surface string for id {id}")));
        }
        if let Some(tok) = self.map.reserved(id) {
            return Err(Error::Vocab(format!(
                "subword {surface:?} uses id {id} reserved for {tok}"
            )));
        }
        if let Some(limit) = self.map.vocab_size() {
            if id >= limit {
                return Err(Error::Vocab(format!(
                    "subword {surface:?} id {id} is outside vocab_size {limit}"
                )));
            }
        }
        if self.surfaces.contains_key(&id) {
            return Err(Error::Vocab(format!("duplicate subword id {id}")));
        }
        if self.entries.contains_key(&surface) {
            return Err(Error::Vocab(format!("duplicate subword {surface:?}")));
        }
        self.max_len = self.max_len.max(surface.len());
        self.surfaces.insert(id, surface.clone());
        self.entries.insert(surface, id);
        Ok(())
    }

    pub fn map(&self) -> &VocabMap {
        &self.map
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn id(&self, surface: &str) -> Option<u32> {
        self.entries.get(surface).copied()
    }

    pub fn surface(&self, id: u32) -> Option<&str> {
        self.surfaces.get(&id).map(String::as_str)
    }

    /// Subwords plus the 256 byte-fallback tokens.
    pub fn baseline_vocab_size(&self) -> usize {
        self.len() + 256
    }

    /// Baseline vocabulary plus 256 extended payloads and 3 prefix tokens.
    pub fn augmented_vocab_size(&self) -> usize {
        self.len() + RESERVED_IDS as usize
    }

    fn longest_match(&self, rest: &str) -> Option<(usize, u32)> {
        if self.max_len == 0 {
            return None;
        }
        let mut end = self.max_len.min(rest.len());
        while end > 0 {
            if rest.is_char_boundary(end) {
                if let Some(&id) = self.entries.get(&rest[..end]) {
                    return Some((end, id));
                }
            }
            end -= 1;
        }
        None
    }
}

/// Tokenizes text into a baseline stream of subword and byte tokens.
pub fn tokenize(text: &str, v: &SubwordVocab) -> Vec<SemanticToken> {
    let mut out = Vec::with_capacity(text.len());
    let mut pos = 0;
    while pos < text.len() {
        let rest = &text[pos..];
        if let Some((len, id)) = v.longest_match(rest) {
            out.push(SemanticToken::Subword(id));
            pos += len;
        } else {
            let ch = rest.chars().next().expect("pos is a char boundary");
            let len = ch.len_utf8();
            out.extend(
                rest.as_bytes()[..len]
                    .iter()
                    .map(|&b| SemanticToken::Byte(b)),
            );
            pos += len;
        }
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Detokenized {
    pub text: String,
    /// Invalid UTF-8 byte spans, each replaced by U+FFFD.
    pub invalid_spans: usize,
}

fn flush_bytes(buf: &mut Vec<u8>, out: &mut Detokenized) {
    for chunk in buf.utf8_chunks() {
        out.text.push_str(chunk.valid());
        if !chunk.invalid().is_empty() {
            out.text.push(char::REPLACEMENT_CHARACTER);
            out.invalid_spans += 1;
        }
    }
    buf.clear();
}

/// Turns a baseline stream back into text.
pub fn detokenize(stream: &[SemanticToken], v: &SubwordVocab) -> Result<Detokenized> {
    let mut out = Detokenized::default();
    let mut buf = Vec::new();
    for (i, &tok) in stream.iter().enumerate() {
        match tok {
            SemanticToken::Byte(b) => buf.push(b),
            SemanticToken::Subword(id) => {
                flush_bytes(&mut buf, &mut out);
                let surface = v.surface(id).ok_or(Error::UnknownId(id))?;
                out.text.push_str(surface);
            }
            _ => return Err(Error::NotBaseline { position: i }),
        }
    }
    flush_bytes(&mut buf, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use SemanticToken::{Byte, Subword};

    fn toy() -> SubwordVocab {
        SubwordVocab::from_entries(
            [("ab", 600), ("a", 601), ("abc", 602), ("한", 603)],
            VocabMap::default(),
        )
        .unwrap()
    }

    #[test]
    fn korean_falls_back_to_bytes() {
        let toks = tokenize("철저히", &SubwordVocab::byte_only());
        let expect: Vec<_> = [0xEC, 0xB2, 0xA0, 0xEC, 0xA0, 0x80, 0xED, 0x9E, 0x88]
            .into_iter()
            .map(Byte)
            .collect();
        assert_eq!(toks, expect);
    }

    #[test]
    fn empty_text() {
        assert!(tokenize("", &toy()).is_empty());
    }

    #[test]
    fn longest_match_wins() {
        let v = SubwordVocab::from_entries([("ab", 7)], VocabMap::contiguous(100)).unwrap();
        assert_eq!(tokenize("ab", &v), vec![Subword(7)]);
        let v = toy();
        assert_eq!(tokenize("abcab", &v), vec![Subword(602), Subword(600)]);
        assert_eq!(tokenize("ax", &v), vec![Subword(601), Byte(b'x')]);
        assert_eq!(tokenize("한국", &v)[0], Subword(603));
    }

    #[test]
    fn detokenize_bytes() {
        let v = SubwordVocab::byte_only();
        let d = detokenize(&[Byte(0xEC), Byte(0xB2), Byte(0xA0)], &v).unwrap();
        assert_eq!(d.text, "철");
        assert_eq!(d.invalid_spans, 0);
        let d = detokenize(&[Byte(0xE4)], &v).unwrap();
        assert_eq!(d.text, "\u{FFFD}");
        assert_eq!(d.invalid_spans, 1);
    }

    #[test]
    fn detokenize_unknown_subword() {
        assert!(matches!(
            detokenize(&[Subword(9999)], &toy()),
            Err(Error::UnknownId(9999))
        ));
    }

    #[test]
    fn round_trip_mixed() {
        let v = toy();
        let text = "abc 한국어 ab\r\n😀 é a";
        assert_eq!(detokenize(&tokenize(text, &v), &v).unwrap().text, text);
    }

    #[test]
    fn plain_text_vocab_ids() {
        let v = SubwordVocab::from_lines("the\n\nof\r\nand\n", VocabMap::default()).unwrap();
        assert_eq!(v.id("the"), Some(515));
        assert_eq!(v.id("of"), Some(517));
        assert_eq!(v.id("and"), Some(518));
        assert_eq!(v.len(), 3);
        assert_eq!(v.augmented_vocab_size(), 518);
    }

    #[test]
    fn vocab_rejects_collisions() {
        assert!(SubwordVocab::from_lines("a\na\n", VocabMap::default()).is_err());
        assert!(SubwordVocab::from_entries([("x", 3)], VocabMap::default()).is_err());
        assert!(SubwordVocab::from_entries([("", 900)], VocabMap::default()).is_err());
        assert!(SubwordVocab::from_entries([("x", 900), ("y", 900)], VocabMap::default()).is_err());
    }
}
