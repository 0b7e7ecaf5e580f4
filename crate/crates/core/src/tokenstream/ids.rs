//! Binding between a concrete tokenizer's integer ids and [`SemanticToken`]s.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SemanticToken;
use crate::bitcodec::PrefixClass;
use crate::error::{Error, Result};

/// Number of ids a vocabulary map reserves: 256 bytes, 256 extended payloads, 3 prefixes.
pub const RESERVED_IDS: u32 = 256 + 256 + 3;

/// On-disk shape of a [`VocabMap`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabMapFile {
    /// Indexed by byte value.
    pub byte_ids: Vec<u32>,
    /// Indexed by `value - 256`.
    pub ext_ids: Vec<u32>,
    /// Ordered p1, p2, p3.
    pub prefix_ids: Vec<u32>,
    /// When present, ids at or above this bound are rejected as unknown.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vocab_size: Option<u32>,
}

/// Reserved-id layout of an augmented tokenizer.
///
/// Every id not claimed by a byte, extended payload or prefix token is a
/// subword id (bounded by `vocab_size` when one is declared).
#[derive(Clone, Debug)]
pub struct VocabMap {
    byte_ids: Vec<u32>,
    ext_ids: Vec<u32>,
    prefix_ids: [u32; 3],
    vocab_size: Option<u32>,
    reverse: HashMap<u32, SemanticToken>,
}

impl PartialEq for VocabMap {
    fn eq(&self, other: &Self) -> bool {
        self.byte_ids == other.byte_ids
            && self.ext_ids == other.ext_ids
            && self.prefix_ids == other.prefix_ids
            && self.vocab_size == other.vocab_size
    }
}

impl Default for VocabMap {
    fn default() -> Self {
        VocabMap::contiguous(0)
    }
}

impl VocabMap {
    /// Bytes at `base..base+256`, extended payloads right after, then p1, p2, p3.
    pub fn contiguous(base: u32) -> Self {
        let file = VocabMapFile {
            byte_ids: (0..256).map(|v| base + v).collect(),
            ext_ids: (0..256).map(|v| base + 256 + v).collect(),
            prefix_ids: (0..3).map(|v| base + 512 + v).collect(),
            vocab_size: None,
        };
        VocabMap::from_file(file).expect("contiguous layout is always valid")
    }

    pub fn from_file(file: VocabMapFile) -> Result<Self> {
        let VocabMapFile {
            byte_ids,
            ext_ids,
            prefix_ids,
            vocab_size,
        } = file;
        if byte_ids.len() != 256 {
            return Err(Error::Vocab(format!(
                "byte_ids must have 256 entries, got {}",
                byte_ids.len()
            )));
        }
        if ext_ids.len() != 256 {
            return Err(Error::Vocab(format!(
                "ext_ids must have 256 entries, got {}",
                ext_ids.len()
            )));
        }
        let prefix_ids: [u32; 3] = prefix_ids.as_slice().try_into().map_err(|_| {
            Error::Vocab(format!(
                "prefix_ids must have 3 entries, got {}",
                prefix_ids.len()
            ))
        })?;

        let tokens = (0..256u16)
            .map(|v| SemanticToken::Byte(v as u8))
            .chain((256..512u16).map(SemanticToken::ExtByte))
            .chain(PrefixClass::ALL.into_iter().map(SemanticToken::Prefix));
        let ids = byte_ids.iter().chain(&ext_ids).chain(&prefix_ids).copied();

        let mut reverse = HashMap::with_capacity(RESERVED_IDS as usize);
        for (id, tok) in ids.zip(tokens) {
            if let Some(limit) = vocab_size {
                if id >= limit {
                    return Err(Error::Vocab(format!(
                        "id {id} for {tok} is outside vocab_size {limit}"
                    )));
                }
            }
            if let Some(prev) = reverse.insert(id, tok) {
                return Err(Error::Vocab(format!(
                    "id {id} assigned to both {prev} and {tok}"
                )));
            }
        }
        Ok(VocabMap {
            byte_ids,
            ext_ids,
            prefix_ids,
            vocab_size,
            reverse,
        })
    }

    pub fn to_file(&self) -> VocabMapFile {
        VocabMapFile {
            byte_ids: self.byte_ids.clone(),
            ext_ids: self.ext_ids.clone(),
            prefix_ids: self.prefix_ids.to_vec(),
            vocab_size: self.vocab_size,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        VocabMap::from_file(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("plain data serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        VocabMap::from_json(&text)
    }

    pub fn vocab_size(&self) -> Option<u32> {
        self.vocab_size
    }

    /// Declares an upper bound on valid ids; reserved ids must lie below it.
    pub fn with_vocab_size(self, size: u32) -> Result<Self> {
        let mut file = self.to_file();
        file.vocab_size = Some(size);
        VocabMap::from_file(file)
    }

    /// Largest id claimed by a reserved token.
    pub fn max_reserved_id(&self) -> u32 {
        *self.reverse.keys().max().expect("map always holds 515 ids")
    }

    /// The reserved token an id stands for, if any.
    pub fn reserved(&self, id: u32) -> Option<SemanticToken> {
        self.reverse.get(&id).copied()
    }

    pub fn id_of(&self, tok: SemanticToken) -> Result<u32> {
        match tok {
            SemanticToken::Byte(v) => Ok(self.byte_ids[usize::from(v)]),
            SemanticToken::ExtByte(v) if (256..512).contains(&v) => {
                Ok(self.ext_ids[usize::from(v - 256)])
            }
            SemanticToken::ExtByte(v) => Err(Error::PayloadOutOfRange(v)),
            SemanticToken::Prefix(p) => Ok(self.prefix_ids[p.index()]),
            SemanticToken::Subword(id) => {
                if let Some(tok) = self.reverse.get(&id) {
                    return Err(Error::Vocab(format!(
                        "subword id {id} collides with reserved {tok}"
                    )));
                }
                self.check_bound(id)?;
                Ok(id)
            }
        }
    }

    pub fn token_of(&self, id: u32) -> Result<SemanticToken> {
        match self.reverse.get(&id) {
            Some(tok) => Ok(*tok),
            None => {
                self.check_bound(id)?;
                Ok(SemanticToken::Subword(id))
            }
        }
    }

    fn check_bound(&self, id: u32) -> Result<()> {
        match self.vocab_size {
            Some(limit) if id >= limit => Err(Error::UnknownId(id)),
            _ => Ok(()),
        }
    }
}

/// Maps semantic tokens to tokenizer ids.
pub fn to_ids(stream: &[SemanticToken], vm: &VocabMap) -> Result<Vec<u32>> {
    stream.iter().map(|&t| vm.id_of(t)).collect()
}

/// Maps tokenizer ids back to semantic tokens.
pub fn from_ids(ids: &[u32], vm: &VocabMap) -> Result<Vec<SemanticToken>> {
    ids.iter().map(|&id| vm.token_of(id)).collect()
}
