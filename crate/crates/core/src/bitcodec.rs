//! Bit-level repacking of a single 3-byte UTF-8 character.
//!
//! A character `b1 b2 b3` with lead byte in `E4..=EF` is split on a
//! 6 / 9 / 9 bit boundary instead of 8 / 8 / 8:
//!
//! ```text
//!   b1        b2        b3
//!   111001 01 1011110 0 10010111
//!   ^^^^^^ ^^ ^^^^^^^ ^ ^^^^^^^^
//!   prefix   hi        lo
//! ```
//!
//! The top six bits of every eligible lead byte take one of three values
//! (`0x39`, `0x3A`, `0x3B`), so they can be carried by a shared prefix token
//! while the remaining 18 bits travel as two 9-bit payload tokens.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest value a 9-bit payload can hold.
pub const PAYLOAD_MAX: u16 = 0x1FF;

/// One of the three shared 6-bit lead-byte prefixes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PrefixClass {
    /// Lead bytes `E4..=E7` (most CJK unified ideographs).
    P1,
    /// Lead bytes `E8..=EB` (remaining ideographs, start of Hangul).
    P2,
    /// Lead bytes `EC..=EF` (Hangul syllables, compatibility and fullwidth forms).
    P3,
}

impl PrefixClass {
    pub const ALL: [PrefixClass; 3] = [PrefixClass::P1, PrefixClass::P2, PrefixClass::P3];

    /// The 6-bit value shared by every lead byte of this class.
    pub const fn bits6(self) -> u8 {
        match self {
            PrefixClass::P1 => 0x39,
            PrefixClass::P2 => 0x3A,
            PrefixClass::P3 => 0x3B,
        }
    }

    pub const fn from_bits6(bits: u8) -> Option<PrefixClass> {
        match bits {
            0x39 => Some(PrefixClass::P1),
            0x3A => Some(PrefixClass::P2),
            0x3B => Some(PrefixClass::P3),
            _ => None,
        }
    }

    /// Position in [`PrefixClass::ALL`].
    pub const fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for PrefixClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrefixClass::P1 => f.write_str("p1"),
            PrefixClass::P2 => f.write_str("p2"),
            PrefixClass::P3 => f.write_str("p3"),
        }
    }
}

/// A repacked character: 6-bit prefix plus two 9-bit payloads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PackedChar {
    prefix: PrefixClass,
    hi: u16,
    lo: u16,
}

impl PackedChar {
    /// Builds a packed character from its parts, rejecting payloads wider than 9 bits.
    pub fn new(prefix: PrefixClass, hi: u16, lo: u16) -> Result<Self> {
        for v in [hi, lo] {
            if v > PAYLOAD_MAX {
                return Err(Error::PayloadOutOfRange(v));
            }
        }
        Ok(PackedChar { prefix, hi, lo })
    }

    pub fn prefix(&self) -> PrefixClass {
        self.prefix
    }

    pub fn hi(&self) -> u16 {
        self.hi
    }

    pub fn lo(&self) -> u16 {
        self.lo
    }
}

#[inline]
pub const fn is_continuation(b: u8) -> bool {
    b & 0xC0 == 0x80
}

/// Returns the prefix class of a lead byte, or `None` outside `E4..=EF`.
#[inline]
pub const fn classify_lead_byte(b: u8) -> Option<PrefixClass> {
    match b {
        0xE4..=0xEF => PrefixClass::from_bits6(b >> 2),
        _ => None,
    }
}

/// True when `(b1, b2, b3)` can be repacked.
#[inline]
pub const fn is_eligible(b1: u8, b2: u8, b3: u8) -> bool {
    classify_lead_byte(b1).is_some() && is_continuation(b2) && is_continuation(b3)
}

/// Repacks an eligible 3-byte character into prefix + two 9-bit payloads.
pub fn pack_char(b1: u8, b2: u8, b3: u8) -> Result<PackedChar> {
    let prefix = match classify_lead_byte(b1) {
        Some(p) if is_continuation(b2) && is_continuation(b3) => p,
        _ => return Err(Error::IneligibleChar(b1, b2, b3)),
    };
    let (b1, b2, b3) = (u16::from(b1), u16::from(b2), u16::from(b3));
    // the two low bits of the lead byte ride on top of hi, the low bit of b2 on top of lo
    let hi = ((b1 & 0x03) << 7) | ((b2 & 0xFE) >> 1);
    let lo = ((b2 & 0x01) << 8) | b3;
    Ok(PackedChar { prefix, hi, lo })
}

/// Re-aligns a packed character to its three UTF-8 bytes.
pub fn unpack_char(p: PackedChar) -> [u8; 3] {
    let b1 = (p.prefix.bits6() << 2) | (p.hi >> 7) as u8;
    let b2 = (((p.hi & 0x7F) << 1) | (p.lo >> 8)) as u8;
    let b3 = (p.lo & 0xFF) as u8;
    [b1, b2, b3]
}
