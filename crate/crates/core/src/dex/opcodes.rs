//! Instruction widths and the few opcode families the analysis inspects.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InvokeKind {
    Virtual,
    Super,
    Direct,
    Static,
    Interface,
    Polymorphic,
}

impl InvokeKind {
    /// Mnemonic without the `/range` suffix.
    pub fn mnemonic(self) -> &'static str {
        match self {
            InvokeKind::Virtual => "invoke-virtual",
            InvokeKind::Super => "invoke-super",
            InvokeKind::Direct => "invoke-direct",
            InvokeKind::Static => "invoke-static",
            InvokeKind::Interface => "invoke-interface",
            InvokeKind::Polymorphic => "invoke-polymorphic",
        }
    }
}

/// Invoke kind for opcodes whose second code unit is a method index.
pub fn invoke_kind(op: u8) -> Option<InvokeKind> {
    Some(match op {
        0x6e | 0x74 => InvokeKind::Virtual,
        0x6f | 0x75 => InvokeKind::Super,
        0x70 | 0x76 => InvokeKind::Direct,
        0x71 | 0x77 => InvokeKind::Static,
        0x72 | 0x78 => InvokeKind::Interface,
        0xfa | 0xfb => InvokeKind::Polymorphic,
        _ => return None,
    })
}

/// iget*/sget* whose second code unit is a field index.
pub fn is_field_read(op: u8) -> bool {
    matches!(op, 0x52..=0x58 | 0x60..=0x66)
}

/// Width in 16-bit code units of a regular (non-payload) instruction.
pub fn width(op: u8) -> usize {
    match op {
        0x00 | 0x01 | 0x04 | 0x07 | 0x0a..=0x12 | 0x1d | 0x1e | 0x21 | 0x27 | 0x28 => 1,
        0x3e..=0x43 | 0x73 | 0x79 | 0x7a | 0x7b..=0x8f | 0xb0..=0xcf | 0xe3..=0xf9 => 1,
        0x02 | 0x05 | 0x08 | 0x13 | 0x15 | 0x16 | 0x19 | 0x1a | 0x1c | 0x1f | 0x20 => 2,
        0x22 | 0x23 | 0x29 | 0x2d..=0x3d | 0x44..=0x6d | 0x90..=0xaf | 0xd0..=0xe2 => 2,
        0xfe | 0xff => 2,
        0x03 | 0x06 | 0x09 | 0x14 | 0x17 | 0x1b | 0x24 | 0x25 | 0x26 | 0x2a | 0x2b | 0x2c => 3,
        0x6e..=0x72 | 0x74..=0x78 | 0xfc | 0xfd => 3,
        0xfa | 0xfb => 4,
        0x18 => 5,
    }
}

/// Width of a payload pseudo-instruction starting at `insns[at]`, or `None`
/// when the unit there is not a payload identifier.
pub fn payload_width(insns: &[u16], at: usize) -> Option<Option<usize>> {
    let unit = *insns.get(at)?;
    let get = |i: usize| insns.get(at + i).copied();
    let w = match unit {
        0x0100 => get(1).map(|size| size as usize * 2 + 4),
        0x0200 => get(1).map(|size| size as usize * 4 + 2),
        0x0300 => match (get(1), get(2), get(3)) {
            (Some(elem), Some(lo), Some(hi)) => {
                let count = (lo as usize) | ((hi as usize) << 16);
                Some((count * elem as usize).div_ceil(2) + 4)
            }
            _ => None,
        },
        _ => return None,
    };
    Some(w)
}
