use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which arithmetic function a block or series holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ArithFunction {
    Mobius,
    Liouville,
}

impl ArithFunction {
    pub fn name(self) -> &'static str {
        match self {
            ArithFunction::Mobius => "MOBIUS",
            ArithFunction::Liouville => "LIOUVILLE",
        }
    }
}

pub(crate) const CODE_ZERO: u8 = 0b00;
pub(crate) const CODE_POS: u8 = 0b01;
pub(crate) const CODE_NEG: u8 = 0b10;
const CODE_INVALID: u8 = 0b11;

#[inline]
pub(crate) fn encode(value: i8) -> u8 {
    match value {
        0 => CODE_ZERO,
        1 => CODE_POS,
        -1 => CODE_NEG,
        _ => unreachable!("value outside {{-1, 0, 1}}"),
    }
}

#[inline]
pub(crate) fn decode(code: u8) -> Option<i8> {
    match code {
        CODE_ZERO => Some(0),
        CODE_POS => Some(1),
        CODE_NEG => Some(-1),
        _ => None,
    }
}

/// A contiguous run `[start, start + len)` of values in {−1, 0, +1}, packed
/// two bits per value (value `i` at byte `i / 4`, bit offset `2·(i mod 4)`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MobiusBlock {
    function: ArithFunction,
    start: u64,
    len: u64,
    packed: Vec<u8>,
}

impl MobiusBlock {
    pub(crate) fn from_values(function: ArithFunction, start: u64, values: &[i8]) -> Self {
        let mut packed = vec![0u8; values.len().div_ceil(4)];
        for (i, &v) in values.iter().enumerate() {
            packed[i / 4] |= encode(v) << (2 * (i % 4));
        }
        Self {
            function,
            start,
            len: values.len() as u64,
            packed,
        }
    }

    /// Rebuilds a block from packed payload bytes, rejecting the invalid code
    /// `0b11` and non-zero padding bits.
    pub(crate) fn from_packed(
        function: ArithFunction,
        start: u64,
        len: u64,
        packed: Vec<u8>,
    ) -> Result<Self> {
        if start == 0 || len == 0 {
            return Err(Error::Format("block start and count must be ≥ 1".into()));
        }
        if start.checked_add(len).is_none() {
            return Err(Error::Format("start + count overflows 64 bits".into()));
        }
        let expected = len.div_ceil(4);
        if packed.len() as u64 != expected {
            return Err(Error::Format(format!(
                "payload has {} bytes, expected {expected}",
                packed.len()
            )));
        }
        for (b, &byte) in packed.iter().enumerate() {
            for slot in 0..4 {
                let i = b as u64 * 4 + slot;
                let code = (byte >> (2 * slot)) & 0b11;
                if i >= len {
                    if code != 0 {
                        return Err(Error::Format("non-zero padding bits".into()));
                    }
                } else if code == CODE_INVALID {
                    return Err(Error::Format(format!("invalid code 0b11 at index {i}")));
                }
            }
        }
        Ok(Self {
            function,
            start,
            len,
            packed,
        })
    }

    pub fn function(&self) -> ArithFunction {
        self.function
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// One past the last covered integer.
    pub fn end(&self) -> u64 {
        self.start + self.len
    }

    pub fn packed(&self) -> &[u8] {
        &self.packed
    }

    /// Value at offset `i` (that is, of the integer `start + i`).
    #[inline]
    pub fn get(&self, i: u64) -> i8 {
        assert!(i < self.len, "index {i} out of block of length {}", self.len);
        let code = (self.packed[(i / 4) as usize] >> (2 * (i % 4))) & 0b11;
        decode(code).expect("packed codes are validated on construction")
    }

    /// Value of the function at the integer `n`, if `n` lies in this block.
    pub fn value_at(&self, n: u64) -> Option<i8> {
        (n >= self.start && n < self.end()).then(|| self.get(n - self.start))
    }

    pub fn iter(&self) -> impl Iterator<Item = i8> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_values(&self) -> Vec<i8> {
        self.iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pack_layout_is_little_endian_within_byte() {
        let block = MobiusBlock::from_values(ArithFunction::Mobius, 1, &[1, -1, -1, 0, -1]);
        // values 0..4 -> codes 01,10,10,00 -> 0b00_10_10_01
        assert_eq!(block.packed(), &[0b0010_1001, 0b0000_0010]);
        assert_eq!(block.to_values(), vec![1, -1, -1, 0, -1]);
        assert_eq!(block.value_at(5), Some(-1));
        assert_eq!(block.value_at(6), None);
    }

    #[test]
    fn rejects_invalid_code_and_padding() {
        assert!(MobiusBlock::from_packed(ArithFunction::Mobius, 1, 1, vec![0b11]).is_err());
        assert!(MobiusBlock::from_packed(ArithFunction::Mobius, 1, 1, vec![0b0100]).is_err());
        assert!(MobiusBlock::from_packed(ArithFunction::Mobius, 1, 2, vec![]).is_err());
        assert!(MobiusBlock::from_packed(ArithFunction::Mobius, 1, 1, vec![0b01]).is_ok());
    }
}
