use serde::{Deserialize, Serialize};

use crate::{Error, Result};

fn check_bits(k: u32) -> Result<()> {
    if (1..=16).contains(&k) {
        Ok(())
    } else {
        Err(Error::InvalidBitsPerSymbol(k))
    }
}

/// Number of `k`-bit symbols that carry `byte_len` bytes.
pub fn symbols_needed(byte_len: usize, k: u32) -> usize {
    (byte_len * 8).div_ceil(k as usize)
}

/// Splits the MSB-first bit stream of `payload` into `k`-bit symbols; the
/// last symbol is zero-padded on the right.
pub fn pack_message(payload: &[u8], k: u32) -> Result<Vec<usize>> {
    check_bits(k)?;
    let k = k as usize;
    let total = payload.len() * 8;
    let mut out = Vec::with_capacity(symbols_needed(payload.len(), k as u32));
    let mut pos = 0;
    while pos < total {
        let mut sym = 0usize;
        for b in pos..pos + k {
            let bit = if b < total {
                (payload[b / 8] >> (7 - b % 8)) & 1
            } else {
                0
            };
            sym = (sym << 1) | bit as usize;
        }
        out.push(sym);
        pos += k;
    }
    Ok(out)
}

/// Inverse of [`pack_message`] given the original byte length. Symbols are
/// masked to `k` bits; missing symbols read as zero.
pub fn unpack_message(symbols: &[usize], k: u32, byte_len: usize) -> Result<Vec<u8>> {
    check_bits(k)?;
    let k = k as usize;
    let mut out = vec![0u8; byte_len];
    for b in 0..byte_len * 8 {
        let sym = symbols.get(b / k).copied().unwrap_or(0);
        let bit = (sym >> (k - 1 - b % k)) & 1;
        out[b / 8] |= (bit as u8) << (7 - b % 8);
    }
    Ok(out)
}

/// A payload together with its symbol sequence over `2^k` cosets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageStream {
    pub payload: Vec<u8>,
    pub symbol_base: usize,
    pub symbols: Vec<usize>,
}

impl MessageStream {
    /// Packs for a code with `payload_size` cosets, which must be a power of
    /// two no larger than 2^16.
    pub fn pack(payload: Vec<u8>, payload_size: usize) -> Result<Self> {
        if !payload_size.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(payload_size));
        }
        let k = payload_size.trailing_zeros();
        let symbols = pack_message(&payload, k)?;
        Ok(MessageStream {
            payload,
            symbol_base: payload_size,
            symbols,
        })
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.symbol_base.trailing_zeros()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_expansions() {
        assert_eq!(pack_message(&[0xB3], 2).unwrap(), vec![2, 3, 0, 3]);
        assert_eq!(pack_message(&[0xB3], 3).unwrap(), vec![5, 4, 6]);
        assert_eq!(pack_message(&[0xB3], 8).unwrap(), vec![0xB3]);
        assert_eq!(pack_message(&[0xB3, 0x01], 16).unwrap(), vec![0xB301]);
        assert_eq!(pack_message(&[0xB3], 16).unwrap(), vec![0xB300]);
        assert!(pack_message(&[], 4).unwrap().is_empty());
    }

    #[test]
    fn bit_width_limits() {
        assert!(matches!(
            pack_message(&[1], 0),
            Err(Error::InvalidBitsPerSymbol(0))
        ));
        assert!(pack_message(&[1], 17).is_err());
        assert!(unpack_message(&[1], 17, 1).is_err());
    }

    #[test]
    fn unpack_inverts() {
        let payload = b"lattice".to_vec();
        for k in 1..=16 {
            let s = pack_message(&payload, k).unwrap();
            assert_eq!(s.len(), symbols_needed(payload.len(), k));
            assert!(s.iter().all(|&v| v < 1 << k));
            assert_eq!(unpack_message(&s, k, payload.len()).unwrap(), payload);
        }
    }

    #[test]
    fn stream_requires_power_of_two() {
        let m = MessageStream::pack(vec![0xB3], 4).unwrap();
        assert_eq!(m.symbols, vec![2, 3, 0, 3]);
        assert_eq!(m.bits_per_symbol(), 2);
        assert!(matches!(
            MessageStream::pack(vec![1], 9),
            Err(Error::NotPowerOfTwo(9))
        ));
    }
}
