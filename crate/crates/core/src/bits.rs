//! MSB-first conversion between bit blocks and integers.

use crate::error::{Error, Result};

/// Packs MSB-first bits into an integer. Blocks wider than 64 bits are rejected.
pub fn bits_to_int(bits: &[u8]) -> Result<u64> {
    if bits.len() > 64 {
        return Err(Error::InvalidConfig(format!("{} bits do not fit in u64", bits.len())));
    }
    Ok(bits.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b & 1)))
}

/// Unpacks `v` into `width` MSB-first bits.
pub fn int_to_bits(v: u64, width: usize) -> Result<Vec<u8>> {
    if width == 0 || width > 64 || (width < 64 && v >> width != 0) {
        return Err(Error::ValueOutOfRange { value: v, width });
    }
    Ok((0..width).rev().map(|i| ((v >> i) & 1) as u8).collect())
}

/// Sequential field reader over a bit block.
pub(crate) struct BitReader<'a> {
    bits: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bits: &'a [u8]) -> Self {
        BitReader { bits, pos: 0 }
    }

    pub fn take(&mut self, width: usize) -> usize {
        let v = self.bits[self.pos..self.pos + width]
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | usize::from(b & 1));
        self.pos += width;
        v
    }
}

/// Sequential field writer; the inverse of [`BitReader`].
pub(crate) struct BitWriter {
    bits: Vec<u8>,
}

impl BitWriter {
    pub fn with_capacity(n: usize) -> Self {
        BitWriter {
            bits: Vec::with_capacity(n),
        }
    }

    pub fn put(&mut self, v: usize, width: usize) -> &mut Self {
        self.bits.extend((0..width).rev().map(|i| ((v >> i) & 1) as u8));
        self
    }

    pub fn finish(self) -> Vec<u8> {
        self.bits
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn msb_first() {
        assert_eq!(bits_to_int(&[1, 0, 1]).unwrap(), 5);
        assert_eq!(int_to_bits(0, 4).unwrap(), vec![0, 0, 0, 0]);
        assert_eq!(int_to_bits(6, 3).unwrap(), vec![1, 1, 0]);
        assert_eq!(int_to_bits(u64::MAX, 64).unwrap(), vec![1; 64]);
    }

    #[test]
    fn out_of_range() {
        assert!(matches!(
            int_to_bits(8, 3),
            Err(Error::ValueOutOfRange { value: 8, width: 3 })
        ));
        assert!(int_to_bits(0, 0).is_err());
        assert!(bits_to_int(&[0; 65]).is_err());
    }

    #[test]
    fn round_trip_ten_bits() {
        for v in 0..1024u64 {
            assert_eq!(bits_to_int(&int_to_bits(v, 10).unwrap()).unwrap(), v);
        }
    }

    #[test]
    fn reader_writer_fields() {
        let mut w = BitWriter::with_capacity(9);
        w.put(5, 3).put(0, 2).put(13, 4);
        let bits = w.finish();
        assert_eq!(bits, vec![1, 0, 1, 0, 0, 1, 1, 0, 1]);
        let mut r = BitReader::new(&bits);
        assert_eq!((r.take(3), r.take(2), r.take(4)), (5, 0, 13));
    }
}
