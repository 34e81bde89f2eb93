//! MSB-first bit packing.

/// Accumulates bits MSB-first; the last byte is zero-padded by [`finish`](Self::finish).
#[derive(Debug, Default, Clone)]
pub struct BitWriter {
    buf: Vec<u8>,
    acc: u64,
    pending: u32,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Bits written so far, padding excluded.
    pub fn bit_len(&self) -> u64 {
        self.buf.len() as u64 * 8 + u64::from(self.pending)
    }

    #[inline]
    pub fn write_bit(&mut self, bit: bool) {
        self.write_small(u64::from(bit), 1);
    }

    /// Writes the low `count` bits of `value`, most significant first.
    #[inline]
    pub fn write_bits(&mut self, value: u64, count: u32) {
        debug_assert!(count <= 64);
        if count > 32 {
            self.write_small(value >> 32, count - 32);
            self.write_small(value & 0xffff_ffff, 32);
        } else {
            self.write_small(value, count);
        }
    }

    #[inline]
    pub fn write_ones(&mut self, mut count: u64) {
        while count > 0 {
            let n = count.min(32) as u32;
            self.write_small((1u64 << n) - 1, n);
            count -= u64::from(n);
        }
    }

    #[inline]
    fn write_small(&mut self, value: u64, count: u32) {
        if count == 0 {
            return;
        }
        // pending < 8 and count <= 32, so the accumulator cannot overflow.
        self.acc = (self.acc << count) | (value & ((1u64 << count) - 1));
        self.pending += count;
        while self.pending >= 8 {
            self.pending -= 8;
            self.buf.push((self.acc >> self.pending) as u8);
        }
        self.acc &= (1u64 << self.pending) - 1;
    }

    pub fn finish(mut self) -> Vec<u8> {
        if self.pending > 0 {
            self.buf.push((self.acc << (8 - self.pending)) as u8);
        }
        self.buf
    }
}

/// Returned when a read would run past the end of the buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EndOfData;

#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    data: &'a [u8],
    pos: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    pub fn position(&self) -> u64 {
        self.pos
    }

    pub fn remaining(&self) -> u64 {
        self.data.len() as u64 * 8 - self.pos
    }

    #[inline]
    pub fn read_bit(&mut self) -> Result<bool, EndOfData> {
        let byte = *self.data.get((self.pos >> 3) as usize).ok_or(EndOfData)?;
        let bit = (byte >> (7 - (self.pos & 7))) & 1;
        self.pos += 1;
        Ok(bit == 1)
    }

    #[inline]
    pub fn read_bits(&mut self, count: u32) -> Result<u64, EndOfData> {
        debug_assert!(count <= 64);
        if u64::from(count) > self.remaining() {
            return Err(EndOfData);
        }
        let mut value = 0u64;
        let mut left = count;
        while left > 0 {
            let byte = self.data[(self.pos >> 3) as usize];
            let offset = (self.pos & 7) as u32;
            let avail = 8 - offset;
            let take = avail.min(left);
            let bits = (u64::from(byte) >> (avail - take)) & ((1u64 << take) - 1);
            value = if take == 64 { bits } else { (value << take) | bits };
            self.pos += u64::from(take);
            left -= take;
        }
        Ok(value)
    }

    /// Counts one-bits up to `limit`, consuming the terminating zero if seen first.
    #[inline]
    pub fn read_unary(&mut self, limit: u64) -> Result<u64, EndOfData> {
        let mut ones = 0;
        while ones < limit {
            if !self.read_bit()? {
                return Ok(ones);
            }
            ones += 1;
        }
        Ok(ones)
    }
}
