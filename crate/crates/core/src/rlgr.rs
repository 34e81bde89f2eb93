//! Adaptive run-length / Golomb-Rice coding of nonnegative symbols.
//!
//! Two backward-adaptive parameters drive the coder, both kept in units of
//! `1/SCALE` so they move in fractional steps:
//!
//! * `kp`: run-mode parameter, `k = kp / SCALE`. With `k == 0` every symbol is
//!   Golomb-Rice coded directly. With `k >= 1` a complete run of `2^k` zeros
//!   costs a single `0` bit; a shorter run ended by a nonzero `u` is sent as
//!   `1`, the run length in `k` bits, then `u - 1` Golomb-Rice coded.
//! * `krp`: Golomb-Rice parameter for values, `kr = krp / SCALE`.
//!
//! Golomb-Rice codes write the quotient `v >> kr` in unary (ones, then a zero)
//! followed by the `kr` low bits. A quotient of [`ESCAPE_QUOTIENT`] or more is
//! replaced by that many ones and the raw 32-bit value.
//!
//! The decoder is told the symbol count; a trailing partial run is flushed
//! as `1` plus its length with no value field.

use crate::bitio::{BitReader, BitWriter};
use crate::error::RlgrError;

pub const SCALE: u32 = 4;
pub const U0: u32 = 3;
pub const D0: u32 = 1;
pub const U1: u32 = 2;
pub const D1: u32 = 1;
pub const KP_MAX: u32 = 32 * SCALE;
pub const KRP_MAX: u32 = 32 * SCALE;
pub const ESCAPE_QUOTIENT: u64 = 12;
pub const ESCAPE_BITS: u32 = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RlgrState {
    pub kp: u32,
    pub krp: u32,
}

impl Default for RlgrState {
    fn default() -> Self {
        Self { kp: 2 * SCALE, krp: 2 * SCALE }
    }
}

impl RlgrState {
    #[inline]
    pub fn k(self) -> u32 {
        self.kp / SCALE
    }

    #[inline]
    pub fn kr(self) -> u32 {
        self.krp / SCALE
    }

    #[inline]
    fn adapt_kr(&mut self, quotient: u64) {
        match quotient {
            0 => self.krp = self.krp.saturating_sub(2),
            1 => {}
            p => self.krp = (u64::from(self.krp) + p + 1).min(u64::from(KRP_MAX)) as u32,
        }
    }

    #[inline]
    fn raise_kp(&mut self, by: u32) {
        self.kp = (self.kp + by).min(KP_MAX);
    }

    #[inline]
    fn lower_kp(&mut self, by: u32) {
        self.kp = self.kp.saturating_sub(by);
    }
}

/// Writes one Golomb-Rice code and returns its quotient.
pub fn gr_encode(w: &mut BitWriter, v: u32, kr: u32) -> u64 {
    let v = u64::from(v);
    let p = v >> kr;
    if p >= ESCAPE_QUOTIENT {
        w.write_ones(ESCAPE_QUOTIENT);
        w.write_bits(v, ESCAPE_BITS);
    } else {
        w.write_ones(p);
        w.write_bit(false);
        w.write_bits(v, kr);
    }
    p
}

/// Reads one Golomb-Rice code; returns the value and its quotient.
pub fn gr_decode(r: &mut BitReader<'_>, kr: u32) -> Result<(u32, u64), GrError> {
    let ones = r.read_unary(ESCAPE_QUOTIENT).map_err(|_| GrError::Truncated)?;
    if ones == ESCAPE_QUOTIENT {
        let v = r.read_bits(ESCAPE_BITS).map_err(|_| GrError::Truncated)?;
        let p = v >> kr;
        if p < ESCAPE_QUOTIENT {
            return Err(GrError::Malformed(RlgrError::MalformedEscape { value: v as u32, k_r: kr }));
        }
        return Ok((v as u32, p));
    }
    let rem = r.read_bits(kr).map_err(|_| GrError::Truncated)?;
    let v = (u128::from(ones) << kr) | u128::from(rem);
    let v = u32::try_from(v).map_err(|_| GrError::Malformed(RlgrError::SymbolTooLarge(v as u64)))?;
    Ok((v, ones))
}

/// Failure inside a single Golomb-Rice code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GrError {
    Truncated,
    Malformed(RlgrError),
}

fn encode_with(symbols: &[u32], mut observe: impl FnMut(RlgrState)) -> BitWriter {
    let mut w = BitWriter::new();
    let mut st = RlgrState::default();
    let mut run: u64 = 0;
    for &u in symbols {
        let k = st.k();
        if k == 0 {
            let p = gr_encode(&mut w, u, st.kr());
            st.adapt_kr(p);
            if u == 0 {
                st.raise_kp(U0);
            } else {
                st.lower_kp(D0);
            }
        } else if u == 0 {
            run += 1;
            if run == 1u64 << k {
                w.write_bit(false);
                st.raise_kp(U1);
                run = 0;
            }
        } else {
            w.write_bit(true);
            w.write_bits(run, k);
            let p = gr_encode(&mut w, u - 1, st.kr());
            st.adapt_kr(p);
            st.lower_kp(D1);
            run = 0;
        }
        observe(st);
    }
    if run > 0 {
        w.write_bit(true);
        w.write_bits(run, st.k());
    }
    w
}

fn decode_with(payload: &[u8], count: usize, mut observe: impl FnMut(RlgrState)) -> Result<Vec<u32>, RlgrError> {
    let mut r = BitReader::new(payload);
    let mut st = RlgrState::default();
    // A hostile count must not turn into a huge up-front allocation.
    let mut out: Vec<u32> = Vec::with_capacity(count.min(1 << 20));
    macro_rules! truncated {
        () => {
            RlgrError::TruncatedStream { decoded: out.len(), expected: count }
        };
    }
    let gr = |r: &mut BitReader<'_>, kr: u32, decoded: usize| {
        gr_decode(r, kr).map_err(|e| match e {
            GrError::Truncated => RlgrError::TruncatedStream { decoded, expected: count },
            GrError::Malformed(e) => e,
        })
    };

    while out.len() < count {
        let k = st.k();
        if k == 0 {
            let (u, p) = gr(&mut r, st.kr(), out.len())?;
            st.adapt_kr(p);
            if u == 0 {
                st.raise_kp(U0);
            } else {
                st.lower_kp(D0);
            }
            out.push(u);
            observe(st);
            continue;
        }
        let remaining = count - out.len();
        if !r.read_bit().map_err(|_| truncated!())? {
            let run = 1u64 << k;
            if run > remaining as u64 {
                return Err(RlgrError::RunOverrun { run, remaining });
            }
            let run = run as usize;
            out.resize(out.len() + run - 1, 0);
            for _ in 1..run {
                observe(st);
            }
            st.raise_kp(U1);
            out.push(0);
            observe(st);
            continue;
        }
        let m = r.read_bits(k).map_err(|_| truncated!())?;
        if m > remaining as u64 {
            return Err(RlgrError::RunOverrun { run: m, remaining });
        }
        out.resize(out.len() + m as usize, 0);
        for _ in 0..m {
            observe(st);
        }
        if out.len() == count {
            break;
        }
        let (v, p) = gr(&mut r, st.kr(), out.len())?;
        let u = v.checked_add(1).ok_or(RlgrError::SymbolTooLarge(u64::from(v) + 1))?;
        st.adapt_kr(p);
        st.lower_kp(D1);
        out.push(u);
        observe(st);
    }
    Ok(out)
}

/// Encodes `symbols` into a zero-padded byte payload.
pub fn rlgr_encode(symbols: &[u32]) -> Vec<u8> {
    encode_with(symbols, |_| {}).finish()
}

/// Decodes exactly `count` symbols from `payload`.
pub fn rlgr_decode(payload: &[u8], count: usize) -> Result<Vec<u32>, RlgrError> {
    decode_with(payload, count, |_| {})
}

/// Like [`rlgr_encode`], also returning the coder state after every symbol.
pub fn rlgr_encode_traced(symbols: &[u32]) -> (Vec<u8>, Vec<RlgrState>) {
    let mut trace = Vec::with_capacity(symbols.len());
    let payload = encode_with(symbols, |s| trace.push(s)).finish();
    (payload, trace)
}

/// Like [`rlgr_decode`], also returning the coder state after every symbol.
pub fn rlgr_decode_traced(payload: &[u8], count: usize) -> Result<(Vec<u32>, Vec<RlgrState>), RlgrError> {
    let mut trace = Vec::with_capacity(count.min(1 << 20));
    let symbols = decode_with(payload, count, |s| trace.push(s))?;
    Ok((symbols, trace))
}

/// Payload size in bits, padding excluded.
pub fn encoded_bits(symbols: &[u32]) -> u64 {
    encode_with(symbols, |_| {}).bit_len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bits_of(bytes: &[u8], n: usize) -> String {
        let mut r = BitReader::new(bytes);
        (0..n).map(|_| if r.read_bit().unwrap() { '1' } else { '0' }).collect()
    }

    #[test]
    fn gr_small_codes() {
        let mut w = BitWriter::new();
        gr_encode(&mut w, 0, 0);
        assert_eq!(w.bit_len(), 1);
        assert_eq!(w.finish(), vec![0x00]);

        let mut w = BitWriter::new();
        assert_eq!(gr_encode(&mut w, 5, 1), 2);
        assert_eq!(w.bit_len(), 4);
        let bytes = w.finish();
        assert_eq!(bits_of(&bytes, 4), "1101");
        assert_eq!(gr_decode(&mut BitReader::new(&bytes), 1), Ok((5, 2)));
    }

    #[test]
    fn gr_escape() {
        let mut w = BitWriter::new();
        gr_encode(&mut w, 1 << 20, 0);
        assert_eq!(w.bit_len(), 12 + 32);
        let bytes = w.finish();
        assert_eq!(bits_of(&bytes, 12), "111111111111");
        assert_eq!(gr_decode(&mut BitReader::new(&bytes), 0), Ok((1 << 20, 1 << 20)));
        // Quotient 11 is the largest that stays unary.
        let mut w = BitWriter::new();
        gr_encode(&mut w, 11, 0);
        assert_eq!(w.bit_len(), 12);
        let mut w = BitWriter::new();
        gr_encode(&mut w, u32::MAX, 32);
        assert_eq!(gr_decode(&mut BitReader::new(&w.finish()), 32), Ok((u32::MAX, 0)));
    }

    #[test]
    fn escape_holding_small_value_is_rejected() {
        let mut w = BitWriter::new();
        w.write_ones(12);
        w.write_bits(3, 32);
        let bytes = w.finish();
        assert!(matches!(
            gr_decode(&mut BitReader::new(&bytes), 0),
            Err(GrError::Malformed(RlgrError::MalformedEscape { value: 3, k_r: 0 }))
        ));
    }

    #[test]
    fn empty_input() {
        assert!(rlgr_encode(&[]).is_empty());
        assert_eq!(rlgr_decode(&[], 0), Ok(vec![]));
    }

    #[test]
    fn one_full_run() {
        let (payload, trace) = rlgr_encode_traced(&[0, 0, 0, 0]);
        assert_eq!(payload, vec![0x00]);
        assert_eq!(encoded_bits(&[0, 0, 0, 0]), 1);
        let after: Vec<u32> = trace.iter().map(|s| s.kp).collect();
        assert_eq!(after, vec![8, 8, 8, 10]);
        assert_eq!(rlgr_decode(&payload, 4), Ok(vec![0, 0, 0, 0]));
    }

    #[test]
    fn partial_run_flush_and_value() {
        // k = 2: run of 1 then value 3 -> "1" "01" GR(2, kr=2) = "0" "10"; k drops to 1, flush "1" "1".
        let syms = [0, 3, 0];
        let payload = rlgr_encode(&syms);
        assert_eq!(bits_of(&payload, 8), "10101011");
        assert_eq!(rlgr_decode(&payload, 3).unwrap(), syms);
    }

    #[test]
    fn truncation_and_overrun_errors() {
        let syms: Vec<u32> = (0..200).map(|i| (i * 7919 % 13) as u32).collect();
        let payload = rlgr_encode(&syms);
        let cut = &payload[..payload.len() / 2];
        assert!(matches!(rlgr_decode(cut, syms.len()), Err(RlgrError::TruncatedStream { .. })));
        // A complete run of 4 zeros cannot fit into 3 symbols.
        assert!(matches!(rlgr_decode(&[0x00], 3), Err(RlgrError::RunOverrun { run: 4, remaining: 3 })));
    }

    #[test]
    fn all_zero_cost_is_sublinear() {
        for n in [64usize, 100, 1000, 100_000] {
            let bits = encoded_bits(&vec![0; n]);
            assert!(bits < n as u64, "n={n} bits={bits}");
        }
        assert!(encoded_bits(&vec![0; 100_000]) < 300);
    }

    #[test]
    fn sorted_zeros_beat_shuffled() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (mut sorted_bits, mut shuffled_bits) = (0u64, 0u64);
        for _ in 0..100 {
            let n = rng.random_range(500..3000);
            let mut syms: Vec<u32> =
                (0..n).map(|_| if rng.random_bool(0.9) { 0 } else { rng.random_range(1..40) }).collect();
            syms.shuffle(&mut rng);
            shuffled_bits += encoded_bits(&syms);
            syms.sort_unstable_by_key(|&s| s == 0);
            sorted_bits += encoded_bits(&syms);
        }
        assert!(sorted_bits <= shuffled_bits, "{sorted_bits} > {shuffled_bits}");
    }

    #[test]
    fn corrupted_payloads_terminate() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..2000 {
            let n = rng.random_range(1..500);
            let syms: Vec<u32> =
                (0..n).map(|_| if rng.random_bool(0.7) { 0 } else { rng.random_range(0..1000) }).collect();
            let mut payload = rlgr_encode(&syms);
            if payload.is_empty() {
                continue;
            }
            for _ in 0..rng.random_range(1..4) {
                let i = rng.random_range(0..payload.len());
                payload[i] ^= 1 << rng.random_range(0..8);
            }
            if let Ok(out) = rlgr_decode(&payload, n) {
                assert_eq!(out.len(), n);
            }
            // Output is capped by the symbol count, whatever the payload says.
            if let Ok(out) = rlgr_decode(&payload, 100_000) {
                assert_eq!(out.len(), 100_000);
            }
        }
    }

    fn arb_symbols() -> impl Strategy<Value = Vec<u32>> {
        prop::collection::vec(
            prop_oneof![
                6 => Just(0u32),
                3 => 0u32..16,
                1 => any::<u32>(),
            ],
            0..600,
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn lossless(syms in arb_symbols()) {
            let (payload, enc_trace) = rlgr_encode_traced(&syms);
            prop_assert_eq!(payload.len() as u64, encoded_bits(&syms).div_ceil(8));
            let (out, dec_trace) = rlgr_decode_traced(&payload, syms.len()).unwrap();
            prop_assert_eq!(&out, &syms);
            prop_assert_eq!(enc_trace, dec_trace);
        }

        #[test]
        fn state_stays_in_range(syms in arb_symbols()) {
            let (_, trace) = rlgr_encode_traced(&syms);
            prop_assert!(trace.iter().all(|s| s.kp <= KP_MAX && s.krp <= KRP_MAX));
        }
    }
}
