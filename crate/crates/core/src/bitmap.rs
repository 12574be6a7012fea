/// Fixed-length bit set over `0..len`, stored LSB-first in 64-bit words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bitmap {
    len: u64,
    words: Vec<u64>,
}

impl Bitmap {
    pub fn new(len: u64) -> Self {
        Bitmap {
            len,
            words: vec![0; len.div_ceil(64) as usize],
        }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn set(&mut self, i: u64) {
        debug_assert!(i < self.len);
        self.words[(i >> 6) as usize] |= 1 << (i & 63);
    }

    #[inline]
    pub fn get(&self, i: u64) -> bool {
        i < self.len && self.words[(i >> 6) as usize] & (1 << (i & 63)) != 0
    }

    pub fn union_with(&mut self, other: &Bitmap) {
        assert_eq!(self.len, other.len, "bitmap length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    /// `self |= src << shift`, dropping bits past `self.len()`.
    pub fn or_shifted(&mut self, src: &Bitmap, shift: u64) {
        let (ws, bs) = ((shift / 64) as usize, (shift % 64) as u32);
        let n = self.words.len();
        for (i, &w) in src.words.iter().enumerate() {
            let j = i + ws;
            if j >= n {
                break;
            }
            self.words[j] |= w << bs;
            if bs != 0 && j + 1 < n {
                self.words[j + 1] |= w >> (64 - bs);
            }
        }
        if !self.len.is_multiple_of(64) {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << (self.len % 64)) - 1;
            }
        }
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as u64;
                rest &= rest - 1;
                Some(wi as u64 * 64 + bit)
            })
        })
    }

    /// Copy of the first `len` bits.
    pub fn truncated(&self, len: u64) -> Bitmap {
        assert!(len <= self.len);
        let mut out = Bitmap::new(len);
        let n = out.words.len();
        out.words.copy_from_slice(&self.words[..n]);
        if !len.is_multiple_of(64) {
            if let Some(last) = out.words.last_mut() {
                *last &= (1u64 << (len % 64)) - 1;
            }
        }
        out
    }

    /// Little-endian byte image, `ceil(len / 8)` bytes, bit `i` at byte `i / 8`, bit `i % 8`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.len.div_ceil(8) as usize;
        let mut out: Vec<u8> = self.words.iter().flat_map(|w| w.to_le_bytes()).collect();
        out.truncate(n);
        out
    }

    pub fn from_bytes(len: u64, bytes: &[u8]) -> Option<Bitmap> {
        if bytes.len() as u64 != len.div_ceil(8) {
            return None;
        }
        let mut out = Bitmap::new(len);
        for (i, chunk) in bytes.chunks(8).enumerate() {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            out.words[i] = u64::from_le_bytes(buf);
        }
        if out.truncated(len) != out {
            return None;
        }
        Some(out)
    }
}
