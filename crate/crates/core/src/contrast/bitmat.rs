//! Dense boolean matrix packed into 64-bit words, used for negative-sample
//! keep masks where an `N×N` byte matrix would be wasteful.

/// Row-major packed bit matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> BitMatrix {
        let words_per_row = cols.div_ceil(64);
        BitMatrix {
            rows,
            cols,
            words_per_row,
            bits: vec![0; rows * words_per_row],
        }
    }

    pub fn ones(rows: usize, cols: usize) -> BitMatrix {
        let mut m = BitMatrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, true);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        let word = self.bits[r * self.words_per_row + c / 64];
        (word >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        debug_assert!(r < self.rows && c < self.cols);
        let w = &mut self.bits[r * self.words_per_row + c / 64];
        if value {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    /// Number of set bits.
    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_and_count_roundtrip() {
        let mut m = BitMatrix::zeros(3, 70); // spans two words per row
        assert_eq!(m.count_ones(), 0);
        m.set(0, 0, true);
        m.set(1, 63, true);
        m.set(1, 64, true);
        m.set(2, 69, true);
        assert!(m.get(0, 0) && m.get(1, 63) && m.get(1, 64) && m.get(2, 69));
        assert!(!m.get(0, 1) && !m.get(2, 0));
        assert_eq!(m.count_ones(), 4);
        m.set(1, 64, false);
        assert!(!m.get(1, 64));
        assert_eq!(m.count_ones(), 3);
        assert_eq!(BitMatrix::ones(4, 65).count_ones(), 4 * 65);
    }
}
