use std::fmt;
use std::sync::Arc;

use super::SystemError;

/// Longest substitution word we are willing to materialize.
pub const MAX_WORD_LEN: u64 = 100_000_000;
pub const MAX_LEVEL: u32 = 20;

/// Length of the level-`k` word: `(3^(k+1) - 1) / 2`.
pub fn word_len(level: u32) -> u64 {
    (3u64.pow(level + 1) - 1) / 2
}

/// `level` iterations of `0 -> 0010, 1 -> 1` applied to `0`.
pub fn chacon_word(level: u32) -> Result<Vec<u8>, SystemError> {
    if level > MAX_LEVEL || word_len(level) > MAX_WORD_LEN {
        return Err(SystemError::ChaconLevel { level, max_len: MAX_WORD_LEN });
    }
    // sigma^(k+1)(0) = w w 1 w with w = sigma^k(0)
    let mut w = Vec::with_capacity(word_len(level) as usize);
    w.push(0u8);
    for _ in 0..level {
        let len = w.len();
        w.extend_from_within(..len);
        w.push(1);
        w.extend_from_within(..len);
    }
    Ok(w)
}

/// A materialized Chacon word; equality is by level.
#[derive(Clone)]
pub struct ChaconWord {
    level: u32,
    word: Arc<Vec<u8>>,
}

impl ChaconWord {
    pub fn new(level: u32) -> Result<Self, SystemError> {
        Ok(Self { level, word: Arc::new(chacon_word(level)?) })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn symbols(&self) -> &[u8] {
        &self.word
    }

    pub fn len(&self) -> u64 {
        self.word.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// Positions `i` with `word[i..i + |w|] == w` for some `w` in `cyls`.
    pub fn occurrences(&self, cyls: &[Vec<u8>]) -> Vec<u64> {
        let n = self.word.len();
        let mut bits = vec![0u64; n.div_ceil(64)];
        for c in cyls {
            if c.is_empty() || c.len() > n {
                continue;
            }
            for (i, win) in self.word.windows(c.len()).enumerate() {
                if win == c.as_slice() {
                    bits[i / 64] |= 1 << (i % 64);
                }
            }
        }
        bits
    }

    /// True iff `w` occurs in the word, i.e. is a factor of the language
    /// generated so far.
    pub fn is_factor(&self, w: &[u8]) -> bool {
        !w.is_empty() && self.word.windows(w.len()).any(|x| x == w)
    }
}

impl PartialEq for ChaconWord {
    fn eq(&self, other: &Self) -> bool {
        self.level == other.level
    }
}

impl Eq for ChaconWord {}

impl fmt::Debug for ChaconWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ChaconWord(level {}, len {})", self.level, self.word.len())
    }
}
