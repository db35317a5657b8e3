use std::f64::consts::TAU;

/// Partition of `[0, 2π)` into `k` equal bins, the first centered on 0 rad.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DirectionAlphabet {
    bins: usize,
}

impl DirectionAlphabet {
    /// Four letters centered on right, up, left, down.
    pub const CARDINAL: DirectionAlphabet = DirectionAlphabet { bins: 4 };

    pub fn new(bins: usize) -> Option<Self> {
        (bins >= 1).then_some(Self { bins })
    }

    pub fn len(&self) -> usize {
        self.bins
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn letter(&self, direction: f64) -> usize {
        let width = TAU / self.bins as f64;
        let theta = (direction + width / 2.0).rem_euclid(TAU);
        ((theta / width) as usize).min(self.bins - 1)
    }

    pub fn letter_name(&self, letter: usize) -> String {
        if self.bins == 4 {
            ["R", "U", "L", "D"][letter].to_string()
        } else {
            letter.to_string()
        }
    }

    /// Name of the n-gram at lexicographic position `index`.
    pub fn gram_name(&self, n: usize, index: usize) -> String {
        let mut letters = Vec::with_capacity(n);
        let mut rest = index;
        for _ in 0..n {
            letters.push(self.letter_name(rest % self.bins));
            rest /= self.bins;
        }
        letters.reverse();
        letters.join(if self.bins == 4 { "" } else { "-" })
    }
}

/// Counts of every length-`n` sequence of consecutive quantized saccade
/// directions, indexed lexicographically (first letter most significant).
/// The result has `k^n` entries; fewer than `n` saccades give all zeros.
pub fn build_wordbook(directions: &[f64], n: usize, alphabet: &DirectionAlphabet) -> Vec<usize> {
    assert!(n >= 1, "gram length must be at least 1");
    let k = alphabet.len();
    let mut counts = vec![0; k.pow(n as u32)];
    if directions.len() < n {
        return counts;
    }
    let letters: Vec<usize> = directions.iter().map(|&d| alphabet.letter(d)).collect();
    for gram in letters.windows(n) {
        let index = gram.iter().fold(0, |acc, &l| acc * k + l);
        counts[index] += 1;
    }
    counts
}
