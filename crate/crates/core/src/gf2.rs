//! Dense linear systems over F2 with an arbitrary number of unknowns.

/// A row of coefficients over F2, packed 64 unknowns per word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitRow {
    words: Vec<u64>,
}

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        BitRow { words: vec![0; len.div_ceil(64)] }
    }

    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn toggle(&mut self, i: usize) {
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn set(&mut self, i: usize, value: bool) {
        if self.get(i) != value {
            self.toggle(i);
        }
    }

    pub fn xor_assign(&mut self, other: &BitRow) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn first_one(&self) -> Option<usize> {
        self.words.iter().enumerate().find(|(_, &w)| w != 0).map(|(k, w)| k * 64 + w.trailing_zeros() as usize)
    }
}

/// Equations `row . u = rhs` over F2.
#[derive(Clone, Debug)]
pub struct Gf2System {
    unknowns: usize,
    rows: Vec<(BitRow, bool)>,
}

/// Outcome of eliminating a [`Gf2System`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Gf2Solution {
    /// A particular solution with every free unknown set to zero.
    Consistent { assignment: Vec<bool>, rank: usize },
    /// Indices of equations whose sum reads `0 = 1`.
    Inconsistent { rank: usize, augmented_rank: usize, contradiction: Vec<usize> },
}

impl Gf2System {
    pub fn new(unknowns: usize) -> Self {
        Gf2System { unknowns, rows: Vec::new() }
    }

    pub fn unknowns(&self) -> usize {
        self.unknowns
    }

    pub fn equations(&self) -> usize {
        self.rows.len()
    }

    /// Adds `sum_{i in terms} u_i = rhs`; repeated indices cancel.
    pub fn push(&mut self, terms: impl IntoIterator<Item = usize>, rhs: bool) {
        let mut row = BitRow::zeros(self.unknowns);
        for i in terms {
            assert!(i < self.unknowns, "unknown {i} out of range");
            row.toggle(i);
        }
        self.rows.push((row, rhs));
    }

    pub fn solve(&self) -> Gf2Solution {
        let m = self.rows.len();
        // Each working row carries the set of original equations it is built from.
        let mut work: Vec<(BitRow, bool, BitRow)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, (r, b))| {
                let mut origin = BitRow::zeros(m);
                origin.toggle(i);
                (r.clone(), *b, origin)
            })
            .collect();
        let mut pivots: Vec<(usize, usize)> = Vec::new();
        let mut next = 0;
        for col in 0..self.unknowns {
            let Some(found) = (next..m).find(|&r| work[r].0.get(col)) else {
                continue;
            };
            work.swap(next, found);
            let (prow, pb, porigin) = work[next].clone();
            for (r, entry) in work.iter_mut().enumerate() {
                if r != next && entry.0.get(col) {
                    entry.0.xor_assign(&prow);
                    entry.1 ^= pb;
                    entry.2.xor_assign(&porigin);
                }
            }
            pivots.push((next, col));
            next += 1;
            if next == m {
                break;
            }
        }
        let rank = pivots.len();
        if let Some((_, _, origin)) = work[rank..].iter().find(|(r, b, _)| r.is_zero() && *b) {
            let contradiction = (0..m).filter(|&i| origin.get(i)).collect();
            return Gf2Solution::Inconsistent { rank, augmented_rank: rank + 1, contradiction };
        }
        let mut assignment = vec![false; self.unknowns];
        for &(r, col) in &pivots {
            debug_assert_eq!(work[r].0.first_one(), Some(col));
            assignment[col] = work[r].1;
        }
        Gf2Solution::Consistent { assignment, rank }
    }

    /// Checks an assignment against every equation.
    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.rows.iter().all(|(row, rhs)| {
            let lhs = (0..self.unknowns).filter(|&i| row.get(i) && assignment[i]).count() % 2 == 1;
            lhs == *rhs
        })
    }

    pub fn rows(&self) -> impl Iterator<Item = (&BitRow, bool)> {
        self.rows.iter().map(|(r, b)| (r, *b))
    }
}
