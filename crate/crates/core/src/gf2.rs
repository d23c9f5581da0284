//! Linear algebra over GF(2).
//!
//! [`BitMatrix`] is a dense row-major matrix packed into `u64` words; it is
//! used for realized degree slices, P-matrices and the Lambda differentials.
//! [`SparseSystem`] is an incremental echelon solver for the large, very
//! sparse systems produced by the correction-block solve.
//!
//! Matrices act on row vectors: a matrix with `r` rows and `c` columns is a
//! map `F2^r -> F2^c`, `x -> x * M`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

const WORD: usize = 64;

fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

/// A dense vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Index of the lowest set bit.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, w)| k * WORD + w.trailing_zeros() as usize)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A dense matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVec>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix {
            cols,
            rows: (0..rows).map(|_| BitVec::zeros(cols)).collect(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from row vectors; all rows must have length `cols`.
    pub fn from_rows(cols: usize, rows: Vec<BitVec>) -> Self {
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        BitMatrix { cols, rows }
    }

    pub fn from_bools(rows: &[Vec<bool>], cols: usize) -> Self {
        Self::from_rows(cols, rows.iter().map(|r| BitVec::from_bools(r)).collect())
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value);
    }

    pub fn flip(&mut self, r: usize, c: usize) {
        self.rows[r].flip(c);
    }

    pub fn row(&self, r: usize) -> &BitVec {
        &self.rows[r]
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(BitVec::is_zero)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows.len());
        for (r, row) in self.rows.iter().enumerate() {
            for c in row.ones() {
                t.set(c, r, true);
            }
        }
        t
    }

    /// `self * other`, i.e. first apply `self`, then `other`.
    pub fn mul(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(
            self.cols,
            other.num_rows(),
            "dimension mismatch in matrix product"
        );
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut acc = BitVec::zeros(other.cols);
                for k in row.ones() {
                    acc.xor_assign(&other.rows[k]);
                }
                acc
            })
            .collect();
        BitMatrix {
            cols: other.cols,
            rows,
        }
    }

    /// Image of a row vector.
    pub fn apply(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.rows.len());
        let mut acc = BitVec::zeros(self.cols);
        for k in v.ones() {
            acc.xor_assign(&self.rows[k]);
        }
        acc
    }

    /// Places `block` with its top-left corner at `(r0, c0)`, adding mod 2.
    pub fn add_block(&mut self, r0: usize, c0: usize, block: &BitMatrix) {
        for (r, row) in block.rows.iter().enumerate() {
            for c in row.ones() {
                self.flip(r0 + r, c0 + c);
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.echelon().pivots.len()
    }

    /// Reduced row echelon form of the row space (zero rows dropped).
    pub fn echelon(&self) -> Echelon {
        Echelon::of_rows(self.cols, self.rows.iter().cloned())
    }

    /// Basis of the left kernel `{x : x * M = 0}`, in reduced echelon form
    /// with respect to the row index order.
    pub fn left_kernel(&self) -> Vec<BitVec> {
        let n = self.rows.len();
        // Augment each row with its own unit vector; rows whose matrix part
        // reduces to zero record a kernel relation.
        let mut work: Vec<(BitVec, BitVec)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| (r.clone(), BitVec::unit(n, i)))
            .collect();
        let mut pivot_rows: Vec<(usize, usize)> = Vec::new();
        let mut kernel = Vec::new();
        for i in 0..work.len() {
            let (mut v, mut tag) = work[i].clone();
            for &(p, row) in &pivot_rows {
                if v.get(p) {
                    v.xor_assign(&work[row].0);
                    tag.xor_assign(&work[row].1);
                }
            }
            match v.first_one() {
                Some(p) => {
                    work[i] = (v, tag);
                    pivot_rows.push((p, i));
                }
                None => kernel.push(tag),
            }
        }
        Echelon::of_rows(n, kernel).rows
    }

    pub fn to_bools(&self) -> Vec<Vec<bool>> {
        self.rows.iter().map(BitVec::to_bools).collect()
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows.len(), self.cols)?;
        for row in &self.rows {
            writeln!(f, "  {row:?}")?;
        }
        Ok(())
    }
}

/// Matrices serialize as lists of 0/1 rows.
impl Serialize for BitMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<u8>> = self
            .rows
            .iter()
            .map(|r| r.to_bools().into_iter().map(u8::from).collect())
            .collect();
        #[derive(Serialize)]
        struct Repr {
            rows: usize,
            cols: usize,
            entries: Vec<Vec<u8>>,
        }
        Repr {
            rows: self.rows.len(),
            cols: self.cols,
            entries: rows,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BitMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            rows: usize,
            cols: usize,
            entries: Vec<Vec<u8>>,
        }
        let repr = Repr::deserialize(deserializer)?;
        if repr.entries.len() != repr.rows || repr.entries.iter().any(|r| r.len() != repr.cols) {
            return Err(serde::de::Error::custom("matrix shape does not match entries"));
        }
        let rows = repr
            .entries
            .iter()
            .map(|r| r.iter().map(|&b| b != 0).collect::<Vec<_>>())
            .collect::<Vec<_>>();
        Ok(BitMatrix::from_bools(&rows, repr.cols))
    }
}

/// A row space in reduced row echelon form.
#[derive(Clone, Debug)]
pub struct Echelon {
    pub cols: usize,
    /// Reduced rows, sorted by pivot column.
    pub rows: Vec<BitVec>,
    /// Pivot column of each row.
    pub pivots: Vec<usize>,
}

impl Echelon {
    pub fn of_rows(cols: usize, rows: impl IntoIterator<Item = BitVec>) -> Self {
        let mut basis: Vec<(usize, BitVec)> = Vec::new();
        for mut v in rows {
            assert_eq!(v.len(), cols);
            for (p, b) in &basis {
                if v.get(*p) {
                    v.xor_assign(b);
                }
            }
            if let Some(p) = v.first_one() {
                for (_, b) in basis.iter_mut() {
                    if b.get(p) {
                        b.xor_assign(&v);
                    }
                }
                basis.push((p, v));
            }
        }
        basis.sort_by_key(|(p, _)| *p);
        let (pivots, rows) = basis.into_iter().unzip();
        Echelon { cols, rows, pivots }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` modulo the row space; the result vanishes on pivot columns.
    pub fn reduce(&self, v: &BitVec) -> BitVec {
        let mut v = v.clone();
        for (p, b) in self.pivots.iter().zip(&self.rows) {
            if v.get(*p) {
                v.xor_assign(b);
            }
        }
        v
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        self.reduce(v).is_zero()
    }

    /// Columns that carry no pivot, ascending.
    pub fn free_columns(&self) -> Vec<usize> {
        let pivots: BTreeSet<usize> = self.pivots.iter().copied().collect();
        (0..self.cols).filter(|c| !pivots.contains(c)).collect()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("linear system is inconsistent (equation {equation})")]
pub struct Inconsistent {
    pub equation: usize,
}

/// Incremental sparse echelon solver over GF(2).
///
/// Each stored row is pivoted on its largest variable, so a row reads
/// `x_p + sum_{v < p} x_v = rhs`. Back substitution in increasing variable
/// order with free variables set to zero produces the lexicographically
/// minimal solution (with `x_0` the most significant coordinate).
#[derive(Clone, Debug, Default)]
pub struct SparseSystem {
    num_vars: usize,
    pivots: HashMap<usize, (BTreeSet<usize>, bool)>,
    equations: usize,
}

impl SparseSystem {
    pub fn new(num_vars: usize) -> Self {
        SparseSystem {
            num_vars,
            pivots: HashMap::new(),
            equations: 0,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Adds `sum_{v in vars} x_v = rhs`. Repeated variables cancel.
    pub fn add_equation(
        &mut self,
        vars: impl IntoIterator<Item = usize>,
        rhs: bool,
    ) -> Result<(), Inconsistent> {
        let mut row = BTreeSet::new();
        for v in vars {
            assert!(v < self.num_vars, "variable {v} out of range");
            if !row.insert(v) {
                row.remove(&v);
            }
        }
        let mut rhs = rhs;
        let index = self.equations;
        self.equations += 1;
        while let Some(&top) = row.iter().next_back() {
            match self.pivots.get(&top) {
                Some((prow, prhs)) => {
                    row = row.symmetric_difference(prow).copied().collect();
                    rhs ^= *prhs;
                }
                None => {
                    self.pivots.insert(top, (row, rhs));
                    return Ok(());
                }
            }
        }
        if rhs {
            Err(Inconsistent { equation: index })
        } else {
            Ok(())
        }
    }

    pub fn solve_lex_min(&self) -> Vec<bool> {
        let mut values = vec![false; self.num_vars];
        for v in 0..self.num_vars {
            if let Some((row, rhs)) = self.pivots.get(&v) {
                let mut x = *rhs;
                for &u in row.range(..v) {
                    x ^= values[u];
                }
                values[v] = x;
            }
        }
        values
    }
}
