//! Network representation: truth tables, packed states and the immutable
//! network structure every other module runs on.
//!
//! Truth-table rows are indexed by the input configuration read as a binary
//! number with the first listed input as the most significant bit. For a
//! two-input function `F(A, B)` the rows are `00, 01, 10, 11`, so `"0111"` is
//! `A OR B`.

use std::cmp::Ordering;
use std::fmt;

use rand::RngCore;

use crate::error::{Error, Result};

/// Largest arity accepted for a truth table (2^16 rows).
pub const MAX_ARITY: usize = 16;

/// Output column of a Boolean function of `arity` ordered inputs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TruthTable {
    arity: usize,
    outputs: Vec<bool>,
}

impl TruthTable {
    pub fn new(arity: usize, outputs: Vec<bool>) -> Result<Self> {
        if arity == 0 {
            return Err(Error::param("truth table arity must be at least 1"));
        }
        if arity > MAX_ARITY {
            return Err(Error::param(format!(
                "truth table arity {arity} exceeds the maximum of {MAX_ARITY}"
            )));
        }
        if outputs.len() != 1 << arity {
            return Err(Error::contract(format!(
                "arity {arity} needs {} output rows, got {}",
                1usize << arity,
                outputs.len()
            )));
        }
        Ok(Self { arity, outputs })
    }

    /// Parses a bitstring such as `"0111"`; the arity is log2 of its length.
    pub fn from_bitstring(bits: &str) -> Result<Self> {
        let len = bits.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::contract(format!(
                "table length {len} is not 2^k for any k >= 1"
            )));
        }
        let outputs = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::contract(format!(
                    "unexpected character {other:?} in table"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(len.trailing_zeros() as usize, outputs)
    }

    /// Constant function of the given arity.
    pub fn constant(arity: usize, value: bool) -> Result<Self> {
        let rows = if (1..=MAX_ARITY).contains(&arity) {
            1 << arity
        } else {
            0
        };
        Self::new(arity, vec![value; rows])
    }

    #[inline]
    pub fn arity(&self) -> usize {
        self.arity
    }

    #[inline]
    pub fn outputs(&self) -> &[bool] {
        &self.outputs
    }

    /// Output on the row with the given MSB-first index.
    #[inline]
    pub fn output(&self, index: usize) -> bool {
        self.outputs[index]
    }

    /// Evaluates the function on an input configuration listed in input order.
    pub fn eval(&self, config: &[bool]) -> Result<bool> {
        if config.len() != self.arity {
            return Err(Error::contract(format!(
                "configuration has {} values, table arity is {}",
                config.len(),
                self.arity
            )));
        }
        Ok(self.outputs[row_index(config)])
    }

    /// Bit mask of input `j` inside a row index.
    #[inline]
    pub fn input_mask(&self, j: usize) -> usize {
        1 << (self.arity - 1 - j)
    }

    pub fn complement(&self) -> Self {
        Self {
            arity: self.arity,
            outputs: self.outputs.iter().map(|b| !b).collect(),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.outputs.iter().all(|&b| b == self.outputs[0])
    }

    pub fn to_bitstring(&self) -> String {
        self.outputs
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect()
    }
}

impl fmt::Display for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bitstring())
    }
}

/// Row index of a configuration, first value most significant.
#[inline]
pub fn row_index(config: &[bool]) -> usize {
    config.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

/// Evaluates `table` on `config`.
pub fn eval_table(table: &TruthTable, config: &[bool]) -> Result<bool> {
    table.eval(config)
}

/// Fixed-length bit vector, bit `i` holding the value of node `i`.
///
/// Ordering is lexicographic over `x_0, x_1, ...` with `0 < 1`, which is the
/// order used to rotate attractor cycles into canonical form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct NetworkState {
    len: usize,
    words: Vec<u64>,
}

impl NetworkState {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut s = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            s.set(i, b);
        }
        s
    }

    /// Parses `"x0x1x2..."`.
    pub fn from_bitstring(bits: &str) -> Result<Self> {
        let mut s = Self::zeros(bits.len());
        for (i, c) in bits.chars().enumerate() {
            match c {
                '0' => {}
                '1' => s.set(i, true),
                other => {
                    return Err(Error::contract(format!(
                        "unexpected character {other:?} in state"
                    )))
                }
            }
        }
        Ok(s)
    }

    /// State whose bit `i` is bit `i` of `code` (requires `len <= 64`).
    pub fn from_code(len: usize, code: u64) -> Self {
        assert!(len <= 64, "from_code supports at most 64 nodes");
        let mut s = Self::zeros(len);
        if len > 0 {
            s.words[0] = code & mask(len);
        }
        s
    }

    /// Inverse of [`NetworkState::from_code`].
    pub fn to_code(&self) -> u64 {
        assert!(self.len <= 64, "to_code supports at most 64 nodes");
        self.words.first().copied().unwrap_or(0)
    }

    /// Uniformly random state.
    pub fn random<R: RngCore + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut s = Self::zeros(len);
        for w in s.words.iter_mut() {
            *w = rng.next_u64();
        }
        s.clear_tail();
        s
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let bit = 1u64 << (i & 63);
        if value {
            self.words[i >> 6] |= bit;
        } else {
            self.words[i >> 6] &= !bit;
        }
    }

    #[inline]
    pub fn toggle(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i >> 6] ^= 1u64 << (i & 63);
    }

    /// Copy of the state with bit `i` flipped.
    pub fn flipped(&self, i: usize) -> Result<Self> {
        if i >= self.len {
            return Err(Error::contract(format!(
                "node index {i} out of range for a state of {} bits",
                self.len
            )));
        }
        let mut s = self.clone();
        s.toggle(i);
        Ok(s)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Indices where `self` and `other` differ. Lengths must match.
    pub(crate) fn diff_indices(&self, other: &Self) -> Vec<usize> {
        debug_assert_eq!(self.len, other.len);
        let mut out = Vec::new();
        for (w, (a, b)) in self.words.iter().zip(&other.words).enumerate() {
            let mut d = a ^ b;
            while d != 0 {
                out.push(w * 64 + d.trailing_zeros() as usize);
                d &= d - 1;
            }
        }
        out
    }

    /// `self |= a ^ b`, word-wise. All lengths must match.
    pub(crate) fn accumulate_diff(&mut self, a: &Self, b: &Self) {
        debug_assert!(self.len == a.len && a.len == b.len);
        for ((acc, x), y) in self.words.iter_mut().zip(&a.words).zip(&b.words) {
            *acc |= x ^ y;
        }
    }

    /// Indices of the set bits.
    pub fn ones(&self) -> Vec<usize> {
        self.diff_indices(&Self::zeros(self.len))
    }

    #[inline]
    pub(crate) fn hamming_unchecked(&self, other: &Self) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn to_bitstring(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }

    fn clear_tail(&mut self) {
        let rem = self.len & 63;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= mask(rem);
            }
        }
    }
}

#[inline]
fn mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

impl Ord for NetworkState {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len.cmp(&other.len).then_with(|| {
            for (a, b) in self.words.iter().zip(&other.words) {
                match a.reverse_bits().cmp(&b.reverse_bits()) {
                    Ordering::Equal => continue,
                    ord => return ord,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for NetworkState {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for NetworkState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bitstring())
    }
}

impl fmt::Debug for NetworkState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NetworkState({self})")
    }
}

/// Number of positions where `a` and `b` differ.
pub fn hamming_distance(a: &NetworkState, b: &NetworkState) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::contract(format!(
            "hamming distance of states with {} and {} bits",
            a.len(),
            b.len()
        )));
    }
    Ok(a.hamming_unchecked(b))
}

/// `s` with bit `i` flipped.
pub fn flip_bit(s: &NetworkState, i: usize) -> Result<NetworkState> {
    s.flipped(i)
}

/// Structural irregularities allowed in imported networks but never produced
/// by the generators.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StructureFlags {
    pub self_loops: bool,
    pub duplicate_inputs: bool,
}

/// Immutable network: per-node ordered inputs and truth tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BooleanNetwork {
    inputs: Vec<Vec<usize>>,
    tables: Vec<TruthTable>,
    out_degree: Vec<usize>,
    successors: Vec<Vec<usize>>,
    flags: StructureFlags,
}

impl BooleanNetwork {
    pub fn new(inputs: Vec<Vec<usize>>, tables: Vec<TruthTable>) -> Result<Self> {
        let n = inputs.len();
        if n == 0 {
            return Err(Error::contract("a network needs at least one node"));
        }
        if tables.len() != n {
            return Err(Error::contract(format!(
                "{n} input lists but {} truth tables",
                tables.len()
            )));
        }
        let mut out_degree = vec![0; n];
        let mut successors = vec![Vec::new(); n];
        let mut flags = StructureFlags::default();
        for (i, (srcs, table)) in inputs.iter().zip(&tables).enumerate() {
            if srcs.len() != table.arity() {
                return Err(Error::contract(format!(
                    "node {i} has {} inputs but a table of arity {}",
                    srcs.len(),
                    table.arity()
                )));
            }
            for (pos, &src) in srcs.iter().enumerate() {
                if src >= n {
                    return Err(Error::contract(format!(
                        "node {i} input {src} is outside 0..{n}"
                    )));
                }
                if src == i {
                    flags.self_loops = true;
                }
                if srcs[..pos].contains(&src) {
                    flags.duplicate_inputs = true;
                } else {
                    successors[src].push(i);
                }
                out_degree[src] += 1;
            }
        }
        Ok(Self {
            inputs,
            tables,
            out_degree,
            successors,
            flags,
        })
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.inputs.len()
    }

    #[inline]
    pub fn inputs(&self, node: usize) -> &[usize] {
        &self.inputs[node]
    }

    #[inline]
    pub fn table(&self, node: usize) -> &TruthTable {
        &self.tables[node]
    }

    pub fn all_inputs(&self) -> &[Vec<usize>] {
        &self.inputs
    }

    pub fn tables(&self) -> &[TruthTable] {
        &self.tables
    }

    /// Number of arcs leaving `node`, counting repeated arcs.
    #[inline]
    pub fn out_degree(&self, node: usize) -> usize {
        self.out_degree[node]
    }

    /// Distinct nodes that read `node`, ascending.
    #[inline]
    pub fn successors(&self, node: usize) -> &[usize] {
        &self.successors[node]
    }

    pub fn mean_out_degree(&self) -> f64 {
        self.out_degree.iter().sum::<usize>() as f64 / self.n_nodes() as f64
    }

    pub fn mean_in_degree(&self) -> f64 {
        self.inputs.iter().map(Vec::len).sum::<usize>() as f64 / self.n_nodes() as f64
    }

    pub fn flags(&self) -> StructureFlags {
        self.flags
    }

    /// Row index node `node` reads from `s`.
    #[inline]
    pub fn row_for(&self, node: usize, s: &NetworkState) -> usize {
        self.inputs[node]
            .iter()
            .fold(0, |acc, &src| (acc << 1) | s.get(src) as usize)
    }

    /// Next value of `node` given the current state.
    #[inline]
    pub fn node_update(&self, node: usize, s: &NetworkState) -> bool {
        self.tables[node].output(self.row_for(node, s))
    }

    /// Copy of the network with `node`'s table replaced by a constant of the
    /// same arity.
    pub fn with_constant_node(&self, node: usize, value: bool) -> Result<Self> {
        if node >= self.n_nodes() {
            return Err(Error::contract(format!("node {node} out of range")));
        }
        let mut tables = self.tables.clone();
        tables[node] = TruthTable::constant(tables[node].arity(), value)?;
        Self::new(self.inputs.clone(), tables)
    }
}
