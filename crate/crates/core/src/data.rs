//! Data words, data values and register assignments.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// A data value. Only equality is observable; `Bot` is the initial register
/// content and never equals any concrete value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Datum {
    Bot,
    Val(u64),
}

impl fmt::Display for Datum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Datum::Bot => f.write_str("_"),
            Datum::Val(v) => write!(f, "{v}"),
        }
    }
}

/// One position of a data word: the set of atomic propositions that hold
/// there and the datum carried by the position.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub atoms: BTreeSet<String>,
    pub datum: Datum,
}

impl Letter {
    pub fn new<I, S>(atoms: I, datum: Datum) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Letter {
            atoms: atoms.into_iter().map(Into::into).collect(),
            datum,
        }
    }

    pub fn has(&self, atom: &str) -> bool {
        self.atoms.contains(atom)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("empty period")]
    EmptyPeriod,
}

/// An ultimately periodic data word `prefix · period^ω`.
///
/// Positions are 1-based: position 1 is the first letter of the prefix
/// (or of the period when the prefix is empty).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LassoWord {
    prefix: Vec<Letter>,
    period: Vec<Letter>,
}

impl LassoWord {
    pub fn new(prefix: Vec<Letter>, period: Vec<Letter>) -> Result<Self, WordError> {
        if period.is_empty() {
            return Err(WordError::EmptyPeriod);
        }
        Ok(LassoWord { prefix, period })
    }

    pub fn prefix(&self) -> &[Letter] {
        &self.prefix
    }

    pub fn period(&self) -> &[Letter] {
        &self.period
    }

    pub fn prefix_len(&self) -> usize {
        self.prefix.len()
    }

    pub fn period_len(&self) -> usize {
        self.period.len()
    }

    /// Number of distinct folded positions, `|prefix| + |period|`.
    pub fn folded_len(&self) -> usize {
        self.prefix.len() + self.period.len()
    }

    /// The letter at 1-based position `i`.
    ///
    /// # Panics
    ///
    /// Panics if `i == 0`.
    pub fn letter_at(&self, i: usize) -> &Letter {
        assert!(i >= 1, "positions are 1-based");
        let l = self.prefix.len();
        if i <= l {
            &self.prefix[i - 1]
        } else {
            &self.period[(i - l - 1) % self.period.len()]
        }
    }

    /// Maps a position onto `[1, |prefix| + |period|]`, identifying positions
    /// past the prefix that are congruent modulo the period length.
    pub fn fold(&self, i: usize) -> usize {
        let l = self.prefix.len();
        if i <= l {
            i
        } else {
            l + (i - l - 1) % self.period.len() + 1
        }
    }

    /// Successor of a folded position.
    pub fn next_folded(&self, rho: usize) -> usize {
        if rho < self.folded_len() {
            rho + 1
        } else {
            self.prefix.len() + 1
        }
    }

    /// All letters of the finite encoding, prefix first.
    pub fn letters(&self) -> impl Iterator<Item = &Letter> {
        self.prefix.iter().chain(self.period.iter())
    }

    /// `D_w`: the data values occurring in the word together with `⊥`,
    /// sorted and deduplicated.
    pub fn data_domain(&self) -> Vec<Datum> {
        let mut set: BTreeSet<Datum> = self.letters().map(|l| l.datum).collect();
        set.insert(Datum::Bot);
        set.into_iter().collect()
    }

    /// Atoms occurring anywhere in the word.
    pub fn atoms(&self) -> BTreeSet<&str> {
        self.letters()
            .flat_map(|l| l.atoms.iter().map(String::as_str))
            .collect()
    }

    /// The same infinite word with the prefix extended by one period and the
    /// period rotated accordingly.
    pub fn unrolled(&self) -> LassoWord {
        let mut prefix = self.prefix.clone();
        prefix.extend(self.period.iter().cloned());
        LassoWord {
            prefix,
            period: self.period.clone(),
        }
    }

    /// The same infinite word with the first period letter moved into the
    /// prefix and the period rotated left by one.
    pub fn shifted(&self) -> LassoWord {
        let mut prefix = self.prefix.clone();
        prefix.push(self.period[0].clone());
        let mut period = self.period.clone();
        period.rotate_left(1);
        LassoWord { prefix, period }
    }
}

/// A set of register indices, 1-based.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RegSet(BTreeSet<usize>);

impl RegSet {
    pub fn empty() -> Self {
        RegSet(BTreeSet::new())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, r: usize) -> bool {
        self.0.contains(&r)
    }

    pub fn insert(&mut self, r: usize) -> bool {
        self.0.insert(r)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn max(&self) -> Option<usize> {
        self.0.iter().next_back().copied()
    }

    /// Whether every index lies in `[1, k]`.
    pub fn within(&self, k: usize) -> bool {
        self.0.iter().all(|&r| r >= 1 && r <= k)
    }
}

impl<const N: usize> From<[usize; N]> for RegSet {
    fn from(regs: [usize; N]) -> Self {
        RegSet(regs.into_iter().collect())
    }
}

impl FromIterator<usize> for RegSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        RegSet(iter.into_iter().collect())
    }
}

impl fmt::Display for RegSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, r) in self.0.iter().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            write!(f, "{r}")?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("register {index} out of range [1, {k}]")]
pub struct RegisterOutOfRange {
    pub index: usize,
    pub k: usize,
}

/// Contents of the `k` registers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment(Vec<Datum>);

impl Assignment {
    /// `⊥^k`.
    pub fn bottom(k: usize) -> Self {
        Assignment(vec![Datum::Bot; k])
    }

    pub fn from_values(values: Vec<Datum>) -> Self {
        Assignment(values)
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[Datum] {
        &self.0
    }

    /// Value of register `r` (1-based).
    pub fn get(&self, r: usize) -> Result<Datum, RegisterOutOfRange> {
        if r == 0 || r > self.0.len() {
            return Err(RegisterOutOfRange {
                index: r,
                k: self.0.len(),
            });
        }
        Ok(self.0[r - 1])
    }

    /// `θ[R ← d]`.
    pub fn update(&self, regs: &RegSet, d: Datum) -> Result<Assignment, RegisterOutOfRange> {
        let k = self.0.len();
        if let Some(bad) = regs.iter().find(|&r| r == 0 || r > k) {
            return Err(RegisterOutOfRange { index: bad, k });
        }
        let mut out = self.0.clone();
        for r in regs.iter() {
            out[r - 1] = d;
        }
        Ok(Assignment(out))
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (n, d) in self.0.iter().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            write!(f, "{d}")?;
        }
        f.write_str("]")
    }
}
