use std::cmp::Ordering;
use std::fmt;

/// A word in the free monoid on letters `0..d`; the empty word is the unit.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct NcWord(Vec<usize>);

impl NcWord {
    pub fn empty() -> Self {
        NcWord(Vec::new())
    }

    pub fn new(letters: Vec<usize>) -> Self {
        NcWord(letters)
    }

    pub fn letter(i: usize) -> Self {
        NcWord(vec![i])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn max_letter(&self) -> Option<usize> {
        self.0.iter().copied().max()
    }

    pub fn concat(&self, other: &NcWord) -> NcWord {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        NcWord(v)
    }

    /// Renames every letter through `f`.
    pub fn map_letters(&self, f: impl Fn(usize) -> usize) -> NcWord {
        NcWord(self.0.iter().map(|&l| f(l)).collect())
    }
}

/// Graded order: shorter words first, then lexicographic.
impl Ord for NcWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for NcWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for NcWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, l) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "·")?;
            }
            write!(f, "x{l}")?;
        }
        Ok(())
    }
}

impl From<Vec<usize>> for NcWord {
    fn from(v: Vec<usize>) -> Self {
        NcWord(v)
    }
}
