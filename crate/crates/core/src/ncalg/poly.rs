use std::collections::BTreeMap;
use std::fmt;

use super::point::MatrixPoint;
use super::word::NcWord;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Polynomial in the free algebra on `num_letters` noncommuting letters.
///
/// Terms are kept sparse and canonical: no zero coefficient is ever stored.
#[derive(Clone, PartialEq)]
pub struct NcPoly<T> {
    num_letters: usize,
    terms: BTreeMap<NcWord, T>,
}

impl<T: Scalar> NcPoly<T> {
    pub fn zero(num_letters: usize) -> Self {
        Self { num_letters, terms: BTreeMap::new() }
    }

    pub fn constant(num_letters: usize, c: T) -> Self {
        Self::monomial(num_letters, NcWord::empty(), c)
    }

    pub fn letter(num_letters: usize, i: usize) -> Self {
        assert!(i < num_letters, "letter {i} out of range");
        Self::monomial(num_letters, NcWord::letter(i), T::one())
    }

    pub fn monomial(num_letters: usize, word: NcWord, c: T) -> Self {
        let mut p = Self::zero(num_letters);
        p.add_term(word, c);
        p
    }

    /// Builds from `(word, coefficient)` pairs, merging repeated words.
    pub fn from_terms(num_letters: usize, terms: impl IntoIterator<Item = (NcWord, T)>) -> Result<Self> {
        let mut p = Self::zero(num_letters);
        for (w, c) in terms {
            if let Some(l) = w.max_letter() {
                if l >= num_letters {
                    return Err(Error::LetterCountMismatch { expected: num_letters, found: l + 1 });
                }
            }
            p.add_term(w, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, w: NcWord, c: T) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&w) {
            Some(v) => {
                let s = v.add_ref(&c);
                if s.is_zero() {
                    self.terms.remove(&w);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(w, c);
            }
        }
    }

    pub fn num_letters(&self) -> usize {
        self.num_letters
    }

    pub fn terms(&self) -> impl Iterator<Item = (&NcWord, &T)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, w: &NcWord) -> T {
        self.terms.get(w).cloned().unwrap_or_else(T::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(NcWord::len).max()
    }

    /// Terms of word length exactly `ell`.
    pub fn homogeneous_part(&self, ell: usize) -> Self {
        Self {
            num_letters: self.num_letters,
            terms: self.terms.iter().filter(|(w, _)| w.len() == ell).map(|(w, c)| (w.clone(), c.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &T) -> Self {
        let mut p = Self::zero(self.num_letters);
        for (w, v) in &self.terms {
            p.add_term(w.clone(), v.mul_ref(c));
        }
        p
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.num_letters, other.num_letters, "letter count");
        let mut p = self.clone();
        for (w, c) in &other.terms {
            p.add_term(w.clone(), c.clone());
        }
        p
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-T::one()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.num_letters, other.num_letters, "letter count");
        let mut p = Self::zero(self.num_letters);
        for (u, a) in &self.terms {
            for (v, b) in &other.terms {
                p.add_term(u.concat(v), a.mul_ref(b));
            }
        }
        p
    }

    /// Moves every letter `i` to `offset + i` in an algebra on `num_letters` letters.
    pub fn embed(&self, num_letters: usize, offset: usize) -> Self {
        assert!(offset + self.num_letters <= num_letters, "embedding out of range");
        Self {
            num_letters,
            terms: self.terms.iter().map(|(w, c)| (w.map_letters(|l| l + offset), c.clone())).collect(),
        }
    }

    /// Terms sorted lexicographically as letter slices, the order the
    /// evaluation trie walks.
    fn lex_terms(&self) -> Vec<(&[usize], &T)> {
        let mut v: Vec<_> = self.terms.iter().map(|(w, c)| (w.letters(), c)).collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }

    /// Substitutes `subs[i]` for letter `i`.
    pub fn compose(&self, subs: &[NcPoly<T>]) -> Result<NcPoly<T>> {
        if subs.len() != self.num_letters {
            return Err(Error::LetterCountMismatch { expected: self.num_letters, found: subs.len() });
        }
        let target = subs.first().map_or(0, NcPoly::num_letters);
        if subs.iter().any(|s| s.num_letters != target) {
            return Err(Error::InvalidArgument("substitutions over different alphabets".into()));
        }
        let terms = self.lex_terms();
        Ok(compose_trie(&terms, 0, subs, target))
    }

    /// Evaluates at a matrix tuple: `Σ_w c_w X_{w1}···X_{wk}`, the empty word
    /// contributing `c_∅ · I_n`.
    pub fn eval(&self, x: &MatrixPoint<T>) -> Result<Matrix<T>> {
        if x.d() != self.num_letters {
            return Err(Error::LetterCountMismatch { expected: self.num_letters, found: x.d() });
        }
        Ok(self.eval_mats(x.mats(), x.n()))
    }

    /// Evaluation on raw square matrices of size `n` (no letter-count check).
    pub(crate) fn eval_mats(&self, mats: &[Matrix<T>], n: usize) -> Matrix<T> {
        let terms = self.lex_terms();
        eval_trie(&terms, 0, mats, n)
    }
}

/// Right Horner form over the word trie: `p = c_∅ + Σ_i x_i · p_i`.
fn eval_trie<T: Scalar>(terms: &[(&[usize], &T)], depth: usize, mats: &[Matrix<T>], n: usize) -> Matrix<T> {
    let mut out = Matrix::<T>::zeros(n, n);
    let mut i = 0;
    while i < terms.len() && terms[i].0.len() == depth {
        for k in 0..n {
            out[(k, k)] = out[(k, k)].add_ref(terms[i].1);
        }
        i += 1;
    }
    while i < terms.len() {
        let letter = terms[i].0[depth];
        let mut j = i + 1;
        while j < terms.len() && terms[j].0[depth] == letter {
            j += 1;
        }
        let tail = eval_trie(&terms[i..j], depth + 1, mats, n);
        out.add_assign_ref(&mats[letter].matmul(&tail));
        i = j;
    }
    out
}

fn compose_trie<T: Scalar>(terms: &[(&[usize], &T)], depth: usize, subs: &[NcPoly<T>], d: usize) -> NcPoly<T> {
    let mut out = NcPoly::zero(d);
    let mut i = 0;
    while i < terms.len() && terms[i].0.len() == depth {
        out.add_term(NcWord::empty(), terms[i].1.clone());
        i += 1;
    }
    while i < terms.len() {
        let letter = terms[i].0[depth];
        let mut j = i + 1;
        while j < terms.len() && terms[j].0[depth] == letter {
            j += 1;
        }
        let tail = compose_trie(&terms[i..j], depth + 1, subs, d);
        out = out.add(&subs[letter].mul(&tail));
        i = j;
    }
    out
}

impl<T: Scalar> fmt::Debug for NcPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (w, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})·{w:?}")?;
        }
        Ok(())
    }
}

/// Vector-valued polynomial map `F(X, Y)` whose letters split into an
/// X-block of `a` letters followed by a Y-block of `b` letters.
#[derive(Clone, PartialEq)]
pub struct NcPolyMap<T> {
    components: Vec<NcPoly<T>>,
    split: (usize, usize),
}

impl<T: Scalar> NcPolyMap<T> {
    pub fn new(components: Vec<NcPoly<T>>, split: (usize, usize)) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument("polynomial map needs at least one component".into()));
        }
        let d = split.0 + split.1;
        for p in &components {
            if p.num_letters() != d {
                return Err(Error::LetterCountMismatch { expected: d, found: p.num_letters() });
            }
        }
        Ok(Self { components, split })
    }

    pub fn components(&self) -> &[NcPoly<T>] {
        &self.components
    }

    /// Number of output components `c`.
    pub fn num_outputs(&self) -> usize {
        self.components.len()
    }

    pub fn x_letters(&self) -> usize {
        self.split.0
    }

    pub fn y_letters(&self) -> usize {
        self.split.1
    }

    pub fn num_letters(&self) -> usize {
        self.split.0 + self.split.1
    }

    /// Evaluates every component at a joint point carrying all `a + b` letters.
    pub fn eval(&self, joint: &MatrixPoint<T>) -> Result<Vec<Matrix<T>>> {
        self.components.iter().map(|p| p.eval(joint)).collect()
    }

    pub fn eval_xy(&self, x: Option<&MatrixPoint<T>>, y: &MatrixPoint<T>) -> Result<Vec<Matrix<T>>> {
        let joint = match x {
            Some(x) => x.concat(y)?,
            None => y.clone(),
        };
        self.eval(&joint)
    }

    /// `F(X, Y) = g(Y) − X` for a square map `g` with no X letters.
    pub fn inverse_problem(g: &NcPolyMap<T>) -> Result<Self> {
        if g.x_letters() != 0 {
            return Err(Error::InvalidArgument("inverse problem expects a map of Y letters only".into()));
        }
        let b = g.y_letters();
        if g.num_outputs() != b {
            return Err(Error::NotSquare { inputs: b, outputs: g.num_outputs() });
        }
        let comps =
            g.components.iter().enumerate().map(|(k, p)| p.embed(2 * b, b).sub(&NcPoly::letter(2 * b, k))).collect();
        Self::new(comps, (b, b))
    }
}

impl<T: Scalar> fmt::Debug for NcPolyMap<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NcPolyMap").field("split", &self.split).field("components", &self.components).finish()
    }
}
