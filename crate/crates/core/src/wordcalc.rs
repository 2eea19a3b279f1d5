//! Commutator certificates and the letter-moving calculus on words.
//!
//! Moving one letter of a word to the front or the back changes its value by exactly one
//! commutator. The functions here perform such moves and record the commutator, so every bound
//! comes with an explicit, checkable witness.

use crate::error::{Error, Result};
use crate::matrices::Matrix;
use crate::scalar::Scalar;
use crate::skewfield::Quaternion;

/// A group with exact equality. Elements passed to these methods are assumed invertible.
pub trait Group: Clone + PartialEq + std::fmt::Debug {
    fn op(&self, other: &Self) -> Self;
    fn inverse(&self) -> Self;
    fn identity_like(&self) -> Self;

    fn is_identity(&self) -> bool {
        *self == self.identity_like()
    }

    /// `[x, y] = x y x^-1 y^-1`.
    fn commutator(&self, other: &Self) -> Self {
        self.op(other).op(&self.inverse()).op(&other.inverse())
    }

    /// `c^-1 self c`.
    fn conjugate_by(&self, c: &Self) -> Self {
        c.inverse().op(self).op(c)
    }

    /// Decides `[self, other] = target` as `self other = target other self`, which avoids
    /// inverting the witnesses.
    fn commutator_is(&self, other: &Self, target: &Self) -> bool {
        self.op(other) == target.op(other).op(self)
    }
}

impl<F: Scalar> Group for Quaternion<F> {
    fn op(&self, other: &Self) -> Self {
        self * other
    }

    fn inverse(&self) -> Self {
        self.inv().expect("group element of D* must be invertible")
    }

    fn identity_like(&self) -> Self {
        self.one_like()
    }

    fn is_identity(&self) -> bool {
        self.is_one()
    }
}

impl<F: Scalar> Group for Matrix<F> {
    fn op(&self, other: &Self) -> Self {
        self * other
    }

    fn inverse(&self) -> Self {
        Matrix::inverse(self).expect("group element of GL(n, D) must be invertible")
    }

    fn identity_like(&self) -> Self {
        Matrix::identity_like(self)
    }

    fn is_identity(&self) -> bool {
        Matrix::is_identity(self)
    }
}

/// Ordered product of the elements; `one` is returned for an empty slice.
pub fn product<G: Group>(one: &G, elems: &[G]) -> G {
    elems.iter().fold(one.clone(), |acc, g| acc.op(g))
}

/// A claim `target = [g_1, h_1] ... [g_m, h_m]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorCert<G: Group> {
    pub pairs: Vec<(G, G)>,
    pub target: G,
}

impl<G: Group> CommutatorCert<G> {
    pub fn new(pairs: Vec<(G, G)>, target: G) -> Self {
        CommutatorCert { pairs, target }
    }

    pub fn trivial(target: G) -> Self {
        CommutatorCert {
            pairs: Vec::new(),
            target,
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The ordered product of the commutators.
    pub fn evaluate(&self) -> G {
        self.pairs
            .iter()
            .fold(self.target.identity_like(), |acc, (g, h)| {
                acc.op(&g.commutator(h))
            })
    }

    /// Checks the claim exactly. The last commutator is compared without inverting its
    /// witnesses, which keeps large entries from growing further.
    pub fn verify(&self) -> bool {
        let Some(((g, h), head)) = self.pairs.split_last() else {
            return self.target.is_identity();
        };
        let rest = if head.is_empty() {
            self.target.clone()
        } else {
            let prefix = head
                .iter()
                .fold(self.target.identity_like(), |acc, (a, b)| {
                    acc.op(&a.commutator(b))
                });
            prefix.inverse().op(&self.target)
        };
        g.commutator_is(h, &rest)
    }

    pub fn verified(self) -> Result<Self> {
        if self.verify() {
            Ok(self)
        } else {
            Err(Error::Verification(format!(
                "certificate with {} pairs does not reach its target",
                self.len()
            )))
        }
    }

    /// Conjugates the target and every pair component by `c` (`x -> c^-1 x c`).
    pub fn conjugate(&self, c: &G) -> Self {
        let ci = c.inverse();
        let conj = |x: &G| ci.op(x).op(c);
        CommutatorCert {
            pairs: self.pairs.iter().map(|(g, h)| (conj(g), conj(h))).collect(),
            target: conj(&self.target),
        }
    }

    /// Concatenation: certifies the product of the two targets.
    pub fn then(&self, other: &Self) -> Self {
        let mut pairs = self.pairs.clone();
        pairs.extend(other.pairs.iter().cloned());
        CommutatorCert {
            pairs,
            target: self.target.op(&other.target),
        }
    }

    /// Splits after `k` pairs into two certificates whose targets multiply to this one.
    pub fn split_at(&self, k: usize) -> (Self, Self) {
        let head: Vec<_> = self.pairs[..k].to_vec();
        let tail: Vec<_> = self.pairs[k..].to_vec();
        let one = self.target.identity_like();
        let mk = |p: Vec<(G, G)>| {
            let target = p
                .iter()
                .fold(one.clone(), |acc, (g, h)| acc.op(&g.commutator(h)));
            CommutatorCert { pairs: p, target }
        };
        (mk(head), mk(tail))
    }
}

/// Formal role of a letter: `A(i)` stands for `a_i^-1`, `B(j)` for `b_j` (one-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tag {
    A(usize),
    B(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Letter<G: Group> {
    pub tag: Tag,
    pub elem: G,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Word<G: Group> {
    pub letters: Vec<Letter<G>>,
}

impl<G: Group> Word<G> {
    pub fn new(letters: Vec<Letter<G>>) -> Self {
        Word { letters }
    }

    pub fn eval(&self, one: &G) -> G {
        self.letters
            .iter()
            .fold(one.clone(), |acc, l| acc.op(&l.elem))
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

fn eval_slice<G: Group>(one: &G, letters: &[Letter<G>]) -> G {
    letters.iter().fold(one.clone(), |acc, l| acc.op(&l.elem))
}

/// Moves letter `idx` to the front. With `w = u x v`, returns `x u v` and a pair `(g, h)` with
/// `eval(w) = eval(x u v) [g, h]`, namely `[g, h] = v^-1 [u^-1, x^-1] v`.
pub fn move_letter_front<G: Group>(w: &Word<G>, idx: usize, one: &G) -> Result<(Word<G>, (G, G))> {
    if idx >= w.len() {
        return Err(Error::InvalidIndex(format!(
            "letter {idx} of a word of length {}",
            w.len()
        )));
    }
    let (out, pair) = front_raw(w, idx, one);
    if w.eval(one) != out.eval(one).op(&pair.0.commutator(&pair.1)) {
        return Err(Error::Internal("front move identity failed".into()));
    }
    Ok((out, pair))
}

fn front_raw<G: Group>(w: &Word<G>, idx: usize, one: &G) -> (Word<G>, (G, G)) {
    let u = eval_slice(one, &w.letters[..idx]);
    let x = w.letters[idx].elem.clone();
    let v = eval_slice(one, &w.letters[idx + 1..]);
    let vi = v.inverse();
    let conj = |y: &G| vi.op(y).op(&v);
    let pair = (conj(&u.inverse()), conj(&x.inverse()));
    let mut letters = w.letters.clone();
    let moved = letters.remove(idx);
    letters.insert(0, moved);
    (Word::new(letters), pair)
}

/// Moves letter `idx` to the end. With `w = u x v`, returns `u v x` and `(x^-1, v^-1)`, since
/// `eval(w) = eval(u v x) [x^-1, v^-1]`.
pub fn move_letter_end<G: Group>(w: &Word<G>, idx: usize, one: &G) -> Result<(Word<G>, (G, G))> {
    if idx >= w.len() {
        return Err(Error::InvalidIndex(format!(
            "letter {idx} of a word of length {}",
            w.len()
        )));
    }
    let (out, pair) = end_raw(w, idx, one);
    if w.eval(one) != out.eval(one).op(&pair.0.commutator(&pair.1)) {
        return Err(Error::Internal("end move identity failed".into()));
    }
    Ok((out, pair))
}

fn end_raw<G: Group>(w: &Word<G>, idx: usize, one: &G) -> (Word<G>, (G, G)) {
    let x = w.letters[idx].elem.clone();
    let v = eval_slice(one, &w.letters[idx + 1..]);
    let pair = (x.inverse(), v.inverse());
    let mut letters = w.letters.clone();
    let moved = letters.remove(idx);
    letters.push(moved);
    (Word::new(letters), pair)
}

/// For `a_1 ... a_k = e`, a certificate for `a_1^-1 ... a_k^-1` with at most `max(0, k - 2)`
/// pairs.
///
/// The target is conjugate (by `a_1`) to the inverse of `a_1 a_k ... a_2`, which is reached
/// from `a_1 ... a_k` by `k - 2` end moves.
pub fn lemma8_cert<G: Group>(a: &[G], one: &G) -> Result<CommutatorCert<G>> {
    if !product(one, a).is_identity() {
        return Err(Error::Precondition(
            "lemma8_cert needs a_1 ... a_k = e".into(),
        ));
    }
    lemma8_unchecked(a, one).verified()
}

/// `lemma8_cert` without the precondition check and final verification.
pub(crate) fn lemma8_unchecked<G: Group>(a: &[G], one: &G) -> CommutatorCert<G> {
    let inverses: Vec<G> = a.iter().map(|g| g.inverse()).collect();
    let target = product(one, &inverses);
    let k = a.len();
    if k <= 2 {
        return CommutatorCert::trivial(target);
    }
    let mut word = Word::new(
        a.iter()
            .enumerate()
            .map(|(i, g)| Letter {
                tag: Tag::A(i + 1),
                elem: g.clone(),
            })
            .collect(),
    );
    let mut moves = Vec::with_capacity(k - 2);
    for i in 1..=k - 2 {
        // a_{k-i} sits at zero-based position k - i - 1 until it is moved.
        let pos = word
            .letters
            .iter()
            .position(|l| l.tag == Tag::A(k - i))
            .expect("letter present");
        let (next, pair) = end_raw(&word, pos, one);
        word = next;
        moves.push(pair);
    }
    // e = eval(final) c_m ... c_1, so the target a_1^-1 eval(final)^-1 a_1 is the conjugate of
    // c_m ... c_1 by a_1.
    let a1 = &a[0];
    let pairs: Vec<(G, G)> = moves.into_iter().rev().collect();
    let cert = CommutatorCert::new(pairs, a1.op(&target).op(&a1.inverse())).conjugate(a1);
    debug_assert!(cert.len() <= k - 2);
    CommutatorCert::new(cert.pairs, target)
}

/// Transfers a certificate through a relation word.
///
/// `w` contains each `a_i^-1` once in ascending order and each `b_j` once, and evaluates to the
/// identity. Given a certificate for `a = a_1^-1 ... a_p^-1`, returns one for
/// `b = b_1^-1 ... b_q^-1` with at most `|cert_a| + q - 1` pairs.
pub fn lemma7_cert<G: Group>(
    w: &Word<G>,
    cert_a: &CommutatorCert<G>,
    one: &G,
) -> Result<CommutatorCert<G>> {
    let mut a_tags: Vec<usize> = Vec::new();
    let mut b_elems: Vec<Option<G>> = Vec::new();
    for l in &w.letters {
        match l.tag {
            Tag::A(i) => a_tags.push(i),
            Tag::B(j) => {
                if j == 0 {
                    return Err(Error::Precondition("letter tags are one-based".into()));
                }
                if b_elems.len() < j {
                    b_elems.resize(j, None);
                }
                if b_elems[j - 1].replace(l.elem.clone()).is_some() {
                    return Err(Error::Precondition(format!("letter b_{j} occurs twice")));
                }
            }
        }
    }
    let p = a_tags.len();
    if a_tags != (1..=p).collect::<Vec<_>>() {
        return Err(Error::Precondition(
            "a letters must be a_1^-1, ..., a_p^-1 in ascending order".into(),
        ));
    }
    let b: Vec<G> = b_elems
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Precondition("b letters must be numbered 1..q".into()))?;
    let q = b.len();
    if q == 0 {
        return Err(Error::Precondition("lemma7_cert needs q >= 1".into()));
    }
    if !w.eval(one).is_identity() {
        return Err(Error::Precondition(
            "relation word does not evaluate to the identity".into(),
        ));
    }
    let a_letters: Vec<G> = w
        .letters
        .iter()
        .filter(|l| matches!(l.tag, Tag::A(_)))
        .map(|l| l.elem.clone())
        .collect();
    if cert_a.target != product(one, &a_letters) || !cert_a.verify() {
        return Err(Error::Precondition(
            "cert_a must verify a_1^-1 ... a_p^-1".into(),
        ));
    }
    let cert = lemma7_unchecked(w, cert_a, one).verified()?;
    if cert.len() > cert_a.len() + q - 1 {
        return Err(Error::Internal("lemma7_cert result over budget".into()));
    }
    Ok(cert)
}

/// `lemma7_cert` for a word already known to satisfy its preconditions; no verification.
pub(crate) fn lemma7_unchecked<G: Group>(
    w: &Word<G>,
    cert_a: &CommutatorCert<G>,
    one: &G,
) -> CommutatorCert<G> {
    let b: Vec<G> = {
        let mut b: Vec<(usize, G)> = w
            .letters
            .iter()
            .filter_map(|l| match l.tag {
                Tag::B(j) => Some((j, l.elem.clone())),
                Tag::A(_) => None,
            })
            .collect();
        b.sort_by_key(|(j, _)| *j);
        b.into_iter().map(|(_, g)| g).collect()
    };
    let q = b.len();
    let target = product(one, &b.iter().map(|g| g.inverse()).collect::<Vec<_>>());

    // Rotate so that b_1 comes first; the a-part becomes Q P where a = P Q.
    let start = w
        .letters
        .iter()
        .position(|l| l.tag == Tag::B(1))
        .expect("b_1 present");
    let mut letters = w.letters[start..].to_vec();
    letters.extend_from_slice(&w.letters[..start]);
    let prefix_a: Vec<G> = w.letters[..start]
        .iter()
        .filter(|l| matches!(l.tag, Tag::A(_)))
        .map(|l| l.elem.clone())
        .collect();
    let p_elem = product(one, &prefix_a);
    let rotated_a = cert_a.conjugate(&p_elem);

    let mut word = Word::new(letters);
    let mut moves = Vec::with_capacity(q - 1);
    for j in 2..=q {
        let pos = word
            .letters
            .iter()
            .position(|l| l.tag == Tag::B(j))
            .expect("letter present");
        let (next, pair) = front_raw(&word, pos, one);
        word = next;
        moves.push(pair);
    }
    // Now eval(word) = b^-1 a' and e = eval(word) c_m ... c_1, so b = a' c_m ... c_1.
    let mut pairs = rotated_a.pairs;
    pairs.extend(moves.into_iter().rev());
    CommutatorCert::new(pairs, target)
}
