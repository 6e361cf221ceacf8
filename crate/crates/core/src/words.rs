//! Binary words, dyadic points, cylinders and finite unions of them.
//!
//! A point of the Cantor space `{0,1}^N` whose expansion is eventually zero is
//! named by its *stem*: the shortest word `u` with `x = u000...`. A cylinder
//! `C_u` is the set of sequences starting with `u`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A finite word over `{0, 1}`.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BinaryWord(Vec<u8>);

impl BinaryWord {
    pub fn empty() -> Self {
        BinaryWord(Vec::new())
    }

    /// Builds a word from digits, rejecting anything other than 0 and 1.
    pub fn from_digits(digits: Vec<u8>) -> Result<Self> {
        if let Some(&d) = digits.iter().find(|&&d| d > 1) {
            return Err(Error::Parse(format!("binary digit expected, found {d}")));
        }
        Ok(BinaryWord(digits))
    }

    pub fn digits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, bit: u8) -> Self {
        debug_assert!(bit < 2);
        let mut d = self.0.clone();
        d.push(bit);
        BinaryWord(d)
    }

    pub fn concat(&self, other: &BinaryWord) -> Self {
        let mut d = self.0.clone();
        d.extend_from_slice(&other.0);
        BinaryWord(d)
    }

    pub fn is_prefix_of(&self, other: &BinaryWord) -> bool {
        other.0.starts_with(&self.0)
    }

    /// True when one word is a prefix of the other.
    pub fn comparable(&self, other: &BinaryWord) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    pub fn strip_prefix(&self, prefix: &BinaryWord) -> Option<BinaryWord> {
        self.0.strip_prefix(prefix.0.as_slice()).map(|s| BinaryWord(s.to_vec()))
    }

    /// The word with its last digit removed.
    pub fn parent(&self) -> Option<BinaryWord> {
        if self.0.is_empty() {
            None
        } else {
            Some(BinaryWord(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn sibling(&self) -> Option<BinaryWord> {
        let last = *self.0.last()?;
        let mut d = self.0.clone();
        *d.last_mut().unwrap() = 1 - last;
        Some(BinaryWord(d))
    }

    pub fn last(&self) -> Option<u8> {
        self.0.last().copied()
    }

    /// Letterwise complement.
    pub fn negate(&self) -> Self {
        BinaryWord(self.0.iter().map(|d| 1 - d).collect())
    }

    /// Appends `n` zeros.
    pub fn pad_zeros(&self, n: usize) -> Self {
        let mut d = self.0.clone();
        d.extend(std::iter::repeat_n(0, n));
        BinaryWord(d)
    }

    /// All words of length exactly `n`, in lexicographic order.
    pub fn all_of_length(n: usize) -> Vec<BinaryWord> {
        let mut out = vec![BinaryWord::empty()];
        for _ in 0..n {
            out = out.iter().flat_map(|w| [w.child(0), w.child(1)]).collect();
        }
        out
    }
}

impl FromStr for BinaryWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "ε" || s == "e" {
            return Ok(BinaryWord::empty());
        }
        let mut d = Vec::with_capacity(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => d.push(0),
                '1' => d.push(1),
                _ => return Err(Error::Parse(format!("invalid binary digit {c:?} at position {i}"))),
            }
        }
        Ok(BinaryWord(d))
    }
}

impl fmt::Display for BinaryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        for d in &self.0 {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for BinaryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A dyadic rational `stem·000...`; the stem never ends in 0.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DyadicPoint(BinaryWord);

/// Strips trailing zeros so that `u00...` has exactly one name.
pub fn canonicalize(word: &BinaryWord) -> DyadicPoint {
    let d = word.digits();
    let end = d.iter().rposition(|&b| b == 1).map_or(0, |i| i + 1);
    DyadicPoint(BinaryWord(d[..end].to_vec()))
}

impl DyadicPoint {
    /// The basepoint `000...`.
    pub fn basepoint() -> Self {
        DyadicPoint(BinaryWord::empty())
    }

    pub fn stem(&self) -> &BinaryWord {
        &self.0
    }

    /// The first `n` digits of the infinite expansion.
    pub fn expansion(&self, n: usize) -> BinaryWord {
        if n <= self.0.len() {
            BinaryWord(self.0.digits()[..n].to_vec())
        } else {
            self.0.pad_zeros(n - self.0.len())
        }
    }

    /// True when `prefix` is a prefix of the infinite expansion.
    pub fn has_prefix(&self, prefix: &BinaryWord) -> bool {
        let s = self.0.digits();
        let p = prefix.digits();
        if p.len() <= s.len() {
            s.starts_with(p)
        } else {
            p.starts_with(s) && p[s.len()..].iter().all(|&b| b == 0)
        }
    }

    /// The tail after removing `prefix`, if `prefix` is a prefix of the expansion.
    pub fn tail_after(&self, prefix: &BinaryWord) -> Option<DyadicPoint> {
        if !self.has_prefix(prefix) {
            return None;
        }
        let s = self.0.digits();
        if prefix.len() >= s.len() {
            Some(DyadicPoint::basepoint())
        } else {
            Some(DyadicPoint(BinaryWord(s[prefix.len()..].to_vec())))
        }
    }

    /// The point `prefix · self`.
    pub fn prepend(&self, prefix: &BinaryWord) -> DyadicPoint {
        canonicalize(&prefix.concat(&self.0))
    }

    /// Every dyadic point whose stem has length at most `n`.
    pub fn all_up_to(n: usize) -> Vec<DyadicPoint> {
        let mut out = vec![DyadicPoint::basepoint()];
        for len in 1..=n {
            for w in BinaryWord::all_of_length(len - 1) {
                out.push(DyadicPoint(w.child(1)));
            }
        }
        out
    }
}

impl FromStr for DyadicPoint {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(canonicalize(&s.parse()?))
    }
}

impl fmt::Display for DyadicPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for DyadicPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P:{:?}", self.0)
    }
}

/// A standard dyadic interval `C_u`.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cylinder(pub BinaryWord);

impl Cylinder {
    pub fn whole() -> Self {
        Cylinder(BinaryWord::empty())
    }

    pub fn new(prefix: BinaryWord) -> Self {
        Cylinder(prefix)
    }

    pub fn prefix(&self) -> &BinaryWord {
        &self.0
    }

    /// The two halves `(C_{u0}, C_{u1})`.
    pub fn split(&self) -> (Cylinder, Cylinder) {
        (Cylinder(self.0.child(0)), Cylinder(self.0.child(1)))
    }

    pub fn contains(&self, x: &DyadicPoint) -> bool {
        x.has_prefix(&self.0)
    }

    /// `other ⊆ self`.
    pub fn contains_cylinder(&self, other: &Cylinder) -> bool {
        self.0.is_prefix_of(&other.0)
    }

    pub fn intersects(&self, other: &Cylinder) -> bool {
        self.0.comparable(&other.0)
    }
}

impl FromStr for Cylinder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .trim()
            .strip_prefix("C:")
            .ok_or_else(|| Error::Parse(format!("cylinder must look like C:<word>, got {s:?}")))?;
        Ok(Cylinder(body.parse()?))
    }
}

impl fmt::Display for Cylinder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C:{}", self.0)
    }
}

impl fmt::Debug for Cylinder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C:{:?}", self.0)
    }
}

/// Checks that `words` is a complete prefix code, i.e. the leaf set of a binary tree.
pub fn is_complete_prefix_code(words: &[BinaryWord]) -> bool {
    fn go(words: &[&[u8]]) -> bool {
        match words {
            [] => false,
            [[]] => true,
            _ => {
                if words.iter().any(|w| w.is_empty()) {
                    return false;
                }
                let left: Vec<&[u8]> = words.iter().filter(|w| w[0] == 0).map(|w| &w[1..]).collect();
                let right: Vec<&[u8]> = words.iter().filter(|w| w[0] == 1).map(|w| &w[1..]).collect();
                go(&left) && go(&right)
            }
        }
    }
    let slices: Vec<&[u8]> = words.iter().map(|w| w.digits()).collect();
    go(&slices)
}

/// A standard dyadic partition: cylinders whose prefixes are the leaves of a tree,
/// kept in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sdp(Vec<Cylinder>);

impl Sdp {
    pub fn new(mut cells: Vec<Cylinder>) -> Result<Self> {
        cells.sort();
        let words: Vec<BinaryWord> = cells.iter().map(|c| c.0.clone()).collect();
        if !is_complete_prefix_code(&words) {
            return Err(Error::InvalidPartition(
                words.iter().map(|w| format!("{w:?}")).collect::<Vec<_>>().join(","),
            ));
        }
        Ok(Sdp(cells))
    }

    pub fn trivial() -> Self {
        Sdp(vec![Cylinder::whole()])
    }

    pub fn cells(&self) -> &[Cylinder] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the cell containing `x`.
    pub fn locate(&self, x: &DyadicPoint) -> usize {
        self.0
            .iter()
            .position(|c| c.contains(x))
            .expect("a partition covers every point")
    }
}

/// A closed subset of Cantor space given by finitely many cylinders and
/// finitely many isolated dyadic points, in canonical form.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct SupportSet {
    cylinders: BTreeSet<Cylinder>,
    points: BTreeSet<DyadicPoint>,
}

impl SupportSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn whole() -> Self {
        Self::from_parts([Cylinder::whole()], [])
    }

    pub fn from_parts(
        cylinders: impl IntoIterator<Item = Cylinder>,
        points: impl IntoIterator<Item = DyadicPoint>,
    ) -> Self {
        let mut s = SupportSet {
            cylinders: cylinders.into_iter().collect(),
            points: points.into_iter().collect(),
        };
        s.normalize();
        s
    }

    pub fn point(x: DyadicPoint) -> Self {
        Self::from_parts([], [x])
    }

    pub fn cylinder(c: Cylinder) -> Self {
        Self::from_parts([c], [])
    }

    pub fn cylinders(&self) -> impl Iterator<Item = &Cylinder> {
        self.cylinders.iter()
    }

    pub fn points(&self) -> impl Iterator<Item = &DyadicPoint> {
        self.points.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.cylinders.is_empty() && self.points.is_empty()
    }

    fn normalize(&mut self) {
        // drop nested cylinders
        let sorted: Vec<Cylinder> = std::mem::take(&mut self.cylinders).into_iter().collect();
        let mut kept: Vec<Cylinder> = Vec::new();
        for c in sorted {
            // lexicographic order puts a prefix before its extensions
            if kept.last().is_some_and(|k| k.contains_cylinder(&c)) {
                continue;
            }
            kept.push(c);
        }
        let mut set: BTreeSet<Cylinder> = kept.into_iter().collect();
        // merge siblings bottom-up
        loop {
            let pair = set.iter().find_map(|c| {
                let sib = Cylinder(c.0.sibling()?);
                (c.0.last() == Some(0) && set.contains(&sib)).then(|| (c.clone(), sib))
            });
            match pair {
                Some((a, b)) => {
                    set.remove(&a);
                    set.remove(&b);
                    set.insert(Cylinder(a.0.parent().unwrap()));
                }
                None => break,
            }
        }
        self.cylinders = set;
        let cyl = &self.cylinders;
        self.points.retain(|x| !cyl.iter().any(|c| c.contains(x)));
    }

    pub fn contains_point(&self, x: &DyadicPoint) -> bool {
        self.points.contains(x) || self.cylinders.iter().any(|c| c.contains(x))
    }

    /// True when the cylinder is covered by the cylinders of this set.
    pub fn covers_cylinder(&self, c: &Cylinder) -> bool {
        if self.cylinders.iter().any(|k| k.contains_cylinder(c)) {
            return true;
        }
        // only finer cylinders can still cover c
        if !self.cylinders.iter().any(|k| c.contains_cylinder(k)) {
            return false;
        }
        let (l, r) = c.split();
        self.covers_cylinder(&l) && self.covers_cylinder(&r)
    }

    pub fn union(&self, other: &SupportSet) -> SupportSet {
        Self::from_parts(
            self.cylinders.iter().chain(&other.cylinders).cloned(),
            self.points.iter().chain(&other.points).cloned(),
        )
    }

    pub fn intersection(&self, other: &SupportSet) -> SupportSet {
        let mut cyl = Vec::new();
        for a in &self.cylinders {
            for b in &other.cylinders {
                if a.contains_cylinder(b) {
                    cyl.push(b.clone());
                } else if b.contains_cylinder(a) {
                    cyl.push(a.clone());
                }
            }
        }
        let pts = self
            .points
            .iter()
            .filter(|x| other.contains_point(x))
            .chain(other.points.iter().filter(|x| self.contains_point(x)))
            .cloned();
        Self::from_parts(cyl, pts)
    }

    pub fn is_disjoint(&self, other: &SupportSet) -> bool {
        self.cylinders
            .iter()
            .all(|a| other.cylinders.iter().all(|b| !a.intersects(b)))
            && self.points.iter().all(|x| !other.contains_point(x))
            && other.points.iter().all(|x| !self.contains_point(x))
    }

    pub fn is_subset(&self, other: &SupportSet) -> bool {
        self.cylinders.iter().all(|c| other.covers_cylinder(c))
            && self.points.iter().all(|x| other.contains_point(x))
    }
}

/// Canonical union.
pub fn support_union(s: &SupportSet, t: &SupportSet) -> SupportSet {
    s.union(t)
}

/// Exact disjointness of the denoted closed sets.
pub fn support_intersect_empty(s: &SupportSet, t: &SupportSet) -> bool {
    s.is_disjoint(t)
}

/// Exact equality of the denoted closed sets.
pub fn support_equal(s: &SupportSet, t: &SupportSet) -> bool {
    s == t
}

impl fmt::Display for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut items: Vec<String> = self.cylinders.iter().map(|c| c.to_string()).collect();
        items.extend(self.points.iter().map(|p| format!("P:{p}")));
        items.sort();
        write!(f, "{{{}}}", items.join(", "))
    }
}

impl fmt::Debug for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for SupportSet {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .trim()
            .strip_prefix('{')
            .and_then(|b| b.strip_suffix('}'))
            .ok_or_else(|| Error::Parse(format!("support set must be braced, got {s:?}")))?;
        let mut cyl = Vec::new();
        let mut pts = Vec::new();
        for item in body.split(',').map(str::trim).filter(|i| !i.is_empty()) {
            if let Some(w) = item.strip_prefix("P:") {
                pts.push(w.parse()?);
            } else {
                cyl.push(item.parse()?);
            }
        }
        Ok(SupportSet::from_parts(cyl, pts))
    }
}
