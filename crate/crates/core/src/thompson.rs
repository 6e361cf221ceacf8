//! Thompson's group V as reduced tables of prefix replacements.
//!
//! An element is a bijection between the cells of two standard dyadic
//! partitions, acting by `d·x ↦ r·x`. Products are function composition:
//! `mul(v, w) = v ∘ w`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::forest::{Permutation, Tree};
use crate::words::{
    is_complete_prefix_code, BinaryWord, Cylinder, DyadicPoint, Sdp, SupportSet,
};

/// Exponent `n` of a slope `v'(x) = 2^n`.
pub type SlopeExp = i64;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VElement {
    // domain prefix -> range prefix, sorted by domain
    pairs: Vec<(BinaryWord, BinaryWord)>,
}

impl VElement {
    pub fn identity() -> Self {
        VElement { pairs: vec![(BinaryWord::empty(), BinaryWord::empty())] }
    }

    /// Builds the reduced element from any (possibly unreduced) table.
    pub fn from_pairs(pairs: Vec<(BinaryWord, BinaryWord)>) -> Result<Self> {
        let dom: Vec<BinaryWord> = pairs.iter().map(|p| p.0.clone()).collect();
        let ran: Vec<BinaryWord> = pairs.iter().map(|p| p.1.clone()).collect();
        if !is_complete_prefix_code(&dom) {
            return Err(Error::InvalidPartition(format!("domain {dom:?}")));
        }
        if !is_complete_prefix_code(&ran) {
            return Err(Error::InvalidPartition(format!("range {ran:?}")));
        }
        Ok(Self::reduce_map(pairs.into_iter().collect()))
    }

    fn reduce_map(mut map: BTreeMap<BinaryWord, BinaryWord>) -> Self {
        loop {
            let merge = map.iter().find_map(|(d, r)| {
                if d.last() != Some(0) || r.last() != Some(0) {
                    return None;
                }
                let d1 = d.sibling()?;
                let r1 = map.get(&d1)?;
                (Some(r1) == r.sibling().as_ref()).then(|| (d.clone(), d1))
            });
            match merge {
                Some((d0, d1)) => {
                    let r0 = map.remove(&d0).unwrap();
                    map.remove(&d1);
                    map.insert(d0.parent().unwrap(), r0.parent().unwrap());
                }
                None => break,
            }
        }
        VElement { pairs: map.into_iter().collect() }
    }

    /// `l_t^i x ↦ l_s^{σ(i)} x`.
    pub fn make(t: &Tree, sigma: &Permutation, s: &Tree) -> Result<Self> {
        let dl = t.leaves();
        let rl = s.leaves();
        if dl.len() != rl.len() {
            return Err(Error::SizeMismatch { expected: dl.len(), found: rl.len() });
        }
        if sigma.len() != dl.len() {
            return Err(Error::SizeMismatch { expected: dl.len(), found: sigma.len() });
        }
        Self::from_pairs((0..dl.len()).map(|i| (dl[i].clone(), rl[sigma.apply(i)].clone())).collect())
    }

    /// The triple `(t, σ, s)` of the reduced diagram.
    pub fn to_triple(&self) -> (Tree, Permutation, Tree) {
        let dom: Vec<BinaryWord> = self.pairs.iter().map(|p| p.0.clone()).collect();
        let mut ran: Vec<BinaryWord> = self.pairs.iter().map(|p| p.1.clone()).collect();
        ran.sort();
        let sigma = Permutation::new(
            self.pairs.iter().map(|(_, r)| ran.binary_search(r).expect("range cell")).collect(),
        )
        .expect("pairing is bijective");
        (
            Tree::from_leaves(&dom).expect("domain prefix code"),
            sigma,
            Tree::from_leaves(&ran).expect("range prefix code"),
        )
    }

    pub fn from_sdp_bijection(domain: &Sdp, range: &Sdp, pairing: &Permutation) -> Result<Self> {
        if domain.len() != range.len() {
            return Err(Error::SizeMismatch { expected: domain.len(), found: range.len() });
        }
        if pairing.len() != domain.len() {
            return Err(Error::SizeMismatch { expected: domain.len(), found: pairing.len() });
        }
        Self::from_pairs(
            (0..domain.len())
                .map(|i| {
                    (domain.cells()[i].prefix().clone(), range.cells()[pairing.apply(i)].prefix().clone())
                })
                .collect(),
        )
    }

    pub fn pairs(&self) -> &[(BinaryWord, BinaryWord)] {
        &self.pairs
    }

    pub fn size(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_identity(&self) -> bool {
        self.pairs.len() == 1 && self.pairs[0].0.is_empty()
    }

    /// Longest prefix in the table.
    pub fn max_depth(&self) -> usize {
        self.pairs.iter().map(|(d, r)| d.len().max(r.len())).max().unwrap_or(0)
    }

    /// True when the cells are mapped in order (the element lies in F).
    pub fn is_in_f(&self) -> bool {
        self.pairs.windows(2).all(|w| w[0].1 < w[1].1)
    }

    /// `self ∘ other`.
    pub fn mul(&self, other: &VElement) -> VElement {
        let mut map = BTreeMap::new();
        for (d, r) in &other.pairs {
            for (d2, r2) in &self.pairs {
                if let Some(rest) = r.strip_prefix(d2) {
                    map.insert(d.clone(), r2.concat(&rest));
                } else if let Some(rest) = d2.strip_prefix(r) {
                    map.insert(d.concat(&rest), r2.clone());
                }
            }
        }
        Self::reduce_map(map)
    }

    pub fn inv(&self) -> VElement {
        Self::reduce_map(self.pairs.iter().map(|(d, r)| (r.clone(), d.clone())).collect())
    }

    pub fn pow(&self, n: i64) -> VElement {
        let base = if n < 0 { self.inv() } else { self.clone() };
        let mut acc = VElement::identity();
        for _ in 0..n.unsigned_abs() {
            acc = acc.mul(&base);
        }
        acc
    }

    /// `self · other · self⁻¹`.
    pub fn conj(&self, other: &VElement) -> VElement {
        self.mul(other).mul(&self.inv())
    }

    /// The pair whose domain cell contains `x`.
    pub fn cell_of(&self, x: &DyadicPoint) -> &(BinaryWord, BinaryWord) {
        self.pairs.iter().find(|(d, _)| x.has_prefix(d)).expect("domain cells cover every point")
    }

    pub fn act_point(&self, x: &DyadicPoint) -> DyadicPoint {
        let (d, r) = self.cell_of(x);
        x.tail_after(d).expect("cell contains x").prepend(r)
    }

    /// Image of a word prefix: `v(u·x) = w·x` when `u` lies inside one domain
    /// cell.
    pub fn act_word(&self, u: &BinaryWord) -> Option<BinaryWord> {
        self.pairs.iter().find_map(|(d, r)| u.strip_prefix(d).map(|rest| r.concat(&rest)))
    }

    pub fn act_cylinder(&self, c: &Cylinder) -> SupportSet {
        let u = c.prefix();
        let cells = self.pairs.iter().filter_map(|(d, r)| {
            if let Some(rest) = u.strip_prefix(d) {
                Some(Cylinder::new(r.concat(&rest)))
            } else if u.is_prefix_of(d) {
                Some(Cylinder::new(r.clone()))
            } else {
                None
            }
        });
        SupportSet::from_parts(cells, [])
    }

    pub fn act_support(&self, s: &SupportSet) -> SupportSet {
        let mut out = SupportSet::from_parts([], s.points().map(|x| self.act_point(x)));
        for c in s.cylinders() {
            out = out.union(&self.act_cylinder(c));
        }
        out
    }

    /// `log₂ v'(x)`.
    pub fn slope(&self, x: &DyadicPoint) -> SlopeExp {
        let (d, r) = self.cell_of(x);
        d.len() as i64 - r.len() as i64
    }

    /// True when `v` fixes `C_u` pointwise.
    pub fn fixes(&self, c: &Cylinder) -> bool {
        self.pairs
            .iter()
            .filter(|(d, _)| d.comparable(c.prefix()))
            .all(|(d, r)| d == r)
    }

    /// True when `v(s) = s`.
    pub fn stabilizes(&self, s: &SupportSet) -> bool {
        &self.act_support(s) == s
    }

    /// The table refined so that every domain cell has length at least
    /// `depth` (an unreduced representative of the same element).
    pub fn refined_pairs(&self, depth: usize) -> Vec<(BinaryWord, BinaryWord)> {
        let mut out = Vec::new();
        for (d, r) in &self.pairs {
            let extra = depth.saturating_sub(d.len());
            for tail in BinaryWord::all_of_length(extra) {
                out.push((d.concat(&tail), r.concat(&tail)));
            }
        }
        out
    }
}

/// The cells of the complement of finitely many pairwise disjoint cylinders,
/// in lexicographic order.
pub fn complement_cells(taken: &[BinaryWord]) -> Vec<BinaryWord> {
    fn go(at: BinaryWord, taken: &[BinaryWord], out: &mut Vec<BinaryWord>) {
        if taken.iter().any(|t| t.is_prefix_of(&at)) {
            return;
        }
        if !taken.iter().any(|t| at.is_prefix_of(t)) {
            out.push(at);
            return;
        }
        go(at.child(0), taken, out);
        go(at.child(1), taken, out);
    }
    let mut out = Vec::new();
    go(BinaryWord::empty(), taken, &mut out);
    out
}

/// Some `v` with `v(u·x) = m·x`; the complementary cells are paired in
/// lexicographic order, splitting the last cell of the shorter list until
/// the counts agree.
pub fn prefix_transport(u: &BinaryWord, m: &BinaryWord) -> Result<VElement> {
    extend_partial(vec![(u.clone(), m.clone())])
}

/// Extends a partial prefix-replacement map (disjoint domain cells onto
/// disjoint range cells) to an element of V, pairing the complements as in
/// [`prefix_transport`].
pub fn extend_partial(given: Vec<(BinaryWord, BinaryWord)>) -> Result<VElement> {
    let ds: Vec<BinaryWord> = given.iter().map(|p| p.0.clone()).collect();
    let rs: Vec<BinaryWord> = given.iter().map(|p| p.1.clone()).collect();
    let mut cu = complement_cells(&ds);
    let mut cm = complement_cells(&rs);
    if cu.is_empty() != cm.is_empty() {
        return Err(Error::Unsatisfiable { from: format!("{ds:?}"), to: format!("{rs:?}") });
    }
    let grow = |cells: &mut Vec<BinaryWord>, n: usize| {
        while cells.len() < n {
            let last = cells.pop().expect("nonempty complement");
            cells.push(last.child(0));
            cells.push(last.child(1));
        }
    };
    let n = cu.len().max(cm.len());
    grow(&mut cu, n);
    grow(&mut cm, n);
    let mut pairs: Vec<(BinaryWord, BinaryWord)> = cu.into_iter().zip(cm).collect();
    pairs.extend(given);
    VElement::from_pairs(pairs)
}

/// Interchanges `J0` and `J1` by prefix replacement and fixes everything
/// else, in particular every cylinder in `fixed`.
pub fn swap_sdis(j0: &Cylinder, j1: &Cylinder, fixed: &[Cylinder]) -> Result<VElement> {
    let all: Vec<&Cylinder> = [j0, j1].into_iter().chain(fixed).collect();
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            if all[i].intersects(all[j]) {
                return Err(Error::Overlap(format!("{} and {}", all[i], all[j])));
            }
        }
    }
    let taken = [j0.prefix().clone(), j1.prefix().clone()];
    let mut pairs: Vec<(BinaryWord, BinaryWord)> =
        complement_cells(&taken).into_iter().map(|c| (c.clone(), c)).collect();
    pairs.push((taken[0].clone(), taken[1].clone()));
    pairs.push((taken[1].clone(), taken[0].clone()));
    VElement::from_pairs(pairs)
}

fn fmt_word(w: &BinaryWord) -> String {
    if w.is_empty() {
        "ε".into()
    } else {
        w.to_string()
    }
}

impl fmt::Display for VElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.pairs.iter().map(|(d, r)| format!("{}->{}", fmt_word(d), fmt_word(r))).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

impl fmt::Debug for VElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for VElement {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "id" {
            return Ok(VElement::identity());
        }
        let body = s
            .strip_prefix('{')
            .and_then(|b| b.strip_suffix('}'))
            .ok_or_else(|| Error::Parse(format!("element of V must be braced, got {s:?}")))?;
        let pairs = body
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| {
                let (d, r) = p
                    .split_once("->")
                    .ok_or_else(|| Error::Parse(format!("expected d->r, got {p:?}")))?;
                Ok((d.parse()?, r.parse()?))
            })
            .collect::<Result<Vec<_>>>()?;
        VElement::from_pairs(pairs)
    }
}

/// The F-generator `x₀`: `0 → 00, 10 → 01, 11 → 1`.
pub fn x0() -> VElement {
    "{0->00, 10->01, 11->1}".parse().expect("valid literal")
}

/// The cell swap `0 ↔ 1`.
pub fn cell_swap() -> VElement {
    "{0->1, 1->0}".parse().expect("valid literal")
}

/// Points whose stem is at most `n` long, as a faithfulness probe set.
pub fn probe_points(n: usize) -> Vec<DyadicPoint> {
    DyadicPoint::all_up_to(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use proptest::prelude::*;

    fn w(s: &str) -> BinaryWord {
        s.parse().unwrap()
    }
    fn p(s: &str) -> DyadicPoint {
        s.parse().unwrap()
    }
    fn c(s: &str) -> Cylinder {
        Cylinder::new(w(s))
    }
    fn t(s: &str) -> Tree {
        s.parse().unwrap()
    }

    #[test]
    fn make_examples() {
        assert!(VElement::make(&Tree::caret(), &Permutation::identity(2), &Tree::caret())
            .unwrap()
            .is_identity());
        let sw = VElement::make(&Tree::caret(), &Permutation::transposition(2, 0, 1), &Tree::caret())
            .unwrap();
        assert_eq!(sw, cell_swap());
        assert!(!sw.is_in_f());
        let x = VElement::make(&t("[0,10,11]"), &Permutation::identity(3), &t("[00,01,1]")).unwrap();
        assert_eq!(x, x0());
        assert_eq!(x.size(), 3);
        assert!(x.is_in_f());
        assert!(VElement::make(&Tree::caret(), &Permutation::identity(2), &Tree::Leaf).is_err());
    }

    #[test]
    fn mul_examples() {
        let x = x0();
        assert!(x.mul(&x.inv()).is_identity());
        let xx = x.mul(&x);
        assert_eq!(xx.act_word(&w("0")), Some(w("000")));
        assert_eq!(VElement::identity().mul(&x), x);
    }

    #[test]
    fn act_point_examples() {
        assert_eq!(VElement::identity().act_point(&p("0101")), p("0101"));
        assert_eq!(x0().act_point(&p("1")), p("01"));
        assert_eq!(cell_swap().act_point(&p("")), p("1"));
    }

    #[test]
    fn act_cylinder_examples() {
        assert_eq!(VElement::identity().act_cylinder(&c("0")), SupportSet::cylinder(c("0")));
        assert_eq!(x0().act_cylinder(&c("0")), SupportSet::cylinder(c("00")));
        assert_eq!(x0().act_cylinder(&c("")), SupportSet::whole());
    }

    #[test]
    fn slope_examples() {
        assert_eq!(VElement::identity().slope(&p("011")), 0);
        assert_eq!(x0().slope(&p("")), -1);
        assert_eq!(x0().slope(&p("11")), 1);
    }

    #[test]
    fn from_sdp_bijection_examples() {
        let halves = Sdp::new(vec![c("0"), c("1")]).unwrap();
        assert!(VElement::from_sdp_bijection(&halves, &halves, &Permutation::identity(2))
            .unwrap()
            .is_identity());
        assert_eq!(
            VElement::from_sdp_bijection(&halves, &halves, &Permutation::transposition(2, 0, 1)).unwrap(),
            cell_swap()
        );
        let d = Sdp::new(vec![c("0"), c("10"), c("11")]).unwrap();
        let r = Sdp::new(vec![c("00"), c("01"), c("1")]).unwrap();
        assert_eq!(VElement::from_sdp_bijection(&d, &r, &Permutation::identity(3)).unwrap(), x0());
    }

    #[test]
    fn prefix_transport_examples() {
        let samples = ["", "1", "01", "011", "1101"];
        for (u, m) in [("01", "01"), ("0", "1"), ("00", "1"), ("1", "0110"), ("", "")] {
            let v = prefix_transport(&w(u), &w(m)).unwrap();
            for x in samples {
                assert_eq!(v.act_point(&p(x).prepend(&w(u))), p(x).prepend(&w(m)), "{u}->{m} at {x}");
            }
        }
        let v = prefix_transport(&w("00"), &w("1")).unwrap();
        assert_eq!(v.to_string(), "{00->1, 01->00, 1->01}");
        assert!(prefix_transport(&w(""), &w("1")).is_err());
        assert!(prefix_transport(&w("0"), &w("")).is_err());
    }

    #[test]
    fn swap_sdis_examples() {
        let v = swap_sdis(&c("00"), &c("01"), &[c("1")]).unwrap();
        for x in ["", "1", "011", "11"] {
            assert_eq!(v.act_point(&p(x).prepend(&w("00"))), p(x).prepend(&w("01")));
            assert_eq!(v.act_point(&p(x).prepend(&w("01"))), p(x).prepend(&w("00")));
            assert_eq!(v.act_point(&p(x).prepend(&w("1"))), p(x).prepend(&w("1")));
        }
        assert!(v.fixes(&c("1")));
        let v = swap_sdis(&c("0"), &c("10"), &[c("11")]).unwrap();
        assert!(v.fixes(&c("11")));
        assert_eq!(v.act_point(&p("01")), p("101"));
        assert!(matches!(swap_sdis(&c("0"), &c("0"), &[]), Err(Error::Overlap(_))));
        assert!(swap_sdis(&c("0"), &c("1"), &[c("11")]).is_err());
    }

    #[test]
    fn fixes_examples() {
        assert!(VElement::identity().fixes(&c("0110")));
        assert!(x0().stabilizes(&SupportSet::whole()));
        assert!(!x0().fixes(&c("0")));
        assert!(!cell_swap().stabilizes(&SupportSet::cylinder(c("0"))));
        assert!(cell_swap().stabilizes(&SupportSet::from_parts([], [p(""), p("1")])));
    }

    #[test]
    fn text_round_trip() {
        for v in [VElement::identity(), x0(), cell_swap()] {
            assert_eq!(v.to_string().parse::<VElement>().unwrap(), v);
        }
        assert_eq!(VElement::identity().to_string(), "{ε->ε}");
        assert!("{0->1}".parse::<VElement>().is_err());
    }

    fn v_strategy() -> impl Strategy<Value = VElement> {
        any::<u64>().prop_map(|s| random::random_v(&mut random::rng(s), 7, 4))
    }

    proptest! {
        #[test]
        fn group_axioms(a in v_strategy(), b in v_strategy(), cc in v_strategy()) {
            prop_assert_eq!(a.mul(&b.mul(&cc)), a.mul(&b).mul(&cc));
            prop_assert!(a.mul(&a.inv()).is_identity());
            prop_assert!(a.inv().mul(&a).is_identity());
            prop_assert_eq!(VElement::identity().mul(&a), a.clone());
            prop_assert_eq!(a.mul(&VElement::identity()), a);
        }

        #[test]
        fn mul_is_composition(a in v_strategy(), b in v_strategy(), x in any::<u64>()) {
            let x = random::random_point(&mut random::rng(x), 8);
            prop_assert_eq!(a.mul(&b).act_point(&x), a.act_point(&b.act_point(&x)));
        }

        #[test]
        fn reduction_is_confluent(a in v_strategy(), depth in 0usize..6) {
            let refined = VElement::from_pairs(a.refined_pairs(depth)).unwrap();
            prop_assert_eq!(refined, a);
        }

        #[test]
        fn triple_round_trip(a in v_strategy()) {
            let (t, s, u) = a.to_triple();
            prop_assert_eq!(VElement::make(&t, &s, &u).unwrap(), a);
        }

        #[test]
        fn faithful_on_probes(a in v_strategy()) {
            let moves = probe_points(a.max_depth() + 1).iter().any(|x| &a.act_point(x) != x);
            prop_assert_eq!(moves, !a.is_identity());
        }

        #[test]
        fn chain_rule(a in v_strategy(), b in v_strategy(), x in any::<u64>()) {
            let x = random::random_point(&mut random::rng(x), 8);
            prop_assert_eq!(a.mul(&b).slope(&x), a.slope(&b.act_point(&x)) + b.slope(&x));
        }

        #[test]
        fn conjugation_preserves_slope_at_fixed_points(phi in v_strategy(), v in v_strategy()) {
            let ad = phi.conj(&v);
            for x in probe_points(6) {
                if v.act_point(&x) == x {
                    prop_assert_eq!(ad.slope(&phi.act_point(&x)), v.slope(&x));
                }
            }
        }

        #[test]
        fn cylinder_images_partition(a in v_strategy(), s in any::<u64>()) {
            let leaves = random::random_leaves(&mut random::rng(s), 5, 4);
            let images: Vec<SupportSet> =
                leaves.iter().map(|l| a.act_cylinder(&Cylinder::new(l.clone()))).collect();
            for i in 0..images.len() {
                for j in i + 1..images.len() {
                    prop_assert!(images[i].is_disjoint(&images[j]));
                }
            }
            let all = images.iter().fold(SupportSet::empty(), |acc, s| acc.union(s));
            prop_assert_eq!(all, SupportSet::whole());
        }

        #[test]
        fn prefix_transport_moves_cylinder(u in any::<u64>(), m in any::<u64>()) {
            let u = random::random_word(&mut random::rng(u), 5);
            let m = random::random_word(&mut random::rng(m), 5);
            prop_assume!(u.is_empty() == m.is_empty());
            let v = prefix_transport(&u, &m).unwrap();
            for x in probe_points(4) {
                prop_assert_eq!(v.act_point(&x.prepend(&u)), x.prepend(&m));
            }
        }
    }
}
