//! The base group `K ≅ ∏_{Q₂} Γ` in simple-function form.
//!
//! An element is a map `a : Q₂ → Γ` that is constant on the cells of a
//! standard dyadic partition except at finitely many points. V acts by
//! `π(v)(a)(x) = β^{-n}(a(v⁻¹x))` with `n = log₂ v'(v⁻¹x)`, and the caret
//! maps are `R_i(a)(x) = β⁻¹(a(ix))`.
//!
//! The caret formula comes from reading the wreath isomorphism
//! `κ(f)(u) = β^{-|u|}(f(u00...))` one letter at a time: stripping the
//! first letter of `u` costs one factor of `β⁻¹`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::forest::{min_tree, Tree};
use crate::gamma::{Elt, Group, GroupHom};
use crate::thompson::VElement;
use crate::words::{BinaryWord, Cylinder, DyadicPoint, SupportSet};

/// A finite group `Γ` with the automorphism `β` twisting the action.
#[derive(Clone, PartialEq, Eq)]
pub struct TwistContext {
    group: Group,
    twist: GroupHom,
    // β^0, β^1, ..., β^{m-1} with m the order of β
    powers: Vec<GroupHom>,
}

pub type Ctx = Arc<TwistContext>;

impl TwistContext {
    pub fn new(group: &Group, twist: GroupHom) -> Result<Ctx> {
        if twist.source() != group || twist.target() != group {
            return Err(Error::ContextMismatch);
        }
        if !twist.is_bijective() {
            return Err(Error::Precondition("the twist must be an automorphism".into()));
        }
        let mut powers = vec![GroupHom::identity(group)];
        loop {
            let next = twist.compose(powers.last().unwrap())?;
            if next.is_identity() {
                break;
            }
            powers.push(next);
        }
        Ok(Arc::new(TwistContext { group: group.clone(), twist, powers }))
    }

    pub fn untwisted(group: &Group) -> Ctx {
        Self::new(group, GroupHom::identity(group)).expect("identity is an automorphism")
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn twist(&self) -> &GroupHom {
        &self.twist
    }

    pub fn is_untwisted(&self) -> bool {
        self.twist.is_identity()
    }

    /// `β^k(g)` for any integer `k`.
    pub fn beta_pow(&self, k: i64, g: Elt) -> Elt {
        let m = self.powers.len() as i64;
        self.powers[k.rem_euclid(m) as usize].apply(g)
    }
}

impl fmt::Debug for TwistContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TwistContext({:?}, β = {:?})", self.group, self.twist)
    }
}

fn same_ctx(a: &Ctx, b: &Ctx) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(Error::ContextMismatch)
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct KElement {
    ctx: Ctx,
    // leaves of a tree -> decoration
    cells: BTreeMap<BinaryWord, Elt>,
    exceptions: BTreeMap<DyadicPoint, Elt>,
}

impl KElement {
    pub fn identity(ctx: &Ctx) -> Self {
        Self::constant(ctx, ctx.group.identity())
    }

    pub fn constant(ctx: &Ctx, g: Elt) -> Self {
        KElement {
            ctx: ctx.clone(),
            cells: BTreeMap::from([(BinaryWord::empty(), g)]),
            exceptions: BTreeMap::new(),
        }
    }

    /// `g_x`: value `g` at `x`, identity elsewhere.
    pub fn point_mass(ctx: &Ctx, x: DyadicPoint, g: Elt) -> Self {
        let mut a = Self::identity(ctx);
        a.exceptions.insert(x, g);
        a.canonicalize();
        a
    }

    /// From cells forming a complete prefix code plus point exceptions.
    pub fn from_parts(
        ctx: &Ctx,
        cells: Vec<(BinaryWord, Elt)>,
        exceptions: Vec<(DyadicPoint, Elt)>,
    ) -> Result<Self> {
        let words: Vec<BinaryWord> = cells.iter().map(|c| c.0.clone()).collect();
        Tree::from_leaves(&words)?;
        let n = ctx.group.order();
        if cells.iter().map(|c| c.1).chain(exceptions.iter().map(|e| e.1)).any(|g| g >= n) {
            return Err(Error::OutOfRange { index: n, bound: n });
        }
        let mut exc = BTreeMap::new();
        for (x, g) in exceptions {
            if exc.insert(x.clone(), g).is_some() {
                return Err(Error::Parse(format!("duplicate exception at {x}")));
            }
        }
        let mut a = KElement { ctx: ctx.clone(), cells: cells.into_iter().collect(), exceptions: exc };
        a.canonicalize();
        Ok(a)
    }

    /// Samples a map that is constant on the depth-`depth` cells away from
    /// points whose stem has length at most `depth`. Exact when the map is
    /// of that shape.
    pub fn from_pointwise(ctx: &Ctx, depth: usize, f: impl Fn(&DyadicPoint) -> Elt) -> Self {
        let cells: BTreeMap<BinaryWord, Elt> = BinaryWord::all_of_length(depth)
            .into_iter()
            .map(|u| {
                let probe = DyadicPoint::basepoint().prepend(&u.child(1));
                let g = f(&probe);
                (u, g)
            })
            .collect();
        let mut a = KElement { ctx: ctx.clone(), cells, exceptions: BTreeMap::new() };
        for x in DyadicPoint::all_up_to(depth) {
            let g = f(&x);
            if g != a.cell_value(&x) {
                a.exceptions.insert(x, g);
            }
        }
        a.canonicalize();
        a
    }

    fn canonicalize(&mut self) {
        let cells = &self.cells;
        let lookup = |x: &DyadicPoint| cell_lookup(cells, x);
        self.exceptions.retain(|x, g| lookup(x) != *g);
        loop {
            let merge = self.cells.iter().find_map(|(u, g)| {
                if u.last() != Some(0) {
                    return None;
                }
                let sib = u.sibling()?;
                (self.cells.get(&sib) == Some(g)).then(|| (u.clone(), sib, *g))
            });
            match merge {
                Some((u, sib, g)) => {
                    self.cells.remove(&u);
                    self.cells.remove(&sib);
                    self.cells.insert(u.parent().unwrap(), g);
                }
                None => break,
            }
        }
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn group(&self) -> &Group {
        &self.ctx.group
    }

    pub fn cells(&self) -> impl Iterator<Item = (&BinaryWord, Elt)> {
        self.cells.iter().map(|(u, &g)| (u, g))
    }

    pub fn exceptions(&self) -> impl Iterator<Item = (&DyadicPoint, Elt)> {
        self.exceptions.iter().map(|(x, &g)| (x, g))
    }

    pub fn is_identity(&self) -> bool {
        self.exceptions.is_empty() && self.constant_value() == Some(self.ctx.group.identity())
    }

    /// `Some(g)` when the element is the constant map `g`.
    pub fn constant_value(&self) -> Option<Elt> {
        match (self.cells.len(), self.exceptions.is_empty()) {
            (1, true) => self.cells.get(&BinaryWord::empty()).copied(),
            _ => None,
        }
    }

    /// True when every cell carries the identity (a finitely supported map).
    pub fn is_exception_only(&self) -> bool {
        self.constant_value_ignoring_exceptions() == Some(self.ctx.group.identity())
    }

    fn constant_value_ignoring_exceptions(&self) -> Option<Elt> {
        (self.cells.len() == 1).then(|| self.cells.values().next().copied()).flatten()
    }

    /// Longest cell prefix or exception stem.
    pub fn max_depth(&self) -> usize {
        self.cells
            .keys()
            .map(BinaryWord::len)
            .chain(self.exceptions.keys().map(|x| x.stem().len()))
            .max()
            .unwrap_or(0)
    }

    /// Decoration of the cell containing `x`, ignoring exceptions.
    pub fn cell_value(&self, x: &DyadicPoint) -> Elt {
        cell_lookup(&self.cells, x)
    }

    /// Decoration of the cell containing the cylinder `C_u`, if one does.
    fn cell_value_of_word(&self, u: &BinaryWord) -> Option<Elt> {
        self.cells.iter().find(|(c, _)| c.is_prefix_of(u)).map(|(_, &g)| g)
    }

    pub fn eval(&self, x: &DyadicPoint) -> Elt {
        self.exceptions.get(x).copied().unwrap_or_else(|| self.cell_value(x))
    }

    fn zip_with(&self, other: &KElement, f: impl Fn(Elt, Elt) -> Elt) -> Result<KElement> {
        same_ctx(&self.ctx, &other.ctx)?;
        let union = cell_tree(&self.cells).union(&cell_tree(&other.cells));
        let cells = union
            .leaves()
            .into_iter()
            .map(|l| {
                let g = f(
                    self.cell_value_of_word(&l).expect("refinement"),
                    other.cell_value_of_word(&l).expect("refinement"),
                );
                (l, g)
            })
            .collect();
        let exceptions = self
            .exceptions
            .keys()
            .chain(other.exceptions.keys())
            .map(|x| (x.clone(), f(self.eval(x), other.eval(x))))
            .collect();
        let mut out = KElement { ctx: self.ctx.clone(), cells, exceptions };
        out.canonicalize();
        Ok(out)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &KElement) -> Result<KElement> {
        let g = self.ctx.group.clone();
        self.zip_with(other, |a, b| g.mul(a, b))
    }

    pub fn inv(&self) -> KElement {
        self.map_values(|g| self.ctx.group.inv(g))
    }

    /// `x ↦ f(a(x))`.
    pub fn map_values(&self, f: impl Fn(Elt) -> Elt) -> KElement {
        let mut out = KElement {
            ctx: self.ctx.clone(),
            cells: self.cells.iter().map(|(u, &g)| (u.clone(), f(g))).collect(),
            exceptions: self.exceptions.iter().map(|(x, &g)| (x.clone(), f(g))).collect(),
        };
        out.canonicalize();
        out
    }

    /// `x ↦ f(a(x))` read in another context; `f` should be a homomorphism
    /// for the result to mean anything.
    pub fn transport(&self, ctx: &Ctx, f: impl Fn(Elt) -> Elt) -> KElement {
        let mut out = KElement {
            ctx: ctx.clone(),
            cells: self.cells.iter().map(|(u, &g)| (u.clone(), f(g))).collect(),
            exceptions: self.exceptions.iter().map(|(x, &g)| (x.clone(), f(g))).collect(),
        };
        out.canonicalize();
        out
    }

    /// `π(v)(a)`.
    pub fn act(&self, v: &VElement) -> KElement {
        let mut cells = BTreeMap::new();
        for (d, r) in v.pairs() {
            let n = d.len() as i64 - r.len() as i64;
            for (c, &g) in &self.cells {
                let g = self.ctx.beta_pow(-n, g);
                if c.is_prefix_of(d) {
                    cells.insert(r.clone(), g);
                } else if let Some(rest) = c.strip_prefix(d) {
                    cells.insert(r.concat(&rest), g);
                }
            }
        }
        let exceptions = self
            .exceptions
            .iter()
            .map(|(x, &g)| (v.act_point(x), self.ctx.beta_pow(-v.slope(x), g)))
            .collect();
        let mut out = KElement { ctx: self.ctx.clone(), cells, exceptions };
        out.canonicalize();
        out
    }

    /// `R_u(a)(x) = β^{-|u|}(a(ux))`.
    pub fn r_word(&self, u: &BinaryWord) -> KElement {
        let k = -(u.len() as i64);
        let mut cells = BTreeMap::new();
        for (c, &g) in &self.cells {
            let g = self.ctx.beta_pow(k, g);
            if c.is_prefix_of(u) {
                cells.insert(BinaryWord::empty(), g);
            } else if let Some(rest) = c.strip_prefix(u) {
                cells.insert(rest, g);
            }
        }
        let exceptions = self
            .exceptions
            .iter()
            .filter_map(|(x, &g)| Some((x.tail_after(u)?, self.ctx.beta_pow(k, g))))
            .collect();
        let mut out = KElement { ctx: self.ctx.clone(), cells, exceptions };
        out.canonicalize();
        out
    }

    /// `(R₀(a), R₁(a))`.
    pub fn caret(&self) -> (KElement, KElement) {
        (self.r_word(&BinaryWord::from_digits(vec![0]).unwrap()), self.r_word(&BinaryWord::from_digits(vec![1]).unwrap()))
    }

    /// Inverse of [`KElement::caret`].
    pub fn caret_inv(a0: &KElement, a1: &KElement) -> Result<KElement> {
        same_ctx(&a0.ctx, &a1.ctx)?;
        let ctx = &a0.ctx;
        let mut cells = BTreeMap::new();
        let mut exceptions = BTreeMap::new();
        for (bit, a) in [(0u8, a0), (1u8, a1)] {
            let head = BinaryWord::from_digits(vec![bit]).unwrap();
            for (c, &g) in &a.cells {
                cells.insert(head.concat(c), ctx.beta_pow(1, g));
            }
            for (x, &g) in &a.exceptions {
                exceptions.insert(x.prepend(&head), ctx.beta_pow(1, g));
            }
        }
        let mut out = KElement { ctx: ctx.clone(), cells, exceptions };
        out.canonicalize();
        Ok(out)
    }

    /// The element equal to `β^{|r|}(a_r(x))` at `r·x`, where the words `r`
    /// form a complete prefix code. This inverts iterated carets.
    pub fn assemble(ctx: &Ctx, parts: Vec<(BinaryWord, KElement)>) -> Result<KElement> {
        let words: Vec<BinaryWord> = parts.iter().map(|p| p.0.clone()).collect();
        Tree::from_leaves(&words)?;
        let mut cells = BTreeMap::new();
        let mut exceptions = BTreeMap::new();
        for (r, a) in &parts {
            same_ctx(ctx, &a.ctx)?;
            let k = r.len() as i64;
            for (c, &g) in &a.cells {
                cells.insert(r.concat(c), ctx.beta_pow(k, g));
            }
            for (x, &g) in &a.exceptions {
                exceptions.insert(x.prepend(r), ctx.beta_pow(k, g));
            }
        }
        let mut out = KElement { ctx: ctx.clone(), cells, exceptions };
        out.canonicalize();
        Ok(out)
    }

    /// Closure of the set where `a` is not the identity.
    pub fn support(&self) -> SupportSet {
        let e = self.ctx.group.identity();
        SupportSet::from_parts(
            self.cells.iter().filter(|(_, &g)| g != e).map(|(u, _)| Cylinder::new(u.clone())),
            self.exceptions.iter().filter(|(_, &g)| g != e).map(|(x, _)| x.clone()),
        )
    }

    /// Agrees with `a` on `C_u`, identity elsewhere.
    pub fn restrict(&self, c: &Cylinder) -> KElement {
        let u = c.prefix();
        let e = self.ctx.group.identity();
        let tree = cell_tree(&self.cells).union(&min_tree(u));
        let cells = tree
            .leaves()
            .into_iter()
            .map(|l| {
                let g = if u.is_prefix_of(&l) { self.cell_value_of_word(&l).expect("refinement") } else { e };
                (l, g)
            })
            .collect();
        let exceptions =
            self.exceptions.iter().filter(|(x, _)| x.has_prefix(u)).map(|(x, &g)| (x.clone(), g)).collect();
        let mut out = KElement { ctx: self.ctx.clone(), cells, exceptions };
        out.canonicalize();
        out
    }

    /// `a^{(u)}`, the part of `a` living on `C_u`.
    pub fn component(&self, u: &BinaryWord) -> KElement {
        self.restrict(&Cylinder::new(u.clone()))
    }

    /// `[a^{(l)}]` over the leaves `l` of `t`.
    pub fn decompose(&self, t: &Tree) -> Vec<KElement> {
        t.leaves().iter().map(|l| self.component(l)).collect()
    }

    /// `R₀(a) = R₁(a) = a`.
    pub fn is_r_invariant(&self) -> bool {
        let (a0, a1) = self.caret();
        &a0 == self && &a1 == self
    }

    /// `a b a⁻¹`.
    pub fn conj(&self, b: &KElement) -> Result<KElement> {
        self.mul(b)?.mul(&self.inv())
    }

    /// `a b a⁻¹ b⁻¹`.
    pub fn commutator(&self, b: &KElement) -> Result<KElement> {
        self.mul(b)?.mul(&self.inv())?.mul(&b.inv())
    }

    pub fn to_text(&self) -> String {
        let g = &self.ctx.group;
        let cells: Vec<String> = self.cells.iter().map(|(u, &x)| format!("C:{u}={}", g.name(x))).collect();
        let exc: Vec<String> = self.exceptions.iter().map(|(p, &x)| format!("P:{p}={}", g.name(x))).collect();
        format!("base{{{}}} exc{{{}}}", cells.join(", "), exc.join(", "))
    }

    /// Parses `base{C:<u>=<elt>,...} exc{P:<x>=<elt>,...}`; the `exc` block
    /// may be omitted.
    pub fn parse(ctx: &Ctx, s: &str) -> Result<KElement> {
        let s = s.trim();
        let rest = s
            .strip_prefix("base{")
            .ok_or_else(|| Error::Parse(format!("expected base{{...}}, got {s:?}")))?;
        let close = matching_brace(rest)?;
        let base_body = &rest[..close];
        let tail = rest[close + 1..].trim();
        let exc_body = if tail.is_empty() {
            ""
        } else {
            let inner = tail
                .strip_prefix("exc{")
                .and_then(|t| t.strip_suffix('}'))
                .ok_or_else(|| Error::Parse(format!("expected exc{{...}}, got {tail:?}")))?;
            inner
        };
        let g = &ctx.group;
        let cells = split_top(base_body)
            .into_iter()
            .map(|item| {
                let (c, v) = item
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("expected C:<u>=<elt>, got {item:?}")))?;
                Ok((c.parse::<Cylinder>()?.0, g.parse_element(v)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let exceptions = split_top(exc_body)
            .into_iter()
            .map(|item| {
                let (p, v) = item
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("expected P:<x>=<elt>, got {item:?}")))?;
                let p = p
                    .trim()
                    .strip_prefix("P:")
                    .ok_or_else(|| Error::Parse(format!("expected P:<x>, got {p:?}")))?;
                Ok((p.parse::<DyadicPoint>()?, g.parse_element(v)?))
            })
            .collect::<Result<Vec<_>>>()?;
        if cells.is_empty() {
            return Err(Error::Parse("base{...} needs at least one cell".into()));
        }
        KElement::from_parts(ctx, cells, exceptions)
    }
}

impl fmt::Debug for KElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

impl fmt::Display for KElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

fn cell_lookup(cells: &BTreeMap<BinaryWord, Elt>, x: &DyadicPoint) -> Elt {
    let mut k = 0;
    loop {
        if let Some(&g) = cells.get(&x.expansion(k)) {
            return g;
        }
        k += 1;
    }
}

fn cell_tree(cells: &BTreeMap<BinaryWord, Elt>) -> Tree {
    let words: Vec<BinaryWord> = cells.keys().cloned().collect();
    Tree::from_leaves(&words).expect("cells form a prefix code")
}

fn matching_brace(s: &str) -> Result<usize> {
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '{' => depth += 1,
            '}' if depth == 0 => return Ok(i),
            '}' => depth -= 1,
            _ => {}
        }
    }
    Err(Error::Parse("unbalanced braces".into()))
}

/// Splits on commas that are not nested in brackets (group element names
/// such as `(0,1)` contain commas).
pub(crate) fn split_top(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out.retain(|t| !t.is_empty());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamma::FiniteGroup;
    use crate::random;
    use crate::thompson::x0;
    use proptest::prelude::*;
    use rand::Rng;

    fn w(s: &str) -> BinaryWord {
        s.parse().unwrap()
    }
    fn p(s: &str) -> DyadicPoint {
        s.parse().unwrap()
    }
    fn c(s: &str) -> Cylinder {
        Cylinder::new(w(s))
    }

    fn ctx(spec: &str, twist: &str) -> Ctx {
        let g = FiniteGroup::parse_spec(spec).unwrap();
        let b = GroupHom::parse(twist, &g, &g).unwrap();
        TwistContext::new(&g, b).unwrap()
    }

    /// Random simple function: cells from a random tree, a few exceptions.
    pub(crate) fn random_k(ctx: &Ctx, seed: u64) -> KElement {
        let mut rng = random::rng(seed);
        let n = ctx.group().order();
        let nl = rng.gen_range(1..6);
        let leaves = random::random_leaves(&mut rng, nl, 3);
        let cells = leaves.into_iter().map(|l| (l, rng.gen_range(0..n))).collect();
        let k = rng.gen_range(0..3);
        let mut exc = BTreeMap::new();
        for _ in 0..k {
            exc.insert(random::random_point(&mut rng, 5), rng.gen_range(0..n));
        }
        KElement::from_parts(ctx, cells, exc.into_iter().collect()).unwrap()
    }

    #[test]
    fn eval_examples() {
        let k = ctx("cyclic:3", "id");
        assert_eq!(KElement::constant(&k, 2).eval(&p("0110")), 2);
        let m = KElement::point_mass(&k, p("01"), 1);
        assert_eq!((m.eval(&p("01")), m.eval(&p("1"))), (1, 0));
        let a = KElement::parse(&k, "base{C:0=1, C:1=0} exc{P:01=2}").unwrap();
        assert_eq!((a.eval(&p("01")), a.eval(&p(""))), (2, 1));
    }

    #[test]
    fn mul_examples() {
        let k = ctx("sym:3", "id");
        let g = k.group().clone();
        let a = KElement::parse(&k, "base{C:0=(12), C:1=(123)} exc{P:1=(13)}").unwrap();
        assert!(a.mul(&a.inv()).unwrap().is_identity());
        let (x, y) = (g.parse_element("(12)").unwrap(), g.parse_element("(23)").unwrap());
        let prod = KElement::point_mass(&k, p("1"), x).mul(&KElement::point_mass(&k, p("1"), y)).unwrap();
        assert_eq!(prod, KElement::point_mass(&k, p("1"), g.mul(x, y)));
        let cg = KElement::constant(&k, x).mul(&KElement::point_mass(&k, p("01"), y)).unwrap();
        for q in DyadicPoint::all_up_to(4) {
            let expect = if q == p("01") { g.mul(x, y) } else { x };
            assert_eq!(cg.eval(&q), expect);
        }
        assert_eq!(cg.exceptions().count(), 1);
    }

    #[test]
    fn act_examples() {
        let k = ctx("cyclic:4", "id");
        let v: VElement = "{0->11, 10->0, 11->10}".parse().unwrap();
        let m = KElement::point_mass(&k, p("01"), 3);
        assert_eq!(m.act(&v), KElement::point_mass(&k, v.act_point(&p("01")), 3));

        let k5 = ctx("cyclic:5", "mul:2");
        let m = KElement::point_mass(&k5, p(""), 1);
        assert_eq!(m.act(&x0()), KElement::point_mass(&k5, p(""), 2));
        assert_eq!(m.act(&VElement::identity()), m);
    }

    #[test]
    fn caret_examples() {
        let k = ctx("cyclic:5", "mul:2");
        // β⁻¹ = ×3 on Z₅
        let (l, r) = KElement::constant(&k, 1).caret();
        assert_eq!((l.constant_value(), r.constant_value()), (Some(3), Some(3)));
        let k1 = ctx("cyclic:3", "id");
        let (l, r) = KElement::point_mass(&k1, p("01"), 2).caret();
        assert_eq!(l, KElement::point_mass(&k1, p("1"), 2));
        assert!(r.is_identity());
        let a = KElement::parse(&k, "base{C:0=1, C:10=4, C:11=0} exc{P:011=2, P:=3}").unwrap();
        let (a0, a1) = a.caret();
        assert_eq!(KElement::caret_inv(&a0, &a1).unwrap(), a);
    }

    #[test]
    fn r_word_examples() {
        let k = ctx("cyclic:5", "mul:2");
        let a = KElement::parse(&k, "base{C:0=1, C:10=4, C:11=0} exc{P:011=2}").unwrap();
        assert_eq!(a.r_word(&w("")), a);
        let (a0, _) = a.caret();
        assert_eq!(a.r_word(&w("01")), a0.caret().1);
        let k1 = ctx("cyclic:3", "id");
        assert_eq!(KElement::point_mass(&k1, p("011"), 1).r_word(&w("01")), KElement::point_mass(&k1, p("1"), 1));
    }

    #[test]
    fn support_examples() {
        let k = ctx("cyclic:3", "id");
        assert!(KElement::identity(&k).support().is_empty());
        assert_eq!(KElement::point_mass(&k, p("01"), 1).support(), SupportSet::point(p("01")));
        let a = KElement::parse(&k, "base{C:0=1, C:1=0} exc{P:=0}").unwrap();
        assert_eq!(a.support(), SupportSet::cylinder(c("0")));
    }

    #[test]
    fn restrict_examples() {
        let k = ctx("cyclic:3", "id");
        assert!(KElement::identity(&k).restrict(&c("01")).is_identity());
        let m = KElement::point_mass(&k, p("01"), 1);
        assert_eq!(m.restrict(&c("0")), m);
        assert!(m.restrict(&c("1")).is_identity());
        let part = KElement::constant(&k, 2).component(&w("0"));
        assert_eq!(part, KElement::parse(&k, "base{C:0=2, C:1=0}").unwrap());
    }

    #[test]
    fn decompose_examples() {
        let k = ctx("cyclic:3", "id");
        let a = KElement::constant(&k, 1);
        assert_eq!(a.decompose(&Tree::Leaf), vec![a.clone()]);
        let parts = a.decompose(&Tree::caret());
        assert_eq!(parts[0].mul(&parts[1]).unwrap(), a);
    }

    #[test]
    fn r_invariance_examples() {
        let k = ctx("cyclic:5", "mul:4");
        assert!(KElement::constant(&k, 0).is_r_invariant());
        assert!(!KElement::constant(&k, 1).is_r_invariant());
        let k1 = ctx("cyclic:3", "id");
        assert!(KElement::constant(&k1, 1).is_r_invariant());
        assert!(!KElement::point_mass(&k1, p("1"), 1).is_r_invariant());
        assert!(KElement::identity(&k1).is_r_invariant());
    }

    #[test]
    fn text_round_trip() {
        let k = ctx("product:cyclic:2,cyclic:3", "id");
        let a = KElement::parse(&k, "base{C:0=(1,2), C:1=(0,0)} exc{P:011=(1,1)}").unwrap();
        assert_eq!(KElement::parse(&k, &a.to_text()).unwrap(), a);
        assert!(KElement::parse(&k, "base{C:0=(1,2)}").is_err());
    }

    #[test]
    fn from_pointwise_recovers_simple_maps() {
        let k = ctx("sym:3", "id");
        for seed in 0..20 {
            let a = random_k(&k, seed);
            assert_eq!(KElement::from_pointwise(&k, a.max_depth(), |x| a.eval(x)), a);
        }
    }

    fn contexts() -> impl Strategy<Value = Ctx> {
        prop_oneof![
            Just(ctx("cyclic:2", "id")),
            Just(ctx("sym:3", "id")),
            Just(ctx("sym:3", "ad:(123)")),
            Just(ctx("cyclic:5", "mul:2")),
            Just(ctx("cyclic:4", "inv")),
        ]
    }

    fn v_of(seed: u64) -> VElement {
        random::random_v(&mut random::rng(seed), 6, 4)
    }

    proptest! {
        #[test]
        fn support_properties(k in contexts(), s1 in any::<u64>(), s2 in any::<u64>(), sv in any::<u64>()) {
            let (a, b) = (random_k(&k, s1), random_k(&k, s2));
            prop_assert_eq!(a.support().is_empty(), a.is_identity());
            prop_assert_eq!(a.inv().support(), a.support());
            prop_assert_eq!(a.conj(&b).unwrap().support(), b.support());
            prop_assert!(a.mul(&b).unwrap().support().is_subset(&a.support().union(&b.support())));
            if a.support().is_disjoint(&b.support()) {
                prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
            }
            let v = v_of(sv);
            prop_assert_eq!(a.act(&v).support(), v.act_support(&a.support()));
            prop_assert!(a.commutator(&b).unwrap().support().is_subset(&a.support().intersection(&b.support())));
        }

        #[test]
        fn disjoint_parts_commute(k in contexts(), s1 in any::<u64>(), s2 in any::<u64>()) {
            let a = random_k(&k, s1).component(&"0".parse().unwrap());
            let b = random_k(&k, s2).component(&"1".parse().unwrap());
            prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        }

        #[test]
        fn restriction_halves(k in contexts(), s in any::<u64>(), u in any::<u64>()) {
            let a = random_k(&k, s);
            let u = random::random_word(&mut random::rng(u), 3);
            let i = Cylinder::new(u.clone());
            let (i0, i1) = i.split();
            prop_assert_eq!(a.restrict(&i), a.restrict(&i0).mul(&a.restrict(&i1)).unwrap());
            // R-level form: R_u(a^{(u)}) on C_ε equals R_u(a), and the halves match R_{u0}, R_{u1}
            prop_assert_eq!(a.component(&u).r_word(&u), a.r_word(&u));
            let (r0, r1) = a.r_word(&u).caret();
            prop_assert_eq!(r0, a.r_word(&u.child(0)));
            prop_assert_eq!(r1, a.r_word(&u.child(1)));
        }

        #[test]
        fn decomposition_multiplies_back(k in contexts(), s in any::<u64>(), t in any::<u64>()) {
            let a = random_k(&k, s);
            let t = random::random_tree(&mut random::rng(t), 6, 3);
            let parts = a.decompose(&t);
            let prod = parts.iter().fold(KElement::identity(&k), |acc, p| acc.mul(p).unwrap());
            prop_assert_eq!(&prod, &a);
            let rev = parts.iter().rev().fold(KElement::identity(&k), |acc, p| acc.mul(p).unwrap());
            prop_assert_eq!(rev, a);
            for i in 0..parts.len() {
                for j in i + 1..parts.len() {
                    prop_assert!(parts[i].support().is_disjoint(&parts[j].support()));
                }
            }
        }

        #[test]
        fn action_is_a_group_action(k in contexts(), s1 in any::<u64>(), s2 in any::<u64>(), v in any::<u64>(), w in any::<u64>()) {
            let (a, b) = (random_k(&k, s1), random_k(&k, s2));
            let (v, w) = (v_of(v), v_of(w));
            prop_assert_eq!(a.act(&w).act(&v), a.act(&v.mul(&w)));
            prop_assert_eq!(a.mul(&b).unwrap().act(&v), a.act(&v).mul(&b.act(&v)).unwrap());
            for x in DyadicPoint::all_up_to(5) {
                let y = v.inv().act_point(&x);
                prop_assert_eq!(a.act(&v).eval(&x), k.beta_pow(-v.slope(&y), a.eval(&y)));
            }
        }

        #[test]
        fn caret_equivariance(k in contexts(), s in any::<u64>(), v in any::<u64>()) {
            let a = random_k(&k, s);
            let v = v_of(v);
            let moved = a.act(&v);
            for (d, r) in v.pairs() {
                prop_assert_eq!(moved.r_word(r), a.r_word(d));
            }
            let (a0, a1) = a.caret();
            prop_assert_eq!(KElement::caret_inv(&a0, &a1).unwrap(), a);
        }

        #[test]
        fn exception_only_subgroup_is_closed(k in contexts(), s1 in any::<u64>(), s2 in any::<u64>(), v in any::<u64>()) {
            let strip = |a: KElement| {
                let e = k.group().identity();
                let exc: Vec<(DyadicPoint, Elt)> = a.exceptions().map(|(x, g)| (x.clone(), g)).collect();
                KElement::from_parts(&k, vec![(BinaryWord::empty(), e)], exc).unwrap()
            };
            let (a, b) = (strip(random_k(&k, s1)), strip(random_k(&k, s2)));
            prop_assert!(a.mul(&b).unwrap().is_exception_only());
            prop_assert!(a.inv().is_exception_only());
            prop_assert!(a.act(&v_of(v)).is_exception_only());
        }
    }
}
