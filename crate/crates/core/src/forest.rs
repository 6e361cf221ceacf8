//! Binary forests and symmetric forests.
//!
//! Composition is written `compose(g, f)` for "`f` first, then `g`": the
//! leaves of `f` are grafted onto the roots of `g`. A permutation `σ` sends
//! strand `i` to position `σ(i)`; acting on tuples it is
//! `(a_i) ↦ (a_{σ⁻¹(i)})`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::words::{is_complete_prefix_code, BinaryWord};

/// A finite rooted planar binary tree.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Tree {
    Leaf,
    Node(Box<Tree>, Box<Tree>),
}

impl Tree {
    /// The single caret `∧`.
    pub fn caret() -> Self {
        Tree::Node(Box::new(Tree::Leaf), Box::new(Tree::Leaf))
    }

    pub fn node(l: Tree, r: Tree) -> Self {
        Tree::Node(Box::new(l), Box::new(r))
    }

    /// The full tree of depth `n` with `2^n` leaves.
    pub fn full(n: usize) -> Self {
        if n == 0 {
            Tree::Leaf
        } else {
            Tree::node(Tree::full(n - 1), Tree::full(n - 1))
        }
    }

    /// Leaf addresses, left to right (lexicographic).
    pub fn leaves(&self) -> Vec<BinaryWord> {
        let mut out = Vec::new();
        self.collect_leaves(BinaryWord::empty(), &mut out);
        out
    }

    fn collect_leaves(&self, at: BinaryWord, out: &mut Vec<BinaryWord>) {
        match self {
            Tree::Leaf => out.push(at),
            Tree::Node(l, r) => {
                l.collect_leaves(at.child(0), out);
                r.collect_leaves(at.child(1), out);
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Tree::Leaf => 1,
            Tree::Node(l, r) => l.leaf_count() + r.leaf_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Tree::Leaf => 0,
            Tree::Node(l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Tree::Leaf)
    }

    /// Rebuilds a tree from its leaf addresses.
    pub fn from_leaves(words: &[BinaryWord]) -> Result<Self> {
        if !is_complete_prefix_code(words) {
            return Err(Error::InvalidPartition(format!("{words:?}")));
        }
        fn build(words: &[&[u8]]) -> Tree {
            if words.len() == 1 && words[0].is_empty() {
                return Tree::Leaf;
            }
            let l: Vec<&[u8]> = words.iter().filter(|w| w[0] == 0).map(|w| &w[1..]).collect();
            let r: Vec<&[u8]> = words.iter().filter(|w| w[0] == 1).map(|w| &w[1..]).collect();
            Tree::node(build(&l), build(&r))
        }
        let slices: Vec<&[u8]> = words.iter().map(|w| w.digits()).collect();
        Ok(build(&slices))
    }

    /// The subtree hanging at `addr`, if `addr` is a vertex of this tree.
    pub fn subtree(&self, addr: &BinaryWord) -> Option<&Tree> {
        let mut t = self;
        for &b in addr.digits() {
            match t {
                Tree::Leaf => return None,
                Tree::Node(l, r) => t = if b == 0 { l } else { r },
            }
        }
        Some(t)
    }

    /// The smallest tree with both trees as rooted subtrees (union of carets).
    pub fn union(&self, other: &Tree) -> Tree {
        match (self, other) {
            (Tree::Leaf, t) | (t, Tree::Leaf) => t.clone(),
            (Tree::Node(a, b), Tree::Node(c, d)) => Tree::node(a.union(c), b.union(d)),
        }
    }

    /// Replaces the leaves, left to right, by the given trees.
    fn graft(&self, next: &mut impl Iterator<Item = Tree>) -> Tree {
        match self {
            Tree::Leaf => next.next().expect("graft arity checked by caller"),
            Tree::Node(l, r) => {
                let l = l.graft(next);
                let r = r.graft(next);
                Tree::node(l, r)
            }
        }
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let leaves: Vec<String> = self.leaves().iter().map(|w| w.to_string()).collect();
        write!(f, "[{}]", leaves.join(","))
    }
}

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Tree {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .trim()
            .strip_prefix('[')
            .and_then(|b| b.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("tree must be a bracketed leaf list, got {s:?}")))?;
        let words = body
            .split(',')
            .map(str::trim)
            .map(|w| if w.is_empty() { Ok(BinaryWord::empty()) } else { w.parse() })
            .collect::<Result<Vec<_>>>()?;
        Tree::from_leaves(&words)
    }
}

/// The smallest tree having `u` as a leaf.
pub fn min_tree(u: &BinaryWord) -> Tree {
    let mut t = Tree::Leaf;
    for &b in u.digits().iter().rev() {
        t = if b == 0 {
            Tree::node(t, Tree::Leaf)
        } else {
            Tree::node(Tree::Leaf, t)
        };
    }
    t
}

/// A nonempty ordered list of trees.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Forest(Vec<Tree>);

impl Forest {
    pub fn new(trees: Vec<Tree>) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::Precondition("forests have at least one root".into()));
        }
        Ok(Forest(trees))
    }

    pub fn identity(width: usize) -> Self {
        assert!(width > 0, "forests have at least one root");
        Forest(vec![Tree::Leaf; width])
    }

    pub fn from_tree(t: Tree) -> Self {
        Forest(vec![t])
    }

    pub fn trees(&self) -> &[Tree] {
        &self.0
    }

    pub fn roots(&self) -> usize {
        self.0.len()
    }

    pub fn leaves(&self) -> usize {
        self.0.iter().map(Tree::leaf_count).sum()
    }

    /// Indices of the roots carrying a nontrivial tree.
    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| !self.0[i].is_leaf()).collect()
    }

    pub fn into_tree(self) -> Option<Tree> {
        if self.0.len() == 1 {
            self.0.into_iter().next()
        } else {
            None
        }
    }
}

impl fmt::Display for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|t| t.to_string()).collect();
        write!(f, "{}", parts.join(";"))
    }
}

impl fmt::Debug for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Forest {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Forest::new(s.split(';').map(str::parse).collect::<Result<Vec<_>>>()?)
    }
}

/// `f_{k,n}`: `n` roots with a single caret at root `k` (1-based).
pub fn elementary(k: usize, n: usize) -> Result<Forest> {
    if k == 0 || k > n {
        return Err(Error::OutOfRange { index: k, bound: n });
    }
    let mut trees = vec![Tree::Leaf; n];
    trees[k - 1] = Tree::caret();
    Ok(Forest(trees))
}

/// `g ∘ f`: graft the `i`-th leaf of `f` onto the `i`-th root of `g`.
pub fn compose(g: &Forest, f: &Forest) -> Result<Forest> {
    if f.leaves() != g.roots() {
        return Err(Error::SizeMismatch { expected: f.leaves(), found: g.roots() });
    }
    let mut it = g.0.iter().cloned();
    Ok(Forest(f.0.iter().map(|t| t.graft(&mut it)).collect()))
}

/// Horizontal concatenation.
pub fn tensor(f: &Forest, g: &Forest) -> Forest {
    Forest(f.0.iter().chain(&g.0).cloned().collect())
}

/// A bijection of `{0..n-1}` stored by images (printed 1-based).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::NotAPermutation(format!("{images:?}")));
            }
            seen[i] = true;
        }
        Ok(Permutation(images))
    }

    /// From 1-based images, as written in one-line notation.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        if images.contains(&0) {
            return Err(Error::NotAPermutation(format!("{images:?}")));
        }
        Permutation::new(images.iter().map(|i| i - 1).collect())
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    /// Transposition of positions `i` and `j` (0-based) on `n` letters.
    pub fn transposition(n: usize, i: usize, j: usize) -> Self {
        let mut p: Vec<usize> = (0..n).collect();
        p.swap(i, j);
        Permutation(p)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Permutation(inv)
    }

    /// `self ∘ other` (apply `other` first).
    pub fn then_after(&self, other: &Permutation) -> Self {
        Permutation(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Moves entry `i` of a tuple to position `σ(i)`.
    pub fn permute<T: Clone>(&self, items: &[T]) -> Vec<T> {
        let inv = self.inverse();
        (0..items.len()).map(|i| items[inv.0[i]].clone()).collect()
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "({})", parts.join(" "))
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Permutation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .trim()
            .strip_prefix('(')
            .and_then(|b| b.strip_suffix(')'))
            .ok_or_else(|| Error::Parse(format!("permutation must be parenthesised, got {s:?}")))?;
        let images = body
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Permutation::from_one_based(&images)
    }
}

/// A morphism of the symmetric forest category: the forest followed by a
/// permutation of its leaves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymForest {
    pub forest: Forest,
    pub perm: Permutation,
}

impl SymForest {
    pub fn new(forest: Forest, perm: Permutation) -> Result<Self> {
        if forest.leaves() != perm.len() {
            return Err(Error::SizeMismatch { expected: forest.leaves(), found: perm.len() });
        }
        Ok(SymForest { forest, perm })
    }

    /// `σ ∘ ∧`, the only shape of morphism `1 → 2`.
    pub fn caret_with(perm: Permutation) -> Result<Self> {
        SymForest::new(Forest::from_tree(Tree::caret()), perm)
    }

    /// Where the strand entering root `root` and following `path` ends up.
    /// `None` when `path` is not a leaf of that tree.
    pub fn strand_target(&self, root: usize, path: &BinaryWord) -> Option<usize> {
        let offset: usize = self.forest.0[..root].iter().map(Tree::leaf_count).sum();
        let idx = self.forest.0[root].leaves().iter().position(|l| l == path)?;
        Some(self.perm.apply(offset + idx))
    }
}

/// The exchange relation `f ∘ σ = S(f, σ) ∘ σ(f)`; returns `(S(f, σ), σ(f))`.
pub fn slide(f: &Forest, sigma: &Permutation) -> Result<(Permutation, Forest)> {
    if sigma.len() != f.roots() {
        return Err(Error::SizeMismatch { expected: f.roots(), found: sigma.len() });
    }
    let n = f.roots();
    let widths: Vec<usize> = f.0.iter().map(Tree::leaf_count).collect();
    let mut offsets = vec![0; n + 1];
    for i in 0..n {
        offsets[i + 1] = offsets[i] + widths[i];
    }
    let moved: Vec<Tree> = (0..n).map(|i| f.0[sigma.apply(i)].clone()).collect();
    let mut images = Vec::with_capacity(offsets[n]);
    for i in 0..n {
        let src = sigma.apply(i);
        images.extend(offsets[src]..offsets[src + 1]);
    }
    Ok((Permutation(images), Forest(moved)))
}

/// Minimal common refinement: forests `p`, `q` with `p ∘ t = q ∘ s`, the
/// common tree being the union of the two trees.
pub fn common_refinement(t: &Tree, s: &Tree) -> (Forest, Forest) {
    let u = t.union(s);
    let hang = |tree: &Tree| {
        Forest(
            tree.leaves()
                .iter()
                .map(|l| u.subtree(l).expect("union contains every vertex").clone())
                .collect(),
        )
    };
    (hang(t), hang(s))
}

/// Writes `f` as `e_k ∘ ... ∘ e_1 ∘ id`, returning `(width, [e_1, ..., e_k])`
/// with every `e_i` elementary.
pub fn decompose_elementary(f: &Forest) -> (usize, Vec<Forest>) {
    let mut steps = Vec::new();
    let mut cur = f.clone();
    loop {
        // find a caret whose children are both leaves
        let mut offset = 0;
        let mut found = None;
        for (ti, t) in cur.0.iter().enumerate() {
            let leaves = t.leaves();
            if let Some(i) = (0..leaves.len().saturating_sub(1)).find(|&i| {
                leaves[i].last() == Some(0) && leaves[i + 1].sibling().as_ref() == Some(&leaves[i])
            }) {
                found = Some((ti, offset + i, leaves[i].parent().unwrap()));
                break;
            }
            offset += leaves.len();
        }
        let Some((ti, pos, parent)) = found else { break };
        let leaves = cur.0[ti].leaves();
        let mut merged: Vec<BinaryWord> = Vec::with_capacity(leaves.len() - 1);
        for l in leaves {
            if parent.is_prefix_of(&l) && l.len() == parent.len() + 1 {
                if l.last() == Some(0) {
                    merged.push(parent.clone());
                }
            } else {
                merged.push(l);
            }
        }
        cur.0[ti] = Tree::from_leaves(&merged).expect("merging a cherry keeps a prefix code");
        steps.push(elementary(pos + 1, cur.leaves()).expect("position in range"));
    }
    steps.reverse();
    (f.roots(), steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Tree {
        s.parse().unwrap()
    }
    fn w(s: &str) -> BinaryWord {
        s.parse().unwrap()
    }

    fn words(v: &[&str]) -> Vec<BinaryWord> {
        v.iter().map(|s| w(s)).collect()
    }

    #[test]
    fn leaves_examples() {
        assert_eq!(Tree::caret().leaves(), words(&["0", "1"]));
        let sample = Tree::node(Tree::node(Tree::Leaf, Tree::caret()), Tree::caret());
        assert_eq!(sample.leaves(), words(&["00", "010", "011", "10", "11"]));
        assert_eq!(Tree::Leaf.leaves(), vec![BinaryWord::empty()]);
    }

    #[test]
    fn elementary_examples() {
        let f = elementary(2, 3).unwrap();
        assert_eq!(f.trees(), &[Tree::Leaf, Tree::caret(), Tree::Leaf]);
        assert_eq!(elementary(1, 1).unwrap().trees(), &[Tree::caret()]);
        assert_eq!(elementary(3, 3).unwrap().trees(), &[Tree::Leaf, Tree::Leaf, Tree::caret()]);
        assert!(elementary(4, 3).is_err());
        assert!(elementary(0, 3).is_err());
    }

    #[test]
    fn compose_examples() {
        let caret = Forest::from_tree(Tree::caret());
        assert_eq!(compose(&Forest::identity(2), &caret).unwrap(), caret);
        let a = compose(&elementary(1, 2).unwrap(), &caret).unwrap();
        assert_eq!(a.trees()[0].leaves(), words(&["00", "01", "1"]));
        let b = compose(&elementary(2, 2).unwrap(), &caret).unwrap();
        assert_eq!(b.trees()[0].leaves(), words(&["0", "10", "11"]));
        assert!(compose(&Forest::identity(3), &caret).is_err());
    }

    #[test]
    fn tensor_examples() {
        let id1 = Forest::identity(1);
        let caret = Forest::from_tree(Tree::caret());
        assert_eq!(tensor(&id1, &caret), elementary(2, 2).unwrap());
        let cc = tensor(&caret, &caret);
        assert_eq!((cc.roots(), cc.leaves()), (2, 4));
        assert!(Forest::new(vec![]).is_err());
    }

    #[test]
    fn slide_examples() {
        let f: Forest = "[];[0,1]".parse().unwrap();
        let (s, moved) = slide(&f, &Permutation::identity(2)).unwrap();
        assert!(s.is_identity());
        assert_eq!(moved, f);

        let (s, moved) = slide(&f, &Permutation::transposition(2, 0, 1)).unwrap();
        assert_eq!(s.to_string(), "(2 3 1)");
        assert_eq!(moved.to_string(), "[0,1];[ε]");

        let ff: Forest = "[0,1];[0,1]".parse().unwrap();
        let (s, moved) = slide(&ff, &Permutation::transposition(2, 0, 1)).unwrap();
        assert_eq!(s.to_string(), "(3 4 1 2)");
        assert_eq!(moved, ff);
    }

    #[test]
    fn common_refinement_examples() {
        let x = t("[0,10,11]");
        let (p, q) = common_refinement(&x, &x);
        assert_eq!(p, Forest::identity(3));
        assert_eq!(q, Forest::identity(3));

        let (p, q) = common_refinement(&Tree::caret(), &Tree::Leaf);
        assert_eq!(p, Forest::identity(2));
        assert_eq!(q, Forest::from_tree(Tree::caret()));

        let (a, b) = (t("[0,10,11]"), t("[00,01,1]"));
        let (p, q) = common_refinement(&a, &b);
        let lhs = compose(&p, &Forest::from_tree(a)).unwrap();
        let rhs = compose(&q, &Forest::from_tree(b)).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(lhs.trees()[0].leaves(), words(&["00", "01", "10", "11"]));
        assert_eq!(p.to_string(), "[0,1];[ε];[ε]");
        assert_eq!(q.to_string(), "[ε];[ε];[0,1]");
    }

    #[test]
    fn min_tree_examples() {
        assert_eq!(min_tree(&w("")), Tree::Leaf);
        assert_eq!(min_tree(&w("0")), Tree::caret());
        assert_eq!(min_tree(&w("01")).leaves(), words(&["00", "01", "1"]));
    }

    #[test]
    fn permutation_text() {
        let p: Permutation = "(2 3 1)".parse().unwrap();
        assert_eq!(p.apply(0), 1);
        assert_eq!(p.permute(&['a', 'b', 'c']), vec!['c', 'a', 'b']);
        assert!("(1 1)".parse::<Permutation>().is_err());
        assert!(SymForest::new(Forest::from_tree(Tree::caret()), Permutation::identity(3)).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        pub fn tree(depth: u32) -> impl Strategy<Value = Tree> {
            let leaf = Just(Tree::Leaf);
            leaf.prop_recursive(depth, 32, 2, |inner| {
                prop_oneof![
                    1 => Just(Tree::Leaf),
                    2 => (inner.clone(), inner).prop_map(|(l, r)| Tree::node(l, r)),
                ]
            })
        }

        fn forest_on(width: usize) -> impl Strategy<Value = Forest> {
            proptest::collection::vec(tree(3), width).prop_map(|v| Forest::new(v).unwrap())
        }

        fn sym(n: usize) -> impl Strategy<Value = Permutation> {
            Just((0..n).collect::<Vec<_>>())
                .prop_shuffle()
                .prop_map(|v| Permutation::new(v).unwrap())
        }

        proptest! {
            #[test]
            fn compose_is_associative(
                (f, g, h) in (1usize..4)
                    .prop_flat_map(forest_on)
                    .prop_flat_map(|f| { let n = f.leaves(); (Just(f), forest_on(n)) })
                    .prop_flat_map(|(f, g)| { let n = g.leaves(); (Just(f), Just(g), forest_on(n)) })
            ) {
                let left = compose(&h, &compose(&g, &f).unwrap()).unwrap();
                let right = compose(&compose(&h, &g).unwrap(), &f).unwrap();
                prop_assert_eq!(left, right);
            }

            #[test]
            fn tensor_interchange(
                (f, f2, g, g2) in (1usize..3, 1usize..3)
                    .prop_flat_map(|(a, b)| (forest_on(a), forest_on(b)))
                    .prop_flat_map(|(f2, g2)| {
                        let (a, b) = (f2.leaves(), g2.leaves());
                        (forest_on(a), Just(f2), forest_on(b), Just(g2))
                    })
            ) {
                let lhs = compose(&tensor(&f, &g), &tensor(&f2, &g2)).unwrap();
                let rhs = tensor(&compose(&f, &f2).unwrap(), &compose(&g, &g2).unwrap());
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn slide_matches_strand_semantics(
                (f, sigma) in (1usize..5).prop_flat_map(|n| (forest_on(n), sym(n)))
            ) {
                let (s, moved) = slide(&f, &sigma).unwrap();
                let right = SymForest::new(moved, s).unwrap();
                let left = SymForest::new(f.clone(), Permutation::identity(f.leaves())).unwrap();
                for root in 0..f.roots() {
                    let target_root = sigma.apply(root);
                    for path in f.trees()[target_root].leaves() {
                        prop_assert_eq!(
                            left.strand_target(target_root, &path),
                            right.strand_target(root, &path)
                        );
                    }
                }
            }

            #[test]
            fn common_refinement_commutes(a in tree(4), b in tree(4)) {
                let (p, q) = common_refinement(&a, &b);
                prop_assert_eq!(
                    compose(&p, &Forest::from_tree(a)).unwrap(),
                    compose(&q, &Forest::from_tree(b)).unwrap()
                );
            }

            #[test]
            fn elementary_decomposition_round_trip(f in (1usize..4).prop_flat_map(forest_on)) {
                let (width, steps) = decompose_elementary(&f);
                let mut acc = Forest::identity(width);
                for e in &steps {
                    prop_assert_eq!(e.trees().iter().filter(|t| !t.is_leaf()).count(), 1);
                    acc = compose(e, &acc).unwrap();
                }
                prop_assert_eq!(acc, f);
            }

            #[test]
            fn leaves_round_trip(a in tree(5)) {
                prop_assert_eq!(Tree::from_leaves(&a.leaves()).unwrap(), a);
            }
        }
    }
}
