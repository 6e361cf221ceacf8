//! Seeded random generation of test data.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::base::{Ctx, KElement};
use crate::forest::{Permutation, Tree};
use crate::semidirect::GElement;
use crate::thompson::VElement;
use crate::words::{BinaryWord, DyadicPoint};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Leaf set of a random tree with exactly `leaves` leaves and depth at most
/// `max_depth` (`leaves` is clamped to `2^max_depth`).
pub fn random_leaves<R: Rng>(rng: &mut R, leaves: usize, max_depth: usize) -> Vec<BinaryWord> {
    let cap = 1usize << max_depth.min(20);
    let target = leaves.clamp(1, cap);
    let mut out = vec![BinaryWord::empty()];
    while out.len() < target {
        let open: Vec<usize> = (0..out.len()).filter(|&i| out[i].len() < max_depth).collect();
        let &i = open.choose(rng).expect("capacity checked");
        let w = out.remove(i);
        out.push(w.child(0));
        out.push(w.child(1));
    }
    out.sort();
    out
}

pub fn random_tree<R: Rng>(rng: &mut R, max_leaves: usize, max_depth: usize) -> Tree {
    let n = rng.gen_range(1..=max_leaves.max(1));
    Tree::from_leaves(&random_leaves(rng, n, max_depth)).expect("leaves form a prefix code")
}

pub fn random_permutation<R: Rng>(rng: &mut R, n: usize) -> Permutation {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(rng);
    Permutation::new(v).expect("shuffle is a bijection")
}

/// A random element of V built from two trees with at most `max_leaves`
/// leaves and depth at most `max_depth`.
pub fn random_v<R: Rng>(rng: &mut R, max_leaves: usize, max_depth: usize) -> VElement {
    let n = rng.gen_range(1..=max_leaves.max(1)).min(1 << max_depth.min(20));
    let d = random_leaves(rng, n, max_depth);
    let mut r = random_leaves(rng, n, max_depth);
    r.shuffle(rng);
    VElement::from_pairs(d.into_iter().zip(r).collect()).expect("two prefix codes of equal size")
}

/// A random element of F (order-preserving).
pub fn random_f<R: Rng>(rng: &mut R, max_leaves: usize, max_depth: usize) -> VElement {
    let n = rng.gen_range(1..=max_leaves.max(1)).min(1 << max_depth.min(20));
    let d = random_leaves(rng, n, max_depth);
    let r = random_leaves(rng, n, max_depth);
    VElement::from_pairs(d.into_iter().zip(r).collect()).expect("two prefix codes of equal size")
}

pub fn random_word<R: Rng>(rng: &mut R, max_len: usize) -> BinaryWord {
    let n = rng.gen_range(0..=max_len);
    BinaryWord::from_digits((0..n).map(|_| rng.gen_range(0..2u8)).collect()).expect("binary digits")
}

pub fn random_point<R: Rng>(rng: &mut R, max_len: usize) -> DyadicPoint {
    crate::words::canonicalize(&random_word(rng, max_len))
}

/// A random simple function: a random partition of depth at most
/// `max_depth` with random decorations, plus up to `max_exc` exceptions.
pub fn random_k<R: Rng>(rng: &mut R, ctx: &Ctx, max_depth: usize, max_exc: usize) -> KElement {
    let n = ctx.group().order();
    let leaves = rng.gen_range(1..=(1usize << max_depth.min(4)));
    let cells = random_leaves(rng, leaves, max_depth).into_iter().map(|u| (u, rng.gen_range(0..n))).collect();
    let mut exc: Vec<(DyadicPoint, usize)> = Vec::new();
    for _ in 0..rng.gen_range(0..=max_exc) {
        let p = random_point(rng, max_depth + 1);
        let val = rng.gen_range(0..n);
        if !exc.iter().any(|(q, _)| *q == p) {
            exc.push((p, val));
        }
    }
    KElement::from_parts(ctx, cells, exc).expect("leaves of a tree")
}

pub fn random_g<R: Rng>(rng: &mut R, ctx: &Ctx) -> GElement {
    GElement::new(random_k(rng, ctx, 3, 2), random_v(rng, 5, 3))
}
