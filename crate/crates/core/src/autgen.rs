//! Automorphisms of the untwisted wreath product `G = ∏_{Q₂}Γ ⋊ V`:
//! constructors for the factors `A₁, A₂, A₃, A₄, A₆` and the extraction
//! chain that splits an automorphism back into them.
//!
//! `build` composes `A₆ ∘ A₄ ∘ A₃ ∘ A₂ ∘ A₁` (so `A₁` acts first), and
//! `factor` peels the factors off from the right in the same order.

use std::cell::RefCell;
use std::fmt;
use std::sync::Arc;

use crate::base::{Ctx, KElement};
use crate::error::{Error, Result};
use crate::gamma::{Elt, GroupHom};
use crate::random::{random_k, random_v};
use crate::rigidity::{extract_cocycle, extract_kappa_x, extract_zeta, reconstruct_phi, GMap, Isomorphism, Provenance};
use crate::semidirect::{GElement, Model};
use crate::thompson::{cell_swap, prefix_transport, x0, VElement};
use crate::words::{canonicalize, BinaryWord, DyadicPoint};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AutFactor {
    /// `(a, v) ↦ (π(φ)a, φvφ⁻¹)`
    A1(VElement),
    /// `(a, v) ↦ (β∘a, v)`
    A2(GroupHom),
    /// `(a, v) ↦ (a·s(z)_v, v)`
    A3(Elt),
    /// `(a, v) ↦ (h·a·π(v)(h)⁻¹, v)`
    A4(KElement),
    /// `g ↦ g·λ(∏ₓ E(x))` where `E(x)` is the exception part of `a` at `x`
    /// and `λ : Γ → ZΓ`.
    A6(GroupHom),
}

impl AutFactor {
    pub fn tag(&self) -> usize {
        match self {
            AutFactor::A1(_) => 1,
            AutFactor::A2(_) => 2,
            AutFactor::A3(_) => 3,
            AutFactor::A4(_) => 4,
            AutFactor::A6(_) => 6,
        }
    }

    fn check(&self, ctx: &Ctx) -> Result<()> {
        let group = ctx.group();
        match self {
            AutFactor::A1(_) => Ok(()),
            AutFactor::A2(b) => {
                if b.source() != group || b.target() != group || !b.is_bijective() {
                    return Err(Error::Precondition("A2 needs an automorphism of Γ".into()));
                }
                Ok(())
            }
            AutFactor::A3(z) => {
                if *z >= group.order() || !group.is_central(*z) {
                    return Err(Error::NotCentral(format!("A3 payload {z}")));
                }
                Ok(())
            }
            AutFactor::A4(h) => {
                if h.ctx() != ctx {
                    return Err(Error::ContextMismatch);
                }
                if !group.is_central(h.eval(&DyadicPoint::basepoint())) {
                    return Err(Error::Precondition("A4 needs h(00⋯) ∈ ZΓ".into()));
                }
                Ok(())
            }
            AutFactor::A6(l) => {
                if l.source() != group || l.target() != group {
                    return Err(Error::ContextMismatch);
                }
                if l.values().iter().any(|&z| !group.is_central(z)) {
                    return Err(Error::NotCentral("A6 payload must be valued in ZΓ".into()));
                }
                Ok(())
            }
        }
    }

    pub fn inverse(&self, ctx: &Ctx) -> Result<AutFactor> {
        Ok(match self {
            AutFactor::A1(p) => AutFactor::A1(p.inv()),
            AutFactor::A2(b) => AutFactor::A2(b.inverse()?),
            AutFactor::A3(z) => AutFactor::A3(ctx.group().inv(*z)),
            AutFactor::A4(h) => AutFactor::A4(h.inv()),
            AutFactor::A6(l) => {
                let g = ctx.group();
                AutFactor::A6(GroupHom::from_fn(g, g, |x| g.inv(l.apply(x)))?)
            }
        })
    }

    pub fn apply(&self, g: &GElement) -> Result<GElement> {
        let ctx = g.ctx();
        let (a, v) = (g.k(), g.v());
        Ok(match self {
            AutFactor::A1(p) => GElement::new(a.act(p), p.mul(v).mul(&p.inv())),
            AutFactor::A2(b) => GElement::new(a.map_values(|x| b.apply(x)), v.clone()),
            AutFactor::A3(z) => GElement::new(a.mul(&s_cocycle(*z, ctx, v)?)?, v.clone()),
            AutFactor::A4(h) => GElement::new(h.mul(a)?.mul(&h.act(v).inv())?, v.clone()),
            AutFactor::A6(l) => {
                let z = lambda_of_exceptions(l, a);
                GElement::new(a.mul(&KElement::constant(ctx, z))?, v.clone())
            }
        })
    }

    /// Parses `A1(<v>)`, `A2(<hom>)`, `A3(<elt>)`, `A4(<k>)`, `A6(<hom>)`.
    pub fn parse(ctx: &Ctx, s: &str) -> Result<AutFactor> {
        let s = s.trim();
        let (tag, rest) = s.split_once('(').ok_or_else(|| Error::Parse(format!("expected A<n>(...), got {s:?}")))?;
        let body = rest.strip_suffix(')').ok_or_else(|| Error::Parse(format!("unclosed factor {s:?}")))?;
        let g = ctx.group();
        let f = match tag.trim() {
            "A1" => AutFactor::A1(body.parse()?),
            "A2" => AutFactor::A2(GroupHom::parse(body, g, g)?),
            "A3" => AutFactor::A3(g.parse_element(body.trim())?),
            "A4" => AutFactor::A4(KElement::parse(ctx, body)?),
            "A6" => AutFactor::A6(GroupHom::parse(body, g, g)?),
            other => return Err(Error::Parse(format!("unknown factor {other:?}"))),
        };
        f.check(ctx)?;
        Ok(f)
    }
}

impl fmt::Display for AutFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AutFactor::A1(p) => write!(f, "A1({p})"),
            AutFactor::A2(b) => write!(f, "A2({})", b.display_values()),
            AutFactor::A3(z) => write!(f, "A3({z})"),
            AutFactor::A4(h) => write!(f, "A4({h})"),
            AutFactor::A6(l) => write!(f, "A6({})", l.display_values()),
        }
    }
}

/// Splits `A1(..) * A2(..) * ...` at top-level `*`.
pub fn parse_factors(ctx: &Ctx, s: &str) -> Result<Vec<AutFactor>> {
    let s = s.trim();
    if s.is_empty() || s == "id" {
        return Ok(Vec::new());
    }
    let mut parts = Vec::new();
    let (mut depth, mut start) = (0i32, 0usize);
    for (i, ch) in s.char_indices() {
        match ch {
            '(' | '{' | '[' => depth += 1,
            ')' | '}' | ']' => depth -= 1,
            '*' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts.into_iter().map(|p| AutFactor::parse(ctx, p)).collect()
}

/// `∏ₓ λ(a(x)·cell(x)⁻¹)` over the exception points of `a`.
fn lambda_of_exceptions(l: &GroupHom, a: &KElement) -> Elt {
    let g = a.group();
    a.exceptions().fold(g.identity(), |acc, (x, v)| {
        let e = g.mul(g.inv(a.cell_value(x)), v);
        g.mul(acc, l.apply(e))
    })
}

fn require_central(ctx: &Ctx, z: Elt) -> Result<()> {
    if z >= ctx.group().order() || !ctx.group().is_central(z) {
        return Err(Error::NotCentral(format!("{z}")));
    }
    Ok(())
}

/// `s(z)_v(x) = z^{log₂ v'(v⁻¹x)}`: on the range cell `r` of `d → r` the
/// value is `z^{|d|-|r|}`.
pub fn s_cocycle(z: Elt, ctx: &Ctx, v: &VElement) -> Result<KElement> {
    require_central(ctx, z)?;
    let g = ctx.group();
    let cells = v.pairs().iter().map(|(d, r)| (r.clone(), g.pow(z, d.len() as i64 - r.len() as i64))).collect();
    KElement::from_parts(ctx, cells, Vec::new())
}

/// `ν(x) = -|stem x|`.
pub fn nu(x: &DyadicPoint) -> i64 {
    -(x.stem().len() as i64)
}

/// `p_v(x) = log₂ v'(v⁻¹x) - ν(x) + ν(v⁻¹x)`.
pub fn p_v(v: &VElement, x: &DyadicPoint) -> i64 {
    let y = v.inv().act_point(x);
    v.slope(&y) - nu(x) + nu(&y)
}

/// `s₀(z)_v(x) = z^{p_v(x)}`. Writing `x = r·y` inside a range cell,
/// `p_v(x) = 0` unless `y = 00⋯`, so only the points `r·00⋯` can carry a
/// value.
pub fn s0_cocycle(z: Elt, ctx: &Ctx, v: &VElement) -> Result<KElement> {
    require_central(ctx, z)?;
    let g = ctx.group();
    let exc = v
        .pairs()
        .iter()
        .map(|(_, r)| {
            let x = canonicalize(r);
            let p = p_v(v, &x);
            (x, g.pow(z, p))
        })
        .collect();
    KElement::from_parts(ctx, vec![(BinaryWord::empty(), g.identity())], exc)
}

/// The composite `A₆ ∘ A₄ ∘ A₃ ∘ A₂ ∘ A₁` of the given factors (at most one
/// of each kind; the list order is irrelevant).
pub fn build(ctx: &Ctx, factors: &[AutFactor]) -> Result<Isomorphism> {
    if !ctx.is_untwisted() {
        return Err(Error::Precondition("automorphism factors need β = id".into()));
    }
    let mut sorted = factors.to_vec();
    sorted.sort_by_key(AutFactor::tag);
    for w in sorted.windows(2) {
        if w[0].tag() == w[1].tag() {
            return Err(Error::Precondition(format!("two A{} factors", w[0].tag())));
        }
    }
    for f in &sorted {
        f.check(ctx)?;
    }
    let inverses = sorted.iter().rev().map(|f| f.inverse(ctx)).collect::<Result<Vec<_>>>()?;
    let fwd = sorted.clone();
    let forward: GMap = Arc::new(move |g: &GElement| fwd.iter().try_fold(g.clone(), |acc, f| f.apply(&acc)));
    let backward: GMap = Arc::new(move |g: &GElement| inverses.iter().try_fold(g.clone(), |acc, f| f.apply(&acc)));
    let model = Model::Wreath(ctx.clone());
    Ok(Isomorphism::new(model.clone(), model, forward, backward, Some(Provenance::Factors(sorted))))
}

/// Tuning for [`factor`] and [`cocycle_factorize`].
#[derive(Clone, Debug)]
pub struct FactorOptions {
    /// Depth of the partition used to rebuild `h` and `f` pointwise.
    pub depth: usize,
    /// Maximal cell depth when rebuilding `φ`.
    pub phi_depth: usize,
    /// Random checks per stage.
    pub samples: usize,
    pub seed: u64,
}

impl Default for FactorOptions {
    fn default() -> Self {
        FactorOptions { depth: 6, phi_depth: 6, samples: 20, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct Factorization {
    pub factors: Vec<AutFactor>,
    /// `build(factors)⁻¹ ∘ θ`.
    pub residual: Isomorphism,
    pub residual_is_identity: bool,
    pub residual_in_a5: bool,
}

/// Some `v` with `v(00⋯) = x` and slope exponent 0 at `00⋯`.
fn transport_to(x: &DyadicPoint) -> Result<VElement> {
    let stem = x.stem();
    if stem.is_empty() {
        return Ok(VElement::identity());
    }
    prefix_transport(&BinaryWord::empty().pad_zeros(stem.len()), stem)
}

/// [`KElement::from_pointwise`] for a fallible function.
fn pointwise(ctx: &Ctx, depth: usize, f: impl Fn(&DyadicPoint) -> Result<Elt>) -> Result<KElement> {
    let err = RefCell::new(None);
    let out = KElement::from_pointwise(ctx, depth, |x| {
        f(x).unwrap_or_else(|e| {
            err.borrow_mut().get_or_insert(e);
            ctx.group().identity()
        })
    });
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

fn strip_right(theta: &Isomorphism, f: &AutFactor, ctx: &Ctx) -> Result<Isomorphism> {
    theta.compose(&build(ctx, &[f.inverse(ctx)?])?)
}

/// Splits `δ_v = s(z)_v · [f, v]` with `δ` valued in `ZΓ`; `f` is normalised
/// by `f(00⋯) = e` and rebuilt on a depth-`depth` partition.
pub fn cocycle_factorize(
    ctx: &Ctx,
    delta: &dyn Fn(&VElement) -> Result<KElement>,
    opts: &FactorOptions,
) -> Result<(Elt, KElement)> {
    let g = ctx.group();
    let base = DyadicPoint::basepoint();
    // x₀ fixes 00⋯ with slope exponent -1 there
    let z = g.inv(delta(&x0())?.eval(&base));
    if !g.is_central(z) {
        return Err(Error::NotCentral(format!("δ(x₀)(00⋯) = {}", g.name(g.inv(z)))));
    }
    let f = pointwise(ctx, opts.depth, |x| Ok(delta(&transport_to(x)?)?.eval(x)))?;
    let mut rng = crate::random::rng(opts.seed);
    for _ in 0..opts.samples {
        let v = random_v(&mut rng, 5, 3);
        let expected = s_cocycle(z, ctx, &v)?.mul(&f.mul(&f.act(&v).inv())?)?;
        if delta(&v)? != expected {
            return Err(Error::Extraction(format!("δ is not s(z)·[f, ·] at {v}")));
        }
    }
    Ok((z, f))
}

/// Splits `θ` into factor payloads and a residual in `A₅`.
pub fn factor(theta: &Isomorphism, opts: &FactorOptions) -> Result<Factorization> {
    let ctx = theta.source().ctx().clone();
    let model = Model::Wreath(ctx.clone());
    if theta.source() != &model || theta.target() != &model || !ctx.is_untwisted() {
        return Err(Error::Precondition("factor expects an automorphism of the untwisted wreath product".into()));
    }
    let g = ctx.group().clone();
    let base = DyadicPoint::basepoint();
    let mut factors = Vec::new();

    // χ₁
    let phi = reconstruct_phi(theta, opts.phi_depth)?;
    let mut rest = theta.clone();
    if !phi.is_identity() {
        let f = AutFactor::A1(phi);
        rest = strip_right(&rest, &f, &ctx)?;
        factors.push(f);
    }

    // χ₂
    let beta = extract_kappa_x(&rest, &base)?;
    if !beta.is_identity() {
        let f = AutFactor::A2(beta);
        rest = strip_right(&rest, &f, &ctx)?;
        factors.push(f);
    }

    // χ₃: κ_x = ad(h(x)) with h(x) = c_{v_x}(x), then c_v = d_v·[h, v]
    let cocycle = |t: &Isomorphism, v: &VElement| -> Result<KElement> { Ok(extract_cocycle(t, v, &[])?.0) };
    let h = pointwise(&ctx, opts.depth, |x| Ok(cocycle(&rest, &transport_to(x)?)?.eval(x)))?;
    let delta = |v: &VElement| -> Result<KElement> {
        let c = cocycle(&rest, v)?;
        let bracket = h.mul(&h.act(v).inv())?;
        let d = c.mul(&bracket.inv())?;
        if d.cells().any(|(_, x)| !g.is_central(x)) || d.exceptions().any(|(_, x)| !g.is_central(x)) {
            return Err(Error::Extraction(format!("c_v·[h, v]⁻¹ is not central at {v}")));
        }
        Ok(d)
    };
    let (z, f) = cocycle_factorize(&ctx, &delta, opts)?;
    if z != g.identity() {
        let fac = AutFactor::A3(z);
        rest = strip_right(&rest, &fac, &ctx)?;
        factors.push(fac);
    }

    // χ₄: what is left on V is ad(h·f)
    let hf = h.mul(&f)?;
    if !hf.is_identity() {
        let fac = AutFactor::A4(hf);
        rest = strip_right(&rest, &fac, &ctx)?;
        factors.push(fac);
    }

    // ζ of the remainder, read on point masses at 1000⋯
    let one = canonicalize(&BinaryWord::from_digits(vec![1])?);
    let lambda = GroupHom::from_fn(&g, &g, |x| {
        extract_zeta(&rest, &KElement::point_mass(&ctx, one.clone(), x)).unwrap_or(usize::MAX)
    })
    .map_err(|_| Error::Extraction("ζ on point masses is not a homomorphism into ZΓ".into()))?;
    if !lambda.values().iter().all(|&v| v == g.identity()) {
        factors.push(AutFactor::A6(lambda));
    }

    let built = build(&ctx, &factors)?;
    let residual = built.inverse().compose(theta)?;
    let mut rng = crate::random::rng(opts.seed ^ 0x5eed);
    let residual_is_identity = (0..opts.samples).all(|_| {
        let x = crate::random::random_g(&mut rng, &ctx);
        residual.apply(&x).map(|y| y == x).unwrap_or(false)
    });
    let residual_in_a5 = a5_check(&residual, opts.samples, opts.seed)?;
    Ok(Factorization { factors, residual, residual_is_identity, residual_in_a5 })
}

/// Sampled test of membership in `A₅`: support preservation on random
/// elements of K, identity on point masses and on generators of V.
pub fn a5_check(theta: &Isomorphism, samples: usize, seed: u64) -> Result<bool> {
    let ctx = theta.source().ctx().clone();
    let mut rng = crate::random::rng(seed);
    for _ in 0..samples {
        let a = random_k(&mut rng, &ctx, 3, 2);
        let y = theta.apply(&GElement::from_k(a.clone()))?;
        if !y.in_k() || y.k().support() != a.support() {
            return Ok(false);
        }
    }
    for x in DyadicPoint::all_up_to(3) {
        for h in ctx.group().elements() {
            let pm = GElement::from_k(KElement::point_mass(&ctx, x.clone(), h));
            if theta.apply(&pm)? != pm {
                return Ok(false);
            }
        }
    }
    let mut gens = vec![x0(), cell_swap()];
    gens.extend((0..samples.min(10)).map(|_| random_v(&mut rng, 5, 3)));
    for v in gens {
        let g = GElement::from_v(&ctx, v);
        if theta.apply(&g)? != g {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `h ≡ h'` modulo constant maps into `ZΓ`.
pub fn same_mod_center(h: &KElement, h2: &KElement) -> bool {
    let Ok(q) = h.inv().mul(h2) else { return false };
    q.constant_value().is_some_and(|c| h.group().is_central(c))
}
