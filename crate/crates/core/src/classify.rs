//! Isomorphisms between the groups `G(ω)`: explicit constructions and the
//! decision procedures for the wreath and endomorphism cases.

use std::sync::Arc;

use crate::base::{Ctx, KElement, TwistContext};
use crate::error::{Error, Result};
use crate::forest::SymForest;
use crate::gamma::{eventual_image, gamma_omega_subgroup, isomorphisms, outer_conjugate, Elt, GroupHom, OmegaData};
use crate::rigidity::{GMap, Isomorphism, Provenance};
use crate::semidirect::{GElement, Model};
use crate::thompson::VElement;
use crate::words::BinaryWord;

/// `(a, v) ↦ (γ∘a, v)` for `γ` intertwining the twists.
pub fn iso_from_equivariant(gamma: &GroupHom, src: &Ctx, tgt: &Ctx) -> Result<Isomorphism> {
    if gamma.source() != src.group() || gamma.target() != tgt.group() {
        return Err(Error::ContextMismatch);
    }
    if !gamma.is_bijective() {
        return Err(Error::Precondition("γ must be an isomorphism".into()));
    }
    let (b, bt) = (src.twist(), tgt.twist());
    if src.group().elements().any(|g| gamma.apply(b.apply(g)) != bt.apply(gamma.apply(g))) {
        return Err(Error::Precondition("γβ ≠ β̃γ".into()));
    }
    let inv = gamma.inverse()?;
    let (t1, g1) = (tgt.clone(), gamma.clone());
    let forward: GMap =
        Arc::new(move |g: &GElement| Ok(GElement::new(g.k().transport(&t1, |x| g1.apply(x)), g.v().clone())));
    let s2 = src.clone();
    let backward: GMap =
        Arc::new(move |g: &GElement| Ok(GElement::new(g.k().transport(&s2, |x| inv.apply(x)), g.v().clone())));
    Ok(Isomorphism::new(
        Model::Wreath(src.clone()),
        Model::Wreath(tgt.clone()),
        forward,
        backward,
        Some(Provenance::Equivariant(gamma.clone())),
    ))
}

/// A witness that `ω̃ = γ ∘ ad(g) ∘ ω ∘ (γ × γ)⁻¹`, after swapping the
/// coordinates when `swap` is set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OmegaWitness {
    pub gamma: GroupHom,
    pub swap: bool,
    pub g: Elt,
}

/// Exhaustive search over `Iso(Γ, Γ̃) × S₂ × Γ_ω`. A witness proves
/// `G(ω) ≅ G(ω̃)`; `None` proves nothing.
pub fn sufficient_iso_check(w: &OmegaData, wt: &OmegaData) -> Option<OmegaWitness> {
    let (g, gt) = (w.group(), wt.group());
    let sub = gamma_omega_subgroup(w);
    for gamma in isomorphisms(g, gt) {
        let ginv = gamma.inverse().expect("isomorphism");
        for swap in [false, true] {
            for &h in &sub {
                let ok = gt.elements().all(|a| {
                    gt.elements().all(|b| {
                        let (x, y) = if swap { (b, a) } else { (a, b) };
                        let inner = w.apply(ginv.apply(x), ginv.apply(y));
                        wt.apply(a, b) == gamma.apply(g.conj(h, inner))
                    })
                });
                if ok {
                    return Some(OmegaWitness { gamma, swap, g: h });
                }
            }
        }
    }
    None
}

/// `G(β) ≅ G(β̃)` iff `β̃ = ad(h̃)∘γβγ⁻¹`; returns `(γ, h̃)`.
pub fn classify_wreath(beta: &GroupHom, beta_t: &GroupHom) -> Option<(GroupHom, Elt)> {
    outer_conjugate(beta, beta_t)
}

#[derive(Clone, Debug)]
pub struct EndoWitness {
    pub image: Vec<Elt>,
    pub image_t: Vec<Elt>,
    pub gamma: GroupHom,
    pub h: Elt,
}

/// Decides `G(β) ≅ G(β̃)` for endomorphisms by passing to eventual images.
pub fn classify_endos(beta: &GroupHom, beta_t: &GroupHom) -> Result<Option<EndoWitness>> {
    let e = eventual_image(beta)?;
    let et = eventual_image(beta_t)?;
    Ok(classify_wreath(&e.restricted, &et.restricted).map(|(gamma, h)| EndoWitness {
        image: e.elements.clone(),
        image_t: et.elements.clone(),
        gamma,
        h,
    }))
}

/// `b^R_u = R_{u_n}(b) · R_{u_{n-1}u_n}(b) ⋯ R_u(b)`, with `b^R_ε = e`.
pub fn b_r(b: &KElement, u: &BinaryWord) -> Result<KElement> {
    let d = u.digits();
    let mut acc = KElement::identity(b.ctx());
    for start in (0..d.len()).rev() {
        let suffix = BinaryWord::from_digits(d[start..].to_vec())?;
        acc = acc.mul(&b.r_word(&suffix))?;
    }
    Ok(acc)
}

/// The cocycle `c_v` relating `π` to the action built from `ad(R_i(b))∘R_i`:
/// on the range cell `r` of a pair `d → r`,
/// `c_v(r·x) = β^{|r|}((b^R_d)⁻¹(x) · b^R_r(x))`.
pub fn inner_cocycle(b: &KElement, v: &VElement) -> Result<KElement> {
    let parts = v
        .pairs()
        .iter()
        .map(|(d, r)| Ok((r.clone(), b_r(b, d)?.inv().mul(&b_r(b, r)?)?)))
        .collect::<Result<Vec<_>>>()?;
    KElement::assemble(b.ctx(), parts)
}

/// `c_v` from an arbitrary (possibly unreduced) table of `v`.
pub fn inner_cocycle_from_pairs(b: &KElement, pairs: &[(BinaryWord, BinaryWord)]) -> Result<KElement> {
    let parts = pairs
        .iter()
        .map(|(d, r)| Ok((r.clone(), b_r(b, d)?.inv().mul(&b_r(b, r)?)?)))
        .collect::<Result<Vec<_>>>()?;
    KElement::assemble(b.ctx(), parts)
}

/// `θ(a, v) = (a·c_v, v)` from the wreath model into the `b`-twisted one.
pub fn inner_twist(b: &KElement) -> Result<Isomorphism> {
    let ctx = b.ctx().clone();
    let (b1, b2) = (b.clone(), b.clone());
    let forward: GMap =
        Arc::new(move |g: &GElement| Ok(GElement::new(g.k().mul(&inner_cocycle(&b1, g.v())?)?, g.v().clone())));
    let backward: GMap =
        Arc::new(move |g: &GElement| Ok(GElement::new(g.k().mul(&inner_cocycle(&b2, g.v())?.inv())?, g.v().clone())));
    Ok(Isomorphism::new(
        Model::Wreath(ctx.clone()),
        Model::InnerTwisted { ctx, b: b.clone() },
        forward,
        backward,
        Some(Provenance::InnerTwist(b.clone())),
    ))
}

/// `Ψ` for `f = (12)∘∧`: every caret has its legs crossed, so each address
/// is negated.
pub fn psi_swap(v: &VElement) -> VElement {
    let pairs = v.pairs().iter().map(|(d, r)| (d.negate(), r.negate())).collect();
    VElement::from_pairs(pairs).expect("negation preserves prefix codes")
}

fn psi_is_swap(f: &SymForest) -> Result<bool> {
    let trees = f.forest.trees();
    if trees.len() != 1 || trees[0].leaf_count() != 2 || f.perm.len() != 2 {
        return Err(Error::Precondition(format!("{} is not a morphism 1 → 2", f.forest)));
    }
    Ok(!f.perm.is_identity())
}

/// `Ψ(v)` for the functor sending the caret to `f : 1 → 2`.
pub fn psi_embed(f: &SymForest, v: &VElement) -> Result<VElement> {
    Ok(if psi_is_swap(f)? { psi_swap(v) } else { v.clone() })
}

/// `θ(av) = π(t⁻¹)(a) · t⁻¹Ψ(v)t`, from the `f`-model to the wreath model.
pub fn embed_check(f: &SymForest, t: &VElement, g: &GElement) -> Result<GElement> {
    let ti = t.inv();
    Ok(GElement::new(g.k().act(&ti), ti.mul(&psi_embed(f, g.v())?).mul(t)))
}

/// The embedding of [`embed_check`] as an isomorphism; only `f = (12)∘∧`
/// and `f = ∧` are accepted, for which `Ψ` is an involution.
pub fn psi_isomorphism(ctx: &Ctx, f: &SymForest, t: &VElement) -> Result<Isomorphism> {
    let swap = psi_is_swap(f)?;
    let (f1, t1) = (f.clone(), t.clone());
    let forward: GMap = Arc::new(move |g: &GElement| embed_check(&f1, &t1, g));
    let (f2, t2) = (f.clone(), t.clone());
    let backward: GMap = Arc::new(move |g: &GElement| {
        Ok(GElement::new(g.k().act(&t2), psi_embed(&f2, &t2.mul(g.v()).mul(&t2.inv()))?))
    });
    Ok(Isomorphism::new(
        Model::Psi { ctx: ctx.clone(), swap },
        Model::Wreath(ctx.clone()),
        forward,
        backward,
        Some(Provenance::Psi(t.clone())),
    ))
}

/// Convenience: the context `(Γ, β)` of the wreath model for `β`.
pub fn wreath_context(beta: &GroupHom) -> Result<Ctx> {
    TwistContext::new(beta.source(), beta.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::Permutation;
    use crate::gamma::FiniteGroup;
    use crate::random::{random_k, random_v, rng};
    use crate::thompson::x0;

    fn z3_inv() -> (crate::gamma::Group, GroupHom) {
        let g = FiniteGroup::cyclic(3).unwrap();
        let inv = GroupHom::parse("inv", &g, &g).unwrap();
        (g, inv)
    }

    #[test]
    fn equivariant_examples() {
        let (g, inv) = z3_inv();
        let ctx = TwistContext::untwisted(&g);
        let id = iso_from_equivariant(&GroupHom::identity(&g), &ctx, &ctx).unwrap();
        let mut r = rng(1);
        let a = crate::random::random_g(&mut r, &ctx);
        assert_eq!(id.apply(&a).unwrap(), a);
        let theta = iso_from_equivariant(&inv, &ctx, &ctx).unwrap();
        theta.validate(&mut r, 50).unwrap();
        let z4 = FiniteGroup::cyclic(4).unwrap();
        let c1 = TwistContext::untwisted(&z4);
        let c2 = TwistContext::new(&z4, GroupHom::parse("inv", &z4, &z4).unwrap()).unwrap();
        assert!(iso_from_equivariant(&GroupHom::identity(&z4), &c1, &c2).is_err());
    }

    #[test]
    fn equivariant_with_twists() {
        let s3 = FiniteGroup::sym(3).unwrap();
        let beta = GroupHom::inner(&s3, 1);
        let gamma = GroupHom::inner(&s3, 3);
        let beta_t = gamma.compose(&beta).unwrap().compose(&gamma.inverse().unwrap()).unwrap();
        let src = TwistContext::new(&s3, beta).unwrap();
        let tgt = TwistContext::new(&s3, beta_t).unwrap();
        let theta = iso_from_equivariant(&gamma, &src, &tgt).unwrap();
        theta.validate(&mut rng(2), 50).unwrap();
    }

    #[test]
    fn omega_witnesses() {
        let g = FiniteGroup::cyclic(3).unwrap();
        let first = OmegaData::from_fn(&g, |a, _| a).unwrap();
        let second = OmegaData::from_fn(&g, |_, b| b).unwrap();
        let w = sufficient_iso_check(&first, &first).unwrap();
        assert!(w.gamma.is_identity() && !w.swap && w.g == 0);
        let w = sufficient_iso_check(&first, &second).unwrap();
        assert!(w.gamma.is_identity() && w.swap);
        // a projection is fixed by every γ, so -g is never reached
        let neg = OmegaData::from_fn(&g, |a, _| g.inv(a)).unwrap();
        let found = sufficient_iso_check(&first, &neg);
        assert_eq!(found, None);
    }

    #[test]
    fn omega_swap_always_found() {
        let s3 = FiniteGroup::sym(3).unwrap();
        for w0 in crate::gamma::endomorphisms(&s3).into_iter().take(6) {
            let e = GroupHom::trivial(&s3, &s3);
            let Ok(w) = OmegaData::from_pair(&w0, &e) else { continue };
            let Ok(ws) = OmegaData::from_pair(&e, &w0) else { continue };
            assert!(sufficient_iso_check(&w, &ws).is_some());
        }
    }

    #[test]
    fn wreath_ground_truths() {
        let (g, inv) = z3_inv();
        assert!(classify_wreath(&GroupHom::identity(&g), &inv).is_none());
        let s3 = FiniteGroup::sym(3).unwrap();
        assert!(classify_wreath(&GroupHom::identity(&s3), &GroupHom::inner(&s3, 1)).is_some());
        let z4 = FiniteGroup::cyclic(4).unwrap();
        let v4 = FiniteGroup::parse_spec("product:cyclic:2,cyclic:2").unwrap();
        assert!(classify_wreath(&GroupHom::identity(&z4), &GroupHom::identity(&v4)).is_none());
    }

    #[test]
    fn wreath_symmetric_and_reflexive() {
        let s3 = FiniteGroup::sym(3).unwrap();
        let autos = crate::gamma::automorphisms(&s3);
        for a in &autos {
            assert!(classify_wreath(a, a).is_some());
            for b in &autos {
                assert_eq!(classify_wreath(a, b).is_some(), classify_wreath(b, a).is_some());
            }
        }
    }

    #[test]
    fn endo_ground_truths() {
        let z4 = FiniteGroup::cyclic(4).unwrap();
        let z2 = FiniteGroup::cyclic(2).unwrap();
        let z6 = FiniteGroup::cyclic(6).unwrap();
        let times2 = GroupHom::parse("mul:2", &z4, &z4).unwrap();
        let zero = GroupHom::trivial(&z2, &z2);
        assert!(classify_endos(&times2, &zero).unwrap().is_some());
        let times3 = GroupHom::parse("mul:3", &z6, &z6).unwrap();
        let w = classify_endos(&times3, &GroupHom::identity(&z2)).unwrap().unwrap();
        assert_eq!(w.image, vec![0, 3]);
        for e in crate::gamma::endomorphisms(&z4) {
            assert!(classify_endos(&e, &e).unwrap().is_some());
        }
    }

    fn contexts() -> Vec<Ctx> {
        let s3 = FiniteGroup::sym(3).unwrap();
        let z4 = FiniteGroup::cyclic(4).unwrap();
        vec![
            TwistContext::untwisted(&s3),
            TwistContext::new(&s3, GroupHom::inner(&s3, 1)).unwrap(),
            TwistContext::new(&z4, GroupHom::parse("inv", &z4, &z4).unwrap()).unwrap(),
        ]
    }

    #[test]
    fn inner_cocycle_identities() {
        for ctx in contexts() {
            let mut r = rng(3);
            for _ in 0..25 {
                let b = random_k(&mut r, &ctx, 3, 2);
                let (v, w) = (random_v(&mut r, 5, 3), random_v(&mut r, 5, 3));
                let model = Model::InnerTwisted { ctx: ctx.clone(), b: b.clone() };
                let (cv, cw, cvw) =
                    (inner_cocycle(&b, &v).unwrap(), inner_cocycle(&b, &w).unwrap(), inner_cocycle(&b, &v.mul(&w)).unwrap());
                assert_eq!(cvw, cw.act(&v).mul(&cv).unwrap());
                assert_eq!(cvw, cv.mul(&model.act(&v, &cw).unwrap()).unwrap());
            }
        }
    }

    #[test]
    fn inner_cocycle_ignores_representative() {
        for ctx in contexts() {
            let mut r = rng(4);
            for _ in 0..20 {
                let b = random_k(&mut r, &ctx, 3, 2);
                let v = random_v(&mut r, 5, 3);
                let deep = v.refined_pairs(v.max_depth() + 1);
                assert_eq!(inner_cocycle_from_pairs(&b, &deep).unwrap(), inner_cocycle(&b, &v).unwrap());
            }
        }
    }

    #[test]
    fn inner_twist_is_isomorphism() {
        for ctx in contexts() {
            let mut r = rng(5);
            for _ in 0..4 {
                let b = random_k(&mut r, &ctx, 3, 2);
                inner_twist(&b).unwrap().validate(&mut r, 15).unwrap();
            }
            let theta = inner_twist(&KElement::identity(&ctx)).unwrap();
            let g = crate::random::random_g(&mut r, &ctx);
            assert_eq!(theta.apply(&g).unwrap(), g);
        }
    }

    #[test]
    fn central_b_gives_central_cocycle() {
        let z4 = FiniteGroup::cyclic(4).unwrap();
        let ctx = TwistContext::untwisted(&z4);
        let mut r = rng(6);
        for _ in 0..20 {
            let b = random_k(&mut r, &ctx, 3, 2);
            let v = random_v(&mut r, 5, 3);
            let a = random_k(&mut r, &ctx, 3, 2);
            let model = Model::InnerTwisted { ctx: ctx.clone(), b };
            assert_eq!(model.act(&v, &a).unwrap(), a.act(&v));
        }
    }

    #[test]
    fn psi_examples() {
        let caret = SymForest::caret_with(Permutation::identity(2)).unwrap();
        let crossed = SymForest::caret_with(Permutation::transposition(2, 0, 1)).unwrap();
        let mut r = rng(7);
        for _ in 0..30 {
            let (v, w) = (random_v(&mut r, 6, 4), random_v(&mut r, 6, 4));
            assert_eq!(psi_embed(&caret, &v).unwrap(), v);
            let pv = psi_embed(&crossed, &v).unwrap();
            assert_eq!(psi_embed(&crossed, &pv).unwrap(), v);
            assert_eq!(psi_embed(&crossed, &v.mul(&w)).unwrap(), pv.mul(&psi_embed(&crossed, &w).unwrap()));
        }
        let px = psi_embed(&crossed, &x0()).unwrap();
        assert_eq!(px, "{1->11, 01->10, 00->0}".parse().unwrap());
        let two = SymForest::new(crate::forest::Forest::identity(2), Permutation::identity(2)).unwrap();
        assert!(psi_embed(&two, &x0()).is_err());
    }

    #[test]
    fn psi_embedding_is_isomorphism() {
        let s3 = FiniteGroup::sym(3).unwrap();
        let ctx = TwistContext::untwisted(&s3);
        let crossed = SymForest::caret_with(Permutation::transposition(2, 0, 1)).unwrap();
        let caret = SymForest::caret_with(Permutation::identity(2)).unwrap();
        let mut r = rng(8);
        for f in [&crossed, &caret] {
            let t = random_v(&mut r, 4, 3);
            psi_isomorphism(&ctx, f, &t).unwrap().validate(&mut r, 20).unwrap();
        }
        let g = crate::random::random_g(&mut r, &ctx);
        let id = VElement::identity();
        assert_eq!(embed_check(&caret, &id, &g).unwrap(), g);
    }
}
