//! The group `G = K ⋊ V` and its twisted variants.
//!
//! Elements are pairs `(a, v)` standing for the product `a·v`, with the law
//! `(a, v)(b, w) = (a·π(v)(b), vw)`. The action `π` depends on the model.

use std::fmt;

use crate::base::{Ctx, KElement};
use crate::error::{Error, Result};
use crate::gamma::Elt;
use crate::thompson::VElement;

#[derive(Clone, PartialEq, Eq)]
pub struct GElement {
    k: KElement,
    v: VElement,
}

impl GElement {
    pub fn new(k: KElement, v: VElement) -> Self {
        GElement { k, v }
    }

    pub fn identity(ctx: &Ctx) -> Self {
        GElement { k: KElement::identity(ctx), v: VElement::identity() }
    }

    pub fn from_k(k: KElement) -> Self {
        GElement { k, v: VElement::identity() }
    }

    pub fn from_v(ctx: &Ctx, v: VElement) -> Self {
        GElement { k: KElement::identity(ctx), v }
    }

    pub fn k(&self) -> &KElement {
        &self.k
    }

    pub fn v(&self) -> &VElement {
        &self.v
    }

    pub fn ctx(&self) -> &Ctx {
        self.k.ctx()
    }

    /// The quotient map `G ↠ V`.
    pub fn project_v(&self) -> VElement {
        self.v.clone()
    }

    pub fn in_k(&self) -> bool {
        self.v.is_identity()
    }

    pub fn is_identity(&self) -> bool {
        self.v.is_identity() && self.k.is_identity()
    }

    pub fn to_text(&self) -> String {
        format!("{} ; {}", self.k, self.v)
    }

    /// Parses `<KElement> ; <VElement>`; either side may be omitted for the
    /// pure cases `<KElement>` and `; <VElement>`.
    pub fn parse(ctx: &Ctx, s: &str) -> Result<Self> {
        match s.split_once(';') {
            Some((k, v)) => {
                let k = if k.trim().is_empty() { KElement::identity(ctx) } else { KElement::parse(ctx, k)? };
                let v = if v.trim().is_empty() { VElement::identity() } else { v.trim().parse()? };
                Ok(GElement { k, v })
            }
            None => Ok(GElement::from_k(KElement::parse(ctx, s)?)),
        }
    }
}

impl fmt::Display for GElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Debug for GElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Which action of V on K the group is built from.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Model {
    /// The (possibly β-twisted) wreath action `π`.
    Wreath(Ctx),
    /// The action `π̃(v) = ad(c_v⁻¹)∘π(v)` coming from the carets
    /// `ad(R_i(b))∘R_i`.
    InnerTwisted { ctx: Ctx, b: KElement },
    /// The action coming from the carets `R_{¬i}`; with `swap = false` this
    /// is the wreath action.
    Psi { ctx: Ctx, swap: bool },
}

impl Model {
    pub fn ctx(&self) -> &Ctx {
        match self {
            Model::Wreath(ctx) | Model::InnerTwisted { ctx, .. } | Model::Psi { ctx, .. } => ctx,
        }
    }

    pub fn act(&self, v: &VElement, a: &KElement) -> Result<KElement> {
        match self {
            Model::Wreath(_) => Ok(a.act(v)),
            Model::InnerTwisted { b, .. } => {
                let c = crate::classify::inner_cocycle(b, v)?;
                c.inv().mul(&a.act(v))?.mul(&c)
            }
            Model::Psi { swap, .. } => {
                if *swap {
                    Ok(a.act(&crate::classify::psi_swap(v)))
                } else {
                    Ok(a.act(v))
                }
            }
        }
    }

    pub fn identity(&self) -> GElement {
        GElement::identity(self.ctx())
    }

    fn check(&self, g: &GElement) -> Result<()> {
        let (a, b) = (self.ctx(), g.ctx());
        if std::sync::Arc::ptr_eq(a, b) || a == b {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    pub fn mul(&self, g: &GElement, h: &GElement) -> Result<GElement> {
        self.check(g)?;
        self.check(h)?;
        let k = g.k.mul(&self.act(&g.v, &h.k)?)?;
        Ok(GElement { k, v: g.v.mul(&h.v) })
    }

    pub fn inv(&self, g: &GElement) -> Result<GElement> {
        self.check(g)?;
        let vi = g.v.inv();
        Ok(GElement { k: self.act(&vi, &g.k.inv())?, v: vi })
    }

    /// `g h g⁻¹`.
    pub fn conj(&self, g: &GElement, h: &GElement) -> Result<GElement> {
        self.mul(&self.mul(g, h)?, &self.inv(g)?)
    }

    /// `g h g⁻¹ h⁻¹`.
    pub fn commutator(&self, g: &GElement, h: &GElement) -> Result<GElement> {
        self.mul(&self.conj(g, h)?, &self.inv(h)?)
    }

    pub fn product<'a>(&self, items: impl IntoIterator<Item = &'a GElement>) -> Result<GElement> {
        items.into_iter().try_fold(self.identity(), |acc, g| self.mul(&acc, g))
    }
}

/// `ZΓ ∩ Γ^β`, the values of the central constants.
pub fn center(ctx: &Ctx) -> Vec<Elt> {
    let group = ctx.group();
    group.center().into_iter().filter(|&z| ctx.twist().apply(z) == z).collect()
}

/// Membership in `ZG`: a constant valued in [`center`], with trivial V part.
pub fn is_central(g: &GElement) -> bool {
    g.v.is_identity()
        && g.k.constant_value().is_some_and(|z| ctx_center_contains(g.ctx(), z))
}

fn ctx_center_contains(ctx: &Ctx, z: Elt) -> bool {
    ctx.group().is_central(z) && ctx.twist().apply(z) == z
}
