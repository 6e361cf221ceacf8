//! Isomorphisms `θ : G → G̃` as evaluable maps, and the canonical data
//! `(κ⁰, ζ, c, φ)` read off from them by evaluation.
//!
//! Every extraction here is a finite computation on sample points: a point
//! mass `g_x` goes to `κ_x(g)_{φ(x)}` times a central constant, and the
//! constant is removed by trying each element of `ZΓ̃ ∩ Γ̃^β̃`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::autgen::AutFactor;
use crate::base::{Ctx, KElement};
use crate::error::{Error, Result};
use crate::gamma::{Elt, GroupHom};
use crate::random::{random_g, random_k};
use crate::semidirect::{center, GElement, Model};
use crate::thompson::VElement;
use crate::words::{canonicalize, BinaryWord, Cylinder, DyadicPoint, SupportSet};

pub type GMap = Arc<dyn Fn(&GElement) -> Result<GElement> + Send + Sync>;

/// A map `G → ZG̃`, returned as the value of the central constant.
pub type ZetaFn = Arc<dyn Fn(&GElement) -> Result<Elt> + Send + Sync>;

/// How an isomorphism was put together.
#[derive(Clone, Debug)]
pub enum Provenance {
    Identity,
    Equivariant(GroupHom),
    InnerTwist(KElement),
    Psi(VElement),
    Factors(Vec<AutFactor>),
    TimesZeta(Box<Provenance>),
    Compose(Box<Provenance>, Box<Provenance>),
    Inverse(Box<Provenance>),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Identity => write!(f, "id"),
            Provenance::Equivariant(g) => write!(f, "push({})", g.display_values()),
            Provenance::InnerTwist(b) => write!(f, "inner({b})"),
            Provenance::Psi(t) => write!(f, "psi({t})"),
            Provenance::Factors(fs) => {
                let parts: Vec<String> = fs.iter().map(|x| x.to_string()).collect();
                write!(f, "{}", if parts.is_empty() { "id".into() } else { parts.join(" * ") })
            }
            Provenance::TimesZeta(p) => write!(f, "({p})·ζ"),
            Provenance::Compose(a, b) => write!(f, "({a}) ∘ ({b})"),
            Provenance::Inverse(p) => write!(f, "({p})⁻¹"),
        }
    }
}

#[derive(Clone)]
pub struct Isomorphism {
    source: Model,
    target: Model,
    forward: GMap,
    backward: GMap,
    provenance: Option<Provenance>,
}

impl fmt::Debug for Isomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.provenance {
            Some(p) => write!(f, "Isomorphism[{p}]"),
            None => write!(f, "Isomorphism[opaque]"),
        }
    }
}

impl Isomorphism {
    pub fn new(source: Model, target: Model, forward: GMap, backward: GMap, provenance: Option<Provenance>) -> Self {
        Isomorphism { source, target, forward, backward, provenance }
    }

    pub fn identity(model: &Model) -> Self {
        let id: GMap = Arc::new(|g: &GElement| Ok(g.clone()));
        Isomorphism::new(model.clone(), model.clone(), id.clone(), id, Some(Provenance::Identity))
    }

    pub fn source(&self) -> &Model {
        &self.source
    }

    pub fn target(&self) -> &Model {
        &self.target
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn apply(&self, g: &GElement) -> Result<GElement> {
        (self.forward)(g)
    }

    pub fn apply_inv(&self, g: &GElement) -> Result<GElement> {
        (self.backward)(g)
    }

    pub fn inverse(&self) -> Isomorphism {
        Isomorphism {
            source: self.target.clone(),
            target: self.source.clone(),
            forward: self.backward.clone(),
            backward: self.forward.clone(),
            provenance: self.provenance.clone().map(|p| Provenance::Inverse(Box::new(p))),
        }
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &Isomorphism) -> Result<Isomorphism> {
        if first.target != self.source {
            return Err(Error::ContextMismatch);
        }
        let (f1, f2) = (first.forward.clone(), self.forward.clone());
        let (b1, b2) = (first.backward.clone(), self.backward.clone());
        let provenance = match (&self.provenance, &first.provenance) {
            (Some(a), Some(b)) => Some(Provenance::Compose(Box::new(a.clone()), Box::new(b.clone()))),
            _ => None,
        };
        Ok(Isomorphism {
            source: first.source.clone(),
            target: self.target.clone(),
            forward: Arc::new(move |g| f2(&f1(g)?)),
            backward: Arc::new(move |g| b1(&b2(g)?)),
            provenance,
        })
    }

    /// Multiplicativity, both round trips and `K ↦ K̃` on `samples` random
    /// elements and pairs.
    pub fn validate<R: Rng>(&self, rng: &mut R, samples: usize) -> Result<()> {
        let (src, tgt) = (&self.source, &self.target);
        let fail = |what: &str, g: &GElement| Err(Error::CheckFailed(format!("{what} at {g}")));
        for _ in 0..samples {
            let g = random_g(rng, src.ctx());
            let h = random_g(rng, src.ctx());
            let lhs = self.apply(&src.mul(&g, &h)?)?;
            let rhs = tgt.mul(&self.apply(&g)?, &self.apply(&h)?)?;
            if lhs != rhs {
                return fail("not multiplicative", &g);
            }
            if self.apply_inv(&self.apply(&g)?)? != g {
                return fail("backward∘forward ≠ id", &g);
            }
            let gt = random_g(rng, tgt.ctx());
            if self.apply(&self.apply_inv(&gt)?)? != gt {
                return fail("forward∘backward ≠ id", &gt);
            }
            let a = GElement::from_k(random_k(rng, src.ctx(), 3, 2));
            if !self.apply(&a)?.in_k() {
                return fail("K not mapped into K̃", &a);
            }
            let at = GElement::from_k(random_k(rng, tgt.ctx(), 3, 2));
            if !self.apply_inv(&at)?.in_k() {
                return fail("K̃ not mapped into K", &at);
            }
        }
        Ok(())
    }
}

fn k_image(theta: &Isomorphism, a: &KElement) -> Result<KElement> {
    let y = theta.apply(&GElement::from_k(a.clone()))?;
    if !y.in_k() {
        return Err(Error::Extraction(format!("θ({a}) = {y} is not in K̃")));
    }
    Ok(y.k().clone())
}

/// Writes `y = z · r` with `z` a central constant and `r` supported in `s`.
pub fn strip_to_support(y: &KElement, s: &SupportSet) -> Option<(Elt, KElement)> {
    let ctx = y.ctx();
    let group = ctx.group();
    center(ctx).into_iter().find_map(|z| {
        let r = y.mul(&KElement::constant(ctx, group.inv(z))).ok()?;
        r.support().is_subset(s).then_some((z, r))
    })
}

/// Writes `y = z · h_p` with `z` a central constant and `h_p` a point mass
/// (`None` when the remainder is the identity).
pub fn strip_central(y: &KElement) -> Result<(Elt, Option<(DyadicPoint, Elt)>)> {
    let ctx = y.ctx();
    let group = ctx.group();
    for z in center(ctx) {
        let r = y.mul(&KElement::constant(ctx, group.inv(z)))?;
        if r.is_identity() {
            return Ok((z, None));
        }
        if r.is_exception_only() {
            let exc: Vec<_> = r.exceptions().collect();
            if let [(x, g)] = exc.as_slice() {
                return Ok((z, Some(((*x).clone(), *g))));
            }
        }
    }
    Err(Error::Extraction(format!("{y} is not a point mass times a central constant")))
}

/// `(φ(x), κ_x(g))` read from `θ(g_x)`.
pub fn probe_point_mass(theta: &Isomorphism, x: &DyadicPoint, g: Elt) -> Result<(DyadicPoint, Elt)> {
    let ctx = theta.source().ctx();
    let y = k_image(theta, &KElement::point_mass(ctx, x.clone(), g))?;
    match strip_central(&y)? {
        (_, Some(p)) => Ok(p),
        (_, None) => Err(Error::Extraction(format!("θ kills the point mass {g} at {x:?}"))),
    }
}

fn first_nontrivial(ctx: &Ctx) -> Result<Elt> {
    let group = ctx.group();
    group
        .elements()
        .find(|&g| g != group.identity())
        .ok_or_else(|| Error::Precondition("Γ must be nontrivial".into()))
}

pub fn extract_phi(theta: &Isomorphism, x: &DyadicPoint) -> Result<DyadicPoint> {
    let g = first_nontrivial(theta.source().ctx())?;
    Ok(probe_point_mass(theta, x, g)?.0)
}

/// `φ(x)` using the probe `g` instead of the first nontrivial element.
pub fn extract_phi_with(theta: &Isomorphism, x: &DyadicPoint, g: Elt) -> Result<DyadicPoint> {
    Ok(probe_point_mass(theta, x, g)?.0)
}

pub fn extract_kappa_x(theta: &Isomorphism, x: &DyadicPoint) -> Result<GroupHom> {
    let src = theta.source().ctx().group().clone();
    let tgt = theta.target().ctx().group().clone();
    let y = extract_phi(theta, x)?;
    let mut values = Vec::with_capacity(src.order());
    for g in src.elements() {
        if g == src.identity() {
            values.push(tgt.identity());
            continue;
        }
        let (p, h) = probe_point_mass(theta, x, g)?;
        if p != y {
            return Err(Error::Extraction(format!("φ({x:?}) depends on the probe: {p:?} vs {y:?}")));
        }
        values.push(h);
    }
    let k = GroupHom::new(src, tgt, values)?;
    if !k.is_bijective() {
        return Err(Error::Extraction(format!("κ_{x:?} is not bijective")));
    }
    Ok(k)
}

/// `θ(e, v) = (c_v, w)`; `w` is checked against `φ v φ⁻¹` on `probes`.
pub fn extract_cocycle(theta: &Isomorphism, v: &VElement, probes: &[DyadicPoint]) -> Result<(KElement, VElement)> {
    let ctx = theta.source().ctx();
    let y = theta.apply(&GElement::from_v(ctx, v.clone()))?;
    for x in probes {
        let lhs = y.v().act_point(&extract_phi(theta, x)?);
        let rhs = extract_phi(theta, &v.act_point(x))?;
        if lhs != rhs {
            return Err(Error::Extraction(format!("V part of θ({v}) is not φ v φ⁻¹ at {x:?}")));
        }
    }
    Ok((y.k().clone(), y.v().clone()))
}

/// `c_{vw} = c_v · π̃(w_v)(c_w)` where `w_v` is the V part of `θ(v)`.
pub fn check_cocycle_identity(theta: &Isomorphism, v: &VElement, w: &VElement) -> Result<bool> {
    let ctx = theta.source().ctx();
    let tv = theta.apply(&GElement::from_v(ctx, v.clone()))?;
    let tw = theta.apply(&GElement::from_v(ctx, w.clone()))?;
    let tvw = theta.apply(&GElement::from_v(ctx, v.mul(w)))?;
    let rhs = tv.k().mul(&theta.target().act(tv.v(), tw.k())?)?;
    Ok(tvw.k() == &rhs)
}

fn point(bits: &[u8]) -> DyadicPoint {
    canonicalize(&BinaryWord::from_digits(bits.to_vec()).expect("binary"))
}

/// `ζ(a)`: the central constants of `θ(a|C₀)` and `θ(a|C₁)`, read off
/// outside `φ(C₀)` and `φ(C₁)` respectively.
pub fn extract_zeta(theta: &Isomorphism, a: &KElement) -> Result<Elt> {
    let tgt = theta.target().ctx().clone();
    let group = tgt.group();
    let zero = BinaryWord::from_digits(vec![0]).unwrap();
    let one = BinaryWord::from_digits(vec![1]).unwrap();
    let c0 = k_image(theta, &a.restrict(&Cylinder::new(zero)))?.eval(&extract_phi(theta, &point(&[1]))?);
    let c1 = k_image(theta, &a.restrict(&Cylinder::new(one)))?.eval(&extract_phi(theta, &DyadicPoint::basepoint())?);
    let zs = center(&tgt);
    for c in [c0, c1] {
        if !zs.contains(&c) {
            return Err(Error::NotCentral(group.name(c).to_string()));
        }
    }
    Ok(group.mul(c0, c1))
}

/// `κ⁰(a) = θ(a) · ζ(a)⁻¹`.
pub fn kappa0(theta: &Isomorphism, a: &KElement) -> Result<KElement> {
    let tgt = theta.target().ctx();
    let z = extract_zeta(theta, a)?;
    k_image(theta, a)?.mul(&KElement::constant(tgt, tgt.group().inv(z)))
}

/// `κ¹(a)(φ(x)) = κ_x(a(x))`.
pub fn kappa1_eval(theta: &Isomorphism, a: &KElement, x: &DyadicPoint) -> Result<Elt> {
    Ok(extract_kappa_x(theta, x)?.apply(a.eval(x)))
}

/// `η(a)(φ(x)) = κ¹(a)(φ(x))⁻¹ · κ⁰(a)(φ(x))`, required to be central.
pub fn eta_eval(theta: &Isomorphism, a: &KElement, x: &DyadicPoint) -> Result<Elt> {
    let group = theta.target().ctx().group().clone();
    let k1 = kappa1_eval(theta, a, x)?;
    let k0 = kappa0(theta, a)?.eval(&extract_phi(theta, x)?);
    let eta = group.mul(group.inv(k1), k0);
    if !group.is_central(eta) {
        return Err(Error::NotCentral(format!("η({a}) at {x:?} is {}", group.name(eta))));
    }
    Ok(eta)
}

/// `φ` as an element of V: each cell `u` must be carried onto some `C_r` by
/// prefix replacement, which is checked on the tails in `DyadicPoint::all_up_to(3)`.
/// Cells are split up to `max_depth`.
pub fn reconstruct_phi(theta: &Isomorphism, max_depth: usize) -> Result<VElement> {
    let tails = DyadicPoint::all_up_to(3);
    let image = |u: &BinaryWord| -> Result<Option<BinaryWord>> {
        let p = extract_phi(theta, &canonicalize(&u.child(1)))?;
        let stem = p.stem();
        if stem.last() != Some(1) {
            return Ok(None);
        }
        let r = stem.parent().expect("nonempty");
        for y in &tails {
            if extract_phi(theta, &y.prepend(u))? != y.prepend(&r) {
                return Ok(None);
            }
        }
        Ok(Some(r))
    };
    let mut pairs = Vec::new();
    let mut todo = vec![BinaryWord::empty()];
    while let Some(u) = todo.pop() {
        match image(&u)? {
            Some(r) => pairs.push((u, r)),
            None if u.len() < max_depth => {
                todo.push(u.child(1));
                todo.push(u.child(0));
            }
            None => return Err(Error::Extraction(format!("φ is not a prefix replacement on C_{u} at depth {max_depth}"))),
        }
    }
    VElement::from_pairs(pairs)
}

#[derive(Clone, Debug)]
pub struct SpatialReport {
    pub expected: SupportSet,
    pub found: SupportSet,
    pub mismatches: Vec<String>,
}

impl SpatialReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compares `supp(κ⁰(a))` with `φ(supp(a))`, using `phi` for the image of
/// cylinders and the sampled `φ` at every exception point of `a`.
pub fn verify_spatial(theta: &Isomorphism, a: &KElement, phi: &VElement) -> Result<SpatialReport> {
    let found = kappa0(theta, a)?.support();
    let expected = phi.act_support(&a.support());
    let mut mismatches = Vec::new();
    if found != expected {
        mismatches.push(format!("supp(κ⁰(a)) = {found}, φ(supp(a)) = {expected}"));
    }
    for (x, _) in a.exceptions() {
        let px = extract_phi(theta, x)?;
        if px != phi.act_point(x) {
            mismatches.push(format!("φ({x:?}) = {px:?} but the cell map gives {:?}", phi.act_point(x)));
        }
    }
    Ok(SpatialReport { expected, found, mismatches })
}

/// `θ(a) ∈ K̃_{φ(I)} · ZG̃` for `a` supported in `I`.
pub fn thetasupp_holds(theta: &Isomorphism, a: &KElement, i: &Cylinder, phi: &VElement) -> Result<bool> {
    if !a.support().is_subset(&SupportSet::cylinder(i.clone())) {
        return Err(Error::Precondition(format!("{a} is not supported in {i}")));
    }
    let y = k_image(theta, a)?;
    Ok(strip_to_support(&y, &phi.act_cylinder(i)).is_some())
}

/// `g ↦ θ(g)·ζ(g)`, after testing `ζ` on `samples` random pairs.
pub fn theta_times_zeta<R: Rng>(theta: &Isomorphism, zeta: ZetaFn, rng: &mut R, samples: usize) -> Result<Isomorphism> {
    let (src, tgt) = (theta.source().clone(), theta.target().clone());
    let zs = center(tgt.ctx());
    let group = tgt.ctx().group().clone();
    for _ in 0..samples {
        let g = random_g(rng, src.ctx());
        let h = random_g(rng, src.ctx());
        let (zg, zh) = (zeta(&g)?, zeta(&h)?);
        if !zs.contains(&zg) {
            return Err(Error::NotCentral(group.name(zg).to_string()));
        }
        if zeta(&src.mul(&g, &h)?)? != group.mul(zg, zh) {
            return Err(Error::NotAHomomorphism(format!("ζ at {g}, {h}")));
        }
        if zeta(&src.commutator(&g, &h)?)? != group.identity() {
            return Err(Error::CheckFailed(format!("ζ is nontrivial on [{g}, {h}]")));
        }
    }
    let tctx = tgt.ctx().clone();
    let central = move |z: Elt| GElement::from_k(KElement::constant(&tctx, z));
    let (t1, z1, m1, c1) = (theta.clone(), zeta.clone(), tgt.clone(), central.clone());
    let forward: GMap = Arc::new(move |g| m1.mul(&t1.apply(g)?, &c1(z1(g)?)));
    let (t2, z2, m2, c2, s2) = (theta.clone(), zeta, tgt.clone(), central, src.clone());
    // θ⁻¹(g̃) · θ⁻¹(ζ(θ⁻¹(g̃⁻¹)))
    let backward: GMap = Arc::new(move |gt| {
        let first = t2.apply_inv(gt)?;
        let zt = c2(z2(&t2.apply_inv(&m2.inv(gt)?)?)?);
        s2.mul(&first, &t2.apply_inv(&zt)?)
    });
    let provenance = theta.provenance.clone().map(|p| Provenance::TimesZeta(Box::new(p)));
    Ok(Isomorphism { source: src, target: tgt, forward, backward, provenance })
}

/// Sampled form of the canonical data of `θ`.
#[derive(Clone, Debug)]
pub struct DecompositionWitness {
    pub phi: Vec<(DyadicPoint, DyadicPoint)>,
    pub phi_cells: Option<VElement>,
    pub kappa: Vec<(DyadicPoint, GroupHom)>,
    pub cocycle: Vec<(VElement, KElement, VElement)>,
    pub zeta: Vec<(KElement, Elt)>,
}

impl fmt::Display for DecompositionWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(p) = &self.phi_cells {
            writeln!(f, "phi = {p}")?;
        }
        for (x, y) in &self.phi {
            writeln!(f, "phi({x}) = {y}")?;
        }
        for (x, k) in &self.kappa {
            writeln!(f, "kappa_{x} = {}", k.display_values())?;
        }
        for (v, c, w) in &self.cocycle {
            writeln!(f, "theta({v}) = {c} ; {w}")?;
        }
        for (a, z) in &self.zeta {
            writeln!(f, "zeta({a}) = {z}")?;
        }
        Ok(())
    }
}

/// Extracts the witness on `probes`, the cocycle on `vs` and `ζ` on `ks`.
pub fn decompose(
    theta: &Isomorphism,
    probes: &[DyadicPoint],
    vs: &[VElement],
    ks: &[KElement],
    max_depth: usize,
) -> Result<DecompositionWitness> {
    let phi = probes.iter().map(|x| Ok((x.clone(), extract_phi(theta, x)?))).collect::<Result<Vec<_>>>()?;
    let kappa = probes.iter().map(|x| Ok((x.clone(), extract_kappa_x(theta, x)?))).collect::<Result<Vec<_>>>()?;
    let cocycle = vs
        .iter()
        .map(|v| {
            let (c, w) = extract_cocycle(theta, v, probes)?;
            Ok((v.clone(), c, w))
        })
        .collect::<Result<Vec<_>>>()?;
    let zeta = ks.iter().map(|a| Ok((a.clone(), extract_zeta(theta, a)?))).collect::<Result<Vec<_>>>()?;
    Ok(DecompositionWitness { phi, phi_cells: reconstruct_phi(theta, max_depth).ok(), kappa, cocycle, zeta })
}

/// Default probe set: all points with stem length at most 4.
pub fn default_probes() -> Vec<DyadicPoint> {
    DyadicPoint::all_up_to(4)
}
