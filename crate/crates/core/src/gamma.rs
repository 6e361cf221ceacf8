//! Finite groups given by multiplication tables, their homomorphisms, and
//! the data `ω : Γ × Γ → Γ` attached to a caret.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::words::BinaryWord;

/// Elements are indices into the multiplication table.
pub type Elt = usize;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FiniteGroup {
    n: usize,
    table: Vec<Elt>,
    identity: Elt,
    inverses: Vec<Elt>,
    names: Vec<String>,
}

pub type Group = Arc<FiniteGroup>;

impl FiniteGroup {
    /// Validates a multiplication table (rows indexed by the left factor).
    pub fn from_table(rows: Vec<Vec<Elt>>, names: Option<Vec<String>>) -> Result<Group> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidGroup("empty table".into()));
        }
        if rows.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(Error::InvalidGroup("table must be square with entries below its order".into()));
        }
        let table: Vec<Elt> = rows.concat();
        let m = |a: Elt, b: Elt| table[a * n + b];
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| m(e, x) == x && m(x, e) == x))
            .ok_or_else(|| Error::InvalidGroup("no identity".into()))?;
        let mut inverses = vec![0; n];
        for (a, inv) in inverses.iter_mut().enumerate() {
            *inv = (0..n)
                .find(|&b| m(a, b) == identity && m(b, a) == identity)
                .ok_or_else(|| Error::InvalidGroup(format!("element {a} has no inverse")))?;
        }
        for a in 0..n {
            for b in 0..n {
                let ab = m(a, b);
                for c in 0..n {
                    if m(ab, c) != m(a, m(b, c)) {
                        return Err(Error::InvalidGroup(format!("not associative at ({a},{b},{c})")));
                    }
                }
            }
        }
        let names = match names {
            Some(v) if v.len() == n => v,
            Some(v) => return Err(Error::SizeMismatch { expected: n, found: v.len() }),
            None => (0..n).map(|i| i.to_string()).collect(),
        };
        Ok(Arc::new(FiniteGroup { n, table, identity, inverses, names }))
    }

    fn from_law(n: usize, law: impl Fn(Elt, Elt) -> Elt, names: Vec<String>) -> Group {
        let rows = (0..n).map(|a| (0..n).map(|b| law(a, b)).collect()).collect();
        Self::from_table(rows, Some(names)).expect("built-in law is a group")
    }

    pub fn cyclic(n: usize) -> Result<Group> {
        if n == 0 {
            return Err(Error::InvalidGroup("cyclic group of order 0".into()));
        }
        Ok(Self::from_law(n, |a, b| (a + b) % n, (0..n).map(|i| i.to_string()).collect()))
    }

    /// The symmetric group on `n` letters; elements in cycle notation.
    pub fn sym(n: usize) -> Result<Group> {
        if n == 0 || n > 5 {
            return Err(Error::InvalidGroup(format!("sym:{n} unsupported (1 ≤ n ≤ 5)")));
        }
        let perms = all_permutations(n);
        let index: BTreeMap<Vec<usize>, usize> =
            perms.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let names = perms.iter().map(|p| cycle_name(p)).collect();
        let law = |a: Elt, b: Elt| {
            // (ab)(i) = a(b(i))
            let c: Vec<usize> = perms[b].iter().map(|&i| perms[a][i]).collect();
            index[&c]
        };
        Ok(Self::from_law(perms.len(), law, names))
    }

    /// The dihedral group of order `2n`, elements `r^k s^j`.
    pub fn dihedral(n: usize) -> Result<Group> {
        if n < 1 {
            return Err(Error::InvalidGroup("dihedral:0".into()));
        }
        let enc = |k: usize, j: usize| j * n + k;
        let names = (0..2 * n)
            .map(|i| {
                let (k, j) = (i % n, i / n);
                match (k, j) {
                    (0, 0) => "e".to_string(),
                    (0, 1) => "s".to_string(),
                    (1, 0) => "r".to_string(),
                    (1, 1) => "rs".to_string(),
                    (k, 0) => format!("r{k}"),
                    (k, _) => format!("r{k}s"),
                }
            })
            .collect();
        let law = |a: Elt, b: Elt| {
            let (ka, ja, kb, jb) = (a % n, a / n, b % n, b / n);
            // r^ka s^ja r^kb s^jb = r^(ka ± kb) s^(ja + jb)
            let k = if ja == 0 { (ka + kb) % n } else { (ka + n - kb) % n };
            enc(k, (ja + jb) % 2)
        };
        Ok(Self::from_law(2 * n, law, names))
    }

    /// The quaternion group `Q8 = {±1, ±i, ±j, ±k}`.
    pub fn quaternion() -> Group {
        // index = 2·unit + sign, unit ∈ {1,i,j,k}
        let unit_mul = |a: usize, b: usize| -> (usize, bool) {
            match (a, b) {
                (0, x) | (x, 0) => (x, false),
                (x, y) if x == y => (0, true),
                (1, 2) => (3, false),
                (2, 3) => (1, false),
                (3, 1) => (2, false),
                (2, 1) => (3, true),
                (3, 2) => (1, true),
                (1, 3) => (2, true),
                _ => unreachable!(),
            }
        };
        let law = |a: Elt, b: Elt| {
            let (u, neg) = unit_mul(a / 2, b / 2);
            2 * u + ((a % 2 + b % 2 + neg as usize) % 2)
        };
        let names = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"].map(String::from).to_vec();
        Self::from_law(8, law, names)
    }

    pub fn product(a: &FiniteGroup, b: &FiniteGroup) -> Group {
        let nb = b.n;
        let names = (0..a.n * nb)
            .map(|i| format!("({},{})", a.names[i / nb], b.names[i % nb]))
            .collect();
        Self::from_law(
            a.n * nb,
            |x, y| a.mul(x / nb, y / nb) * nb + b.mul(x % nb, y % nb),
            names,
        )
    }

    /// Parses `cyclic:n`, `sym:n`, `dihedral:n`, `quaternion`,
    /// `product:<spec>,<spec>` or `table:<row>;<row>;...`.
    pub fn parse_spec(spec: &str) -> Result<Group> {
        let spec = spec.trim();
        let num = |s: &str| s.trim().parse::<usize>().map_err(|e| Error::Parse(format!("{s:?}: {e}")));
        if let Some(rest) = spec.strip_prefix("cyclic:") {
            Self::cyclic(num(rest)?)
        } else if let Some(rest) = spec.strip_prefix("sym:") {
            Self::sym(num(rest)?)
        } else if let Some(rest) = spec.strip_prefix("dihedral:") {
            Self::dihedral(num(rest)?)
        } else if spec == "quaternion" || spec == "q8" {
            Ok(Self::quaternion())
        } else if let Some(rest) = spec.strip_prefix("product:") {
            let (l, r) = split_product(rest)?;
            let (l, r) = (Self::parse_spec(l)?, Self::parse_spec(r)?);
            Ok(Self::product(&l, &r))
        } else if let Some(rest) = spec.strip_prefix("table:") {
            let rows = rest
                .split(';')
                .map(|row| row.split_whitespace().map(num).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            Self::from_table(rows, None)
        } else {
            Err(Error::Parse(format!("unknown group spec {spec:?}")))
        }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn elements(&self) -> std::ops::Range<Elt> {
        0..self.n
    }

    pub fn identity(&self) -> Elt {
        self.identity
    }

    pub fn mul(&self, a: Elt, b: Elt) -> Elt {
        self.table[a * self.n + b]
    }

    pub fn inv(&self, a: Elt) -> Elt {
        self.inverses[a]
    }

    pub fn pow(&self, a: Elt, k: i64) -> Elt {
        let base = if k < 0 { self.inv(a) } else { a };
        (0..k.unsigned_abs()).fold(self.identity, |acc, _| self.mul(acc, base))
    }

    /// `a b a⁻¹`.
    pub fn conj(&self, a: Elt, b: Elt) -> Elt {
        self.mul(self.mul(a, b), self.inv(a))
    }

    /// `a b a⁻¹ b⁻¹`.
    pub fn commutator(&self, a: Elt, b: Elt) -> Elt {
        self.mul(self.mul(a, b), self.mul(self.inv(a), self.inv(b)))
    }

    pub fn commute(&self, a: Elt, b: Elt) -> bool {
        self.mul(a, b) == self.mul(b, a)
    }

    pub fn is_abelian(&self) -> bool {
        self.elements().all(|a| self.elements().all(|b| self.commute(a, b)))
    }

    pub fn name(&self, a: Elt) -> &str {
        &self.names[a]
    }

    /// Looks an element up by display name, falling back to its index.
    pub fn parse_element(&self, s: &str) -> Result<Elt> {
        let s = s.trim();
        if let Some(i) = self.names.iter().position(|n| n == s) {
            return Ok(i);
        }
        match s.parse::<usize>() {
            Ok(i) if i < self.n => Ok(i),
            _ => Err(Error::Parse(format!("no group element named {s:?}"))),
        }
    }

    pub fn element_order(&self, a: Elt) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// The subgroup generated by `gens`, sorted.
    pub fn generated(&self, gens: impl IntoIterator<Item = Elt>) -> Vec<Elt> {
        let gens: Vec<Elt> = gens.into_iter().collect();
        let mut seen = BTreeSet::from([self.identity]);
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            for &g in &gens {
                let y = self.mul(x, g);
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// A small generating set, chosen greedily in index order.
    pub fn generators(&self) -> Vec<Elt> {
        let mut gens = Vec::new();
        let mut span = vec![self.identity];
        for a in self.elements() {
            if span.binary_search(&a).is_err() {
                gens.push(a);
                span = self.generated(gens.iter().copied());
            }
        }
        gens
    }

    pub fn center(&self) -> Vec<Elt> {
        self.elements().filter(|&z| self.elements().all(|g| self.commute(z, g))).collect()
    }

    pub fn is_central(&self, z: Elt) -> bool {
        self.elements().all(|g| self.commute(z, g))
    }

    pub fn commutator_subgroup(&self) -> Vec<Elt> {
        let comms: BTreeSet<Elt> = self
            .elements()
            .flat_map(|a| self.elements().map(move |b| (a, b)))
            .map(|(a, b)| self.commutator(a, b))
            .collect();
        self.generated(comms)
    }

    /// The subgroup on the given (closed) subset, with its embedding.
    pub fn subgroup(&self, elements: &[Elt]) -> Result<(Group, Vec<Elt>)> {
        let mut els: Vec<Elt> = elements.to_vec();
        els.sort_unstable();
        els.dedup();
        let pos = |x: Elt| els.binary_search(&x).ok();
        let mut rows = Vec::with_capacity(els.len());
        for &a in &els {
            let row = els
                .iter()
                .map(|&b| pos(self.mul(a, b)).ok_or_else(|| Error::InvalidGroup("subset not closed".into())))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let names = els.iter().map(|&a| self.names[a].clone()).collect();
        Ok((FiniteGroup::from_table(rows, Some(names))?, els))
    }
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteGroup(order {})", self.n)
    }
}

fn split_product(rest: &str) -> Result<(&str, &str)> {
    // the left factor is never itself a product, so split at its end
    let left_end = if rest.starts_with("product:") {
        return Err(Error::Parse("nest products on the right: product:a,product:b,c".into()));
    } else if rest.starts_with("table:") {
        return Err(Error::Parse("table groups cannot be product factors".into()));
    } else {
        rest.find(',').ok_or_else(|| Error::Parse(format!("product needs two factors: {rest:?}")))?
    };
    Ok((&rest[..left_end], &rest[left_end + 1..]))
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for i in 0..n {
            if !prefix.contains(&i) {
                prefix.push(i);
                go(prefix, n, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), n, &mut out);
    out
}

fn cycle_name(p: &[usize]) -> String {
    let mut seen = vec![false; p.len()];
    let mut out = String::new();
    for start in 0..p.len() {
        if seen[start] || p[start] == start {
            continue;
        }
        out.push('(');
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            out.push_str(&(i + 1).to_string());
            i = p[i];
        }
        out.push(')');
    }
    if out.is_empty() {
        "e".into()
    } else {
        out
    }
}

/// A homomorphism stored as its value table.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GroupHom {
    source: Group,
    target: Group,
    values: Vec<Elt>,
}

impl GroupHom {
    pub fn new(source: Group, target: Group, values: Vec<Elt>) -> Result<Self> {
        if values.len() != source.order() {
            return Err(Error::SizeMismatch { expected: source.order(), found: values.len() });
        }
        if values.iter().any(|&v| v >= target.order()) {
            return Err(Error::NotAHomomorphism("value out of range".into()));
        }
        let h = GroupHom { source, target, values };
        if !h.is_hom() {
            return Err(Error::NotAHomomorphism(format!("{h:?}")));
        }
        Ok(h)
    }

    pub fn from_fn(source: &Group, target: &Group, f: impl Fn(Elt) -> Elt) -> Result<Self> {
        Self::new(source.clone(), target.clone(), source.elements().map(f).collect())
    }

    pub fn identity(g: &Group) -> Self {
        GroupHom { source: g.clone(), target: g.clone(), values: g.elements().collect() }
    }

    pub fn trivial(source: &Group, target: &Group) -> Self {
        GroupHom {
            source: source.clone(),
            target: target.clone(),
            values: vec![target.identity(); source.order()],
        }
    }

    /// `ad(h): g ↦ h g h⁻¹`.
    pub fn inner(g: &Group, h: Elt) -> Self {
        GroupHom { source: g.clone(), target: g.clone(), values: g.elements().map(|x| g.conj(h, x)).collect() }
    }

    /// Parses `id`, `inv`, `zero`, `mul:k` (`g ↦ g^k`), `ad:<elt>` or an
    /// explicit value list `[v0 v1 ...]` (names or indices).
    pub fn parse(spec: &str, source: &Group, target: &Group) -> Result<Self> {
        let spec = spec.trim();
        match spec {
            "id" => Self::from_fn(source, target, |x| x),
            "inv" => Self::from_fn(source, target, |x| source.inv(x)),
            "zero" | "trivial" => Ok(Self::trivial(source, target)),
            _ => {
                if let Some(k) = spec.strip_prefix("mul:") {
                    let k: i64 = k.trim().parse().map_err(|e| Error::Parse(format!("{k:?}: {e}")))?;
                    Self::from_fn(source, target, |x| source.pow(x, k))
                } else if let Some(h) = spec.strip_prefix("ad:") {
                    let h = source.parse_element(h)?;
                    Self::from_fn(source, target, |x| source.conj(h, x))
                } else if let Some(body) = spec.strip_prefix('[').and_then(|b| b.strip_suffix(']')) {
                    let values = body
                        .split(|c: char| c == ',' || c.is_whitespace())
                        .filter(|t| !t.is_empty())
                        .map(|t| target.parse_element(t))
                        .collect::<Result<Vec<_>>>()?;
                    Self::new(source.clone(), target.clone(), values)
                } else {
                    Err(Error::Parse(format!("unknown homomorphism spec {spec:?}")))
                }
            }
        }
    }

    pub fn source(&self) -> &Group {
        &self.source
    }

    pub fn target(&self) -> &Group {
        &self.target
    }

    pub fn values(&self) -> &[Elt] {
        &self.values
    }

    pub fn apply(&self, x: Elt) -> Elt {
        self.values[x]
    }

    pub fn is_hom(&self) -> bool {
        let (s, t) = (&self.source, &self.target);
        s.elements().all(|a| {
            s.elements().all(|b| self.values[s.mul(a, b)] == t.mul(self.values[a], self.values[b]))
        })
    }

    pub fn is_bijective(&self) -> bool {
        self.source.order() == self.target.order()
            && self.values.iter().collect::<BTreeSet<_>>().len() == self.values.len()
    }

    pub fn is_identity(&self) -> bool {
        self.values.iter().enumerate().all(|(i, &v)| i == v)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &GroupHom) -> Result<GroupHom> {
        if other.target != self.source {
            return Err(Error::ContextMismatch);
        }
        Ok(GroupHom {
            source: other.source.clone(),
            target: self.target.clone(),
            values: other.values.iter().map(|&x| self.values[x]).collect(),
        })
    }

    pub fn inverse(&self) -> Result<GroupHom> {
        if !self.is_bijective() {
            return Err(Error::Precondition("homomorphism is not bijective".into()));
        }
        let mut values = vec![0; self.values.len()];
        for (i, &v) in self.values.iter().enumerate() {
            values[v] = i;
        }
        Ok(GroupHom { source: self.target.clone(), target: self.source.clone(), values })
    }

    /// `self^k` for an endomorphism (negative `k` needs bijectivity).
    pub fn pow(&self, k: i64) -> Result<GroupHom> {
        if self.source != self.target {
            return Err(Error::ContextMismatch);
        }
        let base = if k < 0 { self.inverse()? } else { self.clone() };
        let mut acc = GroupHom::identity(&self.source);
        for _ in 0..k.unsigned_abs() {
            acc = base.compose(&acc)?;
        }
        Ok(acc)
    }

    pub fn image(&self) -> Vec<Elt> {
        self.values.iter().copied().collect::<BTreeSet<_>>().into_iter().collect()
    }

    pub fn kernel(&self) -> Vec<Elt> {
        self.source.elements().filter(|&x| self.values[x] == self.target.identity()).collect()
    }

    /// Fixed points of an endomorphism.
    pub fn fixed_subgroup(&self) -> Vec<Elt> {
        self.source.elements().filter(|&x| self.values[x] == x).collect()
    }

    pub fn display_values(&self) -> String {
        let parts: Vec<&str> = self.values.iter().map(|&v| self.target.name(v)).collect();
        format!("[{}]", parts.join(" "))
    }
}

impl fmt::Debug for GroupHom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_values())
    }
}

/// All homomorphisms `source → target`, in lexicographic order of values.
pub fn homomorphisms(source: &Group, target: &Group) -> Vec<GroupHom> {
    let gens = source.generators();
    let mut out = Vec::new();
    let mut images = Vec::with_capacity(gens.len());
    extend_homs(source, target, &gens, &mut images, &mut out);
    out.sort_by(|a, b| a.values.cmp(&b.values));
    out
}

fn extend_homs(
    source: &Group,
    target: &Group,
    gens: &[Elt],
    images: &mut Vec<Elt>,
    out: &mut Vec<GroupHom>,
) {
    if images.len() == gens.len() {
        if let Some(values) = extend_on_cayley_graph(source, target, gens, images) {
            out.push(GroupHom { source: source.clone(), target: target.clone(), values });
        }
        return;
    }
    let g = gens[images.len()];
    for t in target.elements() {
        // orders must be compatible
        if !source.element_order(g).is_multiple_of(target.element_order(t)) {
            continue;
        }
        images.push(t);
        extend_homs(source, target, gens, images, out);
        images.pop();
    }
}

/// Extends generator images along the Cayley graph; `None` on a conflict.
fn extend_on_cayley_graph(source: &Group, target: &Group, gens: &[Elt], images: &[Elt]) -> Option<Vec<Elt>> {
    let mut values: Vec<Option<Elt>> = vec![None; source.order()];
    values[source.identity()] = Some(target.identity());
    let mut queue = VecDeque::from([source.identity()]);
    while let Some(x) = queue.pop_front() {
        let fx = values[x].unwrap();
        for (&g, &fg) in gens.iter().zip(images) {
            let y = source.mul(x, g);
            let fy = target.mul(fx, fg);
            match values[y] {
                Some(v) if v != fy => return None,
                Some(_) => {}
                None => {
                    values[y] = Some(fy);
                    queue.push_back(y);
                }
            }
        }
    }
    values.into_iter().collect()
}

pub fn endomorphisms(g: &Group) -> Vec<GroupHom> {
    homomorphisms(g, g)
}

pub fn automorphisms(g: &Group) -> Vec<GroupHom> {
    isomorphisms(g, g)
}

pub fn isomorphisms(a: &Group, b: &Group) -> Vec<GroupHom> {
    if a.order() != b.order() {
        return Vec::new();
    }
    homomorphisms(a, b).into_iter().filter(GroupHom::is_bijective).collect()
}

/// `E = ⋂ β^k(Γ)` together with `β|_E`, which is bijective.
#[derive(Clone, Debug)]
pub struct EventualImage {
    pub elements: Vec<Elt>,
    pub group: Group,
    /// `β|_E` as an automorphism of `group`.
    pub restricted: GroupHom,
    /// First `k` with `β^k(Γ) = β^{k+1}(Γ)`.
    pub stabilization: usize,
}

pub fn eventual_image(beta: &GroupHom) -> Result<EventualImage> {
    if beta.source() != beta.target() {
        return Err(Error::ContextMismatch);
    }
    let g = beta.source();
    let mut cur: Vec<Elt> = g.elements().collect();
    let mut k = 0;
    loop {
        let next: Vec<Elt> =
            cur.iter().map(|&x| beta.apply(x)).collect::<BTreeSet<_>>().into_iter().collect();
        if next == cur {
            break;
        }
        cur = next;
        k += 1;
    }
    let (sub, embed) = g.subgroup(&cur)?;
    let values = embed
        .iter()
        .map(|&x| embed.binary_search(&beta.apply(x)).expect("E is β-invariant"))
        .collect();
    let restricted = GroupHom::new(sub.clone(), sub.clone(), values)?;
    Ok(EventualImage { elements: embed, group: sub, restricted, stabilization: k })
}

/// Searches for `(γ, h̃)` with `β̃ = ad(h̃) ∘ γ β γ⁻¹`, isomorphisms in
/// lexicographic order and `h̃` by index.
pub fn outer_conjugate(beta: &GroupHom, beta_t: &GroupHom) -> Option<(GroupHom, Elt)> {
    let (g, gt) = (beta.source(), beta_t.source());
    for gamma in isomorphisms(g, gt) {
        let ginv = gamma.inverse().expect("isomorphism");
        let conj: Vec<Elt> = gt.elements().map(|x| gamma.apply(beta.apply(ginv.apply(x)))).collect();
        for h in gt.elements() {
            if gt.elements().all(|x| beta_t.apply(x) == gt.conj(h, conj[x])) {
                return Some((gamma, h));
            }
        }
    }
    None
}

/// A homomorphism `ω : Γ × Γ → Γ`, stored as a table.
#[derive(Clone, PartialEq, Eq)]
pub struct OmegaData {
    group: Group,
    table: Vec<Elt>,
}

impl OmegaData {
    pub fn from_fn(group: &Group, f: impl Fn(Elt, Elt) -> Elt) -> Result<Self> {
        let n = group.order();
        let table = (0..n * n).map(|i| f(i / n, i % n)).collect::<Vec<_>>();
        if table.iter().any(|&x| x >= n) {
            return Err(Error::NotAHomomorphism("ω value out of range".into()));
        }
        let w = OmegaData { group: group.clone(), table };
        let g = group;
        for a in g.elements() {
            for b in g.elements() {
                for c in g.elements() {
                    for d in g.elements() {
                        if w.apply(g.mul(a, c), g.mul(b, d)) != g.mul(w.apply(a, b), w.apply(c, d)) {
                            return Err(Error::NotAHomomorphism(format!(
                                "ω((a,b)(c,d)) ≠ ω(a,b)ω(c,d) at a={a} b={b} c={c} d={d}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(w)
    }

    /// `ω(g, h) = ω₀(g) ω₁(h)`.
    pub fn from_pair(w0: &GroupHom, w1: &GroupHom) -> Result<Self> {
        let g = w0.source().clone();
        if w1.source() != &g || w0.target() != &g || w1.target() != &g {
            return Err(Error::ContextMismatch);
        }
        Self::from_fn(&g, |a, b| g.mul(w0.apply(a), w1.apply(b)))
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn apply(&self, a: Elt, b: Elt) -> Elt {
        self.table[a * self.group.order() + b]
    }

    pub fn omega0(&self) -> GroupHom {
        let e = self.group.identity();
        GroupHom { source: self.group.clone(), target: self.group.clone(), values: self.group.elements().map(|a| self.apply(a, e)).collect() }
    }

    pub fn omega1(&self) -> GroupHom {
        let e = self.group.identity();
        GroupHom { source: self.group.clone(), target: self.group.clone(), values: self.group.elements().map(|b| self.apply(e, b)).collect() }
    }
}

impl fmt::Debug for OmegaData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ω({:?}, {:?})", self.omega0(), self.omega1())
    }
}

/// The fixpoint of `T_{n+1} = ω(T_n × T_n)`, `T_0 = Γ`.
pub fn gamma_omega_subgroup(w: &OmegaData) -> Vec<Elt> {
    let mut cur: BTreeSet<Elt> = w.group.elements().collect();
    loop {
        let next: BTreeSet<Elt> =
            cur.iter().flat_map(|&a| cur.iter().map(move |&b| (a, b))).map(|(a, b)| w.apply(a, b)).collect();
        if next == cur {
            return cur.into_iter().collect();
        }
        cur = next;
    }
}

/// Builds `b` on words of length `≤ depth` with `b(ε) = e` and
/// `ω(b(u0), b(u1)) = h⁻¹ b(u)`. Preimages are taken inside `Γ_ω` when
/// possible, first pair in index order.
pub fn omega_b_witness(w: &OmegaData, h: Elt, depth: usize) -> Option<BTreeMap<BinaryWord, Elt>> {
    let g = &w.group;
    let sub = gamma_omega_subgroup(w);
    let pairs_in = |set: &[Elt]| -> Vec<(Elt, Elt)> {
        set.iter().flat_map(|&a| set.iter().map(move |&b| (a, b))).collect()
    };
    let preferred = pairs_in(&sub);
    let all: Vec<Elt> = g.elements().collect();
    let fallback = pairs_in(&all);
    let mut b = BTreeMap::from([(BinaryWord::empty(), g.identity())]);
    let mut frontier = vec![BinaryWord::empty()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for u in frontier {
            let target = g.mul(g.inv(h), b[&u]);
            let &(p, q) = preferred
                .iter()
                .chain(&fallback)
                .find(|&&(p, q)| w.apply(p, q) == target)?;
            b.insert(u.child(0), p);
            b.insert(u.child(1), q);
            next.push(u.child(0));
            next.push(u.child(1));
        }
        frontier = next;
    }
    Some(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn zn(n: usize) -> Group {
        FiniteGroup::cyclic(n).unwrap()
    }

    /// Brute-force homomorphism count over all maps.
    fn brute_force_autos(g: &Group) -> usize {
        all_permutations(g.order())
            .into_iter()
            .filter(|p| GroupHom::new(g.clone(), g.clone(), p.clone()).is_ok())
            .count()
    }

    /// Number of `g₀` that admit a backward chain `β(g_{i+1}) = g_i` of
    /// length `k`, by depth-first search over preimages.
    fn backward_chain_count(beta: &GroupHom, k: usize) -> usize {
        fn chain(beta: &GroupHom, x: Elt, k: usize) -> bool {
            k == 0 || beta.source().elements().any(|y| beta.apply(y) == x && chain(beta, y, k - 1))
        }
        beta.source().elements().filter(|&x| chain(beta, x, k)).count()
    }

    #[test]
    fn builtin_groups() {
        assert_eq!(FiniteGroup::sym(3).unwrap().order(), 6);
        assert_eq!(FiniteGroup::dihedral(4).unwrap().order(), 8);
        let q = FiniteGroup::quaternion();
        assert_eq!(q.center().len(), 2);
        assert!(!q.is_abelian());
        let p = FiniteGroup::parse_spec("product:cyclic:2,product:cyclic:2,cyclic:3").unwrap();
        assert_eq!(p.order(), 12);
        assert!(p.is_abelian());
        let t = FiniteGroup::parse_spec("table:0 1;1 0").unwrap();
        assert_eq!(t.order(), 2);
        assert!(FiniteGroup::parse_spec("table:0 1;0 1").is_err());
        assert!(FiniteGroup::parse_spec("cyclic:x").is_err());
    }

    #[test]
    fn centers_and_fixed_points() {
        assert_eq!(FiniteGroup::sym(3).unwrap().center(), vec![0]);
        assert_eq!(zn(4).center(), vec![0, 1, 2, 3]);
        let z3 = zn(3);
        let inv = GroupHom::parse("inv", &z3, &z3).unwrap();
        assert_eq!(inv.fixed_subgroup(), vec![0]);
        let s3 = FiniteGroup::sym(3).unwrap();
        assert_eq!(s3.commutator_subgroup().len(), 3);
    }

    #[test]
    fn automorphism_counts() {
        assert_eq!(automorphisms(&zn(4)).len(), 2);
        assert_eq!(brute_force_autos(&zn(4)), 2);
        assert_eq!(automorphisms(&zn(2)).len(), 1);
        let s3 = FiniteGroup::sym(3).unwrap();
        let autos = automorphisms(&s3);
        assert_eq!(autos.len(), 6);
        assert_eq!(brute_force_autos(&s3), 6);
        let inner: BTreeSet<Vec<Elt>> =
            s3.elements().map(|h| GroupHom::inner(&s3, h).values().to_vec()).collect();
        assert!(autos.iter().all(|a| inner.contains(a.values())));
        assert_eq!(automorphisms(&FiniteGroup::quaternion()).len(), 24);
        assert_eq!(automorphisms(&FiniteGroup::parse_spec("product:cyclic:2,cyclic:2").unwrap()).len(), 6);
    }

    #[test]
    fn eventual_image_examples() {
        let z4 = zn(4);
        let e = eventual_image(&GroupHom::parse("mul:2", &z4, &z4).unwrap()).unwrap();
        assert_eq!(e.elements, vec![0]);
        assert_eq!(backward_chain_count(&GroupHom::parse("mul:2", &z4, &z4).unwrap(), 10), 1);

        let s3 = FiniteGroup::sym(3).unwrap();
        let a = GroupHom::inner(&s3, 1);
        let e = eventual_image(&a).unwrap();
        assert_eq!(e.elements.len(), 6);
        assert_eq!(e.restricted.values(), a.values());

        let z6 = zn(6);
        let m3 = GroupHom::parse("mul:3", &z6, &z6).unwrap();
        let e = eventual_image(&m3).unwrap();
        assert_eq!(e.elements, vec![0, 3]);
        assert!(e.restricted.is_identity());
        assert_eq!(backward_chain_count(&m3, 10), 2);
    }

    #[test]
    fn outer_conjugate_examples() {
        let z3 = zn(3);
        let id = GroupHom::identity(&z3);
        let inv = GroupHom::parse("inv", &z3, &z3).unwrap();
        assert!(outer_conjugate(&id, &inv).is_none());
        let s3 = FiniteGroup::sym(3).unwrap();
        let t = s3.parse_element("(12)").unwrap();
        let (gamma, h) = outer_conjugate(&GroupHom::identity(&s3), &GroupHom::inner(&s3, t)).unwrap();
        assert!(gamma.is_identity());
        assert_eq!(h, t);
        let (gamma, h) = outer_conjugate(&inv, &inv).unwrap();
        assert!(gamma.is_identity());
        assert_eq!(h, 0);
    }

    #[test]
    fn omega_subgroup_examples() {
        let s3 = FiniteGroup::sym(3).unwrap();
        let w = OmegaData::from_fn(&s3, |g, _| g).unwrap();
        assert_eq!(gamma_omega_subgroup(&w).len(), 6);
        let z4 = zn(4);
        let w = OmegaData::from_fn(&z4, |g, _| (2 * g) % 4).unwrap();
        assert_eq!(gamma_omega_subgroup(&w), vec![0]);
        let z2 = zn(2);
        let w = OmegaData::from_fn(&z2, |g, h| (g + h) % 2).unwrap();
        assert_eq!(gamma_omega_subgroup(&w), vec![0, 1]);
        // not a homomorphism on a nonabelian group
        assert!(OmegaData::from_fn(&s3, |g, h| s3.mul(g, h)).is_err());
    }

    #[test]
    fn omega_b_witness_examples() {
        let s3 = FiniteGroup::sym(3).unwrap();
        let w = OmegaData::from_fn(&s3, |g, _| g).unwrap();
        let b = omega_b_witness(&w, s3.identity(), 3).unwrap();
        assert!(b.values().all(|&x| x == s3.identity()));

        let z2 = zn(2);
        let w = OmegaData::from_fn(&z2, |g, _| g).unwrap();
        let b = omega_b_witness(&w, 1, 2).unwrap();
        for (u, &bu) in &b {
            if u.len() < 2 {
                assert_eq!(w.apply(b[&u.child(0)], b[&u.child(1)]), z2.mul(z2.inv(1), bu));
            }
        }
        assert_eq!(b[&"0".parse().unwrap()], 1);
        assert_eq!(b[&"1".parse().unwrap()], 0);

        let z4 = zn(4);
        let w = OmegaData::from_fn(&z4, |g, _| (2 * g) % 4).unwrap();
        assert!(omega_b_witness(&w, 1, 2).is_none());
    }

    fn group_strategy() -> impl Strategy<Value = Group> {
        prop_oneof![
            (1usize..13).prop_map(|n| FiniteGroup::cyclic(n).unwrap()),
            (2usize..6).prop_map(|n| FiniteGroup::dihedral(n).unwrap()),
            Just(FiniteGroup::sym(3).unwrap()),
            Just(FiniteGroup::quaternion()),
            Just(FiniteGroup::parse_spec("product:cyclic:2,cyclic:4").unwrap()),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn automorphisms_form_a_group(g in group_strategy()) {
            let autos = automorphisms(&g);
            let set: BTreeSet<Vec<Elt>> = autos.iter().map(|a| a.values().to_vec()).collect();
            prop_assert!(set.contains(&g.elements().collect::<Vec<_>>()));
            for a in &autos {
                prop_assert!(a.is_hom() && a.is_bijective());
                for b in &autos {
                    prop_assert!(set.contains(a.compose(b).unwrap().values()));
                }
            }
        }

        #[test]
        fn eventual_image_matches_backward_chains(g in group_strategy(), pick in any::<prop::sample::Index>()) {
            let endos = endomorphisms(&g);
            let beta = &endos[pick.index(endos.len())];
            let e = eventual_image(beta).unwrap();
            let image: BTreeSet<Elt> = e.elements.iter().map(|&x| beta.apply(x)).collect();
            prop_assert_eq!(image.into_iter().collect::<Vec<_>>(), e.elements.clone());
            let far = beta.pow(g.order() as i64).unwrap();
            prop_assert!(g.elements().all(|x| e.elements.contains(&far.apply(x))));
            for k in e.stabilization..e.stabilization + 3 {
                prop_assert_eq!(backward_chain_count(beta, k), e.elements.len());
            }
        }

        #[test]
        fn outer_conjugacy_is_an_equivalence(g in group_strategy(), i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>(), k in any::<prop::sample::Index>()) {
            let autos = automorphisms(&g);
            prop_assume!(autos.len() <= 24);
            let (a, b, c) = (&autos[i.index(autos.len())], &autos[j.index(autos.len())], &autos[k.index(autos.len())]);
            prop_assert!(outer_conjugate(a, a).is_some());
            let ab = outer_conjugate(a, b).is_some();
            prop_assert_eq!(ab, outer_conjugate(b, a).is_some());
            if ab && outer_conjugate(b, c).is_some() {
                prop_assert!(outer_conjugate(a, c).is_some());
            }
        }

        #[test]
        fn gamma_omega_is_closed(g in group_strategy(), i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>()) {
            let endos = endomorphisms(&g);
            let (w0, w1) = (&endos[i.index(endos.len())], &endos[j.index(endos.len())]);
            prop_assume!(w0.image().iter().all(|&a| w1.image().iter().all(|&b| g.commute(a, b))));
            let w = OmegaData::from_pair(w0, w1).unwrap();
            let sub = gamma_omega_subgroup(&w);
            let set: BTreeSet<Elt> = sub.iter().copied().collect();
            for &a in &sub {
                for &b in &sub {
                    prop_assert!(set.contains(&w.apply(a, b)));
                }
            }
            // ω restricted to Γ_ω is onto Γ_ω
            let onto: BTreeSet<Elt> = sub.iter().flat_map(|&a| sub.iter().map(move |&b| (a, b))).map(|(a, b)| w.apply(a, b)).collect();
            prop_assert_eq!(onto, set);
        }
    }
}
