//! Finite groupoids, ordered groupoids and e-poses.
//!
//! Objects and morphisms are dense `usize` ids; e-pos indices are interned
//! [`Index`] values ordered by id. Validators never fail: they evaluate every
//! law exhaustively and return a [`ValidationReport`] with the first witness per
//! law.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::bitrel::BitRelation;
use crate::report::{check, ValidationReport};

/// Interned e-pos index. The id order is the stable total order used for all
/// "least" choices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Index(pub u32);

impl Index {
    #[inline]
    pub fn id(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EposError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("not a valid e-pos: {0}")]
    Invalid(String),
    #[error("unknown index name `{0}`")]
    UnknownIndex(String),
}

/// A finite groupoid given by explicit tables.
///
/// `compose[(g, h)]` is `g ∗ h`, defined iff `target[h] == source[g]`.
/// Fields are public so that corrupted structures can be fed to the validator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroupoid {
    pub objects: Vec<String>,
    pub morphisms: Vec<String>,
    pub source: Vec<usize>,
    pub target: Vec<usize>,
    pub unit: Vec<usize>,
    pub inverse: Vec<usize>,
    pub compose: BTreeMap<(usize, usize), usize>,
}

impl FiniteGroupoid {
    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn morphism_count(&self) -> usize {
        self.morphisms.len()
    }

    pub fn composable(&self, g: usize, h: usize) -> bool {
        self.target[h] == self.source[g]
    }

    pub fn compose(&self, g: usize, h: usize) -> Option<usize> {
        self.compose.get(&(g, h)).copied()
    }

    /// Morphisms grouped by source object.
    pub fn by_source(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.objects.len()];
        for (g, &s) in self.source.iter().enumerate() {
            out[s].push(g);
        }
        out
    }

    /// Morphism id with the given name.
    pub fn morphism_named(&self, name: &str) -> Option<usize> {
        self.morphisms.iter().position(|m| m == name)
    }

    pub fn object_named(&self, name: &str) -> Option<usize> {
        self.objects.iter().position(|m| m == name)
    }

    /// Transitive groupoid `pair(objs) × Z/order`: morphisms `(c, a, k)`
    /// from `a` to `c` with group label `k`.
    pub fn transitive(objects: &[&str], order: usize) -> Self {
        assert!(order >= 1);
        let n = objects.len();
        let id = |c: usize, a: usize, k: usize| (c * n + a) * order + k;
        let mut morphisms = Vec::new();
        let (mut source, mut target) = (Vec::new(), Vec::new());
        for c in 0..n {
            for a in 0..n {
                for k in 0..order {
                    morphisms.push(if order == 1 {
                        format!("({},{})", objects[c], objects[a])
                    } else {
                        format!("({},{};{k})", objects[c], objects[a])
                    });
                    source.push(a);
                    target.push(c);
                }
            }
        }
        let mut compose = BTreeMap::new();
        for c in 0..n {
            for b in 0..n {
                for a in 0..n {
                    for k in 0..order {
                        for l in 0..order {
                            compose.insert((id(c, b, k), id(b, a, l)), id(c, a, (k + l) % order));
                        }
                    }
                }
            }
        }
        let unit = (0..n).map(|x| id(x, x, 0)).collect();
        let mut inverse = vec![0; morphisms.len()];
        for c in 0..n {
            for a in 0..n {
                for k in 0..order {
                    inverse[id(c, a, k)] = id(a, c, (order - k) % order);
                }
            }
        }
        Self {
            objects: objects.iter().map(|s| s.to_string()).collect(),
            morphisms,
            source,
            target,
            unit,
            inverse,
            compose,
        }
    }

    /// Disjoint union; ids of `other` are shifted past those of `self`.
    pub fn disjoint_union(&self, other: &Self) -> Self {
        let (no, nm) = (self.objects.len(), self.morphisms.len());
        let mut out = self.clone();
        out.objects.extend(other.objects.iter().cloned());
        out.morphisms.extend(other.morphisms.iter().cloned());
        out.source.extend(other.source.iter().map(|x| x + no));
        out.target.extend(other.target.iter().map(|x| x + no));
        out.unit.extend(other.unit.iter().map(|g| g + nm));
        out.inverse.extend(other.inverse.iter().map(|g| g + nm));
        out.compose
            .extend(other.compose.iter().map(|(&(g, h), &k)| ((g + nm, h + nm), k + nm)));
        out
    }

    /// The discrete partial order (equality) on objects and morphisms.
    pub fn discretely_ordered(self) -> OrderedGroupoid {
        let (n, m) = (self.objects.len(), self.morphisms.len());
        OrderedGroupoid {
            base: self,
            order_objects: BitRelation::identity(n),
            order_morphisms: BitRelation::identity(m),
        }
    }
}

/// Pair groupoid of a finite set: morphisms `(c, a): a → c`, `(c,b) ∗ (b,a) = (c,a)`.
pub fn pair_groupoid(objects: &[&str]) -> FiniteGroupoid {
    FiniteGroupoid::transitive(objects, 1)
}

/// A group `Z/order` as a one-object groupoid.
pub fn cyclic_group(order: usize) -> FiniteGroupoid {
    let mut g = FiniteGroupoid::transitive(&["*"], order);
    g.morphisms = (0..order).map(|k| format!("{k}")).collect();
    g
}

fn shape_witness(g: &FiniteGroupoid) -> Option<String> {
    let (n, m) = (g.objects.len(), g.morphisms.len());
    if g.source.len() != m || g.target.len() != m || g.inverse.len() != m {
        return Some(format!("table lengths disagree with {m} morphisms"));
    }
    if g.unit.len() != n {
        return Some(format!("unit table has {} entries for {n} objects", g.unit.len()));
    }
    if let Some(h) = (0..m).find(|&h| g.source[h] >= n || g.target[h] >= n || g.inverse[h] >= m) {
        return Some(format!("morphism {} references an unknown id", g.morphisms[h]));
    }
    if let Some(x) = (0..n).find(|&x| g.unit[x] >= m) {
        return Some(format!("unit of {} is not a morphism", g.objects[x]));
    }
    if let Some((&(a, b), &c)) = g.compose.iter().find(|(&(a, b), &c)| a >= m || b >= m || c >= m) {
        return Some(format!("composition entry ({a},{b})->{c} out of range"));
    }
    None
}

/// Checks every groupoid law by exhaustion.
pub fn validate_groupoid(g: &FiniteGroupoid) -> ValidationReport {
    let mut r = ValidationReport::new();
    if let Some(w) = shape_witness(g) {
        r.fail("SHAPE", w);
        return r;
    }
    r.pass("SHAPE");
    let m = g.morphisms.len();
    let name = |h: usize| g.morphisms[h].as_str();
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|a| (0..m).map(move |b| (a, b)))
        .filter(|&(a, b)| g.composable(a, b))
        .collect();

    check(&mut r, "COMPOSE_DEFINED", || {
        if let Some(&(a, b)) = pairs.iter().find(|&&(a, b)| g.compose(a, b).is_none()) {
            return Some(format!("{} * {} undefined", name(a), name(b)));
        }
        g.compose
            .keys()
            .find(|&&(a, b)| !g.composable(a, b))
            .map(|&(a, b)| format!("{} * {} defined but not composable", name(a), name(b)))
    });
    check(&mut r, "COMPOSE_ENDPOINTS", || {
        pairs.iter().find_map(|&(a, b)| {
            let c = g.compose(a, b)?;
            (g.source[c] != g.source[b] || g.target[c] != g.target[a])
                .then(|| format!("{} * {} = {}", name(a), name(b), name(c)))
        })
    });
    check(&mut r, "ASSOCIATIVITY", || {
        let by_target = {
            let mut t = vec![Vec::new(); g.objects.len()];
            for h in 0..m {
                t[g.target[h]].push(h);
            }
            t
        };
        for &(a, b) in &pairs {
            for &c in &by_target[g.source[b]] {
                let left = g.compose(a, b).and_then(|ab| g.compose(ab, c));
                let right = g.compose(b, c).and_then(|bc| g.compose(a, bc));
                if left != right {
                    return Some(format!("({} * {}) * {}", name(a), name(b), name(c)));
                }
            }
        }
        None
    });
    check(&mut r, "UNIT", || {
        for (x, &u) in g.unit.iter().enumerate() {
            if g.source[u] != x || g.target[u] != x {
                return Some(format!("unit of {} is {}", g.objects[x], name(u)));
            }
        }
        (0..m).find_map(|h| {
            let l = g.compose(g.unit[g.target[h]], h);
            let rr = g.compose(h, g.unit[g.source[h]]);
            (l != Some(h) || rr != Some(h)).then(|| format!("units do not fix {}", name(h)))
        })
    });
    check(&mut r, "INVERSE", || {
        (0..m).find_map(|h| {
            let inv = g.inverse[h];
            let ok = g.source[inv] == g.target[h]
                && g.target[inv] == g.source[h]
                && g.compose(inv, h) == Some(g.unit[g.source[h]])
                && g.compose(h, inv) == Some(g.unit[g.target[h]]);
            (!ok).then(|| format!("inverse of {} given as {}", name(h), name(inv)))
        })
    });
    r
}

/// A groupoid with partial orders `L` on objects and morphisms; `(a, b)` in an
/// order means `a ≤ b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderedGroupoid {
    pub base: FiniteGroupoid,
    pub order_objects: BitRelation,
    pub order_morphisms: BitRelation,
}

impl OrderedGroupoid {
    /// Drops the given morphisms together with every composition entry that
    /// mentions them. Units and inverses pointing at dropped morphisms are left
    /// dangling on purpose so the validator can name them.
    pub fn without_morphisms(&self, drop: &[usize]) -> OrderedGroupoid {
        let g = &self.base;
        let m = g.morphisms.len();
        let mut remap = vec![None; m];
        let mut next = 0;
        for (h, slot) in remap.iter_mut().enumerate() {
            if !drop.contains(&h) {
                *slot = Some(next);
                next += 1;
            }
        }
        let keep: Vec<usize> = (0..m).filter(|h| remap[*h].is_some()).collect();
        let re = |h: usize| remap[h].unwrap_or(usize::MAX);
        let compose = g
            .compose
            .iter()
            .filter_map(|(&(a, b), &c)| Some(((remap[a]?, remap[b]?), remap[c]?)))
            .collect();
        let base = FiniteGroupoid {
            objects: g.objects.clone(),
            morphisms: keep.iter().map(|&h| g.morphisms[h].clone()).collect(),
            source: keep.iter().map(|&h| g.source[h]).collect(),
            target: keep.iter().map(|&h| g.target[h]).collect(),
            unit: g.unit.iter().map(|&u| re(u)).collect(),
            inverse: keep.iter().map(|&h| re(g.inverse[h])).collect(),
            compose,
        };
        let order_morphisms = BitRelation::from_pairs(
            keep.len(),
            keep.len(),
            self.order_morphisms
                .pairs()
                .filter_map(|(a, b)| Some((remap[a]?, remap[b]?))),
        );
        OrderedGroupoid { base, order_objects: self.order_objects.clone(), order_morphisms }
    }
}

fn partial_order_witness(rel: &BitRelation, names: &[String]) -> Option<String> {
    let n = rel.rows();
    if let Some(a) = (0..n).find(|&a| !rel.contains(a, a)) {
        return Some(format!("not reflexive at {}", names[a]));
    }
    for (a, b) in rel.pairs() {
        if a != b && rel.contains(b, a) {
            return Some(format!("not antisymmetric: {} <= {} <= {}", names[a], names[b], names[a]));
        }
        for c in rel.row(b) {
            if !rel.contains(a, c) {
                return Some(format!(
                    "not transitive: {} <= {} <= {}",
                    names[a], names[b], names[c]
                ));
            }
        }
    }
    None
}

/// Checks the base groupoid, both orders and OG0–OG3 by exhaustion.
pub fn validate_ordered_groupoid(og: &OrderedGroupoid) -> ValidationReport {
    let g = &og.base;
    let mut r = validate_groupoid(g);
    if r.violation("SHAPE").is_some() {
        return r;
    }
    let (n, m) = (g.objects.len(), g.morphisms.len());
    if og.order_objects.rows() != n || og.order_morphisms.rows() != m {
        r.fail("ORDER_SHAPE", "order relation sizes disagree with the groupoid");
        return r;
    }
    let lo = &og.order_objects;
    let lm = &og.order_morphisms;
    let name = |h: usize| g.morphisms[h].as_str();
    check(&mut r, "ORDER_OBJECTS", || partial_order_witness(lo, &g.objects));
    check(&mut r, "ORDER_MORPHISMS", || partial_order_witness(lm, &g.morphisms));
    check(&mut r, "OG0", || {
        (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).find_map(|(x, y)| {
            (lo.contains(x, y) != lm.contains(g.unit[x], g.unit[y]))
                .then(|| format!("objects {} , {}", g.objects[x], g.objects[y]))
        })
    });
    check(&mut r, "OG1", || {
        (0..m).flat_map(|a| (0..m).map(move |b| (a, b))).find_map(|(a, b)| {
            (lm.contains(a, b) != lm.contains(g.inverse[a], g.inverse[b]))
                .then(|| format!("{} <= {} not mirrored by inverses", name(a), name(b)))
        })
    });
    check(&mut r, "OG2", || {
        let pairs: Vec<(usize, usize)> = g.compose.keys().copied().collect();
        for &(a, a2) in &pairs {
            for &(b, b2) in &pairs {
                if lm.contains(a, b) && lm.contains(a2, b2) {
                    let (ab, bb) = (g.compose[&(a, a2)], g.compose[&(b, b2)]);
                    if !lm.contains(ab, bb) {
                        return Some(format!(
                            "{} <= {}, {} <= {} but {} * {} not <= {} * {}",
                            name(a), name(b), name(a2), name(b2), name(a), name(a2), name(b), name(b2)
                        ));
                    }
                }
            }
        }
        None
    });
    check(&mut r, "OG3", || {
        let by_source = g.by_source();
        for h in 0..m {
            let (x, y) = (g.source[h], g.target[h]);
            for x2 in lo.column(x) {
                let count = by_source[x2]
                    .iter()
                    .filter(|&&h2| lm.contains(h2, h) && lo.contains(g.target[h2], y))
                    .count();
                if count != 1 {
                    return Some(format!(
                        "(g={}, x'={}) has {count} candidate restrictions",
                        name(h),
                        g.objects[x2]
                    ));
                }
            }
        }
        None
    });
    r
}

/// An equivalence-partially ordered set `(I, E, L)`.
///
/// `equiv` and `order` are stored exactly as given; `(a, b) ∈ order` means `a ≤ b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EPos {
    names: Vec<String>,
    equiv: BitRelation,
    order: BitRelation,
}

impl EPos {
    /// Builds an e-pos from generators: `equiv` is closed to an equivalence
    /// relation and `order` (e.g. Hasse covers, `(lower, upper)`) to its
    /// reflexive-transitive closure.
    pub fn from_generators(
        names: Vec<String>,
        equiv: impl IntoIterator<Item = (Index, Index)>,
        order: impl IntoIterator<Item = (Index, Index)>,
    ) -> Self {
        let n = names.len();
        let e = BitRelation::from_pairs(n, n, equiv.into_iter().map(|(a, b)| (a.id(), b.id())));
        let l = BitRelation::from_pairs(n, n, order.into_iter().map(|(a, b)| (a.id(), b.id())));
        Self {
            names,
            equiv: e.equivalence_closure(),
            order: l.reflexive_transitive_closure(),
        }
    }

    /// Stores the relations verbatim, without closure.
    pub fn from_relations(names: Vec<String>, equiv: BitRelation, order: BitRelation) -> Self {
        assert_eq!(equiv.rows(), names.len());
        assert_eq!(order.rows(), names.len());
        Self { names, equiv, order }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn indices(&self) -> impl Iterator<Item = Index> + Clone {
        (0..self.names.len() as u32).map(Index)
    }

    pub fn name(&self, i: Index) -> &str {
        &self.names[i.id()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Result<Index, EposError> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|p| Index(p as u32))
            .ok_or_else(|| EposError::UnknownIndex(name.to_string()))
    }

    pub fn equiv(&self) -> &BitRelation {
        &self.equiv
    }

    pub fn order(&self) -> &BitRelation {
        &self.order
    }

    pub fn equiv_mut(&mut self) -> &mut BitRelation {
        &mut self.equiv
    }

    pub fn order_mut(&mut self) -> &mut BitRelation {
        &mut self.order
    }

    #[inline]
    pub fn le(&self, a: Index, b: Index) -> bool {
        self.order.contains(a.id(), b.id())
    }

    #[inline]
    pub fn related(&self, a: Index, b: Index) -> bool {
        self.equiv.contains(a.id(), b.id())
    }

    /// Indices `k ≥ i`.
    pub fn above(&self, i: Index) -> Vec<Index> {
        self.order.row(i.id()).map(|k| Index(k as u32)).collect()
    }

    /// Indices `k ≤ i`.
    pub fn below(&self, i: Index) -> Vec<Index> {
        self.order.column(i.id()).map(|k| Index(k as u32)).collect()
    }

    /// Indices `j` with `(i, j) ∈ E`.
    pub fn class_of(&self, i: Index) -> Vec<Index> {
        self.equiv.row(i.id()).map(|k| Index(k as u32)).collect()
    }

    /// E-classes, each sorted, ordered by least member.
    pub fn classes(&self) -> Vec<Vec<Index>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for i in self.indices() {
            if !seen[i.id()] {
                let c = self.class_of(i);
                for k in &c {
                    seen[k.id()] = true;
                }
                out.push(c);
            }
        }
        out
    }

    /// All pairs `(i, j) ∈ E`.
    pub fn equiv_pairs(&self) -> impl Iterator<Item = (Index, Index)> + '_ {
        self.equiv.pairs().map(|(a, b)| (Index(a as u32), Index(b as u32)))
    }

    /// Hasse covers `(lower, upper)` of the order.
    pub fn covers(&self) -> Vec<(Index, Index)> {
        let mut out = Vec::new();
        for (a, b) in self.order.pairs() {
            if a == b {
                continue;
            }
            let between = self
                .order
                .row(a)
                .any(|k| k != a && k != b && self.order.contains(k, b));
            if !between {
                out.push((Index(a as u32), Index(b as u32)));
            }
        }
        out
    }

    /// Removes an index, renumbering the remaining ones in order.
    pub fn without(&self, drop: Index) -> (EPos, Vec<Option<Index>>) {
        let mut remap = Vec::with_capacity(self.len());
        let mut next = 0u32;
        for i in self.indices() {
            if i == drop {
                remap.push(None);
            } else {
                remap.push(Some(Index(next)));
                next += 1;
            }
        }
        let n = next as usize;
        let mut e = BitRelation::empty(n, n);
        let mut l = BitRelation::empty(n, n);
        for (a, b) in self.equiv.pairs() {
            if let (Some(x), Some(y)) = (remap[a], remap[b]) {
                e.insert(x.id(), y.id());
            }
        }
        for (a, b) in self.order.pairs() {
            if let (Some(x), Some(y)) = (remap[a], remap[b]) {
                l.insert(x.id(), y.id());
            }
        }
        let names = self
            .indices()
            .filter(|&i| i != drop)
            .map(|i| self.name(i).to_string())
            .collect();
        (EPos::from_relations(names, e, l), remap)
    }
}

impl fmt::Display for EPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "indices: {}", self.len())?;
        for c in self.classes() {
            let names: Vec<&str> = c.iter().map(|&i| self.name(i)).collect();
            writeln!(f, "E-class: {}", names.join(" ~ "))?;
        }
        for (a, b) in self.covers() {
            writeln!(f, "L-cover: {} < {}", self.name(a), self.name(b))?;
        }
        Ok(())
    }
}

/// Checks the E and L axioms, the Epos axiom, and the degenerate-triangle
/// property, all by exhaustion.
pub fn validate_epos(e: &EPos) -> ValidationReport {
    let mut r = ValidationReport::new();
    let n = e.len();
    let (eq, le) = (&e.equiv, &e.order);
    let nm = |i: usize| e.names[i].as_str();
    check(&mut r, "E_REFLEXIVE", || {
        (0..n).find(|&i| !eq.contains(i, i)).map(|i| format!("({},{}) missing", nm(i), nm(i)))
    });
    check(&mut r, "E_SYMMETRIC", || {
        eq.pairs()
            .find(|&(a, b)| !eq.contains(b, a))
            .map(|(a, b)| format!("({},{}) without ({},{})", nm(a), nm(b), nm(b), nm(a)))
    });
    check(&mut r, "E_TRANSITIVE", || {
        eq.pairs().find_map(|(a, b)| {
            eq.row(b)
                .find(|&c| !eq.contains(a, c))
                .map(|c| format!("({},{}),({},{}) without ({},{})", nm(a), nm(b), nm(b), nm(c), nm(a), nm(c)))
        })
    });
    check(&mut r, "L_REFLEXIVE", || {
        (0..n).find(|&i| !le.contains(i, i)).map(|i| format!("{} <= {} missing", nm(i), nm(i)))
    });
    check(&mut r, "L_ANTISYMMETRIC", || {
        le.pairs()
            .find(|&(a, b)| a != b && le.contains(b, a))
            .map(|(a, b)| format!("{} <= {} <= {}", nm(a), nm(b), nm(a)))
    });
    check(&mut r, "L_TRANSITIVE", || {
        le.pairs().find_map(|(a, b)| {
            le.row(b)
                .find(|&c| !le.contains(a, c))
                .map(|c| format!("{} <= {} <= {} but not {} <= {}", nm(a), nm(b), nm(c), nm(a), nm(c)))
        })
    });
    let below = le.transpose();
    check(&mut r, "EPOS", || {
        for (i2, i) in le.pairs() {
            for j in eq.row(i) {
                let cands: Vec<usize> = eq.row_and(i2, &below, j).collect();
                if cands.len() != 1 {
                    let names: Vec<&str> = cands.iter().map(|&c| nm(c)).collect();
                    return Some(format!(
                        "(i'={}, i={}, j={}) has {} candidates [{}]",
                        nm(i2),
                        nm(i),
                        nm(j),
                        cands.len(),
                        names.join(",")
                    ));
                }
            }
        }
        None
    });
    check(&mut r, "DEGENERATE_TRIANGLE", || {
        if let Some((a, b)) = eq.pairs().find(|&(a, b)| a != b && le.contains(a, b)) {
            return Some(format!("{} <= {} and ({},{}) in E", nm(a), nm(b), nm(a), nm(b)));
        }
        for m in 0..n {
            let down: Vec<usize> = below.row(m).collect();
            for &a in &down {
                if let Some(&b) = down.iter().find(|&&b| b != a && eq.contains(a, b)) {
                    return Some(format!("{},{} <= {} and ({},{}) in E", nm(a), nm(b), nm(m), nm(a), nm(b)));
                }
            }
        }
        None
    });
    r
}

/// The unique `j'` with `(i', j') ∈ E` and `j' ≤ j`, given `i' ≤ i` and `(i, j) ∈ E`.
pub fn epos_transport(e: &EPos, i2: Index, i: Index, j: Index) -> Result<Index, EposError> {
    if !e.le(i2, i) {
        return Err(EposError::Precondition(format!("{} is not <= {}", e.name(i2), e.name(i))));
    }
    if !e.related(i, j) {
        return Err(EposError::Precondition(format!("({},{}) is not in E", e.name(i), e.name(j))));
    }
    let cands: Vec<Index> = e
        .class_of(i2)
        .into_iter()
        .filter(|&k| e.le(k, j))
        .collect();
    match cands.as_slice() {
        [k] => Ok(*k),
        _ => Err(EposError::Invalid(format!(
            "transport of ({}, {}, {}) has {} candidates",
            e.name(i2),
            e.name(i),
            e.name(j),
            cands.len()
        ))),
    }
}

/// The ordered groupoid of an e-pos: objects `I`, morphisms the pairs of `E`
/// (`(i, j): j → i`), ordered componentwise.
pub fn epos_as_ordered_groupoid(e: &EPos) -> Result<OrderedGroupoid, EposError> {
    let rep = validate_epos(e);
    if !rep.is_valid() {
        return Err(EposError::Invalid(rep.to_string().trim_end().replace('\n', "; ")));
    }
    let pairs: Vec<(usize, usize)> = e.equiv.pairs().collect();
    let id: BTreeMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(k, &p)| (p, k)).collect();
    let morphisms = pairs
        .iter()
        .map(|&(a, b)| format!("({},{})", e.names[a], e.names[b]))
        .collect();
    let source = pairs.iter().map(|&(_, b)| b).collect();
    let target = pairs.iter().map(|&(a, _)| a).collect();
    let unit = (0..e.len()).map(|i| id[&(i, i)]).collect();
    let inverse = pairs.iter().map(|&(a, b)| id[&(b, a)]).collect();
    let mut compose = BTreeMap::new();
    for &(c, b) in &pairs {
        for a in e.equiv.row(b) {
            compose.insert((id[&(c, b)], id[&(b, a)]), id[&(c, a)]);
        }
    }
    let m = pairs.len();
    let mut lm = BitRelation::empty(m, m);
    for (x, &(a2, b2)) in pairs.iter().enumerate() {
        for (y, &(a, b)) in pairs.iter().enumerate() {
            if e.order.contains(a2, a) && e.order.contains(b2, b) {
                lm.insert(x, y);
            }
        }
    }
    Ok(OrderedGroupoid {
        base: FiniteGroupoid {
            objects: e.names.clone(),
            morphisms,
            source,
            target,
            unit,
            inverse,
            compose,
        },
        order_objects: e.order.clone(),
        order_morphisms: lm,
    })
}

/// Finds an isomorphism of e-poses (a bijection of indices preserving and
/// reflecting both E and L) by backtracking. Returns the image of each index of
/// `a`.
pub fn epos_isomorphism(a: &EPos, b: &EPos) -> Option<Vec<Index>> {
    let n = a.len();
    if n != b.len() || a.equiv.len() != b.equiv.len() || a.order.len() != b.order.len() {
        return None;
    }
    let sig = |e: &EPos, i: usize| {
        (
            e.equiv.row(i).count(),
            e.order.row(i).count(),
            e.order.column(i).count(),
        )
    };
    let sa: Vec<_> = (0..n).map(|i| sig(a, i)).collect();
    let sb: Vec<_> = (0..n).map(|i| sig(b, i)).collect();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];

    fn go(
        k: usize,
        a: &EPos,
        b: &EPos,
        sa: &[(usize, usize, usize)],
        sb: &[(usize, usize, usize)],
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        let n = map.len();
        if k == n {
            return true;
        }
        for c in 0..n {
            if used[c] || sa[k] != sb[c] {
                continue;
            }
            let consistent = (0..k).all(|p| {
                let q = map[p];
                a.equiv.contains(k, p) == b.equiv.contains(c, q)
                    && a.order.contains(k, p) == b.order.contains(c, q)
                    && a.order.contains(p, k) == b.order.contains(q, c)
            }) && a.equiv.contains(k, k) == b.equiv.contains(c, c)
                && a.order.contains(k, k) == b.order.contains(c, c);
            if consistent {
                map[k] = c;
                used[c] = true;
                if go(k + 1, a, b, sa, sb, map, used) {
                    return true;
                }
                used[c] = false;
            }
        }
        false
    }

    go(0, a, b, &sa, &sb, &mut map, &mut used)
        .then(|| map.into_iter().map(|c| Index(c as u32)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn sphere() -> EPos {
        // s, n, s_n, n_s
        EPos::from_generators(
            names(&["n", "s", "n_s", "s_n"]),
            [(Index(2), Index(3))],
            [(Index(2), Index(0)), (Index(3), Index(1))],
        )
    }

    #[test]
    fn pair_groupoid_sizes_and_laws() {
        assert_eq!(pair_groupoid(&["a"]).morphism_count(), 1);
        assert_eq!(pair_groupoid(&["a", "b"]).morphism_count(), 4);
        let g = pair_groupoid(&["a", "b", "c"]);
        assert_eq!(g.morphism_count(), 9);
        assert!(validate_groupoid(&g).is_valid());
    }

    #[test]
    fn cyclic_group_is_valid() {
        let g = cyclic_group(3);
        let r = validate_groupoid(&g);
        assert!(r.is_valid(), "{r}");
        assert_eq!(g.object_count(), 1);
    }

    #[test]
    fn corrupted_inverse_is_named() {
        let mut g = pair_groupoid(&["a", "b"]);
        let ba = g.morphism_named("(b,a)").unwrap();
        g.inverse[ba] = ba;
        let r = validate_groupoid(&g);
        let w = r.violation("INVERSE").expect("inverse law should fail");
        assert!(w.contains("(b,a)"), "{w}");
    }

    #[test]
    fn discrete_order_is_valid() {
        let og = FiniteGroupoid::transitive(&["a", "b"], 2).discretely_ordered();
        assert!(validate_ordered_groupoid(&og).is_valid());
    }

    #[test]
    fn sphere_epos_valid_and_transport() {
        let e = sphere();
        assert!(validate_epos(&e).is_valid());
        let s_n = e.index_of("s_n").unwrap();
        let n_s = e.index_of("n_s").unwrap();
        assert_eq!(epos_transport(&e, s_n, s_n, n_s).unwrap(), n_s);
        assert_eq!(e.classes().len(), 3);
    }

    #[test]
    fn transport_preconditions() {
        let e = sphere();
        let n = e.index_of("n").unwrap();
        let s = e.index_of("s").unwrap();
        assert!(matches!(epos_transport(&e, n, s, s), Err(EposError::Precondition(_))));
        assert!(matches!(epos_transport(&e, n, n, s), Err(EposError::Precondition(_))));
    }

    #[test]
    fn singleton_epos() {
        let e = EPos::from_generators(names(&["e"]), [], []);
        assert!(validate_epos(&e).is_valid());
        let og = epos_as_ordered_groupoid(&e).unwrap();
        assert_eq!(og.base.morphism_count(), 1);
    }

    #[test]
    fn sphere_groupoid_counts() {
        let og = epos_as_ordered_groupoid(&sphere()).unwrap();
        assert_eq!(og.base.object_count(), 4);
        assert_eq!(og.base.morphism_count(), 6);
        assert!(validate_ordered_groupoid(&og).is_valid());
    }

    #[test]
    fn degenerate_triangle_detected() {
        // a <= b with a ~ b
        let e = EPos::from_generators(names(&["a", "b"]), [(Index(0), Index(1))], [(Index(0), Index(1))]);
        let r = validate_epos(&e);
        assert!(r.violation("DEGENERATE_TRIANGLE").is_some());
        assert!(r.violation("EPOS").is_some());
    }

    #[test]
    fn isomorphism_finds_relabeling() {
        let a = sphere();
        let b = EPos::from_generators(
            names(&["x", "y", "z", "w"]),
            [(Index(0), Index(1))],
            [(Index(0), Index(2)), (Index(1), Index(3))],
        );
        let iso = epos_isomorphism(&a, &b).expect("isomorphic");
        for (p, q) in a.equiv_pairs() {
            assert!(b.related(iso[p.id()], iso[q.id()]));
        }
        let c = EPos::from_generators(names(&["x", "y", "z", "w"]), [], [(Index(0), Index(2))]);
        assert!(epos_isomorphism(&a, &c).is_none());
    }
}
