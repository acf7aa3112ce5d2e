//! Partial bijections of a finite carrier `{0, .., n-1}` and pseudogroups.
//!
//! Subsets of the carrier are `u64` bit masks, so carriers hold at most 64
//! points. Materializing the full pseudogroup is bounded (default 4 points);
//! exceeding the bound is an error.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::bitrel::BitRelation;
use crate::groupoid::{FiniteGroupoid, OrderedGroupoid};
use crate::report::{check, ValidationReport};

pub type Subset = u64;

pub const DEFAULT_FULL_BOUND: usize = 4;
pub const DEFAULT_COVER_BOUND: usize = 3;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PseudogroupError {
    #[error("carrier mismatch: {0} vs {1}")]
    CarrierMismatch(usize, usize),
    #[error("not a partial bijection: {0}")]
    NotBijective(String),
    #[error("carrier of size {size} exceeds the bound {bound}")]
    TooLarge { size: usize, bound: usize },
}

pub fn subset_of(points: impl IntoIterator<Item = usize>) -> Subset {
    points.into_iter().fold(0, |m, x| m | (1 << x))
}

pub fn members(s: Subset) -> impl Iterator<Item = usize> {
    (0..64).filter(move |&x| s & (1 << x) != 0)
}

pub fn fmt_subset(s: Subset) -> String {
    let parts: Vec<String> = members(s).map(|x| x.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

/// A bijection between two subsets of the carrier, stored as sorted
/// `(x, f(x))` pairs.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartialBijection {
    n: usize,
    pairs: Vec<(usize, usize)>,
}

impl PartialBijection {
    /// Builds `x ↦ y` for each `(x, y)`, rejecting non-injective or
    /// non-functional graphs.
    pub fn new(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, PseudogroupError> {
        let set: BTreeSet<(usize, usize)> = pairs.into_iter().collect();
        let pairs: Vec<(usize, usize)> = set.into_iter().collect();
        let (mut dom, mut im) = (0u64, 0u64);
        for &(x, y) in &pairs {
            if x >= n || y >= n {
                return Err(PseudogroupError::NotBijective(format!("{x}->{y} leaves the carrier")));
            }
            if dom & (1 << x) != 0 || im & (1 << y) != 0 {
                return Err(PseudogroupError::NotBijective(format!("{x}->{y} collides")));
            }
            dom |= 1 << x;
            im |= 1 << y;
        }
        Ok(Self { n, pairs })
    }

    pub fn empty(n: usize) -> Self {
        Self { n, pairs: Vec::new() }
    }

    pub fn identity(n: usize, s: Subset) -> Self {
        Self { n, pairs: members(s).map(|x| (x, x)).collect() }
    }

    pub fn carrier(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// The graph as `(y, x)` pairs with `y = f(x)`.
    pub fn graph(&self) -> BTreeSet<(usize, usize)> {
        self.pairs.iter().map(|&(x, y)| (y, x)).collect()
    }

    pub fn domain(&self) -> Subset {
        subset_of(self.pairs.iter().map(|p| p.0))
    }

    pub fn image(&self) -> Subset {
        subset_of(self.pairs.iter().map(|p| p.1))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn apply(&self, x: usize) -> Option<usize> {
        self.pairs.binary_search_by_key(&x, |p| p.0).ok().map(|k| self.pairs[k].1)
    }

    pub fn inverse(&self) -> Self {
        let mut pairs: Vec<(usize, usize)> = self.pairs.iter().map(|&(x, y)| (y, x)).collect();
        pairs.sort_unstable();
        Self { n: self.n, pairs }
    }

    /// Inclusion of graphs.
    pub fn le(&self, other: &Self) -> bool {
        self.pairs.iter().all(|&(x, y)| other.apply(x) == Some(y))
    }

    /// Union of two graphs, if it is again a partial bijection.
    pub fn union(&self, other: &Self) -> Option<Self> {
        Self::new(self.n, self.pairs.iter().chain(&other.pairs).copied()).ok()
    }
}

impl fmt::Display for PartialBijection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.pairs.iter().map(|(x, y)| format!("{x}->{y}")).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Relational composition `f ∘ g` (first `g`, then `f`).
pub fn compose_pb(f: &PartialBijection, g: &PartialBijection) -> Result<PartialBijection, PseudogroupError> {
    if f.n != g.n {
        return Err(PseudogroupError::CarrierMismatch(f.n, g.n));
    }
    let pairs = g.pairs.iter().filter_map(|&(x, y)| f.apply(y).map(|z| (x, z)));
    Ok(PartialBijection { n: f.n, pairs: pairs.collect() })
}

/// `f` restricted to `dom(f) ∩ u`.
pub fn restrict_pb(f: &PartialBijection, u: Subset) -> PartialBijection {
    PartialBijection {
        n: f.n,
        pairs: f.pairs.iter().copied().filter(|&(x, _)| u & (1 << x) != 0).collect(),
    }
}

/// Every injective map from `dom` into the carrier.
pub fn bijections_from(n: usize, dom: Subset) -> Vec<PartialBijection> {
    let xs: Vec<usize> = members(dom).collect();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(xs.len());
    fn go(n: usize, xs: &[usize], used: u64, cur: &mut Vec<(usize, usize)>, out: &mut Vec<PartialBijection>) {
        if cur.len() == xs.len() {
            out.push(PartialBijection { n, pairs: cur.clone() });
            return;
        }
        let x = xs[cur.len()];
        for y in 0..n {
            if used & (1 << y) == 0 {
                cur.push((x, y));
                go(n, xs, used | (1 << y), cur, out);
                cur.pop();
            }
        }
    }
    go(n, &xs, 0, &mut cur, &mut out);
    out
}

/// A pseudogroup of transformations of `{0, .., n-1}`: objects `G₀` are
/// subsets, morphisms `G₁` partial bijections.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pseudogroup {
    /// All subsets and all partial bijections, never materialized.
    Full { n: usize },
    Explicit {
        n: usize,
        objects: BTreeSet<Subset>,
        morphisms: BTreeSet<PartialBijection>,
    },
}

impl Pseudogroup {
    pub fn full(n: usize) -> Self {
        assert!(n <= 64, "carrier too large for bit-mask subsets");
        Pseudogroup::Full { n }
    }

    pub fn carrier(&self) -> usize {
        match self {
            Pseudogroup::Full { n } | Pseudogroup::Explicit { n, .. } => *n,
        }
    }

    pub fn contains_object(&self, s: Subset) -> bool {
        match self {
            Pseudogroup::Full { n } => *n >= 64 || s >> n == 0,
            Pseudogroup::Explicit { objects, .. } => objects.contains(&s),
        }
    }

    pub fn contains_morphism(&self, f: &PartialBijection) -> bool {
        match self {
            Pseudogroup::Full { n } => f.n == *n,
            Pseudogroup::Explicit { morphisms, .. } => morphisms.contains(f),
        }
    }

    /// Materializes a [`Pseudogroup::Full`] within `bound` points.
    pub fn materialize(&self, bound: usize) -> Result<Pseudogroup, PseudogroupError> {
        match self {
            Pseudogroup::Full { n } => full_pseudogroup_bounded(*n, bound),
            other => Ok(other.clone()),
        }
    }

    /// Closure of `generators` (on all subsets as objects) under
    /// restriction, inverse, composition, units and gluing over covers of at
    /// most `DEFAULT_COVER_BOUND` pieces.
    pub fn generated(n: usize, generators: &[PartialBijection]) -> Pseudogroup {
        let objects: BTreeSet<Subset> = (0..1u64 << n).collect();
        let mut morphisms: BTreeSet<PartialBijection> = objects.iter().map(|&s| PartialBijection::identity(n, s)).collect();
        morphisms.extend(generators.iter().cloned());
        loop {
            let before = morphisms.len();
            let current: Vec<PartialBijection> = morphisms.iter().cloned().collect();
            for f in &current {
                morphisms.insert(f.inverse());
                for &s in &objects {
                    morphisms.insert(restrict_pb(f, s));
                }
                for g in &current {
                    if g.image() == f.domain() {
                        morphisms.insert(compose_pb(f, g).expect("same carrier"));
                    }
                }
            }
            let p = Pseudogroup::Explicit { n, objects: objects.clone(), morphisms: morphisms.clone() };
            if let Some((_, glued)) = psg_violation(&p, DEFAULT_COVER_BOUND) {
                morphisms.insert(glued);
            }
            if morphisms.len() == before {
                return Pseudogroup::Explicit { n, objects, morphisms };
            }
        }
    }
}

/// All subsets and all partial bijections of a carrier with `n ≤ 4` points.
pub fn full_pseudogroup(n: usize) -> Result<Pseudogroup, PseudogroupError> {
    full_pseudogroup_bounded(n, DEFAULT_FULL_BOUND)
}

pub fn full_pseudogroup_bounded(n: usize, bound: usize) -> Result<Pseudogroup, PseudogroupError> {
    if n > bound || n > 16 {
        return Err(PseudogroupError::TooLarge { size: n, bound });
    }
    let objects: BTreeSet<Subset> = (0..1u64 << n).collect();
    let morphisms = objects.iter().flat_map(|&d| bijections_from(n, d)).collect();
    Ok(Pseudogroup::Explicit { n, objects, morphisms })
}

fn antichain_covers(objects: &[Subset], max: usize) -> Vec<Vec<Subset>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(objs: &[Subset], start: usize, max: usize, cur: &mut Vec<Subset>, out: &mut Vec<Vec<Subset>>) {
        if cur.len() >= 2 {
            out.push(cur.clone());
        }
        if cur.len() == max {
            return;
        }
        for k in start..objs.len() {
            let s = objs[k];
            if s == 0 || cur.iter().any(|&c| c & s == c || c & s == s) {
                continue;
            }
            cur.push(s);
            go(objs, k + 1, max, cur, out);
            cur.pop();
        }
    }
    go(objects, 0, max, &mut cur, &mut out);
    out
}

/// The first cover (of at most `bound` pieces) and glued bijection violating
/// the gluing property: all restrictions to the pieces are morphisms but the
/// glued map is not.
fn psg_violation(p: &Pseudogroup, bound: usize) -> Option<(Vec<Subset>, PartialBijection)> {
    let Pseudogroup::Explicit { objects, morphisms, .. } = p else { return None };
    let objs: Vec<Subset> = objects.iter().copied().collect();
    let mut by_domain: BTreeMap<Subset, Vec<&PartialBijection>> = BTreeMap::new();
    for f in morphisms {
        by_domain.entry(f.domain()).or_default().push(f);
    }
    for cover in antichain_covers(&objs, bound) {
        let pieces: Vec<&Vec<&PartialBijection>> = match cover.iter().map(|u| by_domain.get(u)).collect::<Option<Vec<_>>>() {
            Some(v) => v,
            None => continue,
        };
        let mut stack: Vec<(usize, PartialBijection)> = vec![(0, PartialBijection::empty(p.carrier()))];
        while let Some((k, acc)) = stack.pop() {
            if k == pieces.len() {
                if !morphisms.contains(&acc) {
                    return Some((cover, acc));
                }
                continue;
            }
            for g in pieces[k] {
                if let Some(u) = acc.union(g) {
                    stack.push((k + 1, u));
                }
            }
        }
    }
    None
}

/// Checks closure under composition, inverse and units, that domains and
/// images are objects, and the gluing property over covers of at most
/// `DEFAULT_COVER_BOUND` pieces.
pub fn check_psg(p: &Pseudogroup) -> ValidationReport {
    check_psg_bounded(p, DEFAULT_COVER_BOUND)
}

pub fn check_psg_bounded(p: &Pseudogroup, cover_bound: usize) -> ValidationReport {
    let mut r = ValidationReport::new();
    let Pseudogroup::Explicit { n, objects, morphisms } = p else {
        for law in ["DOMAINS", "UNITS", "INVERSE", "COMPOSE", "PSG"] {
            r.pass(law);
        }
        r.note("full pseudogroup: every partial bijection is a morphism");
        return r;
    };
    check(&mut r, "DOMAINS", || {
        morphisms
            .iter()
            .find(|f| !objects.contains(&f.domain()) || !objects.contains(&f.image()))
            .map(|f| format!("{f} has domain or image outside G0"))
    });
    check(&mut r, "UNITS", || {
        objects
            .iter()
            .find(|&&s| !morphisms.contains(&PartialBijection::identity(*n, s)))
            .map(|&s| format!("identity of {} missing", fmt_subset(s)))
    });
    check(&mut r, "INVERSE", || {
        morphisms.iter().find(|f| !morphisms.contains(&f.inverse())).map(|f| format!("inverse of {f} missing"))
    });
    check(&mut r, "COMPOSE", || {
        for f in morphisms {
            for g in morphisms {
                if g.image() == f.domain() {
                    let c = compose_pb(f, g).expect("same carrier");
                    if !morphisms.contains(&c) {
                        return Some(format!("{f} o {g} = {c} missing"));
                    }
                }
            }
        }
        None
    });
    check(&mut r, "PSG", || {
        psg_violation(p, cover_bound).map(|(cover, f)| {
            let pieces: Vec<String> = cover.iter().map(|&s| fmt_subset(s)).collect();
            format!("cover {} glues to {f}", pieces.join(" "))
        })
    });
    r.note(format!("gluing property checked on covers of at most {cover_bound} pieces"));
    r
}

/// The pseudogroup as an ordered groupoid under inclusion. A
/// [`Pseudogroup::Full`] is materialized within the default bound.
pub fn as_ordered_groupoid(p: &Pseudogroup) -> Result<OrderedGroupoid, PseudogroupError> {
    let p = p.materialize(DEFAULT_FULL_BOUND)?;
    let Pseudogroup::Explicit { n, objects, morphisms } = &p else { unreachable!() };
    let objs: Vec<Subset> = objects.iter().copied().collect();
    let mors: Vec<PartialBijection> = morphisms.iter().cloned().collect();
    let obj_id: BTreeMap<Subset, usize> = objs.iter().enumerate().map(|(k, &s)| (s, k)).collect();
    let mor_id: BTreeMap<&PartialBijection, usize> = mors.iter().enumerate().map(|(k, f)| (f, k)).collect();
    let lookup_obj = |s: Subset| obj_id.get(&s).copied().unwrap_or(0);
    let lookup_mor = |f: &PartialBijection| mor_id.get(f).copied().unwrap_or(0);
    let mut compose = BTreeMap::new();
    for (a, f) in mors.iter().enumerate() {
        for (b, g) in mors.iter().enumerate() {
            if g.image() == f.domain() {
                if let Some(&c) = mor_id.get(&compose_pb(f, g).expect("same carrier")) {
                    compose.insert((a, b), c);
                }
            }
        }
    }
    let base = FiniteGroupoid {
        objects: objs.iter().map(|&s| fmt_subset(s)).collect(),
        morphisms: mors.iter().map(|f| f.to_string()).collect(),
        source: mors.iter().map(|f| lookup_obj(f.domain())).collect(),
        target: mors.iter().map(|f| lookup_obj(f.image())).collect(),
        unit: objs.iter().map(|&s| lookup_mor(&PartialBijection::identity(*n, s))).collect(),
        inverse: mors.iter().map(|f| lookup_mor(&f.inverse())).collect(),
        compose,
    };
    let order_objects = BitRelation::from_pairs(
        objs.len(),
        objs.len(),
        (0..objs.len()).flat_map(|a| (0..objs.len()).map(move |b| (a, b))).filter(|&(a, b)| objs[a] & !objs[b] == 0),
    );
    let order_morphisms = BitRelation::from_pairs(
        mors.len(),
        mors.len(),
        (0..mors.len()).flat_map(|a| (0..mors.len()).map(move |b| (a, b))).filter(|&(a, b)| mors[a].le(&mors[b])),
    );
    Ok(OrderedGroupoid { base, order_objects, order_morphisms })
}
