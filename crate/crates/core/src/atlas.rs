//! Atlas data over a finite e-pos, concrete finite atlases, and the passage
//! between them.
//!
//! Ranges are materialized point sets; transitions are explicit tables
//! `V_j → V_i` keyed by `(i, j)`, optionally remembering the formula they were
//! evaluated from. Validators compare tables pointwise.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::algebra::{fmt_point, Algebra, Point};
use crate::dsl::{Atom, GluingFile, MapSpec, Mode, Predicate};
use crate::exec::Exec;
use crate::groupoid::{validate_epos, EPos, Index};
use crate::pseudogroup::{PartialBijection, Pseudogroup, Subset};
use crate::report::{check, ValidationReport};

/// Point sets larger than this are never enumerated from a predicate.
pub const ENUMERATION_BOUND: u128 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AtlasError {
    #[error("({0}, {1}) is not in E")]
    NotInE(String, String),
    #[error("algebra {0} is infinite")]
    Infinite(String),
    #[error("{0}")]
    Incompatible(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("carrier mismatch: pseudogroup on {0} points, model space has {1}")]
    CarrierMismatch(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Range {
    pub points: BTreeSet<Point>,
    /// Defining predicate, when there is one.
    pub pred: Option<Predicate>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TransitionSource {
    /// The table is this formula evaluated on `V_j`.
    Formula(MapSpec),
    /// The table inverts this formula, which maps `V_i` onto `V_j`.
    InverseOf(MapSpec),
    Table,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    /// `x ∈ V_j ↦ φ_ij(x) ∈ V_i`.
    pub table: BTreeMap<Point, Point>,
    pub source: TransitionSource,
}

/// Atlas data: ranges `V_i`, transitions `φ_ij` for `(i, j) ∈ E`, and the
/// meets `[i, j]` of condition (4), keyed with `i < j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GluingData {
    pub epos: EPos,
    pub algebra: Algebra,
    pub dim: usize,
    pub ranges: Vec<Range>,
    pub trans: BTreeMap<(Index, Index), Transition>,
    pub meets: BTreeMap<(Index, Index), Index>,
}

impl GluingData {
    pub fn range(&self, i: Index) -> &BTreeSet<Point> {
        &self.ranges[i.id()].points
    }

    pub fn name(&self, i: Index) -> &str {
        self.epos.name(i)
    }

    pub fn index(&self, name: &str) -> Option<Index> {
        self.epos.index_of(name).ok()
    }

    /// Index of `t|{t}` for a bare top-chart name `t`, or of `name` itself.
    pub fn resolve(&self, name: &str) -> Option<Index> {
        self.index(name).or_else(|| self.index(&format!("{name}|{{{name}}}")))
    }

    pub fn meet(&self, i: Index, j: Index) -> Option<Index> {
        if i == j {
            return Some(i);
        }
        self.meets.get(&(i.min(j), i.max(j))).copied()
    }

    pub fn seed_count(&self) -> usize {
        self.ranges.iter().map(|r| r.points.len()).sum()
    }
}

impl fmt::Display for GluingData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "algebra {} dim {} indices {}", self.algebra, self.dim, self.epos.len())?;
        for i in self.epos.indices() {
            write!(f, "index {} |V| = {}", self.name(i), self.range(i).len())?;
            if let Some(p) = &self.ranges[i.id()].pred {
                write!(f, " pred {p}")?;
            }
            writeln!(f)?;
        }
        for class in self.epos.classes() {
            let names: Vec<&str> = class.iter().map(|&i| self.name(i)).collect();
            writeln!(f, "class {}", names.join(" "))?;
        }
        for (a, b) in self.epos.covers() {
            writeln!(f, "cover {} < {}", self.name(a), self.name(b))?;
        }
        for (&(i, j), t) in &self.trans {
            if i == j {
                continue;
            }
            let how = match &t.source {
                TransitionSource::Formula(m) => m.to_string(),
                TransitionSource::InverseOf(m) => format!("inverse of {m}"),
                TransitionSource::Table => "table".to_string(),
            };
            writeln!(f, "map {} <- {}: {how}", self.name(i), self.name(j))?;
        }
        for (&(i, j), &k) in &self.meets {
            writeln!(f, "meet [{}, {}] = {}", self.name(i), self.name(j), self.name(k))?;
        }
        Ok(())
    }
}

/// `φ_ij : V_j → V_i` for `(i, j) ∈ E`.
pub fn transition_map(g: &GluingData, i: Index, j: Index) -> Result<&BTreeMap<Point, Point>, AtlasError> {
    if !g.epos.related(i, j) {
        return Err(AtlasError::NotInE(g.name(i).into(), g.name(j).into()));
    }
    g.trans
        .get(&(i, j))
        .map(|t| &t.table)
        .ok_or_else(|| AtlasError::NotInE(g.name(i).into(), g.name(j).into()))
}

/// All points of `A^dim` satisfying `pred`.
pub fn enumerate_range(alg: &Algebra, dim: usize, pred: &Predicate) -> Result<BTreeSet<Point>, AtlasError> {
    let size = alg
        .cardinality()
        .and_then(|c| c.checked_pow(dim as u32))
        .ok_or_else(|| AtlasError::Infinite(alg.to_string()))?;
    if size > ENUMERATION_BOUND {
        return Err(AtlasError::Unsupported(format!("{size} points exceed the enumeration bound")));
    }
    let pts = alg.enumerate_points(dim).map_err(|e| AtlasError::Infinite(e.to_string()))?;
    Ok(pts.into_iter().filter(|x| pred.holds(alg, x)).collect())
}

/// Meets `[i, j]` for `i < j` with a common upper bound and intersecting
/// ranges, found by search; pairs without a unique candidate are left out.
pub fn compute_meets(epos: &EPos, ranges: &[Range]) -> BTreeMap<(Index, Index), Index> {
    let mut out = BTreeMap::new();
    for i in epos.indices() {
        for j in epos.indices().filter(|&j| j > i) {
            if let Some(k) = unique_meet(epos, ranges, i, j).ok().flatten() {
                out.insert((i, j), k);
            }
        }
    }
    out
}

fn has_common_upper_bound(e: &EPos, i: Index, j: Index) -> bool {
    e.indices().any(|m| e.le(i, m) && e.le(j, m))
}

/// `Ok(None)` when condition (4) imposes nothing on `(i, j)`; otherwise the
/// unique candidate, or `Err(candidates)`.
fn unique_meet(e: &EPos, ranges: &[Range], i: Index, j: Index) -> Result<Option<Index>, Vec<Index>> {
    if !has_common_upper_bound(e, i, j) {
        return Ok(None);
    }
    let (vi, vj) = (&ranges[i.id()].points, &ranges[j.id()].points);
    let inter: BTreeSet<&Point> = vi.intersection(vj).collect();
    if inter.is_empty() {
        return Ok(None);
    }
    let cands: Vec<Index> = e
        .indices()
        .filter(|&k| e.le(k, i) && e.le(k, j))
        .filter(|&k| {
            let vk = &ranges[k.id()].points;
            vk.len() == inter.len() && vk.iter().all(|x| inter.contains(x))
        })
        .collect();
    match cands.as_slice() {
        [k] => Ok(Some(*k)),
        _ => Err(cands),
    }
}

pub fn validate_gluing_data(g: &GluingData) -> ValidationReport {
    validate_gluing_data_with(g, Exec::default())
}

/// E-pos laws followed by `CONDITION 1..4`, each with its first witness.
pub fn validate_gluing_data_with(g: &GluingData, exec: Exec) -> ValidationReport {
    let mut r = validate_epos(&g.epos);
    let e = &g.epos;
    let nm = |i: Index| g.name(i).to_string();
    if g.ranges.len() != e.len() {
        r.fail("CONDITION 1", format!("{} ranges for {} indices", g.ranges.len(), e.len()));
        return r;
    }

    check(&mut r, "CONDITION 1", || {
        let idx: Vec<Index> = e.indices().collect();
        let found = exec.find_first(idx.len(), |k| {
            let i = idx[k];
            let range = &g.ranges[i.id()];
            if let Some(x) = range.points.iter().find(|x| x.len() != g.dim || !x.iter().all(|c| g.algebra.contains(c))) {
                return Some(format!("V_{} contains {} outside A^{}", nm(i), fmt_point(x), g.dim));
            }
            let pred = range.pred.as_ref()?;
            if let Some(x) = range.points.iter().find(|x| !pred.holds(&g.algebra, x)) {
                return Some(format!("V_{} contains {} violating {pred}", nm(i), fmt_point(x)));
            }
            match enumerate_range(&g.algebra, g.dim, pred) {
                Ok(all) => all
                    .iter()
                    .find(|x| !range.points.contains(*x))
                    .map(|x| format!("V_{} is missing {} satisfying {pred}", nm(i), fmt_point(x))),
                Err(_) => None,
            }
        });
        found
    });

    check(&mut r, "CONDITION 2", || {
        if let Some((&(i, j), _)) = g.trans.iter().find(|((i, j), _)| i.id() >= e.len() || j.id() >= e.len() || !e.related(*i, *j)) {
            return Some(format!("transition ({}, {}) outside E", i.0, j.0));
        }
        let pairs: Vec<(Index, Index)> = e.equiv_pairs().collect();
        let pair_fail = exec.find_first(pairs.len(), |k| {
            let (i, j) = pairs[k];
            let Some(t) = g.trans.get(&(i, j)) else {
                return Some(format!("phi_{},{} missing", nm(i), nm(j)));
            };
            let (vi, vj) = (g.range(i), g.range(j));
            if let Some(x) = vj.iter().find(|x| !t.table.contains_key(*x)) {
                return Some(format!("phi_{},{} undefined at {} in V_{}", nm(i), nm(j), fmt_point(x), nm(j)));
            }
            if let Some(x) = t.table.keys().find(|x| !vj.contains(*x)) {
                return Some(format!("phi_{},{} defined at {} outside V_{}", nm(i), nm(j), fmt_point(x), nm(j)));
            }
            if let Some((x, y)) = t.table.iter().find(|(_, y)| !vi.contains(*y)) {
                return Some(format!("phi_{},{}({}) = {} outside V_{}", nm(i), nm(j), fmt_point(x), fmt_point(y), nm(i)));
            }
            let image: BTreeSet<&Point> = t.table.values().collect();
            if image.len() != t.table.len() || image.len() != vi.len() {
                return Some(format!("phi_{},{} is not a bijection V_{} -> V_{}", nm(i), nm(j), nm(j), nm(i)));
            }
            if i == j {
                if let Some(x) = t.table.iter().find(|(x, y)| x != y).map(|(x, _)| x) {
                    return Some(format!("phi_{},{} is not the identity at {}", nm(i), nm(i), fmt_point(x)));
                }
            }
            let back = g.trans.get(&(j, i))?;
            t.table
                .iter()
                .find(|(x, y)| back.table.get(*y) != Some(*x))
                .map(|(x, _)| format!("phi_{},{} is not inverse to phi_{},{} at {}", nm(j), nm(i), nm(i), nm(j), fmt_point(x)))
        });
        if pair_fail.is_some() {
            return pair_fail;
        }
        let triples: Vec<(Index, Index, Index)> = e
            .classes()
            .into_iter()
            .flat_map(|c| {
                let c2 = c.clone();
                c.clone()
                    .into_iter()
                    .flat_map(move |i| c2.clone().into_iter().map(move |j| (i, j)))
                    .flat_map(move |(i, j)| c.clone().into_iter().map(move |k| (i, j, k)))
                    .collect::<Vec<_>>()
            })
            .collect();
        exec.find_first(triples.len(), |n| {
            let (i, j, k) = triples[n];
            let (ij, jk, ik) = (&g.trans[&(i, j)].table, &g.trans[&(j, k)].table, &g.trans[&(i, k)].table);
            g.range(k).iter().find_map(|x| {
                let lhs = jk.get(x).and_then(|y| ij.get(y));
                (lhs != ik.get(x)).then(|| {
                    format!("cocycle phi_{},{} o phi_{},{} != phi_{},{} at {}", nm(i), nm(j), nm(j), nm(k), nm(i), nm(k), fmt_point(x))
                })
            })
        })
    });

    check(&mut r, "CONDITION 3", || {
        for (a, b) in e.order().pairs() {
            let (lo, hi) = (Index(a as u32), Index(b as u32));
            if let Some(x) = g.range(lo).iter().find(|x| !g.range(hi).contains(*x)) {
                return Some(format!("{} <= {} but {} in V_{} not in V_{}", nm(lo), nm(hi), fmt_point(x), nm(lo), nm(hi)));
            }
        }
        let pairs: Vec<(Index, Index)> = e.equiv_pairs().collect();
        exec.find_first(pairs.len(), |k| {
            let (i, j) = pairs[k];
            let big = g.trans.get(&(i, j))?;
            for (i2, j2) in pairs.iter().copied().filter(|&(i2, j2)| e.le(i2, i) && e.le(j2, j) && (i2, j2) != (i, j)) {
                let small = g.trans.get(&(i2, j2))?;
                if let Some(x) = g.range(j2).iter().find(|x| small.table.get(*x) != big.table.get(*x)) {
                    return Some(format!(
                        "phi_{},{} != phi_{},{} at {}",
                        nm(i2), nm(j2), nm(i), nm(j), fmt_point(x)
                    ));
                }
            }
            None
        })
    });

    check(&mut r, "CONDITION 4", || {
        for (&(i, j), &k) in &g.meets {
            let bad_key = i >= j || j.id() >= e.len() || k.id() >= e.len();
            if bad_key {
                return Some(format!("malformed meet entry ({}, {}) -> {}", i.0, j.0, k.0));
            }
        }
        for i in e.indices() {
            for j in e.indices().filter(|&j| j >= i) {
                match unique_meet(e, &g.ranges, i, j) {
                    Ok(None) => {
                        if let Some(&k) = g.meets.get(&(i, j)) {
                            return Some(format!("stored meet [{}, {}] = {} is not required", nm(i), nm(j), nm(k)));
                        }
                    }
                    Ok(Some(k)) => {
                        if i != j && g.meets.get(&(i, j)) != Some(&k) {
                            let stored = g.meets.get(&(i, j)).map(|&s| nm(s)).unwrap_or_else(|| "missing".into());
                            return Some(format!("[{}, {}] should be {} but is {stored}", nm(i), nm(j), nm(k)));
                        }
                    }
                    Err(c) => {
                        let names: Vec<String> = c.iter().map(|&k| nm(k)).collect();
                        return Some(format!(
                            "[{}, {}] has {} candidates {{{}}}",
                            nm(i), nm(j), c.len(), names.join(",")
                        ));
                    }
                }
            }
        }
        None
    });
    r
}

/// A chart of a finite set `M = {0, .., m-1}`: a bijection from `U ⊆ M` onto
/// `V ⊆ A^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    pub name: String,
    pub map: BTreeMap<usize, Point>,
}

impl Chart {
    pub fn domain(&self) -> BTreeSet<usize> {
        self.map.keys().copied().collect()
    }

    pub fn range(&self) -> BTreeSet<Point> {
        self.map.values().cloned().collect()
    }

    /// `self ≤ other`: the domain is contained and the maps agree on it.
    pub fn restricts(&self, other: &Chart) -> bool {
        self.map.iter().all(|(x, p)| other.map.get(x) == Some(p))
    }

    pub fn restrict(&self, dom: &BTreeSet<usize>) -> BTreeMap<usize, Point> {
        self.map.iter().filter(|(x, _)| dom.contains(x)).map(|(x, p)| (*x, p.clone())).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcreteAtlas {
    pub carrier: usize,
    pub algebra: Algebra,
    pub dim: usize,
    pub charts: Vec<Chart>,
}

fn fmt_set(s: &BTreeSet<usize>) -> String {
    let parts: Vec<String> = s.iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

impl ConcreteAtlas {
    pub fn chart_named(&self, name: &str) -> Option<usize> {
        self.charts.iter().position(|c| c.name == name)
    }

    /// Conditions (1) no repetition, (2) covering, (3) intersection and
    /// restriction, plus injectivity of every chart.
    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::new();
        check(&mut r, "CHARTS", || {
            for c in &self.charts {
                if c.map.is_empty() {
                    return Some(format!("chart {} is empty", c.name));
                }
                if let Some(x) = c.map.keys().find(|&&x| x >= self.carrier) {
                    return Some(format!("chart {} is defined at {x} outside M", c.name));
                }
                if c.range().len() != c.map.len() {
                    return Some(format!("chart {} is not injective", c.name));
                }
                if let Some(p) = c.map.values().find(|p| p.len() != self.dim || !p.iter().all(|e| self.algebra.contains(e))) {
                    return Some(format!("chart {} takes value {} outside A^{}", c.name, fmt_point(p), self.dim));
                }
            }
            None
        });
        check(&mut r, "CONDITION 1", || {
            for (a, c) in self.charts.iter().enumerate() {
                if let Some(d) = self.charts[..a].iter().find(|d| d.map == c.map) {
                    return Some(format!("charts {} and {} coincide", d.name, c.name));
                }
            }
            None
        });
        check(&mut r, "CONDITION 2", || {
            let covered: BTreeSet<usize> = self.charts.iter().flat_map(|c| c.map.keys().copied()).collect();
            (0..self.carrier).find(|x| !covered.contains(x)).map(|x| format!("{x} is not covered"))
        });
        check(&mut r, "CONDITION 3", || self.condition_3_witness());
        r
    }

    fn condition_3_witness(&self) -> Option<String> {
        for ci in &self.charts {
            for cj in &self.charts {
                let inter: BTreeSet<usize> = ci.domain().intersection(&cj.domain()).copied().collect();
                if inter.is_empty() {
                    continue;
                }
                let want = ci.restrict(&inter);
                if !self.charts.iter().any(|ck| ck.map == want) {
                    return Some(format!(
                        "no chart equals {} restricted to U_{} ∩ U_{} = {}",
                        ci.name, ci.name, cj.name, fmt_set(&inter)
                    ));
                }
            }
        }
        None
    }
}

/// Checks (3'): every point of `U_i ∩ U_j` lies in some `U_k ⊆ U_i ∩ U_j`
/// with `φ_k = φ_i` on `U_k`. Notes whether the stronger (3) holds as well.
pub fn check_condition_3prime(a: &ConcreteAtlas) -> ValidationReport {
    let mut r = ValidationReport::new();
    check(&mut r, "CONDITION 3'", || {
        for ci in &a.charts {
            for cj in &a.charts {
                let inter: BTreeSet<usize> = ci.domain().intersection(&cj.domain()).copied().collect();
                for &x in &inter {
                    let ok = a
                        .charts
                        .iter()
                        .any(|ck| ck.map.contains_key(&x) && ck.map.keys().all(|y| inter.contains(y)) && ck.restricts(ci));
                    if !ok {
                        return Some(format!("{x} in U_{} ∩ U_{} has no restricted chart", ci.name, cj.name));
                    }
                }
            }
        }
        None
    });
    let strong = a.condition_3_witness().is_none();
    r.note(format!("condition (3) {}", if strong { "also holds" } else { "does not hold" }));
    r
}

/// E from equal domains, L from chart inclusion, `φ_ij = φ_i ∘ φ_j⁻¹`, meets
/// by search. Fails with the atlas report when (1)(2)(3) do not hold.
pub fn extract_gluing_data(a: &ConcreteAtlas) -> Result<GluingData, Box<ValidationReport>> {
    let report = a.validate();
    if !report.is_valid() {
        return Err(Box::new(report));
    }
    let n = a.charts.len();
    let idx = |k: usize| Index(k as u32);
    let mut equiv = Vec::new();
    let mut order = Vec::new();
    for (p, cp) in a.charts.iter().enumerate() {
        for (q, cq) in a.charts.iter().enumerate() {
            if cp.domain() == cq.domain() {
                equiv.push((idx(p), idx(q)));
            }
            if cp.restricts(cq) {
                order.push((idx(p), idx(q)));
            }
        }
    }
    let names = a.charts.iter().map(|c| c.name.clone()).collect();
    let epos = EPos::from_generators(names, equiv, order);
    let ranges: Vec<Range> = a.charts.iter().map(|c| Range { points: c.range(), pred: None }).collect();
    let mut trans = BTreeMap::new();
    for (i, j) in epos.equiv_pairs() {
        let (ci, cj) = (&a.charts[i.id()], &a.charts[j.id()]);
        let table = cj.map.iter().map(|(x, pj)| (pj.clone(), ci.map[x].clone())).collect();
        trans.insert((i, j), Transition { table, source: TransitionSource::Table });
    }
    debug_assert_eq!(epos.len(), n);
    let meets = compute_meets(&epos, &ranges);
    Ok(GluingData { epos, algebra: a.algebra.clone(), dim: a.dim, ranges, trans, meets })
}

/// Dense numbering of `A^n` for a finite algebra, used to view ranges and
/// transitions as subsets and partial bijections.
#[derive(Clone, Debug)]
pub struct PointIndex {
    pub points: Vec<Point>,
    ids: BTreeMap<Point, usize>,
}

impl PointIndex {
    pub fn new(alg: &Algebra, dim: usize) -> Result<Self, AtlasError> {
        let points = alg.enumerate_points(dim).map_err(|_| AtlasError::Infinite(alg.to_string()))?;
        let ids = points.iter().enumerate().map(|(k, p)| (p.clone(), k)).collect();
        Ok(Self { points, ids })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn id(&self, p: &Point) -> Option<usize> {
        self.ids.get(p).copied()
    }

    pub fn subset(&self, s: &BTreeSet<Point>) -> Subset {
        s.iter().filter_map(|p| self.id(p)).fold(0, |m, k| m | (1 << k))
    }

    pub fn bijection(&self, t: &BTreeMap<Point, Point>) -> Option<PartialBijection> {
        let pairs: Option<Vec<(usize, usize)>> = t.iter().map(|(x, y)| Some((self.id(x)?, self.id(y)?))).collect();
        PartialBijection::new(self.len(), pairs?).ok()
    }
}

/// Whether every range is an object and every transition a morphism of `p`,
/// a pseudogroup on the enumerated points of `A^n`.
pub fn check_type_g(g: &GluingData, p: &Pseudogroup) -> Result<bool, AtlasError> {
    let pts = PointIndex::new(&g.algebra, g.dim)?;
    if pts.len() != p.carrier() || pts.len() > 64 {
        return Err(AtlasError::CarrierMismatch(p.carrier(), pts.len()));
    }
    let ranges_ok = g.ranges.iter().all(|r| p.contains_object(pts.subset(&r.points)));
    let trans_ok = g
        .trans
        .values()
        .all(|t| pts.bijection(&t.table).is_some_and(|f| p.contains_morphism(&f)));
    Ok(ranges_ok && trans_ok)
}

struct KitMap {
    table: BTreeMap<Point, Point>,
    source: TransitionSource,
}

fn inverse_table(t: &BTreeMap<Point, Point>) -> Option<BTreeMap<Point, Point>> {
    let inv: BTreeMap<Point, Point> = t.iter().map(|(x, y)| (y.clone(), x.clone())).collect();
    (inv.len() == t.len()).then_some(inv)
}

fn invert_source(s: &TransitionSource) -> TransitionSource {
    match s {
        TransitionSource::Formula(m) => TransitionSource::InverseOf(m.clone()),
        TransitionSource::InverseOf(m) => TransitionSource::Formula(m.clone()),
        TransitionSource::Table => TransitionSource::Table,
    }
}

fn conjunction(preds: &[&Predicate]) -> Predicate {
    let atoms: Vec<Atom> = preds.iter().flat_map(|p| p.0.iter().cloned()).filter(|a| *a != Atom::True).collect();
    if atoms.is_empty() {
        Predicate::always()
    } else {
        Predicate(atoms)
    }
}

/// Name of the index `(t, S)`: `t|{s1,s2,..}` in chart order.
pub fn cocycle_index_name(charts: &[String], t: usize, s: u64) -> String {
    let members: Vec<&str> = (0..charts.len()).filter(|k| s & (1 << k) != 0).map(|k| charts[k].as_str()).collect();
    format!("{}|{{{}}}", charts[t], members.join(","))
}

/// Builds atlas data from a file: cocycle kits are expanded into the
/// `(t, S)` e-pos, epos-mode files are read as given.
pub fn gluing_data_from_file(kit: &GluingFile) -> Result<GluingData, AtlasError> {
    match kit.mode {
        Mode::Cocycle => generate_from_cocycle(kit),
        Mode::Epos => from_epos_file(kit),
    }
}

/// Expands a classical cocycle kit over a finite algebra into atlas data on
/// the indices `(t, S)`, `t ∈ S`, with nonempty `V_(t,S)`.
pub fn generate_from_cocycle(kit: &GluingFile) -> Result<GluingData, AtlasError> {
    if kit.mode != Mode::Cocycle {
        return Err(AtlasError::Invalid("kit is not in cocycle mode".into()));
    }
    let alg = &kit.algebra;
    let nc = kit.charts.len();
    if nc > 16 {
        return Err(AtlasError::Unsupported(format!("{nc} charts")));
    }
    let tops: Vec<BTreeSet<Point>> =
        kit.domains.iter().map(|p| enumerate_range(alg, kit.dim, p)).collect::<Result<_, _>>()?;
    let chart = |name: &str| kit.chart(name).expect("resolved by the parser");

    let mut maps: BTreeMap<(usize, usize), KitMap> = BTreeMap::new();
    for decl in &kit.maps {
        let (s, t) = (chart(&decl.from), chart(&decl.to));
        if s == t {
            return Err(AtlasError::Invalid(format!("map {}->{} from a chart to itself", decl.from, decl.to)));
        }
        let mut table = BTreeMap::new();
        for x in tops[s].iter().filter(|x| decl.domain.holds(alg, x)) {
            let y = decl.map.eval(alg, x).map_err(|e| {
                AtlasError::Incompatible(format!("map {}->{} undefined at {}: {e}", decl.from, decl.to, fmt_point(x)))
            })?;
            if !tops[t].contains(&y) {
                return Err(AtlasError::Incompatible(format!(
                    "map {}->{} sends {} to {} outside chart {}",
                    decl.from, decl.to, fmt_point(x), fmt_point(&y), decl.to
                )));
            }
            table.insert(x.clone(), y);
        }
        maps.insert((s, t), KitMap { table, source: TransitionSource::Formula(decl.map.clone()) });
    }
    let declared: Vec<(usize, usize)> = maps.keys().copied().collect();
    for (s, t) in declared {
        let fwd = &maps[&(s, t)];
        let inv = inverse_table(&fwd.table).ok_or_else(|| {
            AtlasError::Incompatible(format!("map {}->{} is not injective", kit.charts[s], kit.charts[t]))
        })?;
        match maps.get(&(t, s)) {
            Some(back) => {
                if let Some((y, x)) = inv.iter().find(|(y, x)| back.table.get(*y) != Some(*x)) {
                    return Err(AtlasError::Incompatible(format!(
                        "maps {0}->{1} and {1}->{0} are not inverse: {2} -> {3}",
                        kit.charts[s], kit.charts[t], fmt_point(x), fmt_point(y)
                    )));
                }
                if back.table.len() != inv.len() {
                    return Err(AtlasError::Incompatible(format!(
                        "maps {0}->{1} and {1}->{0} have mismatched domains",
                        kit.charts[s], kit.charts[t]
                    )));
                }
            }
            None => {
                let source = invert_source(&fwd.source);
                maps.insert((t, s), KitMap { table: inv, source });
            }
        }
    }
    for r in 0..nc {
        for t in (0..nc).filter(|&t| t != r) {
            for s in (0..nc).filter(|&s| s != r && s != t) {
                let (Some(rt), Some(rs)) = (maps.get(&(r, t)), maps.get(&(r, s))) else {
                    if let (Some(rt), Some(ts)) = (maps.get(&(r, t)), maps.get(&(t, s))) {
                        if let Some(x) = rt.table.iter().find(|(_, y)| ts.table.contains_key(*y)).map(|(x, _)| x) {
                            return Err(AtlasError::Incompatible(format!(
                                "{} lies in charts {}, {}, {} but no map {}->{}",
                                fmt_point(x), kit.charts[r], kit.charts[t], kit.charts[s], kit.charts[r], kit.charts[s]
                            )));
                        }
                    }
                    continue;
                };
                let ts = maps.get(&(t, s));
                for (x, y) in &rt.table {
                    let via = ts.and_then(|m| m.table.get(y));
                    let direct = rs.table.get(x);
                    if via.is_some() != direct.is_some() || (via.is_some() && via != direct) {
                        return Err(AtlasError::Incompatible(format!(
                            "cocycle {}->{}->{} fails at {}",
                            kit.charts[r], kit.charts[t], kit.charts[s], fmt_point(x)
                        )));
                    }
                }
            }
        }
    }

    let mut entries: Vec<(usize, u64, BTreeSet<Point>, Predicate)> = Vec::new();
    for t in 0..nc {
        for s in 0u64..(1 << nc) {
            if s & (1 << t) == 0 {
                continue;
            }
            let mut pts = tops[t].clone();
            let mut preds = vec![&kit.domains[t]];
            for other in (0..nc).filter(|&o| o != t && s & (1 << o) != 0) {
                match maps.get(&(t, other)) {
                    Some(m) => pts.retain(|x| m.table.contains_key(x)),
                    None => pts.clear(),
                }
                if let Some(d) = kit.map(&kit.charts[t], &kit.charts[other]) {
                    preds.push(&d.domain);
                }
            }
            if !pts.is_empty() {
                let exact = (0..nc)
                    .filter(|&o| o != t && s & (1 << o) != 0)
                    .all(|o| kit.map(&kit.charts[t], &kit.charts[o]).is_some());
                let pred = conjunction(&preds);
                entries.push((t, s, pts, if exact { pred } else { Predicate(vec![]) }));
            }
        }
    }
    let names: Vec<String> = entries.iter().map(|(t, s, _, _)| cocycle_index_name(&kit.charts, *t, *s)).collect();
    let mut equiv = Vec::new();
    let mut order = Vec::new();
    for (a, ea) in entries.iter().enumerate() {
        for (b, eb) in entries.iter().enumerate() {
            if ea.1 == eb.1 {
                equiv.push((Index(a as u32), Index(b as u32)));
            }
            if ea.0 == eb.0 && ea.1 & eb.1 == eb.1 {
                order.push((Index(a as u32), Index(b as u32)));
            }
        }
    }
    let epos = EPos::from_generators(names, equiv, order);
    let ranges: Vec<Range> = entries
        .iter()
        .map(|(_, _, pts, pred)| Range { points: pts.clone(), pred: (!pred.0.is_empty()).then(|| pred.clone()) })
        .collect();
    let mut trans = BTreeMap::new();
    for (i, j) in epos.equiv_pairs() {
        let (ti, tj) = (entries[i.id()].0, entries[j.id()].0);
        let vj = &ranges[j.id()].points;
        let transition = if ti == tj {
            Transition {
                table: vj.iter().map(|x| (x.clone(), x.clone())).collect(),
                source: TransitionSource::Formula(MapSpec::identity(kit.dim)),
            }
        } else {
            let m = &maps[&(tj, ti)];
            Transition {
                table: vj.iter().map(|x| (x.clone(), m.table[x].clone())).collect(),
                source: m.source.clone(),
            }
        };
        trans.insert((i, j), transition);
    }
    let meets = compute_meets(&epos, &ranges);
    Ok(GluingData { epos, algebra: alg.clone(), dim: kit.dim, ranges, trans, meets })
}

fn from_epos_file(kit: &GluingFile) -> Result<GluingData, AtlasError> {
    let decl = kit.epos.as_ref().ok_or_else(|| AtlasError::Invalid("missing [epos] section".into()))?;
    let alg = &kit.algebra;
    let idx = |name: &str| Index(kit.chart(name).expect("resolved by the parser") as u32);
    let epos = EPos::from_generators(
        kit.charts.clone(),
        decl.equiv.iter().map(|(a, b)| (idx(a), idx(b))),
        decl.order.iter().map(|(a, b)| (idx(a), idx(b))),
    );
    let ranges: Vec<Range> = kit
        .domains
        .iter()
        .map(|p| Ok(Range { points: enumerate_range(alg, kit.dim, p)?, pred: Some(p.clone()) }))
        .collect::<Result<_, AtlasError>>()?;
    let eval_table = |decl: &crate::dsl::MapDecl, from: Index| -> Result<BTreeMap<Point, Point>, AtlasError> {
        ranges[from.id()]
            .points
            .iter()
            .filter(|x| decl.domain.holds(alg, x))
            .map(|x| {
                let y = decl.map.eval(alg, x).map_err(|e| {
                    AtlasError::Incompatible(format!("map {}->{} undefined at {}: {e}", decl.from, decl.to, fmt_point(x)))
                })?;
                Ok((x.clone(), y))
            })
            .collect()
    };
    let mut trans = BTreeMap::new();
    for (i, j) in epos.equiv_pairs() {
        let (ni, nj) = (epos.name(i), epos.name(j));
        let t = if let Some(d) = kit.map(nj, ni) {
            Transition { table: eval_table(d, j)?, source: TransitionSource::Formula(d.map.clone()) }
        } else if let Some(d) = kit.map(ni, nj) {
            let table = inverse_table(&eval_table(d, i)?)
                .ok_or_else(|| AtlasError::Incompatible(format!("map {ni}->{nj} is not injective")))?;
            Transition { table, source: TransitionSource::InverseOf(d.map.clone()) }
        } else if i == j {
            Transition {
                table: ranges[i.id()].points.iter().map(|x| (x.clone(), x.clone())).collect(),
                source: TransitionSource::Formula(MapSpec::identity(kit.dim)),
            }
        } else {
            return Err(AtlasError::Invalid(format!("no map between {ni} and {nj}")));
        };
        trans.insert((i, j), t);
    }
    for m in &kit.maps {
        if !epos.related(idx(&m.from), idx(&m.to)) {
            return Err(AtlasError::Invalid(format!("map {}->{} joins indices that are not in E", m.from, m.to)));
        }
    }
    let meets = compute_meets(&epos, &ranges);
    Ok(GluingData { epos, algebra: alg.clone(), dim: kit.dim, ranges, trans, meets })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Elem;
    use crate::dsl::parse_gluing_file;

    const PLANE_F5: &str = "\
[model]
algebra = Fp:5
dim = 2

[charts]
ids = 0 1 2

[map.1->0]
domain = invertible(u)
map = (inv(u), inv(u)*v)

[map.2->0]
domain = invertible(v)
map = (inv(v)*u, inv(v))

[map.2->1]
domain = invertible(u)
map = (inv(u)*v, inv(u))
";

    fn pt(xs: &[u64]) -> Point {
        xs.iter().map(|&x| Elem::Mod(x)).collect()
    }

    #[test]
    fn plane_generates_twelve_indices() {
        let g = generate_from_cocycle(&parse_gluing_file(PLANE_F5).unwrap()).unwrap();
        assert_eq!(g.epos.len(), 12);
        let r = validate_gluing_data(&g);
        assert!(r.is_valid(), "{r}");
        for law in ["CONDITION 1", "CONDITION 2", "CONDITION 3", "CONDITION 4"] {
            assert!(r.checked(law));
        }
    }

    #[test]
    fn middle_transition_evaluates_formula() {
        let g = generate_from_cocycle(&parse_gluing_file(PLANE_F5).unwrap()).unwrap();
        let i = g.index("0|{0,1}").unwrap();
        let j = g.index("1|{0,1}").unwrap();
        assert_eq!(transition_map(&g, i, j).unwrap()[&pt(&[2, 3])], pt(&[3, 4]));
        let top = g.index("0|{0}").unwrap();
        let other = g.index("1|{1}").unwrap();
        assert!(matches!(transition_map(&g, top, other), Err(AtlasError::NotInE(..))));
        let id = transition_map(&g, top, top).unwrap();
        assert!(id.iter().all(|(x, y)| x == y));
    }

    #[test]
    fn swapped_components_break_the_cocycle() {
        let text = PLANE_F5.replace("map = (inv(u)*v, inv(u))", "map = (inv(u), inv(u)*v)");
        let kit = parse_gluing_file(&text).unwrap();
        assert!(matches!(generate_from_cocycle(&kit), Err(AtlasError::Incompatible(_))));

        let mut g = generate_from_cocycle(&parse_gluing_file(PLANE_F5).unwrap()).unwrap();
        let (i, j) = (g.index("1|{0,1,2}").unwrap(), g.index("2|{0,1,2}").unwrap());
        let t = g.trans.get_mut(&(i, j)).unwrap();
        for y in t.table.values_mut() {
            y.swap(0, 1);
        }
        let r = validate_gluing_data(&g);
        assert!(r.violation("CONDITION 2").is_some(), "{r}");
    }

    #[test]
    fn single_chart_data_is_valid() {
        let kit = parse_gluing_file("[model]\nalgebra = Fp:3\ndim = 1\n[charts]\nids = e\n").unwrap();
        let g = generate_from_cocycle(&kit).unwrap();
        assert_eq!(g.epos.len(), 1);
        assert!(validate_gluing_data(&g).is_valid());
    }

    fn sphere_atlas() -> ConcreteAtlas {
        let f5 = Algebra::Prime(5);
        let chart = |name: &str, pairs: &[(usize, u64)]| Chart {
            name: name.into(),
            map: pairs.iter().map(|&(x, v)| (x, vec![Elem::Mod(v)])).collect(),
        };
        ConcreteAtlas {
            carrier: 4,
            algebra: f5,
            dim: 1,
            charts: vec![
                chart("n", &[(0, 0), (1, 1), (2, 2)]),
                chart("s", &[(1, 4), (2, 3), (3, 0)]),
                chart("n_s", &[(1, 1), (2, 2)]),
                chart("s_n", &[(1, 4), (2, 3)]),
            ],
        }
    }

    #[test]
    fn extraction_gives_sphere_epos() {
        let a = sphere_atlas();
        assert!(a.validate().is_valid());
        let g = extract_gluing_data(&a).unwrap();
        assert_eq!(g.epos.len(), 4);
        assert_eq!(g.epos.classes().len(), 3);
        assert!(validate_gluing_data(&g).is_valid());
        let r = check_condition_3prime(&a);
        assert!(r.is_valid());
        assert!(r.notes()[0].contains("also holds"));
    }

    #[test]
    fn missing_intersection_chart_is_reported() {
        let mut a = sphere_atlas();
        a.charts.truncate(3);
        let err = extract_gluing_data(&a).unwrap_err();
        assert!(err.violation("CONDITION 3").is_some());
    }

    #[test]
    fn disjoint_charts_satisfy_3prime() {
        let mut a = sphere_atlas();
        a.charts = vec![a.charts[0].clone()];
        a.charts[0].map.remove(&1);
        a.charts[0].map.remove(&2);
        a.charts.push(Chart { name: "t".into(), map: [(3, vec![Elem::Mod(1)])].into_iter().collect() });
        a.carrier = 4;
        assert!(check_condition_3prime(&a).is_valid());
    }

    #[test]
    fn type_g_membership() {
        let kit = parse_gluing_file(&PLANE_F5.replace("Fp:5", "Fp:2")).unwrap();
        let g = generate_from_cocycle(&kit).unwrap();
        assert!(check_type_g(&g, &Pseudogroup::full(4)).unwrap());
        assert!(check_type_g(&g, &Pseudogroup::full(5)).is_err());
        let full = crate::pseudogroup::full_pseudogroup(4).unwrap();
        let Pseudogroup::Explicit { n, mut objects, morphisms } = full else { unreachable!() };
        let pts = PointIndex::new(&g.algebra, 2).unwrap();
        objects.remove(&pts.subset(&g.ranges[g.index("0|{0,1}").unwrap().id()].points));
        assert!(!check_type_g(&g, &Pseudogroup::Explicit { n, objects, morphisms }).unwrap());
    }

    #[test]
    fn epos_mode_file() {
        let text = "\
[model]
algebra = Fp:3
dim = 1
mode = epos

[charts]
ids = n s n_s s_n

[domain.n_s]
pred = invertible(u)

[domain.s_n]
pred = invertible(u)

[map.n_s->s_n]
map = inv(u)

[epos]
equiv = n_s~s_n
order = n_s<n, s_n<s
";
        let kit = parse_gluing_file(text).unwrap();
        let g = gluing_data_from_file(&kit).unwrap();
        assert_eq!(g.epos.classes().len(), 3);
        let r = validate_gluing_data(&g);
        assert!(r.is_valid(), "{r}");
        assert!(matches!(g.trans[&(Index(2), Index(3))].source, TransitionSource::InverseOf(_)));
    }

    #[test]
    fn meet_mutations_are_caught() {
        let mut g = generate_from_cocycle(&parse_gluing_file(PLANE_F5).unwrap()).unwrap();
        let key = *g.meets.keys().next().unwrap();
        let k = g.meets.remove(&key).unwrap();
        assert!(validate_gluing_data(&g).violation("CONDITION 4").is_some());
        g.meets.insert(key, Index((k.0 + 1) % 12));
        assert!(validate_gluing_data(&g).violation("CONDITION 4").is_some());
    }
}
