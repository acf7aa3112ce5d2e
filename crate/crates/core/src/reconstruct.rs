//! Gluing atlas data into a finite set with charts, tangent-style transport
//! through dual numbers, and maximal atlases.
//!
//! A seed is a pair `(x, i)` with `x ∈ V_i`. Seeds are numbered densely: index
//! by index in id order, points in ascending order within each range.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::{fmt_point, Algebra, Elem, Point};
use crate::atlas::{
    check_condition_3prime, validate_gluing_data_with, AtlasError, Chart, ConcreteAtlas, GluingData, PointIndex, Range,
    Transition, TransitionSource,
};
use crate::bitrel::BitRelation;
use crate::exec::Exec;
use crate::groupoid::Index;
use crate::pseudogroup::{bijections_from, members, PartialBijection, Pseudogroup};
use crate::report::{check, ValidationReport};

/// Largest carrier accepted by [`maximal_atlas`].
pub const DEFAULT_MAXIMAL_BOUND: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReconstructError {
    #[error("invalid gluing data:\n{0}")]
    Invalid(Box<ValidationReport>),
    #[error(transparent)]
    Atlas(#[from] AtlasError),
    #[error("{size} points exceed the bound {bound}")]
    TooLarge { size: usize, bound: usize },
}

/// A disjoint-set forest with path halving and union by size.
struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}

/// Dense numbering of the seeds `(x, i)` of some atlas data.
#[derive(Clone, Debug)]
pub struct Seeds {
    points: Vec<Vec<Point>>,
    offsets: Vec<usize>,
}

impl Seeds {
    pub fn new(g: &GluingData) -> Self {
        let points: Vec<Vec<Point>> = g.ranges.iter().map(|r| r.points.iter().cloned().collect()).collect();
        let mut offsets = Vec::with_capacity(points.len() + 1);
        let mut acc = 0;
        for p in &points {
            offsets.push(acc);
            acc += p.len();
        }
        offsets.push(acc);
        Self { points, offsets }
    }

    pub fn len(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn id(&self, i: Index, x: &Point) -> Option<usize> {
        let k = self.points.get(i.id())?.binary_search(x).ok()?;
        Some(self.offsets[i.id()] + k)
    }

    pub fn seed(&self, s: usize) -> (Index, &Point) {
        let i = self.offsets.partition_point(|&o| o <= s) - 1;
        (Index(i as u32), &self.points[i][s - self.offsets[i]])
    }

    pub fn of_index(&self, i: Index) -> std::ops::Range<usize> {
        self.offsets[i.id()]..self.offsets[i.id() + 1]
    }
}

fn fmt_seed(g: &GluingData, i: Index, x: &Point) -> String {
    format!("({}, {})", fmt_point(x), g.name(i))
}

/// The quotient `M = S/∼` with its charts `φ_i([x, i]) = x`.
#[derive(Clone, Debug)]
pub struct ManifoldModel {
    pub source: Arc<GluingData>,
    seeds: Seeds,
    class_of: Vec<usize>,
    reps: Vec<(Point, Index)>,
    charts: Vec<BTreeMap<usize, Point>>,
}

impl ManifoldModel {
    pub fn count_points(&self) -> usize {
        self.reps.len()
    }

    pub fn seeds(&self) -> &Seeds {
        &self.seeds
    }

    /// The class `[x, i]`.
    pub fn class(&self, i: Index, x: &Point) -> Option<usize> {
        self.seeds.id(i, x).map(|s| self.class_of[s])
    }

    pub fn class_of_seed(&self, s: usize) -> usize {
        self.class_of[s]
    }

    /// Least seed `(x, i)` of a class, ordered by point then index.
    pub fn representative(&self, c: usize) -> (&Point, Index) {
        let (x, i) = &self.reps[c];
        (x, *i)
    }

    /// `φ_i : U_i → V_i`.
    pub fn chart_map(&self, i: Index) -> &BTreeMap<usize, Point> {
        &self.charts[i.id()]
    }

    /// `U_i` as a set of classes.
    pub fn chart_domain(&self, i: Index) -> BTreeSet<usize> {
        self.charts[i.id()].keys().copied().collect()
    }

    pub fn fmt_class(&self, c: usize) -> String {
        let (x, i) = self.representative(c);
        fmt_seed(&self.source, i, x)
    }

    /// The model as a concrete atlas on `{0, .., |M|-1}`.
    pub fn to_atlas(&self) -> ConcreteAtlas {
        let g = &self.source;
        ConcreteAtlas {
            carrier: self.count_points(),
            algebra: g.algebra.clone(),
            dim: g.dim,
            charts: g
                .epos
                .indices()
                .map(|i| Chart { name: g.name(i).to_string(), map: self.charts[i.id()].clone() })
                .collect(),
        }
    }

    /// Deterministic dump: one line per class with its least seed.
    pub fn dump(&self) -> String {
        let mut out = format!("points {}\n", self.count_points());
        for c in 0..self.count_points() {
            out.push_str(&format!("{c} {}\n", self.fmt_class(c)));
        }
        out
    }
}

impl fmt::Display for ManifoldModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}

/// Validates and glues.
pub fn glue(g: &GluingData) -> Result<ManifoldModel, ReconstructError> {
    glue_with(g, Exec::default())
}

pub fn glue_with(g: &GluingData, exec: Exec) -> Result<ManifoldModel, ReconstructError> {
    let r = validate_gluing_data_with(g, exec);
    if !r.is_valid() {
        return Err(ReconstructError::Invalid(Box::new(r)));
    }
    Ok(glue_unchecked(g, exec))
}

/// Generating pairs of `∼`: `(φ_ij(y), i) ∼ (y, j)` for `(i, j) ∈ E` and
/// `(x, i') ∼ (x, i)` for `i' ≤ i`.
fn generating_pairs(g: &GluingData, seeds: &Seeds, exec: Exec) -> Vec<(usize, usize)> {
    let epairs: Vec<(Index, Index)> = g.epos.equiv_pairs().filter(|(i, j)| i != j).collect();
    let lpairs: Vec<(Index, Index)> = g
        .epos
        .order()
        .pairs()
        .filter(|(a, b)| a != b)
        .map(|(a, b)| (Index(a as u32), Index(b as u32)))
        .collect();
    let mut out: Vec<(usize, usize)> = exec
        .map(&epairs, |&(i, j)| {
            let Some(t) = g.trans.get(&(i, j)) else { return Vec::new() };
            t.table
                .iter()
                .filter_map(|(y, x)| Some((seeds.id(i, x)?, seeds.id(j, y)?)))
                .collect::<Vec<_>>()
        })
        .into_iter()
        .flatten()
        .collect();
    out.extend(
        exec.map(&lpairs, |&(lo, hi)| {
            g.range(lo).iter().filter_map(|x| Some((seeds.id(lo, x)?, seeds.id(hi, x)?))).collect::<Vec<_>>()
        })
        .into_iter()
        .flatten(),
    );
    out
}

/// Glues without validating first; on invalid data the classes are those of
/// the closure of the generating pairs.
pub fn glue_unchecked(g: &GluingData, exec: Exec) -> ManifoldModel {
    let seeds = Seeds::new(g);
    let n = seeds.len();
    let mut uf = UnionFind::new(n);
    for (a, b) in generating_pairs(g, &seeds, exec) {
        uf.union(a, b);
    }
    let mut best: BTreeMap<usize, (Point, Index)> = BTreeMap::new();
    for s in 0..n {
        let root = uf.find(s);
        let (i, x) = seeds.seed(s);
        let key = (x.clone(), i);
        best.entry(root).and_modify(|b| if key < *b { *b = key.clone() }).or_insert(key);
    }
    let mut order: Vec<(Point, Index, usize)> = best.into_iter().map(|(root, (x, i))| (x, i, root)).collect();
    order.sort();
    let class_by_root: BTreeMap<usize, usize> = order.iter().enumerate().map(|(c, (_, _, r))| (*r, c)).collect();
    let class_of: Vec<usize> = (0..n).map(|s| class_by_root[&uf.find(s)]).collect();
    let reps = order.into_iter().map(|(x, i, _)| (x, i)).collect();
    let mut charts = vec![BTreeMap::new(); g.epos.len()];
    for (s, &c) in class_of.iter().enumerate() {
        let (i, x) = seeds.seed(s);
        charts[i.id()].insert(c, x.clone());
    }
    ManifoldModel { source: Arc::new(g.clone()), seeds, class_of, reps, charts }
}

pub fn count_points(m: &ManifoldModel) -> usize {
    m.count_points()
}

/// The relation `∼` computed directly from its definition (no closure):
/// `(x, i) ∼ (y, j)` iff some `i' ≤ i`, `j' ≤ j` with `(i', j') ∈ E` have
/// `x ∈ V_i'`, `y ∈ V_j'`, `φ_i'j'(y) = x`.
pub fn direct_relation(g: &GluingData, exec: Exec) -> (Seeds, BitRelation) {
    let seeds = Seeds::new(g);
    let n = seeds.len();
    let e = &g.epos;
    // (i', j') ↦ { x ↦ [y : φ_i'j'(y) = x] }
    let preimages: BTreeMap<(Index, Index), BTreeMap<&Point, Vec<&Point>>> = g
        .trans
        .iter()
        .filter(|((i, j), _)| i.id() < e.len() && j.id() < e.len() && e.related(*i, *j))
        .map(|(&k, t)| {
            let mut m: BTreeMap<&Point, Vec<&Point>> = BTreeMap::new();
            for (y, x) in &t.table {
                m.entry(x).or_default().push(y);
            }
            (k, m)
        })
        .collect();
    let rows: Vec<Vec<usize>> = exec.map_range(n, |s| {
        let (i, x) = seeds.seed(s);
        let mut row = BTreeSet::new();
        for i2 in e.below(i) {
            if !g.range(i2).contains(x) {
                continue;
            }
            for j2 in e.class_of(i2) {
                let Some(ys) = preimages.get(&(i2, j2)).and_then(|m| m.get(x)) else { continue };
                for y in ys {
                    if !g.range(j2).contains(*y) {
                        continue;
                    }
                    for j in e.above(j2) {
                        if let Some(t) = seeds.id(j, y) {
                            row.insert(t);
                        }
                    }
                }
            }
        }
        row.into_iter().collect()
    });
    let rel = BitRelation::from_pairs(n, n, rows.into_iter().enumerate().flat_map(|(s, r)| r.into_iter().map(move |t| (s, t))));
    (seeds, rel)
}

pub fn relation_is_equivalence(g: &GluingData) -> ValidationReport {
    relation_is_equivalence_with(g, Exec::default())
}

/// Checks reflexivity, symmetry and transitivity of the directly defined
/// relation, and that union–find over the generators adds nothing to it.
pub fn relation_is_equivalence_with(g: &GluingData, exec: Exec) -> ValidationReport {
    let (seeds, rel) = direct_relation(g, exec);
    let n = seeds.len();
    let show = |s: usize| {
        let (i, x) = seeds.seed(s);
        fmt_seed(g, i, x)
    };
    let mut r = ValidationReport::new();
    check(&mut r, "REFLEXIVE", || (0..n).find(|&s| !rel.contains(s, s)).map(show));
    check(&mut r, "SYMMETRIC", || {
        rel.pairs().find(|&(a, b)| !rel.contains(b, a)).map(|(a, b)| format!("{} ~ {} only one way", show(a), show(b)))
    });
    check(&mut r, "TRANSITIVE", || {
        exec.find_first(n, |a| {
            for b in rel.row(a) {
                for c in rel.row(b) {
                    if !rel.contains(a, c) {
                        return Some(format!("{} ~ {} ~ {} but not {} ~ {}", show(a), show(b), show(c), show(a), show(c)));
                    }
                }
            }
            None
        })
    });
    check(&mut r, "CLOSURE", || {
        let m = glue_unchecked(g, exec);
        (0..n).find_map(|a| {
            let ca = m.class_of_seed(a);
            (0..n)
                .find(|&b| m.class_of_seed(b) == ca && !rel.contains(a, b))
                .map(|b| format!("union-find merges {} and {} without a direct witness", show(a), show(b)))
        })
    });
    r.note(format!("{} seeds, {} related pairs", n, rel.len()));
    r
}

/// `x ↦ φ_j([x, i])` on `V_i`; for `(i, j) ∈ E` this is `φ_ji`.
pub fn recovered_transition(m: &ManifoldModel, i: Index, j: Index) -> Result<BTreeMap<Point, Point>, AtlasError> {
    let g = &m.source;
    if !g.epos.related(i, j) {
        return Err(AtlasError::NotInE(g.name(i).into(), g.name(j).into()));
    }
    let phi_j = m.chart_map(j);
    g.range(i)
        .iter()
        .map(|x| {
            let c = m.class(i, x).expect("x in V_i");
            let y = phi_j
                .get(&c)
                .ok_or_else(|| AtlasError::Incompatible(format!("[{}, {}] is not in U_{}", fmt_point(x), g.name(i), g.name(j))))?;
            Ok((x.clone(), y.clone()))
        })
        .collect()
}

/// Chart bijectivity, `U_i = U_j` on E-pairs, recovered transitions and (3').
pub fn check_model(m: &ManifoldModel) -> ValidationReport {
    let g = &m.source;
    let mut r = ValidationReport::new();
    check(&mut r, "CHART_BIJECTIVE", || {
        g.epos
            .indices()
            .find(|&i| m.chart_map(i).len() != g.range(i).len())
            .map(|i| format!("x -> [x, {}] is not injective", g.name(i)))
    });
    check(&mut r, "E_DOMAINS", || {
        g.epos
            .equiv_pairs()
            .find(|&(i, j)| m.chart_domain(i) != m.chart_domain(j))
            .map(|(i, j)| format!("U_{} != U_{}", g.name(i), g.name(j)))
    });
    check(&mut r, "TRANSITIONS", || {
        for (i, j) in g.epos.equiv_pairs() {
            let rec = match recovered_transition(m, i, j) {
                Ok(t) => t,
                Err(e) => return Some(e.to_string()),
            };
            if let Some(x) = rec.iter().find(|(x, y)| g.trans[&(j, i)].table.get(*x) != Some(*y)).map(|(x, _)| x) {
                return Some(format!("phi_{} o phi_{}^-1 != phi_{},{} at {}", g.name(j), g.name(i), g.name(j), g.name(i), fmt_point(x)));
            }
        }
        None
    });
    r.extend(check_condition_3prime(&m.to_atlas()));
    r
}

/// Applies the dual-number functor chart-wise: `TV_i = {a + εb : a ∈ V_i}`,
/// `Tφ_ij` evaluates the same formula over `A[ε]`. Same e-pos and meets.
pub fn weil_transport(g: &GluingData) -> Result<GluingData, AtlasError> {
    let base = &g.algebra;
    let tangent = Algebra::dual(base.clone());
    let fibre = base.enumerate_points(g.dim).map_err(|_| AtlasError::Infinite(base.to_string()))?;
    let lift = |a: &Point| -> Vec<Point> {
        fibre
            .iter()
            .map(|b| a.iter().zip(b).map(|(x, y)| Elem::pair(x.clone(), y.clone())).collect())
            .collect()
    };
    let ranges: Vec<Range> = g
        .ranges
        .iter()
        .map(|r| Range { points: r.points.iter().flat_map(&lift).collect(), pred: None })
        .collect();
    let mut trans = BTreeMap::new();
    for (&(i, j), t) in &g.trans {
        let eval_on = |spec: &crate::dsl::MapSpec, k: Index| -> Result<BTreeMap<Point, Point>, AtlasError> {
            ranges[k.id()]
                .points
                .iter()
                .map(|x| {
                    let y = spec
                        .eval(&tangent, x)
                        .map_err(|e| AtlasError::Incompatible(format!("T{spec} undefined at {}: {e}", fmt_point(x))))?;
                    Ok((x.clone(), y))
                })
                .collect()
        };
        let table = match &t.source {
            TransitionSource::Formula(spec) => eval_on(spec, j)?,
            TransitionSource::InverseOf(spec) => {
                let fwd = eval_on(spec, i)?;
                let inv: BTreeMap<Point, Point> = fwd.into_iter().map(|(x, y)| (y, x)).collect();
                if inv.len() != ranges[i.id()].points.len() {
                    return Err(AtlasError::Incompatible(format!("T{spec} is not injective")));
                }
                inv
            }
            TransitionSource::Table => {
                return Err(AtlasError::Unsupported(format!(
                    "transition ({}, {}) is a bare table with no formula to transport",
                    g.name(i),
                    g.name(j)
                )))
            }
        };
        trans.insert((i, j), Transition { table, source: t.source.clone() });
    }
    Ok(GluingData { epos: g.epos.clone(), algebra: tangent, dim: g.dim, ranges, trans, meets: g.meets.clone() })
}

fn chart_label(map: &BTreeMap<usize, Point>) -> String {
    let parts: Vec<String> = map.iter().map(|(x, p)| format!("{x}->{}", fmt_point(p))).collect();
    format!("{{{}}}", parts.join(","))
}

/// The maximal `p`-atlas containing `a`: every bijection `φ : U → W` with
/// `U ⊆ M` nonempty, `W ∈ G₀`, and `φ_i ∘ φ⁻¹ ∈ G₁` on `φ(U ∩ U_i)` for all
/// charts `i` of `a`. `p` acts on the enumerated points of `A^n`.
pub fn maximal_atlas_of(a: &ConcreteAtlas, p: &Pseudogroup, bound: usize) -> Result<ConcreteAtlas, ReconstructError> {
    if a.carrier > bound {
        return Err(ReconstructError::TooLarge { size: a.carrier, bound });
    }
    let pts = PointIndex::new(&a.algebra, a.dim)?;
    if pts.len() != p.carrier() || pts.len() > 64 {
        return Err(AtlasError::CarrierMismatch(p.carrier(), pts.len()).into());
    }
    let nv = pts.len();
    let originals: Vec<BTreeMap<usize, usize>> = a
        .charts
        .iter()
        .map(|c| c.map.iter().map(|(x, q)| (*x, pts.id(q).expect("chart values lie in A^n"))).collect())
        .collect();
    let mut found: BTreeMap<BTreeMap<usize, Point>, String> = BTreeMap::new();
    for u in 1u64..(1 << a.carrier) {
        let dom: Vec<usize> = members(u).collect();
        // Injections U → A^n, encoded as partial bijections on the larger of
        // the two carriers and then read back pointwise.
        let width = nv.max(a.carrier);
        for inj in bijections_from(width, u) {
            if inj.pairs().iter().any(|&(_, y)| y >= nv) {
                continue;
            }
            let phi: BTreeMap<usize, usize> = inj.pairs().iter().copied().collect();
            let w = phi.values().fold(0u64, |m, &y| m | (1 << y));
            if !p.contains_object(w) {
                continue;
            }
            let compatible = originals.iter().all(|ci| {
                let pairs = dom.iter().filter_map(|x| Some((phi[x], *ci.get(x)?)));
                PartialBijection::new(nv, pairs).is_ok_and(|f| p.contains_morphism(&f))
            });
            if compatible {
                let map: BTreeMap<usize, Point> = phi.iter().map(|(x, y)| (*x, pts.points[*y].clone())).collect();
                let name = a
                    .charts
                    .iter()
                    .find(|c| c.map == map)
                    .map(|c| c.name.clone())
                    .unwrap_or_else(|| chart_label(&map));
                found.insert(map, name);
            }
        }
    }
    Ok(ConcreteAtlas {
        carrier: a.carrier,
        algebra: a.algebra.clone(),
        dim: a.dim,
        charts: found.into_iter().map(|(map, name)| Chart { name, map }).collect(),
    })
}

/// [`maximal_atlas_of`] applied to the charts of a glued model, with the
/// default carrier bound.
pub fn maximal_atlas(m: &ManifoldModel, p: &Pseudogroup) -> Result<ConcreteAtlas, ReconstructError> {
    maximal_atlas_of(&m.to_atlas(), p, DEFAULT_MAXIMAL_BOUND)
}

/// Whether two atlases have the same set of chart maps.
pub fn same_charts(a: &ConcreteAtlas, b: &ConcreteAtlas) -> bool {
    let sa: BTreeSet<&BTreeMap<usize, Point>> = a.charts.iter().map(|c| &c.map).collect();
    let sb: BTreeSet<&BTreeMap<usize, Point>> = b.charts.iter().map(|c| &c.map).collect();
    a.carrier == b.carrier && sa == sb
}

/// For an atlas `a` and the model glued from its extracted data, the map
/// `x ↦ [φ_i(x), i]`, checked to be independent of `i` and bijective.
pub fn atlas_isomorphism(a: &ConcreteAtlas, m: &ManifoldModel) -> Result<Vec<usize>, String> {
    let g = &m.source;
    let mut image: Vec<Option<usize>> = vec![None; a.carrier];
    for (k, c) in a.charts.iter().enumerate() {
        let i = g.index(&c.name).filter(|i| i.id() == k).ok_or_else(|| format!("chart {} has no index", c.name))?;
        for (x, p) in &c.map {
            let cls = m.class(i, p).ok_or_else(|| format!("{} not in V_{}", fmt_point(p), c.name))?;
            match image[*x] {
                Some(prev) if prev != cls => {
                    return Err(format!("{x} goes to {} via one chart and {} via {}", m.fmt_class(prev), m.fmt_class(cls), c.name))
                }
                _ => image[*x] = Some(cls),
            }
        }
    }
    let f: Vec<usize> = image
        .into_iter()
        .enumerate()
        .map(|(x, c)| c.ok_or_else(|| format!("{x} is not covered")))
        .collect::<Result<_, _>>()?;
    let distinct: BTreeSet<usize> = f.iter().copied().collect();
    if distinct.len() != f.len() || f.len() != m.count_points() {
        return Err(format!("{} points map onto {} of {} classes", f.len(), distinct.len(), m.count_points()));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::{extract_gluing_data, generate_from_cocycle};
    use crate::dsl::parse_gluing_file;
    use crate::pseudogroup::full_pseudogroup;

    fn kit(text: &str) -> GluingData {
        generate_from_cocycle(&parse_gluing_file(text).unwrap()).unwrap()
    }

    fn plane(p: u64) -> GluingData {
        kit(&format!(
            "[model]\nalgebra = Fp:{p}\ndim = 2\n[charts]\nids = 0 1 2\n\
             [map.1->0]\ndomain = invertible(u)\nmap = (inv(u), inv(u)*v)\n\
             [map.2->0]\ndomain = invertible(v)\nmap = (inv(v)*u, inv(v))\n\
             [map.2->1]\ndomain = invertible(u)\nmap = (inv(u)*v, inv(u))\n"
        ))
    }

    fn line(p: u64) -> GluingData {
        kit(&format!("[model]\nalgebra = Fp:{p}\ndim = 1\n[charts]\nids = 0 1\n[map.1->0]\ndomain = invertible(u)\nmap = inv(u)\n"))
    }

    fn doubled_origin(p: u64) -> GluingData {
        kit(&format!("[model]\nalgebra = Fp:{p}\ndim = 1\n[charts]\nids = 1 2\n[map.2->1]\ndomain = invertible(u)\nmap = u\n"))
    }

    #[test]
    fn plane_over_f2_has_seven_points() {
        let m = glue(&plane(2)).unwrap();
        assert_eq!(m.count_points(), 7);
        assert!(check_model(&m).is_valid());
    }

    #[test]
    fn plane_over_f3_has_thirteen_points() {
        assert_eq!(glue(&plane(3)).unwrap().count_points(), 13);
    }

    #[test]
    fn line_over_f7_has_eight_points() {
        assert_eq!(glue(&line(7)).unwrap().count_points(), 8);
    }

    #[test]
    fn doubled_origin_has_two_origins() {
        let g = doubled_origin(5);
        let m = glue(&g).unwrap();
        assert_eq!(m.count_points(), 6);
        let zero = vec![Elem::Mod(0)];
        let (a, b) = (g.index("1|{1}").unwrap(), g.index("2|{2}").unwrap());
        assert_ne!(m.class(a, &zero), m.class(b, &zero));
        let one = vec![Elem::Mod(1)];
        assert_eq!(m.class(a, &one), m.class(b, &one));
    }

    #[test]
    fn single_chart_model_is_the_range() {
        let g = kit("[model]\nalgebra = Fp:2\ndim = 2\n[charts]\nids = e\n");
        let m = glue(&g).unwrap();
        assert_eq!(m.count_points(), 4);
        let e = g.index("e|{e}").unwrap();
        assert!(m.chart_map(e).iter().all(|(c, x)| m.class(e, x) == Some(*c)));
    }

    #[test]
    fn relation_needs_no_closure_on_kits() {
        for g in [plane(2), plane(3), line(5), doubled_origin(3)] {
            let r = relation_is_equivalence(&g);
            assert!(r.is_valid(), "{r}");
        }
    }

    #[test]
    fn deleting_a_meet_index_opens_a_gap() {
        let g = plane(3);
        let (cut, _) = g.epos.without(g.index("0|{0,1,2}").unwrap());
        let mut h = g.clone();
        let drop = g.index("0|{0,1,2}").unwrap();
        let keep: Vec<Index> = g.epos.indices().filter(|&i| i != drop).collect();
        let remap = |i: Index| Index(keep.iter().position(|&k| k == i).unwrap() as u32);
        h.epos = cut;
        h.ranges = keep.iter().map(|&i| g.ranges[i.id()].clone()).collect();
        h.trans = g
            .trans
            .iter()
            .filter(|((i, j), _)| *i != drop && *j != drop)
            .map(|(&(i, j), t)| ((remap(i), remap(j)), t.clone()))
            .collect();
        h.meets = crate::atlas::compute_meets(&h.epos, &h.ranges);
        let r = relation_is_equivalence(&h);
        assert!(r.violation("TRANSITIVE").is_some(), "{r}");
        assert!(r.violation("CLOSURE").is_some());
    }

    #[test]
    fn recovered_transitions_match() {
        let g = plane(3);
        let m = glue(&g).unwrap();
        let (i, j) = (g.index("0|{0,1}").unwrap(), g.index("1|{0,1}").unwrap());
        let rec = recovered_transition(&m, i, j).unwrap();
        assert_eq!(rec, g.trans[&(j, i)].table);
        let rec = recovered_transition(&m, i, i).unwrap();
        assert!(rec.iter().all(|(x, y)| x == y));
    }

    #[test]
    fn tangent_line_over_f3() {
        let g = line(3);
        let t = weil_transport(&g).unwrap();
        assert!(crate::atlas::validate_gluing_data(&t).is_valid());
        assert_eq!(glue(&t).unwrap().count_points(), 12);
    }

    #[test]
    fn tangent_of_one_chart() {
        let g = kit("[model]\nalgebra = Fp:5\ndim = 1\n[charts]\nids = e\n");
        assert_eq!(glue(&weil_transport(&g).unwrap()).unwrap().count_points(), 25);
    }

    #[test]
    fn tangent_inverse_formula() {
        let g = line(5);
        let t = weil_transport(&g).unwrap();
        let (i, j) = (t.index("0|{0,1}").unwrap(), t.index("1|{0,1}").unwrap());
        let f5 = Algebra::Prime(5);
        let (a, b) = (Elem::Mod(2), Elem::Mod(4));
        let ai = f5.inv(&a).unwrap();
        let eps = f5.neg(&f5.mul(&f5.mul(&ai, &b), &ai));
        assert_eq!(t.trans[&(i, j)].table[&vec![Elem::pair(a, b)]], vec![Elem::pair(ai, eps)]);
    }

    #[test]
    fn table_transitions_cannot_be_transported() {
        let m = glue(&line(5)).unwrap();
        let g = extract_gluing_data(&m.to_atlas()).unwrap();
        assert!(matches!(weil_transport(&g), Err(AtlasError::Unsupported(_))));
    }

    fn two_point_atlas() -> ConcreteAtlas {
        ConcreteAtlas {
            carrier: 2,
            algebra: Algebra::Prime(2),
            dim: 1,
            charts: vec![Chart { name: "id".into(), map: [(0, vec![Elem::Mod(0)]), (1, vec![Elem::Mod(1)])].into_iter().collect() }],
        }
    }

    #[test]
    fn maximal_atlas_on_two_points() {
        let a = two_point_atlas();
        let p = full_pseudogroup(2).unwrap();
        let max = maximal_atlas_of(&a, &p, 4).unwrap();
        assert_eq!(max.charts.len(), 6);
        assert!(max.charts.iter().any(|c| c.name == "id"));
        assert!(same_charts(&maximal_atlas_of(&max, &p, 4).unwrap(), &max));
        let m = glue(&extract_gluing_data(&a).unwrap()).unwrap();
        assert_eq!(maximal_atlas(&m, &p).unwrap().charts.len(), 6);
    }

    #[test]
    fn maximal_atlas_bound_is_an_error() {
        let mut a = two_point_atlas();
        a.carrier = 5;
        assert!(matches!(maximal_atlas_of(&a, &Pseudogroup::full(2), 4), Err(ReconstructError::TooLarge { .. })));
    }

    #[test]
    fn round_trip_through_extraction() {
        let m = glue(&plane(5)).unwrap();
        let a = m.to_atlas();
        assert!(check_condition_3prime(&a).is_valid());
        let g = extract_gluing_data(&a).unwrap();
        let back = glue(&g).unwrap();
        assert!(atlas_isomorphism(&a, &back).is_ok());
        // over F_3 inversion fixes every unit, so two charts coincide
        let dup = glue(&line(3)).unwrap().to_atlas();
        assert!(extract_gluing_data(&dup).is_err());
    }

    #[test]
    fn modes_agree_on_glue_and_relation() {
        let g = plane(3);
        let (a, b) = (glue_with(&g, Exec::Sequential).unwrap(), glue_with(&g, Exec::Parallel).unwrap());
        assert_eq!(a.dump(), b.dump());
        assert_eq!(
            relation_is_equivalence_with(&g, Exec::Sequential),
            relation_is_equivalence_with(&g, Exec::Parallel)
        );
    }
}
