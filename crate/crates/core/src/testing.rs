//! Random generators and mutation helpers shared by the integration tests,
//! the property tests and the bench.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::algebra::{Algebra, Elem, Point};
use crate::atlas::{compute_meets, extract_gluing_data, Chart, ConcreteAtlas, GluingData};
use crate::bitrel::BitRelation;
use crate::groupoid::{EPos, FiniteGroupoid, Index};
use crate::morphism::MorphismData;
use crate::natrel::NaturalRelation;
use crate::reconstruct::{glue, ManifoldModel};

/// Random atlas of `M = {0..m-1}`, `m ≤ max_points`, by one-dimensional
/// charts into `F_11`: up to three random charts, one more to cover, then
/// closed under restriction to pairwise intersections.
pub fn random_atlas<R: Rng>(rng: &mut R, max_points: usize) -> ConcreteAtlas {
    let alg = Algebra::prime(11).expect("11 is prime");
    let m = rng.random_range(1..=max_points.clamp(1, 11));
    let mut maps: Vec<BTreeMap<usize, Point>> = Vec::new();
    let push = |maps: &mut Vec<BTreeMap<usize, Point>>, dom: Vec<usize>, rng: &mut R| {
        let mut vals: Vec<u64> = (0..11).collect();
        vals.shuffle(rng);
        let map: BTreeMap<usize, Point> = dom.into_iter().zip(vals).map(|(x, v)| (x, vec![Elem::Mod(v)])).collect();
        if !maps.contains(&map) {
            maps.push(map);
        }
    };
    for _ in 0..rng.random_range(1..=3) {
        let mut dom: Vec<usize> = (0..m).filter(|_| rng.random_bool(0.6)).collect();
        if dom.is_empty() {
            dom.push(rng.random_range(0..m));
        }
        push(&mut maps, dom, rng);
    }
    let covered: BTreeSet<usize> = maps.iter().flat_map(|c| c.keys().copied()).collect();
    let rest: Vec<usize> = (0..m).filter(|x| !covered.contains(x) || rng.random_bool(0.2)).collect();
    if (0..m).any(|x| !covered.contains(&x)) {
        push(&mut maps, rest, rng);
    }
    loop {
        let mut added = Vec::new();
        for a in &maps {
            for b in &maps {
                let inter: BTreeMap<usize, Point> =
                    a.iter().filter(|(x, _)| b.contains_key(x)).map(|(x, p)| (*x, p.clone())).collect();
                if !inter.is_empty() && !maps.contains(&inter) && !added.contains(&inter) {
                    added.push(inter);
                }
            }
        }
        if added.is_empty() {
            break;
        }
        maps.extend(added);
    }
    let charts = maps.into_iter().enumerate().map(|(k, map)| Chart { name: format!("c{k}"), map }).collect();
    ConcreteAtlas { carrier: m, algebra: alg, dim: 1, charts }
}

pub fn random_gluing_data<R: Rng>(rng: &mut R, max_points: usize) -> GluingData {
    extract_gluing_data(&random_atlas(rng, max_points)).expect("random atlases are valid")
}

pub fn random_epos<R: Rng>(rng: &mut R, max_points: usize) -> EPos {
    random_gluing_data(rng, max_points).epos
}

pub fn random_model<R: Rng>(rng: &mut R, max_points: usize) -> ManifoldModel {
    glue(&random_gluing_data(rng, max_points)).expect("extracted data glue")
}

/// A random atlas-continuous map on class ids, found by depth-first search
/// with shuffled candidates. Falls back to a constant map after `budget`
/// search nodes.
pub fn random_continuous_map<R: Rng>(src: &ManifoldModel, tgt: &ManifoldModel, rng: &mut R, budget: usize) -> Vec<usize> {
    let (n, m) = (src.count_points(), tgt.count_points());
    let sdoms: Vec<BTreeSet<usize>> = src.source.epos.indices().map(|i| src.chart_domain(i)).collect();
    let tdoms: Vec<BTreeSet<usize>> = tgt.source.epos.indices().map(|j| tgt.chart_domain(j)).collect();
    // Every assigned point must keep, for each target chart around its image,
    // a source chart around it whose assigned part maps into that chart.
    let prefix_ok = |f: &[usize]| {
        (0..f.len()).all(|y| {
            tdoms.iter().filter(|v| v.contains(&f[y])).all(|v| {
                sdoms.iter().any(|u| u.contains(&y) && u.iter().filter(|&&z| z < f.len()).all(|&z| v.contains(&f[z])))
            })
        })
    };
    let mut f = Vec::with_capacity(n);
    let mut stack: Vec<Vec<usize>> = Vec::new();
    let mut nodes = 0;
    let fresh = |rng: &mut R| {
        let mut c: Vec<usize> = (0..m).collect();
        c.shuffle(rng);
        c
    };
    stack.push(fresh(rng));
    while let Some(cands) = stack.last_mut() {
        if f.len() == n {
            return f;
        }
        nodes += 1;
        if nodes > budget {
            break;
        }
        match cands.pop() {
            Some(v) => {
                f.push(v);
                if prefix_ok(&f) {
                    if f.len() == n {
                        return f;
                    }
                    stack.push(fresh(rng));
                } else {
                    f.pop();
                }
            }
            None => {
                stack.pop();
                f.pop();
            }
        }
    }
    if n == 0 || m == 0 {
        return vec![0; n];
    }
    vec![rng.random_range(0..m); n]
}

/// Disjoint union of one or two transitive groupoids `pair × Z/k`, at most
/// five objects in all.
pub fn random_groupoid<R: Rng>(rng: &mut R) -> FiniteGroupoid {
    let total = rng.random_range(1..=5);
    let first = if total > 1 && rng.random_bool(0.5) { rng.random_range(1..total) } else { total };
    let names: Vec<String> = (0..total).map(|k| format!("o{k}")).collect();
    let part = |lo: usize, hi: usize, rng: &mut R| {
        let objs: Vec<&str> = names[lo..hi].iter().map(|s| s.as_str()).collect();
        FiniteGroupoid::transitive(&objs, rng.random_range(1..=3))
    };
    let g = part(0, first, rng);
    if first < total {
        g.disjoint_union(&part(first, total, rng))
    } else {
        g
    }
}

fn random_relation<R: Rng>(rng: &mut R, rows: usize, cols: usize, p: f64) -> BitRelation {
    let mut r = BitRelation::empty(rows, cols);
    for a in 0..rows {
        for b in 0..cols {
            if rng.random_bool(p) {
                r.insert(a, b);
            }
        }
    }
    r
}

/// A random `R` inside the largest relation allowed by `F` and `K`.
pub fn random_r<R: Rng>(
    rng: &mut R,
    source: &FiniteGroupoid,
    target: &FiniteGroupoid,
    f: &BitRelation,
    k: &BitRelation,
) -> BitRelation {
    let mut r = BitRelation::empty(target.morphism_count(), source.morphism_count());
    for h in 0..target.morphism_count() {
        for g in 0..source.morphism_count() {
            if f.contains(target.source[h], source.source[g]) && k.contains(target.target[h], source.target[g]) && rng.random_bool(0.5) {
                r.insert(h, g);
            }
        }
    }
    r
}

pub fn random_natural_relation_with<R: Rng>(
    rng: &mut R,
    source: Arc<FiniteGroupoid>,
    target: Arc<FiniteGroupoid>,
    f: Option<BitRelation>,
) -> NaturalRelation {
    let (no, ns) = (target.object_count(), source.object_count());
    let f = f.unwrap_or_else(|| random_relation(rng, no, ns, 0.5));
    let k = random_relation(rng, no, ns, 0.5);
    let r = random_r(rng, &source, &target, &f, &k);
    NaturalRelation { source, target, f, k, r }
}

pub fn random_natural_relation<R: Rng>(rng: &mut R, source: Arc<FiniteGroupoid>, target: Arc<FiniteGroupoid>) -> NaturalRelation {
    random_natural_relation_with(rng, source, target, None)
}

/// `(n1, n2)` with `n1 : G → G'` and `n2 : G' → G''`.
pub fn random_composable_pair<R: Rng>(rng: &mut R) -> (NaturalRelation, NaturalRelation) {
    let (g0, g1, g2) = (Arc::new(random_groupoid(rng)), Arc::new(random_groupoid(rng)), Arc::new(random_groupoid(rng)));
    let n1 = random_natural_relation(rng, g0, g1.clone());
    let n2 = random_natural_relation(rng, g1, g2);
    (n1, n2)
}

/// `(n1, n2)` on the same groupoids with `K₁ = F₂`.
pub fn random_star_pair<R: Rng>(rng: &mut R) -> (NaturalRelation, NaturalRelation) {
    let (g0, g1) = (Arc::new(random_groupoid(rng)), Arc::new(random_groupoid(rng)));
    let n1 = random_natural_relation(rng, g0.clone(), g1.clone());
    let n2 = random_natural_relation_with(rng, g0, g1, Some(n1.k.clone()));
    (n1, n2)
}

/// `(a, b, c, d)` with `a, c : G → G'`, `b, d : G' → G''`, `K_a = F_c` and
/// `K_b = F_d`, so that both sides of the interchange law are defined.
pub fn random_interchange_quadruple<R: Rng>(rng: &mut R) -> [NaturalRelation; 4] {
    let (g0, g1, g2) = (Arc::new(random_groupoid(rng)), Arc::new(random_groupoid(rng)), Arc::new(random_groupoid(rng)));
    let a = random_natural_relation(rng, g0.clone(), g1.clone());
    let c = random_natural_relation_with(rng, g0, g1.clone(), Some(a.k.clone()));
    let b = random_natural_relation(rng, g1.clone(), g2.clone());
    let d = random_natural_relation_with(rng, g1, g2, Some(b.k.clone()));
    [a, b, c, d]
}

/// The data with one index removed, meets recomputed from the rest.
pub fn delete_index(g: &GluingData, drop: Index) -> GluingData {
    let (epos, remap) = g.epos.without(drop);
    let trans = g
        .trans
        .iter()
        .filter_map(|(&(i, j), t)| Some(((remap[i.id()]?, remap[j.id()]?), t.clone())))
        .collect();
    let ranges: Vec<_> = g.epos.indices().filter(|&i| i != drop).map(|i| g.ranges[i.id()].clone()).collect();
    let meets = compute_meets(&epos, &ranges);
    GluingData { epos, algebra: g.algebra.clone(), dim: g.dim, ranges, trans, meets }
}

fn pick<T: Clone, R: Rng>(rng: &mut R, v: &[T]) -> Option<T> {
    v.choose(rng).cloned()
}

/// Applies one random applicable defect to an e-pos. Returns the kind of
/// defect and the mutant, or `None` when no defect applies.
pub fn mutate_epos<R: Rng>(e: &EPos, rng: &mut R) -> Option<(&'static str, EPos)> {
    let n = e.len();
    let mut kinds = [0, 1, 2, 3, 4];
    kinds.shuffle(rng);
    for kind in kinds {
        let mut m = e.clone();
        let idx: Vec<usize> = (0..n).collect();
        match kind {
            0 => {
                let i = pick(rng, &idx)?;
                m.equiv_mut().remove(i, i);
                return Some(("drop E diagonal", m));
            }
            1 => {
                let pairs: Vec<(usize, usize)> = e.equiv().pairs().filter(|(a, b)| a != b).collect();
                if let Some((a, b)) = pick(rng, &pairs) {
                    m.equiv_mut().remove(a, b);
                    return Some(("drop one direction of an E pair", m));
                }
            }
            2 => {
                let pairs: Vec<(usize, usize)> =
                    idx.iter().flat_map(|&a| idx.iter().map(move |&b| (a, b))).filter(|&(a, b)| !e.equiv().contains(a, b)).collect();
                if let Some((a, b)) = pick(rng, &pairs) {
                    m.equiv_mut().insert(a, b);
                    return Some(("add a directed E pair", m));
                }
            }
            3 => {
                let pairs: Vec<(usize, usize)> =
                    idx.iter().flat_map(|&a| idx.iter().map(move |&b| (a, b))).filter(|&(a, b)| a != b && !e.order().contains(b, a)).collect();
                if let Some((a, b)) = pick(rng, &pairs) {
                    m.order_mut().insert(a, b);
                    m.order_mut().insert(b, a);
                    return Some(("break antisymmetry of L", m));
                }
            }
            _ => {
                let pairs: Vec<(usize, usize)> = e.order().pairs().filter(|(a, b)| a != b).collect();
                if let Some((a, b)) = pick(rng, &pairs) {
                    m.equiv_mut().insert(a, b);
                    m.equiv_mut().insert(b, a);
                    return Some(("add an E pair between comparable indices", m));
                }
            }
        }
    }
    None
}

/// Applies one random applicable defect to atlas data.
pub fn mutate_gluing_data<R: Rng>(g: &GluingData, rng: &mut R) -> Option<(&'static str, GluingData)> {
    let mut kinds = [0, 1, 2, 3, 4];
    kinds.shuffle(rng);
    let keys: Vec<(Index, Index)> = g.trans.keys().copied().collect();
    for kind in kinds {
        let mut m = g.clone();
        match kind {
            0 | 1 => {
                let want_diag = kind == 1;
                let cands: Vec<(Index, Index)> =
                    keys.iter().copied().filter(|&(i, j)| (i == j) == want_diag && g.trans[&(i, j)].table.len() >= 2).collect();
                if let Some(key) = pick(rng, &cands) {
                    let t = m.trans.get_mut(&key).expect("key present");
                    let xs: Vec<Point> = t.table.keys().cloned().collect();
                    let mut two: Vec<&Point> = xs.iter().collect();
                    two.shuffle(rng);
                    let (x, y) = (two[0].clone(), two[1].clone());
                    let (vx, vy) = (t.table[&x].clone(), t.table[&y].clone());
                    t.table.insert(x, vy);
                    t.table.insert(y, vx);
                    return Some((if want_diag { "corrupt an identity transition" } else { "swap two transition outputs" }, m));
                }
            }
            2 => {
                let key = pick(rng, &keys)?;
                let t = m.trans.get_mut(&key).expect("key present");
                let xs: Vec<Point> = t.table.keys().cloned().collect();
                if let Some(x) = pick(rng, &xs) {
                    t.table.insert(x, Vec::new());
                    return Some(("transition value outside the range", m));
                }
            }
            3 => {
                let idx: Vec<Index> = g.epos.indices().filter(|&i| !g.range(i).is_empty()).collect();
                if let Some(i) = pick(rng, &idx) {
                    let xs: Vec<Point> = g.range(i).iter().cloned().collect();
                    let x = pick(rng, &xs).expect("nonempty");
                    m.ranges[i.id()].points.remove(&x);
                    return Some(("remove a range point", m));
                }
            }
            _ => {
                let meets: Vec<(Index, Index)> = g.meets.keys().copied().collect();
                if let Some(key) = pick(rng, &meets) {
                    let cur = g.meets[&key];
                    let others: Vec<Index> = g.epos.indices().filter(|&k| k != cur).collect();
                    match pick(rng, &others) {
                        Some(k) if rng.random_bool(0.5) => {
                            m.meets.insert(key, k);
                            return Some(("alter a meet", m));
                        }
                        _ => {
                            m.meets.remove(&key);
                            return Some(("delete a meet", m));
                        }
                    }
                }
            }
        }
    }
    None
}

/// Applies one random applicable defect to morphism data.
pub fn mutate_morphism_data<R: Rng>(d: &MorphismData, rng: &mut R) -> Option<(&'static str, MorphismData)> {
    let (s, t) = (&d.source.epos, &d.target.epos);
    let mut kinds = [0, 1, 2, 3];
    kinds.shuffle(rng);
    let fpairs: Vec<(Index, Index)> = d.f.iter().copied().collect();
    for kind in kinds {
        let mut m = d.clone();
        match kind {
            0 => {
                let cands: Vec<(Index, Index)> = fpairs.iter().copied().filter(|p| d.components.get(p).is_some_and(|c| !c.table.is_empty())).collect();
                if let Some(p) = pick(rng, &cands) {
                    let c = m.components.get_mut(&p).expect("present");
                    let xs: Vec<Point> = c.table.keys().cloned().collect();
                    let x = pick(rng, &xs).expect("nonempty");
                    c.table.insert(x, Vec::new());
                    c.spec = None;
                    return Some(("component value outside the target range", m));
                }
            }
            1 => {
                // A point x of some V_k, k < s, with (t, k) ∈ F pins f_ts(x).
                let mut cands = Vec::new();
                for &(ti, si) in &fpairs {
                    let Some(c) = d.components.get(&(ti, si)) else { continue };
                    for k in s.below(si).into_iter().filter(|&k| k != si && d.f.contains(&(ti, k))) {
                        for x in d.source.range(k) {
                            for y in c.table.keys().filter(|y| c.table.get(*y) != c.table.get(x)) {
                                cands.push(((ti, si), x.clone(), y.clone()));
                            }
                        }
                    }
                }
                if let Some((p, x, y)) = pick(rng, &cands) {
                    let c = m.components.get_mut(&p).expect("present");
                    let (vx, vy) = (c.table[&x].clone(), c.table[&y].clone());
                    c.table.insert(x, vy);
                    c.table.insert(y, vx);
                    c.spec = None;
                    return Some(("permute a component at a constrained point", m));
                }
            }
            2 => {
                let legs: BTreeSet<(Index, Index)> = d.r.iter().flat_map(|&((i, k), (i2, k2))| [(i2, i), (k2, k)]).collect();
                let cands: Vec<(Index, Index)> = legs.into_iter().collect();
                if let Some(p) = pick(rng, &cands) {
                    m.f.remove(&p);
                    m.components.remove(&p);
                    return Some(("remove a required F pair", m));
                }
            }
            _ => {
                let cands: Vec<(Index, Index)> =
                    t.indices().flat_map(|ti| s.indices().map(move |si| (ti, si))).filter(|p| !d.f.contains(p)).collect();
                if let Some(p) = pick(rng, &cands) {
                    m.f.insert(p);
                    m.components.remove(&p);
                    return Some(("add an F pair without a component", m));
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::sample_rng;
    use crate::atlas::validate_gluing_data;
    use crate::groupoid::validate_groupoid;
    use crate::morphism::atlas_continuous;
    use crate::natrel::validate_nr;

    #[test]
    fn random_atlases_are_valid() {
        let mut rng = sample_rng(1, 0);
        for _ in 0..30 {
            let a = random_atlas(&mut rng, 8);
            assert!(a.validate().is_valid(), "{:?}", a.validate());
            assert!(validate_gluing_data(&extract_gluing_data(&a).unwrap()).is_valid());
        }
    }

    #[test]
    fn random_maps_are_continuous() {
        let mut rng = sample_rng(2, 0);
        for _ in 0..20 {
            let (a, b) = (random_model(&mut rng, 6), random_model(&mut rng, 6));
            let f = random_continuous_map(&a, &b, &mut rng, 5000);
            assert_eq!(atlas_continuous(&a, &b, &f), Ok(()));
        }
    }

    #[test]
    fn random_groupoids_and_relations_are_valid() {
        let mut rng = sample_rng(3, 0);
        for _ in 0..20 {
            let g = random_groupoid(&mut rng);
            assert!(g.object_count() <= 5);
            assert!(validate_groupoid(&g).is_valid());
            let (n1, n2) = random_star_pair(&mut rng);
            assert!(validate_nr(&n1).is_valid() && validate_nr(&n2).is_valid());
            assert_eq!(n1.k, n2.f);
        }
    }
}
