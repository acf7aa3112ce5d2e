//! Morphism data between atlas data: the relation `F ⊆ I' × I`, the relation
//! `R ⊆ E × E'` and components `f_i'i : V_i → V_i'`.
//!
//! Pairs in `F` are stored target-first as `(i', i)`; pairs in `R` as
//! `((i, k), (i', k'))` with `(i, k) ∈ E` and `(i', k') ∈ E'`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::{fmt_point, Point};
use crate::atlas::GluingData;
use crate::dsl::{MapSpec, MorphismFile};
use crate::exec::Exec;
use crate::groupoid::Index;
use crate::reconstruct::ManifoldModel;
use crate::report::{check, ValidationReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MorphismError {
    #[error("unknown index {0}")]
    UnknownIndex(String),
    #[error("component {0}: {1}")]
    Component(String, String),
    #[error("conflicting components at ({0}): {1}")]
    Conflict(String, String),
    #[error("boundary mismatch: {0}")]
    Boundary(String),
    #[error("not full: no admissible chart pair at {0}")]
    NotFull(String),
    #[error("ill-defined at {point}: {choices}")]
    IllDefined { point: String, choices: String },
    #[error("source and target differ")]
    NotEndo,
    #[error("map has {got} values for {expected} points")]
    Arity { got: usize, expected: usize },
}

/// A component `f_i'i` as a table on `V_i`, with the formula it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub table: BTreeMap<Point, Point>,
    pub spec: Option<MapSpec>,
}

impl Component {
    pub fn from_table(table: BTreeMap<Point, Point>) -> Self {
        Self { table, spec: None }
    }
}

pub type RPair = ((Index, Index), (Index, Index));

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorphismData {
    pub source: Arc<GluingData>,
    pub target: Arc<GluingData>,
    pub f: BTreeSet<(Index, Index)>,
    pub r: BTreeSet<RPair>,
    pub components: BTreeMap<(Index, Index), Component>,
}

impl MorphismData {
    pub fn component(&self, target: Index, source: Index) -> Option<&BTreeMap<Point, Point>> {
        self.components.get(&(target, source)).map(|c| &c.table)
    }

    fn fpair_name(&self, (t, s): (Index, Index)) -> String {
        format!("{}, {}", self.target.name(t), self.source.name(s))
    }

    /// Whether a property holds for every component.
    pub fn has_property(&self, prop: impl Fn(&Component) -> bool) -> bool {
        self.components.values().all(prop)
    }
}

impl fmt::Display for MorphismData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "F {} pairs, R {} pairs", self.f.len(), self.r.len())?;
        for &(t, s) in &self.f {
            write!(f, "{} -> {}", self.source.name(s), self.target.name(t))?;
            match self.components.get(&(t, s)) {
                Some(Component { spec: Some(spec), .. }) => writeln!(f, ": {spec}")?,
                Some(c) => writeln!(f, ": table of {}", c.table.len())?,
                None => writeln!(f, ": missing")?,
            }
        }
        Ok(())
    }
}

/// All `((i, k), (i', k')) ∈ E × E'` whose legs lie in `F`.
pub fn maximal_r(source: &GluingData, target: &GluingData, f: &BTreeSet<(Index, Index)>) -> BTreeSet<RPair> {
    let mut out = BTreeSet::new();
    for &(ti, si) in f {
        for sk in source.epos.class_of(si) {
            for tk in target.epos.class_of(ti) {
                if f.contains(&(tk, sk)) {
                    out.insert(((si, sk), (ti, tk)));
                }
            }
        }
    }
    out
}

/// Closes generating components under restriction (`k ≤ i`) and
/// corestriction (`i' ≤ m'`), with `R` maximal.
pub fn close_components(
    source: Arc<GluingData>,
    target: Arc<GluingData>,
    generators: Vec<((Index, Index), Component)>,
) -> Result<MorphismData, MorphismError> {
    let mut components: BTreeMap<(Index, Index), Component> = BTreeMap::new();
    for ((ti, si), comp) in generators {
        for k in source.epos.below(si) {
            let table: BTreeMap<Point, Point> = source
                .range(k)
                .iter()
                .map(|x| {
                    comp.table.get(x).map(|y| (x.clone(), y.clone())).ok_or_else(|| {
                        MorphismError::Component(
                            format!("{}, {}", target.name(ti), source.name(si)),
                            format!("undefined at {}", fmt_point(x)),
                        )
                    })
                })
                .collect::<Result<_, _>>()?;
            for m in target.epos.above(ti) {
                let key = (m, k);
                let spec = if k == si && m == ti { comp.spec.clone() } else { None };
                match components.get_mut(&key) {
                    Some(prev) if prev.table != table => {
                        let x = table.iter().find(|(x, y)| prev.table.get(*x) != Some(*y)).map(|(x, _)| fmt_point(x));
                        return Err(MorphismError::Conflict(
                            format!("{}, {}", target.name(m), source.name(k)),
                            format!("two generators disagree at {}", x.unwrap_or_default()),
                        ));
                    }
                    Some(prev) => {
                        if prev.spec.is_none() {
                            prev.spec = spec;
                        }
                    }
                    None => {
                        components.insert(key, Component { table: table.clone(), spec });
                    }
                }
            }
        }
    }
    let f: BTreeSet<(Index, Index)> = components.keys().copied().collect();
    let r = maximal_r(&source, &target, &f);
    Ok(MorphismData { source, target, f, r, components })
}

/// `f_ij := φ_ij`, closed under restriction and corestriction.
pub fn identity_data(g: Arc<GluingData>) -> MorphismData {
    let gens = g
        .trans
        .iter()
        .filter(|((i, j), _)| g.epos.related(*i, *j))
        .map(|(&(i, j), t)| ((i, j), Component::from_table(t.table.clone())))
        .collect();
    close_components(g.clone(), g, gens).expect("transitions satisfy the cocycle")
}

/// Builds data from declared components, resolving bare chart names to top
/// indices and closing under restriction and corestriction.
pub fn morphism_data_from_file(
    file: &MorphismFile,
    source: Arc<GluingData>,
    target: Arc<GluingData>,
) -> Result<MorphismData, MorphismError> {
    let mut gens = Vec::new();
    for c in &file.components {
        let si = source.resolve(&c.from).ok_or_else(|| MorphismError::UnknownIndex(c.from.clone()))?;
        let ti = target.resolve(&c.to).ok_or_else(|| MorphismError::UnknownIndex(c.to.clone()))?;
        let name = format!("{}, {}", target.name(ti), source.name(si));
        c.map.check(source.dim, target.dim).map_err(|e| MorphismError::Component(name.clone(), e))?;
        let table = source
            .range(si)
            .iter()
            .map(|x| {
                let y = c
                    .map
                    .eval(&target.algebra, x)
                    .map_err(|e| MorphismError::Component(name.clone(), format!("at {}: {e}", fmt_point(x))))?;
                Ok((x.clone(), y))
            })
            .collect::<Result<BTreeMap<_, _>, MorphismError>>()?;
        gens.push(((ti, si), Component { table, spec: Some(c.map.clone()) }));
    }
    close_components(source, target, gens)
}

pub fn validate_morphism_data(d: &MorphismData) -> ValidationReport {
    validate_morphism_data_with(d, Exec::default())
}

/// Checks the legs of `R`, the components, the squares
/// `φ'_k'i' ∘ f_i'i = f_k'k ∘ φ_ki` on `R`, restriction and corestriction.
pub fn validate_morphism_data_with(d: &MorphismData, exec: Exec) -> ValidationReport {
    let (s, t) = (&*d.source, &*d.target);
    let fpairs: Vec<(Index, Index)> = d.f.iter().copied().collect();
    let rpairs: Vec<RPair> = d.r.iter().copied().collect();
    let in_bounds = |(ti, si): (Index, Index)| ti.id() < t.epos.len() && si.id() < s.epos.len();
    let mut r = ValidationReport::new();
    check(&mut r, "R_LEGS", || {
        rpairs.iter().find_map(|&((i, k), (i2, k2))| {
            let name = || {
                format!("(({}, {}), ({}, {}))", s.name(i), s.name(k), t.name(i2), t.name(k2))
            };
            if !s.epos.related(i, k) || !t.epos.related(i2, k2) {
                Some(format!("{} is not in E x E'", name()))
            } else if !d.f.contains(&(i2, i)) || !d.f.contains(&(k2, k)) {
                Some(format!("{} has a leg outside F", name()))
            } else {
                None
            }
        })
    });
    check(&mut r, "COMPONENTS", || {
        if let Some(p) = fpairs.iter().find(|&&p| !in_bounds(p)) {
            return Some(format!("F pair {:?} out of range", p));
        }
        if let Some(&p) = d.components.keys().find(|p| !d.f.contains(p)) {
            return Some(format!("component ({}) outside F", d.fpair_name(p)));
        }
        exec.find_first(fpairs.len(), |n| {
            let (ti, si) = fpairs[n];
            let Some(c) = d.components.get(&(ti, si)) else {
                return Some(format!("({}) in F has no component", d.fpair_name((ti, si))));
            };
            if let Some(x) = s.range(si).iter().find(|x| !c.table.contains_key(*x)) {
                return Some(format!("f_({}) undefined at {}", d.fpair_name((ti, si)), fmt_point(x)));
            }
            if let Some(x) = c.table.keys().find(|x| !s.range(si).contains(*x)) {
                return Some(format!("f_({}) defined off V_{} at {}", d.fpair_name((ti, si)), s.name(si), fmt_point(x)));
            }
            c.table.iter().find(|(_, y)| !t.range(ti).contains(*y)).map(|(x, y)| {
                format!("f_({})({}) = {} is not in V_{}", d.fpair_name((ti, si)), fmt_point(x), fmt_point(y), t.name(ti))
            })
        })
    });
    if !r.is_valid() {
        return r;
    }
    check(&mut r, "SQUARE", || {
        exec.find_first(rpairs.len(), |n| {
            let ((i, k), (i2, k2)) = rpairs[n];
            let (fi, fk) = (&d.components[&(i2, i)].table, &d.components[&(k2, k)].table);
            let (phi, phi2) = (&s.trans.get(&(k, i))?.table, &t.trans.get(&(k2, i2))?.table);
            s.range(i).iter().find_map(|x| {
                let left = phi2.get(&fi[x]);
                let right = phi.get(x).and_then(|y| fk.get(y));
                (left != right || left.is_none()).then(|| {
                    format!(
                        "(({}, {}), ({}, {})) at {}: {} vs {}",
                        s.name(i),
                        s.name(k),
                        t.name(i2),
                        t.name(k2),
                        fmt_point(x),
                        left.map(|p| fmt_point(p)).unwrap_or("undefined".into()),
                        right.map(|p| fmt_point(p)).unwrap_or("undefined".into())
                    )
                })
            })
        })
    });
    check(&mut r, "RESTRICTION", || {
        exec.find_first(fpairs.len(), |n| {
            let (ti, si) = fpairs[n];
            let fi = &d.components[&(ti, si)].table;
            s.epos.below(si).into_iter().find_map(|k| {
                let Some(fk) = d.component(ti, k) else {
                    return Some(format!("({}) in F but ({}) is not", d.fpair_name((ti, si)), d.fpair_name((ti, k))));
                };
                s.range(k).iter().find(|x| fk.get(*x) != fi.get(*x)).map(|x| {
                    format!("f_({}) != f_({}) at {}", d.fpair_name((ti, k)), d.fpair_name((ti, si)), fmt_point(x))
                })
            })
        })
    });
    check(&mut r, "CORESTRICTION", || {
        exec.find_first(fpairs.len(), |n| {
            let (ti, si) = fpairs[n];
            let fi = &d.components[&(ti, si)].table;
            t.epos.above(ti).into_iter().find_map(|m| {
                let Some(fm) = d.component(m, si) else {
                    return Some(format!("({}) in F but ({}) is not", d.fpair_name((ti, si)), d.fpair_name((m, si))));
                };
                s.range(si).iter().find(|x| fm.get(*x) != fi.get(*x)).map(|x| {
                    format!("f_({}) != f_({}) at {}", d.fpair_name((m, si)), d.fpair_name((ti, si)), fmt_point(x))
                })
            })
        })
    });
    if d.r != maximal_r(s, t, &d.f) {
        r.note("R is smaller than the set of E x E' pairs with legs in F");
    }
    r
}

fn check_source(d: &MorphismData, m: &ManifoldModel) -> Result<(), MorphismError> {
    if Arc::ptr_eq(&d.source, &m.source) || *d.source == *m.source {
        Ok(())
    } else {
        Err(MorphismError::Boundary("model is not glued from the source data".into()))
    }
}

fn check_target(d: &MorphismData, m: &ManifoldModel) -> Result<(), MorphismError> {
    if Arc::ptr_eq(&d.target, &m.source) || *d.target == *m.source {
        Ok(())
    } else {
        Err(MorphismError::Boundary("model is not glued from the target data".into()))
    }
}

/// A point `x ∈ U_k` with no `i ≤ k`, `x ∈ U_i`, `(i', i) ∈ F`, or `None`
/// when the data are full.
pub fn fullness_gap(d: &MorphismData, src: &ManifoldModel) -> Option<String> {
    let e = &d.source.epos;
    let sources: BTreeSet<Index> = d.f.iter().map(|&(_, s)| s).collect();
    for k in e.indices() {
        for &c in src.chart_map(k).keys() {
            let ok = e.below(k).into_iter().any(|i| sources.contains(&i) && src.chart_map(i).contains_key(&c));
            if !ok {
                return Some(format!("{} in U_{}", src.fmt_class(c), d.source.name(k)));
            }
        }
    }
    None
}

pub fn is_full(d: &MorphismData, src: &ManifoldModel) -> bool {
    fullness_gap(d, src).is_none()
}

/// Pointwise reconstruction `f([x, i]) = [f_i'i(x), i']`, recording points
/// with no admissible pair and points where choices disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialMap {
    pub values: Vec<Option<usize>>,
    pub conflicts: Vec<(usize, String)>,
}

impl PartialMap {
    pub fn is_total(&self) -> bool {
        self.conflicts.is_empty() && self.values.iter().all(Option::is_some)
    }

    pub fn undefined(&self) -> Vec<usize> {
        self.values.iter().enumerate().filter(|(_, v)| v.is_none()).map(|(c, _)| c).collect()
    }
}

pub fn reconstruct_partial(d: &MorphismData, src: &ManifoldModel, tgt: &ManifoldModel) -> Result<PartialMap, MorphismError> {
    check_source(d, src)?;
    check_target(d, tgt)?;
    let mut values = vec![None; src.count_points()];
    let mut conflicts = Vec::new();
    for c in 0..src.count_points() {
        let mut first: Option<((Index, Index), usize)> = None;
        for &(ti, si) in &d.f {
            let Some(x) = src.chart_map(si).get(&c) else { continue };
            let Some(y) = d.component(ti, si).and_then(|t| t.get(x)) else { continue };
            let Some(v) = tgt.class(ti, y) else { continue };
            match first {
                None => first = Some(((ti, si), v)),
                Some((p, w)) if w != v => {
                    conflicts.push((
                        c,
                        format!(
                            "({}) gives {} but ({}) gives {}",
                            d.fpair_name(p),
                            tgt.fmt_class(w),
                            d.fpair_name((ti, si)),
                            tgt.fmt_class(v)
                        ),
                    ));
                    break;
                }
                _ => {}
            }
        }
        values[c] = first.map(|(_, v)| v);
    }
    Ok(PartialMap { values, conflicts })
}

/// The unique map described by full data, as class ids of the target model.
pub fn reconstruct_map(d: &MorphismData, src: &ManifoldModel, tgt: &ManifoldModel) -> Result<Vec<usize>, MorphismError> {
    if let Some(w) = fullness_gap(d, src) {
        return Err(MorphismError::NotFull(w));
    }
    let p = reconstruct_partial(d, src, tgt)?;
    if let Some((c, why)) = p.conflicts.first() {
        return Err(MorphismError::IllDefined { point: src.fmt_class(*c), choices: why.clone() });
    }
    p.values
        .iter()
        .enumerate()
        .map(|(c, v)| v.ok_or_else(|| MorphismError::NotFull(src.fmt_class(c))))
        .collect()
}

/// Data induced by a map `f : M → M'` given on class ids.
pub fn extract_morphism_data(src: &ManifoldModel, tgt: &ManifoldModel, f: &[usize]) -> Result<MorphismData, MorphismError> {
    if f.len() != src.count_points() {
        return Err(MorphismError::Arity { got: f.len(), expected: src.count_points() });
    }
    if let Some(&v) = f.iter().find(|&&v| v >= tgt.count_points()) {
        return Err(MorphismError::Arity { got: v, expected: tgt.count_points() });
    }
    let (s, t) = (&src.source, &tgt.source);
    let mut fpairs = BTreeSet::new();
    let mut components = BTreeMap::new();
    for si in s.epos.indices() {
        let phi = src.chart_map(si);
        for ti in t.epos.indices() {
            let psi = tgt.chart_map(ti);
            if phi.keys().all(|c| psi.contains_key(&f[*c])) {
                fpairs.insert((ti, si));
                let table = phi.iter().map(|(c, x)| (x.clone(), psi[&f[*c]].clone())).collect();
                components.insert((ti, si), Component::from_table(table));
            }
        }
    }
    let r = maximal_r(s, t, &fpairs);
    Ok(MorphismData { source: s.clone(), target: t.clone(), f: fpairs, r, components })
}

/// `Err((x, j))` when `f(x) ∈ U_j` but no chart `U_i ∋ x` has `f(U_i) ⊆ U_j`.
pub fn atlas_continuous(src: &ManifoldModel, tgt: &ManifoldModel, f: &[usize]) -> Result<(), (usize, Index)> {
    let (s, t) = (&src.source, &tgt.source);
    let image_fits = |i: Index, j: Index| src.chart_map(i).keys().all(|c| tgt.chart_map(j).contains_key(&f[*c]));
    for x in 0..src.count_points() {
        for j in t.epos.indices() {
            if !tgt.chart_map(j).contains_key(&f[x]) {
                continue;
            }
            let ok = s.epos.indices().any(|i| src.chart_map(i).contains_key(&x) && image_fits(i, j));
            if !ok {
                return Err((x, j));
            }
        }
    }
    Ok(())
}

/// `G ∘ F` with components `g_lk ∘ f_ki` through the least mediating `k`.
pub fn compose_morphism_data(g: &MorphismData, f: &MorphismData) -> Result<MorphismData, MorphismError> {
    if !(Arc::ptr_eq(&f.target, &g.source) || *f.target == *g.source) {
        return Err(MorphismError::Boundary("target of the first data is not the source of the second".into()));
    }
    let mut components: BTreeMap<(Index, Index), Component> = BTreeMap::new();
    for &(k, i) in &f.f {
        let Some(fki) = f.component(k, i) else { continue };
        for &(l, k2) in g.f.range((Index(0), k)..) {
            if k2 != k {
                continue;
            }
            if components.contains_key(&(l, i)) {
                continue;
            }
            let Some(glk) = g.component(l, k) else { continue };
            let table: Option<BTreeMap<Point, Point>> =
                fki.iter().map(|(x, y)| glk.get(y).map(|z| (x.clone(), z.clone()))).collect();
            let table = table.ok_or_else(|| {
                MorphismError::Component(format!("{}, {}", g.target.name(l), f.source.name(i)), "values leave V_k".into())
            })?;
            components.insert((l, i), Component::from_table(table));
        }
    }
    let fpairs: BTreeSet<(Index, Index)> = components.keys().copied().collect();
    let mut r = BTreeSet::new();
    for &(a, b) in &f.r {
        for &(b2, c) in g.r.range((b, (Index(0), Index(0)))..) {
            if b2 != b {
                break;
            }
            r.insert((a, c));
        }
    }
    Ok(MorphismData { source: f.source.clone(), target: g.target.clone(), f: fpairs, r, components })
}

/// Keeps the components `(k', k) ∈ F` with `k ≤ k'`.
pub fn restricted_data(d: &MorphismData) -> Result<MorphismData, MorphismError> {
    if *d.source != *d.target {
        return Err(MorphismError::NotEndo);
    }
    let e = &d.source.epos;
    let keep = |&(t, s): &(Index, Index)| e.le(s, t);
    let f: BTreeSet<(Index, Index)> = d.f.iter().copied().filter(keep).collect();
    let components = d.components.iter().filter(|(p, _)| keep(p)).map(|(p, c)| (*p, c.clone())).collect();
    let r = d.r.iter().copied().filter(|((i, k), (i2, k2))| f.contains(&(*i2, *i)) && f.contains(&(*k2, *k))).collect();
    Ok(MorphismData { source: d.source.clone(), target: d.target.clone(), f, r, components })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::generate_from_cocycle;
    use crate::dsl::{parse_gluing_file, parse_morphism_file};
    use crate::reconstruct::glue;

    fn data(text: &str) -> Arc<GluingData> {
        Arc::new(generate_from_cocycle(&parse_gluing_file(text).unwrap()).unwrap())
    }

    fn plane(p: u64) -> Arc<GluingData> {
        data(&format!(
            "[model]\nalgebra = Fp:{p}\ndim = 2\n[charts]\nids = 0 1 2\n\
             [map.1->0]\ndomain = invertible(u)\nmap = (inv(u), inv(u)*v)\n\
             [map.2->0]\ndomain = invertible(v)\nmap = (inv(v)*u, inv(v))\n\
             [map.2->1]\ndomain = invertible(u)\nmap = (inv(u)*v, inv(u))\n"
        ))
    }

    fn line(p: u64) -> Arc<GluingData> {
        data(&format!("[model]\nalgebra = Fp:{p}\ndim = 1\n[charts]\nids = 0 1\n[map.1->0]\ndomain = invertible(u)\nmap = inv(u)\n"))
    }

    fn doubled_origin(p: u64) -> Arc<GluingData> {
        data(&format!("[model]\nalgebra = Fp:{p}\ndim = 1\n[charts]\nids = 1 2\n[map.2->1]\ndomain = invertible(u)\nmap = u\n"))
    }

    fn model(g: &Arc<GluingData>) -> ManifoldModel {
        glue(g).unwrap()
    }

    #[test]
    fn identity_data_reconstructs_identity() {
        for g in [plane(2), plane(3), line(5), doubled_origin(3)] {
            let m = model(&g);
            let d = identity_data(g);
            let r = validate_morphism_data(&d);
            assert!(r.is_valid(), "{r}");
            assert!(is_full(&d, &m));
            let f = reconstruct_map(&d, &m, &m).unwrap();
            assert_eq!(f, (0..m.count_points()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn identity_data_equals_extracted_identity() {
        let g = plane(3);
        let m = model(&g);
        let id: Vec<usize> = (0..m.count_points()).collect();
        let d = extract_morphism_data(&m, &m, &id).unwrap();
        assert_eq!(d, identity_data(g.clone()));
        assert!(g.epos.indices().all(|i| d.f.contains(&(i, i))));
    }

    #[test]
    fn constant_data_is_valid_and_constant() {
        let g = plane(2);
        let m = model(&g);
        let f = vec![3; m.count_points()];
        let d = extract_morphism_data(&m, &m, &f).unwrap();
        assert!(validate_morphism_data(&d).is_valid());
        assert_eq!(reconstruct_map(&d, &m, &m).unwrap(), f);
        let expected: BTreeSet<(Index, Index)> = g
            .epos
            .indices()
            .filter(|&t| m.chart_map(t).contains_key(&3))
            .flat_map(|t| g.epos.indices().map(move |s| (t, s)))
            .collect();
        assert_eq!(d.f, expected);
    }

    #[test]
    fn broken_square_is_reported() {
        let g = plane(3);
        let mut d = identity_data(g.clone());
        let key = (g.index("1|{0,1}").unwrap(), g.index("0|{0,1}").unwrap());
        let c = d.components.get_mut(&key).unwrap();
        let keys: Vec<Point> = c.table.keys().take(2).cloned().collect();
        let (a, b) = (c.table[&keys[0]].clone(), c.table[&keys[1]].clone());
        c.table.insert(keys[0].clone(), b);
        c.table.insert(keys[1].clone(), a);
        let r = validate_morphism_data(&d);
        assert!(!r.is_valid());
        assert!(r.violation("SQUARE").is_some() || r.violation("RESTRICTION").is_some(), "{r}");
    }

    #[test]
    fn emptying_a_bottom_chart_breaks_fullness() {
        let g = doubled_origin(3);
        let m = model(&g);
        let d = identity_data(g.clone());
        let drop = g.index("1|{1}").unwrap();
        let mut e = d.clone();
        e.f.retain(|&(_, s)| s != drop);
        e.components.retain(|&(_, s), _| s != drop);
        e.r = maximal_r(&g, &g, &e.f);
        assert!(validate_morphism_data(&e).is_valid());
        let gap = fullness_gap(&e, &m).unwrap();
        assert!(gap.starts_with("((0), 1|{1})"), "{gap}");
    }

    const EMBED: &str = "[morphism]\nsource = kp1\ntarget = kp2\n\
        [mor.0->0]\nmap = (u, 0)\n[mor.1->1]\nmap = (u, 0)\n";

    #[test]
    fn line_embeds_in_plane() {
        let (s, t) = (line(3), plane(3));
        let d = morphism_data_from_file(&parse_morphism_file(EMBED).unwrap(), s.clone(), t.clone()).unwrap();
        let r = validate_morphism_data(&d);
        assert!(r.is_valid(), "{r}");
        let (ms, mt) = (model(&s), model(&t));
        let f = reconstruct_map(&d, &ms, &mt).unwrap();
        assert_eq!(f.iter().collect::<BTreeSet<_>>().len(), 4);
        // brute force: [x0 : x1] ↦ [x0 : x1 : 0]
        let proj = |c: usize, m: &ManifoldModel| -> Vec<u64> {
            let (x, i) = m.representative(c);
            let t: usize = m.source.name(i)[..1].parse().unwrap();
            let mut v: Vec<u64> = x.iter().map(|e| if let crate::algebra::Elem::Mod(a) = e { *a } else { 0 }).collect();
            v.insert(t, 1);
            v
        };
        for c in 0..ms.count_points() {
            let mut a = proj(c, &ms);
            a.push(0);
            let b = proj(f[c], &mt);
            let k = (0..3).find(|&k| a[k] != 0).unwrap();
            let s = b[k] * crate::algebra::field_inv(a[k], 3).unwrap() % 3;
            assert!(a.iter().zip(&b).all(|(x, y)| x * s % 3 == *y), "{a:?} vs {b:?}");
        }
        let id = identity_data(t.clone());
        let comp = compose_morphism_data(&id, &d).unwrap();
        assert_eq!(reconstruct_map(&comp, &ms, &mt).unwrap(), f);
    }

    #[test]
    fn composition_of_self_maps() {
        let g = line(3);
        let m = model(&g);
        let n = m.count_points();
        // f swaps the two charts, h scales the first coordinate by 2
        let f: Vec<usize> = (0..n)
            .map(|c| {
                let (x, i) = m.representative(c);
                let other = if i == g.index("0|{0}").unwrap() { "1|{1}" } else if i == g.index("1|{1}").unwrap() { "0|{0}" } else { unreachable!() };
                m.class(g.index(other).unwrap(), x).unwrap()
            })
            .collect();
        let h: Vec<usize> = (0..n)
            .map(|c| {
                let (x, i) = m.representative(c);
                let alg = &g.algebra;
                let two = alg.from_integer(2);
                let y = if g.name(i) == "0|{0}" { vec![alg.mul(&two, &x[0])] } else { vec![alg.mul(&alg.inv(&two).unwrap(), &x[0])] };
                m.class(i, &y).unwrap()
            })
            .collect();
        assert!(f != (0..n).collect::<Vec<_>>() && h != (0..n).collect::<Vec<_>>());
        assert!(atlas_continuous(&m, &m, &f).is_ok() && atlas_continuous(&m, &m, &h).is_ok());
        let (df, dh) = (extract_morphism_data(&m, &m, &f).unwrap(), extract_morphism_data(&m, &m, &h).unwrap());
        let c = compose_morphism_data(&dh, &df).unwrap();
        assert!(validate_morphism_data(&c).is_valid());
        let expected: Vec<usize> = f.iter().map(|&x| h[x]).collect();
        assert_eq!(reconstruct_map(&c, &m, &m).unwrap(), expected);
    }

    #[test]
    fn mismatched_boundary_is_an_error() {
        let (a, b) = (identity_data(line(3)), identity_data(plane(2)));
        assert!(matches!(compose_morphism_data(&a, &b), Err(MorphismError::Boundary(_))));
    }

    #[test]
    fn full_data_need_not_come_from_an_atlas_continuous_map() {
        let g = doubled_origin(3);
        let m = model(&g);
        let (z1, z2) = (m.class(g.index("1|{1}").unwrap(), &vec![crate::algebra::Elem::Mod(0)]).unwrap(), m.class(g.index("2|{2}").unwrap(), &vec![crate::algebra::Elem::Mod(0)]).unwrap());
        let one = m.class(g.index("1|{1}").unwrap(), &vec![crate::algebra::Elem::Mod(1)]).unwrap();
        let two = m.class(g.index("1|{1}").unwrap(), &vec![crate::algebra::Elem::Mod(2)]).unwrap();
        let mut f = vec![0; 4];
        f[z1] = one;
        f[one] = z1;
        f[two] = one;
        f[z2] = one;
        let d = extract_morphism_data(&m, &m, &f).unwrap();
        assert!(validate_morphism_data(&d).is_valid());
        assert!(is_full(&d, &m));
        assert!(atlas_continuous(&m, &m, &f).is_err());
        assert_eq!(reconstruct_map(&d, &m, &m).unwrap(), f);
    }

    #[test]
    fn atlas_continuous_maps_have_full_data() {
        let g = doubled_origin(3);
        let m = model(&g);
        let n = m.count_points();
        let mut seen = 0;
        for code in 0..n.pow(n as u32) {
            let f: Vec<usize> = (0..n).map(|k| code / n.pow(k as u32) % n).collect();
            if atlas_continuous(&m, &m, &f).is_ok() {
                seen += 1;
                let d = extract_morphism_data(&m, &m, &f).unwrap();
                assert!(is_full(&d, &m));
                assert_eq!(reconstruct_map(&d, &m, &m).unwrap(), f);
            }
        }
        assert!(seen > 1);
    }

    #[test]
    fn restricted_data_of_identity_is_diagonal_below() {
        let g = plane(2);
        let d = restricted_data(&identity_data(g.clone())).unwrap();
        assert!(d.f.iter().all(|&(t, s)| g.epos.le(s, t)));
        assert!(validate_morphism_data(&d).is_valid());
        let m = model(&g);
        assert_eq!(reconstruct_map(&d, &m, &m).unwrap(), (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn swapping_origins_is_not_recovered_from_restricted_data() {
        let g = doubled_origin(3);
        let m = model(&g);
        let zero = vec![crate::algebra::Elem::Mod(0)];
        let (z1, z2) = (m.class(g.index("1|{1}").unwrap(), &zero).unwrap(), m.class(g.index("2|{2}").unwrap(), &zero).unwrap());
        let mut f: Vec<usize> = (0..4).collect();
        f.swap(z1, z2);
        let d = extract_morphism_data(&m, &m, &f).unwrap();
        let p = reconstruct_partial(&restricted_data(&d).unwrap(), &m, &m).unwrap();
        assert!(!p.is_total());
        assert_eq!(p.undefined(), vec![z1.min(z2), z1.max(z2)]);
        let near: Vec<usize> = (0..4).collect();
        let dn = restricted_data(&extract_morphism_data(&m, &m, &near).unwrap()).unwrap();
        assert_eq!(reconstruct_map(&dn, &m, &m).unwrap(), near);
    }

    #[test]
    fn modes_agree() {
        let d = identity_data(plane(3));
        assert_eq!(validate_morphism_data_with(&d, Exec::Sequential), validate_morphism_data_with(&d, Exec::Parallel));
    }
}
