//! Natural relations `(F, K; R)` between finite groupoids, their relational
//! and pointwise compositions, and a probe for the interchange law.
//!
//! Every relation is stored target-side first: `F, K ⊆ G₀' × G₀` as a
//! [`BitRelation`] with rows indexed by `G₀'`, and `R ⊆ G₁' × G₁` likewise.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::bitrel::BitRelation;
use crate::groupoid::{FiniteGroupoid, OrderedGroupoid};
use crate::report::{check, ValidationReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NatRelError {
    #[error("boundary mismatch: {0}")]
    Boundary(String),
    #[error("pointwise composition needs K of the first to equal F of the second")]
    StarMismatch,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NaturalRelation {
    pub source: Arc<FiniteGroupoid>,
    pub target: Arc<FiniteGroupoid>,
    pub f: BitRelation,
    pub k: BitRelation,
    pub r: BitRelation,
}

fn same(a: &Arc<FiniteGroupoid>, b: &Arc<FiniteGroupoid>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// `π₀` or `π₁` as a relation `G₀ × G₁`.
fn projection(g: &FiniteGroupoid, ends: &[usize]) -> BitRelation {
    BitRelation::from_pairs(g.object_count(), g.morphism_count(), ends.iter().enumerate().map(|(m, &x)| (x, m)))
}

impl NaturalRelation {
    pub fn is_special(&self) -> bool {
        self.f == self.k
    }

    /// `(Δ, Δ; Δ)` on one groupoid.
    pub fn identity(g: Arc<FiniteGroupoid>) -> Self {
        let (n, m) = (g.object_count(), g.morphism_count());
        Self { source: g.clone(), target: g, f: BitRelation::identity(n), k: BitRelation::identity(n), r: BitRelation::identity(m) }
    }

    /// `(K, K; {(δx', δx) : (x', x) ∈ K})`, the neutral element for `∗`
    /// on relations whose `K` (or `F`) is the given one.
    pub fn units(source: Arc<FiniteGroupoid>, target: Arc<FiniteGroupoid>, k: BitRelation) -> Self {
        let r = BitRelation::from_pairs(
            target.morphism_count(),
            source.morphism_count(),
            k.pairs().map(|(y, x)| (target.unit[y], source.unit[x])),
        );
        Self { source, target, f: k.clone(), k, r }
    }

    /// The partial orders of an ordered groupoid as an endorelation.
    pub fn order(og: &OrderedGroupoid) -> Self {
        let g = Arc::new(og.base.clone());
        Self {
            source: g.clone(),
            target: g,
            f: og.order_objects.clone(),
            k: og.order_objects.clone(),
            r: og.order_morphisms.clone(),
        }
    }

    fn fmt_pair(&self, h: usize, g: usize) -> String {
        format!("({}, {})", self.target.morphisms[h], self.source.morphisms[g])
    }
}

/// Checks `(NR)`: `(h, g) ∈ R` forces `(π₀h, π₀g) ∈ F` and `(π₁h, π₁g) ∈ K`.
/// The converse containments `F ∘ π₀ ⊆ π₀ ∘ R` and `K ∘ π₁ ⊆ π₁ ∘ R` are
/// reported as notes.
pub fn validate_nr(n: &NaturalRelation) -> ValidationReport {
    let (s, t) = (&*n.source, &*n.target);
    let mut r = ValidationReport::new();
    check(&mut r, "SHAPE", || {
        let obj = (t.object_count(), s.object_count());
        if (n.f.rows(), n.f.cols()) != obj || (n.k.rows(), n.k.cols()) != obj {
            Some(format!("F or K is not a relation on {} x {} objects", obj.0, obj.1))
        } else if (n.r.rows(), n.r.cols()) != (t.morphism_count(), s.morphism_count()) {
            Some("R is not a relation on morphisms".into())
        } else {
            None
        }
    });
    if !r.is_valid() {
        return r;
    }
    check(&mut r, "NR", || {
        n.r.pairs().find_map(|(h, g)| {
            if !n.f.contains(t.source[h], s.source[g]) {
                Some(format!("{} has sources ({}, {}) outside F", n.fmt_pair(h, g), t.objects[t.source[h]], s.objects[s.source[g]]))
            } else if !n.k.contains(t.target[h], s.target[g]) {
                Some(format!("{} has targets ({}, {}) outside K", n.fmt_pair(h, g), t.objects[t.target[h]], s.objects[s.target[g]]))
            } else {
                None
            }
        })
    });
    for (label, rel, ends_t, ends_s) in [("source", &n.f, &t.source, &s.source), ("target", &n.k, &t.target, &s.target)] {
        let via_r = projection(t, ends_t).compose(&n.r);
        let via_f = rel.compose(&projection(s, ends_s));
        let back = via_f.pairs().find(|&(x, g)| !via_r.contains(x, g));
        match back {
            None => r.note(format!("{label} projections: equality")),
            Some((x, g)) => r.note(format!(
                "{label} projections: containment only, ({}, {}) has no R-lift",
                t.objects[x], s.morphisms[g]
            )),
        }
    }
    if n.is_special() {
        r.note("special (F = K)");
    }
    r
}

/// `(F' ∘ F, K' ∘ K; R' ∘ R)` for `n1 : G → G'` and `n2 : G' → G''`.
pub fn compose_relational(n2: &NaturalRelation, n1: &NaturalRelation) -> Result<NaturalRelation, NatRelError> {
    if !same(&n1.target, &n2.source) {
        return Err(NatRelError::Boundary("target of the first relation is not the source of the second".into()));
    }
    Ok(NaturalRelation {
        source: n1.source.clone(),
        target: n2.target.clone(),
        f: n2.f.compose(&n1.f),
        k: n2.k.compose(&n1.k),
        r: n2.r.compose(&n1.r),
    })
}

/// `(F, K'; R' ∗ R)` for relations on the same pair of groupoids with
/// `K = F'`: all `(h' ∗ h, g' ∗ g)` with `(h', g') ∈ R'`, `(h, g) ∈ R`.
pub fn compose_star(n2: &NaturalRelation, n1: &NaturalRelation) -> Result<NaturalRelation, NatRelError> {
    if !same(&n1.source, &n2.source) || !same(&n1.target, &n2.target) {
        return Err(NatRelError::Boundary("pointwise composition needs the same groupoids".into()));
    }
    if n1.k != n2.f {
        return Err(NatRelError::StarMismatch);
    }
    let (s, t) = (&*n1.source, &*n1.target);
    let (by_src_s, by_src_t) = (s.by_source(), t.by_source());
    let mut r = BitRelation::empty(t.morphism_count(), s.morphism_count());
    for (h, g) in n1.r.pairs() {
        for &h2 in &by_src_t[t.target[h]] {
            let Some(hh) = t.compose(h2, h) else { continue };
            for &g2 in &by_src_s[s.target[g]] {
                if n2.r.contains(h2, g2) {
                    if let Some(gg) = s.compose(g2, g) {
                        r.insert(hh, gg);
                    }
                }
            }
        }
    }
    Ok(NaturalRelation { source: n1.source.clone(), target: n1.target.clone(), f: n1.f.clone(), k: n2.k.clone(), r })
}

/// `Ř = {(x, g) : (δx, g) ∈ R}`.
pub fn check_relation(n: &NaturalRelation) -> BTreeSet<(usize, usize)> {
    n.target
        .unit
        .iter()
        .enumerate()
        .flat_map(|(x, &u)| n.r.row(u).map(move |g| (x, g)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProbeOutcome {
    Equal,
    /// Relational-then-pointwise is strictly contained in the other order.
    StrictlyBelow,
    StrictlyAbove,
    Incomparable,
}

impl fmt::Display for ProbeOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProbeOutcome::Equal => "equal",
            ProbeOutcome::StrictlyBelow => "subset",
            ProbeOutcome::StrictlyAbove => "superset",
            ProbeOutcome::Incomparable => "incomparable",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeReport {
    pub outcome: ProbeOutcome,
    /// `(d ∘ c) ∗ (b ∘ a)`.
    pub relational_first: NaturalRelation,
    /// `(d ∗ b) ∘ (c ∗ a)`.
    pub star_first: NaturalRelation,
    pub only_relational_first: Option<(usize, usize)>,
    pub only_star_first: Option<(usize, usize)>,
}

impl fmt::Display for ProbeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} vs {} pairs)", self.outcome, self.relational_first.r.len(), self.star_first.r.len())?;
        if let Some((h, g)) = self.only_relational_first {
            write!(f, "; only relational-first: {}", self.relational_first.fmt_pair(h, g))?;
        }
        if let Some((h, g)) = self.only_star_first {
            write!(f, "; only star-first: {}", self.star_first.fmt_pair(h, g))?;
        }
        Ok(())
    }
}

/// Evaluates a grid in both orders. `a, c : G → G'` and `b, d : G' → G''`,
/// with `K_a = F_c` and `K_b = F_d`.
pub fn interchange_probe(
    a: &NaturalRelation,
    b: &NaturalRelation,
    c: &NaturalRelation,
    d: &NaturalRelation,
) -> Result<ProbeReport, NatRelError> {
    let left = compose_star(&compose_relational(d, c)?, &compose_relational(b, a)?)?;
    let right = compose_relational(&compose_star(d, b)?, &compose_star(c, a)?)?;
    let only_l = left.r.pairs().find(|&(h, g)| !right.r.contains(h, g));
    let only_r = right.r.pairs().find(|&(h, g)| !left.r.contains(h, g));
    let outcome = match (only_l, only_r) {
        (None, None) => ProbeOutcome::Equal,
        (None, Some(_)) => ProbeOutcome::StrictlyBelow,
        (Some(_), None) => ProbeOutcome::StrictlyAbove,
        (Some(_), Some(_)) => ProbeOutcome::Incomparable,
    };
    Ok(ProbeReport { outcome, relational_first: left, star_first: right, only_relational_first: only_l, only_star_first: only_r })
}

/// Tally of probe outcomes, printed as a table.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProbeSummary {
    pub counts: BTreeMap<ProbeOutcome, usize>,
}

impl ProbeSummary {
    pub fn add(&mut self, o: ProbeOutcome) {
        *self.counts.entry(o).or_default() += 1;
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

impl fmt::Display for ProbeSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<14} {:>6}", "outcome", "grids")?;
        for o in [ProbeOutcome::Equal, ProbeOutcome::StrictlyBelow, ProbeOutcome::StrictlyAbove, ProbeOutcome::Incomparable] {
            writeln!(f, "{:<14} {:>6}", o.to_string(), self.counts.get(&o).copied().unwrap_or(0))?;
        }
        write!(f, "{:<14} {:>6}", "total", self.total())
    }
}
