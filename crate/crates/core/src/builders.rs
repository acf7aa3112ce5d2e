//! Standard examples: projective spaces, spheres, the doubled origin and the
//! atlases made of all local bijections or all bijections of a finite set.

use thiserror::Error;

use crate::algebra::{alternative_battery, fmt_point, sample_invertible, sample_rng, Algebra, Elem, Point};
use crate::atlas::{cocycle_index_name, extract_gluing_data, gluing_data_from_file, AtlasError, Chart, ConcreteAtlas, GluingData};
use crate::dsl::{coord_names, parse_gluing_file, parse_morphism_file, GluingFile, MapSpec, MorphismFile, ParseError};
use crate::groupoid::{EPos, Index};
use crate::pseudogroup::{bijections_from, PartialBijection, Pseudogroup};
use crate::report::{check, ValidationReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuildError {
    #[error("{0} is out of range")]
    Range(String),
    #[error("{0} is not associative")]
    NonAssociative(String),
    #[error("unknown catalog entry {0}")]
    Unknown(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Atlas(#[from] AtlasError),
    #[error("invalid atlas:\n{0}")]
    Invalid(Box<ValidationReport>),
}

pub const KP2_F2: &str = include_str!("../kits/kp2_f2.kit");
pub const KP2_F3: &str = include_str!("../kits/kp2_f3.kit");
pub const KP1_F3: &str = include_str!("../kits/kp1_f3.kit");
pub const KP3_F2: &str = include_str!("../kits/kp3_f2.kit");
pub const DOUBLED_ORIGIN_F5: &str = include_str!("../kits/doubled_origin_f5.kit");
pub const SPHERE: &str = include_str!("../kits/sphere.kit");
pub const EMBED_KP1_KP2_F3: &str = include_str!("../kits/embed_kp1_kp2_f3.mor");

/// `n`, `s` and their restrictions `n_s`, `s_n` to the overlap.
pub fn sphere_epos() -> EPos {
    let names = ["n", "s", "n_s", "s_n"].map(String::from).to_vec();
    EPos::from_generators(names, [(Index(2), Index(3))], [(Index(2), Index(0)), (Index(3), Index(1))])
}

/// Edges `(β, β ∪ {t})` of the `(n+1)`-cube, named `t|α` with `α = β ∪ {t}`.
/// Edges are E-equivalent when `α` agrees, and `t|α' ≤ t|α` when `α' ⊇ α`.
/// Indices are ordered by `t`, then by `α` as a bitmask.
pub fn projective_epos(n: usize) -> Result<EPos, BuildError> {
    if !(1..=6).contains(&n) {
        return Err(BuildError::Range(format!("dimension {n}")));
    }
    let charts: Vec<String> = (0..=n).map(|k| k.to_string()).collect();
    let mut edges: Vec<(usize, u64)> = Vec::new();
    for t in 0..=n {
        for a in 0u64..(1 << (n + 1)) {
            if a & (1 << t) != 0 {
                edges.push((t, a));
            }
        }
    }
    let names = edges.iter().map(|&(t, a)| cocycle_index_name(&charts, t, a)).collect();
    let pairs = |rel: &dyn Fn(&(usize, u64), &(usize, u64)) -> bool| -> Vec<(Index, Index)> {
        let mut out = Vec::new();
        for (i, x) in edges.iter().enumerate() {
            for (j, y) in edges.iter().enumerate() {
                if rel(x, y) {
                    out.push((Index(i as u32), Index(j as u32)));
                }
            }
        }
        out
    };
    let equiv = pairs(&|x, y| x.1 == y.1);
    let order = pairs(&|x, y| x.0 == y.0 && x.1 & y.1 == y.1);
    Ok(EPos::from_generators(names, equiv, order))
}

fn coordinate_vars(dim: usize) -> Vec<String> {
    coord_names(dim)
        .into_iter()
        .enumerate()
        .map(|(k, x)| match (dim, k) {
            (1, 0) | (2, 0) => "u".into(),
            (2, 1) => "v".into(),
            _ => x,
        })
        .collect()
}

/// Kit text for `KPⁿ`: chart `t` has coordinates `x_k / x_t`, `k ≠ t`, in
/// increasing `k`, and the map `s->t` (for `s > t`) is
/// `x_k/x_t = (x_t/x_s)⁻¹ (x_k/x_s)`, defined where `x_t/x_s` is invertible.
fn projective_text(alg: &Algebra, n: usize, title: &str) -> String {
    let vars = coordinate_vars(n);
    let mut out = format!("# {title}\n[model]\nalgebra = {alg}\ndim = {n}\n\n[charts]\nids =");
    for k in 0..=n {
        out.push_str(&format!(" {k}"));
    }
    out.push('\n');
    for s in 0..=n {
        for t in 0..s {
            let var = |k: usize| &vars[if k < s { k } else { k - 1 }];
            let yt = var(t);
            let comps: Vec<String> = (0..=n)
                .filter(|&k| k != t)
                .map(|k| if k == s { format!("inv({yt})") } else { format!("inv({yt})*{}", var(k)) })
                .collect();
            let map = if comps.len() == 1 { comps[0].clone() } else { format!("({})", comps.join(", ")) };
            out.push_str(&format!("\n[map.{s}->{t}]\ndomain = invertible({yt})\nmap = {map}\n"));
        }
    }
    out
}

/// The projective plane with transitions
/// `1->0 = (u⁻¹, u⁻¹v)`, `2->0 = (u⁻¹v, u⁻¹)`, `2->1 = (v⁻¹u, v⁻¹)`,
/// parenthesized as written, so it also makes sense over alternative algebras.
pub fn projective_plane_kit(alg: &Algebra) -> GluingFile {
    let text = projective_text(alg, 2, "projective plane");
    parse_gluing_file(&text).expect("generated kit parses")
}

/// `KPⁿ` over an associative algebra by coordinate ratios. For `n = 2` this
/// is [`projective_plane_kit`]; for `n ≥ 3` the maps are the usual associative
/// formulas, not taken from the plane.
pub fn projective_space_kit(alg: &Algebra, n: usize) -> Result<GluingFile, BuildError> {
    if !(1..=4).contains(&n) {
        return Err(BuildError::Range(format!("dimension {n}")));
    }
    if n >= 3 && !alg.is_associative() {
        return Err(BuildError::NonAssociative(alg.to_string()));
    }
    let title = match n {
        1 => "projective line".to_string(),
        2 => "projective plane".to_string(),
        _ => format!("projective {n}-space"),
    };
    Ok(parse_gluing_file(&projective_text(alg, n, &title))?)
}

/// Two copies of `F_p` glued along `F_p^×` by the identity.
pub fn doubled_origin_kit(p: u64) -> Result<GluingFile, BuildError> {
    let alg = Algebra::prime(p).map_err(|_| BuildError::Range(format!("p = {p}")))?;
    let text = format!("[model]\nalgebra = {alg}\ndim = 1\n\n[charts]\nids = 1 2\n\n[map.2->1]\ndomain = invertible(u)\nmap = u\n");
    Ok(parse_gluing_file(&text)?)
}

fn smallest_prime_at_least(n: usize) -> u64 {
    (n.max(2) as u64..).find(|&p| (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0)).unwrap()
}

fn chart_of(f: &PartialBijection) -> Chart {
    Chart { name: f.to_string(), map: f.pairs().iter().map(|&(x, y)| (x, vec![Elem::Mod(y as u64)])).collect() }
}

/// `M = V = {0, .., n-1}` inside `F_p`, `p` the least prime `≥ max(n, 2)`.
fn model_line(n: usize) -> Algebra {
    Algebra::Prime(smallest_prime_at_least(n))
}

/// All nonempty local bijections of `V = {0, .., n-1}` as charts of `M = V`.
pub fn full_atlas_example(n: usize) -> Result<ConcreteAtlas, BuildError> {
    if !(1..=3).contains(&n) {
        return Err(BuildError::Range(format!("|V| = {n}")));
    }
    let mut charts: Vec<Chart> = (1u64..(1 << n)).flat_map(|d| bijections_from(n, d)).map(|f| chart_of(&f)).collect();
    charts.sort_by(|a, b| a.map.cmp(&b.map));
    Ok(ConcreteAtlas { carrier: n, algebra: model_line(n), dim: 1, charts })
}

/// All bijections of `V = {0, .., n-1}`, each with domain all of `M = V`.
pub fn group_atlas_example(n: usize) -> Result<ConcreteAtlas, BuildError> {
    if !(1..=4).contains(&n) {
        return Err(BuildError::Range(format!("|V| = {n}")));
    }
    let charts = bijections_from(n, (1 << n) - 1)
        .into_iter()
        .filter(|f| f.domain() == (1 << n) - 1 && f.image() == (1 << n) - 1)
        .map(|f| chart_of(&f))
        .collect();
    Ok(ConcreteAtlas { carrier: n, algebra: model_line(n), dim: 1, charts })
}

/// Local bijections of `{0, .., n-1}` as a pseudogroup on the points of the
/// line used by [`full_atlas_example`].
pub fn local_bijections_of(n: usize) -> Pseudogroup {
    let p = smallest_prime_at_least(n) as usize;
    let objects = (0u64..(1 << n)).collect();
    let morphisms = (0u64..(1 << n))
        .flat_map(|d| bijections_from(n, d))
        .map(|f| PartialBijection::new(p, f.pairs().iter().copied()).expect("injective"))
        .collect();
    Pseudogroup::Explicit { n: p, objects, morphisms }
}

/// Sampled checks of the plane's transitions over an infinite algebra:
/// the inverse identities, `φ₀₁ ∘ φ₁₂ = φ₀₂` on `V₀₁₂`, `φ₀₁² = φ₁₂² = id`,
/// and `φ₂₀ ∘ φ₀₂ = id` with `φ₂₀(a, b) = (b⁻¹, b⁻¹a)`.
pub fn plane_sample_report(alg: &Algebra, samples: usize, seed: u64) -> ValidationReport {
    let kit = projective_plane_kit(alg);
    let map = |from: &str, to: &str| kit.map(from, to).expect("plane kit map").map.clone();
    let (p01, p02, p12) = (map("1", "0"), map("2", "0"), map("2", "1"));
    let p20 = MapSpec::parse("(inv(v), inv(v)*u)").expect("valid formula");
    let points: Vec<Point> = (0..samples as u64)
        .filter_map(|k| {
            let mut rng = sample_rng(seed, k);
            Some(vec![sample_invertible(alg, &mut rng)?, sample_invertible(alg, &mut rng)?])
        })
        .collect();
    let mut r = ValidationReport::new();
    let battery = alternative_battery(alg, samples, seed);
    r.record("IDENTITIES", (!battery.holds()).then(|| battery.to_string()));
    let law = |r: &mut ValidationReport, name: &str, left: &dyn Fn(&Point) -> Option<Point>, right: &dyn Fn(&Point) -> Option<Point>| {
        check(r, name, || {
            points.iter().find_map(|x| {
                let (a, b) = (left(x), right(x));
                (a.is_none() || a != b).then(|| {
                    let show = |p: Option<Point>| p.map(|p| fmt_point(&p)).unwrap_or("undefined".into());
                    format!("at {}: {} vs {}", fmt_point(x), show(a), show(b))
                })
            })
        });
    };
    let ev = |m: &MapSpec, x: &Point| m.eval(alg, x).ok();
    law(&mut r, "COCYCLE", &|x| ev(&p01, &ev(&p12, x)?), &|x| ev(&p02, x));
    law(&mut r, "INVOLUTION 01", &|x| ev(&p01, &ev(&p01, x)?), &|x| Some(x.clone()));
    law(&mut r, "INVOLUTION 12", &|x| ev(&p12, &ev(&p12, x)?), &|x| Some(x.clone()));
    law(&mut r, "INVERSE 02", &|x| ev(&p20, &ev(&p02, x)?), &|x| Some(x.clone()));
    r.note(format!("{} sampled points of V_012 over {alg}, seed {seed}", points.len()));
    r
}

/// Names accepted by [`catalog_gluing_data`].
pub const CATALOG: [(&str, &str); 8] = [
    ("kp2_f2", "projective plane over F_2"),
    ("kp2_f3", "projective plane over F_3"),
    ("kp1_f3", "projective line over F_3"),
    ("kp3_f2", "projective 3-space over F_2"),
    ("doubled_origin_f5", "line with a doubled origin over F_5"),
    ("sphere", "two stereographic charts over F_5"),
    ("full_2", "all local bijections of a 2-point set"),
    ("group_3", "all bijections of a 3-point set"),
];

/// Kit text of a file-backed catalog entry.
pub fn catalog_text(name: &str) -> Option<&'static str> {
    Some(match name {
        "kp2_f2" => KP2_F2,
        "kp2_f3" => KP2_F3,
        "kp1_f3" => KP1_F3,
        "kp3_f2" => KP3_F2,
        "doubled_origin_f5" => DOUBLED_ORIGIN_F5,
        "sphere" => SPHERE,
        _ => return None,
    })
}

pub fn catalog_atlas(name: &str) -> Option<ConcreteAtlas> {
    match name {
        "full_2" => full_atlas_example(2).ok(),
        "group_3" => group_atlas_example(3).ok(),
        _ => None,
    }
}

pub fn catalog_gluing_data(name: &str) -> Result<GluingData, BuildError> {
    if let Some(text) = catalog_text(name) {
        return Ok(gluing_data_from_file(&parse_gluing_file(text)?)?);
    }
    let atlas = catalog_atlas(name).ok_or_else(|| BuildError::Unknown(name.into()))?;
    extract_gluing_data(&atlas).map_err(BuildError::Invalid)
}

pub fn embedding_morphism_file() -> MorphismFile {
    parse_morphism_file(EMBED_KP1_KP2_F3).expect("bundled morphism kit parses")
}

/// Point counts by brute force: classes of `F_pⁿ⁺¹ ∖ 0` under scalars, each
/// normalized so its first nonzero coordinate is 1.
pub fn projective_points(p: u64, n: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    for code in 1..p.pow(n as u32 + 1) {
        let v: Vec<u64> = (0..=n).map(|k| code / p.pow(k as u32) % p).collect();
        if v.iter().find(|&&a| a != 0) == Some(&1) {
            out.push(v);
        }
    }
    out
}

/// Homogeneous coordinates of a point given in chart `t` coordinates
/// (`x_t = 1`, others in increasing order), normalized as in
/// [`projective_points`].
pub fn homogeneous(p: u64, t: usize, x: &[Elem]) -> Vec<u64> {
    let mut v: Vec<u64> = x.iter().map(|e| if let Elem::Mod(a) = e { *a } else { panic!("not a prime-field point") }).collect();
    v.insert(t, 1);
    let lead = *v.iter().find(|&&a| a != 0).expect("nonzero");
    let s = crate::algebra::field_inv(lead, p).expect("nonzero lead");
    v.iter().map(|a| a * s % p).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::{check_condition_3prime, check_type_g, generate_from_cocycle, validate_gluing_data};
    use crate::groupoid::{epos_isomorphism, validate_epos};
    use crate::reconstruct::{glue, maximal_atlas_of, same_charts};

    #[test]
    fn sphere_epos_shape() {
        let e = sphere_epos();
        assert_eq!(e.len(), 4);
        assert_eq!(e.classes().len(), 3);
        assert!(validate_epos(&e).is_valid());
    }

    #[test]
    fn projective_epos_sizes() {
        for (n, size) in [(1, 4), (2, 12), (4, 80)] {
            let e = projective_epos(n).unwrap();
            assert_eq!(e.len(), size);
            assert!(validate_epos(&e).is_valid());
        }
        assert!(projective_epos(0).is_err() && projective_epos(7).is_err());
        assert!(epos_isomorphism(&projective_epos(1).unwrap(), &sphere_epos()).is_some());
    }

    #[test]
    fn projective_epos_matches_generated_kits() {
        for p in [2, 3, 5] {
            let g = generate_from_cocycle(&projective_plane_kit(&Algebra::Prime(p))).unwrap();
            let e = projective_epos(2).unwrap();
            assert!(epos_isomorphism(&e, &g.epos).is_some());
            assert_eq!(e, g.epos);
        }
    }

    #[test]
    fn bundled_kits_match_builders() {
        assert_eq!(parse_gluing_file(KP2_F2).unwrap(), projective_plane_kit(&Algebra::Prime(2)));
        assert_eq!(parse_gluing_file(KP2_F3).unwrap(), projective_space_kit(&Algebra::Prime(3), 2).unwrap());
        assert_eq!(parse_gluing_file(KP1_F3).unwrap(), projective_space_kit(&Algebra::Prime(3), 1).unwrap());
        assert_eq!(parse_gluing_file(KP3_F2).unwrap(), projective_space_kit(&Algebra::Prime(2), 3).unwrap());
        assert_eq!(parse_gluing_file(DOUBLED_ORIGIN_F5).unwrap(), doubled_origin_kit(5).unwrap());
    }

    #[test]
    fn plane_kit_is_the_n2_space_kit() {
        let alg = Algebra::octonions();
        assert_eq!(projective_plane_kit(&alg), projective_space_kit(&alg, 2).unwrap());
        assert!(matches!(projective_space_kit(&alg, 3), Err(BuildError::NonAssociative(_))));
    }

    #[test]
    fn projective_point_counts() {
        for (p, n, count) in [(3, 2, 13), (2, 3, 15), (5, 1, 6), (2, 2, 7)] {
            let kit = projective_space_kit(&Algebra::Prime(p), n).unwrap();
            let m = glue(&generate_from_cocycle(&kit).unwrap()).unwrap();
            assert_eq!(m.count_points(), count);
            assert_eq!(projective_points(p, n).len(), count);
        }
    }

    #[test]
    fn doubled_origin_counts() {
        for (p, count) in [(5, 6), (2, 3)] {
            let g = generate_from_cocycle(&doubled_origin_kit(p).unwrap()).unwrap();
            assert_eq!(glue(&g).unwrap().count_points(), count);
        }
    }

    #[test]
    fn catalog_entries_are_valid() {
        for (name, _) in CATALOG {
            let g = catalog_gluing_data(name).unwrap();
            let r = validate_gluing_data(&g);
            assert!(r.is_valid(), "{name}: {r}");
        }
        assert_eq!(glue(&catalog_gluing_data("sphere").unwrap()).unwrap().count_points(), 6);
        assert!(matches!(catalog_gluing_data("nope"), Err(BuildError::Unknown(_))));
    }

    #[test]
    fn full_atlas_sizes_and_maximality() {
        assert_eq!(full_atlas_example(1).unwrap().charts.len(), 1);
        let a = full_atlas_example(2).unwrap();
        assert_eq!(a.charts.len(), 6);
        assert!(a.validate().is_valid());
        let max = maximal_atlas_of(&a, &local_bijections_of(2), 4).unwrap();
        assert!(same_charts(&max, &a));
        let g = extract_gluing_data(&full_atlas_example(3).unwrap()).unwrap();
        assert!(check_type_g(&g, &local_bijections_of(3)).unwrap());
    }

    #[test]
    fn group_atlas_shape() {
        let a = group_atlas_example(3).unwrap();
        assert_eq!(a.charts.len(), 6);
        assert!(check_condition_3prime(&a).is_valid());
        let g = extract_gluing_data(&a).unwrap();
        assert_eq!(g.epos.classes().len(), 1);
        let f = g.index(&a.charts[1].name).unwrap();
        let h = g.index(&a.charts[4].name).unwrap();
        let t = &g.trans[&(f, h)].table;
        assert_eq!(t.len(), 3);
        for (x, y) in t {
            // φ_fh = f ∘ h⁻¹
            let hx = a.charts[4].map.iter().find(|(_, p)| *p == x).map(|(m, _)| *m).unwrap();
            assert_eq!(&a.charts[1].map[&hx], y);
        }
        assert_eq!(group_atlas_example(1).unwrap().charts.len(), 1);
    }

    #[test]
    fn octonion_plane_sampled() {
        let r = plane_sample_report(&Algebra::octonions(), 60, 7);
        assert!(r.is_valid(), "{r}");
    }

    #[test]
    fn homogeneous_coordinates_normalize() {
        assert_eq!(homogeneous(3, 1, &[Elem::Mod(2), Elem::Mod(1)]), vec![1, 2, 2]);
    }
}
