use std::path::PathBuf;
use std::process::{Command, Output};

fn gluing(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gluing")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(name)
}

#[test]
fn validate_bundled_kit() {
    let o = gluing(&["validate", "kp2_f2.kit"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for k in 1..=4 {
        assert!(out.contains(&format!("CONDITION {k}: pass")), "{out}");
    }
}

#[test]
fn count_plane_over_f3() {
    let o = gluing(&["count", "kp2_f3.kit"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "13");
}

#[test]
fn dot_draws_twelve_nodes() {
    let out = stdout(&gluing(&["dot", "--epos", "kp2_f2.kit"]));
    assert!(out.starts_with("digraph"));
    let nodes = out.lines().filter(|l| l.trim_start().starts_with('"') && !l.contains("->")).count();
    assert_eq!(nodes, 12);
    assert!(out.contains("style=solid") && out.contains("style=dashed"));
}

#[test]
fn tangent_multiplies_counts() {
    for (kit, q, n) in [("kp1_f3", 3u64, 1u32), ("kp2_f2", 2, 2), ("kp2_f3", 3, 2), ("kp3_f2", 2, 3)] {
        let base: u64 = stdout(&gluing(&["count", kit])).trim().parse().unwrap();
        let path = scratch(&format!("{kit}_tangent.kit"));
        let o = gluing(&["tangent", kit, "-o", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        let tangent: u64 = stdout(&gluing(&["count", path.to_str().unwrap()])).trim().parse().unwrap();
        assert_eq!(tangent, base * q.pow(n), "{kit}");
    }
}

#[test]
fn validation_failure_exits_one() {
    let sphere = include_str!("../../core/kits/sphere.kit").replace("order = n_s<n, s_n<s", "order = n_s<n, s_n<s, n<n_s");
    let path = scratch("bad_sphere.kit");
    std::fs::write(&path, sphere).unwrap();
    let o = gluing(&["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("L_ANTISYMMETRIC: fail n <= n_s <= n"));
}

#[test]
fn usage_and_parse_errors_exit_two() {
    assert_eq!(gluing(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(gluing(&["count", "--bogus", "kp2_f2"]).status.code(), Some(2));
    assert_eq!(gluing(&["count", "no_such_kit"]).status.code(), Some(2));
    let path = scratch("garbled.kit");
    std::fs::write(&path, "[model]\nalgebra = Fp:4\n").unwrap();
    assert_eq!(gluing(&["validate", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn morphism_embedding_is_full() {
    let o = gluing(&["morphism", "embed_kp1_kp2_f3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("FULL: pass"));
    assert_eq!(out.lines().filter(|l| l.contains(" -> ")).count(), 4);
}

#[test]
fn octonion_plane_is_sampled() {
    let path = scratch("octonion_plane.kit");
    assert_eq!(gluing(&["build", "plane", "--algebra", "cd:Q:3", "-o", path.to_str().unwrap()]).status.code(), Some(0));
    let o = gluing(&["validate", path.to_str().unwrap(), "--samples", "40", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let path = scratch("sedenion_plane.kit");
    gluing(&["build", "plane", "--algebra", "cd:Q:4", "-o", path.to_str().unwrap()]);
    assert_eq!(gluing(&["validate", path.to_str().unwrap(), "--samples", "40"]).status.code(), Some(1));
}

#[test]
fn built_kits_match_bundled_ones() {
    let built = stdout(&gluing(&["build", "kp2", "--algebra", "Fp:3"]));
    let path = scratch("kp2_f3_built.kit");
    std::fs::write(&path, built).unwrap();
    assert_eq!(stdout(&gluing(&["count", path.to_str().unwrap()])).trim(), "13");
}

#[test]
fn output_is_deterministic() {
    for args in [["reconstruct", "kp2_f3"], ["validate", "group_3"], ["dot", "sphere"]] {
        assert_eq!(gluing(&args).stdout, gluing(&args).stdout);
    }
}

#[test]
fn catalog_lists_entries() {
    let out = stdout(&gluing(&["catalog"]));
    assert!(out.contains("kp2_f2") && out.contains("full_2") && out.contains("embed_kp1_kp2_f3"));
}
