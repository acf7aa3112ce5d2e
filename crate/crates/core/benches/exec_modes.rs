use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use gluing_core::algebra::{alternative_battery_with, Algebra};
use gluing_core::atlas::{gluing_data_from_file, validate_gluing_data_with};
use gluing_core::builders::projective_space_kit;
use gluing_core::exec::Exec;
use gluing_core::reconstruct::{glue_with, relation_is_equivalence_with};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn modes(c: &mut Criterion) {
    let g = gluing_data_from_file(&projective_space_kit(&Algebra::prime(7).unwrap(), 2).unwrap()).unwrap();
    let octonions = Algebra::octonions();
    let mut group = c.benchmark_group("exec_modes");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("validate kp2_f7", name), &exec, |b, &e| {
            b.iter(|| validate_gluing_data_with(black_box(&g), e))
        });
        group.bench_with_input(BenchmarkId::new("glue kp2_f7", name), &exec, |b, &e| b.iter(|| glue_with(black_box(&g), e)));
        group.bench_with_input(BenchmarkId::new("relation kp2_f7", name), &exec, |b, &e| {
            b.iter(|| relation_is_equivalence_with(black_box(&g), e))
        });
        group.bench_with_input(BenchmarkId::new("octonion battery 200", name), &exec, |b, &e| {
            b.iter(|| alternative_battery_with(black_box(&octonions), 200, 1, e))
        });
    }
    group.finish();
}

criterion_group!(benches, modes);
criterion_main!(benches);
