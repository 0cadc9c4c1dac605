//! Parallel-versus-sequential throughput on the two heaviest batch shapes:
//! the Boolean-algebra law battery and cylinder-map reconstruction.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use fullgroup::sample::{random_element, seeded_rng};
use fullgroup::suites::{boolean_algebra_suite, SuiteConfig};
use fullgroup::{reconstruct_boolean_map, OracleSpec};

fn cfg(parallel: bool) -> SuiteConfig {
    SuiteConfig {
        seed: 0xbe9c4,
        parallel,
    }
}

fn algebra_battery(c: &mut Criterion) {
    let mut group = c.benchmark_group("boolean_algebra_battery");
    group.sample_size(20);
    for parallel in [false, true] {
        let label = if parallel { "parallel" } else { "sequential" };
        group.bench_function(label, |b| {
            b.iter(|| {
                let out = boolean_algebra_suite(black_box(&cfg(parallel)));
                assert!(out.passed());
                black_box(out.cases)
            })
        });
    }
    group.finish();
}

fn map_reconstruction(c: &mut Criterion) {
    let mut rng = seeded_rng(0x51ab);
    let conjugator = random_element(&mut rng, 3, 4, 5).unwrap();
    let oracle = OracleSpec::Inner(conjugator).build().unwrap();
    let mut group = c.benchmark_group("reconstruct_depth_3");
    group.sample_size(20);
    for parallel in [false, true] {
        let label = if parallel { "parallel" } else { "sequential" };
        group.bench_function(label, |b| {
            b.iter(|| {
                let map = reconstruct_boolean_map(black_box(&oracle), 3, parallel).unwrap();
                black_box(map.depth())
            })
        });
    }
    group.finish();
}

criterion_group!(benches, algebra_battery, map_reconstruction);
criterion_main!(benches);
