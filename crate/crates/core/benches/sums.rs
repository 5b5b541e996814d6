use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use design_forge::chars::group_moment_with;
use design_forge::design::{frame_potentials_with, orbit_frame_potentials, SumOptions};
use design_forge::invariant::InvariantPolynomial;
use design_forge::matcore::{haar_random, seeded_rng};
use design_forge::par::Strategy;
use design_forge::presets::{sl32_group, sp43_group};

fn strategies() -> Vec<(&'static str, Strategy)> {
    vec![
        ("sequential", Strategy::Sequential),
        #[cfg(feature = "parallel")]
        ("parallel", Strategy::Parallel),
    ]
}

fn sums(c: &mut Criterion) {
    let sp43 = Arc::new(sp43_group().unwrap());
    let sl32 = Arc::new(sl32_group().unwrap());
    let f = InvariantPolynomial::new(sp43.clone(), "4,0,0,-4".parse().unwrap()).unwrap();
    let mut rng = seeded_rng(0);
    let u = haar_random(4, &mut rng);
    let set: Vec<_> = (0..400).map(|_| haar_random(4, &mut rng)).collect();
    let base = haar_random(3, &mut rng);

    let mut group = c.benchmark_group("sums");
    group.sample_size(10);
    for (name, strategy) in strategies() {
        group.bench_with_input(
            BenchmarkId::new("group_moment_sp43", name),
            &strategy,
            |b, &s| b.iter(|| group_moment_with(black_box(&sp43), 4, s)),
        );
        group.bench_with_input(BenchmarkId::new("eval_f_sp43", name), &strategy, |b, &s| {
            b.iter(|| f.eval_f_with(black_box(&u), s).unwrap())
        });
        group.bench_with_input(
            BenchmarkId::new("frame_potential_400", name),
            &strategy,
            |b, &s| b.iter(|| frame_potentials_with(black_box(&set), 4, s).unwrap()),
        );
        group.bench_with_input(
            BenchmarkId::new("orbit_fp_sl32", name),
            &strategy,
            |b, &s| {
                let options = SumOptions {
                    strategy: s,
                    ..Default::default()
                };
                b.iter(|| orbit_frame_potentials(&sl32, black_box(&base), 4, &options).unwrap())
            },
        );
    }
    group.finish();
}

criterion_group!(benches, sums);
criterion_main!(benches);
