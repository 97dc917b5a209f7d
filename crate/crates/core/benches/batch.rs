use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mapflow::batch::{solve_all, solve_all_sequential};
use mapflow::generate::grid_corpus;
use mapflow::{Mode, Objective};

fn batch(c: &mut Criterion) {
    let corpus = grid_corpus(42, 64, 10, 8, Mode::Unlabeled);
    let mut group = c.benchmark_group("solve_corpus");
    group.sample_size(10);
    for objective in [
        Objective::Feasible,
        Objective::Makespan,
        Objective::Distance,
    ] {
        group.bench_with_input(
            BenchmarkId::new("sequential", objective),
            &objective,
            |b, &o| b.iter(|| solve_all_sequential(&corpus, o)),
        );
        group.bench_with_input(BenchmarkId::new("rayon", objective), &objective, |b, &o| {
            b.iter(|| solve_all(&corpus, o))
        });
    }
    group.finish();
}

criterion_group!(benches, batch);
criterion_main!(benches);
