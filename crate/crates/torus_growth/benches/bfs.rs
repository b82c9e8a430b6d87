use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use torus_growth::group_core::{bfs_ball_with, Exec, GroupParams};

fn bfs(c: &mut Criterion) {
    let mut group = c.benchmark_group("bfs_ball");
    group.sample_size(10);
    for (k, radius) in [(2u32, 8u32), (2, 10), (3, 9)] {
        let params = GroupParams::new(k).unwrap();
        for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
            group.bench_with_input(BenchmarkId::new(name, format!("k{k}_r{radius}")), &radius, |b, &r| {
                b.iter(|| bfs_ball_with(black_box(&params), r, usize::MAX, exec).unwrap().len())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bfs);
criterion_main!(benches);
