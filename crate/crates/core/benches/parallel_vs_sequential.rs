use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sdhall::ff::FieldSpec;
use sdhall::hall::HallAlgebra;
use sdhall::par::Exec;
use sdhall::quiver::{Quiver, RepCategory};

fn dual_route(c: &mut Criterion) {
    let mut g = c.benchmark_group("dual_route_a2_q3");
    g.sample_size(10);
    for exec in [Exec::Sequential, Exec::Parallel] {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            Exec::set_current(exec);
            b.iter(|| {
                let cat = RepCategory::new(Quiver::linear_a(2), FieldSpec::new(3).unwrap());
                HallAlgebra::new(cat).dual_route_checks(4).unwrap()
            });
        });
    }
    g.finish();
}

fn table(c: &mut Criterion) {
    let mut g = c.benchmark_group("structure_table_a3_q2");
    g.sample_size(10);
    for exec in [Exec::Sequential, Exec::Parallel] {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            Exec::set_current(exec);
            b.iter(|| {
                let cat = RepCategory::new(Quiver::linear_a(3), FieldSpec::new(2).unwrap());
                HallAlgebra::new(cat).structure_table(4).unwrap()
            });
        });
    }
    g.finish();
}

criterion_group!(benches, dual_route, table);
criterion_main!(benches);
