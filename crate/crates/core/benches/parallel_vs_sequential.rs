use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use divstab::rational::ratio;
use divstab::stability::{self, Settings};
use divstab::{catalog, DivisorialMeasure, Execution};

const STRATEGIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn norm_multistart(c: &mut Criterion) {
    let mut group = c.benchmark_group("norm_multistart");
    group.sample_size(10);
    for (name, a, b) in [("Bl_pP2", "ord_E", "line"), ("Bl_pP2_toric", "ord_E", "e1")] {
        let model = catalog::by_name(name).unwrap();
        let l = catalog::anticanonical(&*model);
        let mu = DivisorialMeasure::new(vec![(model.valuation(a).unwrap(), ratio(2, 3)), (model.valuation(b).unwrap(), ratio(1, 3))]).unwrap();
        for (label, execution) in STRATEGIES {
            let settings = Settings {
                starts: 16,
                execution,
                ..Settings::default()
            };
            group.bench_with_input(BenchmarkId::new(label, name), &settings, |b, s| {
                b.iter(|| stability::norm(&*model, &l, black_box(&mu), s).unwrap())
            });
        }
    }
    group.finish();
}

fn section_basis(c: &mut Criterion) {
    let mut group = c.benchmark_group("section_basis");
    for (label, execution) in STRATEGIES {
        let p2 = catalog::p2_toric().with_execution(execution);
        let l = p2.class(&[0, 0, 3]);
        group.bench_function(BenchmarkId::new(label, "P2 3H k=60"), |b| b.iter(|| p2.section_basis(&l, black_box(60)).unwrap()));
    }
    group.finish();
}

fn delta_candidates(c: &mut Criterion) {
    let mut group = c.benchmark_group("delta_toric_candidates");
    group.sample_size(10);
    let model = catalog::p1xp1_toric();
    let candidates = stability::toric_candidates(&model, 3).unwrap();
    for (label, execution) in STRATEGIES {
        let settings = Settings {
            execution,
            ..Settings::default()
        };
        group.bench_with_input(BenchmarkId::new(label, candidates.len()), &settings, |b, s| {
            b.iter(|| stability::delta_anticanonical(&model, black_box(&candidates), s).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, norm_multistart, section_basis, delta_candidates);
criterion_main!(benches);
