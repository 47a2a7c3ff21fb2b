use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use silab_core::freiman::{fit_locally_linear, is_freiman_hom, random_member, random_proper_gap, FreimanParams};
use silab_core::quadform::random_nondegenerate;
use silab_core::relgraph::{dd_number, mycielski_graph};
use silab_core::{FpVector, LocallyLinear, MIdeal, RelGraph};

const BUDGET: u128 = 1 << 24;

fn membership(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (p, d, s) = (7, 6, 2);
    let m = random_nondegenerate(p, d, &mut rng);
    let hs = [FpVector::unit(p, d, 0), FpVector::unit(p, d, 1)];
    c.bench_function("membership p=7 d=6 s=2", |b| {
        b.iter_batched(
            || {
                let ideal = MIdeal::of_vectors(&m, &hs).unwrap();
                let f = random_member(&ideal, s, &mut rng).unwrap();
                (ideal, f)
            },
            |(ideal, f)| ideal.contains(f.poly(), s as u32).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn density_dependence(c: &mut Criterion) {
    let c7 = RelGraph::cycle(7);
    let m4 = mycielski_graph(4);
    c.bench_function("dd C7", |b| b.iter(|| dd_number(black_box(&c7)).unwrap()));
    c.bench_function("dd Mycielski 4", |b| b.iter(|| dd_number(black_box(&m4)).unwrap()));
}

fn freiman_and_fit(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (p, d, s) = (11, 4, 1);
    let m = random_nondegenerate(p, d, &mut rng);
    let gap = random_proper_gap(p, d, 2, 2, &mut rng).unwrap();
    let pts = gap.elements(BUDGET).unwrap();
    let xi = LocallyLinear::random(p, d, 2, s, &mut rng).tabulate(&gap);
    let params = FreimanParams::exhaustive(2, BUDGET);
    c.bench_function("order-4 Freiman check, rank-2 GAP", |b| {
        b.iter(|| is_freiman_hom(&m, black_box(&pts), &xi, &params).unwrap())
    });
    c.bench_function("locally linear fit, rank-2 GAP", |b| {
        b.iter(|| fit_locally_linear(&m, black_box(&gap), &xi, BUDGET).unwrap())
    });
}

criterion_group!(benches, membership, density_dependence, freiman_and_fit);
criterion_main!(benches);
