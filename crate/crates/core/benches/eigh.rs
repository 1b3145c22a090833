use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use qrelax::linalg::{eigh, eigvalsh, jacobi_eigh, SymmetricMatrix};
use qrelax::models::{build_dicke, DickeParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_symmetric(n: usize) -> SymmetricMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
    SymmetricMatrix::from_lower_fn(n, |_, _| rng.gen_range(-1.0..1.0)).unwrap()
}

fn dense(c: &mut Criterion) {
    let mut g = c.benchmark_group("eigh_dense");
    g.sample_size(10);
    for n in [64, 256, 512] {
        let h = random_symmetric(n);
        g.bench_with_input(BenchmarkId::new("vectors", n), &h, |b, h| {
            b.iter(|| eigh(black_box(h)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("values", n), &h, |b, h| {
            b.iter(|| eigvalsh(black_box(h)).unwrap())
        });
    }
    let h = random_symmetric(48);
    g.bench_function("jacobi/48", |b| b.iter(|| jacobi_eigh(black_box(&h)).unwrap()));
    g.finish();
}

fn dicke(c: &mut Criterion) {
    // Banded in the photon-major ordering: the values-only path exploits it.
    let mut g = c.benchmark_group("eigh_dicke");
    g.sample_size(10);
    for (j, n_max) in [(4.0, 60), (6.0, 100)] {
        let p = DickeParams::resonant(j, 0.7, n_max).unwrap();
        let h = build_dicke(&p).unwrap().matrix;
        let id = format!("j{j}_nmax{n_max}_dim{}", h.dim());
        g.bench_with_input(BenchmarkId::new("vectors", &id), &h, |b, h| {
            b.iter(|| eigh(black_box(h)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("values_band", &id), &h, |b, h| {
            b.iter(|| eigvalsh(black_box(h)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, dense, dicke);
criterion_main!(benches);
