//! One fig23-style sweep on a single worker versus the default pool.
//! `cargo bench --no-default-features` measures the sequential build.

use criterion::{criterion_group, criterion_main, Criterion};
use qrelax::runner::{run_fig2_fig3_sweep, run_fig4_sweep, ExperimentConfig};

const MODE: &str = if cfg!(feature = "parallel") { "rayon" } else { "sequential" };

fn config(workers: usize) -> ExperimentConfig {
    ExperimentConfig::from_toml_str(&format!(
        r#"
[model]
kind = "dicke"
j = 4
n_max = 60

[sweep]
lambda0 = [0.2, 0.4, 0.6, 0.8]
delta_lambda = [0.1]
n0 = [10, 50, 150]

[window]
tau0 = 1e7
span = 250.0
n_steps = 200

[run]
workers = {workers}
"#
    ))
    .unwrap()
}

fn sweeps(c: &mut Criterion) {
    let mut g = c.benchmark_group(format!("sweep_{MODE}"));
    g.sample_size(10);
    for (label, workers) in [("workers_1", 1), ("workers_default", 0)] {
        let cfg = config(workers);
        g.bench_function(format!("fig23/{label}"), |b| {
            b.iter(|| run_fig2_fig3_sweep(&cfg).unwrap())
        });
        let mut cfg4 = cfg.clone();
        cfg4.sweep.delta_lambda = vec![0.0, 1e-3, 1e-2, 0.1, 1.0];
        g.bench_function(format!("fig4/{label}"), |b| {
            b.iter(|| run_fig4_sweep(&cfg4).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, sweeps);
criterion_main!(benches);
