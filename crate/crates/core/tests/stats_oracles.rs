//! Spacing diagnostics on ensembles with known statistics.

use qrelax::linalg::{eigvalsh, SymmetricMatrix};
use qrelax::stats::{
    brody_fit, brody_pdf, ks_distance, poisson_cdf, spacing_stats, unfold_spectrum, wigner_cdf,
    UnfoldOptions,
};
use qrelax::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

fn goe_levels(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let h = SymmetricMatrix::from_lower_fn(n, |i, j| {
        let x: f64 = StandardNormal.sample(rng);
        if i == j {
            x * 2f64.sqrt()
        } else {
            x
        }
    })
    .unwrap();
    eigvalsh(&h).unwrap()
}

fn poisson_levels(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut e = 0.0;
    (0..n)
        .map(|_| {
            let gap: f64 = Exp1.sample(rng);
            e += gap;
            e
        })
        .collect()
}

#[test]
fn goe_spectrum_is_wigner_like() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let st = spacing_stats(&goe_levels(&mut rng, 600), &UnfoldOptions::default()).unwrap();
    assert!(st.brody_q > 0.8, "q = {}", st.brody_q);
    assert!(st.ks_wigner < st.ks_poisson);
    let mean = st.spacings.iter().sum::<f64>() / st.spacings.len() as f64;
    assert!((mean - 1.0).abs() < 1e-6);
}

#[test]
fn uncorrelated_levels_are_poisson_like() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let st = spacing_stats(&poisson_levels(&mut rng, 3000), &UnfoldOptions::default()).unwrap();
    assert!(st.brody_q < 0.15, "q = {}", st.brody_q);
    assert!(st.ks_poisson < st.ks_wigner);
}

#[test]
fn brody_fit_recovers_intermediate_q() {
    // Inverse-CDF sampling: F(s) = 1 − exp(−b s^{q+1}).
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for q in [0.3, 0.6] {
        let g = statrs::function::gamma::gamma((q + 2.0) / (q + 1.0));
        let b = g.powf(q + 1.0);
        let s: Vec<f64> = (0..20_000)
            .map(|_| {
                let u: f64 = rng.gen_range(0.0..1.0);
                (-(1.0 - u).ln() / b).powf(1.0 / (q + 1.0))
            })
            .collect();
        let fit = brody_fit(&s).unwrap();
        assert!((fit - q).abs() < 0.05, "q={q} fit={fit}");
    }
}

#[test]
fn brody_density_is_normalized_with_unit_mean() {
    for q in [0.0, 0.25, 0.5, 1.0, 1.2] {
        let ds = 1e-4;
        let (mut norm, mut mean) = (0.0, 0.0);
        for k in 0..200_000 {
            let s = (k as f64 + 0.5) * ds;
            let p = brody_pdf(s, q);
            norm += p * ds;
            mean += s * p * ds;
        }
        assert!((norm - 1.0).abs() < 1e-4, "q={q} norm={norm}");
        assert!((mean - 1.0).abs() < 1e-4, "q={q} mean={mean}");
    }
}

#[test]
fn ks_distance_of_exact_quantiles_is_half_a_step() {
    let n = 1000;
    let s: Vec<f64> = (0..n)
        .map(|i| -(1.0 - (i as f64 + 0.5) / n as f64).ln())
        .collect();
    assert!((ks_distance(&s, poisson_cdf) - 0.5 / n as f64).abs() < 1e-12);
    assert!(ks_distance(&s, wigner_cdf) > 0.05);
}

#[test]
fn picket_fence_is_rejected_by_the_fit() {
    let levels: Vec<f64> = (0..500).map(f64::from).collect();
    let spacings = unfold_spectrum(&levels, &UnfoldOptions::default()).unwrap();
    assert!(matches!(brody_fit(&spacings), Err(Error::Degenerate(_))));
}

#[test]
fn too_few_levels_is_an_error() {
    let levels: Vec<f64> = (0..50).map(|k| f64::from(k).powf(1.3)).collect();
    assert!(matches!(
        unfold_spectrum(&levels, &UnfoldOptions::default()),
        Err(Error::TooFewLevels { .. })
    ));
}
