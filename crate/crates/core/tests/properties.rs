use proptest::prelude::*;
use qrelax::linalg::{eigh, SymmetricMatrix};
use qrelax::quench::{
    diagonal_ensemble, diagonal_entropy, entropy_trace, ipr, overlap_matrix,
    survival_distribution, DistributionOverBasis,
};
use qrelax::stats::{
    unfold_spectrum, universal_curve, window_stats, TimeWindow, UnfoldOptions, UNIVERSAL_GAP,
};

fn sorted_levels() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, 150..400).prop_map(|gaps| {
        let mut e = -3.0;
        gaps.into_iter()
            .map(|g| {
                e += g;
                e
            })
            .collect()
    })
}

fn symmetric(n: usize) -> impl Strategy<Value = SymmetricMatrix> {
    prop::collection::vec(-1.0f64..1.0, n * n)
        .prop_map(move |v| SymmetricMatrix::from_lower_fn(n, |i, j| v[i * n + j]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unfolding_is_scale_invariant(levels in sorted_levels(), c in 1e-3f64..1e3) {
        let opts = UnfoldOptions::default();
        let a = unfold_spectrum(&levels, &opts).unwrap();
        let scaled: Vec<f64> = levels.iter().map(|e| c * e).collect();
        let b = unfold_spectrum(&scaled, &opts).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-8, "{} vs {}", x, y);
        }
    }

    #[test]
    fn unfolded_spacings_have_unit_mean(levels in sorted_levels()) {
        let s = unfold_spectrum(&levels, &UnfoldOptions::default()).unwrap();
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        prop_assert!((mean - 1.0).abs() < 1e-6);
    }

    #[test]
    fn window_variance_is_translation_invariant(
        xs in prop::collection::vec(-10.0f64..10.0, 1..500),
        c in -1e3f64..1e3,
    ) {
        let (m0, v0) = window_stats(&xs).unwrap();
        let shifted: Vec<f64> = xs.iter().map(|x| x + c).collect();
        let (m1, v1) = window_stats(&shifted).unwrap();
        prop_assert!((m1 - m0 - c).abs() <= 1e-9 * (1.0 + c.abs()));
        prop_assert!((v1 - v0).abs() <= 1e-9 * (1.0 + v0));
        prop_assert!(v0 >= 0.0);
    }

    #[test]
    fn universal_curve_is_monotone_and_bounded(a in 1.0f64..1e8, b in 1.0f64..1e8) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (fl, fh) = (universal_curve(lo).unwrap(), universal_curve(hi).unwrap());
        prop_assert!(fl <= fh);
        prop_assert!((0.0..UNIVERSAL_GAP).contains(&fl));
        prop_assert!(fh < UNIVERSAL_GAP);
    }

    #[test]
    fn quench_observables_respect_their_bounds(
        h0 in symmetric(10),
        v in symmetric(10),
        eps in 0.0f64..1.0,
        n0 in 1usize..=10,
    ) {
        let h1 = SymmetricMatrix::from_lower_fn(10, |i, j| h0.get(i, j) + eps * v.get(i, j)).unwrap();
        let o = overlap_matrix(&eigh(&h0).unwrap(), &eigh(&h1).unwrap()).unwrap();
        let xi = ipr(&o, n0).unwrap();
        prop_assert!((1.0 - 1e-9..=10.0 + 1e-9).contains(&xi));
        let mu = diagonal_ensemble(&o, n0).unwrap();
        let s_dec = diagonal_entropy(&mu);
        prop_assert!(s_dec >= 0.0 && s_dec <= (10f64).ln() + 1e-12);
        // Jensen on the window itself: S(mean C) >= mean S(C).
        let window = TimeWindow::new(1e3, 50.0, 200).unwrap();
        let trace = entropy_trace(&o, n0, &window).unwrap();
        let mut avg = vec![0.0; 10];
        for &t in &trace.times {
            let c = survival_distribution(&o, n0, t).unwrap();
            for (a, p) in avg.iter_mut().zip(c.probabilities()) {
                *a += p / trace.times.len() as f64;
            }
        }
        let s_avg = diagonal_entropy(&DistributionOverBasis::new(avg).unwrap());
        prop_assert!(s_avg - trace.mean() >= -1e-9);
    }
}
