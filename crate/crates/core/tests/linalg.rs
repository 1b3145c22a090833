use qrelax::linalg::{eigh, eigvalsh, jacobi_eigh, project_onto_eigenbasis, SymmetricMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_symmetric(seed: u64, n: usize) -> SymmetricMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SymmetricMatrix::from_lower_fn(n, |_, _| rng.gen_range(-1.0..1.0)).unwrap()
}

#[test]
fn householder_ql_agrees_with_jacobi() {
    for (seed, n) in [(1, 2), (2, 7), (3, 24), (4, 48)] {
        let h = random_symmetric(seed, n);
        let a = eigh(&h).unwrap();
        let b = jacobi_eigh(&h).unwrap();
        for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues()) {
            assert!((x - y).abs() < 1e-11, "n={n}: {x} vs {y}");
        }
        // Same sign rule on both sides, so vectors agree componentwise.
        for k in 0..n {
            for (x, y) in a.eigenvector(k).iter().zip(b.eigenvector(k)) {
                assert!((x - y).abs() < 1e-8, "n={n} k={k}");
            }
        }
    }
}

#[test]
fn accuracy_contract_on_random_matrices() {
    for (seed, n) in [(10, 100), (11, 333)] {
        let h = random_symmetric(seed, n);
        let d = eigh(&h).unwrap();
        let scale = h.max_abs() * n as f64;
        assert!(d.orthogonality_error() < 1e-12 * n as f64);
        assert!(d.max_residual(&h) < 1e-12 * scale);
        assert!(d.reconstruction_error(&h) < 1e-12 * scale);
        assert!(d.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn values_only_path_matches_full_decomposition() {
    // Tridiagonal-plus-band structure takes the band reduction; dense input
    // takes Householder. Both must match the vector path.
    let n = 400;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let band = SymmetricMatrix::from_lower_fn(n, |i, j| {
        if i - j <= 6 {
            rng.gen_range(-1.0..1.0)
        } else {
            0.0
        }
    })
    .unwrap();
    for h in [band, random_symmetric(5, 150)] {
        let full = eigh(&h).unwrap();
        let vals = eigvalsh(&h).unwrap();
        for (x, y) in full.eigenvalues().iter().zip(&vals) {
            assert!((x - y).abs() < 1e-11 * h.max_abs() * h.dim() as f64);
        }
    }
}

#[test]
fn projections_reproduce_overlaps_up_to_sign() {
    let h = random_symmetric(9, 120);
    let v: Vec<f64> = (0..120).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
    let full = eigh(&h).unwrap();
    let p = project_onto_eigenbasis(&h, &[&v]).unwrap();
    for k in 0..120 {
        let direct: f64 = full.eigenvector(k).iter().zip(&v).map(|(a, b)| a * b).sum();
        assert!((direct.abs() - p.amplitudes[0][k].abs()).abs() < 1e-9, "k={k}");
    }
}

#[test]
fn rejects_non_finite_input() {
    let h = SymmetricMatrix::from_lower_fn(3, |i, j| if i == 2 && j == 1 { f64::NAN } else { 1.0 });
    assert!(h.is_err() || eigh(&h.unwrap()).is_err());
}
