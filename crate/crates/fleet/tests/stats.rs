use drivesim_fleet::{breusch_pagan, pearson, quartiles_of, shapiro_wilk, Error};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal as StatNormal};

const TRIALS: usize = 10_000;
const ALPHA: f64 = 0.05;

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

#[test]
fn pearson_hand_case() {
    // Σdx·dy = 5, Σdx² = 2, Σdy² = 38/3
    let r = pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 7.0]).unwrap();
    assert!((r - 0.99339).abs() < 1e-5, "{r}");
    assert!((r - 5.0 / (2.0f64 * 38.0 / 3.0).sqrt()).abs() < 1e-14);
}

#[test]
fn pearson_self_and_mirror() {
    let x = [3.0, 1.0, 4.0, 1.5, 9.0, 2.6];
    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
    assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-15);
    assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-15);
}

#[test]
fn pearson_contract_errors() {
    assert!(matches!(
        pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
        Err(Error::ZeroVariance)
    ));
    assert!(matches!(
        pearson(&[1.0, 2.0], &[1.0, 2.0]),
        Err(Error::SampleSize { .. })
    ));
    assert!(matches!(
        pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0]),
        Err(Error::LengthMismatch(3, 2))
    ));
}

proptest! {
    #[test]
    fn pearson_is_affine_invariant(
        xy in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 3..40),
        a in 0.01f64..100.0, b in -1e3f64..1e3, c in 0.01f64..100.0, d in -1e3f64..1e3,
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
        if let Ok(r) = pearson(&x, &y) {
            let xs: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let ys: Vec<f64> = y.iter().map(|v| c * v + d).collect();
            let r2 = pearson(&xs, &ys).unwrap();
            prop_assert!((r - r2).abs() < 1e-12, "{} vs {}", r, r2);
            prop_assert!(r.abs() <= 1.0);
        }
    }
}

#[test]
fn complete_case_correlation_matrix_is_psd() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in [3, 5, 8] {
        let n = 30;
        // correlated columns from a random mixing of independent normals
        let z: Vec<Vec<f64>> = (0..k).map(|_| gaussian(&mut rng, n)).collect();
        let cols: Vec<Vec<f64>> = (0..k)
            .map(|j| {
                (0..n)
                    .map(|i| (0..=j).map(|l| z[l][i] * (1.0 + l as f64)).sum())
                    .collect()
            })
            .collect();
        let m = DMatrix::from_fn(k, k, |a, b| pearson(&cols[a], &cols[b]).unwrap());
        for a in 0..k {
            assert!((m[(a, a)] - 1.0).abs() < 1e-12);
            for b in 0..k {
                assert_eq!(m[(a, b)], m[(b, a)]);
            }
        }
        let eig = SymmetricEigen::new(m).eigenvalues;
        assert!(eig.iter().all(|&l| l >= -1e-9), "{eig}");
    }
}

#[test]
fn shapiro_matches_reference_values() {
    // W and p from an independent implementation of the same algorithm
    let cases: [(&str, Vec<f64>, f64, f64); 6] = [
        (
            "cubes4",
            (1..5).map(|i| f64::from(i).powi(3)).collect(),
            0.9030751667375793,
            0.44649397668685836,
        ),
        (
            "five",
            vec![2.1, 3.4, 1.9, 5.6, 4.4],
            0.9320849391953863,
            0.6106559022604845,
        ),
        (
            "squares7",
            (0..7).map(|i| f64::from(i * i)).collect(),
            0.9027707348662862,
            0.34809066271531164,
        ),
        (
            "eleven",
            vec![
                148.0, 154.0, 158.0, 160.0, 161.0, 162.0, 166.0, 170.0, 182.0, 195.0, 236.0,
            ],
            0.7888146948631716,
            0.006703814061898823,
        ),
        (
            "sines25",
            (0..25)
                .map(|i| (1.7 * i as f64).sin() + 0.1 * i as f64)
                .collect(),
            0.9672596446475207,
            0.5766592268078338,
        ),
        (
            "logs60",
            (0..60).map(|i| (i as f64 + 1.0).ln()).collect(),
            0.8592505494819435,
            5.773935554856979e-06,
        ),
    ];
    for (name, x, w, p) in cases {
        let r = shapiro_wilk(&x).unwrap();
        assert!(
            (r.statistic - w).abs() < 1e-6,
            "{name}: W {} vs {w}",
            r.statistic
        );
        assert!(
            (r.p_value - p).abs() < 1e-6 * p.max(1e-3),
            "{name}: p {} vs {p}",
            r.p_value
        );
    }
}

#[test]
fn shapiro_accepts_exact_normal_quantiles() {
    let n = 20;
    let normal = StatNormal::new(0.0, 1.0).unwrap();
    let x: Vec<f64> = (1..=n)
        .map(|i| normal.inverse_cdf((i as f64 - 0.375) / (n as f64 + 0.25)))
        .collect();
    let r = shapiro_wilk(&x).unwrap();
    assert!(r.statistic > 0.98 && r.statistic <= 1.0);
    assert!(r.p_value > 0.5, "{}", r.p_value);
}

#[test]
fn shapiro_rejects_bimodal_samples() {
    let x: Vec<f64> = (0..40).map(|i| if i < 20 { -3.0 } else { 3.0 }).collect();
    assert!(shapiro_wilk(&x).unwrap().p_value < ALPHA);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let jitter = Normal::new(0.0, 0.5).unwrap();
    let trials = 1000;
    let rejected = (0..trials)
        .filter(|_| {
            let x: Vec<f64> = (0..40)
                .map(|i| if i < 20 { -3.0 } else { 3.0 } + jitter.sample(&mut rng))
                .collect();
            shapiro_wilk(&x).unwrap().p_value < ALPHA
        })
        .count();
    assert!(rejected as f64 / trials as f64 >= 0.99, "{rejected}");
}

#[test]
fn shapiro_size_range() {
    assert!(shapiro_wilk(&vec![1.0; 5001]).is_err());
    let x: Vec<f64> = (0..5000).map(|i| (i as f64 * 0.37).sin()).collect();
    assert!(shapiro_wilk(&x).is_ok());
}

fn false_positive_rate(seed: u64, mut trial: impl FnMut(&mut ChaCha8Rng) -> f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..TRIALS).filter(|_| trial(&mut rng) < ALPHA).count() as f64 / TRIALS as f64
}

#[test]
fn shapiro_false_positive_rate() {
    for (seed, n) in [(1, 8), (2, 20), (3, 50)] {
        let rate =
            false_positive_rate(seed, |rng| shapiro_wilk(&gaussian(rng, n)).unwrap().p_value);
        assert!((0.04..=0.06).contains(&rate), "n = {n}: {rate}");
    }
}

#[test]
fn breusch_pagan_false_positive_rate() {
    let rate = false_positive_rate(4, |rng| {
        let x = gaussian(rng, 100);
        let y: Vec<f64> = x
            .iter()
            .map(|v| 1.0 + 2.0 * v + rng.sample::<f64, _>(StandardNormal))
            .collect();
        breusch_pagan(&x, &y).unwrap().p_value
    });
    assert!((0.04..=0.06).contains(&rate), "{rate}");
}

#[test]
fn breusch_pagan_detects_proportional_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let trials = 1000;
    let detected = (0..trials)
        .filter(|_| {
            let x: Vec<f64> = (0..200).map(|_| rng.random_range(0.0..10.0)).collect();
            let y: Vec<f64> = x
                .iter()
                .map(|v| v + rng.sample::<f64, _>(StandardNormal) * v)
                .collect();
            breusch_pagan(&x, &y).unwrap().p_value < ALPHA
        })
        .count();
    assert!(detected as f64 / trials as f64 >= 0.95, "{detected}");
}

/// n·R² of the auxiliary regression, both regressions solved through the
/// normal equations.
fn brute_force_lm(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let design = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { x[i] });
    let solve = |rhs: &DVector<f64>| {
        let xtx = design.transpose() * &design;
        let xty = design.transpose() * rhs;
        xtx.lu().solve(&xty).unwrap()
    };
    let yv = DVector::from_column_slice(y);
    let e = &yv - &design * solve(&yv);
    let e2 = e.map(|v| v * v);
    let fitted = &design * solve(&e2);
    let mean = e2.mean();
    let tss: f64 = e2.iter().map(|v| (v - mean).powi(2)).sum();
    let ess: f64 = fitted.iter().map(|v| (v - mean).powi(2)).sum();
    n as f64 * ess / tss
}

#[test]
fn breusch_pagan_matches_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for n in [4, 10, 57, 300] {
        for _ in 0..20 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let y: Vec<f64> = x
                .iter()
                .map(|v| 0.5 * v + (1.0 + v.abs()) * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let lm = breusch_pagan(&x, &y).unwrap().statistic;
            let reference = brute_force_lm(&x, &y);
            assert!(
                (lm - reference).abs() < 1e-9 * reference.max(1.0),
                "n = {n}: {lm} vs {reference}"
            );
        }
    }
}

#[test]
fn breusch_pagan_contract() {
    assert!(matches!(
        breusch_pagan(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]),
        Err(Error::SampleSize { .. })
    ));
    let r = breusch_pagan(&[1.0, 2.0, 3.0, 4.0], &[2.0, 4.0, 6.0, 8.0]).unwrap();
    assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
}

#[test]
fn quartiles_need_four_values() {
    assert!(matches!(
        quartiles_of(&[1.0, 2.0, 3.0]),
        Err(Error::SampleSize { .. })
    ));
}
