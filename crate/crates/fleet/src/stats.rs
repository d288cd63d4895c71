//! Correlation, normality and heteroscedasticity tests, quantiles.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Sample sizes accepted by [`shapiro_wilk`].
pub const SHAPIRO_N: (usize, usize) = (3, 5000);

fn check_finite(x: &[f64]) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(Error::SampleSize {
            n: x.len(),
            min: 3,
            max: usize::MAX,
        });
    }
    check_finite(x)?;
    check_finite(y)?;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

/// Shapiro-Wilk W with Royston's coefficient approximation and normalising
/// transformation. Ties need no special treatment since W only uses order
/// statistics.
pub fn shapiro_wilk(x: &[f64]) -> Result<TestResult> {
    const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056];
    const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
    const C3: [f64; 4] = [0.544, -0.39978, 0.025054, -6.714e-4];
    const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
    const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
    const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];
    const G: [f64; 2] = [-2.273, 0.459];

    let n = x.len();
    if !(SHAPIRO_N.0..=SHAPIRO_N.1).contains(&n) {
        return Err(Error::SampleSize {
            n,
            min: SHAPIRO_N.0,
            max: SHAPIRO_N.1,
        });
    }
    check_finite(x)?;
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted[n - 1] - sorted[0] <= 0.0 {
        return Err(Error::ZeroVariance);
    }

    let half = n / 2;
    let an = n as f64;
    // coefficients of the lower half, positive; the upper half mirrors them
    let mut a = vec![0.0; half];
    if n == 3 {
        a[0] = std::f64::consts::FRAC_1_SQRT_2;
    } else {
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        let m: Vec<f64> = (1..=half)
            .map(|i| -normal.inverse_cdf((i as f64 - 0.375) / (an + 0.25)))
            .collect();
        let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
        let ssumm2 = summ2.sqrt();
        let rsn = 1.0 / an.sqrt();
        let a1 = m[0] / ssumm2 + poly(&C1, rsn);
        let (first, fac) = if n > 5 {
            let a2 = m[1] / ssumm2 + poly(&C2, rsn);
            a[1] = a2;
            let fac = ((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1])
                / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2))
                .sqrt();
            (2, fac)
        } else {
            let fac = ((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1)).sqrt();
            (1, fac)
        };
        a[0] = a1;
        for i in first..half {
            a[i] = m[i] / fac;
        }
    }

    let mu = mean(&sorted);
    let ss: f64 = sorted.iter().map(|v| (v - mu) * (v - mu)).sum();
    let b: f64 = (0..half)
        .map(|i| a[i] * (sorted[n - 1 - i] - sorted[i]))
        .sum();
    let w = (b * b / ss).min(1.0);

    let p = if n == 3 {
        let p = 6.0 / std::f64::consts::PI * (w.sqrt().asin() - (0.75f64).sqrt().asin());
        p.max(0.0)
    } else {
        let mut y = (1.0 - w).ln();
        let (m, s) = if n <= 11 {
            let gamma = poly(&G, an);
            if y >= gamma {
                return Ok(TestResult {
                    statistic: w,
                    p_value: 0.0,
                });
            }
            y = -(gamma - y).ln();
            (poly(&C3, an), poly(&C4, an).exp())
        } else {
            let ln_n = an.ln();
            (poly(&C5, ln_n), poly(&C6, ln_n).exp())
        };
        Normal::new(m, s).expect("positive scale").sf(y)
    };
    Ok(TestResult {
        statistic: w,
        p_value: p.clamp(0.0, 1.0),
    })
}

/// Least-squares line `y = b0 + b1 x`.
fn simple_ols(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Singular);
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b1 = sxy / sxx;
    Ok((my - b1 * mx, b1))
}

/// Breusch-Pagan test of `y` regressed on `x` in the studentised form
/// LM = n·R² of the squared residuals regressed on `x`.
pub fn breusch_pagan(x: &[f64], y: &[f64]) -> Result<TestResult> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 4 {
        return Err(Error::SampleSize {
            n,
            min: 4,
            max: usize::MAX,
        });
    }
    check_finite(x)?;
    check_finite(y)?;
    let (b0, b1) = simple_ols(x, y)?;
    let e2: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - b0 - b1 * a).powi(2))
        .collect();
    let (c0, c1) = simple_ols(x, &e2)?;
    let me2 = mean(&e2);
    let tss: f64 = e2.iter().map(|v| (v - me2) * (v - me2)).sum();
    // squared residuals equal up to round-off carry no information on x
    let lm = if tss > n as f64 * (1e-12 * me2).powi(2) {
        let rss: f64 = x
            .iter()
            .zip(&e2)
            .map(|(a, v)| (v - c0 - c1 * a).powi(2))
            .sum();
        (n as f64 * (1.0 - rss / tss)).max(0.0)
    } else {
        0.0
    };
    let p = ChiSquared::new(1.0).expect("one degree of freedom").sf(lm);
    Ok(TestResult {
        statistic: lm,
        p_value: p,
    })
}

/// Quantile by linear interpolation between order statistics of a sorted
/// sample (the `(n − 1)·p` rule).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub n: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    /// Largest value not above q3 + 1.5·IQR.
    pub whisker_max: f64,
}

pub fn quartiles_of(values: &[f64]) -> Result<Quartiles> {
    if values.len() < 4 {
        return Err(Error::SampleSize {
            n: values.len(),
            min: 4,
            max: usize::MAX,
        });
    }
    check_finite(values)?;
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&s, 0.25);
    let q3 = quantile_sorted(&s, 0.75);
    let fence = q3 + 1.5 * (q3 - q1);
    let whisker_max = s
        .iter()
        .rev()
        .copied()
        .find(|&v| v <= fence)
        .expect("q3 lies below the fence");
    Ok(Quartiles {
        n: s.len(),
        q1,
        median: quantile_sorted(&s, 0.5),
        q3,
        whisker_max,
    })
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_std(x: &[f64]) -> (f64, f64) {
    let m = mean(x);
    if x.len() < 2 {
        return (m, 0.0);
    }
    let ss: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    (m, (ss / (x.len() - 1) as f64).sqrt())
}
