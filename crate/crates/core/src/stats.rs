//! Small-sample statistics used by the experiment harness and the
//! equivalence tests.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two
/// values.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mu = mean(xs);
    (xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Two-sided t-interval for the mean at the given confidence level.
/// Degenerates to `(mean, mean)` for a single value or zero spread.
pub fn t_interval(xs: &[f64], confidence: f64) -> (f64, f64) {
    let mu = mean(xs);
    let sd = std_dev(xs);
    if xs.len() < 2 || sd == 0.0 {
        return (mu, mu);
    }
    let df = (xs.len() - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, df)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.5 + confidence / 2.0);
    let half = t * sd / (xs.len() as f64).sqrt();
    (mu - half, mu + half)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sided Mann-Whitney U test, normal approximation with tie and
/// continuity corrections.
pub fn mann_whitney(a: &[f64], b: &[f64]) -> TestResult {
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let mut all: Vec<(f64, usize)> = a.iter().map(|&x| (x, 0)).chain(b.iter().map(|&x| (x, 1))).collect();
    all.sort_by(|x, y| x.0.total_cmp(&y.0));
    let n = all.len();
    let mut ranks = vec![0.0; n];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        ranks[i..=j].iter_mut().for_each(|r| *r = avg);
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let r1: f64 = all.iter().zip(&ranks).filter(|((_, g), _)| *g == 0).map(|(_, r)| r).sum();
    let u1 = r1 - n1 * (n1 + 1.0) / 2.0;
    let mu = n1 * n2 / 2.0;
    let nn = n1 + n2;
    let var = n1 * n2 / 12.0 * ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
    if var <= 0.0 {
        return TestResult {
            statistic: u1,
            p_value: 1.0,
        };
    }
    let z = ((u1 - mu).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    TestResult {
        statistic: u1,
        p_value: (2.0 * (1.0 - normal.cdf(z))).min(1.0),
    }
}

/// Chi-square test that two samples of categorical outcomes come from the
/// same distribution. Categories whose expected count falls below 5 in
/// either sample are pooled into one bin.
pub fn chi_square_homogeneity(a: &[usize], b: &[usize]) -> TestResult {
    assert_eq!(a.len(), b.len());
    let (na, nb) = (a.iter().sum::<usize>() as f64, b.iter().sum::<usize>() as f64);
    let total = na + nb;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let col = (x + y) as f64;
        if col == 0.0 {
            continue;
        }
        if col * na.min(nb) / total < 5.0 {
            pooled.0 += x as f64;
            pooled.1 += y as f64;
        } else {
            bins.push((x as f64, y as f64));
        }
    }
    if pooled.0 + pooled.1 > 0.0 {
        bins.push(pooled);
    }
    if bins.len() < 2 {
        return TestResult {
            statistic: 0.0,
            p_value: 1.0,
        };
    }
    let mut stat = 0.0;
    for &(x, y) in &bins {
        let col = x + y;
        let (ea, eb) = (col * na / total, col * nb / total);
        stat += (x - ea).powi(2) / ea + (y - eb).powi(2) / eb;
    }
    let df = (bins.len() - 1) as f64;
    let chi = ChiSquared::new(df).expect("positive df");
    TestResult {
        statistic: stat,
        p_value: chi.sf(stat),
    }
}
