//! Small descriptive-statistics helpers.

/// Sample mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Ratio estimator `sum(num) / sum(den)` over independent groups, with a
/// linearized standard error.
pub fn ratio_se(nums: &[f64], dens: &[f64]) -> (f64, f64) {
    assert_eq!(nums.len(), dens.len());
    let g = nums.len();
    let tn: f64 = nums.iter().sum();
    let td: f64 = dens.iter().sum();
    if td == 0.0 {
        return (f64::NAN, f64::NAN);
    }
    let r = tn / td;
    if g < 2 {
        return (r, f64::NAN);
    }
    let dbar = td / g as f64;
    let ss: f64 = nums
        .iter()
        .zip(dens)
        .map(|(&a, &b)| (a - r * b).powi(2))
        .sum();
    let se = (ss / ((g - 1) as f64 * g as f64)).sqrt() / dbar;
    (r, se)
}

/// Linear-interpolated quantile of unsorted data, `p` in `[0, 1]`.
pub fn quantile(xs: &[f64], p: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, p)
}

pub fn quantile_sorted(v: &[f64], p: f64) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let h = p.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Quantile with an order-statistic standard error: half the distance
/// between the quantiles at `p -/+ sqrt(p(1-p)/N)`.
pub fn quantile_se(xs: &[f64], p: f64) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let q = quantile_sorted(&v, p);
    let d = (p * (1.0 - p) / v.len() as f64).sqrt();
    let se = 0.5 * (quantile_sorted(&v, p + d) - quantile_sorted(&v, p - d));
    (q, se)
}

pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    least_squares(xs, ys).0
}

/// Slope, intercept and slope standard error.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let se = if xs.len() > 2 {
        let rss: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    (slope, intercept, se)
}

/// Delete-one-group jackknife: returns the full-sample estimate and its
/// jackknife standard error.
pub fn jackknife<G>(groups: &[G], estimator: impl Fn(&[&G]) -> f64) -> (f64, f64) {
    let all: Vec<&G> = groups.iter().collect();
    let full = estimator(&all);
    let g = groups.len();
    if g < 2 {
        return (full, f64::NAN);
    }
    let loo: Vec<f64> = (0..g)
        .map(|skip| {
            let sub: Vec<&G> = groups
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .map(|(_, x)| x)
                .collect();
            estimator(&sub)
        })
        .collect();
    let m = loo.iter().sum::<f64>() / g as f64;
    let var = loo.iter().map(|x| (x - m).powi(2)).sum::<f64>() * (g - 1) as f64 / g as f64;
    (full, var.sqrt())
}
