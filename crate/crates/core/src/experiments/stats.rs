//! Small sample statistics used by the harness.

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Sample mean and unbiased sample variance (0 for fewer than two values).
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss / (n - 1) as f64)
}

/// Unbiased sample variance with a jackknife 95% interval.
pub fn jackknife_variance(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len();
    let (mean, var) = mean_var(xs);
    if n < 3 {
        return (var, var, var);
    }
    let nf = n as f64;
    let ss = var * (nf - 1.0);
    // Leave-one-out variance, from the full sum of squares.
    let loo: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let d = x - mean;
            (ss - d * d * nf / (nf - 1.0)) / (nf - 2.0)
        })
        .collect();
    let (_, loo_var) = mean_var(&loo);
    let se = ((nf - 1.0) * (nf - 1.0) / nf * loo_var).sqrt();
    (var, var - Z95 * se, var + Z95 * se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn moments() {
        assert_eq!(mean_var(&[]), (0.0, 0.0));
        assert_eq!(mean_var(&[3.0]), (3.0, 0.0));
        let (m, v) = mean_var(&[1.0, 2.0, 3.0, 4.0]);
        assert_relative_eq!(m, 2.5);
        assert_relative_eq!(v, 5.0 / 3.0);
    }

    #[test]
    fn leave_one_out_shortcut_matches_recomputation() {
        let xs = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
        let (var, lo, hi) = jackknife_variance(&xs);
        let loo: Vec<f64> = (0..xs.len())
            .map(|i| {
                let rest: Vec<f64> = xs
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &x)| x)
                    .collect();
                mean_var(&rest).1
            })
            .collect();
        let n = xs.len() as f64;
        let (_, lv) = mean_var(&loo);
        let se = ((n - 1.0) * (n - 1.0) / n * lv).sqrt();
        assert_relative_eq!(var, mean_var(&xs).1);
        assert_relative_eq!(hi - var, Z95 * se, max_relative = 1e-10);
        assert_relative_eq!(var - lo, Z95 * se, max_relative = 1e-10);
    }
}
