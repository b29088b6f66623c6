//! Small dense least squares: line fits for log-log rate plots and the
//! normal-equation solver used by the global-map fit.

/// Slope and intercept of the least-squares line through (x, y).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Log-log slope of |y| against x (skips non-positive magnitudes).
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(_, y)| y.abs() > 0.0)
        .map(|(&x, &y)| (x.ln(), y.abs().ln()))
        .collect();
    let (lx, ly): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    linear_fit(&lx, &ly).0
}

/// Solve the dense least-squares problem min ||A c - b|| by normal equations
/// with partial-pivot Gaussian elimination. Columns of `a` are the basis
/// functions evaluated at the sample points.
pub fn lstsq(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let m = a.len();
    let n = a[0].len();
    let mut ata = vec![vec![0.0; n + 1]; n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for row in 0..m {
                s += a[row][i] * a[row][j];
            }
            ata[i][j] = s;
        }
        let mut s = 0.0;
        for row in 0..m {
            s += a[row][i] * b[row];
        }
        ata[i][n] = s;
    }
    solve_dense(&mut ata)
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
pub fn solve_dense(aug: &mut [Vec<f64>]) -> Option<Vec<f64>> {
    let n = aug.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            aug[i][col]
                .abs()
                .partial_cmp(&aug[j][col].abs())
                .unwrap()
        })?;
        if aug[piv][col].abs() < 1e-300 {
            return None;
        }
        aug.swap(col, piv);
        for row in col + 1..n {
            let f = aug[row][col] / aug[col][col];
            for k in col..=n {
                aug[row][k] -= f * aug[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = aug[row][n];
        for k in row + 1..n {
            s -= aug[row][k] * x[k];
        }
        x[row] = s / aug[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 5.0, 7.0, 9.0];
        let (m, b) = linear_fit(&xs, &ys);
        assert!((m - 2.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_law_slope() {
        let xs: Vec<f64> = (1..6).map(|k| 10.0f64.powi(k)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-1.5)).collect();
        assert!((loglog_slope(&xs, &ys) + 1.5).abs() < 1e-12);
    }

    #[test]
    fn lstsq_quadratic() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let a: Vec<Vec<f64>> = xs.iter().map(|&x| vec![1.0, x, x * x]).collect();
        let b: Vec<f64> = xs.iter().map(|&x| 2.0 - x + 0.5 * x * x).collect();
        let c = lstsq(&a, &b).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-10);
        assert!((c[1] + 1.0).abs() < 1e-10);
        assert!((c[2] - 0.5).abs() < 1e-10);
    }
}
