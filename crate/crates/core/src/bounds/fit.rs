use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub points: Vec<(u64, u128)>,
    pub slope: f64,
    pub intercept: f64,
    /// Largest `|ln Q − (slope·ln N + intercept)|`.
    pub max_abs_residual: f64,
}

/// Least-squares line through `(ln N, ln Q)`.
pub fn fit_exponent(points: &[(u64, u128)]) -> Result<FitReport> {
    if points.len() < 3 {
        return Err(Error::input("fit needs at least 3 points"));
    }
    let mut ns: Vec<u64> = points.iter().map(|p| p.0).collect();
    ns.sort_unstable();
    if ns.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::input("fit needs distinct N values"));
    }
    if points.iter().any(|&(n, q)| n == 0 || q == 0) {
        return Err(Error::input("fit needs N >= 1 and Q >= 1"));
    }
    let logs: Vec<(f64, f64)> = points
        .iter()
        .map(|&(n, q)| ((n as f64).ln(), (q as f64).ln()))
        .collect();
    let (slope, intercept, max_abs_residual) = least_squares(&logs);
    Ok(FitReport {
        points: points.to_vec(),
        slope,
        intercept,
        max_abs_residual,
    })
}

/// Returns `(slope, intercept, max |residual|)`; callers guarantee at least
/// two distinct abscissae.
pub(crate) fn least_squares(xy: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_abs_residual = xy
        .iter()
        .map(|p| (p.1 - (slope * p.0 + intercept)).abs())
        .fold(0.0, f64::max);
    (slope, intercept, max_abs_residual)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_cube() {
        let pts: Vec<(u64, u128)> = [2u64, 5, 17, 100]
            .iter()
            .map(|&n| (n, (n as u128).pow(3)))
            .collect();
        let fit = fit_exponent(&pts).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-9);
        assert!(fit.intercept.abs() < 1e-9);
        assert!(fit.max_abs_residual < 1e-9);
    }

    #[test]
    fn constant() {
        let fit = fit_exponent(&[(3, 7), (9, 7), (27, 7)]).unwrap();
        assert_eq!(fit.slope, 0.0);
    }

    #[test]
    fn interval_energy() {
        let pts: Vec<(u64, u128)> = [32u128, 64, 128, 256]
            .iter()
            .map(|&n| (n as u64, (2 * n * n * n + n) / 3))
            .collect();
        let fit = fit_exponent(&pts).unwrap();
        assert!((2.95..=3.0).contains(&fit.slope), "{}", fit.slope);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_exponent(&[(1, 1), (2, 2)]).is_err());
        assert!(fit_exponent(&[(1, 1), (2, 2), (2, 3)]).is_err());
        assert!(fit_exponent(&[(1, 1), (2, 0), (3, 3)]).is_err());
    }
}
