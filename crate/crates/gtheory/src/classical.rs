//! Classical test theory reliability: coefficient alpha, Spearman-Brown
//! projection, cross-wave stability correlations, and correlation-matrix
//! scree eigenvalues.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::ResponseCube;
use crate::error::{Error, Result};
use crate::jacobi;

/// Observed-score variance split into true-score and error parts, with the
/// true-score/error covariance assumed zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrueScoreDecomposition {
    pub sigma2_x: f64,
    pub sigma2_t: f64,
    pub sigma2_e: f64,
    /// Fixed to zero: true score and error are taken as uncorrelated.
    pub covariance_te: f64,
}

impl TrueScoreDecomposition {
    pub fn new(sigma2_t: f64, sigma2_e: f64) -> Result<Self> {
        if !(sigma2_t.is_finite() && sigma2_e.is_finite()) || sigma2_t < 0.0 || sigma2_e < 0.0 {
            return Err(Error::Domain(
                "true-score and error variances must be finite and nonnegative".to_string(),
            ));
        }
        Ok(TrueScoreDecomposition {
            sigma2_x: sigma2_t + sigma2_e,
            sigma2_t,
            sigma2_e,
            covariance_te: 0.0,
        })
    }

    /// Single-measurement reliability, the true-to-total variance ratio.
    pub fn reliability(&self) -> Result<f64> {
        if self.sigma2_x == 0.0 {
            return Err(Error::ZeroVariance {
                what: "observed scores".to_string(),
            });
        }
        Ok(self.sigma2_t / self.sigma2_x)
    }

    /// Reliability of an n-item average: the error variance shrinks by n.
    pub fn projected_reliability(&self, n_items: usize) -> Result<f64> {
        if n_items == 0 {
            return Err(Error::Domain("item count must be at least 1".to_string()));
        }
        let denominator = self.sigma2_t + self.sigma2_e / n_items as f64;
        if denominator == 0.0 {
            return Err(Error::ZeroVariance {
                what: "observed scores".to_string(),
            });
        }
        Ok(self.sigma2_t / denominator)
    }
}

/// Per-wave internal consistency and the across-wave average.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaleReliabilityReport {
    /// (rho, standard error) keyed by occasion, in occasion order.
    pub per_wave: BTreeMap<u32, (f64, f64)>,
    /// Arithmetic mean of the per-wave rho values.
    pub average: f64,
    pub n_items_used: usize,
}

/// Coefficient alpha and its standard error for one occasion.
///
/// `alpha = (k/(k-1)) (1 - sum_i s2_i / s2_total)` where `s2_i` is the
/// sample variance of item i across persons and `s2_total` the variance of
/// person sum scores. The standard error uses the large-sample normal-theory
/// approximation `Var(alpha) = 2 k (1 - alpha)^2 / ((k - 1)(n - 2))`.
pub fn internal_consistency(cube: &ResponseCube, occasion: u32) -> Result<(f64, f64)> {
    let o = cube
        .occasion_position(occasion)
        .ok_or(Error::OccasionNotFound { occasion })?;
    let n_p = cube.n_persons();
    let k = cube.n_items();
    if n_p < 3 {
        return Err(Error::Design {
            facet: "persons",
            needed: 3,
            got: n_p,
        });
    }
    if k < 2 {
        return Err(Error::Design {
            facet: "items",
            needed: 2,
            got: k,
        });
    }

    let mut item_variance_sum = 0.0;
    for i in 0..k {
        let values: Vec<f64> = (0..n_p).map(|p| cube.score(p, i, o)).collect();
        item_variance_sum += sample_variance(&values);
    }
    let totals: Vec<f64> = (0..n_p)
        .map(|p| (0..k).map(|i| cube.score(p, i, o)).sum())
        .collect();
    let total_variance = sample_variance(&totals);
    if total_variance == 0.0 {
        return Err(Error::ZeroVariance {
            what: format!("person sum scores at occasion {occasion}"),
        });
    }

    let kf = k as f64;
    let alpha = kf / (kf - 1.0) * (1.0 - item_variance_sum / total_variance);
    let variance =
        2.0 * kf * (1.0 - alpha) * (1.0 - alpha) / ((kf - 1.0) * (n_p as f64 - 2.0));
    Ok((alpha, variance.sqrt()))
}

/// Internal consistency for every occasion of the cube, plus the average.
pub fn scale_reliability(cube: &ResponseCube) -> Result<ScaleReliabilityReport> {
    let mut per_wave = BTreeMap::new();
    for &occasion in cube.occasions() {
        per_wave.insert(occasion, internal_consistency(cube, occasion)?);
    }
    let average = per_wave.values().map(|(rho, _)| rho).sum::<f64>() / per_wave.len() as f64;
    Ok(ScaleReliabilityReport {
        per_wave,
        average,
        n_items_used: cube.n_items(),
    })
}

/// Reliability of an n-item composite from single-item reliability:
/// `n rho / (1 + (n - 1) rho)`.
pub fn spearman_brown(rho_single: f64, n_items: usize) -> Result<f64> {
    if !(rho_single > 0.0 && rho_single < 1.0) {
        return Err(Error::Domain(format!(
            "single-item reliability must lie strictly between 0 and 1, got {rho_single}"
        )));
    }
    if n_items == 0 {
        return Err(Error::Domain("item count must be at least 1".to_string()));
    }
    let n = n_items as f64;
    Ok(n * rho_single / (1.0 + (n - 1.0) * rho_single))
}

/// Persons x occasions score matrix for a single item of the cube.
pub fn single_item_panel(cube: &ResponseCube, item: u32) -> Result<Vec<Vec<f64>>> {
    let i = cube
        .item_position(item)
        .ok_or(Error::ItemNotFound { item })?;
    Ok((0..cube.n_persons())
        .map(|p| {
            (0..cube.n_occasions())
                .map(|o| cube.score(p, i, o))
                .collect()
        })
        .collect())
}

/// Pearson correlation for each occasion pair of a persons x occasions
/// panel. The diagonal is exactly 1; entries touching a zero-variance wave
/// are absent.
pub fn cross_wave_correlations(panel: &[Vec<f64>]) -> Result<Vec<Vec<Option<f64>>>> {
    let n_p = panel.len();
    if n_p < 3 {
        return Err(Error::Design {
            facet: "persons",
            needed: 3,
            got: n_p,
        });
    }
    let n_o = panel[0].len();
    if n_o == 0 || panel.iter().any(|row| row.len() != n_o) {
        return Err(Error::Domain(
            "panel rows must share one nonzero length".to_string(),
        ));
    }

    let columns: Vec<Vec<f64>> = (0..n_o)
        .map(|o| panel.iter().map(|row| row[o]).collect())
        .collect();
    let degenerate: Vec<bool> = columns.iter().map(|c| sample_variance(c) == 0.0).collect();

    let mut matrix = vec![vec![None; n_o]; n_o];
    for a in 0..n_o {
        for b in a..n_o {
            let value = if degenerate[a] || degenerate[b] {
                None
            } else if a == b {
                Some(1.0)
            } else {
                pearson(&columns[a], &columns[b])
            };
            matrix[a][b] = value;
            matrix[b][a] = value;
        }
    }
    Ok(matrix)
}

/// Item x item Pearson correlation matrix at one occasion.
pub fn item_correlation_matrix(cube: &ResponseCube, occasion: u32) -> Result<Vec<Vec<f64>>> {
    let o = cube
        .occasion_position(occasion)
        .ok_or(Error::OccasionNotFound { occasion })?;
    let n_p = cube.n_persons();
    let k = cube.n_items();
    if n_p < 3 {
        return Err(Error::Design {
            facet: "persons",
            needed: 3,
            got: n_p,
        });
    }

    let columns: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..n_p).map(|p| cube.score(p, i, o)).collect())
        .collect();
    for (i, column) in columns.iter().enumerate() {
        if sample_variance(column) == 0.0 {
            return Err(Error::ZeroVariance {
                what: format!("item {} at occasion {occasion}", cube.items()[i]),
            });
        }
    }

    let mut matrix = vec![vec![0.0; k]; k];
    for a in 0..k {
        matrix[a][a] = 1.0;
        for b in a + 1..k {
            let r = pearson(&columns[a], &columns[b]).expect("variances already checked");
            matrix[a][b] = r;
            matrix[b][a] = r;
        }
    }
    Ok(matrix)
}

/// Eigenvalues of the item correlation matrix at one occasion, descending.
/// Their sum equals the number of items (the matrix trace).
pub fn scree_eigenvalues(cube: &ResponseCube, occasion: u32) -> Result<Vec<f64>> {
    let matrix = item_correlation_matrix(cube, occasion)?;
    Ok(jacobi::symmetric_eigenvalues(matrix, jacobi::CONVERGENCE))
}

pub(crate) fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
}

/// Pearson correlation; `None` when either input has zero variance.
pub(crate) fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    debug_assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y.iter()) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use rand_distr::{Distribution, Normal};

    fn cube_from_columns(columns: &[Vec<f64>]) -> ResponseCube {
        // One occasion; columns are items.
        let n_p = columns[0].len();
        let n_i = columns.len();
        let mut scores = Vec::with_capacity(n_p * n_i);
        for p in 0..n_p {
            for column in columns {
                scores.push(column[p]);
            }
        }
        ResponseCube::new(
            "test".to_string(),
            (0..n_p).map(|p| format!("p{p}")).collect(),
            (1..=n_i as u32).collect(),
            vec![1],
            scores,
        )
        .unwrap()
    }

    #[test]
    fn alpha_is_one_for_parallel_items() {
        let base = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let cube = cube_from_columns(&[base.clone(), base.clone()]);
        let (alpha, _) = internal_consistency(&cube, 1).unwrap();
        assert!((alpha - 1.0).abs() < 1e-12);
    }

    #[test]
    fn alpha_is_zero_for_two_exactly_uncorrelated_equal_variance_items() {
        // Orthogonal columns with equal variance: alpha = 2 (1 - 2 s2 / (2 s2)).
        let a = vec![1.0, 1.0, -1.0, -1.0];
        let b = vec![1.0, -1.0, 1.0, -1.0];
        let cube = cube_from_columns(&[a, b]);
        let (alpha, _) = internal_consistency(&cube, 1).unwrap();
        assert!(alpha.abs() < 1e-12);
    }

    #[test]
    fn alpha_matches_projected_reliability_on_synthetic_waves() {
        // True-score variance 1, per-item error variance 2, 8 items:
        // expected alpha = 1 / (1 + 2/8) = 0.8.
        let decomposition = TrueScoreDecomposition::new(1.0, 2.0).unwrap();
        let expected = decomposition.projected_reliability(8).unwrap();
        assert!((expected - 0.8).abs() < 1e-12);

        let mut rng = StdRng::seed_from_u64(901);
        let noise = Normal::new(0.0, 2.0_f64.sqrt()).unwrap();
        let n_p = 200;
        let replications = 100;
        let mut sum = 0.0;
        for _ in 0..replications {
            let columns: Vec<Vec<f64>> = {
                let truths: Vec<f64> =
                    (0..n_p).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
                (0..8)
                    .map(|_| truths.iter().map(|t| t + noise.sample(&mut rng)).collect())
                    .collect()
            };
            let cube = cube_from_columns(&columns);
            sum += internal_consistency(&cube, 1).unwrap().0;
        }
        let mean_alpha = sum / replications as f64;
        assert!(
            (mean_alpha - expected).abs() < 0.05,
            "mean alpha {mean_alpha} vs expected {expected}"
        );
    }

    #[test]
    fn zero_total_variance_is_signaled() {
        let cube = cube_from_columns(&[vec![4.0; 5], vec![4.0; 5]]);
        assert!(matches!(
            internal_consistency(&cube, 1),
            Err(Error::ZeroVariance { .. })
        ));
    }

    #[test]
    fn alpha_needs_at_least_two_items() {
        let cube = cube_from_columns(&[vec![1.0, 2.0, 3.0]]);
        match internal_consistency(&cube, 1).unwrap_err() {
            Error::Design { facet, needed, .. } => {
                assert_eq!(facet, "items");
                assert_eq!(needed, 2);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn scale_reliability_averages_waves() {
        let base = vec![1.0, 2.0, 3.0, 4.0];
        // Two occasions, two parallel items each.
        let mut scores = Vec::new();
        for p in 0..4 {
            for _i in 0..2 {
                for _o in 0..2 {
                    scores.push(base[p]);
                }
            }
        }
        let cube = ResponseCube::new(
            "g".to_string(),
            (0..4).map(|p| format!("p{p}")).collect(),
            vec![1, 2],
            vec![1, 2],
            scores,
        )
        .unwrap();
        let report = scale_reliability(&cube).unwrap();
        assert_eq!(report.per_wave.len(), 2);
        assert_eq!(report.n_items_used, 2);
        assert!((report.average - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spearman_brown_identity_and_quadrupling() {
        assert_eq!(spearman_brown(0.5, 1).unwrap(), 0.5);
        assert!((spearman_brown(0.5, 4).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn spearman_brown_approaches_one() {
        let mut previous = spearman_brown(0.2, 1).unwrap();
        for n in [2, 4, 16, 64, 256, 4096] {
            let value = spearman_brown(0.2, n).unwrap();
            assert!(value > previous);
            previous = value;
        }
        assert!(previous > 0.999);
    }

    #[test]
    fn spearman_brown_domain_errors() {
        assert!(spearman_brown(0.0, 2).is_err());
        assert!(spearman_brown(1.0, 2).is_err());
        assert!(spearman_brown(-0.3, 2).is_err());
        assert!(spearman_brown(0.5, 0).is_err());
    }

    #[test]
    fn identical_waves_correlate_perfectly() {
        let panel: Vec<Vec<f64>> = (0..5).map(|p| vec![p as f64; 3]).collect();
        let matrix = cross_wave_correlations(&panel).unwrap();
        for row in &matrix {
            for entry in row {
                assert_eq!(*entry, Some(1.0));
            }
        }
    }

    #[test]
    fn negated_wave_correlates_at_minus_one() {
        let panel: Vec<Vec<f64>> = (0..5).map(|p| vec![p as f64, -(p as f64)]).collect();
        let matrix = cross_wave_correlations(&panel).unwrap();
        assert_eq!(matrix[0][1], Some(-1.0));
        assert_eq!(matrix[0][0], Some(1.0));
    }

    #[test]
    fn zero_variance_wave_yields_absent_entries() {
        let panel: Vec<Vec<f64>> = (0..5).map(|p| vec![p as f64, 2.0]).collect();
        let matrix = cross_wave_correlations(&panel).unwrap();
        assert_eq!(matrix[0][0], Some(1.0));
        assert_eq!(matrix[0][1], None);
        assert_eq!(matrix[1][1], None);
    }

    #[test]
    fn autoregressive_panel_recovers_step_correlation() {
        let step = 0.9_f64;
        let innovation = (1.0 - step * step).sqrt();
        let n_p = 500;
        let n_o = 5;
        let mut rng = StdRng::seed_from_u64(77);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let panel: Vec<Vec<f64>> = (0..n_p)
            .map(|_| {
                let mut row = Vec::with_capacity(n_o);
                let mut z: f64 = normal.sample(&mut rng);
                row.push(z);
                for _ in 1..n_o {
                    z = step * z + innovation * normal.sample(&mut rng);
                    row.push(z);
                }
                row
            })
            .collect();
        let matrix = cross_wave_correlations(&panel).unwrap();
        for o in 0..n_o - 1 {
            let r = matrix[o][o + 1].unwrap();
            assert!((r - step).abs() < 0.05, "adjacent correlation {r}");
        }
    }

    #[test]
    fn scree_of_uncorrelated_items_is_flat() {
        let mut rng = StdRng::seed_from_u64(5150);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let columns: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..3000).map(|_| normal.sample(&mut rng)).collect())
            .collect();
        let cube = cube_from_columns(&columns);
        let eig = scree_eigenvalues(&cube, 1).unwrap();
        for value in &eig {
            assert!((value - 1.0).abs() < 0.1, "eigenvalue {value}");
        }
        let sum: f64 = eig.iter().sum();
        assert!((sum - 4.0).abs() < 1e-6);
    }

    #[test]
    fn scree_two_items_analytic() {
        let mut rng = StdRng::seed_from_u64(31);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let a: Vec<f64> = (0..400).map(|_| normal.sample(&mut rng)).collect();
        let b: Vec<f64> = a
            .iter()
            .map(|x| 0.6 * x + 0.8 * normal.sample(&mut rng))
            .collect();
        let cube = cube_from_columns(&[a.clone(), b.clone()]);
        let r = pearson(&a, &b).unwrap();
        let eig = scree_eigenvalues(&cube, 1).unwrap();
        assert!((eig[0] - (1.0 + r)).abs() < 1e-6);
        assert!((eig[1] - (1.0 - r)).abs() < 1e-6);
    }

    #[test]
    fn scree_one_factor_structure() {
        // Uniform loading 0.6: population largest eigenvalue 1 + 7 * 0.36.
        let loading = 0.6_f64;
        let uniqueness = (1.0 - loading * loading).sqrt();
        let mut rng = StdRng::seed_from_u64(1203);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let n_p = 4000;
        let factor: Vec<f64> = (0..n_p).map(|_| normal.sample(&mut rng)).collect();
        let columns: Vec<Vec<f64>> = (0..8)
            .map(|_| {
                factor
                    .iter()
                    .map(|f| loading * f + uniqueness * normal.sample(&mut rng))
                    .collect()
            })
            .collect();
        let cube = cube_from_columns(&columns);
        let eig = scree_eigenvalues(&cube, 1).unwrap();
        let expected = 1.0 + 7.0 * loading * loading;
        assert!(
            (eig[0] - expected).abs() < 0.15,
            "largest eigenvalue {} vs {expected}",
            eig[0]
        );
    }

    #[test]
    fn scree_zero_variance_item_is_named() {
        let columns = vec![vec![1.0, 2.0, 3.0, 4.0], vec![2.0; 4]];
        let cube = cube_from_columns(&columns);
        match scree_eigenvalues(&cube, 1).unwrap_err() {
            Error::ZeroVariance { what } => assert!(what.contains("item 2")),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
