//! Cyclic Jacobi eigenvalue iteration for small symmetric matrices.
//!
//! Each rotation annihilates one off-diagonal element; sweeps repeat until
//! the off-diagonal norm falls below the convergence threshold. Plenty for
//! the item-by-item correlation matrices this crate works with.

pub(crate) const CONVERGENCE: f64 = 1e-10;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix, sorted descending. Ties keep the
/// order of the original diagonal position.
pub(crate) fn symmetric_eigenvalues(mut a: Vec<Vec<f64>>, tol: f64) -> Vec<f64> {
    let n = a.len();
    if n == 1 {
        return vec![a[0][0]];
    }

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) < tol {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, p, q);
            }
        }
    }

    let mut indexed: Vec<(usize, f64)> = (0..n).map(|i| (i, a[i][i])).collect();
    indexed.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap_or(std::cmp::Ordering::Equal));
    indexed.into_iter().map(|(_, v)| v).collect()
}

fn off_diagonal_norm(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut sum = 0.0;
    for p in 0..n - 1 {
        for q in p + 1..n {
            sum += a[p][q] * a[p][q];
        }
    }
    (2.0 * sum).sqrt()
}

fn rotate(a: &mut [Vec<f64>], p: usize, q: usize) {
    let apq = a[p][q];
    if apq == 0.0 {
        return;
    }
    let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
    // Smaller-angle root of t^2 + 2 t theta - 1 = 0.
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let n = a.len();
    let app = a[p][p];
    let aqq = a[q][q];
    a[p][p] = c * c * app - 2.0 * s * c * apq + s * s * aqq;
    a[q][q] = s * s * app + 2.0 * s * c * apq + c * c * aqq;
    a[p][q] = 0.0;
    a[q][p] = 0.0;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a[r][p];
        let arq = a[r][q];
        a[r][p] = c * arp - s * arq;
        a[p][r] = a[r][p];
        a[r][q] = s * arp + c * arq;
        a[q][r] = a[r][q];
    }
}
