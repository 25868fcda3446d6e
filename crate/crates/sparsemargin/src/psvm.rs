//! Closed-form proximal SVM baseline.
//!
//! The proximal SVM replaces the SVM inequality with an equality constraint,
//! turning training into the regularized least-squares problem
//!
//! ```text
//! min_u  (nu/2) |H u - e|^2 + (1/2) |u|^2
//! ```
//!
//! whose unique minimizer solves `(I + nu H^T H) u = nu H^T e`. The system is
//! symmetric positive definite of size `(m+1) x (m+1)`, so we factor it with
//! a Cholesky decomposition rather than touching the `n x n` dual.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{build_augmented, Dataset};
use crate::error::{Error, Result};

/// A separating hyperplane `x . w = gamma`; points are classified by
/// `sign(x . w - gamma)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub w: Vec<f64>,
    pub gamma: f64,
}

impl Hyperplane {
    pub fn new(w: Vec<f64>, gamma: f64) -> Self {
        Hyperplane { w, gamma }
    }

    pub fn zeros(m: usize) -> Self {
        Hyperplane {
            w: vec![0.0; m],
            gamma: 0.0,
        }
    }

    /// Stacked solution vector `u = (w, gamma)`.
    pub fn to_stacked(&self) -> DVector<f64> {
        let mut u = DVector::zeros(self.w.len() + 1);
        for (j, &wj) in self.w.iter().enumerate() {
            u[j] = wj;
        }
        u[self.w.len()] = self.gamma;
        u
    }

    /// Split a stacked solution vector back into `(w, gamma)`.
    pub fn from_stacked(u: &DVector<f64>) -> Self {
        let m = u.len() - 1;
        Hyperplane {
            w: u.as_slice()[..m].to_vec(),
            gamma: u[m],
        }
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }
}

/// Solve the SPD system `(I + nu H^T H) u = nu H^T e`.
///
/// Note the `nu` on the right-hand side: dropping it (a variant that shows
/// up in some write-ups of the closed form) solves a different problem
/// unless `nu = 1`. This is the stationarity condition of the objective
/// above.
pub fn solve_psvm(dataset: &Dataset, nu: f64) -> Result<Hyperplane> {
    if !nu.is_finite() || nu <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "nu must be a positive finite number, got {nu}"
        )));
    }
    let h = build_augmented(dataset);
    solve_psvm_system(&h, nu)
}

pub(crate) fn solve_psvm_system(h: &DMatrix<f64>, nu: f64) -> Result<Hyperplane> {
    let dim = h.ncols();
    let mut system = h.transpose() * h * nu;
    for j in 0..dim {
        system[(j, j)] += 1.0;
    }
    let rhs = h.transpose() * DVector::from_element(h.nrows(), nu);
    let chol = nalgebra::Cholesky::new(system)
        .ok_or_else(|| Error::SolveFailed("PSVM system is not positive definite".into()))?;
    let u = chol.solve(&rhs);
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::SolveFailed("PSVM solution is not finite".into()));
    }
    Ok(Hyperplane::from_stacked(&u))
}

/// Infinity-norm residual of the PSVM stationarity condition
/// `(I + nu H^T H) u - nu H^T e` at `u`.
pub fn psvm_residual(dataset: &Dataset, nu: f64, plane: &Hyperplane) -> f64 {
    let h = build_augmented(dataset);
    let u = plane.to_stacked();
    let e = DVector::from_element(h.nrows(), 1.0);
    let residual = &u + h.transpose() * (&h * &u) * nu - h.transpose() * e * nu;
    residual.amax()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn two_point_dataset() -> Dataset {
        Dataset::new(
            DMatrix::from_row_slice(2, 1, &[2.0, -2.0]),
            DVector::from_vec(vec![1.0, -1.0]),
            None,
        )
        .unwrap()
    }

    /// Gaussian elimination with partial pivoting; independent of the
    /// Cholesky path used by the solver.
    fn gauss_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
        let n = a.nrows();
        let mut m = a.clone();
        let mut rhs = b.clone();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| m[(i, col)].abs().total_cmp(&m[(j, col)].abs()))
                .unwrap();
            if pivot != col {
                m.swap_rows(col, pivot);
                rhs.swap_rows(col, pivot);
            }
            for row in col + 1..n {
                let factor = m[(row, col)] / m[(col, col)];
                for k in col..n {
                    m[(row, k)] -= factor * m[(col, k)];
                }
                rhs[row] -= factor * rhs[col];
            }
        }
        let mut x = DVector::zeros(n);
        for row in (0..n).rev() {
            let mut acc = rhs[row];
            for k in row + 1..n {
                acc -= m[(row, k)] * x[k];
            }
            x[row] = acc / m[(row, row)];
        }
        x
    }

    #[test]
    fn two_point_example_has_known_solution() {
        // H^T H = diag(8, 2), H^T e = (4, 0) so (I + H^T H) u = H^T e gives
        // u = (4/9, 0).
        let plane = solve_psvm(&two_point_dataset(), 1.0).unwrap();
        assert!((plane.w[0] - 4.0 / 9.0).abs() < 1e-14);
        assert!(plane.gamma.abs() < 1e-14);
    }

    #[test]
    fn zero_features_balanced_labels_give_zero_plane() {
        let ds = Dataset::new(
            DMatrix::zeros(4, 3),
            DVector::from_vec(vec![1.0, -1.0, 1.0, -1.0]),
            None,
        )
        .unwrap();
        let plane = solve_psvm(&ds, 2.5).unwrap();
        assert!(plane.w.iter().all(|&v| v == 0.0));
        assert_eq!(plane.gamma, 0.0);
    }

    #[test]
    fn matches_independent_dense_solve_at_nu_ten() {
        let ds = two_point_dataset();
        let nu = 10.0;
        let plane = solve_psvm(&ds, nu).unwrap();
        assert!(psvm_residual(&ds, nu, &plane) < 1e-10);

        let h = build_augmented(&ds);
        let mut system = h.transpose() * &h * nu;
        for j in 0..2 {
            system[(j, j)] += 1.0;
        }
        let rhs = h.transpose() * DVector::from_element(2, nu);
        let oracle = gauss_solve(&system, &rhs);
        let u = plane.to_stacked();
        assert!((u - oracle).amax() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_nu() {
        assert!(solve_psvm(&two_point_dataset(), 0.0).is_err());
        assert!(solve_psvm(&two_point_dataset(), -1.0).is_err());
    }

    #[test]
    fn stacked_round_trip() {
        let plane = Hyperplane::new(vec![1.5, -2.0, 0.25], 3.0);
        assert_eq!(Hyperplane::from_stacked(&plane.to_stacked()), plane);
    }
}
