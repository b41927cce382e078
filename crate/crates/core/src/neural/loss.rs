use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the relative error between predicted and optimal powers is measured.
///
/// Both variants operate on powers already divided by the user's cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    /// `(1/K) sum_k (v_k - u_k)^2`, averaged over samples.
    #[default]
    CapNormalized,
    /// `||v - u||^2 / ||u||^2`, averaged over samples.
    TargetNorm,
}

const NORM_FLOOR: f64 = 1e-12;

fn check(pred: &ArrayView2<f64>, target: &ArrayView2<f64>) -> Result<()> {
    if pred.dim() != target.dim() {
        return Err(Error::dim("prediction/target", target.len(), pred.len()));
    }
    if pred.nrows() == 0 {
        return Err(Error::Empty("loss over an empty batch".into()));
    }
    Ok(())
}

/// Mean loss over the rows of a batch.
pub fn loss_relative_mse(pred: ArrayView2<f64>, target: ArrayView2<f64>, kind: LossKind) -> Result<f64> {
    check(&pred, &target)?;
    let n = pred.nrows() as f64;
    let total: f64 = pred
        .outer_iter()
        .zip(target.outer_iter())
        .map(|(p, t)| {
            let sq: f64 = p.iter().zip(t.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            match kind {
                LossKind::CapNormalized => sq / p.len() as f64,
                LossKind::TargetNorm => sq / t.dot(&t).max(NORM_FLOOR),
            }
        })
        .sum();
    Ok(total / n)
}

/// Loss value and its gradient with respect to `pred`.
pub fn loss_and_grad(pred: ArrayView2<f64>, target: ArrayView2<f64>, kind: LossKind) -> Result<(f64, Array2<f64>)> {
    let loss = loss_relative_mse(pred, target, kind)?;
    let n = pred.nrows() as f64;
    let mut grad = &pred - &target;
    match kind {
        LossKind::CapNormalized => grad *= 2.0 / (n * pred.ncols() as f64),
        LossKind::TargetNorm => {
            for (mut row, t) in grad.axis_iter_mut(Axis(0)).zip(target.outer_iter()) {
                let scale = 2.0 / (n * t.dot(&t).max(NORM_FLOOR));
                row *= scale;
            }
        }
    }
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    #[test]
    fn worked_values() {
        let u = arr2(&[[0.2, 0.4, 0.6, 0.8, 1.0]]);
        assert_eq!(loss_relative_mse(u.view(), u.view(), LossKind::CapNormalized).unwrap(), 0.0);
        let v = &u + 0.1;
        let l = loss_relative_mse(v.view(), u.view(), LossKind::CapNormalized).unwrap();
        assert!((l - 0.01).abs() < 1e-15);
        let mut w = u.clone();
        w[[0, 0]] += 0.1;
        let l = loss_relative_mse(w.view(), u.view(), LossKind::CapNormalized).unwrap();
        assert!((l - 0.002).abs() < 1e-15);
        let l = loss_relative_mse(w.view(), u.view(), LossKind::TargetNorm).unwrap();
        assert!((l - 0.01 / 2.2).abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_difference_quotient() {
        let u = arr2(&[[0.2, 0.0, 0.6], [0.1, 0.9, 0.3]]);
        let v = arr2(&[[0.25, -0.1, 0.5], [0.3, 0.7, 0.35]]);
        for kind in [LossKind::CapNormalized, LossKind::TargetNorm] {
            let (_, g) = loss_and_grad(v.view(), u.view(), kind).unwrap();
            for i in 0..2 {
                for j in 0..3 {
                    let h = 1e-6;
                    let mut p = v.clone();
                    p[[i, j]] += h;
                    let up = loss_relative_mse(p.view(), u.view(), kind).unwrap();
                    p[[i, j]] -= 2.0 * h;
                    let dn = loss_relative_mse(p.view(), u.view(), kind).unwrap();
                    assert!(((up - dn) / (2.0 * h) - g[[i, j]]).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn order_invariant_and_shape_checked() {
        let u = arr2(&[[0.2, 0.4], [0.6, 0.8], [0.1, 0.3]]);
        let v = arr2(&[[0.3, 0.1], [0.5, 0.9], [0.0, 0.3]]);
        let a = loss_relative_mse(v.view(), u.view(), LossKind::CapNormalized).unwrap();
        let perm = [2, 0, 1];
        let up = u.select(Axis(0), &perm);
        let vp = v.select(Axis(0), &perm);
        let b = loss_relative_mse(vp.view(), up.view(), LossKind::CapNormalized).unwrap();
        assert!((a - b).abs() < 1e-15);
        assert!(loss_relative_mse(v.view(), u.t(), LossKind::CapNormalized).is_err());
    }
}
