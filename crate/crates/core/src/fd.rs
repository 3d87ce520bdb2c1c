//! Central finite differences with one Richardson step.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Relative step used throughout: `1e-4` times the local scale.
pub const REL_STEP: f64 = 1e-4;

fn check_step(x: &[f64], h: f64) -> Result<()> {
    let mag = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if !(h > 1e-13 * mag) {
        return Err(Error::StepUnderflow(format!("step {h:e} against magnitude {mag:e}")));
    }
    Ok(())
}

fn shifted(x: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut y = x.to_vec();
    for &(k, d) in moves {
        y[k] += d;
    }
    y
}

fn along(x: &[f64], dir: &[f64], t: f64) -> Vec<f64> {
    x.iter().zip(dir).map(|(a, d)| a + t * d).collect()
}

/// Derivative of order 0, 1 or 2 along a unit direction.
pub fn directional<F>(f: &F, x: &[f64], dir: &[f64], order: u32, h: f64) -> Result<Complex64>
where
    F: Fn(&[f64]) -> Complex64 + ?Sized,
{
    check_step(x, h)?;
    let raw = |h: f64| -> Complex64 {
        match order {
            0 => f(x),
            1 => (f(&along(x, dir, h)) - f(&along(x, dir, -h))) / (2.0 * h),
            _ => (f(&along(x, dir, h)) - 2.0 * f(x) + f(&along(x, dir, -h))) / (h * h),
        }
    };
    if order > 2 {
        return Err(Error::Domain(format!("derivative order {order} > 2")));
    }
    if order == 0 {
        return Ok(f(x));
    }
    Ok((4.0 * raw(0.5 * h) - raw(h)) / 3.0)
}

/// Mixed partial `∂^α f` for a multi-index with `|α| <= 2`. `scales[k]` is
/// the local length scale of coordinate `k`.
pub fn partial<F>(f: &F, x: &[f64], alpha: &[u32], scales: &[f64]) -> Result<Complex64>
where
    F: Fn(&[f64]) -> Complex64 + ?Sized,
{
    let total: u32 = alpha.iter().sum();
    let active: Vec<usize> = (0..alpha.len()).filter(|&k| alpha[k] > 0).collect();
    match (total, active.as_slice()) {
        (0, _) => Ok(f(x)),
        (1 | 2, [k]) => {
            let mut dir = vec![0.0; x.len()];
            dir[*k] = 1.0;
            directional(f, x, &dir, total, REL_STEP * scales[*k])
        }
        (2, [a, b]) => {
            let (ha, hb) = (REL_STEP * scales[*a], REL_STEP * scales[*b]);
            check_step(x, ha.min(hb))?;
            let raw = |s: f64| -> Complex64 {
                let (da, db) = (s * ha, s * hb);
                (f(&shifted(x, &[(*a, da), (*b, db)])) - f(&shifted(x, &[(*a, da), (*b, -db)]))
                    - f(&shifted(x, &[(*a, -da), (*b, db)]))
                    + f(&shifted(x, &[(*a, -da), (*b, -db)])))
                    / (4.0 * da * db)
            };
            Ok((4.0 * raw(0.5) - raw(1.0)) / 3.0)
        }
        _ => Err(Error::Domain(format!("multi-index {alpha:?} has order > 2"))),
    }
}

/// Real-valued convenience wrapper.
pub fn partial_real<F>(f: &F, x: &[f64], alpha: &[u32], scales: &[f64]) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    let g = |y: &[f64]| Complex64::new(f(y), 0.0);
    Ok(partial(&g, x, alpha, scales)?.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_of_a_polynomial() {
        let f = |x: &[f64]| Complex64::new(x[0].powi(3) * x[1] + x[1].sin(), 0.0);
        let x = [1.3, 0.7];
        let s = [1.0, 1.0];
        let d0 = partial(&f, &x, &[1, 0], &s).unwrap().re;
        assert!((d0 - 3.0 * 1.3f64.powi(2) * 0.7).abs() < 1e-9);
        let d00 = partial(&f, &x, &[2, 0], &s).unwrap().re;
        assert!((d00 - 6.0 * 1.3 * 0.7).abs() < 1e-6);
        let d01 = partial(&f, &x, &[1, 1], &s).unwrap().re;
        assert!((d01 - 3.0 * 1.3f64.powi(2)).abs() < 1e-6);
        let d11 = partial(&f, &x, &[0, 2], &s).unwrap().re;
        assert!((d11 + 0.7f64.sin()).abs() < 1e-6);
    }

    #[test]
    fn underflowing_step_is_reported() {
        let f = |x: &[f64]| Complex64::new(x[0], 0.0);
        assert!(partial(&f, &[1e6], &[1], &[1e-12]).is_err());
    }
}
