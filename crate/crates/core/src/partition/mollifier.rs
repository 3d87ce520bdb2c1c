//! The smooth cutoff `φ`: equal to 1 on `[0, 1]`, 0 beyond 2, with a C^∞
//! monotone transition built from the normalized integral of
//! `exp(-1/(1-s²))`.

use crate::quad::gauss_legendre;
use std::sync::OnceLock;

const CELLS: usize = 1024;
const ORDER: usize = 8;

struct Table {
    cum: Vec<f64>,
    total: f64,
    x: Vec<f64>,
    w: Vec<f64>,
}

fn bump(s: f64) -> f64 {
    let q = 1.0 - s * s;
    if q <= 0.0 {
        0.0
    } else {
        (-1.0 / q).exp()
    }
}

fn table() -> &'static Table {
    static T: OnceLock<Table> = OnceLock::new();
    T.get_or_init(|| {
        let (x, w) = gauss_legendre(ORDER);
        // cumulative integrals over [-1, s_k], s_k = -1 + k / CELLS, k = 0..=CELLS
        let h = 1.0 / CELLS as f64;
        let mut cum = vec![0.0; CELLS + 1];
        for k in 0..CELLS {
            let a = -1.0 + k as f64 * h;
            let cell: f64 = x
                .iter()
                .zip(&w)
                .map(|(xi, wi)| wi * bump(a + 0.5 * h * (xi + 1.0)))
                .sum::<f64>()
                * 0.5
                * h;
            cum[k + 1] = cum[k] + cell;
        }
        let total = 2.0 * cum[CELLS];
        Table { cum, total, x, w }
    })
}

/// Normalized cumulative integral on the left half, `s ∈ [-1, 0]`.
fn left_cdf(s: f64) -> f64 {
    let t = table();
    let pos = (s + 1.0) * CELLS as f64;
    let k = (pos.floor() as usize).min(CELLS);
    let a = -1.0 + k as f64 / CELLS as f64;
    let span = s - a;
    let partial = if span > 0.0 {
        t.x.iter()
            .zip(&t.w)
            .map(|(xi, wi)| wi * bump(a + 0.5 * span * (xi + 1.0)))
            .sum::<f64>()
            * 0.5
            * span
    } else {
        0.0
    };
    (t.cum[k] + partial) / t.total
}

/// Normalized CDF of the bump on `[-1, 1]`, antisymmetric about `s = 0`.
pub fn bump_cdf(s: f64) -> f64 {
    if s <= -1.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else if s <= 0.0 {
        left_cdf(s)
    } else {
        1.0 - left_cdf(-s)
    }
}

/// The cutoff `φ(t)`. Even, 1 for `|t| <= 1`, 0 for `|t| >= 2`.
pub fn mollifier(t: f64) -> f64 {
    let a = t.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        1.0 - bump_cdf(2.0 * a - 3.0)
    }
}

/// Smooth step from 0 (at `t <= lo`) to 1 (at `t >= hi`).
pub fn smooth_step(t: f64, lo: f64, hi: f64) -> f64 {
    1.0 - mollifier((1.0 + (t - lo) / (hi - lo)).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_and_support() {
        assert_eq!(mollifier(0.5), 1.0);
        assert_eq!(mollifier(-1.0), 1.0);
        assert_eq!(mollifier(2.5), 0.0);
        assert_eq!(mollifier(2.0), 0.0);
    }

    #[test]
    fn midpoint_regression_constant() {
        assert_eq!(mollifier(1.5), 0.5);
        assert_eq!(mollifier(-1.5), 0.5);
    }

    #[test]
    fn transition_is_monotone_and_symmetric() {
        let mut prev = 1.0;
        for k in 0..=2000 {
            let t = 1.0 + k as f64 / 2000.0;
            let v = mollifier(t);
            assert!(v <= prev + 1e-15);
            assert!((v + mollifier(3.0 - t) - 1.0).abs() < 1e-14);
            prev = v;
        }
    }

    #[test]
    fn cdf_matches_independent_quadrature() {
        // Simpson on a fine grid as the independent reference.
        let n = 200_000;
        let h = 2.0 / n as f64;
        let f = |s: f64| bump(s);
        let total: f64 = (0..n)
            .map(|k| {
                let a = -1.0 + k as f64 * h;
                h / 6.0 * (f(a) + 4.0 * f(a + 0.5 * h) + f(a + h))
            })
            .sum();
        let upto = |s: f64| -> f64 {
            let m = ((s + 1.0) / h).round() as usize;
            (0..m)
                .map(|k| {
                    let a = -1.0 + k as f64 * h;
                    h / 6.0 * (f(a) + 4.0 * f(a + 0.5 * h) + f(a + h))
                })
                .sum::<f64>()
                / total
        };
        for s in [-0.75, -0.3, 0.2, 0.6] {
            assert!((bump_cdf(s) - upto(s)).abs() < 1e-12, "s = {s}");
        }
    }

    #[test]
    fn smooth_step_limits() {
        assert_eq!(smooth_step(0.4, 0.5, 0.6), 0.0);
        assert_eq!(smooth_step(0.29, 0.5, 0.6), 0.0);
        assert_eq!(smooth_step(0.7, 0.5, 0.6), 1.0);
        assert_eq!(smooth_step(0.75, 0.5, 1.0), 0.5);
    }
}
