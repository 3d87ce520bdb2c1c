//! Product-class symbols `σ(x, ξ)`.

use crate::error::{Error, Result};
use crate::fd;
use crate::partition::{mollifier, norm, smooth_step, SubspaceLayout};
use num_complex::Complex64;
use std::fmt::Debug;
use std::path::Path;
use std::sync::Arc;

/// `γ_α(r) = r^{-α}(1 - φ(2r))`: equals `r^{-α}` for `r >= 1`, vanishes near 0.
pub fn gamma(alpha: f64, r: f64) -> f64 {
    let cut = 1.0 - mollifier(2.0 * r);
    if cut == 0.0 {
        0.0
    } else {
        r.powf(-alpha) * cut
    }
}

/// Lower edge of the plateau of the cone cutoff for `d` blocks.
pub fn cone_plateau(d: usize) -> f64 {
    0.5 * (0.5 + 1.0 / (d as f64).sqrt())
}

/// Degree-0 cone cutoff `Ψ(ξ) = ∏_i s(|ξ_i|/|ξ|)`, with `s = 0` below 1/2
/// and `s = 1` above `cone_plateau(d)`. Supported where every
/// `|ξ_i| >= |ξ|/2`, equal to 1 on a smaller open cone around the diagonal.
pub fn cone_cutoff(radii: &[f64]) -> f64 {
    let total = radii.iter().map(|r| r * r).sum::<f64>().sqrt();
    if total == 0.0 {
        return 0.0;
    }
    let hi = cone_plateau(radii.len());
    if radii.len() == 1 {
        return 1.0;
    }
    radii.iter().map(|r| smooth_step(r / total, 0.5, hi)).product()
}

/// ξ-dependent factor of a separated symbol; depends only on block radii.
#[derive(Debug, Clone, PartialEq)]
pub enum FreqProfile {
    Zero,
    One,
    /// `(1 + |ξ|²)^{m/2}`.
    Bessel { m: f64 },
    /// `∏ (1 + |ξ_i|²)^{m_i/2}`.
    Product { orders: Vec<f64> },
    /// `∏ γ_{-m_i}(|ξ_i|) · Ψ(ξ)`.
    ConeGamma { orders: Vec<f64> },
}

impl FreqProfile {
    pub fn eval_radii(&self, radii: &[f64]) -> f64 {
        match self {
            FreqProfile::Zero => 0.0,
            FreqProfile::One => 1.0,
            FreqProfile::Bessel { m } => {
                (1.0 + radii.iter().map(|r| r * r).sum::<f64>()).powf(0.5 * m)
            }
            FreqProfile::Product { orders } => radii
                .iter()
                .zip(orders)
                .map(|(r, m)| (1.0 + r * r).powf(0.5 * m))
                .product(),
            FreqProfile::ConeGamma { orders } => {
                let g: f64 = radii.iter().zip(orders).map(|(r, m)| gamma(-m, *r)).product();
                if g == 0.0 {
                    0.0
                } else {
                    g * cone_cutoff(radii)
                }
            }
        }
    }

    pub fn order(&self) -> f64 {
        match self {
            FreqProfile::Zero | FreqProfile::One => 0.0,
            FreqProfile::Bessel { m } => *m,
            FreqProfile::Product { orders } | FreqProfile::ConeGamma { orders } => orders.iter().sum(),
        }
    }
}

/// Symbol sampled on a tensor grid over `(x, ξ)`, multilinear in between and
/// zero outside the table box.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedSymbol {
    axes: Vec<Vec<f64>>,
    values: Vec<Complex64>,
}

impl TabulatedSymbol {
    /// Reads CSV with columns `x_1..x_n, ξ_1..ξ_n, re, im` (header row
    /// required); rows may come in any order but must fill a tensor grid.
    pub fn from_csv(path: &Path, n: usize) -> Result<Self> {
        let mut rd = csv::Reader::from_path(path)?;
        let mut rows: Vec<(Vec<f64>, Complex64)> = Vec::new();
        for (k, rec) in rd.records().enumerate() {
            let rec = rec?;
            if rec.len() != 2 * n + 2 {
                return Err(Error::Format(format!(
                    "row {}: expected {} columns, found {}",
                    k + 2,
                    2 * n + 2,
                    rec.len()
                )));
            }
            let vals: Vec<f64> = rec
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Format(format!("row {}: {e}", k + 2)))?;
            rows.push((vals[..2 * n].to_vec(), Complex64::new(vals[2 * n], vals[2 * n + 1])));
        }
        Self::from_rows(rows)
    }

    pub fn from_rows(rows: Vec<(Vec<f64>, Complex64)>) -> Result<Self> {
        let dims = rows.first().map(|r| r.0.len()).unwrap_or(0);
        if dims == 0 {
            return Err(Error::Format("empty symbol table".into()));
        }
        let mut axes: Vec<Vec<f64>> = (0..dims)
            .map(|c| {
                let mut v: Vec<f64> = rows.iter().map(|r| r.0[c]).collect();
                v.sort_by(f64::total_cmp);
                v.dedup();
                v
            })
            .collect();
        let total: usize = axes.iter().map(|a| a.len()).product();
        if total != rows.len() || axes.iter().any(|a| a.len() < 2) {
            return Err(Error::Format(format!(
                "{} rows do not fill a tensor grid with at least two nodes per axis",
                rows.len()
            )));
        }
        let mut values = vec![Complex64::new(f64::NAN, 0.0); total];
        for (coords, v) in rows {
            let mut idx = 0;
            for (c, a) in coords.iter().zip(&axes) {
                let k = a.binary_search_by(|p| p.total_cmp(c)).unwrap();
                idx = idx * a.len() + k;
            }
            values[idx] = v;
        }
        if values.iter().any(|v| v.re.is_nan()) {
            return Err(Error::Format("duplicate rows in symbol table".into()));
        }
        axes.shrink_to_fit();
        Ok(Self { axes, values })
    }

    pub fn eval(&self, point: &[f64]) -> Complex64 {
        let mut base = Vec::with_capacity(point.len());
        let mut frac = Vec::with_capacity(point.len());
        for (p, a) in point.iter().zip(&self.axes) {
            if *p < a[0] || *p > a[a.len() - 1] {
                return Complex64::new(0.0, 0.0);
            }
            let k = match a.binary_search_by(|q| q.total_cmp(p)) {
                Ok(k) => k.min(a.len() - 2),
                Err(k) => k - 1,
            };
            base.push(k);
            frac.push((p - a[k]) / (a[k + 1] - a[k]));
        }
        let dims = point.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for corner in 0..(1usize << dims) {
            let mut w = 1.0;
            let mut idx = 0;
            for c in 0..dims {
                let up = (corner >> c) & 1;
                w *= if up == 1 { frac[c] } else { 1.0 - frac[c] };
                idx = idx * self.axes[c].len() + base[c] + up;
            }
            if w != 0.0 {
                acc += self.values[idx] * w;
            }
        }
        acc
    }
}

#[derive(Clone)]
pub enum SymbolKind {
    /// `a(x) · s(ξ)` with `a(x) = φ(2|x|/R)` and `s` a radial profile.
    Separated(FreqProfile),
    Table(Arc<TabulatedSymbol>),
    Custom(Arc<dyn Fn(&[f64], &[f64]) -> Complex64 + Send + Sync>),
}

impl Debug for SymbolKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SymbolKind::Separated(p) => write!(f, "Separated({p:?})"),
            SymbolKind::Table(_) => write!(f, "Table"),
            SymbolKind::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// A symbol of order `m` with compact x-support.
#[derive(Debug, Clone)]
pub struct Symbol {
    pub layout: SubspaceLayout,
    pub order: f64,
    /// `a(x) = φ(2|x|/support_radius)`: 1 on `|x| <= R/2`, 0 beyond `R`.
    pub support_radius: f64,
    pub kind: SymbolKind,
}

impl Symbol {
    pub fn separated(layout: SubspaceLayout, profile: FreqProfile, support_radius: f64) -> Self {
        let order = profile.order();
        Self { layout, order, support_radius, kind: SymbolKind::Separated(profile) }
    }

    pub fn bessel(layout: SubspaceLayout, m: f64, support_radius: f64) -> Self {
        Self::separated(layout, FreqProfile::Bessel { m }, support_radius)
    }

    pub fn zero(layout: SubspaceLayout) -> Self {
        Self::separated(layout, FreqProfile::Zero, 1.0)
    }

    pub fn table(layout: SubspaceLayout, order: f64, table: TabulatedSymbol) -> Self {
        let support_radius = table.axes[..layout.n()]
            .iter()
            .map(|a| a[0].abs().max(a[a.len() - 1].abs()))
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        Self { layout, order, support_radius, kind: SymbolKind::Table(Arc::new(table)) }
    }

    /// The spatial factor `a(x)` of a separated symbol.
    pub fn spatial(&self, x: &[f64]) -> f64 {
        mollifier(2.0 * norm(x) / self.support_radius)
    }

    pub fn profile(&self) -> Option<&FreqProfile> {
        match &self.kind {
            SymbolKind::Separated(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.profile(), Some(FreqProfile::Zero))
    }

    /// `s(ξ)` for a separated symbol.
    pub fn freq(&self, xi: &[f64]) -> Option<f64> {
        self.profile().map(|p| p.eval_radii(&self.layout.block_norms(xi)))
    }

    pub fn eval(&self, x: &[f64], xi: &[f64]) -> Complex64 {
        match &self.kind {
            SymbolKind::Separated(p) => {
                let a = self.spatial(x);
                if a == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                Complex64::new(a * p.eval_radii(&self.layout.block_norms(xi)), 0.0)
            }
            SymbolKind::Table(t) => {
                let mut pt = x.to_vec();
                pt.extend_from_slice(xi);
                t.eval(&pt)
            }
            SymbolKind::Custom(f) => {
                if norm(x) > self.support_radius {
                    Complex64::new(0.0, 0.0)
                } else {
                    f(x, xi)
                }
            }
        }
    }
}

/// `max |∂^α_ξ ∂^β_x σ| / ((1+|ξ|)^m ∏(1+|ξ_i|)^{-|α_i|})` over samples, with
/// `|α| + |β| <= 2`.
pub fn symbol_class_residual(
    symbol: &Symbol,
    alpha: &[u32],
    beta: &[u32],
    samples: &[(Vec<f64>, Vec<f64>)],
) -> Result<f64> {
    let n = symbol.layout.n();
    if alpha.len() != n || beta.len() != n {
        return Err(Error::Index("multi-index length must equal n".into()));
    }
    let mut multi: Vec<u32> = beta.to_vec();
    multi.extend_from_slice(alpha);
    let blocks = symbol.layout.offsets();
    let dims = symbol.layout.dims();
    let mut worst = 0.0f64;
    for (x, xi) in samples {
        let mut z = x.clone();
        z.extend_from_slice(xi);
        let radii = symbol.layout.block_norms(xi);
        let mut scales = vec![1.0; n];
        for (b, &dim) in dims.iter().enumerate() {
            scales.extend(std::iter::repeat(1.0 + radii[b]).take(dim));
        }
        let f = |v: &[f64]| symbol.eval(&v[..n], &v[n..]);
        let d = fd::partial(&f, &z, &multi, &scales)?;
        let mut bound = (1.0 + norm(xi)).powf(symbol.order);
        for (b, &off) in blocks.iter().enumerate() {
            let a_i: u32 = alpha[off..off + dims[b]].iter().sum();
            bound *= (1.0 + radii[b]).powi(-(a_i as i32));
        }
        worst = worst.max(d.norm() / bound);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l22() -> SubspaceLayout {
        SubspaceLayout::new(vec![2, 2]).unwrap()
    }

    fn samples(scale: f64) -> Vec<(Vec<f64>, Vec<f64>)> {
        (0..20)
            .map(|k| {
                let t = k as f64 * 0.37;
                (
                    vec![0.1 * t.sin(), 0.2 * t.cos(), -0.1, 0.05],
                    vec![scale * t.cos(), scale * t.sin(), scale * 0.5, -scale * 0.7],
                )
            })
            .collect()
    }

    #[test]
    fn bessel_symbol_bounded_at_order_zero_derivative() {
        let m = -1.0;
        let s = Symbol::bessel(l22(), m, 1.0);
        for scale in [1.0, 10.0, 100.0] {
            let r = symbol_class_residual(&s, &[0; 4], &[0; 4], &samples(scale)).unwrap();
            assert!(r <= 2f64.sqrt().powf(m.abs()) + 1e-12);
        }
    }

    #[test]
    fn constant_symbol_has_zero_derivatives() {
        let s = Symbol::separated(l22(), FreqProfile::One, 1.0);
        let r = symbol_class_residual(&s, &[1, 0, 0, 0], &[0; 4], &samples(5.0)).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn product_symbol_derivative_plateau() {
        let s = Symbol::separated(l22(), FreqProfile::Product { orders: vec![-0.5, -0.5] }, 1.0);
        let mut vals = Vec::new();
        for k in 1..=8 {
            let r1 = (k as f64).exp2();
            let pts = vec![(vec![0.0; 4], vec![r1 * 0.6, r1 * 0.8, 3.0, 4.0])];
            vals.push(symbol_class_residual(&s, &[1, 0, 0, 0], &[0; 4], &pts).unwrap());
        }
        let (lo, hi) = vals.iter().fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        assert!(hi / lo <= 4.0, "{vals:?}");
    }

    #[test]
    fn x_support_is_respected() {
        let s = Symbol::bessel(l22(), 0.0, 1.0);
        assert_eq!(s.eval(&[1.0, 0.1, 0.0, 0.0], &[1.0; 4]).norm(), 0.0);
        assert_eq!(s.eval(&[0.3, 0.0, 0.0, 0.0], &[1.0; 4]).re, 1.0);
    }

    #[test]
    fn gamma_and_cone() {
        assert_eq!(gamma(1.5, 0.2), 0.0);
        assert!((gamma(1.5, 4.0) - 4f64.powf(-1.5)).abs() < 1e-15);
        assert_eq!(cone_cutoff(&[1.0, 1.0]), 1.0);
        assert_eq!(cone_cutoff(&[1.0, 0.3]), 0.0);
        assert_eq!(cone_cutoff(&[2.0, 2.0]), cone_cutoff(&[20.0, 20.0]));
    }

    #[test]
    fn table_interpolation_is_multilinear() {
        let mut rows = Vec::new();
        for a in [0.0, 1.0] {
            for b in [0.0, 2.0] {
                rows.push((vec![a, b], Complex64::new(a + 3.0 * b, -b)));
            }
        }
        let t = TabulatedSymbol::from_rows(rows).unwrap();
        let v = t.eval(&[0.25, 1.0]);
        assert!((v.re - 3.25).abs() < 1e-14 && (v.im + 1.0).abs() < 1e-14);
        assert_eq!(t.eval(&[2.0, 0.0]).norm(), 0.0);
    }

    #[test]
    fn table_rejects_ragged_grids() {
        let rows = vec![
            (vec![0.0, 0.0], Complex64::new(1.0, 0.0)),
            (vec![1.0, 0.0], Complex64::new(1.0, 0.0)),
            (vec![0.0, 1.0], Complex64::new(1.0, 0.0)),
        ];
        assert!(TabulatedSymbol::from_rows(rows).is_err());
    }
}
