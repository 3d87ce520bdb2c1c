//! Kernel columns and operator application.

use super::budget::{self, complex_mb, DEFAULT_BUDGET_MB};
use super::fft::{self, cis};
use super::field::{EnginePath, FunctionField, KernelField, KernelMeta};
use super::grid::{Axis, FreqGrid, Lattice, SpaceGrid};
use super::window::Window;
use crate::error::{Error, Result};
use crate::partition::{mollifier, norm, ring, WindowSpec};
use crate::phase::Phase;
use crate::symbol::Symbol;
use ndarray::{Array2, ArrayD, Axis as NdAxis, IxDyn};
use num_complex::Complex64;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Which summation to use when several are valid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PathChoice {
    /// FFT when the phase is translation invariant and the symbol separated.
    #[default]
    Auto,
    /// Always the direct quadrature sum.
    Oracle,
}

/// A phase-symbol pair with evaluation settings.
#[derive(Debug, Clone)]
pub struct Engine {
    pub phase: Phase,
    pub symbol: Symbol,
    /// Spacing constant of the direction grids.
    pub grid_constant: f64,
    pub budget_mb: u64,
    pub path: PathChoice,
}

/// `out[t] = Σ_s g[s] ∏_i m_i[t_i, s_i]` over block-flattened axes.
fn contract(g: ArrayD<Complex64>, mats: &[Array2<Complex64>]) -> ArrayD<Complex64> {
    let mut t = g;
    for (i, m) in mats.iter().enumerate() {
        let d = t.ndim();
        let mut perm: Vec<usize> = (0..d).filter(|&k| k != i).collect();
        perm.push(i);
        let moved = t.permuted_axes(perm.clone()).as_standard_layout().into_owned();
        let shape = moved.shape().to_vec();
        let rest: usize = shape[..d - 1].iter().product();
        let mat = moved.into_shape_with_order((rest, shape[d - 1])).expect("standard layout");
        let prod = mat.dot(&m.t());
        let mut new_shape = shape[..d - 1].to_vec();
        new_shape.push(m.nrows());
        let back = prod.into_shape_with_order(IxDyn(&new_shape)).expect("standard layout");
        let mut inv = vec![0; d];
        for (pos, &ax) in perm.iter().enumerate() {
            inv[ax] = pos;
        }
        t = back.permuted_axes(inv);
    }
    t.as_standard_layout().into_owned()
}

/// Block indices carrying a nonzero entry, per block axis.
fn support_indices(g: &ArrayD<Complex64>) -> Vec<Vec<usize>> {
    let mut marks: Vec<Vec<bool>> = g.shape().iter().map(|&n| vec![false; n]).collect();
    for (ix, v) in g.indexed_iter() {
        if *v != ZERO {
            for (a, m) in marks.iter_mut().enumerate() {
                m[ix[a]] = true;
            }
        }
    }
    marks
        .into_iter()
        .map(|m| m.iter().enumerate().filter(|(_, &b)| b).map(|(k, _)| k).collect())
        .collect()
}

fn to_blocks(g: ArrayD<Complex64>, lattice: &Lattice) -> ArrayD<Complex64> {
    let sizes: Vec<usize> = (0..lattice.layout().d()).map(|i| lattice.block_len(i)).collect();
    g.as_standard_layout().into_owned().into_shape_with_order(IxDyn(&sizes)).expect("row-major blocks")
}

fn from_blocks(g: ArrayD<Complex64>, lattice: &Lattice) -> ArrayD<Complex64> {
    g.into_shape_with_order(IxDyn(&lattice.shape())).expect("row-major blocks")
}

fn meta_for(window: &Window, path: EnginePath, d: usize) -> KernelMeta {
    match window {
        Window::Piece { spec, .. } => {
            KernelMeta { j: spec.j, ell: spec.cone.ell().to_vec(), nu: spec.nu.clone(), path }
        }
        Window::Cone { cone, j_max } => KernelMeta { j: *j_max, ell: cone.ell().to_vec(), nu: None, path },
        w => KernelMeta { j: w.scale().unwrap_or(0), ell: vec![0; d], nu: None, path },
    }
}

impl Engine {
    pub fn new(phase: Phase, symbol: Symbol) -> Result<Self> {
        if phase.layout != symbol.layout {
            return Err(Error::Layout("phase and symbol layouts differ".into()));
        }
        Ok(Self { phase, symbol, grid_constant: 1.0, budget_mb: DEFAULT_BUDGET_MB, path: PathChoice::Auto })
    }

    pub fn with_path(mut self, path: PathChoice) -> Self {
        self.path = path;
        self
    }

    pub fn with_budget(mut self, budget_mb: u64) -> Self {
        self.budget_mb = budget_mb;
        self
    }

    /// Window of a partition piece using this engine's direction grids.
    pub fn piece_window(&self, spec: &WindowSpec) -> Result<Window> {
        Window::piece(&self.phase.layout, spec.clone(), self.grid_constant)
    }

    fn fft_eligible(&self) -> bool {
        self.phase.is_translation_invariant() && self.symbol.profile().is_some()
    }

    /// `e^{sign·2πiψ(ξ)} s(ξ)` on every node of `freq`, for
    /// translation-invariant phases `Φ_i = x_i·ξ_i + ψ_i(ξ_i)`.
    fn fft_factors(&self, freq: &Lattice, sign: f64) -> Vec<Complex64> {
        let profile = self.symbol.profile().expect("checked by caller");
        let d = freq.layout().d();
        let mut psi = Vec::with_capacity(d);
        let mut radii = Vec::with_capacity(d);
        for (i, c) in self.phase.components.iter().enumerate() {
            let nodes = freq.block_nodes(i);
            let zero = vec![0.0; freq.block(i).len()];
            radii.push(nodes.iter().map(|b| norm(b)).collect::<Vec<_>>());
            psi.push(nodes.iter().map(|b| if norm(b) == 0.0 { 0.0 } else { c.value(&zero, b) }).collect::<Vec<_>>());
        }
        let mut idx = vec![0; d];
        let mut r = vec![0.0; d];
        (0..freq.len())
            .map(|flat| {
                freq.split_index(flat, &mut idx);
                let mut p = 0.0;
                for i in 0..d {
                    p += psi[i][idx[i]];
                    r[i] = radii[i][idx[i]];
                }
                cis(sign * p) * profile.eval_radii(&r)
            })
            .collect()
    }

    /// `a(x)` on every node of `space`.
    fn spatial_factors(&self, space: &Lattice) -> Vec<f64> {
        let d = space.layout().d();
        let sq: Vec<Vec<f64>> =
            (0..d).map(|i| space.block_nodes(i).iter().map(|b| b.iter().map(|v| v * v).sum()).collect()).collect();
        let mut idx = vec![0; d];
        (0..space.len())
            .map(|flat| {
                space.split_index(flat, &mut idx);
                let r2: f64 = (0..d).map(|i| sq[i][idx[i]]).sum();
                mollifier(2.0 * r2.sqrt() / self.symbol.support_radius)
            })
            .collect()
    }

    /// `W(ξ)·extra(ξ)` on every node of `freq`, skipping zeros of `W`.
    fn windowed(
        &self,
        window: &Window,
        freq: &Lattice,
        extra: impl Fn(usize, &[f64]) -> Complex64,
    ) -> ArrayD<Complex64> {
        let layout = freq.layout();
        let mut out = ArrayD::zeros(IxDyn(&freq.shape()));
        if window.is_factored() {
            let factors: Vec<Vec<f64>> = (0..layout.d())
                .map(|i| {
                    freq.block_nodes(i)
                        .iter()
                        .map(|p| window.block_factor(i, p).expect("factored window"))
                        .collect()
                })
                .collect();
            let sizes: Vec<usize> = factors.iter().map(|f| f.len()).collect();
            let mut xi = vec![0.0; layout.n()];
            for (flat, v) in out.iter_mut().enumerate() {
                let mut rem = flat;
                let mut w = 1.0;
                for i in (0..sizes.len()).rev() {
                    w *= factors[i][rem % sizes[i]];
                    rem /= sizes[i];
                }
                if w != 0.0 {
                    freq.node_into(flat, &mut xi);
                    *v = extra(flat, &xi) * w;
                }
            }
        } else {
            for (flat, v) in out.iter_mut().enumerate() {
                let xi = freq.node(flat);
                let w = window.eval(layout, &xi);
                if w != 0.0 {
                    *v = extra(flat, &xi) * w;
                }
            }
        }
        out
    }

    /// `E_i[x, ξ] = e^{sign·2πiΦ_i(x, ξ)}` for the kept frequency nodes.
    fn exponentials(&self, i: usize, xs: &[Vec<f64>], xis: &[Vec<f64>], sign: f64) -> Array2<Complex64> {
        let c = &self.phase.components[i];
        Array2::from_shape_fn((xs.len(), xis.len()), |(a, b)| {
            if norm(&xis[b]) == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                cis(sign * c.value(&xs[a], &xis[b]))
            }
        })
    }

    /// Direct sum `out(x) = Σ_ξ e^{2πiΦ(x,ξ)} σ(x,ξ) g(ξ)` (`sign = +1`), where
    /// `g` already carries the window and quadrature weight.
    fn synthesize_direct(&self, g: ArrayD<Complex64>, freq: &Lattice, space: &Lattice) -> Result<ArrayD<Complex64>> {
        let layout = freq.layout();
        match self.symbol.profile() {
            Some(profile) => {
                let mut g = g;
                for (flat, v) in g.iter_mut().enumerate() {
                    if *v != ZERO {
                        *v *= profile.eval_radii(&layout.block_norms(&freq.node(flat)));
                    }
                }
                let g = to_blocks(g, freq);
                let keep = support_indices(&g);
                let xs_all: Vec<Vec<Vec<f64>>> = (0..layout.d()).map(|i| space.block_nodes(i)).collect();
                let need = complex_mb(
                    keep.iter().map(|k| k.len() as f64).product::<f64>()
                        + keep.iter().zip(&xs_all).map(|(k, x)| (k.len() * x.len()) as f64).sum::<f64>()
                        + 2.0 * space.len() as f64
                        + xs_all[0].len() as f64 * keep[1..].iter().map(|k| k.len() as f64).product::<f64>(),
                );
                budget::check(need, self.budget_mb)?;
                let mut pruned = g;
                for (ax, k) in keep.iter().enumerate() {
                    pruned = pruned.select(NdAxis(ax), k);
                }
                let mats: Vec<Array2<Complex64>> = (0..layout.d())
                    .map(|i| {
                        let nodes = freq.block_nodes(i);
                        let xis: Vec<Vec<f64>> = keep[i].iter().map(|&k| nodes[k].clone()).collect();
                        self.exponentials(i, &xs_all[i], &xis, 1.0)
                    })
                    .collect();
                let mut out = from_blocks(contract(pruned, &mats), space);
                for (flat, v) in out.iter_mut().enumerate() {
                    *v *= self.symbol.spatial(&space.node(flat));
                }
                Ok(out)
            }
            None => {
                let nz: Vec<(Vec<f64>, Complex64)> = g
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != ZERO)
                    .map(|(k, v)| (freq.node(k), *v))
                    .collect();
                budget::check(complex_mb((nz.len() + space.len()) as f64), self.budget_mb)?;
                let vals: Vec<Complex64> = (0..space.len())
                    .map(|m| {
                        let x = space.node(m);
                        nz.iter()
                            .map(|(xi, v)| cis(self.phase.eval_unchecked(&x, xi)) * self.symbol.eval(&x, xi) * v)
                            .sum()
                    })
                    .collect();
                Ok(ArrayD::from_shape_vec(IxDyn(&space.shape()), vals).expect("node count"))
            }
        }
    }

    /// `A(ξ) = Σ_x e^{-2πiΦ(x,ξ)} conj σ(x,ξ) g(x)` at nodes where `mask` is set.
    fn analyze_direct(
        &self,
        g: &ArrayD<Complex64>,
        space: &Lattice,
        freq: &Lattice,
        mask: &ArrayD<f64>,
    ) -> Result<ArrayD<Complex64>> {
        let layout = freq.layout();
        match self.symbol.profile() {
            Some(profile) => {
                let mut src = g.clone();
                for (flat, v) in src.iter_mut().enumerate() {
                    *v *= self.symbol.spatial(&space.node(flat));
                }
                let src = to_blocks(src, space);
                let m = to_blocks(mask.mapv(|w| Complex64::new(w, 0.0)), freq);
                let keep = support_indices(&m);
                let xs_all: Vec<Vec<Vec<f64>>> = (0..layout.d()).map(|i| space.block_nodes(i)).collect();
                let need = complex_mb(
                    2.0 * space.len() as f64
                        + keep.iter().zip(&xs_all).map(|(k, x)| (k.len() * x.len()) as f64).sum::<f64>()
                        + 2.0 * freq.len() as f64,
                );
                budget::check(need, self.budget_mb)?;
                let mats: Vec<Array2<Complex64>> = (0..layout.d())
                    .map(|i| {
                        let nodes = freq.block_nodes(i);
                        let xis: Vec<Vec<f64>> = keep[i].iter().map(|&k| nodes[k].clone()).collect();
                        self.exponentials(i, &xs_all[i], &xis, -1.0).reversed_axes()
                    })
                    .collect();
                let small = contract(src, &mats);
                let sizes: Vec<usize> = (0..layout.d()).map(|i| freq.block_len(i)).collect();
                let mut full = ArrayD::<Complex64>::zeros(IxDyn(&sizes));
                for (ix, v) in small.indexed_iter() {
                    let target: Vec<usize> = (0..keep.len()).map(|a| keep[a][ix[a]]).collect();
                    full[IxDyn(&target)] = *v;
                }
                let mut out = from_blocks(full, freq);
                for (flat, v) in out.iter_mut().enumerate() {
                    if *v != ZERO {
                        *v *= profile.eval_radii(&layout.block_norms(&freq.node(flat)));
                    }
                }
                Ok(out)
            }
            None => {
                let xs: Vec<(Vec<f64>, Complex64)> = g
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != ZERO)
                    .map(|(k, v)| (space.node(k), *v))
                    .collect();
                let mut out = ArrayD::zeros(IxDyn(&freq.shape()));
                for (flat, (o, w)) in out.iter_mut().zip(mask.iter()).enumerate() {
                    if *w == 0.0 {
                        continue;
                    }
                    let xi = freq.node(flat);
                    *o = xs
                        .iter()
                        .map(|(x, v)| (cis(self.phase.eval_unchecked(x, &xi)) * self.symbol.eval(x, &xi)).conj() * v)
                        .sum();
                }
                Ok(out)
            }
        }
    }

    /// FFT synthesis `a(x)·Σ_ξ e^{2πi(x·ξ + ψ(ξ))} s(ξ) g(ξ)`.
    fn synthesize_fft(&self, g: ArrayD<Complex64>, freq: &Lattice, space: &Lattice) -> Result<ArrayD<Complex64>> {
        budget::check(complex_mb(3.0 * space.len() as f64), self.budget_mb)?;
        let mut g = g;
        for (v, f) in g.iter_mut().zip(self.fft_factors(freq, 1.0)) {
            if *v != ZERO {
                *v *= f;
            }
        }
        let mut out = fft::synthesize(&g, freq, space)?;
        for (v, a) in out.iter_mut().zip(self.spatial_factors(space)) {
            *v *= a;
        }
        Ok(out)
    }

    fn check_layout(&self, lattice: &Lattice) -> Result<()> {
        if lattice.layout() != &self.phase.layout {
            return Err(Error::GridMismatch("grid layout differs from the operator layout".into()));
        }
        Ok(())
    }

    /// Oracle column `K(x, y) = Σ_ξ e^{2πi(Φ(x,ξ) - y·ξ)} σ(x,ξ) W(ξ) h^n` at
    /// every node of `sgrid`.
    pub fn kernel_direct(&self, window: &Window, y: &[f64], sgrid: &SpaceGrid, fgrid: &FreqGrid) -> Result<KernelField> {
        self.check_layout(sgrid)?;
        self.check_layout(fgrid)?;
        if let Some(j) = window.scale() {
            fgrid.check_resolution(j)?;
        }
        let meta = meta_for(window, EnginePath::Direct, self.phase.layout.d());
        if self.symbol.is_zero() {
            return Ok(KernelField { y: y.to_vec(), field: FunctionField::zeros(sgrid.clone()), meta });
        }
        let hn = fgrid.cell_volume();
        let g = self.windowed(window, fgrid, |_, xi| {
            let dot: f64 = xi.iter().zip(y).map(|(a, b)| a * b).sum();
            cis(-dot) * hn
        });
        let values = self.synthesize_direct(g, fgrid, sgrid)?;
        Ok(KernelField { y: y.to_vec(), field: FunctionField::new(sgrid.clone(), values)?, meta })
    }

    /// FFT column for `Φ = x·ξ + ψ(ξ)` and a separated symbol:
    /// `K(x, y) = a(x) K₀(x - y)`. The space grid has `pad` times as many
    /// nodes per axis as `fgrid`, spans one period `1/h`, and starts at
    /// `origin`.
    pub fn kernel_convolutional(
        &self,
        window: &Window,
        y: &[f64],
        fgrid: &FreqGrid,
        origin: &[f64],
        pad: usize,
    ) -> Result<KernelField> {
        self.check_layout(fgrid)?;
        if !self.phase.is_translation_invariant() {
            return Err(Error::Unsupported(format!(
                "phase {} is not translation invariant; use the direct path",
                self.phase.name()
            )));
        }
        if self.symbol.profile().is_none() {
            return Err(Error::Unsupported("the FFT path needs a separated symbol".into()));
        }
        if let Some(j) = window.scale() {
            fgrid.check_resolution(j)?;
        }
        let axes: Vec<Axis> = fgrid
            .axes()
            .iter()
            .zip(origin)
            .map(|(a, &o)| a.dual(a.len * pad.max(1), o))
            .collect();
        let sgrid = SpaceGrid(Lattice::new(self.phase.layout.clone(), axes)?);
        let meta = meta_for(window, EnginePath::Convolutional, self.phase.layout.d());
        let hn = fgrid.cell_volume();
        let mut g = self.windowed(window, fgrid, |_, _| Complex64::new(hn, 0.0));
        // K₀(x - y): shift by modulation
        for (flat, v) in g.iter_mut().enumerate() {
            if *v != ZERO {
                let xi = fgrid.node(flat);
                let dot: f64 = xi.iter().zip(y).map(|(a, b)| a * b).sum();
                *v *= cis(-dot);
            }
        }
        let values = self.synthesize_fft(g, fgrid, &sgrid)?;
        Ok(KernelField { y: y.to_vec(), field: FunctionField::new(sgrid, values)?, meta })
    }

    /// `Σ_ξ e^{2πiΦ(x,ξ)} σ(x,ξ) W(ξ) f̂(ξ) h^n` on the grid of `f`.
    pub fn apply(&self, window: &Window, f: &FunctionField) -> Result<FunctionField> {
        self.check_layout(&f.grid)?;
        if self.symbol.is_zero() {
            return Ok(FunctionField::zeros(f.grid.clone()));
        }
        let (freq, hat) = f.spectrum();
        let hn = freq.cell_volume();
        let g = self.windowed(window, &freq, |flat, _| hat.as_slice().expect("standard layout")[flat] * hn);
        let values = if self.path == PathChoice::Auto && self.fft_eligible() {
            self.synthesize_fft(g, &freq, &f.grid)?
        } else {
            self.synthesize_direct(g, &freq, &f.grid)?
        };
        FunctionField::new(f.grid.clone(), values)
    }

    /// `T_{jℓ} f` or `T^ν_{jℓ} f`.
    pub fn apply_piece(&self, spec: &WindowSpec, f: &FunctionField) -> Result<FunctionField> {
        self.apply(&self.piece_window(spec)?, f)
    }

    /// Adjoint of [`Engine::apply`]:
    /// `Σ_ξ e^{2πiy·ξ} W(ξ) Σ_x e^{-2πiΦ(x,ξ)} conj σ(x,ξ) g(x) δ^n h^n`.
    pub fn apply_adjoint_window(&self, window: &Window, g: &FunctionField) -> Result<FunctionField> {
        self.check_layout(&g.grid)?;
        if self.symbol.is_zero() {
            return Ok(FunctionField::zeros(g.grid.clone()));
        }
        let freq = g.grid.dual_centered();
        let mask = self.windowed(window, &freq, |_, _| Complex64::new(1.0, 0.0)).mapv(|v| v.re);
        let cell = g.grid.cell_volume();
        let hn = freq.cell_volume();
        let a = if self.path == PathChoice::Auto && self.fft_eligible() {
            let mut src = g.values.clone();
            for (v, s) in src.iter_mut().zip(self.spatial_factors(&g.grid)) {
                *v *= s;
            }
            let mut a = fft::analyze(&src, &g.grid, &freq)?;
            for (v, f) in a.iter_mut().zip(self.fft_factors(&freq, -1.0)) {
                *v *= f;
            }
            a
        } else {
            self.analyze_direct(&g.values, &g.grid, &freq, &mask)?
        };
        let weighted = ndarray::Zip::from(&a).and(&mask).map_collect(|v, w| v * (w * cell * hn));
        let values = fft::synthesize(&weighted, &freq, &g.grid)?;
        FunctionField::new(g.grid.clone(), values)
    }

    /// Truncated operator `Σ_{j <= j_max} Σ_ℓ T_{jℓ} f` and the fraction of
    /// `‖f̂‖²` where the truncation is not the identity.
    pub fn apply_operator(&self, f: &FunctionField, j_max: u32) -> Result<(FunctionField, f64)> {
        let out = self.apply(&Window::Truncated { j_max }, f)?;
        Ok((out, truncated_energy(f, j_max)))
    }

    /// Truncated adjoint, with the same truncation diagnostic.
    pub fn apply_adjoint(&self, g: &FunctionField, j_max: u32) -> Result<(FunctionField, f64)> {
        let out = self.apply_adjoint_window(&Window::Truncated { j_max }, g)?;
        Ok((out, truncated_energy(g, j_max)))
    }
}

/// Share of `‖f̂‖²` outside `{|ξ_i| <= 2^{j_max} for all i}`.
pub fn truncated_energy(f: &FunctionField, j_max: u32) -> f64 {
    let (freq, hat) = f.spectrum();
    let layout = freq.layout();
    let lim = (j_max as f64).exp2();
    let mut total = 0.0;
    let mut outside = 0.0;
    for (flat, v) in hat.iter().enumerate() {
        let e = v.norm_sqr();
        total += e;
        if layout.block_norms(&freq.node(flat)).iter().any(|&r| r > lim) {
            outside += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        outside / total
    }
}

/// `P_j f` with `(P_j f)^ = φ_j(|ξ|) f̂`.
pub fn littlewood_paley_project(j: u32, f: &FunctionField) -> FunctionField {
    let (freq, mut hat) = f.spectrum();
    for (flat, v) in hat.iter_mut().enumerate() {
        *v *= ring(j, norm(&freq.node(flat))) * freq.cell_volume();
    }
    let values = fft::synthesize(&hat, &freq, &f.grid).expect("dual lattice by construction");
    FunctionField { grid: f.grid.clone(), values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{ConeIndex, SubspaceLayout};
    use crate::symbol::FreqProfile;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn l22() -> SubspaceLayout {
        SubspaceLayout::new(vec![2, 2]).unwrap()
    }

    fn random_field(grid: &SpaceGrid, seed: u64) -> FunctionField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vals: Vec<Complex64> =
            (0..grid.len()).map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        FunctionField::new(grid.clone(), ArrayD::from_shape_vec(IxDyn(&grid.shape()), vals).unwrap()).unwrap()
    }

    fn bump(grid: &SpaceGrid) -> FunctionField {
        FunctionField::from_fn(grid.clone(), |x| {
            Complex64::new((-8.0 * x.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0)
        })
    }

    #[test]
    fn identity_operator_is_identity() {
        let grid = SpaceGrid::cube(l22(), 4.0, 16);
        let e = Engine::new(Phase::identity(l22()), Symbol::separated(l22(), FreqProfile::One, 100.0)).unwrap();
        let f = bump(&grid);
        let (tf, trunc) = e.apply_operator(&f, 6).unwrap();
        assert_eq!(trunc, 0.0);
        let (_, l2) = tf.relative_error(&f).unwrap();
        assert!(l2 < 1e-12, "{l2}");
    }

    #[test]
    fn fft_and_oracle_paths_agree() {
        let grid = SpaceGrid::cube(l22(), 4.0, 12);
        let sym = Symbol::bessel(l22(), -1.0, 3.0);
        let e = Engine::new(Phase::wave(l22()), sym).unwrap();
        let f = bump(&grid);
        let a = e.apply(&Window::Truncated { j_max: 2 }, &f).unwrap();
        let b = e.clone().with_path(PathChoice::Oracle).apply(&Window::Truncated { j_max: 2 }, &f).unwrap();
        let (linf, _) = b.relative_error(&a).unwrap();
        assert!(linf < 1e-10, "{linf}");
    }

    #[test]
    fn adjoint_duality_on_random_pairs() {
        let grid = SpaceGrid::cube(l22(), 2.0, 8);
        let sym = Symbol::bessel(l22(), -0.5, 1.5);
        for phase in [Phase::wave(l22()), Phase::perturbed(l22(), 0.3)] {
            let e = Engine::new(phase, sym.clone()).unwrap();
            let w = Window::Truncated { j_max: 2 };
            for seed in 0..3 {
                let f = random_field(&grid, seed);
                let g = random_field(&grid, seed + 100);
                let lhs = e.apply(&w, &f).unwrap().inner(&g).unwrap();
                let rhs = f.inner(&e.apply_adjoint_window(&w, &g).unwrap()).unwrap();
                assert!((lhs - rhs).norm() <= 1e-10 * f.l2() * g.l2(), "{lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn operator_is_sum_of_pieces() {
        let grid = SpaceGrid::cube(l22(), 2.0, 8);
        let e = Engine::new(Phase::wave(l22()), Symbol::bessel(l22(), 0.0, 1.5)).unwrap();
        let f = random_field(&grid, 7);
        let (whole, _) = e.apply_operator(&f, 1).unwrap();
        let mut acc = FunctionField::zeros(grid.clone());
        for spec in crate::partition::enumerate_pieces(2, 1) {
            acc.values = acc.values + e.apply_piece(&spec, &f).unwrap().values;
        }
        let (linf, _) = acc.relative_error(&whole).unwrap();
        assert!(linf < 1e-12);
    }

    #[test]
    fn littlewood_paley_sums_to_identity() {
        let grid = SpaceGrid::cube(l22(), 2.0, 8);
        let f = random_field(&grid, 3);
        let mut acc = FunctionField::zeros(grid.clone());
        for j in 0..=5 {
            let p = littlewood_paley_project(j, &f);
            assert!(p.l2() <= f.l2() * (1.0 + 1e-12));
            acc.values = acc.values + p.values;
        }
        let (_, l2) = acc.relative_error(&f).unwrap();
        assert!(l2 < 1e-10);
    }

    #[test]
    fn disjoint_band_is_annihilated() {
        let grid = SpaceGrid::cube(l22(), 2.0, 16);
        let f = littlewood_paley_project(0, &random_field(&grid, 9));
        let e = Engine::new(Phase::wave(l22()), Symbol::bessel(l22(), 0.0, 1.0)).unwrap();
        let spec = WindowSpec::new(3, ConeIndex::zero(2), None).unwrap();
        let out = e.apply_piece(&spec, &f).unwrap();
        assert!(out.l2() <= 1e-12 * f.l2());
    }

    #[test]
    fn zero_symbol_gives_zero_kernel() {
        let e = Engine::new(Phase::wave(l22()), Symbol::zero(l22())).unwrap();
        let spec = WindowSpec::new(2, ConeIndex::zero(2), None).unwrap();
        let fgrid = FreqGrid::symmetric(l22(), &[8.0, 8.0], &[0.5, 0.5]).unwrap();
        let sgrid = SpaceGrid::cube(l22(), 1.0, 4);
        let k = e.kernel_direct(&e.piece_window(&spec).unwrap(), &[0.0; 4], &sgrid, &fgrid).unwrap();
        assert_eq!(k.mass(), 0.0);
    }

    #[test]
    fn direct_kernel_at_source_equals_window_mass() {
        let e = Engine::new(Phase::identity(l22()), Symbol::separated(l22(), FreqProfile::One, 100.0)).unwrap();
        let spec = WindowSpec::new(2, ConeIndex::zero(2), None).unwrap();
        let w = e.piece_window(&spec).unwrap();
        let fgrid = FreqGrid::symmetric(l22(), &[8.0, 8.0], &[0.5, 0.5]).unwrap();
        let y = [0.1, -0.2, 0.3, 0.0];
        let sgrid = SpaceGrid(Lattice::new(l22(), y.iter().map(|&v| Axis::new(v, 1.0, 1).unwrap()).collect()).unwrap());
        let k = e.kernel_direct(&w, &y, &sgrid, &fgrid).unwrap();
        let oracle: f64 = (0..fgrid.len()).map(|k| w.eval(&l22(), &fgrid.node(k))).sum::<f64>() * fgrid.cell_volume();
        let v = k.field.values.iter().next().unwrap();
        assert!((v.re - oracle).abs() < 1e-10 * oracle && v.im.abs() < 1e-10 * oracle);
    }

    #[test]
    fn convolutional_refuses_variable_phase() {
        let e = Engine::new(Phase::perturbed(l22(), 0.2), Symbol::bessel(l22(), 0.0, 1.0)).unwrap();
        let fgrid = FreqGrid::symmetric(l22(), &[8.0, 8.0], &[0.5, 0.5]).unwrap();
        let r = e.kernel_convolutional(&Window::Ring { j: 2 }, &[0.0; 4], &fgrid, &[0.0; 4], 1);
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }

    #[test]
    fn convolutional_matches_direct_on_small_case() {
        let e = Engine::new(Phase::wave(l22()), Symbol::bessel(l22(), -1.0, 8.0)).unwrap();
        let spec = WindowSpec::new(2, ConeIndex::zero(2), Some(vec![0, 0])).unwrap();
        let w = e.piece_window(&spec).unwrap();
        let fgrid = FreqGrid::symmetric(l22(), &[8.0, 8.0], &[0.5, 0.5]).unwrap();
        let y = [0.0; 4];
        let conv = e.kernel_convolutional(&w, &y, &fgrid, &[-2.0, -1.0, -2.0, -1.0], 1).unwrap();
        let coarse: Vec<Axis> = conv.field.grid.axes().iter().map(|a| Axis::new(a.origin, a.step * 4.0, a.len / 4).unwrap()).collect();
        let sgrid = SpaceGrid(Lattice::new(l22(), coarse).unwrap());
        let direct = e.kernel_direct(&w, &y, &sgrid, &fgrid).unwrap();
        let (linf, _) = direct.field.relative_error(&conv.field.restrict_to(&sgrid).unwrap()).unwrap();
        assert!(linf < 1e-10, "{linf}");
    }
}
