//! Images of Hardy atoms under cone pieces and their adjoints.
//!
//! Atoms are bi-radial about the origin on layout (2, 2), so `T_ℓ a` and
//! `T*_ℓ a` are bi-radial too and come from the polar synthesis with the
//! multiplier `â·s`.

use super::polar::{atom_image, bessel};
use super::problem::Problem;
use super::report::{Check, EstimateReport};
use crate::engine::radial::{radial_rule, BiRadial};
use crate::error::{Error, Result};
use crate::geometry::{AtomProfile, BiRadialAtom, InfluenceRegion, Membership, RegionKind};
use crate::quad::Rule;
use serde::{Deserialize, Serialize};

/// `j_max = round(log2(headroom / r))`: frequencies past `headroom/r` carry
/// a negligible share of `â`.
fn scale_cap(headroom: f64, r: f64) -> u32 {
    (headroom / r).log2().round().max(0.0) as u32
}

fn rho_rules(step: f64, rho_max: f64) -> [Rule; 2] {
    let r = radial_rule(2, step, rho_max);
    [r.clone(), r]
}

/// `1/p = 1/2 + (n - d)/2n`.
fn lp_exponent(problem: &Problem) -> f64 {
    let n = problem.layout.n() as f64;
    1.0 / (0.5 + problem.codim() / (2.0 * n))
}

fn atom_lp(atom: &BiRadialAtom, p: f64) -> f64 {
    let w = &atom.rule.weights;
    let s: f64 = atom.values.indexed_iter().map(|((a, b), v)| v.abs().powf(p) * w[a] * w[b]).sum();
    s.powf(1.0 / p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AtomBoundParams {
    /// Radii of the uniformity sweep at `ℓ = 0`.
    pub radii: Vec<f64>,
    /// `ℓ_1` values of the decay sweep, with `ℓ_2 = 0`.
    pub ell1: Vec<u32>,
    /// Atom radius used in the `ℓ` sweep.
    pub ell_radius: f64,
    pub m: f64,
    pub profile: AtomProfile,
    /// Gauss nodes per atom panel.
    pub order: usize,
    pub dr: f64,
    /// `ρ` nodes per atom radius.
    pub rho_per_radius: f64,
    pub headroom: f64,
    /// Allowed max/min of `∫|T a|` across radii.
    pub uniformity: f64,
    /// Smallest accepted decay rate in `ℓ_1`.
    pub min_decay: f64,
}

impl Default for AtomBoundParams {
    fn default() -> Self {
        Self {
            radii: vec![0.5, 0.25, 0.125, 0.0625],
            ell1: (0..=3).collect(),
            ell_radius: 0.0625,
            m: -1.0,
            profile: AtomProfile::Bump,
            order: 24,
            dr: 0.125,
            rho_per_radius: 16.0,
            headroom: 16.0,
            uniformity: 3.0,
            min_decay: 0.1,
        }
    }
}

struct AtomRow {
    j_max: u32,
    l1: f64,
    l2: f64,
    lp: f64,
}

fn forward_image(problem: &Problem, p: &AtomBoundParams, r: f64, ell: [u32; 2]) -> Result<AtomRow> {
    let atom = BiRadialAtom::new(r, p.profile, p.order)?;
    let j_max = scale_cap(p.headroom, r).max(ell[0].max(ell[1]));
    let rho = rho_rules(r / p.rho_per_radius, problem.support_radius);
    let k = atom_image(&problem.layout, &atom, ell, j_max, problem.speeds()?, 1.0, p.dr, bessel(p.m), rho)?;
    let l1 = k.mass(|a, b| problem.spatial(a, b));
    let l2 = k.weighted_power_sum(2.0, |a, b| problem.spatial(a, b).powi(2)).sqrt();
    Ok(AtomRow { j_max, l1, l2, lp: atom_lp(&atom, lp_exponent(problem)) })
}

/// `∫|a(x) T_ℓ a(x)| dx` over atom radii at `ℓ = 0`, and over `ℓ_1` at a
/// fixed radius, with `‖T_ℓ a‖₂/‖a‖_p` alongside (`1/p = 1/2 + (n-d)/2n`).
pub fn atom_image_l1(problem: &Problem, p: &AtomBoundParams) -> Result<Vec<EstimateReport>> {
    if p.radii.len() < 2 {
        return Err(Error::Domain("the radius sweep needs at least two radii".into()));
    }
    let params = serde_json::json!({ "problem": problem.echo(), "params": p, "lp_exponent": lp_exponent(problem) });
    let mut uni = EstimateReport::new("atom-uniformity", &params, 0, &["r", "j_max", "l1", "l2", "lp_atom", "l2_ratio"]);
    for &r in &p.radii {
        let row = forward_image(problem, p, r, [0, 0])?;
        uni.push(vec![r, row.j_max as f64, row.l1, row.l2, row.lp, row.l2 / row.lp]);
    }
    let l1 = uni.column("l1").expect("column");
    let hi = l1.iter().fold(0.0f64, |m, v| m.max(*v));
    let lo = l1.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    uni.check(Check::at_most("max/min of the atom image mass across radii", hi / lo, p.uniformity));

    let mut dec = EstimateReport::new(
        "atom-ell-decay",
        &params,
        0,
        &["ell1", "r", "j_max", "l1", "l2_ratio", "l2_target"],
    );
    let dims = problem.layout.dims();
    let n = problem.layout.n() as f64;
    for &l in &p.ell1 {
        let row = forward_image(problem, p, p.ell_radius, [l, 0])?;
        let target = (-(l as f64) * dims[0] as f64 * problem.codim() / (2.0 * n)).exp2();
        dec.push(vec![l as f64, p.ell_radius, row.j_max as f64, row.l1, row.l2 / row.lp, target]);
    }
    let fit = dec.fit_only("ell1", "l1")?;
    dec.check(Check::decay_rate("decay rate of the atom image mass in ℓ_1", &fit, p.min_decay));
    let scaled: Vec<f64> = dec.rows.iter().map(|r| r[4] / r[5]).collect();
    let top = scaled.iter().fold(0.0f64, |m, v| m.max(*v));
    dec.check(Check::at_most("max L^p to L² ratio over its target, relative to the first ℓ", top / scaled[0], p.uniformity));
    Ok(vec![uni, dec])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdjointTailParams {
    pub ell1: Vec<u32>,
    pub radius: f64,
    pub m: f64,
    pub profile: AtomProfile,
    /// Subspaces where the sector is far: `|x_i| > c·2^{εℓ_i}`.
    pub w: Vec<bool>,
    pub epsilon: f64,
    pub c: f64,
    pub order: usize,
    pub dr: f64,
    pub rho_per_radius: f64,
    pub rho_max: f64,
    pub headroom: f64,
    pub min_decay: f64,
    /// Relative tolerance of the sum of sector masses against the total.
    pub sum_tolerance: f64,
}

impl Default for AdjointTailParams {
    fn default() -> Self {
        Self {
            ell1: (0..=3).collect(),
            radius: 0.125,
            m: -1.0,
            profile: AtomProfile::Bump,
            w: vec![true, false],
            epsilon: 0.2,
            c: 1.0,
            order: 24,
            dr: 0.125,
            rho_per_radius: 16.0,
            rho_max: 4.0,
            headroom: 16.0,
            min_decay: 0.05,
            sum_tolerance: 1e-6,
        }
    }
}

fn sector_name(w: &[bool]) -> String {
    let on: Vec<String> = w.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| (i + 1).to_string()).collect();
    if on.is_empty() {
        "sector_none".into()
    } else {
        format!("sector_{}", on.join(""))
    }
}

/// `∫|K|` restricted to each sector `Q_W`, in the order of `sectors`.
fn sector_masses(k: &BiRadial, regions: &[InfluenceRegion]) -> Vec<f64> {
    let mut out = vec![0.0; regions.len()];
    for (a, (&r1, &w1)) in k.rho[0].nodes.iter().zip(&k.rho[0].weights).enumerate() {
        for (b, (&r2, &w2)) in k.rho[1].nodes.iter().zip(&k.rho[1].weights).enumerate() {
            let v = k.values[[a, b]].norm() * w1 * w2;
            let x = [r1, 0.0, r2, 0.0];
            if let Some(s) = regions.iter().position(|q| q.contains(&x) == Membership::Inside) {
                out[s] += v;
            }
        }
    }
    out
}

/// `∫_{Q_W}|T*_ℓ a|` over `ℓ_1` for every sector `W`, fitting the decay of
/// the configured sector.
pub fn adjoint_tail(problem: &Problem, p: &AdjointTailParams) -> Result<EstimateReport> {
    let d = problem.layout.d();
    if p.w.len() != d {
        return Err(Error::Layout(format!("W needs {d} entries")));
    }
    let sectors: Vec<Vec<bool>> = (0..1usize << d).map(|bits| (0..d).map(|i| bits >> i & 1 == 1).collect()).collect();
    let names: Vec<String> = sectors.iter().map(|w| sector_name(w)).collect();
    let mut columns = vec!["ell1", "total"];
    columns.extend(names.iter().map(String::as_str));
    let mut rep = EstimateReport::new(
        "adjoint-tail",
        serde_json::json!({ "problem": problem.echo(), "params": p }),
        0,
        &columns,
    );
    let atom = BiRadialAtom::new(p.radius, p.profile, p.order)?;
    let j_cap = scale_cap(p.headroom, p.radius);
    let speeds = problem.speeds()?;
    for &l in &p.ell1 {
        let ell = vec![l, 0];
        let regions = sectors
            .iter()
            .map(|w| {
                let kind = RegionKind::QW { w: w.clone(), ell: ell.clone(), epsilon: p.epsilon, c: p.c };
                InfluenceRegion::new(problem.phase.clone(), vec![0.0; problem.layout.n()], problem.c_r, j_cap, kind)
            })
            .collect::<Result<Vec<_>>>()?;
        let rho = rho_rules(p.radius / p.rho_per_radius, p.rho_max);
        let k = atom_image(&problem.layout, &atom, [l, 0], j_cap.max(l), speeds, -1.0, p.dr, bessel(p.m), rho)?;
        let mut row = vec![l as f64, k.mass(|_, _| 1.0)];
        row.extend(sector_masses(&k, &regions));
        rep.push(row);
    }
    if let Some(first) = rep.rows.iter().find(|r| r[0] == 0.0) {
        let sum: f64 = first[2..].iter().sum();
        rep.check(Check::at_most("sector sum against total at ℓ = 0", (sum - first[1]).abs() / first[1], p.sum_tolerance));
    }
    let target = sector_name(&p.w);
    let fit = rep.fit_only("ell1", &target)?;
    rep.check(Check::decay_rate(&format!("decay rate of {target} in ℓ_1"), &fit, p.min_decay));
    let tail = rep.column(&target).expect("column");
    rep.check(Check::holds(&format!("{target} strictly decreasing in ℓ_1"), tail.windows(2).all(|w| w[1] < w[0])));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents_for_the_reference_layout() {
        let problem = Problem::default();
        assert!((lp_exponent(&problem) - 4.0 / 3.0).abs() < 1e-14);
        assert_eq!(scale_cap(16.0, 0.25), 6);
        assert_eq!(scale_cap(16.0, 0.0625), 8);
    }

    #[test]
    fn sector_names() {
        assert_eq!(sector_name(&[false, false]), "sector_none");
        assert_eq!(sector_name(&[true, false]), "sector_1");
        assert_eq!(sector_name(&[true, true]), "sector_12");
    }

    #[test]
    fn atom_lp_matches_sup_bound() {
        // ‖a‖_p <= ‖a‖_∞ |B_r|^{1/p} = |B_r|^{1/p - 1}
        let atom = BiRadialAtom::new(0.5, AtomProfile::Bump, 16).unwrap();
        let p = 4.0 / 3.0;
        let bound = crate::geometry::ball_volume(4, 0.5).powf(1.0 / p - 1.0);
        let v = atom_lp(&atom, p);
        assert!(v > 0.0 && v <= bound * (1.0 + 1e-12), "{v} vs {bound}");
    }

    #[test]
    fn coarse_adjoint_sectors_add_up() {
        let p = AdjointTailParams {
            ell1: vec![0, 1, 2, 3],
            radius: 0.5,
            order: 12,
            dr: 0.25,
            rho_per_radius: 6.0,
            rho_max: 3.0,
            headroom: 8.0,
            ..Default::default()
        };
        let rep = adjoint_tail(&Problem::default(), &p).unwrap();
        let row = &rep.rows[0];
        let sum: f64 = row[2..].iter().sum();
        assert!((sum - row[1]).abs() <= 1e-12 * row[1]);
        assert!(rep.checks[0].pass);
    }
}
