use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Dimension vector of the product space `ℝ^{n_1} × … × ℝ^{n_d}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct SubspaceLayout {
    dims: Vec<usize>,
}

impl SubspaceLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Layout("at least one subspace is required (d >= 1)".into()));
        }
        if let Some((i, n)) = dims.iter().enumerate().find(|(_, &n)| n < 2) {
            return Err(Error::Layout(format!(
                "subspace {} has dimension {n}; every subspace needs n_i >= 2",
                i + 1
            )));
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn d(&self) -> usize {
        self.dims.len()
    }

    pub fn n(&self) -> usize {
        self.dims.iter().sum()
    }

    /// Start index of every subspace inside a full `ℝ^n` vector.
    pub fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.d());
        let mut acc = 0;
        for &n in &self.dims {
            off.push(acc);
            acc += n;
        }
        off
    }

    /// Splits a point of `ℝ^n` into its subspace blocks.
    pub fn split<'a>(&self, v: &'a [f64]) -> Vec<&'a [f64]> {
        debug_assert_eq!(v.len(), self.n());
        let mut out = Vec::with_capacity(self.d());
        let mut rest = v;
        for &n in &self.dims {
            let (head, tail) = rest.split_at(n);
            out.push(head);
            rest = tail;
        }
        out
    }

    /// Euclidean norm of every block.
    pub fn block_norms(&self, v: &[f64]) -> Vec<f64> {
        self.split(v).iter().map(|b| norm(b)).collect()
    }
}

impl TryFrom<Vec<usize>> for SubspaceLayout {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        SubspaceLayout::new(v)
    }
}

impl From<SubspaceLayout> for Vec<usize> {
    fn from(l: SubspaceLayout) -> Self {
        l.dims
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Relative scale offsets `ℓ` of a cone piece. At least one entry is zero;
/// the lowest such index is the sector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConeIndex {
    ell: Vec<u32>,
    sector: usize,
    ell_max: u32,
}

impl ConeIndex {
    pub fn new(ell: Vec<u32>) -> Result<Self> {
        let sector = ell
            .iter()
            .position(|&l| l == 0)
            .ok_or_else(|| Error::Index(format!("cone index {ell:?} has no zero entry")))?;
        let ell_max = *ell.iter().max().unwrap();
        Ok(Self { ell, sector, ell_max })
    }

    pub fn zero(d: usize) -> Self {
        Self { ell: vec![0; d], sector: 0, ell_max: 0 }
    }

    pub fn ell(&self) -> &[u32] {
        &self.ell
    }

    /// Zero-based index of the sector coordinate.
    pub fn sector(&self) -> usize {
        self.sector
    }

    pub fn ell_max(&self) -> u32 {
        self.ell_max
    }

    pub fn d(&self) -> usize {
        self.ell.len()
    }
}

/// A frequency piece `(j, ℓ, ν)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub j: u32,
    pub cone: ConeIndex,
    pub nu: Option<Vec<usize>>,
}

impl WindowSpec {
    pub fn new(j: u32, cone: ConeIndex, nu: Option<Vec<usize>>) -> Result<Self> {
        if j < cone.ell_max() {
            return Err(Error::Index(format!(
                "j = {j} is below ell_max = {}",
                cone.ell_max()
            )));
        }
        if let Some(nu) = &nu {
            if nu.len() != cone.d() {
                return Err(Error::Index(format!(
                    "angular index has {} entries, expected {}",
                    nu.len(),
                    cone.d()
                )));
            }
        }
        Ok(Self { j, cone, nu })
    }

    /// Per-subspace scales `j_i = j - ℓ_i`.
    pub fn scales(&self) -> Vec<u32> {
        self.cone.ell().iter().map(|&l| self.j - l).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_rejects_one_dimensional_blocks() {
        assert!(SubspaceLayout::new(vec![2, 1]).is_err());
        assert!(SubspaceLayout::new(vec![]).is_err());
        let l = SubspaceLayout::new(vec![2, 3]).unwrap();
        assert_eq!((l.n(), l.d()), (5, 2));
        assert_eq!(l.offsets(), vec![0, 2]);
    }

    #[test]
    fn cone_index_sector_is_lowest_zero() {
        let c = ConeIndex::new(vec![2, 0, 0]).unwrap();
        assert_eq!(c.sector(), 1);
        assert_eq!(c.ell_max(), 2);
        assert!(ConeIndex::new(vec![1, 1]).is_err());
    }

    #[test]
    fn window_spec_requires_j_at_least_ell_max() {
        let c = ConeIndex::new(vec![3, 0]).unwrap();
        assert!(WindowSpec::new(2, c.clone(), None).is_err());
        assert_eq!(WindowSpec::new(5, c, None).unwrap().scales(), vec![2, 5]);
    }
}
