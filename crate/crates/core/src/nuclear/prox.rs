use nalgebra::DMatrix;

use crate::psd_cone::{project_nsd_dense, project_psd_dense};
use crate::spectral::{
    eig_sym, group_distinct, submatrix, BlockChoice, DistinctBlocks, EigenDecomposition, SpectralOperator, SymMatrix,
    DEFAULT_REL_TOL,
};
use crate::{Error, Result};

/// Scaling of the quadratic term in the proximal problem.
///
/// `Standard` uses `||X - Z||^2 / (2 tau)`; `Literal` uses `||X - Z||^2 / tau`,
/// which is the standard form with parameter `tau / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MoreauConvention {
    #[default]
    Standard,
    Literal,
}

impl MoreauConvention {
    fn effective(self, tau: f64) -> f64 {
        match self {
            MoreauConvention::Standard => tau,
            MoreauConvention::Literal => 0.5 * tau,
        }
    }
}

/// Scalar soft-thresholding `p_tau(t) = [t - tau]_+ - [-t - tau]_+`.
pub fn soft_threshold(t: f64, tau: f64) -> f64 {
    (t - tau).max(0.0) - (-t - tau).max(0.0)
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::invalid("proximal parameter must be positive and finite"));
    }
    Ok(())
}

pub fn prox_nuclear(z: &SymMatrix, tau: f64) -> Result<SymMatrix> {
    prox_nuclear_with(z, tau, MoreauConvention::Standard)
}

pub fn prox_nuclear_with(z: &SymMatrix, tau: f64, conv: MoreauConvention) -> Result<SymMatrix> {
    check_tau(tau)?;
    let t = conv.effective(tau);
    Ok(eig_sym(z)?.map(|l| soft_threshold(l, t)))
}

pub fn moreau_env(z: &SymMatrix, tau: f64) -> Result<f64> {
    moreau_env_with(z, tau, MoreauConvention::Standard)
}

/// Moreau envelope value. Both conventions agree with `moreau_env(z, tau_eff)`
/// where `tau_eff` is `tau` or `tau / 2`.
pub fn moreau_env_with(z: &SymMatrix, tau: f64, conv: MoreauConvention) -> Result<f64> {
    check_tau(tau)?;
    let t = conv.effective(tau);
    let e = eig_sym(z)?;
    Ok(e
        .values
        .iter()
        .map(|&l| {
            let p = soft_threshold(l, t);
            p.abs() + (p - l) * (p - l) / (2.0 * t)
        })
        .sum())
}

pub fn grad_moreau_env(z: &SymMatrix, tau: f64) -> Result<SymMatrix> {
    grad_moreau_env_with(z, tau, MoreauConvention::Standard)
}

pub fn grad_moreau_env_with(z: &SymMatrix, tau: f64, conv: MoreauConvention) -> Result<SymMatrix> {
    check_tau(tau)?;
    let t = conv.effective(tau);
    Ok(eig_sym(z)?.map(|l| (l - soft_threshold(l, t)) / t))
}

/// Which multiplier to use on eigenvalue groups of `Z` sitting exactly at
/// the kinks `+tau` and `-tau` of the soft-thresholding function.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KinkChoices {
    pub upper: BlockChoice,
    pub lower: BlockChoice,
}

impl KinkChoices {
    pub fn identity() -> Self {
        Self { upper: BlockChoice::Identity, lower: BlockChoice::Identity }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum GroupKind {
    Smooth(bool),
    KinkUpper,
    KinkLower,
}

/// First divided differences of `p_tau` on the spectrum of `Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct DividedDifference {
    pub eig: EigenDecomposition,
    pub blocks: DistinctBlocks,
    /// Off-group entries hold `(p(l_i) - p(l_j)) / (l_i - l_j)`; same-group
    /// entries hold `p'` for smooth groups and 0 at kinks.
    pub table: DMatrix<f64>,
    pub tau: f64,
    kinds: alloc::vec::Vec<GroupKind>,
}

impl DividedDifference {
    pub fn upper_kink(&self) -> Option<&[usize]> {
        self.kinds.iter().position(|k| *k == GroupKind::KinkUpper).map(|g| self.blocks.blocks[g].as_slice())
    }

    pub fn lower_kink(&self) -> Option<&[usize]> {
        self.kinds.iter().position(|k| *k == GroupKind::KinkLower).map(|g| self.blocks.blocks[g].as_slice())
    }
}

pub fn prox_divided_diff(z: &SymMatrix, tau: f64) -> Result<DividedDifference> {
    check_tau(tau)?;
    let eig = eig_sym(z)?;
    let blocks = group_distinct(&eig, DEFAULT_REL_TOL);
    let ktol = eig.kink_tol();
    let kinds: alloc::vec::Vec<GroupKind> = blocks
        .values
        .iter()
        .map(|&v| {
            if (v - tau).abs() <= ktol {
                GroupKind::KinkUpper
            } else if (v + tau).abs() <= ktol {
                GroupKind::KinkLower
            } else {
                GroupKind::Smooth(v.abs() > tau)
            }
        })
        .collect();
    let n = eig.dim();
    let mut group_of = alloc::vec![0usize; n];
    for (g, blk) in blocks.blocks.iter().enumerate() {
        for &i in blk {
            group_of[i] = g;
        }
    }
    let lam = &eig.values;
    let table = DMatrix::from_fn(n, n, |i, j| {
        let (gi, gj) = (group_of[i], group_of[j]);
        if gi == gj {
            match kinds[gi] {
                GroupKind::Smooth(true) => 1.0,
                _ => 0.0,
            }
        } else {
            (soft_threshold(lam[i], tau) - soft_threshold(lam[j], tau)) / (lam[i] - lam[j])
        }
    });
    Ok(DividedDifference { eig, blocks, table, tau, kinds })
}

/// Element of the B-subdifferential of the proximal mapping, as a spectral operator.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxJacobianElement {
    pub op: SpectralOperator,
    pub tau: f64,
}

impl ProxJacobianElement {
    pub fn apply(&self, h: &SymMatrix) -> SymMatrix {
        self.op.apply(h)
    }

    /// The matching element of the generalised Hessian of the envelope, `(I - V) / tau`.
    pub fn envelope_element(&self) -> SpectralOperator {
        SpectralOperator {
            basis: self.op.basis.clone(),
            multipliers: self.op.multipliers.map(|v| (1.0 - v) / self.tau),
        }
    }
}

/// Jacobian element of `prox_tau` at an arbitrary `Z`.
pub fn prox_bsub_element_at(z: &SymMatrix, tau: f64, choices: &KinkChoices) -> Result<ProxJacobianElement> {
    let dd = prox_divided_diff(z, tau)?;
    let mut mult = dd.table.clone();
    for (kind, choice) in [(GroupKind::KinkUpper, &choices.upper), (GroupKind::KinkLower, &choices.lower)] {
        if let Some(g) = dd.kinds.iter().position(|k| *k == kind) {
            let blk = &dd.blocks.blocks[g];
            choice.validate(blk.len())?;
            for (a, &i) in blk.iter().enumerate() {
                for (b, &j) in blk.iter().enumerate() {
                    mult[(i, j)] = choice.entry(a, b);
                }
            }
        }
    }
    Ok(ProxJacobianElement { op: SpectralOperator { basis: dd.eig.basis, multipliers: mult }, tau })
}

/// Jacobian element of `prox_tau` at `Z = X + tau Y` for `Y in d||X||_*`.
pub fn prox_bsub_element(x: &SymMatrix, y: &SymMatrix, tau: f64, choices: &KinkChoices) -> Result<ProxJacobianElement> {
    let z = x + &y.scale(tau);
    prox_bsub_element_at(&z, tau, choices)
}

/// Generalised Hessian element of the envelope at `Z = X + tau Y`, paired with
/// [`prox_bsub_element`] so that `tau W + V = I`.
pub fn grad_env_bsub_element(x: &SymMatrix, y: &SymMatrix, tau: f64, choices: &KinkChoices) -> Result<SpectralOperator> {
    Ok(prox_bsub_element(x, y, tau, choices)?.envelope_element())
}

/// Directional derivative `prox_tau'(Z; H)`.
pub fn prox_dir_deriv(z: &SymMatrix, tau: f64, h: &SymMatrix) -> Result<SymMatrix> {
    let dd = prox_divided_diff(z, tau)?;
    let hhat = dd.eig.to_basis(h);
    let mut out = hhat.component_mul(&dd.table);
    for (g, blk) in dd.blocks.blocks.iter().enumerate() {
        let fixed = match dd.kinds[g] {
            GroupKind::KinkUpper => project_psd_dense(&submatrix(&hhat, blk, blk))?,
            GroupKind::KinkLower => project_nsd_dense(&submatrix(&hhat, blk, blk))?,
            GroupKind::Smooth(_) => continue,
        };
        for (a, &i) in blk.iter().enumerate() {
            for (b, &j) in blk.iter().enumerate() {
                out[(i, j)] = fixed[(a, b)];
            }
        }
    }
    Ok(dd.eig.from_basis(&out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prox_example() {
        let z = SymMatrix::from_diagonal(&[3.0, 0.5, -2.0]);
        let p = prox_nuclear(&z, 1.0).unwrap();
        assert_eq!(p, SymMatrix::from_diagonal(&[2.0, 0.0, -1.0]));
    }

    #[test]
    fn literal_convention_halves_threshold() {
        let z = SymMatrix::from_diagonal(&[3.0, 0.5, -2.0]);
        let p = prox_nuclear_with(&z, 1.0, MoreauConvention::Literal).unwrap();
        assert_eq!(p, SymMatrix::from_diagonal(&[2.5, 0.0, -1.5]));
        let g = grad_moreau_env_with(&z, 1.0, MoreauConvention::Literal).unwrap();
        assert_eq!(g, SymMatrix::from_diagonal(&[1.0, 1.0, -1.0]));
    }

    #[test]
    fn rejects_bad_tau() {
        assert!(prox_nuclear(&SymMatrix::zeros(2), 0.0).is_err());
        assert!(prox_nuclear(&SymMatrix::zeros(2), f64::NAN).is_err());
    }

    #[test]
    fn kink_choice_changes_element() {
        let z = SymMatrix::from_diagonal(&[1.0, 0.2]);
        let zero = prox_bsub_element_at(&z, 1.0, &KinkChoices::default()).unwrap();
        let one = prox_bsub_element_at(&z, 1.0, &KinkChoices::identity()).unwrap();
        assert_eq!(zero.op.multipliers[(0, 0)], 0.0);
        assert_eq!(one.op.multipliers[(0, 0)], 1.0);
    }

    #[test]
    fn dir_deriv_at_kink_projects() {
        let z = SymMatrix::from_diagonal(&[1.0, 1.0]);
        let h = SymMatrix::from_diagonal(&[1.0, -1.0]);
        let d = prox_dir_deriv(&z, 1.0, &h).unwrap();
        assert!((&d - &SymMatrix::from_diagonal(&[1.0, 0.0])).norm() < 1e-14);
    }
}
