//! Numerical data of double covers and invariant deformation counts.

use num_traits::Zero;
use thiserror::Error;

use crate::blowup::{BlowupError, SurfaceModel};
use crate::qlattice::{int, DivisorClass, LatticeError, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoverError {
    #[error(transparent)]
    Blowup(#[from] BlowupError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("branch class {0} is not 2-divisible")]
    NotDivisible(String),
    #[error("branch components {a:?} and {b:?} meet ({a} . {b} = {value})")]
    BranchMeets { a: String, b: String, value: String },
    #[error("inconsistent dimension count: {total} total, {cut} cut by branch components")]
    Inconsistent { total: i64, cut: i64 },
}

/// Branch data `B = 2L` of a double cover.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverSpec {
    pub branch_names: Vec<String>,
    pub branch_class: DivisorClass,
    pub half_class: DivisorClass,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverInvariants {
    pub k2_cover: Rational,
    pub chi_cover: Rational,
}

pub fn make_cover(s: &SurfaceModel, branch_names: &[String]) -> Result<CoverSpec, CoverError> {
    let mut branch_class = DivisorClass::zero();
    for (i, a) in branch_names.iter().enumerate() {
        branch_class = &branch_class + s.curve(a)?;
        for b in &branch_names[i + 1..] {
            let v = s.intersect_curves(a, b)?;
            if !v.is_zero() || a == b {
                return Err(CoverError::BranchMeets {
                    a: a.clone(),
                    b: b.clone(),
                    value: v.to_string(),
                });
            }
        }
    }
    let half_class = s
        .lattice()
        .divide_class(&branch_class, 2)?
        .ok_or_else(|| CoverError::NotDivisible(branch_class.to_string()))?;
    Ok(CoverSpec {
        branch_names: branch_names.to_vec(),
        branch_class,
        half_class,
    })
}

/// Invariants of the smooth double cover branched along a smooth `B = 2L`:
/// `K'^2 = 2 (K + L)^2` and `chi' = 2 chi + L (L + K) / 2`. The base `K^2`
/// enters through `(K + L)^2 = K^2 + 2 K.L + L^2`.
pub fn double_cover_invariants(
    k2_base: &Rational,
    chi_base: &Rational,
    spec: &CoverSpec,
    k_base: &DivisorClass,
) -> CoverInvariants {
    let l = &spec.half_class;
    let kl = k_base.intersect(l);
    let ll = l.square();
    CoverInvariants {
        k2_cover: int(2) * (k2_base + int(2) * &kl + &ll),
        chi_cover: int(2) * chi_base + (&ll + &kl) / int(2),
    }
}

/// Cover branched only at ordinary double points: `K_X^2 = 2 K_Y^2`.
pub fn branch_at_nodes(k2_base: &Rational) -> Rational {
    int(2) * k2_base
}

/// Each disjoint (-2)-branch component cuts one dimension.
pub fn invariant_deformation_dim(total_dim: i64, branch_component_count: i64) -> Result<i64, CoverError> {
    let left = total_dim - branch_component_count;
    if left < 0 || branch_component_count < 0 {
        return Err(CoverError::Inconsistent {
            total: total_dim,
            cut: branch_component_count,
        });
    }
    Ok(left)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    /// Two lines separated by blowing up their intersection point.
    fn two_lines() -> SurfaceModel {
        SurfaceModel::plane()
            .with_plane_curve("A", 1)
            .unwrap()
            .with_plane_curve("B", 1)
            .unwrap()
            .blow_up(&[("A", 1), ("B", 1)], None, Some("P"))
            .unwrap()
    }

    #[test]
    fn empty_branch_is_etale() {
        let s = two_lines();
        let spec = make_cover(&s, &[]).unwrap();
        assert!(spec.half_class.is_zero());
        let inv = double_cover_invariants(&s.k_squared(), &int(1), &spec, s.canonical());
        assert_eq!(inv.k2_cover, int(2) * s.k_squared());
        assert_eq!(inv.chi_cover, int(2));
    }

    #[test]
    fn odd_branch_is_rejected() {
        let s = two_lines();
        assert!(matches!(make_cover(&s, &names(&["A"])), Err(CoverError::NotDivisible(_))));
    }

    #[test]
    fn meeting_branch_is_rejected() {
        let s = SurfaceModel::plane()
            .with_plane_curve("A", 1)
            .unwrap()
            .with_plane_curve("B", 1)
            .unwrap();
        assert!(matches!(
            make_cover(&s, &names(&["A", "B"])),
            Err(CoverError::BranchMeets { .. })
        ));
        assert!(matches!(
            make_cover(&s, &names(&["A", "A"])),
            Err(CoverError::BranchMeets { .. })
        ));
    }

    #[test]
    fn disjoint_even_branch() {
        // A and B separated by the blow-up: A + B = 2h - 2e1.
        let s = two_lines();
        let spec = make_cover(&s, &names(&["A", "B"])).unwrap();
        assert_eq!(spec.half_class.to_string(), "h - e1");
        // Plane blown up once: K^2 = 8, chi = 1, L = h - e1, K.L = -2, L^2 = 0.
        let inv = double_cover_invariants(&int(8), &int(1), &spec, s.canonical());
        assert_eq!(inv.k2_cover, int(2) * int(8 - 4));
        assert_eq!(inv.chi_cover, int(2) + int(-2) / int(2));
    }

    #[test]
    fn nodes_and_invariant_dims() {
        assert_eq!(branch_at_nodes(&int(1)), int(2));
        assert_eq!(invariant_deformation_dim(8, 4).unwrap(), 4);
        assert_eq!(invariant_deformation_dim(5, 0).unwrap(), 5);
        assert_eq!(invariant_deformation_dim(8, 8).unwrap(), 0);
        assert!(invariant_deformation_dim(3, 4).is_err());
    }
}
