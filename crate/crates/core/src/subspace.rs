//! Subspaces of the ambient Hilbert space, held as orthonormal bases.
//!
//! Bases are not canonical, so every comparison goes through projectors.

use crate::error::{Error, Result};
use crate::model::{DensityOperator, Tolerances};
use crate::numkit::{self, ComplexMatrix, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    /// `ambient_dim x k`, orthonormal columns; `k == 0` is the zero space.
    basis: ComplexMatrix,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: ComplexMatrix::zeros(ambient_dim, 0),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: ComplexMatrix::identity(ambient_dim),
        }
    }

    pub fn from_orthonormal(basis: ComplexMatrix) -> Result<Self> {
        let residual = numkit::orthonormality_residual(&basis);
        if basis.cols() > 0 && !(residual <= 1e-9) {
            return Err(numkit::LinalgError::NotOrthonormal { residual }.into());
        }
        Ok(Self {
            ambient_dim: basis.rows(),
            basis,
        })
    }

    /// Span of arbitrary vectors; directions with residual `<= tol` after
    /// orthogonalization are dropped.
    pub fn span(ambient_dim: usize, vectors: &[Vec<C64>], tol: f64) -> Result<Self> {
        if vectors.iter().any(|v| v.len() != ambient_dim) {
            return Err(numkit::LinalgError::RaggedVectors.into());
        }
        let q = numkit::gram_schmidt(vectors, tol)?;
        Ok(Self {
            ambient_dim,
            basis: ComplexMatrix::from_columns(ambient_dim, &q),
        })
    }

    pub fn span_of_columns(m: &ComplexMatrix, tol: f64) -> Result<Self> {
        Self::span(m.rows(), &m.columns(), tol)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn projector(&self) -> ComplexMatrix {
        &self.basis * &self.basis.adjoint()
    }

    /// Frobenius distance between the two projectors.
    pub fn projector_distance(&self, other: &Self) -> Result<f64> {
        check_ambient(self, other)?;
        Ok((&self.projector() - &other.projector()).frobenius_norm())
    }

    /// Orthogonal complement in the ambient space.
    pub fn complement(&self) -> Self {
        let n = self.ambient_dim;
        let residual = &ComplexMatrix::identity(n) - &self.projector();
        let eig = numkit::hermitian_eig(&residual, true).expect("square by construction");
        let keep: Vec<usize> = (0..n).filter(|&k| eig.values[k] > 0.5).collect();
        Self {
            ambient_dim: n,
            basis: eig.vectors.select_columns(&keep),
        }
    }
}

fn check_ambient(a: &Subspace, b: &Subspace) -> Result<()> {
    if a.ambient_dim != b.ambient_dim {
        return Err(Error::AmbientMismatch {
            left: a.ambient_dim,
            right: b.ambient_dim,
        });
    }
    Ok(())
}

/// Support of a PSD operator: eigenvectors with eigenvalue above the rank
/// cutoff.
pub fn support(rho: &DensityOperator, tol: &Tolerances) -> Result<Subspace> {
    support_of_matrix(rho.matrix(), tol)
}

pub fn support_of_matrix(m: &ComplexMatrix, tol: &Tolerances) -> Result<Subspace> {
    let eig = numkit::hermitian_eig(m, false)?;
    let min = eig.values.first().copied().unwrap_or(0.0);
    if min < -tol.psd.max(numkit::NEGATIVE_CLAMP * eig.max_abs_value()) {
        return Err(numkit::LinalgError::NotPsd { min_eig: min }.into());
    }
    let keep = eig.above_cutoff(tol.cutoffs());
    Ok(Subspace {
        ambient_dim: m.rows(),
        basis: eig.vectors.select_columns(&keep),
    })
}

/// Sum of subspaces: orthonormalized concatenation of the bases. Directions
/// closer than the containment tolerance to the running span are dropped.
pub fn sum(spaces: &[&Subspace], tol: &Tolerances) -> Result<Subspace> {
    let Some(first) = spaces.first() else {
        return Err(Error::InvalidArgument("sum of an empty list of subspaces".into()));
    };
    let n = first.ambient_dim;
    let mut vectors = Vec::new();
    for s in spaces {
        check_ambient(first, s)?;
        vectors.extend(s.basis.columns());
    }
    if vectors.is_empty() {
        return Ok(Subspace::zero(n));
    }
    Subspace::span(n, &vectors, tol.containment())
}

/// Intersection together with the principal-angle spectrum it was read from.
#[derive(Debug, Clone)]
pub struct Intersection {
    pub space: Subspace,
    /// `cos^2` of the principal angles between the two spaces, descending.
    pub cos2: Vec<f64>,
    /// Distance of the spectrum from the `1 - intersect` threshold; `None`
    /// when one space is zero. Small values flag knife-edge decisions.
    pub margin: Option<f64>,
}

/// `a ∩ b` from the spectrum of `P_a P_b P_a`, compressed to `a`: the
/// eigenvectors of `A† P_b A` with eigenvalue `>= 1 - intersect`.
pub fn intersect_detailed(a: &Subspace, b: &Subspace, tol: &Tolerances) -> Result<Intersection> {
    check_ambient(a, b)?;
    let n = a.ambient_dim;
    if a.is_zero() || b.is_zero() {
        return Ok(Intersection {
            space: Subspace::zero(n),
            cos2: Vec::new(),
            margin: None,
        });
    }
    let overlap = &a.basis.adjoint() * &b.basis;
    let compressed = &overlap * &overlap.adjoint();
    let eig = numkit::hermitian_eig(&compressed, true)?;
    let threshold = 1.0 - tol.intersect;
    let keep: Vec<usize> = (0..eig.values.len())
        .filter(|&k| eig.values[k] >= threshold)
        .collect();
    let margin = eig
        .values
        .iter()
        .map(|&x| (x - threshold).abs())
        .fold(f64::INFINITY, f64::min);
    let mut cos2 = eig.values.clone();
    cos2.reverse();
    let space = Subspace {
        ambient_dim: n,
        basis: &a.basis * &eig.vectors.select_columns(&keep),
    };
    Ok(Intersection {
        space,
        cos2,
        margin: Some(margin),
    })
}

pub fn intersect(a: &Subspace, b: &Subspace, tol: &Tolerances) -> Result<Subspace> {
    Ok(intersect_detailed(a, b, tol)?.space)
}

/// Largest column residual `||(I - P_outer) b_k||` over the basis of `inner`.
pub fn containment_residual(outer: &Subspace, inner: &Subspace) -> Result<f64> {
    check_ambient(outer, inner)?;
    if inner.is_zero() {
        return Ok(0.0);
    }
    let coeffs = &outer.basis.adjoint() * &inner.basis;
    let resid = &inner.basis - &(&outer.basis * &coeffs);
    Ok((0..resid.cols())
        .map(|k| numkit::norm(&resid.column(k)))
        .fold(0.0, f64::max))
}

pub fn contains(outer: &Subspace, inner: &Subspace, tol: &Tolerances) -> Result<bool> {
    Ok(containment_residual(outer, inner)? <= tol.containment())
}
