//! Polynomial nonlinear structural systems.
//!
//! A [`PolySystem`] is the discrete second-order model
//!
//! ```text
//! M u'' + C u' + K u + G(u,u) + H(u,u,u) = f · β · cos(ω t)
//! ```
//!
//! with the quadratic and cubic internal forces stored as sparse coordinate
//! lists. Tensor entries are canonicalized on construction: trailing indices
//! sorted ascending, coefficients of permuted duplicates summed. Each stored
//! entry is then the coefficient of one monomial `u_j u_k` (or `u_j u_k u_l`).

mod beam;

pub use beam::{make_vk_beam, midspan_transverse_dof};

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

use crate::scalar::Real;

/// Errors from system construction and evaluation.
#[derive(Debug, Error)]
pub enum DynError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("eigenfrequency must be positive, got {0}")]
    NonPositiveFrequency(f64),
    #[error("damping ratio must be nonnegative, got {0}")]
    NegativeDamping(f64),
    #[error("mass matrix is not symmetric within 1e-12 relative")]
    MassNotSymmetric,
    #[error("mass matrix is not positive definite")]
    MassNotPositiveDefinite,
    #[error("constrained stiffness matrix is singular")]
    SingularStiffness,
    #[error("duplicate canonical tensor entry at {0:?}")]
    DuplicateTensorEntry(Vec<usize>),
    #[error("tensor index {index} out of range for {n_dof} dofs")]
    IndexOutOfRange { index: usize, n_dof: usize },
    #[error("beam needs at least 8 elements, got {0}")]
    TooFewElements(usize),
    #[error("requested {requested} modes from a {n_dof}-dof system")]
    TooManyModes { requested: usize, n_dof: usize },
    #[error("invalid geometry or material: {0}")]
    InvalidGeometry(String),
    #[error("system JSON is malformed: {0}")]
    MalformedJson(String),
}

/// One quadratic-force monomial: contributes `value * u[j] * u[k]` to dof `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadEntry<T> {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub value: T,
}

/// One cubic-force monomial: contributes `value * u[j] * u[k] * u[l]` to dof `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicEntry<T> {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub l: usize,
    pub value: T,
}

/// Geometry and material of a rectangular-section beam.
///
/// `thickness` is the in-plane (bending) dimension, `width` the out-of-plane
/// one. All quantities in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialGeometry<T> {
    pub length: T,
    pub width: T,
    pub thickness: T,
    pub density: T,
    pub young_modulus: T,
    pub poisson: T,
    pub quality_factor: T,
}

impl<T: Real> MaterialGeometry<T> {
    pub fn validate(&self) -> Result<(), DynError> {
        let pos = [
            ("length", self.length),
            ("width", self.width),
            ("thickness", self.thickness),
            ("density", self.density),
            ("young_modulus", self.young_modulus),
            ("quality_factor", self.quality_factor),
        ];
        for (name, v) in pos {
            if v <= T::zero() {
                return Err(DynError::InvalidGeometry(format!(
                    "{name} must be strictly positive, got {}",
                    v.to64()
                )));
            }
        }
        if self.poisson <= T::zero() || self.poisson >= T::of(0.5) {
            return Err(DynError::InvalidGeometry(format!(
                "poisson ratio must lie in (0, 0.5), got {}",
                self.poisson.to64()
            )));
        }
        Ok(())
    }
}

/// Discrete dynamical system with polynomial internal forces.
#[derive(Debug, Clone, PartialEq)]
pub struct PolySystem<T> {
    n_dof: usize,
    m: DMatrix<T>,
    c: DMatrix<T>,
    k: DMatrix<T>,
    g: Vec<QuadEntry<T>>,
    h: Vec<CubicEntry<T>>,
    forcing_shape: DVector<T>,
}

impl<T: Real> PolySystem<T> {
    /// Builds a system from raw (possibly unsorted, duplicated) tensor entries.
    ///
    /// Trailing tensor indices are sorted and coefficients of coincident
    /// monomials summed, so assembly code may emit entries in any order.
    pub fn new(
        m: DMatrix<T>,
        c: DMatrix<T>,
        k: DMatrix<T>,
        g_raw: Vec<QuadEntry<T>>,
        h_raw: Vec<CubicEntry<T>>,
        forcing_shape: DVector<T>,
    ) -> Result<Self, DynError> {
        let n = m.nrows();
        for (name, mat) in [("c", &c), ("k", &k)] {
            if mat.nrows() != n || mat.ncols() != n {
                return Err(DynError::MalformedJson(format!(
                    "matrix {name} is {}x{}, expected {n}x{n}",
                    mat.nrows(),
                    mat.ncols()
                )));
            }
        }
        if m.ncols() != n || forcing_shape.len() != n {
            return Err(DynError::DimensionMismatch {
                expected: n,
                got: forcing_shape.len(),
            });
        }
        check_mass(&m)?;

        let g = canonicalize_quad(g_raw, n)?;
        let h = canonicalize_cubic(h_raw, n)?;
        Ok(Self {
            n_dof: n,
            m,
            c,
            k,
            g,
            h,
            forcing_shape,
        })
    }

    pub fn n_dof(&self) -> usize {
        self.n_dof
    }
    pub fn mass(&self) -> &DMatrix<T> {
        &self.m
    }
    pub fn damping(&self) -> &DMatrix<T> {
        &self.c
    }
    pub fn stiffness(&self) -> &DMatrix<T> {
        &self.k
    }
    pub fn forcing_shape(&self) -> &DVector<T> {
        &self.forcing_shape
    }
    /// Canonicalized quadratic-force monomials (j ≤ k).
    pub fn quad_entries(&self) -> &[QuadEntry<T>] {
        &self.g
    }
    /// Canonicalized cubic-force monomials (j ≤ k ≤ l).
    pub fn cubic_entries(&self) -> &[CubicEntry<T>] {
        &self.h
    }

    fn check_len(&self, u: &DVector<T>) -> Result<(), DynError> {
        if u.len() != self.n_dof {
            return Err(DynError::DimensionMismatch {
                expected: self.n_dof,
                got: u.len(),
            });
        }
        Ok(())
    }

    /// Full internal force `K u + G(u,u) + H(u,u,u)`.
    pub fn eval_internal_force(&self, u: &DVector<T>) -> Result<DVector<T>, DynError> {
        self.check_len(u)?;
        let mut f = &self.k * u;
        self.add_nl_force(u, &mut f);
        Ok(f)
    }

    /// Tangent stiffness: derivative of [`Self::eval_internal_force`].
    pub fn eval_jacobian(&self, u: &DVector<T>) -> Result<DMatrix<T>, DynError> {
        self.check_len(u)?;
        let mut jac = self.k.clone();
        self.add_nl_jacobian(u, &mut jac);
        Ok(jac)
    }

    /// Adds the nonlinear (quadratic + cubic) force to `out`.
    pub fn add_nl_force(&self, u: &DVector<T>, out: &mut DVector<T>) {
        for e in &self.g {
            out[e.i] += e.value * u[e.j] * u[e.k];
        }
        for e in &self.h {
            out[e.i] += e.value * u[e.j] * u[e.k] * u[e.l];
        }
    }

    /// Adds the derivative of the nonlinear force to `out`.
    pub fn add_nl_jacobian(&self, u: &DVector<T>, out: &mut DMatrix<T>) {
        for e in &self.g {
            out[(e.i, e.j)] += e.value * u[e.k];
            out[(e.i, e.k)] += e.value * u[e.j];
        }
        for e in &self.h {
            out[(e.i, e.j)] += e.value * u[e.k] * u[e.l];
            out[(e.i, e.k)] += e.value * u[e.j] * u[e.l];
            out[(e.i, e.l)] += e.value * u[e.j] * u[e.k];
        }
    }

    /// Quartic strain-energy polynomial `½uᵀKu + ⅓uᵀG(u,u) + ¼uᵀH(u,u,u)`.
    pub fn strain_energy(&self, u: &DVector<T>) -> Result<T, DynError> {
        self.check_len(u)?;
        let ku = &self.k * u;
        let mut quad = T::zero();
        for e in &self.g {
            quad += e.value * u[e.i] * u[e.j] * u[e.k];
        }
        let mut cubic = T::zero();
        for e in &self.h {
            cubic += e.value * u[e.i] * u[e.j] * u[e.k] * u[e.l];
        }
        Ok(u.dot(&ku) / T::of(2.0) + quad / T::of(3.0) + cubic / T::of(4.0))
    }
}

fn check_mass<T: Real>(m: &DMatrix<T>) -> Result<(), DynError> {
    let n = m.nrows();
    let mut scale = T::zero();
    for v in m.iter() {
        scale = scale.max(v.abs());
    }
    if scale == T::zero() {
        return Err(DynError::MassNotPositiveDefinite);
    }
    let tol = scale * T::of(1e-12);
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > tol {
                return Err(DynError::MassNotSymmetric);
            }
        }
    }
    if Cholesky::new(m.clone()).is_none() {
        return Err(DynError::MassNotPositiveDefinite);
    }
    Ok(())
}

fn canonicalize_quad<T: Real>(
    raw: Vec<QuadEntry<T>>,
    n: usize,
) -> Result<Vec<QuadEntry<T>>, DynError> {
    let mut map: std::collections::BTreeMap<(usize, usize, usize), T> =
        std::collections::BTreeMap::new();
    for e in raw {
        for idx in [e.i, e.j, e.k] {
            if idx >= n {
                return Err(DynError::IndexOutOfRange { index: idx, n_dof: n });
            }
        }
        let (j, k) = if e.j <= e.k { (e.j, e.k) } else { (e.k, e.j) };
        *map.entry((e.i, j, k)).or_insert_with(T::zero) += e.value;
    }
    Ok(map
        .into_iter()
        .filter(|(_, v)| *v != T::zero())
        .map(|((i, j, k), value)| QuadEntry { i, j, k, value })
        .collect())
}

fn canonicalize_cubic<T: Real>(
    raw: Vec<CubicEntry<T>>,
    n: usize,
) -> Result<Vec<CubicEntry<T>>, DynError> {
    let mut map: std::collections::BTreeMap<(usize, usize, usize, usize), T> =
        std::collections::BTreeMap::new();
    for e in raw {
        for idx in [e.i, e.j, e.k, e.l] {
            if idx >= n {
                return Err(DynError::IndexOutOfRange { index: idx, n_dof: n });
            }
        }
        let mut t = [e.j, e.k, e.l];
        t.sort_unstable();
        *map.entry((e.i, t[0], t[1], t[2])).or_insert_with(T::zero) += e.value;
    }
    Ok(map
        .into_iter()
        .filter(|(_, v)| *v != T::zero())
        .map(|((i, j, k, l), value)| CubicEntry { i, j, k, l, value })
        .collect())
}

/// Second-order structural system with polynomial internal forces, as seen
/// by the periodic-solution solvers. Implemented by [`PolySystem`] and by the
/// projected reduced system.
pub trait SecondOrderSystem<T: Real> {
    fn n_dof(&self) -> usize;
    fn mass(&self) -> &DMatrix<T>;
    fn damping(&self) -> &DMatrix<T>;
    fn stiffness(&self) -> &DMatrix<T>;
    fn forcing_shape(&self) -> &DVector<T>;
    /// Whether any quadratic/cubic terms are present.
    fn has_nonlinearity(&self) -> bool;
    /// Adds the quadratic + cubic force (no linear part) to `out`.
    fn add_nl_force(&self, u: &DVector<T>, out: &mut DVector<T>);
    /// Adds the derivative of the nonlinear force to `out`.
    fn add_nl_jacobian(&self, u: &DVector<T>, out: &mut DMatrix<T>);
}

impl<T: Real> SecondOrderSystem<T> for PolySystem<T> {
    fn n_dof(&self) -> usize {
        self.n_dof
    }
    fn mass(&self) -> &DMatrix<T> {
        &self.m
    }
    fn damping(&self) -> &DMatrix<T> {
        &self.c
    }
    fn stiffness(&self) -> &DMatrix<T> {
        &self.k
    }
    fn forcing_shape(&self) -> &DVector<T> {
        &self.forcing_shape
    }
    fn has_nonlinearity(&self) -> bool {
        !self.g.is_empty() || !self.h.is_empty()
    }
    fn add_nl_force(&self, u: &DVector<T>, out: &mut DVector<T>) {
        PolySystem::add_nl_force(self, u, out);
    }
    fn add_nl_jacobian(&self, u: &DVector<T>, out: &mut DMatrix<T>) {
        PolySystem::add_nl_jacobian(self, u, out);
    }
}

/// Single-dof Duffing resonator
/// `u'' + ω0² u + ε(2ξω0 u' + k3 u³) = ε β cos(ωt)`.
pub fn make_duffing<T: Real>(
    omega0: T,
    xi: T,
    k3: T,
    epsilon: T,
    forcing_unit: T,
) -> Result<PolySystem<T>, DynError> {
    if omega0 <= T::zero() {
        return Err(DynError::NonPositiveFrequency(omega0.to64()));
    }
    if xi < T::zero() {
        return Err(DynError::NegativeDamping(xi.to64()));
    }
    let m = DMatrix::from_element(1, 1, T::one());
    let c = DMatrix::from_element(1, 1, T::of(2.0) * epsilon * xi * omega0);
    let k = DMatrix::from_element(1, 1, omega0 * omega0);
    let h = if epsilon * k3 != T::zero() {
        vec![CubicEntry {
            i: 0,
            j: 0,
            k: 0,
            l: 0,
            value: epsilon * k3,
        }]
    } else {
        Vec::new()
    };
    let f = DVector::from_element(1, epsilon * forcing_unit);
    PolySystem::new(m, c, k, Vec::new(), h, f)
}

/// Generalized symmetric eigenproblem `K φ = ω² M φ`.
///
/// Returns the `count` lowest (frequency in Hz, mass-normalized mode) pairs,
/// frequencies ascending. The largest-magnitude entry of each mode is made
/// positive so results are reproducible.
pub fn eigen_analysis<T: Real>(
    sys: &PolySystem<T>,
    count: usize,
) -> Result<Vec<(T, DVector<T>)>, DynError> {
    generalized_eigen(sys.stiffness(), sys.mass(), count)
}

pub(crate) fn generalized_eigen<T: Real>(
    k: &DMatrix<T>,
    m: &DMatrix<T>,
    count: usize,
) -> Result<Vec<(T, DVector<T>)>, DynError> {
    let n = m.nrows();
    if count > n {
        return Err(DynError::TooManyModes {
            requested: count,
            n_dof: n,
        });
    }
    let chol = Cholesky::new(m.clone()).ok_or(DynError::MassNotPositiveDefinite)?;
    let l = chol.l();
    // A = L⁻¹ K L⁻ᵀ, computed through two triangular solves.
    let b = l
        .solve_lower_triangular(k)
        .ok_or(DynError::SingularStiffness)?;
    let a = l
        .solve_lower_triangular(&b.transpose())
        .ok_or(DynError::SingularStiffness)?;
    let a_sym = (&a + a.transpose()) * T::of(0.5);
    let eig = SymmetricEigen::new(a_sym);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| {
        eig.eigenvalues[p]
            .partial_cmp(&eig.eigenvalues[q])
            .expect("finite eigenvalues")
    });

    let two_pi = T::of(2.0) * T::pi();
    let mut out = Vec::with_capacity(count);
    for &idx in order.iter().take(count) {
        let lambda = eig.eigenvalues[idx];
        if lambda <= T::zero() {
            return Err(DynError::SingularStiffness);
        }
        let y = eig.eigenvectors.column(idx).into_owned();
        // φ = L⁻ᵀ y
        let phi = l
            .transpose()
            .solve_upper_triangular(&y)
            .ok_or(DynError::SingularStiffness)?;
        let norm = (phi.dot(&(m * &phi))).sqrt();
        let mut phi = phi / norm;
        let mut max_abs = T::zero();
        let mut max_idx = 0;
        for (i, v) in phi.iter().enumerate() {
            if v.abs() > max_abs {
                max_abs = v.abs();
                max_idx = i;
            }
        }
        if phi[max_idx] < T::zero() {
            phi = -phi;
        }
        out.push((lambda.sqrt() / two_pi, phi));
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
