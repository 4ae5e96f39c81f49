//! Clamped-clamped von Kármán beam discretization.
//!
//! Axial displacement is interpolated linearly, transverse deflection with
//! Hermite cubics (3 dofs per node: u, w, θ). The axial strain
//! `e = u' + ½(w')²` makes the strain energy a quartic polynomial in the
//! nodal dofs, so the internal force decomposes exactly into linear,
//! quadratic, and cubic terms:
//!
//! ```text
//! E(q) = ∫ ½EA(u' + ½w'²)² + ½EI(w'')² dx
//!      = ½qᵀKq + ⅓qᵀG(q,q)·… + ¼qᵀH(q,q,q)·…
//! ```
//!
//! Mass and linear stiffness use the closed-form consistent element
//! matrices. The quadratic-force term (degree-4 integrand) uses 3-point
//! Gauss, the cubic-force term (degree-8 integrand) 5-point Gauss; both are
//! exact for the polynomial degrees present.

use nalgebra::DMatrix;

use super::{generalized_eigen, CubicEntry, DynError, MaterialGeometry, PolySystem, QuadEntry};
use crate::scalar::Real;

const GAUSS3: [(f64, f64); 3] = [
    (-0.774596669241483377035853079956, 0.555555555555555555555555555556),
    (0.0, 0.888888888888888888888888888889),
    (0.774596669241483377035853079956, 0.555555555555555555555555555556),
];

const GAUSS5: [(f64, f64); 5] = [
    (-0.906179845938663992797626878299, 0.236926885056189087514264040720),
    (-0.538469310105683091036314420700, 0.478628670499366468041291514836),
    (0.0, 0.568888888888888888888888888889),
    (0.538469310105683091036314420700, 0.478628670499366468041291514836),
    (0.906179845938663992797626878299, 0.236926885056189087514264040720),
];

/// Local index layout per element: [u1, w1, θ1, u2, w2, θ2].
const ELEM_DOFS: usize = 6;

/// Assembles the clamped-clamped von Kármán beam.
///
/// `reference_mode` is 1-based. Damping is mass-proportional,
/// `C = (ω_ref/Q) M` with `ω_ref` the eigenfrequency of the reference mode,
/// and the forcing shape is `M φ_ref` with `φ_ref` mass-normalized.
pub fn make_vk_beam<T: Real>(
    n_elem: usize,
    mg: &MaterialGeometry<T>,
    reference_mode: usize,
) -> Result<PolySystem<T>, DynError> {
    if n_elem < 8 {
        return Err(DynError::TooFewElements(n_elem));
    }
    mg.validate()?;
    let n_dof = 3 * (n_elem - 1);
    if reference_mode == 0 || reference_mode > n_dof {
        return Err(DynError::TooManyModes {
            requested: reference_mode,
            n_dof,
        });
    }

    let area = mg.width * mg.thickness;
    let inertia = mg.width * mg.thickness.powi(3) / T::of(12.0);
    let ea = mg.young_modulus * area;
    let ei = mg.young_modulus * inertia;
    let rho_a = mg.density * area;
    let le = mg.length / T::of(n_elem as f64);

    let mut m = DMatrix::<T>::zeros(n_dof, n_dof);
    let mut k = DMatrix::<T>::zeros(n_dof, n_dof);
    let mut g_raw: Vec<QuadEntry<T>> = Vec::new();
    let mut h_raw: Vec<CubicEntry<T>> = Vec::new();

    let ke = element_stiffness(ea, ei, le);
    let me = element_mass(rho_a, le);

    for e in 0..n_elem {
        // Local dof a lives on node e + a/3, component a % 3; clamped end
        // nodes are dropped from the global numbering.
        let global = |a: usize| -> Option<usize> {
            let node = e + a / 3;
            if node == 0 || node == n_elem {
                None
            } else {
                Some(3 * (node - 1) + a % 3)
            }
        };

        for a in 0..ELEM_DOFS {
            let Some(ga) = global(a) else { continue };
            for b in 0..ELEM_DOFS {
                let Some(gb) = global(b) else { continue };
                m[(ga, gb)] += me[a][b];
                k[(ga, gb)] += ke[a][b];
            }
        }

        // Quadratic force from ½EA·u'·(w')²; the integrand is degree 4.
        for (xi, wt) in GAUSS3 {
            let weight = T::of(0.5 * wt) * le;
            let s = T::of(0.5 * (1.0 + xi));
            let b_ax = axial_strain_row(le);
            let c_tr = slope_row(le, s);
            for a in 0..ELEM_DOFS {
                let Some(ga) = global(a) else { continue };
                for j in 0..ELEM_DOFS {
                    let Some(gj) = global(j) else { continue };
                    for kk in 0..ELEM_DOFS {
                        let Some(gk) = global(kk) else { continue };
                        let coeff = T::of(0.5) * ea * b_ax[a] * c_tr[j] * c_tr[kk]
                            + ea * c_tr[a] * b_ax[j] * c_tr[kk];
                        if coeff != T::zero() {
                            g_raw.push(QuadEntry {
                                i: ga,
                                j: gj,
                                k: gk,
                                value: coeff * weight,
                            });
                        }
                    }
                }
            }
        }

        // Cubic force from ⅛EA·(w')⁴; the integrand is degree 8.
        for (xi, wt) in GAUSS5 {
            let weight = T::of(0.5 * wt) * le;
            let s = T::of(0.5 * (1.0 + xi));
            let c_tr = slope_row(le, s);
            for a in 0..ELEM_DOFS {
                let Some(ga) = global(a) else { continue };
                if c_tr[a] == T::zero() {
                    continue;
                }
                for j in 0..ELEM_DOFS {
                    let Some(gj) = global(j) else { continue };
                    if c_tr[j] == T::zero() {
                        continue;
                    }
                    for kk in 0..ELEM_DOFS {
                        let Some(gk) = global(kk) else { continue };
                        if c_tr[kk] == T::zero() {
                            continue;
                        }
                        for ll in 0..ELEM_DOFS {
                            let Some(gl) = global(ll) else { continue };
                            let coeff = T::of(0.5) * ea * c_tr[a] * c_tr[j] * c_tr[kk] * c_tr[ll];
                            if coeff != T::zero() {
                                h_raw.push(CubicEntry {
                                    i: ga,
                                    j: gj,
                                    k: gk,
                                    l: gl,
                                    value: coeff * weight,
                                });
                            }
                        }
                    }
                }
            }
        }
    }

    let modes = generalized_eigen(&k, &m, reference_mode)?;
    let (freq_ref, phi_ref) = modes
        .last()
        .cloned()
        .ok_or(DynError::SingularStiffness)?;
    let omega_ref = T::of(2.0) * T::pi() * freq_ref;
    let c = &m * (omega_ref / mg.quality_factor);
    let forcing = &m * &phi_ref;

    PolySystem::new(m, c, k, g_raw, h_raw, forcing)
}

/// Global index of the transverse dof at (or just below) midspan.
pub fn midspan_transverse_dof(n_elem: usize) -> usize {
    let node = n_elem / 2;
    3 * (node - 1) + 1
}

/// du/dx row over the element dofs (constant in x).
fn axial_strain_row<T: Real>(le: T) -> [T; ELEM_DOFS] {
    let inv = T::one() / le;
    [-inv, T::zero(), T::zero(), inv, T::zero(), T::zero()]
}

/// dw/dx row over the element dofs at local coordinate s ∈ [0, 1].
fn slope_row<T: Real>(le: T, s: T) -> [T; ELEM_DOFS] {
    let six = T::of(6.0);
    let inv = T::one() / le;
    let h1 = (six * s * s - six * s) * inv;
    let h2 = T::one() - T::of(4.0) * s + T::of(3.0) * s * s;
    let h3 = (six * s - six * s * s) * inv;
    let h4 = -T::of(2.0) * s + T::of(3.0) * s * s;
    [T::zero(), h1, h2, T::zero(), h3, h4]
}

/// Closed-form consistent element stiffness (axial + Euler-Bernoulli bending).
fn element_stiffness<T: Real>(ea: T, ei: T, le: T) -> [[T; ELEM_DOFS]; ELEM_DOFS] {
    let mut k = [[T::zero(); ELEM_DOFS]; ELEM_DOFS];
    let ax = ea / le;
    k[0][0] = ax;
    k[0][3] = -ax;
    k[3][0] = -ax;
    k[3][3] = ax;

    let le2 = le * le;
    let b = ei / (le * le2);
    let (c12, c6, c4, c2) = (T::of(12.0), T::of(6.0), T::of(4.0), T::of(2.0));
    let idx = [1, 2, 4, 5];
    let kb = [
        [c12, c6 * le, -c12, c6 * le],
        [c6 * le, c4 * le2, -c6 * le, c2 * le2],
        [-c12, -c6 * le, c12, -c6 * le],
        [c6 * le, c2 * le2, -c6 * le, c4 * le2],
    ];
    for (p, &ip) in idx.iter().enumerate() {
        for (q, &iq) in idx.iter().enumerate() {
            k[ip][iq] = kb[p][q] * b;
        }
    }
    k
}

/// Closed-form consistent element mass (translational inertia only).
fn element_mass<T: Real>(rho_a: T, le: T) -> [[T; ELEM_DOFS]; ELEM_DOFS] {
    let mut m = [[T::zero(); ELEM_DOFS]; ELEM_DOFS];
    let ax = rho_a * le / T::of(6.0);
    m[0][0] = ax * T::of(2.0);
    m[0][3] = ax;
    m[3][0] = ax;
    m[3][3] = ax * T::of(2.0);

    let le2 = le * le;
    let b = rho_a * le / T::of(420.0);
    let idx = [1, 2, 4, 5];
    let mb = [
        [T::of(156.0), T::of(22.0) * le, T::of(54.0), T::of(-13.0) * le],
        [
            T::of(22.0) * le,
            T::of(4.0) * le2,
            T::of(13.0) * le,
            T::of(-3.0) * le2,
        ],
        [T::of(54.0), T::of(13.0) * le, T::of(156.0), T::of(-22.0) * le],
        [
            T::of(-13.0) * le,
            T::of(-3.0) * le2,
            T::of(-22.0) * le,
            T::of(4.0) * le2,
        ],
    ];
    for (p, &ip) in idx.iter().enumerate() {
        for (q, &iq) in idx.iter().enumerate() {
            m[ip][iq] = mb[p][q] * b;
        }
    }
    m
}
