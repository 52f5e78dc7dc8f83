#![allow(dead_code)]

use graphsteer::{
    apply_symplectic, unitary_to_symplectic, CovarianceMatrix, ModeUnitary, SymplecticMatrix,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Beam splitter with mixing angle `theta` and phase `phi` on modes (j, k),
/// embedded in an n-mode identity.
pub fn beam_splitter(n: usize, j: usize, k: usize, theta: f64, phi: f64) -> ModeUnitary {
    let mut u = DMatrix::<Complex64>::identity(n, n);
    let (s, c) = theta.sin_cos();
    let e = Complex64::from_polar(1.0, phi);
    u[(j, j)] = Complex64::new(c, 0.0);
    u[(j, k)] = -e.conj() * s;
    u[(k, j)] = e * s;
    u[(k, k)] = Complex64::new(c, 0.0);
    ModeUnitary::new(u).unwrap()
}

/// Product of nearest-neighbour beam splitters and local phases built from
/// a flat parameter list (cycled as needed).
pub fn random_unitary(n: usize, params: &[f64]) -> ModeUnitary {
    let mut it = params.iter().cycle();
    let mut u = ModeUnitary::new(DMatrix::identity(n, n)).unwrap();
    for _layer in 0..n {
        for j in 0..n.saturating_sub(1) {
            let theta = *it.next().unwrap();
            let phi = *it.next().unwrap();
            u = beam_splitter(n, j, j + 1, theta, phi).compose(&u).unwrap();
        }
    }
    let phases = DMatrix::from_diagonal(&DVector::from_iterator(
        n,
        (0..n).map(|_| Complex64::from_polar(1.0, *it.next().unwrap())),
    ));
    ModeUnitary::new(phases).unwrap().compose(&u).unwrap()
}

/// Passive · squeeze · passive.
pub fn random_symplectic(n: usize, params: &[f64], squeezes: &[f64]) -> SymplecticMatrix {
    let u1 = unitary_to_symplectic(&random_unitary(n, params)).unwrap();
    let rev: Vec<f64> = params.iter().rev().map(|p| p * 0.7 + 0.1).collect();
    let u2 = unitary_to_symplectic(&random_unitary(n, &rev)).unwrap();
    let sq: Vec<SymplecticMatrix> = (0..n)
        .map(|k| SymplecticMatrix::single_mode_squeezer(squeezes[k % squeezes.len()]))
        .collect();
    let z = SymplecticMatrix::direct_sum(&sq).unwrap();
    u1.compose(&z).unwrap().compose(&u2).unwrap()
}

/// Mixed Gaussian state S (⊕ ν_k I₂) Sᵀ.
pub fn random_state(
    n: usize,
    params: &[f64],
    squeezes: &[f64],
    thermal: &[f64],
) -> CovarianceMatrix {
    let diag: Vec<f64> = (0..n)
        .flat_map(|k| {
            let nu = 1.0 + thermal[k % thermal.len()];
            [nu, nu]
        })
        .collect();
    let th = CovarianceMatrix::new(DMatrix::from_diagonal(&DVector::from_vec(diag))).unwrap();
    apply_symplectic(&random_symplectic(n, params, squeezes), &th).unwrap()
}

pub fn max_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

/// T₂ of the tripartite member with weight C_BC.
pub fn tripartite_t2(c_bc: f64) -> f64 {
    c_bc * c_bc / (1.0 + c_bc * c_bc)
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            if k + 1 == n {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        })
        .collect()
}
