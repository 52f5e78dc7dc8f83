//! Real-symplectic and covariance-matrix algebra.
//!
//! Quadratures are ordered (x₁, p₁, x₂, p₂, …) with x = a + a† and
//! p = (a − a†)/i, so the vacuum covariance matrix is the identity.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{domain, validation, Error, Result};
use crate::numeric::{max_abs_diff, POLICY};

fn check_square(m: &DMatrix<f64>, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(validation(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 || !m.nrows().is_multiple_of(2) {
        return Err(validation(format!(
            "{what} must have even positive dimension, got {}",
            m.nrows()
        )));
    }
    Ok(m.nrows() / 2)
}

fn asymmetry(m: &DMatrix<f64>) -> f64 {
    max_abs_diff(m, &m.transpose())
}

fn check_symmetric(m: &DMatrix<f64>, what: &str) -> Result<()> {
    let scale = m.amax().max(1.0);
    let asym = asymmetry(m);
    if asym > POLICY.symmetry * scale {
        return Err(validation(format!(
            "{what} is not symmetric (max |M - Mᵀ| = {asym:.3e})"
        )));
    }
    Ok(())
}

/// Interleaved index of the x quadrature of `mode`.
#[inline]
pub fn x_index(mode: usize) -> usize {
    2 * mode
}

/// Interleaved index of the p quadrature of `mode`.
#[inline]
pub fn p_index(mode: usize) -> usize {
    2 * mode + 1
}

/// Quadrature indices (x, p, x, p, …) of an ordered list of modes.
pub fn quadrature_indices(modes: &[usize]) -> Vec<usize> {
    modes
        .iter()
        .flat_map(|&m| [x_index(m), p_index(m)])
        .collect()
}

/// Extracts the rows and columns listed in `idx`, in that order.
pub fn select(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Second-moment matrix of an N-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    entries: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Validates symmetry, positive definiteness and the uncertainty
    /// principle σ + iΩ ⪰ 0.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        check_square(&entries, "covariance matrix")?;
        check_symmetric(&entries, "covariance matrix")?;
        let entries = symmetrize(entries);
        if entries.clone().cholesky().is_none() {
            return Err(validation("covariance matrix is not positive definite"));
        }
        let cov = CovarianceMatrix { entries };
        let margin = cov.physicality_margin();
        if margin < -POLICY.bona_fide {
            return Err(validation(format!(
                "covariance matrix violates σ + iΩ ⪰ 0 (min eigenvalue {margin:.3e})"
            )));
        }
        Ok(cov)
    }

    pub fn identity(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(domain("n_modes must be at least 1"));
        }
        Ok(CovarianceMatrix {
            entries: DMatrix::identity(2 * n_modes, 2 * n_modes),
        })
    }

    /// Thermal state with the same variance `nu ≥ 1` on every quadrature.
    pub fn thermal(n_modes: usize, nu: f64) -> Result<Self> {
        if nu.is_nan() || nu < 1.0 {
            return Err(domain(format!("thermal variance must be >= 1, got {nu}")));
        }
        if n_modes == 0 {
            return Err(domain("n_modes must be at least 1"));
        }
        Ok(CovarianceMatrix {
            entries: DMatrix::identity(2 * n_modes, 2 * n_modes) * nu,
        })
    }

    /// Block-diagonal direct sum of independent states.
    pub fn direct_sum(parts: &[CovarianceMatrix]) -> Result<Self> {
        if parts.is_empty() {
            return Err(domain("direct sum of zero states"));
        }
        let dim: usize = parts.iter().map(|p| p.entries.nrows()).sum();
        let mut m = DMatrix::zeros(dim, dim);
        let mut off = 0;
        for p in parts {
            let d = p.entries.nrows();
            m.view_mut((off, off), (d, d)).copy_from(&p.entries);
            off += d;
        }
        Ok(CovarianceMatrix { entries: m })
    }

    pub fn n_modes(&self) -> usize {
        self.entries.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    /// Smallest eigenvalue of the Hermitian matrix σ + iΩ.
    pub fn physicality_margin(&self) -> f64 {
        let n = self.n_modes();
        let omega = symplectic_form(n).expect("n >= 1").into_matrix();
        let h = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
            Complex64::new(self.entries[(i, j)], omega[(i, j)])
        });
        SymmetricEigen::new(h).eigenvalues.min()
    }

    /// Gaussian partial trace: keeps only `modes`, in the given order.
    pub fn reduce(&self, modes: &[usize]) -> Result<CovarianceMatrix> {
        if modes.is_empty() {
            return Err(validation("cannot reduce to an empty mode set"));
        }
        check_modes(modes, self.n_modes())?;
        let idx = quadrature_indices(modes);
        Ok(CovarianceMatrix {
            entries: select(&self.entries, &idx, &idx),
        })
    }

    /// Relabels modes: output mode `k` is input mode `order[k]`.
    pub fn permute_modes(&self, order: &[usize]) -> Result<CovarianceMatrix> {
        if order.len() != self.n_modes() {
            return Err(validation("mode permutation must cover every mode"));
        }
        self.reduce(order)
    }
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

pub(crate) fn check_modes(modes: &[usize], n_modes: usize) -> Result<()> {
    for (k, &m) in modes.iter().enumerate() {
        if m >= n_modes {
            return Err(validation(format!(
                "mode index {m} out of range for {n_modes}-mode state"
            )));
        }
        if modes[..k].contains(&m) {
            return Err(validation(format!("mode index {m} listed twice")));
        }
    }
    Ok(())
}

/// The direct sum of N blocks [[0, 1], [−1, 0]].
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    entries: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn n_modes(&self) -> usize {
        self.entries.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }
}

pub fn symplectic_form(n_modes: usize) -> Result<SymplecticForm> {
    if n_modes == 0 {
        return Err(domain("symplectic form needs at least one mode"));
    }
    let mut m = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        m[(x_index(k), p_index(k))] = 1.0;
        m[(p_index(k), x_index(k))] = -1.0;
    }
    Ok(SymplecticForm { entries: m })
}

/// N×N unitary acting on the column of annihilation operators.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeUnitary {
    entries: DMatrix<Complex64>,
}

impl ModeUnitary {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 || entries.ncols() != n {
            return Err(validation("mode unitary must be square and non-empty"));
        }
        let prod = &entries * entries.adjoint();
        let dev = prod
            .iter()
            .enumerate()
            .map(|(k, z)| {
                let (i, j) = (k % n, k / n);
                let target = if i == j { 1.0 } else { 0.0 };
                (z - Complex64::new(target, 0.0)).norm()
            })
            .fold(0.0, f64::max);
        if dev > POLICY.unitarity {
            return Err(validation(format!(
                "matrix is not unitary (max |UU† − I| = {dev:.3e})"
            )));
        }
        Ok(ModeUnitary { entries })
    }

    pub fn n_modes(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// U·V, as a unitary.
    pub fn compose(&self, other: &ModeUnitary) -> Result<ModeUnitary> {
        if self.n_modes() != other.n_modes() {
            return Err(validation("unitary dimension mismatch"));
        }
        ModeUnitary::new(&self.entries * &other.entries)
    }
}

/// 2N×2N real matrix preserving the symplectic form.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    entries: DMatrix<f64>,
}

impl SymplecticMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let n = check_square(&entries, "symplectic matrix")?;
        let omega = symplectic_form(n)?.into_matrix();
        let dev = max_abs_diff(&(&entries * &omega * entries.transpose()), &omega);
        if dev > POLICY.symplecticity {
            return Err(validation(format!(
                "matrix is not symplectic (max |SΩSᵀ − Ω| = {dev:.3e})"
            )));
        }
        Ok(SymplecticMatrix { entries })
    }

    pub fn identity(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(domain("n_modes must be at least 1"));
        }
        Ok(SymplecticMatrix {
            entries: DMatrix::identity(2 * n_modes, 2 * n_modes),
        })
    }

    /// Single-mode squeezer diag(e^{−r}, e^{r}).
    pub fn single_mode_squeezer(r: f64) -> Self {
        SymplecticMatrix {
            entries: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                (-r).exp(),
                r.exp(),
            ])),
        }
    }

    /// Single-mode phase rotation by `theta`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        SymplecticMatrix {
            entries: DMatrix::from_row_slice(2, 2, &[c, -s, s, c]),
        }
    }

    /// Block-diagonal direct sum, acting on consecutive modes.
    pub fn direct_sum(parts: &[SymplecticMatrix]) -> Result<Self> {
        if parts.is_empty() {
            return Err(domain("direct sum of zero transformations"));
        }
        let dim: usize = parts.iter().map(|p| p.entries.nrows()).sum();
        let mut m = DMatrix::zeros(dim, dim);
        let mut off = 0;
        for p in parts {
            let d = p.entries.nrows();
            m.view_mut((off, off), (d, d)).copy_from(&p.entries);
            off += d;
        }
        Ok(SymplecticMatrix { entries: m })
    }

    pub fn compose(&self, other: &SymplecticMatrix) -> Result<SymplecticMatrix> {
        if self.entries.nrows() != other.entries.nrows() {
            return Err(validation("symplectic dimension mismatch"));
        }
        Ok(SymplecticMatrix {
            entries: &self.entries * &other.entries,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.entries.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }
}

/// Real quadrature representation of a mode unitary.
///
/// With U = X + iY the (j, k) block is [[X_jk, −Y_jk], [Y_jk, X_jk]].
pub fn unitary_to_symplectic(u: &ModeUnitary) -> Result<SymplecticMatrix> {
    let n = u.n_modes();
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        for k in 0..n {
            let z = u.entries[(j, k)];
            s[(x_index(j), x_index(k))] = z.re;
            s[(x_index(j), p_index(k))] = -z.im;
            s[(p_index(j), x_index(k))] = z.im;
            s[(p_index(j), p_index(k))] = z.re;
        }
    }
    SymplecticMatrix::new(s)
}

/// S σ Sᵀ.
pub fn apply_symplectic(
    s: &SymplecticMatrix,
    sigma: &CovarianceMatrix,
) -> Result<CovarianceMatrix> {
    if s.entries.nrows() != sigma.entries.nrows() {
        return Err(validation(format!(
            "dimension mismatch: symplectic {}x{}, covariance {}x{}",
            s.entries.nrows(),
            s.entries.ncols(),
            sigma.entries.nrows(),
            sigma.entries.ncols()
        )));
    }
    let out = &s.entries * &sigma.entries * s.entries.transpose();
    Ok(CovarianceMatrix {
        entries: symmetrize(out),
    })
}

/// Symplectic eigenvalues of a covariance matrix, sorted descending.
pub fn symplectic_eigenvalues(sigma: &CovarianceMatrix) -> Result<Vec<f64>> {
    symplectic_spectrum(&sigma.entries)
}

/// Symplectic spectrum of any real symmetric 2N×2N matrix.
///
/// The 2N eigenvalues of Ωσ come in pairs ±iν; their moduli are sorted and
/// adjacent entries must agree within the pairing tolerance.
pub fn symplectic_spectrum(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = check_square(m, "matrix")?;
    check_symmetric(m, "matrix")?;
    let omega = symplectic_form(n)?.into_matrix();
    let product = omega * m;
    let mut moduli: Vec<f64> = product
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    let mut out = Vec::with_capacity(n);
    for pair in moduli.chunks(2) {
        let (a, b) = (pair[0], pair[1]);
        let scale = a.max(1.0);
        if (a - b).abs() > POLICY.eigen_pairing * scale {
            return Err(Error::NumericalDegeneracy(format!(
                "eigenvalues of Ωσ do not pair: {a} vs {b}"
            )));
        }
        out.push(0.5 * (a + b));
    }
    Ok(out)
}

/// Ordered pair of disjoint mode sets: steering party first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bipartition {
    steering: Vec<usize>,
    steered: Vec<usize>,
}

impl Bipartition {
    pub fn new(steering: Vec<usize>, steered: Vec<usize>) -> Result<Self> {
        if steering.is_empty() || steered.is_empty() {
            return Err(validation(
                "both parties of a bipartition must be non-empty",
            ));
        }
        let all: Vec<usize> = steering.iter().chain(steered.iter()).copied().collect();
        check_modes(&all, usize::MAX).map_err(|_| {
            validation(format!(
                "bipartition parties overlap or repeat a mode: {steering:?} | {steered:?}"
            ))
        })?;
        Ok(Bipartition { steering, steered })
    }

    pub fn steering_modes(&self) -> &[usize] {
        &self.steering
    }

    pub fn steered_modes(&self) -> &[usize] {
        &self.steered
    }

    /// The same split with the roles exchanged.
    pub fn swapped(&self) -> Bipartition {
        Bipartition {
            steering: self.steered.clone(),
            steered: self.steering.clone(),
        }
    }

    /// Steering modes followed by steered modes.
    pub fn modes(&self) -> Vec<usize> {
        self.steering
            .iter()
            .chain(self.steered.iter())
            .copied()
            .collect()
    }

    pub fn validate_for(&self, n_modes: usize) -> Result<()> {
        check_modes(&self.modes(), n_modes)
    }
}

/// Schur complement B − Cᵀ A⁻¹ C of the steering block.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurComplement {
    pub matrix: DMatrix<f64>,
    /// Set when A was too ill-conditioned and a pseudo-inverse was used.
    pub regularized: bool,
}

/// Schur complement of the steering party's block.
///
/// Modes outside the bipartition are traced out first; the remaining
/// quadratures are permuted so the steering modes come first.
pub fn schur_complement(sigma: &CovarianceMatrix, part: &Bipartition) -> Result<SchurComplement> {
    part.validate_for(sigma.n_modes())?;
    let ia = quadrature_indices(part.steering_modes());
    let ib = quadrature_indices(part.steered_modes());
    let a = select(&sigma.entries, &ia, &ia);
    let b = select(&sigma.entries, &ib, &ib);
    let c = select(&sigma.entries, &ia, &ib);

    let svd = a.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let well_conditioned = smin > 0.0 && smax / smin <= POLICY.max_condition;

    let (a_inv, regularized) = match (well_conditioned, a.clone().try_inverse()) {
        (true, Some(inv)) => (inv, false),
        _ => {
            let pinv = a
                .pseudo_inverse(POLICY.pinv_cutoff * smax)
                .map_err(|e| Error::NumericalDegeneracy(e.to_string()))?;
            (pinv, true)
        }
    };
    let out = b - c.transpose() * a_inv * c;
    Ok(SchurComplement {
        matrix: symmetrize(out),
        regularized,
    })
}

/// Flips the sign of the p row and column of each listed mode.
pub fn partial_transpose(sigma: &CovarianceMatrix, modes: &[usize]) -> Result<DMatrix<f64>> {
    if modes.is_empty() {
        return Err(validation("partial transpose needs at least one mode"));
    }
    check_modes(modes, sigma.n_modes())?;
    let mut m = sigma.entries.clone();
    for &k in modes {
        let p = p_index(k);
        m.row_mut(p).neg_mut();
        m.column_mut(p).neg_mut();
    }
    Ok(m)
}
