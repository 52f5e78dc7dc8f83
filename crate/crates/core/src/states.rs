//! Weighted graph states prepared from squeezed inputs on beam-splitter
//! networks, their closed-form covariance matrices, weight factors and
//! nullifier variances.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{domain, validation, Error, Result};
use crate::symplectic::{
    apply_symplectic, p_index, unitary_to_symplectic, x_index, CovarianceMatrix, ModeUnitary,
};

/// Squeezing used for the published curves ("3 dB").
pub const DEFAULT_SQUEEZING: f64 = 0.345;

const TRIPARTITE_T1: f64 = 1.0 / 3.0;

/// Letter label of a mode index (0 → A).
pub fn mode_letter(mode: usize) -> char {
    debug_assert!(mode < 26);
    (b'A' + mode as u8) as char
}

/// Parses a run of mode letters such as `"CD"` into indices.
pub fn parse_modes(s: &str) -> Result<Vec<usize>> {
    if s.is_empty() {
        return Err(validation("empty mode set"));
    }
    let mut out = Vec::with_capacity(s.len());
    for c in s.chars() {
        if !c.is_ascii_uppercase() {
            return Err(validation(format!("invalid mode letter {c:?} in {s:?}")));
        }
        let m = (c as u8 - b'A') as usize;
        if out.contains(&m) {
            return Err(validation(format!("mode {c} repeated in {s:?}")));
        }
        out.push(m);
    }
    Ok(out)
}

pub fn format_modes(modes: &[usize]) -> String {
    modes.iter().map(|&m| mode_letter(m)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// x variance e^{−2r}.
    AmplitudeSqueezed,
    /// p variance e^{−2r}.
    PhaseSqueezed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezedInput {
    pub r: f64,
    pub orientation: Orientation,
}

impl SqueezedInput {
    pub fn new(r: f64, orientation: Orientation) -> Result<Self> {
        if !r.is_finite() || r < 0.0 {
            return Err(domain(format!(
                "squeezing must be finite and >= 0, got {r}"
            )));
        }
        Ok(SqueezedInput { r, orientation })
    }

    pub fn covariance(&self) -> CovarianceMatrix {
        let (lo, hi) = ((-2.0 * self.r).exp(), (2.0 * self.r).exp());
        let d = match self.orientation {
            Orientation::AmplitudeSqueezed => [lo, hi],
            Orientation::PhaseSqueezed => [hi, lo],
        };
        CovarianceMatrix::new(DMatrix::from_row_slice(2, 2, &[d[0], 0.0, 0.0, d[1]]))
            .expect("squeezed vacuum is a valid state")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    /// Linear chain A–B–C.
    Tripartite,
    /// Square with diagonal pairs (A, B) and (C, D).
    FourMode,
}

impl FamilyKind {
    pub fn n_modes(self) -> usize {
        match self {
            FamilyKind::Tripartite => 3,
            FamilyKind::FourMode => 4,
        }
    }

    /// Input orientations fixed by the preparation scheme.
    pub fn orientations(self) -> &'static [Orientation] {
        use Orientation::*;
        match self {
            FamilyKind::Tripartite => &[AmplitudeSqueezed, PhaseSqueezed, AmplitudeSqueezed],
            FamilyKind::FourMode => &[
                PhaseSqueezed,
                AmplitudeSqueezed,
                AmplitudeSqueezed,
                PhaseSqueezed,
            ],
        }
    }

    /// Name of the weight factor used as the sweep axis.
    pub fn weight_name(self) -> &'static str {
        match self {
            FamilyKind::Tripartite => "C_BC",
            FamilyKind::FourMode => "C_A",
        }
    }

    /// Weight factor that parameterizes the family (C_BC or C_A).
    pub fn weight(self, t2: f64) -> Result<f64> {
        check_t2(t2)?;
        Ok(match self {
            FamilyKind::Tripartite => (t2 / (1.0 - t2)).sqrt(),
            FamilyKind::FourMode => (2.0 * t2).sqrt(),
        })
    }

    /// Open interval of valid weight factors.
    pub fn weight_domain(self) -> (f64, f64) {
        match self {
            FamilyKind::Tripartite => (0.0, f64::INFINITY),
            FamilyKind::FourMode => (0.0, std::f64::consts::SQRT_2),
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyKind::Tripartite => "tripartite",
            FamilyKind::FourMode => "fourmode",
        })
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tripartite" => Ok(FamilyKind::Tripartite),
            "fourmode" => Ok(FamilyKind::FourMode),
            other => Err(validation(format!(
                "unknown family {other:?} (expected tripartite or fourmode)"
            ))),
        }
    }
}

fn check_t2(t2: f64) -> Result<()> {
    if !(t2 > 0.0 && t2 < 1.0) {
        return Err(domain(format!(
            "T2 must lie strictly inside (0, 1), got {t2}"
        )));
    }
    Ok(())
}

fn check_r(r: f64) -> Result<()> {
    if !r.is_finite() || r < 0.0 {
        return Err(domain(format!(
            "squeezing must be finite and >= 0, got {r}"
        )));
    }
    Ok(())
}

/// One member of a paper family: free transmittance T₂ and common squeezing r.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateFamily {
    pub kind: FamilyKind,
    pub t2: f64,
    pub r: f64,
}

impl StateFamily {
    pub fn new(kind: FamilyKind, t2: f64, r: f64) -> Result<Self> {
        check_t2(t2)?;
        check_r(r)?;
        Ok(StateFamily { kind, t2, r })
    }

    /// Member selected by its weight factor instead of T₂.
    pub fn from_weight(kind: FamilyKind, weight: f64, r: f64) -> Result<Self> {
        StateFamily::new(kind, transmittance_from_weight(kind, weight)?, r)
    }

    pub fn inputs(&self) -> Vec<SqueezedInput> {
        self.kind
            .orientations()
            .iter()
            .map(|&orientation| SqueezedInput {
                r: self.r,
                orientation,
            })
            .collect()
    }

    pub fn network(&self) -> Result<ModeUnitary> {
        match self.kind {
            FamilyKind::Tripartite => tripartite_network_unitary(self.t2),
            FamilyKind::FourMode => fourmode_network_unitary(self.t2),
        }
    }

    pub fn weight(&self) -> f64 {
        self.kind
            .weight(self.t2)
            .expect("validated on construction")
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Three-mode network with T₁ = 1/3.
pub fn tripartite_network_unitary(t2: f64) -> Result<ModeUnitary> {
    check_t2(t2)?;
    let t1 = TRIPARTITE_T1;
    let entries = DMatrix::from_row_slice(
        3,
        3,
        &[
            c(-t1.sqrt(), 0.0),
            c(-(1.0 - t1).sqrt(), 0.0),
            c(0.0, 0.0),
            c(0.0, ((1.0 - t1) * (1.0 - t2)).sqrt()),
            c(0.0, -(t1 * (1.0 - t2)).sqrt()),
            c(t2.sqrt(), 0.0),
            c(-((1.0 - t1) * t2).sqrt(), 0.0),
            c((t1 * t2).sqrt(), 0.0),
            c(0.0, -(1.0 - t2).sqrt()),
        ],
    );
    ModeUnitary::new(entries)
}

/// Four-mode network with T₁ = 1/5 and T₃ = 1/2.
pub fn fourmode_network_unitary(t2: f64) -> Result<ModeUnitary> {
    check_t2(t2)?;
    let s = f64::sqrt;
    let entries = DMatrix::from_row_slice(
        4,
        4,
        &[
            c(-s(1.0 - t2), 0.0),
            c(-2.0 * s(t2 / 5.0), 0.0),
            c(0.0, -s(t2 / 5.0)),
            c(0.0, 0.0),
            c(s(t2), 0.0),
            c(-2.0 * s((1.0 - t2) / 5.0), 0.0),
            c(0.0, -s((1.0 - t2) / 5.0)),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 1.0 / s(10.0)),
            c(s(2.0 / 5.0), 0.0),
            c(-1.0 / s(2.0), 0.0),
            c(0.0, 0.0),
            c(0.0, 1.0 / s(10.0)),
            c(s(2.0 / 5.0), 0.0),
            c(1.0 / s(2.0), 0.0),
        ],
    );
    ModeUnitary::new(entries)
}

/// Propagates independent squeezed inputs through a passive network.
pub fn build_from_network(
    inputs: &[SqueezedInput],
    network: &ModeUnitary,
) -> Result<CovarianceMatrix> {
    if inputs.len() != network.n_modes() {
        return Err(validation(format!(
            "{} inputs for a {}-mode network",
            inputs.len(),
            network.n_modes()
        )));
    }
    let parts: Vec<CovarianceMatrix> = inputs.iter().map(SqueezedInput::covariance).collect();
    let sigma_in = CovarianceMatrix::direct_sum(&parts)?;
    let s = unitary_to_symplectic(network)?;
    apply_symplectic(&s, &sigma_in)
}

/// Output state of the family's network on its squeezed inputs.
pub fn build_state(family: &StateFamily) -> Result<CovarianceMatrix> {
    build_from_network(&family.inputs(), &family.network()?)
}

/// Off-diagonal couplings of the closed forms: swap [[0,1],[1,0]] and
/// parity diag(1,−1).
fn swap_coupling(v: f64) -> [f64; 4] {
    [0.0, v, v, 0.0]
}

fn parity_coupling(v: f64) -> [f64; 4] {
    [v, 0.0, 0.0, -v]
}

fn diag_block(a: f64, b: f64) -> [f64; 4] {
    [a, 0.0, 0.0, b]
}

fn assemble(blocks: &[Vec<[f64; 4]>]) -> Result<CovarianceMatrix> {
    let n = blocks.len();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for (j, row) in blocks.iter().enumerate() {
        for (k, b) in row.iter().enumerate() {
            m[(x_index(j), x_index(k))] = b[0];
            m[(x_index(j), p_index(k))] = b[1];
            m[(p_index(j), x_index(k))] = b[2];
            m[(p_index(j), p_index(k))] = b[3];
        }
    }
    CovarianceMatrix::new(m)
}

/// Closed-form covariance matrix of the linear tripartite family.
pub fn closed_form_tripartite_cov(t2: f64, r: f64) -> Result<CovarianceMatrix> {
    check_t2(t2)?;
    check_r(r)?;
    let (up, dn) = ((2.0 * r).exp(), (-2.0 * r).exp());
    let f = (2.0 * (1.0 - t2)).sqrt() * (up - dn) / 3.0;
    let g = (2.0 * t2).sqrt() * (dn - up) / 3.0;
    let h = 2.0 * (t2 * (1.0 - t2)).sqrt() * (up - dn) / 3.0;
    let sa = diag_block(dn / 3.0 + 2.0 * up / 3.0, 2.0 * dn / 3.0 + up / 3.0);
    let sb = diag_block(
        (2.0 * (1.0 - t2) * up + (1.0 + 2.0 * t2) * dn) / 3.0,
        (2.0 * (1.0 - t2) * dn + (1.0 + 2.0 * t2) * up) / 3.0,
    );
    let sc = diag_block(
        (3.0 - 2.0 * t2) / 3.0 * up + 2.0 * t2 / 3.0 * dn,
        (3.0 - 2.0 * t2) / 3.0 * dn + 2.0 * t2 / 3.0 * up,
    );
    assemble(&[
        vec![sa, swap_coupling(f), parity_coupling(g)],
        vec![swap_coupling(f), sb, swap_coupling(h)],
        vec![parity_coupling(g), swap_coupling(h), sc],
    ])
}

/// Closed-form covariance matrix of the four-mode square family.
pub fn closed_form_fourmode_cov(t2: f64, r: f64) -> Result<CovarianceMatrix> {
    check_t2(t2)?;
    check_r(r)?;
    let (up, dn) = ((2.0 * r).exp(), (-2.0 * r).exp());
    let l = 4.0 * (t2 * (1.0 - t2)).sqrt() * (dn - up) / 5.0;
    let m = (2.0 * t2).sqrt() * (up - dn) / 5.0;
    let n = (2.0 * (1.0 - t2)).sqrt() * (up - dn) / 5.0;
    let s = m;
    let v = n;
    let w = 2.0 * (dn - up) / 5.0;
    let sa = diag_block(
        (5.0 - 4.0 * t2) / 5.0 * up + 4.0 * t2 / 5.0 * dn,
        (5.0 - 4.0 * t2) / 5.0 * dn + 4.0 * t2 / 5.0 * up,
    );
    let sb = diag_block(
        ((1.0 + 4.0 * t2) * up + 4.0 * (1.0 - t2) * dn) / 5.0,
        ((1.0 + 4.0 * t2) * dn + 4.0 * (1.0 - t2) * up) / 5.0,
    );
    let scd = diag_block(
        3.0 * up / 5.0 + 2.0 * dn / 5.0,
        3.0 * dn / 5.0 + 2.0 * up / 5.0,
    );
    assemble(&[
        vec![sa, parity_coupling(l), swap_coupling(m), swap_coupling(s)],
        vec![parity_coupling(l), sb, swap_coupling(n), swap_coupling(v)],
        vec![swap_coupling(m), swap_coupling(n), scd, parity_coupling(w)],
        vec![swap_coupling(s), swap_coupling(v), parity_coupling(w), scd],
    ])
}

pub fn closed_form_cov(family: &StateFamily) -> Result<CovarianceMatrix> {
    match family.kind {
        FamilyKind::Tripartite => closed_form_tripartite_cov(family.t2, family.r),
        FamilyKind::FourMode => closed_form_fourmode_cov(family.t2, family.r),
    }
}

/// Symmetric weighted adjacency matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphWeights {
    weights: DMatrix<f64>,
}

impl GraphWeights {
    pub fn new(weights: DMatrix<f64>) -> Result<Self> {
        let n = weights.nrows();
        if n == 0 || weights.ncols() != n {
            return Err(validation("weight matrix must be square and non-empty"));
        }
        for i in 0..n {
            if weights[(i, i)] != 0.0 {
                return Err(validation(format!(
                    "weight matrix has nonzero diagonal at {i}"
                )));
            }
            for j in 0..i {
                if weights[(i, j)] != weights[(j, i)] {
                    return Err(validation(format!(
                        "weight matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(GraphWeights { weights })
    }

    fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Self {
        let mut w = DMatrix::zeros(n, n);
        for &(a, b, v) in edges {
            w[(a, b)] = v;
            w[(b, a)] = v;
        }
        GraphWeights { weights: w }
    }

    pub fn n_modes(&self) -> usize {
        self.weights.nrows()
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.weights[(a, b)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn neighbours(&self, a: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.n_modes())
            .map(move |b| (b, self.weights[(a, b)]))
            .filter(|&(_, w)| w != 0.0)
    }
}

/// Weight factors of a family member.
///
/// Tripartite: C_AB = 1/√(2(1−T₂)), C_BC = √(T₂/(1−T₂)).
/// Four-mode: C_A = √(2T₂) on (A,C),(A,D) and C_B = √(2(1−T₂)) on (B,C),(B,D).
pub fn weights_from_transmittance(kind: FamilyKind, t2: f64) -> Result<GraphWeights> {
    check_t2(t2)?;
    Ok(match kind {
        FamilyKind::Tripartite => {
            let c_ab = 1.0 / (2.0 * (1.0 - t2)).sqrt();
            let c_bc = (t2 / (1.0 - t2)).sqrt();
            GraphWeights::from_edges(3, &[(0, 1, c_ab), (1, 2, c_bc)])
        }
        FamilyKind::FourMode => {
            let c_a = (2.0 * t2).sqrt();
            let c_b = (2.0 * (1.0 - t2)).sqrt();
            GraphWeights::from_edges(4, &[(0, 2, c_a), (0, 3, c_a), (1, 2, c_b), (1, 3, c_b)])
        }
    })
}

/// Inverse of the family's weight map: T₂ from C_BC (tripartite) or C_A
/// (four-mode).
pub fn transmittance_from_weight(kind: FamilyKind, weight: f64) -> Result<f64> {
    let (lo, hi) = kind.weight_domain();
    if !(weight > lo && weight < hi) {
        return Err(domain(format!(
            "{} = {weight} outside the open interval ({lo}, {hi})",
            kind.weight_name()
        )));
    }
    Ok(match kind {
        FamilyKind::Tripartite => {
            let w2 = weight * weight;
            w2 / (1.0 + w2)
        }
        FamilyKind::FourMode => weight * weight / 2.0,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullifierVariance {
    pub mode: usize,
    /// e.g. `p_B - C_AB x_A - C_BC x_C`.
    pub label: String,
    pub variance: f64,
}

/// Var(p_a − Σ_b C_ab x_b) for every mode a, as quadratic forms vᵀσv.
pub fn nullifier_variances(
    sigma: &CovarianceMatrix,
    weights: &GraphWeights,
) -> Result<Vec<NullifierVariance>> {
    let n = sigma.n_modes();
    if weights.n_modes() != n {
        return Err(validation(format!(
            "weights for {} modes, state has {n}",
            weights.n_modes()
        )));
    }
    let m = sigma.matrix();
    Ok((0..n)
        .map(|a| {
            let mut v = nalgebra::DVector::zeros(2 * n);
            v[p_index(a)] = 1.0;
            let mut label = format!("p_{}", mode_letter(a));
            for (b, w) in weights.neighbours(a) {
                v[x_index(b)] -= w;
                let (lo, hi) = (a.min(b), a.max(b));
                label.push_str(&format!(
                    " - C_{}{} x_{}",
                    mode_letter(lo),
                    mode_letter(hi),
                    mode_letter(b)
                ));
            }
            NullifierVariance {
                mode: a,
                label,
                variance: (v.transpose() * m * &v)[(0, 0)],
            }
        })
        .collect())
}

/// Printed nullifier prefactors: Var = prefactor · e^{−2r}, one per mode.
pub fn expected_nullifier_prefactors(kind: FamilyKind, t2: f64) -> Result<Vec<f64>> {
    check_t2(t2)?;
    Ok(match kind {
        FamilyKind::Tripartite => vec![
            (3.0 - 2.0 * t2) / (2.0 - 2.0 * t2),
            3.0 / (2.0 - 2.0 * t2),
            1.0 / (1.0 - t2),
        ],
        FamilyKind::FourMode => vec![1.0 + 4.0 * t2, 5.0 - 4.0 * t2, 3.0, 3.0],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::max_abs_diff;

    fn unitarity_defect(u: &ModeUnitary) -> f64 {
        let m = u.matrix();
        let p = m * m.adjoint();
        let n = m.nrows();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (p[(i, j)] - if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) }).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn tripartite_first_row() {
        let u = tripartite_network_unitary(0.5).unwrap();
        let row: Vec<Complex64> = u.matrix().row(0).iter().cloned().collect();
        assert!((row[0] - c(-(1.0f64 / 3.0).sqrt(), 0.0)).norm() < 1e-15);
        assert!((row[1] - c(-(2.0f64 / 3.0).sqrt(), 0.0)).norm() < 1e-15);
        assert_eq!(row[2], c(0.0, 0.0));
    }

    #[test]
    fn fourmode_rows_three_and_four() {
        let u = fourmode_network_unitary(0.5).unwrap();
        let m = u.matrix();
        for k in 0..3 {
            assert_eq!(m[(2, k)], m[(3, k)]);
        }
        assert!((m[(2, 3)] + c(1.0 / 2f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!((m[(3, 3)] - c(1.0 / 2f64.sqrt(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn networks_are_unitary() {
        for k in 1..100 {
            let t2 = k as f64 / 100.0;
            assert!(unitarity_defect(&tripartite_network_unitary(t2).unwrap()) < 1e-12);
            assert!(unitarity_defect(&fourmode_network_unitary(t2).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn transmittance_domain_errors() {
        for t2 in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(
                tripartite_network_unitary(t2),
                Err(Error::Domain(_))
            ));
            assert!(matches!(
                fourmode_network_unitary(t2),
                Err(Error::Domain(_))
            ));
            assert!(matches!(
                weights_from_transmittance(FamilyKind::Tripartite, t2),
                Err(Error::Domain(_))
            ));
            assert!(matches!(
                closed_form_tripartite_cov(t2, 0.3),
                Err(Error::Domain(_))
            ));
        }
        assert!(matches!(
            closed_form_fourmode_cov(0.5, -0.1),
            Err(Error::Domain(_))
        ));
        assert!(StateFamily::new(FamilyKind::FourMode, 0.5, -1.0).is_err());
    }

    #[test]
    fn zero_squeezing_gives_vacuum() {
        for kind in [FamilyKind::Tripartite, FamilyKind::FourMode] {
            for t2 in [0.1, 0.5, 0.9] {
                let fam = StateFamily::new(kind, t2, 0.0).unwrap();
                let n = 2 * kind.n_modes();
                let id = DMatrix::identity(n, n);
                assert!(max_abs_diff(build_state(&fam).unwrap().matrix(), &id) < 1e-15);
                assert!(max_abs_diff(closed_form_cov(&fam).unwrap().matrix(), &id) < 1e-15);
            }
        }
    }

    #[test]
    fn tripartite_block_a_at_half() {
        let r: f64 = 0.345;
        let s = closed_form_tripartite_cov(0.5, r).unwrap();
        let (up, dn) = ((2.0 * r).exp(), (-2.0 * r).exp());
        assert!((s.matrix()[(0, 0)] - (dn + 2.0 * up) / 3.0).abs() < 1e-15);
        assert!((s.matrix()[(1, 1)] - (2.0 * dn + up) / 3.0).abs() < 1e-15);
        assert_eq!(s.matrix()[(0, 1)], 0.0);
    }

    #[test]
    fn fourmode_blocks_c_and_d() {
        for (t2, r) in [(0.2f64, 0.345f64), (0.7, 0.6)] {
            let s = closed_form_fourmode_cov(t2, r).unwrap();
            let (up, dn) = ((2.0 * r).exp(), (-2.0 * r).exp());
            let x = 3.0 * up / 5.0 + 2.0 * dn / 5.0;
            let p = 3.0 * dn / 5.0 + 2.0 * up / 5.0;
            for k in [2, 3] {
                assert!((s.matrix()[(2 * k, 2 * k)] - x).abs() < 1e-14);
                assert!((s.matrix()[(2 * k + 1, 2 * k + 1)] - p).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn tripartite_coupling_f() {
        let s = closed_form_tripartite_cov(0.3, 0.345).unwrap();
        let f = (2.0f64 * 0.7).sqrt() * (0.69f64.exp() - (-0.69f64).exp()) / 3.0;
        assert!((s.matrix()[(0, 3)] - f).abs() < 1e-15);
        assert!((s.matrix()[(1, 2)] - f).abs() < 1e-15);
        let b =
            build_state(&StateFamily::new(FamilyKind::Tripartite, 0.3, 0.345).unwrap()).unwrap();
        assert!((b.matrix()[(0, 3)] - f).abs() < 1e-12);
    }

    #[test]
    fn unweighted_points() {
        let w = weights_from_transmittance(FamilyKind::Tripartite, 0.5).unwrap();
        assert!((w.get(0, 1) - 1.0).abs() < 1e-15);
        assert!((w.get(1, 2) - 1.0).abs() < 1e-15);
        assert_eq!(w.get(0, 2), 0.0);
        let w = weights_from_transmittance(FamilyKind::FourMode, 0.5).unwrap();
        for (a, b) in [(0, 2), (0, 3), (1, 2), (1, 3)] {
            assert!((w.get(a, b) - 1.0).abs() < 1e-15);
        }
        assert_eq!(w.get(0, 1), 0.0);
        assert_eq!(w.get(2, 3), 0.0);
    }

    #[test]
    fn fourmode_weight_circle() {
        for k in 1..50 {
            let t2 = k as f64 / 50.0;
            let w = weights_from_transmittance(FamilyKind::FourMode, t2).unwrap();
            let (ca, cb) = (w.get(0, 2), w.get(1, 2));
            assert!((ca * ca + cb * cb - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn weight_inverse() {
        assert!(
            (transmittance_from_weight(FamilyKind::Tripartite, 1.0).unwrap() - 0.5).abs() < 1e-16
        );
        assert!(
            (transmittance_from_weight(FamilyKind::FourMode, 1.0).unwrap() - 0.5).abs() < 1e-16
        );
        let t2 = transmittance_from_weight(FamilyKind::FourMode, 0.71).unwrap();
        assert!((t2 - 0.25205).abs() < 1e-12);
        assert!((FamilyKind::FourMode.weight(t2).unwrap() - 0.71).abs() < 1e-14);
        assert!(matches!(
            transmittance_from_weight(FamilyKind::FourMode, 1.5),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            transmittance_from_weight(FamilyKind::Tripartite, 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn nullifier_examples() {
        let r: f64 = 0.345;
        for t2 in [0.2, 0.5, 0.8] {
            let s = closed_form_tripartite_cov(t2, r).unwrap();
            let w = weights_from_transmittance(FamilyKind::Tripartite, t2).unwrap();
            let v = nullifier_variances(&s, &w).unwrap();
            assert_eq!(v[2].label, "p_C - C_BC x_B");
            assert!((v[2].variance - (-2.0 * r).exp() / (1.0 - t2)).abs() < 1e-12);
            let s = closed_form_fourmode_cov(t2, r).unwrap();
            let w = weights_from_transmittance(FamilyKind::FourMode, t2).unwrap();
            let v = nullifier_variances(&s, &w).unwrap();
            assert_eq!(v[2].label, "p_C - C_AC x_A - C_BC x_B");
            assert!((v[2].variance - 3.0 * (-2.0 * r).exp()).abs() < 1e-12);
        }
        let s = closed_form_tripartite_cov(0.5, 0.0).unwrap();
        let w = weights_from_transmittance(FamilyKind::Tripartite, 0.5).unwrap();
        let v = nullifier_variances(&s, &w).unwrap();
        // (3 − 2T₂)/(2 − 2T₂) at T₂ = 1/2, equal to 1 + C_AB² on vacuum.
        assert_eq!(v[0].label, "p_A - C_AB x_B");
        assert!((v[0].variance - 2.0).abs() < 1e-14);
        assert!((v[1].variance - 3.0).abs() < 1e-14);
        let wrong = weights_from_transmittance(FamilyKind::FourMode, 0.5).unwrap();
        assert!(matches!(
            nullifier_variances(&s, &wrong),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn graph_weights_validation() {
        assert!(GraphWeights::new(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0])).is_err());
        assert!(GraphWeights::new(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 0.0])).is_err());
        assert!(GraphWeights::new(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).is_ok());
    }

    #[test]
    fn mode_letters() {
        assert_eq!(parse_modes("CD").unwrap(), vec![2, 3]);
        assert_eq!(format_modes(&[0, 2]), "AC");
        assert!(parse_modes("").is_err());
        assert!(parse_modes("AA").is_err());
        assert!(parse_modes("a").is_err());
    }
}
