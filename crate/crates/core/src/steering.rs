//! Gaussian EPR steering, monogamy residuals and log-negativity.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{validation, Result};
use crate::numeric::POLICY;
use crate::states::{build_state, format_modes, FamilyKind, StateFamily};
use crate::symplectic::{
    partial_transpose, schur_complement, symplectic_spectrum, Bipartition, CovarianceMatrix,
};

/// Steerability G of the steered party by the steering party.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringValue {
    pub value: f64,
    /// Symplectic eigenvalues of the Schur complement, descending.
    pub eigenvalues: Vec<f64>,
    pub regularized: bool,
}

impl SteeringValue {
    /// Eigenvalues entering the sum, i.e. those below 1 − cutoff.
    pub fn contributing(&self) -> impl Iterator<Item = f64> + '_ {
        self.eigenvalues
            .iter()
            .copied()
            .filter(|&nu| nu < 1.0 - POLICY.eigen_cutoff)
    }

    pub fn exists(&self) -> bool {
        self.value > POLICY.positivity
    }
}

fn steering_from_eigenvalues(eigenvalues: Vec<f64>, regularized: bool) -> SteeringValue {
    let sum: f64 = eigenvalues
        .iter()
        .filter(|&&nu| nu < 1.0 - POLICY.eigen_cutoff)
        .map(|nu| -nu.ln())
        .sum();
    SteeringValue {
        value: sum.max(0.0),
        eigenvalues,
        regularized,
    }
}

/// G^{A→B} for the steering/steered split in `part`. Modes outside the
/// bipartition are traced out.
pub fn gaussian_steering(sigma: &CovarianceMatrix, part: &Bipartition) -> Result<SteeringValue> {
    let schur = schur_complement(sigma, part)?;
    let nu = symplectic_spectrum(&schur.matrix)?;
    Ok(steering_from_eigenvalues(nu, schur.regularized))
}

/// Steering between two mode groups; a thin wrapper over
/// [`gaussian_steering`] that builds the bipartition.
pub fn group_steering(
    sigma: &CovarianceMatrix,
    steering: &[usize],
    steered: &[usize],
) -> Result<SteeringValue> {
    let part = Bipartition::new(steering.to_vec(), steered.to_vec())?;
    gaussian_steering(sigma, &part)
}

/// All ordered single-mode steering values; the diagonal is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringTable {
    entries: Vec<Vec<Option<SteeringValue>>>,
}

impl SteeringTable {
    pub fn n_modes(&self) -> usize {
        self.entries.len()
    }

    /// G^{from→to}; `None` on the diagonal.
    pub fn get(&self, from: usize, to: usize) -> Option<&SteeringValue> {
        self.entries.get(from)?.get(to)?.as_ref()
    }

    pub fn value(&self, from: usize, to: usize) -> f64 {
        self.get(from, to).map_or(0.0, |v| v.value)
    }
}

pub fn pairwise_steering_table(sigma: &CovarianceMatrix) -> Result<SteeringTable> {
    let n = sigma.n_modes();
    if n < 2 {
        return Err(validation("steering table needs at least two modes"));
    }
    let mut entries = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            row.push(if i == j {
                None
            } else {
                Some(group_steering(sigma, &[i], &[j])?)
            });
        }
        entries.push(row);
    }
    Ok(SteeringTable { entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MonogamyForm {
    /// G^{k→(i,j)} − G^{k→i} − G^{k→j}
    Outgoing,
    /// G^{(i,j)→k} − G^{i→k} − G^{j→k}
    Incoming,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonogamyResidual {
    pub form: MonogamyForm,
    pub hub: Vec<usize>,
    pub i: Vec<usize>,
    pub j: Vec<usize>,
    pub residual: f64,
}

impl MonogamyResidual {
    pub fn label(&self) -> String {
        let (k, i, j) = (
            format_modes(&self.hub),
            format_modes(&self.i),
            format_modes(&self.j),
        );
        match self.form {
            MonogamyForm::Outgoing => format!("G({k}->{i}{j}) - G({k}->{i}) - G({k}->{j})"),
            MonogamyForm::Incoming => format!("G({i}{j}->{k}) - G({i}->{k}) - G({j}->{k})"),
        }
    }
}

fn disjoint(parties: &[&[usize]]) -> bool {
    let all: Vec<usize> = parties.iter().flat_map(|p| p.iter().copied()).collect();
    all.iter().enumerate().all(|(k, m)| !all[..k].contains(m))
}

/// One CKW-type residual with `hub` as the distinguished party.
pub fn monogamy_residual(
    sigma: &CovarianceMatrix,
    form: MonogamyForm,
    hub: &[usize],
    i: &[usize],
    j: &[usize],
) -> Result<MonogamyResidual> {
    if hub.is_empty() || i.is_empty() || j.is_empty() || !disjoint(&[hub, i, j]) {
        return Err(validation(format!(
            "monogamy parties must be non-empty and disjoint: {hub:?}, {i:?}, {j:?}"
        )));
    }
    let ij: Vec<usize> = i.iter().chain(j).copied().collect();
    let residual = match form {
        MonogamyForm::Outgoing => {
            group_steering(sigma, hub, &ij)?.value
                - group_steering(sigma, hub, i)?.value
                - group_steering(sigma, hub, j)?.value
        }
        MonogamyForm::Incoming => {
            group_steering(sigma, &ij, hub)?.value
                - group_steering(sigma, i, hub)?.value
                - group_steering(sigma, j, hub)?.value
        }
    };
    Ok(MonogamyResidual {
        form,
        hub: hub.to_vec(),
        i: i.to_vec(),
        j: j.to_vec(),
        residual,
    })
}

/// Both residual forms for each choice of hub among three parties.
pub fn monogamy_residuals(
    sigma: &CovarianceMatrix,
    parties: [&[usize]; 3],
) -> Result<Vec<MonogamyResidual>> {
    let mut out = Vec::with_capacity(6);
    for k in 0..3 {
        let (i, j) = match k {
            0 => (parties[1], parties[2]),
            1 => (parties[0], parties[2]),
            _ => (parties[0], parties[1]),
        };
        for form in [MonogamyForm::Outgoing, MonogamyForm::Incoming] {
            out.push(monogamy_residual(sigma, form, parties[k], i, j)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DirectionalityClass {
    NoSteering,
    OneWayForward,
    OneWayBackward,
    TwoWay,
}

impl fmt::Display for DirectionalityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DirectionalityClass::NoSteering => "no_steering",
            DirectionalityClass::OneWayForward => "one_way_forward",
            DirectionalityClass::OneWayBackward => "one_way_backward",
            DirectionalityClass::TwoWay => "two_way",
        })
    }
}

pub fn classify_directionality(
    forward: &SteeringValue,
    backward: &SteeringValue,
) -> DirectionalityClass {
    match (forward.exists(), backward.exists()) {
        (true, true) => DirectionalityClass::TwoWay,
        (true, false) => DirectionalityClass::OneWayForward,
        (false, true) => DirectionalityClass::OneWayBackward,
        (false, false) => DirectionalityClass::NoSteering,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementValue {
    pub bipartition: Bipartition,
    pub log_negativity: f64,
}

/// Logarithmic negativity across `part`, after tracing out other modes.
pub fn log_negativity(sigma: &CovarianceMatrix, part: &Bipartition) -> Result<EntanglementValue> {
    part.validate_for(sigma.n_modes())?;
    let reduced = sigma.reduce(&part.modes())?;
    let n_a = part.steering_modes().len();
    let transposed: Vec<usize> = (n_a..reduced.n_modes()).collect();
    let pt = partial_transpose(&reduced, &transposed)?;
    let ln: f64 = symplectic_spectrum(&pt)?
        .into_iter()
        .filter(|&nu| nu < 1.0 - POLICY.eigen_cutoff)
        .map(|nu| -nu.ln())
        .sum();
    Ok(EntanglementValue {
        bipartition: part.clone(),
        log_negativity: ln.max(0.0),
    })
}

/// G of `part` for the family member with the given weight factor.
pub fn steering_at_weight(
    kind: FamilyKind,
    r: f64,
    part: &Bipartition,
    weight: f64,
) -> Result<SteeringValue> {
    let state = build_state(&StateFamily::from_weight(kind, weight, r)?)?;
    gaussian_steering(&state, part)
}

/// Where a steering quantity switches between zero and positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZeroCrossing {
    Found {
        weight: f64,
        t2: f64,
        /// True when G is zero below the boundary and positive above.
        onset: bool,
    },
    /// G has the same zero/positive status at both ends of the bracket.
    NotFound,
}

/// Bisects a boolean predicate of the weight between `lo` and `hi`, which
/// must have different values there. Returns the midpoint of the final
/// bracket.
fn bisect<F>(mut pred: F, mut lo: f64, mut hi: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<bool>,
{
    let at_lo = pred(lo)?;
    while hi - lo > POLICY.bisection {
        let mid = 0.5 * (lo + hi);
        if pred(mid)? == at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Locates the boundary of the region where G^{part} > 0 inside the weight
/// bracket by bisection to the policy tolerance.
pub fn find_zero_crossing(
    kind: FamilyKind,
    r: f64,
    part: &Bipartition,
    bracket: (f64, f64),
) -> Result<ZeroCrossing> {
    let (lo, hi) = bracket;
    if lo.partial_cmp(&hi) != Some(Ordering::Less) {
        return Err(validation(format!("empty weight bracket [{lo}, {hi}]")));
    }
    let positive = |w: f64| steering_at_weight(kind, r, part, w).map(|g| g.exists());
    let (at_lo, at_hi) = (positive(lo)?, positive(hi)?);
    if at_lo == at_hi {
        return Ok(ZeroCrossing::NotFound);
    }
    let weight = bisect(positive, lo, hi)?;
    Ok(ZeroCrossing::Found {
        weight,
        t2: crate::states::transmittance_from_weight(kind, weight)?,
        onset: !at_lo,
    })
}

/// Maximal weight interval on which steering is one-way from the steering
/// to the steered party of `part`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneWayWindow {
    pub lower: f64,
    pub upper: f64,
    /// The lower edge is the scan bracket's end rather than a located boundary.
    pub lower_open: bool,
    pub upper_open: bool,
}

/// Scans `points` weights over the bracket and refines every edge of the
/// regions where G^{A→B} > 0 and G^{B→A} = 0.
pub fn one_way_windows(
    kind: FamilyKind,
    r: f64,
    part: &Bipartition,
    bracket: (f64, f64),
    points: usize,
) -> Result<Vec<OneWayWindow>> {
    let (lo, hi) = bracket;
    if lo.partial_cmp(&hi) != Some(Ordering::Less) || points < 2 {
        return Err(validation(
            "one-way scan needs a non-empty bracket and >= 2 points",
        ));
    }
    let reverse = part.swapped();
    let one_way = |w: f64| -> Result<bool> {
        let state = build_state(&StateFamily::from_weight(kind, w, r)?)?;
        let forward = gaussian_steering(&state, part)?;
        let backward = gaussian_steering(&state, &reverse)?;
        Ok(classify_directionality(&forward, &backward) == DirectionalityClass::OneWayForward)
    };
    let grid: Vec<f64> = (0..points)
        .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
        .collect();
    let flags = grid
        .iter()
        .map(|&w| one_way(w))
        .collect::<Result<Vec<bool>>>()?;

    let mut windows = Vec::new();
    let mut start: Option<(f64, bool)> = if flags[0] { Some((lo, true)) } else { None };
    for k in 1..points {
        match (flags[k - 1], flags[k]) {
            (false, true) => start = Some((bisect(one_way, grid[k - 1], grid[k])?, false)),
            (true, false) => {
                let edge = bisect(one_way, grid[k - 1], grid[k])?;
                let (lower, lower_open) = start.take().expect("window opened");
                windows.push(OneWayWindow {
                    lower,
                    upper: edge,
                    lower_open,
                    upper_open: false,
                });
            }
            _ => {}
        }
    }
    if let Some((lower, lower_open)) = start {
        windows.push(OneWayWindow {
            lower,
            upper: hi,
            lower_open,
            upper_open: true,
        });
    }
    Ok(windows)
}
