//! Parameter sweeps over a family's free transmittance, plus the
//! verification and boundary-location drivers used by the CLI.
//!
//! Quantity names:
//!
//! * `G(X->Y)` steering of mode set Y by mode set X, e.g. `G(A->CD)`
//! * `MONO(k|i|j)` residual G(k->ij) − G(k->i) − G(k->j)
//! * `MONOIN(k|i|j)` residual G(ij->k) − G(i->k) − G(j->k)
//! * `NULL(a)` nullifier variance of mode a
//! * `LN(X|Y)` log-negativity between X and Y

use std::cmp::Ordering;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::error::{validation, Error, Result};
use crate::numeric::{max_abs_diff, POLICY};
use crate::states::{
    build_state, closed_form_cov, expected_nullifier_prefactors, format_modes, nullifier_variances,
    parse_modes, transmittance_from_weight, weights_from_transmittance, FamilyKind, StateFamily,
};
use crate::steering::{
    group_steering, log_negativity, monogamy_residual, monogamy_residuals, one_way_windows,
    MonogamyForm,
};
use crate::symplectic::{symplectic_eigenvalues, Bipartition, CovarianceMatrix};

pub const DEFAULT_POINTS: usize = 201;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    T2,
    Weight,
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t2" => Ok(Axis::T2),
            "weight" => Ok(Axis::Weight),
            other => Err(validation(format!(
                "unknown axis {other:?} (expected t2 or weight)"
            ))),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::T2 => "t2",
            Axis::Weight => "weight",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(validation(format!(
                "unknown format {other:?} (expected csv or json)"
            ))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Quantity {
    Steering {
        from: Vec<usize>,
        to: Vec<usize>,
    },
    Monogamy {
        form: MonogamyForm,
        hub: Vec<usize>,
        i: Vec<usize>,
        j: Vec<usize>,
    },
    Nullifier(usize),
    LogNegativity {
        a: Vec<usize>,
        b: Vec<usize>,
    },
}

pub const QUANTITY_GRAMMAR: &str =
    "G(X->Y), MONO(k|i|j), MONOIN(k|i|j), NULL(a), LN(X|Y) with mode letters A-D, e.g. G(A->CD)";

impl Quantity {
    pub fn steering(from: &[usize], to: &[usize]) -> Self {
        Quantity::Steering {
            from: from.to_vec(),
            to: to.to_vec(),
        }
    }

    fn modes(&self) -> Vec<usize> {
        match self {
            Quantity::Steering { from, to } => from.iter().chain(to).copied().collect(),
            Quantity::Monogamy { hub, i, j, .. } => hub.iter().chain(i).chain(j).copied().collect(),
            Quantity::Nullifier(a) => vec![*a],
            Quantity::LogNegativity { a, b } => a.iter().chain(b).copied().collect(),
        }
    }

    /// Checks that every referenced mode exists in the family.
    pub fn validate_for(&self, kind: FamilyKind) -> Result<()> {
        let n = kind.n_modes();
        if let Some(m) = self.modes().into_iter().find(|&m| m >= n) {
            return Err(validation(format!(
                "{self}: mode {} does not exist in the {kind} family",
                crate::states::mode_letter(m)
            )));
        }
        Ok(())
    }

    fn evaluate(&self, ctx: &PointContext) -> Result<(f64, bool)> {
        match self {
            Quantity::Steering { from, to } => {
                let g = group_steering(&ctx.state, from, to)?;
                Ok((g.value, g.regularized))
            }
            Quantity::Monogamy { form, hub, i, j } => Ok((
                monogamy_residual(&ctx.state, *form, hub, i, j)?.residual,
                false,
            )),
            Quantity::Nullifier(a) => {
                let weights = weights_from_transmittance(ctx.kind, ctx.t2)?;
                let v = nullifier_variances(&ctx.state, &weights)?;
                Ok((v[*a].variance, false))
            }
            Quantity::LogNegativity { a, b } => {
                let part = Bipartition::new(a.clone(), b.clone())?;
                Ok((log_negativity(&ctx.state, &part)?.log_negativity, false))
            }
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Steering { from, to } => {
                write!(f, "G({}->{})", format_modes(from), format_modes(to))
            }
            Quantity::Monogamy { form, hub, i, j } => {
                let name = match form {
                    MonogamyForm::Outgoing => "MONO",
                    MonogamyForm::Incoming => "MONOIN",
                };
                write!(
                    f,
                    "{name}({}|{}|{})",
                    format_modes(hub),
                    format_modes(i),
                    format_modes(j)
                )
            }
            Quantity::Nullifier(a) => write!(f, "NULL({})", format_modes(&[*a])),
            Quantity::LogNegativity { a, b } => {
                write!(f, "LN({}|{})", format_modes(a), format_modes(b))
            }
        }
    }
}

fn disjoint(sets: &[&Vec<usize>]) -> bool {
    let all: Vec<usize> = sets.iter().flat_map(|s| s.iter().copied()).collect();
    all.iter().enumerate().all(|(k, m)| !all[..k].contains(m))
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            validation(format!(
                "invalid quantity {s:?}; valid names: {QUANTITY_GRAMMAR}"
            ))
        };
        let s_trim = s.trim();
        let open = s_trim.find('(').ok_or_else(bad)?;
        if !s_trim.ends_with(')') {
            return Err(bad());
        }
        let head = &s_trim[..open];
        let body = &s_trim[open + 1..s_trim.len() - 1];
        let modes = |t: &str| parse_modes(t).map_err(|_| bad());
        let q = match head {
            "G" => {
                let (x, y) = body.split_once("->").ok_or_else(bad)?;
                Quantity::Steering {
                    from: modes(x)?,
                    to: modes(y)?,
                }
            }
            "MONO" | "MONOIN" => {
                let parts: Vec<&str> = body.split('|').collect();
                if parts.len() != 3 {
                    return Err(bad());
                }
                Quantity::Monogamy {
                    form: if head == "MONO" {
                        MonogamyForm::Outgoing
                    } else {
                        MonogamyForm::Incoming
                    },
                    hub: modes(parts[0])?,
                    i: modes(parts[1])?,
                    j: modes(parts[2])?,
                }
            }
            "NULL" => {
                let m = modes(body)?;
                if m.len() != 1 {
                    return Err(bad());
                }
                Quantity::Nullifier(m[0])
            }
            "LN" => {
                let (x, y) = body.split_once('|').ok_or_else(bad)?;
                Quantity::LogNegativity {
                    a: modes(x)?,
                    b: modes(y)?,
                }
            }
            _ => return Err(bad()),
        };
        let ok = match &q {
            Quantity::Steering { from, to } => disjoint(&[from, to]),
            Quantity::Monogamy { hub, i, j, .. } => disjoint(&[hub, i, j]),
            Quantity::Nullifier(_) => true,
            Quantity::LogNegativity { a, b } => disjoint(&[a, b]),
        };
        if !ok {
            return Err(validation(format!("{s:?}: parties must be disjoint")));
        }
        Ok(q)
    }
}

/// Splits a comma-separated quantity list. Commas never occur inside a
/// quantity name.
pub fn parse_quantities(list: &str) -> Result<Vec<Quantity>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(Quantity::from_str)
        .collect()
}

/// Every ordered single-mode pair, every 1-vs-rest split in both directions,
/// and for the four-mode family the A/B versus CD splits.
pub fn default_quantities(kind: FamilyKind) -> Vec<Quantity> {
    let n = kind.n_modes();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out.push(Quantity::steering(&[i], &[j]));
            }
        }
    }
    for i in 0..n {
        let rest: Vec<usize> = (0..n).filter(|&m| m != i).collect();
        out.push(Quantity::steering(&[i], &rest));
        out.push(Quantity::steering(&rest, &[i]));
    }
    if kind == FamilyKind::FourMode {
        // The grouped CD party of the four-mode figures.
        for i in [0, 1] {
            out.push(Quantity::steering(&[i], &[2, 3]));
            out.push(Quantity::steering(&[2, 3], &[i]));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub family: FamilyKind,
    pub axis: Axis,
    /// Inclusive range in units of the axis; `None` selects the family default.
    pub range: Option<(f64, f64)>,
    pub points: usize,
    pub r: f64,
    pub quantities: Vec<Quantity>,
    pub format: OutputFormat,
}

impl SweepConfig {
    pub fn new(family: FamilyKind) -> Self {
        SweepConfig {
            family,
            axis: Axis::Weight,
            range: None,
            points: DEFAULT_POINTS,
            r: crate::states::DEFAULT_SQUEEZING,
            quantities: default_quantities(family),
            format: OutputFormat::Csv,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(validation("grid needs at least 2 points"));
        }
        if !self.r.is_finite() || self.r < 0.0 {
            return Err(validation(format!(
                "squeezing must be finite and >= 0, got {}",
                self.r
            )));
        }
        if self.quantities.is_empty() {
            return Err(validation("no quantities requested"));
        }
        for q in &self.quantities {
            q.validate_for(self.family)?;
        }
        Ok(())
    }

    /// (T₂, weight) pairs of the grid, after clamping to the transmittance
    /// window.
    pub fn grid(&self) -> Result<Vec<(f64, f64)>> {
        family_grid(self.family, self.axis, self.range, self.points)
    }
}

/// Weight range spanned by the clamped transmittance window.
pub fn clamped_weight_range(kind: FamilyKind) -> (f64, f64) {
    let (lo, hi) = POLICY.t2_clamp;
    (
        kind.weight(lo).expect("in range"),
        kind.weight(hi).expect("in range"),
    )
}

/// Default weight range of each family's published curves.
pub fn default_weight_range(kind: FamilyKind) -> (f64, f64) {
    match kind {
        FamilyKind::Tripartite => (0.2, 3.0),
        FamilyKind::FourMode => clamped_weight_range(kind),
    }
}

pub fn family_grid(
    kind: FamilyKind,
    axis: Axis,
    range: Option<(f64, f64)>,
    points: usize,
) -> Result<Vec<(f64, f64)>> {
    if points < 2 {
        return Err(validation("grid needs at least 2 points"));
    }
    let lerp = |lo: f64, hi: f64, k: usize| {
        if k + 1 == points {
            hi
        } else {
            lo + (hi - lo) * k as f64 / (points - 1) as f64
        }
    };
    let (clo, chi) = match axis {
        Axis::T2 => POLICY.t2_clamp,
        Axis::Weight => clamped_weight_range(kind),
    };
    let (lo, hi) = range.unwrap_or(match axis {
        Axis::T2 => POLICY.t2_clamp,
        Axis::Weight => default_weight_range(kind),
    });
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(validation(format!("non-finite range {lo}:{hi}")));
    }
    let (lo, hi) = (lo.max(clo), hi.min(chi));
    if lo.partial_cmp(&hi) != Some(Ordering::Less) {
        return Err(validation(format!(
            "range is empty after clamping to [{clo}, {chi}] on the {axis} axis"
        )));
    }
    (0..points)
        .map(|k| {
            let x = lerp(lo, hi, k);
            match axis {
                Axis::T2 => Ok((x, kind.weight(x)?)),
                Axis::Weight => Ok((transmittance_from_weight(kind, x)?, x)),
            }
        })
        .collect()
}

struct PointContext {
    kind: FamilyKind,
    t2: f64,
    state: CovarianceMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub t2: f64,
    pub weight: f64,
    pub values: Vec<f64>,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub columns: Vec<String>,
    pub records: Vec<SweepRecord>,
}

pub fn evaluate_point(
    kind: FamilyKind,
    r: f64,
    t2: f64,
    weight: f64,
    quantities: &[Quantity],
) -> Result<SweepRecord> {
    let state = build_state(&StateFamily::new(kind, t2, r)?)?;
    let ctx = PointContext { kind, t2, state };
    let mut values = Vec::with_capacity(quantities.len());
    let mut flags = Vec::new();
    for q in quantities {
        let (v, regularized) = q.evaluate(&ctx)?;
        values.push(v);
        if regularized {
            flags.push(format!("regularized:{q}"));
        }
    }
    Ok(SweepRecord {
        t2,
        weight,
        values,
        flags,
    })
}

/// Evaluates every grid point. Points are computed in parallel and
/// returned in grid order.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutput> {
    config.validate()?;
    let grid = config.grid()?;
    let records = grid
        .par_iter()
        .map(|&(t2, w)| evaluate_point(config.family, config.r, t2, w, &config.quantities))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepOutput {
        columns: config.quantities.iter().map(|q| q.to_string()).collect(),
        records,
    })
}

/// Decimal rendering rounded to 12 significant digits.
pub fn format_number(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() {
            "0".into()
        } else {
            x.to_string()
        };
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("valid float");
    format!("{rounded}")
}

pub fn write_csv<W: Write>(out: W, data: &SweepOutput) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let mut header = vec!["t2".to_string(), "weight".to_string()];
    header.extend(data.columns.iter().cloned());
    header.push("flags".into());
    w.write_record(&header)?;
    for rec in &data.records {
        let mut row = vec![format_number(rec.t2), format_number(rec.weight)];
        row.extend(rec.values.iter().map(|&v| format_number(v)));
        row.push(rec.flags.join(";"));
        w.write_record(&row)?;
    }
    w.flush()
}

/// Parses a file written by [`write_csv`].
pub fn read_csv<R: Read>(input: R) -> Result<SweepOutput> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(input);
    let headers = rdr
        .headers()
        .map_err(|e| validation(e.to_string()))?
        .clone();
    let n = headers.len();
    if n < 3 || &headers[0] != "t2" || &headers[1] != "weight" || &headers[n - 1] != "flags" {
        return Err(validation("unexpected sweep CSV header"));
    }
    let columns: Vec<String> = headers
        .iter()
        .skip(2)
        .take(n - 3)
        .map(String::from)
        .collect();
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|e| validation(format!("{s:?}: {e}")))
    };
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| validation(e.to_string()))?;
        let values = (2..n - 1)
            .map(|k| num(&row[k]))
            .collect::<Result<Vec<_>>>()?;
        let flags = if row[n - 1].is_empty() {
            Vec::new()
        } else {
            row[n - 1].split(';').map(String::from).collect()
        };
        records.push(SweepRecord {
            t2: num(&row[0])?,
            weight: num(&row[1])?,
            values,
            flags,
        });
    }
    Ok(SweepOutput { columns, records })
}

fn rounded(x: f64) -> Value {
    let v: f64 = format_number(x).parse().unwrap_or(x);
    json!(v)
}

pub fn sweep_json(config: &SweepConfig, data: &SweepOutput) -> Value {
    let records: Vec<Value> = data
        .records
        .iter()
        .map(|rec| {
            let mut obj = Map::new();
            obj.insert("t2".into(), rounded(rec.t2));
            obj.insert("weight".into(), rounded(rec.weight));
            for (name, &v) in data.columns.iter().zip(&rec.values) {
                obj.insert(name.clone(), rounded(v));
            }
            obj.insert("flags".into(), json!(rec.flags.join(";")));
            Value::Object(obj)
        })
        .collect();
    json!({
        "config": {
            "family": config.family.to_string(),
            "axis": config.axis.to_string(),
            "range": config.grid().ok().map(|g| {
                let pick = |p: (f64, f64)| match config.axis { Axis::T2 => p.0, Axis::Weight => p.1 };
                vec![rounded(pick(g[0])), rounded(pick(g[g.len() - 1]))]
            }),
            "points": config.points,
            "r": config.r,
            "quantities": data.columns,
            "weight_name": config.family.weight_name(),
        },
        "records": records,
    })
}

pub fn write_json<W: Write>(
    mut out: W,
    config: &SweepConfig,
    data: &SweepOutput,
) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, &sweep_json(config, data))?;
    out.write_all(b"\n")
}

// ---------------------------------------------------------------------------
// Verification

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed margin-relevant value (difference or residual).
    pub worst: f64,
    /// Grid location of the worst value, or a note.
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub family: FamilyKind,
    pub r: f64,
    pub points: usize,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "verify family={} r={} points={}",
            self.family, self.r, self.points
        )?;
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<28} worst={:+.3e} {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.worst,
                c.detail
            )?;
        }
        write!(
            f,
            "{}",
            if self.passed() {
                "all checks passed"
            } else {
                "verification FAILED"
            }
        )
    }
}

/// Tracks the worst value of a check across the grid.
struct Tracker {
    name: &'static str,
    worst: f64,
    at: String,
    maximize: bool,
    note: Option<String>,
}

impl Tracker {
    fn max(name: &'static str) -> Self {
        Tracker {
            name,
            worst: f64::NEG_INFINITY,
            at: String::new(),
            maximize: true,
            note: None,
        }
    }

    fn min(name: &'static str) -> Self {
        Tracker {
            name,
            worst: f64::INFINITY,
            at: String::new(),
            maximize: false,
            note: None,
        }
    }

    fn observe(&mut self, v: f64, t2: f64, weight: f64, what: &str) {
        let worse = if self.maximize {
            v > self.worst
        } else {
            v < self.worst
        };
        if worse || v.is_nan() {
            self.worst = v;
            self.at = format!(
                "at t2={} weight={} ({what})",
                format_number(t2),
                format_number(weight)
            );
        }
    }

    fn merge(mut self, other: Tracker) -> Tracker {
        let worse = if self.maximize {
            other.worst > self.worst
        } else {
            other.worst < self.worst
        };
        if worse || other.worst.is_nan() {
            self.worst = other.worst;
            self.at = other.at;
        }
        self
    }

    fn finish(self, pass: impl Fn(f64) -> bool) -> CheckResult {
        let passed = pass(self.worst);
        CheckResult {
            name: self.name,
            passed,
            worst: self.worst,
            detail: self.note.unwrap_or(self.at),
        }
    }
}

/// Monogamy triples checked for each family: all single-mode triples, and
/// for the square the grouped triple {A}, {C,D}, {B}.
pub fn monogamy_triples(kind: FamilyKind) -> Vec<[Vec<usize>; 3]> {
    match kind {
        FamilyKind::Tripartite => vec![[vec![0], vec![1], vec![2]]],
        FamilyKind::FourMode => vec![
            [vec![0], vec![2, 3], vec![1]],
            [vec![0], vec![1], vec![2]],
            [vec![0], vec![1], vec![3]],
            [vec![0], vec![2], vec![3]],
            [vec![1], vec![2], vec![3]],
        ],
    }
}

/// Worst-case values of every invariant at a single grid point.
fn verify_point(kind: FamilyKind, r: f64, t2: f64, weight: f64) -> Result<Vec<Tracker>> {
    let family = StateFamily::new(kind, t2, r)?;
    let built = build_state(&family)?;
    let closed = closed_form_cov(&family)?;
    let n = kind.n_modes();

    let mut equiv = Tracker::max("closed_form_vs_propagated");
    equiv.observe(
        max_abs_diff(built.matrix(), closed.matrix()),
        t2,
        weight,
        "max entry diff",
    );

    let mut purity = Tracker::max("purity");
    for nu in symplectic_eigenvalues(&built)? {
        purity.observe((nu - 1.0).abs(), t2, weight, "|nu - 1|");
    }
    let mut physical = Tracker::min("physicality");
    physical.observe(
        built.physicality_margin(),
        t2,
        weight,
        "min eig(sigma + i Omega)",
    );

    let weights = weights_from_transmittance(kind, t2)?;
    let expected = expected_nullifier_prefactors(kind, t2)?;
    let measured = nullifier_variances(&built, &weights)?;
    let vacuum = nullifier_variances(&build_state(&StateFamily::new(kind, t2, 0.0)?)?, &weights)?;
    let mut null_formula = Tracker::max("nullifier_formulas");
    let mut null_scaling = Tracker::max("nullifier_scaling");
    for ((m, e), v0) in measured.iter().zip(&expected).zip(&vacuum) {
        null_formula.observe(
            (m.variance - e * (-2.0 * r).exp()).abs(),
            t2,
            weight,
            &m.label,
        );
        null_scaling.observe(
            (m.variance * (2.0 * r).exp() - v0.variance).abs(),
            t2,
            weight,
            &m.label,
        );
    }

    let mut mono = Tracker::min("monogamy");
    for triple in monogamy_triples(kind) {
        for res in monogamy_residuals(&built, [&triple[0], &triple[1], &triple[2]])? {
            mono.observe(res.residual, t2, weight, &res.label());
        }
    }

    let mut reid = Tracker::max("reid_exclusivity");
    reid.observe(0.0, t2, weight, "no shared steered mode");
    for k in 0..n {
        let steerers: Vec<usize> = (0..n)
            .filter(|&i| i != k)
            .filter_map(|i| match group_steering(&built, &[i], &[k]) {
                Ok(g) if g.exists() => Some(Ok(i)),
                Ok(_) => None,
                Err(e) => Some(Err(e)),
            })
            .collect::<Result<Vec<_>>>()?;
        if steerers.len() > 1 {
            reid.observe(
                steerers.len() as f64 - 1.0,
                t2,
                weight,
                &format!(
                    "{} steered by {}",
                    format_modes(&[k]),
                    format_modes(&steerers)
                ),
            );
        }
    }

    let mut roundtrip = Tracker::max("weight_roundtrip");
    let back = kind.weight(transmittance_from_weight(kind, weight)?)?;
    roundtrip.observe(
        (back - weight).abs() / weight.max(1.0),
        t2,
        weight,
        "|w(T2(w)) - w|",
    );

    let mut ent = Tracker::min("entanglement_persistence");
    if r > 0.0 {
        // Every bipartition, each listed once as the side holding mode A.
        for mask in 0..(1u32 << (n - 1)) - 1 {
            let side: Vec<usize> = std::iter::once(0)
                .chain((1..n).filter(|&m| mask >> (m - 1) & 1 == 1))
                .collect();
            let rest: Vec<usize> = (0..n).filter(|m| !side.contains(m)).collect();
            let label = format!("LN({}|{})", format_modes(&side), format_modes(&rest));
            let part = Bipartition::new(side, rest)?;
            ent.observe(log_negativity(&built, &part)?.log_negativity, t2, weight, &label);
        }
    } else {
        ent.observe(f64::INFINITY, t2, weight, "skipped");
        ent.note = Some("skipped at r = 0 (vacuum)".into());
    }

    let mut trackers = vec![
        equiv,
        purity,
        physical,
        null_formula,
        null_scaling,
        mono,
        reid,
        roundtrip,
        ent,
    ];

    if kind == FamilyKind::FourMode {
        let mut sym = Tracker::max("cd_exchange_symmetry");
        let swapped = built.permute_modes(&[0, 1, 3, 2])?;
        sym.observe(
            max_abs_diff(built.matrix(), swapped.matrix()),
            t2,
            weight,
            "covariance",
        );
        let swap = |v: &[usize]| -> Vec<usize> {
            v.iter()
                .map(|&m| match m {
                    2 => 3,
                    3 => 2,
                    m => m,
                })
                .collect()
        };
        for q in default_quantities(kind).into_iter().chain(
            [
                (vec![0], vec![2]),
                (vec![1], vec![2]),
                (vec![2], vec![0]),
                (vec![2], vec![1]),
            ]
            .into_iter()
            .map(|(a, b)| Quantity::Steering { from: a, to: b }),
        ) {
            if let Quantity::Steering { from, to } = q {
                let a = group_steering(&built, &from, &to)?.value;
                let b = group_steering(&built, &swap(&from), &swap(&to))?.value;
                sym.observe(
                    (a - b).abs(),
                    t2,
                    weight,
                    &format!("G({}->{})", format_modes(&from), format_modes(&to)),
                );
            }
        }
        trackers.push(sym);
    }
    Ok(trackers)
}

/// Runs every invariant over the family grid.
pub fn run_verify(
    kind: FamilyKind,
    r: f64,
    range: Option<(f64, f64)>,
    points: usize,
) -> Result<VerifyReport> {
    let grid = family_grid(kind, Axis::Weight, range, points)?;
    let per_point = grid
        .par_iter()
        .map(|&(t2, w)| verify_point(kind, r, t2, w))
        .collect::<Result<Vec<_>>>()?;
    let merged = per_point
        .into_iter()
        .reduce(|acc, next| acc.into_iter().zip(next).map(|(a, b)| a.merge(b)).collect())
        .expect("grid has at least two points");
    let checks = merged
        .into_iter()
        .map(|t| {
            let name = t.name;
            t.finish(move |w| match name {
                "closed_form_vs_propagated" => w <= 1e-10,
                "purity" => w <= 1e-9,
                "physicality" => w >= -POLICY.bona_fide,
                "nullifier_formulas" => w <= 1e-10,
                "nullifier_scaling" => w <= 1e-9,
                "monogamy" => w >= -1e-9,
                "reid_exclusivity" => w == 0.0,
                "weight_roundtrip" => w <= 1e-14,
                "entanglement_persistence" => w > 1e-6,
                "cd_exchange_symmetry" => w <= 1e-10,
                _ => false,
            })
        })
        .collect();
    Ok(VerifyReport {
        family: kind,
        r,
        points,
        checks,
    })
}

// ---------------------------------------------------------------------------
// Boundaries

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition {
    /// G becomes positive as the weight increases.
    Onset,
    /// G drops to zero as the weight increases.
    Vanish,
    /// Lower edge of a one-way window of the quantity.
    OneWayLower,
    /// Upper edge of a one-way window of the quantity.
    OneWayUpper,
    None,
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Transition::Onset => "onset",
            Transition::Vanish => "vanish",
            Transition::OneWayLower => "one_way_lower",
            Transition::OneWayUpper => "one_way_upper",
            Transition::None => "none in range",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryRow {
    pub quantity: String,
    pub transition: Transition,
    pub weight: Option<f64>,
    pub t2: Option<f64>,
}

/// Pairwise and one-vs-two steering splits of a family.
pub fn boundary_quantities(kind: FamilyKind) -> Vec<(Vec<usize>, Vec<usize>)> {
    let n = kind.n_modes();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out.push((vec![i], vec![j]));
            }
        }
    }
    for i in 0..n {
        let others: Vec<usize> = (0..n).filter(|&m| m != i).collect();
        for a in 0..others.len() {
            for b in a + 1..others.len() {
                let pair = vec![others[a], others[b]];
                out.push((vec![i], pair.clone()));
                out.push((pair, vec![i]));
            }
        }
    }
    out
}

/// Zero crossings and one-way window edges of every pairwise and 1-vs-2
/// steering quantity over the clamped weight axis.
pub fn run_boundaries(kind: FamilyKind, r: f64, points: usize) -> Result<Vec<BoundaryRow>> {
    let (lo, hi) = clamped_weight_range(kind);
    let grid = family_grid(kind, Axis::Weight, Some((lo, hi)), points)?;
    let splits = boundary_quantities(kind);
    let rows = splits
        .par_iter()
        .map(|(from, to)| -> Result<Vec<BoundaryRow>> {
            let part = Bipartition::new(from.clone(), to.clone())?;
            let name = Quantity::steering(from, to).to_string();
            let mut rows = Vec::new();
            let positive = grid
                .iter()
                .map(|&(_, w)| {
                    crate::steering::steering_at_weight(kind, r, &part, w).map(|g| g.exists())
                })
                .collect::<Result<Vec<bool>>>()?;
            for k in 1..grid.len() {
                if positive[k] != positive[k - 1] {
                    let bracket = (grid[k - 1].1, grid[k].1);
                    if let crate::steering::ZeroCrossing::Found { weight, t2, onset } =
                        crate::steering::find_zero_crossing(kind, r, &part, bracket)?
                    {
                        rows.push(BoundaryRow {
                            quantity: name.clone(),
                            transition: if onset {
                                Transition::Onset
                            } else {
                                Transition::Vanish
                            },
                            weight: Some(weight),
                            t2: Some(t2),
                        });
                    }
                }
            }
            for win in one_way_windows(kind, r, &part, (lo, hi), points)? {
                for (edge, open, tr) in [
                    (win.lower, win.lower_open, Transition::OneWayLower),
                    (win.upper, win.upper_open, Transition::OneWayUpper),
                ] {
                    if !open {
                        rows.push(BoundaryRow {
                            quantity: name.clone(),
                            transition: tr,
                            weight: Some(edge),
                            t2: Some(transmittance_from_weight(kind, edge)?),
                        });
                    }
                }
            }
            if rows.is_empty() {
                rows.push(BoundaryRow {
                    quantity: name,
                    transition: Transition::None,
                    weight: None,
                    t2: None,
                });
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().flatten().collect())
}

pub fn write_boundaries<W: Write>(
    out: W,
    rows: &[BoundaryRow],
    format: OutputFormat,
) -> std::io::Result<()> {
    let opt = |x: Option<f64>| x.map(format_number).unwrap_or_default();
    match format {
        OutputFormat::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(out);
            w.write_record(["quantity", "transition", "weight", "t2"])?;
            for row in rows {
                w.write_record([
                    row.quantity.clone(),
                    row.transition.to_string(),
                    opt(row.weight),
                    opt(row.t2),
                ])?;
            }
            w.flush()
        }
        OutputFormat::Json => {
            let arr: Vec<Value> = rows
                .iter()
                .map(|row| {
                    json!({
                        "quantity": row.quantity,
                        "transition": row.transition.to_string(),
                        "weight": row.weight.map(rounded),
                        "t2": row.t2.map(rounded),
                    })
                })
                .collect();
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, &arr)?;
            out.write_all(b"\n")
        }
    }
}

// ---------------------------------------------------------------------------
// State dump

#[derive(Debug, Clone, PartialEq)]
pub struct StateDump {
    pub family: StateFamily,
    pub closed_form: CovarianceMatrix,
    pub propagated: CovarianceMatrix,
    pub max_diff: f64,
    pub weights: crate::states::GraphWeights,
    pub nullifiers: Vec<crate::states::NullifierVariance>,
    pub symplectic_eigenvalues: Vec<f64>,
}

pub fn state_dump(kind: FamilyKind, t2: f64, r: f64) -> Result<StateDump> {
    let family = StateFamily::new(kind, t2, r)?;
    let closed_form = closed_form_cov(&family)?;
    let propagated = build_state(&family)?;
    let weights = weights_from_transmittance(kind, t2)?;
    Ok(StateDump {
        family,
        max_diff: max_abs_diff(closed_form.matrix(), propagated.matrix()),
        nullifiers: nullifier_variances(&propagated, &weights)?,
        symplectic_eigenvalues: symplectic_eigenvalues(&propagated)?,
        closed_form,
        propagated,
        weights,
    })
}

fn matrix_rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<Value>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| rounded(m[(i, j)])).collect())
        .collect()
}

pub fn write_state<W: Write>(
    out: W,
    dump: &StateDump,
    format: OutputFormat,
) -> std::io::Result<()> {
    match format {
        OutputFormat::Json => {
            let v = json!({
                "family": dump.family.kind.to_string(),
                "t2": dump.family.t2,
                "r": dump.family.r,
                "weight": rounded(dump.family.weight()),
                "closed_form": matrix_rows(dump.closed_form.matrix()),
                "propagated": matrix_rows(dump.propagated.matrix()),
                "max_diff": dump.max_diff,
                "weights": matrix_rows(dump.weights.matrix()),
                "nullifiers": dump.nullifiers.iter().map(|n| json!({
                    "label": n.label,
                    "variance": rounded(n.variance),
                })).collect::<Vec<_>>(),
                "symplectic_eigenvalues": dump.symplectic_eigenvalues.iter().map(|&v| rounded(v)).collect::<Vec<_>>(),
            });
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, &v)?;
            out.write_all(b"\n")
        }
        OutputFormat::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(out);
            w.write_record(["section", "row", "col", "value"])?;
            for (section, m) in [
                ("closed_form", dump.closed_form.matrix()),
                ("propagated", dump.propagated.matrix()),
                ("weights", dump.weights.matrix()),
            ] {
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        w.write_record([
                            section.to_string(),
                            i.to_string(),
                            j.to_string(),
                            format_number(m[(i, j)]),
                        ])?;
                    }
                }
            }
            w.write_record([
                "max_diff".to_string(),
                String::new(),
                String::new(),
                format_number(dump.max_diff),
            ])?;
            for (k, n) in dump.nullifiers.iter().enumerate() {
                w.write_record([
                    "nullifier".to_string(),
                    k.to_string(),
                    n.label.clone(),
                    format_number(n.variance),
                ])?;
            }
            for (k, &v) in dump.symplectic_eigenvalues.iter().enumerate() {
                w.write_record([
                    "symplectic_eigenvalue".to_string(),
                    k.to_string(),
                    String::new(),
                    format_number(v),
                ])?;
            }
            w.flush()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantity_names_round_trip() {
        for name in [
            "G(A->CD)",
            "G(CD->B)",
            "MONO(A|B|C)",
            "MONOIN(B|A|CD)",
            "NULL(C)",
            "LN(A|BC)",
        ] {
            assert_eq!(name.parse::<Quantity>().unwrap().to_string(), name);
        }
    }

    #[test]
    fn invalid_quantities() {
        for bad in [
            "G(A-B)",
            "G(A->A)",
            "X(A)",
            "NULL(AB)",
            "MONO(A|B)",
            "G(a->B)",
            "LN(A|A)",
            "G(A->B",
        ] {
            let err = bad.parse::<Quantity>().unwrap_err();
            assert!(matches!(err, Error::Validation(_)), "{bad}");
        }
        let err = "Z(A)".parse::<Quantity>().unwrap_err().to_string();
        assert!(err.contains("G(X->Y)"));
        let q: Quantity = "G(A->D)".parse().unwrap();
        assert!(q.validate_for(FamilyKind::Tripartite).is_err());
        assert!(q.validate_for(FamilyKind::FourMode).is_ok());
    }

    #[test]
    fn quantity_list() {
        let qs = parse_quantities("G(A->B), G(B->A),MONO(A|B|C)").unwrap();
        assert_eq!(qs.len(), 3);
        assert!(parse_quantities("G(A->B),bogus").is_err());
    }

    #[test]
    fn number_format() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(2.0), "2");
        assert_eq!(format_number(-1234.56789012345), "-1234.56789012");
        assert!(!format_number(1e-20).contains('e'));
    }

    #[test]
    fn grid_clamping() {
        let g = family_grid(FamilyKind::FourMode, Axis::T2, Some((0.0, 1.0)), 5).unwrap();
        assert_eq!(g[0].0, 0.001);
        assert_eq!(g[4].0, 0.999);
        let g = family_grid(FamilyKind::FourMode, Axis::Weight, Some((0.0, 2.0)), 3).unwrap();
        assert!(g[2].1 < std::f64::consts::SQRT_2);
        assert!(family_grid(FamilyKind::FourMode, Axis::T2, Some((0.5, 0.5)), 3).is_err());
        assert!(family_grid(FamilyKind::FourMode, Axis::T2, None, 1).is_err());
        let g = family_grid(FamilyKind::Tripartite, Axis::Weight, None, 201).unwrap();
        assert_eq!(g.len(), 201);
        assert_eq!(g[0].1, 0.2);
        assert_eq!(g[200].1, 3.0);
    }

    #[test]
    fn vacuum_sweep_is_zero() {
        let mut cfg = SweepConfig::new(FamilyKind::Tripartite);
        cfg.r = 0.0;
        cfg.points = 7;
        let out = run_sweep(&cfg).unwrap();
        assert!(out
            .records
            .iter()
            .all(|r| r.values.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn csv_round_trip() {
        let mut cfg = SweepConfig::new(FamilyKind::FourMode);
        cfg.points = 5;
        cfg.quantities = parse_quantities("G(A->B),NULL(C),LN(A|BCD),MONO(A|CD|B)").unwrap();
        let out = run_sweep(&cfg).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &out).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t2,weight,G(A->B),NULL(C),LN(A|BCD),MONO(A|CD|B),flags\n"));
        assert!(!text.contains('\r'));
        let back = read_csv(&buf[..]).unwrap();
        assert_eq!(back.columns, out.columns);
        for (a, b) in back.records.iter().zip(&out.records) {
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y).abs() <= 1e-11 * y.abs().max(1e-300) + 1e-300);
            }
        }
        let mut again = Vec::new();
        write_csv(&mut again, &back).unwrap();
        assert_eq!(again, buf);
    }

    #[test]
    fn state_dump_contents() {
        let d = state_dump(FamilyKind::Tripartite, 0.3, 0.345).unwrap();
        assert!(d.max_diff <= 1e-10);
        assert_eq!(d.nullifiers.len(), 3);
        let mut buf = Vec::new();
        write_state(&mut buf, &d, OutputFormat::Json).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["closed_form"].as_array().unwrap().len(), 6);
        let mut buf = Vec::new();
        write_state(&mut buf, &d, OutputFormat::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text
            .lines()
            .any(|l| l.starts_with("nullifier,2,p_C - C_BC x_B,")));
    }
}
