//! Exact outcome tables and the statistics built on them.
//!
//! [`exact_joint_distribution`] sums `⟨ψ|M_{k,l}|ψ⟩` over the full truncated
//! support and is the reference every Monte-Carlo result is compared with.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{domain, Error, Result};
use crate::measurement::{
    average_fidelity, neumaier_sum, total_operator, weak_outcome_operator, StrongOutcome,
    WeakModel,
};
use crate::qubit::{apply_kraus, Complex2x2, PureState, QubitState};
use crate::simulator::RunRecord;

/// Probabilities (or frequencies) over `(k, l)`, rows ordered like the model.
#[derive(Clone, Debug, PartialEq)]
pub struct JointTable {
    pub ks: Vec<i64>,
    /// `p[i][l-1]`
    pub p: Vec<[f64; 2]>,
}

impl JointTable {
    pub fn total(&self) -> f64 {
        neumaier_sum(self.p.iter().flat_map(|r| r.iter().copied()))
    }

    pub fn marginal_k(&self) -> Vec<f64> {
        self.p.iter().map(|r| r[0] + r[1]).collect()
    }

    pub fn prob(&self, i: usize, l: StrongOutcome) -> f64 {
        self.p[i][l.index() as usize - 1]
    }

    pub fn selected_mass(&self, l: StrongOutcome) -> f64 {
        neumaier_sum((0..self.ks.len()).map(|i| self.prob(i, l)))
    }
}

/// `p(k, l) = tr(M_{k,l} ρ)` for every outcome pair.
pub fn exact_joint_distribution<S: QubitState + ?Sized>(state: &S, model: &WeakModel) -> JointTable {
    let mut ks = Vec::with_capacity(model.len());
    let mut p = Vec::with_capacity(model.len());
    for o in model.outcomes() {
        let mut row = [0.0; 2];
        for l in StrongOutcome::BOTH {
            let t = total_operator(model, o.k, l).expect("k from the model support").matrix;
            row[l.index() as usize - 1] = state.expectation(&(t.adjoint() * t)).max(0.0);
        }
        ks.push(o.k);
        p.push(row);
    }
    JointTable { ks, p }
}

/// Event counts over `(k, l)`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointCounts {
    pub ks: Vec<i64>,
    pub counts: Vec<[u64; 2]>,
    pub n: u64,
}

impl JointCounts {
    pub fn new(model: &WeakModel) -> Self {
        Self {
            ks: model.outcomes().iter().map(|o| o.k).collect(),
            counts: vec![[0; 2]; model.len()],
            n: 0,
        }
    }

    pub fn from_records<'a>(
        model: &WeakModel,
        records: impl IntoIterator<Item = &'a RunRecord>,
    ) -> Result<Self> {
        let mut c = Self::new(model);
        for r in records {
            c.push(model, r)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, model: &WeakModel, r: &RunRecord) -> Result<()> {
        let i = model
            .index_of(r.k)
            .ok_or_else(|| domain(format!("run {}: k = {} outside the model support", r.run_index, r.k)))?;
        self.counts[i][r.l.index() as usize - 1] += 1;
        self.n += 1;
        Ok(())
    }

    pub fn marginal_k(&self) -> Vec<u64> {
        self.counts.iter().map(|c| c[0] + c[1]).collect()
    }

    pub fn frequencies(&self) -> JointTable {
        let n = self.n.max(1) as f64;
        JointTable {
            ks: self.ks.clone(),
            p: self
                .counts
                .iter()
                .map(|c| [c[0] as f64 / n, c[1] as f64 / n])
                .collect(),
        }
    }
}

/// How many events (or how much probability) a post-selection kept.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Selected {
    Count(u64),
    Mass(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PostSelectionStats {
    pub l_selected: u8,
    pub selected: Selected,
    pub mean_k: f64,
    /// Conditional sample standard deviation over `√n`; zero in exact mode.
    pub stderr_k: f64,
}

/// Mean of `k` conditioned on `l`, computed from an exact table.
pub fn post_selected_mean_exact(table: &JointTable, l: StrongOutcome) -> Result<PostSelectionStats> {
    let mass = table.selected_mass(l);
    if !(mass > 1e-300) {
        return Err(Error::NoPostSelected(l.index()));
    }
    let weighted = neumaier_sum(
        table
            .ks
            .iter()
            .enumerate()
            .map(|(i, &k)| k as f64 * table.prob(i, l)),
    );
    Ok(PostSelectionStats {
        l_selected: l.index(),
        selected: Selected::Mass(mass),
        mean_k: weighted / mass,
        stderr_k: 0.0,
    })
}

/// Streaming mean and variance (Welford) of a sequence of outcomes.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunningMean {
    pub n: u64,
    mean: f64,
    m2: f64,
}

impl RunningMean {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample standard deviation (n − 1 denominator).
    pub fn sample_sd(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).sqrt()
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sample_sd() / (self.n as f64).sqrt()
        }
    }
}

/// Accumulates post-selection statistics over a record stream.
#[derive(Clone, Copy, Debug, Default)]
pub struct PostSelection {
    pub all: RunningMean,
    by_l: [RunningMean; 2],
}

impl PostSelection {
    pub fn push(&mut self, r: &RunRecord) {
        self.all.push(r.k as f64);
        self.by_l[r.l.index() as usize - 1].push(r.k as f64);
    }

    pub fn count(&self, l: StrongOutcome) -> u64 {
        self.by_l[l.index() as usize - 1].n
    }

    pub fn stats(&self, l: StrongOutcome) -> Result<PostSelectionStats> {
        let acc = &self.by_l[l.index() as usize - 1];
        if acc.n == 0 {
            return Err(Error::NoPostSelected(l.index()));
        }
        Ok(PostSelectionStats {
            l_selected: l.index(),
            selected: Selected::Count(acc.n),
            mean_k: acc.mean(),
            stderr_k: acc.stderr(),
        })
    }
}

impl<'a> FromIterator<&'a RunRecord> for PostSelection {
    fn from_iter<I: IntoIterator<Item = &'a RunRecord>>(iter: I) -> Self {
        let mut acc = Self::default();
        for r in iter {
            acc.push(r);
        }
        acc
    }
}

/// Mean of `k` among records with strong outcome `l`.
pub fn post_selected_mean<'a>(
    records: impl IntoIterator<Item = &'a RunRecord>,
    l: StrongOutcome,
) -> Result<PostSelectionStats> {
    records.into_iter().collect::<PostSelection>().stats(l)
}

/// `Σ_k k ‖U_k|ψ⟩‖²`, the unconditioned mean pointer reading.
pub fn mean_k_for_state(state: &PureState, model: &WeakModel) -> f64 {
    neumaier_sum(model.outcomes().iter().map(|o| {
        let op = weak_outcome_operator(model, o.k).expect("k from the model support");
        o.k as f64 * apply_kraus(state, op).0
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TradeoffReport {
    pub fx: f64,
    pub fz: f64,
    pub sum_sq: f64,
}

/// x-fidelity `Σ P|F|` of the weak stage against the z-fidelity
/// `Σ P √(1−F²)` left for the strong stage.
pub fn fidelity_tradeoff(model: &WeakModel) -> TradeoffReport {
    let fx = average_fidelity(model);
    let fz = neumaier_sum(model.outcomes().iter().map(|o| o.p * (1.0 - o.f * o.f).sqrt()));
    TradeoffReport {
        fx,
        fz,
        sum_sq: fx * fx + fz * fz,
    }
}

/// Leading-order small-`f_avg` values for the Gaussian family:
/// `fz ≈ 1 − π f²/4` and `fx² + fz² ≈ 1 − (π−2)/2 · f²`.
pub fn gaussian_tradeoff_leading_order(f_avg: f64) -> TradeoffReport {
    use std::f64::consts::PI;
    let f2 = f_avg * f_avg;
    TradeoffReport {
        fx: f_avg,
        fz: 1.0 - PI * f2 / 4.0,
        sum_sq: 1.0 - (PI - 2.0) / 2.0 * f2,
    }
}

/// The y component never enters any outcome probability.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum YStatus {
    Unidentifiable,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TomographyResult {
    /// `None` when the design carries no information on the component.
    pub x_hat: Option<f64>,
    pub z_hat: Option<f64>,
    /// Least-squares `(x, z)` before projection onto the disk.
    pub unconstrained: [f64; 2],
    /// Sampling covariance of the unconstrained estimate for count data;
    /// zero for exact tables. For states on or near the boundary the
    /// projected values can sit several standard errors from the truth.
    pub covariance: [[f64; 2]; 2],
    pub y_status: YStatus,
    /// The unconstrained fit fell outside the unit disk and was projected.
    pub projected: bool,
    pub degenerate: bool,
}

impl TomographyResult {
    pub fn x_stderr(&self) -> f64 {
        self.covariance[0][0].sqrt()
    }

    pub fn z_stderr(&self) -> f64 {
        self.covariance[1][1].sqrt()
    }
}

/// Linear model of one cell: `p = offset + gx·x + gz·z`.
struct DesignRow {
    offset: f64,
    gx: f64,
    gz: f64,
}

fn design(model: &WeakModel) -> Vec<DesignRow> {
    let mut rows = Vec::with_capacity(2 * model.len());
    for o in model.outcomes() {
        for l in StrongOutcome::BOTH {
            let t = total_operator(model, o.k, l).expect("k from the model support").matrix;
            let m = t.adjoint() * t;
            rows.push(DesignRow {
                offset: 0.5 * m.trace().re,
                gx: 0.5 * (m * Complex2x2::pauli_x()).trace().re,
                gz: 0.5 * (m * Complex2x2::pauli_z()).trace().re,
            });
        }
    }
    rows
}

/// Relative size below which a normal-equation pivot counts as zero.
const IDENTIFIABILITY_TOL: f64 = 1e-20;

/// Least-squares fit of `(x, z)` to the cell frequencies. `n` enables the
/// multinomial sampling covariance.
fn fit(model: &WeakModel, freqs: &JointTable, n: Option<u64>) -> TomographyResult {
    let rows = design(model);
    let f: Vec<f64> = freqs.p.iter().flat_map(|r| r.iter().copied()).collect();
    let gxx = neumaier_sum(rows.iter().map(|r| r.gx * r.gx));
    let gzz = neumaier_sum(rows.iter().map(|r| r.gz * r.gz));
    let gxz = neumaier_sum(rows.iter().map(|r| r.gx * r.gz));
    let bx = neumaier_sum(rows.iter().zip(&f).map(|(r, f)| r.gx * (f - r.offset)));
    let bz = neumaier_sum(rows.iter().zip(&f).map(|(r, f)| r.gz * (f - r.offset)));
    let scale = gxx.max(gzz);
    let x_ok = gxx > IDENTIFIABILITY_TOL * scale && scale > 0.0;
    let z_ok = gzz > IDENTIFIABILITY_TOL * scale && scale > 0.0;
    let det = gxx * gzz - gxz * gxz;

    // inverse normal matrix restricted to the identifiable components
    let (inv, degenerate) = match (x_ok, z_ok) {
        (true, true) if det > 1e-12 * gxx * gzz => {
            ([[gzz / det, -gxz / det], [-gxz / det, gxx / det]], false)
        }
        (true, true) => ([[0.0; 2]; 2], true),
        (true, false) => ([[1.0 / gxx, 0.0], [0.0, 0.0]], true),
        (false, true) => ([[0.0, 0.0], [0.0, 1.0 / gzz]], true),
        (false, false) => ([[0.0; 2]; 2], true),
    };
    let both_lost = degenerate && x_ok && z_ok;
    let x_ok = x_ok && !both_lost;
    let z_ok = z_ok && !both_lost;

    let mut x = inv[0][0] * bx + inv[0][1] * bz;
    let mut z = inv[1][0] * bx + inv[1][1] * bz;
    let unconstrained = [x, z];
    let r = x.hypot(z);
    let projected = r > 1.0;
    if projected {
        x /= r;
        z /= r;
    }

    let mut covariance = [[0.0; 2]; 2];
    if let Some(n) = n.filter(|&n| n > 0) {
        // θ = inv·Aᵀ(f − offset), Cov(f) = (diag(f) − f fᵀ)/n
        let g: Vec<[f64; 2]> = rows
            .iter()
            .map(|r| {
                [
                    inv[0][0] * r.gx + inv[0][1] * r.gz,
                    inv[1][0] * r.gx + inv[1][1] * r.gz,
                ]
            })
            .collect();
        let mean = [
            neumaier_sum(g.iter().zip(&f).map(|(g, f)| g[0] * f)),
            neumaier_sum(g.iter().zip(&f).map(|(g, f)| g[1] * f)),
        ];
        for (a, row) in covariance.iter_mut().enumerate() {
            for (b, c) in row.iter_mut().enumerate() {
                let second = neumaier_sum(g.iter().zip(&f).map(|(g, f)| g[a] * g[b] * f));
                *c = (second - mean[a] * mean[b]) / n as f64;
            }
        }
    }

    TomographyResult {
        x_hat: x_ok.then_some(x),
        z_hat: z_ok.then_some(z),
        unconstrained,
        covariance,
        y_status: YStatus::Unidentifiable,
        projected,
        degenerate,
    }
}

/// Partial tomography from an exact probability table.
pub fn tomography(table: &JointTable, model: &WeakModel) -> Result<TomographyResult> {
    check_rows(&table.ks, model)?;
    Ok(fit(model, table, None))
}

/// Partial tomography from observed counts.
pub fn tomography_from_counts(counts: &JointCounts, model: &WeakModel) -> Result<TomographyResult> {
    check_rows(&counts.ks, model)?;
    if counts.n == 0 {
        return Err(Error::NoRecords);
    }
    Ok(fit(model, &counts.frequencies(), Some(counts.n)))
}

fn check_rows(ks: &[i64], model: &WeakModel) -> Result<()> {
    if ks.len() != model.len() || ks.iter().zip(model.outcomes()).any(|(&k, o)| k != o.k) {
        return Err(domain("table rows do not match the model support"));
    }
    Ok(())
}

/// The experimenter's calibration map `(Prob₁ − 0.5) × 200`, unclamped.
pub fn naive_spin_inference(prob_one: f64) -> f64 {
    (prob_one - 0.5) * 200.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson goodness-of-fit of `observed` against `probs` (summing to one).
/// Adjacent cells are pooled until each expected count reaches `min_expected`.
pub fn chi_square_gof(observed: &[u64], probs: &[f64], min_expected: f64) -> Result<ChiSquareTest> {
    if observed.len() != probs.len() {
        return Err(domain("observed and expected lengths differ"));
    }
    let n = observed.iter().sum::<u64>() as f64;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        obs += o as f64;
        exp += p * n;
        if exp >= min_expected {
            bins.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    if exp > 0.0 || obs > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += obs;
                last.1 += exp;
            }
            None => bins.push((obs, exp)),
        }
    }
    if bins.len() < 2 {
        return Err(domain("too few cells for a chi-square test"));
    }
    let statistic = bins.iter().map(|(o, e)| (o - e) * (o - e) / e).sum::<f64>();
    let dof = bins.len() - 1;
    let p_value = ChiSquared::new(dof as f64)
        .map_err(|e| domain(e.to_string()))?
        .sf(statistic);
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value,
    })
}
