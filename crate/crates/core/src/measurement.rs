//! Measurement operators for the two-stage experiment: a weak x-basis
//! measurement with many outcomes `k`, followed by a strong z-basis
//! measurement with outcomes `l ∈ {1, 2}`.
//!
//! A weak outcome is described by its weight `P` (its probability for the
//! maximally mixed state) and its fidelity `F` in favor of `|+⟩`; negative
//! `F` favors `|−⟩`. Its Kraus operator is
//! `√P (√(1+F) |+⟩⟨+| + √(1−F) |−⟩⟨−|)`.

use std::fmt;

use crate::error::{domain, Result};
use crate::qubit::{eig_hermitian2, Complex2x2, PureState};

/// Largest |F| admitted by the truncated Gaussian family.
pub const F_CAP: f64 = 0.999_999;
/// Tolerance on the normalization and symmetry of a [`WeakModel`].
pub const MODEL_TOL: f64 = 1e-12;

/// Outcome of the strong z-basis measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrongOutcome {
    /// `|↑⟩`, written as `1` in records.
    Up = 1,
    /// `|↓⟩`, written as `2` in records.
    Down = 2,
}

impl StrongOutcome {
    pub const BOTH: [StrongOutcome; 2] = [StrongOutcome::Up, StrongOutcome::Down];

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(l: u8) -> Result<Self> {
        match l {
            1 => Ok(Self::Up),
            2 => Ok(Self::Down),
            _ => Err(domain(format!("strong outcome must be 1 or 2, got {l}"))),
        }
    }

    pub fn projector(self) -> Complex2x2 {
        match self {
            Self::Up => Complex2x2::diag(1.0, 0.0),
            Self::Down => Complex2x2::diag(0.0, 1.0),
        }
    }
}

impl fmt::Display for StrongOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeakOutcome {
    pub k: i64,
    pub p: f64,
    pub f: f64,
}

impl WeakOutcome {
    pub fn new(k: i64, p: f64, f: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(domain(format!("outcome {k}: weight {p} not in (0, 1]")));
        }
        if !(f.abs() < 1.0) {
            return Err(domain(format!("outcome {k}: fidelity {f} not in (-1, 1)")));
        }
        Ok(Self { k, p, f })
    }
}

/// A complete family of weak x-basis outcomes, ordered by `k`.
#[derive(Clone, Debug)]
pub struct WeakModel {
    outcomes: Vec<WeakOutcome>,
    f_avg: f64,
    k_rms: f64,
    /// `k` of the first outcome; the support is contiguous only for the
    /// Gaussian family, so lookups go through `index_of`.
    contiguous_from: Option<i64>,
}

impl WeakModel {
    /// Builds a model from explicit outcomes, checking that the weights sum
    /// to one, that `Σ P_k F_k = 0` and that the family is symmetric under
    /// `k → −k` with `F_{−k} = −F_k`.
    pub fn new(mut outcomes: Vec<WeakOutcome>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(domain("weak model has no outcomes"));
        }
        outcomes.sort_by_key(|o| o.k);
        if outcomes.windows(2).any(|w| w[0].k == w[1].k) {
            return Err(domain("duplicate outcome index"));
        }
        let n = outcomes.len();
        for i in 0..n {
            let (a, b) = (&outcomes[i], &outcomes[n - 1 - i]);
            if a.k != -b.k || a.p != b.p || a.f != -b.f {
                return Err(domain(format!(
                    "outcomes {} and {} break the k -> -k symmetry",
                    a.k, b.k
                )));
            }
        }
        let total = neumaier_sum(outcomes.iter().map(|o| o.p));
        if (total - 1.0).abs() > MODEL_TOL {
            return Err(domain(format!("weights sum to {total}, not 1")));
        }
        let bias = neumaier_sum(outcomes.iter().map(|o| o.p * o.f));
        if bias.abs() > MODEL_TOL {
            return Err(domain(format!("Σ P·F = {bias}, not 0")));
        }
        Ok(Self::new_unchecked(outcomes))
    }

    /// Skips validation. Intended for fixtures that deliberately break the
    /// POVM axioms.
    pub fn new_unchecked(mut outcomes: Vec<WeakOutcome>) -> Self {
        outcomes.sort_by_key(|o| o.k);
        let f_avg = neumaier_sum(outcomes.iter().map(|o| o.p * o.f.abs()));
        let k_rms = neumaier_sum(outcomes.iter().map(|o| o.p * (o.k * o.k) as f64)).sqrt();
        let contiguous_from = outcomes.first().map(|o| o.k).filter(|&k0| {
            outcomes
                .iter()
                .enumerate()
                .all(|(i, o)| o.k == k0 + i as i64)
        });
        Self {
            outcomes,
            f_avg,
            k_rms,
            contiguous_from,
        }
    }

    /// Two outcomes `k = ±1` with weight 1/2 and fidelity `±f`.
    pub fn uniform(f: f64) -> Result<Self> {
        if !(f > 0.0 && f < 1.0) {
            return Err(domain(format!("uniform fidelity {f} not in (0, 1)")));
        }
        Self::new(vec![
            WeakOutcome::new(-1, 0.5, -f)?,
            WeakOutcome::new(1, 0.5, f)?,
        ])
    }

    pub fn outcomes(&self) -> &[WeakOutcome] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    /// Target average fidelity (Gaussian family) or `Σ P|F|` (custom models).
    pub fn f_avg(&self) -> f64 {
        self.f_avg
    }

    /// Gaussian width, or `√(Σ P k²)` for custom models.
    pub fn k_rms(&self) -> f64 {
        self.k_rms
    }

    /// Largest |k| in the support.
    pub fn k_max(&self) -> i64 {
        self.outcomes.iter().map(|o| o.k.abs()).max().unwrap_or(0)
    }

    pub fn index_of(&self, k: i64) -> Option<usize> {
        match self.contiguous_from {
            Some(k0) => {
                let i = k.checked_sub(k0)?;
                usize::try_from(i).ok().filter(|&i| i < self.outcomes.len())
            }
            None => self.outcomes.binary_search_by_key(&k, |o| o.k).ok(),
        }
    }

    pub fn outcome(&self, k: i64) -> Result<&WeakOutcome> {
        self.index_of(k)
            .map(|i| &self.outcomes[i])
            .ok_or_else(|| domain(format!("outcome k = {k} outside the model support")))
    }
}

/// Compensated summation; the Gaussian family has ~10⁴ terms and the POVM
/// axioms are checked at 1e-12.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Discretized Gaussian weak measurement: `P_k ∝ exp(−k²/2k_rms²)` and
/// `F_k = √(π/2)·(f_avg/k_rms)·k`.
///
/// The linear fidelity eventually exceeds 1, so the support is cut at
/// `|k| ≤ min(⌈8·k_rms⌉, K_F)` where `K_F` is the last index with
/// `|F| ≤ F_CAP`, and the weights are renormalized.
pub fn gaussian_model(f_avg: f64, k_rms: f64) -> Result<WeakModel> {
    if !(f_avg > 0.0 && f_avg < 0.5) {
        return Err(domain(format!("f_avg = {f_avg} must lie in (0, 0.5)")));
    }
    if !(k_rms >= 10.0 && k_rms.is_finite()) {
        return Err(domain(format!("k_rms = {k_rms} must be finite and >= 10")));
    }
    let slope = (std::f64::consts::PI / 2.0).sqrt() * f_avg / k_rms;
    let mut k_f = (F_CAP / slope).floor() as i64;
    while slope * k_f as f64 > F_CAP {
        k_f -= 1;
    }
    let k_max = ((8.0 * k_rms).ceil() as i64).min(k_f);
    let raw: Vec<f64> = (-k_max..=k_max)
        .map(|k| (-((k * k) as f64) / (2.0 * k_rms * k_rms)).exp())
        .collect();
    let norm = neumaier_sum(raw.iter().copied());
    let outcomes = (-k_max..=k_max)
        .zip(raw)
        .map(|(k, w)| WeakOutcome {
            k,
            p: w / norm,
            f: slope * k as f64,
        })
        .collect();
    let mut model = WeakModel::new(outcomes)?;
    model.f_avg = f_avg;
    model.k_rms = k_rms;
    Ok(model)
}

/// `Σ_k P_k |F_k|`
pub fn average_fidelity(model: &WeakModel) -> f64 {
    neumaier_sum(model.outcomes.iter().map(|o| o.p * o.f.abs()))
}

/// Which measurement an operator belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutcomeLabel {
    Weak { k: i64 },
    Strong { l: StrongOutcome },
    Combined { k: i64, l: StrongOutcome },
}

/// A Kraus operator together with the outcome it describes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementOperator {
    pub matrix: Complex2x2,
    pub label: OutcomeLabel,
}

impl AsRef<Complex2x2> for MeasurementOperator {
    fn as_ref(&self) -> &Complex2x2 {
        &self.matrix
    }
}

fn weak_matrix(p: f64, f: f64) -> Complex2x2 {
    let a = (1.0 + f).sqrt();
    let b = (1.0 - f).sqrt();
    let s = p.sqrt() / 2.0;
    Complex2x2::real([[s * (a + b), s * (a - b)], [s * (a - b), s * (a + b)]])
}

/// Kraus operator of a weak x-basis outcome with weight `p` and fidelity `f`.
/// The returned label carries `k = 0`; use [`weak_outcome_operator`] for an
/// outcome taken from a model.
pub fn weak_operator(p: f64, f: f64) -> Result<MeasurementOperator> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(domain(format!("weight {p} not in (0, 1]")));
    }
    if !(-1.0..=1.0).contains(&f) {
        return Err(domain(format!("fidelity {f} not in [-1, 1]")));
    }
    Ok(MeasurementOperator {
        matrix: weak_matrix(p, f),
        label: OutcomeLabel::Weak { k: 0 },
    })
}

pub fn weak_outcome_operator(model: &WeakModel, k: i64) -> Result<MeasurementOperator> {
    let o = model.outcome(k)?;
    Ok(MeasurementOperator {
        matrix: weak_matrix(o.p, o.f),
        label: OutcomeLabel::Weak { k },
    })
}

/// The projectors `|↑⟩⟨↑|` and `|↓⟩⟨↓|`.
pub fn strong_z_operators() -> (MeasurementOperator, MeasurementOperator) {
    let op = |l: StrongOutcome| MeasurementOperator {
        matrix: l.projector(),
        label: OutcomeLabel::Strong { l },
    };
    (op(StrongOutcome::Up), op(StrongOutcome::Down))
}

/// Strong z projector applied after weak outcome `k`: `U_{z,l} · U_{x,k}`.
pub fn total_operator(model: &WeakModel, k: i64, l: StrongOutcome) -> Result<MeasurementOperator> {
    let weak = weak_outcome_operator(model, k)?;
    Ok(MeasurementOperator {
        matrix: l.projector() * weak.matrix,
        label: OutcomeLabel::Combined { k, l },
    })
}

/// POVM element of a combined outcome together with its measurement basis.
#[derive(Clone, Copy, Debug)]
pub struct PovmElement {
    pub k: i64,
    pub l: StrongOutcome,
    pub m: Complex2x2,
    pub m1: f64,
    pub m2: f64,
    /// Eigenvector of the nonzero eigenvalue.
    pub psi: PureState,
    pub psi_bar: PureState,
    /// Tilt of the measurement basis from the z axis, recovered from `psi`.
    pub theta: f64,
}

/// `M_{k,l} = U†U` for the combined operator, diagonalized.
///
/// The matrix is diagonalized after dividing by its trace so that far-tail
/// outcomes with tiny weights are not mistaken for degenerate ones.
pub fn povm_element(model: &WeakModel, k: i64, l: StrongOutcome) -> Result<PovmElement> {
    let total = total_operator(model, k, l)?;
    let m = total.matrix.adjoint() * total.matrix;
    let tr = m.trace().re;
    let eig = eig_hermitian2(&m.scale(1.0 / tr))?;
    let psi = eig.v1;
    let [up, down] = [psi.amplitude_up().re, psi.amplitude_down().re];
    // |ψ_{k,1}⟩ = (cos θ/2, sin θ/2), |ψ_{k,2}⟩ = ±(sin θ/2, cos θ/2), |θ| < π/2
    let theta = match l {
        StrongOutcome::Up => 2.0 * down.atan2(up),
        StrongOutcome::Down => {
            let sign = if down < 0.0 { -1.0 } else { 1.0 };
            2.0 * (sign * up).atan2(sign * down)
        }
    };
    Ok(PovmElement {
        k,
        l,
        m,
        m1: eig.m1 * tr,
        m2: eig.m2 * tr,
        psi,
        psi_bar: eig.v2,
        theta,
    })
}

/// Rank-one closed form `P_k |ψ_{k,l}⟩⟨ψ_{k,l}|` with `sin θ_k = F_k`,
/// built from the basis angle alone (no matrix products).
pub fn povm_closed_form(outcome: &WeakOutcome, l: StrongOutcome) -> Complex2x2 {
    let theta = outcome.f.asin();
    let (s, c) = (theta / 2.0).sin_cos();
    let (a, b) = match l {
        StrongOutcome::Up => (c, s),
        StrongOutcome::Down => (s, c),
    };
    Complex2x2::real([[a * a, a * b], [a * b, b * b]]).scale(outcome.p)
}

/// Max-entry deviation of `Σ_{k,l} M_{k,l}` from the identity.
pub fn completeness_defect(model: &WeakModel) -> f64 {
    let mut entries = [[Vec::new(), Vec::new()], [Vec::new(), Vec::new()]];
    for o in model.outcomes() {
        let u = weak_matrix(o.p, o.f);
        for l in StrongOutcome::BOTH {
            let t = l.projector() * u;
            let m = t.adjoint() * t;
            for (i, row) in entries.iter_mut().enumerate() {
                for (j, e) in row.iter_mut().enumerate() {
                    e.push(m.m[i][j].re);
                }
            }
        }
    }
    let mut defect = 0.0f64;
    for (i, row) in entries.into_iter().enumerate() {
        for (j, e) in row.into_iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((neumaier_sum(e) - target).abs());
        }
    }
    defect
}

/// A strong two-reading detector whose axis sits at angle `eta` from z in
/// the x–z plane. Reading 1 projects onto `cos(η/2)|↑⟩ + sin(η/2)|↓⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotatedDetector {
    pub eta: f64,
    axis: PureState,
    orthogonal: PureState,
}

impl RotatedDetector {
    pub fn axis_state(&self) -> PureState {
        self.axis
    }

    pub fn reading_one(&self) -> Complex2x2 {
        Complex2x2::projector(&self.axis)
    }

    pub fn reading_zero(&self) -> Complex2x2 {
        Complex2x2::projector(&self.orthogonal)
    }

    /// Probability of reading 1. Rounding residue within a few ulps of 0 or
    /// 1 is snapped, so an aligned state reads 1 with certainty.
    pub fn prob_one(&self, state: &PureState) -> f64 {
        let p = self.axis.inner(state).norm_sqr();
        let snap = 4.0 * f64::EPSILON;
        if p >= 1.0 - snap {
            1.0
        } else if p <= snap {
            0.0
        } else {
            p
        }
    }
}

pub fn rotated_detector(eta: f64) -> Result<RotatedDetector> {
    if !eta.is_finite() {
        return Err(domain(format!("detector angle {eta} is not finite")));
    }
    let (s, c) = (eta / 2.0).sin_cos();
    Ok(RotatedDetector {
        eta,
        axis: PureState::real(c, s)?,
        orthogonal: PureState::real(s, -c)?,
    })
}
