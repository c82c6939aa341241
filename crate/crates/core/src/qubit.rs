//! Two-level linear algebra: 2x2 complex matrices, pure and mixed qubit
//! states, Bloch vectors and closed-form Hermitian diagonalization.
//!
//! Bloch components are Pauli expectation values (eigenvalues ±1), so a pure
//! state always has a unit-norm Bloch vector. Pure states are stored in a
//! canonical global phase: the first non-negligible amplitude is real and
//! non-negative.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Tolerance on normalization and Hermiticity of validated states.
pub const STATE_TOL: f64 = 1e-12;
/// Maximum deviation from Hermiticity accepted by [`eig_hermitian2`].
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalue gap below which [`eig_hermitian2`] treats the input as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;
/// Amplitudes below this magnitude are treated as zero when fixing the phase.
const PHASE_EPS: f64 = 1e-14;
/// Branch probabilities at or below this are reported as impossible.
pub const ZERO_PROB: f64 = 1e-15;

/// A 2x2 complex matrix, `m[row][col]`.
#[derive(Clone, Copy, PartialEq)]
pub struct Complex2x2 {
    pub m: [[C64; 2]; 2],
}

impl fmt::Debug for Complex2x2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]
        )
    }
}

impl Complex2x2 {
    pub const fn new(m: [[C64; 2]; 2]) -> Self {
        Self { m }
    }

    pub fn real(r: [[f64; 2]; 2]) -> Self {
        Self::new([
            [C64::new(r[0][0], 0.0), C64::new(r[0][1], 0.0)],
            [C64::new(r[1][0], 0.0), C64::new(r[1][1], 0.0)],
        ])
    }

    pub const fn zero() -> Self {
        Self::new([[ZERO, ZERO], [ZERO, ZERO]])
    }

    pub const fn identity() -> Self {
        Self::new([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn diag(a: f64, d: f64) -> Self {
        Self::real([[a, 0.0], [0.0, d]])
    }

    pub const fn pauli_x() -> Self {
        Self::new([[ZERO, ONE], [ONE, ZERO]])
    }

    pub const fn pauli_y() -> Self {
        Self::new([[ZERO, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), ZERO]])
    }

    pub const fn pauli_z() -> Self {
        Self::new([[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]])
    }

    /// `|v⟩⟨w|`
    pub fn outer(v: &[C64; 2], w: &[C64; 2]) -> Self {
        let mut m = [[ZERO; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = v[i] * w[j].conj();
            }
        }
        Self::new(m)
    }

    /// `|ψ⟩⟨ψ|`
    pub fn projector(state: &PureState) -> Self {
        Self::outer(&state.amps, &state.amps)
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self::new([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn trace(&self) -> C64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> C64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        let m = &self.m;
        Self::new([[f(m[0][0]), f(m[0][1])], [f(m[1][0]), f(m[1][1])]])
    }

    pub fn apply(&self, v: &[C64; 2]) -> [C64; 2] {
        let m = &self.m;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_real(&self) -> bool {
        self.m.iter().flatten().all(|z| z.im == 0.0)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }
}

impl Add for Complex2x2 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (a, b) = (&self.m, &rhs.m);
        Self::new([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Complex2x2 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + rhs.scale(-1.0)
    }
}

impl Mul for Complex2x2 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (&self.m, &rhs.m);
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Self::new(out)
    }
}

impl AsRef<Complex2x2> for Complex2x2 {
    fn as_ref(&self) -> &Complex2x2 {
        self
    }
}

/// A normalized qubit state vector `a|↑⟩ + b|↓⟩` in canonical phase.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PureState {
    amps: [C64; 2],
}

impl PureState {
    /// Normalizes and canonicalizes the given amplitudes.
    pub fn new(up: C64, down: C64) -> Result<Self> {
        let norm = (up.norm_sqr() + down.norm_sqr()).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::Domain(format!(
                "cannot normalize amplitudes ({up}, {down})"
            )));
        }
        Ok(Self::canonical([up / norm, down / norm]))
    }

    pub fn real(up: f64, down: f64) -> Result<Self> {
        Self::new(C64::new(up, 0.0), C64::new(down, 0.0))
    }

    pub fn up() -> Self {
        Self { amps: [ONE, ZERO] }
    }

    pub fn down() -> Self {
        Self { amps: [ZERO, ONE] }
    }

    pub fn plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::canonical([C64::new(h, 0.0), C64::new(h, 0.0)])
    }

    pub fn minus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::canonical([C64::new(h, 0.0), C64::new(-h, 0.0)])
    }

    fn canonical(mut amps: [C64; 2]) -> Self {
        let lead = if amps[0].norm() > PHASE_EPS { amps[0] } else { amps[1] };
        let phase = lead.conj() / lead.norm();
        for a in &mut amps {
            *a *= phase;
        }
        // the leading amplitude is now real up to rounding
        if amps[0].norm() > PHASE_EPS {
            amps[0] = C64::new(amps[0].re, 0.0);
        } else {
            amps[1] = C64::new(amps[1].re, 0.0);
        }
        Self { amps }
    }

    pub fn amplitude_up(&self) -> C64 {
        self.amps[0]
    }

    pub fn amplitude_down(&self) -> C64 {
        self.amps[1]
    }

    pub fn amplitudes(&self) -> &[C64; 2] {
        &self.amps
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amps[0].conj() * other.amps[0] + self.amps[1].conj() * other.amps[1]
    }

    /// Largest amplitude difference between the canonical forms.
    pub fn distance(&self, other: &PureState) -> f64 {
        (self.amps[0] - other.amps[0])
            .norm()
            .max((self.amps[1] - other.amps[1]).norm())
    }

    pub fn to_density_matrix(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: Complex2x2::projector(self),
        }
    }
}

/// Prepares `cos(α/2)|↑⟩ + sin(α/2)|↓⟩`.
pub fn make_tilted_state(alpha: f64) -> PureState {
    let (s, c) = (alpha / 2.0).sin_cos();
    PureState::canonical([C64::new(c, 0.0), C64::new(s, 0.0)])
}

/// A Hermitian, unit-trace, positive semidefinite 2x2 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: Complex2x2,
}

impl DensityMatrix {
    pub fn new(matrix: Complex2x2) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(Error::Domain("density matrix has non-finite entries".into()));
        }
        let dev = matrix.hermitian_deviation();
        if dev > STATE_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::Domain(format!("density matrix trace {tr} != 1")));
        }
        let eig = eig_hermitian2(&matrix)?;
        if eig.m2 < -STATE_TOL {
            return Err(Error::Domain(format!(
                "density matrix has negative eigenvalue {}",
                eig.m2
            )));
        }
        Ok(Self { matrix })
    }

    pub fn maximally_mixed() -> Self {
        Self {
            matrix: Complex2x2::identity().scale(0.5),
        }
    }

    /// `(I + x σx + y σy + z σz) / 2`; requires `x² + y² + z² ≤ 1`.
    pub fn from_bloch(b: BlochVector) -> Result<Self> {
        if b.norm() > 1.0 + STATE_TOL {
            return Err(Error::Domain(format!("Bloch vector {b:?} outside the unit ball")));
        }
        let matrix = (Complex2x2::identity()
            + Complex2x2::pauli_x().scale(b.x)
            + Complex2x2::pauli_y().scale(b.y)
            + Complex2x2::pauli_z().scale(b.z))
        .scale(0.5);
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &Complex2x2 {
        &self.matrix
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// Anything that assigns expectation values to 2x2 observables.
pub trait QubitState {
    /// `tr(op · ρ)`, real part; the imaginary part vanishes for Hermitian `op`.
    fn expectation(&self, op: &Complex2x2) -> f64;

    fn bloch_vector(&self) -> BlochVector {
        BlochVector {
            x: self.expectation(&Complex2x2::pauli_x()),
            y: self.expectation(&Complex2x2::pauli_y()),
            z: self.expectation(&Complex2x2::pauli_z()),
        }
    }
}

impl QubitState for PureState {
    fn expectation(&self, op: &Complex2x2) -> f64 {
        let v = op.apply(&self.amps);
        (self.amps[0].conj() * v[0] + self.amps[1].conj() * v[1]).re
    }

    fn bloch_vector(&self) -> BlochVector {
        let [a, b] = self.amps;
        let cross = a.conj() * b;
        BlochVector {
            x: 2.0 * cross.re,
            y: 2.0 * cross.im,
            z: a.norm_sqr() - b.norm_sqr(),
        }
    }
}

impl QubitState for DensityMatrix {
    fn expectation(&self, op: &Complex2x2) -> f64 {
        (*op * self.matrix).trace().re
    }
}

/// Pauli expectation values `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)`.
pub fn bloch_vector<S: QubitState + ?Sized>(state: &S) -> BlochVector {
    state.bloch_vector()
}

/// Eigenpairs of a Hermitian 2x2 matrix, `m1 ≥ m2`.
#[derive(Clone, Copy, Debug)]
pub struct Eigen2 {
    pub m1: f64,
    pub m2: f64,
    pub v1: PureState,
    pub v2: PureState,
}

/// Closed-form eigendecomposition of a Hermitian 2x2 matrix.
///
/// Writes `M = μ·I + r·(n·σ)` and takes the eigenvectors of `n·σ` in
/// half-angle form. The half-angle sine and cosine are never both taken
/// from `sqrt(1 ± n_z)`, which keeps nearly diagonal inputs accurate.
/// A degenerate spectrum returns the computational basis.
pub fn eig_hermitian2(m: &Complex2x2) -> Result<Eigen2> {
    if !m.is_finite() {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    let dev = m.hermitian_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let a = m.m[0][0].re;
    let d = m.m[1][1].re;
    // average the two off-diagonal entries to absorb any residual asymmetry
    let b = (m.m[0][1] + m.m[1][0].conj()) * 0.5;
    let mean = 0.5 * (a + d);
    let half_gap = 0.5 * (a - d);
    let r = half_gap.hypot(b.norm());
    if 2.0 * r <= DEGENERACY_TOL {
        return Ok(Eigen2 {
            m1: mean + r,
            m2: mean - r,
            v1: PureState::up(),
            v2: PureState::down(),
        });
    }
    let nz = half_gap / r;
    let sin_theta = b.norm() / r;
    let (c, s) = if nz >= 0.0 {
        let c = ((1.0 + nz) / 2.0).sqrt();
        (c, sin_theta / (2.0 * c))
    } else {
        let s = ((1.0 - nz) / 2.0).sqrt();
        (sin_theta / (2.0 * s), s)
    };
    // e^{iφ} = b* / |b|
    let phase = if b.norm() > 0.0 { b.conj() / b.norm() } else { ONE };
    let v1 = PureState::canonical([C64::new(c, 0.0), phase * s]);
    let v2 = PureState::canonical([C64::new(s, 0.0), -phase * c]);
    Ok(Eigen2 {
        m1: mean + r,
        m2: mean - r,
        v1,
        v2,
    })
}

/// Applies a Kraus operator: returns `‖U|ψ⟩‖²` and the renormalized
/// post-measurement state, or `None` when the branch has (numerically)
/// zero probability.
pub fn apply_kraus(state: &PureState, op: impl AsRef<Complex2x2>) -> (f64, Option<PureState>) {
    let v = op.as_ref().apply(&state.amps);
    let prob = v[0].norm_sqr() + v[1].norm_sqr();
    if prob <= ZERO_PROB {
        return (prob, None);
    }
    let norm = prob.sqrt();
    (prob, Some(PureState::canonical([v[0] / norm, v[1] / norm])))
}
