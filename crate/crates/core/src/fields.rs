//! Random coefficient fields, Knudsen-number profiles, initial and boundary
//! data, and sampling of the parameter hypercube.
//!
//! Every evaluator here is a pure function of its arguments.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::VelocityQuadrature;
use crate::solvers::{KineticState, MacroState, SpatialGrid};

/// A point of the random parameter hypercube `[-1, 1]^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("parameter vector is empty".into()));
        }
        if let Some(bad) = values.iter().find(|v| !(-1.0..=1.0).contains(*v)) {
            return Err(Error::InvalidArgument(format!(
                "parameter entry {bad} outside [-1, 1]"
            )));
        }
        Ok(Self(values))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim.max(1)])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `z_k` with 1-based indexing; zero when the vector is shorter.
    fn coord(&self, k: usize) -> f64 {
        self.0.get(k - 1).copied().unwrap_or(0.0)
    }
}

impl TryFrom<Vec<f64>> for ParamVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ParamVector> for Vec<f64> {
    fn from(p: ParamVector) -> Self {
        p.0
    }
}

#[derive(Debug, Clone, Copy)]
enum Trig {
    Cos,
    Sin,
}

/// `amplitude * sum_{i=1..d} trig(2 pi i x) / (i pi)^2 * z_i`
fn fourier_tail(x: f64, z: &ParamVector, amplitude: f64, dim: usize, trig: Trig) -> f64 {
    (1..=dim)
        .map(|i| {
            let arg = 2.0 * PI * i as f64 * x;
            let t = match trig {
                Trig::Cos => arg.cos(),
                Trig::Sin => arg.sin(),
            };
            t / (i as f64 * PI).powi(2) * z.coord(i)
        })
        .sum::<f64>()
        * amplitude
}

/// Worst-case magnitude of the Fourier tail over `z in [-1,1]^d`.
fn fourier_tail_bound(amplitude: f64, dim: usize) -> f64 {
    amplitude.abs()
        * (1..=dim)
            .map(|i| 1.0 / (i as f64 * PI).powi(2))
            .sum::<f64>()
}

/// Scattering cross-section `sigma(x, z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScatteringField {
    FourierCosine {
        base: f64,
        amplitude: f64,
        dimension: usize,
    },
    FourierSine {
        base: f64,
        amplitude: f64,
        dimension: usize,
    },
    /// Fourier-cosine field on `x <= breakpoint`, constant to the right.
    PiecewiseFourier {
        base: f64,
        amplitude: f64,
        dimension: usize,
        breakpoint: f64,
        right_value: f64,
    },
    Constant {
        value: f64,
    },
}

impl ScatteringField {
    pub fn fourier_cosine(base: f64, amplitude: f64, dimension: usize) -> Result<Self> {
        let f = ScatteringField::FourierCosine {
            base,
            amplitude,
            dimension,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn piecewise_fourier(
        base: f64,
        amplitude: f64,
        dimension: usize,
        breakpoint: f64,
        right_value: f64,
    ) -> Result<Self> {
        let f = ScatteringField::PiecewiseFourier {
            base,
            amplitude,
            dimension,
            breakpoint,
            right_value,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn constant(value: f64) -> Result<Self> {
        let f = ScatteringField::Constant { value };
        f.validate()?;
        Ok(f)
    }

    /// Parameter dimension the field reads, `None` for deterministic fields.
    pub fn dimension(&self) -> Option<usize> {
        match *self {
            ScatteringField::FourierCosine { dimension, .. }
            | ScatteringField::FourierSine { dimension, .. }
            | ScatteringField::PiecewiseFourier { dimension, .. } => Some(dimension),
            ScatteringField::Constant { .. } => None,
        }
    }

    /// Checks that `sigma > 0` on `[0,1] x [-1,1]^d` by bounding the Fourier tail.
    pub fn validate(&self) -> Result<()> {
        let (lower, what) = match *self {
            ScatteringField::FourierCosine {
                base,
                amplitude,
                dimension,
            }
            | ScatteringField::FourierSine {
                base,
                amplitude,
                dimension,
            } => (
                base - fourier_tail_bound(amplitude, dimension),
                "Fourier lower bound",
            ),
            ScatteringField::PiecewiseFourier {
                base,
                amplitude,
                dimension,
                right_value,
                breakpoint,
            } => {
                if !(0.0..=1.0).contains(&breakpoint) {
                    return Err(Error::Invariant(format!(
                        "breakpoint {breakpoint} outside [0, 1]"
                    )));
                }
                (
                    (base - fourier_tail_bound(amplitude, dimension)).min(right_value),
                    "piecewise lower bound",
                )
            }
            ScatteringField::Constant { value } => (value, "constant scattering"),
        };
        if lower > 0.0 && lower.is_finite() {
            Ok(())
        } else {
            Err(Error::Invariant(format!(
                "{what} {lower} is not strictly positive"
            )))
        }
    }

    pub fn eval_sigma(&self, x: f64, z: &ParamVector) -> Result<f64> {
        if let Some(d) = self.dimension() {
            if z.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: z.dim(),
                });
            }
        }
        Ok(self.eval_unchecked(x, z))
    }

    pub(crate) fn eval_unchecked(&self, x: f64, z: &ParamVector) -> f64 {
        match *self {
            ScatteringField::FourierCosine {
                base,
                amplitude,
                dimension,
            } => base + fourier_tail(x, z, amplitude, dimension, Trig::Cos),
            ScatteringField::FourierSine {
                base,
                amplitude,
                dimension,
            } => base + fourier_tail(x, z, amplitude, dimension, Trig::Sin),
            ScatteringField::PiecewiseFourier {
                base,
                amplitude,
                dimension,
                breakpoint,
                right_value,
            } => {
                if x <= breakpoint {
                    base + fourier_tail(x, z, amplitude, dimension, Trig::Cos)
                } else {
                    right_value
                }
            }
            ScatteringField::Constant { value } => value,
        }
    }
}

/// Smallest Knudsen number accepted; the schemes divide by `eps^2`.
pub const MIN_EPSILON: f64 = 1e-12;

/// Knudsen number profile `eps(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EpsilonField {
    Constant {
        value: f64,
    },
    /// `eps^2 = floor + tanh(1 - slope (x - center)) + tanh(1 + slope (x - center))`
    Tanh {
        floor: f64,
        slope: f64,
        center: f64,
    },
}

impl EpsilonField {
    pub fn constant(value: f64) -> Result<Self> {
        let e = EpsilonField::Constant { value };
        e.validate()?;
        Ok(e)
    }

    /// The mixed-regime profile, ranging from about 0.24 at the walls to 1.23 at the center.
    pub fn mixed_regime() -> Self {
        EpsilonField::Tanh {
            floor: 1e-8,
            slope: 5.5,
            center: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            EpsilonField::Constant { value } => {
                if value >= MIN_EPSILON && value.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Invariant(format!(
                        "epsilon {value} must be finite and >= {MIN_EPSILON:e}"
                    )))
                }
            }
            EpsilonField::Tanh { .. } => {
                // Sample densely; the profile is smooth with a single extremum.
                let min = (0..=1000)
                    .map(|i| self.radicand(i as f64 / 1000.0))
                    .fold(f64::INFINITY, f64::min);
                if min >= MIN_EPSILON * MIN_EPSILON {
                    Ok(())
                } else {
                    Err(Error::Invariant(format!(
                        "tanh epsilon profile has radicand {min} below the floor"
                    )))
                }
            }
        }
    }

    fn radicand(&self, x: f64) -> f64 {
        match *self {
            EpsilonField::Constant { value } => value * value,
            EpsilonField::Tanh {
                floor,
                slope,
                center,
            } => {
                let s = slope * (x - center);
                floor + (1.0 - s).tanh() + (1.0 + s).tanh()
            }
        }
    }

    pub fn eval_epsilon(&self, x: f64) -> f64 {
        match *self {
            EpsilonField::Constant { value } => value,
            EpsilonField::Tanh { .. } => {
                let r = self.radicand(x);
                assert!(r > 0.0, "negative epsilon radicand {r} at x = {x}");
                r.sqrt()
            }
        }
    }
}

/// Coefficients of the double-Maxwellian initial distribution
/// `rho0 exp(-((v - v0)/T0)^2) + rho1 exp(-((v - v1)/T1)^2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoubleGaussian {
    /// Amplitude of the sine series in `rho0`.
    pub rho0_amplitude: f64,
    /// Amplitude of the cosine series in `rho1`.
    pub rho1_amplitude: f64,
    pub v0: f64,
    pub v1: f64,
    /// `T0 = (5 + 2 cos 2 pi x)/20 * (1 + t0_z1 z_1)`
    pub t0_z1: f64,
    /// `T1 = 0.5 + t1_z2 cos(2 pi x) z_2`
    pub t1_z2: f64,
    pub dimension: usize,
}

impl Default for DoubleGaussian {
    fn default() -> Self {
        Self {
            rho0_amplitude: 3.0,
            rho1_amplitude: 2.0,
            v0: 0.5,
            v1: -0.75,
            t0_z1: 0.6,
            t1_z2: 0.2,
            dimension: 5,
        }
    }
}

impl DoubleGaussian {
    fn eval(&self, x: f64, v: f64, z: &ParamVector) -> f64 {
        let rho0 = 1.0 + fourier_tail(x, z, self.rho0_amplitude, self.dimension, Trig::Sin);
        let rho1 = 1.0 + fourier_tail(x, z, self.rho1_amplitude, self.dimension, Trig::Cos);
        let c = (2.0 * PI * x).cos();
        let t0 = (5.0 + 2.0 * c) / 20.0 * (1.0 + self.t0_z1 * z.coord(1));
        let t1 = 0.5 + self.t1_z2 * c * z.coord(2);
        rho0 * (-((v - self.v0) / t0).powi(2)).exp() + rho1 * (-((v - self.v1) / t1).powi(2)).exp()
    }
}

/// Initial particle density `f0(x, v, z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    Zero,
    DoubleGaussian(DoubleGaussian),
    /// `left_base + left_z1 z_1` for `x < interface`, zero beyond.
    RiemannStep {
        left_base: f64,
        left_z1: f64,
        interface: f64,
    },
    /// `exp(-(x - center)^2 / (2 xi)) / (2 pi xi)`
    GaussianPulse {
        center: f64,
        xi: f64,
    },
}

impl InitialData {
    pub fn validate(&self) -> Result<()> {
        match self {
            InitialData::Zero => Ok(()),
            InitialData::DoubleGaussian(g) => {
                let lo0 = 1.0 - fourier_tail_bound(g.rho0_amplitude, g.dimension);
                let lo1 = 1.0 - fourier_tail_bound(g.rho1_amplitude, g.dimension);
                let t0 = 1.0 - g.t0_z1.abs();
                let t1 = 0.5 - g.t1_z2.abs();
                if lo0 > 0.0 && lo1 > 0.0 && t0 > 0.0 && t1 > 0.0 && g.dimension >= 2 {
                    Ok(())
                } else {
                    Err(Error::Invariant(
                        "double-Gaussian coefficients allow a non-positive density or temperature"
                            .into(),
                    ))
                }
            }
            InitialData::RiemannStep {
                left_base, left_z1, ..
            } => {
                if left_base - left_z1.abs() >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::Invariant(
                        "Riemann left state can be negative".into(),
                    ))
                }
            }
            InitialData::GaussianPulse { xi, .. } => {
                if *xi > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Invariant("pulse width must be positive".into()))
                }
            }
        }
    }

    /// Density `f0(x, v, z)` for `v in (-1, 1)`.
    pub fn density(&self, x: f64, v: f64, z: &ParamVector) -> f64 {
        match self {
            InitialData::Zero => 0.0,
            InitialData::DoubleGaussian(g) => g.eval(x, v, z),
            InitialData::RiemannStep {
                left_base,
                left_z1,
                interface,
            } => {
                if x < *interface {
                    left_base + left_z1 * z.coord(1)
                } else {
                    0.0
                }
            }
            InitialData::GaussianPulse { center, xi } => {
                (-(x - center).powi(2) / (2.0 * xi)).exp() / (2.0 * PI * xi)
            }
        }
    }
}

/// `constant + sum_i coefficients[i] z_{i+1}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineValue {
    pub constant: f64,
    #[serde(default)]
    pub coefficients: Vec<f64>,
}

impl AffineValue {
    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            coefficients: Vec::new(),
        }
    }

    pub fn eval(&self, z: &ParamVector) -> f64 {
        self.constant
            + self
                .coefficients
                .iter()
                .enumerate()
                .map(|(i, a)| a * z.coord(i + 1))
                .sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BoundarySpec {
    Periodic,
    /// Isotropic incoming data at `x = 0` (for `v > 0`) and `x = 1` (for `v < 0`).
    Inflow {
        left: AffineValue,
        right: AffineValue,
    },
}

impl BoundarySpec {
    pub fn validate(&self) -> Result<()> {
        if let BoundarySpec::Inflow { left, right } = self {
            let finite = |a: &AffineValue| {
                a.constant.is_finite() && a.coefficients.iter().all(|c| c.is_finite())
            };
            if !finite(left) || !finite(right) {
                return Err(Error::Invariant("inflow values must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, BoundarySpec::Periodic)
    }

    /// `(g_L(z), g_R(z))`, or `None` under periodic conditions.
    pub fn inflow_values(&self, z: &ParamVector) -> Option<(f64, f64)> {
        match self {
            BoundarySpec::Periodic => None,
            BoundarySpec::Inflow { left, right } => Some((left.eval(z), right.eval(z))),
        }
    }
}

/// Even and odd parities of `f0` on the staggered layout: `r` at cell centers
/// and velocity nodes, `j` at cell faces.
pub fn hf_initial_state(
    initial: &InitialData,
    epsilon: &EpsilonField,
    grid: &SpatialGrid,
    vq: &VelocityQuadrature,
    z: &ParamVector,
) -> KineticState {
    let m = vq.len();
    let mut state = KineticState::zeros(grid.cells(), m);
    if matches!(initial, InitialData::Zero) {
        return state;
    }
    for i in 0..grid.cells() {
        let x = grid.center(i);
        for (k, &v) in vq.nodes().iter().enumerate() {
            state.r[i * m + k] = 0.5 * (initial.density(x, v, z) + initial.density(x, -v, z));
        }
    }
    for f in 0..=grid.cells() {
        let x = grid.face(f);
        let eps = epsilon.eval_epsilon(x);
        for (k, &v) in vq.nodes().iter().enumerate() {
            state.j[f * m + k] =
                (initial.density(x, v, z) - initial.density(x, -v, z)) / (2.0 * eps);
        }
    }
    state
}

/// Macroscopic initial data consistent with the kinetic one:
/// `rho = int_0^1 r dv` at cells and `s = int_0^1 v j dv` at faces.
pub fn lf_initial_state(
    initial: &InitialData,
    epsilon: &EpsilonField,
    grid: &SpatialGrid,
    vq: &VelocityQuadrature,
    z: &ParamVector,
) -> MacroState {
    let kinetic = hf_initial_state(initial, epsilon, grid, vq, z);
    let m = vq.len();
    let w = vq.weights();
    let v = vq.nodes();
    let rho = kinetic
        .r
        .chunks_exact(m)
        .map(|row| row.iter().zip(w).map(|(r, w)| r * w).sum())
        .collect();
    let s = kinetic
        .j
        .chunks_exact(m)
        .map(|row| row.iter().zip(w).zip(v).map(|((j, w), v)| v * j * w).sum())
        .collect();
    MacroState { rho, s, t: 0.0 }
}

/// Draws the `index`-th candidate of the stream identified by `seed`.
///
/// Each index owns its own ChaCha8 stream, so any sample can be regenerated
/// without replaying the ones before it.
pub fn sample_point(dim: usize, seed: u64, index: u64) -> ParamVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    ParamVector((0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect())
}

/// `n` uniform samples on `[-1, 1]^dim`, reproducible from `seed`.
pub fn sample_candidates(dim: usize, n: usize, seed: u64) -> Result<Vec<ParamVector>> {
    if n == 0 || dim == 0 {
        return Err(Error::InvalidArgument(format!(
            "need at least one sample of dimension >= 1, got n = {n}, d = {dim}"
        )));
    }
    Ok((0..n as u64).map(|i| sample_point(dim, seed, i)).collect())
}
