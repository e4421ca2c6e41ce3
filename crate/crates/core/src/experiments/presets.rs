use serde::{Deserialize, Serialize};

use crate::bifidelity::{BoundConstants, DEFAULT_PIVOT_TOL};
use crate::error::{Error, Result};
use crate::fields::{
    AffineValue, BoundarySpec, DoubleGaussian, EpsilonField, InitialData, ScatteringField,
};
use crate::quadrature::gauss_legendre_unit;
use crate::solvers::{SolverConfig, SpatialGrid};

/// Cell count and time step of one solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub cells: usize,
    pub dt: f64,
}

/// Everything needed to run one experiment end to end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestPreset {
    pub id: u8,
    pub dimension: usize,
    pub final_time: f64,
    pub sigma: ScatteringField,
    pub epsilon: EpsilonField,
    pub initial: InitialData,
    pub boundary: BoundarySpec,
    pub hf: GridSpec,
    pub lf: GridSpec,
    pub velocity_nodes: usize,
    pub lf_sigma_scale: f64,
    pub candidates: usize,
    pub n: usize,
    pub validation: usize,
    pub sparse_level: u32,
    pub candidate_seed: u64,
    pub validation_seed: u64,
    pub pivot_tol: f64,
    pub bound: BoundConstants,
}

pub const DEFAULT_CANDIDATES: usize = 1000;
pub const DEFAULT_VALIDATION: usize = 200;
pub const DEFAULT_CANDIDATE_SEED: u64 = 20_240_601;
pub const DEFAULT_VALIDATION_SEED: u64 = 99;
/// Multiplier on sigma in the two-velocity model; 3 makes both models share
/// the heat-equation limit `D = 1/(3 sigma)`.
pub const DEFAULT_LF_SIGMA_SCALE: f64 = 3.0;

fn fourier_sigma() -> ScatteringField {
    ScatteringField::FourierCosine {
        base: 1.0,
        amplitude: 4.0,
        dimension: 5,
    }
}

impl TestPreset {
    fn base(id: u8) -> Self {
        Self {
            id,
            dimension: 5,
            final_time: 0.01,
            sigma: fourier_sigma(),
            epsilon: EpsilonField::Constant { value: 1e-8 },
            initial: InitialData::Zero,
            boundary: BoundarySpec::Periodic,
            hf: GridSpec {
                cells: 40,
                dt: 2e-4 / 3.0,
            },
            lf: GridSpec {
                cells: 40,
                dt: 2e-4,
            },
            velocity_nodes: 16,
            lf_sigma_scale: DEFAULT_LF_SIGMA_SCALE,
            candidates: DEFAULT_CANDIDATES,
            n: 12,
            validation: DEFAULT_VALIDATION,
            sparse_level: 5,
            candidate_seed: DEFAULT_CANDIDATE_SEED,
            validation_seed: DEFAULT_VALIDATION_SEED,
            pivot_tol: DEFAULT_PIVOT_TOL,
            bound: BoundConstants::default(),
        }
    }

    /// Random scattering, zero initial data, isotropic inflow 1 on the left.
    pub fn test1(epsilon: f64) -> Self {
        Self {
            epsilon: EpsilonField::Constant { value: epsilon },
            boundary: BoundarySpec::Inflow {
                left: AffineValue::constant(1.0),
                right: AffineValue::constant(0.0),
            },
            ..Self::base(1)
        }
    }

    /// Random double-Maxwellian initial data on a periodic domain.
    pub fn test2() -> Self {
        Self {
            final_time: 0.02,
            epsilon: EpsilonField::Constant { value: 1e-2 },
            initial: InitialData::DoubleGaussian(DoubleGaussian::default()),
            hf: GridSpec {
                cells: 40,
                dt: 1e-4,
            },
            lf: GridSpec {
                cells: 25,
                dt: 2e-4,
            },
            ..Self::base(2)
        }
    }

    /// Riemann problem with a random left state.
    pub fn test3() -> Self {
        let left = AffineValue {
            constant: 1.0,
            coefficients: vec![0.4],
        };
        Self {
            initial: InitialData::RiemannStep {
                left_base: 1.0,
                left_z1: 0.4,
                interface: 0.5,
            },
            boundary: BoundarySpec::Inflow {
                left,
                right: AffineValue::constant(0.0),
            },
            hf: GridSpec {
                cells: 80,
                dt: 5e-5,
            },
            lf: GridSpec {
                cells: 25,
                dt: 2e-4,
            },
            ..Self::base(3)
        }
    }

    /// Mixed regime: spatially varying Knudsen number, deterministic scattering.
    pub fn test4() -> Self {
        Self {
            sigma: ScatteringField::Constant { value: 1.0 },
            epsilon: EpsilonField::mixed_regime(),
            initial: InitialData::DoubleGaussian(DoubleGaussian::default()),
            hf: GridSpec {
                cells: 50,
                dt: 5e-5,
            },
            lf: GridSpec {
                cells: 50,
                dt: 1e-4,
            },
            ..Self::base(4)
        }
    }

    /// Discontinuous scattering and a Gaussian pulse.
    pub fn test5() -> Self {
        Self {
            sigma: ScatteringField::PiecewiseFourier {
                base: 1.0,
                amplitude: 4.0,
                dimension: 5,
                breakpoint: 0.5,
                right_value: 0.2,
            },
            epsilon: EpsilonField::Constant {
                value: 1e-3f64.sqrt(),
            },
            initial: InitialData::GaussianPulse {
                center: 0.5,
                xi: 0.01,
            },
            hf: GridSpec {
                cells: 50,
                dt: 2e-4 / 3.0,
            },
            lf: GridSpec {
                cells: 40,
                dt: 2e-4,
            },
            n: 15,
            ..Self::base(5)
        }
    }

    /// Preset by number with its default Knudsen number.
    pub fn by_id(id: u8) -> Result<Self> {
        match id {
            1 => Ok(Self::test1(1e-8)),
            2 => Ok(Self::test2()),
            3 => Ok(Self::test3()),
            4 => Ok(Self::test4()),
            5 => Ok(Self::test5()),
            _ => Err(Error::InvalidArgument(format!(
                "unknown preset {id}, expected 1-5"
            ))),
        }
    }

    /// Replaces the Knudsen number by a constant.
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = EpsilonField::Constant { value: epsilon };
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.sigma.validate()?;
        self.epsilon.validate()?;
        self.initial.validate()?;
        self.boundary.validate()?;
        if let Some(d) = self.sigma.dimension() {
            if d != self.dimension {
                return Err(Error::DimensionMismatch {
                    expected: self.dimension,
                    got: d,
                });
            }
        }
        if self.dimension == 0 || self.dimension > 10 {
            return Err(Error::InvalidArgument(format!(
                "parameter dimension {} outside 1..=10",
                self.dimension
            )));
        }
        for (name, g) in [("hf", &self.hf), ("lf", &self.lf)] {
            if g.cells < 2 || !(g.dt > 0.0 && g.dt.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} grid needs >= 2 cells and dt > 0"
                )));
            }
        }
        if !(self.final_time >= 0.0) {
            return Err(Error::InvalidArgument("final time must be >= 0".into()));
        }
        if self.velocity_nodes == 0 {
            return Err(Error::InvalidArgument("velocity_nodes must be >= 1".into()));
        }
        if !(self.lf_sigma_scale > 0.0) {
            return Err(Error::InvalidArgument("lf_sigma_scale must be > 0".into()));
        }
        if self.candidates == 0 {
            return Err(Error::InvalidArgument("candidates must be >= 1".into()));
        }
        if self.n > self.candidates {
            return Err(Error::InvalidArgument(format!(
                "n = {} exceeds the {} candidates",
                self.n, self.candidates
            )));
        }
        Ok(())
    }

    pub fn hf_config(&self) -> Result<SolverConfig> {
        self.solver_config(self.hf)
    }

    pub fn lf_config(&self) -> Result<SolverConfig> {
        self.solver_config(self.lf)
    }

    fn solver_config(&self, g: GridSpec) -> Result<SolverConfig> {
        let cfg = SolverConfig {
            grid: SpatialGrid::new(g.cells, self.boundary.clone())?,
            dt: g.dt,
            final_time: self.final_time,
            epsilon: self.epsilon.clone(),
            sigma: self.sigma.clone(),
            velocity: gauss_legendre_unit(self.velocity_nodes)?,
            lf_sigma_scale: self.lf_sigma_scale,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
