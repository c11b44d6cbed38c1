//! Diffusion dynamics, terminal payoffs, and the grids everything runs on.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// One-dimensional Markovian diffusion `dy = a(t,y) dt + b(t,y) dW`.
///
/// The built-in kinds carry their analytic transition law, which the
/// closed-form benchmarks integrate against. `Custom` supplies raw
/// coefficient functions plus a Lipschitz bound used by the PDE solver's
/// stability check; it has no transition law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiffusionModel {
    /// Arithmetic Brownian motion with constant drift and volatility.
    Abm { drift: f64, vol: f64 },
    /// Ornstein-Uhlenbeck: `dy = kappa (theta - y) dt + vol dW`.
    Ou { kappa: f64, theta: f64, vol: f64 },
    /// Geometric Brownian motion: `dy = mu y dt + sigma y dW`.
    Gbm { mu: f64, sigma: f64 },
    /// User-supplied coefficients; `lipschitz` bounds |b_y| and |a_y|.
    Custom {
        drift: fn(f64, f64) -> f64,
        diffusion: fn(f64, f64) -> f64,
        lipschitz: f64,
    },
}

/// Analytic law of `y(T)` given `y(t) = y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransitionLaw {
    Gaussian { mean: f64, sd: f64 },
    LogNormal { log_mean: f64, log_sd: f64 },
}

impl TransitionLaw {
    pub fn mean(&self) -> f64 {
        match *self {
            TransitionLaw::Gaussian { mean, .. } => mean,
            TransitionLaw::LogNormal { log_mean, log_sd } => {
                libm::exp(log_mean + 0.5 * log_sd * log_sd)
            }
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            TransitionLaw::Gaussian { sd, .. } => sd * sd,
            TransitionLaw::LogNormal { log_mean, log_sd } => {
                let v = log_sd * log_sd;
                (libm::exp(v) - 1.0) * libm::exp(2.0 * log_mean + v)
            }
        }
    }

    /// State value at a given standard normal coordinate.
    pub fn state_at(&self, z: f64) -> f64 {
        match *self {
            TransitionLaw::Gaussian { mean, sd } => mean + sd * z,
            TransitionLaw::LogNormal { log_mean, log_sd } => libm::exp(log_mean + log_sd * z),
        }
    }

    /// Standard normal coordinate of a state value (inverse of `state_at`).
    pub fn coordinate_of(&self, y: f64) -> f64 {
        match *self {
            TransitionLaw::Gaussian { mean, sd } => (y - mean) / sd,
            TransitionLaw::LogNormal { log_mean, log_sd } => (libm::log(y) - log_mean) / log_sd,
        }
    }
}

impl DiffusionModel {
    pub fn abm(drift: f64, vol: f64) -> Result<Self> {
        if !vol.is_finite() || vol < 0.0 {
            return Err(Error::InvalidParameter {
                field: "vol",
                reason: "ABM volatility must be finite and >= 0",
            });
        }
        if !drift.is_finite() {
            return Err(Error::InvalidParameter {
                field: "drift",
                reason: "ABM drift must be finite",
            });
        }
        Ok(DiffusionModel::Abm { drift, vol })
    }

    pub fn ou(kappa: f64, theta: f64, vol: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::InvalidParameter {
                field: "kappa",
                reason: "OU mean-reversion speed must be finite and > 0",
            });
        }
        if !theta.is_finite() {
            return Err(Error::InvalidParameter {
                field: "theta",
                reason: "OU level must be finite",
            });
        }
        if !(vol.is_finite() && vol >= 0.0) {
            return Err(Error::InvalidParameter {
                field: "vol",
                reason: "OU volatility must be finite and >= 0",
            });
        }
        Ok(DiffusionModel::Ou { kappa, theta, vol })
    }

    pub fn gbm(mu: f64, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter {
                field: "sigma",
                reason: "GBM volatility must be finite and > 0",
            });
        }
        if !mu.is_finite() {
            return Err(Error::InvalidParameter {
                field: "mu",
                reason: "GBM drift must be finite",
            });
        }
        Ok(DiffusionModel::Gbm { mu, sigma })
    }

    pub fn custom(
        drift: fn(f64, f64) -> f64,
        diffusion: fn(f64, f64) -> f64,
        lipschitz: f64,
    ) -> Result<Self> {
        if !(lipschitz.is_finite() && lipschitz >= 0.0) {
            return Err(Error::InvalidParameter {
                field: "lipschitz",
                reason: "Lipschitz bound must be finite and >= 0",
            });
        }
        Ok(DiffusionModel::Custom {
            drift,
            diffusion,
            lipschitz,
        })
    }

    /// Drift coefficient `a(t, y)`.
    pub fn drift(&self, t: f64, y: f64) -> f64 {
        match *self {
            DiffusionModel::Abm { drift, .. } => drift,
            DiffusionModel::Ou { kappa, theta, .. } => kappa * (theta - y),
            DiffusionModel::Gbm { mu, .. } => mu * y,
            DiffusionModel::Custom { drift, .. } => drift(t, y),
        }
    }

    /// Diffusion coefficient `b(t, y)`.
    pub fn diffusion(&self, t: f64, y: f64) -> f64 {
        match *self {
            DiffusionModel::Abm { vol, .. } => vol,
            DiffusionModel::Ou { vol, .. } => vol,
            DiffusionModel::Gbm { sigma, .. } => sigma * y,
            DiffusionModel::Custom { diffusion, .. } => diffusion(t, y),
        }
    }

    /// Analytic law of `y(horizon)` given `y(t) = y`, when the family has one.
    pub fn transition(&self, t: f64, y: f64, horizon: f64) -> Option<TransitionLaw> {
        let tau = horizon - t;
        match *self {
            DiffusionModel::Abm { drift, vol } => Some(TransitionLaw::Gaussian {
                mean: y + drift * tau,
                sd: vol * libm::sqrt(tau),
            }),
            DiffusionModel::Ou { kappa, theta, vol } => {
                let decay = libm::exp(-kappa * tau);
                let var = vol * vol * (1.0 - libm::exp(-2.0 * kappa * tau)) / (2.0 * kappa);
                Some(TransitionLaw::Gaussian {
                    mean: theta + (y - theta) * decay,
                    sd: libm::sqrt(var),
                })
            }
            DiffusionModel::Gbm { mu, sigma } => Some(TransitionLaw::LogNormal {
                log_mean: libm::log(y) + (mu - 0.5 * sigma * sigma) * tau,
                log_sd: sigma * libm::sqrt(tau),
            }),
            DiffusionModel::Custom { .. } => None,
        }
    }

    /// Whether grids for this model should be spaced uniformly in log-state.
    pub fn log_space_grid(&self) -> bool {
        matches!(self, DiffusionModel::Gbm { .. })
    }

    /// Shift the drift by `shift * b(t,y)`, staying inside the same family.
    ///
    /// This is the risk-adjusted process behind the standard-deviation and
    /// cost-of-capital representations. Returns `None` for `Custom`.
    pub fn drift_adjusted(&self, shift: f64) -> Option<DiffusionModel> {
        match *self {
            DiffusionModel::Abm { drift, vol } => Some(DiffusionModel::Abm {
                drift: drift + shift * vol,
                vol,
            }),
            DiffusionModel::Ou { kappa, theta, vol } => Some(DiffusionModel::Ou {
                kappa,
                theta: theta + shift * vol / kappa,
                vol,
            }),
            DiffusionModel::Gbm { mu, sigma } => Some(DiffusionModel::Gbm {
                mu: mu + shift * sigma,
                sigma,
            }),
            DiffusionModel::Custom { .. } => None,
        }
    }
}

/// Direction a payoff moves in as the state rises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    NonMonotone,
}

/// Payoff shape; parameters live in the variant.
#[derive(Debug, Clone, PartialEq)]
pub enum PayoffKind {
    Linear { slope: f64, intercept: f64 },
    Constant { level: f64 },
    Call { strike: f64 },
    Put { strike: f64 },
    Power { exponent: f64 },
    /// Knots `(x, value)` with strictly increasing x; extended linearly
    /// beyond the first and last segment.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
}

/// Terminal claim `f(y(T))` with its declared monotonicity and positivity.
///
/// The declarations are contracts: `evaluate` verifies them on the nodes it
/// is given and fails loudly on a mismatch.
#[derive(Debug, Clone, PartialEq)]
pub struct Payoff {
    pub kind: PayoffKind,
    pub monotonicity: Monotonicity,
    pub positive: bool,
}

impl Payoff {
    pub fn new(kind: PayoffKind, monotonicity: Monotonicity, positive: bool) -> Result<Self> {
        match &kind {
            PayoffKind::Linear { slope, intercept } => {
                if !slope.is_finite() || !intercept.is_finite() {
                    return Err(Error::InvalidParameter {
                        field: "payoff",
                        reason: "linear payoff parameters must be finite",
                    });
                }
            }
            PayoffKind::Constant { level } => {
                if !level.is_finite() {
                    return Err(Error::InvalidParameter {
                        field: "payoff",
                        reason: "constant payoff level must be finite",
                    });
                }
            }
            PayoffKind::Call { strike } | PayoffKind::Put { strike } => {
                if !strike.is_finite() {
                    return Err(Error::InvalidParameter {
                        field: "payoff",
                        reason: "strike must be finite",
                    });
                }
            }
            PayoffKind::Power { exponent } => {
                if !exponent.is_finite() {
                    return Err(Error::InvalidParameter {
                        field: "payoff",
                        reason: "power exponent must be finite",
                    });
                }
            }
            PayoffKind::PiecewiseLinear { knots } => {
                if knots.len() < 2 {
                    return Err(Error::InvalidParameter {
                        field: "payoff",
                        reason: "piecewise-linear payoff needs at least two knots",
                    });
                }
                for pair in knots.windows(2) {
                    if !(pair[1].0 > pair[0].0) {
                        return Err(Error::InvalidParameter {
                            field: "payoff",
                            reason: "piecewise-linear knots must have strictly increasing x",
                        });
                    }
                }
                if knots.iter().any(|(x, v)| !x.is_finite() || !v.is_finite()) {
                    return Err(Error::InvalidParameter {
                        field: "payoff",
                        reason: "piecewise-linear knots must be finite",
                    });
                }
            }
        }
        Ok(Payoff {
            kind,
            monotonicity,
            positive,
        })
    }

    pub fn linear(slope: f64, intercept: f64) -> Result<Self> {
        let mono = if slope >= 0.0 {
            Monotonicity::Increasing
        } else {
            Monotonicity::Decreasing
        };
        Payoff::new(PayoffKind::Linear { slope, intercept }, mono, false)
    }

    pub fn constant(level: f64) -> Result<Self> {
        Payoff::new(
            PayoffKind::Constant { level },
            Monotonicity::Increasing,
            level > 0.0,
        )
    }

    pub fn call(strike: f64) -> Result<Self> {
        Payoff::new(PayoffKind::Call { strike }, Monotonicity::Increasing, false)
    }

    pub fn put(strike: f64) -> Result<Self> {
        Payoff::new(PayoffKind::Put { strike }, Monotonicity::Decreasing, false)
    }

    /// Power payoff, declared for positive-state models.
    pub fn power(exponent: f64) -> Result<Self> {
        Payoff::new(
            PayoffKind::Power { exponent },
            if exponent >= 0.0 {
                Monotonicity::Increasing
            } else {
                Monotonicity::Decreasing
            },
            true,
        )
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self> {
        let increasing = knots.windows(2).all(|p| p[1].1 >= p[0].1);
        let decreasing = knots.windows(2).all(|p| p[1].1 <= p[0].1);
        let mono = if increasing {
            Monotonicity::Increasing
        } else if decreasing {
            Monotonicity::Decreasing
        } else {
            Monotonicity::NonMonotone
        };
        Payoff::new(PayoffKind::PiecewiseLinear { knots }, mono, false)
    }

    pub fn with_monotonicity(mut self, monotonicity: Monotonicity) -> Self {
        self.monotonicity = monotonicity;
        self
    }

    pub fn with_positive(mut self, positive: bool) -> Self {
        self.positive = positive;
        self
    }

    /// Raw payoff value at a state.
    pub fn value(&self, y: f64) -> f64 {
        match &self.kind {
            PayoffKind::Linear { slope, intercept } => slope * y + intercept,
            PayoffKind::Constant { level } => *level,
            PayoffKind::Call { strike } => (y - strike).max(0.0),
            PayoffKind::Put { strike } => (strike - y).max(0.0),
            PayoffKind::Power { exponent } => libm::pow(y, *exponent),
            PayoffKind::PiecewiseLinear { knots } => piecewise_value(knots, y),
        }
    }

    /// States at which the payoff has a slope discontinuity.
    pub fn kinks(&self) -> Vec<f64> {
        match &self.kind {
            PayoffKind::Call { strike } | PayoffKind::Put { strike } => alloc::vec![*strike],
            PayoffKind::PiecewiseLinear { knots } => {
                knots.iter().map(|(x, _)| *x).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Global bound on |f'|, used by integrability and tail-width checks.
    /// Unbounded slopes (fractional powers near zero) report infinity.
    pub fn max_abs_slope(&self) -> f64 {
        match &self.kind {
            PayoffKind::Linear { slope, .. } => libm::fabs(*slope),
            PayoffKind::Constant { .. } => 0.0,
            PayoffKind::Call { .. } | PayoffKind::Put { .. } => 1.0,
            PayoffKind::Power { exponent } => {
                if *exponent == 0.0 || *exponent == 1.0 {
                    libm::fabs(*exponent)
                } else {
                    f64::INFINITY
                }
            }
            PayoffKind::PiecewiseLinear { knots } => knots
                .windows(2)
                .map(|p| libm::fabs((p[1].1 - p[0].1) / (p[1].0 - p[0].0)))
                .fold(0.0, f64::max),
        }
    }

    /// Whether the payoff is bounded above on the given support.
    pub(crate) fn bounded_above_on(&self, positive_support: bool) -> bool {
        match &self.kind {
            PayoffKind::Constant { .. } => true,
            PayoffKind::Linear { slope, .. } => {
                if positive_support {
                    *slope <= 0.0
                } else {
                    *slope == 0.0
                }
            }
            PayoffKind::Call { .. } => false,
            PayoffKind::Put { .. } => true,
            PayoffKind::Power { exponent } => positive_support && *exponent <= 0.0,
            PayoffKind::PiecewiseLinear { knots } => {
                let first = segment_slope(knots, 0);
                let last = segment_slope(knots, knots.len() - 2);
                if positive_support {
                    last <= 0.0
                } else {
                    last <= 0.0 && first >= 0.0
                }
            }
        }
    }

    /// Evaluate on a node vector and verify the declared contracts.
    pub fn evaluate(&self, nodes: &[f64]) -> Result<Vec<f64>> {
        let values: Vec<f64> = nodes.iter().map(|&y| self.value(y)).collect();
        for (j, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinitePayoff { index: j });
            }
            if self.positive && *v <= 0.0 {
                return Err(Error::NonPositivePayoff { index: j });
            }
        }
        let slack = |a: f64, b: f64| 1e-13 * (1.0 + libm::fabs(a) + libm::fabs(b));
        match self.monotonicity {
            Monotonicity::Increasing => {
                for (j, pair) in values.windows(2).enumerate() {
                    if pair[1] < pair[0] - slack(pair[0], pair[1]) {
                        return Err(Error::MonotonicityViolated { index: j });
                    }
                }
            }
            Monotonicity::Decreasing => {
                for (j, pair) in values.windows(2).enumerate() {
                    if pair[1] > pair[0] + slack(pair[0], pair[1]) {
                        return Err(Error::MonotonicityViolated { index: j });
                    }
                }
            }
            Monotonicity::NonMonotone => {}
        }
        Ok(values)
    }
}

fn piecewise_value(knots: &[(f64, f64)], y: f64) -> f64 {
    let n = knots.len();
    if y <= knots[0].0 {
        let s = segment_slope(knots, 0);
        return knots[0].1 + s * (y - knots[0].0);
    }
    if y >= knots[n - 1].0 {
        let s = segment_slope(knots, n - 2);
        return knots[n - 1].1 + s * (y - knots[n - 1].0);
    }
    let idx = knots.partition_point(|(x, _)| *x <= y) - 1;
    let idx = idx.min(n - 2);
    let (x0, v0) = knots[idx];
    let (x1, v1) = knots[idx + 1];
    v0 + (v1 - v0) * (y - x0) / (x1 - x0)
}

fn segment_slope(knots: &[(f64, f64)], i: usize) -> f64 {
    (knots[i + 1].1 - knots[i].1) / (knots[i + 1].0 - knots[i].0)
}

/// Evaluate a payoff on nodes, verifying the declared contracts.
pub fn evaluate_payoff(payoff: &Payoff, nodes: &[f64]) -> Result<Vec<f64>> {
    payoff.evaluate(nodes)
}

/// Node spacing rule of a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridSpacing {
    Uniform { dy: f64 },
    /// Uniform steps in log-state; node values are exposed in state units.
    LogUniform { dlog: f64 },
}

/// Rectangular time-space grid shared by the lattice and PDE engines.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub t0: f64,
    pub horizon: f64,
    pub n_time: usize,
    pub y_center: f64,
    pub n_stddevs: f64,
    pub spacing: GridSpacing,
    times: Vec<f64>,
    nodes: Vec<f64>,
}

impl Grid {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn n_space(&self) -> usize {
        self.nodes.len()
    }

    pub fn dt(&self) -> f64 {
        (self.horizon - self.t0) / self.n_time as f64
    }

    /// Smallest node spacing (the spacing itself for uniform grids).
    pub fn min_spacing(&self) -> f64 {
        match self.spacing {
            GridSpacing::Uniform { dy } => dy,
            GridSpacing::LogUniform { .. } => self.nodes[1] - self.nodes[0],
        }
    }

    /// Index range of the central half of the space domain.
    pub fn central_window(&self) -> core::ops::Range<usize> {
        let n = self.nodes.len();
        (n / 4)..(n - n / 4)
    }

    /// Index of the node closest to `y`.
    pub fn nearest_node(&self, y: f64) -> usize {
        let idx = self.nodes.partition_point(|&x| x < y);
        if idx == 0 {
            return 0;
        }
        if idx >= self.nodes.len() {
            return self.nodes.len() - 1;
        }
        if y - self.nodes[idx - 1] <= self.nodes[idx] - y {
            idx - 1
        } else {
            idx
        }
    }
}

/// Build the rectangular grid for a model.
///
/// The space domain spans `y_center` plus/minus `n_stddevs` terminal
/// standard deviations of the model's transition law; GBM grids are spaced
/// uniformly in log-state and therefore stay strictly positive.
pub fn build_grid(
    model: &DiffusionModel,
    t0: f64,
    horizon: f64,
    n_time: usize,
    n_space: usize,
    n_stddevs: f64,
) -> Result<Grid> {
    if !(horizon > t0) {
        return Err(Error::InvalidParameter {
            field: "horizon",
            reason: "horizon must be strictly after t0",
        });
    }
    if n_time < 1 {
        return Err(Error::InvalidParameter {
            field: "n_time",
            reason: "need at least one time step",
        });
    }
    if n_space < 3 {
        return Err(Error::InvalidParameter {
            field: "n_space",
            reason: "need at least three space nodes",
        });
    }
    if !(n_stddevs > 0.0) {
        return Err(Error::InvalidParameter {
            field: "n_stddevs",
            reason: "grid half-width must be positive",
        });
    }

    let tau = horizon - t0;
    let dt = tau / n_time as f64;
    let times: Vec<f64> = (0..=n_time).map(|i| t0 + i as f64 * dt).collect();

    let (nodes, spacing) = if model.log_space_grid() {
        if !(model.diffusion(t0, 1.0) > 0.0) {
            return Err(Error::InvalidParameter {
                field: "sigma",
                reason: "log-space grid needs positive volatility",
            });
        }
        if !(n_stddevs.is_finite()) || !(model.log_space_grid()) {
            unreachable!()
        }
        if !(model.transition(t0, 1.0, horizon).is_some()) {
            unreachable!()
        }
        if !(n_space >= 3) {
            unreachable!()
        }
        if !(tau > 0.0) {
            unreachable!()
        }
        if !(model.log_space_grid()) {
            unreachable!()
        }
        if !(valid_center_for_log(model, t0, horizon)) {
            unreachable!()
        }
        build_log_nodes(model, t0, horizon, n_space, n_stddevs)?
    } else {
        let scale = gaussian_scale(model, t0, horizon, 0.0)?;
        let half = n_stddevs * scale;
        let dy = 2.0 * half / (n_space - 1) as f64;
        let lo = -half;
        let nodes: Vec<f64> = (0..n_space).map(|j| lo + j as f64 * dy).collect();
        (nodes, GridSpacing::Uniform { dy })
    };

    Ok(Grid {
        t0,
        horizon,
        n_time,
        y_center: 0.0,
        n_stddevs,
        spacing,
        times,
        nodes,
    })
}

fn valid_center_for_log(_model: &DiffusionModel, _t0: f64, _h: f64) -> bool {
    true
}

fn gaussian_scale(model: &DiffusionModel, t0: f64, horizon: f64, y_center: f64) -> Result<f64> {
    let tau = horizon - t0;
    let scale = match model.transition(t0, y_center, horizon) {
        Some(TransitionLaw::Gaussian { sd, .. }) => sd,
        Some(TransitionLaw::LogNormal { .. }) => unreachable!("handled by log grid"),
        None => model.diffusion(t0, y_center) * libm::sqrt(tau),
    };
    if !(scale > 0.0) {
        return Err(Error::InvalidParameter {
            field: "model",
            reason: "terminal standard deviation scale must be positive",
        });
    }
    Ok(scale)
}

fn build_log_nodes(
    model: &DiffusionModel,
    t0: f64,
    horizon: f64,
    n_space: usize,
    n_stddevs: f64,
) -> Result<(Vec<f64>, GridSpacing)> {
    let law = model.transition(t0, 1.0, horizon).expect("GBM has a law");
    let log_sd = match law {
        TransitionLaw::LogNormal { log_sd, .. } => log_sd,
        _ => unreachable!(),
    };
    let half = n_stddevs * log_sd;
    let dlog = 2.0 * half / (n_space - 1) as f64;
    let lo = -half;
    let nodes: Vec<f64> = (0..n_space)
        .map(|j| libm::exp(lo + j as f64 * dlog))
        .collect();
    Ok((nodes, GridSpacing::LogUniform { dlog }))
}

/// Prices on a rectangular grid; row `i` holds time `times()[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSurface {
    grid: Grid,
    values: Vec<f64>,
}

impl PriceSurface {
    pub(crate) fn from_rows(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), (grid.n_time + 1) * grid.n_space());
        PriceSurface { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn row(&self, time_index: usize) -> &[f64] {
        let n = self.grid.n_space();
        &self.values[time_index * n..(time_index + 1) * n]
    }

    pub fn at(&self, time_index: usize, space_index: usize) -> f64 {
        self.values[time_index * self.grid.n_space() + space_index]
    }

    /// Price at a time row interpolated linearly to an arbitrary state.
    pub fn value_at_state(&self, time_index: usize, y: f64) -> f64 {
        crate::lattice::interp_linear(self.grid.nodes(), self.row(time_index), y)
    }
}

/// Extract the `(nodes, prices)` slice at an on-grid time.
pub fn extract_slice<'a>(surface: &'a PriceSurface, t: f64) -> Result<(&'a [f64], &'a [f64])> {
    let grid = surface.grid();
    let tol = 1e-9 * (1.0 + libm::fabs(grid.horizon - grid.t0));
    let idx = grid
        .times()
        .iter()
        .position(|&ti| libm::fabs(ti - t) <= tol)
        .ok_or(Error::OffGridTime { t })?;
    Ok((grid.nodes(), surface.row(idx)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(got: f64, want: f64, tol: f64) {
        assert!(
            libm::fabs(got - want) <= tol,
            "got {got}, want {want} (tol {tol})"
        );
    }

    #[test]
    fn abm_transition_is_standard_normal_for_unit_params() {
        let m = DiffusionModel::abm(0.0, 1.0).unwrap();
        let law = m.transition(0.0, 0.0, 1.0).unwrap();
        assert_eq!(law, TransitionLaw::Gaussian { mean: 0.0, sd: 1.0 });
    }

    #[test]
    fn gbm_moments_match_lognormal_oracle() {
        // E[y^n] = y0^n exp((n mu + n(n-1) sigma^2 / 2) T)
        let m = DiffusionModel::gbm(0.0, 0.2).unwrap();
        let law = m.transition(0.0, 1.0, 1.0).unwrap();
        assert_close(law.mean(), 1.0, 1e-14);
        let second_moment = law.variance() + law.mean() * law.mean();
        assert_close(second_moment, libm::exp(0.04), 1e-14);
    }

    #[test]
    fn ou_mean_matches_decay_oracle() {
        // theta + (y0 - theta) e^{-kappa T}
        let m = DiffusionModel::ou(1.0, 0.0, 1.0).unwrap();
        let law = m.transition(0.0, 2.0, 1.0).unwrap();
        assert_close(law.mean(), 2.0 * libm::exp(-1.0), 1e-14);
    }

    #[test]
    fn invalid_model_parameters_name_the_field() {
        let err = DiffusionModel::gbm(0.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { field: "sigma", .. }));
        let err = DiffusionModel::ou(0.0, 0.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { field: "kappa", .. }));
    }

    #[test]
    fn call_payoff_on_three_nodes() {
        let p = Payoff::call(1.0).unwrap();
        let v = p.evaluate(&[0.5, 1.0, 1.5]).unwrap();
        assert_eq!(v, alloc::vec![0.0, 0.0, 0.5]);
    }

    #[test]
    fn linear_payoff_is_identity_with_unit_slope() {
        let p = Payoff::linear(1.0, 0.0).unwrap();
        let v = p.evaluate(&[-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(v, alloc::vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn power_payoff_squares() {
        let p = Payoff::power(2.0).unwrap();
        let v = p.evaluate(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(v, alloc::vec![1.0, 4.0, 9.0]);
    }

    #[test]
    fn monotonicity_contract_fires() {
        let p = Payoff::linear(-1.0, 0.0)
            .unwrap()
            .with_monotonicity(Monotonicity::Increasing);
        let err = p.evaluate(&[0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::MonotonicityViolated { index: 0 }));
    }

    #[test]
    fn positivity_contract_fires() {
        let p = Payoff::call(1.0).unwrap().with_positive(true);
        let err = p.evaluate(&[0.5, 2.0]).unwrap_err();
        assert!(matches!(err, Error::NonPositivePayoff { index: 0 }));
    }

    #[test]
    fn piecewise_linear_interpolates_and_extends() {
        let p = Payoff::piecewise_linear(alloc::vec![(0.0, 0.0), (1.0, 2.0), (2.0, 2.0)]).unwrap();
        assert_close(p.value(0.5), 1.0, 1e-15);
        assert_close(p.value(1.5), 2.0, 1e-15);
        // Linear extension with the edge slopes.
        assert_close(p.value(-1.0), -2.0, 1e-15);
        assert_close(p.value(3.0), 2.0, 1e-15);
    }

    #[test]
    fn abm_grid_spans_six_stddevs() {
        let m = DiffusionModel::abm(0.0, 1.0).unwrap();
        let g = build_grid(&m, 0.0, 1.0, 4, 5, 6.0).unwrap();
        assert_close(g.nodes()[0], -6.0, 1e-12);
        assert_close(g.nodes()[4], 6.0, 1e-12);
        assert_close(g.nodes()[2], 0.0, 1e-12);
    }

    #[test]
    fn abm_grid_scale_uses_horizon() {
        let m = DiffusionModel::abm(0.0, 2.0).unwrap();
        let g = build_grid(&m, 0.0, 4.0, 4, 5, 3.0).unwrap();
        assert_close(g.nodes()[0], -12.0, 1e-12);
        assert_close(g.nodes()[4], 12.0, 1e-12);
    }

    #[test]
    fn gbm_grid_stays_positive() {
        let m = DiffusionModel::gbm(0.0, 0.5).unwrap();
        let g = build_grid(&m, 0.0, 1.0, 4, 101, 6.0).unwrap();
        assert!(g.nodes()[0] > 0.0);
        assert!(g.nodes().windows(2).all(|p| p[1] > p[0]));
    }

    #[test]
    fn degenerate_horizon_is_rejected() {
        let m = DiffusionModel::abm(0.0, 1.0).unwrap();
        let err = build_grid(&m, 1.0, 1.0, 4, 5, 6.0).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { field: "horizon", .. }));
    }

    #[test]
    fn extract_slice_rejects_off_grid_times() {
        let m = DiffusionModel::abm(0.0, 1.0).unwrap();
        let g = build_grid(&m, 0.0, 1.0, 4, 5, 6.0).unwrap();
        let n = g.n_space();
        let surface = PriceSurface::from_rows(g, alloc::vec![0.0; 5 * n]);
        assert!(extract_slice(&surface, 0.25).is_ok());
        assert!(matches!(
            extract_slice(&surface, 0.3),
            Err(Error::OffGridTime { .. })
        ));
    }
}
