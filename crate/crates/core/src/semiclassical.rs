//! Classical phase-space model of the driven lattice in scaled coordinates
//! `Q = 2πq/L`, `P = bp/ħ` with `b = ħ = 1`, `L = N/2`:
//!
//! ```text
//! dQ/dt = -(8πJ/N) sin P
//! dP/dt =  (4π/N) [Δ₀ + Δ₁ cos ωt] sin Q
//! ```
//!
//! Around the fixed point `(2π, 0)` this linearizes to the Mathieu oscillator
//! `δ'' + Ω²[1 + (Δ₁/Δ₀) cos ωt] δ = 0` with `Ω = (4π/N)√(2Δ₀J)`.
//! All frequencies are angular (rad/ns).

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{JunctionError, Result};
use crate::model::{small_oscillation_frequency, units};

/// Integrator steps per fastest local oscillation in [`monodromy`].
pub const DEFAULT_STEPS_PER_OSCILLATION: usize = 128;

/// Default trajectory steps per drive period.
pub const DEFAULT_TRAJECTORY_STEPS: usize = 200;

pub const DEFAULT_GRID_RESOLUTION: usize = 200;

/// Slack on `|tr M| ≤ 2` for roundoff.
pub const STABILITY_SLACK: f64 = 1e-9;

// Omelyan–Mryglod–Folk position-extended Forest–Ruth coefficients.
const XI: f64 = 0.178_617_895_844_809_1;
const LAMBDA: f64 = -0.212_341_831_062_605_4;
const CHI: f64 = -0.066_264_582_669_818_49;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemiclassicalParams {
    pub n_sites: usize,
    pub dc_amplitude: f64,
    pub ac_amplitude: f64,
    pub angular_frequency: f64,
    pub coupling: f64,
}

impl SemiclassicalParams {
    pub fn new(n_sites: usize, dc_amplitude: f64, ac_amplitude: f64, angular_frequency: f64, coupling: f64) -> Result<Self> {
        if n_sites < 2 || n_sites % 2 != 0 {
            return Err(JunctionError::InvalidSpec(format!("semiclassical model needs even N >= 2, got {n_sites}")));
        }
        if !(dc_amplitude * coupling > 0.0) {
            return Err(JunctionError::InvalidSpec(format!(
                "need Δ₀·J > 0 for a real small-oscillation frequency (Δ₀={dc_amplitude}, J={coupling})"
            )));
        }
        if !(angular_frequency > 0.0 && angular_frequency.is_finite() && ac_amplitude.is_finite()) {
            return Err(JunctionError::InvalidSpec(format!("drive frequency must be positive, got {angular_frequency}")));
        }
        Ok(SemiclassicalParams { n_sites, dc_amplitude, ac_amplitude, angular_frequency, coupling })
    }

    /// Builds parameters from ordinary frequencies in MHz.
    pub fn from_mhz(n_sites: usize, dc_mhz: f64, ac_mhz: f64, drive_mhz: f64, coupling_mhz: f64) -> Result<Self> {
        Self::new(
            n_sites,
            units::mhz_to_angular(dc_mhz),
            units::mhz_to_angular(ac_mhz),
            units::mhz_to_angular(drive_mhz),
            units::mhz_to_angular(coupling_mhz),
        )
    }

    pub fn with_drive(self, angular_frequency: f64, ac_amplitude: f64) -> Self {
        SemiclassicalParams { angular_frequency, ac_amplitude, ..self }
    }

    /// `Ω = (4π/N)√(2Δ₀J)`.
    pub fn small_oscillation_frequency(&self) -> f64 {
        small_oscillation_frequency(self.n_sites, self.dc_amplitude, self.coupling)
    }

    pub fn period(&self) -> f64 {
        TAU / self.angular_frequency
    }

    pub fn chain_length(&self) -> f64 {
        self.n_sites as f64 / 2.0
    }

    /// `2π/N`, the commutator scale of `Q` and `P`.
    pub fn effective_hbar(&self) -> f64 {
        TAU / self.n_sites as f64
    }

    fn drift_rate(&self) -> f64 {
        8.0 * PI * self.coupling / self.n_sites as f64
    }

    fn kick_rate(&self, t: f64) -> f64 {
        4.0 * PI / self.n_sites as f64 * (self.dc_amplitude + self.ac_amplitude * (self.angular_frequency * t).cos())
    }
}

/// `(dQ/dt, dP/dt)`.
pub fn classical_rhs(q: f64, p: f64, t: f64, params: &SemiclassicalParams) -> (f64, f64) {
    (-params.drift_rate() * p.sin(), params.kick_rate(t) * q.sin())
}

/// `Δ₀ cos Q + 2J cos P`, conserved when `Δ₁ = 0`.
pub fn static_energy(q: f64, p: f64, params: &SemiclassicalParams) -> f64 {
    params.dc_amplitude * q.cos() + 2.0 * params.coupling * p.cos()
}

/// One PEFRL step of a separable system `x' = drift(y)`, `y' = kick(x, t)`;
/// time advances with the drifts.
#[inline]
fn pefrl_step<S: Copy>(
    x: &mut S,
    y: &mut S,
    t: &mut f64,
    h: f64,
    drift: impl Fn(&mut S, &S, f64),
    kick: impl Fn(&mut S, &S, f64, f64),
) {
    let stages = [
        (XI, 0.5 * (1.0 - 2.0 * LAMBDA)),
        (CHI, LAMBDA),
        (1.0 - 2.0 * (CHI + XI), LAMBDA),
        (CHI, 0.5 * (1.0 - 2.0 * LAMBDA)),
    ];
    for (c, d) in stages {
        drift(x, y, c * h);
        *t += c * h;
        kick(y, x, *t, d * h);
    }
    drift(x, y, XI * h);
    *t += XI * h;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Unwrapped `Q`; use [`Trajectory::wrapped_q`] for reporting.
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    /// Indices of samples at `t = kT`.
    pub stroboscopic: Vec<usize>,
}

impl Trajectory {
    pub fn wrapped_q(&self) -> Vec<f64> {
        self.q.iter().map(|q| q.rem_euclid(TAU)).collect()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Integrates the nonlinear equations from `t = 0`.
///
/// The step is shrunk to the nearest divisor of the drive period so that
/// stroboscopic samples fall on grid points; `duration` is rounded to a whole
/// number of steps.
pub fn integrate_trajectory(q0: f64, p0: f64, duration: f64, step: f64, params: &SemiclassicalParams) -> Result<Trajectory> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(JunctionError::NonPositiveStep(step));
    }
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(JunctionError::InvalidSpec(format!("duration must be non-negative, got {duration}")));
    }
    let period = params.period();
    let per_period = (period / step).ceil().max(1.0) as usize;
    let h = period / per_period as f64;
    let n = (duration / h).round() as usize;
    let drift_rate = params.drift_rate();
    let (mut q, mut p) = (q0, p0);
    let mut traj = Trajectory {
        times: Vec::with_capacity(n + 1),
        q: Vec::with_capacity(n + 1),
        p: Vec::with_capacity(n + 1),
        stroboscopic: Vec::new(),
    };
    for k in 0..=n {
        if k > 0 {
            let mut t = (k - 1) as f64 * h;
            pefrl_step(
                &mut q,
                &mut p,
                &mut t,
                h,
                |q, p, dt| *q -= drift_rate * p.sin() * dt,
                |p, q, t, dt| *p += params.kick_rate(t) * q.sin() * dt,
            );
        }
        if k % per_period == 0 {
            traj.stroboscopic.push(k);
        }
        traj.times.push(k as f64 * h);
        traj.q.push(q);
        traj.p.push(p);
    }
    Ok(traj)
}

/// Default trajectory step: the shorter of the drive and small-oscillation
/// periods over [`DEFAULT_TRAJECTORY_STEPS`].
pub fn default_trajectory_step(params: &SemiclassicalParams) -> f64 {
    params.period().min(TAU / params.small_oscillation_frequency()) / DEFAULT_TRAJECTORY_STEPS as f64
}

/// Angular frequency from upward zero crossings of `Q - 2π`.
pub fn measured_frequency(traj: &Trajectory) -> Option<f64> {
    let mut crossings = Vec::new();
    for k in 1..traj.len() {
        let (a, b) = (traj.q[k - 1] - TAU, traj.q[k] - TAU);
        if a < 0.0 && b >= 0.0 {
            let frac = a / (a - b);
            crossings.push(traj.times[k - 1] + frac * (traj.times[k] - traj.times[k - 1]));
        }
    }
    if crossings.len() < 2 {
        return None;
    }
    let cycles = (crossings.len() - 1) as f64;
    Some(TAU * cycles / (crossings[crossings.len() - 1] - crossings[0]))
}

/// One-period flow map of the linearized system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monodromy {
    /// Row-major `[[δQ_T/δQ_0, δQ_T/δP_0], [δP_T/δQ_0, δP_T/δP_0]]`.
    pub matrix: [[f64; 2]; 2],
    pub steps: usize,
}

impl Monodromy {
    pub fn trace(&self) -> f64 {
        self.matrix[0][0] + self.matrix[1][1]
    }

    pub fn det(&self) -> f64 {
        self.matrix[0][0] * self.matrix[1][1] - self.matrix[0][1] * self.matrix[1][0]
    }

    /// `|det M - 1|` relative to `max(1, ‖M‖²)`, the scale at which roundoff
    /// enters the determinant.
    pub fn det_error(&self) -> f64 {
        let norm2 = self.matrix.iter().flatten().map(|v| v * v).sum::<f64>();
        (self.det() - 1.0).abs() / norm2.max(1.0)
    }

    pub fn is_stable(&self) -> bool {
        self.trace().abs() <= 2.0 + STABILITY_SLACK
    }
}

/// Monodromy of the linearized oscillator at drive `(ω, Δ₁)`.
///
/// Both fundamental solutions use the same symplectic integrator, so
/// `det M = 1` up to roundoff.
pub fn monodromy(omega: f64, delta1: f64, params: &SemiclassicalParams, steps_per_oscillation: usize) -> Result<Monodromy> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(JunctionError::InvalidSpec(format!("drive frequency must be positive, got {omega}")));
    }
    let p = params.with_drive(omega, delta1);
    let period = p.period();
    let fastest = p.small_oscillation_frequency() * (1.0 + delta1.abs() / p.dc_amplitude).sqrt();
    let steps = ((period * fastest / TAU) * steps_per_oscillation as f64).ceil().max(steps_per_oscillation as f64) as usize;
    let h = period / steps as f64;
    let drift_rate = p.drift_rate();
    // columns: solution started from δQ = 1 and from δP = 1
    let mut x = [1.0, 0.0];
    let mut y = [0.0, 1.0];
    for k in 0..steps {
        let mut t = k as f64 * h;
        pefrl_step(
            &mut x,
            &mut y,
            &mut t,
            h,
            |x, y, dt| {
                x[0] -= drift_rate * y[0] * dt;
                x[1] -= drift_rate * y[1] * dt;
            },
            |y, x, t, dt| {
                let k = p.kick_rate(t) * dt;
                y[0] += k * x[0];
                y[1] += k * x[1];
            },
        );
    }
    Ok(Monodromy { matrix: [[x[0], x[1]], [y[0], y[1]]], steps })
}

pub fn monodromy_trace(omega: f64, delta1: f64, params: &SemiclassicalParams) -> Result<f64> {
    Ok(monodromy(omega, delta1, params, DEFAULT_STEPS_PER_OSCILLATION)?.trace().abs())
}

/// Axes of a stability scan: `ω_k = ω_max·k/n` for `k = 1..=n` and
/// `Δ₁_j = Δ₁_max·j/m` for `j = 0..=m`. Nodes of a grid with resolution `n`
/// reappear exactly in the grid with resolution `2n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub omega_max: f64,
    pub delta1_max: f64,
    pub omega_points: usize,
    pub delta1_steps: usize,
    pub steps_per_oscillation: usize,
}

impl GridSpec {
    /// `ω ∈ (0, 3Ω]`, `Δ₁ ∈ [0, 2Δ₀]`.
    pub fn default_for(params: &SemiclassicalParams) -> Self {
        GridSpec {
            omega_max: 3.0 * params.small_oscillation_frequency(),
            delta1_max: 2.0 * params.dc_amplitude,
            omega_points: DEFAULT_GRID_RESOLUTION,
            delta1_steps: DEFAULT_GRID_RESOLUTION,
            steps_per_oscillation: DEFAULT_STEPS_PER_OSCILLATION,
        }
    }

    pub fn with_resolution(self, resolution: usize) -> Self {
        GridSpec { omega_points: resolution, delta1_steps: resolution, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_max > 0.0 && self.omega_max.is_finite()) {
            return Err(JunctionError::InvalidSpec(format!("ω range must be positive, got {}", self.omega_max)));
        }
        if !(self.delta1_max >= 0.0 && self.delta1_max.is_finite()) {
            return Err(JunctionError::InvalidSpec(format!("Δ₁ range must be non-negative, got {}", self.delta1_max)));
        }
        if self.omega_points == 0 || self.steps_per_oscillation == 0 {
            return Err(JunctionError::InvalidSpec("grid needs at least one ω point and one step".into()));
        }
        Ok(())
    }

    pub fn omega_axis(&self) -> Vec<f64> {
        let n = self.omega_points as f64;
        (1..=self.omega_points).map(|k| self.omega_max * (k as f64 / n)).collect()
    }

    pub fn delta1_axis(&self) -> Vec<f64> {
        if self.delta1_steps == 0 {
            return vec![0.0];
        }
        let n = self.delta1_steps as f64;
        (0..=self.delta1_steps).map(|j| self.delta1_max * (j as f64 / n)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityGrid {
    pub omega: Vec<f64>,
    pub delta1: Vec<f64>,
    /// `abs_trace[j][k]` at `(ω_k, Δ₁_j)`.
    pub abs_trace: Vec<Vec<f64>>,
    pub stable: Vec<Vec<bool>>,
    /// Largest relative `|det M - 1|` over the grid.
    pub max_det_error: f64,
}

impl StabilityGrid {
    pub fn cell(&self, omega_index: usize, delta1_index: usize) -> (f64, bool) {
        (self.abs_trace[delta1_index][omega_index], self.stable[delta1_index][omega_index])
    }

    /// Index of the ω node closest to `omega`.
    pub fn nearest_omega(&self, omega: f64) -> usize {
        nearest(&self.omega, omega)
    }

    pub fn nearest_delta1(&self, delta1: f64) -> usize {
        nearest(&self.delta1, delta1)
    }

    /// Whether `(ω_k, Δ₁_j)` or one of its up to eight neighbours is unstable.
    pub fn unstable_near(&self, omega_index: usize, delta1_index: usize) -> bool {
        let rows = self.delta1.len() as isize;
        let cols = self.omega.len() as isize;
        (-1..=1).any(|dj| {
            (-1..=1).any(|dk| {
                let j = delta1_index as isize + dj;
                let k = omega_index as isize + dk;
                (0..rows).contains(&j) && (0..cols).contains(&k) && !self.stable[j as usize][k as usize]
            })
        })
    }

    /// Rows as `(omega, delta1, abs_trace, stable)`, `Δ₁` outer.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64, bool)> + '_ {
        self.delta1.iter().enumerate().flat_map(move |(j, &d)| {
            self.omega.iter().enumerate().map(move |(k, &w)| (w, d, self.abs_trace[j][k], self.stable[j][k]))
        })
    }
}

fn nearest(axis: &[f64], value: f64) -> usize {
    axis.iter()
        .enumerate()
        .min_by(|a, b| (a.1 - value).abs().total_cmp(&(b.1 - value).abs()))
        .map_or(0, |(i, _)| i)
}

/// Monodromy traces over a grid; cells run in parallel and are assembled in
/// axis order.
pub fn stability_grid(params: &SemiclassicalParams, spec: &GridSpec) -> Result<StabilityGrid> {
    spec.validate()?;
    let omega = spec.omega_axis();
    let delta1 = spec.delta1_axis();
    let cells: Vec<(usize, usize)> = (0..delta1.len()).flat_map(|j| (0..omega.len()).map(move |k| (j, k))).collect();
    let results = cells
        .par_iter()
        .map(|&(j, k)| monodromy(omega[k], delta1[j], params, spec.steps_per_oscillation))
        .collect::<Result<Vec<_>>>()?;
    let mut abs_trace = vec![Vec::with_capacity(omega.len()); delta1.len()];
    let mut stable = vec![Vec::with_capacity(omega.len()); delta1.len()];
    let mut max_det_error: f64 = 0.0;
    for (&(j, _), m) in cells.iter().zip(&results) {
        abs_trace[j].push(m.trace().abs());
        stable[j].push(m.is_stable());
        max_det_error = max_det_error.max(m.det_error());
    }
    Ok(StabilityGrid { omega, delta1, abs_trace, stable, max_det_error })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourField {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    /// `values[i][k]` at `(q[k], p[i])`.
    pub values: Vec<Vec<f64>>,
}

impl ContourField {
    /// Rows as `(Q, P, H)`, `P` outer.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.p.iter().enumerate().flat_map(move |(i, &p)| self.q.iter().enumerate().map(move |(k, &q)| (q, p, self.values[i][k])))
    }
}

/// `Δ₀ cos Q + 2J cos P` on a grid.
pub fn potential_contours(q_grid: &[f64], p_grid: &[f64], params: &SemiclassicalParams) -> Result<ContourField> {
    if q_grid.is_empty() || p_grid.is_empty() {
        return Err(JunctionError::InvalidSpec("contour grids must be non-empty".into()));
    }
    let values = p_grid.iter().map(|&p| q_grid.iter().map(|&q| static_energy(q, p, params)).collect()).collect();
    Ok(ContourField { q: q_grid.to_vec(), p: p_grid.to_vec(), values })
}

/// `points` equally spaced values on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points).map(|k| lo + (hi - lo) * (k as f64 / (points - 1) as f64)).collect(),
    }
}
