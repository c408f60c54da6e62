//! Contraction certificates and trajectory verification.
//!
//! For a run whose projected positions start inside `[m, M]` with
//! `0 < m <= M`, the group diameter contracts on each window of length
//! `6 tau` by at least the explicit factor
//!
//! ```text
//!   Gamma = (1 - e^{-psi_lower tau})^2 (1 - e^{-sigma}) e^{-6 tau} psi_lower
//! ```
//!
//! with `psi_lower = min_{s in [0, 2M]} psi(s) / (N - 1)` and
//! `sigma = min(tau, (M - m) / 2M)`. This module computes those constants,
//! the per-window iterates `m_k, M_k, D_k, sigma_k, Gamma_k`, and checks the
//! contraction inequality `D_{k+1} <= (1 - Gamma~(D_k)) D_k` together with
//! the window-(k+1) enclosure bounds against recorded trajectories,
//! direction by direction (multi-dimensional runs are verified through
//! their one-dimensional projections onto the chosen unit vectors).

use serde::Serialize;

use crate::engine::Trajectory;
use crate::error::{Error, Result};
use crate::model::{ModelParams, Points, WeightScheme};

/// Projected min/max over agents and grid times of one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrema {
    pub min: f64,
    pub max: f64,
}

impl Extrema {
    pub fn width(&self) -> f64 {
        self.max - self.min
    }
}

/// All constants of one shrinkage certificate. `gamma` lies in `(0, 1)`
/// whenever `m < M`; at `m = M` every factor involving `sigma` vanishes and
/// no contraction is claimed.
#[derive(Debug, Clone, Serialize)]
pub struct ShrinkageCertificate {
    pub psi_lower: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub tau: f64,
    pub m: f64,
    #[serde(rename = "M")]
    pub m_upper: f64,
    #[serde(rename = "N")]
    pub n_agents: usize,
}

/// Lower bound on every communication weight while all pairwise distances
/// stay within `[0, 2 m_upper]`. Defined for the classical and
/// normalized-no-self schemes only.
pub fn psi_lower_bound(params: &ModelParams, m_upper: f64) -> Result<f64> {
    if params.scheme == WeightScheme::NormalizedWithSelf {
        return Err(Error::UnsupportedCertificate);
    }
    let min_psi = params.influence.min_on(2.0 * m_upper);
    Ok(min_psi / (params.n_agents as f64 - 1.0))
}

/// Certificate for initial extrema `0 < m <= m_upper`.
pub fn certificate(m: f64, m_upper: f64, params: &ModelParams) -> Result<ShrinkageCertificate> {
    params.validate()?;
    if !m.is_finite() || !m_upper.is_finite() || m > m_upper {
        return Err(Error::InputDomain(format!(
            "need finite m <= M, got m = {m}, M = {m_upper}"
        )));
    }
    if m <= 0.0 {
        return Err(Error::NonPositiveExtrema { m });
    }
    let psi_lower = psi_lower_bound(params, m_upper)?;
    let tau = params.tau;
    let sigma = tau.min((m_upper - m) / (2.0 * m_upper));
    let gamma = gamma_factor(psi_lower, tau, sigma);
    let half = 0.5 * psi_lower * (-(-sigma).exp_m1());
    let gamma_minus = half * (1.0 - m / m_upper);
    let gamma_plus = half * (m_upper / m - 1.0);
    Ok(ShrinkageCertificate {
        psi_lower,
        sigma,
        gamma,
        gamma_minus,
        gamma_plus,
        tau,
        m,
        m_upper,
        n_agents: params.n_agents,
    })
}

#[inline]
fn gamma_factor(psi_lower: f64, tau: f64, sigma: f64) -> f64 {
    let a = -(-psi_lower * tau).exp_m1(); // 1 - e^{-psi_lower tau}
    let b = -(-sigma).exp_m1(); // 1 - e^{-sigma}
    a * a * b * (-6.0 * tau).exp() * psi_lower
}

/// `Gamma~(D)`: the N- and window-uniform contraction factor, using
/// `sigma~(D) = min(tau, D / 2M)` with the global post-translation `M`.
pub fn gamma_tilde(psi_lower: f64, tau: f64, width: f64, m_upper: f64) -> f64 {
    if width <= 0.0 || m_upper <= 0.0 {
        return 0.0;
    }
    let sigma = tau.min(width / (2.0 * m_upper));
    gamma_factor(psi_lower, tau, sigma)
}

/// The scalar translation that makes projected initial extrema strictly
/// positive: with `D = M - m`, shift by `1 - m` when `D = 0`, by `D - m`
/// when `m < D`, and not at all otherwise. Idempotent.
pub fn positive_shift(min: f64, max: f64) -> f64 {
    let width = max - min;
    if width == 0.0 {
        1.0 - min
    } else if min < width {
        width - min
    } else {
        0.0
    }
}

/// Shift all positions so that every coordinate's initial-window extrema
/// satisfy `0 < m`; returns the shifted trajectory and the applied shift.
/// The dynamics are translation invariant, so the result is the trajectory
/// of the shifted initial data.
pub fn translate_positive(mut traj: Trajectory) -> (Trajectory, Vec<f64>) {
    let shift: Vec<f64> = traj
        .stats()
        .initial_extrema
        .iter()
        .map(|&(lo, hi)| positive_shift(lo, hi))
        .collect();
    traj.translate(&shift);
    (traj, shift)
}

fn validate_direction(traj: &Trajectory, direction: &[f64]) -> Result<()> {
    if direction.len() != traj.dim() {
        return Err(Error::InputDomain(format!(
            "direction has {} components, trajectory dimension is {}",
            direction.len(),
            traj.dim()
        )));
    }
    let norm2: f64 = direction.iter().map(|x| x * x).sum();
    if !norm2.is_finite() || (norm2.sqrt() - 1.0).abs() > 1e-9 {
        return Err(Error::InputDomain(format!(
            "direction must be a unit vector, |xi| = {}",
            norm2.sqrt()
        )));
    }
    Ok(())
}

/// Identify `direction` with `+e_c` or `-e_c` when its components are
/// exactly those of a signed basis vector.
fn basis_axis(direction: &[f64]) -> Option<(usize, f64)> {
    let mut axis = None;
    for (c, &x) in direction.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        if (x == 1.0 || x == -1.0) && axis.is_none() {
            axis = Some((c, x));
        } else {
            return None;
        }
    }
    axis
}

fn project(row: &[f64], direction: &[f64]) -> f64 {
    row.iter().zip(direction).map(|(a, b)| a * b).sum()
}

/// Projected extrema over agents and recorded grid times within `[t0, t1]`.
pub fn extrema(traj: &Trajectory, window: (f64, f64), direction: &[f64]) -> Result<Extrema> {
    validate_direction(traj, direction)?;
    let (t0, t1) = window;
    let times = traj.times();
    let (rec_lo, rec_hi) = (times[0], times[times.len() - 1]);
    if !(t0 <= t1) || t0 < rec_lo - 1e-12 || t1 > rec_hi + 1e-12 {
        return Err(Error::OutOfRange {
            lo: t0,
            hi: t1,
            rec_lo,
            rec_hi,
        });
    }
    let dim = traj.dim();
    let mut ext = Extrema {
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
    };
    let mut seen = false;
    for (idx, &t) in times.iter().enumerate() {
        if t < t0 - 1e-12 || t > t1 + 1e-12 {
            continue;
        }
        seen = true;
        for row in traj.positions_at(idx).chunks_exact(dim) {
            let p = project(row, direction);
            ext.min = ext.min.min(p);
            ext.max = ext.max.max(p);
        }
    }
    if !seen {
        return Err(Error::OutOfRange {
            lo: t0,
            hi: t1,
            rec_lo,
            rec_hi,
        });
    }
    Ok(ext)
}

/// Projected extrema of every complete observation window, at full grid
/// resolution for signed basis directions (from the run statistics) and
/// from recorded samples otherwise.
fn window_extrema_along(traj: &Trajectory, direction: &[f64]) -> Vec<(usize, Extrema)> {
    if let Some((axis, sign)) = basis_axis(direction) {
        return traj
            .stats()
            .windows
            .iter()
            .filter(|w| w.complete)
            .map(|w| {
                let ext = if sign > 0.0 {
                    Extrema {
                        min: w.min[axis],
                        max: w.max[axis],
                    }
                } else {
                    Extrema {
                        min: -w.max[axis],
                        max: -w.min[axis],
                    }
                };
                (w.index, ext)
            })
            .collect();
    }
    // Sampled path: bucket recorded nodes into windows by time.
    let tau = traj.tau();
    let eps = 1e-9 * traj.step_size();
    let dim = traj.dim();
    let mut out: Vec<(usize, Extrema)> = Vec::new();
    for w in traj.stats().windows.iter().filter(|w| w.complete) {
        let (t0, t1) = if w.index == 0 {
            (-tau, 0.0)
        } else {
            (
                (6.0 * w.index as f64 - 1.0) * tau,
                6.0 * w.index as f64 * tau,
            )
        };
        let mut ext = Extrema {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        };
        let mut seen = false;
        for (idx, &t) in traj.times().iter().enumerate() {
            if t < t0 - eps || t > t1 + eps {
                continue;
            }
            seen = true;
            for row in traj.positions_at(idx).chunks_exact(dim) {
                let p = project(row, direction);
                ext.min = ext.min.min(p);
                ext.max = ext.max.max(p);
            }
        }
        if seen {
            out.push((w.index, ext));
        }
    }
    out
}

/// One row of a contraction report: window `k` extrema (after translation)
/// and the transition check into window `k + 1`.
#[derive(Debug, Clone, Serialize)]
pub struct ContractionRow {
    pub k: usize,
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub gamma_tilde: f64,
    /// Right-hand side of the width check: `(1 - gamma_tilde) * width + tol`.
    pub bound_rhs: f64,
    pub pass: bool,
}

/// Window-by-window contraction verification along one direction.
#[derive(Debug, Clone)]
pub struct ContractionReport {
    pub direction: Vec<f64>,
    /// Scalar shift applied to the projected series before checking.
    pub shift: f64,
    /// Translated initial-window extrema.
    pub initial: Extrema,
    pub psi_lower: f64,
    pub tolerance: f64,
    pub rows: Vec<ContractionRow>,
}

impl ContractionReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn first_failure(&self) -> Option<&ContractionRow> {
        self.rows.iter().find(|r| !r.pass)
    }

    /// Smallest contraction factor observed across rows, if any.
    pub fn min_gamma_tilde(&self) -> Option<f64> {
        self.rows
            .iter()
            .map(|r| r.gamma_tilde)
            .min_by(|a, b| a.total_cmp(b))
    }
}

/// Check the iterated diameter-shrinkage bounds along `direction`.
///
/// The projected series is translated positive internally (the translation
/// rule is idempotent, so pre-translated trajectories are unchanged). Row
/// `k` records window `k`'s extrema and passes when window `k + 1` lies in
/// `[m_k + (G/2) D_k - tol, M_k - (G/2) D_k + tol]` and its width obeys
/// `D_{k+1} <= (1 - G) D_k + tol`, with `G = gamma_tilde(D_k)` and
/// `tol = 1e-7 (1 + D_0)`.
pub fn contraction_report(traj: &Trajectory, direction: &[f64]) -> Result<ContractionReport> {
    validate_direction(traj, direction)?;
    let params = traj.params();
    let windows = window_extrema_along(traj, direction);
    let initial_raw = windows
        .iter()
        .find(|(k, _)| *k == 0)
        .map(|(_, e)| *e)
        .ok_or(Error::Empty("initial window"))?;
    let shift = positive_shift(initial_raw.min, initial_raw.max);
    let initial = Extrema {
        min: initial_raw.min + shift,
        max: initial_raw.max + shift,
    };
    let psi_lower = psi_lower_bound(params, initial.max)?;
    let tau = params.tau;
    let d0 = initial.width();
    let tolerance = 1e-7 * (1.0 + d0);

    let mut rows = Vec::new();
    for pair in windows.windows(2) {
        let (k, ext_k) = pair[0];
        let (k_next, ext_next) = pair[1];
        if k_next != k + 1 {
            continue;
        }
        let lower = ext_k.min + shift;
        let upper = ext_k.max + shift;
        let width = upper - lower;
        let next_lower = ext_next.min + shift;
        let next_upper = ext_next.max + shift;
        let next_width = next_upper - next_lower;

        let sigma = if upper > 0.0 {
            tau.min(width / (2.0 * upper))
        } else {
            0.0
        };
        let gamma = gamma_factor(psi_lower, tau, sigma);
        let gt = gamma_tilde(psi_lower, tau, width, initial.max);
        let bound_rhs = (1.0 - gt) * width + tolerance;

        let width_ok = next_width <= bound_rhs;
        let enclosure_ok = next_lower >= lower + 0.5 * gt * width - tolerance
            && next_upper <= upper - 0.5 * gt * width + tolerance;
        rows.push(ContractionRow {
            k,
            lower,
            upper,
            width,
            sigma,
            gamma,
            gamma_tilde: gt,
            bound_rhs,
            pass: width_ok && enclosure_ok,
        });
    }
    Ok(ContractionReport {
        direction: direction.to_vec(),
        shift,
        initial,
        psi_lower,
        tolerance,
        rows,
    })
}

/// Uniform speed bound along one direction: after translation, projected
/// speeds never exceed the translated initial maximum.
#[derive(Debug, Clone, Serialize)]
pub struct SpeedCheck {
    pub max_speed: f64,
    pub bound: f64,
    pub pass: bool,
}

pub fn speed_check(traj: &Trajectory, direction: &[f64]) -> Result<SpeedCheck> {
    validate_direction(traj, direction)?;
    let dim = traj.dim();
    let max_speed = if let Some((axis, _)) = basis_axis(direction) {
        traj.stats().max_abs_velocity[axis]
    } else {
        let mut m = 0.0f64;
        for (idx, &t) in traj.times().iter().enumerate() {
            if t < 0.0 {
                continue;
            }
            for row in traj.velocities_at(idx).chunks_exact(dim) {
                m = m.max(project(row, direction).abs());
            }
        }
        m
    };
    // Projected initial extrema, translated positive.
    let init = initial_extrema_along(traj, direction);
    let shift = positive_shift(init.min, init.max);
    let bound = init.max + shift + 1e-9;
    Ok(SpeedCheck {
        max_speed,
        bound,
        pass: max_speed <= bound,
    })
}

fn initial_extrema_along(traj: &Trajectory, direction: &[f64]) -> Extrema {
    if let Some((axis, sign)) = basis_axis(direction) {
        let (lo, hi) = traj.stats().initial_extrema[axis];
        if sign > 0.0 {
            Extrema { min: lo, max: hi }
        } else {
            Extrema { min: -hi, max: -lo }
        }
    } else {
        let dim = traj.dim();
        let mut ext = Extrema {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        };
        for (idx, &t) in traj.times().iter().enumerate() {
            if t > 0.0 {
                break;
            }
            for row in traj.positions_at(idx).chunks_exact(dim) {
                let p = project(row, direction);
                ext.min = ext.min.min(p);
                ext.max = ext.max.max(p);
            }
        }
        ext
    }
}

/// Per-coordinate uniform-boundedness check: every position for `t >= 0`
/// stays within the initial-window box, tolerance `1e-9 (M - m + 1)`.
#[derive(Debug, Clone, Serialize)]
pub struct StayCheck {
    pub worst_excess: f64,
    pub pass: bool,
}

pub fn stay_check(traj: &Trajectory) -> StayCheck {
    let mut worst = f64::NEG_INFINITY;
    let mut pass = true;
    for (c, &(m, m_upper)) in traj.stats().initial_extrema.iter().enumerate() {
        let (lo, hi) = traj.stats().post_extrema[c];
        let tol = 1e-9 * (m_upper - m + 1.0);
        let excess = (m - lo).max(hi - m_upper);
        worst = worst.max(excess);
        if excess > tol {
            pass = false;
        }
    }
    StayCheck {
        worst_excess: worst,
        pass,
    }
}

/// Largest pairwise Euclidean distance of a point set.
pub fn diameter(points: &Points) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Empty("diameter of an empty point set"));
    }
    Ok(points.diameter())
}
