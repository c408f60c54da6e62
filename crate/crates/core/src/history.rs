//! Initial history on `[-tau, 0]` and cubic-Hermite interpolation between
//! stored `(position, velocity)` samples.

use crate::error::{Error, Result};
use crate::model::Points;
use crate::rng::SplitMix64;

/// Cubic Hermite interpolant on `[t0, t0 + h]` from endpoint values and
/// derivatives. Exact at the endpoints and for any cubic polynomial whose
/// endpoint data it is given.
#[inline]
pub fn hermite(theta: f64, h: f64, p0: f64, m0: f64, p1: f64, m1: f64) -> f64 {
    let t2 = theta * theta;
    let t3 = t2 * theta;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + theta;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * p0 + h10 * h * m0 + h01 * p1 + h11 * h * m1
}

/// Hermite value at the segment midpoint; the form used by the half-step
/// stages of the integrator.
#[inline]
pub fn hermite_mid(h: f64, p0: f64, m0: f64, p1: f64, m1: f64) -> f64 {
    0.5 * (p0 + p1) + 0.125 * h * (m0 - m1)
}

/// Prescribed trajectories on the initial window `[-tau, 0]`.
#[derive(Debug, Clone)]
pub enum InitialHistory {
    /// Each agent sits still at its own position for the whole window.
    ConstantPerAgent(Points),
    /// Dense samples at the integrator grid resolution: `K + 1` frames
    /// covering `-tau, -tau + h, ..., 0`, oldest first.
    Sampled(Vec<Points>),
    /// Constant-in-time positions drawn i.i.d. uniform from a box, one
    /// interval per dimension, using the seeded generator (agent-major,
    /// coordinate-minor draw order).
    RandomConstant { seed: u64, bounds: Vec<(f64, f64)> },
}

impl InitialHistory {
    /// Sample a time-dependent history `f(t, agent) -> position` on the grid.
    pub fn from_fn<F>(n: usize, dim: usize, steps: usize, tau: f64, f: F) -> Result<Self>
    where
        F: Fn(f64, usize) -> Vec<f64>,
    {
        let h = tau / steps as f64;
        let mut frames = Vec::with_capacity(steps + 1);
        for k in 0..=steps {
            let t = (k as f64 - steps as f64) * h;
            let mut rows = Vec::with_capacity(n);
            for agent in 0..n {
                let row = f(t, agent);
                if row.len() != dim {
                    return Err(Error::Config(format!(
                        "history function returned {} coordinates, expected {dim}",
                        row.len()
                    )));
                }
                rows.push(row);
            }
            frames.push(Points::from_rows(&rows)?);
        }
        Ok(InitialHistory::Sampled(frames))
    }

    /// Positions at every grid node of the initial window, oldest first.
    pub(crate) fn materialize(&self, n: usize, dim: usize, steps: usize) -> Result<Vec<Points>> {
        let frames = match self {
            InitialHistory::ConstantPerAgent(p) => {
                check_shape(p, n, dim)?;
                vec![p.clone(); steps + 1]
            }
            InitialHistory::Sampled(frames) => {
                if frames.len() != steps + 1 {
                    return Err(Error::Config(format!(
                        "sampled history must supply {} frames (steps_per_delay + 1), got {}",
                        steps + 1,
                        frames.len()
                    )));
                }
                for f in frames {
                    check_shape(f, n, dim)?;
                }
                frames.clone()
            }
            InitialHistory::RandomConstant { seed, bounds } => {
                if bounds.len() != dim {
                    return Err(Error::Config(format!(
                        "random history needs one (lo, hi) interval per dimension: got {} for dim {dim}",
                        bounds.len()
                    )));
                }
                for &(lo, hi) in bounds {
                    if !lo.is_finite() || !hi.is_finite() || hi < lo {
                        return Err(Error::Config(format!(
                            "invalid box interval ({lo}, {hi})"
                        )));
                    }
                }
                let mut rng = SplitMix64::new(*seed);
                let mut data = Vec::with_capacity(n * dim);
                for _ in 0..n {
                    for &(lo, hi) in bounds {
                        data.push(rng.uniform(lo, hi));
                    }
                }
                let p = Points::new(n, dim, data)?;
                vec![p; steps + 1]
            }
        };
        Ok(frames)
    }

    /// True when the window is constant in time, so its velocities are
    /// exactly zero without differencing.
    pub(crate) fn is_constant(&self) -> bool {
        !matches!(self, InitialHistory::Sampled(_))
    }
}

fn check_shape(p: &Points, n: usize, dim: usize) -> Result<()> {
    if p.len() != n || p.dim() != dim {
        return Err(Error::Config(format!(
            "history shape mismatch: expected {n} x {dim}, got {} x {}",
            p.len(),
            p.dim()
        )));
    }
    if !p.is_finite() {
        return Err(Error::Config("history samples must be finite".into()));
    }
    Ok(())
}

/// Velocities on the initial window by finite differences of the position
/// samples: central in the interior, second-order one-sided at the ends.
/// Exact for histories that are polynomials of degree <= 2 in time.
pub(crate) fn difference_velocities(frames: &[Points], h: f64) -> Vec<Points> {
    let m = frames.len();
    let n = frames[0].len();
    let dim = frames[0].dim();
    let mut vels = vec![Points::zeros(n, dim); m];
    if m == 1 {
        return vels;
    }
    for k in 0..m {
        for i in 0..n {
            for c in 0..dim {
                let v = if k == 0 {
                    if m >= 3 {
                        (-3.0 * frames[0].row(i)[c] + 4.0 * frames[1].row(i)[c]
                            - frames[2].row(i)[c])
                            / (2.0 * h)
                    } else {
                        (frames[1].row(i)[c] - frames[0].row(i)[c]) / h
                    }
                } else if k == m - 1 {
                    if m >= 3 {
                        (3.0 * frames[m - 1].row(i)[c] - 4.0 * frames[m - 2].row(i)[c]
                            + frames[m - 3].row(i)[c])
                            / (2.0 * h)
                    } else {
                        (frames[1].row(i)[c] - frames[0].row(i)[c]) / h
                    }
                } else {
                    (frames[k + 1].row(i)[c] - frames[k - 1].row(i)[c]) / (2.0 * h)
                };
                vels[k].row_mut(i)[c] = v;
            }
        }
    }
    vels
}
