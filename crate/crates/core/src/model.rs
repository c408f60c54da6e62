//! The dynamical system: influence functions, communication-weight schemes,
//! and the right-hand side of the delayed equation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `N` points in `R^d`, stored row-major. Used for positions, velocities and
/// measure atoms alike.
#[derive(Debug, Clone, PartialEq)]
pub struct Points {
    n: usize,
    dim: usize,
    data: Vec<f64>,
}

impl Points {
    pub fn new(n: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * dim {
            return Err(Error::Config(format!(
                "expected {} coordinates for {} points in {} dimensions, got {}",
                n * dim,
                n,
                dim,
                data.len()
            )));
        }
        Ok(Self { n, dim, data })
    }

    pub fn zeros(n: usize, dim: usize) -> Self {
        Self {
            n,
            dim,
            data: vec![0.0; n * dim],
        }
    }

    /// Build from one row per point, checking that all rows share `dim`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Empty("points"));
        }
        let dim = rows[0].len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Config("all points need the same dimension >= 1".into()));
        }
        let data = rows.iter().flatten().copied().collect();
        Ok(Self { n, dim, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Largest pairwise Euclidean distance (exact O(N^2) scan).
    pub fn diameter(&self) -> f64 {
        diameter_flat(&self.data, self.dim)
    }
}

/// Largest pairwise Euclidean distance over row-major points.
pub(crate) fn diameter_flat(data: &[f64], dim: usize) -> f64 {
    let n = data.len() / dim;
    let mut best = 0.0f64;
    for i in 0..n {
        let xi = &data[i * dim..(i + 1) * dim];
        for j in (i + 1)..n {
            let xj = &data[j * dim..(j + 1) * dim];
            let d2: f64 = xi.iter().zip(xj).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 > best {
                best = d2;
            }
        }
    }
    best.sqrt()
}

/// Shape of the influence function `psi`. Every family evaluates into
/// `(0, 1]` for all `s >= 0`: globally positive and bounded by one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InfluenceFamily {
    /// `psi(s) = (1 + s^2)^(-beta)` with `beta >= 0`.
    PowerLaw { beta: f64 },
    /// `psi(s) = level` with `level` in `(0, 1]`.
    Constant { level: f64 },
    /// Piecewise-linear interpolation of `(distance, value)` knots, constant
    /// outside the knot range. All values must lie in `(0, 1]`.
    Tabulated { knots: Vec<(f64, f64)> },
}

/// A validated influence function together with its supremum.
///
/// The bound `psi <= 1` is enforced here, at construction time, rather than
/// by rescaling time; callers that want a faster nominal rate must rescale
/// `t` and `tau` themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceFunction {
    family: InfluenceFamily,
    declared_sup: f64,
}

impl InfluenceFunction {
    pub fn new(family: InfluenceFamily) -> Result<Self> {
        let declared_sup = match &family {
            InfluenceFamily::PowerLaw { beta } => {
                if !beta.is_finite() || *beta < 0.0 {
                    return Err(Error::Config(format!(
                        "power-law exponent beta must be finite and >= 0, got {beta}"
                    )));
                }
                1.0
            }
            InfluenceFamily::Constant { level } => {
                if !level.is_finite() || *level <= 0.0 || *level > 1.0 {
                    return Err(Error::Config(format!(
                        "constant influence level must lie in (0, 1], got {level}"
                    )));
                }
                *level
            }
            InfluenceFamily::Tabulated { knots } => {
                if knots.is_empty() {
                    return Err(Error::Config("tabulated influence needs at least one knot".into()));
                }
                let mut sup = 0.0f64;
                let mut prev = f64::NEG_INFINITY;
                for &(s, v) in knots {
                    if !s.is_finite() || s < 0.0 {
                        return Err(Error::Config(format!(
                            "tabulated knot distance must be finite and >= 0, got {s}"
                        )));
                    }
                    if s <= prev {
                        return Err(Error::Config(
                            "tabulated knot distances must be strictly increasing".into(),
                        ));
                    }
                    if !v.is_finite() || v <= 0.0 || v > 1.0 {
                        return Err(Error::Config(format!(
                            "tabulated knot values must lie in (0, 1], got {v}"
                        )));
                    }
                    prev = s;
                    sup = sup.max(v);
                }
                sup
            }
        };
        Ok(Self {
            family,
            declared_sup,
        })
    }

    pub fn power_law(beta: f64) -> Result<Self> {
        Self::new(InfluenceFamily::PowerLaw { beta })
    }

    pub fn constant(level: f64) -> Result<Self> {
        Self::new(InfluenceFamily::Constant { level })
    }

    pub fn tabulated(knots: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(InfluenceFamily::Tabulated { knots })
    }

    pub fn family(&self) -> &InfluenceFamily {
        &self.family
    }

    /// Supremum of the family over `[0, inf)`; always in `(0, 1]`.
    pub fn declared_sup(&self) -> f64 {
        self.declared_sup
    }

    /// `psi(s)` for `s >= 0`. Strictly positive and `<= 1`.
    pub fn evaluate(&self, s: f64) -> Result<f64> {
        if !s.is_finite() || s < 0.0 {
            return Err(Error::InputDomain(format!(
                "influence argument must be finite and >= 0, got {s}"
            )));
        }
        Ok(self.eval_sq(s * s))
    }

    /// `psi` evaluated from the squared distance; the power-law family never
    /// needs the square root.
    #[inline]
    pub(crate) fn eval_sq(&self, s2: f64) -> f64 {
        match &self.family {
            InfluenceFamily::PowerLaw { beta } => powerlaw_from_sq(s2, *beta),
            InfluenceFamily::Constant { level } => *level,
            InfluenceFamily::Tabulated { knots } => tabulated_eval(knots, s2.sqrt()),
        }
    }

    /// Exact minimum of `psi` over `[0, hi]`.
    ///
    /// Power laws are nonincreasing (minimum at `hi`), constants are flat,
    /// and a piecewise-linear table attains its minimum at a knot or at the
    /// interval endpoint; no generic optimizer is involved.
    pub fn min_on(&self, hi: f64) -> f64 {
        match &self.family {
            InfluenceFamily::PowerLaw { beta } => powerlaw_from_sq(hi * hi, *beta),
            InfluenceFamily::Constant { level } => *level,
            InfluenceFamily::Tabulated { knots } => {
                let mut min = tabulated_eval(knots, hi);
                for &(s, v) in knots {
                    if s <= hi {
                        min = min.min(v);
                    } else {
                        break;
                    }
                }
                // psi is constant before the first knot.
                min.min(knots[0].1)
            }
        }
    }
}

#[inline]
fn powerlaw_from_sq(s2: f64, beta: f64) -> f64 {
    let u = 1.0 + s2;
    if beta == 0.0 {
        1.0
    } else if beta == 1.0 {
        1.0 / u
    } else if beta == 2.0 {
        1.0 / (u * u)
    } else if beta == 3.0 {
        1.0 / (u * u * u)
    } else if beta == 4.0 {
        let u2 = u * u;
        1.0 / (u2 * u2)
    } else {
        u.powf(-beta)
    }
}

fn tabulated_eval(knots: &[(f64, f64)], s: f64) -> f64 {
    let (first, last) = (knots[0], knots[knots.len() - 1]);
    if s <= first.0 {
        return first.1;
    }
    if s >= last.0 {
        return last.1;
    }
    // partition_point: first knot with distance > s.
    let hi = knots.partition_point(|&(d, _)| d <= s);
    let (s0, v0) = knots[hi - 1];
    let (s1, v1) = knots[hi];
    let w = (s - s0) / (s1 - s0);
    v0 + w * (v1 - v0)
}

/// How the raw influence values are turned into communication weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightScheme {
    /// `psi_ij = psi(|x_j(t-tau) - x_i(t)|) / (N - 1)`.
    Classical,
    /// Row-normalized over all `l = 1..N`, including the self term
    /// `psi(|x_i(t-tau) - x_i(t)|)`, which is generally nonzero under delay.
    NormalizedWithSelf,
    /// Row-normalized over `l != i`; rows sum to one exactly.
    NormalizedNoSelf,
}

impl WeightScheme {
    pub fn label(&self) -> &'static str {
        match self {
            WeightScheme::Classical => "classical",
            WeightScheme::NormalizedWithSelf => "normalized-with-self",
            WeightScheme::NormalizedNoSelf => "normalized-no-self",
        }
    }
}

/// Positions of all agents at one time instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub time: f64,
    pub positions: Points,
}

#[derive(Debug, Clone)]
pub struct ModelParams {
    pub n_agents: usize,
    pub dim: usize,
    /// Transmission delay `tau > 0`; the model is the delayed one throughout.
    pub tau: f64,
    pub influence: InfluenceFunction,
    pub scheme: WeightScheme,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_agents < 2 {
            return Err(Error::Config(format!(
                "n_agents must be >= 2, got {}",
                self.n_agents
            )));
        }
        if self.dim < 1 {
            return Err(Error::Config("dim must be >= 1".into()));
        }
        if !self.tau.is_finite() || self.tau <= 0.0 {
            return Err(Error::Config(format!(
                "tau must be finite and > 0, got {}",
                self.tau
            )));
        }
        Ok(())
    }
}

/// Row-sum diagnostics accumulated over weight evaluations.
///
/// `max_row_sum` tracks `max_i sum_{j != i} psi_ij`, which must stay `<= 1`
/// for every scheme; `max_no_self_dev` tracks `|row sum - 1|` for the
/// normalized-no-self scheme, where the sum is one by construction.
#[derive(Debug, Clone, Copy, Default)]
pub struct WeightStats {
    pub max_row_sum: f64,
    pub max_no_self_dev: f64,
    pub evaluations: u64,
}

impl WeightStats {
    pub fn merge(&mut self, other: &WeightStats) {
        self.max_row_sum = self.max_row_sum.max(other.max_row_sum);
        self.max_no_self_dev = self.max_no_self_dev.max(other.max_no_self_dev);
        self.evaluations += other.evaluations;
    }
}

fn check_inputs(params: &ModelParams, current: &Points, delayed: &Points) -> Result<()> {
    let n = params.n_agents;
    let d = params.dim;
    if current.len() != n || delayed.len() != n || current.dim() != d || delayed.dim() != d {
        return Err(Error::Config(format!(
            "state shape mismatch: expected {n} x {d}, got {} x {} (current), {} x {} (delayed)",
            current.len(),
            current.dim(),
            delayed.len(),
            delayed.dim()
        )));
    }
    if !current.is_finite() || !delayed.is_finite() {
        return Err(Error::InputDomain("positions must be finite".into()));
    }
    Ok(())
}

/// The communication-weight matrix at one instant: entry `(i, j)`, `j != i`,
/// is `psi_ij` built from the delayed position of `j` and the current
/// position of `i`; the diagonal is exactly zero. Row-major `N x N`.
pub fn weight_matrix(
    params: &ModelParams,
    current: &Points,
    delayed: &Points,
) -> Result<Vec<f64>> {
    params.validate()?;
    check_inputs(params, current, delayed)?;
    let n = params.n_agents;
    let mut w = vec![0.0; n * n];
    let mut psi_row = vec![0.0; n];
    for i in 0..n {
        let xi = current.row(i);
        for j in 0..n {
            let xj = delayed.row(j);
            let s2: f64 = xi.iter().zip(xj).map(|(a, b)| (b - a) * (b - a)).sum();
            psi_row[j] = params.influence.eval_sq(s2);
        }
        let row = &mut w[i * n..(i + 1) * n];
        match params.scheme {
            WeightScheme::Classical => {
                let scale = 1.0 / (n as f64 - 1.0);
                for j in 0..n {
                    row[j] = if j == i { 0.0 } else { psi_row[j] * scale };
                }
            }
            WeightScheme::NormalizedWithSelf => {
                let denom: f64 = psi_row.iter().sum();
                debug_assert!(denom > 0.0);
                for j in 0..n {
                    row[j] = if j == i { 0.0 } else { psi_row[j] / denom };
                }
            }
            WeightScheme::NormalizedNoSelf => {
                let denom: f64 = psi_row
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, p)| p)
                    .sum();
                debug_assert!(denom > 0.0);
                for j in 0..n {
                    row[j] = if j == i { 0.0 } else { psi_row[j] / denom };
                }
            }
        }
    }
    Ok(w)
}

/// Velocities under the delayed dynamics: agent `i` moves with
/// `sum_{j != i} psi_ij (x_j(t - tau) - x_i(t))`. The `j = i` term never
/// contributes.
pub fn rhs(params: &ModelParams, current: &Points, delayed: &Points) -> Result<Points> {
    params.validate()?;
    check_inputs(params, current, delayed)?;
    let mut out = Points::zeros(params.n_agents, params.dim);
    let mut stats = WeightStats::default();
    rhs_into(
        params,
        current.as_slice(),
        delayed.as_slice(),
        out.as_mut_slice(),
        &mut stats,
    );
    Ok(out)
}

/// Hot-path velocity evaluation on flat buffers. Accumulates the velocity
/// via `sum_j w_ij x_j(t-tau) - (sum_j w_ij) x_i(t)` so no `N x N` matrix is
/// materialized. Caller guarantees shapes; validity is checked upstream.
pub(crate) fn rhs_into(
    params: &ModelParams,
    current: &[f64],
    delayed: &[f64],
    out: &mut [f64],
    stats: &mut WeightStats,
) {
    let n = params.n_agents;
    let d = params.dim;
    debug_assert_eq!(current.len(), n * d);
    debug_assert_eq!(delayed.len(), n * d);
    debug_assert_eq!(out.len(), n * d);

    let mut acc = vec![0.0f64; d];
    for i in 0..n {
        let xi = &current[i * d..(i + 1) * d];
        acc.iter_mut().for_each(|a| *a = 0.0);
        let mut sum_psi = 0.0f64;
        let mut psi_self = 0.0f64;
        for j in 0..n {
            let xj = &delayed[j * d..(j + 1) * d];
            let mut s2 = 0.0;
            for c in 0..d {
                let diff = xj[c] - xi[c];
                s2 += diff * diff;
            }
            let p = params.influence.eval_sq(s2);
            if j == i {
                psi_self = p;
            } else {
                sum_psi += p;
                for c in 0..d {
                    acc[c] += p * xj[c];
                }
            }
        }
        let (inv, row_sum) = match params.scheme {
            WeightScheme::Classical => {
                let inv = 1.0 / (n as f64 - 1.0);
                (inv, sum_psi * inv)
            }
            WeightScheme::NormalizedWithSelf => {
                let inv = 1.0 / (sum_psi + psi_self);
                (inv, sum_psi * inv)
            }
            WeightScheme::NormalizedNoSelf => {
                let inv = 1.0 / sum_psi;
                (inv, sum_psi * inv)
            }
        };
        if row_sum > stats.max_row_sum {
            stats.max_row_sum = row_sum;
        }
        if params.scheme == WeightScheme::NormalizedNoSelf {
            let dev = (row_sum - 1.0).abs();
            if dev > stats.max_no_self_dev {
                stats.max_no_self_dev = dev;
            }
        }
        let vi = &mut out[i * d..(i + 1) * d];
        for c in 0..d {
            vi[c] = (acc[c] - sum_psi * xi[c]) * inv;
        }
    }
    stats.evaluations += 1;
}
