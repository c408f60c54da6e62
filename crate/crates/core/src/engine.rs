//! Method-of-steps integration of the delayed dynamics.
//!
//! The delay window `[t - tau, t]` is held on a uniform grid with spacing
//! `h = tau / K`, so `t - tau` always lands on a grid node and the solution's
//! derivative discontinuities (at multiples of `tau`) sit on node boundaries.
//! Each step is one classical 4-stage Runge-Kutta step; delayed positions at
//! half-stage times come from the cubic-Hermite interpolant of the stored
//! `(position, velocity)` samples.
//!
//! The solution is continuous at `t = 0` but its derivative generally jumps
//! there: the stored node-0 velocity is the history-side (finite-difference)
//! value, and the dynamics-side right velocity is kept separately so both
//! neighbouring segments interpolate with the correct one-sided slope.

use crate::error::{Error, Result};
use crate::history::{self, InitialHistory};
use crate::model::{self, ModelParams, Points, SystemState, WeightStats};

/// Fixed-step integrator configuration.
#[derive(Debug, Clone)]
pub struct IntegratorConfig {
    /// Grid steps per delay window; `h = tau / K`, `K >= 4`.
    pub steps_per_delay: usize,
    /// Nominal end time; rounded up to the next grid node.
    pub t_end: f64,
    /// Keep every `record_stride`-th grid node in the trajectory record.
    pub record_stride: usize,
    /// Stop early once the Euclidean diameter falls below this threshold.
    pub eps_consensus: f64,
}

impl IntegratorConfig {
    pub fn new(t_end: f64) -> Self {
        Self {
            steps_per_delay: 64,
            t_end,
            record_stride: 1,
            eps_consensus: 1e-8,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.steps_per_delay < 4 {
            return Err(Error::Config(format!(
                "steps_per_delay must be >= 4, got {}",
                self.steps_per_delay
            )));
        }
        if !self.t_end.is_finite() || self.t_end <= 0.0 {
            return Err(Error::Config(format!(
                "t_end must be finite and > 0, got {}",
                self.t_end
            )));
        }
        if self.record_stride < 1 {
            return Err(Error::Config("record_stride must be >= 1".into()));
        }
        if !self.eps_consensus.is_finite() || self.eps_consensus < 0.0 {
            return Err(Error::Config(format!(
                "eps_consensus must be finite and >= 0, got {}",
                self.eps_consensus
            )));
        }
        Ok(())
    }
}

/// One grid node: positions and velocities of all agents.
#[derive(Debug, Clone)]
struct Frame {
    pos: Vec<f64>,
    vel: Vec<f64>,
}

/// Sliding window of the last `K + 1` grid nodes.
#[derive(Debug)]
struct HistoryRing {
    frames: Vec<Frame>,
    newest: i64,
    k: usize,
}

impl HistoryRing {
    fn slot(&self, node: i64) -> usize {
        (node.rem_euclid(self.k as i64 + 1)) as usize
    }

    fn frame(&self, node: i64) -> &Frame {
        debug_assert!(node >= self.newest - self.k as i64 && node <= self.newest);
        &self.frames[self.slot(node)]
    }

    fn push(&mut self, node: i64, pos: &[f64], vel: &[f64]) {
        debug_assert_eq!(node, self.newest + 1);
        let slot = self.slot(node);
        self.frames[slot].pos.copy_from_slice(pos);
        self.frames[slot].vel.copy_from_slice(vel);
        self.newest = node;
    }
}

/// Per-coordinate extrema of one observation window.
#[derive(Debug, Clone)]
pub struct WindowExtrema {
    /// Window index `k`: window 0 is the initial window `[-tau, 0]`, window
    /// `k >= 1` spans `[(6k - 1) tau, 6k tau]`.
    pub index: usize,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub complete: bool,
}

impl WindowExtrema {
    fn new(index: usize, dim: usize) -> Self {
        Self {
            index,
            min: vec![f64::INFINITY; dim],
            max: vec![f64::NEG_INFINITY; dim],
            complete: false,
        }
    }

    fn absorb(&mut self, pos: &[f64], dim: usize) {
        for chunk in pos.chunks_exact(dim) {
            for (c, &x) in chunk.iter().enumerate() {
                if x < self.min[c] {
                    self.min[c] = x;
                }
                if x > self.max[c] {
                    self.max[c] = x;
                }
            }
        }
    }
}

/// Exact per-run statistics accumulated at every grid node, independent of
/// the recording stride.
#[derive(Debug, Clone)]
pub struct TrajectoryStats {
    /// Per-coordinate `(min, max)` over the initial window `[-tau, 0]`.
    pub initial_extrema: Vec<(f64, f64)>,
    /// Per-coordinate `(min, max)` over all nodes with `t >= 0`.
    pub post_extrema: Vec<(f64, f64)>,
    /// Per-coordinate maximum of `|velocity|` over dynamics-side nodes
    /// (the right velocity at `t = 0` and every node after it).
    pub max_abs_velocity: Vec<f64>,
    /// Row-sum diagnostics over every Runge-Kutta stage evaluation.
    pub weights: WeightStats,
    /// Extrema per observation window (see [`WindowExtrema::index`]).
    pub windows: Vec<WindowExtrema>,
}

/// Why the run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    ReachedEnd,
    Consensus,
}

/// A running simulation; single-owner, advanced one step at a time.
#[derive(Debug)]
pub struct Simulation {
    params: ModelParams,
    cfg: IntegratorConfig,
    h: f64,
    k: usize,
    ring: HistoryRing,
    /// Dynamics-side velocity at node 0 (the history side keeps its own).
    right_vel0: Vec<f64>,
    /// Cached RHS at the newest node; reused as the next step's first stage.
    k1: Vec<f64>,
    stats: TrajectoryStats,
    rec_times: Vec<f64>,
    rec_pos: Vec<f64>,
    rec_vel: Vec<f64>,
    rec_diam: Vec<f64>,
    consensus_at: Option<f64>,
    scratch: Scratch,
}

#[derive(Debug)]
struct Scratch {
    stage_state: Vec<f64>,
    mid: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    next: Vec<f64>,
}

impl Simulation {
    /// Populate the window `[-tau, 0]` from the initial history and place the
    /// clock at zero. Velocities on the window come from finite differences
    /// of the supplied samples (exactly zero for constant histories).
    pub fn init(
        params: ModelParams,
        history: &InitialHistory,
        cfg: IntegratorConfig,
    ) -> Result<Self> {
        params.validate()?;
        cfg.validate()?;
        let k = cfg.steps_per_delay;
        let h = params.tau / k as f64;
        let n = params.n_agents;
        let d = params.dim;

        let frames = history.materialize(n, d, k)?;
        let vels = if history.is_constant() {
            vec![Points::zeros(n, d); k + 1]
        } else {
            history::difference_velocities(&frames, h)
        };

        let mut ring = HistoryRing {
            frames: vec![
                Frame {
                    pos: vec![0.0; n * d],
                    vel: vec![0.0; n * d],
                };
                k + 1
            ],
            newest: 0,
            k,
        };
        for (idx, (p, v)) in frames.iter().zip(&vels).enumerate() {
            let node = idx as i64 - k as i64;
            let slot = (node.rem_euclid(k as i64 + 1)) as usize;
            ring.frames[slot].pos.copy_from_slice(p.as_slice());
            ring.frames[slot].vel.copy_from_slice(v.as_slice());
        }

        let mut initial = WindowExtrema::new(0, d);
        for p in &frames {
            initial.absorb(p.as_slice(), d);
        }
        let initial_extrema: Vec<(f64, f64)> = initial
            .min
            .iter()
            .zip(&initial.max)
            .map(|(&a, &b)| (a, b))
            .collect();
        let mut initial_complete = initial;
        initial_complete.complete = true;

        let mut stats = TrajectoryStats {
            initial_extrema,
            post_extrema: vec![(f64::INFINITY, f64::NEG_INFINITY); d],
            max_abs_velocity: vec![0.0; d],
            weights: WeightStats::default(),
            windows: vec![initial_complete],
        };

        // Dynamics-side velocity at t = 0; also the first step's k1 stage.
        let pos0 = ring.frame(0).pos.clone();
        let delayed0 = ring.frame(-(k as i64)).pos.clone();
        let mut right_vel0 = vec![0.0; n * d];
        model::rhs_into(&params, &pos0, &delayed0, &mut right_vel0, &mut stats.weights);
        for (c, m) in stats.max_abs_velocity.iter_mut().enumerate() {
            for i in 0..n {
                *m = m.max(right_vel0[i * d + c].abs());
            }
        }

        let mut sim = Simulation {
            scratch: Scratch {
                stage_state: vec![0.0; n * d],
                mid: vec![0.0; n * d],
                k2: vec![0.0; n * d],
                k3: vec![0.0; n * d],
                k4: vec![0.0; n * d],
                next: vec![0.0; n * d],
            },
            k1: right_vel0.clone(),
            right_vel0,
            params,
            cfg,
            h,
            k,
            ring,
            stats,
            rec_times: Vec::new(),
            rec_pos: Vec::new(),
            rec_vel: Vec::new(),
            rec_diam: Vec::new(),
            consensus_at: None,
        };

        // Record the initial window on the striding grid and fold node 0
        // into the running statistics.
        for node in -(sim.k as i64)..=0 {
            sim.record_node(node);
        }
        sim.absorb_post_node(0);
        Ok(sim)
    }

    pub fn time(&self) -> f64 {
        self.ring.newest as f64 * self.h
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn state(&self) -> SystemState {
        let frame = self.ring.frame(self.ring.newest);
        SystemState {
            time: self.time(),
            positions: Points::new(self.params.n_agents, self.params.dim, frame.pos.clone())
                .expect("ring frame has the right shape"),
        }
    }

    /// Euclidean-diameter upper bound from the per-coordinate bounding box;
    /// cheap enough to evaluate at every node.
    fn bounding_diameter(&self, pos: &[f64]) -> f64 {
        let d = self.params.dim;
        let mut acc = 0.0;
        for c in 0..d {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for chunk in pos.chunks_exact(d) {
                let x = chunk[c];
                if x < lo {
                    lo = x;
                }
                if x > hi {
                    hi = x;
                }
            }
            acc += (hi - lo) * (hi - lo);
        }
        acc.sqrt()
    }

    fn absorb_post_node(&mut self, node: i64) {
        let d = self.params.dim;
        let frame = self.ring.frame(node);
        for (c, (lo, hi)) in self.stats.post_extrema.iter_mut().enumerate() {
            for chunk in frame.pos.chunks_exact(d) {
                let x = chunk[c];
                if x < *lo {
                    *lo = x;
                }
                if x > *hi {
                    *hi = x;
                }
            }
        }
        if node >= 1 {
            for (c, m) in self.stats.max_abs_velocity.iter_mut().enumerate() {
                for chunk in frame.vel.chunks_exact(d) {
                    *m = m.max(chunk[c].abs());
                }
            }
        }
        // Observation windows: node n belongs to window w iff
        // (6w - 1) K <= n <= 6 w K.
        let k = self.k as i64;
        let w = (node + k) / (6 * k);
        if w >= 1 && node <= 6 * w * k {
            let widx = w as usize;
            while self.stats.windows.len() <= widx {
                let idx = self.stats.windows.len();
                self.stats.windows.push(WindowExtrema::new(idx, d));
            }
            let entry = &mut self.stats.windows[widx];
            entry.absorb(&self.ring.frames[(node.rem_euclid(k + 1)) as usize].pos, d);
            if node == 6 * w * k {
                entry.complete = true;
            }
        }
    }

    fn record_node(&mut self, node: i64) {
        let stride = self.cfg.record_stride as i64;
        if (node + self.k as i64) % stride != 0 {
            return;
        }
        let frame = self.ring.frame(node);
        self.rec_times.push(node as f64 * self.h);
        self.rec_pos.extend_from_slice(&frame.pos);
        self.rec_vel.extend_from_slice(&frame.vel);
        self.rec_diam
            .push(model::diameter_flat(&frame.pos, self.params.dim));
    }

    /// Advance by one step of size `h`.
    pub fn step(&mut self) -> Result<()> {
        let n = self.ring.newest;
        let k = self.k as i64;
        let h = self.h;
        let nd = self.params.n_agents * self.params.dim;

        {
            // Delayed segment for this step: nodes (n - K, n - K + 1).
            let left = self.ring.frame(n - k);
            let right = self.ring.frame(n - k + 1);
            let left_vel = if n - k == 0 { &self.right_vel0 } else { &left.vel };
            for i in 0..nd {
                self.scratch.mid[i] =
                    history::hermite_mid(h, left.pos[i], left_vel[i], right.pos[i], right.vel[i]);
            }

            let current = &self.ring.frame(n).pos;
            // k1 is cached from the previous step's end-of-step evaluation.
            for i in 0..nd {
                self.scratch.stage_state[i] = current[i] + 0.5 * h * self.k1[i];
            }
            model::rhs_into(
                &self.params,
                &self.scratch.stage_state,
                &self.scratch.mid,
                &mut self.scratch.k2,
                &mut self.stats.weights,
            );

            for i in 0..nd {
                self.scratch.stage_state[i] = current[i] + 0.5 * h * self.scratch.k2[i];
            }
            model::rhs_into(
                &self.params,
                &self.scratch.stage_state,
                &self.scratch.mid,
                &mut self.scratch.k3,
                &mut self.stats.weights,
            );

            let far = &self.ring.frame(n - k + 1).pos;
            for i in 0..nd {
                self.scratch.stage_state[i] = current[i] + h * self.scratch.k3[i];
            }
            model::rhs_into(
                &self.params,
                &self.scratch.stage_state,
                far,
                &mut self.scratch.k4,
                &mut self.stats.weights,
            );

            for i in 0..nd {
                self.scratch.next[i] = current[i]
                    + (h / 6.0)
                        * (self.k1[i]
                            + 2.0 * self.scratch.k2[i]
                            + 2.0 * self.scratch.k3[i]
                            + self.scratch.k4[i]);
            }
            if !self.scratch.next.iter().all(|x| x.is_finite()) {
                return Err(Error::IntegrationFailure {
                    time: (n + 1) as f64 * h,
                });
            }

            // Node velocity at t + h; doubles as the next step's k1.
            model::rhs_into(
                &self.params,
                &self.scratch.next,
                far,
                &mut self.k1,
                &mut self.stats.weights,
            );
        }
        self.ring.push(n + 1, &self.scratch.next, &self.k1);

        self.absorb_post_node(n + 1);
        self.record_node(n + 1);

        if self.consensus_at.is_none() {
            let bd = self.bounding_diameter(&self.ring.frame(n + 1).pos);
            if bd < self.cfg.eps_consensus {
                self.consensus_at = Some((n + 1) as f64 * h);
            }
        }
        Ok(())
    }

    /// Step until `t_end` (rounded up to the next grid node), the configured
    /// consensus threshold, whichever comes first. Consumes the simulation
    /// and returns the dense record.
    pub fn run_until(mut self, t_end: f64) -> Result<Trajectory> {
        if !t_end.is_finite() || t_end < 0.0 {
            return Err(Error::Config(format!(
                "t_end must be finite and >= 0, got {t_end}"
            )));
        }
        let goal = (t_end / self.h).ceil() as i64;
        while self.ring.newest < goal && self.consensus_at.is_none() {
            self.step()?;
        }
        Ok(self.finish())
    }

    /// Run to the configured `t_end`.
    pub fn run(self) -> Result<Trajectory> {
        let t_end = self.cfg.t_end;
        self.run_until(t_end)
    }

    fn finish(self) -> Trajectory {
        let newest = self.ring.newest;
        let frame = self.ring.frame(newest);
        let final_positions =
            Points::new(self.params.n_agents, self.params.dim, frame.pos.clone())
                .expect("frame shape");
        let final_diameter = final_positions.diameter();
        let stop = if self.consensus_at.is_some() {
            StopReason::Consensus
        } else {
            StopReason::ReachedEnd
        };
        Trajectory {
            params: self.params,
            h: self.h,
            steps_per_delay: self.k,
            record_stride: self.cfg.record_stride,
            eps_consensus: self.cfg.eps_consensus,
            times: self.rec_times,
            positions: self.rec_pos,
            velocities: self.rec_vel,
            diameters: self.rec_diam,
            stats: self.stats,
            final_time: newest as f64 * self.h,
            final_positions,
            final_diameter,
            consensus_time: self.consensus_at,
            stop,
        }
    }
}

/// Dense, immutable record of one run: every `record_stride`-th grid node
/// plus exact whole-run statistics collected at full resolution.
#[derive(Debug, Clone)]
pub struct Trajectory {
    params: ModelParams,
    h: f64,
    steps_per_delay: usize,
    record_stride: usize,
    eps_consensus: f64,
    times: Vec<f64>,
    positions: Vec<f64>,
    velocities: Vec<f64>,
    diameters: Vec<f64>,
    stats: TrajectoryStats,
    final_time: f64,
    final_positions: Points,
    final_diameter: f64,
    consensus_time: Option<f64>,
    stop: StopReason,
}

impl Trajectory {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn n_agents(&self) -> usize {
        self.params.n_agents
    }

    pub fn dim(&self) -> usize {
        self.params.dim
    }

    pub fn tau(&self) -> f64 {
        self.params.tau
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    pub fn steps_per_delay(&self) -> usize {
        self.steps_per_delay
    }

    pub fn record_stride(&self) -> usize {
        self.record_stride
    }

    pub fn eps_consensus(&self) -> f64 {
        self.eps_consensus
    }

    /// Recorded grid times, `-tau + n * h * record_stride`.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn n_records(&self) -> usize {
        self.times.len()
    }

    /// Positions at recorded index `idx` (row `i` = agent `i`).
    pub fn positions_at(&self, idx: usize) -> &[f64] {
        let nd = self.n_agents() * self.dim();
        &self.positions[idx * nd..(idx + 1) * nd]
    }

    pub fn velocities_at(&self, idx: usize) -> &[f64] {
        let nd = self.n_agents() * self.dim();
        &self.velocities[idx * nd..(idx + 1) * nd]
    }

    /// Exact Euclidean diameter at each recorded node.
    pub fn diameters(&self) -> &[f64] {
        &self.diameters
    }

    pub fn stats(&self) -> &TrajectoryStats {
        &self.stats
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    pub fn final_positions(&self) -> &Points {
        &self.final_positions
    }

    pub fn final_diameter(&self) -> f64 {
        self.final_diameter
    }

    /// First grid time at which the bounding-box diameter fell below the
    /// consensus threshold, if it did.
    pub fn consensus_time(&self) -> Option<f64> {
        self.consensus_time
    }

    pub fn stop_reason(&self) -> StopReason {
        self.stop
    }

    /// Cubic-Hermite interpolated position of one agent at an arbitrary
    /// recorded-range time.
    pub fn query(&self, agent: usize, t: f64) -> Result<Vec<f64>> {
        if agent >= self.n_agents() {
            return Err(Error::InputDomain(format!(
                "agent index {agent} out of range (N = {})",
                self.n_agents()
            )));
        }
        let (lo, hi) = (self.times[0], self.times[self.times.len() - 1]);
        if !t.is_finite() || t < lo || t > hi {
            return Err(Error::OutOfRange {
                lo: t,
                hi: t,
                rec_lo: lo,
                rec_hi: hi,
            });
        }
        let seg_h = self.h * self.record_stride as f64;
        let idx = (((t - lo) / seg_h).floor() as usize).min(self.times.len() - 2);
        let theta = ((t - self.times[idx]) / seg_h).clamp(0.0, 1.0);
        let d = self.dim();
        let p0 = &self.positions_at(idx)[agent * d..(agent + 1) * d];
        let p1 = &self.positions_at(idx + 1)[agent * d..(agent + 1) * d];
        let v0 = &self.velocities_at(idx)[agent * d..(agent + 1) * d];
        let v1 = &self.velocities_at(idx + 1)[agent * d..(agent + 1) * d];
        Ok((0..d)
            .map(|c| history::hermite(theta, seg_h, p0[c], v0[c], p1[c], v1[c]))
            .collect())
    }

    /// Shift every recorded position (and all derived statistics) by a
    /// constant vector. The dynamics are translation invariant, so the
    /// shifted record is the trajectory of the shifted initial data.
    pub fn translate(&mut self, shift: &[f64]) {
        assert_eq!(shift.len(), self.dim(), "shift must have dim components");
        let d = self.dim();
        for chunk in self.positions.chunks_exact_mut(d) {
            for (c, s) in chunk.iter_mut().zip(shift) {
                *c += s;
            }
        }
        for i in 0..self.final_positions.len() {
            let row = self.final_positions.row_mut(i);
            for (c, s) in row.iter_mut().zip(shift) {
                *c += s;
            }
        }
        for (c, s) in shift.iter().enumerate() {
            let (lo, hi) = self.stats.initial_extrema[c];
            self.stats.initial_extrema[c] = (lo + s, hi + s);
            let (lo, hi) = self.stats.post_extrema[c];
            self.stats.post_extrema[c] = (lo + s, hi + s);
            for w in &mut self.stats.windows {
                w.min[c] += s;
                w.max[c] += s;
            }
        }
    }

    /// Build a trajectory record directly from samples (uniform spacing);
    /// used to wrap externally produced data for the analysis routines.
    pub fn from_samples(
        params: ModelParams,
        t0: f64,
        seg: f64,
        positions: Vec<Vec<f64>>,
        velocities: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if positions.len() < 2 || positions.len() != velocities.len() {
            return Err(Error::Config(
                "need at least two frames with matching velocity frames".into(),
            ));
        }
        let (n_agents, dim) = (params.n_agents, params.dim);
        let nd = n_agents * dim;
        if positions.iter().chain(&velocities).any(|f| f.len() != nd) {
            return Err(Error::Config("frame shape mismatch".into()));
        }
        let m = positions.len();
        let times: Vec<f64> = (0..m).map(|i| t0 + i as f64 * seg).collect();
        let mut initial = vec![(f64::INFINITY, f64::NEG_INFINITY); dim];
        let mut post = vec![(f64::INFINITY, f64::NEG_INFINITY); dim];
        for (t, frame) in times.iter().zip(&positions) {
            for chunk in frame.chunks_exact(dim) {
                for (c, &x) in chunk.iter().enumerate() {
                    if *t <= 0.0 {
                        initial[c].0 = initial[c].0.min(x);
                        initial[c].1 = initial[c].1.max(x);
                    }
                    if *t >= 0.0 {
                        post[c].0 = post[c].0.min(x);
                        post[c].1 = post[c].1.max(x);
                    }
                }
            }
        }
        let diameters: Vec<f64> = positions
            .iter()
            .map(|f| {
                Points::new(n_agents, dim, f.clone())
                    .expect("checked shape")
                    .diameter()
            })
            .collect();
        let final_positions = Points::new(n_agents, dim, positions[m - 1].clone())?;
        let final_diameter = final_positions.diameter();
        let mut max_abs_velocity = vec![0.0f64; dim];
        for (t, frame) in times.iter().zip(&velocities) {
            if *t >= 0.0 {
                for chunk in frame.chunks_exact(dim) {
                    for (c, &v) in chunk.iter().enumerate() {
                        max_abs_velocity[c] = max_abs_velocity[c].max(v.abs());
                    }
                }
            }
        }
        let windows = vec![WindowExtrema {
            index: 0,
            min: initial.iter().map(|e| e.0).collect(),
            max: initial.iter().map(|e| e.1).collect(),
            complete: true,
        }];
        Ok(Trajectory {
            params,
            h: seg,
            steps_per_delay: 1,
            record_stride: 1,
            eps_consensus: 0.0,
            times,
            positions: positions.into_iter().flatten().collect(),
            velocities: velocities.into_iter().flatten().collect(),
            diameters,
            stats: TrajectoryStats {
                initial_extrema: initial,
                post_extrema: post,
                max_abs_velocity,
                weights: WeightStats::default(),
                windows,
            },
            final_time: t0 + (m - 1) as f64 * seg,
            final_positions,
            final_diameter,
            consensus_time: None,
            stop: StopReason::ReachedEnd,
        })
    }
}
