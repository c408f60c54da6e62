//! Particle-approximation experiments for the mean-field limit: empirical
//! measures, exact 1D Wasserstein distances, N-scaling and stability runs.
//!
//! The mean-field equation itself is never discretized. Its consensus
//! behaviour is probed the way the limit is constructed: sample `N` atoms
//! from the source density, run the discrete system, and watch the
//! empirical diameter; the contraction machinery is uniform in `N`, so the
//! decay profile should be too. Wasserstein distances are restricted to
//! equal-size uniform-weight samples, where the 1D distance is exact via
//! order statistics; in several dimensions the coordinatewise maximum is a
//! lower bound on the true distance.

use crate::engine::{IntegratorConfig, Simulation, Trajectory};
use crate::error::{Error, Result};
use crate::history::InitialHistory;
use crate::model::{ModelParams, Points};
use crate::rng::SplitMix64;

/// Uniform-weight atomic measure: `N` atoms, weight `1/N` each.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    pub atoms: Points,
    pub time_label: f64,
}

impl EmpiricalMeasure {
    pub fn new(atoms: Points, time_label: f64) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Empty("empirical measure needs at least one atom"));
        }
        Ok(Self { atoms, time_label })
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn diameter(&self) -> f64 {
        self.atoms.diameter()
    }

    /// Coordinate `c` of every atom, sorted ascending.
    pub fn sorted_projection(&self, c: usize) -> Vec<f64> {
        let mut v: Vec<f64> = self.atoms.rows().map(|r| r[c]).collect();
        v.sort_by(|a, b| a.total_cmp(b));
        v
    }
}

/// Exact 1-Wasserstein distance of two equal-size uniform-weight samples in
/// one dimension: `(1/N) sum |a_(i) - b_(i)|` over the sorted lists, the
/// order-statistics coupling being optimal in 1D.
pub fn w1_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::Empty("w1 of empty samples"));
    }
    debug_assert!(a.windows(2).all(|w| w[0] <= w[1]), "a must be sorted");
    debug_assert!(b.windows(2).all(|w| w[0] <= w[1]), "b must be sorted");
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
    Ok(sum / a.len() as f64)
}

/// Coordinatewise-maximum Wasserstein surrogate for equal-size samples in
/// `R^d`: the largest `w1_1d` over the `d` coordinate projections. A lower
/// bound on the true 1-Wasserstein distance; equal to it when `d = 1`.
pub fn w1_projected(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<f64> {
    if mu.len() != nu.len() {
        return Err(Error::SizeMismatch {
            left: mu.len(),
            right: nu.len(),
        });
    }
    let dim = mu.atoms.dim().min(nu.atoms.dim());
    let mut best = 0.0f64;
    for c in 0..dim {
        let a = mu.sorted_projection(c);
        let b = nu.sorted_projection(c);
        best = best.max(w1_1d(&a, &b)?);
    }
    Ok(best)
}

/// Where the initial atoms come from. Sources are compactly supported: the
/// Gaussian is truncated to its box by rejection.
#[derive(Debug, Clone)]
pub enum SourceDensity {
    UniformBox(Vec<(f64, f64)>),
    Gaussian {
        mean: Vec<f64>,
        scale: f64,
        truncate: Vec<(f64, f64)>,
    },
}

impl SourceDensity {
    pub fn dim(&self) -> usize {
        match self {
            SourceDensity::UniformBox(b) => b.len(),
            SourceDensity::Gaussian { mean, .. } => mean.len(),
        }
    }

    /// Draw `n` atoms with the given seed; deterministic per `(n, seed)`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Points> {
        let dim = self.dim();
        if dim == 0 {
            return Err(Error::Config("source density needs dimension >= 1".into()));
        }
        let mut rng = SplitMix64::new(seed);
        let mut data = Vec::with_capacity(n * dim);
        match self {
            SourceDensity::UniformBox(bounds) => {
                for &(lo, hi) in bounds {
                    if !lo.is_finite() || !hi.is_finite() || hi < lo {
                        return Err(Error::Config(format!("invalid box interval ({lo}, {hi})")));
                    }
                }
                for _ in 0..n {
                    for &(lo, hi) in bounds {
                        data.push(rng.uniform(lo, hi));
                    }
                }
            }
            SourceDensity::Gaussian {
                mean,
                scale,
                truncate,
            } => {
                if truncate.len() != dim {
                    return Err(Error::Config(
                        "gaussian truncation box must match the mean's dimension".into(),
                    ));
                }
                if !scale.is_finite() || *scale <= 0.0 {
                    return Err(Error::Config(format!("scale must be > 0, got {scale}")));
                }
                for _ in 0..n {
                    for c in 0..dim {
                        let (lo, hi) = truncate[c];
                        if !(lo < hi) {
                            return Err(Error::Config(format!(
                                "invalid truncation interval ({lo}, {hi})"
                            )));
                        }
                        // rejection against the truncation box
                        let x = loop {
                            let draw = mean[c] + scale * rng.next_gaussian();
                            if draw >= lo && draw <= hi {
                                break draw;
                            }
                        };
                        data.push(x);
                    }
                }
            }
        }
        Points::new(n, dim, data)
    }
}

/// One N-scaling experiment: run the dynamics from `n_values x seeds`
/// sampled ensembles and tabulate diameters over time.
#[derive(Debug, Clone)]
pub struct MeanFieldExperiment {
    pub source: SourceDensity,
    pub n_values: Vec<usize>,
    pub seeds: Vec<u64>,
    pub horizon: f64,
    /// Template parameters; `n_agents` is overridden per run.
    pub params: ModelParams,
    pub steps_per_delay: usize,
    pub record_stride: usize,
    pub eps_consensus: f64,
}

/// Per-run summary of one `(N, seed)` cell.
#[derive(Debug, Clone)]
pub struct MeanFieldRun {
    pub n: usize,
    pub seed: u64,
    /// Recorded sample times (`t >= 0`).
    pub times: Vec<f64>,
    /// Exact empirical diameter at each sample time.
    pub diameters: Vec<f64>,
    /// Projected W1 against the same-N first-seed reference run at matched
    /// sample times; zero for the reference itself.
    pub w1_vs_ref: Vec<f64>,
    /// First recorded time with diameter at most half the initial one.
    pub half_time: Option<f64>,
    pub consensus_time: Option<f64>,
    pub final_diameter: f64,
}

#[derive(Debug, Clone)]
pub struct MeanFieldTable {
    pub runs: Vec<MeanFieldRun>,
}

impl MeanFieldTable {
    pub fn all_reached(&self, eps: f64) -> bool {
        self.runs.iter().all(|r| r.final_diameter < eps)
    }

    /// Largest ratio of half-diameter times across all runs.
    pub fn half_time_spread(&self) -> Option<f64> {
        let times: Vec<f64> = self.runs.iter().filter_map(|r| r.half_time).collect();
        if times.len() != self.runs.len() || times.is_empty() {
            return None;
        }
        let lo = times.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = times.iter().cloned().fold(0.0f64, f64::max);
        Some(hi / lo.max(f64::MIN_POSITIVE))
    }
}

/// Trajectory plus its `t >= 0` sample times, diameters and position frames.
type RunRecord = (Trajectory, Vec<f64>, Vec<f64>, Vec<Vec<f64>>);

fn run_one(exp: &MeanFieldExperiment, n: usize, seed: u64) -> Result<RunRecord> {
    let atoms = exp.source.sample(n, seed)?;
    let mut params = exp.params.clone();
    params.n_agents = n;
    params.dim = exp.source.dim();
    let history = InitialHistory::ConstantPerAgent(atoms);
    let cfg = IntegratorConfig {
        steps_per_delay: exp.steps_per_delay,
        t_end: exp.horizon,
        record_stride: exp.record_stride,
        eps_consensus: exp.eps_consensus,
    };
    let traj = Simulation::init(params, &history, cfg)?.run_until(exp.horizon)?;
    // Keep only t >= 0 samples for the tables.
    let mut times = Vec::new();
    let mut diams = Vec::new();
    let mut frames = Vec::new();
    for (idx, &t) in traj.times().iter().enumerate() {
        if t < 0.0 {
            continue;
        }
        times.push(t);
        diams.push(traj.diameters()[idx]);
        frames.push(traj.positions_at(idx).to_vec());
    }
    Ok((traj, times, diams, frames))
}

/// Run the whole experiment grid, deterministically per `(N, seed)`.
pub fn run_meanfield(exp: &MeanFieldExperiment) -> Result<MeanFieldTable> {
    if exp.n_values.is_empty() || exp.seeds.is_empty() {
        return Err(Error::Config("experiment needs n_values and seeds".into()));
    }
    let dim = exp.source.dim();
    let mut runs = Vec::new();
    for &n in &exp.n_values {
        let mut reference: Option<Vec<Vec<f64>>> = None;
        for (s_idx, &seed) in exp.seeds.iter().enumerate() {
            let (traj, times, diameters, frames) = run_one(exp, n, seed)?;
            let w1_vs_ref = match &reference {
                None => vec![0.0; times.len()],
                Some(ref_frames) => {
                    let upto = ref_frames.len().min(frames.len());
                    let mut w = Vec::with_capacity(upto);
                    for i in 0..upto {
                        let mu =
                            EmpiricalMeasure::new(Points::new(n, dim, frames[i].clone())?, times[i])?;
                        let nu = EmpiricalMeasure::new(
                            Points::new(n, dim, ref_frames[i].clone())?,
                            times[i],
                        )?;
                        w.push(w1_projected(&mu, &nu)?);
                    }
                    w
                }
            };
            if s_idx == 0 {
                reference = Some(frames);
            }
            let d0 = diameters.first().copied().unwrap_or(0.0);
            let half_time = times
                .iter()
                .zip(&diameters)
                .find(|(_, &d)| d <= 0.5 * d0)
                .map(|(&t, _)| t);
            runs.push(MeanFieldRun {
                n,
                seed,
                times,
                diameters,
                w1_vs_ref,
                half_time,
                consensus_time: traj.consensus_time(),
                final_diameter: traj.final_diameter(),
            });
        }
    }
    Ok(MeanFieldTable { runs })
}

/// How the perturbed twin ensemble is coupled to the base one.
#[derive(Debug, Clone)]
pub enum Perturbation {
    /// Every atom moves by `delta` along one fixed unit vector.
    Shift(Vec<f64>),
    /// Every atom moves by `delta` along its own seeded random unit vector.
    RandomDirections { seed: u64 },
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    /// `max_{t <= T} W1(f1(t), f2(t)) / W1(f1(0), f2(0))`; zero when the
    /// ensembles coincide.
    pub ratio: f64,
    pub w1_initial: f64,
    pub w1_max: f64,
}

/// Empirical shadow of the Wasserstein stability estimate: run two
/// atom-by-atom coupled ensembles at initial distance `delta` and report the
/// worst-case W1 amplification over the horizon.
pub fn stability_probe(
    exp: &MeanFieldExperiment,
    n: usize,
    seed: u64,
    delta: f64,
    coupling: &Perturbation,
) -> Result<StabilityReport> {
    if !delta.is_finite() || delta < 0.0 {
        return Err(Error::InputDomain(format!(
            "delta must be finite and >= 0, got {delta}"
        )));
    }
    let dim = exp.source.dim();
    let base = exp.source.sample(n, seed)?;
    let mut twin = base.clone();
    if delta > 0.0 {
        match coupling {
            Perturbation::Shift(dir) => {
                if dir.len() != dim {
                    return Err(Error::InputDomain(
                        "shift direction must match the source dimension".into(),
                    ));
                }
                let norm: f64 = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm == 0.0 || !norm.is_finite() {
                    return Err(Error::InputDomain("shift direction must be nonzero".into()));
                }
                for i in 0..n {
                    for (c, &d) in dir.iter().enumerate() {
                        twin.row_mut(i)[c] += delta * d / norm;
                    }
                }
            }
            Perturbation::RandomDirections { seed } => {
                let mut rng = SplitMix64::new(*seed);
                for i in 0..n {
                    // unit direction from normalized gaussian draws
                    let mut dir = vec![0.0f64; dim];
                    loop {
                        let mut norm2 = 0.0;
                        for d in dir.iter_mut() {
                            *d = rng.next_gaussian();
                            norm2 += *d * *d;
                        }
                        if norm2 > 1e-24 {
                            let norm = norm2.sqrt();
                            dir.iter_mut().for_each(|d| *d /= norm);
                            break;
                        }
                    }
                    for (c, &d) in dir.iter().enumerate() {
                        twin.row_mut(i)[c] += delta * d;
                    }
                }
            }
        }
    }

    let run = |atoms: Points| -> Result<Vec<Vec<f64>>> {
        let mut params = exp.params.clone();
        params.n_agents = n;
        params.dim = dim;
        let cfg = IntegratorConfig {
            steps_per_delay: exp.steps_per_delay,
            t_end: exp.horizon,
            record_stride: exp.record_stride,
            // No early stop: both runs must record the same time grid.
            eps_consensus: 0.0,
        };
        let traj = Simulation::init(params, &InitialHistory::ConstantPerAgent(atoms), cfg)?
            .run_until(exp.horizon)?;
        Ok(traj
            .times()
            .iter()
            .zip(0..traj.n_records())
            .filter(|(t, _)| **t >= 0.0)
            .map(|(_, idx)| traj.positions_at(idx).to_vec())
            .collect())
    };

    let frames1 = run(base)?;
    let frames2 = run(twin)?;
    let measure = |frame: &[f64]| -> Result<EmpiricalMeasure> {
        EmpiricalMeasure::new(Points::new(n, dim, frame.to_vec())?, 0.0)
    };
    let w1_initial = w1_projected(&measure(&frames1[0])?, &measure(&frames2[0])?)?;
    let mut w1_max = 0.0f64;
    for (f1, f2) in frames1.iter().zip(&frames2) {
        w1_max = w1_max.max(w1_projected(&measure(f1)?, &measure(f2)?)?);
    }
    let ratio = if w1_initial == 0.0 {
        0.0
    } else {
        w1_max / w1_initial
    };
    Ok(StabilityReport {
        ratio,
        w1_initial,
        w1_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{InfluenceFunction, WeightScheme};

    fn meas(rows: &[&[f64]]) -> EmpiricalMeasure {
        let pts =
            Points::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap();
        EmpiricalMeasure::new(pts, 0.0).unwrap()
    }

    /// Exact W1 for tiny uniform samples by exhaustive assignment: the
    /// optimal coupling of equal-size uniform measures is a permutation.
    fn w1_oracle(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> f64 {
        let n = a.len();
        let dim = a.atoms.dim();
        let cost = |i: usize, j: usize| -> f64 {
            let (x, y) = (a.atoms.row(i), b.atoms.row(j));
            (0..dim)
                .map(|c| (x[c] - y[c]) * (x[c] - y[c]))
                .sum::<f64>()
                .sqrt()
        };
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = f64::INFINITY;
        permute(&mut perm, 0, &mut |p: &[usize]| {
            let total: f64 = p.iter().enumerate().map(|(i, &j)| cost(i, j)).sum();
            if total < best {
                best = total;
            }
        });
        best / n as f64
    }

    fn permute(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
        if k == v.len() {
            f(v);
            return;
        }
        for i in k..v.len() {
            v.swap(k, i);
            permute(v, k + 1, f);
            v.swap(k, i);
        }
    }

    #[test]
    fn w1_identical_lists_zero() {
        let a = [0.0, 1.0, 2.5];
        assert_eq!(w1_1d(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn w1_split_pair() {
        // optimal coupling of {0, 1} and {0.5, 0.5} transports each atom
        // half a unit: W1 = 0.5
        let a = [0.0, 1.0];
        let b = [0.5, 0.5];
        assert_eq!(w1_1d(&a, &b).unwrap(), 0.5);
        let ma = meas(&[&[0.0], &[1.0]]);
        let mb = meas(&[&[0.5], &[0.5]]);
        assert!((w1_oracle(&ma, &mb) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn w1_single_atom() {
        assert_eq!(w1_1d(&[0.0], &[3.0]).unwrap(), 3.0);
    }

    #[test]
    fn w1_rejects_unequal_lengths() {
        assert!(matches!(
            w1_1d(&[0.0], &[1.0, 2.0]),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn w1_projected_translation() {
        let mu = meas(&[&[0.0, 0.0], &[1.0, 2.0], &[3.0, -1.0]]);
        let mut shifted_rows: Vec<Vec<f64>> = mu.atoms.rows().map(|r| r.to_vec()).collect();
        for r in &mut shifted_rows {
            r[0] += 1.0;
        }
        let nu = EmpiricalMeasure::new(Points::from_rows(&shifted_rows).unwrap(), 0.0).unwrap();
        let w = w1_projected(&mu, &nu).unwrap();
        assert!((w - 1.0).abs() < 1e-15);
        // shift by one unit in x transports every atom exactly one unit
        assert!((w1_oracle(&mu, &nu) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn w1_projected_reduces_to_1d() {
        let mu = meas(&[&[0.0], &[2.0]]);
        let nu = meas(&[&[1.0], &[5.0]]);
        let direct = w1_1d(&[0.0, 2.0], &[1.0, 5.0]).unwrap();
        assert_eq!(w1_projected(&mu, &nu).unwrap(), direct);
    }

    #[test]
    fn w1_projected_lower_bounds_oracle() {
        let mut rng = SplitMix64::new(2024);
        for dim in 1..=3usize {
            for _ in 0..40 {
                let n = 2 + (rng.next_u64() % 5) as usize; // up to 6 atoms
                let draw = |rng: &mut SplitMix64| -> Vec<Vec<f64>> {
                    (0..n)
                        .map(|_| (0..dim).map(|_| rng.uniform(-5.0, 5.0)).collect())
                        .collect()
                };
                let a =
                    EmpiricalMeasure::new(Points::from_rows(&draw(&mut rng)).unwrap(), 0.0).unwrap();
                let b =
                    EmpiricalMeasure::new(Points::from_rows(&draw(&mut rng)).unwrap(), 0.0).unwrap();
                let proj = w1_projected(&a, &b).unwrap();
                let exact = w1_oracle(&a, &b);
                assert!(
                    proj <= exact + 1e-12,
                    "projected {proj} above oracle {exact} (dim {dim})"
                );
                if dim == 1 {
                    assert!((proj - exact).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn w1_metric_axioms_on_random_triples() {
        let mut rng = SplitMix64::new(555);
        for _ in 0..50 {
            let n = 4;
            let mut draw = || -> Vec<f64> {
                let mut v: Vec<f64> = (0..n).map(|_| rng.uniform(-10.0, 10.0)).collect();
                v.sort_by(|a, b| a.total_cmp(b));
                v
            };
            let (a, b, c) = (draw(), draw(), draw());
            let dab = w1_1d(&a, &b).unwrap();
            let dba = w1_1d(&b, &a).unwrap();
            let dac = w1_1d(&a, &c).unwrap();
            let dcb = w1_1d(&c, &b).unwrap();
            assert!((dab - dba).abs() <= 1e-12);
            assert_eq!(w1_1d(&a, &a).unwrap(), 0.0);
            assert!(dab <= dac + dcb + 1e-12);
        }
    }

    fn small_experiment() -> MeanFieldExperiment {
        MeanFieldExperiment {
            source: SourceDensity::UniformBox(vec![(0.0, 10.0)]),
            n_values: vec![5, 10],
            seeds: vec![1, 2],
            horizon: 60.0,
            params: ModelParams {
                n_agents: 2,
                dim: 1,
                tau: 1.0,
                influence: InfluenceFunction::power_law(1.0).unwrap(),
                scheme: WeightScheme::Classical,
            },
            steps_per_delay: 16,
            record_stride: 4,
            eps_consensus: 1e-8,
        }
    }

    #[test]
    fn degenerate_source_stays_at_zero_diameter() {
        let mut exp = small_experiment();
        exp.source = SourceDensity::UniformBox(vec![(5.0, 5.0)]);
        exp.horizon = 10.0;
        exp.eps_consensus = 0.0;
        let table = run_meanfield(&exp).unwrap();
        for run in &table.runs {
            assert!(run.diameters.iter().all(|&d| d == 0.0));
        }
    }

    #[test]
    fn meanfield_runs_deterministic() {
        let exp = small_experiment();
        let a = run_meanfield(&exp).unwrap();
        let b = run_meanfield(&exp).unwrap();
        assert_eq!(a.runs.len(), b.runs.len());
        for (x, y) in a.runs.iter().zip(&b.runs) {
            assert_eq!(x.diameters, y.diameters);
            assert_eq!(x.w1_vs_ref, y.w1_vs_ref);
        }
    }

    #[test]
    fn meanfield_diameters_bounded_and_shrinking() {
        let exp = small_experiment();
        let table = run_meanfield(&exp).unwrap();
        for run in &table.runs {
            let d0 = run.diameters[0];
            assert!(run.diameters.iter().all(|&d| d <= d0 + 1e-9));
            assert!(run.final_diameter < 1e-6, "final {}", run.final_diameter);
            assert!(run.half_time.is_some());
        }
        // reference runs carry zero W1 columns
        assert!(table.runs[0].w1_vs_ref.iter().all(|&w| w == 0.0));
        // non-reference runs differ from the reference at t = 0
        assert!(table.runs[1].w1_vs_ref[0] > 0.0);
    }

    #[test]
    fn gaussian_source_respects_truncation() {
        let src = SourceDensity::Gaussian {
            mean: vec![0.0, 1.0],
            scale: 3.0,
            truncate: vec![(-2.0, 2.0), (0.0, 2.0)],
        };
        let atoms = src.sample(200, 9).unwrap();
        for row in atoms.rows() {
            assert!(row[0] >= -2.0 && row[0] <= 2.0);
            assert!(row[1] >= 0.0 && row[1] <= 2.0);
        }
    }

    #[test]
    fn stability_zero_delta_gives_zero_ratio() {
        let exp = small_experiment();
        let rep = stability_probe(&exp, 6, 3, 0.0, &Perturbation::RandomDirections { seed: 1 })
            .unwrap();
        assert_eq!(rep.ratio, 0.0);
        assert_eq!(rep.w1_max, 0.0);
    }

    #[test]
    fn stability_uniform_shift_ratio_one() {
        // shifting the whole ensemble rides along with the dynamics, so the
        // W1 distance stays exactly at its initial value
        let mut exp = small_experiment();
        exp.horizon = 20.0;
        let rep = stability_probe(&exp, 6, 3, 0.5, &Perturbation::Shift(vec![1.0])).unwrap();
        assert!((rep.w1_initial - 0.5).abs() < 1e-12);
        assert!((rep.ratio - 1.0).abs() < 1e-9, "ratio {}", rep.ratio);
    }

    #[test]
    fn stability_ratio_bounded_over_delta_grid() {
        let mut exp = small_experiment();
        exp.horizon = 30.0;
        let mut ratios = Vec::new();
        for delta in [1e-3, 1e-2, 1e-1] {
            let rep = stability_probe(
                &exp,
                8,
                11,
                delta,
                &Perturbation::RandomDirections { seed: 5 },
            )
            .unwrap();
            assert!(rep.ratio.is_finite());
            ratios.push(rep.ratio);
        }
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0f64, f64::max);
        assert!(hi / lo < 10.0, "ratios vary too much: {ratios:?}");
    }
}
