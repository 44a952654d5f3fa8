//! Seeded Monte Carlo experiments.
//!
//! Every trial owns two random streams: stream 0 draws the fault set and the
//! sensor readings shared by all classical methods, stream 1 draws the
//! entangled estimate. A stream is a ChaCha8 generator keyed by a SplitMix64
//! hash of `(seed, M, trial, stream)`, so trials are independent, can run in
//! any order on any thread, and adding a method never perturbs another.
//! Aggregation always walks trials in index order.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, BoundQuery, Strategy};
use crate::error::{invalid, Error, Result};
use crate::fusion::{self, FaultClass, Interval, KalmanState, OverlapRegion};
use crate::stats;
use crate::sensor::{self, ByzantineModel, Measurement, SensorParams, SensorReading};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    Naive,
    BrooksIyengar,
    Outlier,
    Bayesian,
    Kalman,
    Entangled,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Naive,
        Method::BrooksIyengar,
        Method::Outlier,
        Method::Bayesian,
        Method::Kalman,
        Method::Entangled,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Naive => "naive",
            Method::BrooksIyengar => "brooks_iyengar",
            Method::Outlier => "outlier",
            Method::Bayesian => "bayesian",
            Method::Kalman => "kalman",
            Method::Entangled => "entangled",
        }
    }

    /// Fault-handling strategy whose bound applies to this estimator.
    pub fn bound_strategy(self, entangled: Strategy) -> Strategy {
        match self {
            Method::BrooksIyengar => Strategy::Bft,
            Method::Entangled => entangled,
            _ => Strategy::Outlier,
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "naive" => Ok(Method::Naive),
            "bi" | "brooks_iyengar" | "brooksiyengar" => Ok(Method::BrooksIyengar),
            "outlier" => Ok(Method::Outlier),
            "bayesian" | "bayes" => Ok(Method::Bayesian),
            "kalman" => Ok(Method::Kalman),
            "entangled" => Ok(Method::Entangled),
            other => Err(invalid(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub atoms: u32,
    pub sensitivity: f64,
    pub t_true: f64,
    pub sensor_counts: Vec<usize>,
    pub fault_fraction: f64,
    /// Entanglement visibility before preparation losses.
    pub visibility: f64,
    pub tau_prep: f64,
    /// Per-sensor visibility of the independent (classical-fusion) sensors.
    pub sensor_visibility: f64,
    pub trials: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub byzantine: ByzantineModel,
    pub alpha: f64,
    /// Fault strategy setting M_eff for the entangled estimator.
    pub strategy: Strategy,
    /// Bisection stopping width for crossover searches.
    pub crossover_tolerance: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            atoms: 1000,
            sensitivity: 0.1,
            t_true: 25.0,
            sensor_counts: vec![2, 4, 8, 16, 32, 64],
            fault_fraction: 0.0,
            visibility: 1.0,
            tau_prep: 0.0,
            sensor_visibility: 1.0,
            trials: 10_000,
            seed: 42,
            methods: vec![Method::Naive, Method::BrooksIyengar, Method::Outlier, Method::Entangled],
            byzantine: ByzantineModel::default(),
            alpha: 0.05,
            strategy: Strategy::Bft,
            crossover_tolerance: 0.02,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.sensor_counts.is_empty() || self.sensor_counts.contains(&0) {
            return Err(invalid("sensor counts must be non-empty and positive"));
        }
        if !(0.0..1.0).contains(&self.fault_fraction) {
            return Err(invalid("fault fraction must lie in [0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.visibility) {
            return Err(invalid("visibility must lie in [0, 1]"));
        }
        if !(self.sensor_visibility > 0.0 && self.sensor_visibility <= 1.0) {
            return Err(invalid("sensor visibility must lie in (0, 1]"));
        }
        if !(self.tau_prep >= 0.0) {
            return Err(invalid("preparation overhead must be non-negative"));
        }
        if self.atoms == 0 || !(self.sensitivity > 0.0) {
            return Err(invalid("atoms and sensitivity must be positive"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid("alpha must lie in (0, 1)"));
        }
        if !self.t_true.is_finite() {
            return Err(invalid("true parameter must be finite"));
        }
        if self.byzantine.spread < 0.0 {
            return Err(invalid("Byzantine spread must be non-negative"));
        }
        if !(self.crossover_tolerance > 0.0) {
            return Err(invalid("crossover tolerance must be positive"));
        }
        Ok(())
    }

    /// Byzantine sensors among `sensors`, ⌊fraction · M⌋.
    pub fn faults_for(&self, sensors: usize) -> usize {
        (self.fault_fraction * sensors as f64).floor() as usize
    }

    pub fn effective_visibility(&self) -> f64 {
        self.visibility * (-self.tau_prep).exp()
    }

    fn entangled_variance(&self, sensors: usize, visibility: f64) -> Result<f64> {
        let m = bounds::m_eff(sensors, self.faults_for(sensors), self.strategy)?;
        Ok(bounds::mse_bound(self.atoms, self.sensitivity, m, visibility))
    }

    pub fn bound_query(&self, sensors: usize, strategy: Strategy) -> BoundQuery {
        BoundQuery {
            atoms: self.atoms,
            sensitivity: self.sensitivity,
            sensors,
            faults: self.faults_for(sensors),
            visibility: self.effective_visibility(),
            strategy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub method: Method,
    pub sensors: usize,
    pub faults: usize,
    pub rmse: f64,
    pub rmse_stderr: f64,
    pub mean_bias: f64,
    pub mse: f64,
    pub mse_stderr: f64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent generator for one `(M, trial, stream)` cell of an experiment.
pub fn stream_rng(seed: u64, sensors: usize, trial: usize, stream: u64) -> ChaCha8Rng {
    let mut h = splitmix64(seed);
    for part in [sensors as u64, trial as u64, stream] {
        h = splitmix64(h ^ part);
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// One trial's sensor readings plus the ids of the Byzantine sensors (ascending).
pub fn sample_trial(
    config: &ExperimentConfig,
    sensors: usize,
    trial: usize,
    honest_visibility: impl Fn(&mut ChaCha8Rng) -> f64,
) -> Result<(Vec<SensorReading>, Vec<usize>)> {
    let mut rng = stream_rng(config.seed, sensors, trial, 0);
    let faults = config.faults_for(sensors);
    let mut faulty: Vec<usize> = sample(&mut rng, sensors, faults).into_vec();
    faulty.sort_unstable();
    let meas = Measurement {
        t_true: config.t_true,
        time: 0.0,
        alpha: config.alpha,
    };
    let readings = (0..sensors)
        .map(|id| {
            let params = if faulty.binary_search(&id).is_ok() {
                SensorParams::byzantine(config.atoms, config.sensitivity, 1.0)
            } else {
                let v = honest_visibility(&mut rng);
                if v == 1.0 {
                    SensorParams::coherent(config.atoms, config.sensitivity, 1.0)
                } else {
                    SensorParams::decohered(config.atoms, config.sensitivity, v, 1.0)
                }
            };
            sensor::sample_measurement(id, &params, &meas, &config.byzantine, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((readings, faulty))
}

fn kalman_estimate(config: &ExperimentConfig, readings: &[SensorReading]) -> Result<f64> {
    // single epoch from a diffuse prior, fed the outlier-screened measurement
    let screened = fusion::predictive_outlier_fuse(readings)?;
    let r = bounds::qpn_variance(config.atoms, config.sensitivity);
    let prior = KalmanState::with_noise(0.0, 1e8 * r, 0.0, r)?;
    Ok(fusion::kalman_step(&prior, screened.estimate, screened.effective_count)?.mean)
}

/// Estimate of one classical method on a set of readings.
pub fn classical_estimate(
    config: &ExperimentConfig,
    method: Method,
    readings: &[SensorReading],
) -> Result<f64> {
    match method {
        Method::Naive => {
            let xs: Vec<f64> = readings.iter().map(|r| r.estimate).collect();
            fusion::simple_average(&xs)
        }
        Method::BrooksIyengar => {
            let ivs: Vec<Interval> = readings.iter().map(|r| r.interval).collect();
            Ok(fusion::brooks_iyengar_fuse(&ivs)?.estimate)
        }
        Method::Outlier => Ok(fusion::predictive_outlier_fuse(readings)?.estimate),
        Method::Bayesian => {
            let xs: Vec<f64> = readings.iter().map(|r| r.estimate).collect();
            let vs: Vec<f64> = readings.iter().map(|r| r.visibility).collect();
            fusion::bayesian_weighted_fuse(&xs, &vs)
        }
        Method::Kalman => kalman_estimate(config, readings),
        Method::Entangled => Err(invalid("the entangled estimator does not use classical readings")),
    }
}

fn entangled_draw(config: &ExperimentConfig, sensors: usize, trial: usize) -> f64 {
    StandardNormal.sample(&mut stream_rng(config.seed, sensors, trial, 1))
}

/// Per-trial estimation errors, one row per trial and one column per method.
fn trial_errors(config: &ExperimentConfig, sensors: usize, methods: &[Method]) -> Result<Vec<Vec<f64>>> {
    let needs_readings = methods.iter().any(|m| *m != Method::Entangled);
    let ent_sd = if methods.contains(&Method::Entangled) {
        config.entangled_variance(sensors, config.effective_visibility())?.sqrt()
    } else {
        0.0
    };
    (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let readings = if needs_readings {
                sample_trial(config, sensors, trial, |_| config.sensor_visibility)?.0
            } else {
                Vec::new()
            };
            methods
                .iter()
                .map(|&m| match m {
                    Method::Entangled => Ok(ent_sd * entangled_draw(config, sensors, trial)),
                    _ => Ok(classical_estimate(config, m, &readings)? - config.t_true),
                })
                .collect()
        })
        .collect()
}

fn summarize(method: Method, sensors: usize, faults: usize, errors: impl Iterator<Item = f64> + Clone) -> TrialStats {
    let n = errors.clone().count() as f64;
    let bias = errors.clone().sum::<f64>() / n;
    let mse = errors.clone().map(|e| e * e).sum::<f64>() / n;
    let var_sq = if n > 1.0 {
        errors.map(|e| (e * e - mse).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let mse_stderr = (var_sq / n).sqrt();
    let rmse = mse.sqrt();
    TrialStats {
        method,
        sensors,
        faults,
        rmse,
        rmse_stderr: if rmse > 0.0 { mse_stderr / (2.0 * rmse) } else { 0.0 },
        mean_bias: bias,
        mse,
        mse_stderr,
    }
}

/// Runs every `(M, method)` cell; rows are ordered by M, then by method order in the config.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<TrialStats>> {
    config.validate()?;
    if config.methods.is_empty() {
        return Err(invalid("no methods selected"));
    }
    let mut out = Vec::new();
    for &m in &config.sensor_counts {
        let errs = trial_errors(config, m, &config.methods)?;
        let faults = config.faults_for(m);
        for (j, &method) in config.methods.iter().enumerate() {
            out.push(summarize(method, m, faults, errs.iter().map(|row| row[j])));
        }
    }
    Ok(out)
}

/// Least-squares slope of log₁₀(rmse) against log₁₀(M).
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(invalid("slope fit needs at least three points"));
    }
    if points.iter().any(|&(m, r)| !(m > 0.0) || !(r > 0.0)) {
        return Err(invalid("slope fit needs positive coordinates"));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.log10()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("slope fit needs at least two distinct sensor counts"));
    }
    Ok(sxy / sxx)
}

/// Finite-difference log-log slopes between consecutive points, reported at
/// the geometric midpoint of each pair of sensor counts.
pub fn local_slope_curve(points: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    if points.len() < 2 {
        return Err(invalid("local slopes need at least two points"));
    }
    if points.iter().any(|&(m, r)| !(m > 0.0) || !(r > 0.0)) {
        return Err(invalid("local slopes need positive coordinates"));
    }
    Ok(points
        .windows(2)
        .map(|w| {
            let (m0, r0) = w[0];
            let (m1, r1) = w[1];
            ((m0 * m1).sqrt(), (r1 / r0).log10() / (m1 / m0).log10())
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryGain {
    pub sensors: usize,
    pub method: Method,
    pub gain_db: f64,
}

/// `20·log₁₀(rmse_naive / rmse_method)` for every configured method and sensor count.
pub fn byzantine_recovery_gain(config: &ExperimentConfig) -> Result<Vec<RecoveryGain>> {
    let mut cfg = config.clone();
    if !cfg.methods.contains(&Method::Naive) {
        cfg.methods.insert(0, Method::Naive);
    }
    let stats = run_experiment(&cfg)?;
    Ok(recovery_gains(&stats))
}

pub fn recovery_gains(stats: &[TrialStats]) -> Vec<RecoveryGain> {
    stats
        .iter()
        .filter_map(|s| {
            let naive = stats
                .iter()
                .find(|n| n.sensors == s.sensors && n.method == Method::Naive)?;
            Some(RecoveryGain {
                sensors: s.sensors,
                method: s.method,
                gain_db: 20.0 * (naive.rmse / s.rmse).log10(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    pub sensors: usize,
    pub faults: usize,
    pub fault_fraction: f64,
    pub tau_prep: f64,
    pub strategy: Strategy,
    pub v_star: f64,
    /// Set when one side wins over all of [0, 1]; `v_star` is then the boundary.
    pub no_crossing: bool,
    pub classical_rmse: f64,
    pub v_star_literal: f64,
}

/// Visibility at which the simulated entangled RMSE meets the simulated
/// fault-tolerant classical RMSE, found by bisection down to
/// `crossover_tolerance` and a final linear interpolation.
///
/// The classical side (Brooks-Iyengar for `Bft`, outlier exclusion for
/// `Outlier`) does not depend on V and is simulated once. The entangled
/// draw of each trial is the standardized mean error of that trial's honest
/// readings: exactly standard normal, but correlated with the classical
/// error, which makes the comparison far less noisy than independent draws.
/// The same draws serve every probe, so successive probes differ only
/// through V.
pub fn empirical_crossover(config: &ExperimentConfig, strategy: Strategy) -> Result<Crossover> {
    config.validate()?;
    let sensors = config.sensor_counts[0];
    let faults = config.faults_for(sensors);
    let m_eff = bounds::m_eff(sensors, faults, strategy)?;
    let classical = match strategy {
        Strategy::Bft => Method::BrooksIyengar,
        Strategy::Outlier => Method::Outlier,
    };
    let honest_sd = sensor::parameter_std(config.atoms, config.sensitivity, config.sensor_visibility)?
        / ((sensors - faults) as f64).sqrt();
    let pairs: Vec<(f64, f64)> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let (readings, faulty) = sample_trial(config, sensors, trial, |_| config.sensor_visibility)?;
            let honest: Vec<f64> = readings
                .iter()
                .filter(|r| faulty.binary_search(&r.sensor_id).is_err())
                .map(|r| r.estimate - config.t_true)
                .collect();
            let err = classical_estimate(config, classical, &readings)? - config.t_true;
            Ok((err, stats::mean(&honest) / honest_sd))
        })
        .collect::<Result<_>>()?;
    let n = pairs.len() as f64;
    let classical_mse = pairs.iter().map(|p| p.0 * p.0).sum::<f64>() / n;
    let z2 = pairs.iter().map(|p| p.1 * p.1).sum::<f64>() / n;
    let decay = (-config.tau_prep).exp();
    let entangled_mse =
        |v: f64| bounds::mse_bound(config.atoms, config.sensitivity, m_eff, v * decay) * z2;

    // entangled error is non-increasing in V
    let (v_star, no_crossing) = if entangled_mse(0.0) <= classical_mse {
        (0.0, true)
    } else if entangled_mse(1.0) > classical_mse {
        (1.0, true)
    } else {
        let (mut lo, mut hi) = (0.0, 1.0);
        while hi - lo > config.crossover_tolerance {
            let mid = 0.5 * (lo + hi);
            if entangled_mse(mid) > classical_mse {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // secant step inside the final bracket
        let (glo, ghi) = (entangled_mse(lo) - classical_mse, entangled_mse(hi) - classical_mse);
        (lo + (hi - lo) * glo / (glo - ghi), false)
    };

    Ok(Crossover {
        sensors,
        faults,
        fault_fraction: config.fault_fraction,
        tau_prep: config.tau_prep,
        strategy,
        v_star,
        no_crossing,
        classical_rmse: classical_mse.sqrt(),
        v_star_literal: bounds::critical_visibility_literal(m_eff, config.tau_prep),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    NoFault,
    Byzantine,
    ByzantineDecohered,
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "nofault" | "no_fault" => Ok(Scenario::NoFault),
            "byzantine" => Ok(Scenario::Byzantine),
            "byzantine_decohered" => Ok(Scenario::ByzantineDecohered),
            other => Err(invalid(format!("unknown scenario '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSensor {
    pub id: usize,
    pub estimate: f64,
    pub interval: Interval,
    pub visibility: f64,
    pub byzantine: bool,
    pub score: f64,
    pub class: FaultClass,
    pub in_region: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapSnapshot {
    pub scenario: Scenario,
    pub t_true: f64,
    pub sensors: Vec<SnapshotSensor>,
    pub regions: Vec<OverlapRegion>,
    pub bi_estimate: f64,
    pub naive_average: f64,
}

/// Decohered honest sensors in the mixed scenario draw V uniformly from this range.
pub const DECOHERED_VISIBILITY_RANGE: (f64, f64) = (0.5, 1.0);

/// One trial's intervals, overlap regions and estimates for the first configured M.
pub fn overlap_snapshot(config: &ExperimentConfig, scenario: Scenario, trial: usize) -> Result<OverlapSnapshot> {
    config.validate()?;
    let mut cfg = config.clone();
    if scenario == Scenario::NoFault {
        cfg.fault_fraction = 0.0;
    }
    let sensors = cfg.sensor_counts[0];
    let (readings, faulty) = match scenario {
        Scenario::ByzantineDecohered => sample_trial(&cfg, sensors, trial, |rng| {
            let (lo, hi) = DECOHERED_VISIBILITY_RANGE;
            rng.random_range(lo..=hi)
        })?,
        _ => sample_trial(&cfg, sensors, trial, |_| cfg.sensor_visibility)?,
    };
    let intervals: Vec<Interval> = readings.iter().map(|r| r.interval).collect();
    let fused = fusion::brooks_iyengar_fuse(&intervals)?;
    let regions = fusion::max_overlap_regions(&intervals)?;
    let xs: Vec<f64> = readings.iter().map(|r| r.estimate).collect();
    let sensors = readings
        .iter()
        .zip(&fused.scores)
        .map(|(r, &score)| SnapshotSensor {
            id: r.sensor_id,
            estimate: r.estimate,
            interval: r.interval,
            visibility: r.visibility,
            byzantine: faulty.binary_search(&r.sensor_id).is_ok(),
            score,
            class: FaultClass::from_score(score),
            in_region: regions.iter().any(|g| g.interval.intersects(&r.interval)),
        })
        .collect();
    Ok(OverlapSnapshot {
        scenario,
        t_true: cfg.t_true,
        sensors,
        regions,
        bi_estimate: fused.estimate,
        naive_average: fusion::simple_average(&xs)?,
    })
}
