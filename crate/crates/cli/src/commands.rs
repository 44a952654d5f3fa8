use std::collections::BTreeSet;
use std::str::FromStr;

use anyhow::{Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

use qfusion::bounds::{self, BoundQuery, Strategy};
use qfusion::datasets::{self, IntelConfig, IntelPaths};
use qfusion::fusion::{self, FaultClass, Interval, OverlapRegion};
use qfusion::montecarlo::{self, ExperimentConfig, Method, Scenario};

use crate::config::{self, InputFile, Run};
use crate::format::{Cell, Table};
use crate::{Format, Global, UsageError};

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Comma list, or `a..b` for the doubling sequence a, 2a, … up to b.
fn parse_counts(s: &str) -> Result<Vec<usize>> {
    let bad = || usage(format!("bad sensor-count list '{s}'"));
    let out: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if a == 0 || b < a {
            return Err(bad());
        }
        std::iter::successors(Some(a), |&m| m.checked_mul(2)).take_while(|&m| m <= b).collect()
    } else {
        parse_list(s)?
    };
    if out.is_empty() || out.contains(&0) {
        return Err(bad());
    }
    Ok(out)
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| usage(format!("cannot parse '{t}' in '{s}'"))))
        .collect()
}

fn parse_reals(s: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = parse_list(s)?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(usage(format!("non-finite value in '{s}'")));
    }
    Ok(v)
}

fn parse_named<T: FromStr<Err = qfusion::Error>>(s: &str) -> Result<Vec<T>> {
    s.split(',').map(|t| Ok(t.trim().parse::<T>()?)).collect()
}

// ---------------------------------------------------------------- bounds

#[derive(Args, Debug)]
pub struct BoundsArgs {
    /// Sensor counts: comma list, or a..b for a doubling sequence.
    #[arg(long = "M")]
    sensors: Option<String>,
    /// Atoms per sensor.
    #[arg(long = "N")]
    atoms: Option<u32>,
    /// Sensitivity, rad per parameter unit.
    #[arg(long)]
    eta: Option<f64>,
    /// Visibilities, comma list.
    #[arg(long = "V")]
    visibility: Option<String>,
    /// Byzantine fault counts, comma list.
    #[arg(long = "f")]
    faults: Option<String>,
    /// Fault fraction, rounded half up to a count per M (replaces --f).
    #[arg(long = "fault-frac", conflicts_with = "faults")]
    fault_frac: Option<f64>,
    /// Strategies: bft, outlier.
    #[arg(long)]
    strategy: Option<String>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsConfig {
    pub sensors: Vec<usize>,
    pub atoms: u32,
    pub sensitivity: f64,
    pub visibilities: Vec<f64>,
    pub faults: Vec<usize>,
    pub fault_fraction: Option<f64>,
    pub strategies: Vec<Strategy>,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self {
            sensors: vec![2, 4, 8, 16, 32, 64],
            atoms: 1000,
            sensitivity: 0.1,
            visibilities: vec![0.0, 0.5, 1.0],
            faults: vec![0],
            fault_fraction: None,
            strategies: vec![Strategy::Bft, Strategy::Outlier],
        }
    }
}

pub fn bounds(global: &Global, a: BoundsArgs) -> Result<()> {
    let loaded = config::load::<BoundsConfig>(global.config.as_deref(), "bounds")?;
    let mut cfg = loaded.config;
    if let Some(s) = &a.sensors {
        cfg.sensors = parse_counts(s)?;
    }
    if let Some(n) = a.atoms {
        cfg.atoms = n;
    }
    if let Some(e) = a.eta {
        cfg.sensitivity = e;
    }
    if let Some(v) = &a.visibility {
        cfg.visibilities = parse_reals(v)?;
    }
    if let Some(f) = &a.faults {
        cfg.faults = parse_list(f)?;
        cfg.fault_fraction = None;
    }
    if let Some(p) = a.fault_frac {
        cfg.fault_fraction = Some(p);
    }
    if let Some(s) = &a.strategy {
        cfg.strategies = parse_named(s)?;
    }
    if cfg.sensors.is_empty() || cfg.visibilities.is_empty() || cfg.strategies.is_empty() {
        return Err(usage("empty bound grid"));
    }
    if let Some(p) = cfg.fault_fraction {
        if !(0.0..1.0).contains(&p) {
            return Err(usage("fault fraction must lie in [0, 1)"));
        }
    }

    let mut run = Run::start("bounds", global, loaded.format)?;
    let mut table = Table::new(&[
        "M", "f", "V", "strategy", "m_eff", "mse_lower", "rmse_lower", "gain_db", "advantage_db",
    ]);
    let mut rows = Vec::new();
    let mut skipped = 0;
    for &m in &cfg.sensors {
        let faults = match cfg.fault_fraction {
            Some(p) => vec![bounds::faults_from_fraction(p, m)],
            None => cfg.faults.clone(),
        };
        for &f in &faults {
            for &v in &cfg.visibilities {
                for &s in &cfg.strategies {
                    let q = BoundQuery {
                        atoms: cfg.atoms,
                        sensitivity: cfg.sensitivity,
                        sensors: m,
                        faults: f,
                        visibility: v,
                        strategy: s,
                    };
                    let b = match bounds::unified_bound(&q) {
                        Ok(b) => b,
                        Err(qfusion::Error::FaultBudgetExceeded { .. }) => {
                            skipped += 1;
                            continue;
                        }
                        Err(e) => return Err(usage(e.to_string())),
                    };
                    // variance gain over independent sensors at the same M_eff
                    let gain = 10.0 * (bounds::sql_variance(cfg.atoms, cfg.sensitivity, b.m_eff) / b.mse_lower).log10();
                    let adv = bounds::outlier_advantage_db(m, f).ok();
                    table.push(vec![
                        m.into(),
                        f.into(),
                        v.into(),
                        s.name().into(),
                        b.m_eff.into(),
                        b.mse_lower.into(),
                        b.rmse_lower.into(),
                        gain.into(),
                        adv.into(),
                    ]);
                    rows.push(serde_json::json!({
                        "M": m, "f": f, "V": v, "strategy": s, "m_eff": b.m_eff,
                        "mse_lower": b.mse_lower, "rmse_lower": b.rmse_lower, "qfi": b.qfi,
                        "gain_db": gain, "advantage_db": adv,
                    }));
                }
            }
        }
    }
    if rows.is_empty() {
        return Err(usage("no configuration in the grid satisfies its fault budget"));
    }
    if skipped > 0 {
        eprintln!("skipped {skipped} configurations beyond their fault budget");
    }
    match run.format {
        Format::Csv => run.write("bounds.csv", &table.to_csv())?,
        Format::Json => run.write_json("bounds.json", &rows)?,
    }
    run.finish(&cfg, None)
}

// ---------------------------------------------------------------- simulate

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Sensor counts: comma list, or a..b for a doubling sequence.
    #[arg(long = "M")]
    sensors: Option<String>,
    /// Methods: naive, brooks-iyengar, outlier, bayesian, kalman, entangled.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long = "fault-frac")]
    fault_frac: Option<f64>,
    /// Entanglement visibility.
    #[arg(long = "V")]
    visibility: Option<f64>,
    #[arg(long = "tau-prep")]
    tau_prep: Option<f64>,
    /// Fault strategy for the entangled estimator's M_eff.
    #[arg(long)]
    strategy: Option<Strategy>,
    #[arg(long = "N")]
    atoms: Option<u32>,
    #[arg(long)]
    eta: Option<f64>,
    /// Also emit one trial's intervals for a scenario: no-fault, byzantine, byzantine-decohered.
    #[arg(long)]
    snapshot: Option<Scenario>,
}

#[derive(Serialize, Deserialize, Debug, Clone, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub experiment: ExperimentConfig,
    pub snapshot: Option<Scenario>,
}

fn apply_experiment_flags(
    e: &mut ExperimentConfig,
    global: &Global,
    atoms: Option<u32>,
    eta: Option<f64>,
) {
    if let Some(s) = global.seed {
        e.seed = s;
    }
    if let Some(t) = global.trials {
        e.trials = t;
    }
    if let Some(n) = atoms {
        e.atoms = n;
    }
    if let Some(x) = eta {
        e.sensitivity = x;
    }
}

fn bound_rmse(e: &ExperimentConfig, method: Method, sensors: usize) -> Option<f64> {
    let mut q = e.bound_query(sensors, method.bound_strategy(e.strategy));
    if method != Method::Entangled {
        q.visibility = 0.0;
    }
    bounds::unified_bound(&q).ok().map(|b| b.rmse_lower)
}

#[derive(Serialize)]
struct SlopeRow {
    method: Method,
    slope: f64,
}

pub fn simulate(global: &Global, a: SimulateArgs) -> Result<()> {
    let loaded = config::load::<SimulateConfig>(global.config.as_deref(), "simulate")?;
    let mut cfg = loaded.config;
    let e = &mut cfg.experiment;
    apply_experiment_flags(e, global, a.atoms, a.eta);
    if let Some(s) = &a.sensors {
        e.sensor_counts = parse_counts(s)?;
    }
    if let Some(m) = &a.methods {
        e.methods = parse_named(m)?;
    }
    if let Some(f) = a.fault_frac {
        e.fault_fraction = f;
    }
    if let Some(v) = a.visibility {
        e.visibility = v;
    }
    if let Some(t) = a.tau_prep {
        e.tau_prep = t;
    }
    if let Some(s) = a.strategy {
        e.strategy = s;
    }
    if a.snapshot.is_some() {
        cfg.snapshot = a.snapshot;
    }
    let e = &mut cfg.experiment;
    let faulty = e.fault_fraction > 0.0;
    if faulty && !e.methods.contains(&Method::Naive) {
        e.methods.insert(0, Method::Naive);
    }
    let mut seen = BTreeSet::new();
    e.methods.retain(|m| seen.insert(*m));
    e.validate()?;

    let mut run = Run::start("simulate", global, loaded.format)?;
    let stats = montecarlo::run_experiment(e)?;
    let gains = montecarlo::recovery_gains(&stats);
    let slopes: Vec<SlopeRow> = if e.sensor_counts.iter().collect::<BTreeSet<_>>().len() >= 3 {
        e.methods
            .iter()
            .map(|&m| {
                let pts: Vec<(f64, f64)> = stats
                    .iter()
                    .filter(|s| s.method == m)
                    .map(|s| (s.sensors as f64, s.rmse))
                    .collect();
                Ok(SlopeRow {
                    method: m,
                    slope: montecarlo::fit_loglog_slope(&pts)?,
                })
            })
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };

    match run.format {
        Format::Csv => {
            let mut header = vec![
                "M", "f", "method", "rmse", "rmse_stderr", "mean_bias", "mse", "bound_strategy", "bound_rmse",
            ];
            if faulty {
                header.push("gain_db");
            }
            let mut t = Table::new(&header);
            for (s, g) in stats.iter().zip(&gains) {
                let mut row: Vec<Cell> = vec![
                    s.sensors.into(),
                    s.faults.into(),
                    s.method.name().into(),
                    s.rmse.into(),
                    s.rmse_stderr.into(),
                    s.mean_bias.into(),
                    s.mse.into(),
                    s.method.bound_strategy(e.strategy).name().into(),
                    bound_rmse(e, s.method, s.sensors).into(),
                ];
                if faulty {
                    row.push(g.gain_db.into());
                }
                t.push(row);
            }
            run.write("simulate.csv", &t.to_csv())?;
            if !slopes.is_empty() {
                let mut t = Table::new(&["method", "slope"]);
                for s in &slopes {
                    t.push(vec![s.method.name().into(), s.slope.into()]);
                }
                run.write("slopes.csv", &t.to_csv())?;
            }
        }
        Format::Json => {
            let rows: Vec<_> = stats
                .iter()
                .zip(&gains)
                .map(|(s, g)| {
                    serde_json::json!({
                        "stats": s,
                        "bound_strategy": s.method.bound_strategy(e.strategy),
                        "bound_rmse": bound_rmse(e, s.method, s.sensors),
                        "gain_db": faulty.then_some(g.gain_db),
                    })
                })
                .collect();
            run.write_json("simulate.json", &serde_json::json!({ "rows": rows, "slopes": slopes }))?;
        }
    }
    if let Some(sc) = cfg.snapshot {
        let snap = montecarlo::overlap_snapshot(e, sc, 0)?;
        run.write_json("snapshot.json", &snap)?;
    }
    let seed = e.seed;
    run.finish(&cfg, Some(seed))
}

// ---------------------------------------------------------------- crossover

#[derive(Args, Debug)]
pub struct CrossoverArgs {
    /// Number of sensors.
    #[arg(long = "M")]
    sensors: Option<usize>,
    /// Fault fractions, comma list.
    #[arg(long = "fault-fracs")]
    fault_fracs: Option<String>,
    /// Preparation overheads, comma list.
    #[arg(long)]
    taus: Option<String>,
    #[arg(long)]
    strategy: Option<Strategy>,
    /// Bisection stopping width in V.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long = "N")]
    atoms: Option<u32>,
    #[arg(long)]
    eta: Option<f64>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
#[serde(default, deny_unknown_fields)]
pub struct CrossoverConfig {
    pub experiment: ExperimentConfig,
    pub fault_fractions: Vec<f64>,
    pub taus: Vec<f64>,
    pub strategy: Strategy,
}

impl Default for CrossoverConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentConfig {
                sensor_counts: vec![10],
                trials: 200_000,
                ..Default::default()
            },
            fault_fractions: vec![0.0, 0.1, 0.2],
            taus: vec![0.0, 0.15, 0.3],
            strategy: Strategy::Bft,
        }
    }
}

pub fn crossover_rows(cfg: &CrossoverConfig) -> Result<Vec<montecarlo::Crossover>> {
    let mut out = Vec::new();
    for &f in &cfg.fault_fractions {
        for &tau in &cfg.taus {
            let e = ExperimentConfig {
                fault_fraction: f,
                tau_prep: tau,
                ..cfg.experiment.clone()
            };
            out.push(montecarlo::empirical_crossover(&e, cfg.strategy)?);
        }
    }
    Ok(out)
}

pub fn crossover(global: &Global, a: CrossoverArgs) -> Result<()> {
    let loaded = config::load::<CrossoverConfig>(global.config.as_deref(), "crossover")?;
    let mut cfg = loaded.config;
    apply_experiment_flags(&mut cfg.experiment, global, a.atoms, a.eta);
    if let Some(m) = a.sensors {
        cfg.experiment.sensor_counts = vec![m];
    }
    if let Some(f) = &a.fault_fracs {
        cfg.fault_fractions = parse_reals(f)?;
    }
    if let Some(t) = &a.taus {
        cfg.taus = parse_reals(t)?;
    }
    if let Some(s) = a.strategy {
        cfg.strategy = s;
    }
    if let Some(t) = a.tolerance {
        cfg.experiment.crossover_tolerance = t;
    }
    if cfg.fault_fractions.is_empty() || cfg.taus.is_empty() || cfg.experiment.sensor_counts.len() != 1 {
        return Err(usage("crossover needs one M and non-empty fault and overhead grids"));
    }

    let mut run = Run::start("crossover", global, loaded.format)?;
    let rows = crossover_rows(&cfg)?;
    match run.format {
        Format::Csv => {
            let mut t = Table::new(&[
                "fault_frac", "tau_prep", "M", "f", "strategy", "v_star_empirical", "v_star_literal", "no_crossing",
                "classical_rmse",
            ]);
            for r in &rows {
                t.push(vec![
                    r.fault_fraction.into(),
                    r.tau_prep.into(),
                    r.sensors.into(),
                    r.faults.into(),
                    r.strategy.name().into(),
                    r.v_star.into(),
                    r.v_star_literal.into(),
                    r.no_crossing.into(),
                    r.classical_rmse.into(),
                ]);
            }
            run.write("crossover.csv", &t.to_csv())?;
        }
        Format::Json => run.write_json("crossover.json", &rows)?,
    }
    let seed = cfg.experiment.seed;
    run.finish(&cfg, Some(seed))
}

// ---------------------------------------------------------------- eight-sensor

#[derive(Args, Debug)]
pub struct EightSensorArgs {
    #[arg(long = "N")]
    atoms: Option<u32>,
    #[arg(long)]
    eta: Option<f64>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
#[serde(default, deny_unknown_fields)]
pub struct EightSensorConfig {
    pub atoms: u32,
    pub sensitivity: f64,
}

impl Default for EightSensorConfig {
    fn default() -> Self {
        Self {
            atoms: 1000,
            sensitivity: 0.1,
        }
    }
}

#[derive(Serialize)]
struct EightSensorRow {
    id: String,
    center: f64,
    half_width: f64,
    interval: Interval,
    score: f64,
    class: FaultClass,
}

#[derive(Serialize)]
struct RangeMapping {
    classical: String,
    quantum: String,
    range_ratio: f64,
    atom_factor: f64,
}

#[derive(Serialize)]
struct EightSensorBounds {
    atoms: u32,
    sensitivity: f64,
    sensors: usize,
    sql_rmse: f64,
    hl_rmse: f64,
    gain_db: f64,
}

#[derive(Serialize)]
struct EightSensorReport {
    sensors: Vec<EightSensorRow>,
    max_count: usize,
    regions: Vec<OverlapRegion>,
    bi_estimate: f64,
    naive_average: f64,
    bounds: EightSensorBounds,
    range_to_atoms: Vec<RangeMapping>,
}

pub fn eight_sensor(global: &Global, a: EightSensorArgs) -> Result<()> {
    let loaded = config::load::<EightSensorConfig>(global.config.as_deref(), "eight-sensor")?;
    let mut cfg = loaded.config;
    if let Some(n) = a.atoms {
        cfg.atoms = n;
    }
    if let Some(e) = a.eta {
        cfg.sensitivity = e;
    }
    if cfg.atoms == 0 || !(cfg.sensitivity > 0.0) {
        return Err(usage("atoms and sensitivity must be positive"));
    }

    let data = datasets::eight_sensor_dataset();
    let ivs: Vec<Interval> = data.iter().map(|s| s.interval()).collect();
    let fused = fusion::brooks_iyengar_fuse(&ivs)?;
    let centers: Vec<f64> = data.iter().map(|s| s.center).collect();
    let m = data.len();
    let sql = bounds::sql_variance(cfg.atoms, cfg.sensitivity, m).sqrt();
    let hl = bounds::hl_variance(cfg.atoms, cfg.sensitivity, m).sqrt();
    let report = EightSensorReport {
        sensors: data
            .iter()
            .zip(&fused.scores)
            .map(|(s, &score)| EightSensorRow {
                id: s.id.clone(),
                center: s.center,
                half_width: s.half_width,
                interval: s.interval(),
                score,
                class: FaultClass::from_score(score),
            })
            .collect(),
        max_count: fused.max_count,
        regions: fusion::max_overlap_regions(&ivs)?,
        bi_estimate: fused.estimate,
        naive_average: fusion::simple_average(&centers)?,
        bounds: EightSensorBounds {
            atoms: cfg.atoms,
            sensitivity: cfg.sensitivity,
            sensors: m,
            sql_rmse: sql,
            hl_rmse: hl,
            gain_db: bounds::metrological_gain_db(m),
        },
        range_to_atoms: (0..m / 2)
            .map(|i| {
                let ratio = data[i].half_width / data[i + m / 2].half_width;
                Ok(RangeMapping {
                    classical: data[i].id.clone(),
                    quantum: data[i + m / 2].id.clone(),
                    range_ratio: ratio,
                    atom_factor: datasets::range_to_atom_factor(ratio)?,
                })
            })
            .collect::<Result<_>>()?,
    };

    let mut run = Run::start("eight-sensor", global, loaded.format)?;
    run.write_json("eight_sensor.json", &report)?;
    if run.format == Format::Csv {
        let mut t = Table::new(&["sensor", "center", "half_width", "lower", "upper", "score", "class"]);
        for r in &report.sensors {
            t.push(vec![
                r.id.as_str().into(),
                r.center.into(),
                r.half_width.into(),
                r.interval.lower.into(),
                r.interval.upper.into(),
                r.score.into(),
                format!("{:?}", r.class).as_str().into(),
            ]);
        }
        run.write("eight_sensor.csv", &t.to_csv())?;
    }
    run.finish(&cfg, None)
}

// ---------------------------------------------------------------- intel

#[derive(Args, Debug)]
pub struct IntelArgs {
    /// Number of spatial clusters.
    #[arg(long)]
    clusters: Option<usize>,
    /// Number of best-covered epochs to analyze.
    #[arg(long)]
    epochs: Option<usize>,
    /// Report agreement with window-facing motes removed as the headline.
    #[arg(long)]
    exclude_windows: bool,
    #[arg(long = "z-threshold")]
    z_threshold: Option<f64>,
    #[arg(long = "wall-margin")]
    wall_margin: Option<f64>,
    /// Half-width of each reading's interval, °C.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long = "N")]
    atoms: Option<u32>,
}

#[derive(Serialize, Deserialize, Debug, Clone, Default)]
#[serde(default, deny_unknown_fields)]
pub struct IntelCliConfig {
    pub pipeline: IntelConfig,
    pub exclude_windows: bool,
}

pub fn intel(global: &Global, a: IntelArgs) -> Result<()> {
    let loaded = config::load::<IntelCliConfig>(global.config.as_deref(), "intel")?;
    let mut cfg = loaded.config;
    let p = &mut cfg.pipeline;
    if let Some(s) = global.seed {
        p.seed = s;
        p.curves.seed = s;
    }
    if let Some(t) = global.trials {
        p.curves.trials = t;
    }
    if let Some(k) = a.clusters {
        p.clusters = k;
    }
    if let Some(e) = a.epochs {
        p.epochs = e;
    }
    if let Some(z) = a.z_threshold {
        p.z_threshold = z;
    }
    if let Some(w) = a.wall_margin {
        p.wall_margin = w;
    }
    if let Some(t) = a.tolerance {
        p.tolerance = t;
        p.curves.tolerance = t;
    }
    if let Some(n) = a.atoms {
        p.atoms = n;
        p.curves.atoms = n;
    }
    if a.exclude_windows {
        cfg.exclude_windows = true;
    }

    let dir = global.data_dir.clone().ok_or_else(|| {
        qfusion::Error::MissingData(format!("<data dir> (pass --data-dir or set QFUSION_DATA_DIR; expected {} and {})",
            datasets::DATA_FILE, datasets::LOCATIONS_FILE).into())
    })?;
    let paths = IntelPaths::in_dir(&dir);
    paths.require().with_context(|| {
        format!("Intel data needs {} and {}", paths.data.display(), paths.locations.display())
    })?;
    let mut run = Run::start("intel", global, loaded.format)?;
    for p in [&paths.data, &paths.locations] {
        run.inputs.push(InputFile {
            path: p.clone(),
            sha256: datasets::sha256_file(p)?,
        });
    }
    let (data, locs) = datasets::load_intel(&paths)?;
    let report = datasets::run_intel_pipeline(&data, &locs.items, &cfg.pipeline)?;

    let headline = if cfg.exclude_windows {
        report.agreement_excluding_windows.agreement_pct
    } else {
        report.agreement_all.agreement_pct
    };
    match run.format {
        Format::Csv => {
            let mut t = Table::new(&["cluster", "M", "classical_db", "sql_db", "hl_db", "gain_db"]);
            for s in &report.snr {
                t.push(vec![
                    format!("C{}", s.cluster + 1).as_str().into(),
                    s.sensors.into(),
                    s.classical_db.into(),
                    s.sql_db.into(),
                    s.hl_db.into(),
                    s.gain_db.into(),
                ]);
            }
            run.write("intel_clusters.csv", &t.to_csv())?;
        }
        Format::Json => run.write_json("intel_clusters.json", &report.snr)?,
    }
    run.write_json(
        "intel_summary.json",
        &serde_json::json!({
            "exclude_windows": cfg.exclude_windows,
            "agreement_pct": headline,
            "location_lines_skipped": locs.skipped,
            "report": report,
        }),
    )?;
    let seed = cfg.pipeline.seed;
    run.finish(&cfg, Some(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_lists() {
        assert_eq!(parse_counts("2..64").unwrap(), vec![2, 4, 8, 16, 32, 64]);
        assert_eq!(parse_counts("3..20").unwrap(), vec![3, 6, 12]);
        assert_eq!(parse_counts("8").unwrap(), vec![8]);
        assert_eq!(parse_counts("4, 10,12").unwrap(), vec![4, 10, 12]);
        assert!(parse_counts("0..8").is_err());
        assert!(parse_counts("8..2").is_err());
        assert!(parse_counts("a").is_err());
        assert!(parse_counts("4,0").is_err());
    }

    #[test]
    fn named_lists() {
        let m: Vec<Method> = parse_named("naive,Entangled, brooks-iyengar").unwrap();
        assert_eq!(m, vec![Method::Naive, Method::Entangled, Method::BrooksIyengar]);
        assert!(parse_named::<Strategy>("bft,nope").is_err());
    }
}
