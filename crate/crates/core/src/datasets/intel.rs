//! Intel Berkeley Lab mote data: parsing, cleaning, spatial clustering,
//! window-mote detection, cluster agreement, SNR and the missing-data curve.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::error::{invalid, Error, Result};
use crate::fusion::{Interval, OverlapProfile};
use crate::montecarlo::stream_rng;
use crate::stats;

pub const DATA_FILE: &str = "data.txt";
pub const LOCATIONS_FILE: &str = "mote_locs.txt";

/// Half-width of the interval around each mote reading, °C.
pub const READING_TOLERANCE: f64 = 0.5;
/// Distance from the location bounding box below which a mote counts as wall-side, m.
pub const WALL_MARGIN: f64 = 2.0;
pub const WINDOW_Z_THRESHOLD: f64 = 1.0;
/// Readings outside this range come from failing batteries.
pub const VALID_TEMPERATURE: (f64, f64) = (0.0, 50.0);
pub const MAX_MOTE_ID: u32 = 58;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoteRecord {
    pub date: String,
    pub time: String,
    pub epoch: u32,
    pub mote_id: u32,
    pub temperature: Option<f64>,
    pub humidity: Option<f64>,
    pub light: Option<f64>,
    pub voltage: Option<f64>,
}

impl MoteRecord {
    /// Whitespace-separated line in the source column order; absent trailing
    /// fields are omitted.
    pub fn to_line(&self) -> String {
        let mut out = format!("{} {} {} {}", self.date, self.time, self.epoch, self.mote_id);
        let fields = [self.temperature, self.humidity, self.light, self.voltage];
        let present = fields.iter().rposition(Option::is_some).map_or(0, |i| i + 1);
        for f in &fields[..present] {
            match f {
                Some(v) => out.push_str(&format!(" {v}")),
                None => out.push_str(" NaN"),
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoteLocation {
    pub mote_id: u32,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parsed<T> {
    pub items: Vec<T>,
    /// Lines that were empty or malformed.
    pub skipped: usize,
}

fn is_date(s: &str) -> bool {
    let parts: Vec<&str> = s.split('-').collect();
    parts.len() == 3
        && parts.iter().all(|p| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit()))
}

fn is_time(s: &str) -> bool {
    let parts: Vec<&str> = s.split(':').collect();
    parts.len() == 3
        && parts[..2].iter().all(|p| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit()))
        && parts[2].parse::<f64>().is_ok_and(|v| (0.0..61.0).contains(&v))
}

fn optional_field(tok: Option<&str>) -> std::result::Result<Option<f64>, ()> {
    match tok {
        None => Ok(None),
        Some(t) => {
            let v: f64 = t.parse().map_err(|_| ())?;
            Ok(v.is_finite().then_some(v))
        }
    }
}

fn parse_record(line: &str) -> Option<MoteRecord> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    if toks.len() < 4 || toks.len() > 8 || !is_date(toks[0]) || !is_time(toks[1]) {
        return None;
    }
    let epoch: u32 = toks[2].parse().ok()?;
    let mote_id: u32 = toks[3].parse().ok()?;
    if !(1..=MAX_MOTE_ID).contains(&mote_id) {
        return None;
    }
    let mut vals = [None; 4];
    for (i, v) in vals.iter_mut().enumerate() {
        *v = optional_field(toks.get(4 + i).copied()).ok()?;
    }
    Some(MoteRecord {
        date: toks[0].to_string(),
        time: toks[1].to_string(),
        epoch,
        mote_id,
        temperature: vals[0],
        humidity: vals[1],
        light: vals[2],
        voltage: vals[3],
    })
}

/// Parses `date time epoch moteid temperature humidity light voltage` rows.
/// Bad rows are counted and skipped; only an unreadable stream is an error.
pub fn parse_mote_data<R: BufRead>(reader: R) -> Result<Parsed<MoteRecord>> {
    let mut out = Parsed { items: Vec::new(), skipped: 0 };
    for line in reader.lines() {
        match parse_record(&line?) {
            Some(r) => out.items.push(r),
            None => out.skipped += 1,
        }
    }
    Ok(out)
}

/// Parses `moteid x y` rows.
pub fn parse_mote_locations<R: BufRead>(reader: R) -> Result<Parsed<MoteLocation>> {
    let mut out = Parsed { items: Vec::new(), skipped: 0 };
    for line in reader.lines() {
        let line = line?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        let loc = (toks.len() == 3)
            .then(|| {
                Some(MoteLocation {
                    mote_id: toks[0].parse().ok()?,
                    x: toks[1].parse().ok().filter(|v: &f64| v.is_finite())?,
                    y: toks[2].parse().ok().filter(|v: &f64| v.is_finite())?,
                })
            })
            .flatten();
        match loc {
            Some(l) => out.items.push(l),
            None => out.skipped += 1,
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntelPaths {
    pub data: PathBuf,
    pub locations: PathBuf,
}

impl IntelPaths {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            data: dir.join(DATA_FILE),
            locations: dir.join(LOCATIONS_FILE),
        }
    }

    /// Both files, or `MissingData` naming the first absent one.
    pub fn require(&self) -> Result<()> {
        for p in [&self.data, &self.locations] {
            if !p.is_file() {
                return Err(Error::MissingData(p.clone()));
            }
        }
        Ok(())
    }
}

pub fn load_intel(paths: &IntelPaths) -> Result<(Parsed<MoteRecord>, Parsed<MoteLocation>)> {
    paths.require()?;
    let data = parse_mote_data(BufReader::new(File::open(&paths.data)?))?;
    let locs = parse_mote_locations(BufReader::new(File::open(&paths.locations)?))?;
    Ok((data, locs))
}

/// Keeps rows with a temperature in the valid range from motes that have a location.
pub fn clean_records(records: &[MoteRecord], locations: &[MoteLocation]) -> Vec<MoteRecord> {
    let located: BTreeSet<u32> = locations.iter().map(|l| l.mote_id).collect();
    let (lo, hi) = VALID_TEMPERATURE;
    records
        .iter()
        .filter(|r| located.contains(&r.mote_id))
        .filter(|r| r.temperature.is_some_and(|t| (lo..=hi).contains(&t)))
        .cloned()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub assignment: BTreeMap<u32, usize>,
    pub centroids: Vec<(f64, f64)>,
    /// Sum of squared distances after each assignment step.
    pub objective: Vec<f64>,
}

impl ClusterAssignment {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    /// Member mote ids of each cluster, ascending.
    pub fn members(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.k()];
        for (&id, &c) in &self.assignment {
            out[c].push(id);
        }
        out
    }
}

fn dist2(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)
}

fn nearest(p: (f64, f64), centroids: &[(f64, f64)]) -> (usize, f64) {
    centroids
        .iter()
        .enumerate()
        .map(|(i, &c)| (i, dist2(p, c)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

/// Lloyd's k-means with k-means++ seeding; at most 100 iterations.
pub fn kmeans_clusters(locations: &[MoteLocation], k: usize, seed: u64) -> Result<ClusterAssignment> {
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    if k > locations.len() {
        return Err(invalid(format!("k = {k} exceeds {} located motes", locations.len())));
    }
    let ids: BTreeSet<u32> = locations.iter().map(|l| l.mote_id).collect();
    if ids.len() != locations.len() {
        return Err(invalid("duplicate mote ids in locations"));
    }
    let pts: Vec<(f64, f64)> = locations.iter().map(|l| (l.x, l.y)).collect();
    let mut rng = stream_rng(seed, k, 0, 2);

    let mut centroids = vec![pts[rng.random_range(0..pts.len())]];
    let mut chosen = vec![false; pts.len()];
    while centroids.len() < k {
        let d: Vec<f64> = pts.iter().map(|&p| nearest(p, &centroids).1).collect();
        let total: f64 = d.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut idx = d.iter().rposition(|&w| w > 0.0).unwrap_or(0);
            for (i, &w) in d.iter().enumerate() {
                if w > 0.0 && u < w {
                    idx = i;
                    break;
                }
                u -= w;
            }
            idx
        } else {
            // coincident points: take any not yet chosen
            let free: Vec<usize> = (0..pts.len()).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[pick] = true;
        centroids.push(pts[pick]);
    }

    let mut labels = vec![usize::MAX; pts.len()];
    let mut objective = Vec::new();
    for _ in 0..100 {
        let mut changed = false;
        let mut obj = 0.0;
        for (i, &p) in pts.iter().enumerate() {
            let (c, d) = nearest(p, &centroids);
            obj += d;
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
        }
        objective.push(obj);
        if !changed {
            break;
        }
        let mut sums = vec![(0.0, 0.0, 0usize); k];
        for (i, &p) in pts.iter().enumerate() {
            let s = &mut sums[labels[i]];
            s.0 += p.0;
            s.1 += p.1;
            s.2 += 1;
        }
        for (c, s) in centroids.iter_mut().zip(&sums) {
            if s.2 > 0 {
                *c = (s.0 / s.2 as f64, s.1 / s.2 as f64);
            }
        }
    }

    Ok(ClusterAssignment {
        assignment: locations.iter().map(|l| l.mote_id).zip(labels).collect(),
        centroids,
        objective,
    })
}

fn mote_means(records: &[MoteRecord]) -> BTreeMap<u32, f64> {
    let mut acc: BTreeMap<u32, (f64, usize)> = BTreeMap::new();
    for r in records {
        if let Some(t) = r.temperature {
            let e = acc.entry(r.mote_id).or_default();
            e.0 += t;
            e.1 += 1;
        }
    }
    acc.into_iter().map(|(id, (s, n))| (id, s / n as f64)).collect()
}

/// Located motes near the bounding-box perimeter whose mean temperature sits
/// more than `z_thresh` standard deviations (of the per-mote means) above the
/// mean of all readings.
pub fn detect_window_motes(
    records: &[MoteRecord],
    locations: &[MoteLocation],
    z_thresh: f64,
    wall_margin: f64,
) -> Result<BTreeSet<u32>> {
    let temps: Vec<f64> = records.iter().filter_map(|r| r.temperature).collect();
    if temps.is_empty() {
        return Err(Error::Empty("temperature records"));
    }
    if locations.is_empty() {
        return Err(Error::Empty("mote locations"));
    }
    let global = stats::mean(&temps);
    let means = mote_means(records);
    let mean_vals: Vec<f64> = means.values().copied().collect();
    let sd = stats::std_dev(&mean_vals);

    let xmin = locations.iter().map(|l| l.x).fold(f64::INFINITY, f64::min);
    let xmax = locations.iter().map(|l| l.x).fold(f64::NEG_INFINITY, f64::max);
    let ymin = locations.iter().map(|l| l.y).fold(f64::INFINITY, f64::min);
    let ymax = locations.iter().map(|l| l.y).fold(f64::NEG_INFINITY, f64::max);

    Ok(locations
        .iter()
        .filter(|l| {
            let wall = (l.x - xmin).min(xmax - l.x).min(l.y - ymin).min(ymax - l.y);
            let z = match means.get(&l.mote_id) {
                Some(m) if sd > 0.0 => (m - global) / sd,
                _ => 0.0,
            };
            wall <= wall_margin && z > z_thresh
        })
        .map(|l| l.mote_id)
        .collect())
}

/// First reading of each `(epoch, mote)` pair.
pub type ReadingIndex = HashMap<(u32, u32), f64>;

pub fn index_readings(records: &[MoteRecord]) -> ReadingIndex {
    let mut idx = HashMap::with_capacity(records.len());
    for r in records {
        if let Some(t) = r.temperature {
            idx.entry((r.epoch, r.mote_id)).or_insert(t);
        }
    }
    idx
}

/// The `count` epochs with the most distinct motes reporting, ties to the
/// lower epoch; returned ascending.
pub fn select_epochs(records: &[MoteRecord], count: usize) -> Vec<u32> {
    let mut cover: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.temperature.is_some()) {
        cover.entry(r.epoch).or_default().insert(r.mote_id);
    }
    let mut ranked: Vec<(usize, u32)> = cover.iter().map(|(&e, s)| (s.len(), e)).collect();
    ranked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut out: Vec<u32> = ranked.into_iter().take(count).map(|(_, e)| e).collect();
    out.sort_unstable();
    out
}

fn max_agreeing(temps: &[f64], tolerance: f64) -> usize {
    let ivs: Vec<Interval> = temps
        .iter()
        .map(|&t| Interval {
            lower: t - tolerance,
            upper: t + tolerance,
        })
        .collect();
    OverlapProfile::build(&ivs).max_count()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    /// Mean of max-overlap count over present motes, in percent.
    pub agreement_pct: f64,
    /// Fraction of (member, epoch) slots with no reading.
    pub absent_fraction: f64,
    /// (cluster, epoch) pairs with at least one reading.
    pub pairs: usize,
}

fn cluster_groups(assignment: &ClusterAssignment, exclude: &BTreeSet<u32>) -> Vec<Vec<u32>> {
    assignment
        .members()
        .into_iter()
        .map(|m| m.into_iter().filter(|id| !exclude.contains(id)).collect::<Vec<_>>())
        .filter(|m| !m.is_empty())
        .collect()
}

pub fn cluster_agreement(
    index: &ReadingIndex,
    assignment: &ClusterAssignment,
    epochs: &[u32],
    exclude: &BTreeSet<u32>,
    tolerance: f64,
) -> Result<AgreementReport> {
    if !(tolerance >= 0.0) {
        return Err(invalid("tolerance must be non-negative"));
    }
    let (mut sum, mut pairs, mut slots, mut absent) = (0.0, 0usize, 0usize, 0usize);
    for members in cluster_groups(assignment, exclude) {
        for &e in epochs {
            let temps: Vec<f64> = members.iter().filter_map(|&m| index.get(&(e, m)).copied()).collect();
            slots += members.len();
            absent += members.len() - temps.len();
            if temps.is_empty() {
                continue;
            }
            sum += max_agreeing(&temps, tolerance) as f64 / temps.len() as f64;
            pairs += 1;
        }
    }
    if pairs == 0 {
        return Err(Error::Empty("cluster readings in the selected epochs"));
    }
    Ok(AgreementReport {
        agreement_pct: 100.0 * sum / pairs as f64,
        absent_fraction: absent as f64 / slots as f64,
        pairs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSnr {
    pub cluster: usize,
    pub sensors: usize,
    pub mean_signal: f64,
    /// Mean over epochs of the intra-cluster temperature standard deviation;
    /// absent when no epoch has two readings.
    pub noise_std: Option<f64>,
    pub classical_db: Option<f64>,
    pub sql_db: f64,
    pub hl_db: f64,
    pub gain_db: Option<f64>,
}

pub fn cluster_snr(
    index: &ReadingIndex,
    assignment: &ClusterAssignment,
    epochs: &[u32],
    atoms: u32,
    eta: f64,
) -> Result<Vec<ClusterSnr>> {
    if atoms == 0 || !(eta > 0.0) {
        return Err(invalid("atoms and sensitivity must be positive"));
    }
    let mut out = Vec::new();
    for (c, members) in assignment.members().into_iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        let mut all = Vec::new();
        let mut stds = Vec::new();
        for &e in epochs {
            let temps: Vec<f64> = members.iter().filter_map(|&m| index.get(&(e, m)).copied()).collect();
            if temps.len() >= 2 {
                stds.push(stats::std_dev(&temps));
            }
            all.extend(temps);
        }
        if all.is_empty() {
            continue;
        }
        let signal = stats::mean(&all).abs();
        let m = members.len();
        let sql_db = 20.0 * (signal / bounds::sql_variance(atoms, eta, m).sqrt()).log10();
        let hl_db = 20.0 * (signal / bounds::hl_variance(atoms, eta, m).sqrt()).log10();
        let noise = (!stds.is_empty()).then(|| stats::mean(&stds)).filter(|&s| s > 0.0);
        let classical = noise.map(|s| 20.0 * (signal / s).log10());
        out.push(ClusterSnr {
            cluster: c,
            sensors: m,
            mean_signal: signal,
            noise_std: noise,
            classical_db: classical,
            sql_db,
            hl_db,
            gain_db: classical.map(|cl| hl_db - cl),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub agreement_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradationCurves {
    /// Agreement against the fraction of readings dropped.
    pub missing: Vec<CurvePoint>,
    /// Entangled-estimate agreement against visibility.
    pub decoherence: Vec<CurvePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveConfig {
    pub missing_fracs: Vec<f64>,
    pub visibilities: Vec<f64>,
    pub tolerance: f64,
    pub atoms: u32,
    pub sensitivity: f64,
    pub trials: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for CurveConfig {
    fn default() -> Self {
        Self {
            missing_fracs: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
            visibilities: vec![1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.0],
            tolerance: READING_TOLERANCE,
            atoms: 1000,
            sensitivity: 0.1,
            trials: 2000,
            alpha: 0.05,
            seed: 42,
        }
    }
}

/// Missing-data and decoherence degradation curves.
///
/// Each reading gets one uniform draw and is dropped at fraction `p` when the
/// draw is below `p`, so the kept sets are nested and agreement (max overlap
/// among kept readings over motes present before dropping) can only fall as
/// `p` grows. On the quantum side each cluster of size M yields an entangled
/// estimate with the unified-bound variance at visibility V; a trial agrees
/// when it lands within the no-fault (V = 1) confidence half-width. The same
/// normal draws are reused at every V.
pub fn missing_vs_decoherence_curves(
    index: &ReadingIndex,
    assignment: &ClusterAssignment,
    epochs: &[u32],
    cfg: &CurveConfig,
) -> Result<DegradationCurves> {
    if cfg.missing_fracs.iter().any(|p| !(0.0..1.0).contains(p)) {
        return Err(invalid("missing fractions must lie in [0, 1)"));
    }
    if cfg.visibilities.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(invalid("visibilities must lie in [0, 1]"));
    }
    if cfg.trials == 0 || cfg.atoms == 0 || !(cfg.sensitivity > 0.0) {
        return Err(invalid("trials, atoms and sensitivity must be positive"));
    }
    let groups = cluster_groups(assignment, &BTreeSet::new());

    let mut rng = stream_rng(cfg.seed, 0, 0, 3);
    let mut slots: Vec<Vec<(f64, f64)>> = Vec::new();
    for members in &groups {
        for &e in epochs {
            let row: Vec<(f64, f64)> = members
                .iter()
                .filter_map(|&m| index.get(&(e, m)).map(|&t| (t, rng.random::<f64>())))
                .collect();
            if !row.is_empty() {
                slots.push(row);
            }
        }
    }
    if slots.is_empty() {
        return Err(Error::Empty("cluster readings in the selected epochs"));
    }
    let missing = cfg
        .missing_fracs
        .iter()
        .map(|&p| {
            let sum: f64 = slots
                .iter()
                .map(|row| {
                    let kept: Vec<f64> = row.iter().filter(|(_, u)| *u >= p).map(|(t, _)| *t).collect();
                    max_agreeing(&kept, cfg.tolerance) as f64 / row.len() as f64
                })
                .sum();
            CurvePoint {
                x: p,
                agreement_pct: 100.0 * sum / slots.len() as f64,
            }
        })
        .collect();

    let z = stats::two_sided_z(cfg.alpha);
    let draws: Vec<Vec<f64>> = (0..groups.len())
        .map(|c| {
            let mut r = stream_rng(cfg.seed, c, 0, 4);
            (0..cfg.trials).map(|_| StandardNormal.sample(&mut r)).collect()
        })
        .collect();
    let decoherence = cfg
        .visibilities
        .iter()
        .map(|&v| {
            let per_cluster: Vec<f64> = groups
                .iter()
                .zip(&draws)
                .map(|(members, zs)| {
                    let m = members.len();
                    let half = z * bounds::mse_bound(cfg.atoms, cfg.sensitivity, m, 1.0).sqrt();
                    let sd = bounds::mse_bound(cfg.atoms, cfg.sensitivity, m, v).sqrt();
                    zs.iter().filter(|&&d| (sd * d).abs() <= half).count() as f64 / zs.len() as f64
                })
                .collect();
            CurvePoint {
                x: v,
                agreement_pct: 100.0 * stats::mean(&per_cluster),
            }
        })
        .collect();

    Ok(DegradationCurves { missing, decoherence })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntelConfig {
    pub clusters: usize,
    pub seed: u64,
    pub epochs: usize,
    pub z_threshold: f64,
    pub wall_margin: f64,
    pub tolerance: f64,
    pub atoms: u32,
    pub sensitivity: f64,
    pub curves: CurveConfig,
}

impl Default for IntelConfig {
    fn default() -> Self {
        Self {
            clusters: 6,
            seed: 42,
            epochs: 80,
            z_threshold: WINDOW_Z_THRESHOLD,
            wall_margin: WALL_MARGIN,
            tolerance: READING_TOLERANCE,
            atoms: 1000,
            sensitivity: 0.1,
            curves: CurveConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntelReport {
    pub records: usize,
    pub skipped_lines: usize,
    pub cleaned_records: usize,
    pub located_motes: usize,
    pub clusters: Vec<Vec<u32>>,
    pub epochs: Vec<u32>,
    pub window_motes: BTreeSet<u32>,
    pub agreement_all: AgreementReport,
    pub agreement_excluding_windows: AgreementReport,
    pub improvement_pp: f64,
    pub snr: Vec<ClusterSnr>,
    pub curves: DegradationCurves,
}

/// Clean, cluster, detect window motes, then compute agreement, SNR and the
/// degradation curves.
pub fn run_intel_pipeline(
    data: &Parsed<MoteRecord>,
    locations: &[MoteLocation],
    cfg: &IntelConfig,
) -> Result<IntelReport> {
    let cleaned = clean_records(&data.items, locations);
    if cleaned.is_empty() {
        return Err(Error::Empty("valid readings from located motes"));
    }
    let reporting: BTreeSet<u32> = cleaned.iter().map(|r| r.mote_id).collect();
    let mut located: Vec<MoteLocation> = locations
        .iter()
        .filter(|l| reporting.contains(&l.mote_id))
        .copied()
        .collect();
    located.sort_by_key(|l| l.mote_id);

    let assignment = kmeans_clusters(&located, cfg.clusters, cfg.seed)?;
    let windows = detect_window_motes(&cleaned, &located, cfg.z_threshold, cfg.wall_margin)?;
    let epochs = select_epochs(&cleaned, cfg.epochs);
    let index = index_readings(&cleaned);
    let all = cluster_agreement(&index, &assignment, &epochs, &BTreeSet::new(), cfg.tolerance)?;
    let excl = cluster_agreement(&index, &assignment, &epochs, &windows, cfg.tolerance)?;
    let snr = cluster_snr(&index, &assignment, &epochs, cfg.atoms, cfg.sensitivity)?;
    let curves = missing_vs_decoherence_curves(&index, &assignment, &epochs, &cfg.curves)?;

    Ok(IntelReport {
        records: data.items.len(),
        skipped_lines: data.skipped,
        cleaned_records: cleaned.len(),
        located_motes: located.len(),
        clusters: assignment.members(),
        epochs,
        window_motes: windows,
        improvement_pp: excl.agreement_pct - all.agreement_pct,
        agreement_all: all,
        agreement_excluding_windows: excl,
        snr,
        curves,
    })
}
