//! Monte Carlo engine: run a (model x window x setting x estimator) grid
//! over many replications and aggregate mean, sd, bias, MSE, and gain.
//!
//! The design is paired: each replication simulates one base pattern per
//! window size and applies every contamination setting to that same
//! pattern, so setting-to-setting comparisons share the simulation noise.
//! Every random draw comes from a substream whose index encodes (window,
//! replication, purpose), which makes the output independent of the number
//! of worker threads: replications are embarrassingly parallel and are
//! reassembled in index order.
//!
//! Per-estimator wall times are measured and carried in the records; the
//! CSV writer can zero that column ([`TimingColumn::Zeroed`]) so that
//! reruns and different worker counts produce byte-identical files.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::contamination::{contaminate, ContaminationConfig};
use crate::error::{Error, Result};
use crate::estimators::voronoi::{dummy_inverse_areas, voronoi_cell_areas, DEFAULT_GRID_PER_SIDE};
use crate::estimators::{
    estimate_std, median_j_pair, trimmed_mean, EstimatorId, JitterFunction,
};
use crate::geometry::Window;
use crate::io::pattern_to_string;
use crate::models::{ModelConfig, ModelSimulator};
use crate::rng::{substream, RandomStream};
use crate::theory::gain;

/// Full description of one experiment run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    /// Window half-sides; each window is `[-n, n]^2`.
    pub half_sides: Vec<f64>,
    pub replications: usize,
    /// Contamination settings; empty or missing means pure observation
    /// only.
    #[serde(default)]
    pub settings: Vec<ContaminationConfig>,
    /// Tessellation resolutions for the median estimators; each entry `s`
    /// yields `k_n = s^2` cells.
    #[serde(default)]
    pub median_cells_per_side: Vec<u32>,
    /// Also record the rule-of-thumb-corrected median estimate.
    #[serde(default = "default_true")]
    pub median_rule_of_thumb: bool,
    #[serde(default)]
    pub jitter: JitterFunction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub voronoi: Option<VoronoiExperimentConfig>,
    pub master_seed: u64,
    /// True intensity override for bias/MSE; useful when an external
    /// calibration already exists.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_intensity: Option<f64>,
    /// Replications of the calibration run performed per window size when
    /// the model has no closed-form intensity and no override is given.
    #[serde(default = "default_calibration_replications")]
    pub calibration_replications: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VoronoiExperimentConfig {
    #[serde(default = "default_voronoi_grid")]
    pub grid_per_side: u32,
    pub trim_fractions: Vec<f64>,
}

fn default_true() -> bool {
    true
}

fn default_calibration_replications() -> usize {
    10_000
}

fn default_voronoi_grid() -> u32 {
    DEFAULT_GRID_PER_SIDE
}

/// Maximum number of contamination settings; the substream layout reserves
/// indices 1..=31 for them.
pub const MAX_SETTINGS: usize = 31;
/// Maximum number of tessellation resolutions; substream indices 32..=255
/// are reserved for their jitter draws.
pub const MAX_MEDIAN_GRIDS: usize = 224;

/// How the substream index of every random draw is assembled. Recorded in
/// the run manifest so an external reimplementation can replay any single
/// piece of the experiment.
pub const STREAM_SCHEME: &str = "stream_index = region<<56 | window_index<<48 | \
    replication<<8 | purpose, on a counter RNG seeded with master_seed; region 0 = \
    experiment, region 1 = calibration; purpose 0 = base pattern, 1 + setting_index = \
    contamination draws, 32 + grid_index = jitter draws (shared across settings)";

fn stream_index(region: u64, n_idx: usize, rep: usize, purpose: u64) -> u64 {
    debug_assert!(region < 256 && n_idx < 256 && purpose < 256 && (rep as u64) < (1 << 40));
    region << 56 | (n_idx as u64) << 48 | (rep as u64) << 8 | purpose
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.half_sides.is_empty() {
            return Err(Error::Config("half_sides must not be empty".into()));
        }
        if self.half_sides.len() > 256 {
            return Err(Error::Config("at most 256 window sizes per run".into()));
        }
        for &h in &self.half_sides {
            if !(h > 0.0) || !h.is_finite() {
                return Err(Error::Config(format!(
                    "half_sides entries must be finite and > 0, got {h}"
                )));
            }
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be >= 1".into()));
        }
        if self.replications as u64 >= 1 << 40 {
            return Err(Error::Config("replications must fit in 40 bits".into()));
        }
        if self.settings.len() > MAX_SETTINGS {
            return Err(Error::Config(format!(
                "at most {MAX_SETTINGS} contamination settings per run"
            )));
        }
        for s in &self.settings {
            s.validate()?;
        }
        if self.median_cells_per_side.len() > MAX_MEDIAN_GRIDS {
            return Err(Error::Config(format!(
                "at most {MAX_MEDIAN_GRIDS} tessellation resolutions per run"
            )));
        }
        for &s in &self.median_cells_per_side {
            if s < 2 {
                return Err(Error::Config(format!(
                    "median_cells_per_side entries must be >= 2, got {s}"
                )));
            }
        }
        self.jitter.validate()?;
        if let Some(v) = &self.voronoi {
            if v.grid_per_side == 0 {
                return Err(Error::Config("voronoi.grid_per_side must be >= 1".into()));
            }
            if v.trim_fractions.is_empty() {
                return Err(Error::Config(
                    "voronoi.trim_fractions must not be empty when [voronoi] is given".into(),
                ));
            }
            for &f in &v.trim_fractions {
                if !(0.0..0.5).contains(&f) {
                    return Err(Error::Config(format!(
                        "voronoi trim fractions must lie in [0, 0.5), got {f}"
                    )));
                }
            }
        }
        if let Some(r) = self.reference_intensity {
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::Config(format!(
                    "reference_intensity must be finite and > 0, got {r}"
                )));
            }
        }
        if self.calibration_replications < 2 {
            return Err(Error::Config("calibration_replications must be >= 2".into()));
        }
        Ok(())
    }

    /// Settings to run: the configured list, or pure observation when the
    /// list is empty.
    pub fn normalized_settings(&self) -> Vec<ContaminationConfig> {
        if self.settings.is_empty() {
            vec![ContaminationConfig::Pure]
        } else {
            self.settings.clone()
        }
    }
}

/// Estimator-specific parameter of a record: the cell count `k_n` for the
/// median estimators, the trim fraction for the Voronoi estimator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Param {
    None,
    CellCount(u32),
    TrimFraction(f64),
}

impl Param {
    fn sort_bits(&self) -> u64 {
        match self {
            Param::None => 0,
            Param::CellCount(k) => (*k as f64).to_bits(),
            Param::TrimFraction(f) => f.to_bits(),
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::None => Ok(()),
            Param::CellCount(k) => write!(f, "{k}"),
            Param::TrimFraction(t) => write!(f, "{t}"),
        }
    }
}

/// One estimator evaluation on one (replication, window, setting).
#[derive(Clone, Debug)]
pub struct Record {
    pub rep: usize,
    pub half_side: f64,
    pub setting: &'static str,
    pub rho: Option<f64>,
    pub estimator: EstimatorId,
    pub param: Param,
    pub value: f64,
    pub seconds: f64,
    /// Digest of the base (uncontaminated) pattern of this replication;
    /// equal across the settings of one replication by construction.
    pub base_hash: String,
    n_index: usize,
    setting_index: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureKind {
    /// Structurally inapplicable on this input (e.g. no interior Voronoi
    /// cell); recorded but not counted against the failure budget.
    Skip,
    /// Unexpected estimation error; counted, and too many abort the run.
    Error,
}

#[derive(Clone, Debug)]
pub struct FailureRecord {
    pub rep: usize,
    pub half_side: f64,
    pub setting: &'static str,
    pub estimator: EstimatorId,
    pub param: Param,
    pub kind: FailureKind,
    pub message: String,
}

/// Where the reference (true) intensity of a window size came from.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum ReferenceSource {
    /// Closed form from the model parameters.
    Analytic,
    /// Supplied in the configuration.
    Provided,
    /// Estimated by a dedicated simulation run.
    Calibrated { replications: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct ReferenceIntensity {
    pub half_side: f64,
    pub value: f64,
    #[serde(flatten)]
    pub source: ReferenceSource,
}

/// One row of the aggregates table.
#[derive(Clone, Debug)]
pub struct AggregateRow {
    pub model: &'static str,
    pub half_side: f64,
    pub setting: &'static str,
    pub rho: Option<f64>,
    pub estimator: EstimatorId,
    pub param: Param,
    pub mean: f64,
    pub sd: f64,
    pub bias: f64,
    pub mse: f64,
    /// Percent MSE improvement over the standard estimator on the same
    /// replications; 0 for the standard estimator itself, NaN when
    /// undefined.
    pub gain_pct: f64,
    pub replications_used: usize,
}

pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub references: Vec<ReferenceIntensity>,
    /// Actual field pixel size per window size (Cox models only).
    pub field_spacings: Vec<Option<f64>>,
    pub records: Vec<Record>,
    pub failures: Vec<FailureRecord>,
    pub aggregates: Vec<AggregateRow>,
}

/// Whether the records CSV carries measured wall times or zeros.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimingColumn {
    Measured,
    /// Byte-identical output across runs and worker counts.
    Zeroed,
}

/// Run the full grid. Replications execute on the current rayon pool; the
/// output is identical for any worker count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let settings = config.normalized_settings();

    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut references = Vec::with_capacity(config.half_sides.len());
    let mut field_spacings = Vec::with_capacity(config.half_sides.len());

    for (n_idx, &half) in config.half_sides.iter().enumerate() {
        let window = Window::<2>::new(half)?;
        let simulator = ModelSimulator::new(config.model.clone(), window)?;
        field_spacings.push(simulator.field_spacing());
        references.push(resolve_reference(config, n_idx, &simulator)?);

        let outputs: Vec<(Vec<Record>, Vec<FailureRecord>)> = (0..config.replications)
            .into_par_iter()
            .map(|rep| process_replication(config, &settings, &simulator, n_idx, rep))
            .collect::<Result<Vec<_>>>()?;
        for (recs, fails) in outputs {
            records.extend(recs);
            failures.extend(fails);
        }
    }

    let counted = failures.iter().filter(|f| f.kind == FailureKind::Error).count();
    let attempts = records.len() + failures.len();
    if counted * 100 > attempts {
        return Err(Error::TooManyFailures { failed: counted, total: attempts });
    }

    let aggregates = aggregate(config, &settings, &references, &records);
    Ok(ExperimentReport {
        config: config.clone(),
        references,
        field_spacings,
        records,
        failures,
        aggregates,
    })
}

fn resolve_reference(
    config: &ExperimentConfig,
    n_idx: usize,
    simulator: &ModelSimulator,
) -> Result<ReferenceIntensity> {
    let half = simulator.window().half_side();
    if let Some(value) = config.reference_intensity {
        return Ok(ReferenceIntensity { half_side: half, value, source: ReferenceSource::Provided });
    }
    if let Some(value) = config.model.intensity() {
        return Ok(ReferenceIntensity { half_side: half, value, source: ReferenceSource::Analytic });
    }
    // Calibration: mean standard estimate over a dedicated replication set.
    let reps = config.calibration_replications;
    let estimates: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let stream = substream(config.master_seed, stream_index(1, n_idx, rep, 0));
            simulator.simulate(stream).map(|p| estimate_std(&p).value)
        })
        .collect::<Result<Vec<_>>>()?;
    let value = estimates.iter().sum::<f64>() / reps as f64;
    Ok(ReferenceIntensity {
        half_side: half,
        value,
        source: ReferenceSource::Calibrated { replications: reps },
    })
}

fn pattern_hash(pattern: &crate::geometry::PointPattern<2>) -> String {
    let digest = Sha256::digest(pattern_to_string(pattern).as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn failure_kind(error: &Error) -> FailureKind {
    match error {
        Error::EmptySample(_) | Error::EstimationFailed(_) => FailureKind::Skip,
        _ => FailureKind::Error,
    }
}

fn process_replication(
    config: &ExperimentConfig,
    settings: &[ContaminationConfig],
    simulator: &ModelSimulator,
    n_idx: usize,
    rep: usize,
) -> Result<(Vec<Record>, Vec<FailureRecord>)> {
    let seed = config.master_seed;
    let half = simulator.window().half_side();
    let base =
        simulator.simulate(substream(seed, stream_index(0, n_idx, rep, 0)))?;
    let base_hash = pattern_hash(&base);

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (s_idx, setting) in settings.iter().enumerate() {
        let setting_label = setting.label();
        let rho = setting.rho();
        let pattern = contaminate(
            &base,
            setting,
            substream(seed, stream_index(0, n_idx, rep, 1 + s_idx as u64)),
        )?;
        let mut push = |estimator: EstimatorId, param: Param, value: f64, seconds: f64| {
            records.push(Record {
                rep,
                half_side: half,
                setting: setting_label,
                rho,
                estimator,
                param,
                value,
                seconds,
                base_hash: base_hash.clone(),
                n_index: n_idx,
                setting_index: s_idx,
            });
        };
        let mut fail = |estimator: EstimatorId, param: Param, error: &Error| {
            failures.push(FailureRecord {
                rep,
                half_side: half,
                setting: setting_label,
                estimator,
                param,
                kind: failure_kind(error),
                message: error.to_string(),
            });
        };

        let t = Instant::now();
        let std_result = estimate_std(&pattern);
        push(EstimatorId::Std, Param::None, std_result.value, t.elapsed().as_secs_f64());

        for (k_idx, &cells) in config.median_cells_per_side.iter().enumerate() {
            let jitter_stream =
                substream(seed, stream_index(0, n_idx, rep, 32 + k_idx as u64));
            let param = Param::CellCount(cells * cells);
            let t = Instant::now();
            match median_j_pair(&pattern, cells, config.jitter, jitter_stream) {
                Ok((j, j2)) => {
                    // One computation yields both values; both rows carry
                    // its duration.
                    let seconds = t.elapsed().as_secs_f64();
                    push(EstimatorId::MedianJ, param, j.value, seconds);
                    if config.median_rule_of_thumb {
                        push(EstimatorId::MedianJ2, param, j2.value, seconds);
                    }
                }
                Err(e) => {
                    fail(EstimatorId::MedianJ, param, &e);
                    if config.median_rule_of_thumb {
                        fail(EstimatorId::MedianJ2, param, &e);
                    }
                }
            }
        }

        if let Some(vconfig) = &config.voronoi {
            let t = Instant::now();
            match voronoi_cell_areas(&pattern) {
                Ok(cells) => {
                    let values = dummy_inverse_areas(&cells, vconfig.grid_per_side);
                    // The diagram and dummy assignment are shared by all
                    // trim fractions; split their cost evenly.
                    let shared = t.elapsed().as_secs_f64() / vconfig.trim_fractions.len() as f64;
                    for &f in &vconfig.trim_fractions {
                        let param = Param::TrimFraction(f);
                        if values.is_empty() {
                            fail(
                                EstimatorId::Voronoi,
                                param,
                                &Error::EstimationFailed(
                                    "no interior Voronoi cells; every cell touches the \
                                     window boundary"
                                        .into(),
                                ),
                            );
                            continue;
                        }
                        let t_own = Instant::now();
                        match trimmed_mean(&values, f) {
                            Ok(value) => push(
                                EstimatorId::Voronoi,
                                param,
                                value,
                                shared + t_own.elapsed().as_secs_f64(),
                            ),
                            Err(e) => fail(EstimatorId::Voronoi, param, &e),
                        }
                    }
                }
                Err(e) => {
                    for &f in &vconfig.trim_fractions {
                        fail(EstimatorId::Voronoi, Param::TrimFraction(f), &e);
                    }
                }
            }
        }
    }
    Ok((records, failures))
}

fn estimator_rank(id: EstimatorId) -> u8 {
    match id {
        EstimatorId::Std => 0,
        EstimatorId::MedianJ => 1,
        EstimatorId::MedianJ2 => 2,
        EstimatorId::Voronoi => 3,
    }
}

fn summarize(values: &[f64], reference: f64) -> (f64, f64, f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let mse = values.iter().map(|v| (v - reference).powi(2)).sum::<f64>() / n;
    (mean, sd, mean - reference, mse)
}

fn aggregate(
    config: &ExperimentConfig,
    settings: &[ContaminationConfig],
    references: &[ReferenceIntensity],
    records: &[Record],
) -> Vec<AggregateRow> {
    struct Group {
        estimator: EstimatorId,
        param: Param,
        values: Vec<(usize, f64)>,
    }
    type Key = (usize, usize, u8, u64);
    let mut groups: BTreeMap<Key, Group> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.n_index, r.setting_index, estimator_rank(r.estimator), r.param.sort_bits()))
            .or_insert_with(|| Group { estimator: r.estimator, param: r.param, values: Vec::new() })
            .values
            .push((r.rep, r.value));
    }

    let mut rows = Vec::new();
    for (n_idx, &half) in config.half_sides.iter().enumerate() {
        let reference = references[n_idx].value;
        for (s_idx, setting) in settings.iter().enumerate() {
            let std_values: BTreeMap<usize, f64> = groups
                .get(&(n_idx, s_idx, estimator_rank(EstimatorId::Std), Param::None.sort_bits()))
                .map(|g| g.values.iter().copied().collect())
                .unwrap_or_default();

            for group in groups
                .range((n_idx, s_idx, 0, 0)..=(n_idx, s_idx, u8::MAX, u64::MAX))
                .map(|(_, g)| g)
            {
                let xs: Vec<f64> = group.values.iter().map(|(_, v)| *v).collect();
                let (mean, sd, bias, mse) = summarize(&xs, reference);
                let gain_pct = if group.estimator == EstimatorId::Std {
                    0.0
                } else {
                    // Gain against the standard estimator restricted to the
                    // replications where this estimator produced a value.
                    let matched_std: Vec<f64> = group
                        .values
                        .iter()
                        .filter_map(|(rep, _)| std_values.get(rep).copied())
                        .collect();
                    if matched_std.len() == group.values.len() && !matched_std.is_empty() {
                        let (_, _, _, mse_std) = summarize(&matched_std, reference);
                        gain(mse_std, mse).unwrap_or(f64::NAN)
                    } else {
                        f64::NAN
                    }
                };
                rows.push(AggregateRow {
                    model: config.model.kind_label(),
                    half_side: half,
                    setting: setting.label(),
                    rho: setting.rho(),
                    estimator: group.estimator,
                    param: group.param,
                    mean,
                    sd,
                    bias,
                    mse,
                    gain_pct,
                    replications_used: group.values.len(),
                });
            }
        }
    }
    rows
}

impl ExperimentReport {
    /// Records CSV: one row per estimator evaluation, ordered by window,
    /// replication, setting, estimator.
    pub fn records_csv(&self, timing: TimingColumn) -> String {
        let mut out = String::with_capacity(64 * (self.records.len() + 1));
        out.push_str("rep,n,setting,rho,estimator,param,value,seconds,base_hash\n");
        for r in &self.records {
            let seconds = match timing {
                TimingColumn::Measured => r.seconds,
                TimingColumn::Zeroed => 0.0,
            };
            let rho = r.rho.map(|x| x.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{:.16e},{:.6},{}\n",
                r.rep,
                r.half_side,
                r.setting,
                rho,
                r.estimator.as_str(),
                r.param,
                r.value,
                seconds,
                r.base_hash
            ));
        }
        out
    }

    /// Aggregates CSV: one row per (window, setting, estimator, param).
    pub fn aggregates_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("model,n,setting,rho,estimator,param,mean,sd,bias,mse,gain_pct\n");
        for a in &self.aggregates {
            let rho = a.rho.map(|x| x.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
                a.model,
                a.half_side,
                a.setting,
                rho,
                a.estimator.as_str(),
                a.param,
                a.mean,
                a.sd,
                a.bias,
                a.mse,
                a.gain_pct
            ));
        }
        out
    }

    /// Machine-readable run manifest. With [`TimingColumn::Zeroed`] the
    /// timestamp is omitted so the manifest is reproducible byte for byte.
    pub fn manifest_json(
        &self,
        timing: TimingColumn,
        records_path: &str,
        aggregates_path: &str,
    ) -> Result<String> {
        #[derive(Serialize)]
        struct Outputs<'a> {
            records: &'a str,
            aggregates: &'a str,
        }
        #[derive(Serialize)]
        struct Manifest<'a> {
            toolkit_version: &'static str,
            master_seed: u64,
            config_digest: String,
            timing: &'static str,
            #[serde(skip_serializing_if = "Option::is_none")]
            timestamp_unix: Option<u64>,
            stream_scheme: &'static str,
            reference_intensities: &'a [ReferenceIntensity],
            #[serde(skip_serializing_if = "Option::is_none")]
            field_spacings: Option<&'a [Option<f64>]>,
            failures_recorded: usize,
            config: &'a ExperimentConfig,
            outputs: Outputs<'a>,
        }
        let config_json = serde_json::to_string(&self.config)
            .map_err(|e| Error::Config(format!("config not serializable: {e}")))?;
        let digest = Sha256::digest(config_json.as_bytes());
        let manifest = Manifest {
            toolkit_version: env!("CARGO_PKG_VERSION"),
            master_seed: self.config.master_seed,
            config_digest: digest.iter().map(|b| format!("{b:02x}")).collect(),
            timing: match timing {
                TimingColumn::Measured => "measured",
                TimingColumn::Zeroed => "zeroed",
            },
            timestamp_unix: match timing {
                TimingColumn::Zeroed => None,
                TimingColumn::Measured => std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .ok()
                    .map(|d| d.as_secs()),
            },
            stream_scheme: STREAM_SCHEME,
            reference_intensities: &self.references,
            field_spacings: if self.field_spacings.iter().any(Option::is_some) {
                Some(&self.field_spacings)
            } else {
                None
            },
            failures_recorded: self.failures.len(),
            config: &self.config,
            outputs: Outputs { records: records_path, aggregates: aggregates_path },
        };
        serde_json::to_string_pretty(&manifest)
            .map_err(|e| Error::Config(format!("manifest not serializable: {e}")))
    }
}

/// Convenience: derive the substream used for a given purpose, for replays
/// and diagnostics. See [`STREAM_SCHEME`].
pub fn replay_stream(
    master_seed: u64,
    region: u64,
    n_idx: usize,
    rep: usize,
    purpose: u64,
) -> RandomStream {
    substream(master_seed, stream_index(region, n_idx, rep, purpose))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poisson_config() -> ExperimentConfig {
        ExperimentConfig {
            model: ModelConfig::Poisson { lambda: 50.0 },
            half_sides: vec![1.0],
            replications: 20,
            settings: vec![
                ContaminationConfig::Pure,
                ContaminationConfig::Add { rho: 0.1 },
                ContaminationConfig::Delete { rho: 0.1 },
            ],
            median_cells_per_side: vec![3],
            median_rule_of_thumb: true,
            jitter: JitterFunction::Identity,
            voronoi: Some(VoronoiExperimentConfig {
                grid_per_side: 50,
                trim_fractions: vec![0.05],
            }),
            master_seed: 99,
            reference_intensity: None,
            calibration_replications: 100,
        }
    }

    #[test]
    fn toml_round_trip_and_defaults() {
        let text = "
            half_sides = [1.0, 2.0]
            replications = 5
            median_cells_per_side = [3, 5]
            master_seed = 7

            [model]
            kind = \"poisson\"
            lambda = 100.0
        ";
        let config = ExperimentConfig::from_toml_str(text).unwrap();
        assert!(config.settings.is_empty());
        assert_eq!(config.normalized_settings(), vec![ContaminationConfig::Pure]);
        assert_eq!(config.jitter, JitterFunction::Identity);
        assert!(config.median_rule_of_thumb);
        assert_eq!(config.calibration_replications, 10_000);
        assert!(config.voronoi.is_none());

        let with_sections = "
            half_sides = [1.0]
            replications = 3
            jitter = \"sqrt\"
            master_seed = 1

            [model]
            kind = \"lgcp\"
            lambda = 100.0
            sigma2 = 0.5
            scale = 0.02

            [[settings]]
            kind = \"add\"
            rho = 0.05

            [voronoi]
            trim_fractions = [0.025, 0.1]
        ";
        let config = ExperimentConfig::from_toml_str(with_sections).unwrap();
        assert_eq!(config.jitter, JitterFunction::Sqrt);
        assert_eq!(config.voronoi.as_ref().unwrap().grid_per_side, 200);
        assert_eq!(config.settings.len(), 1);

        let back = toml::to_string(&config).unwrap();
        let again = ExperimentConfig::from_toml_str(&back).unwrap();
        assert_eq!(again.model, config.model);
        assert_eq!(again.settings, config.settings);
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let mut c = poisson_config();
        c.replications = 0;
        assert!(c.validate().is_err());

        let mut c = poisson_config();
        c.median_cells_per_side = vec![1];
        assert!(c.validate().is_err());

        let mut c = poisson_config();
        c.settings = vec![ContaminationConfig::Add { rho: 1.5 }];
        assert!(c.validate().is_err());

        let mut c = poisson_config();
        c.voronoi = Some(VoronoiExperimentConfig {
            grid_per_side: 10,
            trim_fractions: vec![0.5],
        });
        assert!(c.validate().is_err());

        let mut c = poisson_config();
        c.half_sides = vec![];
        assert!(c.validate().is_err());
    }

    #[test]
    fn paired_design_shares_the_base_pattern_across_settings() {
        let report = run_experiment(&poisson_config()).unwrap();
        for rep in 0..20 {
            let hashes: Vec<&str> = report
                .records
                .iter()
                .filter(|r| r.rep == rep)
                .map(|r| r.base_hash.as_str())
                .collect();
            assert!(!hashes.is_empty());
            assert!(hashes.windows(2).all(|w| w[0] == w[1]), "rep {rep}");
        }
        let h0 = &report.records.iter().find(|r| r.rep == 0).unwrap().base_hash;
        let h1 = &report.records.iter().find(|r| r.rep == 1).unwrap().base_hash;
        assert_ne!(h0, h1);

        // Setting A keeps the base pattern: its std estimate differs from
        // B (points added) and C (points deleted).
        let std_a = report
            .records
            .iter()
            .find(|r| r.rep == 0 && r.setting == "A" && r.estimator == EstimatorId::Std)
            .unwrap();
        let std_b = report
            .records
            .iter()
            .find(|r| r.rep == 0 && r.setting == "B" && r.estimator == EstimatorId::Std)
            .unwrap();
        assert!(std_b.value > std_a.value);
    }

    #[test]
    fn identical_runs_and_worker_counts_give_identical_zeroed_csv() {
        let config = poisson_config();
        let a = run_experiment(&config).unwrap().records_csv(TimingColumn::Zeroed);
        let b = run_experiment(&config).unwrap().records_csv(TimingColumn::Zeroed);
        assert_eq!(a, b);

        let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let c = pool
            .install(|| run_experiment(&config).unwrap().records_csv(TimingColumn::Zeroed));
        assert_eq!(a, c);

        // Different seed, different records.
        let mut other = config;
        other.master_seed = 100;
        let d = run_experiment(&other).unwrap().records_csv(TimingColumn::Zeroed);
        assert_ne!(a, d);
    }

    #[test]
    fn csv_shapes_and_timing_column() {
        let report = run_experiment(&poisson_config()).unwrap();
        let csv = report.records_csv(TimingColumn::Zeroed);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "rep,n,setting,rho,estimator,param,value,seconds,base_hash"
        );
        // 20 reps x 3 settings x (std + medianJ + medianJ2 + voronoi).
        assert_eq!(csv.lines().count() - 1, report.records.len());
        assert_eq!(report.records.len(), 20 * 3 * 4);
        for line in csv.lines().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 9);
            assert_eq!(fields[7], "0.000000");
        }
        let measured = report.records_csv(TimingColumn::Measured);
        assert!(measured
            .lines()
            .skip(1)
            .all(|l| l.split(',').nth(7).unwrap().parse::<f64>().unwrap() >= 0.0));

        // Pure rows leave rho empty; contaminated rows carry it.
        assert!(csv.lines().skip(1).any(|l| l.contains(",A,,")));
        assert!(csv.lines().skip(1).any(|l| l.contains(",B,0.1,")));

        let agg = report.aggregates_csv();
        assert_eq!(
            agg.lines().next().unwrap(),
            "model,n,setting,rho,estimator,param,mean,sd,bias,mse,gain_pct"
        );
        // 3 settings x 4 estimator rows.
        assert_eq!(agg.lines().count() - 1, 12);
    }

    #[test]
    fn aggregates_satisfy_the_mse_identity_and_std_gain_zero() {
        let report = run_experiment(&poisson_config()).unwrap();
        for row in &report.aggregates {
            let r = row.replications_used as f64;
            assert!(row.replications_used >= 2);
            let identity = row.bias.powi(2) + row.sd.powi(2) * (r - 1.0) / r;
            assert!(
                (row.mse - identity).abs() < 1e-10,
                "{:?} {}: mse {} vs identity {identity}",
                row.estimator,
                row.param,
                row.mse
            );
            if row.estimator == EstimatorId::Std {
                assert_eq!(row.gain_pct, 0.0);
            } else {
                assert!(row.gain_pct.is_finite());
            }
        }
        // Setting B inflates the std estimator upward.
        let std_b = report
            .aggregates
            .iter()
            .find(|a| a.setting == "B" && a.estimator == EstimatorId::Std)
            .unwrap();
        assert!(std_b.bias > 2.0, "bias {}", std_b.bias);
    }

    #[test]
    fn gain_matches_direct_recomputation_from_records() {
        let report = run_experiment(&poisson_config()).unwrap();
        let reference = report.references[0].value;
        let mse = |est: EstimatorId, setting: &str| -> f64 {
            let vals: Vec<f64> = report
                .records
                .iter()
                .filter(|r| r.estimator == est && r.setting == setting)
                .map(|r| (r.value - reference).powi(2))
                .collect();
            vals.iter().sum::<f64>() / vals.len() as f64
        };
        let expected =
            (mse(EstimatorId::Std, "C") - mse(EstimatorId::MedianJ, "C"))
                / mse(EstimatorId::Std, "C")
                * 100.0;
        let row = report
            .aggregates
            .iter()
            .find(|a| a.setting == "C" && a.estimator == EstimatorId::MedianJ)
            .unwrap();
        assert!((row.gain_pct - expected).abs() < 1e-9);
    }

    #[test]
    fn zero_intensity_run_completes_with_voronoi_skips() {
        let config = ExperimentConfig {
            model: ModelConfig::Poisson { lambda: 0.0 },
            half_sides: vec![1.0],
            replications: 1,
            settings: vec![],
            median_cells_per_side: vec![3],
            median_rule_of_thumb: true,
            jitter: JitterFunction::Identity,
            voronoi: Some(VoronoiExperimentConfig {
                grid_per_side: 20,
                trim_fractions: vec![0.05],
            }),
            master_seed: 5,
            reference_intensity: None,
            calibration_replications: 100,
        };
        let report = run_experiment(&config).unwrap();
        let std = report
            .records
            .iter()
            .find(|r| r.estimator == EstimatorId::Std)
            .unwrap();
        assert_eq!(std.value, 0.0);
        // All counts are zero, so the jittered median is a pure jitter
        // value inside one cell volume.
        let mj = report
            .records
            .iter()
            .find(|r| r.estimator == EstimatorId::MedianJ)
            .unwrap();
        assert!(mj.value > 0.0 && mj.value < 1.0 / (4.0 / 9.0));
        // Voronoi cannot run on an empty pattern: recorded as a skip.
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].kind, FailureKind::Skip);
    }

    #[test]
    fn provided_reference_intensity_feeds_bias() {
        let mut config = poisson_config();
        config.settings = vec![ContaminationConfig::Pure];
        config.voronoi = None;
        config.reference_intensity = Some(25.0);
        let report = run_experiment(&config).unwrap();
        assert!(matches!(report.references[0].source, ReferenceSource::Provided));
        let std_row = report
            .aggregates
            .iter()
            .find(|a| a.estimator == EstimatorId::Std)
            .unwrap();
        // True intensity is 50; against a reference of 25 the bias is ~25.
        assert!((std_row.bias - 25.0).abs() < 3.0, "bias {}", std_row.bias);
    }

    #[test]
    fn hard_core_model_triggers_calibration() {
        let config = ExperimentConfig {
            model: ModelConfig::PoissonHardCore {
                beta: 80.0,
                hard_core: 0.05,
                mh_steps: Some(20_000),
            },
            half_sides: vec![0.5],
            replications: 3,
            settings: vec![],
            median_cells_per_side: vec![],
            median_rule_of_thumb: false,
            jitter: JitterFunction::Identity,
            voronoi: None,
            master_seed: 40,
            reference_intensity: None,
            calibration_replications: 300,
        };
        let report = run_experiment(&config).unwrap();
        match report.references[0].source {
            ReferenceSource::Calibrated { replications } => assert_eq!(replications, 300),
            ref other => panic!("expected calibration, got {other:?}"),
        }
        let v = report.references[0].value;
        assert!(v > 30.0 && v < 80.0, "calibrated intensity {v}");
    }

    #[test]
    fn manifest_is_reproducible_when_zeroed() {
        let mut config = poisson_config();
        config.replications = 2;
        config.voronoi = None;
        let report = run_experiment(&config).unwrap();
        let a = report.manifest_json(TimingColumn::Zeroed, "r.csv", "a.csv").unwrap();
        let b = report.manifest_json(TimingColumn::Zeroed, "r.csv", "a.csv").unwrap();
        assert_eq!(a, b);
        assert!(!a.contains("timestamp_unix"));
        assert!(a.contains("config_digest"));
        assert!(a.contains("stream_scheme"));
        let measured = report.manifest_json(TimingColumn::Measured, "r.csv", "a.csv").unwrap();
        assert!(measured.contains("timestamp_unix"));
    }

    #[test]
    fn replay_stream_reproduces_the_base_pattern() {
        let config = poisson_config();
        let report = run_experiment(&config).unwrap();
        let window = Window::<2>::new(1.0).unwrap();
        let sim = ModelSimulator::new(config.model.clone(), window).unwrap();
        let pattern = sim.simulate(replay_stream(config.master_seed, 0, 0, 3, 0)).unwrap();
        let expected_hash = &report
            .records
            .iter()
            .find(|r| r.rep == 3)
            .unwrap()
            .base_hash;
        assert_eq!(&pattern_hash(&pattern), expected_hash);
    }
}
