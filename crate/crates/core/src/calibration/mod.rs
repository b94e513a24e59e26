//! Fitting model parameters to farm-size-binned targets.
//!
//! Yield parameters are calibrated by evaluating a least-squares loss at the
//! points of a Sobol sequence mapped into the sampling box. Measured
//! (exogenous) curves are fitted directly by grid search in [`fit_exogenous`].

mod exogenous;
mod sobol;
mod targets;

pub use exogenous::{fit_exogenous, ExogenousFit};
pub use sobol::{scale_points, sobol_sample, Sobol, MAX_DIM};
pub use targets::{TargetField, TargetRow, TargetTable};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::economics::{EconParams, EconReport};
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::model::{replicate_account, replicate_ecology, replicate_seed, simulate, FarmConfig, ModelParams, ReplicateEcology, ResolvedFarm};
use crate::rng::{label, StreamRng};
use crate::table::{num, Table};

/// Per-field squared-residual normalisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LossNorm {
    /// Divide each residual by the observed value.
    #[default]
    Relative,
    /// Raw residuals.
    Absolute,
}

/// The three calibrated yield parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YieldParams {
    pub base_yield: f64,
    pub fertilizer_yield: f64,
    pub yield_ref_size: f64,
}

impl YieldParams {
    pub fn from_slice(v: &[f64]) -> Self {
        Self {
            base_yield: v[0],
            fertilizer_yield: v[1],
            yield_ref_size: v[2],
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.base_yield, self.fertilizer_yield, self.yield_ref_size]
    }

    pub fn of(econ: &EconParams) -> Self {
        Self {
            base_yield: econ.base_yield,
            fertilizer_yield: econ.fertilizer_yield,
            yield_ref_size: econ.yield_ref_size,
        }
    }

    pub fn apply(&self, econ: &EconParams) -> EconParams {
        EconParams {
            base_yield: self.base_yield,
            fertilizer_yield: self.fertilizer_yield,
            yield_ref_size: self.yield_ref_size,
            ..*econ
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationSettings {
    pub base_yield: [f64; 2],
    pub fertilizer_yield: [f64; 2],
    pub yield_ref_size: [f64; 2],
    pub samples: usize,
    pub replicates: usize,
    pub fields: Vec<TargetField>,
    pub normalization: LossNorm,
    /// Lattice `[rows, cols]` used for calibration runs instead of the
    /// scenario lattice.
    pub grid: Option<[usize; 2]>,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        Self {
            base_yield: [30.0, 70.0],
            fertilizer_yield: [0.0, 40.0],
            yield_ref_size: [1.0, 100.0],
            samples: 4096,
            replicates: 100,
            fields: TargetField::SIMULATED.to_vec(),
            normalization: LossNorm::Relative,
            grid: None,
        }
    }
}

impl CalibrationSettings {
    pub fn ranges(&self) -> [[f64; 2]; 3] {
        [self.base_yield, self.fertilizer_yield, self.yield_ref_size]
    }

    pub fn validate(&self) -> Result<()> {
        let names = ["calibration.base_yield", "calibration.fertilizer_yield", "calibration.yield_ref_size"];
        for (name, [lo, hi]) in names.into_iter().zip(self.ranges()) {
            if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::config(name, format!("invalid range [{lo}, {hi}]")));
            }
        }
        if self.yield_ref_size[0] <= 0.0 {
            return Err(Error::config("calibration.yield_ref_size", "must be positive"));
        }
        if self.samples == 0 {
            return Err(Error::config("calibration.samples", "must be at least 1"));
        }
        if self.replicates == 0 {
            return Err(Error::config("calibration.replicates", "must be at least 1"));
        }
        if self.fields.is_empty() || self.fields.iter().any(|f| !TargetField::SIMULATED.contains(f)) {
            return Err(Error::config(
                "calibration.fields",
                "must be a non-empty subset of yield, output, profit, income",
            ));
        }
        Ok(())
    }

    /// Model parameters with the calibration lattice applied.
    pub fn model_params(&self, params: &ModelParams) -> ModelParams {
        let mut p = *params;
        if let Some([rows, cols]) = self.grid {
            p.geometry.rows = rows;
            p.geometry.cols = cols;
        }
        p
    }

    /// Sampling points mapped into the parameter box.
    pub fn points(&self) -> Result<Vec<YieldParams>> {
        let unit = sobol_sample(3, self.samples)?;
        Ok(scale_points(&unit, &self.ranges()).iter().map(|p| YieldParams::from_slice(p)).collect())
    }

    /// Index of the sampling point nearest to `truth` in unit-box
    /// coordinates, i.e. the Sobol cell that contains it.
    pub fn cell_of(&self, truth: &YieldParams) -> Result<usize> {
        let ranges = self.ranges();
        let to_unit = |p: [f64; 3]| -> [f64; 3] {
            let mut u = [0.0; 3];
            for d in 0..3 {
                let [lo, hi] = ranges[d];
                u[d] = if hi > lo { (p[d] - lo) / (hi - lo) } else { 0.0 };
            }
            u
        };
        let t = to_unit(truth.as_array());
        let pts = self.points()?;
        let dist = |p: &YieldParams| {
            let u = to_unit(p.as_array());
            (0..3).map(|d| (u[d] - t[d]).powi(2)).sum::<f64>()
        };
        let mut best = 0;
        for (i, p) in pts.iter().enumerate() {
            if dist(p) < dist(&pts[best]) {
                best = i;
            }
        }
        Ok(best)
    }
}

/// Model quantity compared against a target field.
pub fn model_value(report: &EconReport, field: TargetField) -> Option<f64> {
    match field {
        TargetField::Yield => Some(report.mean_yield),
        TargetField::Output => Some(report.revenue / report.farm_size),
        TargetField::Profit => Some(report.profit / report.farm_size),
        TargetField::Income => Some(report.income),
        TargetField::Costs => Some(report.costs / report.farm_size),
        TargetField::Labor => Some(report.labor / report.farm_size),
        TargetField::GrasslandShare => Some(report.grassland_share),
        TargetField::Cpe => Some(report.pesticide),
        TargetField::Subsidy => None,
    }
}

/// Replicate-mean report for each farm-size bin.
#[derive(Debug, Clone, PartialEq)]
pub struct BinReports(pub Vec<(f64, EconReport)>);

impl BinReports {
    pub fn get(&self, farm_size: f64) -> Option<&EconReport> {
        self.0.iter().find(|(l, _)| *l == farm_size).map(|(_, r)| r)
    }
}

/// Weighted sum of squared residuals over the target rows of `fields`.
pub fn loss(sim: &BinReports, targets: &TargetTable, fields: &[TargetField], norm: LossNorm) -> Result<f64> {
    let mut sse = 0.0;
    for row in targets.rows.iter().filter(|r| fields.contains(&r.field)) {
        let report = sim
            .get(row.farm_size)
            .ok_or_else(|| Error::domain(format!("no simulation for the {} ha bin", row.farm_size)))?;
        let value = model_value(report, row.field)
            .ok_or_else(|| Error::domain(format!("`{}` is not a model output", row.field)))?;
        let scale = match norm {
            LossNorm::Relative if row.value != 0.0 => row.value.abs(),
            _ => 1.0,
        };
        sse += row.weight * ((value - row.value) / scale).powi(2);
    }
    Ok(sse)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodnessOfFit {
    pub r_squared: f64,
    pub adjusted_r_squared: f64,
    pub observations: usize,
    pub parameters: usize,
}

/// Pooled R² over all target rows of `fields`. Each field is centred on its
/// own mean and scaled by its mean absolute observation so that fields with
/// different units contribute comparably.
pub fn goodness_of_fit(
    sim: &BinReports,
    targets: &TargetTable,
    fields: &[TargetField],
    parameters: usize,
) -> Result<GoodnessOfFit> {
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    let mut n = 0usize;
    for &field in fields {
        let rows: Vec<&TargetRow> = targets.field_rows(field).collect();
        if rows.is_empty() {
            continue;
        }
        let m = rows.len() as f64;
        let mean = rows.iter().map(|r| r.value).sum::<f64>() / m;
        let scale = rows.iter().map(|r| r.value.abs()).sum::<f64>() / m;
        let scale = if scale > 0.0 { scale } else { 1.0 };
        for r in rows {
            let report = sim
                .get(r.farm_size)
                .ok_or_else(|| Error::domain(format!("no simulation for the {} ha bin", r.farm_size)))?;
            let value = model_value(report, field)
                .ok_or_else(|| Error::domain(format!("`{field}` is not a model output")))?;
            ss_res += ((value - r.value) / scale).powi(2);
            ss_tot += ((r.value - mean) / scale).powi(2);
            n += 1;
        }
    }
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else if ss_res == 0.0 { 1.0 } else { f64::NEG_INFINITY };
    let adjusted = if n > parameters + 1 {
        1.0 - (1.0 - r2) * (n as f64 - 1.0) / (n as f64 - parameters as f64 - 1.0)
    } else {
        f64::NAN
    };
    Ok(GoodnessOfFit {
        r_squared: r2,
        adjusted_r_squared: adjusted,
        observations: n,
        parameters,
    })
}

/// Equilibrated ecology of every (bin, replicate). The calibrated yield
/// parameters do not enter the ecology, so one cache serves all sampling
/// points.
#[derive(Debug, Clone)]
pub struct EcologyCache {
    bins: Vec<(ResolvedFarm, Vec<ReplicateEcology>)>,
}

impl EcologyCache {
    pub fn build(
        bins: &[f64],
        params: &ModelParams,
        master_seed: u64,
        replicates: usize,
        mode: ExecMode,
    ) -> Result<Self> {
        params.validate()?;
        let farms: Vec<ResolvedFarm> = bins
            .iter()
            .map(|&l| FarmConfig::new(l).resolve(&params.scaling, &params.economics))
            .collect::<Result<_>>()?;
        let flat = exec::try_map_indexed(mode, farms.len() * replicates, |i| {
            let (b, k) = (i / replicates, i % replicates);
            replicate_ecology(&farms[b], params, replicate_seed(master_seed, k as u64), ExecMode::Sequential)
        })?;
        let mut it = flat.into_iter();
        let bins = farms
            .into_iter()
            .map(|f| (f, it.by_ref().take(replicates).collect()))
            .collect();
        Ok(Self { bins })
    }

    /// Replicate-mean reports under the given economic parameters.
    pub fn reports(&self, econ: &EconParams) -> Result<BinReports> {
        let mut out = Vec::with_capacity(self.bins.len());
        for (farm, reps) in &self.bins {
            let reports: Vec<EconReport> = reps
                .iter()
                .map(|e| replicate_account(farm, e, econ))
                .collect::<Result<_>>()?;
            out.push((farm.farm_size, EconReport::mean(&reports).expect("replicates > 0")));
        }
        Ok(BinReports(out))
    }
}

/// Replicate-mean reports computed by independent full simulations.
pub fn simulate_bins(
    bins: &[f64],
    params: &ModelParams,
    master_seed: u64,
    replicates: usize,
    mode: ExecMode,
) -> Result<BinReports> {
    let mut out = Vec::with_capacity(bins.len());
    for &l in bins {
        let sim = simulate(&FarmConfig::new(l), params, master_seed, replicates, mode)?;
        out.push((l, sim.report));
    }
    Ok(BinReports(out))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub index: usize,
    pub point: YieldParams,
    pub sse: f64,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub best: YieldParams,
    pub best_index: usize,
    pub best_loss: f64,
    pub fit: GoodnessOfFit,
    pub evaluated_points: usize,
    pub master_seed: u64,
    pub replicates: usize,
    pub centering: String,
    pub audit: Vec<AuditEntry>,
}

impl CalibrationResult {
    /// All evaluated points with columns `idx,y0,y1,Lref_y,sse`.
    pub fn audit_table(&self) -> Table {
        let mut t = Table::new(&["idx", "y0", "y1", "Lref_y", "sse"]);
        for a in &self.audit {
            let [y0, y1, lr] = a.point.as_array();
            t.push(vec![a.index.to_string(), num(y0), num(y1), num(lr), num(a.sse)]);
        }
        t
    }

    pub fn write_audit<W: Write>(&self, out: W) -> Result<()> {
        self.audit_table().write(out)
    }

    /// Lowest loss among the first `n` points, for `n = 1..=len`.
    pub fn best_loss_trace(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.audit
            .iter()
            .map(|a| {
                best = best.min(a.sse);
                best
            })
            .collect()
    }
}

/// Evaluate the loss at every sampling point and return the best one.
pub fn calibrate(
    settings: &CalibrationSettings,
    targets: &TargetTable,
    params: &ModelParams,
    master_seed: u64,
    mode: ExecMode,
) -> Result<CalibrationResult> {
    settings.validate()?;
    targets.validate()?;
    let bins = targets.bins(&settings.fields);
    if bins.is_empty() {
        return Err(Error::domain("the target table has no rows for the calibrated fields"));
    }
    let params = settings.model_params(params);
    let cache = EcologyCache::build(&bins, &params, master_seed, settings.replicates, mode)?;
    calibrate_cached(settings, targets, &params, &cache, master_seed, mode)
}

/// [`calibrate`] with a pre-built ecology cache.
pub fn calibrate_cached(
    settings: &CalibrationSettings,
    targets: &TargetTable,
    params: &ModelParams,
    cache: &EcologyCache,
    master_seed: u64,
    mode: ExecMode,
) -> Result<CalibrationResult> {
    let points = settings.points()?;
    let audit = exec::map_indexed(mode, points.len(), |j| {
        let point = points[j];
        let evaluated = cache
            .reports(&point.apply(&params.economics))
            .and_then(|sim| loss(&sim, targets, &settings.fields, settings.normalization));
        match evaluated {
            Ok(sse) if sse.is_finite() => AuditEntry { index: j, point, sse, note: None },
            Ok(sse) => AuditEntry {
                index: j,
                point,
                sse: f64::INFINITY,
                note: Some(format!("non-finite loss {sse}")),
            },
            Err(e) => AuditEntry {
                index: j,
                point,
                sse: f64::INFINITY,
                note: Some(e.to_string()),
            },
        }
    });
    let best_index = audit
        .iter()
        .filter(|a| a.sse.is_finite())
        .min_by(|a, b| a.sse.total_cmp(&b.sse).then(a.index.cmp(&b.index)))
        .map(|a| a.index)
        .ok_or(Error::CalibrationFailed(points.len()))?;
    let best = points[best_index];
    let sim = cache.reports(&best.apply(&params.economics))?;
    let fit = goodness_of_fit(&sim, targets, &settings.fields, 3)?;
    Ok(CalibrationResult {
        best,
        best_index,
        best_loss: audit[best_index].sse,
        fit,
        evaluated_points: points.len(),
        master_seed,
        replicates: settings.replicates,
        centering: "per-field".to_string(),
        audit,
    })
}

/// Target rows for the simulated fields, generated by the model itself.
/// `stddev` is the replicate standard deviation of each field.
pub fn synthesize_targets(
    bins: &[(f64, f64)],
    params: &ModelParams,
    master_seed: u64,
    replicates: usize,
    mode: ExecMode,
) -> Result<TargetTable> {
    let mut rows = Vec::new();
    for &(l, weight) in bins {
        let sim = simulate(&FarmConfig::new(l), params, master_seed, replicates, mode)?;
        for field in TargetField::SIMULATED {
            let values: Vec<f64> = sim
                .replicates
                .iter()
                .map(|o| model_value(&o.report, field).expect("simulated field"))
                .collect();
            let value = model_value(&sim.report, field).expect("simulated field");
            let n = values.len() as f64;
            let stddev = if values.len() > 1 {
                (values.iter().map(|v| (v - value).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            rows.push(TargetRow {
                farm_size: l,
                field,
                value,
                stddev,
                weight,
            });
        }
    }
    TargetTable::new(rows)
}

/// A complete synthetic target table: model-generated simulated fields and
/// closed-form exogenous fields, each multiplied by `1 + noise·u` with `u`
/// uniform in [-1, 1] drawn from a stream keyed by `noise_seed`. `stddev` is
/// set to 5 % of the value.
pub fn synthesize_fadn_style(
    bins: &[(f64, f64)],
    params: &ModelParams,
    master_seed: u64,
    replicates: usize,
    noise: f64,
    noise_seed: u64,
    mode: ExecMode,
) -> Result<TargetTable> {
    let simulated = synthesize_targets(bins, params, master_seed, replicates, mode)?;
    let mut rng = StreamRng::from_seed(noise_seed, label::TARGET_NOISE);
    let mut rows = Vec::new();
    for &(l, weight) in bins {
        let mut values: Vec<(TargetField, f64)> = TargetField::SIMULATED
            .iter()
            .map(|&f| (f, simulated.get(f, l).expect("synthesized").value))
            .collect();
        values.extend(exogenous::exogenous_rows(l, params)?);
        for (field, v) in values {
            let u = 2.0 * rng.next_f64() - 1.0;
            let value = v * (1.0 + noise * u);
            rows.push(TargetRow {
                farm_size: l,
                field,
                value,
                stddev: 0.05 * value.abs(),
                weight,
            });
        }
    }
    TargetTable::new(rows)
}

/// Synthetic FADN-style targets shipped with the crate.
pub fn bundled_targets() -> TargetTable {
    TargetTable::read_csv(include_str!("../../data/fadn_targets.csv").as_bytes())
        .expect("bundled target table is valid")
}

/// Farm-size bins and weights of the bundled targets.
pub const BUNDLED_BINS: [(f64, f64); 8] = [
    (3.0, 0.30),
    (7.5, 0.20),
    (15.0, 0.15),
    (25.0, 0.12),
    (40.0, 0.09),
    (75.0, 0.07),
    (150.0, 0.05),
    (400.0, 0.02),
];

#[cfg(test)]
mod tests {
    use super::*;

    fn report(l: f64, y: f64) -> EconReport {
        EconReport {
            farm_size: l,
            field_size: 1.0,
            grassland_share: 0.0,
            hedgerow_share: 0.0,
            pesticide: 0.0,
            mean_yield: y,
            production: 0.0,
            revenue: 0.0,
            costs: 0.0,
            profit: 0.0,
            labor: 1.0,
            income: 0.0,
            productive_area: l,
            pesticide_cost: 0.0,
        }
    }

    fn yield_row(l: f64, v: f64) -> TargetRow {
        TargetRow {
            farm_size: l,
            field: TargetField::Yield,
            value: v,
            stddev: 1.0,
            weight: 1.0,
        }
    }

    #[test]
    fn loss_definitions() {
        let sim = BinReports(vec![(10.0, report(10.0, 52.0)), (20.0, report(20.0, 60.0))]);
        let one = TargetTable::new(vec![yield_row(10.0, 50.0)]).unwrap();
        let f = [TargetField::Yield];
        assert_eq!(loss(&sim, &one, &f, LossNorm::Absolute).unwrap(), 4.0);
        assert!((loss(&sim, &one, &f, LossNorm::Relative).unwrap() - 0.0016).abs() < 1e-15);
        let exact = TargetTable::new(vec![yield_row(10.0, 52.0), yield_row(20.0, 60.0)]).unwrap();
        assert_eq!(loss(&sim, &exact, &f, LossNorm::Relative).unwrap(), 0.0);
        let fit = goodness_of_fit(&sim, &exact, &f, 0).unwrap();
        assert_eq!(fit.r_squared, 1.0);
        let mut rev = exact.clone();
        rev.rows.reverse();
        let two = TargetTable::new(vec![yield_row(10.0, 50.0), yield_row(20.0, 61.0)]).unwrap();
        let mut two_rev = two.clone();
        two_rev.rows.reverse();
        assert_eq!(
            loss(&sim, &two, &f, LossNorm::Relative).unwrap(),
            loss(&sim, &two_rev, &f, LossNorm::Relative).unwrap()
        );
        let missing = TargetTable::new(vec![yield_row(30.0, 50.0)]).unwrap();
        assert!(loss(&sim, &missing, &f, LossNorm::Relative).is_err());
    }

    #[test]
    fn settings_validation() {
        assert!(CalibrationSettings::default().validate().is_ok());
        let bad = CalibrationSettings {
            base_yield: [70.0, 30.0],
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Config { .. })));
        let bad = CalibrationSettings {
            fields: vec![TargetField::Labor],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn bundled_table_is_complete() {
        let t = bundled_targets();
        for field in TargetField::ALL {
            assert_eq!(t.field_rows(field).count(), BUNDLED_BINS.len(), "{field}");
        }
    }
}
