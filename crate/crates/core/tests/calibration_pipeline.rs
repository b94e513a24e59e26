use farmscape::calibration::{
    calibrate, calibrate_cached, goodness_of_fit, simulate_bins, synthesize_targets, CalibrationSettings,
    EcologyCache, TargetField, TargetTable, YieldParams,
};
use farmscape::landscape::Geometry;
use farmscape::model::ModelParams;
use farmscape::ExecMode;

const BINS: [(f64, f64); 4] = [(5.0, 0.3), (20.0, 0.3), (80.0, 0.25), (300.0, 0.15)];

fn small_params() -> ModelParams {
    ModelParams {
        geometry: Geometry {
            rows: 40,
            cols: 40,
            cell_area: 0.01,
        },
        ..ModelParams::default()
    }
}

fn settings(samples: usize) -> CalibrationSettings {
    CalibrationSettings {
        samples,
        replicates: 3,
        ..CalibrationSettings::default()
    }
}

fn self_targets(params: &ModelParams) -> TargetTable {
    synthesize_targets(&BINS, params, 9, 3, ExecMode::Parallel).unwrap()
}

#[test]
fn best_loss_is_non_increasing_in_points() {
    let params = small_params();
    let r = calibrate(&settings(64), &self_targets(&params), &params, 9, ExecMode::Parallel).unwrap();
    let trace = r.best_loss_trace();
    assert_eq!(trace.len(), 64);
    assert!(trace.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(*trace.last().unwrap(), r.best_loss);
}

#[test]
fn cached_and_direct_routes_agree() {
    let params = small_params();
    let bins: Vec<f64> = BINS.iter().map(|b| b.0).collect();
    let cache = EcologyCache::build(&bins, &params, 4, 3, ExecMode::Parallel).unwrap();
    for point in [[40.0, 10.0, 5.0], [60.0, 30.0, 80.0]] {
        let mut p = params;
        p.economics = YieldParams::from_slice(&point).apply(&p.economics);
        let cached = cache.reports(&p.economics).unwrap();
        let direct = simulate_bins(&bins, &p, 4, 3, ExecMode::Sequential).unwrap();
        for ((l1, a), (l2, b)) in cached.0.iter().zip(direct.0.iter()) {
            assert_eq!(l1, l2);
            assert!((a.income - b.income).abs() <= 1e-9 * a.income.abs().max(1.0));
            assert!((a.mean_yield - b.mean_yield).abs() <= 1e-12 * a.mean_yield);
        }
    }
}

#[test]
fn calibration_is_deterministic_across_modes() {
    let params = small_params();
    let targets = self_targets(&params);
    let a = calibrate(&settings(32), &targets, &params, 2, ExecMode::Sequential).unwrap();
    let b = calibrate(&settings(32), &targets, &params, 2, ExecMode::Parallel).unwrap();
    assert_eq!(a, b);
    let mut csv_a = Vec::new();
    let mut csv_b = Vec::new();
    a.write_audit(&mut csv_a).unwrap();
    b.write_audit(&mut csv_b).unwrap();
    assert_eq!(csv_a, csv_b);
}

#[test]
fn perfect_fit_at_the_generating_point() {
    let params = small_params();
    let targets = self_targets(&params);
    let bins: Vec<f64> = BINS.iter().map(|b| b.0).collect();
    let sim = simulate_bins(&bins, &params, 9, 3, ExecMode::Parallel).unwrap();
    let fit = goodness_of_fit(&sim, &targets, &TargetField::SIMULATED, 3).unwrap();
    assert!((fit.r_squared - 1.0).abs() < 1e-12);
    assert_eq!(fit.observations, 16);
}

#[test]
fn recovers_the_sampling_cell_of_the_truth() {
    let params = small_params();
    let targets = self_targets(&params);
    let s = settings(128);
    let bins = targets.bins(&s.fields);
    let cache = EcologyCache::build(&bins, &params, 9, 3, ExecMode::Parallel).unwrap();
    let r = calibrate_cached(&s, &targets, &params, &cache, 9, ExecMode::Parallel).unwrap();
    let truth = YieldParams::of(&params.economics);
    assert_eq!(r.best_index, s.cell_of(&truth).unwrap());
}

#[test]
fn target_csv_round_trip() {
    let targets = self_targets(&small_params());
    let mut buf = Vec::new();
    targets.write_csv(&mut buf).unwrap();
    let back = TargetTable::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back.rows.len(), targets.rows.len());
    let mut again = Vec::new();
    back.write_csv(&mut again).unwrap();
    assert_eq!(again, buf);
}

#[test]
fn doubling_replicates_moves_loss_less_than_its_standard_error() {
    let params = small_params();
    let targets = self_targets(&params);
    let bins = targets.bins(&TargetField::SIMULATED);
    let point = YieldParams::from_slice(&[45.0, 25.0, 40.0]).apply(&params.economics);
    let norm = farmscape::calibration::LossNorm::Relative;
    let loss_at = |seed: u64, reps: usize| {
        let cache = EcologyCache::build(&bins, &params, seed, reps, ExecMode::Parallel).unwrap();
        farmscape::calibration::loss(&cache.reports(&point).unwrap(), &targets, &TargetField::SIMULATED, norm).unwrap()
    };
    let n = 4;
    let spread: Vec<f64> = (100..110).map(|s| loss_at(s, n)).collect();
    let mean = spread.iter().sum::<f64>() / spread.len() as f64;
    let se = (spread.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (spread.len() - 1) as f64).sqrt();
    let diff = (loss_at(100, 2 * n) - loss_at(100, n)).abs();
    assert!(diff < se, "loss moved by {diff}, standard error {se}");
}
