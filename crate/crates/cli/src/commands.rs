use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use anyhow::{bail, Context as _, Result};
use log::info;
use serde::Serialize;

use farmscape::calibration::{
    bundled_targets, calibrate, fit_exogenous, model_value, simulate_bins, CalibrationResult, ExogenousFit,
    TargetField, TargetTable,
};
use farmscape::config::RunConfig;
use farmscape::ecology::run_to_equilibrium;
use farmscape::landscape::{write_raster, LandscapeStats};
use farmscape::model::{build_landscape, replicate_seed, simulate, FarmConfig, HedgerowTarget, ResolvedFarm};
use farmscape::scenarios::{
    phase_diagram, policy_grid, sensitivity, sweep_pesticide, Context, Manifest, ManifestEntry, SensitivityId,
};
use farmscape::table::{num, opt_num, write_json, Table};
use farmscape::ExecMode;

use crate::{Cli, Command, FarmArgs};

const CONFIG_FILE: &str = "config.toml";

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = resolve_config(cli)?;
    let jobs = cli.common.jobs.unwrap_or(0);
    let mode = if jobs == 1 { ExecMode::Sequential } else { ExecMode::Parallel };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .context("starting the worker pool")?;
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let (name, written) = pool.install(|| dispatch(&cli.command, &cfg, mode))?;

    cfg.write(&cfg.out.join(CONFIG_FILE))?;
    let mut manifest = Manifest::load_or_default(&cfg.out)?;
    for (file, replicates) in written {
        manifest.insert(
            file,
            ManifestEntry {
                command: name.to_string(),
                profile: cfg.profile.name().to_string(),
                seed: cfg.seed,
                replicates,
                config: CONFIG_FILE.to_string(),
            },
        );
    }
    manifest.save(&cfg.out)?;
    Ok(())
}

fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let c = &cli.common;
    let mut cfg = match &c.config {
        Some(path) => {
            RunConfig::load(path, c.profile).with_context(|| format!("loading {}", path.display()))?
        }
        None => RunConfig::profile(c.profile.unwrap_or_default()),
    };
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(n) = c.replicates {
        cfg.replicates = n;
        if matches!(cli.command, Command::Calibrate { .. } | Command::Sensitivity { .. }) {
            cfg.calibration.replicates = n;
        }
    }
    if let Some(out) = &c.out {
        cfg.out = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Output files with the replicate count behind each.
type Written = Vec<(String, usize)>;

fn dispatch(cmd: &Command, cfg: &RunConfig, mode: ExecMode) -> Result<(&'static str, Written)> {
    let out = cfg.out.as_path();
    let ctx = Context::from_config(cfg, mode);
    let reps = cfg.replicates;
    Ok(match cmd {
        Command::GenerateLandscape { farm } => ("generate-landscape", generate_landscape(farm, cfg, out)?),
        Command::Simulate { farm, write_field } => ("simulate", simulate_farm(farm, cfg, *write_field, mode, out)?),
        Command::SweepFig3 => {
            let r = sweep_pesticide(&ctx)?;
            r.to_table("fig3").write_path(&out.join("fig3.csv"))?;
            ("sweep-fig3", vec![("fig3.csv".into(), reps)])
        }
        Command::PolicyGrid => {
            let r = policy_grid(&ctx)?;
            r.to_table("fig4").write_path(&out.join("fig4.csv"))?;
            ("policy-grid", vec![("fig4.csv".into(), reps)])
        }
        Command::PhaseDiagram => {
            let r = phase_diagram(&ctx)?;
            r.to_table("fig5").write_path(&out.join("fig5.csv"))?;
            ("phase-diagram", vec![("fig5.csv".into(), reps)])
        }
        Command::Calibrate { targets } => ("calibrate", run_calibration(targets.as_deref(), cfg, mode, out)?),
        Command::Sensitivity { id, targets } => {
            let ids = if id == "all" { SensitivityId::ALL.to_vec() } else { vec![id.parse()?] };
            let targets = load_targets(targets.as_deref())?;
            let mut written = Vec::new();
            for id in ids {
                info!("sensitivity scenario {id}");
                let r = sensitivity(&ctx, id, &cfg.calibration, &targets)?;
                let base = format!("sens_{id}");
                r.policy_table().write_path(&out.join(format!("{base}.csv")))?;
                r.sweep_table().write_path(&out.join(format!("{base}_sweep.csv")))?;
                write_json(&calibration_summary(&r.calibration, None), &out.join(format!("{base}_calibration.json")))?;
                written.push((format!("{base}.csv"), reps));
                written.push((format!("{base}_sweep.csv"), reps));
                written.push((format!("{base}_calibration.json"), cfg.calibration.replicates));
            }
            ("sensitivity", written)
        }
    })
}

fn farm_config(args: &FarmArgs) -> Result<FarmConfig> {
    let Some(l) = args.farm_size else {
        bail!("--farm-size is required");
    };
    let mut farm = FarmConfig::new(l).with_pesticide_change(args.pesticide_change);
    if let Some(s) = args.field_size {
        farm = farm.with_field_size(s);
    }
    if let Some(g) = args.grassland {
        farm = farm.with_grassland(g);
    }
    if let Some(h) = args.hedgerow {
        farm = farm.with_hedgerow(HedgerowTarget::Share(h));
    }
    if let Some(f) = args.margin_fraction {
        farm = farm.with_hedgerow(HedgerowTarget::MarginFraction(f));
    }
    if let Some(p) = args.pesticide {
        farm = farm.with_pesticide(p);
    }
    Ok(farm)
}

/// A farm size fixes everything through the scaling laws; without one the
/// field size is required and the shares default to zero.
fn landscape_farm(args: &FarmArgs, cfg: &RunConfig) -> Result<ResolvedFarm> {
    if args.farm_size.is_some() {
        return Ok(farm_config(args)?.resolve(&cfg.scaling, &cfg.economics)?);
    }
    let Some(field_size) = args.field_size else {
        bail!("either --farm-size or --field-size is required");
    };
    let hedgerow = match args.margin_fraction {
        Some(f) => HedgerowTarget::MarginFraction(f),
        None => HedgerowTarget::Share(args.hedgerow.unwrap_or(0.0)),
    };
    Ok(ResolvedFarm {
        farm_size: cfg.landscape.area(),
        field_size,
        grassland_share: args.grassland.unwrap_or(0.0),
        hedgerow,
        pesticide: args.pesticide.unwrap_or(0.0),
    })
}

#[derive(Serialize)]
struct LandscapeSummary {
    farm: ResolvedFarm,
    seed: u64,
    rows: usize,
    cols: usize,
    cell_area: f64,
    stats: LandscapeStats,
}

fn generate_landscape(args: &FarmArgs, cfg: &RunConfig, out: &Path) -> Result<Written> {
    let farm = landscape_farm(args, cfg)?;
    let seed = replicate_seed(cfg.seed, 0);
    let land = build_landscape(&farm, cfg.landscape, seed)?;
    let mut w = BufWriter::new(File::create(out.join("landscape.lsc"))?);
    write_raster(&land, &mut w)?;
    let summary = LandscapeSummary {
        farm,
        seed,
        rows: cfg.landscape.rows,
        cols: cfg.landscape.cols,
        cell_area: cfg.landscape.cell_area,
        stats: land.stats(),
    };
    write_json(&summary, &out.join("landscape.json"))?;
    Ok(vec![("landscape.lsc".into(), 1), ("landscape.json".into(), 1)])
}

fn simulate_farm(args: &FarmArgs, cfg: &RunConfig, write_field: bool, mode: ExecMode, out: &Path) -> Result<Written> {
    let farm = farm_config(args)?;
    let params = cfg.model_params();
    let sim = simulate(&farm, &params, cfg.seed, cfg.replicates, mode)?;

    let mut header = vec!["replicate", "seed", "field_count", "ne_density", "ne_density_crop", "mean_damage"];
    header.extend(farmscape::economics::EconReport::HEADER);
    let mut t = Table::new(&header);
    for (k, o) in sim.replicates.iter().enumerate() {
        let e = &o.ecology;
        let mut row = vec![
            k.to_string(),
            e.seed.to_string(),
            e.field_count.to_string(),
            num(e.density),
            num(e.crop_density),
            num(e.mean_damage),
        ];
        row.extend(o.report.csv_row());
        t.push(row);
    }
    let mean_damage = sim.replicates.iter().map(|o| o.ecology.mean_damage).sum::<f64>() / sim.replicates.len() as f64;
    let mut row = vec![
        "mean".to_string(),
        String::new(),
        String::new(),
        num(sim.density),
        num(sim.crop_density),
        num(mean_damage),
    ];
    row.extend(sim.report.csv_row());
    t.push(row);
    t.write_path(&out.join("simulate.csv"))?;
    write_json(&sim, &out.join("simulate.json"))?;
    let mut written = vec![("simulate.csv".to_string(), cfg.replicates), ("simulate.json".to_string(), cfg.replicates)];

    if write_field {
        let land = build_landscape(&sim.farm, params.geometry, replicate_seed(cfg.seed, 0))?;
        let (field, _) = run_to_equilibrium(&land, sim.farm.pesticide, &params.ecology, mode)?;
        let mut w = BufWriter::new(File::create(out.join("ne_field.csv"))?);
        field.write_csv(&land, &mut w)?;
        written.push(("ne_field.csv".into(), 1));
    }
    Ok(written)
}

fn load_targets(path: Option<&Path>) -> Result<TargetTable> {
    match path {
        Some(p) => {
            let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
            TargetTable::read_csv(f).with_context(|| format!("reading {}", p.display()))
        }
        None => Ok(bundled_targets()),
    }
}

#[derive(Serialize)]
struct CalibrationSummary<'a> {
    y0: f64,
    y1: f64,
    yield_ref_size: f64,
    best_index: usize,
    best_loss: f64,
    r_squared: f64,
    adjusted_r_squared: f64,
    observations: usize,
    evaluated_points: usize,
    failed_points: usize,
    master_seed: u64,
    replicates: usize,
    centering: &'a str,
    exogenous: Option<ExogenousFit>,
}

fn calibration_summary(r: &CalibrationResult, exogenous: Option<ExogenousFit>) -> CalibrationSummary<'_> {
    let [y0, y1, lref] = r.best.as_array();
    CalibrationSummary {
        y0,
        y1,
        yield_ref_size: lref,
        best_index: r.best_index,
        best_loss: r.best_loss,
        r_squared: r.fit.r_squared,
        adjusted_r_squared: r.fit.adjusted_r_squared,
        observations: r.fit.observations,
        evaluated_points: r.evaluated_points,
        failed_points: r.audit.iter().filter(|a| a.note.is_some()).count(),
        master_seed: r.master_seed,
        replicates: r.replicates,
        centering: &r.centering,
        exogenous,
    }
}

fn run_calibration(targets: Option<&Path>, cfg: &RunConfig, mode: ExecMode, out: &Path) -> Result<Written> {
    let targets = load_targets(targets)?;
    let params = cfg.model_params();
    let settings = &cfg.calibration;
    let result = calibrate(settings, &targets, &params, cfg.seed, mode)?;
    info!(
        "best point {} of {}: loss {}, R² {}",
        result.best_index, result.evaluated_points, result.best_loss, result.fit.r_squared
    );
    let exogenous = match fit_exogenous(&targets, &params) {
        Ok(fit) => Some(fit),
        Err(e) => {
            info!("exogenous curves not fitted: {e}");
            None
        }
    };
    let mut w = BufWriter::new(File::create(out.join("calibration_audit.csv"))?);
    result.write_audit(&mut w)?;
    write_json(&calibration_summary(&result, exogenous), &out.join("calibration.json"))?;

    // Observed targets beside the model at the optimum.
    let mut best = settings.model_params(&params);
    best.economics = result.best.apply(&best.economics);
    let sim = simulate_bins(&targets.bins(&TargetField::ALL), &best, cfg.seed, settings.replicates, mode)?;
    let mut t = Table::new(&["farm_size_ha", "field", "observed", "stddev", "weight", "model"]);
    for field in TargetField::ALL {
        for r in targets.field_rows(field) {
            let model = sim.get(r.farm_size).and_then(|rep| model_value(rep, field));
            t.push(vec![num(r.farm_size), field.to_string(), num(r.value), num(r.stddev), num(r.weight), opt_num(model)]);
        }
    }
    t.write_path(&out.join("calibration_fit.csv"))?;
    let n = settings.replicates;
    Ok(vec![
        ("calibration_audit.csv".into(), n),
        ("calibration.json".into(), n),
        ("calibration_fit.csv".into(), n),
    ])
}
