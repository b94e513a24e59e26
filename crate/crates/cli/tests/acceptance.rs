//! Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero when any
//! criterion fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use farmscape::calibration::{bundled_targets, calibrate, synthesize_targets, YieldParams, BUNDLED_BINS};
use farmscape::config::{Profile, RunConfig};
use farmscape::ecology::{build_kernel, mortality_field, run_to_equilibrium, summer_growth, EcologyParams};
use farmscape::landscape::{scaling_laws, Cover, Geometry, Landscape, LandscapeParams, ScalingLaw};
use farmscape::rng::StreamRng;
use farmscape::scenarios::{phase_diagram, policy_grid, sweep_pesticide, Context, Layout, SnhPolicy};
use farmscape::ExecMode;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn desk() -> RunConfig {
    RunConfig::profile(Profile::Desk)
}

fn landscape_exactness() -> Outcome {
    let start = Instant::now();
    let geometry = Geometry::default();
    let tol = geometry.cell_area / geometry.area() + 1e-12;
    let law = ScalingLaw::default();
    let mut rng = StreamRng::new(0xACCE);
    let (mut worst, mut bad_margin, mut errors) = (0.0f64, 0usize, 0usize);
    for _ in 0..50 {
        let farm_size = 10f64.powf(rng.next_f64() * 3.3);
        let s = scaling_laws(farm_size, &law).unwrap();
        let p = LandscapeParams {
            geometry,
            field_size: s.field_size,
            hedgerow_share: s.hedgerow_share,
            grassland_share: s.grassland_share,
            seed: rng.next_u64(),
        };
        let Ok(land) = Landscape::generate(&p) else {
            errors += 1;
            continue;
        };
        let st = land.stats();
        worst = worst.max((st.realized_h - p.hedgerow_share).abs()).max((st.realized_g - p.grassland_share).abs());
        let ids = land.field_id();
        for (i, c) in land.cover().iter().enumerate() {
            if *c == Cover::Hedgerow && ids.neighbors4(i).iter().all(|&j| ids[j] == ids[i]) {
                bad_margin += 1;
            }
        }
    }
    let t = start.elapsed();
    outcome(
        errors == 0 && worst <= tol && bad_margin == 0 && t < Duration::from_secs(30),
        format!("max share error {worst:.3e} (limit {tol:.3e}), off-margin hedgerow cells {bad_margin}, generation errors {errors}, {t:.1?}"),
    )
}

fn kernel_count() -> Outcome {
    let r2 = 0.2 / std::f64::consts::PI / 0.01;
    let mut enumerated = 0;
    for dr in -10i32..=10 {
        for dc in -10i32..=10 {
            if f64::from(dr * dr + dc * dc) <= r2 {
                enumerated += 1;
            }
        }
    }
    let k = build_kernel(0.2, 0.01).unwrap().cell_count();
    outcome(k == 21 && enumerated == 21, format!("kernel {k} cells, enumeration {enumerated}"))
}

fn closed_form_vs_euler() -> Outcome {
    let mut rng = StreamRng::new(0xE1E1);
    let (r, days, dt) = (0.01, 180.0, 0.05);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let k = 10f64.powf(rng.next_f64() * 4.0);
        let n0 = k * (1e-3 + 1.5 * rng.next_f64());
        let m = r * rng.next_f64();
        let exact = summer_growth(n0, k, m, r, days).unwrap();
        let mut n = n0;
        for _ in 0..(days / dt).round() as usize {
            n += dt * (r * n * (1.0 - n / k) - m * n);
        }
        worst = worst.max(rel(exact, n));
    }
    outcome(worst < 1e-3, format!("max relative error {worst:.3e} over 1000 triples"))
}

fn homogeneous_oracle() -> Outcome {
    let p = EcologyParams::default();
    let geometry = Geometry {
        rows: 30,
        cols: 30,
        cell_area: 0.01,
    };
    let kernel = 21.0;
    let scalar = |k: f64, m: f64, s: f64| {
        let mut n = p.initial_fraction * k;
        for year in 0..p.years {
            n = summer_growth(n, k, m, p.growth_rate, p.season_days).unwrap();
            if year + 1 < p.years {
                n *= s;
            }
        }
        n
    };
    let mut worst = 0.0f64;
    for (cover, pi) in [(Cover::Grassland, 0.0), (Cover::Hedgerow, 120.0), (Cover::Crop, 0.0), (Cover::Crop, 80.0)] {
        let land = Landscape::uniform(geometry, cover);
        let (field, _) = run_to_equilibrium(&land, pi, &p, ExecMode::Parallel).unwrap();
        let want = if cover.is_snh() {
            scalar(kernel * p.snh_capacity * 0.01, 0.0, kernel / (kernel + p.overwinter_ref))
        } else {
            let t = kernel * pi;
            let m = if t > 0.0 { (1.0 - p.selectivity) * p.growth_rate * t / (t + p.pesticide_ref) } else { 0.0 };
            scalar(kernel * p.crop_capacity * 0.01 / (1.0 + pi / p.pesticide_ref), m, 0.0)
        };
        for &n in field.abundance.iter() {
            worst = worst.max(rel(n, want));
        }
    }
    outcome(worst <= 1e-9, format!("max relative deviation {worst:.3e} on 4 uniform landscapes"))
}

fn fig3() -> Outcome {
    let start = Instant::now();
    let ctx = Context::from_config(&desk(), ExecMode::Parallel);
    let res = match sweep_pesticide(&ctx) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let sizes = &ctx.settings.sweep_field_sizes;
    let mut monotone = true;
    let mut hedge_first = true;
    for &s in sizes {
        for layout in [Layout::Hedgerow, Layout::Grassland] {
            let c = res.curve(s, layout);
            monotone &= c.windows(2).all(|w| w[1].density <= w[0].density);
        }
        hedge_first &= res.curve(s, Layout::Hedgerow)[0].density >= res.curve(s, Layout::Grassland)[0].density;
    }
    let stars: Vec<Option<f64>> = sizes.iter().map(|&s| res.crossing_for(s)).collect();
    let ordered = stars.iter().all(Option::is_some) && stars.windows(2).all(|w| w[0] <= w[1]);
    let t = start.elapsed();
    let stars_txt: Vec<String> = sizes
        .iter()
        .zip(&stars)
        .map(|(s, p)| format!("S={s}: {}", p.map_or("none".into(), |v| format!("{v:.2}"))))
        .collect();
    outcome(
        monotone && hedge_first && ordered && t < Duration::from_secs(300),
        format!(
            "non-increasing {monotone}, hedgerow>=grassland at pi=0 {hedge_first}, pi* non-decreasing {ordered} ({}), {t:.1?}",
            stars_txt.join(", ")
        ),
    )
}

fn fig4() -> Outcome {
    let ctx = Context::from_config(&desk(), ExecMode::Parallel);
    let res = match policy_grid(&ctx) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let small = res.get(10.0, -1.0, SnhPolicy::None).and_then(|r| r.income_change);
    let large: Vec<Option<f64>> = SnhPolicy::ALL
        .iter()
        .map(|&p| res.get(1000.0, -1.0, p).and_then(|r| r.income_change))
        .collect();
    let small_ok = small.is_some_and(|v| (5.0..=15.0).contains(&v));
    let large_ok = large.iter().all(|v| v.is_some_and(|v| v < 0.0));
    let fmt = |v: &Option<f64>| v.map_or("n/a".into(), |v| format!("{v:+.2}%"));
    outcome(
        small_ok && large_ok,
        format!(
            "10 ha no pesticide {} (want [+5%, +15%]); 1000 ha no pesticide {} (want all < 0)",
            fmt(&small),
            large.iter().map(fmt).collect::<Vec<_>>().join(" / ")
        ),
    )
}

fn fig5() -> Outcome {
    let start = Instant::now();
    let ctx = Context::from_config(&desk(), ExecMode::Parallel);
    let res = match phase_diagram(&ctx) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let sizes = &ctx.settings.phase_farm_sizes;
    let best = |l: f64| res.optimum(l).and_then(|r| r.income_change);
    let largest = sizes.iter().copied().fold(f64::MIN, f64::max);
    let checks = [
        (5.0, 10.0, 20.0),
        (50.0, 0.0, 10.0),
        (largest, -10.0, 0.0),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (l, lo, hi) in checks {
        let v = best(l);
        let ok = v.is_some_and(|v| (lo..=hi).contains(&v));
        pass &= ok;
        parts.push(format!(
            "L={l:.0}: {} (want [{lo:+}%, {hi:+}%]) {}",
            v.map_or("n/a".into(), |v| format!("{v:+.2}%")),
            if ok { "ok" } else { "out of range" }
        ));
    }
    let t = start.elapsed();
    pass &= t < Duration::from_secs(900);
    outcome(pass, format!("{}; {t:.1?}", parts.join("; ")))
}

fn calibration() -> Outcome {
    let cfg = desk();
    let params = cfg.model_params();
    let settings = &cfg.calibration;
    let truth = YieldParams::from_slice(&[51.0, 18.0, 25.0]);
    let mut gen = params;
    gen.economics = truth.apply(&gen.economics);
    let cal_params = settings.model_params(&gen);
    let run = || -> farmscape::Result<(usize, usize, f64)> {
        let targets = synthesize_targets(&BUNDLED_BINS, &cal_params, cfg.seed, settings.replicates, ExecMode::Parallel)?;
        let own = calibrate(settings, &targets, &gen, cfg.seed, ExecMode::Parallel)?;
        let cell = settings.cell_of(&truth)?;
        let bundled = calibrate(settings, &bundled_targets(), &params, cfg.seed, ExecMode::Parallel)?;
        Ok((own.best_index, cell, bundled.fit.r_squared))
    };
    match run() {
        Ok((found, cell, r2)) => outcome(
            found == cell && r2 >= 0.95,
            format!("recovered point {found}, truth cell {cell}; R² on bundled targets {r2:.4} (want >= 0.95)"),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn sensitivity_directionality() -> Outcome {
    let base = EcologyParams::default();
    let half_q = EcologyParams { selectivity: 0.5, ..base };
    let wider = EcologyParams { overwinter_ref: 1.0, ..base };
    let stronger = EcologyParams { pesticide_ref: 160.0, ..base };
    let geometry = Geometry {
        rows: 100,
        cols: 100,
        cell_area: 0.01,
    };
    let kernel = build_kernel(base.movement_area, geometry.cell_area).unwrap();
    let law = ScalingLaw::default();
    let (mut halves, mut lowers, mut raises, mut tested) = (true, true, true, 0);
    for (i, &l) in [3.0, 10.0, 30.0, 100.0, 300.0, 1000.0].iter().enumerate() {
        let s = scaling_laws(l, &law).unwrap();
        let land = Landscape::generate(&LandscapeParams {
            geometry,
            field_size: s.field_size,
            hedgerow_share: s.hedgerow_share,
            grassland_share: s.grassland_share,
            seed: 100 + i as u64,
        })
        .unwrap();
        for pi in [20.0, 80.0, 150.0] {
            let m0 = mortality_field(&land, &kernel, pi, &base, ExecMode::Parallel);
            let m1 = mortality_field(&land, &kernel, pi, &half_q, ExecMode::Parallel);
            halves &= m0.iter().zip(m1.iter()).all(|(a, b)| *b == 0.5 * a);
            let d = |p: &EcologyParams| run_to_equilibrium(&land, pi, p, ExecMode::Parallel).unwrap().1.mean_density_m2;
            let d0 = d(&base);
            lowers &= d(&wider) < d0;
            raises &= d(&stronger) > d0;
            tested += 1;
        }
    }
    outcome(
        halves && lowers && raises,
        format!("{tested} landscape/pesticide cases: q=0.5 halves m {halves}, sn_ref=1 lowers density {lowers}, pi_ref=160 raises density {raises}"),
    )
}

const SMALL_CONFIG: &str = r#"
replicates = 2

[landscape]
rows = 50
cols = 50

[calibration]
samples = 16
replicates = 2
grid = [40, 40]

[scenarios]
pesticide_grid = [0, 50, 100]
sweep_field_sizes = [1, 4]
policy_farm_sizes = [10, 500]
phase_farm_sizes = [5, 50]
phase_margin_fractions = [0, 0.5, 1]
"#;

fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

fn cli_run(cwd: &Path, args: &[&str], jobs: &str) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let out = cwd.join("out");
    let _ = std::fs::remove_dir_all(&out);
    let status = Command::new(env!("CARGO_BIN_EXE_farmscape"))
        .current_dir(cwd)
        .args(args)
        .args(["--config", "c.toml", "--seed", "7", "--out", "out", "--jobs", jobs])
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&status.stderr).trim()));
    }
    Ok(read_dir(&out))
}

fn reproducibility() -> Outcome {
    let commands: [&[&str]; 7] = [
        &["generate-landscape", "--farm-size", "100"],
        &["simulate", "--farm-size", "40", "--write-field"],
        &["sweep-fig3"],
        &["policy-grid"],
        &["phase-diagram"],
        &["calibrate"],
        &["sensitivity", "--id", "q_half"],
    ];
    let dirs: Vec<tempfile::TempDir> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    for d in &dirs {
        std::fs::write(d.path().join("c.toml"), SMALL_CONFIG).unwrap();
    }
    let mut files = 0;
    let mut problems = Vec::new();
    for args in commands {
        let runs = [
            cli_run(dirs[0].path(), args, "1"),
            cli_run(dirs[1].path(), args, "1"),
            cli_run(dirs[2].path(), args, "4"),
        ];
        match runs {
            [Ok(a), Ok(b), Ok(c)] => {
                files += a.len();
                if a != b || a != c {
                    problems.push(format!("{} differs", args[0]));
                }
            }
            [a, b, c] => {
                for e in [a, b, c].into_iter().filter_map(Result::err).take(1) {
                    problems.push(e);
                }
            }
        }
    }
    outcome(
        problems.is_empty(),
        if problems.is_empty() {
            format!("7 subcommands x (twice at --jobs 1, once at --jobs 4): {files} files byte-identical")
        } else {
            problems.join("; ")
        },
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("landscape exactness", landscape_exactness),
        ("kernel count", kernel_count),
        ("closed form vs Euler", closed_form_vs_euler),
        ("homogeneous reduction", homogeneous_oracle),
        ("pesticide sweep (fig3)", fig3),
        ("policy grid (fig4)", fig4),
        ("phase diagram (fig5)", fig5),
        ("calibration self-consistency", calibration),
        ("sensitivity directionality", sensitivity_directionality),
        ("CLI reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
