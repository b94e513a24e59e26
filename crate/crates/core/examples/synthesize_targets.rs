//! Regenerate the bundled synthetic target table.
//!
//! ```text
//! cargo run --release -p farmscape --example synthesize_targets > crates/core/data/fadn_targets.csv
//! ```

use farmscape::calibration::{synthesize_fadn_style, BUNDLED_BINS};
use farmscape::config::{Profile, RunConfig};
use farmscape::ExecMode;

fn main() -> farmscape::Result<()> {
    let cfg = RunConfig::profile(Profile::Desk);
    let params = cfg.calibration.model_params(&cfg.model_params());
    let table = synthesize_fadn_style(
        &BUNDLED_BINS,
        &params,
        cfg.seed,
        cfg.calibration.replicates,
        0.03,
        2024,
        ExecMode::Parallel,
    )?;
    table.write_csv(std::io::stdout().lock())
}
