//! Direct least-squares fits of the measured economic curves.

use serde::{Deserialize, Serialize};

use super::targets::{TargetField, TargetTable};
use crate::ecology::response_unchecked;
use crate::economics::EconParams;
use crate::error::{Error, Result};
use crate::landscape::{scaling_laws, ScalingLaw};
use crate::model::ModelParams;

/// Fitted parameters of the curves that do not depend on the ecology.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExogenousFit {
    pub grassland_scale: f64,
    pub grassland_exponent: f64,
    pub cpe_max: f64,
    pub cpe_ref_size: f64,
    pub labor_base: f64,
    pub labor_extra: f64,
    pub labor_ref_size: f64,
    pub operating_cost: f64,
    pub subsidy: f64,
}

impl ExogenousFit {
    pub fn apply(&self, params: &ModelParams) -> ModelParams {
        let mut p = *params;
        p.scaling.g0 = self.grassland_scale;
        p.scaling.b = self.grassland_exponent;
        p.economics.cpe_max = self.cpe_max;
        p.economics.cpe_ref_size = self.cpe_ref_size;
        p.economics.labor_base = self.labor_base;
        p.economics.labor_extra = self.labor_extra;
        p.economics.labor_ref_size = self.labor_ref_size;
        p.economics.operating_cost = self.operating_cost;
        p.economics.subsidy = self.subsidy;
        p
    }
}

/// Inclusive grid `lo, lo + step, …, hi`.
fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

fn observations(targets: &TargetTable, field: TargetField) -> Result<Vec<(f64, f64)>> {
    let mut obs: Vec<(f64, f64)> = targets.field_rows(field).map(|r| (r.farm_size, r.value)).collect();
    if obs.len() < 3 {
        return Err(Error::Underdetermined {
            field: field.to_string(),
            bins: obs.len(),
        });
    }
    obs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(obs)
}

fn sse(obs: &[(f64, f64)], f: impl Fn(f64) -> f64) -> f64 {
    obs.iter().map(|&(l, v)| (f(l) - v).powi(2)).sum()
}

/// Grid search over the Cartesian product of `axes`; ties keep the first
/// candidate in lexicographic order.
fn argmin<const N: usize>(axes: [&[f64]; N], loss: impl Fn([f64; N]) -> f64) -> [f64; N] {
    let mut best = [0.0; N];
    let mut best_loss = f64::INFINITY;
    let total: usize = axes.iter().map(|a| a.len()).product();
    for mut flat in 0..total {
        let mut x = [0.0; N];
        for d in (0..N).rev() {
            x[d] = axes[d][flat % axes[d].len()];
            flat /= axes[d].len();
        }
        let l = loss(x);
        if l < best_loss {
            best_loss = l;
            best = x;
        }
    }
    best
}

/// Per-hectare labor of a farm of size `l` under the scaling laws.
fn labor_per_ha(l: f64, law: &ScalingLaw, econ: &EconParams, base: f64, extra: f64, reference: f64) -> f64 {
    let s = scaling_laws(l, law).expect("positive farm size");
    let productive_share = 1.0 - s.grassland_share - s.hedgerow_share;
    let productive = l * productive_share;
    productive_share
        * (base
            + extra * response_unchecked(productive, reference) * response_unchecked(s.field_size, econ.field_ref_size))
}

/// Fit the grassland power law, the expenditure curve, the labor curve and
/// the constant operating cost and subsidy. Structure not being fitted
/// (field size and hedgerow laws, upkeep costs) is taken from `params`.
pub fn fit_exogenous(targets: &TargetTable, params: &ModelParams) -> Result<ExogenousFit> {
    let grass = observations(targets, TargetField::GrasslandShare)?;
    let cpe = observations(targets, TargetField::Cpe)?;
    let labor = observations(targets, TargetField::Labor)?;
    let costs = observations(targets, TargetField::Costs)?;
    let subsidy = observations(targets, TargetField::Subsidy)?;

    let [g0, b] = argmin([&grid(0.005, 0.5, 0.005), &grid(-1.0, 0.0, 0.01)], |[g0, b]| {
        sse(&grass, |l| g0 * l.powf(b))
    });
    let law = ScalingLaw { g0, b, ..params.scaling };

    let [cpe_max, cpe_ref] = argmin([&grid(1.0, 300.0, 1.0), &grid(1.0, 200.0, 1.0)], |[m, r]| {
        sse(&cpe, |l| m * response_unchecked(r, l))
    });

    let econ = &params.economics;
    // (observed, productive share, productive area, field-size factor)
    let labor_terms: Vec<(f64, f64, f64, f64)> = labor
        .iter()
        .map(|&(l, v)| {
            let s = scaling_laws(l, &law)?;
            let share = 1.0 - s.grassland_share - s.hedgerow_share;
            Ok((v, share, l * share, response_unchecked(s.field_size, econ.field_ref_size)))
        })
        .collect::<Result<_>>()?;
    let [base, extra, reference] = argmin(
        [&grid(0.0, 0.1, 0.001), &grid(0.0, 2.0, 0.01), &grid(0.5, 50.0, 0.5)],
        |[b0, b1, r]| {
            labor_terms
                .iter()
                .map(|&(v, share, prod, field)| (share * (b0 + b1 * response_unchecked(prod, r) * field) - v).powi(2))
                .sum()
        },
    );

    // Per-ha costs are linear in the operating cost: z = C₀·a with
    // a the productive share; closed-form least squares.
    let (mut num, mut den) = (0.0, 0.0);
    for &(l, v) in &costs {
        let s = scaling_laws(l, &law)?;
        let (g, h) = (s.grassland_share, s.hedgerow_share);
        let a = 1.0 - g - h;
        let pi = cpe_max * response_unchecked(cpe_ref, l);
        let z = v - pi * a - econ.grassland_cost * g - econ.hedgerow_cost * h;
        num += a * z;
        den += a * a;
    }
    let operating_cost = num / den;

    let subsidy = subsidy.iter().map(|&(_, v)| v).sum::<f64>() / subsidy.len() as f64;

    Ok(ExogenousFit {
        grassland_scale: g0,
        grassland_exponent: b,
        cpe_max,
        cpe_ref_size: cpe_ref,
        labor_base: base,
        labor_extra: extra,
        labor_ref_size: reference,
        operating_cost,
        subsidy,
    })
}

/// Noise-free exogenous target rows implied by `params`.
pub(crate) fn exogenous_rows(l: f64, params: &ModelParams) -> Result<Vec<(TargetField, f64)>> {
    let s = scaling_laws(l, &params.scaling)?;
    let econ = &params.economics;
    let (g, h) = (s.grassland_share, s.hedgerow_share);
    let pi = econ.cpe_max * response_unchecked(econ.cpe_ref_size, l);
    let a = 1.0 - g - h;
    Ok(vec![
        (TargetField::GrasslandShare, g),
        (TargetField::Cpe, pi),
        (
            TargetField::Labor,
            labor_per_ha(l, &params.scaling, econ, econ.labor_base, econ.labor_extra, econ.labor_ref_size),
        ),
        (
            TargetField::Costs,
            (econ.operating_cost + pi) * a + econ.grassland_cost * g + econ.hedgerow_cost * h,
        ),
        (TargetField::Subsidy, econ.subsidy),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::targets::TargetRow;

    fn table(params: &ModelParams, sizes: &[f64]) -> TargetTable {
        let mut rows = Vec::new();
        for &l in sizes {
            for (field, value) in exogenous_rows(l, params).unwrap() {
                rows.push(TargetRow {
                    farm_size: l,
                    field,
                    value,
                    stddev: 0.0,
                    weight: 1.0,
                });
            }
        }
        TargetTable::new(rows).unwrap()
    }

    #[test]
    fn recovers_generating_parameters() {
        let params = ModelParams::default();
        let t = table(&params, &[2.0, 5.0, 10.0, 30.0, 80.0, 200.0, 600.0]);
        let fit = fit_exogenous(&t, &params).unwrap();
        assert!((fit.grassland_scale - 0.1).abs() < 0.0025);
        assert!((fit.grassland_exponent + 0.2).abs() < 0.005);
        assert_eq!((fit.cpe_max, fit.cpe_ref_size), (120.0, 25.0));
        assert!((fit.labor_base - 0.01).abs() < 0.0005);
        assert!((fit.labor_extra - 0.6).abs() < 0.005);
        assert!((fit.labor_ref_size - 5.0).abs() < 0.25);
        assert!((fit.operating_cost - 750.0).abs() < 1e-6);
        assert!((fit.subsidy - 500.0).abs() < 1e-9);
    }

    #[test]
    fn constant_subsidy_is_the_mean() {
        let params = ModelParams::default();
        let mut t = table(&params, &[2.0, 20.0, 200.0]);
        let mut k = 0.0;
        for r in t.rows.iter_mut().filter(|r| r.field == TargetField::Subsidy) {
            r.value = 400.0 + 50.0 * k;
            k += 1.0;
        }
        assert_eq!(fit_exogenous(&t, &params).unwrap().subsidy, 450.0);
    }

    #[test]
    fn too_few_bins_is_underdetermined() {
        let params = ModelParams::default();
        let t = table(&params, &[2.0, 20.0]);
        assert!(matches!(fit_exogenous(&t, &params), Err(Error::Underdetermined { bins: 2, .. })));
    }
}
