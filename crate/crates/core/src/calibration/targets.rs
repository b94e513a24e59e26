//! Farm-size-binned observation tables.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{num, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetField {
    /// Crop yield, q/ha.
    Yield,
    /// Crop revenue per farm hectare, €/ha.
    Output,
    /// Profit per farm hectare, €/ha.
    Profit,
    /// Income per annual work unit, €/AWU.
    Income,
    GrasslandShare,
    /// Crop-protection expenditure, €/ha.
    Cpe,
    /// Labor per farm hectare, AWU/ha.
    Labor,
    /// Total costs per farm hectare, €/ha.
    Costs,
    /// Net subsidy, €/ha.
    Subsidy,
}

impl TargetField {
    pub const ALL: [TargetField; 9] = [
        TargetField::Yield,
        TargetField::Output,
        TargetField::Profit,
        TargetField::Income,
        TargetField::GrasslandShare,
        TargetField::Cpe,
        TargetField::Labor,
        TargetField::Costs,
        TargetField::Subsidy,
    ];

    /// Fields that depend on the ecological dynamics.
    pub const SIMULATED: [TargetField; 4] =
        [TargetField::Yield, TargetField::Output, TargetField::Profit, TargetField::Income];

    pub fn name(self) -> &'static str {
        match self {
            TargetField::Yield => "yield",
            TargetField::Output => "output",
            TargetField::Profit => "profit",
            TargetField::Income => "income",
            TargetField::GrasslandShare => "grassland_share",
            TargetField::Cpe => "cpe",
            TargetField::Labor => "labor",
            TargetField::Costs => "costs",
            TargetField::Subsidy => "subsidy",
        }
    }
}

impl fmt::Display for TargetField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TargetField {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        TargetField::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown target field `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetRow {
    pub farm_size: f64,
    pub field: TargetField,
    pub value: f64,
    pub stddev: f64,
    pub weight: f64,
}

#[derive(Debug, Deserialize)]
struct RawRow {
    farm_size_ha: f64,
    field: String,
    value: f64,
    stddev: f64,
    weight: f64,
}

/// Observations keyed by farm size and field.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TargetTable {
    pub rows: Vec<TargetRow>,
}

impl TargetTable {
    pub const HEADER: [&'static str; 5] = ["farm_size_ha", "field", "value", "stddev", "weight"];

    pub fn new(rows: Vec<TargetRow>) -> Result<Self> {
        let t = Self { rows };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for r in &self.rows {
            if !(r.farm_size > 0.0) {
                return Err(Error::domain(format!("farm size must be positive, got {}", r.farm_size)));
            }
            if !r.value.is_finite() || !(r.stddev >= 0.0) || !(r.weight >= 0.0) {
                return Err(Error::domain(format!(
                    "invalid observation for {} at {} ha",
                    r.field, r.farm_size
                )));
            }
            if !seen.insert((r.field, r.farm_size.to_bits())) {
                return Err(Error::domain(format!(
                    "duplicate observation for {} at {} ha",
                    r.field, r.farm_size
                )));
            }
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = reader.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != Self::HEADER {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header `{}`", Self::HEADER.join(",")),
            });
        }
        let mut rows = Vec::new();
        for (i, rec) in reader.deserialize::<RawRow>().enumerate() {
            let raw = rec?;
            let field = raw.field.parse().map_err(|e: Error| Error::Parse {
                line: i + 2,
                message: e.to_string(),
            })?;
            rows.push(TargetRow {
                farm_size: raw.farm_size_ha,
                field,
                value: raw.value,
                stddev: raw.stddev,
                weight: raw.weight,
            });
        }
        Self::new(rows)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut t = Table::new(&Self::HEADER);
        for r in &self.rows {
            t.push(vec![num(r.farm_size), r.field.to_string(), num(r.value), num(r.stddev), num(r.weight)]);
        }
        t.write(out)
    }

    /// Farm sizes carrying at least one observation of any of `fields`,
    /// ascending.
    pub fn bins(&self, fields: &[TargetField]) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| fields.contains(&r.field))
            .map(|r| r.farm_size)
            .collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    pub fn field_rows(&self, field: TargetField) -> impl Iterator<Item = &TargetRow> {
        self.rows.iter().filter(move |r| r.field == field)
    }

    pub fn get(&self, field: TargetField, farm_size: f64) -> Option<&TargetRow> {
        self.rows.iter().find(|r| r.field == field && r.farm_size == farm_size)
    }
}
