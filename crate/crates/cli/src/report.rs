//! JSON report types. Numbers carry 17 significant digits; keys keep
//! declaration order.

use jetfield_core::JetPoint;
use serde::{Serialize, Serializer};

/// A float serialized with 17 significant digits; non-finite values become
/// the strings `"NaN"`, `"inf"`, `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            let n: serde_json::Number = format!("{:.16e}", self.0).parse().expect("formatted float parses");
            n.serialize(s)
        } else {
            s.serialize_str(&self.0.to_string())
        }
    }
}

pub fn nums(v: &[f64]) -> Vec<Num> {
    v.iter().copied().map(Num).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRecord {
    pub t: Vec<Num>,
    pub x: Vec<Num>,
    pub y: Vec<Vec<Num>>,
}

impl From<&JetPoint> for PointRecord {
    fn from(p: &JetPoint) -> Self {
        PointRecord {
            t: nums(&p.t),
            x: nums(&p.x),
            y: p.y.iter().map(|r| nums(r)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermRecord {
    pub name: String,
    pub side: &'static str,
    /// `None` for a term with a singular coefficient.
    pub max_abs: Option<Num>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub anchor: &'static str,
    pub diagnostic: bool,
    pub points: usize,
    pub max_abs_residual: Num,
    pub max_rel_residual: Num,
    pub pass: bool,
    pub worst_point: Option<PointRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offending_term: Option<&'static str>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<TermRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta {
    pub config_hash: String,
    pub p: usize,
    pub n: usize,
    pub sigma: &'static str,
    pub seed: u64,
    pub points: usize,
    pub tolerance: Num,
    pub wall_time_s: Num,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub checks: usize,
    pub diagnostic: usize,
    pub failed: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub meta: Meta,
    pub summary: Summary,
    pub checks: Vec<CheckRecord>,
}

impl VerifyReport {
    /// Pretty JSON with the timing field zeroed, for comparing runs.
    pub fn to_json_without_timing(&self) -> String {
        let mut r = self.clone();
        r.meta.wall_time_s = Num(0.0);
        serde_json::to_string_pretty(&r).expect("report serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.diagnostic && !c.pass)
    }
}
