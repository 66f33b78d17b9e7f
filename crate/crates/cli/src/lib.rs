//! Configuration loading, seeded sampling and the `compute` / `verify`
//! pipelines behind the `jetfield` binary.

pub mod checks;
pub mod config;
pub mod error;
pub mod report;
pub mod sample;

use std::time::Instant;

use jetfield_core::balance::Side;
use jetfield_core::expr::Params;
use jetfield_core::tensor::FieldProgram;
use jetfield_core::{DTensor, Field, Geometry, JetPoint};
use serde_json::{json, Map, Value};

use checks::{registry, Check};
use config::SpaceConfig;
pub use error::CliError;
use report::{nums, CheckRecord, Meta, Num, PointRecord, Summary, TermRecord, VerifyReport};

/// Overrides of the `[verify]` section given on the command line.
#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    pub points: Option<usize>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
}

fn max_abs(t: &DTensor) -> f64 {
    t.data().iter().fold(0.0, |m: f64, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v.abs()) })
}

fn max_abs_diff(a: &DTensor, b: &DTensor) -> f64 {
    a.data().iter().zip(b.data()).fold(0.0, |m: f64, (x, y)| {
        let d = (x - y).abs();
        if d.is_nan() || m.is_nan() {
            f64::NAN
        } else {
            m.max(d)
        }
    })
}

/// Ranking key where NaN counts as the worst possible value.
fn rank(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

struct Layout {
    lhs: usize,
    rhs: usize,
    terms: Vec<Option<usize>>,
}

fn layout<'a>(checks: &'a [Check]) -> (Vec<&'a Field>, Vec<Layout>) {
    let mut fields = Vec::new();
    let mut push = |f: &'a Field| {
        fields.push(f);
        fields.len() - 1
    };
    let lay = checks
        .iter()
        .map(|c| Layout {
            lhs: push(&c.lhs),
            rhs: push(&c.rhs),
            terms: c.terms.iter().map(|t| t.field.as_ref().map(&mut push)).collect(),
        })
        .collect();
    (fields, lay)
}

pub fn run_verify(cfg: &SpaceConfig, opts: VerifyOptions) -> Result<VerifyReport, CliError> {
    let start = Instant::now();
    let v = cfg.verify();
    let count = opts.points.unwrap_or(v.points);
    let seed = opts.seed.unwrap_or(v.seed);
    let tolerance = opts.tolerance.unwrap_or(v.tolerance);
    if count == 0 || !(tolerance > 0.0) {
        return Err(CliError::Usage("points must be positive and tolerance > 0".into()));
    }
    let geo = Geometry::build(&cfg.spec)?;
    let checks = registry(&geo);
    let (fields, lay) = layout(&checks);
    let program = FieldProgram::new(geo.dims, &fields);
    let params = Params::new();
    let mut values: Vec<Vec<DTensor>> = Vec::with_capacity(count);
    let points = sample::sample_points(&geo, v, count, seed, |pt| match program.run(pt, &params) {
        Ok(vals) => {
            values.push(vals);
            true
        }
        Err(_) => false,
    })?;

    let mut records = Vec::with_capacity(checks.len());
    for (c, l) in checks.iter().zip(&lay) {
        let (mut worst_abs, mut worst_rel, mut worst_at) = (0.0f64, 0.0f64, None);
        let mut term_max = vec![0.0f64; c.terms.len()];
        for (k, vals) in values.iter().enumerate() {
            let (a, b) = (&vals[l.lhs], &vals[l.rhs]);
            let abs = max_abs_diff(a, b);
            let mut scale = rank(max_abs(a)).max(rank(max_abs(b)));
            for (m, slot) in term_max.iter_mut().zip(&l.terms) {
                if let Some(s) = slot {
                    let t = rank(max_abs(&vals[*s]));
                    *m = m.max(t);
                    scale = scale.max(t);
                }
            }
            let rel = rank(abs) / (1.0 + scale);
            let rel = if rel.is_nan() { f64::INFINITY } else { rel };
            worst_abs = worst_abs.max(rank(abs));
            if worst_at.is_none() || rel > worst_rel {
                worst_rel = rel;
                worst_at = Some(k);
            }
        }
        let terms = c
            .terms
            .iter()
            .zip(&term_max)
            .map(|(t, m)| TermRecord {
                name: t.name.clone(),
                side: match t.side {
                    Side::Lhs => "lhs",
                    Side::Rhs => "rhs",
                },
                max_abs: t.field.as_ref().map(|_| Num(*m)),
            })
            .collect();
        records.push(CheckRecord {
            id: c.id.clone(),
            anchor: c.anchor(),
            diagnostic: c.diagnostic,
            points: values.len(),
            max_abs_residual: Num(worst_abs),
            max_rel_residual: Num(worst_rel),
            pass: worst_rel < tolerance,
            worst_point: worst_at.map(|k| PointRecord::from(&points[k])),
            offending_term: c.offending_term,
            terms,
        });
    }
    let failed = records.iter().filter(|r| !r.diagnostic && !r.pass).count();
    Ok(VerifyReport {
        meta: Meta {
            config_hash: cfg.hash(),
            p: cfg.spec.p,
            n: cfg.spec.n,
            sigma: cfg.spec.sigma.tag(),
            seed,
            points: count,
            tolerance: Num(tolerance),
            wall_time_s: Num(start.elapsed().as_secs_f64()),
        },
        summary: Summary {
            checks: records.len(),
            diagnostic: records.iter().filter(|r| r.diagnostic).count(),
            failed,
            pass: failed == 0,
        },
        checks: records,
    })
}

/// Parses `t=0.1:0.2,x=1:0.5,y=0.3:0.1:0.2:0.4`, with `y` listed as
/// `x^1_1 … x^1_p, x^2_1 …`.
pub fn parse_point(src: &str, p: usize, n: usize) -> Result<JetPoint, CliError> {
    let mut parts: [Option<Vec<f64>>; 3] = [None, None, None];
    for item in src.split(',') {
        let (key, vals) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("point component `{item}` needs the form key=v1:v2")))?;
        let slot = match key.trim() {
            "t" => 0,
            "x" => 1,
            "y" => 2,
            other => return Err(CliError::Usage(format!("unknown point component `{other}`"))),
        };
        let vals = vals
            .split(':')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Usage(format!("point component `{key}`: {e}")))?;
        parts[slot] = Some(vals);
    }
    let want = [p, n, n * p];
    for (k, name) in ["t", "x", "y"].iter().enumerate() {
        let got = parts[k].as_ref().map_or(0, Vec::len);
        if got != want[k] {
            return Err(CliError::Usage(format!("point component `{name}` needs {} values, got {got}", want[k])));
        }
    }
    let [t, x, y] = parts.map(Option::unwrap_or_default);
    let y = y.chunks(p).map(<[f64]>::to_vec).collect();
    Ok(JetPoint::new(t, x, y))
}

/// Every named tensor and scalar at one point; without `pt`, the first
/// admissible sample point of the configured seed.
pub fn run_compute(cfg: &SpaceConfig, pt: Option<JetPoint>) -> Result<Value, CliError> {
    let geo = Geometry::build(&cfg.spec)?;
    let v = cfg.verify();
    let pt = match pt {
        Some(pt) => {
            if !sample::admissible(&geo, &pt, v.degeneracy_threshold) {
                return Err(CliError::Usage("point is degenerate for the configured metrics".into()));
            }
            pt
        }
        None => sample::sample_points(&geo, v, 1, v.seed, |_| true)?.remove(0),
    };
    let named = geo.named_fields();
    let scalars = geo.named_scalars();
    let mut fields: Vec<&Field> = named.iter().map(|(_, f)| *f).collect();
    let scalar_fields: Vec<Field> = scalars.iter().map(|(_, e)| Field::scalar(geo.dims, (*e).clone())).collect();
    fields.extend(scalar_fields.iter());
    let vals = FieldProgram::new(geo.dims, &fields)
        .run(&pt, &Params::new())
        .map_err(|e| CliError::Geometry(e.into()))?;

    let mut sc = Map::new();
    for ((name, _), val) in scalars.iter().zip(&vals[named.len()..]) {
        sc.insert(name.to_string(), serde_json::to_value(Num(*val.value())).expect("number"));
    }
    let mut tensors = Map::new();
    for ((name, f), val) in named.iter().zip(&vals) {
        let slots: Vec<String> = f.slots().iter().map(|s| s.to_string()).collect();
        tensors.insert(
            name.clone(),
            json!({ "slots": slots, "shape": val.shape(), "data": nums(val.data()) }),
        );
    }
    Ok(json!({
        "config_hash": cfg.hash(),
        "p": cfg.spec.p,
        "n": cfg.spec.n,
        "point": PointRecord::from(&pt),
        "scalars": sc,
        "tensors": tensors,
    }))
}
