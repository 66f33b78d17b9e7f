#![allow(dead_code)]

use jetfield_core::basegeom::{MetricFamily, MetricField};
use jetfield_core::expr::{parse, Params};
use jetfield_core::tensor::{Field, FieldProgram};
use jetfield_core::{Dims, Expr, JetPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn metric(dims: Dims, family: MetricFamily, rows: &[&[&str]]) -> MetricField {
    let rows = rows
        .iter()
        .map(|r| r.iter().map(|s| parse(s, dims).unwrap()).collect())
        .collect();
    MetricField::new(dims, family, rows).unwrap()
}

pub fn exprs(dims: Dims, src: &[&str]) -> Vec<Expr> {
    src.iter().map(|s| parse(s, dims).unwrap()).collect()
}

pub fn random_point(dims: Dims, rng: &mut ChaCha8Rng) -> JetPoint {
    let t = (0..dims.p).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let x = (0..dims.n).map(|_| rng.gen_range(0.4..2.6)).collect();
    let y = (0..dims.n)
        .map(|_| (0..dims.p).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    JetPoint::new(t, x, y)
}

/// Largest componentwise difference between matching field pairs over
/// `count` random points.
pub fn worst(dims: Dims, pairs: &[(&Field, &Field)], count: usize, seed: u64) -> Vec<f64> {
    let fields: Vec<&Field> = pairs.iter().flat_map(|(a, b)| [*a, *b]).collect();
    let prog = FieldProgram::new(dims, &fields);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![0.0f64; pairs.len()];
    for _ in 0..count {
        let pt = random_point(dims, &mut rng);
        let vals = prog.run(&pt, &Params::new()).unwrap();
        for (k, w) in out.iter_mut().enumerate() {
            *w = w.max(vals[2 * k].max_abs_diff(&vals[2 * k + 1]).unwrap());
        }
    }
    out
}

pub fn worst_zero(dims: Dims, fields: &[&Field], count: usize, seed: u64) -> Vec<f64> {
    let prog = FieldProgram::new(dims, fields);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![0.0f64; fields.len()];
    for _ in 0..count {
        let pt = random_point(dims, &mut rng);
        for (w, v) in out.iter_mut().zip(prog.run(&pt, &Params::new()).unwrap()) {
            *w = w.max(v.max_abs());
        }
    }
    out
}
