use jetfield_core::basegeom::{MetricFamily, MetricField};
use jetfield_core::cartan::{
    cartan_connection, curvature_closed, curvature_direct, curvature_frame, frame_bracket,
    berwald_metricity, metricity, mixed_curvature_alt, ricci_identities, sigma_second, spatial_torsion_alt, temporal_curvature_alt,
    vertical_second_alt,
    torsion, CurvatureSet,
};
use jetfield_core::expr::{parse, Params};
use jetfield_core::jetgeom::{Direction, JetContext, SigmaDerivs};
use jetfield_core::tensor::{Field, FieldProgram};
use jetfield_core::{Dims, Expr, JetPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn metric(dims: Dims, family: MetricFamily, rows: &[&[&str]]) -> MetricField {
    let rows = rows
        .iter()
        .map(|r| r.iter().map(|s| parse(s, dims).unwrap()).collect())
        .collect();
    MetricField::new(dims, family, rows).unwrap()
}

fn curved_h(dims: Dims) -> MetricField {
    metric(
        dims,
        MetricFamily::Temporal,
        &[&["1 + t2^2/4", "t1*t2/5"], &["t1*t2/5", "2 + sin(t1)"]],
    )
}

fn sphere(dims: Dims) -> MetricField {
    metric(dims, MetricFamily::Spatial, &[&["1", "0"], &["0", "sin(x1)^2"]])
}

fn random_point(dims: Dims, rng: &mut ChaCha8Rng) -> JetPoint {
    let t = (0..dims.p).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let x = (0..dims.n).map(|_| rng.gen_range(0.4..2.6)).collect();
    let y = (0..dims.n)
        .map(|_| (0..dims.p).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    JetPoint::new(t, x, y)
}

fn sigmas(dims: Dims) -> Vec<Expr> {
    [
        "(1/3 + t1*x2/4)*y_1_1 + cos(x1)/2*y_1_2 - t2/5*y_2_1 + x1*x2/7*y_2_2",
        "((y_1_1 + t1/2*y_1_2)^2 + sin(x1)^2*(y_2_1 + t1/2*y_2_2)^2)/5",
        "x1*t2/3 + t1*y_2_1^2/4 - y_1_2*y_2_2*x2/5 + 1/10*y_1_1",
    ]
    .iter()
    .map(|s| parse(s, dims).unwrap())
    .collect()
}

/// Largest componentwise difference between matching field pairs over
/// `count` random points.
fn worst(dims: Dims, pairs: &[(&Field, &Field)], count: usize, seed: u64) -> Vec<f64> {
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

fn worst_zero(dims: Dims, fields: &[&Field], count: usize, seed: u64) -> Vec<f64> {
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

fn pairs<'a>(a: &'a CurvatureSet, b: &'a CurvatureSet) -> Vec<(&'a Field, &'a Field)> {
    a.named().iter().zip(b.named().iter()).map(|((_, x), (_, y))| (*x, *y)).collect()
}

#[test]
fn direct_closed_and_frame_curvature_agree() {
    let dims = Dims::new(2, 2);
    let mut ctx = JetContext::new(&curved_h(dims), &sphere(dims));
    for (s, sigma) in sigmas(dims).iter().enumerate() {
        let sd = SigmaDerivs::build(&mut ctx, sigma);
        let conn = cartan_connection(&ctx, &sd);
        let tor = torsion(&ctx, &sd, &conn);
        let ss = sigma_second(&mut ctx, &sd);
        let direct = curvature_direct(&mut ctx, &sd, &conn, &tor);
        let closed = curvature_closed(&ctx, &sd, &ss);
        let frame = curvature_frame(&mut ctx, &conn);
        let names: Vec<&str> = direct.named().iter().map(|(n, _)| *n).collect();
        let d_f = worst(dims, &pairs(&direct, &frame), 12, 10 + s as u64);
        let c_f = worst(dims, &pairs(&closed, &frame), 12, 20 + s as u64);
        for (k, name) in names.iter().enumerate() {
            assert!(d_f[k] < 1e-9, "sigma {s} {name}: direct vs frame {}", d_f[k]);
            assert!(c_f[k] < 1e-9, "sigma {s} {name}: closed vs frame {}", c_f[k]);
        }
    }
}

#[test]
fn alternative_temporal_curvature_sign_is_opposite() {
    let dims = Dims::new(2, 2);
    let mut ctx = JetContext::new(&curved_h(dims), &sphere(dims));
    let sigma = &sigmas(dims)[0];
    let sd = SigmaDerivs::build(&mut ctx, sigma);
    let conn = cartan_connection(&ctx, &sd);
    let ss = sigma_second(&mut ctx, &sd);
    let frame = curvature_frame(&mut ctx, &conn);
    let alt = temporal_curvature_alt(&ctx, &sd, &ss);
    let negated = alt.map(|e| e.neg());
    let sum = Field::from_fn(dims, alt.slots(), |ix| alt.get(ix).add(frame.r_tt.get(ix)));
    let w = worst(dims, &[(&negated, &frame.r_tt)], 12, 5);
    assert!(w[0] < 1e-9);
    let size = worst_zero(dims, &[&frame.r_tt, &sum], 12, 5);
    assert!(size[0] > 1e-2, "frame value must be nontrivial");
    assert!(size[1] < 1e-9);
}

#[test]
fn torsion_matches_frame_brackets() {
    let dims = Dims::new(2, 2);
    let mut ctx = JetContext::new(&curved_h(dims), &sphere(dims));
    let sigma = &sigmas(dims)[0];
    let sd = SigmaDerivs::build(&mut ctx, sigma);
    let conn = cartan_connection(&ctx, &sd);
    let tor = torsion(&ctx, &sd, &conn);
    let slots = tor.r_tt.slots().to_vec();
    let mut tt = Vec::new();
    for a in 0..dims.p {
        for b in 0..dims.p {
            tt.push(frame_bracket(&mut ctx, Direction::Temporal(a), Direction::Temporal(b)));
        }
    }
    let bracket_tt = Field::from_fn(dims, &slots, |ix| tt[ix[1] * dims.p + ix[2]][ix[0]].clone());
    let mut sp = Vec::new();
    for i in 0..dims.n {
        for j in 0..dims.n {
            sp.push(frame_bracket(&mut ctx, Direction::Spatial(i), Direction::Spatial(j)));
        }
    }
    let bracket_ss = Field::from_fn(dims, tor.r_ss.slots(), |ix| {
        sp[ix[1] * dims.n + ix[2]][ix[0]].clone()
    });
    let alt = spatial_torsion_alt(&ctx);
    let w = worst(
        dims,
        &[(&bracket_tt, &tor.r_tt), (&bracket_ss, &tor.r_ss), (&bracket_ss, &alt)],
        20,
        8,
    );
    assert!(w[0] < 1e-10, "temporal bracket {}", w[0]);
    assert!(w[1] < 1e-10, "spatial bracket {}", w[1]);
    assert!(w[2] > 1e-2, "alternate index placement differs: {}", w[2]);
}

#[test]
fn ricci_identities_hold() {
    let dims = Dims::new(2, 2);
    let mut ctx = JetContext::new(&curved_h(dims), &sphere(dims));
    for (s, sigma) in sigmas(dims).iter().enumerate() {
        let sd = SigmaDerivs::build(&mut ctx, sigma);
        let ss = sigma_second(&mut ctx, &sd);
        let ids = ricci_identities(&ctx, &sd, &ss);
        let w = worst_zero(dims, &[&ids[0], &ids[1], &ids[2]], 30, 40 + s as u64);
        for (k, v) in w.iter().enumerate() {
            assert!(*v < 1e-10, "sigma {s} identity {k}: {v}");
        }
    }
}

#[test]
fn cartan_connection_is_metrical() {
    let dims = Dims::new(2, 2);
    let mut ctx = JetContext::new(&curved_h(dims), &sphere(dims));
    for (s, sigma) in sigmas(dims).iter().enumerate() {
        let sd = SigmaDerivs::build(&mut ctx, sigma);
        let conn = cartan_connection(&ctx, &sd);
        let checks = metricity(&mut ctx, &sd, &conn);
        let fields: Vec<&Field> = checks.iter().map(|(_, f)| f).collect();
        let w = worst_zero(dims, &fields, 30, 60 + s as u64);
        for ((name, _), v) in checks.iter().zip(w) {
            assert!(v < 1e-10, "sigma {s} {name}: {v}");
        }
    }
}

#[test]
fn zero_sigma_reduces_to_base_curvature() {
    let dims = Dims::new(2, 2);
    let mut ctx = JetContext::new(&curved_h(dims), &sphere(dims));
    let sd = SigmaDerivs::build(&mut ctx, &Expr::zero());
    let ss = sigma_second(&mut ctx, &sd);
    let closed = curvature_closed(&ctx, &sd, &ss);
    for (name, f) in closed.named() {
        match name {
            "H_eta_beta_gamma" | "R_i_j_k" => {}
            _ => assert!(f.is_structurally_zero(), "{name}"),
        }
    }
    let w = worst(dims, &[(&closed.r_ss, &ctx.phi.riemann)], 10, 2);
    assert!(w[0] < 1e-12);
}

#[test]
fn flat_metrics_give_vanishing_base_curvature_terms() {
    let dims = Dims::new(1, 3);
    let h = MetricField::identity(dims, MetricFamily::Temporal);
    let phi = MetricField::identity(dims, MetricFamily::Spatial);
    let mut ctx = JetContext::new(&h, &phi);
    let sigma = parse("x1/2 + x2*x3/5", dims).unwrap();
    let sd = SigmaDerivs::build(&mut ctx, &sigma);
    let conn = cartan_connection(&ctx, &sd);
    let tor = torsion(&ctx, &sd, &conn);
    assert!(tor.r_tt.is_structurally_zero());
    assert!(tor.r_ss.is_structurally_zero());
    let ss = sigma_second(&mut ctx, &sd);
    let closed = curvature_closed(&ctx, &sd, &ss);
    assert!(closed.h.is_structurally_zero());
    assert!(closed.r_tt.is_structurally_zero());
    assert!(closed.p_t.is_structurally_zero());
    assert!(closed.s.is_structurally_zero());
}

#[test]
fn quadratic_mixed_term_is_absent() {
    let dims = Dims::new(2, 2);
    let mut ctx = JetContext::new(&curved_h(dims), &sphere(dims));
    let sigma = &sigmas(dims)[2];
    let sd = SigmaDerivs::build(&mut ctx, sigma);
    let conn = cartan_connection(&ctx, &sd);
    let ss = sigma_second(&mut ctx, &sd);
    let closed = curvature_closed(&ctx, &sd, &ss);
    let frame = curvature_frame(&mut ctx, &conn);
    let alt = mixed_curvature_alt(&sd, &closed);
    let w = worst(dims, &[(&closed.p_t, &frame.p_t), (&alt, &frame.p_t)], 12, 9);
    assert!(w[0] < 1e-9);
    assert!(w[1] > 1e-3, "variant should differ: {}", w[1]);
}

#[test]
fn vertical_second_family_uses_crossed_product() {
    let dims = Dims::new(2, 2);
    let mut ctx = JetContext::new(&curved_h(dims), &sphere(dims));
    let sigma = &sigmas(dims)[0];
    let sd = SigmaDerivs::build(&mut ctx, sigma);
    let ss = sigma_second(&mut ctx, &sd);
    let alt = vertical_second_alt(&sd, &ss);
    let w = worst(dims, &[(&ss.vv, &alt)], 12, 4);
    assert!(w[0] > 1e-3, "products differ off the Greek diagonal: {}", w[0]);
    // the φ-trace is blind to the choice
    let tr = |f: &Field| {
        Field::from_fn(dims, ss.trace_tt.slots(), |ix| {
            jetfield_core::Expr::sum((0..dims.n).flat_map(|r| (0..dims.n).map(move |s| (r, s))).map(|(r, s)| {
                ctx.phi.inverse.get(&[r, s]).mul(f.get(&[dims.pair(r, ix[0]), dims.pair(s, ix[1])]))
            }))
        })
    };
    let (a, b) = (tr(&ss.vv), tr(&alt));
    let w = worst(dims, &[(&a, &b), (&a, &ss.trace_tt)], 12, 4);
    assert!(w[0] < 1e-12 && w[1] < 1e-12);
}

#[test]
fn berwald_metrical_identities_hold() {
    let dims = Dims::new(2, 2);
    let mut ctx = JetContext::new(&curved_h(dims), &sphere(dims));
    for (s, sigma) in sigmas(dims).iter().enumerate() {
        let sd = SigmaDerivs::build(&mut ctx, sigma);
        let ids = berwald_metricity(&mut ctx, &sd);
        assert_eq!(ids.len(), 9);
        let pairs: Vec<(&Field, &Field)> = ids.iter().map(|(_, d, e)| (d, e)).collect();
        let w = worst(dims, &pairs, 10, 40 + s as u64);
        for ((name, _, _), v) in ids.iter().zip(&w) {
            assert!(*v < 1e-9, "sigma {s} {name}: {v}");
        }
    }
}
