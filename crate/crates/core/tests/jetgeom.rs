use jetfield_core::basegeom::{MetricFamily, MetricField};
use jetfield_core::expr::{diff, eval, parse, Params};
use jetfield_core::jetgeom::{
    adapted_derivative, sigma_derivs_at, DerivKind, Direction, JetContext, SigmaDerivs,
};
use jetfield_core::tensor::{for_each_index, Field};
use jetfield_core::{Dims, Expr, IndexSlot, JetPoint, Var};
use proptest::prelude::*;
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

fn max_diff(a: &Field, b: &Field, pt: &JetPoint) -> f64 {
    let p = Params::new();
    a.eval(pt, &p).unwrap().max_abs_diff(&b.eval(pt, &p).unwrap()).unwrap()
}

/// Preset-style σ fields on p=2, n=2.
fn sigmas(dims: Dims) -> Vec<Expr> {
    [
        // U^{(α)}_{(i)}(t, x) x^i_α
        "(1/3 + t1*x2/4)*y_1_1 + cos(x1)/2*y_1_2 - t2/5*y_2_1 + x1*x2/7*y_2_2",
        // h^{αβ} A_i A_j x^i_α x^j_β with A = (x2/2, 1/3), h^{-1} written out
        "((2 + sin(t1))*(x2/2*y_1_1 + y_2_1/3)^2 - 2*t1*t2/5*(x2/2*y_1_1 + y_2_1/3)*(x2/2*y_1_2 + y_2_2/3) + (1 + t2^2/4)*(x2/2*y_1_2 + y_2_2/3)^2)/((1 + t2^2/4)*(2 + sin(t1)) - t1^2*t2^2/25)/4",
        // φ_{ij} X^α X^β x^i_α x^j_β with X = (1, t1/2)
        "((y_1_1 + t1/2*y_1_2)^2 + sin(x1)^2*(y_2_1 + t1/2*y_2_2)^2)/5",
        "x1*t2/3 + t1*y_2_1^2/4 - y_1_2*y_2_2*x2/5 + 1/10*y_1_1",
    ]
    .iter()
    .map(|s| parse(s, dims).unwrap())
    .collect()
}

#[test]
fn berwald_metrical_identities() {
    let dims = Dims::new(2, 2);
    let mut ctx = JetContext::new(&curved_h(dims), &sphere(dims));
    let bw = ctx.berwald();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for sigma in sigmas(dims) {
        let sd = SigmaDerivs::build(&mut ctx, &sigma);
        let h = ctx.h.metric.components().clone();
        let phi = ctx.phi.metric.components().clone();
        let e2s = sigma.scale(2.0).exp();
        let g = phi.map(|e| e2s.mul(e));
        let mut checks: Vec<(Field, Field)> = Vec::new();
        for kind in DerivKind::ALL {
            let dh = ctx.covariant(&h, &bw, kind);
            let dphi = ctx.covariant(&phi, &bw, kind);
            let dg = ctx.covariant(&g, &bw, kind);
            let rate = match kind {
                DerivKind::Temporal => &sd.temporal,
                DerivKind::Spatial => &sd.spatial,
                DerivKind::Vertical => &sd.vertical,
            };
            let expect = Field::from_fn(dims, dg.slots(), |ix| {
                rate.get(&[ix[2]]).scale(2.0).mul(g.get(&ix[..2]))
            });
            checks.push((dh.clone(), Field::zeros(dims, dh.slots())));
            checks.push((dphi.clone(), Field::zeros(dims, dphi.slots())));
            checks.push((dg, expect));
        }
        assert_eq!(checks.len(), 9);
        for _ in 0..100 {
            let pt = random_point(dims, &mut rng);
            for (k, (a, b)) in checks.iter().enumerate() {
                let d = max_diff(a, b, &pt);
                assert!(d < 1e-9, "identity {k} residual {d}");
            }
        }
    }
}

#[test]
fn adapted_equals_partial_without_direction_dependence() {
    let dims = Dims::new(2, 2);
    let mut ctx = JetContext::new(&curved_h(dims), &sphere(dims));
    let e = parse("sin(x1)*t2 + x2^2*t1", dims).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pt = random_point(dims, &mut rng);
    let p = Params::new();
    for b in 0..2 {
        let a = adapted_derivative(&mut ctx, &e, Direction::Temporal(b), &pt, &p).unwrap();
        assert_eq!(a, eval(&diff(&e, Var::T(b)), &pt, &p).unwrap());
        let a = adapted_derivative(&mut ctx, &e, Direction::Spatial(b), &pt, &p).unwrap();
        assert_eq!(a, eval(&diff(&e, Var::X(b)), &pt, &p).unwrap());
    }
}

#[test]
fn flat_metrics_make_adapted_equal_partial() {
    let dims = Dims::new(2, 2);
    let h = MetricField::identity(dims, MetricFamily::Temporal);
    let phi = MetricField::identity(dims, MetricFamily::Spatial);
    let mut ctx = JetContext::new(&h, &phi);
    let e = parse("y_1_2*x1*t2 + exp(y_2_1*t1)", dims).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let pt = random_point(dims, &mut rng);
    let p = Params::new();
    for b in 0..2 {
        let a = adapted_derivative(&mut ctx, &e, Direction::Temporal(b), &pt, &p).unwrap();
        let d = eval(&diff(&e, Var::T(b)), &pt, &p).unwrap();
        assert!((a - d).abs() < 1e-15);
        let a = adapted_derivative(&mut ctx, &e, Direction::Spatial(b), &pt, &p).unwrap();
        let d = eval(&diff(&e, Var::X(b)), &pt, &p).unwrap();
        assert!((a - d).abs() < 1e-15);
    }
}

#[test]
fn linear_sigma_on_sphere_matches_hand_chain_rule() {
    // σ = U y_1_1 on the sphere: δσ/δx^i = −U γ^1_{im} y_{m,1}
    let dims = Dims::new(1, 2);
    let h = MetricField::identity(dims, MetricFamily::Temporal);
    let mut ctx = JetContext::new(&h, &sphere(dims));
    let u = 0.7;
    let e = parse("0.7*y_1_1", dims).unwrap();
    let th: f64 = 0.9;
    let pt = JetPoint::new(vec![0.1], vec![th, 0.2], vec![vec![0.3], vec![-1.4]]);
    let p = Params::new();
    // γ^1_{22} = −sinθ cosθ, γ^1_{11} = γ^1_{12} = 0
    let expect = [0.0, -u * (-th.sin() * th.cos()) * -1.4];
    for (i, want) in expect.iter().enumerate() {
        let got = adapted_derivative(&mut ctx, &e, Direction::Spatial(i), &pt, &p).unwrap();
        assert!((got - want).abs() < 1e-14, "i={i}: {got} vs {want}");
    }
}

#[test]
fn sigma_derivs_of_zero_vanish() {
    let dims = Dims::new(2, 2);
    let mut ctx = JetContext::new(&curved_h(dims), &sphere(dims));
    let pt = JetPoint::new(vec![0.1, 0.2], vec![1.0, 0.5], vec![vec![0.3, 0.1], vec![0.2, 0.4]]);
    let s = sigma_derivs_at(&mut ctx, &Expr::zero(), &pt, &Params::new(), 1e-8).unwrap();
    for t in [&s.temporal, &s.spatial, &s.vertical, &s.raised, &s.lambda] {
        assert_eq!(t.max_abs(), 0.0);
    }
}

#[test]
fn linear_preset_vertical_derivative_is_coefficient() {
    let dims = Dims::new(2, 2);
    let mut ctx = JetContext::new(&curved_h(dims), &sphere(dims));
    let coeffs = [["1/3 + t1*x2/4", "cos(x1)/2"], ["-t2/5", "x1*x2/7"]];
    let sigma = parse(&sigmas(dims)[0].to_string(), dims).unwrap();
    let sd = SigmaDerivs::build(&mut ctx, &sigma);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let p = Params::new();
    for _ in 0..10 {
        let pt = random_point(dims, &mut rng);
        let v = sd.vertical.eval(&pt, &p).unwrap();
        for (i, row) in coeffs.iter().enumerate() {
            for (a, src) in row.iter().enumerate() {
                let u = eval(&parse(src, dims).unwrap(), &pt, &p).unwrap();
                assert!((v.get(&[dims.pair(i, a)]) - u).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn quadratic_preset_vertical_derivative_matches_finite_differences() {
    let dims = Dims::new(2, 2);
    let mut ctx = JetContext::new(&curved_h(dims), &sphere(dims));
    let sigma = sigmas(dims)[1].clone();
    let sd = SigmaDerivs::build(&mut ctx, &sigma);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let p = Params::new();
    let step = 1e-6;
    for _ in 0..20 {
        let pt = random_point(dims, &mut rng);
        let v = sd.vertical.eval(&pt, &p).unwrap();
        for k in 0..2 {
            for g in 0..2 {
                let mut up = pt.clone();
                let mut dn = pt.clone();
                up.y[k][g] += step;
                dn.y[k][g] -= step;
                let fd = (eval(&sigma, &up, &p).unwrap() - eval(&sigma, &dn, &p).unwrap())
                    / (2.0 * step);
                let got = v.get(&[dims.pair(k, g)]);
                assert!((got - fd).abs() < 1e-6 * (1.0 + fd.abs()), "{got} vs {fd}");
            }
        }
    }
}

#[test]
fn lambda_is_symmetric() {
    let dims = Dims::new(2, 2);
    let mut ctx = JetContext::new(&curved_h(dims), &sphere(dims));
    let sd = SigmaDerivs::build(&mut ctx, &sigmas(dims)[3]);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let pt = random_point(dims, &mut rng);
    let l = sd.lambda.eval(&pt, &Params::new()).unwrap();
    for_each_index(&[2, 2, 2], |ix| {
        assert!((l.get(ix) - l.get(&[ix[0], ix[2], ix[1]])).abs() < 1e-12);
    });
}

#[test]
fn spatial_nonlinear_connection_is_torsion_free() {
    // ∂N^{(i)}_{(α)j}/∂y_{mα} − ∂N^{(i)}_{(α)m}/∂y_{jα} = γ^i_{jm} − γ^i_{mj} = 0
    let dims = Dims::new(2, 2);
    let mut ctx = JetContext::new(&curved_h(dims), &sphere(dims));
    let n = ctx.nonlinear.n.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let pt = random_point(dims, &mut rng);
    let p = Params::new();
    for i in 0..2 {
        for a in 0..2 {
            for j in 0..2 {
                for m in 0..2 {
                    let f = n.get(&[dims.pair(i, a), j]);
                    let g = n.get(&[dims.pair(i, a), m]);
                    let d1 = ctx.diff(f, Var::Y { i: m, a });
                    let d2 = ctx.diff(g, Var::Y { i: j, a });
                    let r = eval(&d1.sub(&d2), &pt, &p).unwrap();
                    assert!(r.abs() < 1e-14);
                }
            }
        }
    }
}

#[test]
fn constant_scalar_has_zero_covariant_derivatives() {
    let dims = Dims::new(2, 2);
    let mut ctx = JetContext::new(&curved_h(dims), &sphere(dims));
    let bw = ctx.berwald();
    let c = Field::scalar(dims, Expr::constant(3.5));
    for kind in DerivKind::ALL {
        assert!(ctx.covariant(&c, &bw, kind).is_structurally_zero());
    }
}

#[test]
fn liouville_field_is_berwald_parallel() {
    let dims = Dims::new(2, 2);
    let mut ctx = JetContext::new(&curved_h(dims), &sphere(dims));
    let bw = ctx.berwald();
    let y = Field::from_fn(dims, &[IndexSlot::V_UP], |ix| {
        let (i, a) = dims.unpair(ix[0]);
        Expr::y(i, a)
    });
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let pt = random_point(dims, &mut rng);
    for kind in [DerivKind::Temporal, DerivKind::Spatial] {
        let d = ctx.covariant(&y, &bw, kind).eval(&pt, &Params::new()).unwrap();
        assert!(d.max_abs() < 1e-14, "{:?}", kind);
    }
}

fn leibniz_case(seed: u64) {
    let dims = Dims::new(2, 2);
    let mut ctx = JetContext::new(&curved_h(dims), &sphere(dims));
    let bw = ctx.berwald();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coef = || format!("{:.3}", rng.gen_range(-1.0..1.0));
    let a = Field::from_fn(dims, &[IndexSlot::S_UP], |ix| {
        parse(&format!("{}*x{} + {}*y_1_{}*t1", coef(), ix[0] + 1, coef(), ix[0] + 1), dims)
            .unwrap()
    });
    let b = Field::from_fn(dims, &[IndexSlot::V_LO], |ix| {
        let (i, al) = dims.unpair(ix[0]);
        parse(&format!("{}*y_{}_{}^2 + {}*t2*x1", coef(), i + 1, al + 1, coef()), dims).unwrap()
    });
    let ab = Field::from_fn(dims, &[IndexSlot::S_UP, IndexSlot::V_LO], |ix| {
        a.get(&[ix[0]]).mul(b.get(&[ix[1]]))
    });
    let pt = random_point(dims, &mut rng);
    let p = Params::new();
    for kind in DerivKind::ALL {
        let lhs = ctx.covariant(&ab, &bw, kind).eval(&pt, &p).unwrap();
        let da = ctx.covariant(&a, &bw, kind).eval(&pt, &p).unwrap();
        let db = ctx.covariant(&b, &bw, kind).eval(&pt, &p).unwrap();
        let av = a.eval(&pt, &p).unwrap();
        let bv = b.eval(&pt, &p).unwrap();
        for_each_index(&lhs.shape(), |ix| {
            let rhs = da.get(&[ix[0], ix[2]]) * bv.get(&[ix[1]])
                + av.get(&[ix[0]]) * db.get(&[ix[1], ix[2]]);
            assert!((lhs.get(ix) - rhs).abs() < 1e-9 * (1.0 + rhs.abs()));
        });
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]
    #[test]
    fn leibniz_rule_on_rank_one_pairs(seed in 0u64..10_000) {
        leibniz_case(seed);
    }
}
