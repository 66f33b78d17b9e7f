use std::f64::consts::FRAC_PI_4;

use jetfield_core::basegeom::{
    christoffel_at, inverse_at, ricci_at, riemann_at, scalar_at, LeviCivita, MetricFamily,
    MetricField,
};
use jetfield_core::expr::{parse, Differentiator, Params};
use jetfield_core::tensor::for_each_index;
use jetfield_core::{Dims, GeomError, JetPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn metric(dims: Dims, family: MetricFamily, rows: &[&[&str]]) -> MetricField {
    let rows = rows
        .iter()
        .map(|r| r.iter().map(|s| parse(s, dims).unwrap()).collect())
        .collect();
    MetricField::new(dims, family, rows).unwrap()
}

fn sphere(dims: Dims) -> MetricField {
    metric(dims, MetricFamily::Spatial, &[&["1", "0"], &["0", "sin(x1)^2"]])
}

fn point_x(dims: Dims, x: &[f64]) -> JetPoint {
    let mut pt = JetPoint::zeros(dims);
    pt.x = x.to_vec();
    pt
}

/// Metric as a plain closure, independent of the symbolic pipeline.
type MetricFn = dyn Fn(&[f64]) -> Vec<Vec<f64>>;

fn invert(g: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = g.len();
    let mut a: Vec<Vec<f64>> = g.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for c in 0..n {
        let piv = (c..n).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
        a.swap(c, piv);
        inv.swap(c, piv);
        let d = a[c][c];
        for k in 0..n {
            a[c][k] /= d;
            inv[c][k] /= d;
        }
        for r in 0..n {
            if r != c {
                let f = a[r][c];
                for k in 0..n {
                    a[r][k] -= f * a[c][k];
                    inv[r][k] -= f * inv[c][k];
                }
            }
        }
    }
    inv
}

fn fd_christoffel(g: &MetricFn, x: &[f64], h: f64) -> Vec<Vec<Vec<f64>>> {
    let n = x.len();
    let dg: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|c| {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[c] += h;
            xm[c] -= h;
            let (gp, gm) = (g(&xp), g(&xm));
            (0..n)
                .map(|a| (0..n).map(|b| (gp[a][b] - gm[a][b]) / (2.0 * h)).collect())
                .collect()
        })
        .collect();
    let gi = invert(&g(x));
    (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    (0..n)
                        .map(|c| {
                            0.5 * (0..n)
                                .map(|m| gi[a][m] * (dg[b][m][c] + dg[c][m][b] - dg[m][b][c]))
                                .sum::<f64>()
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn fd_scalar(g: &MetricFn, x: &[f64]) -> f64 {
    let n = x.len();
    let h = 1e-4;
    let gam = |y: &[f64]| fd_christoffel(g, y, 1e-5);
    let g0 = gam(x);
    let dgam: Vec<Vec<Vec<Vec<f64>>>> = (0..n)
        .map(|e| {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[e] += h;
            xm[e] -= h;
            let (a, b) = (gam(&xp), gam(&xm));
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| (0..n).map(|k| (a[i][j][k] - b[i][j][k]) / (2.0 * h)).collect())
                        .collect()
                })
                .collect()
        })
        .collect();
    let gi = invert(&g(x));
    let mut sc = 0.0;
    for b in 0..n {
        for c in 0..n {
            let mut ric = 0.0;
            for a in 0..n {
                // R^a_{bca} with derivative indices last
                let mut r = dgam[a][a][b][c] - dgam[c][a][b][a];
                for m in 0..n {
                    r += g0[m][b][c] * g0[a][m][a] - g0[m][b][a] * g0[a][m][c];
                }
                ric += r;
            }
            sc += gi[b][c] * ric;
        }
    }
    sc
}

#[test]
fn euclidean_inverse_is_identity() {
    let dims = Dims::new(1, 3);
    let m = MetricField::identity(dims, MetricFamily::Spatial);
    let inv = inverse_at(&m, &JetPoint::zeros(dims), &Params::new()).unwrap();
    for_each_index(&[3, 3], |ix| {
        assert_eq!(*inv.get(ix), if ix[0] == ix[1] { 1.0 } else { 0.0 });
    });
}

#[test]
fn minkowski_is_self_inverse() {
    let dims = Dims::new(2, 1);
    let m = metric(dims, MetricFamily::Temporal, &[&["1", "0"], &["0", "-1"]]);
    let inv = inverse_at(&m, &JetPoint::zeros(dims), &Params::new()).unwrap();
    assert_eq!(inv.data(), &[1.0, 0.0, 0.0, -1.0]);
}

#[test]
fn sphere_inverse_at_quarter_pi() {
    let dims = Dims::new(1, 2);
    let inv = inverse_at(&sphere(dims), &point_x(dims, &[FRAC_PI_4, 0.3]), &Params::new()).unwrap();
    assert!((inv.get(&[0, 0]) - 1.0).abs() < 1e-12);
    assert!((inv.get(&[1, 1]) - 2.0).abs() < 1e-12);
    assert!(inv.get(&[0, 1]).abs() < 1e-15);
}

#[test]
fn degenerate_metric_rejected() {
    let dims = Dims::new(1, 2);
    let err = inverse_at(&sphere(dims), &point_x(dims, &[0.0, 0.0]), &Params::new()).unwrap_err();
    assert!(matches!(err, GeomError::Degenerate { metric: "phi", .. }));
}

#[test]
fn asymmetric_metric_rejected() {
    let dims = Dims::new(1, 2);
    let m = metric(dims, MetricFamily::Spatial, &[&["1", "x1"], &["0", "1"]]);
    let err = inverse_at(&m, &point_x(dims, &[0.5, 0.0]), &Params::new()).unwrap_err();
    assert!(matches!(err, GeomError::Asymmetric { .. }));
}

#[test]
fn family_violation_rejected() {
    let dims = Dims::new(1, 2);
    let rows = vec![
        vec![parse("1 + t1^2", dims).unwrap(), parse("0", dims).unwrap()],
        vec![parse("0", dims).unwrap(), parse("1", dims).unwrap()],
    ];
    let err = MetricField::new(dims, MetricFamily::Spatial, rows).unwrap_err();
    assert!(matches!(err, GeomError::Family { .. }));
}

#[test]
fn flat_metric_has_zero_christoffels_and_curvature() {
    let dims = Dims::new(1, 3);
    let m = MetricField::identity(dims, MetricFamily::Spatial);
    let lc = LeviCivita::build(&m, &mut Differentiator::new());
    assert!(lc.christoffel.is_structurally_zero());
    assert!(lc.riemann.is_structurally_zero());
    assert!(lc.ricci.is_structurally_zero());
    assert!(lc.scalar.is_zero());
}

#[test]
fn sphere_christoffel_matches_finite_differences() {
    let dims = Dims::new(1, 2);
    let x = [FRAC_PI_4, 0.7];
    let gam = christoffel_at(&sphere(dims), &point_x(dims, &x), &Params::new()).unwrap();
    assert!((gam.get(&[0, 1, 1]) + 0.5).abs() < 1e-12);
    let g: Box<MetricFn> =
        Box::new(|x: &[f64]| vec![vec![1.0, 0.0], vec![0.0, x[0].sin().powi(2)]]);
    let fd = fd_christoffel(g.as_ref(), &x, 1e-6);
    for_each_index(&[2, 2, 2], |ix| {
        assert!((gam.get(ix) - fd[ix[0]][ix[1]][ix[2]]).abs() < 1e-8);
    });
}

#[test]
fn christoffel_symmetric_at_random_points() {
    let dims = Dims::new(1, 3);
    let m = metric(
        dims,
        MetricFamily::Spatial,
        &[
            &["2 + x2^2", "x1*x3/4", "0"],
            &["x1*x3/4", "3 + sin(x1)", "x2/5"],
            &["0", "x2/5", "1 + x3^2"],
        ],
    );
    let lc = LeviCivita::build(&m, &mut Differentiator::new());
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let gam = lc.christoffel.eval(&point_x(dims, &x), &Params::new()).unwrap();
        for_each_index(&[3, 3, 3], |ix| {
            assert!((gam.get(ix) - gam.get(&[ix[0], ix[2], ix[1]])).abs() < 1e-12);
        });
    }
}

#[test]
fn unit_sphere_scalar_curvature_is_two() {
    let dims = Dims::new(1, 2);
    let m = sphere(dims);
    let g: Box<MetricFn> =
        Box::new(|x: &[f64]| vec![vec![1.0, 0.0], vec![0.0, x[0].sin().powi(2)]]);
    for th in [0.4, FRAC_PI_4, 1.3, 2.5] {
        let pt = point_x(dims, &[th, 1.1]);
        let sc = scalar_at(&m, &pt, &Params::new()).unwrap();
        assert!((sc - 2.0).abs() < 1e-12, "symbolic scalar {sc}");
        let fd = fd_scalar(g.as_ref(), &[th, 1.1]);
        assert!((fd - 2.0).abs() < 1e-4, "finite-difference scalar {fd}");
    }
}

#[test]
fn curved_scalar_matches_finite_difference_oracle() {
    let dims = Dims::new(2, 1);
    let m = metric(
        dims,
        MetricFamily::Temporal,
        &[&["1 + t2^2/4", "t1*t2/5"], &["t1*t2/5", "2 + sin(t1)"]],
    );
    let g: Box<MetricFn> = Box::new(|t: &[f64]| {
        vec![
            vec![1.0 + t[1] * t[1] / 4.0, t[0] * t[1] / 5.0],
            vec![t[0] * t[1] / 5.0, 2.0 + t[0].sin()],
        ]
    });
    let mut pt = JetPoint::zeros(dims);
    pt.t = vec![0.3, -0.6];
    let sc = scalar_at(&m, &pt, &Params::new()).unwrap();
    let fd = fd_scalar(g.as_ref(), &[0.3, -0.6]);
    assert!((sc - fd).abs() < 1e-4 * (1.0 + fd.abs()), "{sc} vs {fd}");
}

#[test]
fn riemann_identities_on_curved_metric() {
    let dims = Dims::new(1, 3);
    let m = metric(
        dims,
        MetricFamily::Spatial,
        &[
            &["2 + x2^2", "x1*x3/4", "0"],
            &["x1*x3/4", "3 + sin(x1)", "x2/5"],
            &["0", "x2/5", "1 + x3^2"],
        ],
    );
    let pt = point_x(dims, &[0.2, -0.4, 0.6]);
    let r = riemann_at(&m, &pt, &Params::new()).unwrap();
    for a in 0..3 {
        let lower = r.clone();
        let cyc = lower.cyclic_sum(1, 2, 3).unwrap();
        for_each_index(&[3, 3, 3], |ix| {
            assert!(cyc.get(&[a, ix[0], ix[1], ix[2]]).abs() < 1e-9);
        });
    }
    for_each_index(&[3, 3, 3, 3], |ix| {
        let swapped = r.get(&[ix[0], ix[1], ix[3], ix[2]]);
        assert!((r.get(ix) + swapped).abs() < 1e-12);
    });
    let ric = ricci_at(&m, &pt, &Params::new()).unwrap();
    for_each_index(&[3, 3], |ix| {
        assert!((ric.get(ix) - ric.get(&[ix[1], ix[0]])).abs() < 1e-9);
    });
}

#[test]
fn single_time_riemann_vanishes() {
    let dims = Dims::new(1, 2);
    let m = metric(dims, MetricFamily::Temporal, &[&["1 + t1^2"]]);
    let mut pt = JetPoint::zeros(dims);
    pt.t = vec![0.7];
    let r = riemann_at(&m, &pt, &Params::new()).unwrap();
    assert_eq!(r.max_abs(), 0.0);
}
