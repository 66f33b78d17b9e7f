//! Seeded sample points with rejection of degenerate ones.

use jetfield_core::expr::Params;
use jetfield_core::{Dims, Geometry, JetPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::VerifySection;
use crate::error::CliError;

/// Candidates drawn per requested point before giving up.
pub const OVERSAMPLING: usize = 10;

fn draw(rng: &mut ChaCha8Rng, b: [f64; 2]) -> f64 {
    if b[0] == b[1] {
        b[0]
    } else {
        rng.gen_range(b[0]..b[1])
    }
}

pub fn random_point(dims: Dims, v: &VerifySection, rng: &mut ChaCha8Rng) -> JetPoint {
    let t = (0..dims.p).map(|_| draw(rng, v.box_t)).collect();
    let x = (0..dims.n).map(|_| draw(rng, v.box_x)).collect();
    let y = (0..dims.n)
        .map(|_| (0..dims.p).map(|_| draw(rng, v.box_y)).collect())
        .collect();
    JetPoint::new(t, x, y)
}

/// Whether both metrics are symmetric and nondegenerate at `pt`.
pub fn admissible(geo: &Geometry, pt: &JetPoint, threshold: f64) -> bool {
    let params = Params::new();
    geo.h.checked_at(pt, &params, threshold).is_ok() && geo.phi.checked_at(pt, &params, threshold).is_ok()
}

/// Draws `count` points accepted by `admissible` and `accept`.
pub fn sample_points(
    geo: &Geometry,
    v: &VerifySection,
    count: usize,
    seed: u64,
    mut accept: impl FnMut(&JetPoint) -> bool,
) -> Result<Vec<JetPoint>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let budget = count.saturating_mul(OVERSAMPLING);
    for _ in 0..budget {
        let pt = random_point(geo.dims, v, &mut rng);
        if admissible(geo, &pt, v.degeneracy_threshold) && accept(&pt) {
            out.push(pt);
            if out.len() == count {
                return Ok(out);
            }
        }
    }
    Err(CliError::Sampling(format!(
        "found {} of {count} nondegenerate points in {budget} draws; narrow box_t/box_x/box_y away from \
         singular loci of the metrics or lower verify.degeneracy_threshold",
        out.len()
    )))
}
