//! Exact update dynamics for two points, triplets, and small point sets.
//!
//! The optimizer in [`crate::embedder`] samples edges stochastically and
//! clips displacements; this module applies the same update equations
//! without any of that, so closed-form distance factors can be checked
//! against observed motion. Everything here is a reference computation,
//! not a fast path.
//!
//! Distance factors follow from linearity: an attraction step moves both
//! endpoints along their difference vector, so the difference itself is
//! scaled by `1 + 2 lambda f_a`; a repulsion step moves only `y_i` and
//! scales the difference by `1 + lambda f_r`.

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::DynamicsError;
use crate::shapes::{trimap_attr, trimap_rep};

/// Two embedding points and a learning rate.
#[derive(Debug, Clone)]
pub struct PairState {
    pub y_i: Array1<f64>,
    pub y_j: Array1<f64>,
    pub lambda: f64,
}

impl PairState {
    pub fn new(y_i: Array1<f64>, y_j: Array1<f64>, lambda: f64) -> Result<Self, DynamicsError> {
        if y_i.len() != y_j.len() {
            return Err(DynamicsError::Dimension(format!(
                "points have dims {} and {}",
                y_i.len(),
                y_j.len()
            )));
        }
        if y_i.is_empty() {
            return Err(DynamicsError::Param("points need at least one coordinate".into()));
        }
        if !(y_i.iter().all(|v| v.is_finite()) && y_j.iter().all(|v| v.is_finite())) {
            return Err(DynamicsError::Param("coordinates must be finite".into()));
        }
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(DynamicsError::Param("lambda must be finite and >= 0".into()));
        }
        Ok(Self { y_i, y_j, lambda })
    }
}

fn norm(v: ArrayView1<f64>) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Apply one attraction update to both endpoints.
///
/// `y_i` gains `lambda f_a (y_i - y_j)` and `y_j` loses it, so with
/// `f_a <= 0` the pair contracts whenever `lambda f_a > -1/2`. The
/// returned factor is the realized `|1 + 2 lambda f_a|`, computed from
/// the scaled difference vector so it stays within a few ulp of the
/// closed form even where reconstructing it from the moved points would
/// cancel.
pub fn pair_attract_step(s: &PairState, f_a_value: f64) -> (Array1<f64>, Array1<f64>, f64) {
    let diff = &s.y_i - &s.y_j;
    let c = s.lambda * f_a_value;
    let step = diff.mapv(|d| c * d);
    let y_i = &s.y_i + &step;
    let y_j = &s.y_j - &step;
    let before = norm(diff.view());
    let factor = if before == 0.0 {
        (1.0 + 2.0 * c).abs()
    } else {
        norm(diff.mapv(|d| (1.0 + 2.0 * c) * d).view()) / before
    };
    (y_i, y_j, factor)
}

/// Apply one repulsion update: `y_i` moves away, `y_j` stays put.
///
/// Factor is the realized `|1 + lambda f_r|`, always >= 1 for a true
/// repulsion value.
pub fn pair_repel_step(s: &PairState, f_r_value: f64) -> (Array1<f64>, Array1<f64>, f64) {
    let diff = &s.y_i - &s.y_j;
    let c = s.lambda * f_r_value;
    let y_i = &s.y_i + &diff.mapv(|d| c * d);
    let before = norm(diff.view());
    let factor = if before == 0.0 {
        (1.0 + c).abs()
    } else {
        norm(diff.mapv(|d| (1.0 + c) * d).view()) / before
    };
    (y_i, s.y_j.clone(), factor)
}

/// What a single attraction step does to the pair distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairUpdateClass {
    /// Distance shrinks without the difference vector flipping.
    Contract,
    /// The points land exactly on top of each other.
    Coincide,
    /// Distance is preserved (zero force, or a flip that exactly
    /// restores it).
    Fixed,
    /// Overshoot: the difference flips sign and grows.
    ExpandWithFlip,
    /// A positive value on the attraction channel pushes the pair apart.
    ExpandNoForceSense,
}

/// Classify `lambda * f_a` against the contraction boundaries.
///
/// Boundaries compare exactly; this is a mathematical reference, and
/// callers wanting tolerance bands should wrap it.
pub fn classify_pair_update(lambda: f64, f_a_value: f64) -> PairUpdateClass {
    debug_assert!(lambda > 0.0);
    let x = lambda * f_a_value;
    if x == -0.5 {
        PairUpdateClass::Coincide
    } else if x == 0.0 || x == -1.0 {
        PairUpdateClass::Fixed
    } else if x > 0.0 {
        PairUpdateClass::ExpandNoForceSense
    } else if x > -1.0 {
        PairUpdateClass::Contract
    } else {
        PairUpdateClass::ExpandWithFlip
    }
}

/// Geometry of one triplet update: a near pair at distance `zeta1`, a
/// far point at distance `zeta2` from the shared vertex, and the angle
/// between the two difference vectors.
#[derive(Debug, Clone, Copy)]
pub struct TripletState {
    pub zeta1: f64,
    pub zeta2: f64,
    pub cos_theta: f64,
    pub lambda: f64,
}

impl TripletState {
    pub fn new(zeta1: f64, zeta2: f64, cos_theta: f64, lambda: f64) -> Result<Self, DynamicsError> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(DynamicsError::Param(msg.to_string()))
            }
        };
        check(zeta1.is_finite() && zeta1 > 0.0, "zeta1 must be > 0")?;
        check(zeta2.is_finite() && zeta2 > 0.0, "zeta2 must be > 0")?;
        check(cos_theta.is_finite() && cos_theta.abs() <= 1.0, "need |cos theta| <= 1")?;
        check(lambda.is_finite() && lambda > 0.0, "lambda must be > 0")?;
        Ok(Self {
            zeta1,
            zeta2,
            cos_theta,
            lambda,
        })
    }
}

/// Squared distance factor of the near pair after one triplet update.
/// Contraction is certified iff the result is < 1.
pub fn trimap_h_a(t: &TripletState) -> f64 {
    let fa = t.lambda * trimap_attr(t.zeta1, t.zeta2);
    let fr = t.lambda * trimap_rep(t.zeta1, t.zeta2);
    let ratio = t.zeta2 / t.zeta1;
    (1.0 + 2.0 * fa) * (1.0 + 2.0 * fa)
        + 2.0 * (1.0 + 2.0 * fa) * fr * ratio * t.cos_theta
        + fr * fr * ratio * ratio
}

/// Squared distance factor of the far pair after one triplet update.
/// Expansion is certified iff the result is > 1.
pub fn trimap_h_r(t: &TripletState) -> f64 {
    let fa = t.lambda * trimap_attr(t.zeta1, t.zeta2);
    let fr = t.lambda * trimap_rep(t.zeta1, t.zeta2);
    let ratio = t.zeta1 / t.zeta2;
    (1.0 + 2.0 * fr) * (1.0 + 2.0 * fr)
        + 2.0 * fa * (1.0 + 2.0 * fr) * ratio * t.cos_theta
        + fa * fa * ratio * ratio
}

/// Smallest near-pair distance from which the triplet update still
/// contracts: scan `h_a` on 1024 log-spaced points in [1e-6, 1e3] for
/// its first crossing below 1, then golden-section the bracketing
/// interval down to 1e-8 on `|h_a - 1|`.
///
/// Below the returned distance the far-point recoil dominates and the
/// near pair is pushed apart instead. Returns 0 when even the leftmost
/// grid point already contracts. When no grid point crosses (the update
/// contracts nowhere), refinement runs around the grid argmin of
/// `|h_a - 1|` so the result still witnesses the closest approach to
/// neutrality.
pub fn trimap_zeta1_min(zeta2: f64, cos_theta: f64, lambda: f64) -> Result<f64, DynamicsError> {
    // parameter checks ride on the state constructor
    TripletState::new(1.0, zeta2, cos_theta, lambda)?;
    let h = |z1: f64| {
        trimap_h_a(&TripletState {
            zeta1: z1,
            zeta2,
            cos_theta,
            lambda,
        })
    };
    const N: usize = 1024;
    let grid: Vec<f64> = (0..N)
        .map(|i| 10f64.powf(-6.0 + 9.0 * i as f64 / (N - 1) as f64))
        .collect();
    let values: Vec<f64> = grid.iter().map(|&z| h(z)).collect();
    if values[0] <= 1.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = match values.iter().position(|&v| v <= 1.0) {
        Some(i) => (grid[i - 1], grid[i]),
        None => {
            let i = values
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| {
                    (*a - 1.0).abs().partial_cmp(&(*b - 1.0).abs()).unwrap()
                })
                .map(|(i, _)| i)
                .unwrap();
            (grid[i.saturating_sub(1)], grid[(i + 1).min(N - 1)])
        }
    };
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    while hi - lo > 1e-8 {
        if (h(c) - 1.0).abs() < (h(d) - 1.0).abs() {
            hi = d;
            d = c;
            c = hi - phi * (hi - lo);
        } else {
            lo = c;
            c = d;
            d = lo + phi * (hi - lo);
        }
    }
    Ok(0.5 * (lo + hi))
}

fn tsne_q(z: f64) -> f64 {
    1.0 / (1.0 + z * z)
}

fn tsne_fr(z: f64) -> f64 {
    2.0 / ((1.0 + z * z) * (1.0 + z * z))
}

fn dist(y: &Array2<f64>, a: usize, b: usize) -> f64 {
    y.row(a)
        .iter()
        .zip(y.row(b).iter())
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

/// Squared distance factor of the pair `(i, j)` under one full
/// normalized repulsion update of the whole point set, together with
/// whether it expands.
///
/// The update pushes `y_i` away from every other point and `y_j`'s
/// neighbors away from `y_j`, all scaled by `lambda w_ij / Z` with
/// `Z` the sum of `1 / (1 + dist^2)` over ordered pairs. The factor
/// combines the direct `(i, j)` term with the coupling vector `v`
/// collecting every third-point contribution. Dense O(N^2) computation,
/// capped at N = 1000.
pub fn tsne_repulsion_expansion(
    y: &Array2<f64>,
    w: &Array2<f64>,
    i: usize,
    j: usize,
    lambda: f64,
) -> Result<(f64, bool), DynamicsError> {
    let n = y.nrows();
    if n > 1000 {
        return Err(DynamicsError::Param(format!("point set too large: {n} > 1000")));
    }
    if n < 2 {
        return Err(DynamicsError::Param("need at least two points".into()));
    }
    if w.nrows() != n || w.ncols() != n {
        return Err(DynamicsError::Dimension(format!(
            "weights are {}x{} for {} points",
            w.nrows(),
            w.ncols(),
            n
        )));
    }
    if i >= n || j >= n || i == j {
        return Err(DynamicsError::Param(format!(
            "need distinct indices below {n}, got ({i}, {j})"
        )));
    }
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(DynamicsError::Param("lambda must be finite and >= 0".into()));
    }
    let mut z_norm = 0.0;
    for k in 0..n {
        for l in 0..n {
            if k != l {
                z_norm += tsne_q(dist(y, k, l));
            }
        }
    }
    let scale = lambda * w[(i, j)] / z_norm;
    let zeta = dist(y, i, j);
    if zeta == 0.0 {
        return Err(DynamicsError::Param("pair (i, j) is coincident".into()));
    }
    let c = scale * tsne_fr(zeta);
    // coupling vector: every contribution to the motion of y_i and y_j
    // that does not come from the (i, j) interaction itself
    let dim = y.ncols();
    let mut v = Array1::<f64>::zeros(dim);
    for k in 0..n {
        if k == i || k == j {
            continue;
        }
        let fik = tsne_fr(dist(y, i, k));
        let fkj = tsne_fr(dist(y, k, j));
        for t in 0..dim {
            v[t] += scale * fik * (y[(i, t)] - y[(k, t)]);
            v[t] += scale * fkj * (y[(k, t)] - y[(j, t)]);
        }
    }
    let nv = norm(v.view());
    let cos_theta = if nv == 0.0 {
        0.0
    } else {
        let mut dot = 0.0;
        for t in 0..dim {
            dot += (y[(i, t)] - y[(j, t)]) * v[t];
        }
        dot / (zeta * nv)
    };
    let h = (1.0 + 2.0 * c) * (1.0 + 2.0 * c)
        + 2.0 * (1.0 + 2.0 * c) * (nv / zeta) * cos_theta
        + (nv / zeta) * (nv / zeta);
    Ok((h, h > 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::{eval_shape, ShapeKind, ShapeSpec};
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pair(y_i: Array1<f64>, y_j: Array1<f64>, lambda: f64) -> PairState {
        PairState::new(y_i, y_j, lambda).unwrap()
    }

    // ulp distance for non-negative finite floats
    fn ulp_diff(a: f64, b: f64) -> u64 {
        assert!(a >= 0.0 && b >= 0.0);
        (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs()
    }

    #[test]
    fn attract_step_examples() {
        let s = pair(array![1.0, 0.0], array![-1.0, 0.0], 1.0);
        let (yi, yj, factor) = pair_attract_step(&s, -0.25);
        assert_eq!(yi, array![0.5, 0.0]);
        assert_eq!(yj, array![-0.5, 0.0]);
        assert_abs_diff_eq!(factor, 0.5);

        // the sign-flip value collapses the pair
        let (yi, yj, factor) = pair_attract_step(&s, -0.5);
        assert_eq!(yi, array![0.0, 0.0]);
        assert_eq!(yj, array![0.0, 0.0]);
        assert_abs_diff_eq!(factor, 0.0);

        let (yi, yj, factor) = pair_attract_step(&s, 0.0);
        assert_eq!(yi, s.y_i);
        assert_eq!(yj, s.y_j);
        assert_abs_diff_eq!(factor, 1.0);
    }

    #[test]
    fn repel_step_examples() {
        let s = pair(array![1.0, 0.0], array![0.0, 0.0], 1.0);
        let (yi, yj, factor) = pair_repel_step(&s, 0.5);
        assert_eq!(yi, array![1.5, 0.0]);
        assert_eq!(yj, array![0.0, 0.0]);
        assert_abs_diff_eq!(factor, 1.5);

        let (_, _, factor) = pair_repel_step(&s, 0.0);
        assert_abs_diff_eq!(factor, 1.0);
        let (_, _, factor) = pair_repel_step(&s, 1.0);
        assert_abs_diff_eq!(factor, 2.0);
    }

    #[test]
    fn factors_match_closed_form_within_four_ulp() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let dims = [1usize, 2, 3, 10];
        for trial in 0..10_000 {
            let d = dims[trial % dims.len()];
            let y_i = Array1::from_iter((0..d).map(|_| rng.gen_range(-3.0..3.0)));
            let y_j = Array1::from_iter((0..d).map(|_| rng.gen_range(-3.0..3.0)));
            let lambda = rng.gen_range(0.0..1.0);
            let s = pair(y_i, y_j, lambda);
            let f_a = rng.gen_range(-2.0..0.0);
            let (_, _, factor) = pair_attract_step(&s, f_a);
            let analytic = (1.0 + 2.0 * lambda * f_a).abs();
            assert!(
                ulp_diff(factor, analytic) <= 4,
                "attract trial {trial}: {factor} vs {analytic}"
            );
            let f_r = rng.gen_range(0.0..2.0);
            let (_, _, factor) = pair_repel_step(&s, f_r);
            let analytic = 1.0 + lambda * f_r;
            assert!(
                ulp_diff(factor, analytic) <= 4,
                "repel trial {trial}: {factor} vs {analytic}"
            );
        }
    }

    #[test]
    fn moved_points_realize_the_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let d = rng.gen_range(1..6);
            let y_i = Array1::from_iter((0..d).map(|_| rng.gen_range(-3.0..3.0)));
            let y_j = Array1::from_iter((0..d).map(|_| rng.gen_range(-3.0..3.0)));
            let lambda: f64 = rng.gen_range(0.0..1.0);
            let f_a: f64 = rng.gen_range(-2.0..0.0);
            // skip the cancellation-dominated neighborhood of the collapse
            if (1.0 + 2.0 * lambda * f_a).abs() < 0.05 {
                continue;
            }
            let before = norm((&y_i - &y_j).view());
            if before < 1e-6 {
                continue;
            }
            let s = pair(y_i, y_j, lambda);
            let (ni, nj, factor) = pair_attract_step(&s, f_a);
            let after = norm((&ni - &nj).view());
            assert!(
                (after - factor * before).abs() <= 1e-12 * before.max(1.0),
                "{after} vs {}",
                factor * before
            );
        }
    }

    #[test]
    fn repulsion_factor_exceeds_one_for_all_catalog_kinds() {
        let kinds = [
            ShapeKind::UmapRep { a: 1.58, b: 0.89 },
            ShapeKind::GeneralRep {
                a: 1.0,
                b: 0.8,
                gamma: 2.0,
            },
            ShapeKind::NegTsneRep,
            ShapeKind::PacmapFar { w: 1.0 },
            ShapeKind::TsneRep,
            ShapeKind::SneRep,
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut positives = 0u32;
        for _ in 0..2000 {
            let zeta = 10f64.powf(rng.gen_range(-3.0..2.0));
            let lambda = rng.gen_range(1e-6..1.0f64);
            for kind in &kinds {
                let spec = ShapeSpec::bare(kind.clone()).unwrap();
                let f_r = eval_shape(&spec, zeta, 0).unwrap();
                assert!(f_r >= 0.0);
                let s = pair(array![zeta, 0.0], array![0.0, 0.0], lambda);
                let (_, _, factor) = pair_repel_step(&s, f_r);
                // a push can saturate to no-op when lambda * f_r falls
                // below one ulp of 1 (the sharp exponential far out);
                // it must never contract, and any resolvable push grows
                assert!(factor >= 1.0, "{kind:?} at zeta {zeta} contracted: {factor}");
                if lambda * f_r > 1e-15 {
                    assert!(factor > 1.0, "{kind:?} at zeta {zeta} gave factor {factor}");
                    positives += 1;
                }
            }
        }
        assert!(positives > 10_000, "premise held too rarely: {positives}");
    }

    #[test]
    fn classification_boundaries_are_exact() {
        use PairUpdateClass::*;
        assert_eq!(classify_pair_update(1.0, -0.3), Contract);
        assert_eq!(classify_pair_update(1.0, -0.5), Coincide);
        assert_eq!(classify_pair_update(0.5, -1.0), Coincide);
        assert_eq!(classify_pair_update(1.0, 0.0), Fixed);
        assert_eq!(classify_pair_update(1.0, -1.0), Fixed);
        assert_eq!(classify_pair_update(1.0, -1.2), ExpandWithFlip);
        assert_eq!(classify_pair_update(1.0, 0.1), ExpandNoForceSense);
        assert_eq!(classify_pair_update(1.0, -0.9999999), Contract);
    }

    #[test]
    fn localmap_contracts_inside_flip_radius() {
        // K=10, C=10 flips at zeta = 3, and |f| stays far from the
        // overshoot boundary, so classification is clean on both sides
        let spec = ShapeSpec::bare(ShapeKind::LocalMapAr { k: 10.0, c: 10.0 }).unwrap();
        for i in 0..50 {
            let zeta = 0.05 + 2.9 * i as f64 / 49.0;
            let f = eval_shape(&spec, zeta, 0).unwrap();
            assert_eq!(
                classify_pair_update(1.0, f),
                PairUpdateClass::Contract,
                "zeta {zeta}"
            );
        }
        for i in 0..50 {
            let zeta = 3.01 + 5.0 * i as f64 / 49.0;
            let f = eval_shape(&spec, zeta, 0).unwrap();
            assert_eq!(
                classify_pair_update(1.0, f),
                PairUpdateClass::ExpandNoForceSense,
                "zeta {zeta}"
            );
        }
    }

    // Apply the three-point update equations to an explicit planar
    // triplet and report both squared distance ratios.
    fn triplet_brute(z1: f64, z2: f64, cos_theta: f64, lambda: f64) -> (f64, f64) {
        let y_i = array![0.0, 0.0];
        let y_j = array![-z1, 0.0];
        let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
        let y_k = array![-z2 * cos_theta, -z2 * sin_theta];
        let fa = trimap_attr(z1, z2);
        let fr = trimap_rep(z1, z2);
        let dij = &y_i - &y_j;
        let dik = &y_i - &y_k;
        let ni = &y_i + &dij.mapv(|v| lambda * fa * v) + &dik.mapv(|v| lambda * fr * v);
        let nj = &y_j - &dij.mapv(|v| lambda * fa * v);
        let nk = &y_k - &dik.mapv(|v| lambda * fr * v);
        let r1 = (&ni - &nj).iter().map(|v| v * v).sum::<f64>() / (z1 * z1);
        let r2 = (&ni - &nk).iter().map(|v| v * v).sum::<f64>() / (z2 * z2);
        (r1, r2)
    }

    #[test]
    fn trimap_factors_frozen_instance() {
        let t = TripletState::new(1.0, 0.5, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(trimap_h_a(&t), 0.512622107069, epsilon = 1e-9);
        assert_abs_diff_eq!(trimap_h_r(&t), 1.648716781625, epsilon = 1e-9);
        let (r1, r2) = triplet_brute(1.0, 0.5, 1.0, 1.0);
        assert!((trimap_h_a(&t) - r1).abs() / r1 < 1e-10);
        assert!((trimap_h_r(&t) - r2).abs() / r2 < 1e-10);
    }

    #[test]
    fn trimap_cross_term_vanishes_at_right_angle() {
        let t = TripletState::new(0.8, 1.7, 0.0, 0.6).unwrap();
        let fa = t.lambda * trimap_attr(t.zeta1, t.zeta2);
        let fr = t.lambda * trimap_rep(t.zeta1, t.zeta2);
        let expect = (1.0 + 2.0 * fa).powi(2) + (fr * t.zeta2 / t.zeta1).powi(2);
        assert_abs_diff_eq!(trimap_h_a(&t), expect, epsilon = 1e-15);
    }

    #[test]
    fn trimap_factor_approaches_one_for_distant_far_point() {
        let t = TripletState::new(1.0, 1e4, 0.3, 1.0).unwrap();
        assert_abs_diff_eq!(trimap_h_a(&t), 0.999999920002, epsilon = 1e-9);
        assert!((trimap_h_a(&t) - 1.0).abs() < 1e-7);
    }

    #[test]
    fn trimap_agrees_with_brute_force_on_random_triplets() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut checked = 0;
        for _ in 0..10_000 {
            let z1 = 10f64.powf(rng.gen_range(-2.0..1.0));
            let z2 = 10f64.powf(rng.gen_range(-2.0..1.0));
            let cth = rng.gen_range(-1.0..1.0);
            let lam = rng.gen_range(0.01..1.0);
            let t = TripletState::new(z1, z2, cth, lam).unwrap();
            let (r1, r2) = triplet_brute(z1, z2, cth, lam);
            let (ha, hr) = (trimap_h_a(&t), trimap_h_r(&t));
            assert!((ha - r1).abs() / r1.max(1e-30) < 1e-10);
            assert!((hr - r2).abs() / r2.max(1e-30) < 1e-10);
            // boolean agreement away from the neutral band
            if (ha - 1.0).abs() >= 1e-9 {
                assert_eq!(ha < 1.0, r1 < 1.0, "at ({z1}, {z2}, {cth}, {lam})");
                checked += 1;
            }
            if (hr - 1.0).abs() >= 1e-9 {
                assert_eq!(hr > 1.0, r2 > 1.0);
            }
        }
        assert!(checked > 9000, "neutral band swallowed too many cases");
    }

    #[test]
    fn zeta1_min_frozen_values() {
        // the contraction onset for the reference instance sits at the
        // analytic root (5 - sqrt 21) / 2
        let z = trimap_zeta1_min(0.5, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(z, 0.2087121525, epsilon = 1e-6);
        for (z2, want) in [
            (0.25, 0.11932209),
            (1.0, 0.26794919),
            (2.0, 0.20871215),
            (4.0, 0.11932209),
        ] {
            let got = trimap_zeta1_min(z2, 1.0, 1.0).unwrap();
            assert_abs_diff_eq!(got, want, epsilon = 1e-6);
        }
        // negative-angle instances
        assert_abs_diff_eq!(
            trimap_zeta1_min(0.5, -0.5, 1.0).unwrap(),
            0.19409312,
            epsilon = 1e-6
        );
        assert_abs_diff_eq!(
            trimap_zeta1_min(0.5, 0.0, 1.0).unwrap(),
            0.19851842,
            epsilon = 1e-6
        );
    }

    #[test]
    fn zeta1_min_result_sits_on_the_neutral_line() {
        for (z2, cth, lam) in [
            (0.5, 1.0, 1.0),
            (0.25, 1.0, 1.0),
            (0.5, 0.0, 0.1),
            (0.5, -1.0, 1.0),
            (2.0, 0.3, 0.7),
        ] {
            let z = trimap_zeta1_min(z2, cth, lam).unwrap();
            let t = TripletState::new(z.max(1e-12), z2, cth, lam).unwrap();
            assert!(
                (trimap_h_a(&t) - 1.0).abs() < 1e-6,
                "({z2}, {cth}, {lam}) -> {z}"
            );
        }
    }

    #[test]
    fn zeta1_min_vanishes_with_the_learning_rate() {
        let z = trimap_zeta1_min(0.5, 0.0, 1e-6).unwrap();
        assert!(z > 0.0 && z < 1e-3, "got {z}");
        assert_abs_diff_eq!(z, 0.00014055, epsilon = 1e-6);
        // shrinks monotonically along a lambda ladder
        let ladder: Vec<f64> = [1.0, 0.5, 0.1, 0.01]
            .iter()
            .map(|&l| trimap_zeta1_min(0.5, 0.0, l).unwrap())
            .collect();
        for w in ladder.windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn tsne_expansion_frozen_collinear_instance() {
        let y = array![[0.0, 0.0], [1.5, 0.0], [3.1, 0.0]];
        let w = Array2::from_elem((3, 3), 1.0);
        let (h, expands) = tsne_repulsion_expansion(&y, &w, 0, 1, 1.0).unwrap();
        assert_abs_diff_eq!(h, 1.394584168638, epsilon = 1e-9);
        assert!(expands);
    }

    // Move the whole configuration by the normalized repulsion update
    // and report the squared distance ratio of the chosen pair.
    fn tsne_brute(y: &Array2<f64>, w: &Array2<f64>, i: usize, j: usize, lambda: f64) -> f64 {
        let n = y.nrows();
        let mut z_norm = 0.0;
        for k in 0..n {
            for l in 0..n {
                if k != l {
                    z_norm += tsne_q(dist(y, k, l));
                }
            }
        }
        let c = lambda * w[(i, j)] / z_norm;
        let dim = y.ncols();
        let mut ni = y.row(i).to_owned();
        for k in 0..n {
            if k == i {
                continue;
            }
            let f = tsne_fr(dist(y, i, k));
            for t in 0..dim {
                ni[t] += c * f * (y[(i, t)] - y[(k, t)]);
            }
        }
        let mut nj = y.row(j).to_owned();
        for l in 0..n {
            if l == j {
                continue;
            }
            let f = tsne_fr(dist(y, l, j));
            for t in 0..dim {
                nj[t] -= c * f * (y[(l, t)] - y[(j, t)]);
            }
        }
        let before = dist(y, i, j);
        let after2 = ni
            .iter()
            .zip(nj.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
        after2 / (before * before)
    }

    #[test]
    fn tsne_expansion_matches_brute_force() {
        let y = array![[0.0, 0.0], [1.5, 0.0], [3.1, 0.0]];
        let w = Array2::from_elem((3, 3), 1.0);
        let (h, _) = tsne_repulsion_expansion(&y, &w, 0, 1, 1.0).unwrap();
        let r = tsne_brute(&y, &w, 0, 1, 1.0);
        assert!((h - r).abs() / r < 1e-10);

        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..200 {
            let n = rng.gen_range(3..9);
            let y = Array2::from_shape_fn((n, 2), |_| rng.gen_range(-2.0..2.0));
            let w = Array2::from_shape_fn((n, n), |(a, b)| {
                if a == b {
                    0.0
                } else {
                    rng.gen_range(0.0..1.0)
                }
            });
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n);
            if j == i {
                j = (j + 1) % n;
            }
            let lambda = rng.gen_range(0.0..1.0);
            let (h, expands) = tsne_repulsion_expansion(&y, &w, i, j, lambda).unwrap();
            let r = tsne_brute(&y, &w, i, j, lambda);
            assert!(
                (h - r).abs() / r.max(1e-30) < 1e-9,
                "trial {trial}: {h} vs {r}"
            );
            if (h - 1.0).abs() > 1e-12 {
                assert_eq!(expands, r > 1.0);
            }
        }
    }

    #[test]
    fn tsne_expansion_degenerate_inputs() {
        let y = array![[0.0, 0.0], [1.5, 0.0], [3.1, 0.0]];
        let mut w = Array2::from_elem((3, 3), 1.0);
        w[(0, 1)] = 0.0;
        // an unweighted pair receives no update at all
        let (h, expands) = tsne_repulsion_expansion(&y, &w, 0, 1, 1.0).unwrap();
        assert_eq!(h, 1.0);
        assert!(!expands);

        let w1 = Array2::from_elem((3, 3), 1.0);
        let (h, expands) = tsne_repulsion_expansion(&y, &w1, 0, 1, 0.0).unwrap();
        assert_eq!(h, 1.0);
        assert!(!expands);

        assert!(tsne_repulsion_expansion(&y, &w1, 0, 0, 1.0).is_err());
        let bad_w = Array2::from_elem((2, 2), 1.0);
        assert!(matches!(
            tsne_repulsion_expansion(&y, &bad_w, 0, 1, 1.0),
            Err(DynamicsError::Dimension(_))
        ));
    }

    #[test]
    fn state_constructors_validate() {
        assert!(PairState::new(array![1.0], array![1.0, 2.0], 1.0).is_err());
        assert!(PairState::new(array![f64::NAN], array![1.0], 1.0).is_err());
        assert!(PairState::new(array![1.0], array![0.0], -0.5).is_err());
        assert!(TripletState::new(0.0, 1.0, 0.5, 1.0).is_err());
        assert!(TripletState::new(1.0, 1.0, 1.5, 1.0).is_err());
        assert!(TripletState::new(1.0, 1.0, 0.5, 0.0).is_err());
        assert!(trimap_zeta1_min(1.0, 2.0, 1.0).is_err());
    }
}
