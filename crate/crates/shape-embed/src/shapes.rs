//! Catalog of force shape functions and the tools that certify them.
//!
//! Every shape is a scalar function `f(zeta)` of the embedding-space
//! distance `zeta = |y_i - y_j|`. The optimizer moves points by
//! `lambda * f(zeta) * (y_i - y_j)`, so negative values attract and
//! positive values repel. Shapes are bundled into a [`ShapeSpec`]
//! together with an ordered list of [`Modifier`]s, which is what the
//! rest of the crate consumes.
//!
//! Parameter validation happens at construction (and therefore at
//! deserialization); evaluation assumes a valid spec and only has to
//! worry about `zeta` itself.

use serde::{Deserialize, Serialize};

use crate::error::ShapeError;

fn default_pair_weight() -> f64 {
    1.0
}

/// Which side of the force balance a shape belongs to.
///
/// Mixed shapes change sign with distance (spring-like) and are accepted
/// wherever an attractive shape is, since their short-range behavior is
/// attraction toward a target distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignClass {
    Attractive,
    Repulsive,
    Mixed,
}

/// The shape catalog. Parameters ride along in the variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeKind {
    /// `-2ab z^(2(b-1)) / (1 + a z^(2b))`, the low-dimensional kernel
    /// gradient shape. Singular at zero when `b < 1`.
    UmapAttr { a: f64, b: f64 },
    /// `2b / (z^2 (1 + a z^(2b)))`. Always singular at zero.
    UmapRep { a: f64, b: f64 },
    /// `-2ab z^(2(b-1)) / (gamma + a z^(2b))`; `gamma = 1` recovers
    /// `UmapAttr`.
    GeneralAttr { a: f64, b: f64, gamma: f64 },
    /// `2ab z^(2(b-1)) / ((gamma - 1 + a z^(2b)) (gamma + a z^(2b)))`;
    /// `gamma = 1` recovers `UmapRep`, `gamma = 2, a = b = 1` the
    /// bounded pair below.
    GeneralRep { a: f64, b: f64, gamma: f64 },
    /// `-2 / (2 + z^2)`, bounded in [-1, 0). The tame attraction member
    /// of the general family at `gamma = 2, a = b = 1`.
    NegTsneAttr,
    /// `2 / ((1 + z^2)(2 + z^2))`, bounded in (0, 1].
    NegTsneRep,
    /// `-20 w / (11 + z^2)^2`, near-pair attraction.
    PacmapNear {
        #[serde(default = "default_pair_weight")]
        w: f64,
    },
    /// `-20000 w / (10001 + z^2)^2`, mid-near attraction.
    PacmapMid {
        #[serde(default = "default_pair_weight")]
        w: f64,
    },
    /// `2w / (2 + z^2)^2`, bounded repulsion with `f(0) = w/2`.
    PacmapFar {
        #[serde(default = "default_pair_weight")]
        w: f64,
    },
    /// `-K (C - 1 - z^2) / (2 sqrt(1 + z^2) (1 + C + z^2)^2)`.
    /// Attracts below `z = sqrt(C - 1)`, repels beyond it.
    LocalMapAr { k: f64, c: f64 },
    /// `-2 / (1 + z^2)`, heavy-tailed attraction without cutoff.
    TsneAttr,
    /// `2 / (1 + z^2)^2`.
    TsneRep,
    /// Constant `-2`: attraction that never lets go.
    SneAttr,
    /// `2 exp(-z^2)`.
    SneRep,
    /// `-2 (z - d) / z`, a spring toward target distance `d`. Singular
    /// at zero unless `d = 0`.
    MdsAr { d_target: f64 },
    /// `-(1/2) (z - d) / z`, the same spring with a gentler constant.
    GraphMdsAr { d_target: f64 },
}

impl ShapeKind {
    pub fn validate(&self) -> Result<(), ShapeError> {
        use ShapeKind::*;
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(ShapeError::Param(msg.to_string()))
            }
        };
        match self {
            UmapAttr { a, b } | UmapRep { a, b } => {
                check(a.is_finite() && *a > 0.0, "a must be finite and > 0")?;
                check(b.is_finite() && *b > 0.0, "b must be finite and > 0")
            }
            GeneralAttr { a, b, gamma } | GeneralRep { a, b, gamma } => {
                check(a.is_finite() && *a > 0.0, "a must be finite and > 0")?;
                check(b.is_finite() && *b > 0.0, "b must be finite and > 0")?;
                check(gamma.is_finite() && *gamma >= 1.0, "gamma must be >= 1")
            }
            PacmapNear { w } | PacmapMid { w } | PacmapFar { w } => {
                check(w.is_finite() && *w > 0.0, "w must be finite and > 0")
            }
            LocalMapAr { k, c } => {
                check(k.is_finite() && *k > 0.0, "K must be finite and > 0")?;
                check(c.is_finite() && *c > 1.0, "C must be finite and > 1")
            }
            MdsAr { d_target } | GraphMdsAr { d_target } => check(
                d_target.is_finite() && *d_target >= 0.0,
                "d_target must be finite and >= 0",
            ),
            NegTsneAttr | NegTsneRep | TsneAttr | TsneRep | SneAttr | SneRep => Ok(()),
        }
    }

    /// True when the bare formula diverges as `zeta -> 0`.
    pub fn singular_at_zero(&self) -> bool {
        use ShapeKind::*;
        match self {
            UmapAttr { b, .. } | GeneralAttr { b, .. } => *b < 1.0,
            UmapRep { .. } => true,
            // gamma = 1 leaves a bare z^2 in the denominator for any b.
            GeneralRep { b, gamma, .. } => *gamma == 1.0 || *b < 1.0,
            MdsAr { d_target } | GraphMdsAr { d_target } => *d_target > 0.0,
            _ => false,
        }
    }

    pub fn sign_class(&self) -> SignClass {
        use ShapeKind::*;
        match self {
            UmapAttr { .. } | GeneralAttr { .. } | NegTsneAttr | PacmapNear { .. }
            | PacmapMid { .. } | TsneAttr | SneAttr => SignClass::Attractive,
            UmapRep { .. } | GeneralRep { .. } | NegTsneRep | PacmapFar { .. } | TsneRep
            | SneRep => SignClass::Repulsive,
            LocalMapAr { .. } | MdsAr { .. } | GraphMdsAr { .. } => SignClass::Mixed,
        }
    }

    fn eval(&self, z: f64) -> f64 {
        use ShapeKind::*;
        let z2 = z * z;
        match self {
            UmapAttr { a, b } => {
                -2.0 * a * b * z.powf(2.0 * (b - 1.0)) / (1.0 + a * z.powf(2.0 * b))
            }
            UmapRep { a, b } => 2.0 * b / (z2 * (1.0 + a * z.powf(2.0 * b))),
            GeneralAttr { a, b, gamma } => {
                -2.0 * a * b * z.powf(2.0 * (b - 1.0)) / (gamma + a * z.powf(2.0 * b))
            }
            GeneralRep { a, b, gamma } => {
                let az2b = a * z.powf(2.0 * b);
                2.0 * a * b * z.powf(2.0 * (b - 1.0)) / ((gamma - 1.0 + az2b) * (gamma + az2b))
            }
            NegTsneAttr => -2.0 / (2.0 + z2),
            NegTsneRep => 2.0 / ((1.0 + z2) * (2.0 + z2)),
            PacmapNear { w } => {
                let d = 11.0 + z2;
                -20.0 * w / (d * d)
            }
            PacmapMid { w } => {
                let d = 10001.0 + z2;
                -20000.0 * w / (d * d)
            }
            PacmapFar { w } => {
                let d = 2.0 + z2;
                2.0 * w / (d * d)
            }
            LocalMapAr { k, c } => {
                let d = 1.0 + c + z2;
                -k * (c - 1.0 - z2) / (2.0 * (1.0 + z2).sqrt() * d * d)
            }
            TsneAttr => -2.0 / (1.0 + z2),
            TsneRep => 2.0 / ((1.0 + z2) * (1.0 + z2)),
            SneAttr => -2.0,
            SneRep => 2.0 * (-z2).exp(),
            // d_target > 0 never reaches z = 0 (caught as singular), so
            // the z = 0 arm only serves the degenerate d = 0 spring.
            MdsAr { d_target } => {
                if z == 0.0 {
                    -2.0
                } else {
                    -2.0 * (z - d_target) / z
                }
            }
            GraphMdsAr { d_target } => {
                if z == 0.0 {
                    -0.5
                } else {
                    -0.5 * (z - d_target) / z
                }
            }
        }
    }
}

/// Post-composition tweaks applied to a base shape, in list order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Modifier {
    /// `f(z) - beta z`, the gradient of a cubic distance penalty.
    LinearAdd { beta: f64 },
    /// `f(z) + eps`, the gradient of a quadratic spread bonus.
    ConstShift { eps: f64 },
    /// `c f(z)`.
    Scale { c: f64 },
    /// Evaluate the current chain while `epoch < switch_epoch`, then hand
    /// the whole evaluation over to `other`. Later modifiers in the
    /// current chain do not apply after the switch.
    CompositeSwitch {
        other: Box<ShapeSpec>,
        switch_epoch: u32,
    },
}

impl Modifier {
    fn validate(&self) -> Result<(), ShapeError> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(ShapeError::Param(msg.to_string()))
            }
        };
        match self {
            Modifier::LinearAdd { beta } => {
                check(beta.is_finite() && *beta >= 0.0, "beta must be >= 0")
            }
            Modifier::ConstShift { eps } => {
                check(eps.is_finite() && *eps >= 0.0, "eps must be >= 0")
            }
            Modifier::Scale { c } => check(c.is_finite() && *c > 0.0, "scale must be > 0"),
            // `other` is a ShapeSpec, valid by construction.
            Modifier::CompositeSwitch { .. } => Ok(()),
        }
    }
}

/// A base shape plus its modifier chain. The only way to build one is
/// through [`ShapeSpec::new`] (or deserialization, which funnels into
/// it), so a `ShapeSpec` in hand always has valid parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ShapeSpecRaw")]
pub struct ShapeSpec {
    kind: ShapeKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    modifiers: Vec<Modifier>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ShapeSpecRaw {
    kind: ShapeKind,
    #[serde(default)]
    modifiers: Vec<Modifier>,
}

impl TryFrom<ShapeSpecRaw> for ShapeSpec {
    type Error = ShapeError;
    fn try_from(raw: ShapeSpecRaw) -> Result<Self, ShapeError> {
        ShapeSpec::new(raw.kind, raw.modifiers)
    }
}

impl ShapeSpec {
    pub fn new(kind: ShapeKind, modifiers: Vec<Modifier>) -> Result<Self, ShapeError> {
        kind.validate()?;
        for m in &modifiers {
            m.validate()?;
        }
        Ok(Self { kind, modifiers })
    }

    /// A spec with no modifiers.
    pub fn bare(kind: ShapeKind) -> Result<Self, ShapeError> {
        Self::new(kind, Vec::new())
    }

    pub fn kind(&self) -> &ShapeKind {
        &self.kind
    }

    pub fn modifiers(&self) -> &[Modifier] {
        &self.modifiers
    }

    /// Sign class of the base kind. Modifiers keep a shape on its side
    /// of the balance (they are all sign-preserving for the parameter
    /// ranges we accept), so the base kind decides.
    pub fn sign_class(&self) -> SignClass {
        self.kind.sign_class()
    }

    /// True when evaluating this spec at `zeta = 0` would divide by zero,
    /// taking a pending composite switch into account.
    pub fn singular_at_zero(&self, epoch: u32) -> bool {
        if let Some(other) = self.switched(epoch) {
            return other.singular_at_zero(epoch);
        }
        self.kind.singular_at_zero()
    }

    fn switched(&self, epoch: u32) -> Option<&ShapeSpec> {
        self.modifiers.iter().find_map(|m| match m {
            Modifier::CompositeSwitch {
                other,
                switch_epoch,
            } if epoch >= *switch_epoch => Some(other.as_ref()),
            _ => None,
        })
    }
}

/// Evaluate `f(zeta)` for a spec at a given epoch.
///
/// The epoch only matters when the chain contains a
/// [`Modifier::CompositeSwitch`]. Returns a domain error for `zeta < 0`,
/// non-finite `zeta`, or `zeta = 0` on a shape whose formula is singular
/// there.
pub fn eval_shape(spec: &ShapeSpec, zeta: f64, epoch: u32) -> Result<f64, ShapeError> {
    if !zeta.is_finite() || zeta < 0.0 {
        return Err(ShapeError::Domain {
            zeta,
            detail: "zeta must be finite and >= 0".to_string(),
        });
    }
    if let Some(other) = spec.switched(epoch) {
        return eval_shape(other, zeta, epoch);
    }
    if zeta == 0.0 && spec.kind.singular_at_zero() {
        return Err(ShapeError::Domain {
            zeta,
            detail: "shape formula diverges at zeta = 0".to_string(),
        });
    }
    let mut f = spec.kind.eval(zeta);
    for m in &spec.modifiers {
        match m {
            Modifier::LinearAdd { beta } => f -= beta * zeta,
            Modifier::ConstShift { eps } => f += eps,
            Modifier::Scale { c } => f *= c,
            Modifier::CompositeSwitch { .. } => {}
        }
    }
    Ok(f)
}

/// Result of the monotonicity certificate for the general attraction
/// family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monotonicity {
    pub strictly_increasing: bool,
    /// A `zeta` where the derivative condition fails, when it does.
    pub witness: Option<f64>,
}

/// Certify that `GeneralAttr { a, b, gamma }` is strictly increasing on
/// `(0, inf)`.
///
/// The derivative of the shape has the sign of
/// `-(b - 1 - a b z^(2b) / (gamma + a z^(2b)))`, so the shape is
/// increasing wherever that inner expression is negative. `b <= 1` makes
/// it negative everywhere; the grid scan over 512 log-spaced points in
/// `[1e-6, 1e6]` backs the analytic condition and produces a witness
/// when `b > 1`.
pub fn check_strictly_increasing(a: f64, b: f64, gamma: f64) -> Result<Monotonicity, ShapeError> {
    ShapeKind::GeneralAttr { a, b, gamma }.validate()?;
    let mut witness = None;
    for i in 0..512 {
        let z = 10f64.powf(-6.0 + 12.0 * i as f64 / 511.0);
        let az2b = a * z.powf(2.0 * b);
        let g = (b - 1.0) - a * b * z.powf(2.0 * b) / (gamma + az2b);
        if g >= 0.0 {
            witness = Some(z);
            break;
        }
    }
    let strictly_increasing = b <= 1.0 && witness.is_none();
    // b > 1 fails analytically even if the grid were too coarse to see
    // it; near zero the inner expression tends to b - 1 > 0.
    if b > 1.0 && witness.is_none() {
        witness = Some(1e-6);
    }
    Ok(Monotonicity {
        strictly_increasing,
        witness,
    })
}

fn invertibility_certificate(spec: &ShapeSpec) -> Result<(), ShapeError> {
    use ShapeKind::*;
    for m in spec.modifiers() {
        match m {
            // Scaling and constant shifts preserve strict monotonicity.
            Modifier::Scale { .. } | Modifier::ConstShift { .. } => {}
            Modifier::LinearAdd { .. } => {
                return Err(ShapeError::NonInvertible(
                    "a linear term breaks the monotone certificate".to_string(),
                ))
            }
            Modifier::CompositeSwitch { .. } => {
                return Err(ShapeError::NonInvertible(
                    "an epoch switch has no single inverse".to_string(),
                ))
            }
        }
    }
    let mono = match spec.kind() {
        UmapAttr { a, b } => check_strictly_increasing(*a, *b, 1.0)?,
        GeneralAttr { a, b, gamma } => check_strictly_increasing(*a, *b, *gamma)?,
        NegTsneAttr => check_strictly_increasing(1.0, 1.0, 2.0)?,
        TsneAttr => check_strictly_increasing(1.0, 1.0, 1.0)?,
        // Derivative 80 w z / (11 + z^2)^3 (resp. the mid-range twin) is
        // positive for z > 0.
        PacmapNear { .. } | PacmapMid { .. } => Monotonicity {
            strictly_increasing: true,
            witness: None,
        },
        other => {
            return Err(ShapeError::NonInvertible(format!(
                "{:?} is not a certified increasing attraction shape",
                other
            )))
        }
    };
    if !mono.strictly_increasing {
        return Err(ShapeError::NonInvertible(format!(
            "monotonicity fails near zeta = {:.3e}",
            mono.witness.unwrap_or(f64::NAN)
        )));
    }
    Ok(())
}

/// Largest distance from which a pair still contracts: the root of
/// `lambda f(zeta) = -1`, or 0 when `lambda f(0) >= -1` and no overshoot
/// is possible.
///
/// Requires an attraction shape certified strictly increasing; others
/// are rejected with a non-invertibility error. Bisection runs on
/// `[1e-12, 1e6]` to an interval width of 1e-10.
pub fn zeta_minus_one(spec: &ShapeSpec, lambda: f64) -> Result<f64, ShapeError> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(ShapeError::Param("lambda must be finite and >= 0".to_string()));
    }
    invertibility_certificate(spec)?;
    let h = |z: f64| -> Result<f64, ShapeError> { Ok(lambda * eval_shape(spec, z, 0)? + 1.0) };
    let f0 = if spec.kind().singular_at_zero() {
        f64::NEG_INFINITY
    } else {
        eval_shape(spec, 0.0, 0)?
    };
    if lambda * f0 >= -1.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (1e-12, 1e6);
    if h(lo)? >= 0.0 {
        // The crossing sits below the bracket floor; it is zero for any
        // practical purpose.
        return Ok(0.0);
    }
    if h(hi)? <= 0.0 {
        return Err(ShapeError::NoRoot { lo, hi });
    }
    for _ in 0..200 {
        if hi - lo < 1e-10 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if h(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Inputs for [`fit_ab`]: match `1 / (1 + a z^(2b))` to the piecewise
/// target that is 1 below `min_dist` and decays exponentially with
/// `spread` beyond it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelFitConfig {
    pub min_dist: f64,
    pub spread: f64,
    /// Right edge of the fitting grid; the grid is `grid_points` uniform
    /// samples of `(0, grid_max]`.
    pub grid_max: f64,
    pub grid_points: usize,
}

impl Default for KernelFitConfig {
    fn default() -> Self {
        Self {
            min_dist: 0.1,
            spread: 1.0,
            grid_max: 3.0,
            grid_points: 300,
        }
    }
}

/// Fit `(a, b)` by damped least squares in `(log a, log b)` from the
/// starting point `(1, 1)`.
///
/// Stops when the step norm drops below 1e-8 or after 200 iterations;
/// reports a convergence error if the cost fails to improve by 1e-12
/// for 20 consecutive iterations first.
pub fn fit_ab(cfg: &KernelFitConfig) -> Result<(f64, f64), ShapeError> {
    let check = |ok: bool, msg: &str| {
        if ok {
            Ok(())
        } else {
            Err(ShapeError::Param(msg.to_string()))
        }
    };
    check(
        cfg.min_dist.is_finite() && cfg.min_dist > 0.0,
        "min_dist must be > 0",
    )?;
    check(cfg.spread.is_finite() && cfg.spread > 0.0, "spread must be > 0")?;
    check(
        cfg.grid_max.is_finite() && cfg.grid_max > cfg.min_dist,
        "grid_max must exceed min_dist",
    )?;
    check(cfg.grid_points >= 10, "grid_points must be at least 10")?;

    let n = cfg.grid_points;
    let z: Vec<f64> = (1..=n)
        .map(|i| cfg.grid_max * i as f64 / n as f64)
        .collect();
    let target: Vec<f64> = z
        .iter()
        .map(|&zi| {
            if zi < cfg.min_dist {
                1.0
            } else {
                (-(zi - cfg.min_dist) / cfg.spread).exp()
            }
        })
        .collect();

    let resid = |la: f64, lb: f64| -> Vec<f64> {
        let (a, b) = (la.exp(), lb.exp());
        z.iter()
            .zip(&target)
            .map(|(&zi, &ti)| 1.0 / (1.0 + a * zi.powf(2.0 * b)) - ti)
            .collect()
    };

    let (mut la, mut lb) = (0.0f64, 0.0f64);
    let mut mu = 1e-3;
    let mut r = resid(la, lb);
    let mut cost: f64 = r.iter().map(|ri| ri * ri).sum();
    let mut stall = 0;

    for _ in 0..200 {
        let (a, b) = (la.exp(), lb.exp());
        // Jacobian w.r.t. (log a, log b): dq/dla = -q^2 a z^(2b),
        // dq/dlb = that again times 2 b ln z.
        let (mut h00, mut h01, mut h11) = (0.0, 0.0, 0.0);
        let (mut g0, mut g1) = (0.0, 0.0);
        for (i, &zi) in z.iter().enumerate() {
            let z2b = zi.powf(2.0 * b);
            let q = 1.0 / (1.0 + a * z2b);
            let j0 = -q * q * a * z2b;
            let j1 = j0 * 2.0 * b * zi.ln();
            h00 += j0 * j0;
            h01 += j0 * j1;
            h11 += j1 * j1;
            g0 += j0 * r[i];
            g1 += j1 * r[i];
        }
        let (mut s0, mut s1);
        let (nla, nlb, nr, ncost);
        loop {
            let det = (h00 + mu) * (h11 + mu) - h01 * h01;
            if !det.is_finite() || det.abs() < 1e-300 {
                mu *= 10.0;
                continue;
            }
            s0 = (-g0 * (h11 + mu) + g1 * h01) / det;
            s1 = (-g1 * (h00 + mu) + g0 * h01) / det;
            let (tla, tlb) = (la + s0, lb + s1);
            let tr = resid(tla, tlb);
            let tcost: f64 = tr.iter().map(|ri| ri * ri).sum();
            if tcost <= cost || mu > 1e12 {
                nla = tla;
                nlb = tlb;
                nr = tr;
                ncost = tcost;
                break;
            }
            mu *= 10.0;
        }
        let improve = cost - ncost;
        la = nla;
        lb = nlb;
        r = nr;
        cost = ncost;
        mu = (mu / 3.0).max(1e-12);
        if (s0 * s0 + s1 * s1).sqrt() < 1e-8 {
            break;
        }
        stall = if improve < 1e-12 { stall + 1 } else { 0 };
        if stall >= 20 {
            return Err(ShapeError::Convergence(
                "cost stalled for 20 iterations".to_string(),
            ));
        }
    }
    Ok((la.exp(), lb.exp()))
}

/// `K` cap that keeps the local shape's strongest pull a contraction:
/// `lambda (1 + C)^2 / (C - 1)`.
pub fn localmap_max_k(c: f64, lambda: f64) -> Result<f64, ShapeError> {
    if !c.is_finite() || c <= 1.0 {
        return Err(ShapeError::Param("C must be finite and > 1".to_string()));
    }
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(ShapeError::Param("lambda must be finite and > 0".to_string()));
    }
    Ok(lambda * (1.0 + c) * (1.0 + c) / (c - 1.0))
}

/// One sampled point of a shape curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub zeta: f64,
    pub f: f64,
    /// True when `zeta = 0` was nudged to 1e-9 to avoid a singularity.
    pub clamped: bool,
}

/// Sample a shape on a uniform grid for plotting or export.
///
/// A singular left endpoint at exactly zero is evaluated at 1e-9 instead
/// and flagged; every returned value is finite.
pub fn dump_shape_curve(
    spec: &ShapeSpec,
    zeta_min: f64,
    zeta_max: f64,
    n_points: usize,
    epoch: u32,
) -> Result<Vec<CurvePoint>, ShapeError> {
    if !(zeta_min.is_finite() && zeta_max.is_finite()) || zeta_min < 0.0 || zeta_max <= zeta_min {
        return Err(ShapeError::Param(
            "need 0 <= zeta_min < zeta_max, both finite".to_string(),
        ));
    }
    if n_points < 2 {
        return Err(ShapeError::Param("n_points must be at least 2".to_string()));
    }
    let mut out = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let zeta = zeta_min + (zeta_max - zeta_min) * i as f64 / (n_points - 1) as f64;
        let (z_eval, clamped) = if zeta == 0.0 && spec.singular_at_zero(epoch) {
            (1e-9, true)
        } else {
            (zeta, false)
        };
        let f = eval_shape(spec, z_eval, epoch)?;
        out.push(CurvePoint { zeta, f, clamped });
    }
    Ok(out)
}

/// Triplet attraction shape: pulls the near pair together with a
/// strength set by how far the far point already is.
/// `-2 (1 + zf^2) / (2 + zn^2 + zf^2)^2`.
pub fn trimap_attr(zeta_near: f64, zeta_far: f64) -> f64 {
    let s = 2.0 + zeta_near * zeta_near + zeta_far * zeta_far;
    -2.0 * (1.0 + zeta_far * zeta_far) / (s * s)
}

/// Triplet repulsion shape, the mirror of [`trimap_attr`]:
/// `2 (1 + zn^2) / (2 + zn^2 + zf^2)^2`.
pub fn trimap_rep(zeta_near: f64, zeta_far: f64) -> f64 {
    let s = 2.0 + zeta_near * zeta_near + zeta_far * zeta_far;
    2.0 * (1.0 + zeta_near * zeta_near) / (s * s)
}
