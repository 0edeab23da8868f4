//! The piecewise-quadratic stripe construction: a non-convex function
//! that is locally convex off `K x K`, where `K` is `[-1, 1]` minus a
//! finite union of open gaps.
//!
//! The function is
//!
//! ```text
//! f = phi + f_1 + f_2 + f_3 + f_4 + sum_i (g_i + h_i),       phi = -x y
//! ```
//!
//! with one vertical stripe term `g_i` and one horizontal stripe term
//! `h_i` per gap `(w_i - eps_i, w_i + eps_i)` and weight `beta_i`. All
//! parameters and all certificate quantities are exact rationals; the
//! non-convexity gap and the convexity certificates are exact-identity
//! claims, never tolerance claims. Floating point appears only in the
//! sampling helpers (`*_f64`).

use crate::interval_sets::{Gap, GapList, PointClass, SetError};
use crate::rational::{format_rat, rat, rat_int, Rat};
use num_traits::{Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("{0}")]
    Set(#[from] SetError),
    #[error("need at least 21 gaps for uniform betas (1/(4N) must stay below 1/80), got {0}")]
    TooFewGaps(usize),
    #[error("cap infeasible: {0} gaps cannot absorb beta sum 1/4")]
    InfeasibleCap(usize),
    #[error("beta count {betas} does not match gap count {gaps}")]
    CountMismatch { betas: usize, gaps: usize },
    #[error("beta sum must be exactly 1/4")]
    BadBetaSum,
    #[error("every beta must lie in (0, 1/80)")]
    BetaOutOfRange,
    #[error("sum of gap half-lengths must stay below 1/24")]
    EpsSumTooLarge,
    #[error("tail bound requires R >= 1")]
    BadTailRadius,
    #[error("malformed params JSON")]
    BadJson,
}

#[derive(Debug, Error, PartialEq)]
pub enum CertifyError {
    #[error("point lies in K x K; no local convexity certificate exists there")]
    PointInsideObstacle,
    #[error("could not reach alpha_F > 9/40 (invalid parameter family)")]
    UnsatisfiableF,
}

/// Orientation of a stripe term: `Vertical` is a `g`-type term (stripe
/// in `x`), `Horizontal` the coordinate swap `h`-type term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Vertical,
    Horizontal,
}

/// One stripe summand with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct StripeTerm {
    pub beta: Rat,
    pub eps: Rat,
    pub w: Rat,
    pub orientation: Orientation,
}

/// The full parameter family: gaps with their half-lengths and the
/// convexity weights.
///
/// Invariants: `sum beta_i = 1/4` exactly, every `beta_i` in `(0,
/// 1/80)`, `sum eps_i < 1/24`, and the gap list invariants (disjoint
/// open gaps inside `[-1, 1]`, none containing 0).
#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleParams {
    gaps: GapList,
    betas: Vec<Rat>,
}

/// Policy for distributing the total weight 1/4 over the gaps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaPolicy {
    /// `beta_i = 1/(4N)`; valid only for `N >= 21`.
    Uniform,
    /// Weight proportional to gap length, capped at 1/81 with exact
    /// redistribution of the excess.
    ProportionalCapped,
}

const BETA_CAP_DEN: i64 = 81;

impl CounterexampleParams {
    pub fn new(gaps: GapList, betas: Vec<Rat>) -> Result<Self, ParamError> {
        if betas.len() != gaps.len() {
            return Err(ParamError::CountMismatch {
                betas: betas.len(),
                gaps: gaps.len(),
            });
        }
        let sum: Rat = betas.iter().fold(Rat::zero(), |a, b| a + b);
        if sum != rat(1, 4) {
            return Err(ParamError::BadBetaSum);
        }
        let cap = rat(1, 80);
        if betas.iter().any(|b| *b <= Rat::zero() || *b >= cap) {
            return Err(ParamError::BetaOutOfRange);
        }
        if gaps.eps_sum() >= rat(1, 24) {
            return Err(ParamError::EpsSumTooLarge);
        }
        Ok(CounterexampleParams { gaps, betas })
    }

    /// Bypasses the geometric invariants; for formula cross-checks on
    /// families that are arithmetically but not geometrically valid.
    pub fn from_parts_unchecked(gaps: Vec<Gap>, betas: Vec<Rat>) -> Self {
        assert_eq!(gaps.len(), betas.len());
        CounterexampleParams {
            gaps: GapList::new_unchecked(gaps),
            betas,
        }
    }

    pub fn gaps(&self) -> &GapList {
        &self.gaps
    }

    pub fn betas(&self) -> &[Rat] {
        &self.betas
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    pub fn stripes(&self) -> impl Iterator<Item = StripeTerm> + '_ {
        self.gaps.gaps().iter().zip(&self.betas).flat_map(|(g, b)| {
            [Orientation::Vertical, Orientation::Horizontal].map(move |orientation| StripeTerm {
                beta: b.clone(),
                eps: g.half_len.clone(),
                w: g.center.clone(),
                orientation,
            })
        })
    }

    /// JSON object `{ "gaps": [["w","eps"],…], "betas": ["b",…] }`.
    pub fn to_json(&self) -> Value {
        json!({
            "gaps": self.gaps.to_json(),
            "betas": self.betas.iter().map(|b| format_rat(b)).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, ParamError> {
        let obj = v.as_object().ok_or(ParamError::BadJson)?;
        let gaps = GapList::from_json(obj.get("gaps").ok_or(ParamError::BadJson)?)?;
        let betas_v = obj
            .get("betas")
            .and_then(Value::as_array)
            .ok_or(ParamError::BadJson)?;
        let mut betas = Vec::with_capacity(betas_v.len());
        for b in betas_v {
            let s = b.as_str().ok_or(ParamError::BadJson)?;
            betas.push(crate::rational::parse_rat(s).map_err(|_| ParamError::BadJson)?);
        }
        CounterexampleParams::new(gaps, betas)
    }
}

/// Distributes the weight 1/4 over the gaps under the chosen policy.
pub fn build_params(gaps: GapList, policy: BetaPolicy) -> Result<CounterexampleParams, ParamError> {
    let n = gaps.len();
    match policy {
        BetaPolicy::Uniform => {
            if n <= 20 {
                return Err(ParamError::TooFewGaps(n));
            }
            let beta = rat(1, 4 * n as i64);
            CounterexampleParams::new(gaps, vec![beta; n])
        }
        BetaPolicy::ProportionalCapped => {
            let cap = rat(1, BETA_CAP_DEN);
            if rat_int(n as i64) * &cap < rat(1, 4) {
                return Err(ParamError::InfeasibleCap(n));
            }
            let mut betas = vec![Rat::zero(); n];
            let mut capped = vec![false; n];
            let mut remaining = rat(1, 4);
            loop {
                let free_weight: Rat = gaps
                    .gaps()
                    .iter()
                    .zip(&capped)
                    .filter(|(_, c)| !**c)
                    .fold(Rat::zero(), |a, (g, _)| a + &g.half_len);
                if free_weight.is_zero() {
                    // All capped: spread the rest uniformly over capped
                    // entries is impossible without breaking the cap, so
                    // the loop only ends here when remaining is zero.
                    if !remaining.is_zero() {
                        return Err(ParamError::InfeasibleCap(n));
                    }
                    break;
                }
                let mut newly_capped = false;
                let mut spent = Rat::zero();
                for (i, g) in gaps.gaps().iter().enumerate() {
                    if capped[i] {
                        continue;
                    }
                    let share = &remaining * &g.half_len / &free_weight;
                    let total = &betas[i] + &share;
                    if total >= cap {
                        spent = spent + (&cap - &betas[i]);
                        betas[i] = cap.clone();
                        capped[i] = true;
                        newly_capped = true;
                    } else {
                        spent = spent + &share;
                        betas[i] = total;
                    }
                }
                remaining = remaining - spent;
                if !newly_capped {
                    break;
                }
            }
            // Exactness sweep: rational division above is exact, so
            // remaining is zero unless every entry got capped.
            debug_assert!(remaining.is_zero());
            // The cap itself must stay strictly below 1/80; 1/81 does.
            CounterexampleParams::new(gaps, betas)
        }
    }
}

// ---------------------------------------------------------------------
// Exact evaluation.
// ---------------------------------------------------------------------

/// The convex C^1 building block: three-branch piecewise value
/// `beta y^2 + q(x - w)` with `q` quadratic in the middle stripe and
/// affine outside.
pub fn eval_g(beta: &Rat, eps: &Rat, w: &Rat, x: &Rat, y: &Rat) -> Rat {
    let t = x - w;
    let base = beta * y * y;
    if t <= -eps.clone() {
        base - rat_int(2) * eps * &t - eps * eps
    } else if t >= *eps {
        base + rat_int(2) * eps * &t - eps * eps
    } else {
        base + &t * &t
    }
}

/// Coordinate swap of [`eval_g`].
pub fn eval_h(beta: &Rat, eps: &Rat, w: &Rat, x: &Rat, y: &Rat) -> Rat {
    eval_g(beta, eps, w, y, x)
}

/// The four outer terms: `f_1 = x^2/12 + 4 (y-1)^2` above `y = 1` and
/// `x^2/12` below; `f_2, f_3, f_4` its reflections.
pub fn eval_outer(i: usize, x: &Rat, y: &Rat) -> Rat {
    match i {
        1 => {
            let mut v = x * x / rat_int(12);
            if *y > rat_int(1) {
                let d = y - rat_int(1);
                v = v + rat_int(4) * &d * &d;
            }
            v
        }
        2 => eval_outer(1, x, &-y.clone()),
        3 => eval_outer(1, y, x),
        4 => eval_outer(3, &-x.clone(), y),
        _ => panic!("outer index must be 1..=4"),
    }
}

/// Exact value of the assembled function at a rational point.
pub fn eval_f(params: &CounterexampleParams, x: &Rat, y: &Rat) -> Rat {
    let mut v = -(x * y);
    for i in 1..=4 {
        v = v + eval_outer(i, x, y);
    }
    for (g, b) in params.gaps.gaps().iter().zip(&params.betas) {
        v = v + eval_g(b, &g.half_len, &g.center, x, y);
        v = v + eval_h(b, &g.half_len, &g.center, x, y);
    }
    v
}

// ---------------------------------------------------------------------
// f64 fast path for sampling-heavy checks.
// ---------------------------------------------------------------------

/// Precomputed f64 view of the parameter family.
#[derive(Debug, Clone)]
pub struct ParamsF64 {
    pub stripes: Vec<(f64, f64, f64)>, // (beta, eps, w)
    pub beta_sum: f64,
}

impl ParamsF64 {
    pub fn new(params: &CounterexampleParams) -> Self {
        let stripes = params
            .gaps
            .gaps()
            .iter()
            .zip(&params.betas)
            .map(|(g, b)| {
                (
                    crate::rational::rat_to_f64(b),
                    crate::rational::rat_to_f64(&g.half_len),
                    crate::rational::rat_to_f64(&g.center),
                )
            })
            .collect::<Vec<_>>();
        let beta_sum = stripes.iter().map(|s| s.0).sum();
        ParamsF64 { stripes, beta_sum }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let mut v = -x * y + x * x / 12.0 * 2.0 + y * y / 12.0 * 2.0;
        if y > 1.0 {
            v += 4.0 * (y - 1.0) * (y - 1.0);
        }
        if y < -1.0 {
            v += 4.0 * (y + 1.0) * (y + 1.0);
        }
        if x > 1.0 {
            v += 4.0 * (x - 1.0) * (x - 1.0);
        }
        if x < -1.0 {
            v += 4.0 * (x + 1.0) * (x + 1.0);
        }
        for &(beta, eps, w) in &self.stripes {
            v += beta * y * y + branch(x - w, eps);
            v += beta * x * x + branch(y - w, eps);
        }
        v
    }

    /// Assembled Hessian, ignoring boundary questions (callers sample
    /// generic points).
    pub fn hessian(&self, x: f64, y: f64) -> (f64, f64, f64) {
        let mut fxx = 1.0 / 3.0 + 2.0 * self.beta_sum;
        let mut fyy = 1.0 / 3.0 + 2.0 * self.beta_sum;
        if y.abs() > 1.0 {
            fyy += 8.0;
        }
        if x.abs() > 1.0 {
            fxx += 8.0;
        }
        for &(_, eps, w) in &self.stripes {
            if (x - w).abs() < eps {
                fxx += 2.0;
            }
            if (y - w).abs() < eps {
                fyy += 2.0;
            }
        }
        (fxx, -1.0, fyy)
    }

    /// Hessian of the certified subfamily: phi + sum over `F` of
    /// (g_i + h_i), plus `g_k`/`h_k` when the anchor stripe is outside
    /// `F`. `anchor` is `(index, orientation)`.
    pub fn hessian_restricted(
        &self,
        family: &[usize],
        anchor: Option<(usize, Orientation)>,
        x: f64,
        y: f64,
    ) -> (f64, f64, f64) {
        let mut fxx = 0.0;
        let mut fyy = 0.0;
        let mut add_g = |i: usize, fxx: &mut f64, fyy: &mut f64| {
            let (beta, eps, w) = self.stripes[i];
            if (x - w).abs() < eps {
                *fxx += 2.0;
            }
            *fyy += 2.0 * beta;
        };
        let mut add_h = |i: usize, fxx: &mut f64, fyy: &mut f64| {
            let (beta, eps, w) = self.stripes[i];
            if (y - w).abs() < eps {
                *fyy += 2.0;
            }
            *fxx += 2.0 * beta;
        };
        for &i in family {
            add_g(i, &mut fxx, &mut fyy);
            add_h(i, &mut fxx, &mut fyy);
        }
        if let Some((k, orient)) = anchor {
            if !family.contains(&k) {
                match orient {
                    Orientation::Vertical => add_g(k, &mut fxx, &mut fyy),
                    Orientation::Horizontal => add_h(k, &mut fxx, &mut fyy),
                }
            }
        }
        (fxx, -1.0, fyy)
    }
}

fn branch(t: f64, eps: f64) -> f64 {
    if t <= -eps {
        -2.0 * eps * t - eps * eps
    } else if t >= eps {
        2.0 * eps * t - eps * eps
    } else {
        t * t
    }
}

/// Bracket on the omitted tail `sum_{i>N} (g_i + h_i)` over
/// `[-R, R]^2`, from the per-term maximum bound `beta R^2 + 4 R eps`
/// (each term is nonnegative, but the bracket below is conservative on
/// the lower side as well).
pub fn tail_bound(tail_beta_sum: &Rat, tail_eps_sum: &Rat, r: &Rat) -> Result<(Rat, Rat), ParamError> {
    if *r < rat_int(1) {
        return Err(ParamError::BadTailRadius);
    }
    let upper = rat_int(2) * (tail_beta_sum * r * r + rat_int(4) * r * tail_eps_sum);
    let lower = -rat_int(2) * tail_eps_sum * tail_eps_sum;
    Ok((lower, upper))
}

// ---------------------------------------------------------------------
// Exact Hessian and certificates.
// ---------------------------------------------------------------------

/// Symmetric 2x2 second-derivative data.
#[derive(Debug, Clone, PartialEq)]
pub struct Hessian2 {
    pub fxx: Rat,
    pub fxy: Rat,
    pub fyy: Rat,
}

impl Hessian2 {
    pub fn det(&self) -> Rat {
        &self.fxx * &self.fyy - &self.fxy * &self.fxy
    }

    pub fn is_psd(&self) -> bool {
        self.fxx >= Rat::zero() && self.fyy >= Rat::zero() && self.det() >= Rat::zero()
    }

    pub fn to_f64(&self) -> (f64, f64, f64) {
        (
            crate::rational::rat_to_f64(&self.fxx),
            crate::rational::rat_to_f64(&self.fxy),
            crate::rational::rat_to_f64(&self.fyy),
        )
    }
}

/// A stripe-boundary or outer-boundary line through the query point.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryHit {
    VerticalStripe { index: usize, line: Rat },
    HorizontalStripe { index: usize, line: Rat },
    OuterX(Rat),
    OuterY(Rat),
}

#[derive(Debug, Clone, PartialEq)]
pub enum HessianAt {
    Smooth(Hessian2),
    OnBoundary(Vec<BoundaryHit>),
}

/// Exact Hessian of the assembled finite sum where it exists;
/// `OnBoundary` where any summand's branch line passes through the
/// point. Convexity across boundaries is covered by ball certificates,
/// never by one-sided pointwise Hessians.
pub fn hessian_at(params: &CounterexampleParams, x: &Rat, y: &Rat) -> HessianAt {
    let one = rat_int(1);
    let mut hits = Vec::new();
    if x.abs() == one {
        hits.push(BoundaryHit::OuterX(x.clone()));
    }
    if y.abs() == one {
        hits.push(BoundaryHit::OuterY(y.clone()));
    }
    for (i, g) in params.gaps.gaps().iter().enumerate() {
        let (lo, hi) = (g.lo(), g.hi());
        if *x == lo || *x == hi {
            hits.push(BoundaryHit::VerticalStripe {
                index: i,
                line: x.clone(),
            });
        }
        if *y == lo || *y == hi {
            hits.push(BoundaryHit::HorizontalStripe {
                index: i,
                line: y.clone(),
            });
        }
    }
    if !hits.is_empty() {
        return HessianAt::OnBoundary(hits);
    }
    let beta_sum: Rat = params.betas.iter().fold(Rat::zero(), |a, b| a + b);
    let mut fxx = rat(1, 3) + rat_int(2) * &beta_sum;
    let mut fyy = rat(1, 3) + rat_int(2) * &beta_sum;
    if x.abs() > one {
        fxx = fxx + rat_int(8);
    }
    if y.abs() > one {
        fyy = fyy + rat_int(8);
    }
    for g in params.gaps.gaps() {
        if (x - &g.center).abs() < g.half_len {
            fxx = fxx + rat_int(2);
        }
        if (y - &g.center).abs() < g.half_len {
            fyy = fyy + rat_int(2);
        }
    }
    HessianAt::Smooth(Hessian2 {
        fxx,
        fxy: rat_int(-1),
        fyy,
    })
}

/// Which proof case a certificate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertCase {
    OuterTop,
    OuterBottom,
    OuterRight,
    OuterLeft,
    StripeBased,
}

/// Neighbourhood convexity certificate: the assembled function is convex
/// on the open ball `B(point, radius)`.
///
/// For `StripeBased` certificates the certified subfamily
/// `phi + sum_{i in F} (g_i + h_i) (+ anchor stripe)` has determinant at
/// least `det_bound = 4 (alpha_F + alpha_F^2) - 1 > 0` throughout the
/// ball, with `alpha_F = sum_{i in F} beta_i > 9/40`; the remaining
/// summands are convex, so the full function is convex on the ball.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityCertificate {
    pub point: (Rat, Rat),
    pub case: CertCase,
    pub family: Vec<usize>,
    pub anchor: Option<(usize, Orientation)>,
    pub alpha_f: Rat,
    pub det_bound: Rat,
    pub radius: Rat,
}

fn coordinate_state(params: &CounterexampleParams, c: &Rat) -> CoordState {
    let one = rat_int(1);
    if c.abs() > one {
        return CoordState::Beyond(c.abs() - rat_int(1));
    }
    for (i, g) in params.gaps.gaps().iter().enumerate() {
        if (c - &g.center).abs() < g.half_len {
            return CoordState::InGap(i);
        }
    }
    CoordState::InK
}

enum CoordState {
    /// |c| > 1, with the exceedance.
    Beyond(Rat),
    /// Strictly inside gap `i`.
    InGap(usize),
    /// In the remainder set K (includes gap endpoints and ±1).
    InK,
}

/// Issues a local convexity certificate at a point off `K x K`,
/// mirroring the proof's case analysis: an outer pairing
/// `phi + f_i` (determinant 1/3) strictly outside `[-1,1]^2`, otherwise
/// a stripe-based subfamily with `alpha_F > 9/40`.
pub fn certify_local_convexity(
    params: &CounterexampleParams,
    x: &Rat,
    y: &Rat,
) -> Result<ConvexityCertificate, CertifyError> {
    let sx = coordinate_state(params, x);
    let sy = coordinate_state(params, y);
    // Strictly outside the square: use the outer pairing with the larger
    // slack.
    let (beyond_x, beyond_y) = (
        match &sx {
            CoordState::Beyond(d) => Some(d.clone()),
            _ => None,
        },
        match &sy {
            CoordState::Beyond(d) => Some(d.clone()),
            _ => None,
        },
    );
    if beyond_x.is_some() || beyond_y.is_some() {
        let pick_y = match (&beyond_x, &beyond_y) {
            (Some(dx), Some(dy)) => dy >= dx,
            (None, Some(_)) => true,
            _ => false,
        };
        let (case, radius) = if pick_y {
            let d = beyond_y.unwrap();
            if *y > Rat::zero() {
                (CertCase::OuterTop, d)
            } else {
                (CertCase::OuterBottom, d)
            }
        } else {
            let d = beyond_x.unwrap();
            if *x > Rat::zero() {
                (CertCase::OuterRight, d)
            } else {
                (CertCase::OuterLeft, d)
            }
        };
        return Ok(ConvexityCertificate {
            point: (x.clone(), y.clone()),
            case,
            family: Vec::new(),
            anchor: None,
            alpha_f: Rat::zero(),
            det_bound: rat(1, 3),
            radius,
        });
    }
    // Inside the square: some coordinate must sit strictly inside a gap.
    let (anchor_idx, orientation, along, across) = match (&sx, &sy) {
        (CoordState::InGap(k), _) => (*k, Orientation::Vertical, x, y),
        (_, CoordState::InGap(k)) => (*k, Orientation::Horizontal, y, x),
        _ => return Err(CertifyError::PointInsideObstacle),
    };
    // Exclude the (at most two) stripes whose cross-orientation boundary
    // passes exactly through the point.
    let gaps = params.gaps.gaps();
    let family: Vec<usize> = (0..gaps.len())
        .filter(|&i| {
            let lo = gaps[i].lo();
            let hi = gaps[i].hi();
            *across != lo && *across != hi
        })
        .collect();
    let alpha_f: Rat = family.iter().fold(Rat::zero(), |a, &i| a + &params.betas[i]);
    if alpha_f <= rat(9, 40) {
        return Err(CertifyError::UnsatisfiableF);
    }
    let det_bound = rat_int(4) * (&alpha_f + &alpha_f * &alpha_f) - rat_int(1);
    // Ball radius: stay strictly inside the anchor stripe and clear of
    // every boundary line of a term in the subfamily.
    let anchor_gap = &gaps[anchor_idx];
    let mut radius = &anchor_gap.half_len - (along - &anchor_gap.center).abs();
    let mut shrink = |d: Rat| {
        if d < radius {
            radius = d;
        }
    };
    for &i in &family {
        let lo = gaps[i].lo();
        let hi = gaps[i].hi();
        // Vertical lines of g_i against x, horizontal lines of h_i
        // against y.
        shrink((x - &lo).abs());
        shrink((x - &hi).abs());
        shrink((y - &lo).abs());
        shrink((y - &hi).abs());
    }
    debug_assert!(radius > Rat::zero());
    Ok(ConvexityCertificate {
        point: (x.clone(), y.clone()),
        case: CertCase::StripeBased,
        family,
        anchor: Some((anchor_idx, orientation)),
        alpha_f,
        det_bound,
        radius,
    })
}

/// Exact non-convexity witness: `G = f(-1,-1) + f(1,1) - 2 f(0,0)`,
/// together with the closed form `-4/3 + 4 sum delta_i`,
/// `delta_i = beta_i + 2 eps_i (1 - |w_i|)`. The two are asserted equal
/// and `G < 0` for every valid family.
#[derive(Debug, Clone, PartialEq)]
pub struct NonconvexityGap {
    pub gap: Rat,
    pub closed_form: Rat,
    pub delta_sum: Rat,
}

pub fn nonconvexity_gap(params: &CounterexampleParams) -> NonconvexityGap {
    let m1 = rat_int(-1);
    let p1 = rat_int(1);
    let z = rat_int(0);
    let gap = eval_f(params, &m1, &m1) + eval_f(params, &p1, &p1)
        - rat_int(2) * eval_f(params, &z, &z);
    let delta_sum: Rat = params
        .gaps
        .gaps()
        .iter()
        .zip(&params.betas)
        .fold(Rat::zero(), |a, (g, b)| {
            a + b + rat_int(2) * &g.half_len * (rat_int(1) - g.center.abs())
        });
    let closed_form = rat(-4, 3) + rat_int(4) * &delta_sum;
    assert_eq!(gap, closed_form, "midpoint gap must match its closed form");
    NonconvexityGap {
        gap,
        closed_form,
        delta_sum,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval_sets::fat_cantor;
    use crate::rational::{rat_from_f64, rat_to_f64};

    fn family() -> CounterexampleParams {
        let (_, gaps) = fat_cantor(&rat(1, 12), 5).unwrap();
        build_params(gaps, BetaPolicy::Uniform).unwrap()
    }

    #[test]
    fn eval_g_branches() {
        let one = rat_int(1);
        let z = rat_int(0);
        assert_eq!(eval_g(&one, &one, &z, &z, &z), rat_int(0));
        assert_eq!(eval_g(&one, &one, &z, &rat_int(2), &z), rat_int(3));
        // C1 gluing at the branch boundary x = eps: both formulas give
        // beta y^2 + eps^2.
        let eps = rat(1, 7);
        let y = rat(2, 3);
        let beta = rat(1, 100);
        let middle = &beta * &y * &y + &eps * &eps;
        assert_eq!(eval_g(&beta, &eps, &z, &eps, &y), middle);
        assert_eq!(
            eval_g(&beta, &eps, &z, &eps, &y),
            &beta * &y * &y + rat_int(2) * &eps * &eps - &eps * &eps
        );
    }

    #[test]
    fn outer_values() {
        assert_eq!(eval_outer(1, &rat_int(1), &rat_int(1)), rat(1, 12));
        assert_eq!(eval_outer(1, &rat_int(0), &rat_int(2)), rat_int(4));
        assert_eq!(
            eval_outer(2, &rat_int(0), &rat_int(-2)),
            eval_outer(1, &rat_int(0), &rat_int(2))
        );
        assert_eq!(eval_outer(3, &rat_int(2), &rat_int(0)), rat_int(4));
        assert_eq!(eval_outer(4, &rat_int(-2), &rat_int(0)), rat_int(4));
    }

    #[test]
    fn f_at_origin_closed_form() {
        let p = family();
        // Each of g_i and h_i contributes 2 eps |w| - eps^2 at the
        // origin (|w| >= eps puts the branch outside the stripe).
        let expect: Rat = p
            .gaps()
            .gaps()
            .iter()
            .fold(Rat::zero(), |a, g| {
                a + rat_int(2)
                    * (rat_int(2) * &g.half_len * g.center.abs() - &g.half_len * &g.half_len)
            });
        assert_eq!(eval_f(&p, &rat_int(0), &rat_int(0)), expect);
    }

    #[test]
    fn uniform_beta_thresholds() {
        let (_, gaps) = fat_cantor(&rat(1, 12), 5).unwrap();
        assert_eq!(gaps.len(), 62);
        let p = build_params(gaps, BetaPolicy::Uniform).unwrap();
        assert_eq!(p.betas()[0], rat(1, 248));
        // 21 gaps pass, 20 do not (1/80 is excluded).
        let some = |n: usize| {
            let gaps: Vec<Gap> = (0..n)
                .map(|i| Gap {
                    center: rat(i as i64 + 1, n as i64 + 1),
                    half_len: rat(1, 100 * n as i64),
                })
                .collect();
            GapList::new(gaps).unwrap()
        };
        assert!(build_params(some(21), BetaPolicy::Uniform).is_ok());
        assert!(matches!(
            build_params(some(20), BetaPolicy::Uniform),
            Err(ParamError::TooFewGaps(20))
        ));
    }

    #[test]
    fn proportional_equal_lengths_is_uniform() {
        let gaps: Vec<Gap> = (0..100)
            .map(|i| Gap {
                center: rat(i + 1, 101),
                half_len: rat(1, 100_000),
            })
            .collect();
        let p = build_params(GapList::new(gaps).unwrap(), BetaPolicy::ProportionalCapped).unwrap();
        for b in p.betas() {
            assert_eq!(*b, rat(1, 400));
        }
    }

    #[test]
    fn proportional_caps_and_redistributes() {
        // One huge gap and many small ones: the big one hits the cap.
        let mut gaps = vec![Gap {
            center: rat(1, 2),
            half_len: rat(1, 26),
        }];
        for i in 0..25 {
            gaps.push(Gap {
                center: rat(-(i as i64 * 2 + 1), 100),
                half_len: rat(1, 10_000),
            });
        }
        let p = build_params(GapList::new(gaps).unwrap(), BetaPolicy::ProportionalCapped).unwrap();
        assert_eq!(p.betas()[0], rat(1, 81));
        let sum: Rat = p.betas().iter().fold(Rat::zero(), |a, b| a + b);
        assert_eq!(sum, rat(1, 4));
        for b in p.betas() {
            assert!(*b < rat(1, 80) && *b > Rat::zero());
        }
    }

    #[test]
    fn nonconvexity_gap_matches_plugin_example() {
        // Arithmetic-only family: 24 gaps, beta = 1/96, eps = 1/1000,
        // |w| = 1/2 (geometrically overlapping, which the formulas do
        // not care about).
        let gaps: Vec<Gap> = (0..24)
            .map(|i| Gap {
                center: if i % 2 == 0 { rat(1, 2) } else { rat(-1, 2) },
                half_len: rat(1, 1000),
            })
            .collect();
        let betas = vec![rat(1, 96); 24];
        let p = CounterexampleParams::from_parts_unchecked(gaps, betas);
        let g = nonconvexity_gap(&p);
        // delta sum = 1/4 + 2 * 24 * (1/1000) * (1/2) = 137/500.
        assert_eq!(g.delta_sum, rat(137, 500));
        assert_eq!(g.gap, rat(-4, 3) + rat_int(4) * rat(137, 500));
        assert!(g.gap < Rat::zero());
    }

    #[test]
    fn nonconvexity_gap_fat_cantor_family() {
        let p = family();
        let g = nonconvexity_gap(&p);
        assert!(g.gap < Rat::zero());
        assert_eq!(g.gap, g.closed_form);
    }

    #[test]
    fn tail_bound_brackets() {
        let (lo, hi) = tail_bound(&Rat::zero(), &Rat::zero(), &rat_int(2)).unwrap();
        assert_eq!((lo, hi), (rat_int(0), rat_int(0)));
        let (_, hi) = tail_bound(&rat(1, 100), &rat(1, 1000), &rat_int(2)).unwrap();
        assert_eq!(hi, rat(12, 125)); // 2 (0.04 + 0.008) = 0.096
        assert!(tail_bound(&rat(1, 100), &rat(1, 1000), &rat(1, 2)).is_err());
        // Monotone in R.
        let (_, h1) = tail_bound(&rat(1, 100), &rat(1, 1000), &rat_int(1)).unwrap();
        let (_, h3) = tail_bound(&rat(1, 100), &rat(1, 1000), &rat_int(3)).unwrap();
        assert!(h3 > h1);
    }

    #[test]
    fn hessian_phi_and_outer() {
        let p = family();
        // At (0, 2): outer top region. fyy picks up 8 from f_1.
        match hessian_at(&p, &rat_int(0), &rat_int(2)) {
            HessianAt::Smooth(h) => {
                assert_eq!(h.fxy, rat_int(-1));
                let beta2 = rat(1, 2); // 2 * sum beta = 1/2
                assert_eq!(h.fxx, rat(1, 3) + &beta2);
                assert_eq!(h.fyy, rat(1, 3) + beta2 + rat_int(8));
                assert!(h.is_psd());
            }
            HessianAt::OnBoundary(_) => panic!("(0,2) is off every boundary"),
        }
        // On a stripe boundary line.
        let g0 = p.gaps().gaps()[0].clone();
        let edge = g0.hi();
        assert!(matches!(
            hessian_at(&p, &edge, &rat(1, 100)),
            HessianAt::OnBoundary(_)
        ));
        // On the outer line y = 1.
        assert!(matches!(
            hessian_at(&p, &rat(1, 100), &rat_int(1)),
            HessianAt::OnBoundary(_)
        ));
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let p = family();
        let pf = ParamsF64::new(&p);
        let pts = [
            (0.31, 2.3),
            (-1.7, 0.2),
            (0.05, -0.41),
            (0.9, 0.9),
            (1.4, -1.6),
        ];
        let h_step = 1e-4;
        for &(x, y) in &pts {
            let (fxx, fxy, fyy) = pf.hessian(x, y);
            let fd_xx = (pf.eval(x + h_step, y) - 2.0 * pf.eval(x, y) + pf.eval(x - h_step, y))
                / (h_step * h_step);
            let fd_yy = (pf.eval(x, y + h_step) - 2.0 * pf.eval(x, y) + pf.eval(x, y - h_step))
                / (h_step * h_step);
            let fd_xy = (pf.eval(x + h_step, y + h_step) - pf.eval(x + h_step, y - h_step)
                - pf.eval(x - h_step, y + h_step)
                + pf.eval(x - h_step, y - h_step))
                / (4.0 * h_step * h_step);
            assert!((fxx - fd_xx).abs() <= 1e-5 * fxx.abs().max(1.0), "fxx at ({x},{y})");
            assert!((fyy - fd_yy).abs() <= 1e-5 * fyy.abs().max(1.0), "fyy at ({x},{y})");
            assert!((fxy - fd_xy).abs() <= 1e-5, "fxy at ({x},{y})");
        }
    }

    #[test]
    fn certificate_outer_case() {
        let p = family();
        let cert = certify_local_convexity(&p, &rat_int(0), &rat_int(2)).unwrap();
        assert_eq!(cert.case, CertCase::OuterTop);
        assert_eq!(cert.det_bound, rat(1, 3));
        assert_eq!(cert.radius, rat_int(1));
        let cert = certify_local_convexity(&p, &rat(-3, 2), &rat(1, 2)).unwrap();
        assert_eq!(cert.case, CertCase::OuterLeft);
        assert_eq!(cert.radius, rat(1, 2));
    }

    #[test]
    fn certificate_stripe_case() {
        let p = family();
        // x in the first right-half gap (center 1/2), y well inside K.
        let x = rat(1, 2);
        let y = rat(1, 100); // 0.01 — inside K? it is within no gap by construction scale
        let state = coordinate_state(&p, &y);
        assert!(matches!(state, CoordState::InK | CoordState::InGap(_)));
        let cert = certify_local_convexity(&p, &x, &y).unwrap();
        assert_eq!(cert.case, CertCase::StripeBased);
        assert!(cert.alpha_f > rat(9, 40));
        assert_eq!(
            cert.det_bound,
            rat_int(4) * (&cert.alpha_f + &cert.alpha_f * &cert.alpha_f) - rat_int(1)
        );
        assert!(cert.det_bound >= rat(41, 400));
        assert!(cert.radius > Rat::zero());
    }

    #[test]
    fn certificate_rejected_inside_obstacle() {
        let p = family();
        // (0, 0) has both coordinates in K.
        assert_eq!(
            certify_local_convexity(&p, &rat_int(0), &rat_int(0)),
            Err(CertifyError::PointInsideObstacle)
        );
    }

    #[test]
    fn alpha_limit_det_bound_value() {
        // The paper's boundary value: alpha = 9/40 gives
        // 4 (9/40 + 81/1600) - 1 = 41/400 = 0.1025.
        let alpha = rat(9, 40);
        let det = rat_int(4) * (&alpha + &alpha * &alpha) - rat_int(1);
        assert_eq!(det, rat(41, 400));
        // And alpha = 1/4 (no exclusions) gives exactly 1/4.
        let alpha = rat(1, 4);
        let det = rat_int(4) * (&alpha + &alpha * &alpha) - rat_int(1);
        assert_eq!(det, rat(1, 4));
    }

    #[test]
    fn c1_gluing_along_boundaries() {
        // One-sided values and gradients of each stripe term agree on
        // its boundary lines (exact identity on the formulas).
        let beta = rat(1, 100);
        let eps = rat(1, 50);
        let w = rat(1, 3);
        for s in [-1i64, 1] {
            let edge = &w + rat(s, 1) * &eps;
            for yk in [-2i64, 0, 3] {
                let y = rat(yk, 2);
                let inner = eval_g(&beta, &eps, &w, &edge, &y);
                // Affine branch value at the same point.
                let t = &edge - &w;
                let outer = &beta * &y * &y + rat_int(2 * s) * &eps * &t - &eps * &eps;
                assert_eq!(inner, outer);
                // One-sided x-derivatives: 2 t (quadratic side) vs
                // 2 s eps (affine side) — equal since t = s eps.
                assert_eq!(rat_int(2) * &t, rat_int(2 * s) * &eps);
            }
        }
    }

    #[test]
    fn f64_eval_matches_exact() {
        let p = family();
        let pf = ParamsF64::new(&p);
        for &(x, y) in &[(0.3, -0.7), (1.9, 0.05), (-0.5, -0.49), (0.0, 0.0)] {
            let exact = eval_f(&p, &rat_from_f64(x).unwrap(), &rat_from_f64(y).unwrap());
            let approx = pf.eval(x, y);
            assert!((rat_to_f64(&exact) - approx).abs() < 1e-12);
        }
    }

    #[test]
    fn params_json_round_trip() {
        let p = family();
        let j = p.to_json();
        let q = CounterexampleParams::from_json(&j).unwrap();
        assert_eq!(p, q);
        assert!(CounterexampleParams::from_json(&serde_json::json!({"gaps": []})).is_err());
    }
}
