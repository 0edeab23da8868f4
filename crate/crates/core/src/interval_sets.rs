//! One-dimensional machinery: Cantor-type sets as finite interval unions,
//! removed-gap bookkeeping, and the Cantor function.
//!
//! Everything here is exact: interval endpoints, gap centres and
//! half-lengths are big rationals, and `measure() + total gap length`
//! identities hold with equality, not within a tolerance.

use crate::rational::{format_rat, parse_rat, rat, rat_int, Rat};
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SetError {
    #[error("interval has lo > hi")]
    InvertedInterval,
    #[error("intervals must be strictly increasing and pairwise disjoint")]
    Unordered,
    #[error("interval set must be nonempty")]
    Empty,
    #[error("gap half-length must be positive")]
    NonPositiveGap,
    #[error("gap ({0}, {1}) leaves [-1,1]")]
    GapOutOfRange(String, String),
    #[error("gap ({0}, {1}) contains 0")]
    GapContainsZero(String, String),
    #[error("gaps overlap near {0}")]
    GapOverlap(String),
    #[error("gap budget must lie in (0, 1/12], got {0}")]
    BadGapBudget(String),
    #[error("depth must be at least 1")]
    BadDepth,
    #[error("point {0} outside [0,1]")]
    OutOfDomain(String),
    #[error("malformed JSON for {0}")]
    BadJson(&'static str),
}

/// Closed interval `[lo, hi]` with exact rational endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    lo: Rat,
    hi: Rat,
}

impl Interval {
    pub fn new(lo: Rat, hi: Rat) -> Result<Self, SetError> {
        if lo > hi {
            return Err(SetError::InvertedInterval);
        }
        Ok(Interval { lo, hi })
    }

    pub fn lo(&self) -> &Rat {
        &self.lo
    }

    pub fn hi(&self) -> &Rat {
        &self.hi
    }

    pub fn length(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rat) -> bool {
        &self.lo <= x && x <= &self.hi
    }
}

/// Finite union of closed intervals, strictly increasing and pairwise
/// disjoint (`hi_k < lo_{k+1}`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalSet {
    intervals: Vec<Interval>,
}

/// Exact classification of a point against an [`IntervalSet`].
///
/// For `Inside`, `to_gap` is the distance to the complement taken within
/// the convex hull of the set, i.e. to the nearest removed gap between
/// consecutive intervals; it is `None` when the set is a single interval
/// and no such gap exists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PointClass {
    Inside { to_gap: Option<Rat> },
    Outside { to_set: Rat },
}

impl IntervalSet {
    pub fn new(intervals: Vec<Interval>) -> Result<Self, SetError> {
        if intervals.is_empty() {
            return Err(SetError::Empty);
        }
        for pair in intervals.windows(2) {
            if pair[0].hi >= pair[1].lo {
                return Err(SetError::Unordered);
            }
        }
        Ok(IntervalSet { intervals })
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Sum of interval lengths.
    pub fn measure(&self) -> Rat {
        self.intervals
            .iter()
            .fold(Rat::zero(), |acc, iv| acc + iv.length())
    }

    /// Smallest closed interval containing the set.
    pub fn hull(&self) -> Interval {
        Interval {
            lo: self.intervals.first().unwrap().lo.clone(),
            hi: self.intervals.last().unwrap().hi.clone(),
        }
    }

    pub fn contains(&self, x: &Rat) -> bool {
        matches!(self.classify(x), PointClass::Inside { .. })
    }

    /// Exact classification with exact distances; see [`PointClass`].
    pub fn classify(&self, x: &Rat) -> PointClass {
        // Index of the first interval with lo > x.
        let idx = self.intervals.partition_point(|iv| &iv.lo <= x);
        if idx > 0 {
            let iv = &self.intervals[idx - 1];
            if x <= &iv.hi {
                // Inside interval idx-1; measure distance to the removed
                // gaps flanking it, if any.
                let mut to_gap: Option<Rat> = None;
                if idx - 1 > 0 {
                    to_gap = Some(x - &iv.lo);
                }
                if idx < self.intervals.len() {
                    let right = &iv.hi - x;
                    to_gap = Some(match to_gap {
                        Some(left) if left <= right => left,
                        _ => right,
                    });
                }
                return PointClass::Inside { to_gap };
            }
        }
        // Outside: nearest endpoint among neighbours.
        let mut best: Option<Rat> = None;
        if idx > 0 {
            best = Some(x - &self.intervals[idx - 1].hi);
        }
        if idx < self.intervals.len() {
            let d = &self.intervals[idx].lo - x;
            best = Some(match best {
                Some(b) if b <= d => b,
                _ => d,
            });
        }
        PointClass::Outside {
            to_set: best.expect("nonempty set"),
        }
    }

    /// The open gaps between consecutive intervals, left to right.
    pub fn internal_gaps(&self) -> impl Iterator<Item = (Rat, Rat)> + '_ {
        self.intervals
            .windows(2)
            .map(|pair| (pair[0].hi.clone(), pair[1].lo.clone()))
    }

    /// JSON form: array of `["lo", "hi"]` rational-string pairs.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.intervals
                .iter()
                .map(|iv| json!([format_rat(&iv.lo), format_rat(&iv.hi)]))
                .collect(),
        )
    }

    pub fn from_json(v: &Value) -> Result<Self, SetError> {
        let arr = v.as_array().ok_or(SetError::BadJson("IntervalSet"))?;
        let mut intervals = Vec::with_capacity(arr.len());
        for item in arr {
            let pair = item.as_array().ok_or(SetError::BadJson("IntervalSet"))?;
            if pair.len() != 2 {
                return Err(SetError::BadJson("IntervalSet"));
            }
            let lo = rat_from_json(&pair[0], "IntervalSet")?;
            let hi = rat_from_json(&pair[1], "IntervalSet")?;
            intervals.push(Interval::new(lo, hi)?);
        }
        IntervalSet::new(intervals)
    }
}

fn rat_from_json(v: &Value, what: &'static str) -> Result<Rat, SetError> {
    let s = v.as_str().ok_or(SetError::BadJson(what))?;
    parse_rat(s).map_err(|_| SetError::BadJson(what))
}

/// One removed open interval `(w - eps, w + eps)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gap {
    pub center: Rat,
    pub half_len: Rat,
}

impl Gap {
    pub fn lo(&self) -> Rat {
        &self.center - &self.half_len
    }

    pub fn hi(&self) -> Rat {
        &self.center + &self.half_len
    }
}

/// Removed-gap description of a Cantor-type subset of `[-1, 1]`.
///
/// Invariants: every half-length is positive, the open gaps are pairwise
/// disjoint subsets of `[-1, 1]`, and `|w| >= eps` so that no gap
/// contains 0. The last condition is stronger than the stripe family
/// needs for convexity but is what makes the midpoint-deficit closed form
/// `delta = beta + 2 eps (1 - |w|)` exact; constructions that would
/// violate it are rejected rather than silently switching formulas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapList {
    gaps: Vec<Gap>,
}

impl GapList {
    pub fn new(gaps: Vec<Gap>) -> Result<Self, SetError> {
        let one = Rat::one();
        for g in &gaps {
            if g.half_len <= Rat::zero() {
                return Err(SetError::NonPositiveGap);
            }
            if g.lo() < -one.clone() || g.hi() > one {
                return Err(SetError::GapOutOfRange(
                    format_rat(&g.lo()),
                    format_rat(&g.hi()),
                ));
            }
            if g.center.abs() < g.half_len {
                return Err(SetError::GapContainsZero(
                    format_rat(&g.lo()),
                    format_rat(&g.hi()),
                ));
            }
        }
        // Disjointness: sort by left endpoint and compare neighbours.
        let mut order: Vec<usize> = (0..gaps.len()).collect();
        order.sort_by(|&i, &j| gaps[i].lo().cmp(&gaps[j].lo()));
        for pair in order.windows(2) {
            if gaps[pair[0]].hi() > gaps[pair[1]].lo() {
                return Err(SetError::GapOverlap(format_rat(&gaps[pair[1]].center)));
            }
        }
        Ok(GapList { gaps })
    }

    pub fn gaps(&self) -> &[Gap] {
        &self.gaps
    }

    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    pub fn total_length(&self) -> Rat {
        self.gaps
            .iter()
            .fold(Rat::zero(), |acc, g| acc + rat_int(2) * &g.half_len)
    }

    pub fn eps_sum(&self) -> Rat {
        self.gaps
            .iter()
            .fold(Rat::zero(), |acc, g| acc + &g.half_len)
    }

    /// The remainder set `[-1, 1] \ union of gaps` as an interval union.
    pub fn remainder_set(&self) -> IntervalSet {
        let mut cuts: Vec<(Rat, Rat)> = self.gaps.iter().map(|g| (g.lo(), g.hi())).collect();
        cuts.sort_by(|a, b| a.0.cmp(&b.0));
        let mut intervals = Vec::with_capacity(cuts.len() + 1);
        let mut lo = rat_int(-1);
        for (glo, ghi) in cuts {
            // Gaps may share endpoints, producing degenerate one-point
            // intervals; those are genuine members of the remainder.
            intervals.push(Interval { lo, hi: glo });
            lo = ghi;
        }
        intervals.push(Interval { lo, hi: rat_int(1) });
        IntervalSet::new(intervals).expect("disjoint gaps yield ordered remainder")
    }

    /// JSON form: array of `["w", "eps"]` rational-string pairs.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.gaps
                .iter()
                .map(|g| json!([format_rat(&g.center), format_rat(&g.half_len)]))
                .collect(),
        )
    }

    pub fn from_json(v: &Value) -> Result<Self, SetError> {
        let arr = v.as_array().ok_or(SetError::BadJson("GapList"))?;
        let mut gaps = Vec::with_capacity(arr.len());
        for item in arr {
            let pair = item.as_array().ok_or(SetError::BadJson("GapList"))?;
            if pair.len() != 2 {
                return Err(SetError::BadJson("GapList"));
            }
            gaps.push(Gap {
                center: rat_from_json(&pair[0], "GapList")?,
                half_len: rat_from_json(&pair[1], "GapList")?,
            });
        }
        GapList::new(gaps)
    }
}

/// Generation-`depth` approximation of the ternary Cantor set:
/// `2^depth` closed intervals of length `3^-depth`. The true Cantor set
/// is contained in the result for every depth.
pub fn ternary_cantor(depth: u32) -> IntervalSet {
    assert!(depth <= 40, "ternary_cantor depth capped at 40");
    let third = rat(1, 3);
    let mut intervals = vec![Interval {
        lo: rat_int(0),
        hi: rat_int(1),
    }];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(intervals.len() * 2);
        for iv in &intervals {
            let step = iv.length() * &third;
            next.push(Interval {
                lo: iv.lo.clone(),
                hi: &iv.lo + &step,
            });
            next.push(Interval {
                lo: &iv.hi - &step,
                hi: iv.hi.clone(),
            });
        }
        intervals = next;
    }
    IntervalSet { intervals }
}

/// Symmetric Smith–Volterra–Cantor-style construction on `[-1, 1]`.
///
/// Two mirrored copies of a centred-gap removal scheme on `[0, 1]` and
/// `[-1, 0]`, so `0` and `±1` always belong to the set and every removed
/// gap satisfies `|w| > eps`. At generation `n` each of the `2^(n-1)`
/// intervals per half loses a centred open interval of length
/// `gap_budget / 4^n`; the total removed length through any depth stays
/// strictly below `gap_budget`, hence the half-length sum stays strictly
/// below `gap_budget / 2 <= 1/24`.
///
/// Returns the remaining interval union together with all removed gaps,
/// enumerated by generation and then left to right.
pub fn fat_cantor(gap_budget: &Rat, depth: u32) -> Result<(IntervalSet, GapList), SetError> {
    if *gap_budget <= Rat::zero() || *gap_budget > rat(1, 12) {
        return Err(SetError::BadGapBudget(format_rat(gap_budget)));
    }
    if depth < 1 {
        return Err(SetError::BadDepth);
    }
    let half = rat(1, 2);
    // Right-half construction on [0, 1].
    let mut live = vec![Interval {
        lo: rat_int(0),
        hi: rat_int(1),
    }];
    let mut gaps: Vec<Gap> = Vec::new();
    let mut removal = gap_budget / rat_int(4);
    for _ in 1..=depth {
        let mut next = Vec::with_capacity(live.len() * 2);
        let half_removal = &removal * &half;
        for iv in &live {
            let mid = (&iv.lo + &iv.hi) * &half;
            let glo = &mid - &half_removal;
            let ghi = &mid + &half_removal;
            debug_assert!(glo > iv.lo && ghi < iv.hi, "gap must fit inside interval");
            gaps.push(Gap {
                center: mid,
                half_len: half_removal.clone(),
            });
            next.push(Interval {
                lo: iv.lo.clone(),
                hi: glo,
            });
            next.push(Interval {
                lo: ghi,
                hi: iv.hi.clone(),
            });
        }
        live = next;
        removal = removal / rat_int(4);
    }
    // Mirror onto [-1, 0]. Within each generation the mirrored gaps come
    // first so enumeration is left-to-right per generation.
    let per_gen: Vec<usize> = (0..depth).map(|n| 1usize << n).collect();
    let mut all_gaps = Vec::with_capacity(gaps.len() * 2);
    let mut offset = 0;
    for count in per_gen {
        let gen = &gaps[offset..offset + count];
        for g in gen.iter().rev() {
            all_gaps.push(Gap {
                center: -&g.center,
                half_len: g.half_len.clone(),
            });
        }
        all_gaps.extend(gen.iter().cloned());
        offset += count;
    }
    let mut intervals: Vec<Interval> = live
        .iter()
        .rev()
        .map(|iv| Interval {
            lo: -&iv.hi,
            hi: -&iv.lo,
        })
        .collect();
    // The mirrored copy ends at 0 and the right copy starts at 0; merge
    // them into one interval through the origin.
    let first_right = live.remove(0);
    let last_left = intervals.pop().expect("left half nonempty");
    intervals.push(Interval {
        lo: last_left.lo,
        hi: first_right.hi,
    });
    intervals.extend(live);
    let set = IntervalSet::new(intervals)?;
    let gap_list = GapList::new(all_gaps)?;
    debug_assert_eq!(set.measure() + gap_list.total_length(), rat_int(2));
    Ok((set, gap_list))
}

/// Classification against the generation-`depth` ternary Cantor
/// approximation without materializing its `2^depth` intervals:
/// descends the triadic structure of `[0, 1]` and reads the distance off
/// the first middle-third gap the point falls into. Agrees exactly with
/// `ternary_cantor(depth).classify(x)`.
pub fn cantor_classify(x: &Rat, depth: u32) -> PointClass {
    let zero = Rat::zero();
    let one = Rat::one();
    if *x < zero {
        return PointClass::Outside { to_set: -x.clone() };
    }
    if *x > one {
        return PointClass::Outside {
            to_set: x - &one,
        };
    }
    let mut lo = zero;
    let mut len = one;
    let third = rat(1, 3);
    for _ in 0..depth {
        len = len * &third;
        let cut1 = &lo + &len;
        let cut2 = &cut1 + &len;
        if *x > cut1 && *x < cut2 {
            // Strictly inside this generation's removed gap; the gap
            // edges belong to every deeper approximation.
            let left = x - &cut1;
            let right = &cut2 - x;
            return PointClass::Outside {
                to_set: left.min(right),
            };
        }
        if *x <= cut1 {
            // stay in the left third
        } else {
            lo = cut2;
        }
    }
    if depth == 0 {
        return PointClass::Inside { to_gap: None };
    }
    // Inside the generation-`depth` interval [lo, lo + len]; flanking
    // gaps sit just outside unless the interval touches 0 or 1.
    let hi = &lo + &len;
    let mut to_gap: Option<Rat> = None;
    if !lo.is_zero() {
        to_gap = Some(x - &lo);
    }
    if hi != Rat::one() {
        let right = &hi - x;
        to_gap = Some(match to_gap {
            Some(l) if l <= right => l,
            _ => right,
        });
    }
    PointClass::Inside { to_gap }
}

/// Cantor function (Devil's Staircase) via ternary-digit expansion,
/// truncated at the first digit 1 or after `depth` digits.
///
/// Returns `(value, err_bound)` with `|h(x) - value| <= err_bound` and
/// `err_bound <= 2^-depth`; the bound is 0 when the expansion hits a
/// digit 1 (h is constant on that gap). Monotone in `x` at fixed depth.
pub fn cantor_function(x: &Rat, depth: u32) -> Result<(Rat, Rat), SetError> {
    if *x < Rat::zero() || *x > Rat::one() {
        return Err(SetError::OutOfDomain(format_rat(x)));
    }
    assert!(depth >= 1, "cantor_function depth must be >= 1");
    let mut t = x.clone();
    let mut value = Rat::zero();
    let mut scale = rat(1, 2);
    let three = rat_int(3);
    let half = rat(1, 2);
    for _ in 0..depth {
        t = t * &three;
        let floor = t.floor();
        let mut d = floor.to_integer();
        t = t - floor;
        if d == num_bigint::BigInt::from(3) {
            // Only possible when t was exactly 1; read it as tail .222…
            d = num_bigint::BigInt::from(2);
            t = Rat::one();
        }
        if d == num_bigint::BigInt::from(1) {
            // In (or at the left endpoint of) a removed middle third;
            // h is exactly the gap plateau value.
            return Ok((value + &scale, Rat::zero()));
        }
        if d == num_bigint::BigInt::from(2) {
            value = value + &scale;
        }
        scale = scale * &half;
    }
    Ok((value, scale * rat_int(2)))
}

/// `cantor_function` on f64 input, converted exactly.
pub fn cantor_function_f64(x: f64, depth: u32) -> Result<(f64, f64), SetError> {
    let xr = crate::rational::rat_from_f64(x)
        .ok_or_else(|| SetError::OutOfDomain(format!("{x}")))?;
    let (v, e) = cantor_function(&xr, depth)?;
    Ok((crate::rational::rat_to_f64(&v), crate::rational::rat_to_f64(&e)))
}
