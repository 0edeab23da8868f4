//! Compact plane sets as resolution-indexed outer covers.
//!
//! A cover at depth `g` is a finite union of rectangles known to contain
//! the true set, with a nonincreasing bound on the Hausdorff distance
//! from cover to set. Because the set is inside the cover, a segment
//! with positive distance to the cover is certified disjoint from the
//! set; a distance of zero says nothing.
//!
//! Product and staircase covers carry exact rational corners, so
//! disjointness certificates there are exact. Koch covers are built in
//! floating point with outward rounding, which preserves the superset
//! property but not exactness; the 3^(1-depth) cover-to-set bound for
//! the Koch curve is an engineering choice, not a proved identity, and
//! reports must flag it as such.

use crate::interval_sets::{cantor_function, ternary_cantor, IntervalSet, PointClass, SetError};
use crate::rational::{rat, rat_from_f64, rat_int, rat_to_f64, Rat};
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeomError {
    #[error("coordinates must be finite")]
    NonFinite,
    #[error("segment endpoints must differ")]
    DegenerateSegment,
    #[error("direction vector must be nonzero")]
    ZeroDirection,
    #[error("{0}")]
    Set(#[from] SetError),
    #[error("segment endpoints are on the same side of the extended staircase graph")]
    NoSignChange,
    #[error("depth {0} exceeds cap {1}")]
    DepthTooLarge(u32, u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Result<Self, GeomError> {
        if !(x.is_finite() && y.is_finite()) {
            return Err(GeomError::NonFinite);
        }
        Ok(Point2 { x, y })
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment2 {
    pub a: Point2,
    pub b: Point2,
}

impl Segment2 {
    pub fn new(a: Point2, b: Point2) -> Self {
        Segment2 { a, b }
    }
}

/// Unit direction vector (normalized on construction, checked to 1e-12).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    vx: f64,
    vy: f64,
}

impl Direction {
    pub fn new(vx: f64, vy: f64) -> Result<Self, GeomError> {
        if !(vx.is_finite() && vy.is_finite()) {
            return Err(GeomError::NonFinite);
        }
        let n = vx.hypot(vy);
        if n == 0.0 {
            return Err(GeomError::ZeroDirection);
        }
        let d = Direction {
            vx: vx / n,
            vy: vy / n,
        };
        debug_assert!((d.vx * d.vx + d.vy * d.vy - 1.0).abs() < 1e-12);
        Ok(d)
    }

    pub fn x(&self) -> f64 {
        self.vx
    }

    pub fn y(&self) -> f64 {
        self.vy
    }

    /// True when `w` is parallel to this direction within `tol` (sine of
    /// the angle between them).
    pub fn parallel_to(&self, wx: f64, wy: f64, tol: f64) -> bool {
        let n = wx.hypot(wy);
        if n == 0.0 {
            return false;
        }
        (wx * self.vy - wy * self.vx).abs() / n <= tol
    }
}

/// Axis-aligned rectangle with exact rational corners.
#[derive(Debug, Clone, PartialEq)]
pub struct Rect {
    pub xmin: Rat,
    pub ymin: Rat,
    pub xmax: Rat,
    pub ymax: Rat,
}

impl Rect {
    pub fn contains_f64(&self, x: f64, y: f64) -> bool {
        let (Some(xr), Some(yr)) = (rat_from_f64(x), rat_from_f64(y)) else {
            return false;
        };
        self.xmin <= xr && xr <= self.xmax && self.ymin <= yr && yr <= self.ymax
    }

    pub fn to_f64(&self) -> [f64; 4] {
        [
            rat_to_f64(&self.xmin),
            rat_to_f64(&self.ymin),
            rat_to_f64(&self.xmax),
            rat_to_f64(&self.ymax),
        ]
    }

    fn contains_rect(&self, other: &Rect) -> bool {
        self.xmin <= other.xmin
            && self.ymin <= other.ymin
            && other.xmax <= self.xmax
            && other.ymax <= self.ymax
    }
}

/// One cover level: rectangles plus the cover-to-set bound at that depth.
#[derive(Debug, Clone)]
pub struct Cover {
    pub depth: u32,
    pub rects: Vec<Rect>,
    pub haus_bound: f64,
}

#[derive(Debug)]
enum Kind {
    Product { a: IntervalSet, b: IntervalSet },
    HoleyStaircase,
    KochCurve,
    RectUnion { rects: Vec<Rect>, haus: f64 },
}

/// Resolution-indexed outer cover of a compact plane set.
///
/// Invariants: the true set is contained in `cover(g)` for every `g`;
/// covers shrink (`cover(g+1) ⊆ cover(g)`, rectangle-wise for product
/// and staircase kinds); the Hausdorff bound is nonincreasing in `g`.
/// Cover generation is memoized; generation is pure, so first-writer
/// wins and the value is shared.
pub struct PlaneSetApprox {
    kind: Kind,
    max_depth: u32,
    covers: Mutex<BTreeMap<u32, Arc<Cover>>>,
}

impl std::fmt::Debug for PlaneSetApprox {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PlaneSetApprox")
            .field("kind", &self.kind_name())
            .field("max_depth", &self.max_depth)
            .finish()
    }
}

/// Exact product cover `{I × J : I ∈ A, J ∈ B}`; the cover *is* the set
/// (Hausdorff bound 0), independent of depth.
pub fn product_approx(a: &IntervalSet, b: &IntervalSet) -> Result<PlaneSetApprox, GeomError> {
    if a.is_empty() || b.is_empty() {
        return Err(GeomError::Set(SetError::Empty));
    }
    Ok(PlaneSetApprox::new(
        Kind::Product {
            a: a.clone(),
            b: b.clone(),
        },
        u32::MAX,
    ))
}

/// Outer cover of the Holey Devil's Staircase: at depth `g`, one
/// rectangle `I × h(I)` per generation-`g` Cantor interval `I`, of width
/// `3^-g` and height `2^-g`.
pub fn holey_staircase(max_depth: u32) -> Result<PlaneSetApprox, GeomError> {
    if max_depth < 1 {
        return Err(GeomError::Set(SetError::BadDepth));
    }
    if max_depth > 16 {
        return Err(GeomError::DepthTooLarge(max_depth, 16));
    }
    Ok(PlaneSetApprox::new(Kind::HoleyStaircase, max_depth))
}

/// Outer cover of the Koch curve with endpoints (0,0) and (3,0): each
/// generation-`g` polyline segment thickened into its bounding box
/// inflated by the 3^(1-g) cover-to-set bound.
pub fn koch_curve(max_depth: u32) -> Result<PlaneSetApprox, GeomError> {
    if max_depth > 12 {
        return Err(GeomError::DepthTooLarge(max_depth, 12));
    }
    Ok(PlaneSetApprox::new(Kind::KochCurve, max_depth))
}

/// Explicit rectangle union (depth-independent), mainly for controls
/// like the full square.
pub fn rect_union(rects: Vec<Rect>, haus: f64) -> Result<PlaneSetApprox, GeomError> {
    if rects.is_empty() {
        return Err(GeomError::Set(SetError::Empty));
    }
    Ok(PlaneSetApprox::new(Kind::RectUnion { rects, haus }, u32::MAX))
}

impl PlaneSetApprox {
    fn new(kind: Kind, max_depth: u32) -> Self {
        PlaneSetApprox {
            kind,
            max_depth,
            covers: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            Kind::Product { .. } => "product",
            Kind::HoleyStaircase => "holey-staircase",
            Kind::KochCurve => "koch-curve",
            Kind::RectUnion { .. } => "rect-union",
        }
    }

    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    /// Depth actually used for a requested depth (kinds with a fixed
    /// cover ignore it).
    pub fn effective_depth(&self, depth: u32) -> u32 {
        depth.min(self.max_depth)
    }

    /// Whether cover-rectangle membership implies membership in the true
    /// set (only product kinds, where the cover is exact).
    pub fn cover_is_exact(&self) -> bool {
        matches!(self.kind, Kind::Product { .. })
    }

    pub fn cover(&self, depth: u32) -> Arc<Cover> {
        let depth = self.effective_depth(depth);
        let mut memo = self.covers.lock().unwrap();
        if let Some(c) = memo.get(&depth) {
            return Arc::clone(c);
        }
        let cover = Arc::new(self.build_cover(depth));
        memo.insert(depth, Arc::clone(&cover));
        cover
    }

    fn build_cover(&self, depth: u32) -> Cover {
        match &self.kind {
            Kind::Product { a, b } => {
                let mut rects = Vec::with_capacity(a.len() * b.len());
                for ia in a.intervals() {
                    for ib in b.intervals() {
                        rects.push(Rect {
                            xmin: ia.lo().clone(),
                            ymin: ib.lo().clone(),
                            xmax: ia.hi().clone(),
                            ymax: ib.hi().clone(),
                        });
                    }
                }
                Cover {
                    depth,
                    rects,
                    haus_bound: 0.0,
                }
            }
            Kind::HoleyStaircase => {
                let xs = ternary_cantor(depth);
                let scale = num_bigint::BigInt::from(1u8) << depth;
                let rects = xs
                    .intervals()
                    .iter()
                    .enumerate()
                    .map(|(k, iv)| Rect {
                        xmin: iv.lo().clone(),
                        xmax: iv.hi().clone(),
                        ymin: Rat::new(k.into(), scale.clone()),
                        ymax: Rat::new((k + 1).into(), scale.clone()),
                    })
                    .collect();
                let haus = (3f64.powi(-(depth as i32)).powi(2)
                    + 2f64.powi(-(depth as i32)).powi(2))
                .sqrt();
                Cover {
                    depth,
                    rects,
                    haus_bound: haus,
                }
            }
            Kind::KochCurve => {
                let verts = koch_polyline(depth);
                let margin = 3f64.powi(1 - depth as i32);
                // Outward rounding: inflate a touch beyond the bound so
                // the f64 boxes still contain the true curve.
                let pad = margin * (1.0 + 1e-9) + 1e-12;
                let rects = verts
                    .windows(2)
                    .map(|s| {
                        let xmin = s[0].x.min(s[1].x) - pad;
                        let xmax = s[0].x.max(s[1].x) + pad;
                        let ymin = s[0].y.min(s[1].y) - pad;
                        let ymax = s[0].y.max(s[1].y) + pad;
                        Rect {
                            xmin: rat_from_f64(xmin).unwrap(),
                            ymin: rat_from_f64(ymin).unwrap(),
                            xmax: rat_from_f64(xmax).unwrap(),
                            ymax: rat_from_f64(ymax).unwrap(),
                        }
                    })
                    .collect();
                Cover {
                    depth,
                    rects,
                    haus_bound: margin,
                }
            }
            Kind::RectUnion { rects, haus } => Cover {
                depth,
                rects: rects.clone(),
                haus_bound: *haus,
            },
        }
    }

    pub fn haus_bound(&self, depth: u32) -> f64 {
        self.cover(depth).haus_bound
    }

    /// Bounding box of the cover at the shallowest level, as f64.
    pub fn bounding_box(&self) -> [f64; 4] {
        let c = self.cover(match self.kind {
            Kind::HoleyStaircase => 1,
            Kind::KochCurve => 0,
            _ => 0,
        });
        let mut bb = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        for r in &c.rects {
            let f = r.to_f64();
            bb[0] = bb[0].min(f[0]);
            bb[1] = bb[1].min(f[1]);
            bb[2] = bb[2].max(f[2]);
            bb[3] = bb[3].max(f[3]);
        }
        bb
    }

    /// Gaps of the cover's x-projection at this depth, as sorted open
    /// intervals (used by transparency search to propose corridors).
    pub fn x_projection_gaps(&self, depth: u32) -> Vec<(f64, f64)> {
        projection_gaps(&self.cover(depth).rects, true)
    }

    pub fn y_projection_gaps(&self, depth: u32) -> Vec<(f64, f64)> {
        projection_gaps(&self.cover(depth).rects, false)
    }

    /// Staircase-specific hints: `(gap_lo, gap_hi, plateau_level)` per
    /// x-gap of the depth-`g` cover. Empty for other kinds.
    pub fn plateau_crossings(&self, depth: u32) -> Vec<(f64, f64, f64)> {
        if !matches!(self.kind, Kind::HoleyStaircase) {
            return Vec::new();
        }
        let c = self.cover(depth);
        let mut out = Vec::new();
        for pair in c.rects.windows(2) {
            out.push((
                rat_to_f64(&pair[0].xmax),
                rat_to_f64(&pair[1].xmin),
                rat_to_f64(&pair[0].ymax),
            ));
        }
        out
    }
}

fn projection_gaps(rects: &[Rect], x_axis: bool) -> Vec<(f64, f64)> {
    let mut spans: Vec<(f64, f64)> = rects
        .iter()
        .map(|r| {
            let f = r.to_f64();
            if x_axis {
                (f[0], f[2])
            } else {
                (f[1], f[3])
            }
        })
        .collect();
    spans.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut gaps = Vec::new();
    let mut hi = match spans.first() {
        Some(s) => s.1,
        None => return gaps,
    };
    for s in spans.iter().skip(1) {
        if s.0 > hi {
            gaps.push((hi, s.0));
        }
        hi = hi.max(s.1);
    }
    gaps
}

/// Generation-`depth` Koch polyline from (0,0) to (3,0), bumps upward:
/// `4^depth` segments of length `3^(1-depth)`, `4^depth + 1` vertices.
pub fn koch_polyline(depth: u32) -> Vec<Point2> {
    assert!(depth <= 12, "koch_polyline depth capped at 12");
    let mut pts = vec![
        Point2 { x: 0.0, y: 0.0 },
        Point2 { x: 3.0, y: 0.0 },
    ];
    for _ in 0..depth {
        let mut next = Vec::with_capacity((pts.len() - 1) * 4 + 1);
        for s in pts.windows(2) {
            let (a, b) = (s[0], s[1]);
            let dx = (b.x - a.x) / 3.0;
            let dy = (b.y - a.y) / 3.0;
            let p1 = Point2 {
                x: a.x + dx,
                y: a.y + dy,
            };
            let p3 = Point2 {
                x: a.x + 2.0 * dx,
                y: a.y + 2.0 * dy,
            };
            // Apex of the equilateral bump on [p1, p3], on the left of
            // the direction of travel (upward for the base segment).
            let s3 = 3f64.sqrt() / 2.0;
            let apex = Point2 {
                x: (p1.x + p3.x) / 2.0 - dy * s3,
                y: (p1.y + p3.y) / 2.0 + dx * s3,
            };
            next.push(a);
            next.push(p1);
            next.push(apex);
            next.push(p3);
        }
        next.push(*pts.last().unwrap());
        pts = next;
    }
    pts
}

// ---------------------------------------------------------------------
// Exact segment/rectangle distance.
// ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RatPoint {
    pub x: Rat,
    pub y: Rat,
}

impl RatPoint {
    pub fn from_f64(p: &Point2) -> Option<RatPoint> {
        Some(RatPoint {
            x: rat_from_f64(p.x)?,
            y: rat_from_f64(p.y)?,
        })
    }
}

fn dot(ax: &Rat, ay: &Rat, bx: &Rat, by: &Rat) -> Rat {
    ax * bx + ay * by
}

/// Squared distance from a point to a segment, exactly.
fn point_segment_dist_sq(p: &RatPoint, a: &RatPoint, b: &RatPoint) -> Rat {
    let abx = &b.x - &a.x;
    let aby = &b.y - &a.y;
    let apx = &p.x - &a.x;
    let apy = &p.y - &a.y;
    let denom = dot(&abx, &aby, &abx, &aby);
    if denom.is_zero() {
        return dot(&apx, &apy, &apx, &apy);
    }
    let t = dot(&apx, &apy, &abx, &aby);
    if t <= Rat::zero() {
        dot(&apx, &apy, &apx, &apy)
    } else if t >= denom {
        let bpx = &p.x - &b.x;
        let bpy = &p.y - &b.y;
        dot(&bpx, &bpy, &bpx, &bpy)
    } else {
        // |ap|^2 - (ap·ab)^2 / |ab|^2
        dot(&apx, &apy, &apx, &apy) - &t * &t / denom
    }
}

fn orient(a: &RatPoint, b: &RatPoint, c: &RatPoint) -> Rat {
    (&b.x - &a.x) * (&c.y - &a.y) - (&b.y - &a.y) * (&c.x - &a.x)
}

fn segments_intersect(a: &RatPoint, b: &RatPoint, c: &RatPoint, d: &RatPoint) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    let neg = |r: &Rat| r < &Rat::zero();
    let pos = |r: &Rat| r > &Rat::zero();
    if (pos(&o1) && neg(&o2) || neg(&o1) && pos(&o2))
        && (pos(&o3) && neg(&o4) || neg(&o3) && pos(&o4))
    {
        return true;
    }
    let on = |a: &RatPoint, b: &RatPoint, p: &RatPoint, o: &Rat| {
        o.is_zero()
            && p.x >= a.x.clone().min(b.x.clone())
            && p.x <= a.x.clone().max(b.x.clone())
            && p.y >= a.y.clone().min(b.y.clone())
            && p.y <= a.y.clone().max(b.y.clone())
    };
    on(a, b, c, &o1) || on(a, b, d, &o2) || on(c, d, a, &o3) || on(c, d, b, &o4)
}

fn segment_segment_dist_sq(a: &RatPoint, b: &RatPoint, c: &RatPoint, d: &RatPoint) -> Rat {
    if segments_intersect(a, b, c, d) {
        return Rat::zero();
    }
    let mut best = point_segment_dist_sq(a, c, d);
    for cand in [
        point_segment_dist_sq(b, c, d),
        point_segment_dist_sq(c, a, b),
        point_segment_dist_sq(d, a, b),
    ] {
        if cand < best {
            best = cand;
        }
    }
    best
}

/// Exact squared distance from a segment to a rectangle (0 when they
/// touch or overlap).
pub(crate) fn segment_rect_dist_sq(a: &RatPoint, b: &RatPoint, r: &Rect) -> Rat {
    let inside = |p: &RatPoint| {
        p.x >= r.xmin && p.x <= r.xmax && p.y >= r.ymin && p.y <= r.ymax
    };
    if inside(a) || inside(b) {
        return Rat::zero();
    }
    let corners = [
        RatPoint {
            x: r.xmin.clone(),
            y: r.ymin.clone(),
        },
        RatPoint {
            x: r.xmax.clone(),
            y: r.ymin.clone(),
        },
        RatPoint {
            x: r.xmax.clone(),
            y: r.ymax.clone(),
        },
        RatPoint {
            x: r.xmin.clone(),
            y: r.ymax.clone(),
        },
    ];
    let mut best: Option<Rat> = None;
    for i in 0..4 {
        let d = segment_segment_dist_sq(a, b, &corners[i], &corners[(i + 1) % 4]);
        if d.is_zero() {
            return d;
        }
        best = Some(match best {
            Some(bst) if bst <= d => bst,
            _ => d,
        });
    }
    best.unwrap()
}

/// Cheap exact lower bound on the squared distance via axis separations.
fn segment_rect_gap_lower_sq(a: &RatPoint, b: &RatPoint, r: &Rect) -> Rat {
    let (sxmin, sxmax) = if a.x <= b.x {
        (&a.x, &b.x)
    } else {
        (&b.x, &a.x)
    };
    let (symin, symax) = if a.y <= b.y {
        (&a.y, &b.y)
    } else {
        (&b.y, &a.y)
    };
    let dx = if *sxmax < r.xmin {
        &r.xmin - sxmax
    } else if r.xmax < *sxmin {
        sxmin - &r.xmax
    } else {
        Rat::zero()
    };
    let dy = if *symax < r.ymin {
        &r.ymin - symax
    } else if r.ymax < *symin {
        symin - &r.ymax
    } else {
        Rat::zero()
    };
    &dx * &dx + &dy * &dy
}

/// Exact minimum squared distance from a segment to the cover at the
/// given depth. Positive result certifies the segment misses the true
/// set; zero is inconclusive about the true set.
pub fn segment_clearance_sq(seg: &Segment2, set: &PlaneSetApprox, depth: u32) -> Rat {
    let a = RatPoint::from_f64(&seg.a).expect("finite endpoint");
    let b = RatPoint::from_f64(&seg.b).expect("finite endpoint");
    let cover = set.cover(depth);
    let mut best: Option<Rat> = None;
    for r in &cover.rects {
        if let Some(bst) = &best {
            if segment_rect_gap_lower_sq(&a, &b, r) >= *bst {
                continue;
            }
        }
        let d = segment_rect_dist_sq(&a, &b, r);
        if d.is_zero() {
            return d;
        }
        best = Some(match best {
            Some(bst) if bst <= d => bst,
            _ => d,
        });
    }
    best.unwrap_or_else(Rat::zero)
}

/// `sqrt` of [`segment_clearance_sq`] as f64.
pub fn segment_clearance(seg: &Segment2, set: &PlaneSetApprox, depth: u32) -> f64 {
    rat_to_f64(&segment_clearance_sq(seg, set, depth)).sqrt()
}

/// Fast f64 clearance used as a search prefilter; certification must go
/// through [`segment_clearance_sq`].
pub fn segment_clearance_f64(seg: &Segment2, set: &PlaneSetApprox, depth: u32) -> f64 {
    let cover = set.cover(depth);
    let mut best = f64::INFINITY;
    for r in &cover.rects {
        let f = r.to_f64();
        let d = seg_rect_dist_f64(seg, f);
        if d < best {
            best = d;
            if best == 0.0 {
                break;
            }
        }
    }
    best
}

fn seg_rect_dist_f64(seg: &Segment2, r: [f64; 4]) -> f64 {
    let inside = |x: f64, y: f64| x >= r[0] && x <= r[2] && y >= r[1] && y <= r[3];
    if inside(seg.a.x, seg.a.y) || inside(seg.b.x, seg.b.y) {
        return 0.0;
    }
    let corners = [(r[0], r[1]), (r[2], r[1]), (r[2], r[3]), (r[0], r[3])];
    let mut best = f64::INFINITY;
    for i in 0..4 {
        let c = corners[i];
        let d = corners[(i + 1) % 4];
        let v = seg_seg_dist_f64(
            (seg.a.x, seg.a.y),
            (seg.b.x, seg.b.y),
            c,
            d,
        );
        if v < best {
            best = v;
        }
    }
    best
}

fn point_seg_dist_f64(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let abx = b.0 - a.0;
    let aby = b.1 - a.1;
    let apx = p.0 - a.0;
    let apy = p.1 - a.1;
    let denom = abx * abx + aby * aby;
    if denom == 0.0 {
        return apx.hypot(apy);
    }
    let t = ((apx * abx + apy * aby) / denom).clamp(0.0, 1.0);
    (apx - t * abx).hypot(apy - t * aby)
}

fn seg_seg_dist_f64(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> f64 {
    let orient = |p: (f64, f64), q: (f64, f64), r: (f64, f64)| {
        (q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0)
    };
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return 0.0;
    }
    point_seg_dist_f64(a, c, d)
        .min(point_seg_dist_f64(b, c, d))
        .min(point_seg_dist_f64(c, a, b))
        .min(point_seg_dist_f64(d, a, b))
}

// ---------------------------------------------------------------------
// Extended Cantor function graph and the last-crossing search.
// ---------------------------------------------------------------------

/// Extended Cantor function: 0 left of 0, the Cantor function on [0,1],
/// 1 right of 1. Exact within `2^-digits`.
pub fn extended_staircase(x: &Rat, digits: u32) -> Rat {
    if *x <= Rat::zero() {
        return Rat::zero();
    }
    if *x >= rat_int(1) {
        return rat_int(1);
    }
    cantor_function(x, digits).expect("x in (0,1)").0
}

/// Result of [`last_graph_crossing`]: the located crossing with its
/// certified residual `|y_seg - H(x)|` at the returned point.
#[derive(Debug, Clone)]
pub struct Crossing {
    pub point: Point2,
    pub residual_bound: f64,
    pub bracket_width: f64,
    pub evaluations: usize,
}

/// Locates the rightmost (largest segment parameter, oriented by
/// increasing x) sign change of `t -> y_seg(t) - H(x_seg(t))` by a
/// right-priority adaptive search with a Hölder-modulus pruning bound,
/// then refines until the returned point's residual is below
/// `2 * 2^-depth`.
///
/// Precondition: the endpoints are strictly on opposite sides of the
/// extended graph and the segment is not vertical. The crossing lies on
/// the graph of H; whether its x-coordinate lies in the Cantor set is
/// for the caller to classify.
pub fn last_graph_crossing(seg: &Segment2, depth: u32) -> Result<Crossing, GeomError> {
    if seg.a.x == seg.b.x {
        return Err(GeomError::DegenerateSegment);
    }
    // Orient by increasing x.
    let (p0, p1) = if seg.a.x < seg.b.x {
        (seg.a, seg.b)
    } else {
        (seg.b, seg.a)
    };
    let digits = depth + 20;
    let x0 = rat_from_f64(p0.x).ok_or(GeomError::NonFinite)?;
    let y0 = rat_from_f64(p0.y).ok_or(GeomError::NonFinite)?;
    let dx = rat_from_f64(p1.x).ok_or(GeomError::NonFinite)? - &x0;
    let dy = rat_from_f64(p1.y).ok_or(GeomError::NonFinite)? - &y0;
    let side = |t: &Rat| -> Rat {
        let x = &x0 + &dx * t;
        let y = &y0 + &dy * t;
        y - extended_staircase(&x, digits)
    };
    let s0 = side(&Rat::zero());
    let s1 = side(&rat_int(1));
    let sign = |r: &Rat| {
        if r.is_zero() {
            0
        } else if r.is_positive() {
            1
        } else {
            -1
        }
    };
    if sign(&s0) == 0 || sign(&s1) == 0 || sign(&s0) == sign(&s1) {
        return Err(GeomError::NoSignChange);
    }
    // Hölder modulus of the side function over a t-interval of width w:
    // |Δ side| <= |dy| w + 2 (|dx| w)^alpha + digit truncation. Computed
    // in f64 with generous slack; used only to skip provably
    // crossing-free intervals.
    let dxf = rat_to_f64(&dx).abs();
    let dyf = rat_to_f64(&dy).abs();
    let alpha = 2f64.ln() / 3f64.ln();
    let modulus =
        move |w: f64| dyf * w + 2.0 * (dxf * w).powf(alpha) + 2.0 * 2f64.powi(-(digits as i32));
    let min_width = 2f64.powi(-(depth as i32));
    let mut evals = 2usize;
    let budget = 200_000usize;

    struct Frame {
        lo: Rat,
        hi: Rat,
        s_lo: Rat,
        s_hi: Rat,
        width: f64,
    }
    // Depth-first, right-subinterval first: the first bracket found at
    // the floor width is the rightmost detectable sign change.
    let mut stack = vec![Frame {
        lo: Rat::zero(),
        hi: rat_int(1),
        s_lo: s0,
        s_hi: s1,
        width: 1.0,
    }];
    let mut bracket: Option<(Rat, Rat, Rat, Rat)> = None;
    while let Some(f) = stack.pop() {
        if evals > budget {
            break;
        }
        let sl = sign(&f.s_lo);
        let sh = sign(&f.s_hi);
        if sl != sh || sl == 0 {
            if f.width <= min_width {
                bracket = Some((f.lo, f.hi, f.s_lo, f.s_hi));
                break;
            }
        } else {
            // Same strict sign at both ends: prune when no interior zero
            // can exist.
            let margin = rat_to_f64(&f.s_lo.clone().abs())
                .min(rat_to_f64(&f.s_hi.clone().abs()));
            if margin > modulus(f.width) {
                continue;
            }
            if f.width <= min_width {
                continue;
            }
        }
        let mid = (&f.lo + &f.hi) / rat_int(2);
        let s_mid = side(&mid);
        evals += 1;
        let w = f.width / 2.0;
        // Push left first so the right half is processed first.
        stack.push(Frame {
            lo: f.lo,
            hi: mid.clone(),
            s_lo: f.s_lo,
            s_hi: s_mid.clone(),
            width: w,
        });
        stack.push(Frame {
            lo: mid,
            hi: f.hi,
            s_lo: s_mid,
            s_hi: f.s_hi,
            width: w,
        });
    }
    let (mut lo, mut hi, mut s_lo, mut s_hi) =
        bracket.ok_or(GeomError::NoSignChange)?;
    // Value-targeted refinement: the Cantor function is only Hölder, so
    // t-resolution alone does not bound the residual. Keep bisecting
    // around the sign change until the midpoint residual is certified.
    let tol = rat(2, 1) / Rat::from(num_bigint::BigInt::from(1u8) << depth);
    let mut mid = (&lo + &hi) / rat_int(2);
    let mut s_mid = side(&mid);
    evals += 1;
    for _ in 0..(depth + 60) {
        if s_mid.abs() <= tol {
            break;
        }
        if sign(&s_mid) == sign(&s_hi) {
            hi = mid;
            s_hi = s_mid;
        } else {
            lo = mid;
            s_lo = s_mid;
        }
        mid = (&lo + &hi) / rat_int(2);
        s_mid = side(&mid);
        evals += 1;
    }
    let _ = (&s_lo, &s_hi);
    let x = &x0 + &dx * &mid;
    let y = &y0 + &dy * &mid;
    Ok(Crossing {
        point: Point2 {
            x: rat_to_f64(&x),
            y: rat_to_f64(&y),
        },
        residual_bound: rat_to_f64(&s_mid.abs()),
        bracket_width: rat_to_f64(&(&hi - &lo)),
        evaluations: evals,
    })
}

/// Trace of a full line (given by a carrier segment, extended to the
/// cover's bounding box) against the cover: connected parameter
/// intervals of the intersection.
pub fn line_cover_components(line: &Segment2, set: &PlaneSetApprox, depth: u32) -> Vec<(f64, f64)> {
    let cover = set.cover(depth);
    let dir_x = line.b.x - line.a.x;
    let dir_y = line.b.y - line.a.y;
    let n = dir_x.hypot(dir_y);
    assert!(n > 0.0, "degenerate line");
    let mut spans: Vec<(f64, f64)> = Vec::new();
    for r in &cover.rects {
        let f = r.to_f64();
        if let Some((t0, t1)) = line_rect_span(line.a.x, line.a.y, dir_x, dir_y, f) {
            spans.push((t0, t1));
        }
    }
    spans.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for s in spans {
        match merged.last_mut() {
            Some(last) if s.0 <= last.1 => last.1 = last.1.max(s.1),
            _ => merged.push(s),
        }
    }
    merged
}

/// Clip the full line `p + t d` against a rectangle; returns the
/// parameter span of the intersection.
fn line_rect_span(px: f64, py: f64, dx: f64, dy: f64, r: [f64; 4]) -> Option<(f64, f64)> {
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    for (p, d, lo, hi) in [(px, dx, r[0], r[2]), (py, dy, r[1], r[3])] {
        if d == 0.0 {
            if p < lo || p > hi {
                return None;
            }
        } else {
            let (a, b) = ((lo - p) / d, (hi - p) / d);
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            t0 = t0.max(a);
            t1 = t1.min(b);
        }
    }
    (t0 <= t1).then_some((t0, t1))
}

/// Classify an f64 x-coordinate against the generation-`depth` ternary
/// Cantor approximation — convenience wrapper for crossing checks.
/// Works arithmetically, so large depths cost O(depth), not 2^depth.
pub fn classify_against_cantor(x: f64, depth: u32) -> PointClass {
    match rat_from_f64(x) {
        Some(xr) => crate::interval_sets::cantor_classify(&xr, depth),
        None => PointClass::Outside {
            to_set: rat_int(i64::MAX as i64),
        },
    }
}

/// Rectangle-wise cover monotonicity for product/staircase kinds:
/// every depth-(g+1) rectangle is contained in some depth-g rectangle.
pub fn covers_nested(set: &PlaneSetApprox, g: u32) -> bool {
    let outer = set.cover(g);
    let inner = set.cover(g + 1);
    inner
        .rects
        .iter()
        .all(|iv| outer.rects.iter().any(|o| o.contains_rect(iv)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval_sets::{fat_cantor, Interval};
    use crate::rational::rat;

    fn unit_square() -> PlaneSetApprox {
        rect_union(
            vec![Rect {
                xmin: rat_int(0),
                ymin: rat_int(0),
                xmax: rat_int(1),
                ymax: rat_int(1),
            }],
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn product_of_units_is_square() {
        let unit =
            IntervalSet::new(vec![Interval::new(rat_int(0), rat_int(1)).unwrap()]).unwrap();
        let p = product_approx(&unit, &unit).unwrap();
        let c = p.cover(0);
        assert_eq!(c.rects.len(), 1);
        assert_eq!(c.haus_bound, 0.0);
    }

    #[test]
    fn product_of_cantor_depth_one() {
        let c1 = ternary_cantor(1);
        let p = product_approx(&c1, &c1).unwrap();
        let c = p.cover(0);
        assert_eq!(c.rects.len(), 4);
        let area: Rat = c
            .rects
            .iter()
            .map(|r| (&r.xmax - &r.xmin) * (&r.ymax - &r.ymin))
            .fold(Rat::zero(), |a, b| a + b);
        assert_eq!(area, rat(4, 9));
    }

    #[test]
    fn empty_product_factor_rejected() {
        // IntervalSet cannot be empty by construction; the error comes
        // from the set layer.
        assert!(IntervalSet::new(vec![]).is_err());
    }

    #[test]
    fn staircase_depth_one_rectangles() {
        let s = holey_staircase(8).unwrap();
        let c = s.cover(1);
        assert_eq!(c.rects.len(), 2);
        assert_eq!(c.rects[0].xmax, rat(1, 3));
        assert_eq!(c.rects[0].ymax, rat(1, 2));
        assert_eq!(c.rects[1].xmin, rat(2, 3));
        assert_eq!(c.rects[1].ymin, rat(1, 2));
        // Corner points persist at all depths.
        for g in 1..=6 {
            let c = s.cover(g);
            assert_eq!(c.rects.len(), 1 << g);
            assert!(c.rects.first().unwrap().contains_f64(0.0, 0.0));
            assert!(c.rects.last().unwrap().contains_f64(1.0, 1.0));
        }
    }

    #[test]
    fn staircase_covers_nested() {
        let s = holey_staircase(8).unwrap();
        for g in 1..=5 {
            assert!(covers_nested(&s, g), "depth {g}");
        }
    }

    #[test]
    fn koch_polyline_shape() {
        let p0 = koch_polyline(0);
        assert_eq!(p0.len(), 2);
        let p1 = koch_polyline(1);
        assert_eq!(p1.len(), 5);
        // Apex of the first generation: equilateral on the middle third.
        let apex = p1[2];
        assert!((apex.x - 1.5).abs() < 1e-12);
        assert!((apex.y - 3f64.sqrt() / 2.0).abs() < 1e-12);
        for g in 0..=6u32 {
            let p = koch_polyline(g);
            assert_eq!(p.len(), 4usize.pow(g) + 1);
            assert_eq!(p[0], Point2 { x: 0.0, y: 0.0 });
            assert_eq!(*p.last().unwrap(), Point2 { x: 3.0, y: 0.0 });
            // Total length 3 (4/3)^g.
            let len: f64 = p.windows(2).map(|s| s[0].dist(&s[1])).sum();
            let expect = 3.0 * (4f64 / 3.0).powi(g as i32);
            assert!((len - expect).abs() < 1e-9 * expect);
        }
    }

    #[test]
    fn koch_cover_contains_next_generation_vertices() {
        let k = koch_curve(8).unwrap();
        for g in 0..=4u32 {
            let boxes: Vec<[f64; 4]> = k.cover(g).rects.iter().map(|r| r.to_f64()).collect();
            for v in koch_polyline(g + 2) {
                assert!(
                    boxes
                        .iter()
                        .any(|b| v.x >= b[0] && v.x <= b[2] && v.y >= b[1] && v.y <= b[3]),
                    "vertex ({}, {}) escapes depth-{} cover",
                    v.x,
                    v.y,
                    g
                );
            }
        }
    }

    #[test]
    fn clearance_examples() {
        let s = holey_staircase(8).unwrap();
        let seg = Segment2::new(
            Point2 { x: -1.0, y: -1.0 },
            Point2 { x: -1.0, y: 1.0 },
        );
        let c = segment_clearance(&seg, &s, 1);
        assert!((c - 1.0).abs() < 1e-12);
        // Touching segment: zero clearance.
        let touch = Segment2::new(
            Point2 { x: 0.0, y: -1.0 },
            Point2 { x: 0.0, y: 1.0 },
        );
        assert_eq!(segment_clearance_sq(&touch, &s, 1), rat_int(0));
        // Oracle: exact rectangle-segment distance over both depth-1
        // rectangles for the horizontal probe at y = 1/4 between covers.
        let probe = Segment2::new(
            Point2 {
                x: 1.0 / 3.0,
                y: 0.25,
            },
            Point2 {
                x: 2.0 / 3.0,
                y: 0.25,
            },
        );
        let c = segment_clearance(&probe, &s, 1);
        assert_eq!(c, 0.0, "probe touches the left rectangle at (1/3, 1/4)");
        let probe_inside = Segment2::new(
            Point2 { x: 0.4, y: 0.25 },
            Point2 { x: 0.6, y: 0.25 },
        );
        let c = segment_clearance(&probe_inside, &s, 1);
        let expect = 0.4 - 1.0 / 3.0;
        assert!((c - expect).abs() < 1e-12, "c = {c}, expect = {expect}");
    }

    #[test]
    fn clearance_monotone_in_depth() {
        let s = holey_staircase(8).unwrap();
        let seg = Segment2::new(
            Point2 { x: -0.2, y: 0.45 },
            Point2 { x: 0.45, y: 0.52 },
        );
        let mut prev = -1.0f64;
        for g in 1..=6 {
            let c = segment_clearance(&seg, &s, g);
            assert!(c >= prev - 1e-15, "covers shrink so clearance grows");
            prev = c;
        }
    }

    #[test]
    fn full_square_blocks_crossing_segments() {
        let sq = unit_square();
        let seg = Segment2::new(
            Point2 { x: -0.5, y: 0.5 },
            Point2 { x: 1.5, y: 0.5 },
        );
        assert_eq!(segment_clearance(&seg, &sq, 3), 0.0);
    }

    #[test]
    fn last_crossing_paper_segment() {
        let seg = Segment2::new(
            Point2 {
                x: -1.0 / 3.0,
                y: 1.0 / 3.0,
            },
            Point2 {
                x: 4.0 / 3.0,
                y: 2.0 / 3.0,
            },
        );
        let cr = last_graph_crossing(&seg, 24).unwrap();
        assert!(cr.residual_bound <= 2.0 * 2f64.powi(-24));
        match classify_against_cantor(cr.point.x, 24) {
            PointClass::Inside { .. } => {}
            PointClass::Outside { to_set } => {
                assert!(rat_to_f64(&to_set) <= 2f64.powi(-20), "x must be near C");
            }
        }
    }

    #[test]
    fn last_crossing_below_graph_errors() {
        let seg = Segment2::new(
            Point2 { x: -1.0, y: -1.0 },
            Point2 { x: 2.0, y: -1.0 },
        );
        assert!(matches!(
            last_graph_crossing(&seg, 10),
            Err(GeomError::NoSignChange)
        ));
    }

    #[test]
    fn last_crossing_near_vertical_plateau() {
        // Near-vertical segment through x = 1/2: the crossing is on the
        // big plateau, so its x-coordinate is far from the Cantor set.
        let seg = Segment2::new(
            Point2 { x: 0.5, y: 0.0 },
            Point2 {
                x: 0.5 + 1e-9,
                y: 1.0,
            },
        );
        let cr = last_graph_crossing(&seg, 20).unwrap();
        assert!((cr.point.y - 0.5).abs() < 1e-6);
        match classify_against_cantor(cr.point.x, 10) {
            PointClass::Outside { to_set } => {
                let d = rat_to_f64(&to_set);
                assert!((d - 1.0 / 6.0).abs() < 1e-6);
            }
            PointClass::Inside { .. } => panic!("plateau crossing is off the Cantor set"),
        }
    }

    #[test]
    fn decreasing_segment_in_quarter_balls_can_miss_the_set() {
        // Both endpoints lie inside the radius-1/4 balls around
        // (-1/3, 1/3) and (4/3, 2/3), yet the only graph crossing is at
        // (1/2, 1/2), in the middle of the big plateau. The two-ball
        // family therefore contains segments disjoint from the holey
        // staircase; only the subfamily with increasing y carries the
        // last-crossing argument.
        let seg = Segment2::new(
            Point2 {
                x: -1.0 / 3.0,
                y: 0.55,
            },
            Point2 {
                x: 4.0 / 3.0,
                y: 0.45,
            },
        );
        let cr = last_graph_crossing(&seg, 24).unwrap();
        // Residual 2^-23 and y-slope 0.1 pin x only to ~1e-6.
        assert!((cr.point.x - 0.5).abs() < 1e-5);
        assert!((cr.point.y - 0.5).abs() < 1e-5);
        match classify_against_cantor(cr.point.x, 12) {
            PointClass::Outside { to_set } => {
                assert!((rat_to_f64(&to_set) - 1.0 / 6.0).abs() < 1e-5);
            }
            PointClass::Inside { .. } => panic!("(1/2, 1/2) is not over the Cantor set"),
        }
        // And the segment clears the cover at depth 6 outright.
        let s = holey_staircase(8).unwrap();
        assert!(segment_clearance(&seg, &s, 6) > 0.0);
    }

    #[test]
    fn line_components_staircase() {
        let s = holey_staircase(8).unwrap();
        // Non-dyadic height: exactly one rectangle intersected at every
        // depth.
        let line = Segment2::new(
            Point2 { x: -1.0, y: 0.26 },
            Point2 { x: 2.0, y: 0.26 },
        );
        for g in 1..=6 {
            assert_eq!(line_cover_components(&line, &s, g).len(), 1, "depth {g}");
        }
        // Dyadic height 1/4 touches two closed rectangles from depth 2.
        let line = Segment2::new(
            Point2 { x: -1.0, y: 0.25 },
            Point2 { x: 2.0, y: 0.25 },
        );
        assert_eq!(line_cover_components(&line, &s, 1).len(), 1);
        assert_eq!(line_cover_components(&line, &s, 2).len(), 2);
        // A line missing the bounding box entirely.
        let line = Segment2::new(
            Point2 { x: -1.0, y: 5.0 },
            Point2 { x: 2.0, y: 5.0 },
        );
        assert!(line_cover_components(&line, &s, 3).is_empty());
    }

    #[test]
    fn product_projection_gaps_match_set_gaps() {
        let (set, gaps) = fat_cantor(&rat(1, 12), 3).unwrap();
        let p = product_approx(&set, &set).unwrap();
        let xg = p.x_projection_gaps(0);
        assert_eq!(xg.len(), gaps.len());
    }
}
