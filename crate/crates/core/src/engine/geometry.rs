use serde::{Deserialize, Serialize};

use super::defaults;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }

    /// `a*(1-e) + b*e`, exact at both ends.
    pub fn lerp(a: Point, b: Point, e: f64) -> Point {
        Point {
            x: lerp(a.x, b.x, e),
            y: lerp(a.y, b.y, e),
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn on_canvas(self) -> bool {
        (0.0..=defaults::CANVAS_WIDTH).contains(&self.x) && (0.0..=defaults::CANVAS_HEIGHT).contains(&self.y)
    }

    pub fn clamp_to_canvas(self) -> Point {
        Point {
            x: self.x.clamp(0.0, defaults::CANVAS_WIDTH),
            y: self.y.clamp(0.0, defaults::CANVAS_HEIGHT),
        }
    }
}

pub fn lerp(a: f64, b: f64, e: f64) -> f64 {
    a * (1.0 - e) + b * e
}

/// A polyline with its cumulative arc lengths, for sampling by distance.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcLength {
    points: Vec<Point>,
    cumulative: Vec<f64>,
}

impl ArcLength {
    /// `points` must be non-empty.
    pub fn new(points: &[Point]) -> Self {
        assert!(!points.is_empty(), "polyline needs at least one point");
        let mut cumulative = Vec::with_capacity(points.len());
        let mut total = 0.0;
        cumulative.push(0.0);
        for w in points.windows(2) {
            total += w[0].distance(w[1]);
            cumulative.push(total);
        }
        ArcLength {
            points: points.to_vec(),
            cumulative,
        }
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().expect("non-empty")
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// The point at distance `s` along the polyline, clamped to its ends.
    pub fn point_at(&self, s: f64) -> Point {
        let first = self.points[0];
        let last = *self.points.last().expect("non-empty");
        if !(s > 0.0) {
            return first;
        }
        if s >= self.length() {
            return last;
        }
        // First vertex strictly beyond s; the segment ends there.
        let hi = self.cumulative.partition_point(|&c| c <= s);
        let lo = hi - 1;
        let seg = self.cumulative[hi] - self.cumulative[lo];
        let e = (s - self.cumulative[lo]) / seg;
        Point::lerp(self.points[lo], self.points[hi], e)
    }

    pub fn point_at_fraction(&self, u: f64) -> Point {
        if u >= 1.0 {
            return *self.points.last().expect("non-empty");
        }
        self.point_at(u * self.length())
    }
}

pub fn polyline_length(points: &[Point]) -> f64 {
    points.windows(2).map(|w| w[0].distance(w[1])).sum()
}

fn dedupe(raw: &[Point]) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(raw.len());
    for &p in raw {
        if out.last().is_none_or(|q| q.distance(p) > 1e-9) {
            out.push(p);
        }
    }
    out
}

/// Resamples to `n` points evenly spaced in arc length, keeping both ends.
pub fn resample(points: &[Point], n: usize) -> Vec<Point> {
    let arc = ArcLength::new(points);
    let len = arc.length();
    (0..n)
        .map(|i| {
            if i + 1 == n {
                *points.last().expect("non-empty")
            } else {
                arc.point_at(len * i as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

struct CatmullRom {
    p: [Point; 4],
    t: [f64; 4],
}

impl CatmullRom {
    fn new(p: [Point; 4]) -> Self {
        let mut t = [0.0; 4];
        for i in 1..4 {
            t[i] = t[i - 1] + p[i - 1].distance(p[i]).sqrt();
        }
        CatmullRom { p, t }
    }

    /// Point on the p1..p2 segment for `v` in [0, 1].
    fn eval(&self, v: f64) -> Point {
        let [p0, p1, p2, p3] = self.p;
        let [t0, t1, t2, t3] = self.t;
        let t = lerp(t1, t2, v);
        let mix = |a: Point, b: Point, ta: f64, tb: f64| Point::lerp(a, b, (t - ta) / (tb - ta));
        let a1 = mix(p0, p1, t0, t1);
        let a2 = mix(p1, p2, t1, t2);
        let a3 = mix(p2, p3, t2, t3);
        let b1 = mix(a1, a2, t0, t2);
        let b2 = mix(a2, a3, t1, t3);
        mix(b1, b2, t1, t2)
    }
}

fn chord_deviation(a: Point, b: Point, m: Point) -> f64 {
    let len = a.distance(b);
    if len < 1e-12 {
        return a.distance(m);
    }
    ((b.x - a.x) * (a.y - m.y) - (a.x - m.x) * (b.y - a.y)).abs() / len
}

#[allow(clippy::too_many_arguments)]
fn flatten(seg: &CatmullRom, v0: f64, v1: f64, a: Point, b: Point, tol: f64, depth: u32, out: &mut Vec<Point>) {
    let vm = 0.5 * (v0 + v1);
    let m = seg.eval(vm);
    let q1 = seg.eval(0.5 * (v0 + vm));
    let q3 = seg.eval(0.5 * (vm + v1));
    let flat = chord_deviation(a, b, m) <= tol
        && chord_deviation(a, b, q1) <= tol
        && chord_deviation(a, b, q3) <= tol;
    if depth == 0 || flat {
        out.push(b);
        return;
    }
    flatten(seg, v0, vm, a, m, tol, depth - 1, out);
    flatten(seg, vm, v1, m, b, tol, depth - 1, out);
}

/// Turns raw drag samples into the polyline an animation follows:
/// duplicates dropped, resampled to at most 64 points, smoothed with a
/// centripetal Catmull-Rom spline and flattened at 1-unit chord tolerance.
/// The result starts and ends exactly at the first and last raw samples.
pub fn smooth_path(raw: &[Point]) -> Option<Vec<Point>> {
    let mut pts = dedupe(raw);
    if pts.len() < 2 {
        return None;
    }
    if pts.len() > defaults::SMOOTH_MAX_POINTS {
        pts = resample(&pts, defaults::SMOOTH_MAX_POINTS);
    }
    if pts.len() == 2 {
        return Some(pts);
    }
    let n = pts.len();
    let before = Point::new(2.0 * pts[0].x - pts[1].x, 2.0 * pts[0].y - pts[1].y);
    let after = Point::new(2.0 * pts[n - 1].x - pts[n - 2].x, 2.0 * pts[n - 1].y - pts[n - 2].y);
    let mut out = vec![pts[0]];
    for i in 0..n - 1 {
        let p0 = if i == 0 { before } else { pts[i - 1] };
        let p3 = if i + 2 < n { pts[i + 2] } else { after };
        let seg = CatmullRom::new([p0, pts[i], pts[i + 1], p3]);
        flatten(&seg, 0.0, 1.0, pts[i], pts[i + 1], defaults::FLATTEN_TOLERANCE, 12, &mut out);
    }
    Some(dedupe(&out))
}
