//! Finite-dimensional càdlàg paths.
//!
//! A [`CadlagPath`] is stored as an ordered list of breakpoints, each carrying
//! its left limit `f(t-)` and its value `f(t)`. Between two breakpoints the path
//! is the straight line from the value at the earlier one to the left limit at
//! the later one. This class contains the grid paths produced by simulation
//! (continuous polylines and piecewise-constant jump paths) and makes the
//! completed graph a finite polyline.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CadlagPath {
    dim: usize,
    times: Vec<f64>,
    left: Vec<f64>,
    right: Vec<f64>,
}

impl CadlagPath {
    /// Builds a path from breakpoint times and flattened left/right values
    /// (`times.len() * dim` entries each).
    pub fn new(dim: usize, times: Vec<f64>, left: Vec<f64>, right: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidPath("dimension must be positive".into()));
        }
        let n = times.len();
        if n < 2 {
            return Err(Error::InvalidPath("need at least two breakpoints".into()));
        }
        if left.len() != n * dim || right.len() != n * dim {
            return Err(Error::InvalidPath(format!(
                "expected {} values per side, got {} and {}",
                n * dim,
                left.len(),
                right.len()
            )));
        }
        if times.iter().chain(&left).chain(&right).any(|x| !x.is_finite()) {
            return Err(Error::InvalidPath("non-finite entry".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidPath("breakpoint times must be strictly increasing".into()));
        }
        if left[..dim] != right[..dim] {
            return Err(Error::InvalidPath("f(T0-) must equal f(T0)".into()));
        }
        Ok(Self { dim, times, left, right })
    }

    /// Continuous polyline through `values` at `times`.
    pub fn polyline(times: Vec<f64>, values: &[Vec<f64>]) -> Result<Self> {
        let dim = values.first().map_or(0, Vec::len);
        check_rows(values, dim, times.len())?;
        let flat: Vec<f64> = values.iter().flatten().copied().collect();
        Self::new(dim, times, flat.clone(), flat)
    }

    /// Right-continuous step function taking `values[i]` on `[times[i], times[i+1])`.
    pub fn piecewise_constant(times: Vec<f64>, values: &[Vec<f64>]) -> Result<Self> {
        let dim = values.first().map_or(0, Vec::len);
        check_rows(values, dim, times.len())?;
        let right: Vec<f64> = values.iter().flatten().copied().collect();
        let mut left = Vec::with_capacity(right.len());
        left.extend_from_slice(&right[..dim]);
        left.extend_from_slice(&right[..right.len() - dim]);
        Self::new(dim, times, left, right)
    }

    pub fn constant(t0: f64, t1: f64, value: &[f64]) -> Result<Self> {
        Self::polyline(vec![t0, t1], &[value.to_vec(), value.to_vec()])
    }

    /// Scalar indicator-type step: `before` on `[t0, tau)`, `after` on `[tau, t1]`.
    pub fn step(t0: f64, t1: f64, tau: f64, before: f64, after: f64) -> Result<Self> {
        if !(t0 < tau && tau < t1) {
            return Err(Error::InvalidArgument(format!("jump time {tau} not interior to [{t0}, {t1}]")));
        }
        Self::new(1, vec![t0, tau, t1], vec![before, before, after], vec![before, after, after])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t0(&self) -> f64 {
        self.times[0]
    }

    pub fn t1(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Left limit stored at breakpoint `i`.
    pub fn left(&self, i: usize) -> &[f64] {
        &self.left[i * self.dim..(i + 1) * self.dim]
    }

    /// Value stored at breakpoint `i`.
    pub fn right(&self, i: usize) -> &[f64] {
        &self.right[i * self.dim..(i + 1) * self.dim]
    }

    pub fn has_jump(&self, i: usize) -> bool {
        self.left(i) != self.right(i)
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if t < self.t0() || t > self.t1() || t.is_nan() {
            return Err(Error::Domain { t, t0: self.t0(), t1: self.t1() });
        }
        Ok(())
    }

    /// Index of the last breakpoint with time `<= t`.
    fn locate(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s <= t).saturating_sub(1)
    }

    fn interpolate(&self, i: usize, t: f64, out: &mut [f64]) {
        let (a, b) = (self.times[i], self.times[i + 1]);
        let w = (t - a) / (b - a);
        for ((o, &x), &y) in out.iter_mut().zip(self.right(i)).zip(self.left(i + 1)) {
            *o = x + w * (y - x);
        }
    }

    /// Right-continuous value `f(t)`.
    pub fn evaluate(&self, t: f64) -> Result<Vec<f64>> {
        self.check_time(t)?;
        let i = self.locate(t);
        if self.times[i] == t {
            return Ok(self.right(i).to_vec());
        }
        let mut out = vec![0.0; self.dim];
        self.interpolate(i, t, &mut out);
        Ok(out)
    }

    /// Left limit `f(t-)`, with `f(T0-) = f(T0)`.
    pub fn evaluate_left(&self, t: f64) -> Result<Vec<f64>> {
        self.check_time(t)?;
        let i = self.locate(t);
        if self.times[i] == t {
            return Ok(self.left(i).to_vec());
        }
        let mut out = vec![0.0; self.dim];
        self.interpolate(i, t, &mut out);
        Ok(out)
    }

    /// Scalar path `t -> <f(t), v>`.
    pub fn project(&self, v: &[f64]) -> Result<CadlagPath> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: v.len() });
        }
        let dot = |x: &[f64]| x.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        let left = (0..self.len()).map(|i| dot(self.left(i))).collect();
        let right = (0..self.len()).map(|i| dot(self.right(i))).collect();
        CadlagPath::new(1, self.times.clone(), left, right)
    }

    /// Coordinate `k` as a scalar path.
    pub fn coordinate(&self, k: usize) -> Result<CadlagPath> {
        if k >= self.dim {
            return Err(Error::InvalidArgument(format!("coordinate {k} out of range for dim {}", self.dim)));
        }
        let pick = |src: &[f64]| src.iter().skip(k).step_by(self.dim).copied().collect::<Vec<_>>();
        CadlagPath::new(1, self.times.clone(), pick(&self.left), pick(&self.right))
    }

    /// Applies `x -> m x` to every value; `m` is row-major `rows x dim`.
    pub fn map_linear(&self, m: &[f64], rows: usize) -> Result<CadlagPath> {
        if m.len() != rows * self.dim {
            return Err(Error::DimensionMismatch { expected: rows * self.dim, got: m.len() });
        }
        let apply = |src: &[f64]| {
            let mut out = Vec::with_capacity(self.len() * rows);
            for x in src.chunks_exact(self.dim) {
                for r in 0..rows {
                    out.push(m[r * self.dim..(r + 1) * self.dim].iter().zip(x).map(|(a, b)| a * b).sum());
                }
            }
            out
        };
        CadlagPath::new(rows, self.times.clone(), apply(&self.left), apply(&self.right))
    }

    pub fn scale(&self, c: f64) -> CadlagPath {
        CadlagPath {
            dim: self.dim,
            times: self.times.clone(),
            left: self.left.iter().map(|x| c * x).collect(),
            right: self.right.iter().map(|x| c * x).collect(),
        }
    }

    /// `sup_t |f(t) - g(t)|` over both one-sided values at the union of breakpoints.
    pub fn sup_distance(&self, other: &CadlagPath) -> Result<f64> {
        check_compatible(self, other)?;
        let mut ts: Vec<f64> = self.times.iter().chain(&other.times).copied().collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let mut best = 0.0_f64;
        for &t in &ts {
            for (a, b) in [
                (self.evaluate(t)?, other.evaluate(t)?),
                (self.evaluate_left(t)?, other.evaluate_left(t)?),
            ] {
                best = best.max(norm_diff(&a, &b));
            }
        }
        Ok(best)
    }

    /// Breakpoint records `(t, f(t-), f(t))`.
    pub fn breakpoints(&self) -> impl Iterator<Item = (f64, &[f64], &[f64])> + '_ {
        (0..self.len()).map(move |i| (self.times[i], self.left(i), self.right(i)))
    }

    pub fn to_record(&self) -> PathRecord {
        PathRecord {
            dim: self.dim,
            t0: self.t0(),
            t1: self.t1(),
            breakpoints: self
                .breakpoints()
                .map(|(t, l, r)| BreakpointRecord { t, v_minus: l.to_vec(), v_plus: r.to_vec() })
                .collect(),
        }
    }

    pub fn from_record(rec: &PathRecord) -> Result<Self> {
        let times: Vec<f64> = rec.breakpoints.iter().map(|b| b.t).collect();
        let mut left = Vec::with_capacity(times.len() * rec.dim);
        let mut right = Vec::with_capacity(times.len() * rec.dim);
        for b in &rec.breakpoints {
            if b.v_minus.len() != rec.dim || b.v_plus.len() != rec.dim {
                return Err(Error::DimensionMismatch { expected: rec.dim, got: b.v_minus.len().max(b.v_plus.len()) });
            }
            left.extend_from_slice(&b.v_minus);
            right.extend_from_slice(&b.v_plus);
        }
        let path = Self::new(rec.dim, times, left, right)?;
        if path.t0() != rec.t0 || path.t1() != rec.t1 {
            return Err(Error::InvalidPath("first/last breakpoint must sit at t0/t1".into()));
        }
        Ok(path)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_record())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_record(&serde_json::from_str(s)?)
    }

    /// Writes the CSV schema `t, v_minus_1..d, v_plus_1..d` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = String::from("t");
        for k in 1..=self.dim {
            header.push_str(&format!(",v_minus_{k}"));
        }
        for k in 1..=self.dim {
            header.push_str(&format!(",v_plus_{k}"));
        }
        writeln!(w, "{header}")?;
        for (t, l, r) in self.breakpoints() {
            let mut line = fmt_f64(t);
            for x in l.iter().chain(r) {
                line.push(',');
                line.push_str(&fmt_f64(*x));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))??;
        let cols: Vec<&str> = header.trim().split(',').map(str::trim).collect();
        if cols.first() != Some(&"t") || cols.len() < 3 || (cols.len() - 1) % 2 != 0 {
            return Err(Error::Parse(format!("unexpected header '{header}'")));
        }
        let dim = (cols.len() - 1) / 2;
        for k in 1..=dim {
            if cols[k] != format!("v_minus_{k}") || cols[dim + k] != format!("v_plus_{k}") {
                return Err(Error::Parse(format!("unexpected header '{header}'")));
            }
        }
        let (mut times, mut left, mut right) = (Vec::new(), Vec::new(), Vec::new());
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let vals = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))?;
            if vals.len() != cols.len() {
                return Err(Error::Parse(format!("line {}: expected {} fields, got {}", lineno + 2, cols.len(), vals.len())));
            }
            times.push(vals[0]);
            left.extend_from_slice(&vals[1..=dim]);
            right.extend_from_slice(&vals[dim + 1..]);
        }
        Self::new(dim, times, left, right)
    }

    pub fn from_csv_str(s: &str) -> Result<Self> {
        Self::read_csv(s.as_bytes())
    }
}

fn check_rows(values: &[Vec<f64>], dim: usize, n: usize) -> Result<()> {
    if values.len() != n {
        return Err(Error::InvalidPath(format!("{} times but {} values", n, values.len())));
    }
    if let Some(bad) = values.iter().find(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: bad.len() });
    }
    Ok(())
}

pub(crate) fn check_compatible(f: &CadlagPath, g: &CadlagPath) -> Result<()> {
    if f.dim != g.dim {
        return Err(Error::DimensionMismatch { expected: f.dim, got: g.dim });
    }
    if f.t0() != g.t0() || f.t1() != g.t1() {
        return Err(Error::HorizonMismatch { a0: f.t0(), a1: f.t1(), b0: g.t0(), b1: g.t1() });
    }
    Ok(())
}

/// 17 significant digits: enough for an exact round trip of any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[inline]
pub(crate) fn norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// JSON mirror of a path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathRecord {
    pub dim: usize,
    pub t0: f64,
    pub t1: f64,
    pub breakpoints: Vec<BreakpointRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BreakpointRecord {
    pub t: f64,
    pub v_minus: Vec<f64>,
    pub v_plus: Vec<f64>,
}

/// The closed segment `{a v1 + (1 - a) v2 : a in [0, 1]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
}

impl Segment {
    pub fn new(v1: Vec<f64>, v2: Vec<f64>) -> Result<Self> {
        if v1.len() != v2.len() {
            return Err(Error::DimensionMismatch { expected: v1.len(), got: v2.len() });
        }
        Ok(Self { v1, v2 })
    }

    pub fn point(&self, alpha: f64) -> Vec<f64> {
        self.v1.iter().zip(&self.v2).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect()
    }

    pub fn distance_to(&self, v: &[f64]) -> Result<f64> {
        segment_distance(&self.v1, v, &self.v2)
    }

    pub fn contains(&self, v: &[f64], tol: f64) -> Result<bool> {
        Ok(self.distance_to(v)? <= tol)
    }
}

/// Euclidean distance from `v` to the closed segment between `v1` and `v2`.
pub fn segment_distance(v1: &[f64], v: &[f64], v2: &[f64]) -> Result<f64> {
    if v1.len() != v.len() {
        return Err(Error::DimensionMismatch { expected: v1.len(), got: v.len() });
    }
    if v2.len() != v.len() {
        return Err(Error::DimensionMismatch { expected: v2.len(), got: v.len() });
    }
    Ok(seg_dist(v1, v, v2))
}

/// Unchecked kernel of [`segment_distance`]: clamped projection onto the line.
#[inline]
pub(crate) fn seg_dist(v1: &[f64], v: &[f64], v2: &[f64]) -> f64 {
    if v.len() == 1 {
        let (lo, hi) = if v1[0] <= v2[0] { (v1[0], v2[0]) } else { (v2[0], v1[0]) };
        return (lo - v[0]).max(v[0] - hi).max(0.0);
    }
    // p(a) = v2 + a (v1 - v2)
    let mut ww = 0.0;
    let mut xw = 0.0;
    for i in 0..v.len() {
        let w = v1[i] - v2[i];
        ww += w * w;
        xw += (v[i] - v2[i]) * w;
    }
    let a = if ww > 0.0 { (xw / ww).clamp(0.0, 1.0) } else { 0.0 };
    let mut s = 0.0;
    for i in 0..v.len() {
        let d = v[i] - (v2[i] + a * (v1[i] - v2[i]));
        s += d * d;
    }
    s.sqrt()
}

/// Γ(f) as a polyline in time × space.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletedGraph {
    source_dim: usize,
    r: Vec<f64>,
    z: Vec<f64>,
}

impl CompletedGraph {
    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.r[i]
    }

    pub fn times(&self) -> &[f64] {
        &self.r
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.z[i * self.source_dim..(i + 1) * self.source_dim]
    }

    pub fn vertices(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        (0..self.len()).map(move |i| (self.r[i], self.point(i)))
    }

    fn push(&mut self, r: f64, z: &[f64]) {
        self.r.push(r);
        self.z.extend_from_slice(z);
    }

    /// Length of edge `i -> i+1` in the norm `max(|dr|, |dz|)`.
    fn edge_len(&self, i: usize) -> f64 {
        (self.r[i + 1] - self.r[i]).abs().max(norm_diff(self.point(i), self.point(i + 1)))
    }

    /// Drops vertices that sit in the interior of a straight run; the polyline
    /// as a set and its traversal order stay the same.
    pub fn simplified(&self) -> CompletedGraph {
        let d = self.source_dim;
        let mut out = CompletedGraph { source_dim: d, r: Vec::with_capacity(self.len()), z: Vec::with_capacity(self.z.len()) };
        out.push(self.r[0], self.point(0));
        let last = self.len() - 1;
        let mut a = vec![0.0; d + 1];
        let mut b = vec![0.0; d + 1];
        for i in 1..last {
            let k = out.len() - 1;
            a[0] = self.r[i] - out.r[k];
            b[0] = self.r[i + 1] - self.r[i];
            for c in 0..d {
                a[c + 1] = self.point(i)[c] - out.point(k)[c];
                b[c + 1] = self.point(i + 1)[c] - self.point(i)[c];
            }
            let aa: f64 = a.iter().map(|x| x * x).sum();
            let bb: f64 = b.iter().map(|x| x * x).sum();
            if aa == 0.0 {
                continue;
            }
            let ab: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            let collinear = bb == 0.0 || (ab > 0.0 && aa * bb - ab * ab <= 1e-24 * aa * bb);
            if !collinear {
                out.push(self.r[i], self.point(i));
            }
        }
        out.push(self.r[last], self.point(last));
        out
    }

    /// Subdivides every edge into equal pieces no longer than `mesh`.
    pub fn densified(&self, mesh: f64) -> CompletedGraph {
        let d = self.source_dim;
        let mut out = CompletedGraph { source_dim: d, r: Vec::new(), z: Vec::new() };
        out.push(self.r[0], self.point(0));
        let mut buf = vec![0.0; d];
        for i in 0..self.len() - 1 {
            let pieces = (self.edge_len(i) / mesh).ceil().max(1.0) as usize;
            let (r0, r1) = (self.r[i], self.r[i + 1]);
            let (z0, z1) = (self.point(i).to_vec(), self.point(i + 1).to_vec());
            for p in 1..pieces {
                let w = p as f64 / pieces as f64;
                for c in 0..d {
                    buf[c] = z0[c] + w * (z1[c] - z0[c]);
                }
                out.push(r0 + w * (r1 - r0), &buf);
            }
            out.push(r1, &z1);
        }
        out
    }

    /// Number of vertices [`densified`](Self::densified) would produce.
    pub fn densified_len(&self, mesh: f64) -> u64 {
        1 + (0..self.len().saturating_sub(1))
            .map(|i| (self.edge_len(i) / mesh).ceil().max(1.0) as u64)
            .sum::<u64>()
    }
}

/// Γ(f): each breakpoint contributes its left limit and, if it jumps, its value
/// at the same time, so jumps become vertical edges.
pub fn completed_graph(path: &CadlagPath) -> CompletedGraph {
    let d = path.dim();
    let mut g = CompletedGraph { source_dim: d, r: Vec::with_capacity(path.len() * 2), z: Vec::with_capacity(path.len() * 2 * d) };
    for i in 0..path.len() {
        let t = path.times[i];
        if i > 0 && path.has_jump(i) {
            g.push(t, path.left(i));
        }
        g.push(t, path.right(i));
    }
    g
}

/// Points at which the oscillation supremum is evaluated, in graph order.
fn oscillation_points(path: &CadlagPath, mesh: f64) -> (Vec<f64>, Vec<f64>) {
    let d = path.dim();
    let mut ts = Vec::new();
    let mut vs = Vec::new();
    let steps = ((path.t1() - path.t0()) / mesh).ceil() as usize;
    let mut k = 1;
    let mut buf = vec![0.0; d];
    for i in 0..path.len() {
        let t = path.times[i];
        if i > 0 {
            // uniform grid points strictly inside (t_{i-1}, t_i)
            while k < steps {
                let s = path.t0() + k as f64 * mesh;
                if s >= t {
                    break;
                }
                if s > path.times[i - 1] {
                    path.interpolate(i - 1, s, &mut buf);
                    ts.push(s);
                    vs.extend_from_slice(&buf);
                }
                k += 1;
            }
            if path.has_jump(i) {
                ts.push(t);
                vs.extend_from_slice(path.left(i));
            }
        }
        ts.push(t);
        vs.extend_from_slice(path.right(i));
    }
    (ts, vs)
}

/// Oscillation function `M(f; delta)`: the largest distance of an intermediate
/// value to the segment spanned by two values at most `delta` apart in time.
///
/// The supremum runs over breakpoints, their left limits and a uniform grid of
/// spacing `densify_mesh`. It is exact for piecewise-constant paths.
pub fn oscillation(path: &CadlagPath, delta: f64, densify_mesh: f64) -> Result<f64> {
    if !(delta > 0.0) || !(densify_mesh > 0.0) {
        return Err(Error::InvalidArgument("delta and densify_mesh must be positive".into()));
    }
    let (ts, vs) = oscillation_points(path, densify_mesh);
    Ok(triple_sup(&ts, &vs, path.dim(), delta))
}

/// Oscillation at several window sizes sharing one set of evaluation points.
pub fn oscillation_profile(path: &CadlagPath, deltas: &[f64], densify_mesh: f64) -> Result<Vec<f64>> {
    if deltas.iter().any(|d| !(*d > 0.0)) || !(densify_mesh > 0.0) {
        return Err(Error::InvalidArgument("delta and densify_mesh must be positive".into()));
    }
    let (ts, vs) = oscillation_points(path, densify_mesh);
    Ok(deltas.iter().map(|&d| triple_sup(&ts, &vs, path.dim(), d)).collect())
}

fn triple_sup(ts: &[f64], vs: &[f64], d: usize, delta: f64) -> f64 {
    let n = ts.len();
    let limit = delta * (1.0 + 1e-12);
    let mut best = 0.0_f64;
    if d == 1 {
        for a in 0..n {
            let xa = vs[a];
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for c in a + 2..n {
                if ts[c] - ts[a] > limit {
                    break;
                }
                let xb = vs[c - 1];
                lo = lo.min(xb);
                hi = hi.max(xb);
                let xc = vs[c];
                let (slo, shi) = if xa <= xc { (xa, xc) } else { (xc, xa) };
                best = best.max(hi - shi).max(slo - lo);
            }
        }
        return best.max(0.0);
    }
    for a in 0..n {
        for c in a + 2..n {
            if ts[c] - ts[a] > limit {
                break;
            }
            let (va, vc) = (&vs[a * d..(a + 1) * d], &vs[c * d..(c + 1) * d]);
            for b in a + 1..c {
                best = best.max(seg_dist(va, &vs[b * d..(b + 1) * d], vc));
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_step() -> CadlagPath {
        CadlagPath::step(0.0, 1.0, 0.5, 0.0, 1.0).unwrap()
    }

    #[test]
    fn evaluate_is_right_continuous() {
        let f = unit_step();
        assert_eq!(f.evaluate(0.5).unwrap(), vec![1.0]);
        assert_eq!(f.evaluate_left(0.5).unwrap(), vec![0.0]);
        assert_eq!(f.evaluate(0.25).unwrap(), vec![0.0]);
        assert_eq!(f.evaluate_left(0.0).unwrap(), vec![0.0]);
    }

    #[test]
    fn evaluate_constant_and_ramp() {
        let c = CadlagPath::constant(0.0, 2.0, &[3.0, -1.0]).unwrap();
        for t in [0.0, 0.3, 1.7, 2.0] {
            assert_eq!(c.evaluate(t).unwrap(), vec![3.0, -1.0]);
        }
        let ramp = CadlagPath::polyline(vec![0.0, 1.0], &[vec![0.0], vec![1.0]]).unwrap();
        assert_eq!(ramp.evaluate(0.25).unwrap(), vec![0.25]);
    }

    #[test]
    fn evaluate_outside_horizon_is_domain_error() {
        let f = unit_step();
        assert!(matches!(f.evaluate(1.5), Err(Error::Domain { .. })));
        assert!(matches!(f.evaluate_left(-0.1), Err(Error::Domain { .. })));
    }

    #[test]
    fn invariants_are_enforced() {
        assert!(CadlagPath::new(1, vec![0.0, 0.0], vec![0.0, 0.0], vec![0.0, 0.0]).is_err());
        assert!(CadlagPath::new(1, vec![0.0, 1.0], vec![1.0, 0.0], vec![0.0, 0.0]).is_err());
        assert!(CadlagPath::new(1, vec![0.0], vec![0.0], vec![0.0]).is_err());
        assert!(CadlagPath::new(2, vec![0.0, 1.0], vec![0.0; 3], vec![0.0; 4]).is_err());
        // negative start time is allowed
        assert!(CadlagPath::step(-1.0, 1.0, 0.0, 0.0, -1.0).is_ok());
    }

    #[test]
    fn segment_distance_examples() {
        assert_eq!(segment_distance(&[0.0], &[0.5], &[1.0]).unwrap(), 0.0);
        assert_eq!(segment_distance(&[0.0], &[2.0], &[1.0]).unwrap(), 1.0);
        let d = segment_distance(&[0.0, 0.0], &[1.0, 1.0], &[2.0, 0.0]).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
        assert!(segment_distance(&[0.0], &[0.0, 1.0], &[1.0]).is_err());
    }

    #[test]
    fn segment_distance_matches_grid_minimisation() {
        // oracle: minimise over alpha on a 1e6-point grid
        let (v1, v, v2) = ([0.0, 0.0], [1.0, 1.0], [2.0, 0.0]);
        let mut best = f64::INFINITY;
        for k in 0..=1_000_000 {
            let a = k as f64 / 1e6;
            let p = [a * v1[0] + (1.0 - a) * v2[0], a * v1[1] + (1.0 - a) * v2[1]];
            best = best.min(norm_diff(&v, &p));
        }
        assert!((segment_distance(&v1, &v, &v2).unwrap() - best).abs() < 1e-9);
    }

    #[test]
    fn segment_contains_endpoints() {
        let s = Segment::new(vec![1.0, 2.0], vec![-1.0, 0.5]).unwrap();
        assert!(s.contains(&[1.0, 2.0], 0.0).unwrap());
        assert!(s.contains(&[-1.0, 0.5], 0.0).unwrap());
        assert!(s.contains(&s.point(0.3), 1e-12).unwrap());
    }

    #[test]
    fn completed_graph_examples() {
        let g = completed_graph(&unit_step());
        let v: Vec<(f64, Vec<f64>)> = g.vertices().map(|(r, z)| (r, z.to_vec())).collect();
        assert_eq!(v, vec![(0.0, vec![0.0]), (0.5, vec![0.0]), (0.5, vec![1.0]), (1.0, vec![1.0])]);

        let ramp = CadlagPath::polyline(vec![0.0, 0.3, 1.0], &[vec![0.0], vec![1.0], vec![0.5]]).unwrap();
        let g = completed_graph(&ramp);
        assert_eq!(g.times(), &[0.0, 0.3, 1.0]);

        // staircase with two jumps: 6 vertices in time order
        let stairs = CadlagPath::piecewise_constant(vec![0.0, 0.3, 0.6, 1.0], &[vec![0.0], vec![1.0], vec![2.0], vec![2.0]]).unwrap();
        let g = completed_graph(&stairs);
        let v: Vec<(f64, f64)> = g.vertices().map(|(r, z)| (r, z[0])).collect();
        assert_eq!(v, vec![(0.0, 0.0), (0.3, 0.0), (0.3, 1.0), (0.6, 1.0), (0.6, 2.0), (1.0, 2.0)]);
    }

    #[test]
    fn simplify_keeps_corners() {
        let p = CadlagPath::polyline(
            vec![0.0, 0.25, 0.5, 0.75, 1.0],
            &[vec![0.0], vec![0.25], vec![0.5], vec![0.5], vec![0.5]],
        )
        .unwrap();
        let g = completed_graph(&p).simplified();
        assert_eq!(g.times(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn densify_respects_mesh() {
        let g = completed_graph(&unit_step()).densified(0.1);
        for i in 0..g.len() - 1 {
            let len = (g.time(i + 1) - g.time(i)).abs().max((g.point(i + 1)[0] - g.point(i)[0]).abs());
            assert!(len <= 0.1 + 1e-12);
        }
        assert_eq!(g.len() as u64, completed_graph(&unit_step()).densified_len(0.1));
    }

    #[test]
    fn oscillation_examples() {
        assert_eq!(oscillation(&unit_step(), 0.2, 1e-2).unwrap(), 0.0);
        let spike = CadlagPath::piecewise_constant(vec![0.0, 0.5, 0.6, 1.0], &[vec![0.0], vec![1.0], vec![0.0], vec![0.0]]).unwrap();
        assert_eq!(oscillation(&spike, 0.3, 1e-3).unwrap(), 1.0);
        assert_eq!(oscillation(&spike, 0.05, 1e-3).unwrap(), 0.0);
        let c = CadlagPath::constant(0.0, 1.0, &[1.0, 2.0]).unwrap();
        assert_eq!(oscillation(&c, 0.5, 1e-2).unwrap(), 0.0);
        assert!(oscillation(&c, 0.0, 1e-2).is_err());
    }

    #[test]
    fn oscillation_vector_path() {
        // goes out along e1 and back along e1 + e2 within 0.2 time units
        let p = CadlagPath::piecewise_constant(
            vec![0.0, 0.4, 0.5, 1.0],
            &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]],
        )
        .unwrap();
        let m = oscillation(&p, 0.2, 1e-2).unwrap();
        // distance of (1,0) to segment [(0,0),(0,1)]
        assert!((m - 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_and_json_round_trip() {
        let p = CadlagPath::new(
            2,
            vec![-1.0, 0.1, 1.0 / 3.0],
            vec![0.1, 0.2, 1e-300, std::f64::consts::PI, 5.0, 6.0],
            vec![0.1, 0.2, -7.25, 1.0 / 7.0, 5.0, 6.0],
        )
        .unwrap();
        assert_eq!(CadlagPath::from_csv_str(&p.to_csv_string()).unwrap(), p);
        assert_eq!(CadlagPath::from_json(&p.to_json().unwrap()).unwrap(), p);
        assert!(p.to_csv_string().starts_with("t,v_minus_1,v_minus_2,v_plus_1,v_plus_2\n"));
    }

    #[test]
    fn csv_rejects_bad_schema() {
        assert!(CadlagPath::from_csv_str("time,a,b\n0,0,0\n1,0,0\n").is_err());
        assert!(CadlagPath::from_csv_str("t,v_minus_1,v_plus_1\n0,0\n1,0,0\n").is_err());
    }

    #[test]
    fn projection_and_coordinates() {
        let p = CadlagPath::piecewise_constant(vec![0.0, 0.5, 1.0], &[vec![1.0, 2.0], vec![3.0, 4.0], vec![3.0, 4.0]]).unwrap();
        let q = p.project(&[1.0, -1.0]).unwrap();
        assert_eq!(q.evaluate(0.7).unwrap(), vec![-1.0]);
        assert_eq!(p.coordinate(1).unwrap().evaluate(0.2).unwrap(), vec![2.0]);
        assert!(p.coordinate(2).is_err());
        assert_eq!(p.sup_distance(&p.scale(0.0)).unwrap(), 5.0);
    }
}
