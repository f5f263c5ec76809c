#![allow(dead_code)]

use proptest::prelude::*;
use skorokhod::CadlagPath;

/// Sorted interior times in (0, 1), at least 0.02 apart.
pub fn interior_times(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::btree_set(1u32..50, 1..=max).prop_map(|s| s.into_iter().map(|k| k as f64 / 50.0).collect())
}

/// Piecewise-linear path on [0, 1] with a jump at each interior breakpoint
/// with probability one half.
pub fn jump_path(dim: usize, max_breaks: usize) -> impl Strategy<Value = CadlagPath> {
    interior_times(max_breaks).prop_flat_map(move |inner| {
        let n = inner.len() + 2;
        (
            Just(inner),
            prop::collection::vec(prop::collection::vec(-2.0..2.0f64, dim), n),
            prop::collection::vec(prop::collection::vec(-2.0..2.0f64, dim), n),
            prop::collection::vec(any::<bool>(), n),
        )
            .prop_map(move |(inner, l, r, jumps)| {
                let mut times = vec![0.0];
                times.extend(inner);
                times.push(1.0);
                let mut left = Vec::new();
                let mut right = Vec::new();
                for i in 0..times.len() {
                    left.extend(&l[i]);
                    if i == 0 || !jumps[i] {
                        right.extend(&l[i]);
                    } else {
                        right.extend(&r[i]);
                    }
                }
                CadlagPath::new(dim, times, left, right).unwrap()
            })
    })
}

/// Step function on a uniform grid of `n` cells of [0, 1].
pub fn step_path(dim: usize, n: usize) -> impl Strategy<Value = CadlagPath> {
    prop::collection::vec(prop::collection::vec(-2.0..2.0f64, dim), n + 1).prop_map(move |mut vals| {
        let times: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        vals[n] = vals[n - 1].clone();
        CadlagPath::piecewise_constant(times, &vals).unwrap()
    })
}

/// Euclidean distance from `v` to the segment `[a, b]`, by golden-section
/// search on the convex map `s -> |s a + (1 - s) b - v|`.
pub fn segment_oracle(a: &[f64], v: &[f64], b: &[f64]) -> f64 {
    let at = |s: f64| -> f64 {
        a.iter().zip(b).zip(v).map(|((x, y), z)| (s * x + (1.0 - s) * y - z).powi(2)).sum::<f64>().sqrt()
    };
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let (m1, m2) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if at(m1) <= at(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    at(0.5 * (lo + hi)).min(at(0.0)).min(at(1.0))
}

pub fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Brute-force oscillation of a step function `vals[i]` on `[t_i, t_{i+1})`
/// (the last value sits at `T`), for a `delta` off the breakpoint lattice.
pub fn step_oscillation_oracle(times: &[f64], vals: &[Vec<f64>], delta: f64) -> f64 {
    let n = times.len();
    let mut best = 0.0_f64;
    for i in 0..n {
        for k in i..n {
            if k > i && times[k] - times[i + 1] >= delta {
                break;
            }
            for j in i..=k {
                best = best.max(segment_oracle(&vals[i], &vals[j], &vals[k]));
            }
        }
    }
    best
}

/// Largest sum of squared increments over all subsequences.
pub fn brute_tv2(xs: &[Vec<f64>]) -> f64 {
    let n = xs.len();
    let mut best = 0.0_f64;
    for mask in 0u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let mut s = 0.0;
        for w in idx.windows(2) {
            s += xs[w[1]].iter().zip(&xs[w[0]]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        }
        best = best.max(s);
    }
    best
}
