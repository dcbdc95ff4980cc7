//! Sliding-window extrema with a monotone deque.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

/// `out[τ] = max(v[τ..=τ+w])` for every `τ` with `τ + w < v.len()`.
pub fn sliding_max(v: &[f64], w: usize) -> Vec<f64> {
    sliding(v, w, |a, b| a >= b)
}

/// `out[τ] = min(v[τ..=τ+w])` for every `τ` with `τ + w < v.len()`.
pub fn sliding_min(v: &[f64], w: usize) -> Vec<f64> {
    sliding(v, w, |a, b| a <= b)
}

// `keeps(a, b)`: a newer value `a` evicts an older `b` from the back.
fn sliding(v: &[f64], w: usize, keeps: impl Fn(f64, f64) -> bool) -> Vec<f64> {
    if v.len() <= w {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(v.len() - w);
    let mut dq: VecDeque<usize> = VecDeque::new();
    for (i, &x) in v.iter().enumerate() {
        while let Some(&back) = dq.back() {
            if keeps(x, v[back]) {
                dq.pop_back();
            } else {
                break;
            }
        }
        dq.push_back(i);
        if let Some(&front) = dq.front() {
            if front + w < i {
                dq.pop_front();
            }
        }
        if i >= w {
            out.push(v[dq[0]]);
        }
    }
    out
}
