//! Deterministic parallel reductions.
//!
//! Rayon's tree reductions depend on work stealing, so plain `par_iter().sum()`
//! can round differently between runs. Every scalar reduction in this crate
//! goes through a fixed block decomposition: blocks are summed sequentially,
//! block partials are combined in index order.

use rayon::prelude::*;

const BLOCK: usize = 8192;

/// Sum `f(i)` over `0..len` with a fixed reduction order.
pub fn indexed_sum(len: usize, f: impl Fn(usize) -> f64 + Sync) -> f64 {
    let partials: Vec<f64> = (0..len.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let lo = b * BLOCK;
            let hi = (lo + BLOCK).min(len);
            let mut acc = 0.0;
            for i in lo..hi {
                acc += f(i);
            }
            acc
        })
        .collect();
    partials.iter().sum()
}

/// Complex-valued variant of [`indexed_sum`].
pub fn indexed_sum_c(len: usize, f: impl Fn(usize) -> num_complex::Complex64 + Sync) -> num_complex::Complex64 {
    let partials: Vec<num_complex::Complex64> = (0..len.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let lo = b * BLOCK;
            let hi = (lo + BLOCK).min(len);
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for i in lo..hi {
                acc += f(i);
            }
            acc
        })
        .collect();
    partials.iter().sum()
}

/// Maximum of `f(i)` over `0..len`; NaN-free inputs assumed.
pub fn indexed_max(len: usize, f: impl Fn(usize) -> f64 + Sync) -> f64 {
    let partials: Vec<f64> = (0..len.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let lo = b * BLOCK;
            let hi = (lo + BLOCK).min(len);
            let mut acc = f64::NEG_INFINITY;
            for i in lo..hi {
                acc = acc.max(f(i));
            }
            acc
        })
        .collect();
    partials.into_iter().fold(f64::NEG_INFINITY, f64::max)
}
