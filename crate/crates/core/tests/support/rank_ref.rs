//! Brute-force references for the rank statistics.

#![allow(dead_code)]

use statrs::function::erf::erfc;

/// Pairwise count of a > b with ties as one half.
pub fn brute_u(a: &[f64], b: &[f64]) -> f64 {
    let mut u = 0.0;
    for x in a {
        for y in b {
            if x > y {
                u += 1.0;
            } else if x == y {
                u += 0.5;
            }
        }
    }
    u
}

/// Mean and variance of U over every way of choosing which pooled values
/// belong to the first group.
pub fn permutation_moments(a: &[f64], b: &[f64]) -> (f64, f64) {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    let k = a.len();
    let mut us = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let (ga, gb): (Vec<_>, Vec<_>) = (0..n).partition(|i| mask & (1 << i) != 0);
        let ga: Vec<f64> = ga.into_iter().map(|i| pooled[i]).collect();
        let gb: Vec<f64> = gb.into_iter().map(|i| pooled[i]).collect();
        us.push(brute_u(&ga, &gb));
    }
    let m = us.iter().sum::<f64>() / us.len() as f64;
    let var = us.iter().map(|u| (u - m) * (u - m)).sum::<f64>() / us.len() as f64;
    (m, var)
}

pub fn reference_p(a: &[f64], b: &[f64]) -> (f64, f64) {
    let u = brute_u(a, b);
    let (mean, var) = permutation_moments(a, b);
    if var == 0.0 {
        return (u, 1.0);
    }
    let z = ((u - mean).abs() - 0.5).max(0.0) / var.sqrt();
    // two-sided normal tail: 2 * (1 - Phi(z)) = erfc(z / sqrt 2)
    (u, erfc(z / std::f64::consts::SQRT_2).min(1.0))
}
