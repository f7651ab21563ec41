use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("samples have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} observations, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("correlation is undefined for a constant sample")]
    ConstantInput,
    #[error("sample contains a non-finite value")]
    NonFinite,
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && xs[order[j]] == xs[order[i]] {
            j += 1;
        }
        // positions i..j hold ranks i+1..=j
        let rank = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

fn check_finite(xs: &[f64]) -> Result<(), StatsError> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(StatsError::NonFinite)
    }
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ConstantInput);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rho: Pearson correlation of average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(StatsError::TooFew { needed: 2, got: xs.len() });
    }
    check_finite(xs)?;
    check_finite(ys)?;
    pearson(&average_ranks(xs), &average_ranks(ys))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelatedPair {
    pub a: String,
    pub b: String,
    pub rho: f64,
}

/// Pairs of named columns whose |rho| exceeds `threshold`. Pairs involving
/// a constant column are skipped.
pub fn correlated_pairs(
    names: &[&str],
    columns: &[Vec<f64>],
    threshold: f64,
) -> Result<Vec<CorrelatedPair>, StatsError> {
    let mut out = Vec::new();
    for i in 0..columns.len() {
        for j in i + 1..columns.len() {
            match spearman(&columns[i], &columns[j]) {
                Ok(rho) if rho.abs() > threshold => {
                    out.push(CorrelatedPair { a: names[i].to_string(), b: names[j].to_string(), rho })
                }
                Ok(_) | Err(StatsError::ConstantInput) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MannWhitney {
    /// U for the first sample: count of (a, b) pairs with a > b, ties count half.
    pub u: f64,
    pub u_other: f64,
    pub z: f64,
    pub p_two_sided: f64,
}

/// Mann-Whitney U test, normal approximation with tie-corrected variance
/// and a 0.5 continuity correction.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::TooFew { needed: 1, got: a.len().min(b.len()) });
    }
    check_finite(a)?;
    check_finite(b)?;
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let n = n1 + n2;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = average_ranks(&pooled);
    let r1: f64 = ranks[..a.len()].iter().sum();
    let u = r1 - n1 * (n1 + 1.0) / 2.0;
    let u_other = n1 * n2 - u;

    let mut sorted = pooled;
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let variance = if n > 1.0 { n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0))) } else { 0.0 };
    let mean = n1 * n2 / 2.0;
    if variance <= 0.0 {
        return Ok(MannWhitney { u, u_other, z: 0.0, p_two_sided: 1.0 });
    }
    let sd = variance.sqrt();
    let z = ((u - mean).abs() - 0.5).max(0.0) / sd;
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let p = (2.0 * normal.sf(z)).min(1.0);
    Ok(MannWhitney { u, u_other, z: z * (u - mean).signum(), p_two_sided: p })
}

pub fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { (v[m - 1] + v[m]) / 2.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_average_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 20.0, 5.0]), vec![2.0, 3.5, 3.5, 1.0]);
    }

    #[test]
    fn spearman_extremes() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(spearman(&x, &[2.0, 4.0, 8.0, 16.0]).unwrap(), 1.0);
        assert_eq!(spearman(&x, &[9.0, 3.0, 1.0, 0.0]).unwrap(), -1.0);
        assert_eq!(spearman(&x, &[1.0, 1.0, 1.0, 1.0]), Err(StatsError::ConstantInput));
        assert_eq!(spearman(&x, &[1.0]), Err(StatsError::LengthMismatch(4, 1)));
    }

    #[test]
    fn spearman_with_ties_matches_hand_computation() {
        // x ranks: 1, 2.5, 2.5, 4, 5, 6
        // y ranks: 2, 1, 4, 4, 4, 6
        // dx: -2.5 -1 -1 .5 1.5 2.5 ; dy: -1.5 -2.5 .5 .5 .5 2.5
        // sxy = 3.75+2.5-.5+.25+.75+6.25 = 13
        // sxx = 6.25+1+1+.25+2.25+6.25 = 17
        // syy = 2.25+6.25+.25+.25+.25+6.25 = 15.5
        let x = [1.0, 2.0, 2.0, 3.0, 4.0, 5.0];
        let y = [2.0, 1.0, 3.0, 3.0, 3.0, 7.0];
        let expected = 13.0 / (17.0f64 * 15.5).sqrt();
        assert!((spearman(&x, &y).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn mann_whitney_basics() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[10.0, 11.0, 12.0]).unwrap();
        assert_eq!(r.u, 0.0);
        assert_eq!(r.u_other, 9.0);
        let same = mann_whitney_u(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((same.p_two_sided - 1.0).abs() < 1e-12);
        assert!(mann_whitney_u(&[], &[1.0]).is_err());
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }
}
