use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ChartPoint, MetricField};
use crate::error::{Error, Result};

const PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];

/// Fraction of each box side kept clear at both ends.
const MARGIN: f64 = 0.05;

/// Attempts per requested point before giving up.
const REJECTION_FACTOR: usize = 64;

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    out
}

/// Seeded Halton points strictly inside the domain box at which the metric
/// is positive definite.
///
/// The seed selects a random shift of the Halton sequence (modulo 1) and a
/// starting index, so every seed gives its own low-discrepancy set.
pub fn sample_points(field: &MetricField, count: usize, seed: u64) -> Result<Vec<ChartPoint>> {
    if count == 0 {
        return Err(Error::Config("sample count must be at least 1".into()));
    }
    let n = field.dim();
    let domain = field.domain();
    if domain.iter().any(|(lo, hi)| !(lo < hi)) {
        return Err(Error::EmptyDomain);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let start: u64 = rng.gen_range(1..1024);

    let mut out = Vec::with_capacity(count);
    let cap = count * REJECTION_FACTOR;
    for k in 0..cap as u64 {
        let coords: Vec<f64> = (0..n)
            .map(|a| {
                let u = (radical_inverse(start + k, PRIMES[a]) + shift[a]).fract();
                let (lo, hi) = domain[a];
                lo + (hi - lo) * (MARGIN + (1.0 - 2.0 * MARGIN) * u)
            })
            .collect();
        if field.is_positive_definite_at(&coords) {
            out.push(ChartPoint::new(coords)?);
            if out.len() == count {
                return Ok(out);
            }
        }
    }
    Err(Error::RejectionCap { found: out.len(), wanted: count })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metricspace::{catalog_metric, parse_metric_spec};

    #[test]
    fn deterministic_per_seed() {
        let m = catalog_metric("euclidean", &[("dim", 2.0)]).unwrap();
        let a = sample_points(&m, 5, 7).unwrap();
        let b = sample_points(&m, 5, 7).unwrap();
        assert_eq!(a, b);
        let c = sample_points(&m, 5, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn hyperbolic_points_keep_factor_positive() {
        let m = catalog_metric("space_form", &[("dim", 2.0), ("c", -1.0)]).unwrap();
        for p in sample_points(&m, 20, 1).unwrap() {
            let s: f64 = p.coords().iter().map(|x| x * x).sum();
            assert!(1.0 - 0.25 * s > 0.0);
        }
    }

    #[test]
    fn sol_points_are_positive_definite() {
        let m = catalog_metric("sol", &[]).unwrap();
        let pts = sample_points(&m, 100, 3).unwrap();
        assert_eq!(pts.len(), 100);
        for p in &pts {
            let g = m.eval(p.coords()).unwrap();
            let min = g.symmetric_eigenvalues().min();
            assert!(min > 0.0);
            assert!(m.contains(p.coords()));
        }
    }

    #[test]
    fn errors() {
        let m = catalog_metric("euclidean", &[("dim", 2.0)]).unwrap();
        assert!(sample_points(&m, 0, 1).is_err());
        let empty = m.clone().with_domain(vec![(1.0, 1.0), (0.0, 1.0)]).unwrap();
        assert!(matches!(sample_points(&empty, 3, 1), Err(Error::EmptyDomain)));
        // indefinite everywhere
        let bad = parse_metric_spec("dim 2\ncoords x y\ng 0 0 = 1\ng 1 1 = -1\n").unwrap();
        assert!(matches!(sample_points(&bad, 3, 1), Err(Error::RejectionCap { .. })));
    }
}
