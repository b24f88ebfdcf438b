use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

use super::PointSample;

/// Rescaled gaps below this are treated as one level.
pub const DEGENERATE_GAP: f64 = 1e-14;

pub(crate) fn merge_degenerate(points: &[f64]) -> (Vec<f64>, usize) {
    let mut out: Vec<f64> = Vec::with_capacity(points.len());
    let mut merged = 0;
    for &p in points {
        match out.last() {
            Some(&q) if p - q < DEGENERATE_GAP => merged += 1,
            _ => out.push(p),
        }
    }
    (out, merged)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRatios {
    pub values: Vec<f64>,
    /// Levels merged into a neighbour before taking gaps.
    pub degenerate: usize,
}

impl GapRatios {
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Ratios `min(s_j, s_{j+1}) / max(s_j, s_{j+1})` of consecutive gaps.
pub fn gap_ratios(sample: &PointSample) -> Result<GapRatios> {
    let (pts, degenerate) = merge_degenerate(sample.points());
    if pts.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: pts.len(),
        });
    }
    let values = pts
        .windows(3)
        .map(|w| {
            let (a, b) = (w[1] - w[0], w[2] - w[1]);
            a.min(b) / a.max(b)
        })
        .collect();
    Ok(GapRatios { values, degenerate })
}

/// Reference laws for unit-mean nearest-neighbour gaps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GapReference {
    /// Exponential with rate `theta`.
    Poisson(f64),
    /// Orthogonal-class Wigner surmise `1 - exp(-pi s^2 / 4)`.
    GoeSurmise,
}

impl GapReference {
    pub fn cdf(self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match self {
            GapReference::Poisson(theta) => -(-theta * s).exp_m1(),
            GapReference::GoeSurmise => -(-std::f64::consts::PI * s * s / 4.0).exp_m1(),
        }
    }
}

/// Kolmogorov-Smirnov distance between the empirical law of `gaps` and `reference`.
pub fn ks_distance(gaps: &[f64], reference: GapReference) -> Result<f64> {
    if gaps.len() < 10 {
        return Err(Error::TooFewPoints {
            needed: 10,
            got: gaps.len(),
        });
    }
    let mut g = gaps.to_vec();
    g.sort_by(f64::total_cmp);
    let n = g.len() as f64;
    let mut d = 0.0f64;
    for (i, &s) in g.iter().enumerate() {
        let f = reference.cdf(s);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{RngStream, StreamPath};
    use crate::observables::SampleMeta;

    fn sample(points: Vec<f64>) -> PointSample {
        PointSample::new(
            points,
            SampleMeta {
                trial: 0,
                energy: 0.0,
                scale: 1.0,
                half_width: f64::INFINITY,
            },
        )
    }

    #[test]
    fn examples() {
        assert_eq!(gap_ratios(&sample(vec![0.0, 1.0, 3.0])).unwrap().values, vec![0.5]);
        let eq = gap_ratios(&sample((0..20).map(f64::from).collect())).unwrap();
        assert!(eq.values.iter().all(|&r| r == 1.0));
        assert!(matches!(
            gap_ratios(&sample(vec![0.0, 1.0])),
            Err(Error::TooFewPoints { .. })
        ));
        let d = gap_ratios(&sample(vec![0.0, 1.0, 1.0, 3.0])).unwrap();
        assert_eq!((d.values.clone(), d.degenerate), (vec![0.5], 1));
    }

    #[test]
    fn affine_invariance() {
        let pts = vec![0.3, 1.1, 1.7, 4.0, 4.2];
        let a = gap_ratios(&sample(pts.clone())).unwrap().values;
        let b = gap_ratios(&sample(pts.iter().map(|x| -3.0 + 2.5 * x).collect())).unwrap().values;
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn ks_examples() {
        assert!(ks_distance(&[1.0; 5], GapReference::GoeSurmise).is_err());
        let mut s = RngStream::new(4, StreamPath::synthetic(0, 0));
        let exp: Vec<f64> = (0..20000).map(|_| s.exponential()).collect();
        assert!(ks_distance(&exp, GapReference::Poisson(1.0)).unwrap() < 0.015);
        assert!(ks_distance(&exp[..1000], GapReference::GoeSurmise).unwrap() > 0.1);
    }
}
