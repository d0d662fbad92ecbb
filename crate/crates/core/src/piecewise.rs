//! Piecewise-linear chords of the reward and of the squared deviation.
//!
//! Both are interpolated through every integer `0..=y_max`, so they agree
//! with the original function at integer supply.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{DomainError, RewardParams};

/// Slopes closer than this are merged into one piece.
pub const MERGE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PiecewiseError {
    #[error("y_max must be at least 1, got {0}")]
    EmptyRange(u32),
    #[error("target must be finite, got {0}")]
    BadTarget(f64),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearPiece {
    pub slope: f64,
    pub intercept: f64,
}

impl LinearPiece {
    #[inline]
    pub fn at(&self, y: f64) -> f64 {
        self.slope * y + self.intercept
    }
}

/// Minimum of lines with strictly decreasing slopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcavePL {
    pieces: Vec<LinearPiece>,
}

/// Maximum of lines with strictly increasing slopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexPL {
    pieces: Vec<LinearPiece>,
}

pub trait PiecewiseLinear {
    fn pieces(&self) -> &[LinearPiece];
    fn eval(&self, y: f64) -> f64;
}

impl ConcavePL {
    /// Returns `None` unless there is at least one piece and the slopes strictly decrease.
    pub fn new(pieces: Vec<LinearPiece>) -> Option<Self> {
        let ok = !pieces.is_empty() && pieces.windows(2).all(|w| w[1].slope < w[0].slope);
        ok.then_some(ConcavePL { pieces })
    }
}

impl ConvexPL {
    /// Returns `None` unless there is at least one piece and the slopes strictly increase.
    pub fn new(pieces: Vec<LinearPiece>) -> Option<Self> {
        let ok = !pieces.is_empty() && pieces.windows(2).all(|w| w[1].slope > w[0].slope);
        ok.then_some(ConvexPL { pieces })
    }
}

impl PiecewiseLinear for ConcavePL {
    fn pieces(&self) -> &[LinearPiece] {
        &self.pieces
    }

    fn eval(&self, y: f64) -> f64 {
        self.pieces.iter().map(|p| p.at(y)).fold(f64::INFINITY, f64::min)
    }
}

impl PiecewiseLinear for ConvexPL {
    fn pieces(&self) -> &[LinearPiece] {
        &self.pieces
    }

    fn eval(&self, y: f64) -> f64 {
        self.pieces.iter().map(|p| p.at(y)).fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn eval_pl<P: PiecewiseLinear + ?Sized>(pl: &P, y: f64) -> f64 {
    pl.eval(y)
}

/// Chords of `g` between consecutive integers up to `y_max`, merging
/// neighbours whose slopes differ by less than [`MERGE_TOL`].
fn chords(y_max: u32, g: impl Fn(f64) -> f64) -> Vec<LinearPiece> {
    let mut pieces: Vec<LinearPiece> = Vec::new();
    let mut prev = g(0.0);
    for i in 1..=y_max {
        let x0 = f64::from(i - 1);
        let cur = g(f64::from(i));
        let slope = cur - prev;
        let piece = LinearPiece { slope, intercept: prev - slope * x0 };
        match pieces.last() {
            Some(last) if (last.slope - slope).abs() < MERGE_TOL => {}
            _ => pieces.push(piece),
        }
        prev = cur;
    }
    pieces
}

pub fn concavify_reward(p: &RewardParams, y_max: u32) -> Result<ConcavePL, PiecewiseError> {
    p.validate()?;
    if y_max < 1 {
        return Err(PiecewiseError::EmptyRange(y_max));
    }
    if p.d == 0.0 {
        return Ok(ConcavePL { pieces: vec![LinearPiece { slope: 0.0, intercept: 0.0 }] });
    }
    Ok(ConcavePL { pieces: chords(y_max, |y| p.value(y)) })
}

pub fn convexify_sq_dev(target: f64, y_max: u32) -> Result<ConvexPL, PiecewiseError> {
    if !target.is_finite() {
        return Err(PiecewiseError::BadTarget(target));
    }
    if y_max < 1 {
        return Err(PiecewiseError::EmptyRange(y_max));
    }
    Ok(ConvexPL { pieces: chords(y_max, |y| (y - target) * (y - target)) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_demand_is_one_flat_piece() {
        let pl = concavify_reward(&RewardParams { d: 0.0, a: 3.0 }, 5).unwrap();
        assert_eq!(pl.pieces(), &[LinearPiece { slope: 0.0, intercept: 0.0 }]);
    }

    #[test]
    fn two_chords() {
        let pl = concavify_reward(&RewardParams { d: 1.0, a: 1.0 }, 2).unwrap();
        let e1 = (-1.0f64).exp();
        let e2 = (-2.0f64).exp();
        let p = pl.pieces();
        assert_eq!(p.len(), 2);
        assert!((p[0].slope - (1.0 - e1)).abs() < 1e-15);
        assert!(p[0].intercept.abs() < 1e-15);
        assert!((p[1].slope - (e1 - e2)).abs() < 1e-15);
        assert!((p[1].intercept - 0.399_576_400_893_728_5).abs() < 1e-12);
        assert!((eval_pl(&pl, 1.0) - (1.0 - e1)).abs() < 1e-12);
    }

    #[test]
    fn squared_deviation_chords() {
        let pl = convexify_sq_dev(0.0, 2).unwrap();
        let slopes: Vec<f64> = pl.pieces().iter().map(|p| p.slope).collect();
        assert_eq!(slopes, vec![1.0, 3.0]);
        let pl = convexify_sq_dev(1.5, 3).unwrap();
        assert!((pl.eval(1.0) - 0.25).abs() < 1e-12);
        assert!((pl.eval(2.0) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn hand_built_pieces() {
        let one = ConcavePL::new(vec![LinearPiece { slope: 1.0, intercept: 0.0 }]).unwrap();
        assert_eq!(eval_pl(&one, 3.0), 3.0);
        let two = ConcavePL::new(vec![
            LinearPiece { slope: 1.0, intercept: 0.0 },
            LinearPiece { slope: 0.0, intercept: 1.0 },
        ])
        .unwrap();
        assert_eq!(two.eval(0.5), 0.5);
        assert_eq!(two.eval(2.0), 1.0);
        assert!(ConcavePL::new(vec![]).is_none());
        assert!(ConvexPL::new(vec![
            LinearPiece { slope: 1.0, intercept: 0.0 },
            LinearPiece { slope: 1.0, intercept: 1.0 },
        ])
        .is_none());
    }

    #[test]
    fn rejects_empty_range() {
        assert!(matches!(concavify_reward(&RewardParams { d: 1.0, a: 1.0 }, 0), Err(PiecewiseError::EmptyRange(0))));
        assert!(convexify_sq_dev(1.0, 0).is_err());
        assert!(concavify_reward(&RewardParams { d: -1.0, a: 1.0 }, 3).is_err());
    }

    #[test]
    fn flat_tail_is_merged() {
        // Slopes d·e^{-ak/d}(e^{a/d} − 1) drop below 1e-12 long before k = 200.
        let pl = concavify_reward(&RewardParams { d: 1.0, a: 2.0 }, 200).unwrap();
        assert!(pl.pieces().len() < 200);
        assert!(ConcavePL::new(pl.pieces().to_vec()).is_some());
        let p = RewardParams { d: 1.0, a: 2.0 };
        for k in 0..=200 {
            assert!((pl.eval(f64::from(k)) - p.value(f64::from(k))).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn concave_chords_exact_at_integers_and_below_between(
            d in 0.0f64..40.0, a in 0.1f64..5.0, y_max in 1u32..60, frac in 0.0f64..1.0,
        ) {
            let p = RewardParams { d, a };
            let pl = concavify_reward(&p, y_max).unwrap();
            prop_assert!(ConcavePL::new(pl.pieces().to_vec()).is_some());
            for k in 0..=y_max {
                let y = f64::from(k);
                prop_assert!((pl.eval(y) - p.value(y)).abs() <= 1e-9);
            }
            let y = frac * f64::from(y_max);
            prop_assert!(pl.eval(y) <= p.value(y) + 1e-9);
        }

        #[test]
        fn convex_chords_exact_at_integers(target in -5.0f64..40.0, y_max in 1u32..40) {
            let pl = convexify_sq_dev(target, y_max).unwrap();
            prop_assert!(ConvexPL::new(pl.pieces().to_vec()).is_some());
            for k in 0..=y_max {
                let y = f64::from(k);
                prop_assert!((pl.eval(y) - (y - target).powi(2)).abs() <= 1e-9);
            }
        }
    }
}
