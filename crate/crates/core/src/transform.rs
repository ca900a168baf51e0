//! Player-specific strictly increasing cost transforms.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::FiniteGame;
use crate::rational::{self, Rational};

/// Piecewise-linear map given by breakpoints, strictly increasing in both
/// coordinates. Evaluation outside the breakpoint range is an error.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Breakpoints(Vec<(Rational, Rational)>);

impl Breakpoints {
    pub fn new(points: Vec<(Rational, Rational)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::validation("transform", "no breakpoints"));
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 || w[1].1 <= w[0].1 {
                return Err(Error::validation(
                    "strict monotonicity",
                    format!(
                        "breakpoints ({}, {}) -> ({}, {}) are not strictly increasing",
                        rational::format(&w[0].0),
                        rational::format(&w[0].1),
                        rational::format(&w[1].0),
                        rational::format(&w[1].1)
                    ),
                ));
            }
        }
        Ok(Breakpoints(points))
    }

    pub fn eval(&self, t: &Rational) -> Result<Rational> {
        let pts = &self.0;
        let out_of_range = || {
            Error::Domain(format!(
                "value {} outside transform range [{}, {}]",
                rational::format(t),
                rational::format(&pts[0].0),
                rational::format(&pts[pts.len() - 1].0)
            ))
        };
        if t < &pts[0].0 || t > &pts[pts.len() - 1].0 {
            return Err(out_of_range());
        }
        if let Some(p) = pts.iter().find(|p| &p.0 == t) {
            return Ok(p.1.clone());
        }
        let k = pts.iter().position(|p| &p.0 > t).ok_or_else(out_of_range)?;
        let (x0, y0) = &pts[k - 1];
        let (x1, y1) = &pts[k];
        Ok(y0 + (y1 - y0) * (t - x0) / (x1 - x0))
    }
}

/// One map per player.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerTransform {
    pub maps: Vec<Breakpoints>,
}

impl PlayerTransform {
    pub fn new(maps: Vec<Breakpoints>) -> Self {
        PlayerTransform { maps }
    }

    /// Affine map `a t + b` on `[lo, hi]` for every player; `a > 0`.
    pub fn affine(players: usize, a: Rational, b: Rational, lo: Rational, hi: Rational) -> Result<Self> {
        let map = Breakpoints::new(vec![
            (lo.clone(), &a * &lo + &b),
            (hi.clone(), &a * &hi + &b),
        ])?;
        Ok(PlayerTransform {
            maps: vec![map; players],
        })
    }
}

/// The game with private costs `ϖ_i(π_i)`.
pub fn apply_transform(game: &FiniteGame, t: &PlayerTransform) -> Result<FiniteGame> {
    let n = game.players();
    if t.maps.len() != n {
        return Err(Error::Dimension {
            left: t.maps.len(),
            right: n,
        });
    }
    let table = game.table()?;
    let mut rows = Vec::with_capacity(table.len());
    for idx in 0..table.len() {
        let row = table
            .costs(idx)
            .iter()
            .zip(&t.maps)
            .map(|(c, m)| m.eval(c))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let rows = Arc::new(rows);
    let space = Arc::new(table.space().clone());
    let out = FiniteGame::new(game.strategy_counts().to_vec(), move |x: &[usize]| {
        rows[space.index(x)].clone()
    })?;
    Ok(out.with_budget(*game.budget()).with_exec(game.exec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::game::{enumerate_sne, enumerate_ssne, improving_moves, MoveMode};
    use crate::rational::{int, ratio};

    #[test]
    fn interpolates_exactly() {
        let b = Breakpoints::new(vec![(int(0), int(1)), (int(2), int(5)), (int(4), int(6))]).unwrap();
        assert_eq!(b.eval(&int(1)).unwrap(), int(3));
        assert_eq!(b.eval(&int(3)).unwrap(), ratio(11, 2));
        assert_eq!(b.eval(&int(4)).unwrap(), int(6));
        assert!(matches!(b.eval(&int(5)), Err(Error::Domain(_))));
    }

    #[test]
    fn rejects_non_increasing_tables() {
        assert!(Breakpoints::new(vec![(int(0), int(1)), (int(1), int(1))]).is_err());
        assert!(Breakpoints::new(vec![(int(1), int(0)), (int(0), int(1))]).is_err());
    }

    #[test]
    fn identity_keeps_moves() {
        let g = fixtures::poa_unbounded(int(3));
        let id = PlayerTransform::affine(2, int(1), int(0), int(0), int(3)).unwrap();
        let h = apply_transform(&g, &id).unwrap();
        let space = g.space().unwrap();
        for idx in 0..space.len() {
            let x = space.profile(idx);
            assert_eq!(
                improving_moves(&g, &x, 2, MoveMode::Strict).unwrap(),
                improving_moves(&h, &x, 2, MoveMode::Strict).unwrap()
            );
        }
    }

    #[test]
    fn affine_transform_keeps_equilibria() {
        let g = fixtures::poa_unbounded(int(3));
        let t = PlayerTransform::affine(2, int(2), int(1), int(0), int(3)).unwrap();
        let h = apply_transform(&g, &t).unwrap();
        assert_eq!(enumerate_sne(&g).unwrap(), enumerate_sne(&h).unwrap());
        assert_eq!(enumerate_ssne(&g).unwrap(), enumerate_ssne(&h).unwrap());
    }

    #[test]
    fn out_of_range_costs_error() {
        let g = fixtures::poa_unbounded(int(3));
        let t = PlayerTransform::affine(2, int(1), int(0), int(0), int(2)).unwrap();
        assert!(matches!(apply_transform(&g, &t), Err(Error::Domain(_))));
    }
}
