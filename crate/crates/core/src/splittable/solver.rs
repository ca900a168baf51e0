//! α-approximate SNE for convex splittable instances.
//!
//! Minimises the surrogate `Φ(ξ) = Σ_f c_f(ℓ_f)^M · ℓ_f` by pairwise
//! Frank–Wolfe steps per player with exact line search. `M` is large, so
//! all marginal costs are handled as logarithms; the common factor `C^-M`
//! never needs to be formed. The result is checked with
//! [`verify_alpha_unilateral`], and any deviation found is applied and the
//! check repeated.

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use super::verify::{verify_alpha_unilateral, AlphaCheck, VerifyConfig};
use super::{alpha_exponent, loads, SplittableInstance, SplittableState};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Relative duality-gap target; derived from `α` and `M` when absent.
    pub eps: Option<f64>,
    pub max_sweeps: usize,
    pub max_repairs: usize,
    /// Intensities below this fraction of the demand are zeroed at the end.
    pub clean_tol: f64,
    pub verify: VerifyConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eps: None,
            max_sweeps: 20_000,
            max_repairs: 10_000,
            clean_tol: 1e-9,
            verify: VerifyConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxReport {
    pub state: SplittableState<f64>,
    pub exponent: u32,
    pub eps_solver: f64,
    pub warning: Option<String>,
    pub sweeps: usize,
    pub final_gap: f64,
    /// `ln Φ` after every sweep, up to the constant `-M ln C`.
    pub log_surrogate: Vec<f64>,
    /// Deviations applied after the first-order phase.
    pub repairs: usize,
    pub check: AlphaCheck,
}

impl ApproxReport {
    pub fn verified(&self) -> bool {
        self.check.ok
    }
}

fn log_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn ln_or_neg_inf(x: f64) -> f64 {
    if x > 0.0 {
        x.ln()
    } else {
        f64::NEG_INFINITY
    }
}

struct Surrogate<'a> {
    inst: &'a SplittableInstance,
    m: u32,
}

impl Surrogate<'_> {
    /// `ln h_f'(ℓ)` with `h_f(ℓ) = c_f(ℓ)^M·ℓ`.
    fn log_marginal(&self, f: usize, load: f64) -> f64 {
        let cost = &self.inst.facilities()[f].cost;
        let c = cost.eval_f64(load);
        let s = cost.slope_f64(load);
        let m = self.m as f64;
        let base = ln_or_neg_inf(c + m * s * load);
        if self.m == 1 {
            base
        } else {
            base + (m - 1.0) * ln_or_neg_inf(c)
        }
    }

    fn log_value(&self, loads: &[f64]) -> f64 {
        log_sum_exp(loads.iter().enumerate().map(|(f, &l)| {
            let c = self.inst.facilities()[f].cost.eval_f64(l);
            self.m as f64 * ln_or_neg_inf(c) + ln_or_neg_inf(l)
        }))
    }

    fn log_strategy_gradients(&self, player: usize, loads: &[f64]) -> Vec<f64> {
        self.inst.strategies()[player]
            .iter()
            .map(|s| log_sum_exp(s.iter().map(|&f| self.log_marginal(f, loads[f]))))
            .collect()
    }

    /// Sign of the directional derivative when `t` moves from `away` to `toward`.
    fn slope_positive(&self, loads: &[f64], delta: &[(usize, f64)], t: f64) -> bool {
        let pos = log_sum_exp(delta.iter().filter(|d| d.1 > 0.0).map(|&(f, _)| self.log_marginal(f, loads[f] + t)));
        let neg = log_sum_exp(delta.iter().filter(|d| d.1 < 0.0).map(|&(f, _)| self.log_marginal(f, (loads[f] - t).max(0.0))));
        pos > neg
    }
}

/// Relative Frank–Wolfe gap of one player.
fn relative_gap(xi: &[f64], log_g: &[f64]) -> f64 {
    let top = log_g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return 0.0;
    }
    let g: Vec<f64> = log_g.iter().map(|x| (x - top).exp()).collect();
    let gmin = g.iter().cloned().fold(f64::INFINITY, f64::min);
    let den: f64 = xi.iter().zip(&g).map(|(x, g)| x * g).sum();
    if den <= 0.0 {
        return 0.0;
    }
    xi.iter().zip(&g).map(|(x, g)| x * (g - gmin)).sum::<f64>() / den
}

const LINE_SEARCH_STEPS: usize = 80;

pub fn approx_sne(inst: &SplittableInstance, alpha: &Rational, cfg: &SolverConfig) -> Result<ApproxReport> {
    if !alpha.is_positive() {
        return Err(Error::Domain("alpha must be positive".into()));
    }
    if let Some(f) = inst.facilities().iter().find(|f| !f.cost.is_convex()) {
        return Err(Error::validation("convexity", format!("cost of {} is not convex", f.name)));
    }
    let total = inst.total_demand();
    if let Some(f) = inst
        .facilities()
        .iter()
        .find(|f| f.cost.points().len() > 1 && f.cost.points().last().expect("non-empty").0 < total)
    {
        return Err(Error::validation(
            "cost domain",
            format!("breakpoints of {} end before the total demand", f.name),
        ));
    }
    let m = alpha_exponent(inst, alpha)?;
    let (eps, warning) = solver_tolerance(inst, alpha, m, cfg.eps);
    let sur = Surrogate { inst, m };
    let n = inst.players();
    let mut state: SplittableState<f64> = inst.uniform_state();
    let mut history = Vec::new();
    let mut sweeps = 0;
    let mut gap = f64::INFINITY;
    while sweeps < cfg.max_sweeps {
        sweeps += 1;
        for i in 0..n {
            let l = loads(inst, &state);
            let lg = sur.log_strategy_gradients(i, &l);
            let row = &state.xi[i];
            let toward = (0..lg.len()).min_by(|&a, &b| lg[a].total_cmp(&lg[b])).expect("strategies exist");
            let Some(away) = (0..lg.len())
                .filter(|&j| row[j] > 0.0)
                .max_by(|&a, &b| lg[a].total_cmp(&lg[b]))
            else {
                continue;
            };
            if away == toward || lg[away] <= lg[toward] {
                continue;
            }
            let mut delta: Vec<(usize, f64)> = Vec::new();
            for &f in &inst.strategies()[i][toward] {
                delta.push((f, 1.0));
            }
            for &f in &inst.strategies()[i][away] {
                match delta.iter().position(|d| d.0 == f) {
                    Some(k) => {
                        delta.remove(k);
                    }
                    None => delta.push((f, -1.0)),
                }
            }
            let t_max = row[away];
            let t = if !sur.slope_positive(&l, &delta, t_max) {
                t_max
            } else {
                let (mut lo, mut hi) = (0.0, t_max);
                for _ in 0..LINE_SEARCH_STEPS {
                    let mid = 0.5 * (lo + hi);
                    if sur.slope_positive(&l, &delta, mid) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                0.5 * (lo + hi)
            };
            let row = &mut state.xi[i];
            if t >= t_max {
                row[toward] += row[away];
                row[away] = 0.0;
            } else {
                row[away] -= t;
                row[toward] += t;
            }
        }
        let l = loads(inst, &state);
        history.push(sur.log_value(&l));
        gap = (0..n)
            .map(|i| relative_gap(&state.xi[i], &sur.log_strategy_gradients(i, &l)))
            .fold(0.0, f64::max);
        if gap <= eps {
            break;
        }
    }
    clean(inst, &mut state, cfg.clean_tol);
    let alpha_f = rational::to_f64(alpha);
    let mut repairs = 0;
    let mut check = verify_alpha_unilateral(inst, &state, alpha_f, &cfg.verify);
    while !check.ok && repairs < cfg.max_repairs {
        let v = check.violation.take().expect("failed checks carry a violation");
        state = v.deviation;
        repairs += 1;
        check = verify_alpha_unilateral(inst, &state, alpha_f, &cfg.verify);
    }
    Ok(ApproxReport {
        state,
        exponent: m,
        eps_solver: eps,
        warning,
        sweeps,
        final_gap: gap,
        log_surrogate: history,
        repairs,
        check,
    })
}

/// `(α/(2C))^M / 4` capped at `1e-8`, or `1e-8` with a warning when that
/// target is below what doubles can resolve.
fn solver_tolerance(inst: &SplittableInstance, alpha: &Rational, m: u32, requested: Option<f64>) -> (f64, Option<String>) {
    if let Some(e) = requested {
        return (e, None);
    }
    let c = rational::to_f64(inst.cost_bound());
    if c <= 0.0 {
        return (1e-8, None);
    }
    let log_target = m as f64 * (rational::to_f64(alpha) / (2.0 * c)).ln() - 4f64.ln();
    if log_target >= 1e-15f64.ln() {
        (log_target.exp().min(1e-8), None)
    } else {
        (
            1e-8,
            Some(format!(
                "potential gap (alpha/2)^M with M = {m} is below double precision; \
                 using relative gap 1e-8 and relying on the explicit check"
            )),
        )
    }
}

/// Zeroes intensities below `tol·d_i` and rescales each row to its demand.
fn clean(inst: &SplittableInstance, state: &mut SplittableState<f64>, tol: f64) {
    for (i, row) in state.xi.iter_mut().enumerate() {
        let d = rational::to_f64(&inst.demands()[i]);
        for v in row.iter_mut() {
            if *v < tol * d {
                *v = 0.0;
            }
        }
        let s: f64 = row.iter().sum();
        if s > 0.0 {
            for v in row.iter_mut() {
                *v *= d / s;
            }
        }
    }
}
