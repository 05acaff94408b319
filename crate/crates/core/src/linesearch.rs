//! Globalization: the projected backtracking search along a Newton-CG
//! direction, and backtracking along a (restricted) PG step.

use alloc::vec::Vec;

use crate::error::Error;
use crate::group::GroupSet;
use crate::math;
use crate::objective::{CompositeObjective, IterateState, SmoothLoss};
use crate::solver::SolveOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CgFlag {
    /// At least one group became exactly zero and `F` did not increase.
    NewZero,
    /// Armijo decrease along the unprojected direction.
    SuffDescent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PgFlag {
    /// Accepted at the first trial.
    SameAlpha,
    /// Needed at least one backtrack.
    DecreaseAlpha,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgSearchResult {
    pub x_next: Vec<f64>,
    pub flag: CgFlag,
    pub backtracks: usize,
    /// `xi^j` of the accepted trial.
    pub step_size: f64,
    /// `F(x) + objective_change`
    pub objective: f64,
    /// `F(x_next) - F(x)`
    pub objective_change: f64,
    /// `f(x_next) - f(x)`
    pub smooth_change: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PgSearchResult {
    pub x_next: Vec<f64>,
    pub flag: PgFlag,
    pub backtracks: usize,
    pub step_size: f64,
    pub objective: f64,
    pub objective_change: f64,
    pub smooth_change: f64,
}

/// `min(rho, sin(theta) ||x_i||)`
pub fn kill_radius(block_norm: f64, theta: f64, rho: f64) -> f64 {
    rho.min(math::sin(theta) * block_norm)
}

/// Smallest `tau > 0` with `||x + tau d|| = radius`, or `None` when the ray
/// `{x + tau d : tau >= 0}` misses the closed ball. Requires `||x|| > radius`.
pub fn first_intersection(x: &[f64], d: &[f64], radius: f64) -> Option<f64> {
    let a = math::norm_sq(d);
    let half_b = math::dot(x, d);
    let c = math::norm_sq(x) - radius * radius;
    debug_assert!(c > 0.0, "start point inside the ball");
    if a == 0.0 || half_b >= 0.0 {
        // Moving away from (or parallel to) the origin: both roots nonpositive.
        return None;
    }
    // b^2/4 - a c = a (r^2 - ||x_perp||^2), with x_perp the part of x
    // orthogonal to d; forming it directly avoids cancellation.
    let t = half_b / a;
    let perp_sq: f64 = x.iter().zip(d).map(|(xi, di)| (xi - t * di) * (xi - t * di)).sum();
    let disc = a * (radius * radius - perp_sq);
    if disc < 0.0 {
        return None;
    }
    // Larger root is q / a; the smaller one follows from the product c / a.
    let q = -half_b + math::sqrt(disc);
    Some(c / q)
}

/// Projected backtracking along `d` (zero outside `iset`).
///
/// `rho` holds the radius `rho_i` for every group of `iset`, in order, and
/// `directional` is `grad_I (f + r)(x)^T d_I`. While the trial step is at least
/// the first ball crossing, groups whose crossing has been passed are set to
/// zero and the trial is accepted on plain non-increase of `F`. Below that,
/// ordinary Armijo backtracking is used.
pub fn update_cg<L: SmoothLoss>(
    obj: &CompositeObjective<L>,
    state: &IterateState,
    d: &[f64],
    iset: &GroupSet,
    rho: &[f64],
    directional: f64,
    opts: &SolveOptions,
) -> crate::Result<CgSearchResult> {
    let partition = obj.partition();
    let x = &state.x;
    let f0 = state.objective;
    debug_assert_eq!(rho.len(), iset.len());

    let taus: Vec<f64> = iset
        .iter()
        .zip(rho)
        .map(|(i, &rho_i)| {
            let xb = partition.gather(i, x);
            let db = partition.gather(i, d);
            let radius = kill_radius(math::norm(&xb), opts.theta, rho_i);
            first_intersection(&xb, &db, radius).unwrap_or(f64::INFINITY)
        })
        .collect();
    let tau_min = taus.iter().copied().fold(f64::INFINITY, f64::min);

    let mut step = 1.0;
    let mut j = 0usize;
    let mut y = x.clone();
    while step >= tau_min {
        y.copy_from_slice(x);
        for (i, &tau) in iset.iter().zip(&taus) {
            for &c in partition.group(i) {
                y[c] = if step < tau { x[c] + step * d[c] } else { 0.0 };
            }
        }
        let (df, dfy) = obj.value_change(x, &y);
        if dfy <= 0.0 {
            return Ok(CgSearchResult {
                x_next: y,
                flag: CgFlag::NewZero,
                backtracks: j,
                step_size: step,
                objective: f0 + dfy,
                objective_change: dfy,
                smooth_change: df,
            });
        }
        step *= opts.xi;
        j += 1;
        if j > opts.max_backtracks {
            return Err(Error::LineSearchFailure { backtracks: j });
        }
    }

    loop {
        for ((yc, xc), dc) in y.iter_mut().zip(x).zip(d) {
            *yc = xc + step * dc;
        }
        let (df, dfy) = obj.value_change(x, &y);
        if dfy <= opts.eta * step * directional {
            return Ok(CgSearchResult {
                x_next: y,
                flag: CgFlag::SuffDescent,
                backtracks: j,
                step_size: step,
                objective: f0 + dfy,
                objective_change: dfy,
                smooth_change: df,
            });
        }
        step *= opts.xi;
        j += 1;
        if j > opts.max_backtracks {
            return Err(Error::LineSearchFailure { backtracks: j });
        }
    }
}

/// Backtracking along `P_I(s)` until
/// `F(x + xi^j P_I(s)) <= F(x) - eta xi^j / alpha ||P_I(s)||^2`.
pub fn update_pg<L: SmoothLoss>(
    obj: &CompositeObjective<L>,
    state: &IterateState,
    iset: &GroupSet,
    opts: &SolveOptions,
) -> crate::Result<PgSearchResult> {
    let partition = obj.partition();
    let ps = iset.project(partition, &state.pg_step);
    let ps_sq = math::norm_sq(&ps);
    if ps_sq == 0.0 {
        return Err(Error::InvalidOption("PG search needs a nonzero restricted step"));
    }
    let decrease = ps_sq / state.alpha;
    let x = &state.x;
    let mut y = x.clone();
    let mut step = 1.0;
    let mut j = 0usize;
    loop {
        for ((yc, xc), pc) in y.iter_mut().zip(x).zip(&ps) {
            *yc = xc + step * pc;
        }
        let (df, dfy) = obj.value_change(x, &y);
        if dfy <= -opts.eta * step * decrease {
            let flag = if j == 0 {
                PgFlag::SameAlpha
            } else {
                PgFlag::DecreaseAlpha
            };
            return Ok(PgSearchResult {
                x_next: y,
                flag,
                backtracks: j,
                step_size: step,
                objective: state.objective + dfy,
                objective_change: dfy,
                smooth_change: df,
            });
        }
        step *= opts.xi;
        j += 1;
        if j > opts.max_backtracks {
            return Err(Error::LineSearchFailure { backtracks: j });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupPartition;
    use crate::losses::QuadraticLoss;
    use alloc::vec;
    use core::f64::consts::FRAC_PI_4;

    #[test]
    fn kill_radius_examples() {
        assert!((kill_radius(1.0, FRAC_PI_4, 10.0) - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(kill_radius(1.0, FRAC_PI_4, 0.1), 0.1);
        for &nx in &[1e-3, 1.0, 7.0] {
            assert!(kill_radius(nx, FRAC_PI_4, 1e9) <= nx);
        }
    }

    #[test]
    fn intersection_examples() {
        assert_eq!(first_intersection(&[2.0, 0.0], &[-1.0, 0.0], 1.0), Some(1.0));
        assert_eq!(first_intersection(&[2.0, 0.0], &[1.0, 0.0], 1.0), None);
        assert_eq!(first_intersection(&[2.0, 0.0], &[0.0, 1.0], 1.0), None);
        assert_eq!(first_intersection(&[2.0, 0.0], &[0.0, 0.0], 1.0), None);
        // grazing miss: closest approach is 2 * sin(30deg) = 1.0001 > 1 -> none
        let d = [-(3.0f64.sqrt()) / 2.0, 0.5001];
        assert_eq!(first_intersection(&[2.0, 0.0], &d, 1.0), None);
    }

    #[test]
    fn intersection_is_stable_near_head_on() {
        // x^T d ~ -||x|| ||d||, tiny ball: naive formula cancels.
        let tau = first_intersection(&[1.0, 1e-9], &[-1.0, 0.0], 1e-6).unwrap();
        assert!((tau - (1.0 - (1e-12f64 - 1e-18).sqrt())).abs() < 1e-15);
        let y = [1.0 - tau, 1e-9];
        assert!((math::norm(&y) - 1e-6).abs() < 1e-15);
    }

    fn quad_obj(diag: &[f64], b: Vec<f64>, groups: Vec<Vec<usize>>, w: Vec<f64>) -> CompositeObjective<QuadraticLoss> {
        let loss = QuadraticLoss::diagonal(diag, b).unwrap();
        CompositeObjective::new(loss, GroupPartition::new(groups, w).unwrap()).unwrap()
    }

    #[test]
    fn newton_step_accepted_without_projection() {
        // f = 0.5 (x1^2 + 2 x2^2) - b^T x, singleton groups, small lambda;
        // from x = (1, 1) the Newton direction stays far from zero.
        let obj = quad_obj(&[1.0, 2.0], vec![3.0, 4.0], vec![vec![0], vec![1]], vec![0.1, 0.1]);
        let st = IterateState::new(&obj, vec![1.0, 1.0], 1.0).unwrap();
        // Newton on F restricted: grad = (1 - 3 + 0.1, 2 - 4 + 0.1), H = diag(1, 2).
        let g = [-1.9, -1.9];
        let d = vec![1.9, 0.95];
        let dir = math::dot(&g, &d);
        let res = update_cg(&obj, &st, &d, &GroupSet::all(2), &[0.1, 0.1], dir, &SolveOptions::default()).unwrap();
        assert_eq!(res.flag, CgFlag::SuffDescent);
        assert_eq!(res.backtracks, 0);
        assert_eq!(res.x_next, vec![2.9, 1.95]);
    }

    #[test]
    fn direction_into_ball_zeroes_group() {
        // One group with a large weight: moving toward zero lowers r more than f.
        let obj = quad_obj(&[1.0, 1.0], vec![0.0, 0.0], vec![vec![0, 1]], vec![1.0]);
        let st = IterateState::new(&obj, vec![0.3, 0.4], 1.0).unwrap();
        let d = vec![-0.6, -0.8];
        // radius = min(rho, sin(pi/4) * 0.5); rho large -> ~0.354, tau ~ 0.146
        let dir = -1.0; // any negative value; phase 1 ignores it
        let res = update_cg(&obj, &st, &d, &GroupSet::all(1), &[10.0], dir, &SolveOptions::default()).unwrap();
        assert_eq!(res.flag, CgFlag::NewZero);
        assert_eq!(res.x_next, vec![0.0, 0.0]);
        assert!(res.objective <= st.objective);
    }

    #[test]
    fn zero_direction_accepted_immediately() {
        let obj = quad_obj(&[1.0, 1.0], vec![1.0, 1.0], vec![vec![0, 1]], vec![0.1]);
        let st = IterateState::new(&obj, vec![1.0, 1.0], 1.0).unwrap();
        let res = update_cg(&obj, &st, &[0.0, 0.0], &GroupSet::all(1), &[0.01], 0.0, &SolveOptions::default()).unwrap();
        assert_eq!(res.flag, CgFlag::SuffDescent);
        assert_eq!(res.backtracks, 0);
        assert_eq!(res.x_next, st.x);
    }

    #[test]
    fn pg_search_small_alpha_keeps_alpha() {
        // L = 4; alpha = (1 - eta) * 2 / L * 0.99
        let opts = SolveOptions::default();
        let obj = quad_obj(&[4.0, 1.0], vec![1.0, -2.0], vec![vec![0], vec![1]], vec![0.1, 0.1]);
        let alpha = 0.99 * (1.0 - opts.eta) * 2.0 / 4.0;
        let st = IterateState::new(&obj, vec![0.5, 0.5], alpha).unwrap();
        let res = update_pg(&obj, &st, &GroupSet::all(2), &opts).unwrap();
        assert_eq!(res.flag, PgFlag::SameAlpha);
        assert_eq!(res.backtracks, 0);
        assert!(res.objective < st.objective);
    }

    #[test]
    fn pg_search_large_alpha_backtracks() {
        // Stiff: L = 100, alpha = 1 overshoots badly.
        let obj = quad_obj(&[100.0], vec![0.0], vec![vec![0]], vec![1e-3]);
        let st = IterateState::new(&obj, vec![1.0], 1.0).unwrap();
        let res = update_pg(&obj, &st, &GroupSet::all(1), &SolveOptions::default()).unwrap();
        assert_eq!(res.flag, PgFlag::DecreaseAlpha);
        assert!(res.backtracks >= 1);
        assert!(res.objective < st.objective);
    }

    #[test]
    fn pg_search_rejects_zero_step() {
        let obj = quad_obj(&[1.0], vec![0.0], vec![vec![0]], vec![1.0]);
        let st = IterateState::new(&obj, vec![0.0], 1.0).unwrap();
        assert!(update_pg(&obj, &st, &GroupSet::all(1), &SolveOptions::default()).is_err());
    }
}
