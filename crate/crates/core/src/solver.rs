//! The outer iteration, PG-parameter policies, and the baseline PG solver.
//!
//! Each iteration computes the PG step, decomposes the groups, and then works
//! on whichever subspace carries the larger share of the step:
//!
//! - `chi_pg <= chi_cg`: Newton-CG on the selected second-order groups,
//!   followed by the projected search; `alpha` is kept (basic mode).
//! - otherwise: backtracking along the PG step restricted to the first-order
//!   groups; `alpha` shrinks by `zeta` whenever that search backtracked.
//!
//! The run stops once `max(chi_cg, chi_pg) <= tol_rel * max(chi_cg_0, chi_pg_0, 1)`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_4;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decompose::{decompose, DecompositionResult};
use crate::error::{check_dim, Error};
use crate::group::{GroupPartition, GroupSet};
use crate::linesearch::{update_cg, update_pg, CgFlag, PgFlag};
use crate::math;
use crate::objective::{CompositeObjective, IterateState, SmoothLoss};
use crate::subspace::{cg_direction, hessian_model_with_gradient};

/// How the PG parameter evolves between iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum AlphaUpdate {
    /// Multiply by `zeta` after a PG search that backtracked, else keep.
    Basic,
    /// `min(1, alpha_hat / 2)` from a local curvature estimate along the
    /// accepted step, with a bounded number of increases.
    Adaptive,
}

/// Initial PG parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum AlphaInit {
    Fixed(f64),
    /// Inverse local Lipschitz estimate from a random perturbation of norm 1e-8.
    Estimate { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolveOptions {
    /// Fraction of the PG step norm the selected subset must carry.
    pub phi: f64,
    /// Backtracking factor.
    pub xi: f64,
    /// Sufficient-decrease constant.
    pub eta: f64,
    /// PG parameter reduction factor (basic mode).
    pub zeta: f64,
    /// Exponent in the small-group test.
    pub p: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    /// Angle defining the kill radius `sin(theta) ||x_i||`.
    pub theta: f64,
    /// Exponent of the forcing term `mu ||g||^q` checked on CG exit.
    pub q: f64,
    pub mu: f64,
    pub tol_rel: f64,
    pub max_iter: usize,
    /// Wall-clock limit; only enforced through [`solve_with_clock`].
    pub max_seconds: f64,
    pub alpha_update: AlphaUpdate,
    pub alpha_init: AlphaInit,
    /// Increases allowed in adaptive mode before it turns monotone.
    pub max_alpha_increases: usize,
    /// Scale `kappa2` by `|G_i| / |I_bar|` in the small-group test.
    pub kappa2_rescale: bool,
    /// Start with `phi = phi_switch_initial` and move to `phi = 1` after the
    /// first Newton iteration whose decrease in `f` is at most
    /// `phi_switch_threshold`.
    pub phi_switch: bool,
    pub phi_switch_initial: f64,
    pub phi_switch_threshold: f64,
    pub max_backtracks: usize,
    /// CG residual target `max(min(cg_rel_factor t0, t0^cg_power), cg_abs_floor)`.
    pub cg_rel_factor: f64,
    pub cg_power: f64,
    pub cg_abs_floor: f64,
    /// CG stops once `||d|| >= cg_trust_factor * min(1, ||g||)`.
    pub cg_trust_factor: f64,
    /// Keep every iterate in the report.
    pub record_iterates: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            phi: 1.0,
            xi: 0.5,
            eta: 1e-3,
            zeta: 0.8,
            p: 2.0,
            kappa1: 0.1,
            kappa2: 1e-2,
            theta: FRAC_PI_4,
            q: 1.0,
            mu: 1.0,
            tol_rel: 1e-6,
            max_iter: 100_000,
            max_seconds: 900.0,
            alpha_update: AlphaUpdate::Adaptive,
            alpha_init: AlphaInit::Estimate { seed: 0 },
            max_alpha_increases: 100,
            kappa2_rescale: true,
            phi_switch: false,
            phi_switch_initial: 0.8,
            phi_switch_threshold: 1e-3,
            max_backtracks: 100,
            cg_rel_factor: 0.1,
            cg_power: 1.5,
            cg_abs_floor: 1e-10,
            cg_trust_factor: 1e3,
            record_iterates: false,
        }
    }
}

fn in_open_unit(v: f64) -> bool {
    v > 0.0 && v < 1.0
}

impl SolveOptions {
    /// Options matching the convergence theory: basic `alpha` policy and no
    /// `kappa2` rescaling.
    pub fn theory() -> Self {
        Self {
            alpha_update: AlphaUpdate::Basic,
            kappa2_rescale: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        let checks: [(bool, &'static str); 14] = [
            (self.phi > 0.0 && self.phi <= 1.0, "phi must lie in (0, 1]"),
            (in_open_unit(self.xi), "xi must lie in (0, 1)"),
            (in_open_unit(self.eta), "eta must lie in (0, 1)"),
            (in_open_unit(self.zeta), "zeta must lie in (0, 1)"),
            (self.p > 0.0 && self.p.is_finite(), "p must be positive"),
            (self.kappa1 > 0.0 && self.kappa1.is_finite(), "kappa1 must be positive"),
            (self.kappa2 > 0.0 && self.kappa2.is_finite(), "kappa2 must be positive"),
            (
                self.theta > 0.0 && self.theta < core::f64::consts::FRAC_PI_2,
                "theta must lie in (0, pi/2)",
            ),
            ((1.0..=2.0).contains(&self.q), "q must lie in [1, 2]"),
            (self.mu > 0.0 && self.mu <= 1.0, "mu must lie in (0, 1]"),
            (self.tol_rel >= 0.0, "tol_rel must be nonnegative"),
            (self.max_seconds > 0.0, "max_seconds must be positive"),
            (
                self.phi_switch_initial > 0.0 && self.phi_switch_initial <= 1.0,
                "phi_switch_initial must lie in (0, 1]",
            ),
            (
                self.cg_trust_factor > 0.0 && self.cg_power > 0.0 && self.cg_rel_factor >= 0.0,
                "CG stopping parameters must be positive",
            ),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::InvalidOption(msg));
            }
        }
        if let AlphaInit::Fixed(a) = self.alpha_init {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::InvalidOption("initial alpha must lie in (0, 1]"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Status {
    Optimal,
    IterLimit,
    TimeLimit,
    LinesearchFailure,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::IterLimit => "iter_limit",
            Status::TimeLimit => "time_limit",
            Status::LinesearchFailure => "linesearch_failure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum IterKind {
    Cg,
    Pg,
}

impl IterKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IterKind::Cg => "cg",
            IterKind::Pg => "pg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum StepFlag {
    NewZero,
    SuffDescent,
    SameAlpha,
    DecreaseAlpha,
}

impl StepFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            StepFlag::NewZero => "new_zero",
            StepFlag::SuffDescent => "suff_descent",
            StepFlag::SameAlpha => "same_alpha",
            StepFlag::DecreaseAlpha => "decrease_alpha",
        }
    }
}

impl From<CgFlag> for StepFlag {
    fn from(f: CgFlag) -> Self {
        match f {
            CgFlag::NewZero => StepFlag::NewZero,
            CgFlag::SuffDescent => StepFlag::SuffDescent,
        }
    }
}

impl From<PgFlag> for StepFlag {
    fn from(f: PgFlag) -> Self {
        match f {
            PgFlag::SameAlpha => StepFlag::SameAlpha,
            PgFlag::DecreaseAlpha => StepFlag::DecreaseAlpha,
        }
    }
}

/// One row of the iteration trace. `chi_*` and `alpha` describe `x_k`;
/// `objective` and `zero_groups` describe `x_{k+1}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceRecord {
    pub iter: usize,
    pub kind: IterKind,
    pub flag: StepFlag,
    pub chi_cg: f64,
    pub chi_pg: f64,
    pub alpha: f64,
    pub objective: f64,
    pub zero_groups: usize,
    pub cg_iters: usize,
    pub backtracks: usize,
}

/// Iteration counts per outcome; they sum to the iteration count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Counters {
    pub new_zero: usize,
    pub suff_descent: usize,
    pub same_alpha: usize,
    pub decrease_alpha: usize,
}

impl Counters {
    fn record(&mut self, flag: StepFlag) {
        match flag {
            StepFlag::NewZero => self.new_zero += 1,
            StepFlag::SuffDescent => self.suff_descent += 1,
            StepFlag::SameAlpha => self.same_alpha += 1,
            StepFlag::DecreaseAlpha => self.decrease_alpha += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.new_zero + self.suff_descent + self.same_alpha + self.decrease_alpha
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolveReport {
    pub x_final: Vec<f64>,
    pub status: Status,
    pub objective_initial: f64,
    /// `F(x_0)` plus the sum of the accepted decreases, each computed as an
    /// accurate difference. It can differ from a fresh evaluation of
    /// `F(x_final)` by rounding, but never increases along the trace.
    pub objective_final: f64,
    /// `max(chi_cg, chi_pg)` at `x_final`.
    pub chi_final: f64,
    /// Absolute stopping tolerance on `max(chi_cg, chi_pg)`.
    pub tolerance: f64,
    pub alpha0: f64,
    pub alpha_final: f64,
    pub iterations: usize,
    pub zero_groups: usize,
    pub counters: Counters,
    pub trace: Vec<TraceRecord>,
    /// `x_0, x_1, ...` when requested.
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none", default))]
    pub iterates: Option<Vec<Vec<f64>>>,
}

/// Source of elapsed wall-clock time for the time limit.
pub trait Clock {
    fn elapsed_seconds(&self) -> f64;
}

/// A clock that never advances; the time limit is then never hit.
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed_seconds(&self) -> f64 {
        0.0
    }
}

/// Basic policy: `zeta * alpha` after a backtracking PG search, else `alpha`.
pub fn update_alpha_basic(alpha: f64, flag: StepFlag, zeta: f64) -> f64 {
    match flag {
        StepFlag::DecreaseAlpha => zeta * alpha,
        _ => alpha,
    }
}

/// `alpha_hat = ||dx||^2 / (2 (f(x + dx) - f(x) - grad_f^T dx))` given
/// `f_change = f(x + dx) - f(x)`, or `None` when the denominator is not positive.
pub fn alpha_estimate(dx: &[f64], grad_f: &[f64], f_change: f64) -> Option<f64> {
    let denom = 2.0 * (f_change - math::dot(grad_f, dx));
    if denom > 0.0 {
        Some(math::norm_sq(dx) / denom)
    } else {
        None
    }
}

/// Adaptive policy: `min(1, alpha_hat / 2)` while increases are allowed, then
/// `min(alpha, alpha_hat / 2)`. A missing estimate counts as `alpha_hat / 2 = 1`.
pub fn update_alpha_adaptive(alpha: f64, alpha_hat: Option<f64>, allow_increase: bool) -> f64 {
    let candidate = alpha_hat.map_or(1.0, |a| (0.5 * a).min(1.0));
    let next = if allow_increase {
        candidate
    } else {
        candidate.min(alpha)
    };
    if next > 0.0 {
        next
    } else {
        alpha
    }
}

/// `min(1, ||x0 - y0|| / ||grad f(x0) - grad f(y0)||)` with
/// `y0 = x0 + 1e-8 u / ||u||`; returns 1 when the gradients coincide.
pub fn estimate_alpha0<L: SmoothLoss>(
    obj: &CompositeObjective<L>,
    x0: &[f64],
    direction: &[f64],
) -> crate::Result<f64> {
    check_dim(obj.dim(), x0.len())?;
    check_dim(obj.dim(), direction.len())?;
    let un = math::norm(direction);
    if !(un > 0.0 && un.is_finite()) {
        return Err(Error::InvalidOption("perturbation direction must be nonzero"));
    }
    let y0: Vec<f64> = x0
        .iter()
        .zip(direction)
        .map(|(x, u)| x + 1e-8 * u / un)
        .collect();
    let dist = math::sqrt(x0.iter().zip(&y0).map(|(a, b)| (a - b) * (a - b)).sum());
    let g0 = obj.smooth_gradient(x0);
    let g1 = obj.smooth_gradient(&y0);
    let gdist = math::sqrt(g0.iter().zip(&g1).map(|(a, b)| (a - b) * (a - b)).sum());
    if gdist == 0.0 || dist == 0.0 {
        return Ok(1.0);
    }
    Ok((dist / gdist).min(1.0))
}

/// Uniform direction in `[-1, 1]^n` from a seeded ChaCha8 stream.
pub fn random_direction(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    if n > 0 && u.iter().all(|&v| v == 0.0) {
        u[0] = 1.0;
    }
    u
}

fn initial_alpha<L: SmoothLoss>(
    obj: &CompositeObjective<L>,
    x0: &[f64],
    opts: &SolveOptions,
) -> crate::Result<f64> {
    match opts.alpha_init {
        AlphaInit::Fixed(a) => Ok(a),
        AlphaInit::Estimate { seed } => {
            estimate_alpha0(obj, x0, &random_direction(x0.len(), seed))
        }
    }
}

/// Picks groups from `set` by decreasing `||s_i||` until they carry at least
/// `phi * ||s_set||`; `phi = 1` returns the whole set.
pub fn select_subset(set: &GroupSet, partition: &GroupPartition, s: &[f64], phi: f64) -> GroupSet {
    if phi >= 1.0 {
        return set.clone();
    }
    let mut scored: Vec<(usize, f64)> = set
        .iter()
        .map(|i| (i, partition.block_norm_sq(i, s)))
        .collect();
    let total: f64 = scored.iter().map(|(_, v)| v).sum();
    let target = phi * phi * total;
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut acc = 0.0;
    let mut chosen = Vec::new();
    for (i, v) in scored {
        chosen.push(i);
        acc += v;
        if acc >= target {
            break;
        }
    }
    GroupSet::from_ids(chosen)
}

struct StepOutcome {
    x_next: Vec<f64>,
    objective: f64,
    smooth_change: f64,
    kind: IterKind,
    flag: StepFlag,
    cg_iters: usize,
    backtracks: usize,
}

fn pg_iteration<L: SmoothLoss>(
    obj: &CompositeObjective<L>,
    state: &IterateState,
    iset: &GroupSet,
    opts: &SolveOptions,
) -> crate::Result<StepOutcome> {
    let res = update_pg(obj, state, iset, opts)?;
    Ok(StepOutcome {
        x_next: res.x_next,
        objective: res.objective,
        smooth_change: res.smooth_change,
        kind: IterKind::Pg,
        flag: res.flag.into(),
        cg_iters: 0,
        backtracks: res.backtracks,
    })
}

fn cg_iteration<L: SmoothLoss>(
    obj: &CompositeObjective<L>,
    state: &IterateState,
    dec: &DecompositionResult,
    phi: f64,
    opts: &SolveOptions,
) -> crate::Result<StepOutcome> {
    let partition = obj.partition();
    let iset = select_subset(&dec.icg, partition, &state.pg_step, phi);
    let rho: Vec<f64> = iset
        .iter()
        .map(|i| dec.rho_of(i).expect("selected group outside the Newton set"))
        .collect();
    let sys = hessian_model_with_gradient(obj, &state.x, &state.grad_f, &iset)?;
    let gnorm = math::norm(sys.grad());
    if gnorm == 0.0 {
        // Stationary on the subspace up to rounding; take the PG step there.
        return pg_iteration(obj, state, &iset, opts);
    }
    let cg = match cg_direction(&sys, gnorm, opts) {
        Ok(cg) => cg,
        Err(Error::NonPositiveCurvature { .. }) => return pg_iteration(obj, state, &iset, opts),
        Err(e) => return Err(e),
    };
    let mut d = vec![0.0; obj.dim()];
    for (&c, &v) in sys.coords().iter().zip(&cg.direction) {
        d[c] = v;
    }
    let res = update_cg(obj, state, &d, &iset, &rho, cg.directional, opts)?;
    Ok(StepOutcome {
        x_next: res.x_next,
        objective: res.objective,
        smooth_change: res.smooth_change,
        kind: IterKind::Cg,
        flag: res.flag.into(),
        cg_iters: cg.iterations,
        backtracks: res.backtracks,
    })
}

struct AlphaPolicy {
    mode: AlphaUpdate,
    zeta: f64,
    increases: usize,
    max_increases: usize,
}

impl AlphaPolicy {
    fn new(opts: &SolveOptions) -> Self {
        Self {
            mode: opts.alpha_update,
            zeta: opts.zeta,
            increases: 0,
            max_increases: opts.max_alpha_increases,
        }
    }

    /// `alpha` for `next`, given the outcome that led from `state` to it.
    fn next(&mut self, state: &IterateState, next: &IterateState, step: &StepOutcome) -> f64 {
        match self.mode {
            AlphaUpdate::Basic => match step.kind {
                IterKind::Cg => state.alpha,
                IterKind::Pg => update_alpha_basic(state.alpha, step.flag, self.zeta),
            },
            AlphaUpdate::Adaptive => {
                let dx: Vec<f64> = next.x.iter().zip(&state.x).map(|(a, b)| a - b).collect();
                if math::norm_sq(&dx) == 0.0 {
                    return state.alpha;
                }
                let hat = alpha_estimate(&dx, &state.grad_f, step.smooth_change);
                let allow = self.increases < self.max_increases;
                let next = update_alpha_adaptive(state.alpha, hat, allow);
                if next > state.alpha {
                    self.increases += 1;
                }
                next
            }
        }
    }
}

/// Solves `min f(x) + r(x)` from `x0` without a wall-clock limit.
pub fn solve<L: SmoothLoss>(
    obj: &CompositeObjective<L>,
    x0: &[f64],
    opts: &SolveOptions,
) -> crate::Result<SolveReport> {
    solve_with_clock(obj, x0, opts, &NoClock)
}

/// Like [`solve`], stopping with [`Status::TimeLimit`] once `clock` passes
/// `opts.max_seconds`.
pub fn solve_with_clock<L: SmoothLoss>(
    obj: &CompositeObjective<L>,
    x0: &[f64],
    opts: &SolveOptions,
    clock: &dyn Clock,
) -> crate::Result<SolveReport> {
    opts.validate()?;
    check_dim(obj.dim(), x0.len())?;
    if !math::all_finite(x0) {
        return Err(Error::NonFinite("starting point"));
    }
    let partition = obj.partition();
    let alpha0 = initial_alpha(obj, x0, opts)?;
    let mut state = IterateState::new(obj, x0.to_vec(), alpha0)?;
    let mut dec = decompose(&state, obj, opts);
    let tolerance = opts.tol_rel * dec.chi_cg.max(dec.chi_pg).max(1.0);
    let objective_initial = state.objective;

    let mut phi = if opts.phi_switch {
        opts.phi_switch_initial
    } else {
        opts.phi
    };
    let mut policy = AlphaPolicy::new(opts);
    let mut trace = Vec::new();
    let mut counters = Counters::default();
    let mut iterates = opts.record_iterates.then(|| vec![state.x.clone()]);
    let mut k = 0usize;

    let status = loop {
        if dec.chi_max() <= tolerance {
            break Status::Optimal;
        }
        if k >= opts.max_iter {
            break Status::IterLimit;
        }
        if clock.elapsed_seconds() > opts.max_seconds {
            break Status::TimeLimit;
        }

        let outcome = if dec.chi_pg <= dec.chi_cg {
            cg_iteration(obj, &state, &dec, phi, opts)
        } else {
            let iset = select_subset(&dec.ipg, partition, &state.pg_step, phi);
            pg_iteration(obj, &state, &iset, opts)
        };
        let mut step = match outcome {
            Ok(step) => step,
            Err(Error::LineSearchFailure { .. }) => break Status::LinesearchFailure,
            Err(e) => return Err(e),
        };

        let mut next = IterateState::new(obj, core::mem::take(&mut step.x_next), state.alpha)?;
        let alpha_next = policy.next(&state, &next, &step);
        if alpha_next != state.alpha {
            next.set_alpha(alpha_next, partition);
        }
        // Accumulated from the accepted decreases, so the trace is monotone
        // even when a decrease is below the rounding error of F itself.
        next.objective = step.objective;
        if opts.phi_switch && step.kind == IterKind::Cg && state.f_value - next.f_value <= opts.phi_switch_threshold {
            phi = 1.0;
        }

        counters.record(step.flag);
        trace.push(TraceRecord {
            iter: k,
            kind: step.kind,
            flag: step.flag,
            chi_cg: dec.chi_cg,
            chi_pg: dec.chi_pg,
            alpha: state.alpha,
            objective: step.objective,
            zero_groups: partition.zero_group_count(&next.x),
            cg_iters: step.cg_iters,
            backtracks: step.backtracks,
        });
        if let Some(xs) = iterates.as_mut() {
            xs.push(next.x.clone());
        }
        state = next;
        dec = decompose(&state, obj, opts);
        k += 1;
    };

    Ok(SolveReport {
        zero_groups: partition.zero_group_count(&state.x),
        objective_initial,
        objective_final: state.objective,
        chi_final: dec.chi_max(),
        tolerance,
        alpha0,
        alpha_final: state.alpha,
        iterations: k,
        counters,
        trace,
        iterates,
        status,
        x_final: state.x,
    })
}

/// Full-space proximal gradient: every iteration backtracks along
/// `s(x, alpha)` over all groups, reusing the PG search and the `alpha`
/// policy of `opts`. Stops once `||s|| <= tol_rel * max(||s_0||, 1)`.
pub fn solve_baseline_pg<L: SmoothLoss>(
    obj: &CompositeObjective<L>,
    x0: &[f64],
    opts: &SolveOptions,
) -> crate::Result<SolveReport> {
    solve_baseline_pg_with_clock(obj, x0, opts, &NoClock)
}

pub fn solve_baseline_pg_with_clock<L: SmoothLoss>(
    obj: &CompositeObjective<L>,
    x0: &[f64],
    opts: &SolveOptions,
    clock: &dyn Clock,
) -> crate::Result<SolveReport> {
    opts.validate()?;
    check_dim(obj.dim(), x0.len())?;
    let partition = obj.partition();
    let all = GroupSet::all(partition.num_groups());
    let alpha0 = initial_alpha(obj, x0, opts)?;
    let mut state = IterateState::new(obj, x0.to_vec(), alpha0)?;
    let mut chi = math::norm(&state.pg_step);
    let tolerance = opts.tol_rel * chi.max(1.0);
    let objective_initial = state.objective;
    let mut policy = AlphaPolicy::new(opts);
    let mut trace = Vec::new();
    let mut counters = Counters::default();
    let mut iterates = opts.record_iterates.then(|| vec![state.x.clone()]);
    let mut k = 0usize;

    let status = loop {
        if chi <= tolerance {
            break Status::Optimal;
        }
        if k >= opts.max_iter {
            break Status::IterLimit;
        }
        if clock.elapsed_seconds() > opts.max_seconds {
            break Status::TimeLimit;
        }
        let mut step = match pg_iteration(obj, &state, &all, opts) {
            Ok(step) => step,
            Err(Error::LineSearchFailure { .. }) => break Status::LinesearchFailure,
            Err(e) => return Err(e),
        };
        let mut next = IterateState::new(obj, core::mem::take(&mut step.x_next), state.alpha)?;
        let alpha_next = policy.next(&state, &next, &step);
        if alpha_next != state.alpha {
            next.set_alpha(alpha_next, partition);
        }
        // Accumulated from the accepted decreases, so the trace is monotone
        // even when a decrease is below the rounding error of F itself.
        next.objective = step.objective;
        counters.record(step.flag);
        trace.push(TraceRecord {
            iter: k,
            kind: IterKind::Pg,
            flag: step.flag,
            chi_cg: 0.0,
            chi_pg: chi,
            alpha: state.alpha,
            objective: step.objective,
            zero_groups: partition.zero_group_count(&next.x),
            cg_iters: 0,
            backtracks: step.backtracks,
        });
        if let Some(xs) = iterates.as_mut() {
            xs.push(next.x.clone());
        }
        state = next;
        chi = math::norm(&state.pg_step);
        k += 1;
    };

    Ok(SolveReport {
        zero_groups: partition.zero_group_count(&state.x),
        objective_initial,
        objective_final: state.objective,
        chi_final: chi,
        tolerance,
        alpha0,
        alpha_final: state.alpha,
        iterations: k,
        counters,
        trace,
        iterates,
        status,
        x_final: state.x,
    })
}
