//! Splitting the groups into a second-order subspace and a first-order subspace.
//!
//! A group is a Newton candidate when its block is nonzero, survives the PG
//! update, and is large relative to its own gradient. Candidates that are
//! still small relative to the candidate gradient norm are sent back to the
//! PG subspace. The norms of the PG step on the two subspaces are the
//! optimality measures `chi_cg` and `chi_pg`.

use alloc::vec::Vec;

use crate::group::{GroupPartition, GroupSet};
use crate::math;
use crate::objective::{CompositeObjective, IterateState, SmoothLoss};
use crate::solver::SolveOptions;

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult {
    /// Candidate groups before the small-norm filter.
    pub icg_bar: GroupSet,
    pub ismall: GroupSet,
    pub icg: GroupSet,
    pub ipg: GroupSet,
    pub chi_cg: f64,
    pub chi_pg: f64,
    /// `rho_i` for each group of `icg`, in the same order.
    pub rho: Vec<f64>,
}

impl DecompositionResult {
    pub fn rho_of(&self, group: usize) -> Option<f64> {
        self.icg
            .ids()
            .binary_search(&group)
            .ok()
            .map(|k| self.rho[k])
    }

    pub fn chi_max(&self) -> f64 {
        self.chi_cg.max(self.chi_pg)
    }
}

fn surviving_nonzero(partition: &GroupPartition, i: usize, x: &[f64], s: &[f64]) -> bool {
    let g = partition.group(i);
    g.iter().any(|&j| x[j] != 0.0) && g.iter().any(|&j| x[j] + s[j] != 0.0)
}

/// Candidate groups: `x_i != 0`, `(x + s)_i != 0` and
/// `||x_i|| >= kappa1 ||grad_i (f + r)(x)||`.
pub fn candidate_groups<L: SmoothLoss>(
    state: &IterateState,
    obj: &CompositeObjective<L>,
    kappa1: f64,
) -> GroupSet {
    candidates_with_norms(state, obj, kappa1).0
}

// Returns the candidate set and the gradient norm of each candidate.
fn candidates_with_norms<L: SmoothLoss>(
    state: &IterateState,
    obj: &CompositeObjective<L>,
    kappa1: f64,
) -> (GroupSet, Vec<f64>) {
    let partition = obj.partition();
    let mut set = GroupSet::new();
    let mut norms = Vec::new();
    for i in 0..partition.num_groups() {
        if !surviving_nonzero(partition, i, &state.x, &state.pg_step) {
            continue;
        }
        let gnorm = obj.group_gradient_norm(i, &state.x, &state.grad_f);
        if partition.block_norm(i, &state.x) >= kappa1 * gnorm {
            set.push_sorted(i);
            norms.push(gnorm);
        }
    }
    (set, norms)
}

/// Scale applied to `kappa2` for group `i`: `|G_i| / |I_bar|` when rescaling.
fn kappa2_scale(partition: &GroupPartition, i: usize, bar_coords: usize, rescale: bool) -> f64 {
    if rescale && bar_coords > 0 {
        partition.group(i).len() as f64 / bar_coords as f64
    } else {
        1.0
    }
}

/// Candidates with `||x_i|| < kappa2_hat ||grad_{I_bar}(f + r)(x)||^p`.
pub fn small_groups<L: SmoothLoss>(
    candidates: &GroupSet,
    state: &IterateState,
    obj: &CompositeObjective<L>,
    kappa2: f64,
    p: f64,
    rescale: bool,
) -> GroupSet {
    let partition = obj.partition();
    let norms: Vec<f64> = candidates
        .iter()
        .map(|i| obj.group_gradient_norm(i, &state.x, &state.grad_f))
        .collect();
    small_from_norms(candidates, &norms, &state.x, partition, kappa2, p, rescale)
}

fn small_from_norms(
    candidates: &GroupSet,
    norms: &[f64],
    x: &[f64],
    partition: &GroupPartition,
    kappa2: f64,
    p: f64,
    rescale: bool,
) -> GroupSet {
    let bar_grad = math::sqrt(norms.iter().map(|g| g * g).sum());
    let threshold = math::powf(bar_grad, p);
    let bar_coords = candidates.num_coords(partition);
    let mut small = GroupSet::new();
    for i in candidates.iter() {
        let k2 = kappa2 * kappa2_scale(partition, i, bar_coords, rescale);
        if partition.block_norm(i, x) < k2 * threshold {
            small.push_sorted(i);
        }
    }
    small
}

pub fn decompose<L: SmoothLoss>(
    state: &IterateState,
    obj: &CompositeObjective<L>,
    opts: &SolveOptions,
) -> DecompositionResult {
    let partition = obj.partition();
    let (icg_bar, bar_norms) = candidates_with_norms(state, obj, opts.kappa1);
    let ismall = small_from_norms(
        &icg_bar,
        &bar_norms,
        &state.x,
        partition,
        opts.kappa2,
        opts.p,
        opts.kappa2_rescale,
    );

    let mut icg = GroupSet::new();
    let mut icg_norms = Vec::new();
    for (i, &g) in icg_bar.iter().zip(&bar_norms) {
        if !ismall.contains(i) {
            icg.push_sorted(i);
            icg_norms.push(g);
        }
    }
    let ipg = icg.complement(partition.num_groups());

    let bar_coords = icg_bar.num_coords(partition);
    let cg_grad = math::sqrt(icg_norms.iter().map(|g| g * g).sum());
    let cg_term = math::powf(cg_grad, opts.p);
    let rho = icg
        .iter()
        .zip(&icg_norms)
        .map(|(i, &g)| {
            let k2 = opts.kappa2 * kappa2_scale(partition, i, bar_coords, opts.kappa2_rescale);
            (opts.kappa1 * g).max(k2 * cg_term)
        })
        .collect();

    let chi_cg = icg.norm_of(partition, &state.pg_step);
    let chi_pg = ipg.norm_of(partition, &state.pg_step);
    DecompositionResult {
        icg_bar,
        ismall,
        icg,
        ipg,
        chi_cg,
        chi_pg,
        rho,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::QuadraticLoss;
    use alloc::vec;

    fn theory_opts() -> SolveOptions {
        SolveOptions {
            kappa2_rescale: false,
            ..SolveOptions::default()
        }
    }

    #[test]
    fn zero_point_routes_everything_to_pg() {
        let loss = QuadraticLoss::diagonal(&[1.0, 2.0, 3.0], vec![1.0, 1.0, 1.0]).unwrap();
        let p = GroupPartition::new(vec![vec![0, 1], vec![2]], vec![0.1, 0.1]).unwrap();
        let obj = CompositeObjective::new(loss, p).unwrap();
        let st = IterateState::new(&obj, vec![0.0; 3], 0.5).unwrap();
        assert!(candidate_groups(&st, &obj, 0.1).is_empty());
        let d = decompose(&st, &obj, &theory_opts());
        assert!(d.icg.is_empty());
        assert_eq!(d.ipg.ids(), &[0, 1]);
        assert_eq!(d.chi_cg, 0.0);
        assert!((d.chi_pg - math::norm(&st.pg_step)).abs() < 1e-15);
    }

    #[test]
    fn far_point_with_small_gradient_is_candidate() {
        // f = 0.5||x||^2 - b^T x, lambda = 1, b = (3, 4): at x = (2.5, 3.3)
        // grad(f+r) = x - b + x/||x|| is small while ||x|| ~ 4.14.
        let loss = QuadraticLoss::diagonal(&[1.0, 1.0], vec![3.0, 4.0]).unwrap();
        let p = GroupPartition::new(vec![vec![0, 1]], vec![1.0]).unwrap();
        let obj = CompositeObjective::new(loss, p).unwrap();
        let x = vec![2.5, 3.3];
        let st = IterateState::new(&obj, x.clone(), 1.0).unwrap();
        let nx = math::norm(&x);
        let g = [x[0] - 3.0 + x[0] / nx, x[1] - 4.0 + x[1] / nx];
        assert!(nx >= 0.1 * math::norm(&g));
        assert_eq!(candidate_groups(&st, &obj, 0.1).ids(), &[0]);
    }

    #[test]
    fn killed_group_is_not_candidate() {
        let loss = QuadraticLoss::diagonal(&[1.0, 1.0], vec![0.0, 0.0]).unwrap();
        let p = GroupPartition::new(vec![vec![0], vec![1]], vec![10.0, 0.01]).unwrap();
        let obj = CompositeObjective::new(loss, p).unwrap();
        let st = IterateState::new(&obj, vec![1.0, 1.0], 1.0).unwrap();
        // group 0: ||x - grad|| = 0 <= 10 -> T block zero
        assert_eq!(st.pg_step[0], -1.0);
        let c = candidate_groups(&st, &obj, 1e-6);
        assert!(!c.contains(0));
    }

    #[test]
    fn small_group_filter() {
        // Two singleton groups; group 1 has a tiny block.
        let loss = QuadraticLoss::diagonal(&[1.0, 1.0], vec![2.0, 0.0]).unwrap();
        let p = GroupPartition::new(vec![vec![0], vec![1]], vec![0.5, 1e-6]).unwrap();
        let obj = CompositeObjective::new(loss, p).unwrap();
        let x = vec![1.0, 1e-3];
        let st = IterateState::new(&obj, x, 1.0).unwrap();
        let cands = GroupSet::from_ids(vec![0, 1]);
        // grad(f+r): group0: 1 - 2 + 0.5 = -0.5; group1: 1e-3 + 1e-6
        let g_bar = libm::sqrt(0.25 + (1e-3 + 1e-6) * (1e-3 + 1e-6));
        let thr = 0.5 * g_bar * g_bar;
        assert!(1e-3 < thr && 1.0 > thr);
        let small = small_groups(&cands, &st, &obj, 0.5, 2.0, false);
        assert_eq!(small.ids(), &[1]);
        // zero gradient threshold
        let none = small_groups(&GroupSet::new(), &st, &obj, 0.5, 2.0, false);
        assert!(none.is_empty());
    }

    #[test]
    fn rescale_with_single_full_group_is_noop() {
        let loss = QuadraticLoss::diagonal(&[1.0, 1.0], vec![3.0, 4.0]).unwrap();
        let p = GroupPartition::new(vec![vec![0, 1]], vec![1.0]).unwrap();
        let obj = CompositeObjective::new(loss, p).unwrap();
        let st = IterateState::new(&obj, vec![0.01, 0.02], 1.0).unwrap();
        let c = GroupSet::from_ids(vec![0]);
        assert_eq!(
            small_groups(&c, &st, &obj, 1.0, 1.0, true),
            small_groups(&c, &st, &obj, 1.0, 1.0, false)
        );
    }

    #[test]
    fn chi_at_solution_vanishes() {
        let loss = QuadraticLoss::diagonal(&[1.0, 1.0], vec![3.0, 4.0]).unwrap();
        let p = GroupPartition::new(vec![vec![0, 1]], vec![1.0]).unwrap();
        let obj = CompositeObjective::new(loss, p).unwrap();
        let st = IterateState::new(&obj, vec![2.4, 3.2], 1.0).unwrap();
        let d = decompose(&st, &obj, &theory_opts());
        assert!(d.chi_max() < 1e-14);
    }
}
