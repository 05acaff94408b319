use farsa_core::{
    solve, solve_baseline_pg, AlphaInit, AlphaUpdate, CompositeObjective, GroupPartition, QuadraticLoss,
    SolveOptions, SolveReport, Status, StepFlag,
};
use proptest::prelude::*;

fn single_group(d: [f64; 2], b: [f64; 2], lambda: f64) -> CompositeObjective<QuadraticLoss> {
    let loss = QuadraticLoss::diagonal(&d, b.to_vec()).unwrap();
    let p = GroupPartition::new(vec![vec![0, 1]], vec![lambda]).unwrap();
    CompositeObjective::new(loss, p).unwrap()
}

/// For `f = 0.5 sum d_j x_j^2 - b^T x` plus `lambda ||x||`, a nonzero
/// minimizer has `x_j = b_j / (d_j + lambda / t)` with `t = ||x||`, so `t`
/// solves `sum (b_j t / (d_j t + lambda))^2 = t^2`; bisect on `t`.
fn single_group_oracle(d: [f64; 2], b: [f64; 2], lambda: f64) -> [f64; 2] {
    let g = |t: f64| {
        let s: f64 = (0..2).map(|j| (b[j] / (d[j] * t + lambda)).powi(2)).sum();
        s.sqrt() - 1.0
    };
    let (mut lo, mut hi) = (1e-12, 1e6);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    [b[0] / (d[0] + lambda / t), b[1] / (d[1] + lambda / t)]
}

fn kkt_residual(obj: &CompositeObjective<QuadraticLoss>, x: &[f64]) -> f64 {
    let grad = obj.smooth_gradient(x);
    let p = obj.partition();
    let mut worst = 0.0f64;
    for i in 0..p.num_groups() {
        let lam = p.weight(i);
        let xn = p.block_norm(i, x);
        let gb = p.gather(i, &grad);
        let r = if xn == 0.0 {
            (gb.iter().map(|t| t * t).sum::<f64>().sqrt() - lam).max(0.0)
        } else {
            let xb = p.gather(i, x);
            gb.iter()
                .zip(&xb)
                .map(|(g, xj)| (g + lam * xj / xn).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        worst = worst.max(r);
    }
    worst
}

#[test]
fn two_dimensional_single_group_matches_oracle() {
    let (d, b, lambda) = ([1.0, 4.0], [3.0, -2.0], 0.7);
    let obj = single_group(d, b, lambda);
    let want = single_group_oracle(d, b, lambda);
    for report in [
        solve(&obj, &[0.0, 0.0], &SolveOptions::default()).unwrap(),
        solve(&obj, &[5.0, 5.0], &SolveOptions::theory()).unwrap(),
        solve_baseline_pg(&obj, &[0.0, 0.0], &SolveOptions { tol_rel: 1e-10, ..SolveOptions::default() })
            .unwrap(),
    ] {
        assert_eq!(report.status, Status::Optimal);
        for j in 0..2 {
            assert!((report.x_final[j] - want[j]).abs() < 1e-6, "{:?} vs {want:?}", report.x_final);
        }
    }
}

#[test]
fn large_lambda_gives_zero() {
    // ||grad f(0)|| = ||b|| = 5
    let obj = single_group([1.0, 2.0], [3.0, 4.0], 5.5);
    for x0 in [[0.0, 0.0], [1.0, -3.0]] {
        let r = solve(&obj, &x0, &SolveOptions::default()).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert_eq!(r.x_final, vec![0.0, 0.0]);
        assert_eq!(r.zero_groups, 1);
        let r = solve_baseline_pg(&obj, &x0, &SolveOptions::default()).unwrap();
        assert_eq!(r.x_final, vec![0.0, 0.0]);
    }
}

#[test]
fn starting_at_a_solution_stops_immediately() {
    let obj = single_group([1.0, 2.0], [3.0, 4.0], 5.5);
    for r in [
        solve(&obj, &[0.0, 0.0], &SolveOptions::default()).unwrap(),
        solve_baseline_pg(&obj, &[0.0, 0.0], &SolveOptions::default()).unwrap(),
    ] {
        assert_eq!(r.iterations, 0);
        assert_eq!(r.status, Status::Optimal);
        assert!(r.trace.is_empty());
    }
}

#[test]
fn iteration_limit_is_reported() {
    let obj = single_group([1.0, 100.0], [3.0, 4.0], 0.1);
    let opts = SolveOptions {
        max_iter: 1,
        tol_rel: 1e-15,
        ..SolveOptions::default()
    };
    let r = solve_baseline_pg(&obj, &[0.0, 0.0], &opts).unwrap();
    assert_eq!(r.status, Status::IterLimit);
    assert_eq!(r.iterations, 1);
}

#[test]
fn invalid_inputs_are_rejected() {
    let obj = single_group([1.0, 2.0], [3.0, 4.0], 1.0);
    assert!(solve(&obj, &[0.0], &SolveOptions::default()).is_err());
    assert!(solve(&obj, &[f64::NAN, 0.0], &SolveOptions::default()).is_err());
    let bad = SolveOptions {
        eta: 1.5,
        ..SolveOptions::default()
    };
    assert!(solve(&obj, &[0.0, 0.0], &bad).is_err());
}

fn check_run(obj: &CompositeObjective<QuadraticLoss>, x0: &[f64], r: &SolveReport) -> Result<(), TestCaseError> {
    prop_assert_eq!(r.status, Status::Optimal);
    prop_assert_eq!(r.counters.total(), r.iterations);
    let mut prev = r.objective_initial;
    let mut zeros = obj.partition().zero_group_count(x0);
    for t in &r.trace {
        prop_assert!(t.objective <= prev);
        if t.flag == StepFlag::NewZero {
            prop_assert!(t.zero_groups > zeros);
        }
        prev = t.objective;
        zeros = t.zero_groups;
    }
    let scale = 1.0 + obj.smooth_gradient(x0).iter().map(|g| g.abs()).fold(0.0, f64::max);
    prop_assert!(kkt_residual(obj, &r.x_final) <= 1e-4 * scale, "kkt {}", kkt_residual(obj, &r.x_final));
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solvers_agree_on_random_quadratics(
        sizes in proptest::collection::vec(1usize..4, 1..6),
        diag in proptest::collection::vec(0.5f64..20.0, 15),
        b in proptest::collection::vec(-3.0f64..3.0, 15),
        x0 in proptest::collection::vec(-2.0f64..2.0, 15),
        seed in 0u64..1000,
        lambda in 0.05f64..2.0,
        basic in any::<bool>(),
    ) {
        let n: usize = sizes.iter().sum();
        let (diag, b, x0) = (&diag[..n], b[..n].to_vec(), &x0[..n]);
        let mut start = 0;
        let groups: Vec<Vec<usize>> = sizes.iter().map(|&s| { let g = (start..start + s).collect(); start += s; g }).collect();
        let p = GroupPartition::new(groups, vec![lambda; sizes.len()]).unwrap();
        let obj = CompositeObjective::new(QuadraticLoss::diagonal(diag, b).unwrap(), p).unwrap();
        let opts = SolveOptions {
            tol_rel: 1e-9,
            alpha_update: if basic { AlphaUpdate::Basic } else { AlphaUpdate::Adaptive },
            alpha_init: if basic { AlphaInit::Fixed(1.0) } else { AlphaInit::Estimate { seed } },
            ..SolveOptions::default()
        };
        let a = solve(&obj, x0, &opts).unwrap();
        let b = solve_baseline_pg(&obj, x0, &opts).unwrap();
        check_run(&obj, x0, &a)?;
        check_run(&obj, x0, &b)?;
        prop_assert!((a.objective_final - b.objective_final).abs() <= 1e-7 * (1.0 + a.objective_final.abs()));
        prop_assert_eq!(obj.partition().zero_pattern(&a.x_final), obj.partition().zero_pattern(&b.x_final));
    }
}
