//! Reduced-space quadratic model and its truncated conjugate-gradient solve.
//!
//! On the selected groups `I` the model is `m(d) = g^T d + 0.5 d^T H d` with
//! `g = grad_I (f + r)(x)` and `H` the loss Hessian on `I` plus the exact
//! Hessian of the group norms. CG starts from `d = 0`; its first iterate is
//! the Cauchy-like reference direction `-(||g||^2 / g^T H g) g`, and every
//! later iterate keeps `g^T d` below that of the reference and `m(d) <= 0`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dim, Error};
use crate::group::GroupSet;
use crate::math;
use crate::objective::{CompositeObjective, LinearOperator, SmoothLoss};
use crate::regularizer;
use crate::solver::SolveOptions;

/// Gradient and Hessian operator on a set of coordinates.
pub struct ReducedSystem<'a> {
    coords: Vec<usize>,
    grad: Vec<f64>,
    loss_hessian: Box<dyn LinearOperator + 'a>,
    // (lambda, offset into the reduced vector, reduced x block) per group
    reg_blocks: Vec<(f64, usize, Vec<f64>)>,
}

impl<'a> ReducedSystem<'a> {
    /// A system with an arbitrary operator and no regularizer curvature.
    pub fn new(grad: Vec<f64>, hessian: Box<dyn LinearOperator + 'a>) -> crate::Result<Self> {
        check_dim(grad.len(), hessian.dim())?;
        Ok(Self {
            coords: (0..grad.len()).collect(),
            grad,
            loss_hessian: hessian,
            reg_blocks: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn grad(&self) -> &[f64] {
        &self.grad
    }

    /// Full-space coordinates of each reduced entry.
    pub fn coords(&self) -> &[usize] {
        &self.coords
    }

    /// `out = H v`
    pub fn hvp(&self, v: &[f64], out: &mut [f64]) {
        self.loss_hessian.apply(v, out);
        for (lambda, offset, xb) in &self.reg_blocks {
            let len = xb.len();
            regularizer::add_hessian_block(
                *lambda,
                xb,
                &v[*offset..offset + len],
                &mut out[*offset..offset + len],
            );
        }
    }

    /// `m(d) = g^T d + 0.5 d^T H d`
    pub fn model(&self, d: &[f64]) -> f64 {
        let mut hd = vec![0.0; d.len()];
        self.hvp(d, &mut hd);
        math::dot(&self.grad, d) + 0.5 * math::dot(d, &hd)
    }
}

impl LinearOperator for ReducedSystem<'_> {
    fn dim(&self) -> usize {
        self.grad.len()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        self.hvp(v, out)
    }
}

/// Builds `g = grad_I (f + r)(x)` and the operator `H_I` for the groups in
/// `iset`. Every group must have a nonzero block at `x`.
pub fn hessian_model<'a, L: SmoothLoss>(
    obj: &'a CompositeObjective<L>,
    x: &[f64],
    iset: &GroupSet,
) -> crate::Result<ReducedSystem<'a>> {
    check_dim(obj.dim(), x.len())?;
    let grad_f = obj.smooth_gradient(x);
    hessian_model_with_gradient(obj, x, &grad_f, iset)
}

pub(crate) fn hessian_model_with_gradient<'a, L: SmoothLoss>(
    obj: &'a CompositeObjective<L>,
    x: &[f64],
    grad_f: &[f64],
    iset: &GroupSet,
) -> crate::Result<ReducedSystem<'a>> {
    let partition = obj.partition();
    let coords = iset.coords(partition);
    let mut grad = Vec::with_capacity(coords.len());
    let mut reg_blocks = Vec::with_capacity(iset.len());
    for i in iset.iter() {
        let xb = partition.gather(i, x);
        let nrm = math::norm(&xb);
        if nrm == 0.0 {
            return Err(Error::NotDifferentiable { group: i });
        }
        let lambda = partition.weight(i);
        let offset = grad.len();
        for (&j, &xj) in partition.group(i).iter().zip(&xb) {
            grad.push(grad_f[j] + lambda * xj / nrm);
        }
        reg_blocks.push((lambda, offset, xb));
    }
    let loss_hessian = obj.loss().reduced_hessian(x, &coords);
    Ok(ReducedSystem {
        coords,
        grad,
        loss_hessian,
        reg_blocks,
    })
}

/// `-(||g||^2 / g^T H g) g`
pub fn reference_direction(sys: &ReducedSystem<'_>) -> crate::Result<Vec<f64>> {
    let g = sys.grad();
    let mut hg = vec![0.0; g.len()];
    sys.hvp(g, &mut hg);
    let curvature = math::dot(g, &hg);
    if curvature.is_nan() || curvature <= 0.0 {
        return Err(Error::NonPositiveCurvature { curvature });
    }
    let beta = math::norm_sq(g) / curvature;
    Ok(g.iter().map(|gi| -beta * gi).collect())
}

/// Why CG stopped. When several rules fire on the same iterate the first
/// listed wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CgStop {
    /// Residual dropped below the relative target.
    ResidualTarget,
    /// Iterate norm exceeded the trust bound.
    StepTooBig,
    /// Iteration count reached the subspace dimension.
    DimensionCap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub direction: Vec<f64>,
    /// `||H d + g||`
    pub residual_norm: f64,
    pub iterations: usize,
    pub stop_reason: CgStop,
    /// Whether `||H d + g|| <= mu ||g||^q` holds on exit.
    pub forcing_satisfied: bool,
    /// `g^T d`
    pub directional: f64,
    /// `m(d)`
    pub model_value: f64,
}

/// Truncated CG on `H d = -g` from `d = 0`.
///
/// Stops on the first iterate `d_j` (`j >= 1`) for which one of
/// - `||H d_j + g|| <= max(min(c t0, t0^e), floor)` with `t0 = ||g||`,
/// - `||d_j|| >= trust * min(1, grad_norm)`,
/// - `j = dim`
///
/// holds; `c`, `e`, `floor` and `trust` come from the options.
pub fn cg_direction(
    sys: &ReducedSystem<'_>,
    grad_norm: f64,
    opts: &SolveOptions,
) -> crate::Result<CgOutcome> {
    let g = sys.grad();
    let n = g.len();
    let t0 = math::norm(g);
    if n == 0 || t0 == 0.0 {
        return Err(Error::InvalidOption("CG needs a nonzero reduced gradient"));
    }
    let target = (opts.cg_rel_factor * t0)
        .min(math::powf(t0, opts.cg_power))
        .max(opts.cg_abs_floor);
    let radius = opts.cg_trust_factor * grad_norm.min(1.0);

    let mut d = vec![0.0; n];
    let mut r = g.to_vec();
    let mut p: Vec<f64> = r.iter().map(|v| -v).collect();
    let mut hp = vec![0.0; n];
    let mut rr = math::norm_sq(&r);
    let mut j = 0usize;
    #[cfg(debug_assertions)]
    let (reference_gd, mut last_model) = {
        let dr = reference_direction(sys)?;
        (math::dot(g, &dr), 0.0f64)
    };

    let stop = loop {
        sys.hvp(&p, &mut hp);
        let php = math::dot(&p, &hp);
        if php.is_nan() || php <= 0.0 {
            return Err(Error::NonPositiveCurvature { curvature: php });
        }
        let step = rr / php;
        math::axpy(step, &p, &mut d);
        math::axpy(step, &hp, &mut r);
        j += 1;
        let rr_next = math::norm_sq(&r);

        #[cfg(debug_assertions)]
        {
            let gd = math::dot(g, &d);
            let m = sys.model(&d);
            let scale = 1e-8 * (gd.abs() + reference_gd.abs() + 1e-300);
            debug_assert!(gd <= reference_gd + scale, "CG iterate lost descent");
            debug_assert!(m <= last_model + 1e-8 * (m.abs() + 1e-300), "CG model increased");
            last_model = m;
        }

        if math::sqrt(rr_next) <= target {
            break CgStop::ResidualTarget;
        }
        if math::norm(&d) >= radius {
            break CgStop::StepTooBig;
        }
        if j >= n {
            break CgStop::DimensionCap;
        }
        let beta = rr_next / rr;
        rr = rr_next;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = -ri + beta * *pi;
        }
    };

    // Recursive residual drifts from the true one; report the true one.
    let mut hd = vec![0.0; n];
    sys.hvp(&d, &mut hd);
    let residual: Vec<f64> = hd.iter().zip(g).map(|(a, b)| a + b).collect();
    let residual_norm = math::norm(&residual);
    let directional = math::dot(g, &d);
    let model_value = directional + 0.5 * math::dot(&d, &hd);
    Ok(CgOutcome {
        forcing_satisfied: residual_norm <= opts.mu * math::powf(t0, opts.q),
        direction: d,
        residual_norm,
        iterations: j,
        stop_reason: stop,
        directional,
        model_value,
    })
}
