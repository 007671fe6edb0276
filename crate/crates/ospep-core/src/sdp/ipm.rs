//! Homogeneous self-dual interior-point method for small dense conic
//! programs over orthant x PSD cones.
//!
//! Mehrotra predictor-corrector with Nesterov-Todd scaling. The homogeneous
//! embedding carries `(x, y, z, tau, kappa)`; an optimal solution is read off
//! when `tau` dominates, a primal or dual infeasibility certificate when
//! `kappa` does. Dense linear algebra throughout; problems here have at most
//! a 6x6 PSD block and ~15 rows, so factorizations are microscopic.

use nalgebra::{Cholesky, DMatrix, DVector};

use super::conic::{ConeLayout, NtScaling};
use crate::scalar::{cst, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ConicStatus {
    Optimal,
    /// `A x = b, x in K` has no solution (Farkas certificate in `y, z`).
    PrimalInfeasible,
    /// The dual is infeasible, i.e. the primal objective is unbounded below
    /// (certificate ray in `x`).
    DualInfeasible,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub(crate) struct ConicProblem<T> {
    pub a: DMatrix<T>,
    pub b: DVector<T>,
    pub c: DVector<T>,
    pub cones: ConeLayout,
}

#[derive(Debug, Clone)]
pub(crate) struct ConicSolution<T> {
    pub status: ConicStatus,
    /// De-homogenized primal point (or unboundedness ray).
    pub x: DVector<T>,
    /// De-homogenized dual point (or infeasibility certificate).
    pub y: DVector<T>,
    pub z: DVector<T>,
    pub pobj: T,
    pub dobj: T,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct ConicSettings<T> {
    pub feas_tol: T,
    pub gap_tol: T,
    pub max_iters: usize,
}

#[derive(Clone)]
struct Iterate<T> {
    x: DVector<T>,
    y: DVector<T>,
    z: DVector<T>,
    tau: T,
    kappa: T,
}

struct Metrics<T> {
    pres: T,
    dres: T,
    rel_gap: T,
    pobj: T,
    dobj: T,
}

pub(crate) fn solve_conic<T: Scalar>(
    prob: &ConicProblem<T>,
    settings: &ConicSettings<T>,
) -> ConicSolution<T> {
    let m = prob.a.nrows();
    let nv = prob.a.ncols();
    debug_assert_eq!(nv, prob.cones.vec_len());
    let nu = cst::<T>((prob.cones.barrier_degree() + 1) as f64);
    let e = prob.cones.identity::<T>();

    let mut it = Iterate {
        x: e.clone(),
        y: DVector::zeros(m),
        z: e.clone(),
        tau: T::one(),
        kappa: T::one(),
    };

    let norm_b = T::one() + prob.b.norm();
    let norm_c = T::one() + prob.c.norm();
    let step_frac = cst::<T>(0.99);

    let mut best: Option<(T, ConicSolution<T>)> = None;
    let mut best_raw: Option<(T, Iterate<T>)> = None;
    let mut iterations = 0;

    for iter in 0..settings.max_iters {
        iterations = iter;
        // Homogeneous residuals.
        let rx = &prob.a * &it.x - &prob.b * it.tau;
        let rz = -(prob.a.transpose() * &it.y) - &it.z + &prob.c * it.tau;
        let rtau = prob.b.dot(&it.y) - prob.c.dot(&it.x) - it.kappa;

        let metrics = dehomogenized_metrics(prob, &it, norm_b, norm_c);
        let score = metrics.pres.max(metrics.dres).max(metrics.rel_gap);
        let candidate = make_solution(&it, &metrics, ConicStatus::NumericalFailure, iter);
        if best.as_ref().is_none_or(|(s, _)| score < *s) {
            best = Some((score, candidate));
            best_raw = Some((score, it.clone()));
        }

        if std::env::var("OSPEP_IPM_TRACE").is_ok() {
            eprintln!(
                "iter {iter}: pres={:?} dres={:?} gap={:?} tau={:?} kappa={:?}",
                metrics.pres, metrics.dres, metrics.rel_gap, it.tau, it.kappa
            );
        }
        if metrics.pres <= settings.feas_tol
            && metrics.dres <= settings.feas_tol
            && metrics.rel_gap <= settings.gap_tol
        {
            return make_solution(&it, &metrics, ConicStatus::Optimal, iter);
        }

        if let Some(sol) = infeasibility_certificate(prob, &it, settings, iter) {
            return sol;
        }

        let scaling = match NtScaling::compute(&prob.cones, &it.x, &it.z) {
            Some(s) => s,
            None => break,
        };
        let mu = (it.x.dot(&it.z) + it.tau * it.kappa) / nu;

        // Shared KKT pieces for this iteration.
        let kkt = match KktFactors::build(prob, &scaling, it.tau, it.kappa) {
            Some(k) => k,
            None => break,
        };

        // Predictor (affine direction): sigma = 0, full residual target.
        let lam_sq = scaling.lambda_prod(&scaling.lambda);
        let rhs_aff = NewtonRhs {
            r1: -&rx,
            r2: -&rz,
            r3: -rtau,
            r4: -&lam_sq,
            r5: -(it.tau * it.kappa),
        };
        let aff = kkt.solve_refined(prob, &scaling, &it, &rhs_aff);

        let alpha_aff = step_length(&scaling, &it, &aff, T::one());

        // Mehrotra centering parameter.
        let mix = |cur: T, d: T| cur + alpha_aff * d;
        let gap_aff = {
            let xa = &it.x + &aff.dx * alpha_aff;
            let za = &it.z + &aff.dz * alpha_aff;
            (xa.dot(&za) + mix(it.tau, aff.dtau) * mix(it.kappa, aff.dkappa)) / nu
        };
        let ratio = (gap_aff / mu).max(T::zero());
        // Cap the centering weight: eta = 1 - sigma is the residual-reduction
        // factor and must stay bounded away from zero or feasibility stalls.
        let sigma = (ratio * ratio * ratio).min(cst::<T>(0.9));

        // Combined direction with second-order correction.
        let dx_aff_scaled = scaling.apply_winv_t(&aff.dx);
        let dz_aff_scaled = scaling.apply_w(&aff.dz);
        let correction = scaling.jordan(&dx_aff_scaled, &dz_aff_scaled);
        let mut ds = -&lam_sq - correction;
        let sig_mu = sigma * mu;
        for i in 0..prob.cones.orthant {
            ds[i] += sig_mu;
        }
        {
            // Add sigma*mu on PSD diagonals.
            let mut off = prob.cones.orthant;
            for &n in &prob.cones.psd {
                let mut k = 0;
                for j in 0..n {
                    for i in 0..=j {
                        if i == j {
                            ds[off + k] += sig_mu;
                        }
                        k += 1;
                    }
                }
                off += super::conic::svec_len(n);
            }
        }
        let dkappa_rhs = sig_mu - it.tau * it.kappa - aff.dtau * aff.dkappa;
        let eta = T::one() - sigma;
        let rhs_comb = NewtonRhs {
            r1: -(&rx * eta),
            r2: -(&rz * eta),
            r3: -(rtau * eta),
            r4: ds,
            r5: dkappa_rhs,
        };
        let dir = kkt.solve_refined(prob, &scaling, &it, &rhs_comb);

        let alpha = step_length(&scaling, &it, &dir, step_frac);
        if alpha <= cst::<T>(1e-14) {
            break;
        }

        // Near the optimal face the Newton direction can pick up a large
        // component along the homogeneous ray and wreck the de-homogenized
        // residuals; halve the step until the score stays controlled, and if
        // no fraction helps, take a pure centering step instead.
        let advance = |base: &Iterate<T>, d: &Direction<T>, step: T| Iterate {
            x: &base.x + &d.dx * step,
            y: &base.y + &d.dy * step,
            z: &base.z + &d.dz * step,
            tau: base.tau + step * d.dtau,
            kappa: base.kappa + step * d.dkappa,
        };
        let scored = |cand: Iterate<T>| {
            let m = dehomogenized_metrics(prob, &cand, norm_b, norm_c);
            let s = m.pres.max(m.dres).max(m.rel_gap);
            (s, cand)
        };
        let mut step = alpha;
        let mut accepted: Option<Iterate<T>> = None;
        let mut fallback: Option<(T, Iterate<T>)> = None;
        for _ in 0..4 {
            let (cand_score, cand) = scored(advance(&it, &dir, step));
            if cand_score <= score * cst::<T>(2.0) {
                accepted = Some(cand);
                break;
            }
            if fallback.as_ref().is_none_or(|(s, _)| cand_score < *s) {
                fallback = Some((cand_score, cand));
            }
            step *= cst::<T>(0.5);
        }
        it = match accepted {
            Some(cand) => cand,
            None => {
                // Centering direction: leave the residuals alone, push the
                // complementarity products toward mu.
                let mut r4 = -&lam_sq;
                let nvars = r4.len();
                let e = prob.cones.identity::<T>();
                for i in 0..nvars {
                    r4[i] += mu * e[i];
                }
                let rhs_center = NewtonRhs {
                    r1: DVector::zeros(m),
                    r2: DVector::zeros(prob.a.ncols()),
                    r3: T::zero(),
                    r4,
                    r5: mu - it.tau * it.kappa,
                };
                let cdir = kkt.solve_refined(prob, &scaling, &it, &rhs_center);
                let calpha = step_length(&scaling, &it, &cdir, step_frac);
                let (center_score, center) = scored(advance(&it, &cdir, calpha));
                match fallback {
                    Some((fs, fcand)) if fs < center_score => fcand,
                    _ => center,
                }
            }
        };

        // The embedding is scale-invariant; renormalize when tau drifts.
        if it.tau > cst::<T>(4.0) || it.tau < cst::<T>(0.25) {
            let inv = T::one() / it.tau;
            it.x *= inv;
            it.y *= inv;
            it.z *= inv;
            it.kappa *= inv;
            it.tau = T::one();
        }
    }

    // Ran out of iterations or hit a numerical wall. Restart from the best
    // iterate and take strictly monotone damped Newton steps; the main loop
    // can bounce off the optimal face along the homogeneous ray, while this
    // phase only ever improves the de-homogenized residuals.
    if let Some((score0, start)) = &best_raw {
        let mut cur = start.clone();
        let mut score = *score0;
        for iter in 0..30 {
            let metrics = dehomogenized_metrics(prob, &cur, norm_b, norm_c);
            if std::env::var("OSPEP_IPM_TRACE").is_ok() {
                eprintln!(
                    "polish {iter}: pres={:?} dres={:?} gap={:?}",
                    metrics.pres, metrics.dres, metrics.rel_gap
                );
            }
            if metrics.pres <= settings.feas_tol
                && metrics.dres <= settings.feas_tol
                && metrics.rel_gap <= settings.gap_tol
            {
                return make_solution(&cur, &metrics, ConicStatus::Optimal, iterations + iter);
            }
            let Some(scaling) = NtScaling::compute(&prob.cones, &cur.x, &cur.z) else {
                break;
            };
            let Some(kkt) = KktFactors::build(prob, &scaling, cur.tau, cur.kappa) else {
                break;
            };
            let mu = (cur.x.dot(&cur.z) + cur.tau * cur.kappa) / nu;
            let rx = &prob.a * &cur.x - &prob.b * cur.tau;
            let rz = -(prob.a.transpose() * &cur.y) - &cur.z + &prob.c * cur.tau;
            let rtau = prob.b.dot(&cur.y) - prob.c.dot(&cur.x) - cur.kappa;
            let sigma = cst::<T>(0.3);
            let eta = T::one() - sigma;
            let lam_sq = scaling.lambda_prod(&scaling.lambda);
            let mut r4 = -lam_sq;
            for (i, ei) in e.iter().enumerate() {
                r4[i] += sigma * mu * *ei;
            }
            let rhs = NewtonRhs {
                r1: -(&rx * eta),
                r2: -(&rz * eta),
                r3: -(rtau * eta),
                r4,
                r5: sigma * mu - cur.tau * cur.kappa,
            };
            let dir = kkt.solve_fixed_tau(prob, &scaling, &cur, &rhs);
            let alpha_max = step_length(&scaling, &cur, &dir, cst::<T>(0.99));
            let mut step = alpha_max;
            let mut improved = false;
            for _ in 0..8 {
                let cand = Iterate {
                    x: &cur.x + &dir.dx * step,
                    y: &cur.y + &dir.dy * step,
                    z: &cur.z + &dir.dz * step,
                    tau: cur.tau + step * dir.dtau,
                    kappa: cur.kappa + step * dir.dkappa,
                };
                let cm = dehomogenized_metrics(prob, &cand, norm_b, norm_c);
                let cs = cm.pres.max(cm.dres).max(cm.rel_gap);
                if cs < score {
                    cur = cand;
                    score = cs;
                    improved = true;
                    break;
                }
                step *= cst::<T>(0.5);
            }
            if !improved {
                break;
            }
            let metrics = dehomogenized_metrics(prob, &cur, norm_b, norm_c);
            let candidate =
                make_solution(&cur, &metrics, ConicStatus::NumericalFailure, iterations + iter);
            best = Some((score, candidate));
        }
    }

    // Final certificate check, then return the best iterate seen.
    if let Some(sol) = infeasibility_certificate(prob, &it, settings, iterations) {
        return sol;
    }
    best.map(|(_, s)| s).unwrap_or_else(|| ConicSolution {
        status: ConicStatus::NumericalFailure,
        x: DVector::zeros(nv),
        y: DVector::zeros(m),
        z: DVector::zeros(nv),
        pobj: T::zero(),
        dobj: T::zero(),
        iterations,
    })
}

struct Direction<T> {
    dx: DVector<T>,
    dy: DVector<T>,
    dz: DVector<T>,
    dtau: T,
    dkappa: T,
}

/// Reduced KKT system `A H A' = (A W') (A W')'`, solved through a QR
/// factorization of `W A'` (half the condition number of the normal
/// equations), with a ridge-regularized Cholesky fallback.
struct KktFactors<T: Scalar> {
    solver: NormalSolver<T>,
    /// `M^-1 (A H c + b)`
    w_tau: DVector<T>,
    /// `b - A H c`
    bmahc: DVector<T>,
    denom: T,
}

enum NormalSolver<T: Scalar> {
    /// Upper-triangular factor `R` with `A H A' = R' R`.
    Qr(DMatrix<T>),
    Chol(Cholesky<T, nalgebra::Dyn>),
}

impl<T: Scalar> NormalSolver<T> {
    fn solve(&self, rhs: &DVector<T>) -> DVector<T> {
        match self {
            NormalSolver::Qr(r) => {
                let y = r
                    .transpose()
                    .solve_lower_triangular(rhs)
                    .expect("triangular factor validated at build time");
                r.solve_upper_triangular(&y)
                    .expect("triangular factor validated at build time")
            }
            NormalSolver::Chol(c) => c.solve(rhs),
        }
    }
}

/// Right-hand side of the Newton system
/// `A dx - b dtau = r1`, `-A'dy - dz + c dtau = r2`,
/// `b'dy - c'dx - dkappa = r3`, `lam o (W^-T dx + W dz) = r4`,
/// `kappa dtau + tau dkappa = r5`.
struct NewtonRhs<T> {
    r1: DVector<T>,
    r2: DVector<T>,
    r3: T,
    r4: DVector<T>,
    r5: T,
}

impl<T: Scalar> KktFactors<T> {
    fn build(
        prob: &ConicProblem<T>,
        scaling: &NtScaling<T>,
        tau: T,
        kappa: T,
    ) -> Option<Self> {
        let m = prob.a.nrows();
        // B' = W A' column by column; A H A' = B B'.
        let mut bt = DMatrix::zeros(prob.a.ncols(), m);
        for i in 0..m {
            let row = prob.a.row(i).transpose();
            bt.set_column(i, &scaling.apply_w(&row));
        }
        let qr = bt.clone().qr();
        let r = qr.r();
        let min_diag = r.diagonal().abs().min();
        let max_diag = r.diagonal().abs().max();
        let solver = if min_diag > max_diag * cst::<T>(1e-15) {
            NormalSolver::Qr(r)
        } else {
            // Rank-deficient projection: fall back to ridge Cholesky.
            let mut mmat = bt.transpose() * &bt;
            mmat = (&mmat + mmat.transpose()) * cst::<T>(0.5);
            let scale = mmat.diagonal().amax().max(T::one());
            let mut ridge = scale * cst::<T>(1e-14);
            loop {
                let mut reg = mmat.clone();
                for i in 0..m {
                    reg[(i, i)] += ridge;
                }
                match Cholesky::new(reg) {
                    Some(c) => break NormalSolver::Chol(c),
                    None => {
                        ridge *= cst::<T>(100.0);
                        if ridge > scale {
                            return None;
                        }
                    }
                }
            }
        };
        let hc = scaling.apply_h(&prob.c);
        let rhs_tau = &prob.a * &hc + &prob.b;
        let w_tau = solver.solve(&rhs_tau);
        let bmahc = &prob.b - &prob.a * &hc;
        let denom = bmahc.dot(&w_tau) + prob.c.dot(&hc) + kappa / tau;
        Some(KktFactors { solver, w_tau, bmahc, denom })
    }

    fn solve_once(
        &self,
        prob: &ConicProblem<T>,
        scaling: &NtScaling<T>,
        it: &Iterate<T>,
        rhs: &NewtonRhs<T>,
    ) -> Direction<T> {
        let gs = scaling.lambda_div(&rhs.r4);
        let wt_gs = scaling.apply_wt(&gs);
        let h_r2 = scaling.apply_h(&rhs.r2);

        // (A H A') dy - (A H c + b) dtau = r1 - A W' gs - A H r2
        let rhs1 = &rhs.r1 - &prob.a * &wt_gs - &prob.a * &h_r2;
        let u = self.solver.solve(&rhs1);

        // (b - A H c)' dy + (c' H c + kappa/tau) dtau
        //   = r3 + c' W' gs + c' H r2 + r5 / tau
        let rhs2 = rhs.r3 + prob.c.dot(&wt_gs) + prob.c.dot(&h_r2) + rhs.r5 / it.tau;
        let dtau = (rhs2 - self.bmahc.dot(&u)) / self.denom;

        let dy = &u + &self.w_tau * dtau;
        let dz = -(prob.a.transpose() * &dy) + &prob.c * dtau - &rhs.r2;
        let dx = wt_gs - scaling.apply_h(&dz);
        let dkappa = (rhs.r5 - it.kappa * dtau) / it.tau;
        Direction { dx, dy, dz, dtau, dkappa }
    }

    /// Newton step with `dtau` pinned to zero: the plain infeasible
    /// primal-dual direction on the de-homogenized triple. Avoids the
    /// tau-elimination denominator, which collapses near degenerate faces.
    fn solve_fixed_tau(
        &self,
        prob: &ConicProblem<T>,
        scaling: &NtScaling<T>,
        it: &Iterate<T>,
        rhs: &NewtonRhs<T>,
    ) -> Direction<T> {
        let mut dir = self.solve_fixed_tau_once(prob, scaling, it, rhs);
        for _ in 0..2 {
            let r1 = &rhs.r1 - &prob.a * &dir.dx;
            let r2 = &rhs.r2 - (-(prob.a.transpose() * &dir.dy) - &dir.dz);
            let applied = scaling
                .lambda_prod(&(scaling.apply_winv_t(&dir.dx) + scaling.apply_w(&dir.dz)));
            let r4 = &rhs.r4 - applied;
            let res_norm = r1.norm().max(r2.norm()).max(r4.norm());
            if res_norm <= cst::<T>(1e-15) {
                break;
            }
            let res = NewtonRhs { r1, r2, r3: T::zero(), r4, r5: T::zero() };
            let corr = self.solve_fixed_tau_once(prob, scaling, it, &res);
            dir.dx += corr.dx;
            dir.dy += corr.dy;
            dir.dz += corr.dz;
        }
        dir.dkappa = rhs.r5 / it.tau;
        dir
    }

    fn solve_fixed_tau_once(
        &self,
        prob: &ConicProblem<T>,
        scaling: &NtScaling<T>,
        it: &Iterate<T>,
        rhs: &NewtonRhs<T>,
    ) -> Direction<T> {
        let gs = scaling.lambda_div(&rhs.r4);
        let wt_gs = scaling.apply_wt(&gs);
        let h_r2 = scaling.apply_h(&rhs.r2);
        let rhs1 = &rhs.r1 - &prob.a * &wt_gs - &prob.a * &h_r2;
        let dy = self.solver.solve(&rhs1);
        let dz = -(prob.a.transpose() * &dy) - &rhs.r2;
        let dx = wt_gs - scaling.apply_h(&dz);
        let dkappa = rhs.r5 / it.tau;
        Direction { dx, dy, dz, dtau: T::zero(), dkappa }
    }

    /// Residual of the Newton equations at a candidate direction.
    fn residual(
        &self,
        prob: &ConicProblem<T>,
        scaling: &NtScaling<T>,
        it: &Iterate<T>,
        rhs: &NewtonRhs<T>,
        dir: &Direction<T>,
    ) -> NewtonRhs<T> {
        let r1 = &rhs.r1 - (&prob.a * &dir.dx - &prob.b * dir.dtau);
        let r2 = &rhs.r2
            - (-(prob.a.transpose() * &dir.dy) - &dir.dz + &prob.c * dir.dtau);
        let r3 = rhs.r3 - (prob.b.dot(&dir.dy) - prob.c.dot(&dir.dx) - dir.dkappa);
        let applied = scaling
            .lambda_prod(&(scaling.apply_winv_t(&dir.dx) + scaling.apply_w(&dir.dz)));
        let r4 = &rhs.r4 - applied;
        let r5 = rhs.r5 - (it.kappa * dir.dtau + it.tau * dir.dkappa);
        NewtonRhs { r1, r2, r3, r4, r5 }
    }

    /// Solve with iterative refinement; the factorization degrades as the
    /// barrier parameter vanishes and one or two correction passes buy the
    /// final decimal digits.
    fn solve_refined(
        &self,
        prob: &ConicProblem<T>,
        scaling: &NtScaling<T>,
        it: &Iterate<T>,
        rhs: &NewtonRhs<T>,
    ) -> Direction<T> {
        let mut dir = self.solve_once(prob, scaling, it, rhs);
        for _ in 0..2 {
            let res = self.residual(prob, scaling, it, rhs, &dir);
            let res_norm = res
                .r1
                .norm()
                .max(res.r2.norm())
                .max(res.r3.abs())
                .max(res.r4.norm())
                .max(res.r5.abs());
            let rhs_scale = rhs
                .r1
                .norm()
                .max(rhs.r2.norm())
                .max(rhs.r3.abs())
                .max(rhs.r4.norm())
                .max(rhs.r5.abs())
                .max(T::one());
            if res_norm <= cst::<T>(1e-14) * rhs_scale {
                break;
            }
            let corr = self.solve_once(prob, scaling, it, &res);
            dir.dx += corr.dx;
            dir.dy += corr.dy;
            dir.dz += corr.dz;
            dir.dtau += corr.dtau;
            dir.dkappa += corr.dkappa;
        }
        dir
    }
}

fn step_length<T: Scalar>(
    scaling: &NtScaling<T>,
    it: &Iterate<T>,
    dir: &Direction<T>,
    frac: T,
) -> T {
    let dx_scaled = scaling.apply_winv_t(&dir.dx);
    let dz_scaled = scaling.apply_w(&dir.dz);
    let mut alpha: Option<T> = scaling
        .step_to_boundary(&dx_scaled)
        .into_iter()
        .chain(scaling.step_to_boundary(&dz_scaled))
        .fold(None, |acc, t| Some(acc.map_or(t, |a: T| a.min(t))));
    if dir.dtau < T::zero() {
        let t = -it.tau / dir.dtau;
        alpha = Some(alpha.map_or(t, |a| a.min(t)));
    }
    if dir.dkappa < T::zero() {
        let t = -it.kappa / dir.dkappa;
        alpha = Some(alpha.map_or(t, |a| a.min(t)));
    }
    match alpha {
        None => T::one(),
        Some(a) => (frac * a).min(T::one()),
    }
}

fn dehomogenized_metrics<T: Scalar>(
    prob: &ConicProblem<T>,
    it: &Iterate<T>,
    norm_b: T,
    norm_c: T,
) -> Metrics<T> {
    let inv_tau = T::one() / it.tau;
    let x = &it.x * inv_tau;
    let y = &it.y * inv_tau;
    let z = &it.z * inv_tau;
    let pres = (&prob.a * &x - &prob.b).norm() / norm_b;
    let dres = (prob.a.transpose() * &y + &z - &prob.c).norm() / norm_c;
    let pobj = prob.c.dot(&x);
    let dobj = prob.b.dot(&y);
    let denom = T::one() + pobj.abs().max(dobj.abs());
    let compl_gap = x.dot(&z).abs() / denom;
    let obj_gap = (pobj - dobj).abs() / denom;
    Metrics { pres, dres, rel_gap: compl_gap.max(obj_gap), pobj, dobj }
}

fn make_solution<T: Scalar>(
    it: &Iterate<T>,
    metrics: &Metrics<T>,
    status: ConicStatus,
    iterations: usize,
) -> ConicSolution<T> {
    let inv_tau = T::one() / it.tau;
    ConicSolution {
        status,
        x: &it.x * inv_tau,
        y: &it.y * inv_tau,
        z: &it.z * inv_tau,
        pobj: metrics.pobj,
        dobj: metrics.dobj,
        iterations,
    }
}

fn infeasibility_certificate<T: Scalar>(
    prob: &ConicProblem<T>,
    it: &Iterate<T>,
    settings: &ConicSettings<T>,
    iterations: usize,
) -> Option<ConicSolution<T>> {
    // Primal infeasibility: A'y + z = 0, z in K, b'y > 0.
    let by = prob.b.dot(&it.y);
    if by > T::zero() {
        let y = &it.y / by;
        let z = &it.z / by;
        let res = (prob.a.transpose() * &y + &z).norm();
        if res <= settings.feas_tol * (T::one() + z.norm()) {
            return Some(ConicSolution {
                status: ConicStatus::PrimalInfeasible,
                x: DVector::zeros(prob.a.ncols()),
                y,
                z,
                pobj: T::zero(),
                dobj: T::zero(),
                iterations,
            });
        }
    }
    // Dual infeasibility (primal unbounded): A x = 0, x in K, c'x < 0.
    let cx = prob.c.dot(&it.x);
    if cx < T::zero() {
        let x = &it.x / -cx;
        let res = (&prob.a * &x).norm();
        if res <= settings.feas_tol * (T::one() + x.norm()) {
            return Some(ConicSolution {
                status: ConicStatus::DualInfeasible,
                x,
                y: DVector::zeros(prob.a.nrows()),
                z: DVector::zeros(prob.a.ncols()),
                pobj: T::zero(),
                dobj: T::zero(),
                iterations,
            });
        }
    }
    None
}
