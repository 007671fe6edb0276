//! Optimal method-parameter selection.
//!
//! For a fixed step size `alpha`, the best relaxation `theta` and the
//! resulting factor solve one SDP: the dual slack `S` is the Schur complement
//! of a bordered matrix `S_tilde` whose entries are affine in
//! `(rho^2, lambda, theta)` jointly, so minimizing `rho^2` subject to
//! `S_tilde >= 0` optimizes over `theta` for free. Minimization over `alpha`
//! is a scalar search on `log alpha`; the map `alpha -> rho^2*(alpha)` is
//! continuous and empirically unimodal, so golden-section bracketing applies,
//! with a coarse-scan fallback and an explicit warning when the unimodality
//! assumption looks violated.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::operators::{ConstraintName, GramOrdering};
use crate::ospep::{
    build_components, ClassBundle, ComputeOptions, DualCertificate, Method, MethodSpec,
    OspepError, tight_contraction_factor,
};
use crate::scalar::{cst, Scalar};
use crate::sdp::conic::{svec, svec_len, ConeLayout};
use crate::sdp::ipm::{solve_conic, ConicProblem, ConicSettings, ConicStatus};
use crate::sdp::{SolveStatus, SolverSettings};

/// Bordered dual description: `S_tilde(rho^2, lambda, theta)` is PSD iff the
/// plain dual slack at the same point is PSD, and it is affine in `theta`.
#[derive(Debug, Clone)]
pub struct ThetaEmbeddedDual<T> {
    pub ordering: GramOrdering,
    pub identity: DMatrix<T>,
    pub constraints: Vec<(ConstraintName, DMatrix<T>)>,
    /// Constant part of the border (the `z` coordinate).
    pub border_const: DVector<T>,
    /// `theta` coefficient of the border (minus the residual direction).
    pub border_theta: DVector<T>,
}

impl<T: Scalar> ThetaEmbeddedDual<T> {
    pub fn gram_dim(&self) -> usize {
        self.ordering.dim()
    }

    pub fn dim(&self) -> usize {
        self.gram_dim() + 1
    }

    fn border(&self, theta: T) -> DVector<T> {
        &self.border_const + &self.border_theta * theta
    }

    /// The bordered matrix `[[rho^2 M_I - sum lam_i M_i, v(theta)], [v', 1]]`.
    pub fn stilde(&self, rho_sq: T, lambdas: &[T], theta: T) -> DMatrix<T> {
        let n = self.gram_dim();
        let mut s = DMatrix::zeros(n + 1, n + 1);
        let d = self.plain_d(rho_sq, lambdas);
        s.view_mut((0, 0), (n, n)).copy_from(&d);
        let v = self.border(theta);
        for i in 0..n {
            s[(i, n)] = v[i];
            s[(n, i)] = v[i];
        }
        s[(n, n)] = T::one();
        s
    }

    fn plain_d(&self, rho_sq: T, lambdas: &[T]) -> DMatrix<T> {
        let mut d = &self.identity * rho_sq;
        for ((_, m), lam) in self.constraints.iter().zip(lambdas) {
            d -= m * *lam;
        }
        d
    }

    /// Schur complement of the corner: the plain dual slack at `theta`.
    pub fn plain_slack(&self, rho_sq: T, lambdas: &[T], theta: T) -> DMatrix<T> {
        let v = self.border(theta);
        let n = self.gram_dim();
        let vv = DMatrix::from_fn(n, n, |i, j| v[i] * v[j]);
        self.plain_d(rho_sq, lambdas) - vv
    }
}

/// Build the bordered dual for the given classes and step size.
pub fn build_theta_embedded<T: Scalar>(
    classes: &ClassBundle<T>,
    alpha: T,
) -> Result<ThetaEmbeddedDual<T>, OspepError> {
    // theta enters only through the border; build components at a dummy value.
    let spec = MethodSpec { method: Method::Dys, alpha, theta: T::one() };
    let parts = build_components(classes, &spec)?;
    let n = parts.ordering.dim();
    let mut e1 = DVector::zeros(n);
    e1[0] = T::one();
    Ok(ThetaEmbeddedDual {
        border_theta: -parts.ordering.output_direction::<T>(),
        ordering: parts.ordering,
        identity: parts.identity,
        constraints: parts.constraints,
        border_const: e1,
    })
}

/// Result of one `rho^2*(alpha)` evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct ThetaOptimal<T> {
    pub alpha: T,
    pub rho_sq: T,
    pub theta: T,
    pub certificate: DualCertificate<T>,
    pub strong_duality: bool,
    pub status: SolveStatus,
}

/// Margin keeping `theta` in the open interval (0, 2).
pub fn default_theta_margin<T: Scalar>() -> T {
    cst(1e-6)
}

/// Tight factor at step size `alpha` with `theta` optimized inside
/// `[margin, 2 - margin]`, via one bordered-dual SDP solve.
pub fn rho_star_given_alpha<T: Scalar>(
    classes: &ClassBundle<T>,
    alpha: T,
    settings: &SolverSettings<T>,
) -> Result<ThetaOptimal<T>, OspepError> {
    let embedded = build_theta_embedded(classes, alpha)?;
    let margin = default_theta_margin::<T>();
    let n1 = embedded.dim();
    let m_lam = embedded.constraints.len();
    // Conic pose whose dual side carries (y_rho, lambda, theta):
    //   maximize y_rho  (= -rho^2)
    //   z_lam = lambda >= 0, z_lo = theta - margin >= 0,
    //   z_hi = (2 - margin) - theta >= 0, z_psd = svec(S_tilde) PSD.
    let rows = 1 + m_lam + 1;
    let orth = m_lam + 2;
    let cols = orth + svec_len(n1);
    let mut a = DMatrix::<T>::zeros(rows, cols);
    let mut b = DVector::<T>::zeros(rows);
    let mut c = DVector::<T>::zeros(cols);
    b[0] = T::one();

    let pad = |m: &DMatrix<T>| -> DMatrix<T> {
        let mut out = DMatrix::zeros(n1, n1);
        out.view_mut((0, 0), (n1 - 1, n1 - 1)).copy_from(m);
        out
    };
    // c: orthant entries for the theta bounds, then svec(F0).
    c[m_lam] = -margin;
    c[m_lam + 1] = cst::<T>(2.0) - margin;
    let mut f0 = DMatrix::zeros(n1, n1);
    for i in 0..n1 - 1 {
        f0[(i, n1 - 1)] = embedded.border_const[i];
        f0[(n1 - 1, i)] = embedded.border_const[i];
    }
    f0[(n1 - 1, n1 - 1)] = T::one();
    c.rows_mut(orth, svec_len(n1)).copy_from(&svec(&f0));

    // Row 0: y_rho with coefficient svec(F_rho) on the PSD block.
    a.view_mut((0, orth), (1, svec_len(n1)))
        .copy_from(&svec(&pad(&embedded.identity)).transpose());
    // Rows 1..=m_lam: lambda_i, with -1 on its orthant slack and +M_i block.
    for (i, (_, m)) in embedded.constraints.iter().enumerate() {
        a[(1 + i, i)] = -T::one();
        a.view_mut((1 + i, orth), (1, svec_len(n1)))
            .copy_from(&svec(&pad(m)).transpose());
    }
    // Last row: theta, with -1/+1 on the bound slacks and -F_theta block.
    let r = rows - 1;
    a[(r, m_lam)] = -T::one();
    a[(r, m_lam + 1)] = T::one();
    let mut f_theta = DMatrix::zeros(n1, n1);
    for i in 0..n1 - 1 {
        f_theta[(i, n1 - 1)] = embedded.border_theta[i];
        f_theta[(n1 - 1, i)] = embedded.border_theta[i];
    }
    a.view_mut((r, orth), (1, svec_len(n1)))
        .copy_from(&(-svec(&f_theta)).transpose());

    let prob = ConicProblem { a, b, c, cones: ConeLayout { orthant: orth, psd: vec![n1] } };
    let conic_settings = ConicSettings {
        feas_tol: settings.feas_tol,
        gap_tol: settings.gap_tol,
        max_iters: settings.max_iters,
    };
    let sol = solve_conic(&prob, &conic_settings);
    let status = match sol.status {
        ConicStatus::Optimal => SolveStatus::Optimal,
        ConicStatus::PrimalInfeasible => return Err(OspepError::Solver(SolveStatus::Infeasible)),
        ConicStatus::DualInfeasible => return Err(OspepError::Solver(SolveStatus::Unbounded)),
        ConicStatus::NumericalFailure => SolveStatus::NumericalFailure,
    };
    let rho_sq = -sol.y[0];
    let theta = sol.y[rows - 1]
        .max(margin)
        .min(cst::<T>(2.0) - margin);
    let lambdas: Vec<T> = (0..m_lam).map(|i| sol.z[i]).collect();
    let slack = embedded.plain_slack(rho_sq, &lambdas, theta);
    let n = embedded.gram_dim();
    let certificate = DualCertificate {
        rho_sq,
        multipliers: embedded
            .constraints
            .iter()
            .zip(&lambdas)
            .map(|((name, _), v)| (name.key().to_string(), *v))
            .collect(),
        slack: (0..n).map(|i| (0..n).map(|j| slack[(i, j)]).collect()).collect(),
    };
    Ok(ThetaOptimal {
        alpha,
        rho_sq,
        theta,
        certificate,
        strong_duality: !classes.any_degenerate(),
        status,
    })
}

/// Search configuration for [`optimize_alpha`].
#[derive(Debug, Clone, Copy)]
pub struct SearchSettings<T> {
    pub alpha_min: T,
    pub alpha_max: T,
    /// Relative bracket width on `alpha` at which the search stops.
    pub rel_tol: T,
    /// Number of coarse log-spaced samples used to bracket the minimum.
    pub coarse_points: usize,
    /// Optimize `theta` per evaluation (None) or pin it (Some).
    pub theta_fixed: Option<T>,
    pub solver: SolverSettings<T>,
}

impl<T: Scalar> Default for SearchSettings<T> {
    fn default() -> Self {
        SearchSettings {
            alpha_min: cst(1e-4),
            alpha_max: cst(1e4),
            rel_tol: cst(1e-4),
            coarse_points: 25,
            theta_fixed: None,
            solver: SolverSettings::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStatus {
    Converged,
    /// The evaluations contradicted unimodality; the reported point is the
    /// best found, not a certified minimum.
    NonUnimodalWarning,
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamOptResult<T> {
    pub alpha_star: T,
    pub theta_star: T,
    pub rho_sq_star: T,
    /// Every `(alpha, rho^2, theta)` evaluation, in evaluation order.
    pub trace: Vec<(T, T, T)>,
    pub bracket: (T, T),
    pub status: SearchStatus,
}

/// Minimize `rho^2*(alpha)` by golden-section search on `log alpha` after a
/// coarse bracketing scan.
pub fn optimize_alpha<T: Scalar>(
    classes: &ClassBundle<T>,
    search: &SearchSettings<T>,
) -> Result<ParamOptResult<T>, OspepError> {
    let mut trace: Vec<(T, T, T)> = Vec::new();
    let eval = |alpha: T, trace: &mut Vec<(T, T, T)>| -> Result<T, OspepError> {
        let (rho_sq, theta) = match search.theta_fixed {
            None => {
                let r = rho_star_given_alpha(classes, alpha, &search.solver)?;
                (r.rho_sq, r.theta)
            }
            Some(theta) => {
                let spec = MethodSpec::new(Method::Dys, alpha, theta)?;
                let opts =
                    ComputeOptions { settings: search.solver, want_worst_case: false };
                let r = tight_contraction_factor(classes, &spec, &opts)?;
                (r.rho_sq, theta)
            }
        };
        trace.push((alpha, rho_sq, theta));
        Ok(rho_sq)
    };

    let lo = search.alpha_min.ln();
    let hi = search.alpha_max.ln();
    let npts = search.coarse_points.max(3);
    let mut coarse = Vec::with_capacity(npts);
    for i in 0..npts {
        let t = cst::<T>(i as f64) / cst::<T>((npts - 1) as f64);
        let x = lo + (hi - lo) * t;
        let v = eval(x.exp(), &mut trace)?;
        coarse.push((x, v));
    }
    // Unimodality screen: count strict interior local minima.
    let mut local_minima = 0usize;
    for i in 1..npts - 1 {
        if coarse[i].1 < coarse[i - 1].1 && coarse[i].1 < coarse[i + 1].1 {
            local_minima += 1;
        }
    }
    let mut status =
        if local_minima > 1 { SearchStatus::NonUnimodalWarning } else { SearchStatus::Converged };

    let i_best = (0..npts)
        .min_by(|&i, &j| coarse[i].1.partial_cmp(&coarse[j].1).unwrap())
        .unwrap();
    let mut a = coarse[i_best.saturating_sub(1)].0;
    let mut b = coarse[(i_best + 1).min(npts - 1)].0;
    let bracket = (a.exp(), b.exp());

    // Golden section on log alpha.
    let gr = cst::<T>(0.618_033_988_749_894_9);
    let mut x1 = b - gr * (b - a);
    let mut x2 = a + gr * (b - a);
    let mut f1 = eval(x1.exp(), &mut trace)?;
    let mut f2 = eval(x2.exp(), &mut trace)?;
    let (mut x_best, mut f_best) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
    for &(al, v, _) in trace.iter() {
        if v < f_best {
            f_best = v;
            x_best = al.ln();
        }
    }
    while (b - a) > search.rel_tol {
        // Golden-section keeps the minimizer of a unimodal objective inside
        // the bracket: an evaluation strictly better than both interior
        // values but lying outside the bracket contradicts unimodality.
        let slack = cst::<T>(1e-7) * (T::one() + f_best.abs());
        if (x_best < a || x_best > b) && f_best < f1.min(f2) - slack {
            status = SearchStatus::NonUnimodalWarning;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = eval(x1.exp(), &mut trace)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = eval(x2.exp(), &mut trace)?;
        }
        let (xl, fl, _) = *trace.last().unwrap();
        if fl < f_best {
            f_best = fl;
            x_best = xl.ln();
        }
    }

    // Report the best evaluation ever made, never a worse refined point.
    let (alpha_star, rho_sq_star, theta_star) = trace
        .iter()
        .copied()
        .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
        .unwrap();
    Ok(ParamOptResult { alpha_star, theta_star, rho_sq_star, trace, bracket, status })
}

/// One row of a `rho^2*(alpha)` curve.
#[derive(Debug, Clone, Serialize)]
pub struct CurvePoint<T> {
    pub alpha: T,
    pub rho_sq: T,
    pub theta: T,
    pub ok: bool,
    pub note: Option<String>,
}

/// Evaluate the curve at the given step sizes, order-preserving. With
/// `theta_fixed`, each point solves the plain dual at that relaxation instead
/// of optimizing it. Per-point failures are recorded in the row.
pub fn rho_curve<T: Scalar>(
    classes: &ClassBundle<T>,
    alphas: &[T],
    theta_fixed: Option<T>,
    solver: &SolverSettings<T>,
) -> Vec<CurvePoint<T>> {
    alphas
        .iter()
        .map(|&alpha| match theta_fixed {
            None => match rho_star_given_alpha(classes, alpha, solver) {
                Ok(r) if r.status == SolveStatus::Optimal => CurvePoint {
                    alpha,
                    rho_sq: r.rho_sq,
                    theta: r.theta,
                    ok: true,
                    note: None,
                },
                Ok(r) => CurvePoint {
                    alpha,
                    rho_sq: r.rho_sq,
                    theta: r.theta,
                    ok: false,
                    note: Some(format!("{:?}", r.status)),
                },
                Err(e) => CurvePoint {
                    alpha,
                    rho_sq: cst(f64::NAN),
                    theta: cst(f64::NAN),
                    ok: false,
                    note: Some(e.to_string()),
                },
            },
            Some(theta) => {
                let spec = MethodSpec { method: Method::Dys, alpha, theta };
                let opts = ComputeOptions { settings: *solver, want_worst_case: false };
                match MethodSpec::new(Method::Dys, alpha, theta)
                    .and_then(|_| tight_contraction_factor(classes, &spec, &opts))
                {
                    Ok(r) if r.status == SolveStatus::Optimal => CurvePoint {
                        alpha,
                        rho_sq: r.rho_sq,
                        theta,
                        ok: true,
                        note: None,
                    },
                    Ok(r) => CurvePoint {
                        alpha,
                        rho_sq: r.rho_sq,
                        theta,
                        ok: false,
                        note: Some(format!("{:?}", r.status)),
                    },
                    Err(e) => CurvePoint {
                        alpha,
                        rho_sq: cst(f64::NAN),
                        theta,
                        ok: false,
                        note: Some(e.to_string()),
                    },
                }
            }
        })
        .collect()
}
