//! Cross-module invariants: predicate oracles, Gram-form consistency, solver
//! properties, exactness, reductions, and symmetry checks.

use nalgebra::{DMatrix, DVector, Matrix2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ospep_core::analytic::{
    classify_mu_coco, drs_rate_mu_coco, drs_rate_mu_lipschitz, lower_bound_mu_coco,
    lower_bound_mu_lipschitz, Branch,
};
use ospep_core::operators::{EvaluationPair, GramOrdering, OperatorClass, Role};
use ospep_core::ospep::{
    build_dual, build_primal, tight_contraction_factor, ClassBundle, ComputeOptions, Method,
    MethodSpec,
};
use ospep_core::search::{optimize_alpha, rho_curve, SearchSettings};
use ospep_core::sdp::{self, SdpProblem, SolveStatus, SolverSettings};

fn v2(x: f64, y: f64) -> DVector<f64> {
    DVector::from_vec(vec![x, y])
}

fn apply2(m: &Matrix2<f64>, x: &DVector<f64>) -> DVector<f64> {
    let y = m * nalgebra::Vector2::new(x[0], x[1]);
    v2(y[0], y[1])
}

/// Independent oracle for the two-point predicates: embed the pair's
/// difference vectors as a 2x2 matrix and test the eigenvalue conditions
/// (spectral norm for Lipschitz, symmetric-part eigenvalues for strong
/// monotonicity, inverse symmetric part for cocoercivity).
fn matrix_oracle(
    dx: &DVector<f64>,
    dq: &DVector<f64>,
    mu: Option<f64>,
    beta: Option<f64>,
    lip: Option<f64>,
    tol: f64,
) -> bool {
    let nx = dx.norm();
    if nx == 0.0 {
        // Zero input difference: any nonzero value difference falsifies a
        // single-valued (cocoercive/Lipschitz) class; monotonicity is vacuous.
        let nq = dq.norm();
        if beta.is_some() || lip.is_some() {
            return nq * nq <= tol;
        }
        return true;
    }
    let e1 = dx / nx;
    let q_par = e1.dot(dq);
    let q_perp = (dq - &e1 * q_par).norm();
    let m = Matrix2::new(q_par, -q_perp, q_perp, q_par) / nx;
    let mut ok = true;
    if let Some(l) = lip {
        let largest = (m.transpose() * m).symmetric_eigenvalues().max();
        ok &= largest <= l * l + tol;
    }
    if let Some(mu) = mu {
        let sym = (m + m.transpose()) * 0.5;
        ok &= sym.symmetric_eigenvalues().min() >= mu - tol;
    }
    if let Some(b) = beta {
        match m.try_inverse() {
            Some(minv) => {
                let sym = (minv + minv.transpose()) * 0.5;
                ok &= sym.symmetric_eigenvalues().min() >= b - tol;
            }
            None => {
                // Singular map with nonzero dq means dq orthogonal under the
                // cocoercivity form; fall back to the inequality itself.
                ok &= dx.dot(dq) - b * dq.dot(dq) >= -tol;
            }
        }
    }
    ok
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// The interpolation predicate agrees with the matrix-embedding oracle.
    #[test]
    fn predicate_matches_matrix_oracle(
        x1 in -3.0f64..3.0, y1 in -3.0f64..3.0,
        q1 in -3.0f64..3.0, r1 in -3.0f64..3.0,
        x2 in -3.0f64..3.0, y2 in -3.0f64..3.0,
        q2 in -3.0f64..3.0, r2 in -3.0f64..3.0,
        mu in 0.0f64..2.0, beta in 0.1f64..2.0, lip in 0.2f64..4.0,
        which in 0usize..6,
    ) {
        let pair = EvaluationPair::new(v2(x1, y1), v2(q1, r1), v2(x2, y2), v2(q2, r2)).unwrap();
        let dx = v2(x1 - x2, y1 - y2);
        let dq = v2(q1 - q2, r1 - r2);
        let (m, b, l) = match which {
            0 => (Some(mu), None, None),
            1 => (None, Some(beta), None),
            2 => (None, None, Some(lip)),
            3 => (Some(mu), Some(beta), None),
            4 => (Some(mu), None, Some(lip)),
            _ => (None, Some(beta), Some(lip)),
        };
        let class = OperatorClass { role: Role::A, mu: m, beta: b, lip: l, is_zero: false };
        prop_assume!(class.is_nonempty());
        // Skip razor-thin margins where the two tolerance conventions differ.
        let margin = 1e-7;
        let near_boundary = {
            let xq = dx.dot(&dq);
            let xx = dx.dot(&dx);
            let qq = dq.dot(&dq);
            m.is_some_and(|mu| (xq - mu * xx).abs() < margin)
                || b.is_some_and(|bb| (xq - bb * qq).abs() < margin)
                || l.is_some_and(|ll| (ll * ll * xx - qq).abs() < margin)
        };
        prop_assume!(!near_boundary);
        let got = class.check_two_point(&pair, 0.0).unwrap();
        let oracle = matrix_oracle(&dx, &dq, m, b, l, 1e-10);
        prop_assert_eq!(got, oracle);
    }

    /// tr(M G) equals the scalar inequality evaluated on explicit vectors.
    #[test]
    fn trace_form_matches_vector_arithmetic(
        seeds in prop::array::uniform16(-2.0f64..2.0),
        mu in 0.0f64..3.0, beta in 0.1f64..3.0, lip in 0.1f64..4.0,
        alpha in 0.2f64..3.0,
    ) {
        let z = DVector::from_vec(seeds[0..4].to_vec());
        let za = DVector::from_vec(seeds[4..8].to_vec());
        let zb = DVector::from_vec(seeds[8..12].to_vec());
        let zc = DVector::from_vec(seeds[12..16].to_vec());
        let vs = [&z, &za, &zb, &zc];
        let gram = DMatrix::from_fn(4, 4, |i, j| vs[i].dot(vs[j]));

        // Gather every constraint matrix for every role/parameter combo.
        let classes = [
            OperatorClass::strongly_monotone(Role::A, mu).with_beta(beta).with_lip(mu.max(lip)),
            OperatorClass::strongly_monotone(Role::B, mu).with_beta(beta).with_lip(mu.max(lip)),
            OperatorClass::strongly_monotone(Role::C, mu).with_beta(beta).with_lip(mu.max(lip)),
        ];
        prop_assume!(classes.iter().all(|c| c.is_nonempty()));
        // Scalar forms of each inequality's left-minus-right side.
        let qa = (zb.clone() * 2.0 - &z - &zc - &za) / alpha;
        let qb = (&z - &zb) / alpha;
        let qc = &zc / alpha;
        let lhs_minus_rhs = |name: &str| -> f64 {
            let (x, q) = match name.chars().last().unwrap() {
                'a' => (&za, &qa),
                'b' => (&zb, &qb),
                _ => (&zb, &qc),
            };
            if name.starts_with("mu") {
                x.dot(q) - mu * x.dot(x)
            } else if name.starts_with("beta") {
                x.dot(q) - beta * q.dot(q)
            } else {
                let l = mu.max(lip);
                l * l * x.dot(x) - q.dot(q)
            }
        };
        for class in &classes {
            for cm in class.constraint_matrices(alpha, &GramOrdering::dys()).unwrap() {
                let trace = (cm.matrix.clone() * &gram).trace();
                // Matrices encode the alpha-cleared form: multiply by alpha
                // (inner-product rows) or alpha^2 (Lipschitz rows).
                let name = cm.name.key();
                let scale = if name.starts_with("lip") { alpha * alpha } else { alpha };
                let direct = lhs_minus_rhs(name) * scale;
                let err = (trace - direct).abs();
                let denom = 1.0f64.max(direct.abs());
                prop_assert!(err / denom < 1e-12, "{name}: {trace} vs {direct}");
            }
        }
    }

    /// Every sampled parameter point lands in exactly one branch under the
    /// documented precedence (classification is total and deterministic).
    #[test]
    fn classification_is_total(
        mu in 0.05f64..20.0, second in 0.05f64..20.0, theta in 0.01f64..1.99,
    ) {
        let b1 = classify_mu_coco(mu, second, theta).unwrap();
        let b2 = classify_mu_coco(mu, second, theta).unwrap();
        prop_assert_eq!(b1, b2);
        let (rho, label) = drs_rate_mu_coco(mu, second, theta).unwrap();
        prop_assert_eq!(label.branch, b1);
        prop_assert!(rho.is_finite() && rho >= 0.0);
        let (rho, _) = drs_rate_mu_lipschitz(mu, second, theta).unwrap();
        prop_assert!(rho.is_finite() && rho >= 0.0);
    }
}

/// Weak duality: every feasible Gram matrix scores at most the value of any
/// dual-feasible point. Feasible Gram matrices come from actual operator
/// evaluations (scaled identities), dual-feasible points from the returned
/// certificate with inflated rho^2.
#[test]
fn weak_duality_on_sampled_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let spec = MethodSpec::new(Method::Drs, 1.0, 1.3).unwrap();
    let classes = ClassBundle::new(
        OperatorClass::strongly_monotone(Role::A, 0.8),
        OperatorClass::cocoercive(Role::B, 0.6),
        OperatorClass::zero(Role::C),
    )
    .unwrap();
    let problem = build_primal(&classes, &spec).unwrap();
    let dual = build_dual(&classes, &spec).unwrap();
    let solution = sdp::solve(&problem, &SolverSettings::default());
    assert_eq!(solution.status, SolveStatus::Optimal);
    let rho_sq_opt = solution.eq_duals[0].1;
    let lambdas: Vec<f64> = solution.ineq_duals.iter().map(|(_, v)| *v).collect();

    for _ in 0..100 {
        // Primal-feasible Gram matrix: A = a I (a >= mu), B = b I (b <= 1/beta)
        // evaluated at a random z; the ratio is a valid objective value.
        let a = 0.8 + rng.random::<f64>() * 3.0;
        let b = rng.random::<f64>() * (1.0 / 0.6);
        let z = v2(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0);
        if z.norm() < 1e-3 {
            continue;
        }
        let z = &z / z.norm();
        let zb = &z / (1.0 + b);
        let za = (&zb * 2.0 - &z) / (1.0 + a);
        let vs = [&z, &za, &zb];
        let gram = DMatrix::from_fn(3, 3, |i, j| vs[i].dot(vs[j]));
        let value = (problem.objective() * &gram).trace();

        // Dual-feasible point: optimal multipliers with inflated rho^2.
        for inflate in [0.0, 1e-6, 0.1] {
            let rho_sq = rho_sq_opt + inflate;
            let slack = dual.slack(rho_sq, &lambdas);
            let min_eig = slack.symmetric_eigenvalues().min();
            assert!(min_eig >= -1e-7, "inflated dual point stays feasible");
            assert!(
                value <= rho_sq + 1e-7,
                "weak duality violated: primal {value} vs dual {rho_sq}"
            );
        }
    }
}

/// Identical inputs give bit-identical solver outputs.
#[test]
fn solver_is_deterministic() {
    let spec = MethodSpec::new(Method::Drs, 0.7f64, 1.2).unwrap();
    let classes = ClassBundle::new(
        OperatorClass::strongly_monotone(Role::A, 1.4),
        OperatorClass::monotone(Role::B).with_lip(2.0),
        OperatorClass::zero(Role::C),
    )
    .unwrap();
    let problem = build_primal(&classes, &spec).unwrap();
    let s1 = sdp::solve(&problem, &SolverSettings::default());
    let s2 = sdp::solve(&problem, &SolverSettings::default());
    assert_eq!(s1.value.to_bits(), s2.value.to_bits());
    assert_eq!(s1.dual_value.to_bits(), s2.dual_value.to_bits());
    for (a, b) in s1.gram.iter().zip(s2.gram.iter()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

/// Scaling all matrices and the right-hand side by c > 0 keeps the status and
/// scales the optimal value by c.
#[test]
fn solver_scale_invariance() {
    let spec = MethodSpec::new(Method::Drs, 1.0f64, 1.0).unwrap();
    let classes = ClassBundle::new(
        OperatorClass::strongly_monotone(Role::A, 1.0),
        OperatorClass::cocoercive(Role::B, 1.0),
        OperatorClass::zero(Role::C),
    )
    .unwrap();
    let base = build_primal(&classes, &spec).unwrap();
    let c = 3.7;
    let scaled = SdpProblem::new(
        base.objective() * c,
        base.inequalities()
            .iter()
            .map(|(n, m)| (n.clone(), m * c))
            .collect(),
        base.equalities()
            .iter()
            .map(|(n, m, rhs)| (n.clone(), m * c, rhs * c))
            .collect(),
    )
    .unwrap();
    let s0 = sdp::solve(&base, &SolverSettings::default());
    let s1 = sdp::solve(&scaled, &SolverSettings::default());
    assert_eq!(s0.status, SolveStatus::Optimal);
    assert_eq!(s1.status, SolveStatus::Optimal);
    assert!((s1.value - c * s0.value).abs() < 1e-6 * c, "{} vs {}", s1.value, c * s0.value);
}

/// Perturbing one entry of the returned Gram matrix must show up in the
/// recomputed KKT residuals.
#[test]
fn certify_flags_perturbed_solutions() {
    let spec = MethodSpec::new(Method::Drs, 1.0f64, 1.0).unwrap();
    let classes = ClassBundle::new(
        OperatorClass::strongly_monotone(Role::A, 1.0),
        OperatorClass::cocoercive(Role::B, 1.0),
        OperatorClass::zero(Role::C),
    )
    .unwrap();
    let problem = build_primal(&classes, &spec).unwrap();
    let solution = sdp::solve(&problem, &SolverSettings::default());
    let clean = sdp::certify(&problem, &solution);
    assert!(clean.max_residual <= 1e-8, "clean solve residual {clean:?}");

    let mut perturbed = solution.clone();
    perturbed.gram[(0, 0)] += 1e-3;
    let report = sdp::certify(&problem, &perturbed);
    assert!(report.equality_violation >= 1e-4, "{report:?}");
    assert!(report.max_residual >= 1e-4);

    // Feasible but suboptimal dual point: nonzero gap reported.
    let mut subopt = solution.clone();
    subopt.eq_duals[0].1 += 0.05;
    let report = sdp::certify(&problem, &subopt);
    assert!(report.gap >= 0.049, "{report:?}");
}

/// Primal and dual optima agree within 1e-7 over random non-degenerate
/// parameter tuples (exactness of the reformulation).
#[test]
fn exactness_over_random_tuples() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let opts = ComputeOptions { want_worst_case: false, ..ComputeOptions::default() };
    let mut worst: f64 = 0.0;
    for k in 0..120 {
        let mu = 10f64.powf(rng.random_range(-1.0..1.0));
        let beta = 10f64.powf(rng.random_range(-1.0..1.0));
        let lip = 10f64.powf(rng.random_range(-1.0..1.0));
        let beta_c = 10f64.powf(rng.random_range(-1.0..1.0));
        let theta = rng.random_range(0.1..1.9);
        let alpha = 10f64.powf(rng.random_range(-0.7..0.7));
        let (classes, method) = match k % 3 {
            0 => (
                ClassBundle::new(
                    OperatorClass::strongly_monotone(Role::A, mu),
                    OperatorClass::cocoercive(Role::B, beta),
                    OperatorClass::zero(Role::C),
                )
                .unwrap(),
                Method::Drs,
            ),
            1 => (
                ClassBundle::new(
                    OperatorClass::strongly_monotone(Role::A, mu),
                    OperatorClass::cocoercive(Role::B, beta).with_lip(lip),
                    OperatorClass::cocoercive(Role::C, beta_c),
                )
                .unwrap(),
                Method::Dys,
            ),
            _ => (
                ClassBundle::new(
                    OperatorClass::strongly_monotone(Role::A, mu),
                    OperatorClass::zero(Role::B),
                    OperatorClass::cocoercive(Role::C, beta_c),
                )
                .unwrap(),
                Method::Fbs,
            ),
        };
        let spec = MethodSpec::new(method, alpha, theta).unwrap();
        let r = tight_contraction_factor(&classes, &spec, &opts).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal, "tuple {k}");
        assert!(r.strong_duality);
        worst = worst.max((r.primal_value - r.rho_sq).abs());
    }
    assert!(worst <= 1e-7, "worst primal/dual gap {worst}");
}

/// The reduced 3x3 assembly agrees with the full 4x4 assembly in which the
/// absent operator is pinned to zero by an equality constraint.
#[test]
fn reduced_and_pinned_full_builds_agree() {
    let opts = ComputeOptions { want_worst_case: false, ..ComputeOptions::default() };
    for (mu, beta, theta) in [(1.0f64, 1.0, 1.0), (0.5, 2.0, 1.4), (2.0, 0.7, 0.8)] {
        let classes = ClassBundle::new(
            OperatorClass::strongly_monotone(Role::A, mu),
            OperatorClass::cocoercive(Role::B, beta),
            OperatorClass::zero(Role::C),
        )
        .unwrap();
        let spec = MethodSpec::new(Method::Drs, 1.0, theta).unwrap();
        let reduced = tight_contraction_factor(&classes, &spec, &opts).unwrap();

        // Full basis (z, z_A, z_B, z_C) with ||z_C||^2 = 0 pinned.
        let dys_classes = ClassBundle::new(
            OperatorClass::strongly_monotone(Role::A, mu),
            OperatorClass::cocoercive(Role::B, beta),
            OperatorClass::monotone(Role::C),
        )
        .unwrap();
        let dys_spec = MethodSpec::new(Method::Dys, 1.0, theta).unwrap();
        let full = build_primal(&dys_classes, &dys_spec).unwrap();
        let mut zc_pin = DMatrix::zeros(4, 4);
        zc_pin[(3, 3)] = 1.0;
        let pinned = SdpProblem::new(
            full.objective().clone(),
            full.inequalities()
                .iter()
                .filter(|(n, _)| n != "mu_c")
                .cloned()
                .collect(),
            full.equalities()
                .iter()
                .cloned()
                .chain([("pin_zc".to_string(), zc_pin, 0.0)])
                .collect(),
        )
        .unwrap();
        let sol = sdp::solve(&pinned, &SolverSettings::default());
        assert!(
            (sol.value - reduced.rho_sq).abs() < 1e-6,
            "pinned 4x4 {} vs reduced {}",
            sol.value,
            reduced.rho_sq
        );
    }
}

/// Swapping the A and B classes of the cocoercive family leaves the rate
/// unchanged (self-duality of the method).
#[test]
fn cocoercive_family_swap_symmetry() {
    let opts = ComputeOptions { want_worst_case: false, ..ComputeOptions::default() };
    for (mu, beta, theta) in [(1.0f64, 0.5, 1.0), (3.0, 0.2, 1.5), (0.4, 1.7, 0.6)] {
        let spec = MethodSpec::new(Method::Drs, 1.0, theta).unwrap();
        let forward = ClassBundle::new(
            OperatorClass::strongly_monotone(Role::A, mu),
            OperatorClass::cocoercive(Role::B, beta),
            OperatorClass::zero(Role::C),
        )
        .unwrap();
        let swapped = ClassBundle::new(
            OperatorClass::cocoercive(Role::A, beta),
            OperatorClass::strongly_monotone(Role::B, mu),
            OperatorClass::zero(Role::C),
        )
        .unwrap();
        let rf = tight_contraction_factor(&forward, &spec, &opts).unwrap();
        let rs = tight_contraction_factor(&swapped, &spec, &opts).unwrap();
        assert!(
            (rf.rho - rs.rho).abs() < 1e-7,
            "mu={mu} beta={beta} theta={theta}: {} vs {}",
            rf.rho,
            rs.rho
        );
    }
}

/// With A and B merely monotone and any cocoercive C, no linear rate is
/// provable: the SDP value is at least 1.
#[test]
fn no_contraction_without_strength_probe() {
    let opts = ComputeOptions { want_worst_case: false, ..ComputeOptions::default() };
    for beta_c in [0.1f64, 1.0, 10.0] {
        let classes = ClassBundle::new(
            OperatorClass::monotone(Role::A),
            OperatorClass::monotone(Role::B),
            OperatorClass::cocoercive(Role::C, beta_c),
        )
        .unwrap();
        let spec = MethodSpec::new(Method::Dys, 1.0, 1.0).unwrap();
        let r = tight_contraction_factor(&classes, &spec, &opts).unwrap();
        assert!(r.rho_sq >= 1.0 - 1e-6, "beta_c={beta_c}: rho_sq={}", r.rho_sq);
    }
}

/// Certificates returned by the solver reconstruct to a PSD slack.
#[test]
fn returned_certificates_reconstruct_psd() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let opts = ComputeOptions { want_worst_case: false, ..ComputeOptions::default() };
    for _ in 0..40 {
        let mu = 10f64.powf(rng.random_range(-1.0..1.0));
        let beta = 10f64.powf(rng.random_range(-1.0..1.0));
        let theta = rng.random_range(0.1..1.9);
        let classes = ClassBundle::new(
            OperatorClass::strongly_monotone(Role::A, mu),
            OperatorClass::cocoercive(Role::B, beta),
            OperatorClass::zero(Role::C),
        )
        .unwrap();
        let spec = MethodSpec::new(Method::Drs, 1.0, theta).unwrap();
        let r = tight_contraction_factor(&classes, &spec, &opts).unwrap();
        let slack = r.certificate.slack_matrix();
        let min_eig = slack.symmetric_eigenvalues().min();
        assert!(min_eig >= -1e-8, "min eig {min_eig}");
        for (_, lam) in &r.certificate.multipliers {
            assert!(*lam >= -1e-9);
        }
    }
}

/// Worst-case extraction attains the optimum under strong duality.
#[test]
fn worst_case_attains_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..25 {
        let mu = 10f64.powf(rng.random_range(-0.7..0.7));
        let beta = 10f64.powf(rng.random_range(-0.7..0.7));
        let theta = rng.random_range(0.2..1.8);
        let classes = ClassBundle::new(
            OperatorClass::strongly_monotone(Role::A, mu),
            OperatorClass::cocoercive(Role::B, beta),
            OperatorClass::zero(Role::C),
        )
        .unwrap();
        let spec = MethodSpec::new(Method::Drs, 1.0, theta).unwrap();
        let r = tight_contraction_factor(&classes, &spec, &ComputeOptions::default()).unwrap();
        let wc = r.worst_case.expect("strong duality holds");
        assert!(
            (wc.achieved_ratio - r.rho_sq).abs() <= 1e-6,
            "achieved {} vs rho_sq {}",
            wc.achieved_ratio,
            r.rho_sq
        );
    }
}

/// Sampled evaluation pairs of every constructed worst-case operator pass the
/// interpolation predicate of its declared class.
#[test]
fn lower_bound_operators_pass_interpolation_predicates() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    fn sample_pair(
        rng: &mut ChaCha8Rng,
        map: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    ) -> EvaluationPair<f64> {
        let x1 = v2(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let x2 = v2(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        EvaluationPair::new(x1.clone(), map(&x1), x2.clone(), map(&x2)).unwrap()
    }
    for _ in 0..40 {
        let mu = 10f64.powf(rng.random_range(-0.7..0.7));
        let second = 10f64.powf(rng.random_range(-0.7..0.7));
        let theta = rng.random_range(0.1..1.9);

        let inst = lower_bound_mu_coco(mu, second, theta).unwrap();
        if let Some(b) = inst.b_matrix {
            let class = OperatorClass::cocoercive(Role::B, second);
            for _ in 0..5 {
                let pair = sample_pair(&mut rng, &|x| apply2(&b, x));
                assert!(class.check_two_point(&pair, 1e-9).unwrap(), "coco B fails");
            }
        }
        if let Some(a) = inst.a_matrix {
            let class = OperatorClass::strongly_monotone(Role::A, mu);
            for _ in 0..5 {
                let pair = sample_pair(&mut rng, &|x| apply2(&a, x));
                assert!(class.check_two_point(&pair, 1e-9).unwrap(), "monotone A fails");
            }
        }

        let inst = lower_bound_mu_lipschitz(mu, second, theta).unwrap();
        if let Some(b) = inst.b_matrix {
            let class = OperatorClass::monotone(Role::B).with_lip(second);
            for _ in 0..5 {
                let pair = sample_pair(&mut rng, &|x| apply2(&b, x));
                assert!(class.check_two_point(&pair, 1e-9).unwrap(), "mono+lip B fails");
            }
        }
    }
}

/// Branch-boundary continuity for the cocoercive family: adjacent branch
/// formulas agree at shared boundaries.
#[test]
fn region_boundaries_are_continuous() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut checked = 0;
    for _ in 0..4000 {
        let mu = 10f64.powf(rng.random_range(-1.0..1.0));
        let beta = 10f64.powf(rng.random_range(-1.0..1.0));
        // Branch a threshold.
        if mu * beta - mu + beta < 0.0 {
            let t = 2.0 * (beta + 1.0) * (mu - beta - mu * beta)
                / (mu + mu * beta - beta - beta * beta - 2.0 * mu * beta * beta);
            if t > 1e-3 && t < 2.0 - 1e-3 {
                let lo = drs_rate_mu_coco(mu, beta, t - 1e-10).unwrap().0;
                let hi = drs_rate_mu_coco(mu, beta, t + 1e-10).unwrap().0;
                assert!((lo - hi).abs() < 1e-8, "a-boundary mu={mu} beta={beta}");
                checked += 1;
            }
        }
        // Branch c threshold.
        let t = 2.0 * (mu * beta + mu + beta) / (2.0 * mu * beta + mu + beta);
        if t > 1e-3 && t < 2.0 - 1e-3 {
            let lo = drs_rate_mu_coco(mu, beta, t - 1e-10).unwrap().0;
            let hi = drs_rate_mu_coco(mu, beta, t + 1e-10).unwrap().0;
            assert!((lo - hi).abs() < 1e-8, "c-boundary mu={mu} beta={beta}");
            checked += 1;
        }
        // Branch d threshold.
        if mu * beta + mu - beta < 0.0 {
            let t = 2.0 * (mu + 1.0) * (beta - mu - mu * beta)
                / (beta + mu * beta - mu - mu * mu - 2.0 * mu * mu * beta);
            if t > 1e-3 && t < 2.0 - 1e-3 {
                let lo = drs_rate_mu_coco(mu, beta, t - 1e-10).unwrap().0;
                let hi = drs_rate_mu_coco(mu, beta, t + 1e-10).unwrap().0;
                assert!((lo - hi).abs() < 1e-8, "d-boundary mu={mu} beta={beta}");
                checked += 1;
            }
        }
    }
    assert!(checked > 500, "only {checked} boundary points exercised");
}

/// Branch-(e) parameters stay strictly inside their admissible interval.
#[test]
fn branch_e_mixing_parameter_in_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut hits = 0;
    while hits < 300 {
        let mu = 10f64.powf(rng.random_range(-1.0..1.0));
        let beta = 10f64.powf(rng.random_range(-1.0..1.0));
        let theta = rng.random_range(0.02..1.98);
        if classify_mu_coco(mu, beta, theta).unwrap() != Branch::E {
            continue;
        }
        hits += 1;
        let inst = lower_bound_mu_coco(mu, beta, theta).unwrap();
        let k = inst.k.unwrap();
        assert!(k > 0.0 && k < 1.0 / (beta * beta));
    }
}

/// With theta pinned, the alpha search reproduces the minimum of the
/// fixed-theta curve.
#[test]
fn fixed_theta_search_matches_curve_minimum() {
    let classes = ClassBundle::new(
        OperatorClass::strongly_monotone(Role::A, 1.0),
        OperatorClass::cocoercive(Role::B, 0.2),
        OperatorClass::zero(Role::C),
    )
    .unwrap();
    let search = SearchSettings::<f64> {
        alpha_min: 1e-2,
        alpha_max: 1e2,
        theta_fixed: Some(1.0),
        ..SearchSettings::default()
    };
    let opt = optimize_alpha(&classes, &search).unwrap();
    let alphas: Vec<f64> = (0..400)
        .map(|i| (1e-2f64.ln() + (1e2f64.ln() - 1e-2f64.ln()) * i as f64 / 399.0).exp())
        .collect();
    let curve = rho_curve(&classes, &alphas, Some(1.0), &SolverSettings::default());
    let curve_min = curve.iter().map(|p| p.rho_sq).fold(f64::INFINITY, f64::min);
    assert!(
        opt.rho_sq_star <= curve_min + 1e-6,
        "search {} vs curve {}",
        opt.rho_sq_star,
        curve_min
    );
}

/// f32 instantiation sanity pass through the generic pipeline.
#[test]
fn generic_scalar_f32_smoke() {
    let classes = ClassBundle::<f32>::new(
        OperatorClass::strongly_monotone(Role::A, 1.0f32),
        OperatorClass::cocoercive(Role::B, 1.0f32),
        OperatorClass::zero(Role::C),
    )
    .unwrap();
    let spec = MethodSpec::new(Method::Drs, 1.0f32, 1.0f32).unwrap();
    let opts = ComputeOptions::<f32> {
        settings: SolverSettings { feas_tol: 1e-5, gap_tol: 1e-5, max_iters: 100 },
        want_worst_case: false,
    };
    let r = tight_contraction_factor(&classes, &spec, &opts).unwrap();
    assert!((r.rho_sq - 1.0 / 3.0).abs() < 1e-2, "f32 rho_sq = {}", r.rho_sq);
}
