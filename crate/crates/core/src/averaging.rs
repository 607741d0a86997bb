//! Averaged cooling dynamics: the per-collision speed increment, its
//! invariant-measure average, the limiting drift, the averaged initial
//! value problem, and the closed-form cooling line for constant
//! restitution.

use serde::{Deserialize, Serialize};

use crate::dissipation::RestitutionModel;
use crate::error::{ModelError, NumericError};
use crate::geometry::TableGeometry;
use crate::numeric::quad::GaussLegendre;
use crate::numeric::rk4::{self, DenseSolution};
use crate::Real;

/// Default Gauss–Legendre order for drift integrals.
pub const DEFAULT_QUAD_ORDER: usize = 64;

/// Default number of fixed steps per unit of slow time.
pub const DEFAULT_ODE_STEPS: usize = 4096;

/// Default floor on the averaged speed, relative to `c0`.
pub const DEFAULT_SPEED_FLOOR_FRACTION: Real = 1e-6;

/// Per-collision speed increment `g(phi_pre, c)`:
/// the post-collision speed minus `c`, evaluated in the cancellation-free
/// form `-c (2 - eta) eta cos^2 / (1 + sqrt((1-eta)^2 cos^2 + sin^2))`.
pub fn g_increment(
    phi_pre: Real,
    c: Real,
    model: &RestitutionModel,
) -> Result<Real, ModelError> {
    let (sin, cos) = phi_pre.sin_cos();
    let w = (c * cos).max(0.0);
    let eta = model.eval(w)?.eta;
    let one = 1.0 - eta;
    let radical = (one * one * cos * cos + sin * sin).sqrt();
    Ok(-c * (2.0 - eta) * eta * cos * cos / (1.0 + radical))
}

/// Average of `g(., c)` over the invariant measure
/// `cos(phi) dphi ds / (2 |dQ|)`. The increment is independent of `s`, so
/// the average reduces to `(1/2) int_{-pi/2}^{pi/2} g(phi, c) cos(phi) dphi`.
pub fn gbar(c: Real, model: &RestitutionModel, quad: &GaussLegendre<Real>) -> Real {
    let half_pi = std::f64::consts::FRAC_PI_2;
    0.5 * quad.integrate(-half_pi, half_pi, |phi| {
        g_increment(phi, c, model).expect("model valid at sampled speeds") * phi.cos()
    })
}

/// Limiting drift `h(c) = -c int_0^{pi/2} q(c cos phi) cos^3 phi dphi`,
/// with `q` the model's epsilon-free profile.
pub fn drift_h(c: Real, model: &RestitutionModel, quad: &GaussLegendre<Real>) -> Real {
    let half_pi = std::f64::consts::FRAC_PI_2;
    -c * quad.integrate(0.0, half_pi, |phi| {
        let cos = phi.cos();
        model.q_effective(c * cos) * cos * cos * cos
    })
}

/// Reusable drift evaluator bundling a model and a quadrature rule.
#[derive(Debug, Clone)]
pub struct DriftFunction {
    model: RestitutionModel,
    quad: GaussLegendre<Real>,
    order: usize,
}

impl DriftFunction {
    pub fn new(model: RestitutionModel, quad_order: usize) -> Result<Self, NumericError> {
        Ok(Self { model, quad: GaussLegendre::new(quad_order)?, order: quad_order })
    }

    pub fn eval(&self, c: Real) -> Real {
        drift_h(c, &self.model, &self.quad)
    }

    pub fn gbar(&self, c: Real) -> Real {
        gbar(c, &self.model, &self.quad)
    }

    pub fn model(&self) -> &RestitutionModel {
        &self.model
    }

    pub fn quad_order(&self) -> usize {
        self.order
    }
}

/// Deviation of the scaled finite-dissipation average from the limit:
/// `max over the speed grid of |gbar(c) / eps - h(c)|` per family member.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub epsilons: Vec<Real>,
    pub max_deviation: Vec<Real>,
    /// Fitted order of the deviation in epsilon between consecutive levels.
    pub fitted_orders: Vec<Real>,
}

/// Compare `gbar^(eps) / eps` against `h` on a speed grid across a family.
pub fn consistency_h_vs_gbar(
    family: &RestitutionModel,
    c_grid: &[Real],
    eps_list: &[Real],
    quad_order: usize,
) -> Result<ConsistencyReport, crate::Error> {
    let quad = GaussLegendre::new(quad_order).map_err(crate::Error::Numeric)?;
    let mut max_deviation = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let member = family.with_epsilon(eps).map_err(crate::Error::Model)?;
        let mut worst: Real = 0.0;
        for &c in c_grid {
            let h = drift_h(c, &member, &quad);
            let dev = (gbar(c, &member, &quad) / eps - h).abs();
            worst = worst.max(dev);
        }
        max_deviation.push(worst);
    }
    let mut fitted_orders = Vec::new();
    for (e, d) in eps_list.windows(2).zip(max_deviation.windows(2)) {
        let order = (d[0] / d[1]).ln() / (e[0] / e[1]).ln();
        fitted_orders.push(order);
    }
    Ok(ConsistencyReport { epsilons: eps_list.to_vec(), max_deviation, fitted_orders })
}

/// Dense solution of the averaged joint dynamics
/// `dc/dtbar = h(c)`, `dt/dtbar = mean_free_path / c`.
#[derive(Debug, Clone)]
pub struct AveragedSolution {
    solution: DenseSolution<Real, 2>,
    pub t_bar_end: Real,
    pub step: Real,
    pub method: &'static str,
    pub quad_order: usize,
}

impl AveragedSolution {
    /// Averaged speed at slow time `t_bar`.
    pub fn c_bar(&self, t_bar: Real) -> Real {
        self.solution.eval(t_bar)[0]
    }

    /// Physical time at slow time `t_bar`.
    pub fn t_phys(&self, t_bar: Real) -> Real {
        self.solution.eval(t_bar)[1]
    }

    /// Node grid `(t_bar, c_bar, t)`.
    pub fn nodes(&self) -> Vec<(Real, Real, Real)> {
        self.solution.nodes().map(|(t, y)| (t, y[0], y[1])).collect()
    }
}

/// Integrate the averaged IVP with classical fixed-step RK4.
///
/// Integration halts with an error if the speed falls below
/// `floor_fraction * c0` (the physical-time equation stiffens as the speed
/// approaches zero).
pub fn solve_averaged(
    c0: Real,
    drift: &DriftFunction,
    mean_free_path: Real,
    t_bar_end: Real,
    steps: usize,
) -> Result<AveragedSolution, NumericError> {
    solve_averaged_with_floor(c0, drift, mean_free_path, t_bar_end, steps, DEFAULT_SPEED_FLOOR_FRACTION)
}

pub fn solve_averaged_with_floor(
    c0: Real,
    drift: &DriftFunction,
    mean_free_path: Real,
    t_bar_end: Real,
    steps: usize,
    floor_fraction: Real,
) -> Result<AveragedSolution, NumericError> {
    if !(t_bar_end > 0.0) {
        return Err(NumericError::StepSize(t_bar_end));
    }
    let step = t_bar_end / steps as Real;
    let floor = floor_fraction * c0;
    let solution = rk4::integrate_fixed(
        |_t, y: &[Real; 2]| [drift.eval(y[0]), mean_free_path / y[0]],
        [c0, 0.0],
        0.0,
        step,
        steps,
        |t, y| {
            if y[0] < floor {
                Err(NumericError::SpeedFloor { floor, t_bar: t })
            } else {
                Ok(())
            }
        },
    )?;
    Ok(AveragedSolution {
        solution,
        t_bar_end,
        step,
        method: "rk4-fixed",
        quad_order: drift.quad_order(),
    })
}

/// The constant-restitution cooling line: `1/c(t) = intercept + slope * t`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CoolingLine {
    pub slope: Real,
    pub intercept: Real,
}

/// Closed-form reciprocal-speed line for constant restitution:
/// slope `(2/3) |dQ| / (pi |Q|)`, intercept `1 / c0`.
pub fn haff_line(
    c0: Real,
    table: &TableGeometry,
    model: &RestitutionModel,
) -> Result<CoolingLine, ModelError> {
    if !model.is_constant_kind() {
        return Err(ModelError::WrongKind(model.kind_name().to_string()));
    }
    Ok(CoolingLine {
        slope: (2.0 / 3.0) / table.mean_free_path(),
        intercept: 1.0 / c0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissipation::QProfile;
    use crate::geometry::Scatterer;

    fn quad(order: usize) -> GaussLegendre<Real> {
        GaussLegendre::new(order).unwrap()
    }

    /// Adaptive Simpson to tolerance; independent oracle for the drift
    /// quadrature.
    fn adaptive_simpson(f: &dyn Fn(Real) -> Real, a: Real, b: Real, tol: Real) -> Real {
        fn simpson(f: &dyn Fn(Real) -> Real, a: Real, b: Real) -> Real {
            (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
        }
        fn rec(f: &dyn Fn(Real) -> Real, a: Real, b: Real, whole: Real, tol: Real, depth: u32) -> Real {
            let m = 0.5 * (a + b);
            let left = simpson(f, a, m);
            let right = simpson(f, m, b);
            if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, m, left, tol / 2.0, depth - 1)
                    + rec(f, m, b, right, tol / 2.0, depth - 1)
            }
        }
        rec(f, a, b, simpson(f, a, b), tol, 40)
    }

    #[test]
    fn g_vanishes_elastically() {
        let m = RestitutionModel::elastic();
        assert_eq!(g_increment(0.3, 1.0, &m).unwrap(), 0.0);
    }

    #[test]
    fn g_normal_incidence_constant_eta() {
        // phi = 0: both forms reduce to -eta c.
        let m = RestitutionModel::constant(0.1).unwrap();
        let g = g_increment(0.0, 2.0, &m).unwrap();
        assert!((g + 0.1 * 2.0).abs() < 1e-14, "{g}");
    }

    #[test]
    fn g_respects_elementary_bounds() {
        let m = RestitutionModel::power_law(QProfile::Rational, 1.0, 0.05).unwrap();
        let b = m.sup_bounds().unwrap();
        let mut state = 5u64;
        for _ in 0..10_000 {
            state = crate::numeric::seed::mix64(state.wrapping_add(1));
            let phi = 3.0 * ((state >> 11) as Real / (1u64 << 53) as Real - 0.5);
            state = crate::numeric::seed::mix64(state.wrapping_add(1));
            let c = 0.05 + 3.0 * (state >> 11) as Real / (1u64 << 53) as Real;
            let g = g_increment(phi, c, &m).unwrap();
            assert!(g <= 0.0);
            assert!(g >= -b.eta_max * c - 1e-15);
        }
    }

    #[test]
    fn g_matches_collision_speed_difference() {
        // c_{n+1} - c_n from the stepped map equals g at (phi_pre, c_n).
        let mut t = TableGeometry::build(vec![
            Scatterer { center: [0.0, 0.0], radius: 0.4 },
            Scatterer { center: [0.5, 0.5], radius: 0.3 },
        ])
        .unwrap();
        t.certify_finite_horizon(100).unwrap();
        let m = RestitutionModel::constant(1e-3).unwrap();
        let mut x = crate::dynamics::ExtPhasePoint::new(0.4, 0.25, 1.0);
        for _ in 0..10_000 {
            let step = crate::dynamics::collision_step(&t, &m, &x).unwrap();
            let g = g_increment(step.phi_pre, x.speed, &m).unwrap();
            let diff = step.next.speed - x.speed;
            assert!((diff - g).abs() < 1e-13, "diff {diff} vs g {g}");
            x = step.next;
        }
    }

    #[test]
    fn g_phi_derivative_bound() {
        // |dg/dphi| <= c [ (2 - eta_max) eta_max / (1 - eta_max) + eta1_max ]
        let m = RestitutionModel::power_law(QProfile::Rational, 1.0, 0.05).unwrap();
        let b = m.sup_bounds().unwrap();
        let bound_factor = (2.0 - b.eta_max) * b.eta_max / (1.0 - b.eta_max) + b.eta1_max;
        let h = 1e-6;
        for i in 0..40 {
            let phi = -1.5 + 3.0 * i as Real / 39.0;
            for &c in &[0.3, 1.0, 2.5] {
                let gp = g_increment(phi + h, c, &m).unwrap();
                let gm = g_increment(phi - h, c, &m).unwrap();
                let d = (gp - gm) / (2.0 * h);
                assert!(
                    d.abs() <= c * bound_factor + 1e-6,
                    "phi={phi} c={c}: |dg/dphi| = {} > {}",
                    d.abs(),
                    c * bound_factor
                );
            }
        }
    }

    #[test]
    fn gbar_zero_for_elastic() {
        let q = quad(DEFAULT_QUAD_ORDER);
        assert_eq!(gbar(1.0, &RestitutionModel::elastic(), &q), 0.0);
    }

    #[test]
    fn gbar_symmetry_full_vs_doubled_half() {
        let q = quad(DEFAULT_QUAD_ORDER);
        let m = RestitutionModel::constant(0.01).unwrap();
        for &c in &[0.4, 1.0, 3.0] {
            let full = gbar(c, &m, &q);
            let half_pi = std::f64::consts::FRAC_PI_2;
            let half = q.integrate(0.0, half_pi, |phi| {
                g_increment(phi, c, &m).unwrap() * phi.cos()
            });
            assert!((full - half).abs() < 1e-14 * c, "{full} vs {half}");
        }
    }

    #[test]
    fn gbar_over_eps_tends_to_drift() {
        let q = quad(128);
        let base = RestitutionModel::constant(1e-2).unwrap();
        let mut prev: Option<Real> = None;
        for eps in [1e-2, 1e-3, 1e-4] {
            let m = base.with_epsilon(eps).unwrap();
            let c = 1.0;
            let dev = (gbar(c, &m, &q) / eps + 2.0 / 3.0 * c).abs();
            if let Some(p) = prev {
                assert!(dev < 0.2 * p, "first-order shrinkage violated: {dev} vs {p}");
            }
            prev = Some(dev);
        }
    }

    #[test]
    fn drift_constant_model_closed_form() {
        let q = quad(DEFAULT_QUAD_ORDER);
        let m = RestitutionModel::constant(1e-3).unwrap();
        for &c in &[0.1, 1.0, 10.0] {
            let h = drift_h(c, &m, &q);
            assert!((h + 2.0 / 3.0 * c).abs() < 1e-10, "c={c}: {h}");
        }
    }

    #[test]
    fn drift_identity_profile_closed_form() {
        // q(u) = u, p = 1: h(c) = -c^2 * 3 pi / 16.
        let q = quad(DEFAULT_QUAD_ORDER);
        let m = RestitutionModel::power_law(QProfile::Identity, 1.0, 1e-3).unwrap();
        for &c in &[0.5, 1.0, 2.0] {
            let h = drift_h(c, &m, &q);
            let expect = -c * c * 3.0 * std::f64::consts::PI / 16.0;
            assert!((h - expect).abs() < 1e-12 * c.max(1.0), "c={c}: {h} vs {expect}");
        }
    }

    #[test]
    fn drift_matches_adaptive_quadrature_oracle() {
        let q = quad(DEFAULT_QUAD_ORDER);
        let m = RestitutionModel::power_law(QProfile::Rational, 1.0, 1e-3).unwrap();
        for &c in &[0.3, 1.0, 4.0] {
            let h = drift_h(c, &m, &q);
            let mq = m.clone();
            let oracle = -c * adaptive_simpson(
                &move |phi: Real| {
                    let cos = phi.cos();
                    mq.q_effective(c * cos) * cos * cos * cos
                },
                0.0,
                std::f64::consts::FRAC_PI_2,
                1e-12,
            );
            assert!((h - oracle).abs() < 1e-11, "c={c}: {h} vs {oracle}");
        }
    }

    #[test]
    fn drift_quadrature_order_converged() {
        let q64 = quad(64);
        let q128 = quad(128);
        let m = RestitutionModel::power_law(QProfile::Rational, 1.0, 1e-3).unwrap();
        for &c in &[0.1, 1.0, 10.0] {
            let a = drift_h(c, &m, &q64);
            let b = drift_h(c, &m, &q128);
            assert!((a - b).abs() < 1e-12, "c={c}: {a} vs {b}");
        }
    }

    #[test]
    fn consistency_first_order_in_eps() {
        let grid = [0.5, 1.0, 2.0];
        for family in [
            RestitutionModel::constant(1e-2).unwrap(),
            RestitutionModel::power_law(QProfile::Rational, 1.0, 1e-2).unwrap(),
        ] {
            let report =
                consistency_h_vs_gbar(&family, &grid, &[1e-2, 1e-3], DEFAULT_QUAD_ORDER).unwrap();
            let ratio = report.max_deviation[0] / report.max_deviation[1];
            assert!(
                (8.0..=12.0).contains(&ratio),
                "family {}: ratio {ratio}",
                family.kind_name()
            );
        }
    }

    #[test]
    fn consistency_zero_for_zero_profile() {
        // A tabulated profile that is identically zero has no dissipation.
        let spec = crate::dissipation::ModelSpec {
            kind: "tabulated".to_string(),
            epsilon: 1e-2,
            p: None,
            q_profile: Some(crate::dissipation::ProfileSpec::Pairs(vec![
                [0.0, 0.0],
                [10.0, 0.0],
            ])),
        };
        let family = RestitutionModel::from_spec(&spec).unwrap();
        let report =
            consistency_h_vs_gbar(&family, &[0.5, 1.0], &[1e-2, 1e-3], DEFAULT_QUAD_ORDER)
                .unwrap();
        for d in report.max_deviation {
            assert_eq!(d, 0.0);
        }
    }

    #[test]
    fn richardson_extrapolation_agrees_with_drift() {
        // gbar/eps is h + A eps + O(eps^2): extrapolating two levels kills
        // the linear term.
        let q = quad(128);
        let base = RestitutionModel::constant(1e-2).unwrap();
        let c = 1.0;
        let e1 = 1e-4;
        let e2 = 5e-5;
        let g1 = gbar(c, &base.with_epsilon(e1).unwrap(), &q) / e1;
        let g2 = gbar(c, &base.with_epsilon(e2).unwrap(), &q) / e2;
        let extrapolated = (e1 * g2 - e2 * g1) / (e1 - e2);
        let h = drift_h(c, &base, &q);
        assert!((extrapolated - h).abs() < 1e-8, "{extrapolated} vs {h}");
    }

    #[test]
    fn averaged_solution_zero_drift() {
        // q = 0: constant speed, linear physical time.
        let spec = crate::dissipation::ModelSpec {
            kind: "tabulated".to_string(),
            epsilon: 1e-3,
            p: None,
            q_profile: Some(crate::dissipation::ProfileSpec::Pairs(vec![
                [0.0, 0.0],
                [10.0, 0.0],
            ])),
        };
        let model = RestitutionModel::from_spec(&spec).unwrap();
        let drift = DriftFunction::new(model, DEFAULT_QUAD_ORDER).unwrap();
        let mfp = 0.25;
        let c0 = 2.0;
        let sol = solve_averaged(c0, &drift, mfp, 1.0, 256).unwrap();
        for k in 0..=10 {
            let tb = k as Real / 10.0;
            assert!((sol.c_bar(tb) - c0).abs() < 1e-14);
            assert!((sol.t_phys(tb) - mfp * tb / c0).abs() < 1e-13);
        }
    }

    #[test]
    fn averaged_solution_exponential_closed_form() {
        let model = RestitutionModel::constant(1e-3).unwrap();
        let drift = DriftFunction::new(model, DEFAULT_QUAD_ORDER).unwrap();
        let sol = solve_averaged(1.0, &drift, 0.25, 1.0, DEFAULT_ODE_STEPS).unwrap();
        let exact = (-2.0f64 / 3.0).exp();
        assert!((sol.c_bar(1.0) - exact).abs() < 1e-10, "{}", sol.c_bar(1.0));
    }

    #[test]
    fn averaged_solver_fourth_order_convergence() {
        let model = RestitutionModel::constant(1e-3).unwrap();
        let drift = DriftFunction::new(model, DEFAULT_QUAD_ORDER).unwrap();
        let exact = (-2.0f64 / 3.0).exp();
        let err = |steps: usize| {
            let sol = solve_averaged(1.0, &drift, 0.25, 1.0, steps).unwrap();
            (sol.c_bar(1.0) - exact).abs()
        };
        let coarse = err(32);
        let fine = err(64);
        assert!(fine < coarse / 12.0, "coarse {coarse} fine {fine}");
    }

    #[test]
    fn averaged_speed_monotone_for_positive_profile() {
        let model = RestitutionModel::power_law(QProfile::Rational, 1.0, 1e-3).unwrap();
        let drift = DriftFunction::new(model, DEFAULT_QUAD_ORDER).unwrap();
        let sol = solve_averaged(1.0, &drift, 0.25, 2.0, 512).unwrap();
        let nodes = sol.nodes();
        for w in nodes.windows(2) {
            assert!(w[1].1 < w[0].1, "speed not strictly decreasing");
            assert!(w[1].2 > w[0].2, "time not strictly increasing");
        }
        assert!(nodes[0].2 == 0.0);
    }

    #[test]
    fn speed_floor_halts() {
        let model = RestitutionModel::constant(0.5).unwrap();
        let drift = DriftFunction::new(model, DEFAULT_QUAD_ORDER).unwrap();
        let result = solve_averaged_with_floor(1.0, &drift, 0.25, 100.0, 4096, 1e-2);
        assert!(matches!(result, Err(NumericError::SpeedFloor { .. })));
    }

    #[test]
    fn haff_line_values() {
        let t = TableGeometry::build(vec![
            Scatterer { center: [0.0, 0.0], radius: 0.4 },
            Scatterer { center: [0.5, 0.5], radius: 0.3 },
        ])
        .unwrap();
        let m = RestitutionModel::constant(1e-3).unwrap();
        let line = haff_line(1.0, &t, &m).unwrap();
        // mean free path = pi (1 - 0.25 pi) / (1.4 pi) = 0.15328702...
        let mfp = (1.0 - 0.25 * std::f64::consts::PI) / 1.4;
        assert!((t.mean_free_path() - mfp).abs() < 1e-15);
        assert!((t.mean_free_path() - 0.153287).abs() < 1e-6);
        assert!((line.slope - (2.0 / 3.0) / mfp).abs() < 1e-12, "slope {}", line.slope);
        assert!((line.slope - 4.3491395).abs() < 1e-6, "slope {}", line.slope);
        assert_eq!(line.intercept, 1.0);
        let line2 = haff_line(2.0, &t, &m).unwrap();
        assert_eq!(line2.intercept, 0.5);
    }

    #[test]
    fn haff_line_rejects_nonconstant_model() {
        let t = TableGeometry::build(vec![Scatterer { center: [0.0, 0.0], radius: 0.4 }]).unwrap();
        let m = RestitutionModel::power_law(QProfile::Rational, 1.0, 1e-3).unwrap();
        assert!(matches!(haff_line(1.0, &t, &m), Err(ModelError::WrongKind(_))));
    }

    #[test]
    fn solver_reciprocal_speed_is_affine_in_physical_time() {
        // For constant restitution, 1/c(t) against physical time is the
        // cooling line; eliminate t_bar numerically between components.
        let t = TableGeometry::build(vec![
            Scatterer { center: [0.0, 0.0], radius: 0.4 },
            Scatterer { center: [0.5, 0.5], radius: 0.3 },
        ])
        .unwrap();
        let m = RestitutionModel::constant(1e-3).unwrap();
        let drift = DriftFunction::new(m.clone(), DEFAULT_QUAD_ORDER).unwrap();
        let sol = solve_averaged(1.0, &drift, t.mean_free_path(), 1.0, DEFAULT_ODE_STEPS).unwrap();
        let line = haff_line(1.0, &t, &m).unwrap();
        for k in 0..=50 {
            let tb = k as Real / 50.0;
            let inv_c = 1.0 / sol.c_bar(tb);
            let predicted = line.intercept + line.slope * sol.t_phys(tb);
            assert!(
                (inv_c - predicted).abs() < 1e-8 * inv_c,
                "tb={tb}: {inv_c} vs {predicted}"
            );
        }
    }
}
