//! Restitution models, the contraction condition, and unstable-cone
//! diagnostics.
//!
//! A restitution model is a member of an `epsilon`-family: the fraction of
//! normal velocity lost at a collision is `eta(w) = epsilon * q(w)` for a
//! profile `q` evaluated at the normal impact speed `w`. The module also
//! carries the scaled derivatives `eta1(w) = w eta'(w)` and
//! `eta2(w) = w^2 eta''(w)` and their cached sup bounds, which feed the
//! contraction condition and the cone-parameter formulas.

use serde::{Deserialize, Serialize};

use crate::dynamics::{self, ExtPhasePoint};
use crate::error::ModelError;
use crate::geometry::TableGeometry;
use crate::Real;

/// Threshold below which the rational form of the angle derivative is used
/// instead of the sine-product form (which is 0/0 at normal incidence).
pub(crate) const SINE_FORM_THRESHOLD: Real = 1e-6;

/// Grid size for sup-bound scans of tabulated profiles.
const TABULATED_SCAN_POINTS: usize = 1 << 14;
/// Safety inflation applied to scanned sup bounds.
const TABULATED_SCAN_INFLATION: Real = 1.05;

/// `eta` and its scaled derivatives at one normal speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaValues {
    pub eta: Real,
    /// `w * eta'(w)`
    pub eta1: Real,
    /// `w^2 * eta''(w)`
    pub eta2: Real,
}

/// Cached sup bounds of `eta`, `|eta1|`, `|eta2|` over all normal speeds.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SupBounds {
    pub eta_max: Real,
    pub eta1_max: Real,
    pub eta2_max: Real,
}

/// Named or tabulated profile `q0` for power-law models.
#[derive(Debug, Clone)]
pub enum QProfile {
    /// `q0(u) = u / (1 + u)`: bounded, increasing, zero at zero.
    Rational,
    /// `q0(u) = u`: useful for drift computations; its derivative sups are
    /// unbounded, so it cannot back a simulation model.
    Identity,
    /// Monotone cubic through `(u, q0(u))` knots, constant beyond the ends.
    Tabulated(MonotoneCubic),
}

impl QProfile {
    pub fn by_name(name: &str) -> Result<Self, ModelError> {
        match name {
            "rational" => Ok(QProfile::Rational),
            "identity" => Ok(QProfile::Identity),
            other => Err(ModelError::UnknownProfile(other.to_string())),
        }
    }

    /// Value and first two derivatives at `u >= 0`.
    pub fn eval(&self, u: Real) -> (Real, Real, Real) {
        match self {
            QProfile::Rational => {
                let denom = 1.0 + u;
                (u / denom, 1.0 / (denom * denom), -2.0 / (denom * denom * denom))
            }
            QProfile::Identity => (u, 1.0, 0.0),
            QProfile::Tabulated(t) => t.eval(u),
        }
    }

    /// Sup of `q0`, `|u q0'|`, `|u^2 q0''|` over `u >= 0`; `None` when a sup
    /// is unbounded.
    fn sup_constants(&self) -> Option<(Real, Real, Real)> {
        match self {
            // sup u/(1+u) = 1; sup u/(1+u)^2 = 1/4 at u = 1;
            // sup 2u^2/(1+u)^3 = 8/27 at u = 2.
            QProfile::Rational => Some((1.0, 0.25, 8.0 / 27.0)),
            QProfile::Identity => None,
            QProfile::Tabulated(t) => Some(t.scan_sups()),
        }
    }

    fn describe(&self) -> String {
        match self {
            QProfile::Rational => "rational".to_string(),
            QProfile::Identity => "identity".to_string(),
            QProfile::Tabulated(t) => format!("tabulated[{}]", t.knots.len()),
        }
    }
}

/// Kind of restitution model.
#[derive(Debug, Clone)]
pub enum ModelKind {
    /// `eta = epsilon` independently of the impact speed.
    Constant,
    /// `eta(w) = epsilon * q0(w^p)`.
    PowerLaw { profile: QProfile, exponent: Real },
    /// `eta(w) = epsilon * q(w)` with `q` tabulated directly.
    Tabulated(MonotoneCubic),
}

/// One member of a restitution family at a fixed `epsilon`.
#[derive(Debug, Clone)]
pub struct RestitutionModel {
    kind: ModelKind,
    epsilon: Real,
}

impl RestitutionModel {
    pub fn new(kind: ModelKind, epsilon: Real) -> Result<Self, ModelError> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(ModelError::InvalidParameter(format!("epsilon = {epsilon}")));
        }
        if let ModelKind::PowerLaw { exponent, profile } = &kind {
            if !(*exponent > 0.0) {
                return Err(ModelError::InvalidParameter(format!(
                    "power-law exponent must be positive, got {exponent}"
                )));
            }
            let (q0, _, _) = profile.eval(0.0);
            if q0.abs() > 1e-12 {
                return Err(ModelError::InvalidParameter(format!(
                    "power-law profile must vanish at zero, q0(0) = {q0}"
                )));
            }
        }
        let model = Self { kind, epsilon };
        // eta must stay within [0, 1); for the supported kinds the sup over
        // speeds is epsilon * sup q.
        if epsilon > 0.0 {
            let sup_q = match &model.kind {
                ModelKind::Constant => 1.0,
                ModelKind::PowerLaw { profile, .. } => match profile.sup_constants() {
                    Some((sq, _, _)) => sq,
                    None => {
                        // Unbounded derivative sups are tolerated (drift-only
                        // use), but the value sup must still keep eta < 1.
                        match profile {
                            QProfile::Identity => Real::INFINITY,
                            _ => unreachable!(),
                        }
                    }
                },
                ModelKind::Tabulated(t) => t.scan_sups().0,
            };
            if epsilon * sup_q >= 1.0 && !matches!(model.kind, ModelKind::PowerLaw { profile: QProfile::Identity, .. }) {
                return Err(ModelError::EtaOutOfRange { eta: epsilon * sup_q, w: Real::NAN });
            }
        }
        Ok(model)
    }

    /// Constant-restitution model `eta = epsilon`.
    pub fn constant(epsilon: Real) -> Result<Self, ModelError> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(ModelError::EtaOutOfRange { eta: epsilon, w: Real::NAN });
        }
        Self::new(ModelKind::Constant, epsilon)
    }

    /// Elastic dynamics (`eta = 0`).
    pub fn elastic() -> Self {
        Self { kind: ModelKind::Constant, epsilon: 0.0 }
    }

    pub fn power_law(profile: QProfile, exponent: Real, epsilon: Real) -> Result<Self, ModelError> {
        Self::new(ModelKind::PowerLaw { profile, exponent }, epsilon)
    }

    pub fn epsilon(&self) -> Real {
        self.epsilon
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ModelKind::Constant => "constant",
            ModelKind::PowerLaw { .. } => "power_law",
            ModelKind::Tabulated(_) => "tabulated",
        }
    }

    pub fn is_elastic(&self) -> bool {
        self.epsilon == 0.0
    }

    pub fn is_constant_kind(&self) -> bool {
        matches!(self.kind, ModelKind::Constant)
    }

    /// Same family member at a different `epsilon`.
    pub fn with_epsilon(&self, epsilon: Real) -> Result<Self, ModelError> {
        Self::new(self.kind.clone(), epsilon)
    }

    /// `eta`, `eta1`, `eta2` at normal speed `w >= 0`.
    pub fn eval(&self, w: Real) -> Result<EtaValues, ModelError> {
        let v = self.eval_unchecked(w);
        if !(0.0..1.0).contains(&v.eta) {
            return Err(ModelError::EtaOutOfRange { eta: v.eta, w });
        }
        Ok(v)
    }

    fn eval_unchecked(&self, w: Real) -> EtaValues {
        match &self.kind {
            ModelKind::Constant => EtaValues { eta: self.epsilon, eta1: 0.0, eta2: 0.0 },
            ModelKind::PowerLaw { profile, exponent } => {
                if w == 0.0 {
                    return EtaValues { eta: 0.0, eta1: 0.0, eta2: 0.0 };
                }
                let p = *exponent;
                let u = w.powf(p);
                let (q, dq, ddq) = profile.eval(u);
                // eta  = eps q(u),            u = w^p
                // eta1 = w eta'  = eps p u q'(u)
                // eta2 = w^2 eta'' = eps [p^2 u^2 q''(u) + p (p - 1) u q'(u)]
                EtaValues {
                    eta: self.epsilon * q,
                    eta1: self.epsilon * p * u * dq,
                    eta2: self.epsilon * (p * p * u * u * ddq + p * (p - 1.0) * u * dq),
                }
            }
            ModelKind::Tabulated(t) => {
                let (q, dq, ddq) = t.eval(w);
                EtaValues {
                    eta: self.epsilon * q,
                    eta1: self.epsilon * w * dq,
                    eta2: self.epsilon * w * w * ddq,
                }
            }
        }
    }

    /// The epsilon-free profile `q(c) = eta(c) / epsilon` used by the drift
    /// integral. Well-defined for every kind, including `epsilon = 0`.
    pub fn q_effective(&self, c: Real) -> Real {
        match &self.kind {
            ModelKind::Constant => 1.0,
            ModelKind::PowerLaw { profile, exponent } => {
                if c == 0.0 {
                    0.0
                } else {
                    profile.eval(c.powf(*exponent)).0
                }
            }
            ModelKind::Tabulated(t) => t.eval(c).0,
        }
    }

    /// Cached sup bounds over all normal speeds. Errors for profiles whose
    /// derivative sups are unbounded (such models are drift-only).
    pub fn sup_bounds(&self) -> Result<SupBounds, ModelError> {
        match &self.kind {
            ModelKind::Constant => Ok(SupBounds { eta_max: self.epsilon, eta1_max: 0.0, eta2_max: 0.0 }),
            ModelKind::PowerLaw { profile, exponent } => {
                let (sq, s1, s2) = profile
                    .sup_constants()
                    .ok_or_else(|| ModelError::UnboundedSups(profile.describe()))?;
                let p = *exponent;
                Ok(SupBounds {
                    eta_max: self.epsilon * sq,
                    eta1_max: self.epsilon * p * s1,
                    eta2_max: self.epsilon * (p * p * s2 + p * (p - 1.0).abs() * s1),
                })
            }
            ModelKind::Tabulated(t) => {
                let (sq, s1, s2) = t.scan_sups();
                Ok(SupBounds {
                    eta_max: self.epsilon * sq,
                    eta1_max: self.epsilon * s1,
                    eta2_max: self.epsilon * s2,
                })
            }
        }
    }
}

/// Monotone cubic interpolant (Fritsch–Carlson tangents), constant outside
/// the knot range so that sup bounds stay finite.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    knots: Vec<(Real, Real)>,
    tangents: Vec<Real>,
}

impl MonotoneCubic {
    pub fn new(mut points: Vec<(Real, Real)>) -> Result<Self, ModelError> {
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if points.len() < 2 {
            return Err(ModelError::BadTable);
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(ModelError::BadTable);
            }
        }
        let n = points.len();
        let mut secants = Vec::with_capacity(n - 1);
        for w in points.windows(2) {
            secants.push((w[1].1 - w[0].1) / (w[1].0 - w[0].0));
        }
        let mut tangents = vec![0.0; n];
        tangents[0] = secants[0];
        tangents[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            if secants[i - 1] * secants[i] <= 0.0 {
                tangents[i] = 0.0;
            } else {
                tangents[i] = (secants[i - 1] + secants[i]) / 2.0;
            }
        }
        // Fritsch–Carlson monotonicity limiter.
        for i in 0..n - 1 {
            if secants[i] == 0.0 {
                tangents[i] = 0.0;
                tangents[i + 1] = 0.0;
                continue;
            }
            let a = tangents[i] / secants[i];
            let b = tangents[i + 1] / secants[i];
            let s = a * a + b * b;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                tangents[i] = tau * a * secants[i];
                tangents[i + 1] = tau * b * secants[i];
            }
        }
        Ok(Self { knots: points, tangents })
    }

    /// Value and first two derivatives; constant extension outside knots.
    pub fn eval(&self, x: Real) -> (Real, Real, Real) {
        let n = self.knots.len();
        if x <= self.knots[0].0 {
            return (self.knots[0].1, 0.0, 0.0);
        }
        if x >= self.knots[n - 1].0 {
            return (self.knots[n - 1].1, 0.0, 0.0);
        }
        let mut i = match self
            .knots
            .binary_search_by(|k| k.0.partial_cmp(&x).unwrap())
        {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        if i >= n - 1 {
            i = n - 2;
        }
        let (x0, y0) = self.knots[i];
        let (x1, y1) = self.knots[i + 1];
        let h = x1 - x0;
        let t = (x - x0) / h;
        let m0 = self.tangents[i];
        let m1 = self.tangents[i + 1];
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let value = h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1;
        let d_h00 = 6.0 * t2 - 6.0 * t;
        let d_h10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d_h01 = -6.0 * t2 + 6.0 * t;
        let d_h11 = 3.0 * t2 - 2.0 * t;
        let deriv = (d_h00 * y0 + d_h01 * y1) / h + d_h10 * m0 + d_h11 * m1;
        let dd_h00 = 12.0 * t - 6.0;
        let dd_h10 = 6.0 * t - 4.0;
        let dd_h01 = -12.0 * t + 6.0;
        let dd_h11 = 6.0 * t - 2.0;
        let second = (dd_h00 * y0 + dd_h01 * y1) / (h * h) + (dd_h10 * m0 + dd_h11 * m1) / h;
        (value, deriv, second)
    }

    /// Sup of `q`, `|x q'|`, `|x^2 q''|` by dense grid scan over the knot
    /// range (plus knots), inflated by a safety factor.
    fn scan_sups(&self) -> (Real, Real, Real) {
        let lo = self.knots[0].0;
        let hi = self.knots[self.knots.len() - 1].0;
        let mut sq: Real = 0.0;
        let mut s1: Real = 0.0;
        let mut s2: Real = 0.0;
        let mut probe = |x: Real| {
            let (q, dq, ddq) = self.eval(x);
            sq = sq.max(q.abs());
            s1 = s1.max((x * dq).abs());
            s2 = s2.max((x * x * ddq).abs());
        };
        for i in 0..=TABULATED_SCAN_POINTS {
            let x = lo + (hi - lo) * i as Real / TABULATED_SCAN_POINTS as Real;
            probe(x);
        }
        for &(x, _) in &self.knots {
            probe(x);
            probe(x + 1e-9 * (hi - lo));
            probe(x - 1e-9 * (hi - lo));
        }
        (sq, TABULATED_SCAN_INFLATION * s1, TABULATED_SCAN_INFLATION * s2)
    }
}

/// Model description as read from / written to JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: String,
    pub epsilon: Real,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Real>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_profile: Option<ProfileSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileSpec {
    Name(String),
    Pairs(Vec<[Real; 2]>),
}

impl RestitutionModel {
    pub fn from_spec(spec: &ModelSpec) -> Result<Self, ModelError> {
        match spec.kind.as_str() {
            "constant" => Self::constant(spec.epsilon),
            "power_law" => {
                let p = spec.p.unwrap_or(1.0);
                let profile = match &spec.q_profile {
                    Some(ProfileSpec::Name(name)) => QProfile::by_name(name)?,
                    Some(ProfileSpec::Pairs(pairs)) => QProfile::Tabulated(MonotoneCubic::new(
                        pairs.iter().map(|p| (p[0], p[1])).collect(),
                    )?),
                    None => QProfile::Rational,
                };
                Self::power_law(profile, p, spec.epsilon)
            }
            "tabulated" => {
                let pairs = match &spec.q_profile {
                    Some(ProfileSpec::Pairs(pairs)) => pairs,
                    _ => {
                        return Err(ModelError::InvalidParameter(
                            "tabulated kind needs q_profile as [[c, q], ...]".to_string(),
                        ))
                    }
                };
                let interp = MonotoneCubic::new(pairs.iter().map(|p| (p[0], p[1])).collect())?;
                Self::new(ModelKind::Tabulated(interp), spec.epsilon)
            }
            other => Err(ModelError::InvalidParameter(format!("unknown model kind `{other}`"))),
        }
    }

    pub fn to_spec(&self) -> ModelSpec {
        match &self.kind {
            ModelKind::Constant => ModelSpec {
                kind: "constant".to_string(),
                epsilon: self.epsilon,
                p: None,
                q_profile: None,
            },
            ModelKind::PowerLaw { profile, exponent } => ModelSpec {
                kind: "power_law".to_string(),
                epsilon: self.epsilon,
                p: Some(*exponent),
                q_profile: Some(match profile {
                    QProfile::Tabulated(t) => {
                        ProfileSpec::Pairs(t.knots.iter().map(|&(x, y)| [x, y]).collect())
                    }
                    other => ProfileSpec::Name(other.describe()),
                }),
            },
            ModelKind::Tabulated(t) => ModelSpec {
                kind: "tabulated".to_string(),
                epsilon: self.epsilon,
                p: None,
                q_profile: Some(ProfileSpec::Pairs(
                    t.knots.iter().map(|&(x, y)| [x, y]).collect(),
                )),
            },
        }
    }
}

// ---------------------------------------------------------------------------
// Contraction condition and cone parameters
// ---------------------------------------------------------------------------

/// Both sides of the two contraction inequalities, for reporting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionCReport {
    pub holds: bool,
    pub first_lhs: Real,
    pub first_rhs: Real,
    pub second_lhs: Real,
    pub second_rhs: Real,
}

impl ConditionCReport {
    pub fn first_margin(&self) -> Real {
        self.first_rhs - self.first_lhs
    }

    pub fn second_margin(&self) -> Real {
        self.second_rhs - self.second_lhs
    }
}

/// Evaluate the contraction condition for a table/model pair.
pub fn check_condition_c(
    table: &TableGeometry,
    model: &RestitutionModel,
) -> Result<ConditionCReport, ModelError> {
    let b = model.sup_bounds()?;
    let tk_min = table.tau_min() * table.curvature_min();
    let tk_max = table.tau_min() * table.curvature_max();
    let one_minus = 1.0 - b.eta_max;
    let first_lhs = b.eta_max + b.eta1_max;
    let first_rhs = one_minus * tk_min;
    let denom = tk_min - (b.eta_max + b.eta1_max) / one_minus;
    let second_lhs = b.eta1_max / one_minus.powf(2.5)
        * (((2.0 - b.eta_max) / one_minus) * b.eta_max + b.eta1_max)
        / denom;
    let second_rhs = (1.0 - b.eta_max - b.eta1_max) * tk_min / (1.0 + tk_max);
    let holds = first_lhs < first_rhs && second_lhs < second_rhs;
    Ok(ConditionCReport { holds, first_lhs, first_rhs, second_lhs, second_rhs })
}

/// Cone-field parameters: slope window, tilt bound, and expansion rate.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConeParams {
    pub kappa: Real,
    pub v_min: Real,
    pub v_max: Real,
    pub lambda: Real,
}

/// Compute cone parameters with equality in the invariance bounds.
///
/// `kappa` comes first from its consolidated lower bound, then the slope
/// window follows; the expansion rate is
/// `lambda = (1 - eta_max) (1 + tau_min (K_min + v_min))`.
pub fn cone_params(
    table: &TableGeometry,
    model: &RestitutionModel,
) -> Result<ConeParams, ModelError> {
    let report = check_condition_c(table, model)?;
    if !report.holds {
        return Err(ModelError::ConditionC(format!(
            "first: {} !< {}; second: {} !< {}",
            report.first_lhs, report.first_rhs, report.second_lhs, report.second_rhs
        )));
    }
    let b = model.sup_bounds()?;
    let tau_min = table.tau_min();
    let k_min = table.curvature_min();
    let k_max = table.curvature_max();
    let one_minus = 1.0 - b.eta_max;
    let tk_min = tau_min * k_min;
    let reach = k_max + 1.0 / tau_min;

    let kappa = (1.0 + tk_min) / one_minus.sqrt()
        * (((2.0 - b.eta_max) / one_minus) * b.eta_max + b.eta1_max)
        / (tk_min - (b.eta_max + b.eta1_max) / one_minus)
        * reach;
    let tilt_term = b.eta1_max / (one_minus * one_minus) * kappa / (1.0 + tk_min);
    let v_min = (1.0 - b.eta_max - b.eta1_max) * k_min - tilt_term;
    let v_max = (1.0 / one_minus + b.eta1_max) * reach + tilt_term;
    if !(v_min > 0.0) {
        return Err(ModelError::Infeasible(format!("v_min = {v_min} <= 0")));
    }
    let lambda = one_minus * (1.0 + tau_min * (k_min + v_min));
    if !(lambda > 1.0 + tk_min) {
        return Err(ModelError::Infeasible(format!(
            "lambda = {lambda} <= 1 + tau_min K_min = {}",
            1.0 + tk_min
        )));
    }
    Ok(ConeParams { kappa, v_min, v_max, lambda })
}

/// Tangent vector at an extended phase point.
#[derive(Debug, Clone, Copy)]
pub struct TangentVector3 {
    pub ds: Real,
    pub dphi: Real,
    pub dc: Real,
}

/// Cone membership: slope within the window and tilt within `kappa`.
/// Vectors with `ds = 0` are outside by convention.
pub fn in_cone(params: &ConeParams, v: &TangentVector3, base: &ExtPhasePoint) -> bool {
    if v.ds == 0.0 {
        return false;
    }
    let slope = v.dphi / v.ds;
    if !(params.v_min <= slope && slope <= params.v_max) {
        return false;
    }
    let tilt = v.dc / (base.speed * base.point.phi.cos() * v.ds);
    tilt.abs() <= params.kappa
}

/// Adapted norm `cos(phi) |ds|`.
pub fn adapted_norm(v: &TangentVector3, base: &ExtPhasePoint) -> Real {
    base.point.phi.cos() * v.ds.abs()
}

/// Outcome of pushing one cone vector through the map derivative.
#[derive(Debug, Clone, Copy)]
pub struct ConeStepReport {
    pub image_in_cone: bool,
    pub expansion: Real,
}

/// Apply the extended-map derivative to `v` at `x` and report cone
/// membership of the image and the adapted-norm expansion factor.
pub fn verify_cone_step(
    table: &TableGeometry,
    model: &RestitutionModel,
    params: &ConeParams,
    x: &ExtPhasePoint,
    v: &TangentVector3,
) -> Result<ConeStepReport, crate::error::DynamicsError> {
    let step = dynamics::collision_step(table, model, x)?;
    let jac = dynamics::jacobian_extended(table, x, model)?;
    let image = TangentVector3 {
        ds: jac[0][0] * v.ds + jac[0][1] * v.dphi + jac[0][2] * v.dc,
        dphi: jac[1][0] * v.ds + jac[1][1] * v.dphi + jac[1][2] * v.dc,
        dc: jac[2][0] * v.ds + jac[2][1] * v.dphi + jac[2][2] * v.dc,
    };
    let before = adapted_norm(v, x);
    let after = adapted_norm(&image, &step.next);
    Ok(ConeStepReport {
        image_in_cone: in_cone(params, &image, &step.next),
        expansion: after / before,
    })
}

/// Homogeneity-strip index of an angle: 0 for the central band, otherwise
/// the signed `k >= k0` with `pi/2 - 1/k^2 < |phi| <= pi/2 - 1/(k+1)^2`.
pub fn strip_index(phi: Real, k0: u32) -> i64 {
    let half = std::f64::consts::FRAC_PI_2;
    let k0 = k0.max(1) as i64;
    let a = phi.abs();
    let d = half - a;
    if d >= 1.0 / ((k0 * k0) as Real) {
        return 0;
    }
    // Want 1/(k+1)^2 <= d < 1/k^2.
    let r = (1.0 / d).sqrt();
    let mut k = r.floor() as i64;
    if (k as Real) == r {
        k -= 1;
    }
    // Float fixup around the boundaries.
    while k > k0 && d >= 1.0 / ((k * k) as Real) {
        k -= 1;
    }
    while d < 1.0 / (((k + 1) * (k + 1)) as Real) {
        k += 1;
    }
    let k = k.max(k0);
    if phi < 0.0 {
        -k
    } else {
        k
    }
}
