//! The elastic billiard map, the inelastic extended map, and their
//! analytic Jacobians.
//!
//! Coordinates: `s` is global arc length along the scatterer boundaries,
//! `phi` the angle between the outgoing velocity and the inward normal,
//! positive toward increasing `s` (counterclockwise around the scatterer).
//! In these coordinates an elastic reflection is the identity on `phi`:
//! the incidence angle of the incoming ray, measured against the reflected
//! direction, equals the outgoing angle.
//!
//! One step of the extended map is a free flight to the next scatterer
//! followed by the restitution update
//! `c1 cos(phi1) = (1 - eta) c0 cos(phi_pre)`,
//! `c1 sin(phi1) = c0 sin(phi_pre)`,
//! with `eta` evaluated at the normal impact speed `c0 cos(phi_pre)`.

use crate::dissipation::{RestitutionModel, SINE_FORM_THRESHOLD};
use crate::error::{DynamicsError, ModelError};
use crate::geometry::TableGeometry;
use crate::numeric::kahan::KahanSum;
use crate::Real;

/// Collisions with `cos(phi_pre)` below this are treated as grazing.
pub const GRAZING_TOLERANCE: Real = 1e-9;

/// Search radius for free flights on tables without a horizon certificate
/// (test geometries); certified tables use their `tau_max`.
const UNCERTIFIED_SEARCH_RADIUS: Real = 8.0;

/// Reject intersection parameters below this to skip the departure point.
const T_EPSILON: Real = 1e-10;

/// Boundary collision coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    /// Global arc length in `[0, perimeter)`.
    pub s: Real,
    /// Reflection angle in `(-pi/2, pi/2)`.
    pub phi: Real,
}

/// Phase point extended with the particle speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtPhasePoint {
    pub point: PhasePoint,
    pub speed: Real,
}

impl ExtPhasePoint {
    pub fn new(s: Real, phi: Real, speed: Real) -> Self {
        Self { point: PhasePoint { s, phi }, speed }
    }
}

/// Result of tracing a free flight to the next collision.
#[derive(Debug, Clone, Copy)]
pub struct FreeFlight {
    /// Arc length of the hit point.
    pub s_next: Real,
    /// Pre-collision angle at the hit point.
    pub phi_pre: Real,
    /// Flight length.
    pub tau: Real,
    /// Scatterer hit.
    pub next_index: usize,
}

/// One application of the extended map.
#[derive(Debug, Clone, Copy)]
pub struct CollisionStep {
    pub next: ExtPhasePoint,
    pub tau: Real,
    pub phi_pre: Real,
    /// Restitution coefficient used, evaluated at the normal impact speed.
    pub eta: Real,
}

/// Angle/speed update at a collision.
#[derive(Debug, Clone, Copy)]
pub struct RestitutionOutcome {
    pub phi_out: Real,
    pub speed_out: Real,
    pub eta: Real,
}

/// 2x2 Jacobian in `(s, phi)`.
pub type Jacobian2 = [[Real; 2]; 2];
/// 3x3 Jacobian in `(s, phi, c)`.
pub type Jacobian3 = [[Real; 3]; 3];

/// Trace the ray leaving the boundary at `x` to its next intersection.
///
/// The ray is unfolded over lattice translates within the certified
/// `tau_max` (or a fixed fallback radius on uncertified tables); the
/// nearest transversal intersection wins. The near root of each ray-circle
/// quadratic is evaluated in the cancellation-free citardauq form.
pub fn free_flight(table: &TableGeometry, x: &PhasePoint) -> Result<FreeFlight, DynamicsError> {
    let start = table.boundary_point(x.s).map_err(DynamicsError::Geometry)?;
    if !x.phi.is_finite() || x.phi.abs() > std::f64::consts::FRAC_PI_2 {
        return Err(DynamicsError::InvalidPhasePoint { s: x.s, phi: x.phi });
    }
    let (n, tvec) = (start.normal, [-start.normal[1], start.normal[0]]);
    let (sin_phi, cos_phi) = x.phi.sin_cos();
    let dir = [
        cos_phi * n[0] + sin_phi * tvec[0],
        cos_phi * n[1] + sin_phi * tvec[1],
    ];
    let (search_radius, certified) = match table.tau_max() {
        Some(tm) => (tm, Some(tm)),
        None => (UNCERTIFIED_SEARCH_RADIUS, None),
    };
    let cells = search_radius.ceil() as i64 + 2;
    let p0 = start.position;

    let mut best_t = Real::INFINITY;
    let mut best: Option<(usize, Real, Real)> = None; // (scatterer, cx, cy)
    for (j, sc) in table.scatterers().iter().enumerate() {
        for vx in -cells..=cells {
            for vy in -cells..=cells {
                let cx = sc.center[0] + vx as Real;
                let cy = sc.center[1] + vy as Real;
                let ex = cx - p0[0];
                let ey = cy - p0[1];
                let b = dir[0] * ex + dir[1] * ey;
                let c = ex * ex + ey * ey - sc.radius * sc.radius;
                let disc = b * b - c;
                if disc < 0.0 {
                    continue;
                }
                let sq = disc.sqrt();
                // Near root; stable form when b > 0 and c > 0.
                let t = if b > 0.0 && c > 0.0 { c / (b + sq) } else { b - sq };
                if t > T_EPSILON && t < best_t {
                    best_t = t;
                    best = Some((j, cx, cy));
                }
            }
        }
    }
    let (j, cx, cy) = best.ok_or(DynamicsError::HorizonViolation {
        s: x.s,
        phi: x.phi,
        search_radius,
        certified,
    })?;
    let hit = [p0[0] + best_t * dir[0], p0[1] + best_t * dir[1]];
    let theta = (hit[1] - cy).atan2(hit[0] - cx);
    let s_next = table.s_global_at(j, theta);
    let (sin_th, cos_th) = theta.sin_cos();
    // cos(phi_pre) = -dir . normal; sin(phi_pre) = dir . tangent.
    let cos_pre = -(dir[0] * cos_th + dir[1] * sin_th);
    let sin_pre = -dir[0] * sin_th + dir[1] * cos_th;
    if cos_pre < GRAZING_TOLERANCE {
        return Err(DynamicsError::Grazing { cos_phi: cos_pre, tolerance: GRAZING_TOLERANCE });
    }
    if let Some(tau_max) = certified {
        let tau_min = table.tau_min();
        if best_t > tau_max || best_t < tau_min * (1.0 - 1e-12) {
            return Err(DynamicsError::FreePathOutOfRange {
                tau: best_t,
                tau_min,
                tau_max,
            });
        }
    }
    Ok(FreeFlight {
        s_next,
        phi_pre: sin_pre.atan2(cos_pre),
        tau: best_t,
        next_index: j,
    })
}

/// Elastic reflection in `(s, phi)` coordinates: the identity on the angle.
#[inline]
pub fn reflect_elastic(phi_pre: Real) -> Real {
    phi_pre
}

/// The standard billiard map: free flight plus elastic reflection.
pub fn elastic_step(table: &TableGeometry, x: &PhasePoint) -> Result<PhasePoint, DynamicsError> {
    let flight = free_flight(table, x)?;
    Ok(PhasePoint { s: flight.s_next, phi: reflect_elastic(flight.phi_pre) })
}

/// Restitution update at a collision.
///
/// `phi_out = atan2(sin(phi_pre), (1 - eta) cos(phi_pre))` and
/// `speed_out = speed * sqrt((1 - eta)^2 cos^2 + sin^2)`, with the radical
/// clamped into `[1 - eta, 1]` so the per-collision speed bracket holds
/// exactly in floating point. `eta = 0` short-circuits to the identity.
pub fn apply_restitution(
    phi_pre: Real,
    speed: Real,
    model: &RestitutionModel,
) -> Result<RestitutionOutcome, ModelError> {
    let (sin_pre, cos_pre) = phi_pre.sin_cos();
    let w = (speed * cos_pre).max(0.0);
    let eta = model.eval(w)?.eta;
    if eta == 0.0 {
        return Ok(RestitutionOutcome { phi_out: phi_pre, speed_out: speed, eta });
    }
    let a = (1.0 - eta) * cos_pre;
    let radical = (a * a + sin_pre * sin_pre).sqrt().clamp(1.0 - eta, 1.0);
    Ok(RestitutionOutcome {
        phi_out: sin_pre.atan2(a),
        speed_out: speed * radical,
        eta,
    })
}

/// One application of the extended map: flight, then restitution.
pub fn collision_step(
    table: &TableGeometry,
    model: &RestitutionModel,
    x: &ExtPhasePoint,
) -> Result<CollisionStep, DynamicsError> {
    let flight = free_flight(table, &x.point)?;
    let out = apply_restitution(flight.phi_pre, x.speed, model).map_err(DynamicsError::Model)?;
    Ok(CollisionStep {
        next: ExtPhasePoint::new(flight.s_next, out.phi_out, out.speed_out),
        tau: flight.tau,
        phi_pre: flight.phi_pre,
        eta: out.eta,
    })
}

/// Physical-time update: `t + epsilon * tau / c`.
#[inline]
pub fn advance_time(t: Real, tau: Real, c: Real, epsilon: Real) -> Real {
    t + epsilon * tau / c
}

/// Derivative of the elastic map at `x` in `(s, phi)`.
pub fn jacobian_elastic(table: &TableGeometry, x: &PhasePoint) -> Result<Jacobian2, DynamicsError> {
    let start = table.boundary_point(x.s).map_err(DynamicsError::Geometry)?;
    let flight = free_flight(table, x)?;
    let k0 = 1.0 / table.scatterers()[start.scatterer_index].radius;
    let k1 = 1.0 / table.scatterers()[flight.next_index].radius;
    let tau = flight.tau;
    let cos0 = x.phi.cos();
    let cos1 = flight.phi_pre.cos();
    let pre = -1.0 / cos1;
    Ok([
        [pre * (tau * k0 + cos0), pre * tau],
        [
            pre * (tau * k0 * k1 + k0 * cos1 + k1 * cos0),
            pre * (tau * k1 + cos1),
        ],
    ])
}

/// Derivative of the restitution update: `d(phi1, c1) / d(phi_pre, c0)`.
///
/// Away from normal incidence the angle diagonal uses the sine-product
/// form; within `|sin(phi_pre)| < 1e-6` the rational form takes over (the
/// sine-product form is 0/0 there). The two forms agree elsewhere.
pub fn jacobian_restitution(
    phi_pre: Real,
    c0: Real,
    model: &RestitutionModel,
) -> Result<Jacobian2, ModelError> {
    let (sin_pre, cos_pre) = phi_pre.sin_cos();
    let w = (c0 * cos_pre).max(0.0);
    let vals = model.eval(w)?;
    let (eta, eta1) = (vals.eta, vals.eta1);
    let one = 1.0 - eta;
    let r2 = one * one * cos_pre * cos_pre + sin_pre * sin_pre;
    let r = r2.sqrt();
    let sin1 = sin_pre / r;
    let cos1 = one * cos_pre / r;

    let dphi_dphi = if sin_pre.abs() < SINE_FORM_THRESHOLD {
        one / r2 - sin1 * sin1 * eta1
    } else {
        sin1 * cos1 / (sin_pre * cos_pre) - sin1 * sin1 * eta1
    };
    let dphi_dc = sin_pre * cos_pre * eta1 / (c0 * r2);
    let dc_dphi = c0 * sin_pre * cos1 * ((2.0 - eta) * eta / one + eta1);
    let dc_dc = if sin_pre.abs() < SINE_FORM_THRESHOLD {
        r - cos1 * cos_pre * eta1
    } else {
        sin_pre / sin1 - cos1 * cos_pre * eta1
    };
    Ok([[dphi_dphi, dphi_dc], [dc_dphi, dc_dc]])
}

/// Derivative of the extended map at `x` in `(s, phi, c)`: the bordered
/// elastic block composed with the restitution block.
pub fn jacobian_extended(
    table: &TableGeometry,
    x: &ExtPhasePoint,
    model: &RestitutionModel,
) -> Result<Jacobian3, DynamicsError> {
    let flight = free_flight(table, &x.point)?;
    let df = jacobian_elastic(table, &x.point)?;
    let dp =
        jacobian_restitution(flight.phi_pre, x.speed, model).map_err(DynamicsError::Model)?;
    let [[a, b], [c, d]] = dp;
    Ok([
        [df[0][0], df[0][1], 0.0],
        [a * df[1][0], a * df[1][1], b],
        [c * df[1][0], c * df[1][1], d],
    ])
}

/// One recorded collision of a running trajectory.
#[derive(Debug, Clone, Copy)]
pub struct CollisionRecord {
    /// 1-based collision index.
    pub n: u64,
    pub s: Real,
    pub phi: Real,
    pub c: Real,
    pub tau: Real,
    pub t: Real,
    pub eta: Real,
}

/// Stepper that iterates the joint dynamics and tracks physical time with
/// compensated summation.
#[derive(Debug, Clone)]
pub struct TrajectoryRunner<'a> {
    table: &'a TableGeometry,
    model: &'a RestitutionModel,
    state: ExtPhasePoint,
    time: KahanSum<Real>,
    count: u64,
}

impl<'a> TrajectoryRunner<'a> {
    pub fn new(table: &'a TableGeometry, model: &'a RestitutionModel, x0: ExtPhasePoint) -> Self {
        Self { table, model, state: x0, time: KahanSum::new(), count: 0 }
    }

    pub fn state(&self) -> &ExtPhasePoint {
        &self.state
    }

    pub fn time(&self) -> Real {
        self.time.value()
    }

    /// Advance one collision; the time increment `epsilon * tau / c` uses
    /// the pre-collision speed.
    pub fn step(&mut self) -> Result<CollisionRecord, DynamicsError> {
        let step = collision_step(self.table, self.model, &self.state)?;
        self.time
            .add(self.model.epsilon() * step.tau / self.state.speed);
        self.state = step.next;
        self.count += 1;
        Ok(CollisionRecord {
            n: self.count,
            s: self.state.point.s,
            phi: self.state.point.phi,
            c: self.state.speed,
            tau: step.tau,
            t: self.time.value(),
            eta: step.eta,
        })
    }
}
