//! Event-driven billiard evolution: exact first intersection of geodesic
//! arcs with the table boundary, reflection stepping, trajectory assembly.
//!
//! Every face constraint composed with the flow is an explicit closed form:
//!
//! * wall faces: `Q(t) = ‖π(t) − C‖² − R²` has `Q̈ + a²Q̇' = …` — its
//!   derivative is a pure sinusoid in `at`, so the critical times are
//!   closed-form and `Q` is monotone in between;
//! * vertical planes: `ẏ = c(t)` is a sinusoid, same story;
//! * horizontal faces: `ż = ½(xc − yb)` is a drifting sinusoid whose own
//!   derivative chain terminates in closed-form zeros, giving the exact
//!   monotone decomposition of `z(t)`.
//!
//! Roots are then isolated by sign change on monotone pieces and refined by
//! bisection. No root can be missed short of an exact double tangency at
//! tolerance level.

use crate::geometry::{flow, GeodesicArc, State};
use crate::reflection::{reflect, ReflectionOutcome};
use crate::tables::{BoundaryContact, FaceGeometry, TableSpec, BOUNDARY_TOL};

/// Search restart offset after a reflection, so the contact just processed
/// is not re-detected. Documented so runs are reproducible bit for bit.
pub const LIFTOFF: f64 = 1e-10;

/// Default bisection tolerance for event times.
pub const EVENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    StartsOutside { distance: f64 },
    /// Start lies on the boundary but does not point strictly inward.
    NotInward,
}

impl std::fmt::Display for SimError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SimError::StartsOutside { distance } => {
                write!(f, "start point outside the table (signed distance {distance:e})")
            }
            SimError::NotInward => write!(f, "boundary start does not point inward"),
        }
    }
}

impl std::error::Error for SimError {}

/// A boundary event on the current arc.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    /// Arc parameter of the contact (arclength from the arc start).
    pub time: f64,
    pub contact: BoundaryContact,
    /// `None` exactly for corner hits, where no reflection is attempted.
    pub outcome: Option<ReflectionOutcome>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    MaxBounces,
    MaxLength,
    CornerHit,
    SingularHit,
    OuterTangencyStop,
    /// The final arc provably never returns to the boundary.
    Escaped,
}

impl Termination {
    pub fn name(&self) -> &'static str {
        match self {
            Termination::MaxBounces => "max_bounces",
            Termination::MaxLength => "max_length",
            Termination::CornerHit => "corner_hit",
            Termination::SingularHit => "singular_hit",
            Termination::OuterTangencyStop => "outer_tangency_stop",
            Termination::Escaped => "escaped",
        }
    }
}

/// Alternating arcs and events, with the cause of termination.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub table: TableSpec,
    pub arcs: Vec<GeodesicArc>,
    pub events: Vec<Event>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn total_length(&self) -> f64 {
        self.arcs.iter().map(|a| a.duration).sum()
    }

    /// Phase point at the end of the run: the post-reflection state after
    /// the last event, or the end of the trailing arc. `None` when the run
    /// stopped at a contact with no outgoing momentum.
    pub fn final_state(&self) -> Option<State> {
        if self.arcs.len() > self.events.len() {
            return Some(self.arcs.last().unwrap().end());
        }
        let ev = self.events.last()?;
        match ev.outcome {
            Some(ReflectionOutcome::NonDegenerate { out, .. }) => Some(State {
                point: ev.contact.point,
                momentum: out,
            }),
            Some(ReflectionOutcome::InnerTangency) => Some(State {
                point: ev.contact.point,
                momentum: self.arcs.last().unwrap().end().momentum,
            }),
            _ => None,
        }
    }
}

/// Runtime knobs for [`run`]; `Default` matches the documented tolerances.
#[derive(Debug, Clone, Copy)]
pub struct RunParams {
    pub max_bounces: usize,
    pub max_length: f64,
    pub root_tol: f64,
}

impl Default for RunParams {
    fn default() -> Self {
        RunParams {
            max_bounces: 100,
            max_length: 1e3,
            root_tol: EVENT_TOL,
        }
    }
}

/// Zeros of `A·cos(at) + B·sin(at)` in `(lo, hi]`, for `a ≠ 0`. The zero
/// set is `θ*/a + kπ/a` with `θ* = atan2(−A, B)`.
fn sinusoid_zeros(a: f64, big_a: f64, big_b: f64, lo: f64, hi: f64, out: &mut Vec<f64>) {
    if big_a == 0.0 && big_b == 0.0 {
        return;
    }
    let theta = (-big_a).atan2(big_b);
    let base = theta / a;
    let step = std::f64::consts::PI / a.abs();
    let mut k = ((lo - base) / step).ceil();
    // guard against landing exactly on lo
    while base + k * step <= lo {
        k += 1.0;
    }
    let mut t = base + k * step;
    while t <= hi {
        out.push(t);
        k += 1.0;
        t = base + k * step;
    }
}

/// Scans `f` over the monotone pieces delimited by `breaks` (sorted, within
/// `(lo, hi]`) and returns the first root after `lo`. `f(lo) = 0` is not a
/// root: the caller has already lifted off the boundary.
fn first_root_on_pieces<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    tol: f64,
) -> Option<f64> {
    let mut left = lo;
    let mut f_left = f(lo);
    let ends = breaks.iter().copied().chain(std::iter::once(hi));
    for right in ends {
        if right <= left {
            continue;
        }
        let f_right = f(right);
        if f_right == 0.0 {
            return Some(right);
        }
        if f_left != 0.0 && f_left.signum() != f_right.signum() {
            let root = crate::num::bisect(f, left, right, tol).ok()?;
            return Some(root);
        }
        left = right;
        f_left = f_right;
    }
    None
}

/// First time in `(t_lo, t_hi]` at which the geodesic from `s` meets the
/// face carrier, or `None`.
fn face_first_root(
    face: &FaceGeometry,
    s: &State,
    t_lo: f64,
    t_hi: f64,
    tol: f64,
) -> Option<f64> {
    if t_hi <= t_lo {
        return None;
    }
    let a = s.momentum.a;
    let (b0, c0) = (s.momentum.b, s.momentum.c);
    let p0 = s.point;
    match *face {
        FaceGeometry::Wall { center, radius } => {
            let f = |t: f64| {
                let p = flow(s, t).point;
                let dx = p.x - center.0;
                let dy = p.y - center.1;
                dx * dx + dy * dy - radius * radius
            };
            let ex = p0.x - center.0;
            let ey = p0.y - center.1;
            let q1 = 2.0 * (ex * b0 + ey * c0);
            let q2 = 2.0 + 2.0 * a * (ey * b0 - ex * c0);
            if a == 0.0 {
                // Q is the exact quadratic q0 + q1·t + t²
                let q0 = ex * ex + ey * ey - radius * radius;
                let disc = q1 * q1 - 4.0 * q0;
                if disc < 0.0 {
                    return None;
                }
                let sq = disc.sqrt();
                for root in [(-q1 - sq) / 2.0, (-q1 + sq) / 2.0] {
                    if root > t_lo && root <= t_hi {
                        return Some(root);
                    }
                }
                return None;
            }
            let mut crit = Vec::new();
            sinusoid_zeros(a, a * q1, q2, t_lo, t_hi, &mut crit);
            first_root_on_pieces(&f, t_lo, t_hi, &crit, tol)
        }
        FaceGeometry::Vertical { offset } => {
            let f = |t: f64| flow(s, t).point.y - offset;
            if a == 0.0 {
                if c0 == 0.0 {
                    return None;
                }
                let root = (offset - p0.y) / c0;
                return (root > t_lo && root <= t_hi).then_some(root);
            }
            let mut crit = Vec::new();
            // ẏ = c(t) = c0·cos(at) + b0·sin(at)
            sinusoid_zeros(a, c0, b0, t_lo, t_hi, &mut crit);
            first_root_on_pieces(&f, t_lo, t_hi, &crit, tol)
        }
        FaceGeometry::Horizontal { z, .. } => {
            let f = |t: f64| flow(s, t).point.z - z;
            if a == 0.0 {
                // ż is constant on straight lifts
                let slope = 0.5 * (p0.x * c0 - p0.y * b0);
                if slope == 0.0 {
                    return None;
                }
                let root = (z - p0.z) / slope;
                return (root > t_lo && root <= t_hi).then_some(root);
            }
            let crit = z_critical_times(s, t_lo, t_hi, tol);
            let root = first_root_on_pieces(&f, t_lo, t_hi, &crit, tol)?;
            // A crossing through the singular point of the face is an
            // inflection of z (ż and z̈ both vanish there), so bisection
            // stalls in a rounding plateau of width ~ε^(1/3). The passage
            // itself is the transversal zero of V = xb + yc; re-anchor on it
            // when the slope at the located root has collapsed.
            let w_at = |t: f64| {
                let st = flow(s, t);
                st.point.x * st.momentum.c - st.point.y * st.momentum.b
            };
            if w_at(root).abs() < 1e-8 {
                let v_at = |t: f64| {
                    let st = flow(s, t);
                    st.point.x * st.momentum.b + st.point.y * st.momentum.c
                };
                let lo = (root - 1e-4).max(t_lo);
                let hi = (root + 1e-4).min(t_hi);
                if v_at(lo) * v_at(hi) < 0.0 {
                    if let Ok(polished) = crate::num::bisect(&v_at, lo, hi, tol) {
                        return Some(polished);
                    }
                }
            }
            Some(root)
        }
    }
}

/// Critical times of `z(t)` in `(t_lo, t_hi]`: zeros of
/// `W(t) = x(t)c(t) − y(t)b(t) = 2ż`, isolated on the monotone pieces cut
/// by the closed-form zeros of `V(t) = x b + y c` (since `Ẇ = aV`).
pub(crate) fn z_critical_times(s: &State, t_lo: f64, t_hi: f64, tol: f64) -> Vec<f64> {
    let a = s.momentum.a;
    let (b0, c0) = (s.momentum.b, s.momentum.c);
    let p0 = s.point;
    let w = |t: f64| {
        let st = flow(s, t);
        st.point.x * st.momentum.c - st.point.y * st.momentum.b
    };
    let mut crit = Vec::new();
    if a == 0.0 {
        return crit;
    }
    let w0 = p0.x * c0 - p0.y * b0;
    let v0 = p0.x * b0 + p0.y * c0;
    let mut v_zeros = Vec::new();
    sinusoid_zeros(a, a * v0, 1.0 - a * w0, t_lo, t_hi, &mut v_zeros);

    let mut left = t_lo;
    let mut w_left = w(t_lo);
    for right in v_zeros.iter().copied().chain(std::iter::once(t_hi)) {
        if right <= left {
            continue;
        }
        let w_right = w(right);
        if w_right == 0.0 {
            crit.push(right);
        } else if w_left != 0.0 && w_left.signum() != w_right.signum() {
            if let Ok(root) = crate::num::bisect(&w, left, right, tol) {
                crit.push(root);
            }
        }
        left = right;
        w_left = w_right;
    }
    crit
}

/// Minimum of `z` along an arc, including the endpoints.
pub fn min_z_on_arc(arc: &GeodesicArc) -> f64 {
    let mut m = arc.start.point.z.min(arc.end().point.z);
    for t in z_critical_times(&arc.start, 0.0, arc.duration, EVENT_TOL) {
        m = m.min(arc.state_at(t).point.z);
    }
    m
}

/// Whether the geodesic from `s` meets the face at any time `> t_lo`,
/// however large. Decidable in closed form for every face type.
fn face_hits_eventually(face: &FaceGeometry, s: &State, t_lo: f64) -> bool {
    let a = s.momentum.a;
    let (b0, c0) = (s.momentum.b, s.momentum.c);
    let p0 = s.point;
    match *face {
        FaceGeometry::Wall { center, radius } => {
            if a == 0.0 {
                let ex = p0.x - center.0;
                let ey = p0.y - center.1;
                let q1 = 2.0 * (ex * b0 + ey * c0);
                let q0 = ex * ex + ey * ey - radius * radius;
                let disc = q1 * q1 - 4.0 * q0;
                return disc >= 0.0 && (-q1 + disc.sqrt()) / 2.0 > t_lo;
            }
            // the projected circle either meets the wall within one period
            // or never does
            let period = 2.0 * std::f64::consts::PI / a.abs();
            face_first_root(face, s, t_lo, t_lo + 1.0001 * period, EVENT_TOL).is_some()
        }
        FaceGeometry::Vertical { .. } => {
            if a == 0.0 {
                return face_first_root(face, s, t_lo, f64::MAX, EVENT_TOL).is_some();
            }
            let period = 2.0 * std::f64::consts::PI / a.abs();
            face_first_root(face, s, t_lo, t_lo + 1.0001 * period, EVENT_TOL).is_some()
        }
        FaceGeometry::Horizontal { z, .. } => {
            if a == 0.0 {
                let slope = 0.5 * (p0.x * c0 - p0.y * b0);
                return slope != 0.0 && (z - p0.z) / slope > t_lo;
            }
            // z drifts by π/a per period (signed); the infimum/supremum of
            // the future is attained within the first period
            let period = 2.0 * std::f64::consts::PI / a.abs();
            let mut extreme = flow(s, t_lo).point.z;
            let better = |cur: f64, cand: f64| if a > 0.0 { cand.min(cur) } else { cand.max(cur) };
            for t in z_critical_times(s, t_lo, t_lo + period, EVENT_TOL) {
                extreme = better(extreme, flow(s, t).point.z);
            }
            extreme = better(extreme, flow(s, t_lo + period).point.z);
            if a > 0.0 {
                z >= extreme
            } else {
                z <= extreme
            }
        }
    }
}

/// Exact first boundary intersection of the geodesic from `s`, searched on
/// `(liftoff, horizon]`. Returns `None` when no face is met before the
/// horizon. The search restarts at [`LIFTOFF`] whenever `s` sits on the
/// boundary, so the previous contact is not re-detected.
pub fn next_event(table: &TableSpec, s: &State, horizon: f64) -> Result<Option<Event>, SimError> {
    next_event_with_tol(table, s, horizon, EVENT_TOL)
}

pub fn next_event_with_tol(
    table: &TableSpec,
    s: &State,
    horizon: f64,
    tol: f64,
) -> Result<Option<Event>, SimError> {
    let t_lo = validate_start(table, s)?;
    Ok(raw_next_event(table, s, t_lo, horizon, tol).map(|(t, _)| make_event(table, s, t)))
}

fn validate_start(table: &TableSpec, s: &State) -> Result<f64, SimError> {
    let d = table.signed_distance(&s.point);
    if d > BOUNDARY_TOL {
        return Err(SimError::StartsOutside { distance: d });
    }
    if d.abs() <= BOUNDARY_TOL {
        // boundary start: require strictly inward pairing ⟨dG, velocity⟩ < 0
        if let Ok(contact) = table.boundary_contact(&s.point) {
            let pairing = contact.dg.b * s.momentum.b + contact.dg.c * s.momentum.c;
            if pairing >= 0.0 {
                return Err(SimError::NotInward);
            }
        }
        return Ok(LIFTOFF);
    }
    Ok(0.0)
}

fn raw_next_event(
    table: &TableSpec,
    s: &State,
    t_lo: f64,
    horizon: f64,
    tol: f64,
) -> Option<(f64, FaceGeometry)> {
    let mut best: Option<(f64, FaceGeometry)> = None;
    for fg in table.faces() {
        if let Some(t) = face_first_root(&fg, s, t_lo, horizon, tol) {
            if best.map_or(true, |(bt, _)| t < bt) {
                best = Some((t, fg));
            }
        }
    }
    best
}

fn make_event(table: &TableSpec, s: &State, t: f64) -> Event {
    let hit = flow(s, t);
    let contact = table
        .boundary_contact(&hit.point)
        .expect("event point lies on the boundary by construction");
    let outcome = if contact.is_corner {
        None
    } else {
        // momentum is unit by construction along the flow
        Some(reflect(table, &hit.momentum, &contact).expect("unit momentum"))
    };
    Event {
        time: t,
        contact,
        outcome,
    }
}

/// Runs the billiard map from `s` until a termination condition is met.
pub fn run(table: &TableSpec, s: &State, params: &RunParams) -> Result<Trajectory, SimError> {
    assert!(
        params.max_length.is_finite() && params.max_length > 0.0,
        "run needs a finite positive length budget"
    );
    let mut state = *s;
    let mut t_lo = validate_start(table, &state)?;
    let mut arcs = Vec::new();
    let mut events: Vec<Event> = Vec::new();
    let mut remaining = params.max_length;

    loop {
        match raw_next_event(table, &state, t_lo, remaining, params.root_tol) {
            None => {
                arcs.push(GeodesicArc::new(state, remaining));
                let escaped = !table
                    .faces()
                    .iter()
                    .any(|fg| face_hits_eventually(fg, &state, t_lo));
                return Ok(Trajectory {
                    table: *table,
                    arcs,
                    events,
                    termination: if escaped {
                        Termination::Escaped
                    } else {
                        Termination::MaxLength
                    },
                });
            }
            Some((t, _)) => {
                let event = make_event(table, &state, t);
                arcs.push(GeodesicArc::new(state, t));
                remaining -= t;
                let contact = event.contact;
                let outcome = event.outcome;
                events.push(event);

                let termination = match outcome {
                    None => Some(Termination::CornerHit),
                    Some(ReflectionOutcome::SingularPoint) => Some(Termination::SingularHit),
                    Some(ReflectionOutcome::OuterTangency) => {
                        Some(Termination::OuterTangencyStop)
                    }
                    _ if events.len() >= params.max_bounces => Some(Termination::MaxBounces),
                    Some(ReflectionOutcome::NonDegenerate { out, .. }) => {
                        // renormalise the planar momentum so rounding drift
                        // cannot accumulate over long bounce sequences
                        let n = out.planar_norm_sq().sqrt();
                        state = State {
                            point: contact.point,
                            momentum: crate::geometry::Covector::new(out.a, out.b / n, out.c / n),
                        };
                        t_lo = LIFTOFF;
                        None
                    }
                    Some(ReflectionOutcome::InnerTangency) => {
                        // zero-action event: the geodesic continues through
                        state = State {
                            point: contact.point,
                            momentum: arcs.last().unwrap().end().momentum,
                        };
                        t_lo = LIFTOFF;
                        None
                    }
                };
                if let Some(termination) = termination {
                    return Ok(Trajectory {
                        table: *table,
                        arcs,
                        events,
                        termination,
                    });
                }
            }
        }
    }
}

/// For each arc of a trajectory in an origin-centered infinite cylinder,
/// the number of parameter times at which the projected path is tangent to
/// the circle of `inner_radius` (discriminant test at tolerance 1e−10).
pub fn caustic_tangency_count(
    traj: &Trajectory,
    inner_radius: f64,
) -> Result<Vec<usize>, crate::tables::TableError> {
    match traj.table {
        TableSpec::InfiniteCylinder { center, .. } if center == (0.0, 0.0) => {}
        _ => {
            return Err(crate::tables::TableError::WrongTable {
                expected: "an origin-centered infinite cylinder",
            })
        }
    }
    const TOL: f64 = 1e-10;
    let mut counts = Vec::with_capacity(traj.arcs.len());
    for arc in &traj.arcs {
        let s = &arc.start;
        let a = s.momentum.a;
        let n = if a == 0.0 {
            // line: tangency iff its distance to the origin equals the radius
            // and the foot of the perpendicular lies on the arc
            let d = (s.point.x * s.momentum.c - s.point.y * s.momentum.b).abs();
            if (d - inner_radius).abs() < TOL {
                let t_foot = -(s.point.x * s.momentum.b + s.point.y * s.momentum.c);
                usize::from((0.0..=arc.duration).contains(&t_foot))
            } else {
                0
            }
        } else {
            let cx = s.point.x - s.momentum.c / a;
            let cy = s.point.y + s.momentum.b / a;
            let d = (cx * cx + cy * cy).sqrt();
            let rho = 1.0 / a.abs();
            // tangency points sit on the line through both centers: at angle
            // `base` (seen from the path center) when the path circle is
            // inside the caustic (d + ρ = r), at `base + π` when the circles
            // touch externally or the caustic is enclosed (|d − ρ| = r)
            let base = cy.atan2(cx);
            let mut tangency_angles = [0.0f64; 2];
            let mut n_tan = 0;
            if ((d + rho) - inner_radius).abs() < TOL {
                tangency_angles[n_tan] = base;
                n_tan += 1;
            }
            if ((d - rho).abs() - inner_radius).abs() < TOL {
                tangency_angles[n_tan] = base + std::f64::consts::PI;
                n_tan += 1;
            }
            // count parameter times at which the arc passes a tangency angle
            let sigma0 = (s.point.y - cy).atan2(s.point.x - cx);
            let tau = 2.0 * std::f64::consts::PI;
            let mut count = 0usize;
            for &sigma_tan in &tangency_angles[..n_tan] {
                let mut rel = ((sigma_tan - sigma0) * a.signum()).rem_euclid(tau);
                // a tangency at the arc start rounds to a near-full wrap
                if tau - rel < 1e-9 {
                    rel = 0.0;
                }
                let mut t = rel / a.abs();
                while t <= arc.duration + TOL {
                    count += 1;
                    t += tau / a.abs();
                }
            }
            count
        };
        counts.push(n);
    }
    Ok(counts)
}
