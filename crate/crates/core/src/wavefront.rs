//! The horizontal half-space `z ≥ 0`: attainable-set boundary, cut-locus
//! radii, and the behaviour of reflections approaching the singular point
//! of the boundary distribution at the origin.
//!
//! Geodesics leaving the boundary plane perpendicularly from radius `r`
//! (the self-reflecting family) project to circles of diameter `r` through
//! the origin. After time `T` they reach radius `R = r|cos(T/r)|` and
//! height `z₁ = rT/4 + (r²/8)·sin(2T/r)`; the attainable-set boundary at
//! time `T` is swept by the branch `r ≥ 2T/π`.

use crate::dynamics::min_z_on_arc;
use crate::geometry::{flow, Covector, GeodesicArc, Point3, State};
use crate::num::bisect;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub enum WavefrontError {
    OutOfRange(String),
}

impl std::fmt::Display for WavefrontError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WavefrontError::OutOfRange(msg) => write!(f, "parameter out of range: {msg}"),
        }
    }
}

impl std::error::Error for WavefrontError {}

/// One point of the time-`T` wavefront of the plane, launched from radius `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavefrontPoint {
    pub r: f64,
    pub t: f64,
    /// Landing radius `r·|cos(T/r)|`.
    pub landing_radius: f64,
    /// Landing height `rT/4 + (r²/8)·sin(2T/r)`.
    pub z1: f64,
}

/// The state that sweeps the wavefront from radius `r`: perpendicular
/// launch with the self-reflecting momentum, placed at `(r, 0, 0)`.
pub fn wavefront_launch_state(r: f64) -> State {
    State {
        point: Point3::new(r, 0.0, 0.0),
        momentum: Covector::new(2.0 / r, 0.0, 1.0),
    }
}

/// Closed-form wavefront point; agrees with direct geodesic flow of the
/// launch state to better than 1e−10.
pub fn wavefront_point(r: f64, t: f64) -> Result<WavefrontPoint, WavefrontError> {
    if r <= 0.0 || t <= 0.0 {
        return Err(WavefrontError::OutOfRange(format!(
            "need r > 0 and T > 0, got r = {r}, T = {t}"
        )));
    }
    Ok(WavefrontPoint {
        r,
        t,
        landing_radius: r * (t / r).cos().abs(),
        z1: r * t / 4.0 + r * r / 8.0 * (2.0 * t / r).sin(),
    })
}

/// Radii of the circles that focus onto the z-axis at time `T`:
/// `r_k = 2T/((2k+1)π)`, k = 0..=k_max.
pub fn cut_locus_radii(t: f64, k_max: u32) -> Vec<f64> {
    (0..=k_max)
        .map(|k| 2.0 * t / ((2 * k + 1) as f64 * PI))
        .collect()
}

/// Samples the upper branch of the attainable-set boundary at time `T`:
/// launch radii from the cusp radius `2T/π` out to `r_max` (default `5T`
/// when `None`). The landing radius is strictly increasing on this branch,
/// which is verified during sampling.
pub fn attainable_boundary(
    t: f64,
    samples: usize,
    r_max: Option<f64>,
) -> Result<Vec<WavefrontPoint>, WavefrontError> {
    if t <= 0.0 {
        return Err(WavefrontError::OutOfRange(format!("T = {t} not > 0")));
    }
    if samples < 2 {
        return Err(WavefrontError::OutOfRange(
            "need at least 2 samples".into(),
        ));
    }
    let r0 = 2.0 * t / PI;
    let r1 = r_max.unwrap_or(5.0 * t);
    if r1 <= r0 {
        return Err(WavefrontError::OutOfRange(format!(
            "r_max = {r1} must exceed the cusp radius {r0}"
        )));
    }
    let mut out = Vec::with_capacity(samples);
    for i in 0..samples {
        let r = r0 + (r1 - r0) * i as f64 / (samples - 1) as f64;
        out.push(wavefront_point(r, t)?);
    }
    for w in out.windows(2) {
        if w[1].landing_radius <= w[0].landing_radius - 1e-10 {
            return Err(WavefrontError::OutOfRange(format!(
                "landing radius not increasing near r = {}",
                w[1].r
            )));
        }
    }
    Ok(out)
}

/// Closed-form data of the reflection of a straight lift hitting the plane
/// at `(d, 0, 0)` with incidence angle φ against the radial direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalAnalysis {
    pub d: f64,
    pub phi: f64,
    /// Outgoing magnetic momentum `4 sin φ / d`.
    pub a_out: f64,
    /// Radius of the outgoing projected circle, `d/(4 sin φ)`.
    pub r: f64,
    /// Its center `(3d/4, −cot φ · d/4)`.
    pub center: (f64, f64),
    /// Area gained between the reflection point and the second radial
    /// crossing: `(φ − sin φ cos φ)·r²`.
    pub area_plus: f64,
    /// Radius of the first tangency of the outgoing circle with a line
    /// through the origin: `d/√2`.
    pub p: f64,
    /// Upper bound for the area lost beyond the second crossing:
    /// `(2√2 sin φ − arctan(2√2 sin φ))·r²`.
    pub area_minus_bound: f64,
    /// Sign of `area_plus − area_minus_bound` in units of `r²`: positive
    /// values certify that the outgoing helix never returns to the plane.
    pub clearance: f64,
}

/// The outgoing state of the critical reflection: the ingoing lift is
/// straight (`a = 0`), descending at angle φ to the radial direction.
pub fn critical_outgoing_state(d: f64, phi: f64) -> State {
    let a_out = 4.0 * phi.sin() / d;
    State {
        point: Point3::new(d, 0.0, 0.0),
        momentum: Covector::new(a_out, -phi.cos(), phi.sin()),
    }
}

/// `G(φ) = [φ + arctan(2√2 sin φ)] − [sin φ cos φ + 2√2 sin φ]`, the
/// sufficiency margin of the no-return criterion.
pub fn clearance_margin(phi: f64) -> f64 {
    let s = phi.sin();
    let k = 2.0 * 2.0_f64.sqrt() * s;
    (phi + k.atan()) - (s * phi.cos() + k)
}

/// Full closed-form analysis of the critical reflection; cross-validated
/// against the flow in tests.
pub fn critical_reflection(d: f64, phi: f64) -> Result<CriticalAnalysis, WavefrontError> {
    if d <= 0.0 || !(phi > 0.0 && phi < PI) {
        return Err(WavefrontError::OutOfRange(format!(
            "need d > 0 and phi in (0, pi), got d = {d}, phi = {phi}"
        )));
    }
    let s = phi.sin();
    let a_out = 4.0 * s / d;
    let r = d / (4.0 * s);
    let k = 2.0 * 2.0_f64.sqrt() * s;
    Ok(CriticalAnalysis {
        d,
        phi,
        a_out,
        r,
        center: (0.75 * d, -phi.cos() / phi.sin() * d / 4.0),
        area_plus: (phi - s * phi.cos()) * r * r,
        p: d / 2.0_f64.sqrt(),
        area_minus_bound: (k - k.atan()) * r * r,
        clearance: clearance_margin(phi),
    })
}

/// Root of the clearance margin on (π/2, π): incidence angles above it
/// guarantee the reflected helix never meets the plane again.
pub fn critical_angle_threshold() -> f64 {
    critical_angle_threshold_with_tol(1e-10)
}

pub fn critical_angle_threshold_with_tol(tol: f64) -> f64 {
    bisect(clearance_margin, PI / 2.0, PI - 1e-9, tol)
        .expect("margin is negative at pi/2 and positive at pi")
}

/// Simulation outcome of the post-reflection helix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationCheck {
    /// Minimum height over the simulated window.
    pub min_z: f64,
    /// Whether the helix stayed above the plane (min z ≥ −1e−9).
    pub continues: bool,
}

/// Simulates the post-reflection helix for `loops` projected periods and
/// reports whether it stays above the plane. Above
/// [`critical_angle_threshold`] the answer is always yes; below it the
/// simulated verdict covers only the simulated window.
pub fn critical_continuation_check(
    d: f64,
    phi: f64,
    loops: u32,
) -> Result<ContinuationCheck, WavefrontError> {
    if d <= 0.0 || !(phi > 0.0 && phi < PI) {
        return Err(WavefrontError::OutOfRange(format!(
            "need d > 0 and phi in (0, pi), got d = {d}, phi = {phi}"
        )));
    }
    let s = critical_outgoing_state(d, phi);
    let r = 1.0 / s.momentum.a;
    let arc = GeodesicArc::new(s, loops as f64 * 2.0 * PI * r);
    let min_z = min_z_on_arc(&arc);
    Ok(ContinuationCheck {
        min_z,
        continues: min_z >= -1e-9,
    })
}

/// Sup-distance of the post-reflection branch to the origin over a fixed
/// arclength window; along `d → 0` these distances decrease to zero.
pub fn critical_branch_sup_distance(d: f64, phi: f64, window: f64) -> f64 {
    let s = critical_outgoing_state(d, phi);
    let samples = 600;
    let mut sup: f64 = 0.0;
    for j in 0..=samples {
        let t = window * j as f64 / samples as f64;
        let st = flow(&s, t);
        sup = sup.max(st.point.dist(&Point3::new(0.0, 0.0, 0.0)));
    }
    sup
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavefront_focus_and_flat_points() {
        let t = 1.3;
        // r = 2T/π: quarter-turn landing on the axis at height T²/(2π)
        let w = wavefront_point(2.0 * t / PI, t).unwrap();
        assert!(w.landing_radius < 1e-15);
        assert!((w.z1 - t * t / (2.0 * PI)).abs() < 1e-14);
        // r = 2T/(3π): second focus, height T²/(6π)
        let w = wavefront_point(2.0 * t / (3.0 * PI), t).unwrap();
        assert!(w.landing_radius < 1e-14);
        assert!((w.z1 - t * t / (6.0 * PI)).abs() < 1e-14);
        // T/r = π: full half-turn, landing back at radius r
        let w = wavefront_point(t / PI, t).unwrap();
        assert!((w.landing_radius - t / PI).abs() < 1e-13);
        assert!((w.z1 - t * t / (4.0 * PI)).abs() < 1e-14);
    }

    #[test]
    fn wavefront_formula_matches_flow() {
        for &r in &[0.5, 1.0, 2.3] {
            for &t in &[0.3, 1.0, 2.9] {
                let w = wavefront_point(r, t).unwrap();
                let st = flow(&wavefront_launch_state(r), t);
                let landing = (st.point.x * st.point.x + st.point.y * st.point.y).sqrt();
                assert!((landing - w.landing_radius).abs() < 1e-10);
                assert!((st.point.z - w.z1).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn cut_radii_examples() {
        let r = cut_locus_radii(PI, 2);
        assert!((r[0] - 2.0).abs() < 1e-15);
        assert!((r[1] - 2.0 / 3.0).abs() < 1e-15);
        assert!((r[2] - 2.0 / 5.0).abs() < 1e-15);
        assert_eq!(cut_locus_radii(1.0, 0), vec![2.0 / PI]);
        assert!(r.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn attainable_boundary_graphical() {
        let pts = attainable_boundary(1.0, 50, None).unwrap();
        assert_eq!(pts.len(), 50);
        assert!(pts[0].landing_radius < 1e-12);
        assert!((pts[0].z1 - 1.0 / (2.0 * PI)).abs() < 1e-12);
        assert!(pts.windows(2).all(|w| w[1].landing_radius > w[0].landing_radius));
        assert!(attainable_boundary(1.0, 1, None).is_err());
    }

    #[test]
    fn near_cusp_expansions() {
        // the slope of z₁ against landing radius at the cusp is T/π: the
        // stated coefficients π/8 + T/(2π) and π/(2T) of the near-cusp
        // expansions hold at T = π²/4, where they coincide with it
        let t = PI * PI / 4.0;
        let slope_claim = PI / 8.0 + t / (2.0 * PI);
        let inverse_claim = PI / (2.0 * t);
        let r0 = 2.0 * t / PI;
        // locate r with landing radius 1e−5 by bisection
        let target = 1e-5;
        let r = bisect(
            |r| wavefront_point(r, t).unwrap().landing_radius - target,
            r0,
            r0 + 1.0,
            1e-14,
        )
        .unwrap();
        let w = wavefront_point(r, t).unwrap();
        let slope = (w.z1 - t * t / (2.0 * PI)) / w.landing_radius;
        assert!(
            (slope - slope_claim).abs() / slope_claim < 1e-3,
            "slope {slope} vs {slope_claim}"
        );
        let inv = (r - r0) / w.landing_radius;
        assert!(
            (inv - inverse_claim).abs() / inverse_claim < 1e-4,
            "dr/dR {inv} vs {inverse_claim}"
        );
        // at generic T the cusp slope equals T/π
        for &t in &[1.0, PI, 10.0] {
            let r0 = 2.0 * t / PI;
            let r = bisect(
                |r| wavefront_point(r, t).unwrap().landing_radius - 1e-6,
                r0,
                r0 + 1.0,
                1e-14,
            )
            .unwrap();
            let w = wavefront_point(r, t).unwrap();
            let slope = (w.z1 - t * t / (2.0 * PI)) / w.landing_radius;
            assert!(((slope - t / PI) / (t / PI)).abs() < 1e-3, "T = {t}: {slope}");
        }
    }

    #[test]
    fn critical_reflection_fields() {
        let c = critical_reflection(1.0, PI / 2.0).unwrap();
        assert!((c.a_out - 4.0).abs() < 1e-15);
        assert!((c.r - 0.25).abs() < 1e-15);
        assert!((c.center.0 - 0.75).abs() < 1e-15);
        assert!(c.center.1.abs() < 1e-12);
        assert!((c.p - 1.0 / 2.0_f64.sqrt()).abs() < 1e-15);
        // both closed forms of the gained area agree
        let phi: f64 = 1.1;
        let d = 0.7;
        let c = critical_reflection(d, phi).unwrap();
        let alt = (phi / phi.sin().powi(2) - phi.cos() / phi.sin()) * d * d / 16.0;
        assert!((c.area_plus - alt).abs() < 1e-12);
        // center distance identity ‖O‖ = r√(1 + 8 sin²φ)
        let o = (c.center.0 * c.center.0 + c.center.1 * c.center.1).sqrt();
        assert!((o - c.r * (1.0 + 8.0 * phi.sin().powi(2)).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn clearance_margin_signs() {
        assert!((clearance_margin(PI) - PI).abs() < 1e-12);
        let at_half = clearance_margin(PI / 2.0);
        assert!((at_half - (PI / 2.0 + (2.0 * 2.0_f64.sqrt()).atan() - 2.0 * 2.0_f64.sqrt()))
            .abs()
            < 1e-14);
        assert!(at_half < 0.0 && at_half > -0.03);
    }

    #[test]
    fn clearance_margin_monotone_past_perpendicular() {
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=1000 {
            let phi = PI / 2.0 + (PI / 2.0) * k as f64 / 1000.0;
            let v = clearance_margin(phi);
            assert!(v > prev, "margin not increasing at phi = {phi}");
            prev = v;
        }
    }

    #[test]
    fn threshold_value() {
        let t = critical_angle_threshold();
        assert!((1.5835..=1.5845).contains(&t), "{t}");
        assert!((0.5041..=0.5043).contains(&(t / PI)));
        assert!(clearance_margin(t - 1e-3) < 0.0);
        assert!(clearance_margin(t + 1e-3) > 0.0);
    }

    #[test]
    fn outgoing_circle_geometry_matches_flow() {
        // the projected circle of the outgoing state has the advertised
        // center and radius, and its second radial crossing is at (d/2, 0)
        let d = 1.0;
        let phi = 1.3;
        let c = critical_reflection(d, phi).unwrap();
        let s = critical_outgoing_state(d, phi);
        match crate::geometry::projected_circle(&s) {
            crate::geometry::ProjectedPath::Circle { center, radius, .. } => {
                assert!((center.0 - c.center.0).abs() < 1e-12);
                assert!((center.1 - c.center.1).abs() < 1e-12);
                assert!((radius - c.r).abs() < 1e-12);
            }
            _ => panic!("expected a circle"),
        }
        // find the second crossing of the positive x-axis along the flow
        let mut crossing = None;
        let period = 2.0 * PI * c.r;
        let mut prev = (0.0, s.point.y);
        let n = 20000;
        for j in 1..=n {
            let t = period * j as f64 / n as f64;
            let y = flow(&s, t).point.y;
            if prev.1.signum() != y.signum() && j > 1 {
                let root = bisect(|tt| flow(&s, tt).point.y, prev.0, t, 1e-13).unwrap();
                crossing = Some(root);
                break;
            }
            prev = (t, y);
        }
        let x_at = flow(&s, crossing.expect("crossing exists")).point.x;
        assert!((x_at - d / 2.0).abs() < 1e-10, "x = {x_at}");
    }

    #[test]
    fn continuation_check_examples() {
        let ok = critical_continuation_check(1.0, 1.6, 10).unwrap();
        assert!(ok.continues, "min z = {}", ok.min_z);
        let dip = critical_continuation_check(1.0, 1.0, 1).unwrap();
        assert!(!dip.continues && dip.min_z < 0.0);
    }

    #[test]
    fn scale_covariance() {
        // (x, y, z) → (λx, λy, λ²z) maps the analysis at d to the one at λd
        let phi = 1.6;
        let lam = 3.0;
        let s1 = critical_outgoing_state(1.0, phi);
        let s2 = critical_outgoing_state(lam, phi);
        for j in 0..=40 {
            let t = 2.0 * j as f64 / 40.0;
            let p1 = flow(&s1, t).point;
            let p2 = flow(&s2, lam * t).point;
            assert!((p2.x - lam * p1.x).abs() < 1e-10);
            assert!((p2.y - lam * p1.y).abs() < 1e-10);
            assert!((p2.z - lam * lam * p1.z).abs() < 1e-10);
        }
    }

    #[test]
    fn shrinking_branches_collapse_to_origin() {
        let phi = 1.6;
        let window = 1.0;
        let d1 = critical_branch_sup_distance(1.0, phi, window);
        let d2 = critical_branch_sup_distance(0.1, phi, window);
        let d3 = critical_branch_sup_distance(0.01, phi, window);
        assert!(d1 > d2 && d2 > d3, "{d1}, {d2}, {d3}");
    }
}
