//! Constructive solvers for the known periodic and limiting orbit families:
//! polygonal orbits of the standard cylinder, two-bounce band orbits,
//! bigon orbits of the off-axis finite cylinder with their admissibility
//! threshold, and the creeping asymptotics of the cylinder boundary.

use crate::dynamics::{min_z_on_arc, run, RunParams, Termination, Trajectory};
use crate::geometry::{flow, Covector, Point3, State};
use crate::num::{bisect, DEFAULT_ROOT_TOL};
use crate::tables::TableSpec;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub enum OrbitError {
    OutOfRange(String),
    NotCoprime { n: u32, m: u32 },
    /// Aperture below the admissibility threshold: the lift dips under the
    /// bottom face.
    BelowThreshold { psi: f64, threshold: f64 },
    NoSolution(String),
    /// Re-simulation of a constructed orbit did not behave as advertised.
    Verification(String),
}

impl std::fmt::Display for OrbitError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OrbitError::OutOfRange(msg) => write!(f, "parameter out of range: {msg}"),
            OrbitError::NotCoprime { n, m } => write!(f, "n = {n} and m = {m} are not coprime"),
            OrbitError::BelowThreshold { psi, threshold } => {
                write!(f, "psi = {psi} below admissibility threshold {threshold:.6}")
            }
            OrbitError::NoSolution(msg) => write!(f, "no solution: {msg}"),
            OrbitError::Verification(msg) => write!(f, "orbit verification failed: {msg}"),
        }
    }
}

impl std::error::Error for OrbitError {}

/// A closed polygonal orbit of the infinite cylinder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NGonSolution {
    pub n: u32,
    pub m: u32,
    /// Half the central angle between consecutive bounce points: πm/n.
    pub phi: f64,
    /// Half-aperture of each arc, solving the zero-area closure equation.
    pub psi: f64,
    /// Arc radius of curvature over table radius: sin φ / sin ψ.
    pub rho: f64,
}

/// Right-hand side of the polygonal closure equation,
/// `cot ψ + (π − ψ)/sin²ψ`: a decreasing homeomorphism (0, π) → (0, ∞).
fn ngon_rhs(psi: f64) -> f64 {
    let s = psi.sin();
    psi.cos() / s + (PI - psi) / (s * s)
}

/// Solves `cot φ = cot ψ + (π − ψ)/sin²ψ` for the unique ψ ∈ (0, π).
pub fn solve_ngon_psi(phi: f64) -> Result<f64, OrbitError> {
    solve_ngon_psi_with_tol(phi, DEFAULT_ROOT_TOL)
}

pub fn solve_ngon_psi_with_tol(phi: f64, tol: f64) -> Result<f64, OrbitError> {
    if !(phi > 0.0 && phi < PI / 2.0) {
        return Err(OrbitError::OutOfRange(format!(
            "phi = {phi} not in (0, pi/2)"
        )));
    }
    let target = phi.cos() / phi.sin();
    // rhs − target is positive near 0 and negative near π
    bisect(|psi| ngon_rhs(psi) - target, 1e-12, PI - 1e-12, tol)
        .map_err(|e| OrbitError::NoSolution(e.to_string()))
}

/// Closure data for the polygonal orbit with vertices every `2πm/n`.
pub fn ngon_solution(n: u32, m: u32) -> Result<NGonSolution, OrbitError> {
    if gcd(n, m) != 1 {
        return Err(OrbitError::NotCoprime { n, m });
    }
    if m == 0 || 2 * m >= n {
        return Err(OrbitError::OutOfRange(format!(
            "need 0 < m < n/2, got n = {n}, m = {m}"
        )));
    }
    let phi = PI * m as f64 / n as f64;
    let psi = solve_ngon_psi(phi)?;
    Ok(NGonSolution {
        n,
        m,
        phi,
        psi,
        rho: phi.sin() / psi.sin(),
    })
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// State of the arc leaving the bounce point `(radius, 0, 0)` toward the
/// vertex rotated by `2φ`, with half-aperture ψ. The arc wraps the long way
/// (signed half-aperture ψ − π), which is what makes each segment enclose
/// zero area.
fn ngon_initial_state(phi: f64, psi: f64, table_radius: f64) -> State {
    let mu = psi - PI;
    let p0 = (table_radius, 0.0);
    let p1 = (
        table_radius * (2.0 * phi).cos(),
        table_radius * (2.0 * phi).sin(),
    );
    let wx = p1.0 - p0.0;
    let wy = p1.1 - p0.1;
    let chord = (wx * wx + wy * wy).sqrt();
    let (ux, uy) = (wx / chord, wy / chord);
    let (sm, cm) = mu.sin_cos();
    State {
        point: Point3::new(p0.0, p0.1, 0.0),
        momentum: Covector::new(
            2.0 * sm / chord,
            cm * ux + sm * uy,
            -sm * ux + cm * uy,
        ),
    }
}

/// Builds the closed `n`-bounce orbit with bounce points on the regular
/// n-gon inscribed in the table circle (consecutive bounce points rotated
/// by `2πm/n`), and verifies it by re-simulation: closure < 1e−8 after
/// `n` bounces and |Δz| < 1e−9 on every segment.
pub fn build_ngon_orbit(n: u32, m: u32, table_radius: f64) -> Result<Trajectory, OrbitError> {
    if table_radius <= 0.0 {
        return Err(OrbitError::OutOfRange("table radius must be positive".into()));
    }
    let sol = ngon_solution(n, m)?;
    let start = ngon_initial_state(sol.phi, sol.psi, table_radius);
    let table = TableSpec::InfiniteCylinder {
        center: (0.0, 0.0),
        radius: table_radius,
    };
    let arc_len = arc_length_for(sol.psi, sol.phi, table_radius);
    let traj = run(
        &table,
        &start,
        &RunParams {
            max_bounces: n as usize,
            max_length: (n as f64 + 0.5) * arc_len,
            root_tol: 1e-13,
        },
    )
    .map_err(|e| OrbitError::Verification(e.to_string()))?;
    if traj.termination != Termination::MaxBounces || traj.events.len() != n as usize {
        return Err(OrbitError::Verification(format!(
            "expected {n} bounces, got {} ({:?})",
            traj.events.len(),
            traj.termination
        )));
    }
    let end = traj.final_state().ok_or_else(|| {
        OrbitError::Verification("orbit stopped without outgoing momentum".into())
    })?;
    let closure = end.point.dist(&start.point);
    if closure > 1e-8 {
        return Err(OrbitError::Verification(format!(
            "closure error {closure:e}"
        )));
    }
    for (i, arc) in traj.arcs.iter().enumerate() {
        let dz = crate::geometry::delta_z(arc);
        if dz.abs() > 1e-9 {
            return Err(OrbitError::Verification(format!(
                "segment {i} has dz = {dz:e}"
            )));
        }
    }
    Ok(traj)
}

/// Length of one polygonal arc: 2ρ(π − ψ) at unit table radius.
fn arc_length_for(psi: f64, phi: f64, table_radius: f64) -> f64 {
    let rho = table_radius * phi.sin() / psi.sin();
    2.0 * rho * (PI - psi)
}

/// The two-bounce band orbit family. `loop_radius` is √(H/(πn)): each of
/// the two segments lifts `n` full loops of this radius, gaining height
/// `n·π·loop_radius² = H`; the bounce points sit at planar radius
/// `2·loop_radius` where the loop self-reflects perpendicularly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandOrbit {
    pub height: f64,
    pub loops: u32,
    pub loop_radius: f64,
    pub bounce_radius: f64,
    pub trajectory_start: State,
}

/// Constructs the two-bounce orbit of the band `ℝ² × [0, H]` whose segments
/// are reversals of one another, with `n` projected loops per segment.
pub fn build_band_orbit(height: f64, n: u32) -> Result<(BandOrbit, Trajectory), OrbitError> {
    if height <= 0.0 || n == 0 {
        return Err(OrbitError::OutOfRange(
            "need height > 0 and n >= 1".into(),
        ));
    }
    let rho = (height / (PI * n as f64)).sqrt();
    let start = State {
        point: Point3::new(2.0 * rho, 0.0, 0.0),
        momentum: Covector::new(1.0 / rho, 0.0, 1.0),
    };
    let table = TableSpec::HorizontalBand {
        z_lo: 0.0,
        z_hi: height,
    };
    let seg_len = 2.0 * PI * rho * n as f64;
    let traj = run(
        &table,
        &start,
        &RunParams {
            max_bounces: 2,
            max_length: 2.5 * seg_len,
            root_tol: 1e-13,
        },
    )
    .map_err(|e| OrbitError::Verification(e.to_string()))?;
    if traj.events.len() != 2 {
        return Err(OrbitError::Verification(format!(
            "expected 2 bounces, got {}",
            traj.events.len()
        )));
    }
    let end = traj
        .final_state()
        .ok_or_else(|| OrbitError::Verification("no outgoing state".into()))?;
    let closure = end.point.dist(&start.point)
        + (end.momentum.a - start.momentum.a).abs()
        + (end.momentum.b - start.momentum.b).abs()
        + (end.momentum.c - start.momentum.c).abs();
    if closure > 1e-9 {
        return Err(OrbitError::Verification(format!(
            "closure error {closure:e}"
        )));
    }
    Ok((
        BandOrbit {
            height,
            loops: n,
            loop_radius: rho,
            bounce_radius: 2.0 * rho,
            trajectory_start: start,
        },
        traj,
    ))
}

/// Piecewise area balance `Δ(ψ)/r²` of the finite-cylinder bigon: positive
/// exactly when the lift stays above the bottom face. Continuous at the
/// branch transition ψ = π/3.
pub fn finite_cylinder_delta(psi: f64) -> Result<f64, OrbitError> {
    if !(psi > 0.0 && psi <= PI / 2.0) {
        return Err(OrbitError::OutOfRange(format!(
            "psi = {psi} not in (0, pi/2]"
        )));
    }
    let (s, c) = psi.sin_cos();
    Ok(if psi <= PI / 3.0 {
        0.5 * (3.0 * psi - 4.0 * s * c - s)
    } else {
        let w = (c * (c + 1.0)).sqrt();
        psi - c * s - w + 0.5 * (2.0 * w).atan()
    })
}

/// Root of `3ψ − 4 sin ψ cos ψ − sin ψ` on (0, π/3): apertures below it are
/// inadmissible for the bigon construction.
pub fn bigon_admissibility_threshold() -> f64 {
    bigon_admissibility_threshold_with_tol(1e-10)
}

pub fn bigon_admissibility_threshold_with_tol(tol: f64) -> f64 {
    bisect(
        |psi| 3.0 * psi - 4.0 * psi.sin() * psi.cos() - psi.sin(),
        0.1,
        PI / 3.0,
        tol,
    )
    .expect("threshold bracket straddles a sign change")
}

/// Data of a finite-cylinder bigon orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteCylinderOrbit {
    /// Base-center offset from the z-axis.
    pub d: f64,
    /// Half-aperture of the bigon arcs at the vertices.
    pub psi: f64,
    /// Cover count: the lift climbs `c` bigon cycles per segment.
    pub c: u32,
    /// Base radius, `d·tan(ψ/2)`.
    pub base_radius: f64,
    /// Arc radius, `(R² + d²)/(2d)`.
    pub arc_radius: f64,
    /// Table height: `c` times the area of one bigon cycle.
    pub height: f64,
    pub table: TableSpec,
    pub trajectory_start: State,
}

/// Builds the periodic bigon orbit of the cylinder `D_R(d, 0) × [0, H]`,
/// bouncing perpendicularly off both caps and `2c` times (per direction)
/// off the wall. `H` is determined by the construction; apertures below
/// [`bigon_admissibility_threshold`] are rejected since their lifts dip
/// below the bottom cap.
pub fn build_finite_cylinder_bigon(
    d: f64,
    psi: f64,
    c: u32,
) -> Result<(FiniteCylinderOrbit, Trajectory), OrbitError> {
    if d <= 0.0 || c == 0 {
        return Err(OrbitError::OutOfRange("need d > 0 and c >= 1".into()));
    }
    if !(psi > 0.0 && psi < PI / 2.0) {
        return Err(OrbitError::OutOfRange(format!(
            "psi = {psi} not in (0, pi/2)"
        )));
    }
    let threshold = bigon_admissibility_threshold();
    if psi < threshold {
        return Err(OrbitError::BelowThreshold { psi, threshold });
    }
    let base_radius = d * (0.5 * psi).tan();
    let arc_radius = (base_radius * base_radius + d * d) / (2.0 * d);

    // one bigon cycle from the bottom bounce point (2r, 0): climb it by flow
    // and read off the height gain, which fixes H = c · (cycle area)
    let start = State {
        point: Point3::new(2.0 * arc_radius, 0.0, 0.0),
        momentum: Covector::new(1.0 / arc_radius, 0.0, 1.0),
    };
    let cycle_len = 4.0 * arc_radius * psi;
    let z_cycle;
    {
        // the cycle consists of arcs of aperture 2ψ around alternating
        // centers; walk it exactly with the reflection law
        let table_wall = TableSpec::InfiniteCylinder {
            center: (d, 0.0),
            radius: base_radius,
        };
        let walked = run(
            &table_wall,
            &start,
            &RunParams {
                max_bounces: 2,
                max_length: 1.5 * cycle_len,
                root_tol: 1e-13,
            },
        )
        .map_err(|e| OrbitError::Verification(e.to_string()))?;
        if walked.events.len() != 2 {
            return Err(OrbitError::Verification(
                "bigon cycle walk did not meet the wall twice".into(),
            ));
        }
        let after = walked
            .final_state()
            .ok_or_else(|| OrbitError::Verification("bigon cycle stopped".into()))?;
        // continue the final quarter arc back over the bounce radius
        let rest = cycle_len - walked.total_length();
        let closed = flow(&after, rest);
        let gap = closed.point.planar_dist(&start.point);
        if gap > 1e-9 {
            return Err(OrbitError::Verification(format!(
                "bigon cycle does not close in projection (gap {gap:e})"
            )));
        }
        z_cycle = closed.point.z - start.point.z;
    }
    if z_cycle <= 0.0 {
        return Err(OrbitError::Verification(format!(
            "cycle area {z_cycle:e} not positive"
        )));
    }
    let height = c as f64 * z_cycle;
    let table = TableSpec::FiniteCylinder {
        center: (d, 0.0),
        radius: base_radius,
        z_lo: 0.0,
        z_hi: height,
    };

    // full period: 2c wall bounces up, the top bounce, 2c down, the bottom
    let period_bounces = 4 * c as usize + 2;
    let traj = run(
        &table,
        &start,
        &RunParams {
            max_bounces: period_bounces,
            max_length: 2.5 * c as f64 * cycle_len,
            root_tol: 1e-13,
        },
    )
    .map_err(|e| OrbitError::Verification(e.to_string()))?;
    if traj.events.len() != period_bounces {
        return Err(OrbitError::Verification(format!(
            "expected {period_bounces} reflection events, got {} ({:?})",
            traj.events.len(),
            traj.termination
        )));
    }
    let end = traj
        .final_state()
        .ok_or_else(|| OrbitError::Verification("no outgoing state".into()))?;
    let closure = end.point.dist(&start.point);
    if closure > 1e-8 {
        return Err(OrbitError::Verification(format!(
            "closure error {closure:e}"
        )));
    }
    for arc in &traj.arcs {
        let mz = min_z_on_arc(arc);
        if mz < -1e-9 {
            return Err(OrbitError::Verification(format!(
                "lift dips below the bottom cap: min z = {mz:e}"
            )));
        }
    }
    Ok((
        FiniteCylinderOrbit {
            d,
            psi,
            c,
            base_radius,
            arc_radius,
            height,
            table,
            trajectory_start: start,
        },
        traj,
    ))
}

/// Distinct reflection points of a trajectory, merged at tolerance `tol`.
/// The bigon orbits revisit each wall contact on the way down, so their
/// period shows `4c + 2` reflection events at `2c + 2` distinct points.
pub fn distinct_bounce_points(traj: &Trajectory, tol: f64) -> Vec<Point3> {
    let mut pts: Vec<Point3> = Vec::new();
    for ev in &traj.events {
        if !pts.iter().any(|p| p.dist(&ev.contact.point) < tol) {
            pts.push(ev.contact.point);
        }
    }
    pts
}

/// Solves the creeping closure equation
/// `cot φ − σφ/sin²φ = (π − ψ + sin ψ cos ψ)/sin²ψ`
/// for ψ ∈ (0, π), given slope parameter σ < 1 and half-angle φ.
pub fn creeping_psi(sigma: f64, phi: f64) -> Result<f64, OrbitError> {
    creeping_psi_with_tol(sigma, phi, DEFAULT_ROOT_TOL)
}

pub fn creeping_psi_with_tol(sigma: f64, phi: f64, tol: f64) -> Result<f64, OrbitError> {
    if !(phi > 0.0 && phi < PI / 2.0) {
        return Err(OrbitError::OutOfRange(format!(
            "phi = {phi} not in (0, pi/2)"
        )));
    }
    if sigma >= 1.0 {
        return Err(OrbitError::OutOfRange(format!("sigma = {sigma} not < 1")));
    }
    let lhs = phi.cos() / phi.sin() - sigma * phi / (phi.sin() * phi.sin());
    if lhs <= 0.0 {
        return Err(OrbitError::NoSolution(format!(
            "left side {lhs:e} not positive for sigma = {sigma}, phi = {phi}"
        )));
    }
    let rhs = |psi: f64| {
        let s = psi.sin();
        (PI - psi + s * psi.cos()) / (s * s)
    };
    bisect(|psi| rhs(psi) - lhs, 1e-12, PI - 1e-12, tol)
        .map_err(|e| OrbitError::NoSolution(e.to_string()))
}

/// Families whose reparametrised billiard trajectories converge to a
/// boundary curve of the cylinder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CreepingFamily {
    /// Arcs of half-angle φ closing a helix of slope parameter σ < 1
    /// (height gain σφ per half-angle φ of boundary advance). The limit
    /// helix gains z at rate σ/2 per unit of boundary angle.
    Helix { sigma: f64 },
    /// Loops of shrinking radius tangent to the wall from inside; the limit
    /// is the vertical line through the tangency, climbed at rate ½ per
    /// unit of rescaled time.
    VerticalLine,
}

/// For each parameter in `params` (half-angles φ for the helix family, loop
/// radii ρ for the vertical family), builds the corresponding trajectory on
/// the unit cylinder, rescales it by the segment length, and returns the
/// C⁰ distance to the limit curve over a fixed window. Distances must
/// decrease toward zero along a refining sequence.
pub fn creeping_convergence_check(
    family: CreepingFamily,
    params: &[f64],
) -> Result<Vec<f64>, OrbitError> {
    let window = 1.5; // boundary-angle (or rescaled-time) window
    let mut out = Vec::with_capacity(params.len());
    for &p in params {
        let dist = match family {
            CreepingFamily::Helix { sigma } => helix_creep_distance(sigma, p, window)?,
            CreepingFamily::VerticalLine => vertical_creep_distance(p, window)?,
        };
        out.push(dist);
    }
    Ok(out)
}

fn helix_creep_distance(sigma: f64, phi: f64, window: f64) -> Result<f64, OrbitError> {
    let psi = creeping_psi(sigma, phi)?;
    // one segment: chord between boundary points 2φ apart, long-way arc
    let mu = psi - PI;
    let rho = phi.sin() / psi.sin();
    let seg_len = 2.0 * rho * (PI - psi);
    let bounces = (window / (2.0 * phi)).ceil() as usize;

    // walk the billiard directly: reflections rotate the picture by 2φ and
    // raise it by σφ, so each segment is the rotated copy of the first
    let start = creeping_segment_start(phi, mu);
    let mut sup: f64 = 0.0;
    let samples = 24.max((seg_len / 0.05) as usize);
    let rot = crate::geometry::SymmetryElement::rotation(2.0 * phi);
    let lift = crate::geometry::SymmetryElement::translation(0.0, 0.0, sigma * phi);
    let step_sym = lift.compose(&rot);
    let mut seg_start = start;
    for k in 0..bounces {
        for j in 0..=samples {
            let t = seg_len * j as f64 / samples as f64;
            let st = flow(&seg_start, t);
            // limit curve point at the same rescaled parameter
            let theta = (k as f64 * seg_len + t) / seg_len * 2.0 * phi;
            let limit = Point3::new(theta.cos(), theta.sin(), sigma * theta / 2.0);
            sup = sup.max(st.point.dist(&limit));
        }
        seg_start = crate::geometry::apply_symmetry(&step_sym, &seg_start);
    }
    Ok(sup)
}

/// Start state of one creeping segment at the bounce point (1, 0, 0).
fn creeping_segment_start(phi: f64, mu: f64) -> State {
    let p1 = ((2.0 * phi).cos(), (2.0 * phi).sin());
    let wx = p1.0 - 1.0;
    let wy = p1.1;
    let chord = (wx * wx + wy * wy).sqrt();
    let (ux, uy) = (wx / chord, wy / chord);
    let (sm, cm) = mu.sin_cos();
    State {
        point: Point3::new(1.0, 0.0, 0.0),
        momentum: Covector::new(2.0 * sm / chord, cm * ux + sm * uy, -sm * ux + cm * uy),
    }
}

fn vertical_creep_distance(rho: f64, window: f64) -> Result<f64, OrbitError> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(OrbitError::OutOfRange(format!(
            "loop radius {rho} not in (0, 1)"
        )));
    }
    // loop of radius ρ internally tangent to the wall at (1, 0, 0)
    let start = State {
        point: Point3::new(1.0, 0.0, 0.0),
        momentum: Covector::new(1.0 / rho, 0.0, 1.0),
    };
    // rescaled time t covers arclength t/ρ; limit is (1, 0, z + t/2)
    let samples = 400;
    let mut sup: f64 = 0.0;
    for j in 0..=samples {
        let t = window * j as f64 / samples as f64;
        let st = flow(&start, t / rho);
        let limit = Point3::new(1.0, 0.0, 0.5 * t);
        sup = sup.max(st.point.dist(&limit));
    }
    Ok(sup)
}
