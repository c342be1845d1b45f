//! The Heisenberg group ℝ³ with its standard contact structure and the flat
//! metric lifted from the plane.
//!
//! Conventions, fixed once and used everywhere:
//!
//! * contact form `α = dz − ½(x dy − y dx)`, with horizontal frame
//!   `X = ∂x − ½y∂z`, `Y = ∂y + ½x∂z`;
//! * covectors are written in the coframe `{α, dx, dy}` as `a·α + b·dx + c·dy`;
//! * the Hamiltonian is `H = ½(b² + c²)`, flowed on the level `½`, which is
//!   the arclength parametrisation;
//! * under these signs the planar momentum `(b, c)` is the projected
//!   velocity, rotating at angular rate `+a`, so `a` is the signed curvature
//!   of the projection and the z-gain of a closed projected loop is its
//!   signed enclosed area (counterclockwise positive).
//!
//! Projections of geodesics are circles of radius `1/|a|` (straight lines
//! when `a = 0`); their lifts gain height equal to the area swept by the
//! projection, closed radially to the origin.

use crate::num::{bisect, one_minus_cos_over_sq, sinc, x_minus_sin_over_sq, DEFAULT_ROOT_TOL};

/// Unit-momentum tolerance accepted by [`State::new`].
pub const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum GeomError {
    /// Planar momentum is not unit length.
    NotUnit { norm_sq: f64 },
    /// Two-point problem has coincident projections and no height gap.
    DegenerateChord,
    /// The requested branch window contains no solution.
    NoSolution { branch: i32 },
}

impl std::fmt::Display for GeomError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GeomError::NotUnit { norm_sq } => {
                write!(f, "planar momentum not unit: b²+c² = {norm_sq}")
            }
            GeomError::DegenerateChord => write!(f, "degenerate chord: equal points, zero Δz"),
            GeomError::NoSolution { branch } => {
                write!(f, "no geodesic on branch {branch}")
            }
        }
    }
}

impl std::error::Error for GeomError {}

/// A point of ℝ³. `z` carries units of area.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn dist(&self, other: &Point3) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2))
            .sqrt()
    }

    /// Planar distance of the Lagrangian projections.
    pub fn planar_dist(&self, other: &Point3) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// A momentum covector `a·α + b·dx + c·dy`.
///
/// `a` is the magnetic momentum (signed curvature of the projected path);
/// `(b, c)` is the planar momentum, equal to the projected velocity on unit
/// states.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Covector {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Covector {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Covector { a, b, c }
    }

    pub fn planar_norm_sq(&self) -> f64 {
        self.b * self.b + self.c * self.c
    }

    pub fn is_unit(&self) -> bool {
        (self.planar_norm_sq() - 1.0).abs() <= UNIT_TOL
    }

    /// Momentum of the time-reversed geodesic: velocity flips and the
    /// projected curve is traversed with opposite signed curvature.
    pub fn reversed(&self) -> Covector {
        Covector::new(-self.a, -self.b, -self.c)
    }
}

/// Energy `H = ½(b² + c²)`. Invariant under `a`-translation and under the
/// full symmetry group.
pub fn hamiltonian(m: &Covector) -> f64 {
    0.5 * m.planar_norm_sq()
}

/// A phase point: position plus unit covector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub point: Point3,
    pub momentum: Covector,
}

impl State {
    /// Rejects momenta whose planar part is not unit to within [`UNIT_TOL`].
    pub fn new(point: Point3, momentum: Covector) -> Result<Self, GeomError> {
        if !momentum.is_unit() {
            return Err(GeomError::NotUnit {
                norm_sq: momentum.planar_norm_sq(),
            });
        }
        Ok(State { point, momentum })
    }

    /// Builds a state from raw components, normalising `(b, c)`.
    pub fn from_parts(x: f64, y: f64, z: f64, a: f64, b: f64, c: f64) -> Result<Self, GeomError> {
        let n = (b * b + c * c).sqrt();
        if n < 1e-9 {
            return Err(GeomError::NotUnit { norm_sq: n * n });
        }
        Ok(State {
            point: Point3::new(x, y, z),
            momentum: Covector::new(a, b / n, c / n),
        })
    }

    /// The same geodesic traversed backwards.
    pub fn reversed(&self) -> State {
        State {
            point: self.point,
            momentum: self.momentum.reversed(),
        }
    }
}

/// Exact time-`t` cogeodesic flow.
///
/// Closed form, one uniform code path for every `a` (the `a → 0` limit is
/// handled by the series kernels, not by branching):
///
/// ```text
/// (b, c)(t) = R(at)·(b₀, c₀)
/// Δx = t·(b₀·sinc(at) − c₀·at·g(at)),   g(θ) = (1−cos θ)/θ²
/// Δy = t·(c₀·sinc(at) + b₀·at·g(at))
/// Δz = ½(x₀Δy − y₀Δx) + ½t²·k(at),      k(θ) = (θ−sin θ)/θ²
/// ```
///
/// Satisfies the group law `flow(flow(s,t₁),t₂) = flow(s,t₁+t₂)` and
/// conserves `a` and `H` exactly.
pub fn flow(s: &State, t: f64) -> State {
    let Covector { a, b, c } = s.momentum;
    let theta = a * t;
    let (sin_th, cos_th) = theta.sin_cos();
    let dx = t * (b * sinc(theta) - c * theta * one_minus_cos_over_sq(theta));
    let dy = t * (c * sinc(theta) + b * theta * one_minus_cos_over_sq(theta));
    let p = &s.point;
    State {
        point: Point3::new(
            p.x + dx,
            p.y + dy,
            p.z + 0.5 * (p.x * dy - p.y * dx) + 0.5 * t * t * x_minus_sin_over_sq(theta),
        ),
        momentum: Covector::new(a, b * cos_th - c * sin_th, b * sin_th + c * cos_th),
    }
}

/// A geodesic arc: a start state flowed for a nonnegative arclength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicArc {
    pub start: State,
    pub duration: f64,
}

impl GeodesicArc {
    pub fn new(start: State, duration: f64) -> Self {
        debug_assert!(duration >= 0.0);
        GeodesicArc { start, duration }
    }

    pub fn state_at(&self, t: f64) -> State {
        flow(&self.start, t)
    }

    pub fn end(&self) -> State {
        flow(&self.start, self.duration)
    }
}

/// Height gained along an arc: the signed area enclosed by the projection
/// closed with radial segments to the origin.
pub fn delta_z(arc: &GeodesicArc) -> f64 {
    arc.end().point.z - arc.start.point.z
}

/// The Lagrangian projection of a geodesic: a circle for `a ≠ 0`, a line
/// for `a = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProjectedPath {
    /// Circle of radius `1/|a|` traversed at signed angular rate `a`
    /// (counterclockwise for `a > 0`).
    Circle {
        center: (f64, f64),
        radius: f64,
        angular_rate: f64,
    },
    Line {
        through: (f64, f64),
        direction: (f64, f64),
    },
}

pub fn projected_circle(s: &State) -> ProjectedPath {
    let Covector { a, b, c } = s.momentum;
    if a == 0.0 {
        ProjectedPath::Line {
            through: (s.point.x, s.point.y),
            direction: (b, c),
        }
    } else {
        // Center sits at distance 1/a along the left normal of the velocity.
        ProjectedPath::Circle {
            center: (s.point.x - c / a, s.point.y + b / a),
            radius: 1.0 / a.abs(),
            angular_rate: a,
        }
    }
}

/// An isometry of the structure: rotation by `theta` about the z-axis
/// followed by the group translation by `v`.
///
/// The translation acts by `(x, y, z) ↦ (x+v₁, y+v₂, z+v₃+½(v₁y − v₂x))`;
/// the ½ is forced by invariance of the contact form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryElement {
    pub v: (f64, f64, f64),
    pub theta: f64,
}

impl SymmetryElement {
    pub fn identity() -> Self {
        SymmetryElement {
            v: (0.0, 0.0, 0.0),
            theta: 0.0,
        }
    }

    pub fn translation(v1: f64, v2: f64, v3: f64) -> Self {
        SymmetryElement {
            v: (v1, v2, v3),
            theta: 0.0,
        }
    }

    pub fn rotation(theta: f64) -> Self {
        SymmetryElement {
            v: (0.0, 0.0, 0.0),
            theta,
        }
    }

    /// Semidirect product: `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &SymmetryElement) -> SymmetryElement {
        let (st, ct) = (self.theta.sin(), self.theta.cos());
        // rotate other's planar translation into self's frame
        let w1 = ct * other.v.0 - st * other.v.1;
        let w2 = st * other.v.0 + ct * other.v.1;
        let w3 = other.v.2;
        let (v1, v2, v3) = self.v;
        SymmetryElement {
            v: (
                v1 + w1,
                v2 + w2,
                v3 + w3 + 0.5 * (v1 * w2 - v2 * w1),
            ),
            theta: self.theta + other.theta,
        }
    }
}

/// Pushforward of a state by an isometry. Preserves the contact form, the
/// Hamiltonian, and conjugates the geodesic flow.
pub fn apply_symmetry(g: &SymmetryElement, s: &State) -> State {
    let (st, ct) = (g.theta.sin(), g.theta.cos());
    let p = &s.point;
    let rx = ct * p.x - st * p.y;
    let ry = st * p.x + ct * p.y;
    let (v1, v2, v3) = g.v;
    let m = &s.momentum;
    State {
        point: Point3::new(
            rx + v1,
            ry + v2,
            p.z + v3 + 0.5 * (v1 * ry - v2 * rx),
        ),
        // the horizontal frame rotates with the plane; a is invariant
        momentum: Covector::new(m.a, ct * m.b - st * m.c, st * m.b + ct * m.c),
    }
}

/// Signed half-aperture equation of the two-point problem:
/// `f(μ) = (μ − sin μ cos μ)/sin²μ`, the ratio of segment area to (L/2)².
/// Odd, strictly increasing on (−π, π), with limits ∓∞ at ∓π.
fn aperture_area_ratio(mu: f64) -> f64 {
    if mu.abs() < 1e-5 {
        // (μ − sin μ cos μ)/sin²μ = 2μ/3 + O(μ³)
        return 2.0 * mu / 3.0;
    }
    let s = mu.sin();
    (mu - s * mu.cos()) / (s * s)
}

/// Solves the two-point geodesic problem from `p` to `q`.
///
/// The projected chord is fixed; the signed half-aperture `μ` of the
/// connecting circular arc is found by bisection from the area condition
///
/// ```text
/// 4(Δz − A_triangle)/L² = (μ − sin μ cos μ)/sin²μ,
/// ```
///
/// where `A_triangle` is the signed area of the triangle (origin, p, q) in
/// projection. `branch = 0` is the principal solution `|μ| < π`; branch
/// `k ≥ 1` looks in the window `|μ| ∈ (kπ, (k+1)π)` (arcs wrapping `k`
/// extra times), mirrored for negative `k`. Multi-loop windows can be
/// empty, in which case `NoSolution` is returned.
///
/// If `p` and `q` share a projection, the solution is a stack of full
/// circles enclosing `Δz`; `|branch|+1` is the number of loops.
pub fn connect(p: &Point3, q: &Point3, branch: i32) -> Result<GeodesicArc, GeomError> {
    connect_with_tol(p, q, branch, DEFAULT_ROOT_TOL)
}

pub fn connect_with_tol(
    p: &Point3,
    q: &Point3,
    branch: i32,
    tol: f64,
) -> Result<GeodesicArc, GeomError> {
    let wx = q.x - p.x;
    let wy = q.y - p.y;
    let dz = q.z - p.z;
    let chord = (wx * wx + wy * wy).sqrt();

    if chord < 1e-14 {
        // Vertical displacement only: full circles through the projection.
        if dz.abs() < 1e-14 {
            return Err(GeomError::DegenerateChord);
        }
        let loops = branch.unsigned_abs() as f64 + 1.0;
        let rho = (dz.abs() / (std::f64::consts::PI * loops)).sqrt();
        let a = dz.signum() / rho;
        let start = State {
            point: *p,
            // direction is arbitrary for a point-to-fibre connection
            momentum: Covector::new(a, 1.0, 0.0),
        };
        return Ok(GeodesicArc::new(
            start,
            2.0 * std::f64::consts::PI * rho * loops,
        ));
    }

    let tri = 0.5 * (p.x * q.y - p.y * q.x);
    let target = 4.0 * (dz - tri) / (chord * chord);
    let pi = std::f64::consts::PI;

    let mu = if branch == 0 {
        // principal branch: monotone on (−π, π), unbounded both ways
        let mut lo = -pi + 1e-9;
        let mut hi = pi - 1e-9;
        while aperture_area_ratio(lo) > target {
            lo = -pi + 0.1 * (pi + lo);
            if pi + lo < 1e-13 {
                break;
            }
        }
        while aperture_area_ratio(hi) < target {
            hi = pi - 0.1 * (pi - hi);
            if pi - hi < 1e-13 {
                break;
            }
        }
        bisect(|m| aperture_area_ratio(m) - target, lo, hi, tol)
            .map_err(|_| GeomError::NoSolution { branch })?
    } else {
        // window |μ| ∈ (kπ, (k+1)π): f diverges at both ends with a single
        // interior extremum; take the root on the side nearer kπ.
        let k = branch.unsigned_abs() as f64;
        let sign = if branch > 0 { 1.0 } else { -1.0 };
        if sign * target <= 0.0 {
            return Err(GeomError::NoSolution { branch });
        }
        let lo = k * pi + 1e-9;
        let hi = (k + 1.0) * pi - 1e-9;
        // f diverges at both window ends; locate its interior extremum, then
        // root-find on the side nearer kπ.
        let ext = crate::num::golden_min(
            |m| sign * aperture_area_ratio(sign * m),
            lo,
            hi,
            1e-12,
        );
        let f_ext = aperture_area_ratio(sign * ext);
        if sign * (target - f_ext) < 0.0 {
            return Err(GeomError::NoSolution { branch });
        }
        sign * bisect(
            |m| aperture_area_ratio(sign * m) - target,
            lo,
            ext,
            tol,
        )
        .map_err(|_| GeomError::NoSolution { branch })?
    };

    let (ux, uy) = (wx / chord, wy / chord);
    // Initial velocity is the chord direction rotated by −μ, flipped on the
    // windows where sin μ and μ disagree in sign (arcs wrapping past a full
    // turn); curvature and arclength follow from ρ = L/(2|sin μ|).
    let (sm, cm) = mu.sin_cos();
    let flip = if mu * sm < 0.0 { -1.0 } else { 1.0 };
    let b0 = flip * (cm * ux + sm * uy);
    let c0 = flip * (-sm * ux + cm * uy);
    let a = 2.0 * sm.abs() * mu.signum() / chord;
    let length = if mu.abs() < 1e-9 {
        chord
    } else {
        chord * mu.abs() / sm.abs()
    };
    let start = State {
        point: *p,
        momentum: Covector::new(a, b0, c0),
    };
    Ok(GeodesicArc::new(start, length))
}
