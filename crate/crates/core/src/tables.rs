//! Billiard tables and their boundary geometry.
//!
//! Five table families, all in canonical axis-aligned position (arbitrary
//! placement is obtained by conjugating states with a `SymmetryElement`
//! rather than by parametrising the tables). Each face exposes an
//! outward-oriented defining differential `dG`, written in the coframe
//! `{α, dx, dy}`:
//!
//! * cylinder wall at `(x, y)`: `(0, 2(x−cx), 2(y−cy))`
//! * horizontal face: `±(1, −y/2, x/2)` — the expansion of `±dz`
//! * vertical plane `{y = v}`: `(0, 0, ±1)`
//!
//! A horizontal face has a singular point of the boundary distribution where
//! the planar components of `dG` vanish, i.e. on the z-axis; there the
//! reflection law is undefined.

use crate::geometry::{Covector, Point3};

/// Tolerance for "on the boundary" and corner membership.
pub const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum TableError {
    NotOnBoundary { distance: f64 },
    /// Raised by queries that only make sense for specific variants.
    WrongTable { expected: &'static str },
    /// Malformed table grammar string.
    Parse(String),
}

impl std::fmt::Display for TableError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TableError::NotOnBoundary { distance } => {
                write!(f, "point not on boundary (signed distance {distance:e})")
            }
            TableError::WrongTable { expected } => write!(f, "operation requires {expected}"),
            TableError::Parse(msg) => write!(f, "bad table spec: {msg}"),
        }
    }
}

impl std::error::Error for TableError {}

/// Which face of the table a boundary point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Face {
    /// Cylinder side wall.
    Wall,
    /// Lower horizontal face (table above).
    Bottom,
    /// Upper horizontal face (table below).
    Top,
    /// Vertical plane.
    Plane,
}

impl Face {
    pub fn name(&self) -> &'static str {
        match self {
            Face::Wall => "wall",
            Face::Bottom => "bottom",
            Face::Top => "top",
            Face::Plane => "plane",
        }
    }
}

/// A billiard table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TableSpec {
    /// `{(x,y) : ‖(x,y) − center‖ ≤ radius} × ℝ`.
    InfiniteCylinder { center: (f64, f64), radius: f64 },
    /// `side = +1`: the table is `z ≥ z0`; `side = −1`: `z ≤ z0`.
    HorizontalHalfSpace { z0: f64, side: i8 },
    /// The table is `y ≤ offset`.
    VerticalHalfSpace { offset: f64 },
    /// `ℝ² × [z_lo, z_hi]`.
    HorizontalBand { z_lo: f64, z_hi: f64 },
    /// Disc of `radius` about `center`, capped at `z_lo` and `z_hi`.
    FiniteCylinder {
        center: (f64, f64),
        radius: f64,
        z_lo: f64,
        z_hi: f64,
    },
}

/// Boundary data at a contact point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryContact {
    pub point: Point3,
    pub face: Face,
    /// Outward-oriented boundary differential in the coframe `{α, dx, dy}`.
    pub dg: Covector,
    pub is_corner: bool,
    /// True where the planar components of `dg` vanish: the contact plane is
    /// contained in the face and no reflection is defined.
    pub is_singular: bool,
}

fn radial(center: (f64, f64), p: &Point3) -> (f64, f64, f64) {
    let dx = p.x - center.0;
    let dy = p.y - center.1;
    (dx, dy, (dx * dx + dy * dy).sqrt())
}

/// Coframe expansion of `±dz` at `p`: `dz = α − ½y·dx + ½x·dy`.
fn horizontal_dg(p: &Point3, orientation: f64) -> Covector {
    Covector::new(orientation, -0.5 * orientation * p.y, 0.5 * orientation * p.x)
}

impl TableSpec {
    /// Signed distance: negative inside, zero on the boundary, positive
    /// outside. Exact for every variant (corner regions of the finite
    /// cylinder use the radial/vertical hypotenuse).
    pub fn signed_distance(&self, p: &Point3) -> f64 {
        match *self {
            TableSpec::InfiniteCylinder { center, radius } => radial(center, p).2 - radius,
            TableSpec::HorizontalHalfSpace { z0, side } => (z0 - p.z) * side as f64,
            TableSpec::VerticalHalfSpace { offset } => p.y - offset,
            TableSpec::HorizontalBand { z_lo, z_hi } => (z_lo - p.z).max(p.z - z_hi),
            TableSpec::FiniteCylinder {
                center,
                radius,
                z_lo,
                z_hi,
            } => {
                let rad = radial(center, p).2 - radius;
                let vert = (z_lo - p.z).max(p.z - z_hi);
                if rad <= 0.0 && vert <= 0.0 {
                    rad.max(vert)
                } else {
                    rad.max(0.0).hypot(vert.max(0.0))
                }
            }
        }
    }

    /// Faces of this table with their defining data, used by the event loop.
    pub(crate) fn faces(&self) -> Vec<FaceGeometry> {
        match *self {
            TableSpec::InfiniteCylinder { center, radius } => {
                vec![FaceGeometry::Wall { center, radius }]
            }
            TableSpec::HorizontalHalfSpace { z0, side } => vec![FaceGeometry::Horizontal {
                z: z0,
                face: if side > 0 { Face::Bottom } else { Face::Top },
            }],
            TableSpec::VerticalHalfSpace { offset } => vec![FaceGeometry::Vertical { offset }],
            TableSpec::HorizontalBand { z_lo, z_hi } => vec![
                FaceGeometry::Horizontal {
                    z: z_lo,
                    face: Face::Bottom,
                },
                FaceGeometry::Horizontal {
                    z: z_hi,
                    face: Face::Top,
                },
            ],
            TableSpec::FiniteCylinder {
                center,
                radius,
                z_lo,
                z_hi,
            } => vec![
                FaceGeometry::Wall { center, radius },
                FaceGeometry::Horizontal {
                    z: z_lo,
                    face: Face::Bottom,
                },
                FaceGeometry::Horizontal {
                    z: z_hi,
                    face: Face::Top,
                },
            ],
        }
    }

    /// Boundary data at `p`, which must lie on the boundary to within
    /// [`BOUNDARY_TOL`] (scaled by table size).
    pub fn boundary_contact(&self, p: &Point3) -> Result<BoundaryContact, TableError> {
        let d = self.signed_distance(p);
        if d.abs() > BOUNDARY_TOL {
            return Err(TableError::NotOnBoundary { distance: d });
        }
        // nearest face wins; corner when two faces are within tolerance
        let mut best: Option<(f64, &FaceGeometry)> = None;
        let faces = self.faces();
        let mut near = 0u32;
        for fg in &faces {
            let fd = fg.distance(p).abs();
            if fd <= BOUNDARY_TOL {
                near += 1;
            }
            if best.map_or(true, |(bd, _)| fd < bd) {
                best = Some((fd, fg));
            }
        }
        let (_, fg) = best.expect("tables always have at least one face");
        let mut contact = fg.contact_at(p);
        contact.is_corner = near >= 2;
        Ok(contact)
    }

    /// Singular points of the boundary distribution: one per horizontal face
    /// whose closure meets the z-axis. Cylinder walls and vertical planes
    /// carry a nowhere-singular line field.
    pub fn singular_points(&self) -> Vec<Point3> {
        let mut out = Vec::new();
        for fg in self.faces() {
            if let FaceGeometry::Horizontal { z, .. } = fg {
                let on_face = match *self {
                    TableSpec::FiniteCylinder { center, radius, .. } => {
                        (center.0 * center.0 + center.1 * center.1).sqrt() <= radius
                    }
                    _ => true,
                };
                if on_face {
                    out.push(Point3::new(0.0, 0.0, z));
                }
            }
        }
        out
    }

    /// Parses the CLI table grammar:
    /// `cyl:cx,cy,r` | `hplane:z0,side` | `vplane:v` | `band:zlo,zhi` |
    /// `fincyl:cx,cy,r,zlo,zhi`.
    pub fn parse(spec: &str) -> Result<TableSpec, TableError> {
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| TableError::Parse(format!("missing ':' in {spec:?}")))?;
        let nums: Vec<f64> = rest
            .split(',')
            .map(|t| {
                let t = t.trim();
                t.parse::<f64>()
                    .map_err(|e| TableError::Parse(format!("bad number {t:?}: {e}")))
            })
            .collect::<Result<_, _>>()?;
        let expect = |n: usize| -> Result<(), TableError> {
            if nums.len() == n {
                Ok(())
            } else {
                Err(TableError::Parse(format!(
                    "{kind} takes {n} parameters, got {}",
                    nums.len()
                )))
            }
        };
        let table = match kind {
            "cyl" => {
                expect(3)?;
                if nums[2] <= 0.0 {
                    return Err(TableError::Parse("radius must be positive".into()));
                }
                TableSpec::InfiniteCylinder {
                    center: (nums[0], nums[1]),
                    radius: nums[2],
                }
            }
            "hplane" => {
                expect(2)?;
                let side = if nums[1] > 0.0 { 1 } else { -1 };
                TableSpec::HorizontalHalfSpace { z0: nums[0], side }
            }
            "vplane" => {
                expect(1)?;
                TableSpec::VerticalHalfSpace { offset: nums[0] }
            }
            "band" => {
                expect(2)?;
                if nums[0] >= nums[1] {
                    return Err(TableError::Parse("need z_lo < z_hi".into()));
                }
                TableSpec::HorizontalBand {
                    z_lo: nums[0],
                    z_hi: nums[1],
                }
            }
            "fincyl" => {
                expect(5)?;
                if nums[2] <= 0.0 {
                    return Err(TableError::Parse("radius must be positive".into()));
                }
                if nums[3] >= nums[4] {
                    return Err(TableError::Parse("need z_lo < z_hi".into()));
                }
                TableSpec::FiniteCylinder {
                    center: (nums[0], nums[1]),
                    radius: nums[2],
                    z_lo: nums[3],
                    z_hi: nums[4],
                }
            }
            other => return Err(TableError::Parse(format!("unknown table kind {other:?}"))),
        };
        Ok(table)
    }

    /// Grammar string for this table, inverse of [`TableSpec::parse`].
    pub fn to_grammar(&self) -> String {
        match *self {
            TableSpec::InfiniteCylinder { center, radius } => {
                format!("cyl:{},{},{}", center.0, center.1, radius)
            }
            TableSpec::HorizontalHalfSpace { z0, side } => format!("hplane:{},{}", z0, side),
            TableSpec::VerticalHalfSpace { offset } => format!("vplane:{}", offset),
            TableSpec::HorizontalBand { z_lo, z_hi } => format!("band:{},{}", z_lo, z_hi),
            TableSpec::FiniteCylinder {
                center,
                radius,
                z_lo,
                z_hi,
            } => format!("fincyl:{},{},{},{},{}", center.0, center.1, radius, z_lo, z_hi),
        }
    }
}

/// One face of a table, in a form the event solver can work with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum FaceGeometry {
    Wall { center: (f64, f64), radius: f64 },
    Horizontal { z: f64, face: Face },
    Vertical { offset: f64 },
}

impl FaceGeometry {
    /// Distance to this face's carrier surface (not the table's signed
    /// distance; used for face attribution and corner detection).
    pub(crate) fn distance(&self, p: &Point3) -> f64 {
        match *self {
            FaceGeometry::Wall { center, radius } => radial(center, p).2 - radius,
            FaceGeometry::Horizontal { z, .. } => p.z - z,
            FaceGeometry::Vertical { offset } => p.y - offset,
        }
    }

    pub(crate) fn contact_at(&self, p: &Point3) -> BoundaryContact {
        match *self {
            FaceGeometry::Wall { center, .. } => {
                let (dx, dy, _) = radial(center, p);
                BoundaryContact {
                    point: *p,
                    face: Face::Wall,
                    dg: Covector::new(0.0, 2.0 * dx, 2.0 * dy),
                    is_corner: false,
                    is_singular: false,
                }
            }
            FaceGeometry::Horizontal { face, .. } => {
                // Bottom face of an upper table points down (−dz), top face
                // of a lower table points up (+dz).
                let orientation = if face == Face::Bottom { -1.0 } else { 1.0 };
                let dg = horizontal_dg(p, orientation);
                BoundaryContact {
                    point: *p,
                    face,
                    dg,
                    is_corner: false,
                    is_singular: (dg.b * dg.b + dg.c * dg.c).sqrt() < 0.5 * BOUNDARY_TOL,
                }
            }
            FaceGeometry::Vertical { .. } => BoundaryContact {
                point: *p,
                face: Face::Plane,
                dg: Covector::new(0.0, 0.0, 1.0),
                is_corner: false,
                is_singular: false,
            },
        }
    }
}
