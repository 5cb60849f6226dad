//! Points, great-circle arcs and rotation fields on the unit sphere.

use nalgebra::Vector3;
use std::f64::consts::PI;
use std::ops::Deref;
use thiserror::Error;

pub type Vec3 = Vector3<f64>;

/// Orthogonality and normalization tolerance for arc validation.
pub const ANGLE_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("cannot normalize a zero vector")]
    ZeroVector,
    #[error("arc parameter {s} outside [0, {length}]")]
    OutOfRange { s: f64, length: f64 },
    #[error("pole is not orthogonal to the arc start (dot = {0:e})")]
    NotOrthogonal(f64),
    #[error("arc length {0} outside (0, 2pi)")]
    BadLength(f64),
    #[error("endpoints are coincident or antipodal; minor arc undefined")]
    Degenerate,
}

/// A point of S^2 (or a unit tangent vector).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVec3(Vec3);

impl UnitVec3 {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self, GeomError> {
        Self::from_vec(Vec3::new(x, y, z))
    }

    pub fn from_vec(v: Vec3) -> Result<Self, GeomError> {
        let n = v.norm();
        if !(n > 1e-300) || !n.is_finite() {
            return Err(GeomError::ZeroVector);
        }
        if (n - 1.0).abs() <= 2.0 * f64::EPSILON {
            return Ok(UnitVec3(v));
        }
        Ok(UnitVec3(v / n))
    }

    pub fn x(&self) -> f64 {
        self.0.x
    }
    pub fn y(&self) -> f64 {
        self.0.y
    }
    pub fn z(&self) -> f64 {
        self.0.z
    }

    pub fn vec(&self) -> Vec3 {
        self.0
    }

    pub fn neg(&self) -> UnitVec3 {
        UnitVec3(-self.0)
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.0.x, self.0.y, self.0.z]
    }
}

impl Deref for UnitVec3 {
    type Target = Vec3;
    fn deref(&self) -> &Vec3 {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Endpoint {
    Start,
    End,
}

impl Endpoint {
    pub fn other(self) -> Endpoint {
        match self {
            Endpoint::Start => Endpoint::End,
            Endpoint::End => Endpoint::Start,
        }
    }
}

/// Oriented great-circle arc `gamma(s) = start cos s + (pole x start) sin s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreatArc {
    start: UnitVec3,
    pole: UnitVec3,
    length: f64,
    end: UnitVec3,
}

impl GreatArc {
    pub fn new(start: UnitVec3, pole: UnitVec3, length: f64) -> Result<Self, GeomError> {
        let d = start.dot(&pole);
        if d.abs() > ANGLE_TOL {
            return Err(GeomError::NotOrthogonal(d));
        }
        if !(length > 0.0 && length < 2.0 * PI) {
            return Err(GeomError::BadLength(length));
        }
        let end = Self::eval(&start, &pole, length);
        Ok(GreatArc { start, pole, length, end })
    }

    /// Minor arc from `a` to `b`.
    pub fn between(a: UnitVec3, b: UnitVec3) -> Result<Self, GeomError> {
        let c = a.cross(&b);
        let sn = c.norm();
        if sn < 1e-12 {
            return Err(GeomError::Degenerate);
        }
        let pole = UnitVec3(c / sn);
        let length = sn.atan2(a.dot(&b));
        Self::new(a, pole, length)
    }

    /// Arc from `a` with the given pole ending at `b`; the traversal angle is measured
    /// in the pole's orientation, so any length in (0, 2pi) is possible.
    pub fn with_pole(a: UnitVec3, b: UnitVec3, pole: UnitVec3) -> Result<Self, GeomError> {
        let d = a.dot(&pole);
        let pole = if d.abs() <= 64.0 * f64::EPSILON { pole } else { UnitVec3::from_vec(pole.vec() - d * a.vec())? };
        let xi = pole.cross(&a);
        let mut t = xi.dot(&b).atan2(a.dot(&b));
        if t <= 0.0 {
            t += 2.0 * PI;
        }
        Self::new(a, pole, t)
    }

    fn eval(start: &UnitVec3, pole: &UnitVec3, s: f64) -> UnitVec3 {
        let v = start.vec() * s.cos() + pole.cross(start) * s.sin();
        UnitVec3(v / v.norm())
    }

    pub fn start(&self) -> UnitVec3 {
        self.start
    }
    pub fn end(&self) -> UnitVec3 {
        self.end
    }
    pub fn pole(&self) -> UnitVec3 {
        self.pole
    }
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn endpoint(&self, e: Endpoint) -> UnitVec3 {
        match e {
            Endpoint::Start => self.start,
            Endpoint::End => self.end,
        }
    }

    pub fn point(&self, s: f64) -> Result<UnitVec3, GeomError> {
        if !(s >= -1e-14 && s <= self.length + 1e-14) {
            return Err(GeomError::OutOfRange { s, length: self.length });
        }
        Ok(Self::eval(&self.start, &self.pole, s))
    }

    /// Unit tangent `xi(s) = pole x gamma(s)`.
    pub fn tangent(&self, s: f64) -> Vec3 {
        let g = Self::eval(&self.start, &self.pole, s);
        self.pole.cross(&g)
    }

    pub fn outward_tangent(&self, e: Endpoint) -> UnitVec3 {
        match e {
            Endpoint::Start => UnitVec3(-self.tangent(0.0)),
            Endpoint::End => UnitVec3(self.tangent(self.length)),
        }
    }

    /// Same curve traversed backwards.
    pub fn reversed(&self) -> GreatArc {
        GreatArc {
            start: self.end,
            pole: self.pole.neg(),
            length: self.length,
            end: self.start,
        }
    }

    /// Split at parameter `t * length`, both halves keep the pole.
    pub fn split(&self, t: f64) -> Result<(GreatArc, GreatArc), GeomError> {
        if !(t > 0.0 && t < 1.0) {
            return Err(GeomError::OutOfRange { s: t, length: 1.0 });
        }
        let s = t * self.length;
        let m = Self::eval(&self.start, &self.pole, s);
        let a = GreatArc { start: self.start, pole: self.pole, length: s, end: m };
        let b = GreatArc {
            start: m,
            pole: self.pole,
            length: self.length - s,
            end: self.end,
        };
        Ok((a, b))
    }

    /// Arc parameter of `x` if it lies on the arc's circle and inside (`tol`, `length - tol`).
    pub fn interior_parameter(&self, x: &Vec3, tol: f64) -> Option<f64> {
        if self.pole.dot(x).abs() > tol {
            return None;
        }
        let xi0 = self.pole.cross(&self.start);
        let mut t = xi0.dot(x).atan2(self.start.dot(x));
        if t < 0.0 {
            t += 2.0 * PI;
        }
        if t > tol && t < self.length - tol {
            Some(t)
        } else {
            None
        }
    }
}

pub fn arc_point(arc: &GreatArc, s: f64) -> Result<UnitVec3, GeomError> {
    arc.point(s)
}

pub fn outward_tangent(arc: &GreatArc, e: Endpoint) -> UnitVec3 {
    arc.outward_tangent(e)
}

/// Euclidean norm of the tangent sum at a junction.
pub fn balance_residual(tangents: &[UnitVec3]) -> f64 {
    tangents.iter().fold(Vec3::zeros(), |acc, t| acc + t.vec()).norm()
}

/// Deterministic orthonormal frame `(e1, e2)` of the tangent plane at `p`.
pub fn tangent_frame(p: &UnitVec3) -> (Vec3, Vec3) {
    let a = if p.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = (a - a.dot(p) * p.vec()).normalize();
    let e2 = p.cross(&e1);
    (e1, e2)
}

/// Killing field `X(x) = magnitude (axis x x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationField {
    pub axis: UnitVec3,
    pub magnitude: f64,
}

impl RotationField {
    pub fn new(axis: UnitVec3, magnitude: f64) -> Self {
        RotationField { axis, magnitude }
    }

    pub fn velocity(&self, x: &Vec3) -> Vec3 {
        self.magnitude * self.axis.cross(x)
    }
}

/// `(A, B)` with `X(gamma(s)) . pole = A cos s + B sin s`.
pub fn rotation_normal_trace(field: &RotationField, arc: &GreatArc) -> (f64, f64) {
    let st = arc.start.vec();
    let p = arc.pole.vec();
    let a = field.magnitude * field.axis.cross(&st).dot(&p);
    let b = field.magnitude * field.axis.cross(&p.cross(&st)).dot(&p);
    (a, b)
}

/// Whether two arcs meet anywhere except at shared endpoints.
pub fn arcs_cross(a: &GreatArc, b: &GreatArc, tol: f64) -> bool {
    let n = a.pole.cross(&b.pole);
    if n.norm() < 1e-9 {
        // same circle: overlap iff an endpoint of one is strictly inside the other,
        // or both arcs coincide
        let inside = |x: &GreatArc, y: &GreatArc| {
            x.interior_parameter(&y.start, tol).is_some()
                || x.interior_parameter(&y.end, tol).is_some()
                || x.interior_parameter(&y.point(0.5 * y.length).unwrap(), tol).is_some()
        };
        return inside(a, b) || inside(b, a);
    }
    let n = n.normalize();
    for x in [n, -n] {
        let on_a = a.interior_parameter(&x, tol).is_some();
        let on_b = b.interior_parameter(&x, tol).is_some();
        let end_a = (a.start.vec() - x).norm() < tol || (a.end.vec() - x).norm() < tol;
        let end_b = (b.start.vec() - x).norm() < tol || (b.end.vec() - x).norm() < tol;
        if (on_a && (on_b || end_b)) || (on_b && end_a) {
            return true;
        }
    }
    false
}
