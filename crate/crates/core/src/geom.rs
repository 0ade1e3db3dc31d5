//! Small 3-vector helpers and stereographic charts of the unit sphere.

use num_complex::Complex64;

pub type Vec3 = [f64; 3];

#[inline]
pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalize(a: Vec3) -> Vec3 {
    scale(a, 1.0 / norm(a))
}

/// Great-circle distance between two unit vectors.
pub fn geodesic(a: Vec3, b: Vec3) -> f64 {
    norm(cross(a, b)).atan2(dot(a, b))
}

/// Stereographic projection from the north pole; the south pole maps to 0.
/// Undefined (infinite) at the north pole itself.
pub fn to_chart(p: Vec3) -> Complex64 {
    let d = 1.0 - p[2];
    Complex64::new(p[0] / d, p[1] / d)
}

/// Inverse of [`to_chart`].
pub fn from_chart(z: Complex64) -> Vec3 {
    let r2 = z.norm_sqr();
    let s = 1.0 / (1.0 + r2);
    [2.0 * z.re * s, 2.0 * z.im * s, (r2 - 1.0) * s]
}

/// Chart coordinate `z` or its inverse `1/z` for a point, picking whichever
/// has modulus at most one. The flag is `true` for the inverted (north) chart.
pub fn chart_pair(p: Vec3) -> (Complex64, bool) {
    if p[2] <= 0.0 {
        (to_chart(p), false)
    } else {
        // w = 1/z = (x - iy) / (1 + p_z)
        let d = 1.0 + p[2];
        (Complex64::new(p[0] / d, -p[1] / d), true)
    }
}

/// Orthonormal frame that rotates `center` onto the south pole, keeping
/// orientation so that charts built from it are holomorphic.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    e1: Vec3,
    e2: Vec3,
    e3: Vec3,
}

impl Frame {
    pub fn centered_at(center: Vec3) -> Self {
        let c = normalize(center);
        let helper = if c[0].abs() < 0.9 {
            [1.0, 0.0, 0.0]
        } else {
            [0.0, 1.0, 0.0]
        };
        let u = normalize(cross(c, helper));
        let v = cross(c, u);
        // rows (v, u, -c) form a proper rotation taking c to (0,0,-1)
        Frame {
            e1: v,
            e2: u,
            e3: scale(c, -1.0),
        }
    }

    pub fn rotate(&self, p: Vec3) -> Vec3 {
        [dot(self.e1, p), dot(self.e2, p), dot(self.e3, p)]
    }

    pub fn unrotate(&self, q: Vec3) -> Vec3 {
        add(
            add(scale(self.e1, q[0]), scale(self.e2, q[1])),
            scale(self.e3, q[2]),
        )
    }

    /// Stereographic coordinate of `p` in the chart where the frame center is 0.
    pub fn chart(&self, p: Vec3) -> Complex64 {
        to_chart(self.rotate(p))
    }

    pub fn point(&self, z: Complex64) -> Vec3 {
        self.unrotate(from_chart(z))
    }
}

/// Chart radius `tan(theta/2)` of a spherical cap of geodesic radius `theta`.
pub fn chart_radius(theta: f64) -> f64 {
    (0.5 * theta).tan()
}

/// Geodesic radius of the cap whose chart radius is `r`.
pub fn geodesic_radius(r: f64) -> f64 {
    2.0 * r.atan()
}
