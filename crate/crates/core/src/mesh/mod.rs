//! Triangulated unit spheres: icosphere construction, cotangent weights and
//! lumped vertex areas.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::conformal::Density;
use crate::error::{Error, Result};
use crate::geom::{self, Vec3};

mod grading;
pub(crate) use grading::min_separation;
pub use grading::{grade_toward, GRADING_STRETCH};

/// Highest icosphere level accepted by [`build_icosphere`].
pub const MAX_LEVEL: usize = 8;

/// A closed, consistently oriented triangulation whose vertices lie on the
/// unit sphere. Immutable after construction.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    /// Undirected edges `(i, j)` with `i < j`.
    edges: Vec<(usize, usize)>,
    /// Half the sum of the cotangents of the two angles opposite each edge.
    cot_weights: Vec<f64>,
    /// One third of the area of the incident triangles.
    vertex_area: Vec<f64>,
}

impl TriMesh {
    /// Builds a mesh from raw parts, re-projecting vertices onto the sphere.
    ///
    /// Rejects open or inconsistently oriented triangulations and vertices
    /// that are far from the unit sphere (more than 1e-6 off).
    pub fn from_parts(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let nv = vertices.len();
        let mut verts = Vec::with_capacity(nv);
        for (i, &p) in vertices.iter().enumerate() {
            let n = geom::norm(p);
            if (n - 1.0).abs() > 1e-6 {
                return Err(Error::Geometry(format!(
                    "vertex {i} has norm {n}, expected a unit vector"
                )));
            }
            // leave vectors that are unit to rounding alone so reading a written mesh is exact
            verts.push(if (n - 1.0).abs() <= 4.0 * f64::EPSILON { p } else { geom::scale(p, 1.0 / n) });
        }

        let mut directed: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                if a >= nv || b >= nv {
                    return Err(Error::IndexOutOfRange {
                        index: a.max(b),
                        len: nv,
                    });
                }
                if a == b {
                    return Err(Error::Geometry(format!("triangle {t} repeats vertex {a}")));
                }
                if directed.insert((a, b), t).is_some() {
                    return Err(Error::Geometry(format!(
                        "directed edge ({a}, {b}) appears twice; orientation is inconsistent"
                    )));
                }
            }
        }
        let mut edges = Vec::with_capacity(directed.len() / 2);
        for &(a, b) in directed.keys() {
            if !directed.contains_key(&(b, a)) {
                return Err(Error::Geometry(format!("edge ({a}, {b}) is on a boundary")));
            }
            if a < b {
                edges.push((a, b));
            }
        }
        edges.sort_unstable();

        let mut mesh = TriMesh {
            vertices: verts,
            triangles,
            edges,
            cot_weights: Vec::new(),
            vertex_area: Vec::new(),
        };
        mesh.compute_weights();
        Ok(mesh)
    }

    fn compute_weights(&mut self) {
        let edge_index: HashMap<(usize, usize), usize> = self
            .edges
            .iter()
            .enumerate()
            .map(|(e, &key)| (key, e))
            .collect();
        let mut cot = vec![0.0; self.edges.len()];
        let mut area = vec![0.0; self.vertices.len()];
        for tri in &self.triangles {
            let p = tri.map(|i| self.vertices[i]);
            let a = triangle_area(p[0], p[1], p[2]);
            for k in 0..3 {
                area[tri[k]] += a / 3.0;
                // angle at corner k is opposite edge (k+1, k+2)
                let (i, j) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                let u = geom::sub(p[(k + 1) % 3], p[k]);
                let v = geom::sub(p[(k + 2) % 3], p[k]);
                let c = geom::dot(u, v) / geom::norm(geom::cross(u, v));
                cot[edge_index[&(i.min(j), i.max(j))]] += 0.5 * c;
            }
        }
        self.cot_weights = cot;
        self.vertex_area = area;
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn cot_weights(&self) -> &[f64] {
        &self.cot_weights
    }

    pub fn vertex_area(&self) -> &[f64] {
        &self.vertex_area
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    /// Sum of flat triangle areas.
    pub fn round_area(&self) -> f64 {
        self.vertex_area.iter().sum()
    }

    /// Area of `(S^2, rho * g_round)` in the lumped discretization.
    pub fn total_area(&self, density: &Density) -> Result<f64> {
        check_len(self, density.values())?;
        Ok(density
            .values()
            .iter()
            .zip(&self.vertex_area)
            .map(|(r, a)| r * a)
            .sum())
    }

    /// Vertex-to-vertex adjacency lists, sorted.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    /// Applies `f` to every vertex position, keeping the connectivity.
    pub fn map_vertices(&self, f: impl Fn(Vec3) -> Vec3) -> Result<TriMesh> {
        let verts = self.vertices.iter().map(|&p| geom::normalize(f(p))).collect();
        TriMesh::from_parts(verts, self.triangles.clone())
    }

    /// Writes the plain-text mesh format: `V F`, then vertices, then 0-based triangles.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {}", self.vertices.len(), self.triangles.len())?;
        for p in &self.vertices {
            writeln!(out, "{:.17e} {:.17e} {:.17e}", p[0], p[1], p[2])?;
        }
        for t in &self.triangles {
            writeln!(out, "{} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<TriMesh> {
        let mut lines = input
            .lines()
            .enumerate()
            .filter(|(_, l)| l.as_ref().map(|s| !s.trim().is_empty()).unwrap_or(true));
        let mut next = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((n, Ok(l))) => Ok((n + 1, l)),
                Some((_, Err(e))) => Err(e.into()),
                None => Err(Error::Parse {
                    line: 0,
                    msg: format!("unexpected end of input while reading {what}"),
                }),
            }
        };
        let (ln, header) = next("header")?;
        let counts: Vec<usize> = parse_fields(ln, &header, 2)?;
        let (nv, nf) = (counts[0], counts[1]);
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (ln, l) = next("vertex")?;
            let v: Vec<f64> = parse_fields(ln, &l, 3)?;
            vertices.push([v[0], v[1], v[2]]);
        }
        let mut triangles = Vec::with_capacity(nf);
        for _ in 0..nf {
            let (ln, l) = next("triangle")?;
            let t: Vec<usize> = parse_fields(ln, &l, 3)?;
            triangles.push([t[0], t[1], t[2]]);
        }
        TriMesh::from_parts(vertices, triangles)
    }
}

fn parse_fields<T: std::str::FromStr>(line: usize, text: &str, count: usize) -> Result<Vec<T>> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != count {
        return Err(Error::Parse {
            line,
            msg: format!("expected {count} fields, found {}", fields.len()),
        });
    }
    fields
        .iter()
        .map(|f| {
            f.parse::<T>().map_err(|_| Error::Parse {
                line,
                msg: format!("cannot parse `{f}`"),
            })
        })
        .collect()
}

pub(crate) fn check_len(mesh: &TriMesh, values: &[f64]) -> Result<()> {
    if values.len() != mesh.num_vertices() {
        return Err(Error::Dimension {
            expected: mesh.num_vertices(),
            got: values.len(),
        });
    }
    Ok(())
}

pub fn triangle_area(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    0.5 * geom::norm(geom::cross(geom::sub(b, a), geom::sub(c, a)))
}

/// Regular icosahedron subdivided `level` times, vertices projected radially
/// onto the unit sphere after every subdivision.
pub fn build_icosphere(level: usize) -> Result<TriMesh> {
    if level > MAX_LEVEL {
        return Err(Error::ResourceLimit {
            what: "icosphere level",
            value: level,
            max: MAX_LEVEL,
        });
    }
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = vec![
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ]
    .into_iter()
    .map(geom::normalize)
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..level {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next_faces = Vec::with_capacity(faces.len() * 4);
        let mut mid = |a: usize, b: usize, verts: &mut Vec<Vec3>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoint.entry(key).or_insert_with(|| {
                verts.push(geom::normalize(geom::add(verts[a], verts[b])));
                verts.len() - 1
            })
        };
        for &[a, b, c] in &faces {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next_faces.push([a, ab, ca]);
            next_faces.push([b, bc, ab]);
            next_faces.push([c, ca, bc]);
            next_faces.push([ab, bc, ca]);
        }
        faces = next_faces;
    }
    TriMesh::from_parts(vertices, faces)
}

/// Angle and edge-length statistics of a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    /// Smallest interior angle, degrees.
    pub min_angle: f64,
    /// Largest interior angle, degrees.
    pub max_angle: f64,
    /// Longest over shortest edge.
    pub edge_length_ratio: f64,
}

/// Fails with [`Error::DegenerateMesh`] listing every triangle whose area
/// is (numerically) zero.
pub fn mesh_quality(mesh: &TriMesh) -> Result<QualityReport> {
    let mut min_angle = f64::INFINITY;
    let mut max_angle: f64 = 0.0;
    let mut degenerate = Vec::new();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = tri.map(|i| mesh.vertices[i]);
        let area = triangle_area(p[0], p[1], p[2]);
        let longest = (0..3)
            .map(|k| geom::norm(geom::sub(p[(k + 1) % 3], p[k])))
            .fold(0.0, f64::max);
        if !(area > 1e-12 * longest * longest) {
            degenerate.push(t);
            continue;
        }
        for k in 0..3 {
            let u = geom::sub(p[(k + 1) % 3], p[k]);
            let v = geom::sub(p[(k + 2) % 3], p[k]);
            let ang = geom::norm(geom::cross(u, v)).atan2(geom::dot(u, v)).to_degrees();
            min_angle = min_angle.min(ang);
            max_angle = max_angle.max(ang);
        }
    }
    if !degenerate.is_empty() {
        return Err(Error::DegenerateMesh { indices: degenerate });
    }
    let lengths = mesh
        .edges
        .iter()
        .map(|&(i, j)| geom::norm(geom::sub(mesh.vertices[i], mesh.vertices[j])));
    let (lo, hi) = lengths.fold((f64::INFINITY, 0.0_f64), |(lo, hi), l| (lo.min(l), hi.max(l)));
    Ok(QualityReport {
        min_angle,
        max_angle,
        edge_length_ratio: hi / lo,
    })
}
