use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;

use nalgebra::Rotation3;

use super::GeometryError;
use crate::Vec3;

/// Closed, consistently outward-oriented triangle mesh.
///
/// Multiple shells are allowed; shells nested an odd number of times inside
/// others are cavities and are oriented with normals pointing into the void.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    normals: Vec<Vec3>,
    areas: Vec<f64>,
}

impl TriangleMesh {
    /// Validates topology and orientation.
    ///
    /// Triangles that collapse to an edge (repeated vertex index) are dropped.
    /// Every remaining edge must be shared by exactly two triangles. Facet
    /// orientation is propagated across shared edges; a shell that cannot be
    /// oriented consistently is rejected, and each orientable shell is then
    /// flipped as a whole so its signed volume has the sign its nesting depth
    /// requires.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self, GeometryError> {
        let nv = vertices.len();
        if vertices.iter().any(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(GeometryError::Parse("non-finite vertex coordinate".into()));
        }
        let mut tris = Vec::with_capacity(triangles.len());
        for t in triangles {
            if let Some(&bad) = t.iter().find(|&&i| i >= nv) {
                return Err(GeometryError::Parse(format!(
                    "triangle references vertex {bad} but only {nv} exist"
                )));
            }
            if t[0] != t[1] && t[1] != t[2] && t[0] != t[2] {
                tris.push(t);
            }
        }
        if tris.is_empty() {
            return Err(GeometryError::DegenerateDimension("mesh has no triangles".into()));
        }

        // undirected edge -> [(triangle, forward?)]
        let mut edges: HashMap<(usize, usize), Vec<(usize, bool)>> = HashMap::new();
        for (ti, t) in tris.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                edges.entry(key).or_default().push((ti, a < b));
            }
        }
        let mut bad: Vec<_> = edges.iter().filter(|(_, v)| v.len() != 2).collect();
        if !bad.is_empty() {
            bad.sort_by_key(|(k, _)| **k);
            let (k, v) = bad[0];
            return Err(GeometryError::NonWatertightMesh(format!(
                "{} edges are not shared by exactly two triangles, e.g. ({}, {}) used {} times",
                bad.len(),
                k.0,
                k.1,
                v.len()
            )));
        }

        let mut neighbours: Vec<Vec<(usize, bool)>> = vec![Vec::with_capacity(3); tris.len()];
        for pair in edges.values() {
            let (t1, d1) = pair[0];
            let (t2, d2) = pair[1];
            // same traversal direction on the shared edge means the two
            // facets disagree
            let same = d1 == d2;
            neighbours[t1].push((t2, same));
            neighbours[t2].push((t1, same));
        }

        let mut flip: Vec<Option<bool>> = vec![None; tris.len()];
        let mut component = vec![usize::MAX; tris.len()];
        let mut n_components = 0;
        for seed in 0..tris.len() {
            if flip[seed].is_some() {
                continue;
            }
            flip[seed] = Some(false);
            component[seed] = n_components;
            let mut queue = VecDeque::from([seed]);
            while let Some(t) = queue.pop_front() {
                let ft = flip[t].unwrap();
                for &(u, disagree) in &neighbours[t] {
                    let want = ft ^ disagree;
                    match flip[u] {
                        None => {
                            flip[u] = Some(want);
                            component[u] = n_components;
                            queue.push_back(u);
                        }
                        Some(f) if f != want => {
                            return Err(GeometryError::InvertedOrientation(format!(
                                "shell containing triangle {seed} is not orientable"
                            )));
                        }
                        _ => {}
                    }
                }
            }
            n_components += 1;
        }
        for (t, f) in tris.iter_mut().zip(&flip) {
            if f.unwrap() {
                t.swap(1, 2);
            }
        }

        let shell_volume = |tris: &[[usize; 3]], c: usize| -> f64 {
            tris.iter()
                .zip(&component)
                .filter(|(_, &k)| k == c)
                .map(|(t, _)| tet_volume(&vertices[t[0]], &vertices[t[1]], &vertices[t[2]]))
                .sum()
        };
        let volumes: Vec<f64> = (0..n_components).map(|c| shell_volume(&tris, c)).collect();
        let scale = bounding_diagonal(&vertices).powi(3);
        if let Some(c) = volumes.iter().position(|v| v.abs() <= 1e-14 * scale) {
            return Err(GeometryError::DegenerateDimension(format!(
                "shell {c} encloses no volume"
            )));
        }

        let mut desired_sign = vec![1.0; n_components];
        if n_components > 1 {
            let probe: Vec<Vec3> = (0..n_components)
                .map(|c| {
                    let t = component.iter().position(|&k| k == c).unwrap();
                    vertices[tris[t][0]]
                })
                .collect();
            for a in 0..n_components {
                let depth = (0..n_components)
                    .filter(|&b| b != a)
                    .filter(|&b| {
                        let w: f64 = tris
                            .iter()
                            .zip(&component)
                            .filter(|(_, &k)| k == b)
                            .map(|(t, _)| {
                                solid_angle(
                                    &probe[a],
                                    &vertices[t[0]],
                                    &vertices[t[1]],
                                    &vertices[t[2]],
                                )
                            })
                            .sum::<f64>()
                            / (4.0 * PI);
                        w.abs() > 0.5
                    })
                    .count();
                if depth % 2 == 1 {
                    desired_sign[a] = -1.0;
                }
            }
        }
        for (t, &c) in tris.iter_mut().zip(&component) {
            if volumes[c].signum() != desired_sign[c] {
                t.swap(1, 2);
            }
        }

        let mut mesh = Self {
            vertices,
            triangles: tris,
            normals: Vec::new(),
            areas: Vec::new(),
        };
        mesh.refresh_normals();
        if mesh.signed_volume() <= 0.0 {
            return Err(GeometryError::InvertedOrientation(
                "mesh encloses negative volume after orientation".into(),
            ));
        }
        Ok(mesh)
    }

    /// Builds a mesh from an unindexed triangle soup, merging vertices closer
    /// than `1e-9` of the bounding-box diagonal.
    pub fn from_soup(soup: &[[Vec3; 3]]) -> Result<Self, GeometryError> {
        let flat: Vec<Vec3> = soup.iter().flatten().copied().collect();
        let diag = bounding_diagonal(&flat);
        if !(diag > 0.0) {
            return Err(GeometryError::DegenerateDimension(
                "mesh has zero extent".into(),
            ));
        }
        let tol = 1e-9 * diag;
        let mut cells: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        let mut vertices: Vec<Vec3> = Vec::new();
        let mut index_of = |p: &Vec3| -> usize {
            let cell = [
                (p.x / tol).floor() as i64,
                (p.y / tol).floor() as i64,
                (p.z / tol).floor() as i64,
            ];
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        let key = [cell[0] + dx, cell[1] + dy, cell[2] + dz];
                        if let Some(list) = cells.get(&key) {
                            for &i in list {
                                if (vertices[i] - p).norm() <= tol {
                                    return i;
                                }
                            }
                        }
                    }
                }
            }
            vertices.push(*p);
            let i = vertices.len() - 1;
            cells.entry(cell).or_default().push(i);
            i
        };
        let triangles: Vec<[usize; 3]> = soup
            .iter()
            .map(|t| [index_of(&t[0]), index_of(&t[1]), index_of(&t[2])])
            .collect();
        Self::new(vertices, triangles)
    }

    fn refresh_normals(&mut self) {
        self.normals.clear();
        self.areas.clear();
        for t in &self.triangles {
            let [a, b, c] = t.map(|i| self.vertices[i]);
            let n = (b - a).cross(&(c - a));
            let len = n.norm();
            self.areas.push(0.5 * len);
            self.normals.push(if len > 0.0 { n / len } else { Vec3::zeros() });
        }
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Unit outward normal per triangle (zero for zero-area slivers).
    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn corners(&self, t: usize) -> [Vec3; 3] {
        self.triangles[t].map(|i| self.vertices[i])
    }

    /// Volume as a sum of signed tetrahedra against the origin.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| tet_volume(&self.vertices[t[0]], &self.vertices[t[1]], &self.vertices[t[2]]))
            .sum()
    }

    /// Volume by the divergence theorem, `V = ⅓ ∮ r·n dS`, with each facet
    /// evaluated at its centroid.
    pub fn divergence_volume(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.corners(t);
                let centroid = (a + b + c) / 3.0;
                centroid.dot(&self.normals[t]) * self.areas[t]
            })
            .sum::<f64>()
            / 3.0
    }

    /// Generalised winding number of the closed surface around `p`.
    pub fn winding_number(&self, p: &Vec3) -> f64 {
        self.triangles
            .iter()
            .map(|t| solid_angle(p, &self.vertices[t[0]], &self.vertices[t[1]], &self.vertices[t[2]]))
            .sum::<f64>()
            / (4.0 * PI)
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        self.winding_number(p) > 0.5
    }

    pub fn bounds(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    /// Rigidly moves the mesh: `v ↦ rotation·v + translation`.
    pub fn transformed(&self, rotation: &Rotation3<f64>, translation: &Vec3) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| rotation * v + translation).collect(),
            triangles: self.triangles.clone(),
            normals: self.normals.iter().map(|n| rotation * n).collect(),
            areas: self.areas.clone(),
        }
    }

    pub fn translated(&self, translation: &Vec3) -> Self {
        self.transformed(&Rotation3::identity(), translation)
    }

    /// Uniformly rescales about the origin.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut m = Self {
            vertices: self.vertices.iter().map(|v| v * factor).collect(),
            triangles: self.triangles.clone(),
            normals: Vec::new(),
            areas: Vec::new(),
        };
        m.refresh_normals();
        m
    }

    /// Geodesic sphere: an icosahedron subdivided `subdivisions` times
    /// (`20·4^k` triangles) with vertices projected onto the sphere.
    pub fn icosphere(radius: f64, subdivisions: u32) -> Self {
        let g = (1.0 + 5f64.sqrt()) / 2.0;
        let mut verts: Vec<Vec3> = [
            (-1.0, g, 0.0),
            (1.0, g, 0.0),
            (-1.0, -g, 0.0),
            (1.0, -g, 0.0),
            (0.0, -1.0, g),
            (0.0, 1.0, g),
            (0.0, -1.0, -g),
            (0.0, 1.0, -g),
            (g, 0.0, -1.0),
            (g, 0.0, 1.0),
            (-g, 0.0, -1.0),
            (-g, 0.0, 1.0),
        ]
        .iter()
        .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
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
        for _ in 0..subdivisions {
            let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
            let mut mid = |a: usize, b: usize, verts: &mut Vec<Vec3>| -> usize {
                *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                    verts.len() - 1
                })
            };
            let mut next = Vec::with_capacity(faces.len() * 4);
            for [a, b, c] in faces {
                let ab = mid(a, b, &mut verts);
                let bc = mid(b, c, &mut verts);
                let ca = mid(c, a, &mut verts);
                next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            faces = next;
        }
        let verts = verts.into_iter().map(|v| v * radius).collect();
        Self::new(verts, faces).expect("icosphere is a closed surface")
    }

    /// Axis-aligned box with full edge lengths `size`, centred at the origin.
    pub fn cuboid(size: Vec3) -> Self {
        let h = size * 0.5;
        let verts: Vec<Vec3> = (0..8)
            .map(|i| {
                Vec3::new(
                    if i & 1 == 0 { -h.x } else { h.x },
                    if i & 2 == 0 { -h.y } else { h.y },
                    if i & 4 == 0 { -h.z } else { h.z },
                )
            })
            .collect();
        let quads = [
            [0, 2, 6, 4],
            [1, 5, 7, 3],
            [0, 4, 5, 1],
            [2, 3, 7, 6],
            [0, 1, 3, 2],
            [4, 6, 7, 5],
        ];
        let tris = quads
            .iter()
            .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
            .collect();
        Self::new(verts, tris).expect("box is a closed surface")
    }

    /// Surface of revolution about the x axis.
    ///
    /// `profile` lists `(x, radius)` points from one pole to the other; the
    /// first and last must lie on the axis (radius 0) and all others off it.
    pub fn revolve(profile: &[(f64, f64)], segments: usize) -> Result<Self, GeometryError> {
        if profile.len() < 3 || segments < 3 {
            return Err(GeometryError::DegenerateDimension(
                "revolution needs ≥3 profile points and ≥3 segments".into(),
            ));
        }
        let rings = &profile[1..profile.len() - 1];
        if profile[0].1 != 0.0 || profile[profile.len() - 1].1 != 0.0 || rings.iter().any(|p| p.1 <= 0.0) {
            return Err(GeometryError::DegenerateDimension(
                "profile must start and end on the axis".into(),
            ));
        }
        let mut verts = vec![Vec3::new(profile[0].0, 0.0, 0.0)];
        for &(x, r) in rings {
            for j in 0..segments {
                let phi = 2.0 * PI * j as f64 / segments as f64;
                verts.push(Vec3::new(x, r * phi.cos(), r * phi.sin()));
            }
        }
        let last = verts.len();
        verts.push(Vec3::new(profile[profile.len() - 1].0, 0.0, 0.0));
        let ring = |k: usize, j: usize| 1 + k * segments + (j % segments);
        let mut tris = Vec::new();
        for j in 0..segments {
            tris.push([0, ring(0, j + 1), ring(0, j)]);
        }
        for k in 0..rings.len() - 1 {
            for j in 0..segments {
                let (a, b) = (ring(k, j), ring(k, j + 1));
                let (c, d) = (ring(k + 1, j), ring(k + 1, j + 1));
                tris.push([a, b, d]);
                tris.push([a, d, c]);
            }
        }
        let k = rings.len() - 1;
        for j in 0..segments {
            tris.push([last, ring(k, j), ring(k, j + 1)]);
        }
        Self::new(verts, tris)
    }

    /// Spherocylinder along x: a cylinder of `length` and `radius` closed by
    /// hemispheres.
    pub fn capsule(radius: f64, length: f64, segments: usize, cap_rings: usize) -> Self {
        let half = 0.5 * length;
        let mut profile = vec![(-half - radius, 0.0)];
        for k in 1..=cap_rings {
            let a = PI - 0.5 * PI * k as f64 / cap_rings as f64;
            profile.push((-half + radius * a.cos(), radius * a.sin()));
        }
        for k in 0..cap_rings {
            let a = 0.5 * PI - 0.5 * PI * k as f64 / cap_rings as f64;
            profile.push((half + radius * a.cos(), radius * a.sin()));
        }
        profile.push((half + radius, 0.0));
        Self::revolve(&profile, segments).expect("capsule profile is valid")
    }
}

fn tet_volume(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    a.dot(&b.cross(c)) / 6.0
}

fn bounding_diagonal(points: &[Vec3]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for v in points {
        lo = lo.inf(v);
        hi = hi.sup(v);
    }
    (hi - lo).norm()
}

/// Signed solid angle of triangle `abc` seen from `p` (Van Oosterom–Strackee).
fn solid_angle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let (a, b, c) = (a - p, b - p, c - p);
    let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
    let num = a.dot(&b.cross(&c));
    let den = la * lb * lc + a.dot(&b) * lc + b.dot(&c) * la + c.dot(&a) * lb;
    2.0 * num.atan2(den)
}
