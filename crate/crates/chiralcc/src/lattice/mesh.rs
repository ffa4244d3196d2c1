//! Four-colored tetrahedral meshes and their dualization into color lattices.
//!
//! A 3D colorable lattice is exactly the dual of a tetrahedral mesh whose
//! vertices carry a proper 4-coloring: mesh vertices become volumes, mesh
//! edges become faces, mesh triangles become lattice edges and tets become
//! the 4-valent lattice vertices. Colored boundaries come from coning a
//! boundary surface (whose triangles avoid one color) to a fictitious mesh
//! vertex of that color.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::{BoundaryData, Color, ColorLattice, EdgeData, FaceData, VertexData, VolumeData, VolumeRef};
use crate::error::ChiralError;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeshVertex {
    pub color: Color,
    pub pos: [i64; 3],
    pub fictitious: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Mesh {
    pub vertices: Vec<MeshVertex>,
    pub tets: Vec<[usize; 4]>,
    /// periods for minimal-image arithmetic; 0 in an axis means open
    pub periods: [i64; 3],
}

impl Mesh {
    /// Minimal-image coordinate delta from a to b.
    pub fn wrap_delta(&self, a: [i64; 3], b: [i64; 3]) -> [i64; 3] {
        let mut d = [0i64; 3];
        for i in 0..3 {
            let mut diff = b[i] - a[i];
            let p = self.periods[i];
            if p > 0 {
                diff = diff.rem_euclid(p);
                if diff > p / 2 {
                    diff -= p;
                }
            }
            d[i] = diff;
        }
        d
    }

    /// 4× the tet centroid, wrap-consistent relative to the first corner.
    fn tet_pos(&self, tet: &[usize; 4]) -> [i64; 3] {
        let base = self.vertices[tet[0]].pos;
        let mut acc = [4 * base[0], 4 * base[1], 4 * base[2]];
        for &v in &tet[1..] {
            let d = self.wrap_delta(base, self.vertices[v].pos);
            for i in 0..3 {
                acc[i] += d[i];
            }
        }
        acc
    }

    /// Dualize into a color lattice. Tets must tile a closed pseudo-manifold
    /// once fictitious cone vertices are included (every triangle in exactly
    /// two tets).
    pub fn dualize(&self, name: &str, declared_betti2: Option<u32>) -> Result<ColorLattice, ChiralError> {
        let mut tets = self.tets.clone();
        for t in &mut tets {
            t.sort_unstable();
        }
        tets.sort_unstable();
        tets.dedup();
        if tets.len() != self.tets.len() {
            return Err(ChiralError::InvalidLattice("duplicate tets in mesh".into()));
        }

        // proper coloring inside each tet
        for t in &tets {
            let mut cols: Vec<Color> = t.iter().map(|&v| self.vertices[v].color).collect();
            cols.sort_unstable();
            cols.dedup();
            if cols.len() != 4 {
                return Err(ChiralError::InvalidLattice(format!(
                    "tet {:?} does not carry all four colors",
                    t
                )));
            }
        }

        // triangles -> incident tets
        let mut tri_map: BTreeMap<[usize; 3], Vec<usize>> = BTreeMap::new();
        for (ti, t) in tets.iter().enumerate() {
            for skip in 0..4 {
                let mut tri = [0usize; 3];
                let mut k = 0;
                for (i, &v) in t.iter().enumerate() {
                    if i != skip {
                        tri[k] = v;
                        k += 1;
                    }
                }
                tri_map.entry(tri).or_default().push(ti);
            }
        }
        for (tri, ts) in &tri_map {
            if ts.len() != 2 {
                return Err(ChiralError::InvalidLattice(format!(
                    "triangle {:?} lies in {} tets (want 2)",
                    tri,
                    ts.len()
                )));
            }
        }

        // mesh edges -> incident tets
        let mut edge_map: BTreeMap<[usize; 2], Vec<usize>> = BTreeMap::new();
        for (ti, t) in tets.iter().enumerate() {
            for i in 0..4 {
                for j in (i + 1)..4 {
                    edge_map.entry([t[i], t[j]]).or_default().push(ti);
                }
            }
        }

        // lattice vertices = tets
        let n = tets.len();
        let mut vertices: Vec<VertexData> = tets
            .iter()
            .map(|t| VertexData {
                lambda: 0,
                pos: self.tet_pos(t),
            })
            .collect();

        // lattice edges = triangles
        let mut edges: Vec<EdgeData> = Vec::new();
        let mut tri_ids: BTreeMap<[usize; 3], usize> = BTreeMap::new();
        for (tri, ts) in &tri_map {
            let mut cols: Vec<Color> = tri.iter().map(|&v| self.vertices[v].color).collect();
            cols.sort_unstable();
            let id = edges.len();
            tri_ids.insert(*tri, id);
            edges.push(EdgeData {
                vertices: [ts[0], ts[1]],
                color: [cols[0], cols[1], cols[2]],
                faces: Vec::new(),
            });
        }

        // lattice faces = mesh edges; vertex cycle = tets around the edge
        let mut faces: Vec<FaceData> = Vec::new();
        for (me, ts) in &edge_map {
            let [p, q] = *me;
            // order the tets into a cycle: consecutive tets share a triangle
            // containing the mesh edge, i.e. they differ in one vertex
            let mut cycle: Vec<usize> = vec![ts[0]];
            let mut used = vec![false; ts.len()];
            used[0] = true;
            while cycle.len() < ts.len() {
                let cur = *cycle.last().unwrap();
                let mut advanced = false;
                for (k, &cand) in ts.iter().enumerate() {
                    if used[k] {
                        continue;
                    }
                    if shares_triangle_with_edge(&tets[cur], &tets[cand], p, q) {
                        cycle.push(cand);
                        used[k] = true;
                        advanced = true;
                        break;
                    }
                }
                if !advanced {
                    return Err(ChiralError::InvalidLattice(format!(
                        "tets around mesh edge {:?} do not form a cycle",
                        me
                    )));
                }
            }
            // closed cycle check
            if !shares_triangle_with_edge(&tets[cycle[0]], &tets[*cycle.last().unwrap()], p, q) {
                return Err(ChiralError::InvalidLattice(format!(
                    "open tet fan around mesh edge {:?}",
                    me
                )));
            }
            let vp = &self.vertices[p];
            let vq = &self.vertices[q];
            let mut pair = [vp.color, vq.color];
            pair.sort_unstable();
            faces.push(FaceData {
                color: (pair[0], pair[1]),
                vertices: cycle,
                edges: Vec::new(),
                volumes: [VolumeRef::Real(p), VolumeRef::Real(q)], // mesh ids, remapped below
            });
        }

        // volumes = non-fictitious mesh vertices; boundaries = fictitious ones
        let mut vol_of_mesh: Vec<Option<VolumeRef>> = vec![None; self.vertices.len()];
        let mut volumes: Vec<VolumeData> = Vec::new();
        let mut boundaries: Vec<BoundaryData> = Vec::new();
        for (mi, mv) in self.vertices.iter().enumerate() {
            if mv.fictitious {
                vol_of_mesh[mi] = Some(VolumeRef::Boundary(boundaries.len()));
                boundaries.push(BoundaryData {
                    color: mv.color,
                    faces: Vec::new(),
                });
            } else {
                vol_of_mesh[mi] = Some(VolumeRef::Real(volumes.len()));
                volumes.push(VolumeData {
                    color: mv.color,
                    pos: mv.pos,
                    faces: Vec::new(),
                    vertices: Vec::new(),
                });
            }
        }
        for (fi, face) in faces.iter_mut().enumerate() {
            let mesh_p = match face.volumes[0] {
                VolumeRef::Real(x) => x,
                _ => unreachable!(),
            };
            let mesh_q = match face.volumes[1] {
                VolumeRef::Real(x) => x,
                _ => unreachable!(),
            };
            let rp = vol_of_mesh[mesh_p].unwrap();
            let rq = vol_of_mesh[mesh_q].unwrap();
            if matches!((rp, rq), (VolumeRef::Boundary(_), VolumeRef::Boundary(_))) {
                return Err(ChiralError::InvalidLattice(
                    "face between two fictitious boundary volumes".into(),
                ));
            }
            face.volumes = [rp, rq];
            for v in [rp, rq] {
                match v {
                    VolumeRef::Real(i) => volumes[i].faces.push(fi),
                    VolumeRef::Boundary(i) => boundaries[i].faces.push(fi),
                }
            }
        }

        // edge ↔ face incidence: look up the triangle between consecutive tets
        let face_count = faces.len();
        for fi in 0..face_count {
            let cyc = faces[fi].vertices.clone();
            let k = cyc.len();
            let mut face_edges = Vec::with_capacity(k);
            for i in 0..k {
                let a = cyc[i];
                let b = cyc[(i + 1) % k];
                let tri = common_triangle(&tets[a], &tets[b]).ok_or_else(|| {
                    ChiralError::Internal("face cycle neighbors share no triangle".into())
                })?;
                let eid = *tri_ids
                    .get(&tri)
                    .ok_or_else(|| ChiralError::Internal("missing triangle id".into()))?;
                face_edges.push(eid);
                edges[eid].faces.push(fi);
            }
            faces[fi].edges = face_edges;
        }
        for e in &mut edges {
            e.faces.sort_unstable();
            e.faces.dedup();
        }

        for (ti, t) in tets.iter().enumerate() {
            for &mv in t {
                if let Some(VolumeRef::Real(vi)) = vol_of_mesh[mv] {
                    volumes[vi].vertices.push(ti);
                }
            }
        }
        for v in &mut volumes {
            v.vertices.sort_unstable();
            v.faces.sort_unstable();
        }
        for b in &mut boundaries {
            b.faces.sort_unstable();
        }

        // bipartition by BFS over the lattice vertex graph
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in &edges {
            adj[e.vertices[0]].push(e.vertices[1]);
            adj[e.vertices[1]].push(e.vertices[0]);
        }
        let lambda = super::two_color(n, |v| adj[v].clone())?;
        for (v, l) in lambda.iter().enumerate() {
            vertices[v].lambda = *l;
        }

        let mut lat = ColorLattice {
            name: name.to_string(),
            vertices,
            edges,
            faces,
            volumes,
            boundaries,
            declared_betti2,
            mesh: Some(self.clone()),
            vertex_edges: Vec::new(),
            vertex_faces: Vec::new(),
        };
        lat.rebuild_lookup();
        Ok(lat)
    }
}

fn shares_triangle_with_edge(t1: &[usize; 4], t2: &[usize; 4], p: usize, q: usize) -> bool {
    match common_triangle(t1, t2) {
        Some(tri) => tri.contains(&p) && tri.contains(&q),
        None => false,
    }
}

/// The common triangle of two tets sharing exactly three vertices.
fn common_triangle(t1: &[usize; 4], t2: &[usize; 4]) -> Option<[usize; 3]> {
    let mut shared = [0usize; 3];
    let mut k = 0;
    for &v in t1 {
        if t2.contains(&v) {
            if k == 3 {
                return None;
            }
            shared[k] = v;
            k += 1;
        }
    }
    if k == 3 {
        shared.sort_unstable();
        Some(shared)
    } else {
        None
    }
}

fn color_of_index(i: i64) -> Color {
    match i.rem_euclid(4) {
        0 => Color::A,
        1 => Color::C,
        2 => Color::B,
        _ => Color::D,
    }
}

/// BCC sites of the tetragonal disphenoid honeycomb on a (4Lx,4Ly,4Lz)-
/// periodic box; coordinate sum mod 4 is the proper 4-coloring.
pub fn bcc_mesh(lx: usize, ly: usize, lz: usize) -> Mesh {
    let periods = [4 * lx as i64, 4 * ly as i64, 4 * lz as i64];
    let mut verts: Vec<MeshVertex> = Vec::new();
    let mut index: BTreeMap<[i64; 3], usize> = BTreeMap::new();
    for x in 0..periods[0] {
        for y in 0..periods[1] {
            for z in 0..periods[2] {
                let even = x % 2 == 0 && y % 2 == 0 && z % 2 == 0;
                let odd = x % 2 == 1 && y % 2 == 1 && z % 2 == 1;
                if even || odd {
                    index.insert([x, y, z], verts.len());
                    verts.push(MeshVertex {
                        color: color_of_index(x + y + z),
                        pos: [x, y, z],
                        fictitious: false,
                    });
                }
            }
        }
    }
    let wrap = |p: [i64; 3]| -> usize {
        let key = [
            p[0].rem_euclid(periods[0]),
            p[1].rem_euclid(periods[1]),
            p[2].rem_euclid(periods[2]),
        ];
        index[&key]
    };
    let axes: [[i64; 3]; 3] = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
    let mut tets: Vec<[usize; 4]> = Vec::new();
    for (&pos, &pi) in &index {
        if pos[0] % 2 != 0 {
            continue; // enumerate per even site
        }
        for a in 0..3 {
            let ea = axes[a];
            let p2 = [pos[0] + 2 * ea[0], pos[1] + 2 * ea[1], pos[2] + 2 * ea[2]];
            for (b, c) in [((a + 1) % 3, (a + 2) % 3), ((a + 2) % 3, (a + 1) % 3)] {
                let eb = axes[b];
                let ec = axes[c];
                for s in [1i64, -1] {
                    // odd edge along axis c at offset s·ê_b
                    let base = [
                        pos[0] + ea[0] + s * eb[0],
                        pos[1] + ea[1] + s * eb[1],
                        pos[2] + ea[2] + s * eb[2],
                    ];
                    let q1 = [base[0] - ec[0], base[1] - ec[1], base[2] - ec[2]];
                    let q2 = [base[0] + ec[0], base[1] + ec[1], base[2] + ec[2]];
                    tets.push([pi, wrap(p2), wrap(q1), wrap(q2)]);
                }
            }
        }
    }
    // each tet has exactly one even edge, so it was generated exactly once
    for t in &mut tets {
        t.sort_unstable();
    }
    tets.sort_unstable();
    tets.dedup();
    Mesh {
        vertices: verts,
        tets,
        periods,
    }
}

/// Stacked triangular-lattice mesh of a thickened torus with both boundary
/// surfaces coned to fictitious vertices of the same color. `layers` counts
/// interlayer gaps and must be ≡ 0 (mod 4) (0 gives the double cone).
pub fn slab_mesh(lx: usize, ly: usize, layers: usize) -> Mesh {
    assert!(layers % 4 == 0);
    let (nx, ny) = (3 * lx as i64, 3 * ly as i64);
    let mut verts: Vec<MeshVertex> = Vec::new();
    let mut index: BTreeMap<[i64; 3], usize> = BTreeMap::new();
    let h = layers as i64;
    for t in 0..=h {
        for a in 0..nx {
            for b in 0..ny {
                let j = (a - b).rem_euclid(3);
                index.insert([a, b, t], verts.len());
                verts.push(MeshVertex {
                    // sublattice j at layer t carries color index (j + t) mod 4,
                    // so every layer misses index 3 + t ... with t ≡ 0 (mod 4)
                    // on both boundaries the missing color is the same
                    color: color_of_slab_index(j + t),
                    pos: [a, b, t],
                    fictitious: false,
                });
            }
        }
    }
    let top = verts.len();
    verts.push(MeshVertex {
        color: color_of_slab_index(3), // the color missing from layer 0
        pos: [0, 0, -2],
        fictitious: true,
    });
    let bot = verts.len();
    verts.push(MeshVertex {
        color: color_of_slab_index(3 + h),
        pos: [0, 0, h + 2],
        fictitious: true,
    });

    let wrap = |a: i64, b: i64, t: i64| -> usize { index[&[a.rem_euclid(nx), b.rem_euclid(ny), t]] };
    // triangles of one layer, as (sublattice-0, sublattice-1, sublattice-2)
    // ordered triples: up {v, v+e1, v+e2} and down {v+e1, v+e2, v+e1+e2}
    // with e1 = (1,0), e2 = (0,1); (a-b) mod 3 indexes the sublattice
    let mut tets: Vec<[usize; 4]> = Vec::new();
    let layer_triangles = |t: i64| -> Vec<[usize; 3]> {
        let mut tris = Vec::new();
        for a in 0..nx {
            for b in 0..ny {
                tris.push([wrap(a, b, t), wrap(a + 1, b, t), wrap(a, b + 1, t)]);
                tris.push([wrap(a + 1, b, t), wrap(a, b + 1, t), wrap(a + 1, b + 1, t)]);
            }
        }
        tris
    };
    // boundary cones
    for tri in layer_triangles(0) {
        tets.push([tri[0], tri[1], tri[2], top]);
    }
    for tri in layer_triangles(h) {
        tets.push([tri[0], tri[1], tri[2], bot]);
    }
    // prisms between consecutive layers, split into three tets along the
    // diagonal from the bottom sublattice-j0 vertex to the top sublattice-j2
    // vertex (forced by the coloring on the other two quad faces)
    for t in 0..h {
        for a in 0..nx {
            for b in 0..ny {
                for tri in [
                    [[a, b], [a + 1, b], [a, b + 1]],
                    [[a + 1, b], [a, b + 1], [a + 1, b + 1]],
                ] {
                    // sort corners by sublattice index
                    let mut corners = tri;
                    corners.sort_by_key(|p| (p[0] - p[1]).rem_euclid(3));
                    let (u0, u1, u2) = (corners[0], corners[1], corners[2]);
                    let b0 = wrap(u0[0], u0[1], t);
                    let b1 = wrap(u1[0], u1[1], t);
                    let b2 = wrap(u2[0], u2[1], t);
                    let t0 = wrap(u0[0], u0[1], t + 1);
                    let t1 = wrap(u1[0], u1[1], t + 1);
                    let t2 = wrap(u2[0], u2[1], t + 1);
                    tets.push([b0, b1, b2, t2]);
                    tets.push([b0, b1, t1, t2]);
                    tets.push([b0, t0, t1, t2]);
                }
            }
        }
    }
    for t in &mut tets {
        t.sort_unstable();
    }
    tets.sort_unstable();
    tets.dedup();
    Mesh {
        vertices: verts,
        tets,
        periods: [nx, ny, 0],
    }
}

fn color_of_slab_index(i: i64) -> Color {
    // boundary (missing) slot 3 maps to A so slabs expose an A boundary
    match i.rem_euclid(4) {
        0 => Color::B,
        1 => Color::C,
        2 => Color::D,
        _ => Color::A,
    }
}

/// Boundary complex of the 4-orthoplex: 8 mesh vertices ±e_i colored by
/// axis, 16 tets; dualizes to a 16-vertex closed lattice of the 3-sphere.
pub fn sphere16_mesh() -> Mesh {
    let colors = [Color::A, Color::B, Color::C, Color::D];
    let mut verts = Vec::new();
    for axis in 0..4usize {
        for s in [1i64, -1] {
            let mut pos = [0i64; 3];
            if axis < 3 {
                pos[axis] = 2 * s;
            } else {
                pos = [s, s, s];
            }
            verts.push(MeshVertex {
                color: colors[axis],
                pos,
                fictitious: false,
            });
        }
    }
    // vertex id: 2*axis + (s<0)
    let mut tets = Vec::new();
    for m in 0..16usize {
        let pick = |axis: usize| 2 * axis + ((m >> axis) & 1);
        tets.push([pick(0), pick(1), pick(2), pick(3)]);
    }
    for t in &mut tets {
        t.sort_unstable();
    }
    tets.sort_unstable();
    Mesh {
        vertices: verts,
        tets,
        periods: [0, 0, 0],
    }
}
