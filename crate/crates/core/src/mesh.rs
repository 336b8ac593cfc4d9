//! Triangulated fundamental octagon and discrete Lie algebra valued 1-forms.
//!
//! All vertices live in one chart: the closed regular octagon centred at the base
//! point. Boundary vertices appear once per side they lie on; each chart vertex v
//! records the class it represents on the surface and a word h_v with
//! x_v = σ(h_v) x_r, r the representative of the class.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::cocycle::Cocycle;
use crate::dd::DdMat3;
use crate::error::{Error, Result};
use crate::fuchsian::{side_pairing_words, SurfaceGroupRep, Word};
use crate::lorentz::{ad, cross, killing, mink_dot, normalize_hyperboloid, GroupElem, LieAlg, MinkVec};

/// One boundary edge on side k paired with an edge on side k+4.
///
/// x[edge[i]] = g_k x[partner[i]].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoundaryPair {
    pub side: usize,
    pub edge: [usize; 2],
    pub partner: [usize; 2],
}

#[derive(Debug, Clone)]
pub struct FundamentalMesh {
    pub level: usize,
    pub sigma: SurfaceGroupRep,
    pub vertices: Vec<MinkVec>,
    pub triangles: Vec<[usize; 3]>,
    /// Undirected chart edges, stored with the smaller index first.
    pub edges: Vec<[usize; 2]>,
    pub edge_triangles: Vec<Vec<usize>>,
    pub boundary_pairs: Vec<BoundaryPair>,
    pub class: Vec<usize>,
    pub representatives: Vec<usize>,
    pub words: Vec<Word>,
    pub areas: Vec<f64>,
    edge_index: HashMap<(usize, usize), usize>,
}

/// cosh of the distance from the centre to a corner of the regular octagon with angles π/4.
fn corner_cosh() -> f64 {
    let c = 1.0 + 2f64.sqrt();
    c * c
}

fn corner(j: usize) -> MinkVec {
    let ch = corner_cosh();
    let sh = (ch * ch - 1.0).sqrt();
    let phi = (2 * j + 1) as f64 * PI / 8.0;
    MinkVec::new(sh * phi.cos(), sh * phi.sin(), ch)
}

fn midpoint(a: &MinkVec, b: &MinkVec) -> MinkVec {
    normalize_hyperboloid(&(a + b))
}

/// Interior angle at `a` of the geodesic triangle (a, b, c).
pub fn angle_at(a: &MinkVec, b: &MinkVec, c: &MinkVec) -> f64 {
    let u = b + a * mink_dot(b, a);
    let v = c + a * mink_dot(c, a);
    let cs = mink_dot(&u, &v) / (mink_dot(&u, &u) * mink_dot(&v, &v)).sqrt();
    cs.clamp(-1.0, 1.0).acos()
}

/// Area of a geodesic triangle from its angle defect.
pub fn triangle_area(a: &MinkVec, b: &MinkVec, c: &MinkVec) -> f64 {
    PI - angle_at(a, b, c) - angle_at(b, c, a) - angle_at(c, a, b)
}

/// Positive when (a, b, c) winds counterclockwise seen from the top of the sheet.
pub fn orientation(a: &MinkVec, b: &MinkVec, c: &MinkVec) -> f64 {
    nalgebra::Matrix3::from_columns(&[*a, *b, *c]).determinant()
}

fn side_of(m: &MinkVec) -> usize {
    let a = m.y.atan2(m.x);
    ((a / (PI / 4.0)).round() as i64).rem_euclid(8) as usize
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut j = i;
        while self.0[j] != r {
            let n = self.0[j];
            self.0[j] = r;
            j = n;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

/// Fan of eight triangles around the base point, refined `level` times by
/// geodesic midpoint subdivision.
pub fn build_octagon_mesh(sigma: &SurfaceGroupRep, level: usize) -> Result<FundamentalMesh> {
    let mut vertices: Vec<MinkVec> = vec![MinkVec::new(0.0, 0.0, 1.0)];
    vertices.extend((0..8).map(corner));
    let mut triangles: Vec<[usize; 3]> = (0..8).map(|j| [0, 1 + j, 1 + (j + 1) % 8]).collect();
    for _ in 0..level {
        let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, vs: &mut Vec<MinkVec>| {
            let key = (a.min(b), a.max(b));
            *mids.entry(key).or_insert_with(|| {
                vs.push(midpoint(&vs[a], &vs[b]));
                vs.len() - 1
            })
        };
        let mut next = Vec::with_capacity(triangles.len() * 4);
        for &[a, b, c] in &triangles {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        triangles = next;
    }
    FundamentalMesh::from_parts(sigma, level, vertices, triangles)
}

impl FundamentalMesh {
    fn from_parts(
        sigma: &SurfaceGroupRep,
        level: usize,
        vertices: Vec<MinkVec>,
        triangles: Vec<[usize; 3]>,
    ) -> Result<Self> {
        let mut edge_index = HashMap::new();
        let mut edges = Vec::new();
        let mut edge_triangles: Vec<Vec<usize>> = Vec::new();
        for (t, tri) in triangles.iter().enumerate() {
            for i in 0..3 {
                let (a, b) = (tri[i], tri[(i + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edge_triangles.push(Vec::new());
                    edges.len() - 1
                });
                edge_triangles[e].push(t);
            }
        }

        let gk = side_pairing_words().map(|w| sigma.evaluate(&w));
        let boundary: Vec<usize> = (0..edges.len()).filter(|&e| edge_triangles[e].len() == 1).collect();
        let mut by_side: Vec<Vec<usize>> = vec![Vec::new(); 8];
        for &e in &boundary {
            let [a, b] = edges[e];
            by_side[side_of(&(vertices[a] + vertices[b]))].push(e);
        }
        let mut boundary_pairs = Vec::new();
        for k in 0..4 {
            if by_side[k].len() != by_side[k + 4].len() {
                return Err(Error::Mesh(format!("side {k} has {} edges, side {} has {}", by_side[k].len(), k + 4, by_side[k + 4].len())));
            }
            for &e in &by_side[k] {
                let [a, b] = edges[e];
                let find = |x: &MinkVec| {
                    by_side[k + 4]
                        .iter()
                        .flat_map(|&f| edges[f])
                        .find(|&v| (gk[k] * vertices[v] - x).norm() <= 1e-10 * x.norm())
                };
                match (find(&vertices[a]), find(&vertices[b])) {
                    (Some(pa), Some(pb)) if edge_index.contains_key(&(pa.min(pb), pa.max(pb))) => {
                        boundary_pairs.push(BoundaryPair {
                            side: k,
                            edge: [a, b],
                            partner: [pa, pb],
                        })
                    }
                    _ => return Err(Error::Mesh(format!("no partner for edge ({a},{b}) on side {k}"))),
                }
            }
        }

        let n = vertices.len();
        let mut uf = UnionFind((0..n).collect());
        let mut links: Vec<Vec<(usize, usize, bool)>> = vec![Vec::new(); n];
        for bp in &boundary_pairs {
            for i in 0..2 {
                let (v, w) = (bp.edge[i], bp.partner[i]);
                uf.union(v, w);
                // x_v = g_k x_w
                links[w].push((v, bp.side, false));
                links[v].push((w, bp.side, true));
            }
        }
        let roots: Vec<usize> = (0..n).map(|i| uf.find(i)).collect();
        let mut representatives: Vec<usize> = Vec::new();
        let mut class = vec![usize::MAX; n];
        for i in 0..n {
            if roots[i] == i {
                class[i] = representatives.len();
                representatives.push(i);
            }
        }
        for i in 0..n {
            class[i] = class[roots[i]];
        }

        let sw = side_pairing_words();
        let mut words: Vec<Option<Word>> = vec![None; n];
        for &r in &representatives {
            words[r] = Some(Word::empty());
            let mut queue = VecDeque::from([r]);
            while let Some(v) = queue.pop_front() {
                let hv = words[v].clone().unwrap();
                for &(w, k, inv) in &links[v] {
                    if words[w].is_none() {
                        let step = if inv { sw[k].inverse() } else { sw[k].clone() };
                        words[w] = Some(step.concat(&hv));
                        queue.push_back(w);
                    }
                }
            }
        }
        let words: Vec<Word> = words.into_iter().map(|w| w.unwrap()).collect();

        let areas = triangles
            .iter()
            .map(|&[a, b, c]| triangle_area(&vertices[a], &vertices[b], &vertices[c]))
            .collect();
        let mesh = Self {
            level,
            sigma: sigma.clone(),
            vertices,
            triangles,
            edges,
            edge_triangles,
            boundary_pairs,
            class,
            representatives,
            words,
            areas,
            edge_index,
        };
        mesh.check()?;
        Ok(mesh)
    }

    fn check(&self) -> Result<()> {
        for (v, w) in self.words.iter().enumerate() {
            let r = self.representatives[self.class[v]];
            let x = self.sigma.evaluate(w) * self.vertices[r];
            if (x - self.vertices[v]).norm() > 1e-10 * x.norm() {
                return Err(Error::Mesh(format!("vertex {v} is not the image of its representative")));
            }
        }
        for (t, &[a, b, c]) in self.triangles.iter().enumerate() {
            let (x, y, z) = (&self.vertices[a], &self.vertices[b], &self.vertices[c]);
            if orientation(x, y, z) <= 0.0 || self.areas[t] <= 0.0 {
                return Err(Error::DegenerateTriangle(t));
            }
        }
        Ok(())
    }

    pub fn n_classes(&self) -> usize {
        self.representatives.len()
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|&[a, b, c]| {
                let (x, y, z) = (&self.vertices[a], &self.vertices[b], &self.vertices[c]);
                [angle_at(x, y, z), angle_at(y, z, x), angle_at(z, x, y)]
            })
            .fold(f64::INFINITY, f64::min)
            .to_degrees()
    }

    /// Largest edge length.
    pub fn max_edge(&self) -> f64 {
        self.edges
            .iter()
            .map(|&[a, b]| crate::lorentz::distance(&self.vertices[a], &self.vertices[b]))
            .fold(0.0, f64::max)
    }

    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&(a.min(b), a.max(b))).copied()
    }

    /// ρ(h_v) for every chart vertex.
    pub fn transports(&self, rho: &SurfaceGroupRep) -> Vec<GroupElem> {
        self.words.iter().map(|w| rho.evaluate(w)).collect()
    }

    /// Chart vertices adjacent to the base point along edges, as predecessor links of a BFS tree.
    fn bfs_tree(&self, base: usize) -> Vec<Option<(usize, usize)>> {
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.vertices.len()];
        for (e, &[a, b]) in self.edges.iter().enumerate() {
            adj[a].push((b, e));
            adj[b].push((a, e));
        }
        let mut pred = vec![None; self.vertices.len()];
        let mut seen = vec![false; self.vertices.len()];
        seen[base] = true;
        let mut q = VecDeque::from([base]);
        while let Some(v) = q.pop_front() {
            for &(w, e) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    pred[w] = Some((v, e));
                    q.push_back(w);
                }
            }
        }
        pred
    }

    pub fn to_export(&self) -> MeshExport {
        MeshExport {
            level: self.level,
            vertices: self.vertices.iter().map(|v| [v.x, v.y, v.z]).collect(),
            triangles: self.triangles.clone(),
            areas: self.areas.clone(),
            class: self.class.clone(),
            words: self.words.iter().map(|w| w.to_string()).collect(),
            pairings: self.boundary_pairs.clone(),
            side_words: side_pairing_words().map(|w| w.to_string()).to_vec(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MeshExport {
    pub level: usize,
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
    pub areas: Vec<f64>,
    pub class: Vec<usize>,
    pub words: Vec<String>,
    pub pairings: Vec<BoundaryPair>,
    pub side_words: Vec<String>,
}

/// A Lie algebra valued 1-form: one value per chart edge, for the direction
/// from the smaller to the larger vertex index. Values on paired boundary edges
/// are related by Ad of the twisting representation.
#[derive(Debug, Clone)]
pub struct DiscreteOneForm {
    pub values: Vec<LieAlg>,
    pub rep: SurfaceGroupRep,
}

impl DiscreteOneForm {
    pub fn zero(mesh: &FundamentalMesh, rep: &SurfaceGroupRep) -> Self {
        Self {
            values: vec![LieAlg::zeros(); mesh.edges.len()],
            rep: rep.clone(),
        }
    }

    /// Builds a form from a function of directed chart edges.
    pub fn from_fn(mesh: &FundamentalMesh, rep: &SurfaceGroupRep, mut f: impl FnMut(usize, usize) -> LieAlg) -> Self {
        Self {
            values: mesh.edges.iter().map(|&[a, b]| f(a, b)).collect(),
            rep: rep.clone(),
        }
    }

    /// Value on the directed edge a → b.
    pub fn value(&self, mesh: &FundamentalMesh, a: usize, b: usize) -> LieAlg {
        let e = mesh.edge_id(a, b).expect("not a mesh edge");
        if a < b {
            self.values[e]
        } else {
            -self.values[e]
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * c).collect(),
            rep: self.rep.clone(),
        }
    }

    /// Largest mismatch ‖φ(e) − Ad(ρ(g_k)) φ(e′)‖ over paired boundary edges, relative to the values.
    pub fn pairing_defect(&self, mesh: &FundamentalMesh) -> f64 {
        let gk = side_pairing_words().map(|w| self.rep.evaluate(&w));
        mesh.boundary_pairs
            .iter()
            .map(|bp| {
                let v = self.value(mesh, bp.edge[0], bp.edge[1]);
                let w = ad(&gk[bp.side], &self.value(mesh, bp.partner[0], bp.partner[1]));
                (v - w).norm() / (1.0 + v.norm())
            })
            .fold(0.0, f64::max)
    }
}

/// dx × x on each edge, with x the geodesic midpoint.
pub fn maurer_cartan(mesh: &FundamentalMesh) -> DiscreteOneForm {
    DiscreteOneForm::from_fn(mesh, &mesh.sigma, |a, b| {
        let (x, y) = (mesh.vertices[a], mesh.vertices[b]);
        if x == y {
            return LieAlg::zeros();
        }
        cross(&(y - x), &midpoint(&x, &y))
    })
}

/// Generator values of the cocycle obtained by integrating the form along
/// paths from `base` to its translates.
pub fn loop_cocycle(form: &DiscreteOneForm, mesh: &FundamentalMesh, base: usize) -> Result<Cocycle> {
    if base >= mesh.vertices.len() {
        return Err(Error::Mesh(format!("base vertex {base} out of range")));
    }
    let pred = mesh.bfs_tree(base);
    let integral = |v: usize| -> Result<LieAlg> {
        let mut acc = LieAlg::zeros();
        let mut cur = v;
        while cur != base {
            let (p, _) = pred[cur].ok_or_else(|| Error::Mesh(format!("vertex {v} unreachable from {base}")))?;
            acc += form.value(mesh, p, cur);
            cur = p;
        }
        Ok(acc)
    };
    let rho = &form.rep;
    let gk: [DdMat3; 4] = side_pairing_words().map(|w| rho.evaluate_dd(&w));
    let gk_inv: [DdMat3; 4] = side_pairing_words().map(|w| rho.evaluate_dd(&w.inverse()));
    let adk = |k: usize, a: &LieAlg, inv: bool| -> LieAlg {
        let (g, gi) = if inv { (gk_inv[k], gk[k]) } else { (gk[k], gk_inv[k]) };
        (g * DdMat3::from_f64(a) * gi).to_f64()
    };
    let mut alpha_g = [LieAlg::zeros(); 4];
    for k in 0..4 {
        let bp = mesh
            .boundary_pairs
            .iter()
            .find(|bp| bp.side == k)
            .ok_or_else(|| Error::Mesh(format!("side {k} has no boundary edges")))?;
        // path base → q on side k, then the translate of p → base with q = g_k p
        let (q, p) = (bp.edge[0], bp.partner[0]);
        alpha_g[k] = integral(q)? - adk(k, &integral(p)?, false);
    }
    // α on words in the side pairings: α(g⁻¹) = −Ad(g⁻¹)α(g), α(xy) = α(x) + Ad(x)α(y)
    let inv = |k: usize| -adk(k, &alpha_g[k], true);
    let a1 = alpha_g[1];
    let b1 = inv(0);
    let a2 = inv(0) + adk(0, &(alpha_g[1] + (gk[1] * DdMat3::from_f64(&inv(2)) * gk_inv[1]).to_f64()), true);
    let b2 = alpha_g[2] + adk(2, &inv(3), false);
    Ok(Cocycle::new_unchecked(rho.clone(), [a1, b1, a2, b2]))
}

/// α(word) for the cocycle integrated from the form with base vertex `base`.
pub fn loop_integral(form: &DiscreteOneForm, mesh: &FundamentalMesh, word: &Word, base: usize) -> Result<LieAlg> {
    Ok(loop_cocycle(form, mesh, base)?.evaluate(word))
}

/// Per-triangle circulation ‖φ(ab) + φ(bc) + φ(ca)‖ divided by Σ‖φ(e)‖ over the three edges.
pub fn closedness_profile(form: &DiscreteOneForm, mesh: &FundamentalMesh) -> Vec<f64> {
    mesh.triangles
        .iter()
        .map(|&[a, b, c]| {
            let (x, y, z) = (form.value(mesh, a, b), form.value(mesh, b, c), form.value(mesh, c, a));
            let mass = x.norm() + y.norm() + z.norm();
            if mass == 0.0 {
                0.0
            } else {
                (x + y + z).norm() / mass
            }
        })
        .collect()
}

/// Largest normalized circulation around a triangle.
pub fn closedness_residual(form: &DiscreteOneForm, mesh: &FundamentalMesh) -> f64 {
    closedness_profile(form, mesh).into_iter().fold(0.0, f64::max)
}

/// Area-weighted mean of the normalized circulation.
pub fn closedness_mean(form: &DiscreteOneForm, mesh: &FundamentalMesh) -> f64 {
    let p = closedness_profile(form, mesh);
    p.iter().zip(&mesh.areas).map(|(r, a)| r * a).sum::<f64>() / mesh.total_area()
}

fn wedge_half(phi: &DiscreteOneForm, psi: &DiscreteOneForm, mesh: &FundamentalMesh, t: usize) -> f64 {
    let [a, b, c] = mesh.triangles[t];
    let v = [a, b, c];
    let mut s = 0.0;
    for i in 0..3 {
        let (p, q, r) = (v[i], v[(i + 1) % 3], v[(i + 2) % 3]);
        s += killing(&phi.value(mesh, p, q), &psi.value(mesh, p, r));
    }
    s / 6.0
}

/// Discrete ∫_T φ ∧ ψ with Killing contraction, per triangle.
pub fn wedge_density(phi: &DiscreteOneForm, psi: &DiscreteOneForm, mesh: &FundamentalMesh) -> Vec<f64> {
    (0..mesh.triangles.len())
        .map(|t| wedge_half(phi, psi, mesh, t) - wedge_half(psi, phi, mesh, t))
        .collect()
}

/// ½ ∫ φ ∧ ψ.
pub fn wedge_pair(phi: &DiscreteOneForm, psi: &DiscreteOneForm, mesh: &FundamentalMesh) -> Result<f64> {
    if phi.values.len() != mesh.edges.len() || psi.values.len() != mesh.edges.len() {
        return Err(Error::Mesh("form does not belong to this mesh".into()));
    }
    Ok(0.5 * wedge_density(phi, psi, mesh).iter().sum::<f64>())
}

/// Per-triangle CSV with columns id, area, value.
pub fn write_density_csv(path: &Path, areas: &[f64], values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["id", "area", "value"])?;
    for (i, (a, v)) in areas.iter().zip(values).enumerate() {
        w.serialize((i, a, v))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_mesh_json(path: &Path, mesh: &FundamentalMesh) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, &mesh.to_export())?;
    f.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::coboundary;
    use crate::fuchsian::octagon_representation;
    use crate::lorentz::{b_perp_std, b_std, exp_so21, iota, n_hat_std};

    fn mesh(level: usize) -> FundamentalMesh {
        build_octagon_mesh(&octagon_representation(), level).unwrap()
    }

    #[test]
    fn counts_and_topology() {
        for level in 0..4 {
            let m = mesh(level);
            assert_eq!(m.triangles.len(), 8 * 4usize.pow(level as u32));
            // genus 2: V − E + F = −2 after identification
            let f = m.triangles.len() as i64;
            let e = (m.edges.len() - m.boundary_pairs.len()) as i64;
            assert_eq!(m.n_classes() as i64 - e + f, -2, "level {level}");
        }
        assert_eq!(mesh(3).n_classes(), 254);
    }

    #[test]
    fn area_is_four_pi() {
        // geodesic midpoint subdivision tiles each geodesic triangle exactly
        for level in 0..5 {
            assert!((mesh(level).total_area() - 4.0 * PI).abs() <= 1e-10);
        }
    }

    #[test]
    fn pairings_and_quality() {
        let m = mesh(3);
        let gk = side_pairing_words().map(|w| m.sigma.evaluate(&w));
        for bp in &m.boundary_pairs {
            for i in 0..2 {
                let d = gk[bp.side] * m.vertices[bp.partner[i]] - m.vertices[bp.edge[i]];
                assert!(d.norm() <= 1e-10);
            }
        }
        assert!(m.min_angle_deg() >= 15.0, "{}", m.min_angle_deg());
        assert_eq!(m.class.iter().filter(|&&c| c == m.class[1]).count(), 8);
    }

    #[test]
    fn maurer_cartan_examples() {
        let m = mesh(2);
        let mc = maurer_cartan(&m);
        assert!(mc.pairing_defect(&m) <= 1e-12);
        // a short geodesic segment through the base point in direction (0,1,0)
        let h: f64 = 1e-3;
        let x = MinkVec::new(0.0, (-h / 2.0).sinh(), (h / 2.0).cosh());
        let y = MinkVec::new(0.0, (h / 2.0).sinh(), (h / 2.0).cosh());
        let v = cross(&(y - x), &midpoint(&x, &y));
        let gen = crate::lorentz::geodesic_generator(&MinkVec::new(0.0, 0.0, 1.0), &MinkVec::new(0.0, 1.0, 0.0));
        assert!((v - gen * h).norm() <= 1e-9);
        // equivariance
        let g = exp_so21(&(b_std() * 0.3 + n_hat_std() * 0.2));
        let w = cross(&(g * y - g * x), &midpoint(&(g * x), &(g * y)));
        assert!((w - ad(&g, &v)).norm() <= 1e-14);
    }

    /// φ(a→b) = Φ(x_b) − Φ(x_a) with Φ(x) = c ι(x) + A0, twisted by σ.
    fn exact_form(m: &FundamentalMesh, c: f64, a0: &LieAlg) -> DiscreteOneForm {
        DiscreteOneForm::from_fn(m, &m.sigma, |a, b| {
            (iota(&m.vertices[b]) * c + a0) - (iota(&m.vertices[a]) * c + a0)
        })
    }

    #[test]
    fn exact_forms_give_coboundaries() {
        let m = mesh(2);
        let a0 = b_std() * 0.2 + b_perp_std() * -0.4;
        let phi = exact_form(&m, 0.7, &a0);
        assert!(phi.pairing_defect(&m) <= 1e-12);
        assert!(closedness_residual(&phi, &m) <= 1e-12);
        let base = 0;
        let alpha = loop_cocycle(&phi, &m, base).unwrap();
        // Φ(γx) − Ad(σγ)Φ(x) = A0 − Ad(σγ)A0; the base point shifts this by the coboundary of Φ(x0)
        let phi0 = iota(&m.vertices[base]) * 0.7 + a0;
        let want = coboundary(&(a0 - phi0), &m.sigma);
        for k in 0..4 {
            let w = want.values[k];
            assert!((alpha.values[k] - w).norm() <= 1e-9 * (1.0 + w.norm()), "{k}");
        }
        assert!(alpha.relator_tangency() <= 1e-9);
        let zero = DiscreteOneForm::zero(&m, &m.sigma);
        assert_eq!(loop_integral(&zero, &m, &Word::relator(), 0).unwrap(), LieAlg::zeros());
        assert_eq!(closedness_residual(&zero, &m), 0.0);
    }

    #[test]
    fn random_form_is_not_closed() {
        use rand::{Rng, SeedableRng};
        let m = mesh(1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let phi = DiscreteOneForm::from_fn(&m, &m.sigma, |_, _| {
            b_std() * rng.gen_range(-1.0..1.0) + b_perp_std() * rng.gen_range(-1.0..1.0)
        });
        assert!(closedness_residual(&phi, &m) > 0.1);
    }

    #[test]
    fn wedge_is_antisymmetric_and_bilinear() {
        let m = mesh(1);
        let mc = maurer_cartan(&m);
        let phi = exact_form(&m, 1.0, &LieAlg::zeros());
        let a = wedge_pair(&mc, &phi, &m).unwrap();
        let b = wedge_pair(&phi, &mc, &m).unwrap();
        assert_eq!(a, -b);
        assert_eq!(wedge_pair(&mc, &mc, &m).unwrap(), 0.0);
        let a2 = wedge_pair(&mc.scaled(2.0), &phi, &m).unwrap();
        assert!((a2 - 2.0 * a).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn wedge_of_linear_forms_on_a_triangle() {
        // constant forms on a small triangle: ∫ α∧β = ½ (α(e1)β(e2) − α(e2)β(e1))
        let m = mesh(3);
        let t = 100;
        let [a, b, c] = m.triangles[t];
        let (x0, x1, x2) = (m.vertices[a], m.vertices[b], m.vertices[c]);
        let (p, q) = (b_std(), n_hat_std());
        // α(v) = (v·e_x) p, β(v) = (v·e_y) q on chords
        let fa = |u: usize, w: usize| p * (m.vertices[w].x - m.vertices[u].x);
        let fb = |u: usize, w: usize| q * (m.vertices[w].y - m.vertices[u].y);
        let alpha = DiscreteOneForm::from_fn(&m, &m.sigma, fa);
        let beta = DiscreteOneForm::from_fn(&m, &m.sigma, fb);
        let got = wedge_density(&alpha, &beta, &m)[t];
        let (e1, e2) = (x1 - x0, x2 - x0);
        let want = 0.5 * killing(&p, &q) * (e1.x * e2.y - e2.x * e1.y);
        assert!((got - want).abs() <= 1e-14);
    }

    #[test]
    fn csv_and_json_exports() {
        let m = mesh(1);
        let dir = tempfile::tempdir().unwrap();
        write_density_csv(&dir.path().join("d.csv"), &m.areas, &vec![1.0; m.areas.len()]).unwrap();
        let s = std::fs::read_to_string(dir.path().join("d.csv")).unwrap();
        assert_eq!(s.lines().count(), 1 + m.triangles.len());
        assert!(s.starts_with("id,area,value"));
        write_mesh_json(&dir.path().join("m.json"), &m).unwrap();
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("m.json")).unwrap()).unwrap();
        assert_eq!(v["triangles"].as_array().unwrap().len(), 32);
    }
}
