//! Local ground-state preparation for the chiral color code at odd d:
//! sample the measurement syndrome of |0…0⟩, then remove every excitation
//! with a four-stage local correction. Stages 1–3 clear AC, AB and BD faces
//! with single- and two-qudit Z operators; stage 4 removes the remaining
//! CD loops block-locally with half-power hand-offs at block interfaces.

use rand::Rng;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use crate::codes::{GeneratorSource, StabilizerCode};
use crate::error::ChiralError;
use crate::lattice::{Color, ColorLattice, VolumeRef};
use crate::linalg::{kernel_mod, ColSolver, ModMat};
use crate::pauli::PauliOperator;
use crate::topo::{syndrome_of, SyndromeConfig};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PrepConfig {
    pub block_size: usize,
}

impl Default for PrepConfig {
    fn default() -> Self {
        PrepConfig { block_size: 2 }
    }
}

#[derive(Clone, Debug)]
pub struct PrepTranscript {
    pub seed: u64,
    pub sampled: SyndromeConfig,
    /// correction applied by each stage (1: AC, 2: AB, 3: BD, 4: CD loops)
    pub stage_corrections: [PauliOperator; 4],
    pub final_syndrome: SyndromeConfig,
    /// canonical-form phase exponent of the total correction (raw θ data)
    pub correction_phase: u32,
}

impl PrepTranscript {
    pub fn total_correction(&self) -> PauliOperator {
        let mut acc = self.stage_corrections[0].clone();
        for s in &self.stage_corrections[1..] {
            acc = acc.multiply(s).unwrap();
        }
        acc
    }
}

/// Prepared sampling and solving state for one (lattice, d, α).
pub struct Preparer {
    pub code: StabilizerCode,
    pub lat: Arc<ColorLattice>,
    pub config: PrepConfig,
    /// particular solution of the measurement-consistency constraints
    s0: Vec<u8>,
    /// basis of admissible syndrome perturbations
    perturbations: Vec<Vec<u8>>,
    /// face id per generator index
    face_of_gen: Vec<usize>,
    gen_of_face: BTreeMap<usize, usize>,
}

impl Preparer {
    pub fn new(
        lat: &Arc<ColorLattice>,
        code: StabilizerCode,
        config: PrepConfig,
    ) -> Result<Self, ChiralError> {
        let d = code.d;
        if d % 2 == 0 {
            return Err(ChiralError::EvenDimension(d));
        }
        if gcd(d, code.alpha % d) != 1 {
            return Err(ChiralError::NonCoprime {
                d,
                alpha: code.alpha,
            });
        }
        if !lat.is_closed() {
            return Err(ChiralError::OpenLattice);
        }
        let m = code.generators.len();
        let mut face_of_gen = Vec::with_capacity(m);
        let mut gen_of_face = BTreeMap::new();
        for (gi, g) in code.generators.iter().enumerate() {
            match g.source {
                GeneratorSource::Face(f) => {
                    face_of_gen.push(f);
                    gen_of_face.insert(f, gi);
                }
                _ => {
                    return Err(ChiralError::Parameter(
                        "preparation expects a face-stabilizer code".into(),
                    ))
                }
            }
        }

        // combinations a with ∏ S(f)^{a_f} diagonal: kernel of the X-part map
        let mut xmap = ModMat::zeros(d, code.n, m);
        for (gi, g) in code.generators.iter().enumerate() {
            for s in 0..code.n {
                xmap.set(s, gi, g.op.x_exponent(s));
            }
        }
        let diag_combos = kernel_mod(&xmap);

        // constraint: Σ a_f s_f ≡ φ(a), the ω-exponent of the diagonal
        // product's eigenvalue on |0…0⟩
        let mut rows = Vec::with_capacity(diag_combos.len());
        let mut rhs = Vec::with_capacity(diag_combos.len());
        for a in &diag_combos {
            let mut prod = PauliOperator::identity(d, code.n);
            for (gi, &coeff) in a.iter().enumerate() {
                if coeff != 0 {
                    prod = prod.multiply(&code.generators[gi].op.power(coeff as i64))?;
                }
            }
            if prod.x_vec().iter().any(|&x| x != 0) {
                return Err(ChiralError::Internal(
                    "diagonal-combination kernel produced a non-diagonal product".into(),
                ));
            }
            let tau = prod.phase().tau_exponent();
            if tau % 2 != 0 {
                return Err(ChiralError::Internal(
                    "diagonal product with a tau-odd phase".into(),
                ));
            }
            rows.push(a.clone());
            rhs.push(((tau / 2) % d) as u8);
        }
        let a_mat = if rows.is_empty() {
            ModMat::zeros(d, 0, m)
        } else {
            ModMat::from_rows(d, &rows)
        };
        let solver = ColSolver::new(&a_mat);
        let s0 = solver.solve(&rhs).ok_or_else(|| {
            ChiralError::Internal("measurement constraints are inconsistent".into())
        })?;
        let perturbations = solver.kernel_basis();

        Ok(Preparer {
            code,
            lat: lat.clone(),
            config,
            s0,
            perturbations,
            face_of_gen,
            gen_of_face,
        })
    }

    /// Uniform sample of an admissible measured syndrome for |0…0⟩.
    pub fn sample_syndrome(&self, seed: u64) -> SyndromeConfig {
        let d = self.code.d;
        let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
        let mut s_g = self.s0.clone();
        for basis in &self.perturbations {
            let u = rng.gen_range(0..d);
            if u != 0 {
                for (slot, &b) in s_g.iter_mut().zip(basis) {
                    *slot = ((*slot as u32 + u * b as u32) % d) as u8;
                }
            }
        }
        let mut s = SyndromeConfig::zeros(&self.lat, d);
        for (gi, &f) in self.face_of_gen.iter().enumerate() {
            s.values[f] = s_g[gi];
        }
        s
    }

    /// Run the full preparation channel for one seed.
    pub fn prepare(&self, seed: u64) -> Result<PrepTranscript, ChiralError> {
        let sampled = self.sample_syndrome(seed);
        let (stages, final_syndrome) = self.correct(&sampled)?;
        let total = {
            let mut acc = stages[0].clone();
            for s in &stages[1..] {
                acc = acc.multiply(s)?;
            }
            acc
        };
        Ok(PrepTranscript {
            seed,
            sampled,
            correction_phase: total.phase().tau_exponent(),
            stage_corrections: stages,
            final_syndrome,
        })
    }

    /// The deterministic correction pipeline: syndrome in, four stage
    /// corrections out, plus the resulting final syndrome.
    pub fn correct(
        &self,
        sampled: &SyndromeConfig,
    ) -> Result<([PauliOperator; 4], SyndromeConfig), ChiralError> {
        let lat = &self.lat;
        let code = &self.code;
        let d = code.d;

        let mut current = sampled.clone();
        let stage1 = self.stage1_ac(&current);
        apply(&mut current, code, lat, &stage1);
        let stage2 = self.stage2_volume_transport(&current, Color::A, Color::B)?;
        apply(&mut current, code, lat, &stage2);
        let stage3 = self.stage3_bd(&current)?;
        apply(&mut current, code, lat, &stage3);
        let stage4 = self.stage4_cd_blocks(&current)?;
        apply(&mut current, code, lat, &stage4);
        Ok(([stage1, stage2, stage3, stage4], current))
    }

    /// Stage 1: clear every AC face with a Z power at its lowest vertex.
    /// The correction at a face depends only on that face's syndrome.
    fn stage1_ac(&self, s: &SyndromeConfig) -> PauliOperator {
        let lat = &self.lat;
        let d = self.code.d;
        let mut op = PauliOperator::identity(d, self.code.n);
        for (fi, f) in lat.faces.iter().enumerate() {
            if f.color != (Color::A, Color::C) {
                continue;
            }
            let sigma = s.values[fi] as i64;
            if sigma == 0 {
                continue;
            }
            let v = *f.vertices.iter().min().unwrap();
            // c(S(f_AC), Z_v) = +1, so Z_v^{−σ} clears the face
            op = op
                .multiply(&PauliOperator::single(d, self.code.n, v, 0, -sigma))
                .unwrap();
        }
        op
    }

    /// Stage 2: per A-volume, transport AB-face charge to zero along the
    /// tree of ACD edges. Stage 3 reuses this for BD faces on B-volumes.
    fn stage2_volume_transport(
        &self,
        s: &SyndromeConfig,
        volume_color: Color,
        face_partner: Color,
    ) -> Result<PauliOperator, ChiralError> {
        let lat = &self.lat;
        let code = &self.code;
        let d = code.d as i64;
        let target_pair = crate::lattice::face_pair(volume_color, face_partner);
        // transport edge color: the three colors other than face_partner
        let mut op = PauliOperator::identity(code.d, code.n);
        for (ci, c) in lat.volumes.iter().enumerate() {
            if c.color != volume_color {
                continue;
            }
            // nodes: faces of this volume with the target color
            let nodes: Vec<usize> = c
                .faces
                .iter()
                .copied()
                .filter(|&f| lat.faces[f].color == target_pair)
                .collect();
            if nodes.is_empty() {
                continue;
            }
            // transport edges: edges of the volume avoiding face_partner
            let mut adjacency: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
            let vol_verts: BTreeSet<usize> = c.vertices.iter().copied().collect();
            let mut seen_edges = BTreeSet::new();
            for &f in &c.faces {
                for &e in &lat.faces[f].edges {
                    if !seen_edges.insert(e) {
                        continue;
                    }
                    let ed = &lat.edges[e];
                    if ed.color.contains(&face_partner) {
                        continue;
                    }
                    let [u, w] = ed.vertices;
                    if !vol_verts.contains(&u) || !vol_verts.contains(&w) {
                        continue;
                    }
                    // the edge links the target faces at its endpoints
                    let fu = lat.face_at(u, target_pair);
                    let fw = lat.face_at(w, target_pair);
                    if let (Some(fu), Some(fw)) = (fu, fw) {
                        if fu != fw && nodes.contains(&fu) && nodes.contains(&fw) {
                            adjacency.entry(fu).or_default().push((fw, e));
                            adjacency.entry(fw).or_default().push((fu, e));
                        }
                    }
                }
            }
            // BFS tree from the lowest face id
            let root = *nodes.iter().min().unwrap();
            let mut parent: BTreeMap<usize, (usize, usize)> = BTreeMap::new(); // node -> (parent, edge)
            let mut order = vec![root];
            let mut seen: BTreeSet<usize> = BTreeSet::from([root]);
            let mut q = VecDeque::from([root]);
            while let Some(f) = q.pop_front() {
                if let Some(next) = adjacency.get(&f) {
                    for &(g, e) in next {
                        if seen.insert(g) {
                            parent.insert(g, (f, e));
                            order.push(g);
                            q.push_back(g);
                        }
                    }
                }
            }
            if seen.len() != nodes.len() {
                return Err(ChiralError::Internal(format!(
                    "volume {} transport graph disconnected",
                    ci
                )));
            }
            // push charges leaf-to-root
            let mut charge: BTreeMap<usize, i64> = nodes
                .iter()
                .map(|&f| (f, s.values[f] as i64))
                .collect();
            for &f in order.iter().rev() {
                if f == root {
                    continue;
                }
                let m = charge[&f].rem_euclid(d);
                if m != 0 {
                    let (pf, e) = parent[&f];
                    // exponent k with Δσ_f = −m; the sign of the effect at
                    // the f-side endpoint is color-dependent, so probe it
                    let probe = crate::topo::native_edge_operator(
                        lat,
                        e,
                        (Color::A, Color::D), // λ-signed pure-Z flavor, α=1
                        code.d,
                        1,
                        1,
                    );
                    let gen = &code.generators[self.gen_of_face[&f]].op;
                    let eff = gen.commutation_exponent(&probe)? as i64;
                    if eff == 0 {
                        return Err(ChiralError::Internal(
                            "transport edge does not move charge".into(),
                        ));
                    }
                    // k·eff ≡ −m  (eff = ±1 because λ signs alternate)
                    let k = (-m * inverse_of_unit(eff.rem_euclid(d), d)).rem_euclid(d);
                    let step = probe.power(k);
                    op = op.multiply(&step)?;
                    *charge.get_mut(&pf).unwrap() += m;
                    *charge.get_mut(&f).unwrap() = 0;
                }
            }
            if charge[&root].rem_euclid(d) != 0 {
                return Err(ChiralError::Internal(format!(
                    "volume {} charge did not conserve",
                    ci
                )));
            }
        }
        Ok(op)
    }

    fn stage3_bd(&self, s: &SyndromeConfig) -> Result<PauliOperator, ChiralError> {
        self.stage2_volume_transport(s, Color::B, Color::D)
    }

    /// Stage 4: remaining CD syndrome removed per block. Each block solves a
    /// local system targeting full erasure on interior CD faces and
    /// half-power erasure on crossing faces plus the canonical stub on the
    /// two companion faces of the crossing face's lowest edge; stubs cancel
    /// between the two adjacent blocks.
    fn stage4_cd_blocks(&self, s: &SyndromeConfig) -> Result<PauliOperator, ChiralError> {
        let lat = &self.lat;
        let code = &self.code;
        let d = code.d as i64;
        let inv2 = ((d + 1) / 2).rem_euclid(d); // 2⁻¹ mod d for odd d

        let blocks = self.block_of_volumes();
        let mut total = PauliOperator::identity(code.d, code.n);
        let block_ids: BTreeSet<usize> = blocks.iter().copied().collect();
        for &b in &block_ids {
            // targets for this block
            let mut target: BTreeMap<usize, i64> = BTreeMap::new();
            for (fi, f) in lat.faces.iter().enumerate() {
                if f.color != (Color::C, Color::D) || s.values[fi] == 0 {
                    continue;
                }
                let [ra, rb] = f.volumes;
                let (va, vb) = match (ra, rb) {
                    (VolumeRef::Real(x), VolumeRef::Real(y)) => (x, y),
                    _ => continue,
                };
                let (ba, bb) = (blocks[va], blocks[vb]);
                let sigma = s.values[fi] as i64;
                if ba == b && bb == b {
                    *target.entry(fi).or_insert(0) += -sigma;
                } else if ba == b || bb == b {
                    // crossing face: half erasure plus the stub
                    *target.entry(fi).or_insert(0) += -sigma * inv2;
                    // canonical edge and its companion faces
                    let e_star = *lat.faces[fi].edges.iter().min().unwrap();
                    // μ = +1 for the block owning the C-side volume
                    let c_side = if lat.volumes[va].color == Color::C { va } else { vb };
                    let mu: i64 = if blocks[c_side] == b { 1 } else { -1 };
                    for &cf in &lat.edges[e_star].faces {
                        if cf == fi {
                            continue;
                        }
                        let (x, y) = lat.faces[cf].color;
                        // the C-partner face gets −σ/2·μ, the D-partner +σ/2·μ
                        let sign = if x == Color::C || y == Color::C {
                            -1
                        } else {
                            1
                        };
                        *target.entry(cf).or_insert(0) += sign * sigma * inv2 * mu;
                    }
                }
            }
            if target.values().all(|&t| t.rem_euclid(d) == 0) {
                continue;
            }
            // variable vertices: all vertices of the block's volumes
            let mut vars: BTreeSet<usize> = BTreeSet::new();
            for (vi, vol) in lat.volumes.iter().enumerate() {
                if blocks[vi] == b {
                    vars.extend(vol.vertices.iter().copied());
                }
            }
            let piece = crate::topo::solve_local_syndrome(code, lat, &vars, &target)?;
            total = total.multiply(&piece)?;
        }
        Ok(total)
    }

    /// Block id per volume: cubic coordinate blocks of side 2·block_size.
    fn block_of_volumes(&self) -> Vec<usize> {
        let lat = &self.lat;
        let mesh = lat.mesh.as_ref().expect("closed lattices carry a mesh");
        let side = 2 * self.config.block_size as i64;
        let per_axis: Vec<i64> = (0..3)
            .map(|a| (mesh.periods[a].max(1) + side - 1) / side)
            .collect();
        lat.volumes
            .iter()
            .map(|v| {
                let mut id = 0i64;
                for a in 0..3 {
                    let p = mesh.periods[a].max(1);
                    let coord = v.pos[a].rem_euclid(p) / side;
                    id = id * per_axis[a] + coord.min(per_axis[a] - 1);
                }
                id as usize
            })
            .collect()
    }
}

fn apply(current: &mut SyndromeConfig, code: &StabilizerCode, lat: &ColorLattice, op: &PauliOperator) {
    let delta = syndrome_of(code, lat, op);
    current.add_assign(&delta);
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn inverse_of_unit(a: i64, d: i64) -> i64 {
    for u in 1..d {
        if (a * u).rem_euclid(d) == 1 {
            return u;
        }
    }
    panic!("not a unit")
}

// ---------------------------------------------------------------------------
// locality audit
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalityAudit {
    /// least radius (dual-graph hops) at which every probed site's
    /// correction is unchanged under far-syndrome randomization
    pub radius: usize,
    pub probed_sites: usize,
    pub randomizations: usize,
}

/// Replay the correction computation with syndrome values outside radius r
/// of each probed site replaced by values from other admissible samples;
/// report the least r at which every probed site's correction is unchanged.
pub fn locality_audit(
    prep: &Preparer,
    seed: u64,
    probes: usize,
    randomizations: usize,
    max_radius: usize,
) -> Result<LocalityAudit, ChiralError> {
    let lat = &prep.lat;
    let base = prep.sample_syndrome(seed);
    let (base_stages, _) = prep.correct(&base)?;
    let base_total = combine(&base_stages);

    // probe sites spread deterministically
    let step = (prep.code.n / probes.max(1)).max(1);
    let sites: Vec<usize> = (0..prep.code.n).step_by(step).take(probes).collect();

    // dual distance from a face to a vertex: BFS over volumes
    let vol_adj = volume_adjacency(lat);
    let face_dist_to_site = |site: usize| -> Vec<usize> {
        // distance of each volume from the site's volumes
        let mut dist = vec![usize::MAX; lat.volumes.len()];
        let mut q = VecDeque::new();
        for (ci, c) in lat.volumes.iter().enumerate() {
            if c.vertices.contains(&site) {
                dist[ci] = 0;
                q.push_back(ci);
            }
        }
        while let Some(c) = q.pop_front() {
            for &o in &vol_adj[c] {
                if dist[o] == usize::MAX {
                    dist[o] = dist[c] + 1;
                    q.push_back(o);
                }
            }
        }
        // face distance = min over its volumes
        lat.faces
            .iter()
            .map(|f| {
                f.volumes
                    .iter()
                    .filter_map(|r| match r {
                        VolumeRef::Real(i) => Some(dist[*i]),
                        _ => None,
                    })
                    .min()
                    .unwrap_or(usize::MAX)
            })
            .collect()
    };

    let mut needed = 0usize;
    for (pi, &site) in sites.iter().enumerate() {
        let fdist = face_dist_to_site(site);
        let mut site_radius = None;
        'radii: for r in 0..=max_radius {
            for k in 0..randomizations {
                let other = prep.sample_syndrome(seed ^ (0xABCD + k as u64 * 7919 + pi as u64));
                let mut spliced = base.clone();
                for f in 0..lat.faces.len() {
                    if fdist[f] > r {
                        spliced.values[f] = other.values[f];
                    }
                }
                let Ok((stages, _)) = prep.correct(&spliced) else {
                    continue 'radii; // spliced syndrome broke a stage: r too small
                };
                let total = combine(&stages);
                if total.x_exponent(site) != base_total.x_exponent(site)
                    || total.z_exponent(site) != base_total.z_exponent(site)
                {
                    continue 'radii;
                }
            }
            site_radius = Some(r);
            break;
        }
        let r = site_radius.ok_or_else(|| {
            ChiralError::Internal(format!("site {} depends beyond max radius", site))
        })?;
        needed = needed.max(r);
    }
    Ok(LocalityAudit {
        radius: needed,
        probed_sites: sites.len(),
        randomizations,
    })
}

fn combine(stages: &[PauliOperator; 4]) -> PauliOperator {
    let mut acc = stages[0].clone();
    for s in &stages[1..] {
        acc = acc.multiply(s).unwrap();
    }
    acc
}

fn volume_adjacency(lat: &ColorLattice) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); lat.volumes.len()];
    for f in &lat.faces {
        if let [VolumeRef::Real(a), VolumeRef::Real(b)] = f.volumes {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    adj
}
