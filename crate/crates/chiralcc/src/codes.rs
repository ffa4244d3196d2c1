//! Code families over color lattices: builders, containment checks,
//! redundancy relations, logical structure, brute-force distance.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::ChiralError;
use crate::lattice::{Color, ColorLattice, FacePair, Honeycomb};
use crate::linalg::{self, quotient_structure, AbelianGroupStructure, ColSolver, ModMat, RowSpace};
use crate::pauli::{PauliOperator, PhaseExponent};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CodeFamily {
    Xyz,
    Chiral,
    Gauge3d,
    ColorCode3d,
    ColorCode2d,
    Boundary(Color),
    Condensed,
    Tensor(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratorSource {
    Face(usize),
    Edge(usize),
    Volume(usize),
    Plaquette(usize),
    Measured(usize),
    Derived,
}

#[derive(Clone, Debug)]
pub struct Generator {
    pub source: GeneratorSource,
    pub op: PauliOperator,
}

/// A stabilizer (or gauge) code: generators over `n` qudit sites. Sites are
/// lattice vertices unless `sites` re-indexes them (boundary codes) or
/// `copies > 1` stacks registers (tensor codes).
#[derive(Clone, Debug)]
pub struct StabilizerCode {
    pub lattice: Option<Arc<ColorLattice>>,
    pub d: u32,
    pub alpha: u32,
    pub family: CodeFamily,
    pub n: usize,
    pub generators: Vec<Generator>,
    /// code site -> lattice vertex (one copy)
    pub sites: Vec<usize>,
    pub copies: usize,
    /// set when gcd(d, α) ≠ 1 and the variant without α on AD/BC was built
    pub coprime_warning: bool,
}

impl StabilizerCode {
    pub fn site_of_vertex(&self, v: usize) -> Option<usize> {
        self.sites.iter().position(|&s| s == v)
    }

    /// symplectic generator matrix, rows = (x | z) over ℤ_d
    pub fn generator_matrix(&self) -> ModMat {
        let rows: Vec<Vec<u8>> = self
            .generators
            .iter()
            .map(|g| g.op.symplectic_vec())
            .collect();
        if rows.is_empty() {
            ModMat::zeros(self.d, 0, 2 * self.n)
        } else {
            ModMat::from_rows(self.d, &rows)
        }
    }

    /// syndrome map: row g = (z_g | −x_g), so M·(x_P|z_P) gives the
    /// commutation exponent of each generator with P
    pub fn syndrome_matrix(&self) -> ModMat {
        let d = self.d as i64;
        let mut m = ModMat::zeros(self.d, self.generators.len(), 2 * self.n);
        for (i, g) in self.generators.iter().enumerate() {
            for s in 0..self.n {
                m.set(i, s, g.op.z_exponent(s));
                m.set(
                    i,
                    self.n + s,
                    (-(g.op.x_exponent(s) as i64)).rem_euclid(d) as u8,
                );
            }
        }
        m
    }

    pub fn pairwise_commuting(&self) -> Result<(), (usize, usize)> {
        for i in 0..self.generators.len() {
            for j in (i + 1)..self.generators.len() {
                if self.generators[i]
                    .op
                    .commutation_exponent(&self.generators[j].op)
                    .unwrap()
                    != 0
                {
                    return Err((i, j));
                }
            }
        }
        Ok(())
    }
}

/// Native single-site (x, z) exponents of a face stabilizer factor.
pub fn native_site_pauli(pair: FacePair, lambda: i8, d: u32, alpha: u32) -> (i64, i64) {
    let _ = d;
    let a = alpha as i64 * lambda as i64;
    match pair {
        (Color::A, Color::B) | (Color::C, Color::D) => (1, 0),
        (Color::A, Color::C) | (Color::B, Color::D) => (-1, -a),
        (Color::A, Color::D) | (Color::B, Color::C) => (0, a),
        _ => unreachable!("face colors are one of the six sorted pairs"),
    }
}

pub(crate) fn face_operator(
    lat: &ColorLattice,
    face: usize,
    d: u32,
    alpha: u32,
    xyz_phases: bool,
    drop_alpha_on_z: bool,
) -> PauliOperator {
    let n = lat.n_vertices();
    let f = &lat.faces[face];
    let mut op = PauliOperator::identity(d, n);
    for &v in &f.vertices {
        let eff_alpha = if drop_alpha_on_z
            && matches!(f.color, (Color::A, Color::D) | (Color::B, Color::C))
        {
            1
        } else {
            alpha
        };
        let (x, z) = native_site_pauli(f.color, lat.lambda(v), d, eff_alpha);
        let mut site = PauliOperator::single(d, n, v, x, z);
        if xyz_phases && matches!(f.color, (Color::A, Color::C) | (Color::B, Color::D)) {
            // per-site τ·XZ, the qubit Y
            site =
                PauliOperator::from_exponents(d, site.x_vec().to_vec(), site.z_vec().to_vec(), 1);
        }
        op = op.multiply(&site).unwrap();
    }
    op
}

/// XYZ color code: X on AB/CD faces, per-site τ·XZ (= Y) on AC/BD,
/// Z on AD/BC.
pub fn build_xyz(lat: &Arc<ColorLattice>) -> Result<StabilizerCode, ChiralError> {
    let d = 2;
    let generators = (0..lat.faces.len())
        .map(|f| Generator {
            source: GeneratorSource::Face(f),
            op: face_operator(lat, f, d, 1, true, false),
        })
        .collect();
    let code = StabilizerCode {
        lattice: Some(lat.clone()),
        d,
        alpha: 1,
        family: CodeFamily::Xyz,
        n: lat.n_vertices(),
        generators,
        sites: (0..lat.n_vertices()).collect(),
        copies: 1,
        coprime_warning: false,
    };
    code.pairwise_commuting()
        .map_err(|(i, j)| ChiralError::Internal(format!("generators {i},{j} anti-commute")))?;
    Ok(code)
}

/// ℤ_d^(α) chiral color code. When gcd(d, α) ≠ 1 the code is built with the
/// α exponent dropped on AD/BC faces and flagged.
pub fn build_chiral(
    lat: &Arc<ColorLattice>,
    d: u32,
    alpha: u32,
) -> Result<StabilizerCode, ChiralError> {
    if d < 2 {
        return Err(ChiralError::Parameter("qudit dimension must be ≥ 2".into()));
    }
    let alpha = alpha % d;
    let coprime = gcd_u32(d, alpha) == 1;
    let generators = (0..lat.faces.len())
        .map(|f| Generator {
            source: GeneratorSource::Face(f),
            op: face_operator(lat, f, d, alpha, false, !coprime),
        })
        .collect();
    let code = StabilizerCode {
        lattice: Some(lat.clone()),
        d,
        alpha,
        family: CodeFamily::Chiral,
        n: lat.n_vertices(),
        generators,
        sites: (0..lat.n_vertices()).collect(),
        copies: 1,
        coprime_warning: !coprime,
    };
    code.pairwise_commuting()
        .map_err(|(i, j)| ChiralError::Internal(format!("generators {i},{j} anti-commute")))?;
    Ok(code)
}

fn gcd_u32(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd_u32(b, a % b)
    }
}

/// 3D gauge color code: X(f) and λ-signed Z(f) for every face.
pub fn build_gauge(lat: &Arc<ColorLattice>, d: u32) -> StabilizerCode {
    let n = lat.n_vertices();
    let mut generators = Vec::new();
    for (fi, f) in lat.faces.iter().enumerate() {
        let mut x_op = PauliOperator::identity(d, n);
        let mut z_op = PauliOperator::identity(d, n);
        for &v in &f.vertices {
            x_op = x_op.multiply(&PauliOperator::single(d, n, v, 1, 0)).unwrap();
            z_op = z_op
                .multiply(&PauliOperator::single(d, n, v, 0, lat.lambda(v) as i64))
                .unwrap();
        }
        generators.push(Generator {
            source: GeneratorSource::Face(fi),
            op: x_op,
        });
        generators.push(Generator {
            source: GeneratorSource::Face(fi),
            op: z_op,
        });
    }
    StabilizerCode {
        lattice: Some(lat.clone()),
        d,
        alpha: 1,
        family: CodeFamily::Gauge3d,
        n,
        generators,
        sites: (0..n).collect(),
        copies: 1,
        coprime_warning: false,
    }
}

/// 3D color code: X on volumes, λ-signed Z on faces.
pub fn build_3dcc(lat: &Arc<ColorLattice>, d: u32) -> Result<StabilizerCode, ChiralError> {
    let n = lat.n_vertices();
    let mut generators = Vec::new();
    for (ci, c) in lat.volumes.iter().enumerate() {
        let mut op = PauliOperator::identity(d, n);
        for &v in &c.vertices {
            op = op.multiply(&PauliOperator::single(d, n, v, 1, 0)).unwrap();
        }
        generators.push(Generator {
            source: GeneratorSource::Volume(ci),
            op,
        });
    }
    for (fi, f) in lat.faces.iter().enumerate() {
        let mut op = PauliOperator::identity(d, n);
        for &v in &f.vertices {
            op = op
                .multiply(&PauliOperator::single(d, n, v, 0, lat.lambda(v) as i64))
                .unwrap();
        }
        generators.push(Generator {
            source: GeneratorSource::Face(fi),
            op,
        });
    }
    let code = StabilizerCode {
        lattice: Some(lat.clone()),
        d,
        alpha: 1,
        family: CodeFamily::ColorCode3d,
        n,
        generators,
        sites: (0..n).collect(),
        copies: 1,
        coprime_warning: false,
    };
    code.pairwise_commuting()
        .map_err(|(i, j)| ChiralError::Internal(format!("generators {i},{j} anti-commute")))?;
    Ok(code)
}

/// 2D color code on a honeycomb torus: X(f) and λ-signed Z(f) per plaquette.
pub fn build_2dcc(h: &Honeycomb, d: u32) -> Result<StabilizerCode, ChiralError> {
    let n = h.n_vertices;
    let mut generators = Vec::new();
    for (pi, (_, cyc)) in h.faces.iter().enumerate() {
        let mut x_op = PauliOperator::identity(d, n);
        let mut z_op = PauliOperator::identity(d, n);
        for &v in cyc {
            x_op = x_op.multiply(&PauliOperator::single(d, n, v, 1, 0)).unwrap();
            z_op = z_op
                .multiply(&PauliOperator::single(d, n, v, 0, h.lambda[v] as i64))
                .unwrap();
        }
        generators.push(Generator {
            source: GeneratorSource::Plaquette(pi),
            op: x_op,
        });
        generators.push(Generator {
            source: GeneratorSource::Plaquette(pi),
            op: z_op,
        });
    }
    let code = StabilizerCode {
        lattice: None,
        d,
        alpha: 1,
        family: CodeFamily::ColorCode2d,
        n,
        generators,
        sites: (0..n).collect(),
        copies: 1,
        coprime_warning: false,
    };
    code.pairwise_commuting()
        .map_err(|(i, j)| ChiralError::Internal(format!("generators {i},{j} anti-commute")))?;
    Ok(code)
}

/// Boundary code on one colored boundary: its face stabilizers re-indexed
/// onto the boundary vertices.
pub fn build_boundary(
    lat: &Arc<ColorLattice>,
    color: Color,
    family: CodeFamily,
    d: u32,
    alpha: u32,
) -> Result<StabilizerCode, ChiralError> {
    let idx = *lat
        .boundaries_of_color(color)
        .first()
        .ok_or(ChiralError::MissingBoundary(color))?;
    build_boundary_at(lat, idx, family, d, alpha)
}

pub fn build_boundary_at(
    lat: &Arc<ColorLattice>,
    boundary_index: usize,
    family: CodeFamily,
    d: u32,
    alpha: u32,
) -> Result<StabilizerCode, ChiralError> {
    if boundary_index >= lat.boundaries.len() {
        return Err(ChiralError::Parameter("no such boundary".into()));
    }
    let color = lat.boundaries[boundary_index].color;
    let sites = lat.boundary_vertices_of(boundary_index);
    let xyz = matches!(family, CodeFamily::Xyz);
    let mut generators = Vec::new();
    for &fi in &lat.boundaries[boundary_index].faces {
        let full = face_operator(lat, fi, d, alpha, xyz, false);
        let mut x = Vec::with_capacity(sites.len());
        let mut z = Vec::with_capacity(sites.len());
        for &v in &sites {
            x.push(full.x_exponent(v));
            z.push(full.z_exponent(v));
        }
        let op = PauliOperator::from_exponents(d, x, z, full.phase().tau_exponent() as i64);
        generators.push(Generator {
            source: GeneratorSource::Face(fi),
            op,
        });
    }
    let code = StabilizerCode {
        lattice: Some(lat.clone()),
        d,
        alpha,
        family: CodeFamily::Boundary(color),
        n: sites.len(),
        generators,
        sites,
        copies: 1,
        coprime_warning: false,
    };
    code.pairwise_commuting()
        .map_err(|(i, j)| ChiralError::Internal(format!("generators {i},{j} anti-commute")))?;
    Ok(code)
}

/// Stack k copies of a code on a shared lattice into one register.
pub fn tensor_code(base: &StabilizerCode, copies: usize) -> StabilizerCode {
    let n = base.n * copies;
    let mut generators = Vec::new();
    for copy in 0..copies {
        let map: Vec<usize> = (0..base.n).map(|s| copy * base.n + s).collect();
        for g in &base.generators {
            generators.push(Generator {
                source: g.source,
                op: g.op.embed(n, &map),
            });
        }
    }
    StabilizerCode {
        lattice: base.lattice.clone(),
        d: base.d,
        alpha: base.alpha,
        family: CodeFamily::Tensor(copies),
        n,
        generators,
        sites: base.sites.clone(),
        copies,
        coprime_warning: base.coprime_warning,
    }
}

/// Is every generator of `sub` (mod global phase) inside the group generated
/// by `group`? Returns the first failing generator index as witness.
pub fn is_subgroup(sub: &StabilizerCode, group: &StabilizerCode) -> (bool, Option<usize>) {
    assert_eq!(sub.d, group.d);
    assert_eq!(sub.n, group.n);
    let span = RowSpace::new(&group.generator_matrix());
    for (i, g) in sub.generators.iter().enumerate() {
        if !span.contains(&g.op.symplectic_vec()) {
            return (false, Some(i));
        }
    }
    (true, None)
}

/// Membership of a single operator (mod phase) in a code's generated group.
pub fn in_group(op: &PauliOperator, code: &StabilizerCode) -> bool {
    RowSpace::new(&code.generator_matrix()).contains(&op.symplectic_vec())
}

#[derive(Clone, Debug)]
pub struct RedundancyReport {
    /// minimal generating set of the relation module
    pub basis: Vec<Vec<u8>>,
    /// phase of the actual operator product for each basis relation
    pub phases: Vec<PhaseExponent>,
    /// basis relations whose product is −I rather than +I
    pub minus_identity: Vec<usize>,
}

impl RedundancyReport {
    pub fn count(&self) -> usize {
        self.basis.len()
    }
}

/// Kernel of the generator-exponent map (coefficient vectors r with
/// Σ r_g·g ≡ 0 symplectically), with each basis relation's product phase
/// evaluated exactly.
pub fn redundancy_relations(code: &StabilizerCode) -> Result<RedundancyReport, ChiralError> {
    let gmat = code.generator_matrix();
    let mut gt = ModMat::zeros(code.d, gmat.cols, gmat.rows);
    for r in 0..gmat.rows {
        for c in 0..gmat.cols {
            gt.set(c, r, gmat.get(r, c));
        }
    }
    let basis = linalg::kernel_mod(&gt);
    let mut phases = Vec::new();
    let mut minus = Vec::new();
    for (bi, rel) in basis.iter().enumerate() {
        let mut prod = PauliOperator::identity(code.d, code.n);
        for (gi, &coeff) in rel.iter().enumerate() {
            if coeff != 0 {
                prod = prod
                    .multiply(&code.generators[gi].op.power(coeff as i64))
                    .unwrap();
            }
        }
        let phase = prod
            .proportional_identity_phase()
            .ok_or_else(|| ChiralError::Internal("relation product is not a phase".into()))?;
        if phase.is_minus_one() {
            minus.push(bi);
        }
        phases.push(phase);
    }
    Ok(RedundancyReport {
        basis,
        phases,
        minus_identity: minus,
    })
}

#[derive(Clone, Debug)]
pub struct LogicalPair {
    pub order: u32,
    pub x_rep: PauliOperator,
    pub z_rep: PauliOperator,
    /// commutation exponent c with x_rep·z_rep = ω^c z_rep·x_rep
    pub pairing: u32,
}

#[derive(Clone, Debug)]
pub struct LogicalStructure {
    /// one divisor per conjugate pair (three logical qubits ⇒ [2, 2, 2])
    pub group: AbelianGroupStructure,
    /// raw elementary divisors of centralizer/stabilizer (doubled multiset)
    pub raw_divisors: Vec<u32>,
    pub pairs: Vec<LogicalPair>,
    /// representatives that found no conjugate partner (empty on valid codes)
    pub unpaired: Vec<PauliOperator>,
}

impl LogicalStructure {
    pub fn is_trivial(&self) -> bool {
        self.group.divisors.is_empty()
    }
}

/// Centralizer-mod-stabilizer structure with Darboux-paired representatives.
pub fn logical_structure(code: &StabilizerCode) -> Result<LogicalStructure, ChiralError> {
    let d = code.d;
    let syn = code.syndrome_matrix();
    let solver = ColSolver::new(&syn);
    let centralizer = solver.kernel_basis();
    if centralizer.is_empty() {
        return Ok(LogicalStructure {
            group: AbelianGroupStructure::trivial(),
            raw_divisors: vec![],
            pairs: vec![],
            unpaired: vec![],
        });
    }
    // coordinates of stabilizer rows in the centralizer basis, plus the
    // coordinate syzygies, present the quotient
    let kmat = ModMat::from_rows(d, &centralizer);
    let mut kt = ModMat::zeros(d, kmat.cols, kmat.rows);
    for r in 0..kmat.rows {
        for c in 0..kmat.cols {
            kt.set(c, r, kmat.get(r, c));
        }
    }
    let coord_solver = ColSolver::new(&kt);
    let mut rel_rows: Vec<Vec<u8>> = Vec::new();
    let gmat = code.generator_matrix();
    for r in 0..gmat.rows {
        let coords = coord_solver.solve(gmat.row(r)).ok_or_else(|| {
            ChiralError::Internal("stabilizer generator escapes its own centralizer".into())
        })?;
        rel_rows.push(coords);
    }
    for syz in coord_solver.kernel_basis() {
        rel_rows.push(syz);
    }
    let relations = if rel_rows.is_empty() {
        ModMat::zeros(d, 0, centralizer.len())
    } else {
        ModMat::from_rows(d, &rel_rows)
    };
    let (raw, reps_coords) = quotient_structure(&relations, centralizer.len(), d);

    let lift = |coords: &[u8]| -> Vec<u8> {
        let mut v = vec![0u8; 2 * code.n];
        for (i, &c) in coords.iter().enumerate() {
            if c != 0 {
                for (slot, &k) in v.iter_mut().zip(centralizer[i].iter()) {
                    *slot = ((*slot as u32 + c as u32 * k as u32) % d) as u8;
                }
            }
        }
        v
    };
    let to_op = |v: &[u8]| -> PauliOperator {
        PauliOperator::from_exponents(d, v[..code.n].to_vec(), v[code.n..].to_vec(), 0)
    };
    let symp = |a: &[u8], b: &[u8]| -> u32 {
        let mut c: i64 = 0;
        for s in 0..code.n {
            c += a[code.n + s] as i64 * b[s] as i64 - a[s] as i64 * b[code.n + s] as i64;
            c = c.rem_euclid(d as i64);
        }
        c as u32
    };

    let mut pool: Vec<(u32, Vec<u8>)> = raw
        .divisors
        .iter()
        .copied()
        .zip(reps_coords.iter().map(|c| lift(c)))
        .collect();
    let mut pairs: Vec<LogicalPair> = Vec::new();
    let mut unpaired: Vec<PauliOperator> = Vec::new();
    while let Some((ord_u, u)) = pool.pop() {
        let mut best: Option<(usize, u32)> = None;
        for (k, (_, w)) in pool.iter().enumerate() {
            let c = symp(&u, w);
            if c != 0 {
                let g = gcd_u32(c, d);
                if best
                    .map(|(bk, bc)| {
                        let _ = bk;
                        gcd_u32(bc, d) > g
                    })
                    .unwrap_or(true)
                {
                    best = Some((k, c));
                }
            }
        }
        let Some((k, c)) = best else {
            unpaired.push(to_op(&u));
            continue;
        };
        let (_, w) = pool.remove(k);
        let g = gcd_u32(c, d);
        let unit_inv = mod_inverse_of_unit_part(c, d);
        // remove the u/w components of the remaining representatives
        for (_, r) in pool.iter_mut() {
            let cu = symp(&u, r);
            let cw = symp(&w, r);
            if cu % g == 0 && cw % g == 0 {
                let fu = ((cw / g) as u64 * unit_inv as u64 % d as u64) as u8;
                let fw =
                    (((d - cu / g % d) % d) as u64 * unit_inv as u64 % d as u64) as u8;
                for s in 0..2 * code.n {
                    let val = r[s] as u64 + fu as u64 * u[s] as u64 + fw as u64 * w[s] as u64;
                    r[s] = (val % d as u64) as u8;
                }
            }
        }
        pairs.push(LogicalPair {
            order: ord_u,
            x_rep: to_op(&u),
            z_rep: to_op(&w),
            pairing: c,
        });
    }

    let mut per_pair: Vec<u32> = pairs.iter().map(|p| p.order).collect();
    per_pair.sort_unstable();
    Ok(LogicalStructure {
        group: AbelianGroupStructure { divisors: per_pair },
        raw_divisors: raw.divisors,
        pairs,
        unpaired,
    })
}

/// u with (c / gcd(c,d)) · u ≡ 1 (mod d / gcd(c,d)); d ≤ 64.
fn mod_inverse_of_unit_part(c: u32, d: u32) -> u32 {
    let g = gcd_u32(c, d);
    let c1 = c / g;
    let d1 = d / g;
    if d1 == 1 {
        return 1;
    }
    for u in 1..d {
        if (c1 as u64 * u as u64) % d1 as u64 == 1 {
            return u;
        }
    }
    unreachable!("unit part is invertible")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Distance {
    Exact(usize),
    AtLeast(usize),
}

/// Brute-force code distance: minimum weight of a centralizer element
/// outside the stabilizer group, over connected supports up to `cap`.
/// Disconnected supports cannot beat connected ones: each connected piece of
/// a zero-syndrome operator has zero syndrome on its own.
pub fn code_distance(code: &StabilizerCode, cap: usize) -> Distance {
    let span = RowSpace::new(&code.generator_matrix());
    let d = code.d;
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); code.n];
    for g in &code.generators {
        let sup: Vec<usize> = g.op.support().collect();
        for &a in &sup {
            for &b in &sup {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
    }
    let gens_syn = code.syndrome_matrix();

    for weight in 1..=cap {
        let mut supports: BTreeSet<Vec<usize>> = BTreeSet::new();
        for start in 0..code.n {
            let mut cur = vec![start];
            grow_connected(&adj, &mut cur, start, weight, &mut supports);
        }
        for sup in &supports {
            let per_site = d as u64 * d as u64 - 1;
            if per_site.pow(sup.len() as u32) > 40_000_000 {
                return Distance::AtLeast(weight);
            }
            let mut idx = vec![0u64; sup.len()];
            'patterns: loop {
                let mut op = PauliOperator::identity(d, code.n);
                for (k, &site) in sup.iter().enumerate() {
                    let pt = idx[k] + 1;
                    let x = (pt % d as u64) as i64;
                    let z = (pt / d as u64) as i64;
                    op = op
                        .multiply(&PauliOperator::single(d, code.n, site, x, z))
                        .unwrap();
                }
                if op.weight() == sup.len() {
                    let v = op.symplectic_vec();
                    if gens_syn.matvec(&v).iter().all(|&s| s == 0) && !span.contains(&v) {
                        return Distance::Exact(weight);
                    }
                }
                let mut k = 0;
                loop {
                    if k == sup.len() {
                        break 'patterns;
                    }
                    idx[k] += 1;
                    if idx[k] < per_site {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
            }
        }
    }
    Distance::AtLeast(cap + 1)
}

fn grow_connected(
    adj: &[BTreeSet<usize>],
    current: &mut Vec<usize>,
    root: usize,
    target: usize,
    out: &mut BTreeSet<Vec<usize>>,
) {
    if current.len() == target {
        let mut sorted = current.clone();
        sorted.sort_unstable();
        out.insert(sorted);
        return;
    }
    let mut cands: BTreeSet<usize> = BTreeSet::new();
    for &v in current.iter() {
        for &w in &adj[v] {
            if w > root && !current.contains(&w) {
                cands.insert(w);
            }
        }
    }
    for w in cands {
        current.push(w);
        grow_connected(adj, current, root, target, out);
        current.pop();
    }
}

/// Commutation exponent of every generator with an operator.
pub fn syndrome_exponents(code: &StabilizerCode, op: &PauliOperator) -> Vec<u32> {
    code.generators
        .iter()
        .map(|g| g.op.commutation_exponent(op).unwrap())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice;

    fn arc(l: lattice::ColorLattice) -> Arc<lattice::ColorLattice> {
        Arc::new(l)
    }

    #[test]
    fn cube8_xyz_six_commuting_generators() {
        let lat = arc(lattice::build_cube8());
        let code = build_xyz(&lat).unwrap();
        assert_eq!(code.generators.len(), 6);
        assert_eq!(code.n, 8);
    }

    #[test]
    fn cube8_logicals_and_distance() {
        let lat = arc(lattice::build_cube8());
        let code = build_xyz(&lat).unwrap();
        let ls = logical_structure(&code).unwrap();
        assert_eq!(ls.group.divisors, vec![2, 2, 2], "raw {:?}", ls.raw_divisors);
        assert!(ls.unpaired.is_empty());
        assert_eq!(code_distance(&code, 3), Distance::Exact(2));
        // the one redundancy relation: product of all six faces = +I
        let red = redundancy_relations(&code).unwrap();
        assert_eq!(red.count(), 1);
        assert!(red.phases[0].is_one());
    }

    #[test]
    fn tetra15_logicals_distance_and_global_ops() {
        let lat = arc(lattice::build_tetra15());
        let code = build_xyz(&lat).unwrap();
        assert_eq!(code.n, 15);
        let ls = logical_structure(&code).unwrap();
        assert_eq!(ls.group.divisors, vec![2], "raw {:?}", ls.raw_divisors);
        assert_eq!(code_distance(&code, 4), Distance::Exact(3));
        // global X̄ = ∏X and Z̄ = ∏Z commute with all stabilizers
        let n = code.n;
        let xbar = PauliOperator::from_exponents(2, vec![1; n], vec![0; n], 0);
        let zbar = PauliOperator::from_exponents(2, vec![0; n], vec![1; n], 0);
        for g in &code.generators {
            assert_eq!(g.op.commutation_exponent(&xbar).unwrap(), 0);
            assert_eq!(g.op.commutation_exponent(&zbar).unwrap(), 0);
        }
        assert_eq!(xbar.commutation_exponent(&zbar).unwrap(), 1);
        assert!(!in_group(&xbar, &code));
    }

    #[test]
    fn tetra15_volume_relations_hold_with_plus_sign() {
        let lat = arc(lattice::build_tetra15());
        let code = build_xyz(&lat).unwrap();
        // product of the six face stabilizers of each cell is exactly +I
        for (ci, c) in lat.volumes.iter().enumerate() {
            let mut prod = PauliOperator::identity(2, code.n);
            for g in &code.generators {
                if let GeneratorSource::Face(f) = g.source {
                    if c.faces.contains(&f) {
                        prod = prod.multiply(&g.op).unwrap();
                    }
                }
            }
            let phase = prod.proportional_identity_phase().expect("volume relation");
            assert!(phase.is_one(), "volume {} relation phase {:?}", ci, phase);
        }
    }

    #[test]
    fn chiral_d2_matches_xyz_symplectically() {
        let lat = arc(lattice::build_cube8());
        let xyz = build_xyz(&lat).unwrap();
        let chi = build_chiral(&lat, 2, 1).unwrap();
        for (a, b) in xyz.generators.iter().zip(&chi.generators) {
            assert_eq!(a.op.x_vec(), b.op.x_vec());
            assert_eq!(a.op.z_vec(), b.op.z_vec());
        }
    }

    #[test]
    fn chiral_d3_commutes_on_torus() {
        let lat = arc(lattice::build_torus(2, 2, 2).unwrap());
        let code = build_chiral(&lat, 3, 1).unwrap();
        assert!(code.pairwise_commuting().is_ok());
    }

    #[test]
    fn chiral_noncoprime_flagged_and_commuting() {
        let lat = arc(lattice::build_torus(2, 2, 2).unwrap());
        let code = build_chiral(&lat, 4, 2).unwrap();
        assert!(code.coprime_warning);
        assert!(code.pairwise_commuting().is_ok());
    }

    #[test]
    fn xyz_and_chiral_inside_gauge_group() {
        let lat = arc(lattice::build_torus(2, 2, 2).unwrap());
        let gauge = build_gauge(&lat, 2);
        let xyz = build_xyz(&lat).unwrap();
        let (ok, _) = is_subgroup(&xyz, &gauge);
        assert!(ok);
        let gauge3 = build_gauge(&lat, 3);
        let chi = build_chiral(&lat, 3, 1).unwrap();
        let (ok, _) = is_subgroup(&chi, &gauge3);
        assert!(ok);
        // single-site X is not in the gauge group
        let mut single = StabilizerCode {
            lattice: xyz.lattice.clone(),
            d: 2,
            alpha: 1,
            family: CodeFamily::Condensed,
            n: xyz.n,
            generators: vec![Generator {
                source: GeneratorSource::Derived,
                op: PauliOperator::single(2, xyz.n, 0, 1, 0),
            }],
            sites: xyz.sites.clone(),
            copies: 1,
            coprime_warning: false,
        };
        let (ok, w) = is_subgroup(&single, &gauge);
        assert!(!ok);
        assert_eq!(w, Some(0));
        single.generators.clear();
    }

    #[test]
    fn gauge_code_has_anticommuting_pairs() {
        // complementary-color faces sharing a single vertex anti-commute;
        // cube8 has no complementary pairs (all faces contain A), so the
        // smallest lattice exhibiting this is tetra15
        let lat = arc(lattice::build_tetra15());
        let gauge = build_gauge(&lat, 2);
        assert!(gauge.pairwise_commuting().is_err());
        // and explicitly: an AB face and a CD face sharing one vertex
        let f_ab = lat
            .faces
            .iter()
            .position(|f| f.color == (lattice::Color::A, lattice::Color::B))
            .unwrap();
        let f_cd = lat
            .faces
            .iter()
            .position(|f| f.color == (lattice::Color::C, lattice::Color::D))
            .unwrap();
        let shared: Vec<usize> = lat.faces[f_ab]
            .vertices
            .iter()
            .filter(|v| lat.faces[f_cd].vertices.contains(v))
            .copied()
            .collect();
        assert_eq!(shared.len(), 1);
        let x_op = face_x(&lat, f_ab);
        let z_op = face_z(&lat, f_cd);
        assert_eq!(x_op.commutation_exponent(&z_op).unwrap(), 1);
    }

    fn face_x(lat: &lattice::ColorLattice, f: usize) -> PauliOperator {
        let n = lat.n_vertices();
        let mut op = PauliOperator::identity(2, n);
        for &v in &lat.faces[f].vertices {
            op = op.multiply(&PauliOperator::single(2, n, v, 1, 0)).unwrap();
        }
        op
    }

    fn face_z(lat: &lattice::ColorLattice, f: usize) -> PauliOperator {
        let n = lat.n_vertices();
        let mut op = PauliOperator::identity(2, n);
        for &v in &lat.faces[f].vertices {
            op = op
                .multiply(&PauliOperator::single(2, n, v, 0, lat.lambda(v) as i64))
                .unwrap();
        }
        op
    }

    #[test]
    fn volume_x_stabilizer_is_product_of_face_x_ops() {
        let lat = arc(lattice::build_torus(2, 2, 2).unwrap());
        let cc = build_3dcc(&lat, 2).unwrap();
        // X(c) equals the product of X(f) over the volume's AB faces
        let c0 = &lat.volumes[0];
        let mut prod = PauliOperator::identity(2, cc.n);
        let target_pair = lattice::face_pair(c0.color, match c0.color {
            lattice::Color::A => lattice::Color::B,
            _ => lattice::Color::A,
        });
        for &f in &c0.faces {
            if lat.faces[f].color == target_pair {
                let mut op = PauliOperator::identity(2, cc.n);
                for &v in &lat.faces[f].vertices {
                    op = op.multiply(&PauliOperator::single(2, cc.n, v, 1, 0)).unwrap();
                }
                prod = prod.multiply(&op).unwrap();
            }
        }
        let direct = &cc.generators[0].op; // volume 0 X stabilizer
        assert_eq!(prod.x_vec(), direct.x_vec());
        assert_eq!(prod.z_vec(), direct.z_vec());
    }

    #[test]
    fn twodcc_faces_share_two_qubits_and_commute() {
        let h = lattice::build_honeycomb(1, 1);
        for d in [2u32, 3] {
            let code = build_2dcc(&h, d).unwrap();
            assert!(code.pairwise_commuting().is_ok());
        }
        // neighboring plaquettes share exactly two vertices
        let mut found = false;
        for i in 0..h.faces.len() {
            for j in (i + 1)..h.faces.len() {
                let a: BTreeSet<usize> = h.faces[i].1.iter().copied().collect();
                let b: BTreeSet<usize> = h.faces[j].1.iter().copied().collect();
                let shared = a.intersection(&b).count();
                assert!(shared == 0 || shared == 2, "plaquettes share {}", shared);
                if shared == 2 {
                    found = true;
                }
            }
        }
        assert!(found);
    }

    #[test]
    fn boundary_code_k_and_distance() {
        let lat = arc(lattice::build_slab(1, 1, 1, lattice::Color::A).unwrap());
        let code = build_boundary(&lat, lattice::Color::A, CodeFamily::Xyz, 2, 1).unwrap();
        let n_bdy = code.n;
        assert_eq!(n_bdy, 18);
        let ls = logical_structure(&code).unwrap();
        // k = n_bdy/2 + 1
        assert_eq!(ls.group.divisors.len(), n_bdy / 2 + 1, "raw {:?}", ls.raw_divisors);
        assert_eq!(code_distance(&code, 3), Distance::Exact(2));
        // chiral boundary: also distance 2
        let chic = build_boundary(&lat, lattice::Color::A, CodeFamily::Chiral, 3, 1).unwrap();
        assert_eq!(code_distance(&chic, 3), Distance::Exact(2));
    }

    #[test]
    fn empty_face_lattice_gives_empty_generators() {
        // a lattice stub with no faces
        let lat = arc(lattice::ColorLattice {
            name: "empty".into(),
            vertices: vec![],
            edges: vec![],
            faces: vec![],
            volumes: vec![],
            boundaries: vec![],
            declared_betti2: None,
            mesh: None,
            vertex_edges: vec![],
            vertex_faces: vec![],
        });
        let code = build_xyz(&lat).unwrap();
        assert!(code.generators.is_empty());
    }
}
