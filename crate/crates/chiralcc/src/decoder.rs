//! Noise sampling, meta-check syndrome repair, and single-shot decoding for
//! the qubit XYZ color code, plus the Monte Carlo experiment driver.

use rand::Rng;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256StarStar;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::codes::{logical_structure, GeneratorSource, StabilizerCode};
use crate::error::ChiralError;
use crate::lattice::{ColorLattice, VolumeRef};
use crate::linalg::{ColSolver, RowSpace};
use crate::pauli::PauliOperator;
use crate::topo::{check_metachecks, string_operator, syndrome_of, LatticePath, SyndromeConfig};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NoiseModel {
    /// per-site Pauli error rate, uniform over the d²−1 non-identity Paulis
    pub p: f64,
    /// per-face syndrome flip rate, uniform over the d−1 nonzero shifts
    pub q: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(p: f64, q: f64, seed: u64) -> Result<Self, ChiralError> {
        if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
            return Err(ChiralError::Parameter("rates must lie in [0, 1]".into()));
        }
        Ok(NoiseModel { p, q, seed })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrialOutcome {
    Success,
    /// residual commutes with the stabilizer group but lies outside it; the
    /// label is its pairing pattern with the logical representatives
    LogicalError(Vec<u32>),
    /// the decoder produced no correction matching the repaired syndrome
    DecoderFailure(String),
}

#[derive(Clone, Debug)]
pub struct TrialRecord {
    pub trial: u64,
    pub error: PauliOperator,
    pub true_syndrome: SyndromeConfig,
    pub measured_syndrome: SyndromeConfig,
    pub repaired_syndrome: SyndromeConfig,
    pub correction: PauliOperator,
    pub residual: PauliOperator,
    pub residual_weight: usize,
    pub outcome: TrialOutcome,
}

/// Deterministic per-trial rng stream.
fn trial_rng(seed: u64, trial: u64) -> Xoshiro256StarStar {
    Xoshiro256StarStar::seed_from_u64(
        seed ^ trial.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17),
    )
}

/// Sample one error and its measured syndrome: iid per-site Paulis at rate
/// p, iid nonzero face shifts at rate q. Fixed seeds reproduce transcripts.
pub fn sample_trial(
    code: &StabilizerCode,
    lat: &ColorLattice,
    noise: &NoiseModel,
    trial: u64,
) -> (PauliOperator, SyndromeConfig) {
    let mut rng = trial_rng(noise.seed, trial);
    let d = code.d;
    let mut x = vec![0u8; code.n];
    let mut z = vec![0u8; code.n];
    for s in 0..code.n {
        if noise.p > 0.0 && rng.gen_bool(noise.p) {
            let pt = rng.gen_range(1..(d as u64 * d as u64));
            x[s] = (pt % d as u64) as u8;
            z[s] = (pt / d as u64) as u8;
        }
    }
    let error = PauliOperator::from_exponents(d, x, z, 0);
    let mut measured = syndrome_of(code, lat, &error);
    for f in 0..lat.faces.len() {
        if noise.q > 0.0 && rng.gen_bool(noise.q) {
            let shift = rng.gen_range(1..d);
            measured.values[f] = ((measured.values[f] as u32 + shift) % d) as u8;
        }
    }
    (error, measured)
}

// ---------------------------------------------------------------------------
// syndrome repair (meta-check matching)
// ---------------------------------------------------------------------------

fn dual_bfs(lat: &ColorLattice, from: usize) -> (Vec<u32>, Vec<Option<usize>>) {
    let nc = lat.volumes.len();
    let mut dist = vec![u32::MAX; nc];
    let mut via_face = vec![None; nc];
    let mut queue = VecDeque::from([from]);
    dist[from] = 0;
    while let Some(c) = queue.pop_front() {
        for &f in &lat.volumes[c].faces {
            let other = lat.faces[f].volumes.iter().find_map(|r| match r {
                VolumeRef::Real(i) if *i != c => Some(*i),
                _ => None,
            });
            if let Some(o) = other {
                if dist[o] == u32::MAX {
                    dist[o] = dist[c] + 1;
                    via_face[o] = Some(f);
                    queue.push_back(o);
                }
            }
        }
    }
    (dist, via_face)
}

/// Exact minimum-weight perfect matching by branch and bound for small
/// defect sets; greedy nearest-pair above the cutoff.
fn min_weight_matching(
    defects: &[usize],
    dist: &BTreeMap<(usize, usize), u32>,
) -> Vec<(usize, usize)> {
    let k = defects.len();
    assert!(k % 2 == 0);
    const EXACT_CUTOFF: usize = 14;
    if k <= EXACT_CUTOFF {
        fn rec(
            defects: &[usize],
            dist: &BTreeMap<(usize, usize), u32>,
            used: &mut Vec<bool>,
            cur: &mut Vec<(usize, usize)>,
            acc: u64,
            best: &mut (u64, Vec<(usize, usize)>),
        ) {
            if acc >= best.0 {
                return;
            }
            let Some(i) = used.iter().position(|u| !u) else {
                *best = (acc, cur.clone());
                return;
            };
            used[i] = true;
            for j in (i + 1)..defects.len() {
                if used[j] {
                    continue;
                }
                let key = (defects[i].min(defects[j]), defects[i].max(defects[j]));
                let w = *dist.get(&key).unwrap_or(&u32::MAX) as u64;
                used[j] = true;
                cur.push((defects[i], defects[j]));
                rec(defects, dist, used, cur, acc + w, best);
                cur.pop();
                used[j] = false;
            }
            used[i] = false;
        }
        let mut best: (u64, Vec<(usize, usize)>) = (u64::MAX, vec![]);
        let mut used = vec![false; k];
        let mut cur: Vec<(usize, usize)> = Vec::new();
        rec(defects, dist, &mut used, &mut cur, 0, &mut best);
        best.1
    } else {
        let mut rem: Vec<usize> = defects.to_vec();
        let mut out = Vec::new();
        while !rem.is_empty() {
            let a = rem[0];
            let (bi, _) = rem
                .iter()
                .enumerate()
                .skip(1)
                .min_by_key(|(_, &b)| {
                    let key = (a.min(b), a.max(b));
                    (*dist.get(&key).unwrap_or(&u32::MAX), b)
                })
                .expect("even defect count");
            let b = rem[bi];
            out.push((a, b));
            rem.retain(|&x| x != a && x != b);
        }
        out
    }
}

/// Redundancy-constraint data for repairing measured syndromes beyond the
/// local meta-checks: the global AB/CD relation and one membrane relation
/// per non-contractible plane, each with its actual ±I phase as the parity
/// target, plus canonical fix configurations (a dual triangle for the
/// global parity, winding dual loops for the membranes).
pub struct RepairContext {
    /// (constraint face set, required parity)
    constraints: Vec<(BTreeSet<usize>, u8)>,
    /// canonical metacheck-valid flip sets
    fixes: Vec<Vec<usize>>,
    /// fix_matrix[j][i] = parity of |fix_i ∩ constraint_j|
    fix_matrix: Vec<Vec<u8>>,
}

impl RepairContext {
    pub fn new(lat: &ColorLattice, code: &StabilizerCode) -> Result<Self, ChiralError> {
        use crate::lattice::Color;
        assert_eq!(code.d, 2);
        let mut constraints: Vec<(BTreeSet<usize>, u8)> = Vec::new();
        let mut fixes: Vec<Vec<usize>> = Vec::new();
        // global relation: X(f_AB)·X(f_CD) products multiply to +I
        let global: BTreeSet<usize> = lat
            .faces
            .iter()
            .enumerate()
            .filter(|(_, f)| {
                f.color == (Color::A, Color::B) || f.color == (Color::C, Color::D)
            })
            .map(|(i, _)| i)
            .collect();
        constraints.push((global, 0));
        fixes.push(lat.edges[0].faces.clone()); // dual triangle at edge 0
        // membrane relations: one per periodic axis, parity from the
        // relation's actual ±I phase
        if lat.mesh.is_some() {
            for axis in 0..3 {
                let Ok(cut) = lat.cut_surface(axis, 0) else { continue };
                let faceset: BTreeSet<usize> = cut.iter().map(|&(f, _)| f).collect();
                let region: Vec<usize> = faceset.iter().copied().collect();
                let prod = crate::topo::loop_stabilizer(code, &region)?;
                let phase = prod.proportional_identity_phase().ok_or_else(|| {
                    ChiralError::Internal("cut-plane product is not a relation".into())
                })?;
                let rhs = if phase.is_minus_one() { 1 } else { 0 };
                constraints.push((faceset, rhs));
                fixes.push(lat.winding_dual_loop(axis)?);
            }
        }
        let fix_matrix: Vec<Vec<u8>> = constraints
            .iter()
            .map(|(cset, _)| {
                fixes
                    .iter()
                    .map(|fx| (fx.iter().filter(|f| cset.contains(f)).count() % 2) as u8)
                    .collect()
            })
            .collect();
        Ok(RepairContext {
            constraints,
            fixes,
            fix_matrix,
        })
    }

    /// Parity-restore a metacheck-valid syndrome so that it satisfies every
    /// redundancy relation (making it the syndrome of some Pauli).
    fn restore_parities(&self, s: &mut SyndromeConfig) -> Result<(), ChiralError> {
        let k = self.constraints.len();
        let mut violated = vec![0u8; k];
        for (j, (cset, rhs)) in self.constraints.iter().enumerate() {
            let parity: u32 = cset.iter().map(|&f| s.values[f] as u32).sum();
            violated[j] = ((parity as u8) & 1) ^ rhs;
        }
        if violated.iter().all(|&v| v == 0) {
            return Ok(());
        }
        // solve fix_matrix · x = violated over GF(2)
        let mat = crate::linalg::ModMat::from_rows(
            2,
            &self
                .fix_matrix
                .iter()
                .map(|r| r.clone())
                .collect::<Vec<_>>(),
        );
        let sol = crate::linalg::solve_mod(&mat, &violated).map_err(|_| {
            ChiralError::Internal("constraint fixes do not span the violations".into())
        })?;
        for (i, &use_fix) in sol.particular.iter().enumerate() {
            if use_fix != 0 {
                for &f in &self.fixes[i] {
                    s.values[f] ^= 1;
                }
            }
        }
        Ok(())
    }
}

/// Repair a measured syndrome: violated meta-check dual vertices are paired
/// along minimal dual paths and the path faces flipped; with a context the
/// global and membrane redundancy parities are restored too. Qubit (d = 2)
/// pipeline.
pub fn repair_syndrome(
    lat: &ColorLattice,
    measured: &SyndromeConfig,
) -> Result<SyndromeConfig, ChiralError> {
    repair_syndrome_with(lat, measured, None)
}

pub fn repair_syndrome_with(
    lat: &ColorLattice,
    measured: &SyndromeConfig,
    ctx: Option<&RepairContext>,
) -> Result<SyndromeConfig, ChiralError> {
    if measured.d != 2 {
        return Err(ChiralError::Parameter(
            "syndrome repair is the qubit (d=2) pipeline".into(),
        ));
    }
    let report = check_metachecks(lat, measured);
    if report.valid {
        let mut out = measured.clone();
        if let Some(ctx) = ctx {
            ctx.restore_parities(&mut out)?;
        }
        return Ok(out);
    }
    let mut defects = Vec::new();
    for v in &report.violations {
        match v {
            VolumeRef::Real(i) => defects.push(*i),
            VolumeRef::Boundary(_) => {
                return Err(ChiralError::Internal(
                    "boundary meta-check violations are not repaired".into(),
                ))
            }
        }
    }
    if defects.len() % 2 != 0 {
        return Err(ChiralError::Internal(
            "odd number of violated meta-checks on a closed lattice".into(),
        ));
    }
    let mut dist_map: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    let mut bfs_cache: BTreeMap<usize, (Vec<u32>, Vec<Option<usize>>)> = BTreeMap::new();
    for &a in &defects {
        let bfs = dual_bfs(lat, a);
        for &b in &defects {
            if a < b {
                dist_map.insert((a, b), bfs.0[b]);
            }
        }
        bfs_cache.insert(a, bfs);
    }
    let matching = min_weight_matching(&defects, &dist_map);
    let mut repaired = measured.clone();
    for (a, b) in matching {
        let (_, via) = &bfs_cache[&a];
        let mut cur = b;
        while cur != a {
            let f = via[cur].ok_or_else(|| ChiralError::Internal("broken BFS tree".into()))?;
            repaired.values[f] ^= 1;
            let other = lat.faces[f]
                .volumes
                .iter()
                .find_map(|r| match r {
                    VolumeRef::Real(i) if *i != cur => Some(*i),
                    _ => None,
                })
                .ok_or_else(|| ChiralError::Internal("face without second volume".into()))?;
            cur = other;
        }
    }
    let post = check_metachecks(lat, &repaired);
    if !post.valid {
        return Err(ChiralError::Internal(
            "repair left violated meta-checks".into(),
        ));
    }
    if let Some(ctx) = ctx {
        ctx.restore_parities(&mut repaired)?;
    }
    Ok(repaired)
}

// ---------------------------------------------------------------------------
// decoding
// ---------------------------------------------------------------------------

/// Precomputed state for decoding one code.
pub struct Decoder {
    pub code: StabilizerCode,
    syndrome_solver: ColSolver,
    stabilizer_span: RowSpace,
    face_of_gen: Vec<Option<usize>>,
    logical_pairs: Vec<(PauliOperator, PauliOperator)>,
    repair_ctx: Option<RepairContext>,
}

impl Decoder {
    pub fn new(code: StabilizerCode) -> Result<Self, ChiralError> {
        let syn = code.syndrome_matrix();
        let syndrome_solver = ColSolver::new(&syn);
        let stabilizer_span = RowSpace::new(&code.generator_matrix());
        let face_of_gen = code
            .generators
            .iter()
            .map(|g| match g.source {
                GeneratorSource::Face(f) => Some(f),
                _ => None,
            })
            .collect::<Vec<_>>();
        let ls = logical_structure(&code)?;
        let logical_pairs = ls
            .pairs
            .iter()
            .map(|p| (p.x_rep.clone(), p.z_rep.clone()))
            .collect();
        let repair_ctx = match (&code.lattice, code.d) {
            (Some(lat), 2) if lat.is_closed() => Some(RepairContext::new(lat, &code)?),
            _ => None,
        };
        Ok(Decoder {
            code,
            syndrome_solver,
            stabilizer_span,
            face_of_gen,
            logical_pairs,
            repair_ctx,
        })
    }

    /// Any Pauli with the given face syndrome, or None when unphysical.
    pub fn solve_syndrome(&self, s: &SyndromeConfig) -> Option<PauliOperator> {
        let mut target = vec![0u8; self.code.generators.len()];
        for (gi, f) in self.face_of_gen.iter().enumerate() {
            if let Some(f) = f {
                target[gi] = s.values[*f];
            }
        }
        let w = self.syndrome_solver.solve(&target)?;
        let n = self.code.n;
        Some(PauliOperator::from_exponents(
            self.code.d,
            w[..n].to_vec(),
            w[n..].to_vec(),
            0,
        ))
    }

    pub fn in_stabilizer_group(&self, op: &PauliOperator) -> bool {
        self.stabilizer_span.contains(&op.symplectic_vec())
    }

    /// Pairing exponents of the residual with the logical representatives
    /// (all zero ⇔ trivial class).
    pub fn logical_class(&self, residual: &PauliOperator) -> Vec<u32> {
        let mut label = Vec::new();
        for (x_rep, z_rep) in &self.logical_pairs {
            label.push(residual.commutation_exponent(x_rep).unwrap());
            label.push(residual.commutation_exponent(z_rep).unwrap());
        }
        label
    }

    pub fn logical_pair_count(&self) -> usize {
        self.logical_pairs.len()
    }
}

/// Two-stage single-shot decoder for the qubit XYZ code: odd (fermionic)
/// loop components are paired by minimum-weight matching and connected with
/// string operators, then the remaining even syndrome is erased by a solved
/// interior correction.
pub fn decode(
    decoder: &Decoder,
    lat: &ColorLattice,
    syndrome: &SyndromeConfig,
) -> Result<PauliOperator, String> {
    let code = &decoder.code;
    if code.d != 2 {
        return Err("decode is the qubit (d=2) pipeline".into());
    }
    if !check_metachecks(lat, syndrome).valid {
        return Err("syndrome violates meta-checks".into());
    }
    if syndrome.is_zero() {
        return Ok(PauliOperator::identity(code.d, code.n));
    }
    let components = crate::topo::syndrome_clusters(lat, syndrome);
    let mut correction = PauliOperator::identity(code.d, code.n);
    let mut remaining = syndrome.clone();

    let odd: Vec<&Vec<usize>> = components.iter().filter(|c| c.len() % 2 == 1).collect();
    if odd.len() % 2 == 1 {
        return Err("odd number of fermionic loops".into());
    }
    if !odd.is_empty() {
        // representative end-edge per odd loop: prefer an edge whose whole
        // face triangle lies inside the component, else any component edge
        // (the string's endpoint triangle then merges with the loop into an
        // even, locally erasable configuration)
        let mut reps = Vec::new();
        for comp in &odd {
            let faceset: BTreeSet<usize> = comp.iter().copied().collect();
            let mut found = None;
            'search: for &f in comp.iter() {
                for &e in &lat.faces[f].edges {
                    if lat.edges[e].faces.iter().all(|fe| faceset.contains(fe)) {
                        found = Some(e);
                        break 'search;
                    }
                }
            }
            let e = found.unwrap_or_else(|| {
                comp.iter()
                    .flat_map(|&f| lat.faces[f].edges.iter().copied())
                    .min()
                    .expect("component has faces")
            });
            reps.push(e);
        }
        let mut dist_map: BTreeMap<(usize, usize), u32> = BTreeMap::new();
        for i in 0..reps.len() {
            for j in (i + 1)..reps.len() {
                let a = lat.edges[reps[i]].vertices[0];
                let b = lat.edges[reps[j]].vertices[0];
                let d = crate::topo::shortest_path(lat, a, b)
                    .map(|p| p.len() as u32)
                    .unwrap_or(u32::MAX);
                let key = (reps[i].min(reps[j]), reps[i].max(reps[j]));
                dist_map.insert(key, d);
            }
        }
        let matching = min_weight_matching(&reps, &dist_map);
        for (ea, eb) in matching {
            let (a0, a1) = (lat.edges[ea].vertices[0], lat.edges[ea].vertices[1]);
            let (b0, b1) = (lat.edges[eb].vertices[0], lat.edges[eb].vertices[1]);
            let mut path = crate::topo::shortest_path(lat, a1, b0).ok_or("no pairing path")?;
            let mut full = vec![a0];
            full.append(&mut path);
            full.push(b1);
            dedup_path(&mut full);
            if full.len() < 3 {
                return Err("degenerate fermion pairing path".into());
            }
            let lp = LatticePath::open(lat, full).map_err(|e| e.to_string())?;
            let string =
                string_operator(lat, &lp, code.d, code.alpha).map_err(|e| e.to_string())?;
            let s_string = syndrome_of(code, lat, &string);
            remaining.add_assign(&s_string); // d = 2: adding is subtracting
            correction = correction.multiply(&string).unwrap();
        }
    }

    // interior erasure of each remaining (even) loop: a local solve over
    // vertices near the component, grown until feasible
    if !remaining.is_zero() {
        for comp in crate::topo::syndrome_clusters(lat, &remaining) {
            let targets: BTreeMap<usize, i64> = comp
                .iter()
                .map(|&f| (f, -(remaining.values[f] as i64)))
                .collect();
            let mut vars: BTreeSet<usize> = BTreeSet::new();
            for &f in &comp {
                vars.extend(lat.faces[f].vertices.iter().copied());
            }
            let mut solved = None;
            for _grow in 0..3 {
                match crate::topo::solve_local_syndrome(code, lat, &vars, &targets) {
                    Ok(op) => {
                        solved = Some(op);
                        break;
                    }
                    Err(_) => {
                        // widen: add every vertex sharing a face
                        let mut next = vars.clone();
                        for &v in &vars {
                            for &f in lat.faces_at(v) {
                                next.extend(lat.faces[f].vertices.iter().copied());
                            }
                        }
                        vars = next;
                    }
                }
            }
            let op = solved.ok_or("loop interior erasure is infeasible")?;
            correction = correction.multiply(&op).unwrap();
        }
    }
    let achieved = syndrome_of(code, lat, &correction);
    if achieved != *syndrome {
        return Err("correction does not match the syndrome".into());
    }
    Ok(correction)
}

fn dedup_path(path: &mut Vec<usize>) {
    // remove immediate backtracks u, v, u
    let mut changed = true;
    while changed {
        changed = false;
        let mut i = 0;
        while i + 2 < path.len() {
            if path[i] == path[i + 2] {
                path.drain(i + 1..i + 3);
                changed = true;
            } else {
                i += 1;
            }
        }
    }
    path.dedup();
}

// ---------------------------------------------------------------------------
// experiments
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub trials: u64,
    pub failures: u64,
    pub decoder_failures: u64,
    pub failure_rate: f64,
    /// Wilson 95% confidence interval on the failure rate
    pub ci_low: f64,
    pub ci_high: f64,
    pub max_residual_weight: usize,
    /// histogram of residual weights (index = weight)
    pub residual_weight_histogram: Vec<u64>,
}

/// One full trial: sample → repair → decode → classify residual.
pub fn run_trial(
    decoder: &Decoder,
    lat: &ColorLattice,
    noise: &NoiseModel,
    trial: u64,
) -> TrialRecord {
    let code = &decoder.code;
    let (error, measured) = sample_trial(code, lat, noise, trial);
    let true_syndrome = syndrome_of(code, lat, &error);
    let repaired = match repair_syndrome_with(lat, &measured, decoder.repair_ctx.as_ref()) {
        Ok(r) => r,
        Err(e) => {
            return TrialRecord {
                trial,
                residual_weight: error.weight(),
                outcome: TrialOutcome::DecoderFailure(format!("repair: {}", e)),
                correction: PauliOperator::identity(code.d, code.n),
                residual: error.clone(),
                error,
                true_syndrome,
                repaired_syndrome: measured.clone(),
                measured_syndrome: measured,
            }
        }
    };
    match decode(decoder, lat, &repaired) {
        Ok(correction) => {
            let residual = correction.multiply(&error).unwrap();
            let residual_weight = residual.weight();
            let outcome = if decoder.in_stabilizer_group(&residual) {
                TrialOutcome::Success
            } else {
                TrialOutcome::LogicalError(decoder.logical_class(&residual))
            };
            TrialRecord {
                trial,
                error,
                true_syndrome,
                measured_syndrome: measured,
                repaired_syndrome: repaired,
                correction,
                residual,
                residual_weight,
                outcome,
            }
        }
        Err(msg) => TrialRecord {
            trial,
            residual_weight: error.weight(),
            outcome: TrialOutcome::DecoderFailure(msg),
            correction: PauliOperator::identity(code.d, code.n),
            residual: error.clone(),
            error,
            true_syndrome,
            measured_syndrome: measured,
            repaired_syndrome: repaired,
        },
    }
}

/// Monte Carlo aggregate over independent seeded trials (parallel;
/// deterministic per-trial streams keep reruns identical).
pub fn run_experiment(
    decoder: &Decoder,
    lat: &ColorLattice,
    noise: &NoiseModel,
    trials: u64,
) -> ExperimentSummary {
    let records: Vec<(usize, bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let rec = run_trial(decoder, lat, noise, t);
            let failed = !matches!(rec.outcome, TrialOutcome::Success);
            let decf = matches!(rec.outcome, TrialOutcome::DecoderFailure(_));
            (rec.residual_weight, failed, decf)
        })
        .collect();
    let failures = records.iter().filter(|r| r.1).count() as u64;
    let decoder_failures = records.iter().filter(|r| r.2).count() as u64;
    let max_w = records.iter().map(|r| r.0).max().unwrap_or(0);
    let mut hist = vec![0u64; max_w + 1];
    for r in &records {
        hist[r.0] += 1;
    }
    let (lo, hi) = wilson_interval(failures, trials);
    ExperimentSummary {
        trials,
        failures,
        decoder_failures,
        failure_rate: failures as f64 / trials.max(1) as f64,
        ci_low: lo,
        ci_high: hi,
        max_residual_weight: max_w,
        residual_weight_histogram: hist,
    }
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.96f64;
    let n = n as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = (z / denom) * ((p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt());
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// One-sided test that rate B is not significantly larger than rate A at
/// 95% (pooled z-test; degenerate cases pass).
pub fn not_significantly_larger(fail_a: u64, n_a: u64, fail_b: u64, n_b: u64) -> bool {
    let pa = fail_a as f64 / n_a.max(1) as f64;
    let pb = fail_b as f64 / n_b.max(1) as f64;
    if pb <= pa {
        return true;
    }
    let pooled = (fail_a + fail_b) as f64 / (n_a + n_b).max(1) as f64;
    if pooled == 0.0 || pooled == 1.0 {
        return true;
    }
    let se = (pooled * (1.0 - pooled) * (1.0 / n_a as f64 + 1.0 / n_b as f64)).sqrt();
    let z = (pb - pa) / se;
    z < 1.645
}
