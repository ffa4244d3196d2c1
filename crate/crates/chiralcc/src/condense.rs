//! Boson condensation by projective measurement: stabilizer-group update
//! under commuting Pauli measurements post-selected to +1, with the chiral
//! semion and three-fermion constructions on the ℤ₄ code.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::codes::{
    build_chiral, tensor_code, CodeFamily, Generator, GeneratorSource, StabilizerCode,
};
use crate::error::ChiralError;
use crate::lattice::{Color, ColorLattice};
use crate::linalg::{kernel_mod, ModMat, RowSpace};
use crate::pauli::PauliOperator;
use crate::topo::boundary_edge_logical;

/// Commuting Pauli measurements, post-selected to the +1 outcome.
#[derive(Clone, Debug)]
pub struct MeasurementSet {
    pub ops: Vec<PauliOperator>,
}

impl MeasurementSet {
    pub fn new(ops: Vec<PauliOperator>) -> Result<Self, ChiralError> {
        for i in 0..ops.len() {
            for j in (i + 1)..ops.len() {
                if ops[i].commutation_exponent(&ops[j])? != 0 {
                    return Err(ChiralError::NonCommutingMeasurement { first: i, second: j });
                }
            }
        }
        Ok(MeasurementSet { ops })
    }
}

/// Stabilizer update under a commuting measurement set: the new group is
/// generated by the measured operators together with every combination of
/// the old generators that commutes with all of them (the complete
/// recombination, found as a kernel over ℤ_d).
pub fn measure_and_update(
    code: &StabilizerCode,
    m: &MeasurementSet,
) -> Result<StabilizerCode, ChiralError> {
    let d = code.d;
    let n = code.n;
    // commutation matrix: rows = measurements, cols = old generators
    let rows: Vec<Vec<u8>> = m
        .ops
        .iter()
        .map(|mo| {
            code.generators
                .iter()
                .map(|g| mo.commutation_exponent(&g.op).unwrap() as u8)
                .collect()
        })
        .collect();
    let cmat = if rows.is_empty() {
        ModMat::zeros(d, 0, code.generators.len())
    } else {
        ModMat::from_rows(d, &rows)
    };
    let kept_combos = kernel_mod(&cmat);
    let mut generators: Vec<Generator> = Vec::new();
    for combo in &kept_combos {
        let mut op = PauliOperator::identity(d, n);
        for (gi, &c) in combo.iter().enumerate() {
            if c != 0 {
                op = op.multiply(&code.generators[gi].op.power(c as i64))?;
            }
        }
        if op.is_identity_up_to_phase() {
            continue;
        }
        generators.push(Generator {
            source: GeneratorSource::Derived,
            op,
        });
    }
    for (mi, mo) in m.ops.iter().enumerate() {
        generators.push(Generator {
            source: GeneratorSource::Measured(mi),
            op: mo.clone(),
        });
    }
    let out = StabilizerCode {
        lattice: code.lattice.clone(),
        d,
        alpha: code.alpha,
        family: CodeFamily::Condensed,
        n,
        generators,
        sites: code.sites.clone(),
        copies: code.copies,
        coprime_warning: code.coprime_warning,
    };
    out.pairwise_commuting().map_err(|(i, j)| {
        ChiralError::Internal(format!("condensed generators {i},{j} anti-commute"))
    })?;
    Ok(out)
}

/// Symplectic span of the subgroup of a code's group supported entirely on
/// a site subset, reported as canonical rows restricted to those sites.
pub fn subgroup_supported_on(code: &StabilizerCode, sites: &BTreeSet<usize>) -> Vec<Vec<u8>> {
    let d = code.d;
    let n = code.n;
    let outside: Vec<usize> = (0..n).filter(|s| !sites.contains(s)).collect();
    // combos with zero exponents outside the site set: kernel of the
    // outside-restricted transpose map
    let m = code.generators.len();
    let mut mat = ModMat::zeros(d, 2 * outside.len(), m);
    for (gi, g) in code.generators.iter().enumerate() {
        for (k, &s) in outside.iter().enumerate() {
            mat.set(k, gi, g.op.x_exponent(s));
            mat.set(outside.len() + k, gi, g.op.z_exponent(s));
        }
    }
    let combos = kernel_mod(&mat);
    let site_list: Vec<usize> = sites.iter().copied().collect();
    let mut rows = Vec::new();
    for combo in combos {
        let mut op = PauliOperator::identity(d, n);
        for (gi, &c) in combo.iter().enumerate() {
            if c != 0 {
                op = op.multiply(&code.generators[gi].op.power(c as i64)).unwrap();
            }
        }
        let mut row = Vec::with_capacity(2 * site_list.len());
        for &s in &site_list {
            row.push(op.x_exponent(s));
        }
        for &s in &site_list {
            row.push(op.z_exponent(s));
        }
        if row.iter().any(|&v| v != 0) {
            rows.push(row);
        }
    }
    rows
}

/// Chiral semion condensation on a lattice with A boundaries: measure the
/// squared two-body edge logicals on every A-containing edge of the ℤ₄^(1)
/// code and post-select.
pub struct SemionCondensation {
    pub original: StabilizerCode,
    pub condensed: StabilizerCode,
    pub measured: MeasurementSet,
}

pub fn condense_semion(
    lat: &Arc<ColorLattice>,
    d: u32,
    alpha: u32,
) -> Result<SemionCondensation, ChiralError> {
    if d != 4 || alpha != 1 {
        return Err(ChiralError::Parameter(
            "the chiral semion recipe is the d=4, α=1 condensation".into(),
        ));
    }
    if lat.boundaries_of_color(Color::A).is_empty() {
        return Err(ChiralError::MissingBoundary(Color::A));
    }
    let original = build_chiral(lat, d, alpha)?;
    let mut ops = Vec::new();
    for e in 0..lat.edges.len() {
        if lat.edges[e].color.contains(&Color::A) {
            ops.push(boundary_edge_logical(lat, Color::A, e, d, alpha, 2)?);
        }
    }
    let measured = MeasurementSet::new(ops)?;
    let condensed = measure_and_update(&original, &measured)?;
    Ok(SemionCondensation {
        original,
        condensed,
        measured,
    })
}

/// Four copies of the ℤ₄^(1) code with the a_j² and a₁a₂a₃a₄ bosons
/// condensed through commuting three-body short strings, leaving the
/// three-fermion surface theory.
pub struct ThreeFermionCondensation {
    pub original: StabilizerCode,
    pub condensed: StabilizerCode,
    pub measured: MeasurementSet,
}

pub fn condense_three_fermion(lat: &Arc<ColorLattice>) -> Result<ThreeFermionCondensation, ChiralError> {
    let (d, alpha) = (4u32, 1u32);
    if lat.boundaries_of_color(Color::A).is_empty() {
        return Err(ChiralError::MissingBoundary(Color::A));
    }
    let base = build_chiral(lat, d, alpha)?;
    let original = tensor_code(&base, 4);
    let n1 = base.n;

    // wedges: ordered pairs of distinct A-containing edges sharing a vertex
    let mut wedges: Vec<(usize, usize, usize)> = Vec::new(); // (middle, e, e')
    for v in 0..lat.n_vertices() {
        let edges: Vec<usize> = lat
            .edges_at(v)
            .iter()
            .copied()
            .filter(|&e| lat.edges[e].color.contains(&Color::A))
            .collect();
        for i in 0..edges.len() {
            for j in (i + 1)..edges.len() {
                wedges.push((v, edges[i], edges[j]));
            }
        }
    }
    let embed_copy = |op: &PauliOperator, copy: usize| -> PauliOperator {
        let map: Vec<usize> = (0..n1).map(|s| copy * n1 + s).collect();
        op.embed(4 * n1, &map)
    };
    // strings through black middles condense a_j² per copy; strings through
    // white middles condense a₁a₂a₃a₄ across all copies
    let mut ops = Vec::new();
    for &(v, e1, e2) in &wedges {
        if lat.lambda(v) == -1 {
            let s1 = boundary_edge_logical(lat, Color::A, e1, d, alpha, 2)?;
            let s2 = boundary_edge_logical(lat, Color::A, e2, d, alpha, 2)?;
            let string = s1.multiply(&s2)?;
            for copy in 0..4 {
                ops.push(embed_copy(&string, copy));
            }
        } else {
            let s1 = boundary_edge_logical(lat, Color::A, e1, d, alpha, 1)?;
            let s2 = boundary_edge_logical(lat, Color::A, e2, d, alpha, 1)?;
            let string = s1.multiply(&s2)?;
            let mut joint = PauliOperator::identity(d, 4 * n1);
            for copy in 0..4 {
                joint = joint.multiply(&embed_copy(&string, copy))?;
            }
            ops.push(joint);
        }
    }
    let measured = MeasurementSet::new(ops)?;
    let condensed = measure_and_update(&original, &measured)?;
    Ok(ThreeFermionCondensation {
        original,
        condensed,
        measured,
    })
}

/// The canonical local generating set of the semion-condensed code: the
/// A-containing face stabilizers unchanged, every other face stabilizer
/// squared, plus the measured edge operators. Each element is verified to
/// lie in the condensed group.
pub fn semion_local_generators(
    sc: &SemionCondensation,
    lat: &ColorLattice,
) -> Result<Vec<PauliOperator>, ChiralError> {
    let span = RowSpace::new(&sc.condensed.generator_matrix());
    let mut out = Vec::new();
    for g in &sc.original.generators {
        let GeneratorSource::Face(f) = g.source else {
            continue;
        };
        let (c1, c2) = lat.faces[f].color;
        let op = if c1 == Color::A || c2 == Color::A {
            g.op.clone()
        } else {
            g.op.power(2)
        };
        if !span.contains(&op.symplectic_vec()) {
            return Err(ChiralError::Internal(format!(
                "canonical local generator of face {} left the condensed group",
                f
            )));
        }
        out.push(op);
    }
    out.extend(sc.measured.ops.iter().cloned());
    Ok(out)
}

/// Two-body surface hop chain along a boundary vertex path: the product of
/// truncated face-stabilizer pieces, one per path edge, each flavored by a
/// boundary face containing that edge. Its square decomposes literally into
/// squared two-body edge operators.
pub fn surface_hop_chain(
    lat: &ColorLattice,
    boundary_index: usize,
    path: &[usize],
    d: u32,
    alpha: u32,
) -> Result<PauliOperator, ChiralError> {
    let bset: BTreeSet<usize> = lat.boundaries[boundary_index]
        .faces
        .iter()
        .copied()
        .collect();
    let mut op = PauliOperator::identity(d, lat.n_vertices());
    for i in 0..path.len() - 1 {
        let e = lat
            .edge_between(path[i], path[i + 1])
            .ok_or_else(|| ChiralError::InvalidPath("path vertices not adjacent".into()))?;
        let f = *lat.edges[e]
            .faces
            .iter()
            .find(|f| bset.contains(f))
            .ok_or_else(|| ChiralError::InvalidPath("path edge off the boundary".into()))?;
        op = op.multiply(&crate::topo::native_edge_operator(
            lat,
            e,
            lat.faces[f].color,
            d,
            alpha,
            1,
        ))?;
    }
    Ok(op)
}

/// Canonical span comparison of two generator lists over the same register.
pub fn same_group(a: &[PauliOperator], b: &[PauliOperator], d: u32, n: usize) -> bool {
    let rows_a: Vec<Vec<u8>> = a.iter().map(|o| o.symplectic_vec()).collect();
    let rows_b: Vec<Vec<u8>> = b.iter().map(|o| o.symplectic_vec()).collect();
    let ma = if rows_a.is_empty() {
        ModMat::zeros(d, 0, 2 * n)
    } else {
        ModMat::from_rows(d, &rows_a)
    };
    let mb = if rows_b.is_empty() {
        ModMat::zeros(d, 0, 2 * n)
    } else {
        ModMat::from_rows(d, &rows_b)
    };
    let ha = RowSpace::new(&ma);
    let hb = RowSpace::new(&mb);
    ha.canonical_rows() == hb.canonical_rows()
}
