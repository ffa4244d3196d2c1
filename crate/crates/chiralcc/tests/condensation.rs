use chiralcc::codes::{build_chiral, in_group};
use chiralcc::condense::*;
use chiralcc::lattice::{self, Color};
use chiralcc::linalg::{ModMat, RowSpace};
use chiralcc::pauli::PauliOperator;
use chiralcc::topo::*;
use std::collections::BTreeSet;
use std::sync::Arc;

fn slab() -> Arc<lattice::ColorLattice> {
    Arc::new(lattice::build_slab(2, 2, 1, Color::A).unwrap())
}

#[test]
fn measure_existing_stabilizer_keeps_group() {
    let lat = slab();
    let code = build_chiral(&lat, 4, 1).unwrap();
    let m = MeasurementSet::new(vec![code.generators[0].op.clone()]).unwrap();
    let out = measure_and_update(&code, &m).unwrap();
    let a: Vec<PauliOperator> = code.generators.iter().map(|g| g.op.clone()).collect();
    let b: Vec<PauliOperator> = out.generators.iter().map(|g| g.op.clone()).collect();
    assert!(same_group(&a, &b, 4, code.n));
}

#[test]
fn measure_and_update_is_idempotent() {
    let lat = slab();
    let sc = condense_semion(&lat, 4, 1).unwrap();
    let again = measure_and_update(&sc.condensed, &sc.measured).unwrap();
    let a: Vec<PauliOperator> = sc.condensed.generators.iter().map(|g| g.op.clone()).collect();
    let b: Vec<PauliOperator> = again.generators.iter().map(|g| g.op.clone()).collect();
    assert!(same_group(&a, &b, 4, sc.condensed.n));
}

#[test]
fn noncommuting_measurement_rejected() {
    let n = 4;
    let a = PauliOperator::single(4, n, 0, 1, 0);
    let b = PauliOperator::single(4, n, 0, 0, 1);
    assert!(MeasurementSet::new(vec![a, b]).is_err());
}

#[test]
fn semion_boundary_group_matches_quoted_generators() {
    let lat = slab();
    let sc = condense_semion(&lat, 4, 1).unwrap();
    let d = 4u32;
    let b = lat.boundaries_of_color(Color::A)[0];
    let top: BTreeSet<usize> = lat.boundary_vertices_of(b).into_iter().collect();

    // quoted boundary set: X(f_AB), X⁻¹Z⁻¹(f_AC), Z(f_AD) on top boundary
    // faces plus X²(e_ACD), X²Z²(e_ABD), Z²(e_ABC) on top in-plane edges
    let mut quoted: Vec<PauliOperator> = Vec::new();
    for &f in &lat.boundaries[b].faces {
        let gi = sc
            .original
            .generators
            .iter()
            .find(|g| matches!(g.source, chiralcc::codes::GeneratorSource::Face(ff) if ff == f))
            .unwrap();
        quoted.push(gi.op.clone());
    }
    for e in 0..lat.edges.len() {
        let ed = &lat.edges[e];
        if ed.color.contains(&Color::A)
            && ed.vertices.iter().all(|v| top.contains(v))
        {
            quoted.push(boundary_edge_logical(&lat, Color::A, e, d, 1, 2).unwrap());
        }
    }
    // the condensed group restricted to the top boundary equals the quoted set
    let restricted = subgroup_supported_on(&sc.condensed, &top);
    let site_list: Vec<usize> = top.iter().copied().collect();
    let quoted_restricted: Vec<Vec<u8>> = quoted
        .iter()
        .map(|op| {
            let mut row = Vec::new();
            for &s in &site_list {
                row.push(op.x_exponent(s));
            }
            for &s in &site_list {
                row.push(op.z_exponent(s));
            }
            row
        })
        .collect();
    let ha = RowSpace::new(&ModMat::from_rows(d, &restricted));
    let hb = RowSpace::new(&ModMat::from_rows(d, &quoted_restricted));
    assert_eq!(ha.canonical_rows(), hb.canonical_rows());
}

#[test]
fn semion_surviving_and_dropped_faces() {
    let lat = slab();
    let sc = condense_semion(&lat, 4, 1).unwrap();
    // X(f_CD) no longer a stabilizer, X²(f_CD) still is
    let f_cd = lat
        .faces
        .iter()
        .position(|f| f.color == (Color::C, Color::D))
        .unwrap();
    let x_cd = loop_stabilizer(&sc.original, &[f_cd]).unwrap();
    assert!(!in_group(&x_cd, &sc.condensed));
    assert!(in_group(&x_cd.power(2), &sc.condensed));
    // X(f_AB) survives
    let f_ab = lat
        .boundaries[lat.boundaries_of_color(Color::A)[0]]
        .faces
        .iter()
        .copied()
        .find(|&f| lat.faces[f].color == (Color::A, Color::B))
        .unwrap();
    let x_ab = loop_stabilizer(&sc.original, &[f_ab]).unwrap();
    assert!(in_group(&x_ab, &sc.condensed));
}

#[test]
fn semion_theta_is_i() {
    let lat = slab();
    let sc = condense_semion(&lat, 4, 1).unwrap();
    let b = lat.boundaries_of_color(Color::A)[0];
    let v = *lat
        .boundary_vertices_of(b)
        .iter()
        .find(|&&v| lat.lambda(v) == 1)
        .unwrap();
    let hops = surface_tjunction_hops(&lat, b, v, 4, 1, 1).unwrap();
    let theta = t_junction_phase(&sc.condensed, &hops).unwrap();
    // ω^α = i: τ exponent 2 at d=4
    assert_eq!(theta.tau_exponent(), 2);
}

#[test]
fn semion_string_squared_decomposes_into_edge_ops() {
    let lat = slab();
    let sc = condense_semion(&lat, 4, 1).unwrap();
    let b = lat.boundaries_of_color(Color::A)[0];
    let top: BTreeSet<usize> = lat.boundary_vertices_of(b).into_iter().collect();
    // surface string = two-body hop chain along a boundary path
    let v0 = *top.iter().next().unwrap();
    let mut path = vec![v0];
    while path.len() < 7 {
        let v = *path.last().unwrap();
        let next = lat
            .edges_at(v)
            .iter()
            .filter_map(|&e| {
                let [a, bb] = lat.edges[e].vertices;
                let w = if a == v { bb } else { a };
                (top.contains(&w) && !path.contains(&w)).then_some(w)
            })
            .next()
            .unwrap();
        path.push(next);
    }
    let chain = surface_hop_chain(&lat, b, &path, 4, 1).unwrap();
    // the group of two-body edge operators: the measured complementary
    // flavors plus the squared face flavors on every boundary edge
    let mut edge_ops: Vec<PauliOperator> = sc.measured.ops.clone();
    for e in 0..lat.edges.len() {
        let ed = &lat.edges[e];
        if !ed.color.contains(&Color::A) {
            continue;
        }
        for &f in &ed.faces {
            let (c1, c2) = lat.faces[f].color;
            if c1 == Color::A || c2 == Color::A {
                edge_ops.push(native_edge_operator(&lat, e, (c1, c2), 4, 1, 2));
            }
        }
    }
    let rows: Vec<Vec<u8>> = edge_ops.iter().map(|o| o.symplectic_vec()).collect();
    let span = RowSpace::new(&ModMat::from_rows(4, &rows));
    assert!(span.contains(&chain.power(2).symplectic_vec()));
    // and every such edge operator commutes with the measured set
    for op in &edge_ops {
        for m in &sc.measured.ops {
            assert_eq!(m.commutation_exponent(op).unwrap(), 0);
        }
    }
}

#[test]
fn semion_bulk_charge_gone() {
    let lat = slab();
    let sc = condense_semion(&lat, 4, 1).unwrap();
    // bulk string through both layers
    let b_top = lat.boundaries_of_color(Color::A)[0];
    let b_bot = lat.boundaries_of_color(Color::A)[1];
    let top = lat.boundary_vertices_of(b_top);
    let bot: BTreeSet<usize> = lat.boundary_vertices_of(b_bot).into_iter().collect();
    // path: top vertex -> its vertical neighbor -> onward in the bottom layer
    let v0 = top[0];
    let vmid = lat
        .edges_at(v0)
        .iter()
        .map(|&e| {
            let [a, b] = lat.edges[e].vertices;
            if a == v0 { b } else { a }
        })
        .find(|w| bot.contains(w))
        .unwrap();
    let vnext = lat
        .edges_at(vmid)
        .iter()
        .map(|&e| {
            let [a, b] = lat.edges[e].vertices;
            if a == vmid { b } else { a }
        })
        .find(|&w| w != v0 && bot.contains(&w))
        .unwrap();
    let vlast = lat
        .edges_at(vnext)
        .iter()
        .map(|&e| {
            let [a, b] = lat.edges[e].vertices;
            if a == vnext { b } else { a }
        })
        .find(|&w| w != vmid && bot.contains(&w))
        .unwrap();
    let path = LatticePath::open(&lat, vec![v0, vmid, vnext, vlast]).unwrap();
    let o = string_operator(&lat, &path, 4, 1).unwrap();
    let o2 = o.power(2);
    // before condensation O² carries a detectable charge
    let pre_detected = sc
        .original
        .generators
        .iter()
        .any(|g| g.op.commutation_exponent(&o2).unwrap() != 0);
    assert!(pre_detected);
    // after condensation every local generator commutes with it (winding
    // combinations can still grade the charge sector on a compact lattice,
    // so the claim is about the local generating set)
    for op in semion_local_generators(&sc, &lat).unwrap() {
        assert_eq!(op.commutation_exponent(&o2).unwrap(), 0);
    }
}

#[test]
fn three_fermion_statistics() {
    let lat = slab();
    let tf = condense_three_fermion(&lat).unwrap();
    let n1 = tf.original.n / 4;
    let b = lat.boundaries_of_color(Color::A)[0];
    let v = *lat
        .boundary_vertices_of(b)
        .iter()
        .find(|&&v| lat.lambda(v) == 1)
        .unwrap();
    let hops1 = surface_tjunction_hops(&lat, b, v, 4, 1, 1).unwrap();
    let embed = |op: &PauliOperator, copy: usize| -> PauliOperator {
        let map: Vec<usize> = (0..n1).map(|s| copy * n1 + s).collect();
        op.embed(4 * n1, &map)
    };
    // θ(a_i a_j) = −1 for the three composite fermions
    for (c1, c2) in [(0usize, 1usize), (0, 2), (0, 3)] {
        let hops: Vec<PauliOperator> = (0..3)
            .map(|k| embed(&hops1[k], c1).multiply(&embed(&hops1[k], c2)).unwrap())
            .collect();
        let hops: [PauliOperator; 3] = [hops[0].clone(), hops[1].clone(), hops[2].clone()];
        let theta = t_junction_phase(&tf.condensed, &hops).unwrap();
        assert!(theta.is_minus_one(), "θ(a_1 a_{}) = {:?}", c2 + 1, theta);
    }
    // pairwise braiding −1: loop of a₁a₂ against string of a₁a₃
    let region = boundary_face_disk(&lat, b, lat.boundaries[b].faces[0], 1);
    let closed1 = loop_stabilizer(&tf.original, &region).unwrap();
    // the single-copy objects, embedded pairwise
    let ring = ring_order(&lat, &closed1).unwrap();
    let mask = arc_mask(n1, &ring, 0, ring.len() / 2);
    let open1 = {
        let base = build_chiral(&lat, 4, 1).unwrap();
        surface_string(&base, &region, Some(&mask)).unwrap()
    };
    let single_loop = {
        let base = build_chiral(&lat, 4, 1).unwrap();
        enclosing_loop(&base, &lat, b, &open1, 2).unwrap()
    };
    for ((l1, l2), (s1, s2)) in [((0usize, 1usize), (0usize, 2usize)), ((0, 1), (0, 3)), ((0, 2), (0, 3))] {
        let w = embed(&single_loop, l1).multiply(&embed(&single_loop, l2)).unwrap();
        let s = embed(&open1, s1).multiply(&embed(&open1, s2)).unwrap();
        let c = w.commutation_exponent(&s).unwrap();
        // shared copies contribute ω^{2α} = ω² = −1 each; exactly one copy is shared
        assert_eq!(c, 2, "braiding exponent for {:?} vs {:?}", (l1, l2), (s1, s2));
    }
    // fusion (a₁a₂)(a₁a₃)(a₁a₄) lands in the condensed vacuum sector
    let s12 = embed(&open1, 0).multiply(&embed(&open1, 1)).unwrap();
    let s13 = embed(&open1, 0).multiply(&embed(&open1, 2)).unwrap();
    let s14 = embed(&open1, 0).multiply(&embed(&open1, 3)).unwrap();
    let fused = s12.multiply(&s13).unwrap().multiply(&s14).unwrap();
    assert!(in_group(&fused, &tf.condensed), "fusion product outside the condensed group");
}
