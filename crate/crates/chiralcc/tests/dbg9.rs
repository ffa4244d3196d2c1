use chiralcc::condense::*;
use chiralcc::lattice::{self, Color};
use chiralcc::linalg::{ModMat, RowSpace};
use chiralcc::pauli::PauliOperator;
use chiralcc::topo::*;
use std::collections::BTreeSet;
use std::sync::Arc;

#[test]
fn debug_edgeop_span() {
    let lat = Arc::new(lattice::build_slab(2, 2, 1, Color::A).unwrap());
    let sc = condense_semion(&lat, 4, 1).unwrap();
    let b = lat.boundaries_of_color(Color::A)[0];
    let top: BTreeSet<usize> = lat.boundary_vertices_of(b).into_iter().collect();
    // all squared 2-body edge ops: for each in-plane edge, both face flavors
    // containing it, plus the complementary measured flavor
    let mut edge_ops: Vec<PauliOperator> = sc.measured.ops.clone();
    for e in 0..lat.edges.len() {
        let ed = &lat.edges[e];
        if !ed.color.contains(&Color::A) { continue; }
        for &f in &ed.faces {
            let (c1, c2) = lat.faces[f].color;
            if c1 == Color::A || c2 == Color::A {
                let op = native_edge_operator(&lat, e, (c1, c2), 4, 1, 2);
                edge_ops.push(op);
            }
        }
    }
    let rows: Vec<Vec<u8>> = edge_ops.iter().map(|o| o.symplectic_vec()).collect();
    let span = RowSpace::new(&ModMat::from_rows(4, &rows));

    // arc-masked surface string
    let region = boundary_face_disk(&lat, b, lat.boundaries[b].faces[0], 1);
    let closed = loop_stabilizer(&sc.original, &region).unwrap();
    let ring = ring_order(&lat, &closed).unwrap();
    let mask = arc_mask(sc.original.n, &ring, 0, ring.len()/2);
    let open = surface_string(&sc.original, &region, Some(&mask)).unwrap();
    println!("arc-masked O^2 in full edge-op span: {}", span.contains(&open.power(2).symplectic_vec()));

    // hop-chain surface string on the top boundary
    let v0 = *top.iter().next().unwrap();
    let mut path = vec![v0];
    while path.len() < 7 {
        let v = *path.last().unwrap();
        let next = lat.edges_at(v).iter().filter_map(|&e| {
            let [a, bb] = lat.edges[e].vertices;
            let w = if a == v { bb } else { a };
            (top.contains(&w) && !path.contains(&w)).then_some(w)
        }).next().unwrap();
        path.push(next);
    }
    let mut hop_chain = PauliOperator::identity(4, sc.original.n);
    for i in 0..path.len()-1 {
        let e = lat.edge_between(path[i], path[i+1]).unwrap();
        // flavor: a boundary face containing this edge
        let f = *lat.edges[e].faces.iter().find(|&&f| {
            let (c1, _) = lat.faces[f].color; c1 == Color::A
        }).unwrap();
        let hop = native_edge_operator(&lat, e, lat.faces[f].color, 4, 1, 1);
        hop_chain = hop_chain.multiply(&hop).unwrap();
    }
    let h2 = hop_chain.power(2);
    println!("hop-chain O^2 in full edge-op span: {}", span.contains(&h2.symplectic_vec()));
    let s = syndrome_of(&sc.original, &lat, &hop_chain);
    println!("hop-chain O syndrome clusters: {}", syndrome_clusters(&lat, &s).len());
    // which condensed-local generators detect things
    let local_ok = sc.measured.ops.iter().all(|m| m.commutation_exponent(&h2).unwrap() == 0);
    println!("hop-chain O^2 commutes with measured: {}", local_ok);
}
