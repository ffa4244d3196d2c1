use chiralcc::codes::in_group;
use chiralcc::condense::*;
use chiralcc::lattice::{self, Color};
use chiralcc::linalg::{ModMat, RowSpace};
use chiralcc::topo::*;
use std::sync::Arc;

#[test]
fn debug_memberships() {
    let lat = Arc::new(lattice::build_slab(2, 2, 1, Color::A).unwrap());
    let sc = condense_semion(&lat, 4, 1).unwrap();
    let b = lat.boundaries_of_color(Color::A)[0];
    // sanity: squared face stabilizer in condensed group
    let f0 = lat.boundaries[b].faces[0];
    let s0 = loop_stabilizer(&sc.original, &[f0]).unwrap();
    println!("S(f)^2 in condensed: {}", in_group(&s0.power(2), &sc.condensed));
    println!("S(f) in condensed: {}", in_group(&s0, &sc.condensed));
    // Ô from arc mask
    let region = boundary_face_disk(&lat, b, f0, 1);
    let closed = loop_stabilizer(&sc.original, &region).unwrap();
    let ring = ring_order(&lat, &closed).unwrap();
    let mask = arc_mask(sc.original.n, &ring, 0, ring.len()/2);
    let open = surface_string(&sc.original, &region, Some(&mask)).unwrap();
    let o2 = open.power(2);
    let s = syndrome_of(&sc.original, &lat, &o2);
    println!("O^2 syndrome: {:?}", s.support().iter().map(|&f| (lat.faces[f].color, s.values[f])).collect::<Vec<_>>());
    // syndrome of O^2 against the CONDENSED generators (should be zero if condensed)
    let cnonzero = sc.condensed.generators.iter().filter(|g| g.op.commutation_exponent(&o2).unwrap() != 0).count();
    println!("condensed gens anticommuting with O^2: {}", cnonzero);
    // measured chain with same syndrome? check syndrome of measured ops
    let rows: Vec<Vec<u8>> = sc.measured.ops.iter().map(|o| o.symplectic_vec()).collect();
    let span = RowSpace::new(&ModMat::from_rows(4, &rows));
    let _ = span;
}
