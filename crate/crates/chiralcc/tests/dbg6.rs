use chiralcc::codes::in_group;
use chiralcc::condense::*;
use chiralcc::lattice::{self, Color};
use chiralcc::linalg::{ModMat, RowSpace};
use chiralcc::topo::*;
use std::sync::Arc;

#[test]
fn debug_string_squared() {
    let lat = Arc::new(lattice::build_slab(2, 2, 1, Color::A).unwrap());
    let sc = condense_semion(&lat, 4, 1).unwrap();
    let b = lat.boundaries_of_color(Color::A)[0];
    let region = boundary_face_disk(&lat, b, lat.boundaries[b].faces[0], 1);
    let closed = loop_stabilizer(&sc.original, &region).unwrap();
    let ring = ring_order(&lat, &closed).unwrap();
    println!("ring len {}", ring.len());
    let rows: Vec<Vec<u8>> = sc.measured.ops.iter().map(|o| o.symplectic_vec()).collect();
    let span = RowSpace::new(&ModMat::from_rows(4, &rows));
    for from in 0..ring.len() {
        for len in 3..ring.len()-2 {
            let mask = arc_mask(sc.original.n, &ring, from, (from+len)%ring.len());
            let open = surface_string(&sc.original, &region, Some(&mask)).unwrap();
            let o2 = open.power(2);
            let in_edges = span.contains(&o2.symplectic_vec());
            let in_cond = in_group(&o2, &sc.condensed);
            if in_edges || (from < 3 && len < 8) {
                println!("from {} len {}: in_edges {} in_condensed {}", from, len, in_edges, in_cond);
            }
        }
    }
}
