use chiralcc::condense::*;
use chiralcc::lattice::{self, Color};
use chiralcc::linalg::{ModMat, RowSpace};
use chiralcc::pauli::PauliOperator;
use chiralcc::topo::boundary_edge_logical;
use std::collections::BTreeSet;
use std::sync::Arc;

#[test]
fn debug_restricted_group() {
    let lat = Arc::new(lattice::build_slab(2, 2, 1, Color::A).unwrap());
    let sc = condense_semion(&lat, 4, 1).unwrap();
    let b = lat.boundaries_of_color(Color::A)[0];
    let top: BTreeSet<usize> = lat.boundary_vertices_of(b).into_iter().collect();
    let restricted = subgroup_supported_on(&sc.condensed, &top);
    let site_list: Vec<usize> = top.iter().copied().collect();
    let mut quoted: Vec<PauliOperator> = Vec::new();
    for &f in &lat.boundaries[b].faces {
        let g = sc.original.generators.iter()
            .find(|g| matches!(g.source, chiralcc::codes::GeneratorSource::Face(ff) if ff == f)).unwrap();
        quoted.push(g.op.clone());
    }
    for e in 0..lat.edges.len() {
        let ed = &lat.edges[e];
        if ed.color.contains(&Color::A) && ed.vertices.iter().all(|v| top.contains(v)) {
            quoted.push(boundary_edge_logical(&lat, Color::A, e, 4, 1, 2).unwrap());
        }
    }
    let quoted_rows: Vec<Vec<u8>> = quoted.iter().map(|op| {
        let mut row = Vec::new();
        for &s in &site_list { row.push(op.x_exponent(s)); }
        for &s in &site_list { row.push(op.z_exponent(s)); }
        row
    }).collect();
    let ha = RowSpace::new(&ModMat::from_rows(4, &restricted));
    let hb = RowSpace::new(&ModMat::from_rows(4, &quoted_rows));
    println!("restricted rank {} rows {}", ha.rank(), restricted.len());
    println!("quoted rank {}", hb.rank());
    // subset check
    let missing = quoted_rows.iter().filter(|r| !ha.contains(r)).count();
    println!("quoted rows outside restricted: {}", missing);
    let extra = ha.canonical_rows().iter().filter(|r| !hb.contains(r)).count();
    println!("restricted canonical rows outside quoted: {}", extra);
    // inspect one extra element's support size
    for r in ha.canonical_rows() {
        if !hb.contains(r) {
            let n = site_list.len();
            let sup: Vec<usize> = (0..n).filter(|&i| r[i] != 0 || r[n+i] != 0).collect();
            println!("extra element weight {} exps {:?}", sup.len(),
                sup.iter().take(8).map(|&i| (r[i], r[n+i])).collect::<Vec<_>>());
        }
    }
}
