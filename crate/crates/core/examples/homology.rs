//! Betti numbers over Z2 of small hand-built complexes, including the
//! boundary-of-a-simplex and glued-fan witnesses.
//!
//! cargo run --example homology

use rcmplex::functionals::{euler_characteristic, make_k_p, make_l_p};
use rcmplex::homology::{betti_vector, chain_complex, rank_gf2};
use rcmplex::SimplicialComplex;

fn main() -> rcmplex::Result<()> {
    for p in 1..=3 {
        let k = make_k_p(p);
        println!("K_{p}: f = {:?}, betti = {:?}, chi = {}", k.f_vector(), betti_vector(&k, p)?, euler_characteristic(&k));
    }
    for p in 1..=2 {
        let l = make_l_p(p);
        println!("L_{p}: f = {:?}, betti = {:?}", l.f_vector(), betti_vector(&l, p)?);
    }

    // A hollow square next to a filled triangle: two components, one loop.
    let k = SimplicialComplex::from_simplices(2, [vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0], vec![10, 11, 12]])?;
    println!("square + triangle: betti = {:?}", betti_vector(&k, 2)?);

    let c = chain_complex(&k)?;
    let d1 = c.boundary(1).expect("edges present");
    println!("boundary matrix d1 is {}x{} with rank {}", d1.rows(), d1.cols(), rank_gf2(d1));
    print!("{}", d1.dump());
    Ok(())
}
