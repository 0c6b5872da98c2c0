//! Sizes of the hyperbolic cross and the anchored sets that can grow from it.

use holobench::multiindex::{addable, hci_index_set, hci_size_bound, is_anchored};

fn main() -> holobench::Result<()> {
    println!("{:>3} {:>7} {:>14}", "n", "|Λ|", "bound");
    for n in [1, 2, 4, 8, 16, 32, 64] {
        let set = hci_index_set(n)?;
        println!("{n:>3} {:>7} {:>14.3e}", set.len(), hci_size_bound(n));
    }

    let set = hci_index_set(6)?;
    println!("\nhci(6), anchored = {}:", is_anchored(&set));
    for nu in set.iter() {
        println!("  {:?}", nu.to_dense(6));
    }
    println!("indices that keep it anchored (first 3 dims):");
    for nu in addable(&set, 3) {
        println!("  {:?}", nu.to_dense(3));
    }
    Ok(())
}
