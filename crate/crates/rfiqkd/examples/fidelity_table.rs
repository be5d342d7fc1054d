//! Read a POVM document from disk and print per-channel process
//! fidelities against the ideal passive receiver.

use std::path::Path;

use rfiqkd::io::{fidelity_table, read_povm_document};

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/sample_receiver_povm.txt");
    let povm = read_povm_document(&path).expect("sample document parses");

    println!("loaded {}", path.display());
    println!("\nchannel  fidelity_to_ideal");
    for row in fidelity_table(&povm, None).expect("valid POVM") {
        println!("{:<7}  {:.6}", row.channel, row.to_ideal);
    }
}
