//! Writes a synthetic profiles file.
//!
//! cargo run -p atlas-core --example synth -- <researchers> <pubs-each> <seed> <out.json>

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() != 4 {
        eprintln!("usage: synth <researchers> <pubs-each> <seed> <out.json>");
        std::process::exit(2);
    }
    let n: usize = args[0].parse().expect("researchers");
    let pubs: usize = args[1].parse().expect("pubs-each");
    let seed: u64 = args[2].parse().expect("seed");
    let set = atlas_core::synth::synthetic_profiles(n, pubs, seed);
    if let Err(e) = set.save(&args[3]) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
