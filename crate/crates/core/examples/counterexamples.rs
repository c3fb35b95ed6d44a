//! Recomputes the built-in counterexample suite and prints each check.

use truthful_cascade::harness::verify_suite;

fn main() {
    let results = verify_suite(None);
    for c in &results {
        println!("{c}");
    }
    let failed = results.iter().filter(|c| !c.passed).count();
    println!("{} checks, {failed} failed", results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
