//! Verify every catalog entry that declares integrals and compare with the
//! declared outcome.
//!
//! Run with:
//!   cargo run --example superintegrability

use hamverify::catalog::catalog_entries;
use hamverify::integrability::{verify, VerifyConfig};

fn main() {
    println!("{:<20} {:>2} {:>2} {:>4}  {:<8} failed", "system", "m", "n", "k", "verdict");
    for e in catalog_entries() {
        let Some(expected) = &e.expected else { continue };
        let mut cfg = VerifyConfig::new(e.system.m);
        cfg.sampling = e.sampling.clone();
        let v = verify(&e.system, &cfg).unwrap();
        let k = v.corank.as_ref().map_or("-".to_string(), |c| c.k.to_string());
        let failed = v.failed_checks();
        let declared: Vec<&str> = expected.failing.iter().map(|c| c.name()).collect();
        let agrees = if failed == declared { "" } else { "  (differs from declared)" };
        println!(
            "{:<20} {:>2} {:>2} {:>4}  {:<8} {:?}{agrees}",
            e.name,
            v.m,
            v.n,
            k,
            if v.pass { "pass" } else { "fail" },
            failed
        );
    }
}
