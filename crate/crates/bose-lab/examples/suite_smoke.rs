use bose_lab::suites::{run_suite, SuiteConfig, SuiteName};

fn main() {
    let names = std::env::args().nth(1).unwrap_or_else(|| "fields".into());
    let q: u64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(3);
    let cfg = SuiteConfig { q, ..Default::default() };
    for n in names.split(',') {
        let name: SuiteName = n.parse().unwrap();
        match run_suite(name, &cfg) {
            Ok(rep) => {
                println!("{}", rep.summary());
                for c in &rep.checks {
                    println!("  [{}] {}: {}", if c.ok { "ok" } else { "FAIL" }, c.name, c.detail);
                }
            }
            Err(e) => println!("suite {n}: error {e}"),
        }
    }
}
