use std::process::ExitCode;

use ffiwasawa::corpus;

fn main() -> ExitCode {
    let report = corpus::run("");
    let mut criteria = report.criteria;
    criteria.push(corpus::determinism("", &[1, 8]).expect("thread pools"));
    for c in &criteria {
        println!("criterion {} {}: {}", c.id, c.name, if c.pass { "PASS" } else { "FAIL" });
        if !c.pass {
            println!("  {}", c.detail);
        }
    }
    if criteria.iter().all(|c| c.pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
