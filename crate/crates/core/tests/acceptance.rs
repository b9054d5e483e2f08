//! One line per acceptance criterion; exits nonzero if any fails.

use gasket::selftest::{self, library_blocks, CheckResult};

fn main() {
    let blocks = &library_blocks;
    let results: Vec<CheckResult> = vec![
        selftest::criterion_1(blocks),
        selftest::criterion_2(),
        selftest::criterion_3(),
        selftest::criterion_4(),
        selftest::criterion_5(),
        selftest::criterion_6(),
        selftest::criterion_7(),
        selftest::criterion_8(),
        selftest::criterion_9(),
        selftest::criterion_10(),
        selftest::criterion_11(),
    ];
    let mut failed = 0;
    for r in &results {
        let tag = if r.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {:>2} {:<28} {} ({} ms)", r.id, r.name, r.detail, r.elapsed_ms);
        failed += usize::from(!r.pass);
    }
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
