use gasket::selftest::{p1_check, criterion_1, library_blocks};
use gasket::words::TernaryWord;
use gasket::Result;

#[test]
fn library_table_passes() {
    assert!(p1_check(&library_blocks, 16).pass);
    assert!(criterion_1(&library_blocks).pass);
}

#[test]
fn corrupted_table_is_caught() {
    // raise the last digit of eps_5 from 0 to 1
    let corrupt = |n: u32| -> Result<TernaryWord> {
        let w = library_blocks(n)?;
        if n == 5 {
            w.inc_last()
        } else {
            Ok(w)
        }
    };
    let p1 = p1_check(&corrupt, 16);
    assert!(!p1.pass);
    assert!(p1.detail.contains("[4, 5]"), "{}", p1.detail);
}
