mod common;

use common::{declared_label, LISTINGS, SCOPE_SUITE};

#[test]
fn listings() {
    assert!(declared_label(&LISTINGS[0]));
    assert!(!declared_label(&LISTINGS[1]));
}

#[test]
fn handcrafted_cases() {
    let wrong: Vec<&str> = SCOPE_SUITE
        .iter()
        .filter(|c| declared_label(c) != c.declared)
        .map(|c| c.text)
        .collect();
    assert!(wrong.is_empty(), "{wrong:#?}");
}
