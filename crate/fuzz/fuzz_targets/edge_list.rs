#![no_main]

use hnw_core::edgelist::{parse_edge_list, read_edge_list, write_edge_list};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(g) = read_edge_list(data) else {
        return;
    };
    g.validate().expect("parsed graph violates invariants");
    let mut out = Vec::new();
    write_edge_list(&g, &mut out).unwrap();
    let back = parse_edge_list(std::str::from_utf8(&out).unwrap()).expect("written list reparses");
    assert_eq!(back, g);
});
