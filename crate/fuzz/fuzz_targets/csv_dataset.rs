#![no_main]
use libfuzzer_sys::fuzz_target;
use sparse_pca::data::{parse_labeled_csv, to_csv_string};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(parsed) = parse_labeled_csv(text, "fuzz") else {
        return;
    };
    // Anything accepted must survive a write/read cycle unchanged.
    let written = to_csv_string(&parsed).expect("parsed rows are labeled");
    let again = parse_labeled_csv(&written, "fuzz").expect("own output parses");
    assert_eq!(parsed, again);
});
