#![no_main]
use libfuzzer_sys::fuzz_target;
use omnidepth_core::io::{format_correspondences, parse_correspondences};

fuzz_target!(|data: &[u8]| {
    if let Ok(corrs) = parse_correspondences(data) {
        let again = parse_correspondences(format_correspondences(&corrs).as_bytes()).unwrap();
        assert_eq!(corrs, again);
    }
});
