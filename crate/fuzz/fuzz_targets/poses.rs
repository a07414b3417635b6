#![no_main]
use libfuzzer_sys::fuzz_target;
use omnidepth_core::io::{format_poses, parse_poses};

fuzz_target!(|data: &[u8]| {
    if let Ok(poses) = parse_poses(data) {
        let again = parse_poses(format_poses(&poses).as_bytes()).unwrap();
        assert_eq!(poses.len(), again.len());
    }
});
