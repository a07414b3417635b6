#![no_main]
use libfuzzer_sys::fuzz_target;
use omnidepth_core::io::{decode_points, encode_points_binary};

fuzz_target!(|data: &[u8]| {
    if let Ok(points) = decode_points(data) {
        // binary re-encoding is lossless for anything that decoded from binary
        if data.starts_with(omnidepth_core::io::POINTS_MAGIC) {
            assert_eq!(encode_points_binary(&points), data);
        }
    }
});
