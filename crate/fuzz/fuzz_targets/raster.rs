#![no_main]
use libfuzzer_sys::fuzz_target;
use omnidepth_core::io::{decode_raster, encode_raster};

fuzz_target!(|data: &[u8]| {
    if let Ok(map) = decode_raster(data) {
        let again = decode_raster(&encode_raster(&map)).unwrap();
        assert_eq!(map, again);
    }
});
