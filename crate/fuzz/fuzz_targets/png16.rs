#![no_main]
use libfuzzer_sys::fuzz_target;
use omnidepth_core::io::{decode_png16, encode_png16};
use omnidepth_core::raster::MapKind;

fuzz_target!(|data: &[u8]| {
    if let Ok(map) = decode_png16(data, MapKind::Depth) {
        let (bytes, saturated) = encode_png16(&map).unwrap();
        assert_eq!(saturated, 0);
        assert_eq!(decode_png16(&bytes, MapKind::Depth).unwrap(), map);
    }
});
