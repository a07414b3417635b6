#![no_main]
use libfuzzer_sys::fuzz_target;
use omnidepth_core::io::parse_config;

fuzz_target!(|data: &[u8]| {
    if let Ok(cfg) = parse_config(data) {
        assert_eq!(parse_config(cfg.to_toml().as_bytes()).unwrap(), cfg);
    }
});
