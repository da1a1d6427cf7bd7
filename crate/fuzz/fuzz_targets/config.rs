#![no_main]

use hnw_cli::config::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = RunConfig::from_toml_str(text) else {
        return;
    };
    _ = cfg.validate_single();
    _ = cfg.sweep_grids();
    let echoed = cfg.to_toml_string();
    let back = RunConfig::from_toml_str(&echoed).expect("echoed config reparses");
    assert_eq!(back.to_toml_string(), echoed);
});
