#![no_main]

use libfuzzer_sys::fuzz_target;
use selfdual_vortex::cli::RunConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(config) = RunConfig::from_toml(text) {
            let _ = config.validate();
            if let Ok(again) = config.to_toml() {
                assert_eq!(RunConfig::from_toml(&again).ok().as_ref(), Some(&config));
            }
        }
    }
});
