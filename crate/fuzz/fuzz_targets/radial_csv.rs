#![no_main]

use libfuzzer_sys::fuzz_target;
use selfdual_vortex::io::parse_radial_csv;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(samples) = parse_radial_csv(text) {
            assert!(samples.t.windows(2).all(|w| w[0] < w[1]));
        }
    }
});
