#![no_main]

use libfuzzer_sys::fuzz_target;
use selfdual_vortex::io::parse_field_csv;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(field) = parse_field_csv(text) {
            assert_eq!(field.values.len(), field.grid.len());
        }
    }
});
