#![no_main]

use libfuzzer_sys::fuzz_target;

use gtheory::dstudy::{dependability, dstudy_grid, g_coefficient};
use gtheory::gstudy::{Components, VarianceComponents};

// Component sets arrive as JSON files for reliability projection. Whatever
// values deserialize, projection must return an error rather than panic.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(components) = serde_json::from_str::<Components>(text) {
        let _ = g_coefficient(&components, 1, 1);
        let _ = dependability(&components, 3, 7);
        let _ = dstudy_grid(&components, &[1, 2, 5], &[1, 8, 25]);
    }
    if let Ok(vc) = serde_json::from_str::<VarianceComponents>(text) {
        let _ = dstudy_grid(&vc.estimates(), &[1, 5], &[1, 8]);
    }
});
