#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(record) = lapssl::data::metrics_from_json(text) {
            let again = lapssl::data::metrics_to_json(&record).unwrap();
            assert!(lapssl::data::metrics_from_json(&again).is_ok());
        }
    }
});
