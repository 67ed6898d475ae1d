#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(m) = lapssl::data::parse_dense_csv(text) {
            let back = lapssl::data::parse_dense_csv(&lapssl::data::dense_to_csv(&m)).unwrap();
            assert_eq!(back.shape(), m.shape());
        }
    }
});
