#![no_main]

use libfuzzer_sys::fuzz_target;

// The input holds the content file, a NUL byte, then the cites file.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let (content, cites) = text.split_once('\0').unwrap_or((text, ""));
    if let Ok(ds) = lapssl::data::parse_cora(content, cites) {
        assert_eq!(ds.labels.len(), ds.node_count());
        assert_eq!(ds.features.nrows(), ds.node_count());
    }
});
