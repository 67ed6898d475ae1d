#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(model) = lapssl::gcn::decode_checkpoint(data) {
        assert_eq!(lapssl::gcn::encode_checkpoint(&model), data);
    }
});
