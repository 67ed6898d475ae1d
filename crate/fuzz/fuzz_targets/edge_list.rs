#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(edges) = lapssl::graph::parse_edge_list(text) {
            let n = edges.iter().map(|&(i, j, _)| i.max(j) + 1).max().unwrap_or(0);
            if n <= 4096 {
                let _ = lapssl::graph::build_graph(n, &edges, false);
            }
        }
    }
});
