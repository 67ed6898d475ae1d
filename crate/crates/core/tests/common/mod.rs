#![allow(dead_code)]

pub mod checks;

use lapssl::data::{make_split, synth_sbm, Dataset, SplitSpec};
use lapssl::DenseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Block-model graph whose binary features lean towards the node's block.
pub fn toy_dataset(blocks: &[usize], dims: usize, seed: u64, split: SplitSpec) -> Dataset {
    let (graph, labels) = synth_sbm(blocks, 0.3, 0.02, seed).unwrap();
    let classes = blocks.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let features = DenseMatrix::from_fn(labels.len(), dims, |i, j| {
        let p = if j % classes == labels[i] { 0.4 } else { 0.1 };
        if rng.random::<f64>() < p {
            1.0
        } else {
            0.0
        }
    });
    let split = make_split(&labels, classes, &split).unwrap();
    let n = labels.len();
    let mut ds = Dataset {
        features,
        labels,
        graph,
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
        class_names: (0..classes).map(|c| format!("c{c}")).collect(),
        node_ids: (0..n).map(|i| i.to_string()).collect(),
    };
    ds.set_split(split);
    ds
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}
