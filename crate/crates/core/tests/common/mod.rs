#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vprunc::{DescriptorSet, MatchLabel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random descriptors; with `levels > 0` coordinates are quantized to that
/// many steps and a share of rows are exact duplicates, so ties are common.
pub fn random_set(rng: &mut ChaCha8Rng, n: usize, dim: usize, first_id: u64, levels: u32) -> DescriptorSet {
    let mut rows: Vec<Vec<f32>> = Vec::with_capacity(n);
    for i in 0..n {
        if levels > 0 && i > 0 && rng.random_bool(0.2) {
            let j = rng.random_range(0..i);
            rows.push(rows[j].clone());
            continue;
        }
        let mut row: Vec<f32> = (0..dim)
            .map(|_| {
                let v: f32 = rng.random_range(-1.0..1.0);
                if levels > 0 {
                    (v * levels as f32).round() / levels as f32
                } else {
                    v
                }
            })
            .collect();
        if row.iter().all(|&v| v == 0.0) {
            row[0] = 1.0;
        }
        rows.push(row);
    }
    // shuffled, non-contiguous ids
    let mut ids: Vec<u64> = (0..n as u64).map(|i| first_id + 3 * i).collect();
    for i in (1..ids.len()).rev() {
        let j = rng.random_range(0..=i);
        ids.swap(i, j);
    }
    DescriptorSet::from_rows(ids, &rows).unwrap()
}

pub fn labels_from(flags: &[bool]) -> Vec<MatchLabel> {
    flags
        .iter()
        .enumerate()
        .map(|(i, &correct)| MatchLabel {
            query_id: i as u64,
            correct,
            distance: 0.0,
        })
        .collect()
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_vprunc")
}

pub fn vprunc(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env_remove("VPRUNC_THREADS")
        .output()
        .expect("spawn vprunc")
}

pub fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

pub fn path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
