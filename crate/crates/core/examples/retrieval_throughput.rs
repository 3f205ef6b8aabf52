//! Batch-size-1 latency of exact search and of the metrics.
//!
//! `cargo run --release --example retrieval_throughput [n_refs] [dim]`
//! (defaults: 10000 x 512)

use vprunc::bench::run_bench;
use vprunc::manifest::RunManifest;
use vprunc::retrieval::{batch_throughput_probe, normalize};
use vprunc::synth::rng::PortableRng;
use vprunc::DescriptorSet;

fn random_set(n: usize, dim: usize, seed: u64) -> vprunc::Result<DescriptorSet> {
    let mut rng = PortableRng::new(seed);
    let data = (0..n * dim).map(|_| rng.normal() as f32).collect();
    normalize(&DescriptorSet::new((0..n as u64).collect(), dim, data)?)
}

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_refs: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(10_000);
    let dim: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(512);
    let refs = random_set(n_refs, dim, 1)?;

    let probe = batch_throughput_probe(&refs, 200, 10, 2)?;
    println!(
        "search {n_refs} x {dim}: mean {:.3} ms, p99 {:.3} ms, {:.0} queries/s",
        probe.mean_ms,
        probe.p99_ms,
        1e3 / probe.mean_ms
    );

    let queries = random_set(200, dim, 3)?;
    let rep = run_bench(RunManifest::new("bench"), &queries, &refs, 10, 3)?;
    for (m, t) in &rep.metrics {
        println!("{m:<4} {:.6} ms/query", t.per_query.mean_ms);
    }
    println!("rs+sd+su {:.6} ms/query", rep.rs_sd_su_combined.per_query.mean_ms);
    Ok(())
}
