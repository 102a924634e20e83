//! Shared inputs for the benchmarks under `benches/`.

use centnorm::simulation::seeded_normals;

/// `n` standard normals with the last `outliers` moved to 10.
pub fn contaminated_normals(n: usize, outliers: usize, seed: u64) -> Vec<f64> {
    let mut x = seeded_normals(n, seed);
    for v in x.iter_mut().rev().take(outliers) {
        *v = 10.0;
    }
    x
}

/// Lognormal sample of size `n`.
pub fn lognormal(n: usize, seed: u64) -> Vec<f64> {
    seeded_normals(n, seed).into_iter().map(f64::exp).collect()
}
