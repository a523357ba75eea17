//! Fixed decoding workloads shared by the benchmarks.

use spheredec::linalg::lower_triangularize;
use spheredec::reduction::{lll_reduce, DEFAULT_DELTA};
use spheredec::sampling::{pam_transmit, seeded_gaussian_matrix, Purpose, Seed, VoronoiSampler};
use spheredec::{DecoderConfig, LowerTriangularPair};

const SEED: Seed = Seed(7);

/// A basis with received vectors to decode against it.
pub struct Workload {
    pub pair: LowerTriangularPair,
    pub inputs: Vec<Vec<f64>>,
    pub levels: Option<i64>,
}

impl Workload {
    pub fn config(&self, label: u8) -> DecoderConfig {
        DecoderConfig::from_label(label, self.levels.map(|l| (0, l - 1))).expect("valid label")
    }
}

/// LLL-reduced Gaussian lattice with Voronoi-uniform inputs.
pub fn lattice(n: usize, vectors: usize) -> Workload {
    let g = seeded_gaussian_matrix(n, SEED, 0);
    let g = lll_reduce(&g, DEFAULT_DELTA).expect("full rank").g_reduced;
    let pair = lower_triangularize(&g).expect("full rank");
    let mut sampler = VoronoiSampler::new(&pair);
    let inputs = (0..vectors as u64)
        .map(|v| sampler.sample(&mut SEED.stream(Purpose::Vector, n, 0, v)))
        .collect();
    Workload { pair, inputs, levels: None }
}

/// L-PAM over a Gaussian channel at `snr_db`, already rotated to triangular
/// coordinates.
pub fn pam(n: usize, levels: u32, snr_db: f64, vectors: usize) -> Workload {
    let g = seeded_gaussian_matrix(n, SEED, 0);
    let mut pair = None;
    let inputs = (0..vectors as u64)
        .map(|v| {
            let (p, r) = pam_transmit(&g, levels, snr_db, SEED, 0, v).triangular().expect("full rank");
            pair.get_or_insert(p);
            r
        })
        .collect();
    Workload {
        pair: pair.expect("at least one vector"),
        inputs,
        levels: Some(i64::from(levels)),
    }
}
