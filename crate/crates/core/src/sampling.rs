//! Random instance generation.
//!
//! All randomness comes from ChaCha12 keyed by the experiment seed and the
//! dimension. Each logical stream (a matrix, one received vector, ...) gets its
//! own ChaCha stream id derived from its indices, so a trial draws the same
//! numbers no matter which worker runs it or in what order. Normal variates use the
//! ziggurat sampler of `rand_distr::StandardNormal`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::decoder::{BasisForm, DecoderConfig, Domain, SphereDecoder, Strategy};
use crate::linalg::{triangularize_with_rotation, LinalgError, LowerTriangularPair, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed(pub u64);

/// What a stream is used for; keeps streams of different purposes disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    Matrix = 1,
    Vector = 2,
    Symbols = 3,
    Noise = 4,
    Verify = 5,
}

impl Seed {
    /// Generator for `(purpose, dim, a, b)`. The key is `seed || dim`, the
    /// ChaCha stream id `purpose << 56 | a << 28 | b`; `a` and `b` must be
    /// below `2^28`.
    pub fn stream(&self, purpose: Purpose, dim: usize, a: u64, b: u64) -> ChaCha12Rng {
        assert!(a < 1 << 28 && b < 1 << 28, "stream index out of range");
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.0.to_le_bytes());
        key[8..16].copy_from_slice(&(dim as u64).to_le_bytes());
        let mut rng = ChaCha12Rng::from_seed(key);
        rng.set_stream(((purpose as u64) << 56) | (a << 28) | b);
        rng
    }
}

pub fn random_gaussian_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(n, n, |_, _| StandardNormal.sample(rng))
}

/// Gaussian `n x n` matrix number `index` of the experiment seeded by `seed`.
pub fn seeded_gaussian_matrix(n: usize, seed: Seed, index: u64) -> Matrix {
    random_gaussian_matrix(n, &mut seed.stream(Purpose::Matrix, n, index, 0))
}

/// Uniform sampler over the Voronoi region of the origin.
///
/// Draws `w` uniform in `[0,1)^n`, forms `x = w G` (uniform over a fundamental
/// parallelotope), finds the closest lattice point `c G` with the old
/// H-based decoder and returns `x - c G`. The fold preserves uniformity
/// because the parallelotope and the Voronoi cell are both fundamental
/// regions.
pub struct VoronoiSampler<'a> {
    pair: &'a LowerTriangularPair,
    decoder: SphereDecoder<'a>,
}

impl<'a> VoronoiSampler<'a> {
    pub fn new(pair: &'a LowerTriangularPair) -> Self {
        let cfg = DecoderConfig::new(BasisForm::H, Strategy::Old, Domain::Lattice);
        let decoder = SphereDecoder::new(cfg, pair).expect("valid lattice configuration");
        VoronoiSampler { pair, decoder }
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<f64> {
        let n = self.pair.dim();
        let w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let x = self.pair.g().left_mul(&w);
        let c = self
            .decoder
            .decode(&x)
            .expect("finite input of matching dimension")
            .u_hat;
        let cg = self.pair.g().combine(&c);
        x.iter().zip(&cg).map(|(a, b)| a - b).collect()
    }
}

pub fn uniform_voronoi_sample<R: Rng + ?Sized>(pair: &LowerTriangularPair, rng: &mut R) -> Vec<f64> {
    VoronoiSampler::new(pair).sample(rng)
}

/// Average energy of the centered L-PAM set `{-(L-1)/2, ..., (L-1)/2}`.
pub fn pam_symbol_energy(levels: u32) -> f64 {
    let l = f64::from(levels);
    (l * l - 1.0) / 12.0
}

pub fn pam_bit_energy(levels: u32) -> f64 {
    pam_symbol_energy(levels) / f64::from(levels).log2()
}

/// Per-dimension noise variance `N0 / 2` for `Eb/N0 = snr_db`.
pub fn pam_noise_variance(levels: u32, snr_db: f64) -> f64 {
    let n0 = pam_bit_energy(levels) / 10f64.powf(snr_db / 10.0);
    n0 / 2.0
}

/// One transmission of `u_true` over `r = s G + noise`, where `s = u_true -
/// (L-1)/2` is the centered PAM symbol vector.
///
/// `r` is stored in integer coordinates, `r = u_true G + noise`, i.e. the
/// received vector with the constellation offset `(L-1)/2 * sum of rows of G`
/// added back so decoders can search `{0, ..., L-1}^n` directly.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelInstance {
    pub g: Matrix,
    pub levels: u32,
    pub u_true: Vec<i64>,
    pub r: Vec<f64>,
}

impl ChannelInstance {
    /// The physical received vector for the centered constellation.
    pub fn centered_received(&self) -> Vec<f64> {
        let offset = f64::from(self.levels - 1) / 2.0;
        let ones = vec![offset; self.g.rows()];
        let shift = self.g.left_mul(&ones);
        self.r.iter().zip(&shift).map(|(a, b)| a - b).collect()
    }

    /// Lower-triangular generator and `r` rotated into its coordinates.
    pub fn triangular(&self) -> Result<(LowerTriangularPair, Vec<f64>), LinalgError> {
        let t = triangularize_with_rotation(&self.g)?;
        let r = t.rotate(&self.r)?;
        Ok((t.pair, r))
    }

    pub fn u_range(&self) -> (i64, i64) {
        (0, i64::from(self.levels) - 1)
    }
}

/// Draws a channel instance. The channel matrix is stream `(n, matrix)`;
/// symbols and noise for vector `vector` use their own streams.
pub fn pam_channel_instance(
    n: usize,
    levels: u32,
    snr_db: f64,
    seed: Seed,
    matrix: u64,
    vector: u64,
) -> ChannelInstance {
    let g = seeded_gaussian_matrix(n, seed, matrix);
    pam_transmit(&g, levels, snr_db, seed, matrix, vector)
}

/// Transmits one random symbol vector over a given channel matrix.
pub fn pam_transmit(
    g: &Matrix,
    levels: u32,
    snr_db: f64,
    seed: Seed,
    matrix: u64,
    vector: u64,
) -> ChannelInstance {
    assert!(levels >= 2, "PAM needs at least two levels");
    let n = g.rows();
    let mut sym_rng = seed.stream(Purpose::Symbols, n, matrix, vector);
    let u_true: Vec<i64> = (0..n)
        .map(|_| sym_rng.gen_range(0..i64::from(levels)))
        .collect();
    let sigma = pam_noise_variance(levels, snr_db).sqrt();
    let mut noise_rng = seed.stream(Purpose::Noise, n, matrix, vector);
    let clean = g.combine(&u_true);
    let r = clean
        .iter()
        .map(|x| {
            let z: f64 = StandardNormal.sample(&mut noise_rng);
            x + sigma * z
        })
        .collect();
    ChannelInstance {
        g: g.clone(),
        levels,
        u_true,
        r,
    }
}
