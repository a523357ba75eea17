//! Measurement campaigns: decode the same vectors with an old and a new
//! algorithm, total their operation counts per generator matrix and report
//! the mean over matrices of the ratio of totals.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::counting::{OpCounter, OpKind};
use crate::decoder::{DecodeError, DecoderConfig, SphereDecoder};
use crate::linalg::{lower_triangularize, triangularize_with_rotation, LinalgError};
use crate::reduction::{lll_reduce, ReductionError};
use crate::sampling::{pam_transmit, seeded_gaussian_matrix, Purpose, Seed, VoronoiSampler};

/// Unreduced lattice decoding beyond this dimension needs `allow_slow`.
pub const SLOW_UNREDUCED_DIM: usize = 40;

pub const CSV_HEADER: &str = "family,n,L,snr_db,reduce,algo_old,algo_new,metric,gain,M,N,seed";
pub const RAW_CSV_HEADER: &str = "matrix_index,algo,flops,intops";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error("gain undefined: zero operation total for matrix {matrix}")]
    ZeroDenominator { matrix: usize },
    #[error("gain needs equally many old and new totals ({old} vs {new})")]
    LengthMismatch { old: usize, new: usize },
    #[error(transparent)]
    Mismatch(Box<Mismatch>),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Two paired algorithms returned different points for the same input.
#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub seed: u64,
    pub n: usize,
    pub matrix_index: usize,
    pub vector_index: usize,
    pub algo_old: u8,
    pub algo_new: u8,
    pub r: Vec<f64>,
    pub u_old: Vec<i64>,
    pub u_new: Vec<i64>,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "algorithms {} and {} disagree (seed {}, n {}, matrix {}, vector {}): r = {:?}, u_old = {:?}, u_new = {:?}",
            self.algo_old,
            self.algo_new,
            self.seed,
            self.n,
            self.matrix_index,
            self.vector_index,
            self.r,
            self.u_old,
            self.u_new
        )
    }
}

impl std::error::Error for Mismatch {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Lattice,
    Finite { levels: u32, snr_db: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reduce {
    None,
    Lll { delta: f64 },
}

/// Number of received vectors `N` per generator matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorSchedule {
    /// `max(20, round(20000 / n^2))`.
    Default,
    Fixed(usize),
}

impl VectorSchedule {
    pub fn vectors_for(&self, n: usize) -> usize {
        match *self {
            VectorSchedule::Default => {
                let n2 = (n * n) as f64;
                20usize.max((20000.0 / n2).round() as usize)
            }
            VectorSchedule::Fixed(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AlgorithmPair {
    pub old: u8,
    pub new: u8,
}

impl AlgorithmPair {
    pub fn new(old: u8, new: u8) -> Self {
        AlgorithmPair { old, new }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Flops,
    Intops,
}

impl Metric {
    pub fn kind(&self) -> OpKind {
        match self {
            Metric::Flops => OpKind::Flop,
            Metric::Intops => OpKind::Intop,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Metric::Flops => "flops",
            Metric::Intops => "intops",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub family: Family,
    pub dims: Vec<usize>,
    pub m_matrices: usize,
    pub n_vectors: VectorSchedule,
    pub reduce: Reduce,
    pub pairs: Vec<AlgorithmPair>,
    pub seed: Seed,
    pub allow_slow: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Invalid(m));
        if self.dims.is_empty() {
            return bad("no dimensions given".into());
        }
        if self.dims.contains(&0) {
            return bad("dimension 0".into());
        }
        if self.m_matrices == 0 {
            return bad("M must be at least 1".into());
        }
        if self.m_matrices >= 1 << 28 {
            return bad("M too large".into());
        }
        for &n in &self.dims {
            let v = self.n_vectors.vectors_for(n);
            if v == 0 || v >= 1 << 28 {
                return bad(format!("N = {v} for n = {n} out of range"));
            }
        }
        if self.pairs.is_empty() {
            return bad("no algorithm pairs".into());
        }
        let finite = matches!(self.family, Family::Finite { .. });
        for p in &self.pairs {
            for a in [p.old, p.new] {
                if !(1..=8).contains(&a) {
                    return bad(format!("unknown algorithm {a}"));
                }
                if (a % 2 == 0) != finite {
                    return bad(format!(
                        "algorithm {a} does not decode the {} family",
                        if finite { "finite" } else { "lattice" }
                    ));
                }
            }
        }
        match self.family {
            Family::Finite { levels, snr_db } => {
                if levels < 2 {
                    return bad("PAM needs L >= 2".into());
                }
                if !snr_db.is_finite() {
                    return bad("SNR must be finite".into());
                }
                if matches!(self.reduce, Reduce::Lll { .. }) {
                    return bad("LLL reduction does not preserve a finite constellation".into());
                }
            }
            Family::Lattice => {
                if self.reduce == Reduce::None && !self.allow_slow {
                    if let Some(&n) = self.dims.iter().find(|&&n| n > SLOW_UNREDUCED_DIM) {
                        return bad(format!(
                            "unreduced lattice decoding at n = {n} > {SLOW_UNREDUCED_DIM} needs allow_slow"
                        ));
                    }
                }
            }
        }
        if let Reduce::Lll { delta } = self.reduce {
            if !(delta > 0.25 && delta <= 1.0) {
                return bad(format!("LLL delta {delta} outside (1/4, 1]"));
            }
        }
        Ok(())
    }

    fn algorithms(&self) -> Vec<u8> {
        let set: BTreeSet<u8> = self.pairs.iter().flat_map(|p| [p.old, p.new]).collect();
        set.into_iter().collect()
    }

    fn range(&self) -> Option<(i64, i64)> {
        match self.family {
            Family::Lattice => None,
            Family::Finite { levels, .. } => Some((0, i64::from(levels) - 1)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainCell {
    pub n: usize,
    pub pair: AlgorithmPair,
    pub metric: Metric,
    pub gain: f64,
    pub m_matrices: usize,
    pub n_vectors: usize,
}

/// Operation totals of one algorithm over the `N` vectors of one matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawTotal {
    pub n: usize,
    /// Index within the dimension, `0..M`.
    pub matrix: usize,
    pub algo: u8,
    pub totals: OpCounter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainReport {
    pub spec: ExperimentSpec,
    pub cells: Vec<GainCell>,
    pub raw: Vec<RawTotal>,
}

/// Mean over matrices of `sum_i ops_old / sum_i ops_new`.
pub fn gain(ops_old: &[u64], ops_new: &[u64]) -> Result<f64, ExperimentError> {
    if ops_old.len() != ops_new.len() || ops_old.is_empty() {
        return Err(ExperimentError::LengthMismatch {
            old: ops_old.len(),
            new: ops_new.len(),
        });
    }
    let mut acc = 0.0;
    for (matrix, (&o, &n)) in ops_old.iter().zip(ops_new).enumerate() {
        if n == 0 {
            return Err(ExperimentError::ZeroDenominator { matrix });
        }
        acc += o as f64 / n as f64;
    }
    Ok(acc / ops_old.len() as f64)
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<GainReport, ExperimentError> {
    spec.validate()?;
    let algos = spec.algorithms();
    let configs: Vec<DecoderConfig> = algos
        .iter()
        .map(|&a| DecoderConfig::from_label(a, spec.range()))
        .collect::<Result<_, _>>()?;

    let mut cells = Vec::new();
    let mut raw = Vec::new();
    for &n in &spec.dims {
        let n_vectors = spec.n_vectors.vectors_for(n);
        let per_matrix: Vec<Vec<OpCounter>> = (0..spec.m_matrices)
            .into_par_iter()
            .map(|j| run_matrix(spec, &algos, &configs, n, j, n_vectors))
            .collect::<Result<_, _>>()?;

        for (j, totals) in per_matrix.iter().enumerate() {
            for (&algo, &t) in algos.iter().zip(totals) {
                raw.push(RawTotal {
                    n,
                    matrix: j,
                    algo,
                    totals: t,
                });
            }
        }
        let column = |algo: u8, metric: Metric| -> Vec<u64> {
            let k = algos.iter().position(|&a| a == algo).expect("paired algorithm");
            per_matrix.iter().map(|t| t[k].get(metric.kind())).collect()
        };
        for &pair in &spec.pairs {
            for metric in [Metric::Flops, Metric::Intops] {
                let g = gain(&column(pair.old, metric), &column(pair.new, metric))?;
                cells.push(GainCell {
                    n,
                    pair,
                    metric,
                    gain: g,
                    m_matrices: spec.m_matrices,
                    n_vectors,
                });
            }
        }
    }
    Ok(GainReport {
        spec: spec.clone(),
        cells,
        raw,
    })
}

/// Decodes the `N` vectors of matrix `j` with every algorithm and returns
/// their totals in `algos` order.
fn run_matrix(
    spec: &ExperimentSpec,
    algos: &[u8],
    configs: &[DecoderConfig],
    n: usize,
    j: usize,
    n_vectors: usize,
) -> Result<Vec<OpCounter>, ExperimentError> {
    let seed = spec.seed;
    let mut basis = seeded_gaussian_matrix(n, seed, j as u64);
    let mut totals = vec![OpCounter::default(); algos.len()];
    let mut results: Vec<Vec<i64>> = vec![Vec::new(); algos.len()];

    let check_pairs = |r: &[f64], results: &[Vec<i64>], v: usize| -> Result<(), ExperimentError> {
        for p in &spec.pairs {
            let ko = algos.iter().position(|&a| a == p.old).unwrap();
            let kn = algos.iter().position(|&a| a == p.new).unwrap();
            if results[ko] != results[kn] {
                return Err(ExperimentError::Mismatch(Box::new(Mismatch {
                    seed: seed.0,
                    n,
                    matrix_index: j,
                    vector_index: v,
                    algo_old: p.old,
                    algo_new: p.new,
                    r: r.to_vec(),
                    u_old: results[ko].clone(),
                    u_new: results[kn].clone(),
                })));
            }
        }
        Ok(())
    };

    match spec.family {
        Family::Lattice => {
            if let Reduce::Lll { delta } = spec.reduce {
                basis = lll_reduce(&basis, delta)?.g_reduced;
            }
            let pair = lower_triangularize(&basis)?;
            let mut sampler = VoronoiSampler::new(&pair);
            let mut decoders: Vec<SphereDecoder> = configs
                .iter()
                .map(|&c| SphereDecoder::new(c, &pair))
                .collect::<Result<_, _>>()?;
            for v in 0..n_vectors {
                let mut rng = seed.stream(Purpose::Vector, n, j as u64, v as u64);
                let r = sampler.sample(&mut rng);
                for (k, dec) in decoders.iter_mut().enumerate() {
                    let res = dec.decode(&r)?;
                    totals[k] += res.counters;
                    results[k] = res.u_hat;
                }
                check_pairs(&r, &results, v)?;
            }
        }
        Family::Finite { levels, snr_db } => {
            let tri = triangularize_with_rotation(&basis)?;
            let mut decoders: Vec<SphereDecoder> = configs
                .iter()
                .map(|&c| SphereDecoder::new(c, &tri.pair))
                .collect::<Result<_, _>>()?;
            for v in 0..n_vectors {
                let inst = pam_transmit(&basis, levels, snr_db, seed, j as u64, v as u64);
                let r = tri.rotate(&inst.r)?;
                for (k, dec) in decoders.iter_mut().enumerate() {
                    let res = dec.decode(&r)?;
                    totals[k] += res.counters;
                    results[k] = res.u_hat;
                }
                check_pairs(&r, &results, v)?;
            }
        }
    }
    Ok(totals)
}

impl GainReport {
    pub fn cell(&self, n: usize, pair: AlgorithmPair, metric: Metric) -> Option<&GainCell> {
        self.cells
            .iter()
            .find(|c| c.n == n && c.pair == pair && c.metric == metric)
    }

    pub fn gain(&self, n: usize, pair: AlgorithmPair, metric: Metric) -> Option<f64> {
        self.cell(n, pair, metric).map(|c| c.gain)
    }

    /// Per-matrix totals of `algo` at dimension `n`, in matrix order.
    pub fn totals(&self, n: usize, algo: u8) -> Vec<OpCounter> {
        self.raw
            .iter()
            .filter(|t| t.n == n && t.algo == algo)
            .map(|t| t.totals)
            .collect()
    }

    /// Sum over all matrices of `algo` at dimension `n`.
    pub fn grand_total(&self, n: usize, algo: u8) -> OpCounter {
        self.totals(n, algo)
            .into_iter()
            .fold(OpCounter::default(), |a, b| a + b)
    }

    /// Recomputes every cell from the raw totals.
    pub fn recompute(&self) -> Result<Vec<f64>, ExperimentError> {
        self.cells
            .iter()
            .map(|c| {
                let col = |algo| -> Vec<u64> {
                    self.totals(c.n, algo)
                        .iter()
                        .map(|t| t.get(c.metric.kind()))
                        .collect()
                };
                gain(&col(c.pair.old), &col(c.pair.new))
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let spec = &self.spec;
        let (family, levels, snr) = match spec.family {
            Family::Lattice => ("lattice", String::new(), String::new()),
            Family::Finite { levels, snr_db } => ("finite", levels.to_string(), format!("{snr_db}")),
        };
        let reduce = match spec.reduce {
            Reduce::None => "none",
            Reduce::Lll { .. } => "lll",
        };
        let mut s = String::new();
        s.push_str(CSV_HEADER);
        s.push('\n');
        for c in &self.cells {
            let _ = writeln!(
                s,
                "{family},{},{levels},{snr},{reduce},{},{},{},{},{},{},{}",
                c.n,
                c.pair.old,
                c.pair.new,
                c.metric.name(),
                c.gain,
                c.m_matrices,
                c.n_vectors,
                spec.seed.0
            );
        }
        s
    }

    /// Raw totals. `matrix_index` runs over all dimensions in order:
    /// `dim_position * M + j`.
    pub fn raw_csv(&self) -> String {
        let m = self.spec.m_matrices;
        let mut s = String::new();
        s.push_str(RAW_CSV_HEADER);
        s.push('\n');
        for t in &self.raw {
            let pos = self.spec.dims.iter().position(|&n| n == t.n).unwrap_or(0);
            let _ = writeln!(
                s,
                "{},{},{},{}",
                pos * m + t.matrix,
                t.algo,
                t.totals.flops,
                t.totals.intops
            );
        }
        s
    }

    /// Writes the gain table to `path` and the raw totals next to it with the
    /// extension replaced by `.raw.csv`. Returns the raw file's path.
    pub fn write_csv(&self, path: &Path) -> Result<PathBuf, ExperimentError> {
        std::fs::write(path, self.to_csv())?;
        let raw_path = raw_path_for(path);
        std::fs::write(&raw_path, self.raw_csv())?;
        Ok(raw_path)
    }
}

pub fn raw_path_for(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.raw.csv"))
}
