mod args;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use spheredec::decoder::decode;
use spheredec::experiments::{
    run_experiment, ExperimentSpec, Family, Metric, Reduce, VectorSchedule,
};
use spheredec::linalg::{
    invert_lower_triangular, lower_triangularize, triangularize_with_rotation, LowerTriangularPair,
    Matrix,
};
use spheredec::oracle::{oracle_finite, oracle_lattice};
use spheredec::reduction::DEFAULT_DELTA;
use spheredec::sampling::{seeded_gaussian_matrix, Purpose, Seed};
use spheredec::DecoderConfig;

/// Worker threads for experiments; defaults to the available parallelism.
const THREADS_ENV: &str = "SPHEREDEC_THREADS";

#[derive(Parser)]
#[command(name = "spheredec", version, about = "Schnorr-Euchner sphere decoders with operation counts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decode one received vector.
    Decode {
        /// Text matrix: header `n m`, then n rows.
        #[arg(long)]
        matrix_file: PathBuf,
        /// The file holds H = G^-1 (lower triangular) instead of G.
        #[arg(long)]
        h_form: bool,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=8))]
        algorithm: u8,
        #[arg(long, num_args = 1.., allow_negative_numbers = true, required = true)]
        r: Vec<f64>,
        #[arg(long, allow_negative_numbers = true)]
        umin: Option<i64>,
        #[arg(long, allow_negative_numbers = true)]
        umax: Option<i64>,
    },
    /// Check all eight decoders against exhaustive search on random instances.
    Verify {
        #[arg(long, default_value = "2..6")]
        dims: String,
        /// Instances per dimension. Even trials are lattice problems for
        /// algorithms 1, 3, 5, 7; odd trials are 2- or 4-PAM problems for 2, 4, 6, 8.
        #[arg(long, default_value_t = 200)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Measure old/new gains and write them as CSV.
    Experiment {
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// Constellation size for the finite family.
        #[arg(long, default_value_t = 2)]
        levels: u32,
        /// Eb/N0 in dB for the finite family.
        #[arg(long, allow_negative_numbers = true)]
        snr_db: Option<f64>,
        /// `start:step:end`, `a..b` or `a,b,c`.
        #[arg(long)]
        dims: String,
        /// Defaults to lll for the lattice family and none for the finite one.
        #[arg(long, value_enum)]
        reduce: Option<ReduceArg>,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        lll_delta: f64,
        /// Generator matrices per dimension.
        #[arg(long, default_value_t = 20)]
        m: usize,
        /// Received vectors per matrix; default max(20, round(20000/n^2)).
        #[arg(long)]
        n: Option<usize>,
        /// `old:new` pairs, e.g. `1:5,3:7`. Defaults to both pairs of the family.
        #[arg(long)]
        pairs: Option<String>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Permit unreduced lattice runs above n = 40.
        #[arg(long)]
        allow_slow: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Lattice,
    Finite,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReduceArg {
    None,
    Lll,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Decode {
            matrix_file,
            h_form,
            algorithm,
            r,
            umin,
            umax,
        } => run_decode(matrix_file, h_form, algorithm, &r, umin, umax),
        Command::Verify { dims, trials, seed } => run_verify(&dims, trials, seed),
        Command::Experiment {
            family,
            levels,
            snr_db,
            dims,
            reduce,
            lll_delta,
            m,
            n,
            pairs,
            seed,
            out,
            allow_slow,
        } => (|| {
            let family = match family {
                FamilyArg::Lattice => {
                    if snr_db.is_some() {
                        bail!("--snr-db only applies to the finite family");
                    }
                    Family::Lattice
                }
                FamilyArg::Finite => Family::Finite {
                    levels,
                    snr_db: snr_db.context("the finite family needs --snr-db")?,
                },
            };
            let finite = matches!(family, Family::Finite { .. });
            let reduce = match reduce.unwrap_or(if finite { ReduceArg::None } else { ReduceArg::Lll }) {
                ReduceArg::None => Reduce::None,
                ReduceArg::Lll => Reduce::Lll { delta: lll_delta },
            };
            let pairs = match pairs {
                Some(p) => args::parse_pairs(&p)?,
                None if finite => args::parse_pairs("2:6,4:8")?,
                None => args::parse_pairs("1:5,3:7")?,
            };
            let spec = ExperimentSpec {
                family,
                dims: args::parse_dims(&dims)?,
                m_matrices: m,
                n_vectors: n.map_or(VectorSchedule::Default, VectorSchedule::Fixed),
                reduce,
                pairs,
                seed: Seed(seed),
                allow_slow,
            };
            run_experiment_cmd(&spec, &out)
        })(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run_decode(
    path: PathBuf,
    h_form: bool,
    algorithm: u8,
    r: &[f64],
    umin: Option<i64>,
    umax: Option<i64>,
) -> Result<bool> {
    let range = match (umin, umax) {
        (Some(a), Some(b)) => Some((a, b)),
        (None, None) => None,
        _ => bail!("--umin and --umax go together"),
    };
    if algorithm % 2 == 0 && range.is_none() {
        bail!("algorithm {algorithm} decodes a finite constellation and needs --umin/--umax");
    }
    if algorithm % 2 == 1 && range.is_some() {
        bail!("algorithm {algorithm} decodes the full lattice and takes no --umin/--umax");
    }
    let cfg = DecoderConfig::from_label(algorithm, range)?;
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let m: Matrix = text.parse().with_context(|| format!("parsing {}", path.display()))?;
    if m.cols() != r.len() {
        bail!("--r has {} entries, the matrix has {} columns", r.len(), m.cols());
    }
    let (pair, r) = if h_form {
        if !m.is_square() {
            bail!("--h-form needs a square matrix");
        }
        let g = invert_lower_triangular(&m)?;
        (LowerTriangularPair::from_generator(g)?, r.to_vec())
    } else if m.is_square() && m.is_lower_triangular() && (0..m.rows()).all(|i| m[(i, i)] > 0.0) {
        (LowerTriangularPair::from_generator(m)?, r.to_vec())
    } else {
        let t = triangularize_with_rotation(&m)?;
        let rr = t.rotate(r)?;
        (t.pair, rr)
    };
    let res = decode(cfg, &pair, &r)?;
    let u: Vec<String> = res.u_hat.iter().map(i64::to_string).collect();
    println!(
        "u_hat={} dist2={} flops={} intops={}",
        u.join(" "),
        short_decimal(res.squared_distance),
        res.counters.flops,
        res.counters.intops
    );
    Ok(true)
}

/// `x` rounded to 15 significant digits, printed in shortest form. Drops the
/// accumulation noise in sums like `0.4^2 + 0.3^2 = 0.25000000000000006`.
fn short_decimal(x: f64) -> String {
    let rounded: f64 = format!("{x:.14e}").parse().expect("float formatting round-trips");
    format!("{rounded}")
}

fn run_verify(dims: &str, trials: u64, seed: u64) -> Result<bool> {
    let dims = args::parse_dims(dims)?;
    if trials == 0 {
        bail!("--trials must be at least 1");
    }
    let seed = Seed(seed);
    let (mut passed, mut total) = (0u64, 0u64);
    for &n in &dims {
        for k in 0..trials {
            let pair = lower_triangularize(&seeded_gaussian_matrix(n, seed, k))?;
            let mut rng = seed.stream(Purpose::Verify, n, k, 0);
            let finite = k % 2 == 1;
            let levels: i64 = if k % 4 == 1 { 2 } else { 4 };
            let r: Vec<f64> = if finite {
                let u: Vec<i64> = (0..n).map(|_| rng.gen_range(0..levels)).collect();
                pair.g()
                    .combine(&u)
                    .iter()
                    .map(|x| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        x + 0.5 * z
                    })
                    .collect()
            } else {
                (0..n)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        3.0 * z
                    })
                    .collect()
            };
            let oracle = if finite {
                oracle_finite(pair.g(), &r, 0, levels - 1)?
            } else {
                oracle_lattice(&pair, &r)?
            };
            let labels: [u8; 4] = if finite { [2, 4, 6, 8] } else { [1, 3, 5, 7] };
            for a in labels {
                let cfg = DecoderConfig::from_label(a, finite.then_some((0, levels - 1)))?;
                let res = decode(cfg, &pair, &r)?;
                total += 1;
                let scale = oracle.best_sq_dist.abs().max(res.squared_distance.abs());
                let same_dist = (res.squared_distance - oracle.best_sq_dist).abs() <= 1e-9 * scale;
                let same_point = oracle.margin <= 1e-6 || res.u_hat == oracle.best_u;
                if same_dist && same_point {
                    passed += 1;
                } else {
                    eprintln!(
                        "mismatch: algorithm {a}, n {n}, trial {k}, seed {}: decoder {:?} ({}) vs oracle {:?} ({})",
                        seed.0, res.u_hat, res.squared_distance, oracle.best_u, oracle.best_sq_dist
                    );
                }
            }
        }
    }
    println!("passed {passed}/{total}");
    Ok(passed == total)
}

fn run_experiment_cmd(spec: &ExperimentSpec, out: &Path) -> Result<bool> {
    spec.validate()?;
    if let Some(threads) = std::env::var_os(THREADS_ENV) {
        let threads: usize = threads
            .to_string_lossy()
            .parse()
            .with_context(|| format!("{THREADS_ENV} must be a positive integer"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring worker threads")?;
    }
    let report = run_experiment(spec)?;
    let raw = report.write_csv(out)?;
    for c in report.cells.iter().filter(|c| c.metric == Metric::Flops) {
        let intops = report.gain(c.n, c.pair, Metric::Intops).unwrap_or(f64::NAN);
        println!(
            "n={} pair={}:{} flop_gain={:.4} intop_gain={:.4} M={} N={}",
            c.n, c.pair.old, c.pair.new, c.gain, intops, c.m_matrices, c.n_vectors
        );
    }
    println!("wrote {} and {}", out.display(), raw.display());
    Ok(true)
}
