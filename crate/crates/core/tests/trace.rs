mod common;

use common::{config, random_finite_received, random_pair, random_received, rng};
use proptest::prelude::*;
use spheredec::decoder::{trace_decode, Phase, Trace};
use spheredec::linalg::LowerTriangularPair;
use spheredec::{DecodeResult, DecoderConfig};

fn lattice(label: u8) -> DecoderConfig {
    DecoderConfig::from_label(label, None).unwrap()
}

fn run(cfg: DecoderConfig, pair: &LowerTriangularPair, r: &[f64]) -> (Trace, DecodeResult) {
    trace_decode(cfg, pair, r).unwrap()
}

/// `(r_i - sum_{k>i} u_k G_{k,i}) / G_{i,i}` from the candidates currently
/// held at the layers above, as replayed from the trace.
fn check_projections(pair: &LowerTriangularPair, r: &[f64], trace: &Trace) -> Result<(), TestCaseError> {
    let n = pair.dim();
    let g = pair.g();
    let mut cur = vec![0i64; n + 1];
    for e in &trace.events {
        let i = e.layer;
        if e.phase == Phase::Down {
            let mut s = 0.0;
            let mut scale = g[(i - 1, i - 1)].abs();
            for k in i + 1..=n {
                s += cur[k] as f64 * g[(k - 1, i - 1)];
                scale += (cur[k] as f64 * g[(k - 1, i - 1)]).abs();
            }
            let direct = (r[i - 1] - s) / g[(i - 1, i - 1)];
            let tol = 1e-9 * (scale + r[i - 1].abs()) / g[(i - 1, i - 1)];
            prop_assert!(
                (e.projection - direct).abs() <= tol.max(1e-12),
                "layer {}: {} vs {}",
                i,
                e.projection,
                direct
            );
        }
        cur[i] = e.candidate;
    }
    Ok(())
}

fn check_lambda(trace: &Trace) -> Result<(), TestCaseError> {
    for e in &trace.events {
        if e.displacement.is_infinite() {
            prop_assert!(e.lambda.is_infinite());
            continue;
        }
        let y2 = e.displacement * e.displacement;
        let diff = e.lambda - e.lambda_above;
        prop_assert!((diff - y2).abs() <= 1e-9 * e.lambda.max(1e-12), "{} vs {}", diff, y2);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lattice_variants_trace_identically(seed in any::<u64>(), n in 1usize..10) {
        let mut rng = rng(seed);
        let pair = random_pair(n, n > 6, &mut rng);
        let r = random_received(&pair, &mut rng);
        let (base, res) = run(lattice(1), &pair, &r);
        for a in [3, 5, 7] {
            let (t, res_a) = run(lattice(a), &pair, &r);
            prop_assert_eq!(t.visits(), base.visits(), "algorithm {}", a);
            prop_assert_eq!(&res_a.u_hat, &res.u_hat);
        }
    }

    #[test]
    fn finite_variants_trace_identically(seed in any::<u64>(), n in 1usize..10, levels in prop::sample::select(vec![2i64, 4])) {
        let mut rng = rng(seed);
        let pair = random_pair(n, false, &mut rng);
        let r = random_finite_received(&pair, levels, &mut rng);
        let (base, res) = run(config(2, levels), &pair, &r);
        for a in [4, 6, 8] {
            let (t, res_a) = run(config(a, levels), &pair, &r);
            prop_assert_eq!(t.visits(), base.visits(), "algorithm {}", a);
            prop_assert_eq!(&res_a.u_hat, &res.u_hat);
        }
    }

    // The lazily updated E (new H-based) and F (new G-based) must hand out the
    // same projections as their eager counterparts, and both must match the
    // definition evaluated from scratch.
    #[test]
    fn lazy_tables_shadow_eager_ones(seed in any::<u64>(), n in 1usize..10) {
        let mut rng = rng(seed);
        let pair = random_pair(n, true, &mut rng);
        let r = random_received(&pair, &mut rng);
        for (old, new) in [(3u8, 7u8), (1, 5)] {
            let (t_old, _) = run(lattice(old), &pair, &r);
            let (t_new, _) = run(lattice(new), &pair, &r);
            prop_assert_eq!(t_old.events.len(), t_new.events.len());
            for (a, b) in t_old.events.iter().zip(&t_new.events) {
                let tol = 1e-9 * a.projection.abs().max(1.0);
                prop_assert!((a.projection - b.projection).abs() <= tol, "{} vs {}", a.projection, b.projection);
            }
            check_projections(&pair, &r, &t_new)?;
            check_projections(&pair, &r, &t_old)?;
        }
    }

    #[test]
    fn lambda_recursion(seed in any::<u64>(), n in 1usize..9) {
        let mut rng = rng(seed);
        let pair = random_pair(n, false, &mut rng);
        let r = random_received(&pair, &mut rng);
        for a in [1, 3, 5, 7] {
            check_lambda(&run(lattice(a), &pair, &r).0)?;
        }
        let r = random_finite_received(&pair, 2, &mut rng);
        for a in [2, 4, 6, 8] {
            check_lambda(&run(config(a, 2), &pair, &r).0)?;
        }
    }

    // The counter and the cost table applied to the recorded steps agree.
    #[test]
    fn audit_matches_counter(seed in any::<u64>(), n in 1usize..9) {
        let mut rng = rng(seed);
        let pair = random_pair(n, false, &mut rng);
        let r = random_received(&pair, &mut rng);
        let rf = random_finite_received(&pair, 4, &mut rng);
        for a in 1..=8u8 {
            let (cfg, input) = if a % 2 == 1 { (lattice(a), &r) } else { (config(a, 4), &rf) };
            let (t, res) = run(cfg, &pair, input);
            prop_assert_eq!(t.audited_cost(), res.counters);
        }
    }

    #[test]
    fn finite_up_moves_stay_in_range(seed in any::<u64>(), n in 1usize..8) {
        let mut rng = rng(seed);
        let pair = random_pair(n, false, &mut rng);
        let r = random_finite_received(&pair, 4, &mut rng);
        for a in [2, 4, 6, 8] {
            let (t, _) = run(config(a, 4), &pair, &r);
            for e in &t.events {
                if e.displacement.is_finite() {
                    prop_assert!((0..4).contains(&e.candidate));
                }
            }
        }
    }
}

/// Checks `min(i, n) <= d_j <= n` on every loop entry.
#[derive(Default)]
struct StartIndexCheck {
    entries: usize,
    violations: usize,
}

impl spheredec::decoder::Probe for StartIndexCheck {
    fn loop_entry(&mut self, layer: usize, start: &[usize]) {
        let n = start.len();
        self.entries += 1;
        if !start.iter().all(|&d| layer.min(n) <= d && d <= n) {
            self.violations += 1;
        }
    }
}

#[test]
fn start_index_invariant_under_deep_search() {
    let mut rng = rng(99);
    for n in [3, 8, 12, 16, 20] {
        let pair = random_pair(n, true, &mut rng);
        for _ in 0..10 {
            let r = random_received(&pair, &mut rng);
            let rf = random_finite_received(&pair, 4, &mut rng);
            for (cfg, input) in [(lattice(5), &r), (lattice(7), &r), (config(6, 4), &rf), (config(8, 4), &rf)] {
                let mut check = StartIndexCheck::default();
                spheredec::SphereDecoder::new(cfg, &pair)
                    .unwrap()
                    .decode_with(input, &mut check)
                    .unwrap();
                assert!(check.entries > 0);
                assert_eq!(check.violations, 0, "n = {n}, {cfg}");
            }
        }
    }
}
