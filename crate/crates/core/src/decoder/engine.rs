//! The shared enumeration engine. Indices are 1-based throughout (slot 0 of
//! every buffer is unused) so each statement keeps the mathematical
//! indexing: `E[(i, j)]` is `E_{i,j}`, `u[i]` is `u_i`, `lambda[n + 1]` is
//! `lambda_{n+1}`.

use super::rounding::{round_nearest, sign_step};
use super::trace::{Phase, Probe, TraceEvent};
use super::{BasisForm, DecodeResult, DecoderConfig, Domain, Strategy};
use crate::counting::{OpCounter, Step};
use crate::linalg::LowerTriangularPair;

pub(super) struct Workspace {
    n: usize,
    r: Vec<f64>,
    u: Vec<i64>,
    u_hat: Vec<i64>,
    delta: Vec<i64>,
    lambda: Vec<f64>,
    /// `y_i` per layer, only used by the new H-based decoders.
    y: Vec<f64>,
    p: Vec<f64>,
    d: Vec<usize>,
    /// `E` for H-based decoders, `F` for new G-based ones. Row-major for the
    /// old H-based decoder, whose updates run along rows; column-major
    /// (`table[i * (n+1) + j]` is entry `(j, i)`) for the new decoders, whose
    /// updates run down columns.
    table: Vec<f64>,
    /// Copies of the basis laid out for contiguous access: `h_rows[k*(n+1)+j]`
    /// is `H_{k,j}`; `h_cols` and `g_cols` hold the transposes.
    h_rows: Vec<f64>,
    h_cols: Vec<f64>,
    g_cols: Vec<f64>,
    g_diag: Vec<f64>,
    h_diag: Vec<f64>,
}

impl Workspace {
    pub(super) fn new(pair: &LowerTriangularPair) -> Self {
        let n = pair.dim();
        let s = n + 1;
        let (g, h) = (pair.g(), pair.h());
        let mut h_rows = vec![0.0; s * s];
        let mut h_cols = vec![0.0; s * s];
        let mut g_cols = vec![0.0; s * s];
        let mut g_diag = vec![0.0; s];
        let mut h_diag = vec![0.0; s];
        for k in 1..=n {
            for j in 1..=k {
                h_rows[k * s + j] = h[(k - 1, j - 1)];
                h_cols[j * s + k] = h[(k - 1, j - 1)];
                g_cols[j * s + k] = g[(k - 1, j - 1)];
            }
            g_diag[k] = g[(k - 1, k - 1)];
            h_diag[k] = h[(k - 1, k - 1)];
        }
        Workspace {
            n,
            r: vec![0.0; s],
            u: vec![0; n + 2],
            u_hat: vec![0; s],
            delta: vec![0; n + 2],
            lambda: vec![0.0; n + 2],
            y: vec![0.0; n + 2],
            p: vec![0.0; s],
            d: vec![0; s],
            table: vec![0.0; s * s],
            h_rows,
            h_cols,
            g_cols,
            g_diag,
            h_diag,
        }
    }
}

struct Meter<'p, P: Probe> {
    counter: OpCounter,
    probe: &'p mut P,
}

impl<P: Probe> Meter<'_, P> {
    #[inline(always)]
    fn charge(&mut self, step: Step) {
        self.counter.charge_step(step);
        self.probe.step(step);
    }
}

pub(super) fn run<P: Probe>(
    config: DecoderConfig,
    ws: &mut Workspace,
    r_in: &[f64],
    probe: &mut P,
) -> DecodeResult {
    let n = ws.n;
    let h_based = config.basis_form == BasisForm::H;
    let new = config.strategy == Strategy::New;
    let range = match config.domain {
        Domain::Lattice => None,
        Domain::Finite { u_min, u_max } => Some((u_min, u_max)),
    };
    let round_step = match config.domain.levels() {
        None => Step::Round,
        Some(levels) => Step::RoundClamped { levels },
    };
    let quantize = |x: f64| -> i64 {
        let u = round_nearest(x);
        match range {
            None => u,
            Some((lo, hi)) => u.clamp(lo, hi),
        }
    };
    let in_range = |u: i64| range.is_none_or(|(lo, hi)| lo <= u && u <= hi);

    let mut meter = Meter {
        counter: OpCounter::default(),
        probe,
    };

    ws.r[1..].copy_from_slice(r_in);
    let s = n + 1;
    let Workspace {
        r,
        u,
        u_hat,
        delta,
        lambda,
        y: yv,
        p,
        d,
        table: t,
        h_rows,
        h_cols,
        g_cols,
        g_diag,
        h_diag,
        ..
    } = ws;
    // E_{i,j} / F_{i,j} in the layout of this strategy
    let at = |i: usize, j: usize| if new { j * s + i } else { i * s + j };

    // Scalar y of algorithms 1-6.
    let mut y = 0.0f64;

    let mut c = f64::INFINITY;
    let mut i = if h_based && !new { n } else { n + 1 };
    if new {
        for dj in d[1..=n].iter_mut() {
            *dj = n;
        }
    }
    lambda[n + 1] = 0.0;
    if h_based {
        for j in 1..=n {
            let hcol = &h_cols[j * s..(j + 1) * s];
            let mut acc = 0.0;
            for k in j..=n {
                acc += r[k] * hcol[k];
            }
            t[at(n, j)] = acc;
            meter.charge(Step::ProjectReceived { terms: n - j + 1 });
        }
    }
    if new && !h_based {
        for j in 1..=n {
            t[at(n, j)] = 0.0;
        }
    }
    if h_based && !new {
        let e = t[at(n, n)];
        u[n] = quantize(e);
        meter.charge(round_step);
        y = (e - u[n] as f64) / h_diag[n];
        meter.charge(Step::Displacement);
        delta[n] = sign_step(y);
        meter.charge(Step::SignOfDisplacement);
        lambda[n] = y * y;
        meter.charge(Step::FirstDistance);
        meter.probe.visit(TraceEvent {
            phase: Phase::Down,
            layer: n,
            candidate: u[n],
            projection: e,
            displacement: y,
            lambda: lambda[n],
            lambda_above: lambda[n + 1],
        });
    }

    // LOOP
    loop {
        if new {
            meter.probe.loop_entry(i, &d[1..=n]);
            debug_assert!(d[1..=n].iter().all(|&dj| i.min(n) <= dj && dj <= n));
        }

        // Move down while lambda_i < C.
        loop {
            if i != 1 {
                i -= 1;
                let proj = match (h_based, new) {
                    (true, false) => {
                        // E_{i,1..i} = E_{i+1,1..i} - y H_{i+1,1..i}
                        let (head, tail) = t.split_at_mut((i + 1) * s);
                        let dst = &mut head[i * s + 1..=i * s + i];
                        let src = &tail[1..=i];
                        let hrow = &h_rows[(i + 1) * s + 1..=(i + 1) * s + i];
                        for ((e, &above), &hv) in dst.iter_mut().zip(src).zip(hrow) {
                            *e = above - y * hv;
                        }
                        meter.charge(Step::RowUpdate { width: i });
                        t[i * s + i]
                    }
                    (true, true) => {
                        let di = d[i];
                        let col = &mut t[i * s..(i + 1) * s];
                        let hcol = &h_cols[i * s..(i + 1) * s];
                        // col[j-1] = col[j] - y_j H_{j,i}, for j = d_i down to i+1
                        let mut acc = col[di];
                        let src = yv[i + 1..=di].iter().rev().zip(hcol[i + 1..=di].iter().rev());
                        for (dst, (&yj, &hv)) in col[i..di].iter_mut().rev().zip(src) {
                            acc -= yj * hv;
                            *dst = acc;
                        }
                        meter.charge(Step::ColumnUpdate { len: di - i });
                        col[i]
                    }
                    (false, true) => {
                        let di = d[i];
                        let col = &mut t[i * s..(i + 1) * s];
                        let gcol = &g_cols[i * s..(i + 1) * s];
                        let mut acc = col[di];
                        let src = u[i + 1..=di].iter().rev().zip(gcol[i + 1..=di].iter().rev());
                        for (dst, (&uj, &gv)) in col[i..di].iter_mut().rev().zip(src) {
                            acc += uj as f64 * gv;
                            *dst = acc;
                        }
                        meter.charge(Step::ColumnUpdate { len: di - i });
                        p[i] = (r[i] - col[i]) / g_diag[i];
                        meter.charge(Step::ProjectionFromPartial);
                        p[i]
                    }
                    (false, false) => {
                        let gcol = &g_cols[i * s..(i + 1) * s];
                        let mut acc = 0.0;
                        for (&uj, &gv) in u[i + 1..=n].iter().zip(&gcol[i + 1..=n]) {
                            acc += uj as f64 * gv;
                        }
                        p[i] = (r[i] - acc) / g_diag[i];
                        meter.charge(Step::ProjectionSum { terms: n - i });
                        p[i]
                    }
                };
                u[i] = quantize(proj);
                meter.charge(round_step);
                let yi = if h_based {
                    (proj - u[i] as f64) / h_diag[i]
                } else {
                    (proj - u[i] as f64) * g_diag[i]
                };
                meter.charge(Step::Displacement);
                if h_based && new {
                    yv[i] = yi;
                } else {
                    y = yi;
                }
                delta[i] = sign_step(yi);
                meter.charge(Step::SignOfDisplacement);
                lambda[i] = lambda[i + 1] + yi * yi;
                meter.charge(Step::AccumulateDistance);
                meter.probe.visit(TraceEvent {
                    phase: Phase::Down,
                    layer: i,
                    candidate: u[i],
                    projection: proj,
                    displacement: yi,
                    lambda: lambda[i],
                    lambda_above: lambda[i + 1],
                });
            } else {
                u_hat[1..=n].copy_from_slice(&u[1..=n]);
                c = lambda[1];
            }
            meter.charge(Step::CompareRadius);
            if !(lambda[i] < c) {
                break;
            }
        }

        let m = i;

        // Move up while lambda_i >= C.
        loop {
            if i == n {
                return DecodeResult {
                    u_hat: u_hat[1..=n].to_vec(),
                    squared_distance: c,
                    counters: meter.counter,
                };
            }
            i += 1;
            let proj = if h_based { t[i * s + i] } else { p[i] };
            let (hd, gd) = (h_diag[i], g_diag[i]);
            let displacement = |ui: i64| {
                if h_based {
                    (proj - ui as f64) / hd
                } else {
                    (proj - ui as f64) * gd
                }
            };
            // y = infinity for the finite decoders until an in-range candidate is found
            let mut yi = f64::INFINITY;
            u[i] += delta[i];
            meter.charge(Step::AdvanceCandidate);
            delta[i] = -delta[i] - sign_step(delta[i]);
            meter.charge(Step::ReverseStep);
            if range.is_none() {
                yi = displacement(u[i]);
                meter.charge(Step::Displacement);
            } else {
                meter.charge(Step::RangeCheck);
                if in_range(u[i]) {
                    yi = displacement(u[i]);
                    meter.charge(Step::Displacement);
                } else {
                    u[i] += delta[i];
                    meter.charge(Step::AdvanceCandidate);
                    delta[i] = -delta[i] - sign_step(delta[i]);
                    meter.charge(Step::ReverseStep);
                    meter.charge(Step::RangeCheck);
                    if in_range(u[i]) {
                        yi = displacement(u[i]);
                        meter.charge(Step::Displacement);
                    }
                }
            }
            if h_based && new {
                yv[i] = yi;
            } else {
                y = yi;
            }
            // An infinite y stays a sentinel instead of being squared.
            lambda[i] = if yi.is_infinite() {
                f64::INFINITY
            } else {
                lambda[i + 1] + yi * yi
            };
            meter.charge(Step::AccumulateDistance);
            meter.probe.visit(TraceEvent {
                phase: Phase::Up,
                layer: i,
                candidate: u[i],
                projection: proj,
                displacement: yi,
                lambda: lambda[i],
                lambda_above: lambda[i + 1],
            });
            meter.charge(Step::CompareRadius);
            if !(lambda[i] >= c) {
                break;
            }
        }

        if new {
            for dj in d[m..i].iter_mut() {
                *dj = i;
            }
            for j in (1..m).rev() {
                meter.charge(Step::StartIndexCompare);
                if d[j] < i {
                    d[j] = i;
                } else {
                    break;
                }
            }
        }
        // goto LOOP
    }
}
