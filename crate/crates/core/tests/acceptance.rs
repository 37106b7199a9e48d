//! One line per acceptance criterion; exits non-zero if any fails.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use permflip::decomposition::{birkhoff, sinkhorn, stochastic_deviation};
use permflip::exec::map_ordered;
use permflip::fidelity::{f_overlap, f_re, relative_error_bounds};
use permflip::harness::{run_spectral_sweep, write_csv_to, Channel, Metrics, SweepConfig};
use permflip::spectral::{
    self, bitflip_radius_bound, eigenpairs, nmse, phaseflip_radius_bound, radius_deltas,
    relative_error,
};
use permflip::{
    CoefficientRange, DenseMatrix, ErrorSpec, LinearOperator, Parallelism, PermSum, QubitMask,
    StateMode, StateVector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_spec(n: u32, k: usize, pmax: f64, rng: &mut ChaCha8Rng) -> ErrorSpec {
    let dim = 1u64 << n;
    ErrorSpec::new(
        (0..k).map(|_| rng.gen_range(0.0..=pmax)).collect(),
        (0..k).map(|_| QubitMask(rng.gen_range(0..dim))).collect(),
        (0..k).map(|_| rng.gen_range(0.0..=pmax)).collect(),
        (0..k).map(|_| QubitMask(rng.gen_range(0..dim))).collect(),
    )
    .unwrap()
}

fn lu_det(m: &DenseMatrix) -> Complex64 {
    let n = m.rows();
    let mut a: Vec<Vec<Complex64>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&x, &y| a[x][k].norm().total_cmp(&a[y][k].norm()))
            .unwrap();
        if a[piv][k].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != k {
            a.swap(piv, k);
            det = -det;
        }
        det *= a[k][k];
        let (top, rest) = a.split_at_mut(k + 1);
        let pivot = &top[k];
        for row in rest {
            let f = row[k] / pivot[k];
            for (x, p) in row[k..].iter_mut().zip(&pivot[k..]) {
                *x -= f * p;
            }
        }
    }
    det
}

fn bitflip_resilience() -> Outcome {
    let cases: Vec<(usize, u64)> = (0..100).map(|i| (if i < 50 { 16 } else { 256 }, i)).collect();
    let res = map_ordered(cases, Parallelism::Auto, |(k, seed)| -> Result<f64, String> {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let a = PermSum::random(8, k, CoefficientRange::Positive, &mut rng).map_err(|e| e.to_string())?;
        let e = random_spec(8, k, 1.0, &mut rng);
        let b = a.perturb_bitflip(&e).map_err(|e| e.to_string())?;
        let dom = |x: &PermSum| -> Result<Complex64, String> {
            let m = x.materialize().map_err(|e| e.to_string())?;
            let s = spectral::eigenvalues(&m).map_err(|e| e.to_string())?;
            Ok(s.dominant().unwrap())
        };
        relative_error(dom(&a)?, dom(&b)?).map_err(|e| e.to_string())
    });
    let mut worst = 0.0f64;
    let mut ok = 0;
    for r in &res {
        match r {
            Ok(re) if *re < 1e-10 => {
                ok += 1;
                worst = worst.max(*re);
            }
            Ok(re) => worst = worst.max(*re),
            Err(e) => return outcome(false, format!("solver error: {e}")),
        }
    }
    outcome(ok == 100, format!("{ok}/100 below 1e-10, max re {worst:.2e}"))
}

fn gershgorin_bounds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2000);
    let mut violations = 0;
    let mut tightest = f64::INFINITY;
    for i in 0..200u32 {
        let n = 1 + i % 6;
        let k = rng.gen_range(1..=32);
        let a = PermSum::random(n, k, CoefficientRange::Mixed, &mut rng).unwrap();
        let e = random_spec(n, k, rng.gen(), &mut rng);
        let m = a.materialize().unwrap();
        let checks = [
            (a.perturb_bitflip(&e).unwrap(), bitflip_radius_bound(&e, &a.alphas()).unwrap()),
            (a.perturb_phaseflip(&e).unwrap(), phaseflip_radius_bound(&e, &a.alphas()).unwrap()),
        ];
        for (b, bound) in checks {
            let worst = radius_deltas(&m, &b.materialize().unwrap())
                .unwrap()
                .into_iter()
                .fold(0.0, f64::max);
            if worst > bound + 1e-12 {
                violations += 1;
            }
            tightest = tightest.min(bound - worst);
        }
    }
    outcome(
        violations == 0,
        format!("{violations} violations over 200 instances, min slack {tightest:.2e}"),
    )
}

fn zero_error_fixed_point() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3000);
    let mut failures = Vec::new();
    for channel in [Channel::Bit, Channel::Phase, Channel::Both] {
        for alpha in [CoefficientRange::Positive, CoefficientRange::Mixed] {
            let a = PermSum::random(5, 10, alpha, &mut rng).unwrap();
            let mut e = random_spec(5, 10, 1.0, &mut rng);
            e.p.iter_mut().chain(e.q.iter_mut()).for_each(|x| *x = 0.0);
            let b = permflip::harness::apply_channel(&a, channel, &e).unwrap();
            let (ma, mb) = (a.materialize().unwrap(), b.materialize().unwrap());
            let sa = spectral::eigenvalues(&ma).unwrap();
            let sb = spectral::eigenvalues(&mb).unwrap();
            let re = relative_error(sa.dominant().unwrap(), sb.dominant().unwrap()).unwrap();
            let nm = nmse(&sa, &sb).unwrap();
            let mut fid_ok = true;
            for mode in [StateMode::Positive, StateMode::Mixed, StateMode::Sparse(0.9)] {
                let psi = StateVector::random(5, mode, &mut rng).unwrap();
                if a.apply(psi.amplitudes()).unwrap().iter().all(|z| z.norm() == 0.0) {
                    continue;
                }
                fid_ok &= f_overlap(&a, &b, &psi).unwrap() == 1.0 && f_re(&a, &b, &psi).unwrap() == 1.0;
            }
            if !(mb.bit_equal(&ma) && re == 0.0 && nm == 0.0 && fid_ok) {
                failures.push(format!("{channel}/{alpha:?}"));
            }
        }
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "bit-exact for bit, phase and both".into()
        } else {
            format!("failed: {}", failures.join(", "))
        },
    )
}

fn eigensolver_contract() -> Outcome {
    let cases: Vec<u32> = (0..100).collect();
    let res = map_ordered(cases, Parallelism::Auto, |i| -> Result<(f64, Option<f64>), String> {
        let mut rng = ChaCha8Rng::seed_from_u64(4000 + i as u64);
        let n = 1 + i % 8;
        let alpha = if i % 2 == 0 { CoefficientRange::Mixed } else { CoefficientRange::Positive };
        let a = PermSum::random(n, 1 + (i as usize * 7) % 24, alpha, &mut rng).map_err(|e| e.to_string())?;
        let m = a.materialize().map_err(|e| e.to_string())?;
        let pairs = eigenpairs(&m).map_err(|e| e.to_string())?;
        let fro = m.frobenius_norm();
        let worst = pairs
            .values
            .iter()
            .zip(&pairs.vectors)
            .map(|(l, v)| spectral::residual(&m, *l, v) / fro)
            .fold(0.0, f64::max);
        let det_err = (m.rows() <= 16).then(|| {
            let prod: Complex64 = pairs.values.iter().product();
            let det = lu_det(&m);
            let floor = 1e-12 * fro.powi(m.rows() as i32);
            (prod - det).norm() / det.norm().max(floor)
        });
        Ok((worst, det_err))
    });
    let (mut worst_res, mut worst_det, mut det_cases) = (0.0f64, 0.0f64, 0);
    for r in res {
        match r {
            Ok((w, d)) => {
                worst_res = worst_res.max(w);
                if let Some(d) = d {
                    det_cases += 1;
                    worst_det = worst_det.max(d);
                }
            }
            Err(e) => return outcome(false, format!("solver error: {e}")),
        }
    }
    outcome(
        worst_res <= 1e-8 && worst_det <= 1e-6,
        format!(
            "max residual/‖M‖_F {worst_res:.2e} (N ≤ 256), max det rel err {worst_det:.2e} over {det_cases} matrices (N ≤ 16)"
        ),
    )
}

fn nmse_trend() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for channel in [Channel::Bit, Channel::Phase] {
        let cfg = SweepConfig {
            n: 6,
            terms: 12,
            alpha: CoefficientRange::Mixed,
            channel,
            pmax_grid: vec![0.05, 0.5],
            trials: 30,
            seed: 5000,
            metrics: Metrics::Spectral,
            ..Default::default()
        };
        let recs = run_spectral_sweep(&cfg, Parallelism::Auto).unwrap();
        let mean = |p: f64| {
            let v: Vec<f64> = recs.iter().filter(|r| r.pmax == p).filter_map(|r| r.nmse).collect();
            (v.iter().sum::<f64>() / v.len() as f64, v.len())
        };
        let ((lo, nlo), (hi, nhi)) = (mean(0.05), mean(0.5));
        pass &= nlo == 30 && nhi == 30 && hi > lo;
        parts.push(format!("{channel}: {lo:.3e} -> {hi:.3e}"));
    }
    outcome(pass, format!("mean NMSE at P_max 0.05 -> 0.5, {}", parts.join("; ")))
}

fn fidelity_chain() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6000);
    let (mut checked, mut violations) = (0, 0);
    while checked < 100 {
        let n = rng.gen_range(2..=5);
        let k = rng.gen_range(1..=16);
        let alpha = if rng.gen() { CoefficientRange::Positive } else { CoefficientRange::Mixed };
        let a = PermSum::random(n, k, alpha, &mut rng).unwrap();
        let b = a.perturb_combined(&random_spec(n, k, rng.gen(), &mut rng)).unwrap();
        let mode = [StateMode::Positive, StateMode::Mixed, StateMode::Sparse(0.5)][checked % 3];
        let psi = StateVector::random(n, mode, &mut rng).unwrap();
        let Ok(r) = relative_error_bounds(&a.materialize().unwrap(), &b.materialize().unwrap(), &psi)
        else {
            continue;
        };
        let out = a.apply(psi.amplitudes()).unwrap();
        let nrm = out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let chain = r.bound_lower <= r.relative_error + 1e-10 && r.relative_error <= r.bound_upper + 1e-10;
        let sigma = r.sigma_min_a <= nrm + 1e-10 && nrm <= r.sigma_max_a + 1e-10;
        if !(chain && sigma) {
            violations += 1;
        }
        checked += 1;
    }
    outcome(violations == 0, format!("{violations} violations over {checked} (A, B, ψ) triples"))
}

fn ingestion_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7000);
    let (mut dev, mut resid, mut over_cap) = (0.0f64, 0.0f64, 0);
    for dim in [2usize, 4, 8, 16, 32, 64] {
        for _ in 0..3 {
            let m = DenseMatrix::from_fn(dim, dim, |_, _| Complex64::new(rng.gen_range(0.01..1.0), 0.0));
            let s = match sinkhorn(&m, 1e-12, 100_000) {
                Ok(s) => s,
                Err(e) => return outcome(false, format!("sinkhorn at N = {dim}: {e}")),
            };
            dev = dev.max(stochastic_deviation(&s.matrix));
            let r = match birkhoff(&s.matrix, 1e-12) {
                Ok(r) => r,
                Err(e) => return outcome(false, format!("birkhoff at N = {dim}: {e}")),
            };
            resid = resid.max(r.residual);
            if r.terms.len() > dim * dim - 2 * dim + 2 {
                over_cap += 1;
            }
        }
    }
    outcome(
        dev <= 1e-10 && resid < 1e-8 && over_cap == 0,
        format!("max sum deviation {dev:.2e}, max residual {resid:.2e}, {over_cap} over term cap (N ≤ 64)"),
    )
}

fn determinism() -> Outcome {
    let mut bytes = Vec::new();
    for (metrics, par) in [
        (Metrics::Spectral, Parallelism::Sequential),
        (Metrics::Spectral, Parallelism::Threads(4)),
        (Metrics::Fidelity, Parallelism::Threads(1)),
        (Metrics::Fidelity, Parallelism::Threads(3)),
    ] {
        let cfg = SweepConfig {
            n: 5,
            terms: 10,
            alpha: CoefficientRange::Mixed,
            channel: Channel::Both,
            pmax_grid: vec![0.0, 0.1, 0.5],
            trials: 8,
            states_per_trial: 8,
            state_mode: StateMode::Sparse(0.75),
            seed: 8000,
            metrics,
            ..Default::default()
        };
        let mut buf = Vec::new();
        write_csv_to(&permflip::harness::run_sweep(&cfg, par).unwrap(), &mut buf).unwrap();
        bytes.push(buf);
    }
    outcome(
        bytes[0] == bytes[1] && bytes[2] == bytes[3],
        "spectral and fidelity CSV compared at 1 vs 4 and 1 vs 3 threads".into(),
    )
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);
    let criteria: [Criterion; 8] = [
        ("positive-coefficient bit-flip resilience", bitflip_resilience, Some(Duration::from_secs(120))),
        ("Gershgorin radius bounds", gershgorin_bounds, Some(Duration::from_secs(60))),
        ("zero-error fixed point", zero_error_fixed_point, None),
        ("eigensolver contract", eigensolver_contract, None),
        ("NMSE trend", nmse_trend, Some(Duration::from_secs(300))),
        ("fidelity bound chain", fidelity_chain, None),
        ("ingestion round-trip", ingestion_round_trip, None),
        ("determinism across thread counts", determinism, None),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let mut o = run();
        let took = start.elapsed();
        if let Some(b) = budget {
            if took > b {
                o.pass = false;
                o.detail.push_str(&format!(", over the {}s budget", b.as_secs()));
            }
        }
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
