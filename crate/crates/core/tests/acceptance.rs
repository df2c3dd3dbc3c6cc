//! Acceptance suite. Runs without the libtest harness so that every criterion
//! prints exactly one PASS/FAIL line; exits nonzero if any criterion fails.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::Rng;

use teleres::fef::{self, FefConfig};
use teleres::gamma::{self, SearchConfig};
use teleres::linalg::{self, c, ComplexMatrix, C64};
use teleres::nelder_mead::{self, SimplexOptions};
use teleres::pauli::{self, ComplementaryTriple};
use teleres::random::{self, rng_for};
use teleres::state::{self, bell_tensor, DensityMatrix, PureState, SubsystemLayout};
use teleres::witness;
use teleres::Verdict;

struct Outcome {
    ok: bool,
    detail: String,
}

fn check(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let took = start.elapsed();
    out.detail = format!("{} [{:.2}s]", out.detail, took.as_secs_f64());
    if let Some(limit) = limit {
        if took > limit {
            out.ok = false;
            out.detail += &format!(" exceeds {:.0}s", limit.as_secs_f64());
        }
    }
    out
}

fn random_triples<R: Rng>(n: usize, rng: &mut R) -> Vec<ComplementaryTriple> {
    (0..n)
        .map(|_| {
            let tau = std::f64::consts::TAU;
            let r = pauli::su2_from_angles(
                rng.random_range(0.0..tau),
                rng.random_range(0.0..std::f64::consts::PI),
                rng.random_range(0.0..tau),
            );
            pauli::triple_from_su2(&r).unwrap()
        })
        .collect()
}

/// (U_1 ⊗ ... ⊗ U_2n)|φ⁺⟩ with independent Haar single-qubit unitaries on both sides.
fn rotated_bell<R: Rng>(n: usize, rng: &mut R) -> DensityMatrix {
    let locals: Vec<ComplexMatrix> = (0..2 * n).map(|_| random::haar_unitary(2, rng)).collect();
    let u = linalg::tensor_product(&locals).unwrap();
    let amps = u * bell_tensor(n).unwrap().amplitudes();
    PureState::new(amps, SubsystemLayout::multiqubit(n).unwrap())
        .unwrap()
        .density()
}

/// Two-qubit FEF as the top eigenvalue of Re ρ in the magic basis.
fn magic_basis_fef(rho: &DensityMatrix) -> f64 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let i = c(0.0, h);
    let r = c(h, 0.0);
    let z = c(0.0, 0.0);
    #[rustfmt::skip]
    let m = ComplexMatrix::from_row_slice(4, 4, &[
        r, i, z, z,
        z, z, i, r,
        z, z, i, -r,
        r, -i, z, z,
    ]);
    let t = m.adjoint() * rho.matrix() * &m;
    let re = DMatrix::<f64>::from_fn(4, 4, |a, b| t[(a, b)].re);
    re.symmetric_eigen().eigenvalues.max()
}

fn hermitian_from(params: &[f64], d: usize) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(d, d);
    let mut k = 0;
    for a in 0..d {
        h[(a, a)] = c(params[k], 0.0);
        k += 1;
        for b in a + 1..d {
            h[(a, b)] = c(params[k], params[k + 1]);
            h[(b, a)] = c(params[k], -params[k + 1]);
            k += 2;
        }
    }
    h
}

/// min over U = exp(iH) of Tr(W(U)ρ) by simplex search, restarted from its own optimum.
fn witness_minimum_by_simplex(rho: &DensityMatrix, d: usize, seed: u64) -> f64 {
    let f = |x: &[f64]| {
        let u = (hermitian_from(x, d) * c(0.0, 1.0)).exp();
        let u = linalg::polar_unitary(&u);
        witness::evaluate(&witness::witness_rotated(&u).unwrap(), rho).unwrap()
    };
    let opts = SimplexOptions {
        max_iters: 3000,
        diameter_tol: 1e-10,
        initial_step: 0.6,
    };
    let mut rng = rng_for(seed, 999);
    let mut best = f64::INFINITY;
    for start in 0..6 {
        let mut x: Vec<f64> = if start == 0 {
            vec![0.0; d * d]
        } else {
            (0..d * d).map(|_| rng.random_range(-2.0..2.0)).collect()
        };
        let mut value = f64::INFINITY;
        for _ in 0..6 {
            let r = nelder_mead::minimize(f, &x, SimplexOptions { initial_step: 0.1, ..opts });
            let improved = value - r.f;
            x = r.x;
            value = r.f;
            if improved < 1e-13 {
                break;
            }
        }
        best = best.min(value);
    }
    best
}

fn singular_values_oracle(phi: &PureState, d: usize) -> Vec<f64> {
    let a = phi.amplitudes();
    DMatrix::<C64>::from_fn(d, d, |i, j| a[i * d + j])
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect()
}

fn partial_transpose_min_eig(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    let pt = ComplexMatrix::from_fn(4, 4, |r, s| {
        let (a, b, a2, b2) = (r / 2, r % 2, s / 2, s % 2);
        m[(a * 2 + b2, a2 * 2 + b)]
    });
    pt.symmetric_eigen().eigenvalues.min()
}

fn criterion_1() -> Outcome {
    timed(Some(Duration::from_secs(1)), || {
        let mut worst: f64 = 0.0;
        for n in 1..=4 {
            let rho = bell_tensor(n).unwrap().density();
            let triples = gamma::pauli_triples(n);
            let direct = gamma::gamma_expectation(&rho, &triples).unwrap();
            let op = gamma::build_gamma_product(&triples).unwrap();
            let via_matrix = state::expectation(&rho, op.matrix()).unwrap();
            worst = worst.max((direct - 1.0).abs()).max((via_matrix - 1.0).abs());
        }
        check(worst <= 1e-10, format!("max |<Gamma> - 1| = {worst:.2e} for n = 1..4"))
    })
}

fn criterion_2() -> Outcome {
    timed(None, || {
        let mut rng = rng_for(2, 0);
        let mut worst: f64 = 0.0;
        for k in 0..200 {
            let n = 1 + k % 3;
            let triples = random_triples(n, &mut rng);
            let sum = gamma::build_gamma_sum(&triples).unwrap();
            let product = gamma::build_gamma_product(&triples).unwrap();
            worst = worst.max(linalg::max_abs_diff(sum.matrix(), product.matrix()));
        }
        check(worst <= 1e-10, format!("max entry deviation {worst:.2e} over 200 sets"))
    })
}

fn criterion_3() -> Outcome {
    timed(Some(Duration::from_secs(60)), || {
        let mut rng = rng_for(3, 0);
        let mut successes = 0;
        let mut lowest = f64::INFINITY;
        for k in 0..50u64 {
            let n = 1 + (k % 3) as usize;
            let rho = rotated_bell(n, &mut rng);
            let config = SearchConfig {
                seed: k,
                ..SearchConfig::default()
            };
            let det = gamma::detect_ideal_resource(&rho, &config).unwrap();
            lowest = lowest.min(det.search.best_value);
            if det.verdict == Verdict::Ideal && det.search.best_value >= 1.0 - 1e-6 {
                successes += 1;
            }
        }
        check(
            successes >= 49,
            format!("{successes}/50 recovered as Ideal, lowest best value {lowest:.10}"),
        )
    })
}

fn criterion_4() -> Outcome {
    timed(None, || {
        let layout = SubsystemLayout::multiqubit(2).unwrap();
        let mut violations = 0;
        let mut highest = f64::NEG_INFINITY;
        for seed in 0..1000u64 {
            let rho = random::random_product_pure(&layout, seed).density();
            let config = SearchConfig {
                seed,
                ..SearchConfig::default()
            };
            let best = gamma::maximize_gamma(&rho, &config).unwrap().best_value;
            highest = highest.max(best);
            if best > 0.25 + 1e-7 {
                violations += 1;
            }
        }
        check(
            violations == 0,
            format!("{violations} violations in 1000 states, highest {highest:.12}"),
        )
    })
}

fn criterion_5() -> Outcome {
    timed(None, || {
        let mut worst: f64 = 0.0;
        let mut oracle_gap: f64 = 0.0;
        for d in 2..=4 {
            let layout = SubsystemLayout::bipartite(d).unwrap();
            for seed in 0..100u64 {
                let phi = random::random_haar_pure(&layout, 5000 + seed);
                let closed = fef::fef_pure(&phi, d).unwrap().value;
                let sum: f64 = singular_values_oracle(&phi, d).iter().sum();
                oracle_gap = oracle_gap.max((closed - sum * sum / d as f64).abs());
                let config = FefConfig {
                    seed,
                    ..FefConfig::default()
                };
                let ascent = fef::fef_optimize(&phi.density(), d, &config).unwrap().value;
                worst = worst.max((ascent - closed).abs());
            }
        }
        check(
            worst <= 1e-6 && oracle_gap <= 1e-12,
            format!("max |ascent - closed form| = {worst:.2e}, closed form vs SVD oracle {oracle_gap:.1e}"),
        )
    })
}

fn criterion_6() -> Outcome {
    timed(None, || {
        let config = FefConfig::default();
        let mut worst: f64 = 0.0;
        for p in [0.0, 0.2, 1.0 / 3.0, 0.5, 0.8, 1.0] {
            let rho = state::werner(p, 2).unwrap();
            let f = fef::fully_entangled_fraction(&rho, 2, &config).unwrap().value;
            worst = worst
                .max((f - (3.0 * p + 1.0) / 4.0).abs())
                .max((magic_basis_fef(&rho) - (3.0 * p + 1.0) / 4.0).abs());
        }
        let useful = |p: f64| fef::is_useful(&state::werner(p, 2).unwrap(), 2, &config).unwrap().useful == Verdict::Useful;
        let (mut lo, mut hi) = (0.0, 1.0);
        let ends_ok = !useful(lo) && useful(hi);
        while hi - lo > 1e-5 {
            let mid = 0.5 * (lo + hi);
            if useful(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let flip = 0.5 * (lo + hi);
        let exact = fef::fidelity_from_fef(0.5, 2) == 2.0 / 3.0;
        check(
            worst <= 1e-6 && ends_ok && (flip - 1.0 / 3.0).abs() <= 1e-3 && exact,
            format!("max |F - (3p+1)/4| = {worst:.2e}, verdict flips at p = {flip:.6}, f(1/2, 2) exact: {exact}"),
        )
    })
}

fn criterion_7() -> Outcome {
    timed(None, || {
        let mut worst: f64 = 0.0;
        for d in 2..=6 {
            let w = witness::witness_identity(d).unwrap();
            let psi = state::psi_plus(d).unwrap().density();
            let zero = state::basis_product(d, 0, 0).unwrap().density();
            worst = worst
                .max((witness::evaluate(&w, &psi).unwrap() - (1.0 / d as f64 - 1.0)).abs())
                .max(witness::evaluate(&w, &zero).unwrap().abs());
        }
        check(worst <= 1e-12, format!("max deviation {worst:.2e} for d = 2..6"))
    })
}

fn certificate_ok(w: &witness::Witness, d: usize) -> (bool, f64) {
    let cert = witness::check_optimality(w).unwrap();
    // Independent re-check of annihilation and spanning.
    let mut residual: f64 = 0.0;
    for v in &cert.vectors {
        residual = residual.max((v.adjoint() * w.matrix() * v)[(0, 0)].norm());
    }
    let stacked = ComplexMatrix::from_columns(&cert.vectors);
    let sv = stacked.svd(false, false).singular_values;
    let rank = sv.iter().filter(|&&s| s > 1e-8 * sv.max()).count();
    let ok = cert.optimal && cert.gram_rank == d * d && rank == d * d && residual <= 1e-10;
    (ok, residual)
}

fn criterion_8() -> Outcome {
    timed(Some(Duration::from_secs(10)), || {
        let mut failures = 0;
        let mut worst: f64 = 0.0;
        for d in 2..=6 {
            let (ok, r) = certificate_ok(&witness::witness_identity(d).unwrap(), d);
            failures += usize::from(!ok);
            worst = worst.max(r);
        }
        for d in 2..=4 {
            for seed in 0..20u64 {
                let u = random::random_unitary(d, 800 + seed).unwrap();
                let (ok, r) = certificate_ok(&witness::witness_rotated(&u).unwrap(), d);
                failures += usize::from(!ok);
                worst = worst.max(r);
            }
        }
        check(
            failures == 0,
            format!("{failures} failures over 65 witnesses, max residual {worst:.1e}"),
        )
    })
}

fn criterion_9() -> Outcome {
    timed(None, || {
        let mut worst: f64 = 0.0;
        let mut magic_gap: f64 = 0.0;
        for d in 2..=3 {
            let layout = SubsystemLayout::bipartite(d).unwrap();
            for k in 0..50u64 {
                let seed = 9000 + k;
                let rho = match k % 3 {
                    0 => random::random_haar_pure(&layout, seed).density(),
                    1 => random::random_density(&layout, 2, seed).unwrap(),
                    _ => random::random_density(&layout, d * d, seed).unwrap(),
                };
                let config = FefConfig {
                    seed,
                    ..FefConfig::default()
                };
                let f = fef::fully_entangled_fraction(&rho, d, &config).unwrap().value;
                let minimum = witness_minimum_by_simplex(&rho, d, seed);
                worst = worst.max((minimum - (1.0 / d as f64 - f)).abs());
                if d == 2 {
                    magic_gap = magic_gap.max((magic_basis_fef(&rho) - f).abs());
                }
            }
        }
        check(
            worst <= 1e-6 && magic_gap <= 1e-6,
            format!("max |min Tr(W rho) - (1/d - F)| = {worst:.2e}, two-qubit closed form gap {magic_gap:.2e}"),
        )
    })
}

/// Mix `sigma` toward I/4 just far enough to make it PPT.
fn ppt_boundary(sigma: &DensityMatrix) -> DensityMatrix {
    let noise = DensityMatrix::maximally_mixed(sigma.layout().clone());
    let mix = |t: f64| DensityMatrix::mixture(&[(t, sigma), (1.0 - t, &noise)]).unwrap();
    if partial_transpose_min_eig(sigma) >= 0.0 {
        return sigma.clone();
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if partial_transpose_min_eig(&mix(mid)) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    mix(lo)
}

fn criterion_10() -> Outcome {
    timed(None, || {
        let layout = SubsystemLayout::bipartite(2).unwrap();
        let mut rng = rng_for(10, 0);
        let mut seed = 0u64;
        let mut states = 0;
        let mut violations = 0;
        let mut lowest = f64::INFINITY;
        while states < 1000 {
            seed += 1;
            let rank = 1 + (seed % 4) as usize;
            let sigma = random::random_density(&layout, rank, 10_000 + seed).unwrap();
            // Odd seeds sit on the PPT boundary, where the witness comes closest to zero.
            let rho = if seed % 2 == 1 { ppt_boundary(&sigma) } else { sigma };
            if !state::is_ppt(&rho) || partial_transpose_min_eig(&rho) < 0.0 {
                continue;
            }
            states += 1;
            let mut unitaries: Vec<ComplexMatrix> = (0..100).map(|_| random::haar_unitary(2, &mut rng)).collect();
            let config = FefConfig {
                seed,
                restarts: 4,
                ..FefConfig::default()
            };
            unitaries.push(fef::fef_optimize(&rho, 2, &config).unwrap().optimizer_unitary);
            for u in &unitaries {
                let value = witness::evaluate(&witness::witness_rotated(u).unwrap(), &rho).unwrap();
                lowest = lowest.min(value);
                if value < -1e-9 {
                    violations += 1;
                }
            }
        }
        check(
            violations == 0,
            format!(
                "{violations} violations over 1000 PPT states x (100 random + 1 optimized) unitaries, lowest {lowest:.3e}"
            ),
        )
    })
}

type Criterion = fn() -> Outcome;

fn main() {
    let criteria: [(&str, Criterion); 10] = [
        ("gamma anchor on Bell tensors", criterion_1),
        ("sum and product constructions agree", criterion_2),
        ("ideal-resource recovery", criterion_3),
        ("separable bound", criterion_4),
        ("FEF ascent matches closed form", criterion_5),
        ("Werner family", criterion_6),
        ("witness values", criterion_7),
        ("witness optimality certificate", criterion_8),
        ("witness / FEF duality", criterion_9),
        ("PPT soundness", criterion_10),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let label = format!("criterion {:>2}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str()) || label.ends_with(f.as_str())) {
            continue;
        }
        let out = run();
        println!("{label} {}: {name}: {}", if out.ok { "PASS" } else { "FAIL" }, out.detail);
        failed += usize::from(!out.ok);
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
