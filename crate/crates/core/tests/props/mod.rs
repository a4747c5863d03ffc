//! Seeded property checks shared by the `properties` and `acceptance` targets.

use std::collections::BTreeSet;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use svdamg::coarsen::{build_patterns, interpolatory_sets, rs_one_pass, strength_graph, Pattern, Splitting};
use svdamg::cycles::{additive_iteration, interpolate_up, solve, Hierarchy, MatrixKind, Mode, SolverConfig};
use svdamg::gsvd::{coarsest_gsvd, triplet_residuals, TripletSet};
use svdamg::interp::{fit_interpolation, FitRequest};
use svdamg::problems::{delaunay_edges, fd_laplacian, grid_graph_laplacian, grid_incidence, random_points};
use svdamg::sparskit::{
    dense_svd, dense_sym_generalized_eig, kaczmarz_sweep, spmv, sym_eig, transpose, triple_product, DenseMat, SparseMat,
};

type Check = Result<(), TestCaseError>;

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn check<S: Strategy>(name: &str, cases: u32, strategy: S, test: impl Fn(S::Value) -> Check) {
    if let Err(e) = runner(cases).run(&strategy, test) {
        panic!("{name}: {e}");
    }
}

fn random_sparse(rng: &mut ChaCha8Rng, m: usize, n: usize, density: f64) -> SparseMat {
    let mut t = Vec::new();
    for i in 0..m {
        for j in 0..n {
            if rng.random::<f64>() < density {
                t.push((i, j, rng.random_range(-1.0..1.0)));
            }
        }
    }
    SparseMat::from_triplets(m, n, &t).unwrap()
}

fn random_dense(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DenseMat {
    let v = (0..m * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    DenseMat::from_col_major(m, n, v).unwrap()
}

/// Mᵗ·M + shift·I for a random sparse M.
fn random_spd(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> SparseMat {
    let m = random_sparse(rng, n, n, 0.4);
    m.transpose().matmul(&m).unwrap().add_scaled(shift, &SparseMat::identity(n)).unwrap()
}

/// Weighted graph Laplacian of a random graph plus the identity.
fn random_laplacian(rng: &mut ChaCha8Rng, n: usize, degree: f64) -> SparseMat {
    let p = (degree / n as f64).min(1.0);
    let mut t = Vec::new();
    let mut diag = vec![1.0; n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                let w = rng.random_range(0.1..1.0);
                t.push((i, j, -w));
                t.push((j, i, -w));
                diag[i] += w;
                diag[j] += w;
            }
        }
    }
    t.extend(diag.into_iter().enumerate().map(|(i, d)| (i, i, d)));
    SparseMat::from_triplets(n, n, &t).unwrap()
}

fn splitting_of(n_op: &SparseMat, theta: f64) -> Splitting {
    let g = strength_graph(n_op, theta).unwrap();
    interpolatory_sets(&g, &rs_one_pass(&g))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

// ---- sparskit ----

pub fn spmv_transpose_consistency() {
    check("spmv_transpose_consistency", 64, (1usize..20, 1usize..20, any::<u64>()), |(m, n, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_sparse(&mut rng, m, n, 0.3);
        let x: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let via_t = transpose(&a).apply(&x);
        let via_flag = spmv(&a, &x, true).unwrap();
        for (p, q) in via_t.iter().zip(&via_flag) {
            prop_assert!(close(*p, *q, 1e-14), "{p} vs {q}");
        }
        Ok(())
    });
}

pub fn triple_product_preserves_spd() {
    check("triple_product_preserves_spd", 48, (2usize..30, any::<u64>()), |(n, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nc = rng.random_range(1..=n);
        // identity rows on nc distinct points give full column rank
        let mut rows: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            rows.swap(i, rng.random_range(0..=i));
        }
        let mut t = Vec::new();
        for (k, &r) in rows.iter().take(nc).enumerate() {
            t.push((r, k, 1.0));
        }
        for &r in rows.iter().skip(nc) {
            for k in 0..nc {
                if rng.random::<f64>() < 0.3 {
                    t.push((r, k, rng.random_range(-1.0..1.0)));
                }
            }
        }
        let p = SparseMat::from_triplets(n, nc, &t).unwrap();
        let b = random_spd(&mut rng, n, 0.1);
        let coarse = triple_product(&p, &b, &p).unwrap().to_dense();
        let (vals, _) = dense_sym_generalized_eig(&coarse, &DenseMat::identity(nc)).unwrap();
        prop_assert!(vals.iter().all(|&v| v > 0.0), "{vals:?}");
        Ok(())
    });
}

fn augmented(a: &DenseMat) -> DenseMat {
    let (m, n) = (a.nrows(), a.ncols());
    let mut x = DenseMat::zeros(m + n, m + n);
    for i in 0..m {
        for j in 0..n {
            x[(i, m + j)] = a[(i, j)];
            x[(m + j, i)] = a[(i, j)];
        }
    }
    x
}

fn block_diag(b: &DenseMat, c: &DenseMat) -> DenseMat {
    let (m, n) = (b.nrows(), c.nrows());
    let mut y = DenseMat::zeros(m + n, m + n);
    for i in 0..m {
        for j in 0..m {
            y[(i, j)] = b[(i, j)];
        }
    }
    for i in 0..n {
        for j in 0..n {
            y[(m + i, m + j)] = c[(i, j)];
        }
    }
    y
}

pub fn augmented_spectrum_is_symmetric() {
    check("augmented_spectrum_is_symmetric", 48, (1usize..12, any::<u64>()), |(n, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_dense(&mut rng, n, n);
        let (vals, _) = dense_sym_generalized_eig(&augmented(&d), &DenseMat::identity(2 * n)).unwrap();
        for k in 0..n {
            prop_assert!((vals[k] + vals[2 * n - 1 - k]).abs() <= 1e-10, "{vals:?}");
        }
        Ok(())
    });
}

pub fn svd_matches_gram_eigenvalues() {
    check("svd_matches_gram_eigenvalues", 64, (1usize..10, 1usize..10, any::<u64>()), |(m, n, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_dense(&mut rng, m, n);
        let svd = dense_svd(&d).unwrap();
        let (mut lam, _) = sym_eig(&d.transpose().matmul(&d)).unwrap();
        lam.sort_by(|a, b| b.total_cmp(a));
        let mut s = svd.s.clone();
        s.sort_by(|a, b| b.total_cmp(a));
        prop_assert_eq!(s.len(), m.min(n));
        for (sv, l) in s.iter().zip(&lam) {
            prop_assert!(close(*sv, l.max(0.0).sqrt(), 1e-8), "{sv} vs sqrt({l})");
        }
        Ok(())
    });
}

pub fn kaczmarz_does_not_increase_residual() {
    // diagonally dominant square systems; the error norm is checked too
    check("kaczmarz_does_not_increase_residual", 48, (2usize..25, any::<u64>()), |(n, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_laplacian(&mut rng, n, 3.0);
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let rhs = m.apply(&xs);
        let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let resid = |x: &[f64]| m.apply(x).iter().zip(&rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let err = |x: &[f64]| x.iter().zip(&xs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        for _ in 0..5 {
            let next = kaczmarz_sweep(&m, &rhs, &x, 1).unwrap();
            prop_assert!(resid(&next) <= resid(&x) * (1.0 + 1e-12) + 1e-14);
            prop_assert!(err(&next) <= err(&x) * (1.0 + 1e-12) + 1e-14);
            x = next;
        }
        Ok(())
    });
}

// ---- coarsen ----

pub fn splittings_partition_the_points() {
    check("splittings_partition_the_points", 64, (1usize..200, 0.02f64..0.5, any::<u64>()), |(n, theta, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = random_laplacian(&mut rng, n, 5.0);
        let split = splitting_of(&l, theta);
        prop_assert_eq!(split.cpoints.len() + split.fpoints.len(), n);
        let c: BTreeSet<usize> = split.cpoints.iter().copied().collect();
        let f: BTreeSet<usize> = split.fpoints.iter().copied().collect();
        prop_assert!(c.is_disjoint(&f));
        prop_assert_eq!(c.len() + f.len(), n);
        for (k, &i) in split.cpoints.iter().enumerate() {
            prop_assert_eq!(split.coarse_index[i], Some(k));
        }
        for &i in &split.fpoints {
            prop_assert_eq!(split.coarse_index[i], None);
            prop_assert!(!split.interp_sets[i].is_empty());
            prop_assert!(split.interp_sets[i].iter().all(|&j| split.is_c(j)));
        }
        let pattern = Pattern::from_splitting(&split);
        prop_assert!(pattern.rows.iter().all(|r| !r.is_empty()));
        prop_assert_eq!(splitting_of(&l, theta), split);
        Ok(())
    });
}

pub fn symmetric_kind_shares_patterns() {
    check("symmetric_kind_shares_patterns", 32, (2usize..120, any::<u64>()), |(n, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = random_laplacian(&mut rng, n, 4.0);
        let c = build_patterns(&l, 0.25, MatrixKind::Symmetric).unwrap();
        prop_assert_eq!(&c.pattern_p, &c.pattern_q);
        prop_assert_eq!(&c.split_u, &c.split_v);
        Ok(())
    });
}

// ---- interp ----

struct FitCase {
    split: Splitting,
    pattern: Pattern,
    fine: DenseMat,
    coarse: DenseMat,
    weights: Vec<f64>,
}

/// A random splitting with fit vectors that an operator on its pattern reproduces exactly,
/// optionally perturbed at F-points.
fn fit_case(seed: u64, n: usize, noise: f64) -> FitCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = random_laplacian(&mut rng, n, 4.0);
    let split = splitting_of(&l, 0.2);
    let pattern = Pattern::from_splitting(&split);
    let n_f = pattern.max_row_len() + 3;
    let coarse = random_dense(&mut rng, split.n_coarse(), n_f);
    let mut fine = DenseMat::zeros(n, n_f);
    for i in 0..n {
        let w: Vec<f64> = pattern.rows[i].iter().map(|_| rng.random_range(-1.0..1.0)).collect();
        for k in 0..n_f {
            fine[(i, k)] = if split.is_c(i) {
                coarse[(pattern.rows[i][0], k)]
            } else {
                pattern.rows[i].iter().zip(&w).map(|(&a, wa)| wa * coarse[(a, k)]).sum::<f64>() + noise * rng.random_range(-1.0..1.0)
            };
        }
    }
    let weights = (0..n_f).map(|_| rng.random_range(0.5..2.0)).collect();
    FitCase {
        split,
        pattern,
        fine,
        coarse,
        weights,
    }
}

fn fit(case: &FitCase, weights: &[f64]) -> SparseMat {
    fit_interpolation(&FitRequest {
        pattern: &case.pattern,
        split: &case.split,
        fit_vectors: &case.fine,
        coarse_values: &case.coarse,
        weights,
        level: 0,
    })
    .unwrap()
}

pub fn exact_fit_reproduces_fine_values() {
    check("exact_fit_reproduces_fine_values", 48, (2usize..80, any::<u64>()), |(n, seed)| {
        let case = fit_case(seed, n, 0.0);
        let p = fit(&case, &case.weights);
        for k in 0..case.fine.ncols() {
            let approx = p.apply(case.coarse.col(k));
            let err: f64 = approx.iter().zip(case.fine.col(k)).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let nrm: f64 = case.fine.col(k).iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!(err <= 1e-10 * nrm, "{err} vs {nrm}");
        }
        Ok(())
    });
}

pub fn doubling_weights_leaves_interpolation_unchanged() {
    check("doubling_weights_leaves_interpolation_unchanged", 48, (2usize..80, any::<u64>()), |(n, seed)| {
        let case = fit_case(seed, n, 0.3);
        let p1 = fit(&case, &case.weights);
        let doubled: Vec<f64> = case.weights.iter().map(|w| 2.0 * w).collect();
        let p2 = fit(&case, &doubled);
        prop_assert_eq!(p1.col_indices(), p2.col_indices());
        for (a, b) in p1.values().iter().zip(p2.values()) {
            prop_assert!(close(*a, *b, 1e-13), "{a} vs {b}");
        }
        Ok(())
    });
}

pub fn fitted_rows_are_least_squares_optimal() {
    check("fitted_rows_are_least_squares_optimal", 32, (2usize..60, any::<u64>()), |(n, seed)| {
        let case = fit_case(seed, n, 0.3);
        let p = fit(&case, &case.weights);
        let objective = |i: usize, w: &[f64]| -> f64 {
            (0..case.fine.ncols())
                .map(|k| {
                    let approx: f64 = case.pattern.rows[i].iter().zip(w).map(|(&a, wa)| wa * case.coarse[(a, k)]).sum();
                    case.weights[k] * (case.fine[(i, k)] - approx).powi(2)
                })
                .sum()
        };
        for &i in &case.split.fpoints {
            let base = p.row(i).1.to_vec();
            let f0 = objective(i, &base);
            for a in 0..base.len() {
                for delta in [1e-6, -1e-6] {
                    let mut w = base.clone();
                    w[a] += delta;
                    prop_assert!(objective(i, &w) >= f0 * (1.0 - 1e-12) - 1e-15, "row {i} coefficient {a}");
                }
            }
        }
        Ok(())
    });
}

// ---- gsvd ----

pub fn coarsest_gsvd_matches_dense_svd() {
    check("coarsest_gsvd_matches_dense_svd", 32, any::<u64>(), |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_dense(&mut rng, 10, 7);
        let t = coarsest_gsvd(&a.to_sparse(), &SparseMat::identity(10), &SparseMat::identity(7), 7, Mode::Dominant).unwrap();
        let mut s = dense_svd(&a).unwrap().s;
        s.sort_by(|a, b| b.total_cmp(a));
        for (x, y) in t.sigmas.iter().zip(&s) {
            prop_assert!(close(*x, *y, 1e-10), "{x} vs {y}");
        }
        Ok(())
    });
}

pub fn coarsest_gsvd_residuals_are_small() {
    check("coarsest_gsvd_residuals_are_small", 48, (1usize..10, 1usize..10, any::<u64>()), |(m, n, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_dense(&mut rng, m, n).to_sparse();
        let b = random_spd(&mut rng, m, 0.5);
        let c = random_spd(&mut rng, n, 0.5);
        for mode in [Mode::Dominant, Mode::Minimal] {
            let t = coarsest_gsvd(&a, &b, &c, m.min(n), mode).unwrap();
            for j in 0..t.len() {
                let (ru, rv) = triplet_residuals(&a, &b, &c, t.sigmas[j], t.u.col(j), t.v.col(j));
                prop_assert!(ru + rv <= 1e-9 * a.frobenius_norm(), "{mode:?} {j}: {}", ru + rv);
            }
        }
        Ok(())
    });
}

pub fn generalized_pencil_spectrum_is_symmetric() {
    check("generalized_pencil_spectrum_is_symmetric", 48, (1usize..10, any::<u64>()), |(n, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_dense(&mut rng, n, n);
        let b = random_spd(&mut rng, n, 0.5).to_dense();
        let c = random_spd(&mut rng, n, 0.5).to_dense();
        let (vals, _) = dense_sym_generalized_eig(&augmented(&a), &block_diag(&b, &c)).unwrap();
        for k in 0..n {
            prop_assert!((vals[k] + vals[2 * n - 1 - k]).abs() <= 1e-10, "{vals:?}");
        }
        Ok(())
    });
}

// ---- cycles ----

pub fn exact_triplets_are_fixed_points() {
    check("exact_triplets_are_fixed_points", 32, (3usize..9, any::<u64>(), any::<bool>()), |(n, seed, dominant)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // distinct, well separated diagonal values
        let mut d: Vec<f64> = (0..n).map(|k| 1.0 + k as f64 + rng.random_range(0.0..0.5)).collect();
        for i in (1..n).rev() {
            d.swap(i, rng.random_range(0..=i));
        }
        let mode = if dominant { Mode::Dominant } else { Mode::Minimal };
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
        if dominant {
            order.reverse();
        }
        let n_b = 2;
        let mut u = DenseMat::zeros(n, n_b);
        for j in 0..n_b {
            u[(order[j], j)] = 1.0;
        }
        let trip = TripletSet {
            sigmas: order[..n_b].iter().map(|&i| d[i]).collect(),
            u: u.clone(),
            v: u,
        };
        let cfg = SolverConfig {
            n_b,
            mode,
            kind: MatrixKind::Rectangular,
            ..SolverConfig::default()
        };
        let h = Hierarchy::new(SparseMat::diagonal(&d), mode, cfg.kind).unwrap();
        let out = additive_iteration(&h, &trip, &cfg).unwrap();
        for j in 0..n_b {
            prop_assert!(close(out.sigmas[j], trip.sigmas[j], 1e-12 * trip.sigmas[j]));
            for i in 0..n {
                prop_assert!(close(out.u[(i, j)], trip.u[(i, j)], 1e-12));
                prop_assert!(close(out.v[(i, j)], trip.v[(i, j)], 1e-12));
            }
        }
        Ok(())
    });
}

/// A small multi-level problem: FD Laplacian (symmetric, either mode) or grid incidence.
fn small_problem(choice: u8, k: usize, seed: u64) -> (SparseMat, SolverConfig) {
    let base = SolverConfig {
        n_b: 2,
        n_t: 4,
        n_mult: 2,
        n_add: 2,
        coarsest_max: 20,
        seed,
        ..SolverConfig::default()
    };
    match choice % 3 {
        0 => (
            fd_laplacian(k).unwrap(),
            SolverConfig {
                mode: Mode::Minimal,
                kind: MatrixKind::Symmetric,
                ..base
            },
        ),
        1 => (
            fd_laplacian(k).unwrap(),
            SolverConfig {
                mode: Mode::Dominant,
                kind: MatrixKind::Symmetric,
                ..base
            },
        ),
        _ => (grid_incidence(k / 2 + 2).unwrap(), base),
    }
}

fn problem_strategy() -> impl Strategy<Value = (u8, usize, u64)> {
    (0u8..3, 8usize..14, 0u64..1000)
}

pub fn interpolation_lands_exactly_in_range() {
    check("interpolation_lands_exactly_in_range", 12, (problem_strategy(), any::<u64>()), |((choice, k, seed), vseed)| {
        let (a, cfg) = small_problem(choice, k, seed);
        let out = solve(&a, &SolverConfig { n_add: 0, ..cfg }, None).unwrap();
        let h = &out.hierarchy;
        prop_assert!(h.num_levels() >= 2);
        let mut rng = ChaCha8Rng::seed_from_u64(vseed);
        for level in &h.levels[..h.num_levels() - 1] {
            let (p, q) = (level.p.as_ref().unwrap(), level.q.as_ref().unwrap());
            let coarse = TripletSet {
                sigmas: vec![1.0, 2.0],
                u: random_dense(&mut rng, p.ncols(), 2),
                v: random_dense(&mut rng, q.ncols(), 2),
            };
            let fine = interpolate_up(level, &coarse).unwrap();
            for (op, xc, xf) in [(p, &coarse.u, &fine.u), (q, &coarse.v, &fine.v)] {
                for j in 0..2 {
                    for i in 0..op.nrows() {
                        let (cols, vals) = op.row(i);
                        let expect = cols.iter().zip(vals).fold(0.0, |s, (&c, &w)| s + w * xc[(c, j)]);
                        prop_assert_eq!(xf[(i, j)].to_bits(), expect.to_bits());
                    }
                }
            }
        }
        Ok(())
    });
}

pub fn additive_phase_freezes_the_hierarchy() {
    check("additive_phase_freezes_the_hierarchy", 9, problem_strategy(), |(choice, k, seed)| {
        let (a, cfg) = small_problem(choice, k, seed);
        let setup_only = solve(&a, &SolverConfig { n_add: 0, ..cfg.clone() }, None).unwrap();
        let full = solve(&a, &SolverConfig { n_add: 4, ..cfg }, None).unwrap();
        prop_assert!(setup_only.hierarchy == full.hierarchy);
        Ok(())
    });
}

pub fn solves_are_deterministic_and_logged_completely() {
    check("solves_are_deterministic_and_logged_completely", 9, problem_strategy(), |(choice, k, seed)| {
        let (a, cfg) = small_problem(choice, k, seed);
        let one = solve(&a, &cfg, None).unwrap();
        let two = solve(&a, &cfg, None).unwrap();
        prop_assert!(one.triplets == two.triplets);
        prop_assert!(one.log == two.log);
        let (mut c1, mut c2) = (Vec::new(), Vec::new());
        one.log.write_csv(&mut c1).unwrap();
        two.log.write_csv(&mut c2).unwrap();
        prop_assert!(c1 == c2);
        let rows = String::from_utf8(c1).unwrap().lines().count();
        prop_assert_eq!(rows, 1 + (cfg.n_mult + cfg.n_add) * cfg.n_b);
        Ok(())
    });
}

pub fn threads_agree_with_serial() {
    check("threads_agree_with_serial", 6, problem_strategy(), |(choice, k, seed)| {
        let (a, cfg) = small_problem(choice, k, seed);
        let serial = solve(&a, &cfg, None).unwrap();
        let parallel = solve(&a, &SolverConfig { threads: 3, ..cfg }, None).unwrap();
        let (s, p) = (&serial.triplets, &parallel.triplets);
        for j in 0..s.len() {
            prop_assert!(close(s.sigmas[j], p.sigmas[j], 1e-12));
        }
        for (x, y) in s.u.as_slice().iter().zip(p.u.as_slice()).chain(s.v.as_slice().iter().zip(p.v.as_slice())) {
            prop_assert!(close(*x, *y, 1e-12));
        }
        Ok(())
    });
}

pub fn ritz_output_is_orthonormal() {
    check("ritz_output_is_orthonormal", 9, problem_strategy(), |(choice, k, seed)| {
        let (a, cfg) = small_problem(choice, k, seed);
        let t = solve(&a, &cfg, None).unwrap().triplets;
        for g in [t.u.transpose().matmul(&t.u), t.v.transpose().matmul(&t.v)] {
            for i in 0..g.nrows() {
                for j in 0..g.ncols() {
                    let id = if i == j { 1.0 } else { 0.0 };
                    prop_assert!(close(g[(i, j)], id, 1e-8), "({i}, {j}) = {}", g[(i, j)]);
                }
            }
        }
        Ok(())
    });
}

// ---- problems ----

pub fn fd_laplacian_is_symmetric_positive_definite() {
    check("fd_laplacian_is_symmetric_positive_definite", 20, 1usize..21, |k| {
        let a = fd_laplacian(k).unwrap();
        prop_assert_eq!(a.asymmetry(), 0.0);
        let h = std::f64::consts::PI / (k as f64 + 1.0);
        prop_assert!(4.0 - 4.0 * h.cos() > 0.0);
        if k <= 8 {
            let (vals, _) = sym_eig(&a.to_dense()).unwrap();
            prop_assert!(close(vals[0], 4.0 - 4.0 * h.cos(), 1e-12));
        }
        prop_assert!(fd_laplacian(k).unwrap() == a);
        Ok(())
    });
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

pub fn delaunay_graphs_are_planar_and_connected() {
    check("delaunay_graphs_are_planar_and_connected", 32, (3usize..150, any::<u64>()), |(n, seed)| {
        let pts = random_points(n, seed);
        let edges = delaunay_edges(&pts, seed).unwrap();
        prop_assert!(edges.len() <= 3 * n - 6 || n == 3 && edges.len() == 3);
        prop_assert!(connected(n, &edges));
        prop_assert!(edges == delaunay_edges(&random_points(n, seed), seed).unwrap());
        Ok(())
    });
}

pub fn incidence_gram_is_grid_laplacian() {
    check("incidence_gram_is_grid_laplacian", 10, 2usize..12, |k| {
        let a = grid_incidence(k).unwrap();
        let gram = a.transpose().matmul(&a).unwrap();
        prop_assert!(gram == grid_graph_laplacian(k).unwrap());
        for i in 0..k * k {
            let (x, y) = (i % k, i / k);
            let neighbours: Vec<usize> = [
                (x > 0).then(|| i - 1),
                (x + 1 < k).then(|| i + 1),
                (y > 0).then(|| i - k),
                (y + 1 < k).then(|| i + k),
            ]
            .into_iter()
            .flatten()
            .collect();
            for j in 0..k * k {
                let expect = if i == j {
                    neighbours.len() as f64
                } else if neighbours.contains(&j) {
                    -1.0
                } else {
                    0.0
                };
                prop_assert_eq!(gram.get(i, j), expect);
            }
        }
        Ok(())
    });
}

/// Every property, by name.
#[allow(dead_code)]
pub const ALL: &[(&str, fn())] = &[
    ("spmv_transpose_consistency", spmv_transpose_consistency),
    ("triple_product_preserves_spd", triple_product_preserves_spd),
    ("augmented_spectrum_is_symmetric", augmented_spectrum_is_symmetric),
    ("svd_matches_gram_eigenvalues", svd_matches_gram_eigenvalues),
    ("kaczmarz_does_not_increase_residual", kaczmarz_does_not_increase_residual),
    ("splittings_partition_the_points", splittings_partition_the_points),
    ("symmetric_kind_shares_patterns", symmetric_kind_shares_patterns),
    ("exact_fit_reproduces_fine_values", exact_fit_reproduces_fine_values),
    ("doubling_weights_leaves_interpolation_unchanged", doubling_weights_leaves_interpolation_unchanged),
    ("fitted_rows_are_least_squares_optimal", fitted_rows_are_least_squares_optimal),
    ("coarsest_gsvd_matches_dense_svd", coarsest_gsvd_matches_dense_svd),
    ("coarsest_gsvd_residuals_are_small", coarsest_gsvd_residuals_are_small),
    ("generalized_pencil_spectrum_is_symmetric", generalized_pencil_spectrum_is_symmetric),
    ("exact_triplets_are_fixed_points", exact_triplets_are_fixed_points),
    ("interpolation_lands_exactly_in_range", interpolation_lands_exactly_in_range),
    ("additive_phase_freezes_the_hierarchy", additive_phase_freezes_the_hierarchy),
    ("solves_are_deterministic_and_logged_completely", solves_are_deterministic_and_logged_completely),
    ("threads_agree_with_serial", threads_agree_with_serial),
    ("ritz_output_is_orthonormal", ritz_output_is_orthonormal),
    ("fd_laplacian_is_symmetric_positive_definite", fd_laplacian_is_symmetric_positive_definite),
    ("delaunay_graphs_are_planar_and_connected", delaunay_graphs_are_planar_and_connected),
    ("incidence_gram_is_grid_laplacian", incidence_gram_is_grid_laplacian),
];
