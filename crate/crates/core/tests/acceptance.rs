//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//! Run with `cargo test -p kacz --test acceptance -- --nocapture`.

mod common;

use std::time::Instant;

use common::*;
use kacz::experiment::{
    self, compare, metrics_for, purge_zero_rows, run_method, MethodKind, ProblemKind, StartVector,
};
use kacz::linalg::{
    dominant_singular_value, min_norm_lsq_default, project_nullspace, DenseMatrix, Vector,
    DEFAULT_TOL,
};
use kacz::problems::{build_projection_matrix, tanabe_problem, tomo_problem, ScanGeometry};
use kacz::rowaction;
use kacz::sirt;
use kacz::tanabe::{
    build_c, build_c_by_factorization, build_c_hat, build_c_hat_by_factorization,
    d_entry_bruteforce, PrecomputedIteration,
};
use rand::Rng;

fn report(n: u32, name: &str, pass: bool, detail: &str) {
    if pass {
        println!("criterion {n:2} ({name}): PASS");
    } else {
        println!("criterion {n:2} ({name}): FAIL - {detail}");
    }
    assert!(pass, "criterion {n} ({name}) failed: {detail}");
}

/// The 50 random matrices shared by criteria 1 and 2.
fn decomposition_fleet() -> Vec<DenseMatrix> {
    let mut rng = rng(101);
    (0..50)
        .map(|_| {
            let m = rng.gen_range(2..=20);
            let n = rng.gen_range(1..=15);
            random_matrix(&mut rng, m, n)
        })
        .collect()
}

#[test]
fn criterion_01_decomposition_suite() {
    let start = Instant::now();
    let mut worst_c = 0.0f64;
    let mut worst_chat = 0.0f64;
    for a in decomposition_fleet() {
        let a_s = sequential_projection_rows(&a);
        let c = build_c(&a).unwrap();
        let res = a_s.sub(&c.matmul(&a)).frobenius_norm() / a_s.frobenius_norm();
        worst_c = worst_c.max(res);

        let abar_s = return_projection_rows(&a);
        let chat = build_c_hat(&a).unwrap();
        let res = abar_s.sub(&chat.matmul(&a)).frobenius_norm() / (1.0 + abar_s.frobenius_norm());
        worst_chat = worst_chat.max(res);
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        1,
        "decomposition suite",
        worst_c <= 1e-10 && worst_chat <= 1e-10 && elapsed < 5.0,
        &format!(
            "worst C residual {worst_c:.2e}, worst C-hat residual {worst_chat:.2e}, {elapsed:.2}s"
        ),
    );
}

#[test]
fn criterion_02_factorization_equivalence() {
    let mut worst = 0.0f64;
    let mut worst_bf = 0.0f64;
    for a in decomposition_fleet() {
        let m = a.rows();
        let h = kacz::linalg::RowCorrelation::from_matrix(&a).unwrap();
        let c = build_c(&a).unwrap();
        let cf = build_c_by_factorization(&h);
        let chat = build_c_hat(&a).unwrap();
        let chatf = build_c_hat_by_factorization(&h);
        for i in 0..m {
            for j in 0..m {
                let d1 = (c[(i, j)] - cf[(i, j)]).abs() / (1.0 + c[(i, j)].abs());
                let d2 = (chat[(i, j)] - chatf[(i, j)]).abs() / (1.0 + chat[(i, j)].abs());
                worst = worst.max(d1).max(d2);
            }
        }
        if m <= 8 {
            for i in 0..m {
                for j in i + 1..m {
                    worst_bf = worst_bf.max((c[(i, j)] - d_entry_bruteforce(&h, i, j)).abs());
                }
            }
            for i in 1..m.saturating_sub(1) {
                for j in 1..i {
                    worst_bf = worst_bf.max((chat[(i, j)] - d_entry_bruteforce(&h, i, j)).abs());
                }
            }
        }
    }
    report(
        2,
        "factorization equivalence",
        worst <= 1e-12 && worst_bf <= 1e-10,
        &format!("worst builder mismatch {worst:.2e}, worst brute-force mismatch {worst_bf:.2e}"),
    );
}

#[test]
fn criterion_03_sweep_equivalence() {
    let mut rng = rng(103);
    let mut worst_kt = 0.0f64;
    let mut worst_skt = 0.0f64;
    let mut check = |a: &DenseMatrix, b: &Vector, x: &Vector| {
        let kt = PrecomputedIteration::kaczmarz_tanabe(a).unwrap();
        let via_gain = kt.step(a, b, x);
        let via_sweep = rowaction::kaczmarz_sweep(a, b, x).unwrap();
        worst_kt = worst_kt.max(via_gain.sub(&via_sweep).norm() / via_sweep.norm().max(1.0));

        let skt = PrecomputedIteration::symmetric(a).unwrap();
        let via_gain = skt.step(a, b, x);
        let via_sweep = rowaction::symmetric_sweep(a, b, x).unwrap();
        worst_skt = worst_skt.max(via_gain.sub(&via_sweep).norm() / via_sweep.norm().max(1.0));
    };
    for _ in 0..20 {
        let m = rng.gen_range(2..=16);
        let n = rng.gen_range(2..=12);
        let a = random_matrix(&mut rng, m, n);
        let x_true = random_vector(&mut rng, n);
        let b = a.matvec(&x_true);
        let x = random_vector(&mut rng, n);
        check(&a, &b, &x);
    }
    let p = tanabe_problem();
    let x0 = Vector::from_vec(vec![7.0, 6.0, 10.0, 6.0]);
    check(&p.a, &p.b, &x0);
    report(
        3,
        "sweep equivalence",
        worst_kt <= 1e-10 && worst_skt <= 1e-10,
        &format!("worst kt {worst_kt:.2e}, worst skt {worst_skt:.2e}"),
    );
}

#[test]
fn criterion_04_iteration_matrix_identity() {
    let mut rng = rng(104);
    let mut worst = 0.0f64;
    let mut check = |a: &DenseMatrix, rng: &mut rand_chacha::ChaCha8Rng| {
        let cbar = cbar_for(a);
        let pre = PrecomputedIteration::from_compatible(a, &cbar).unwrap();
        let zero_b = Vector::zeros(a.rows());
        for _ in 0..20 {
            let v = random_vector(rng, a.cols());
            // (I - A^T Cbar^T M A) v via the gain with b = 0
            let lhs = pre.step(a, &zero_b, &v);
            let rhs = rowaction::apply_return_projector(
                a,
                &rowaction::apply_sweep_projector(a, &v).unwrap(),
            )
            .unwrap();
            worst = worst.max(lhs.sub(&rhs).norm() / rhs.norm().max(1.0));
        }
    };
    for _ in 0..10 {
        let m = rng.gen_range(2..=14);
        let n = rng.gen_range(2..=12);
        let a = random_matrix(&mut rng, m, n);
        check(&a, &mut rng);
    }
    let p = tanabe_problem();
    check(&p.a, &mut rng);
    report(
        4,
        "iteration-matrix identity",
        worst <= 1e-10,
        &format!("worst residual {worst:.2e}"),
    );
}

#[test]
fn criterion_05_tanabe_exact_values() {
    let p = tanabe_problem();
    let x0 = Vector::from_vec(vec![7.0, 6.0, 10.0, 6.0]);

    let pn = project_nullspace(&p.a, &x0, DEFAULT_TOL).unwrap();
    let want_pn = [
        3.0 / 13.0 * (-2.0 / 3.0),
        3.0 / 13.0,
        3.0 / 13.0 * (-2.0 / 3.0),
        3.0 / 13.0,
    ];
    let mut worst_pn = 0.0f64;
    for (got, want) in pn.projection.iter().zip(want_pn.iter()) {
        worst_pn = worst_pn.max((got - want).abs());
    }

    let sol = min_norm_lsq_default(&p.a, &p.b).unwrap();
    let want_xd = [15.0 / 13.0, 10.0 / 13.0, 15.0 / 13.0, 10.0 / 13.0];
    let mut worst_xd = 0.0f64;
    for (got, want) in sol.x.iter().zip(want_xd.iter()) {
        worst_xd = worst_xd.max((got - want).abs());
    }

    let metrics = metrics_for(&p, &x0, None).unwrap();
    let state = run_method(&p, MethodKind::Kt, &x0, 60, &metrics).unwrap();
    let mut worst_eq = 0.0f64;
    for r in &state.history {
        worst_eq = worst_eq.max((r.err_xstar - r.err_shifted).abs() / (1.0 + r.err_xstar));
    }

    report(
        5,
        "Tanabe exact values",
        worst_pn <= 1e-10 && worst_xd <= 1e-10 && worst_eq <= 1e-10,
        &format!("P_N error {worst_pn:.2e}, x-dagger error {worst_xd:.2e}, err_xstar vs err_shifted {worst_eq:.2e}"),
    );
}

#[test]
fn criterion_06_convergence_rate_bounds() {
    let start = Instant::now();
    let p = tanabe_problem();
    let x0 = Vector::from_vec(vec![7.0, 6.0, 10.0, 6.0]);
    let sigma = sigma_restricted_oracle(&p.a);
    assert!(sigma > 0.0 && sigma < 1.0, "oracle sigma {sigma}");

    // the production estimator must agree with the independent oracle
    let power = dominant_singular_value(
        |x| {
            let qx = rowaction::apply_sweep_projector(&p.a, x).unwrap();
            rowaction::apply_sweep_projector_transpose(&p.a, &qx).unwrap()
        },
        4,
        &p.a,
        1e-12,
        10_000,
    )
    .unwrap();
    assert!(
        (power - sigma).abs() <= 1e-6,
        "power iteration {power} vs oracle {sigma}"
    );

    // e_k = y_k - x_dagger - P_N(A) x0; for this start the shift equals x*
    // exactly (criterion 5 asserts the identity), which keeps the error
    // vectors free of solver-tolerance noise
    let shift = p.x_star.clone().unwrap();

    // Kaczmarz-Tanabe: ||e_{k+1}|| <= (sigma + 1e-8) ||e_k||
    let kt = PrecomputedIteration::kaczmarz_tanabe(&p.a).unwrap();
    let mut kt_errs = Vec::new();
    let mut x = x0.clone();
    kt_errs.push(x.sub(&shift).norm());
    for _ in 0..60 {
        x = kt.step(&p.a, &p.b, &x);
        kt_errs.push(x.sub(&shift).norm());
    }
    let mut worst_kt_ratio = 0.0f64;
    for k in 0..kt_errs.len() - 1 {
        if kt_errs[k] > 1e-8 {
            worst_kt_ratio = worst_kt_ratio.max(kt_errs[k + 1] / kt_errs[k]);
        }
    }

    // symmetric variant: ||P_1 e_{k+1}|| <= (sigma^2 + 1e-8) ||P_1 e_k||,
    // plus the either/or two-step disjunction with slack 1e-12
    let skt = PrecomputedIteration::symmetric(&p.a).unwrap();
    let mut errs = Vec::new();
    let mut p1s = Vec::new();
    let mut x = x0.clone();
    let mut e = x.sub(&shift);
    errs.push(e.norm());
    p1s.push(rowaction::apply_row_projector(&p.a, 0, &e).unwrap().norm());
    for _ in 0..60 {
        x = skt.step(&p.a, &p.b, &x);
        e = x.sub(&shift);
        errs.push(e.norm());
        p1s.push(rowaction::apply_row_projector(&p.a, 0, &e).unwrap().norm());
    }
    // each bound guards the sequence it constrains: e_k for the kt clause,
    // P_1 e_k here (below ~1e-8 the measured ratio is dominated by the
    // iterate's own rounding and the bound stops being observable)
    let mut p1_ok = true;
    let mut p1_detail = String::new();
    let mut worst_p1_ratio = 0.0f64;
    for k in 0..p1s.len() - 1 {
        if p1s[k] > 1e-8 {
            worst_p1_ratio = worst_p1_ratio.max(p1s[k + 1] / p1s[k]);
            if p1s[k + 1] > (sigma * sigma + 1e-8) * p1s[k] {
                p1_ok = false;
                p1_detail = format!(
                    "P1 bound violated at k={k}: {} vs {}; ",
                    p1s[k + 1],
                    (sigma * sigma + 1e-8) * p1s[k]
                );
                break;
            }
        }
    }
    let mut disjunction_ok = true;
    let mut disjunction_detail = String::new();
    for k in 0..errs.len() - 2 {
        if errs[k] <= 1e-8 {
            break;
        }
        let first = errs[k + 1] < sigma * errs[k] + 1e-12;
        let second = errs[k + 2] < sigma * sigma * errs[k] + 1e-12;
        if !(first || second) {
            disjunction_ok = false;
            disjunction_detail = format!("disjunction violated at k={k}");
            break;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        6,
        "convergence-rate bounds",
        worst_kt_ratio <= sigma + 1e-8 && p1_ok && disjunction_ok && elapsed < 1.0,
        &format!(
            "kt worst ratio {worst_kt_ratio:.12} vs sigma {sigma:.12}; P1 worst ratio {worst_p1_ratio:.12} vs sigma^2 {:.12}; {p1_detail}{disjunction_detail}{elapsed:.2}s",
            sigma * sigma
        ),
    );
}

#[test]
fn criterion_07_ordering_reproduction() {
    let p = tanabe_problem();
    let x0 = Vector::from_vec(vec![7.0, 6.0, 10.0, 6.0]);
    let metrics = metrics_for(&p, &x0, None).unwrap();
    let kt = run_method(&p, MethodKind::Kt, &x0, 60, &metrics).unwrap();
    let skt = run_method(&p, MethodKind::Skt, &x0, 60, &metrics).unwrap();
    let kt2 = run_method(&p, MethodKind::Kt2, &x0, 60, &metrics).unwrap();

    let mut ok = true;
    let mut detail = String::new();
    for k in 0..60 {
        let e_kt = kt.history[k].err_shifted;
        let e_skt = skt.history[k].err_shifted;
        let e_kt2 = kt2.history[k].err_shifted;
        if e_kt <= 1e-10 || e_skt <= 1e-10 || e_kt2 <= 1e-10 {
            break;
        }
        if !(e_kt2 <= e_skt && e_skt <= e_kt) {
            ok = false;
            detail = format!(
                "ordering violated at k={}: kt2 {e_kt2:.6e}, skt {e_skt:.6e}, kt {e_kt:.6e}",
                k + 1
            );
            break;
        }
    }
    report(7, "ordering reproduction", ok, &detail);
}

#[test]
fn criterion_08_sirt_comparison() {
    let start = Instant::now();
    let iters = 100;

    // Tanabe, x0 = 0 (SART excluded: it converges to x* rather than x-dagger)
    let p = tanabe_problem();
    let x0 = Vector::zeros(4);
    let metrics = metrics_for(&p, &x0, None).unwrap();
    let final_err = |m: MethodKind,
                     p: &kacz::problems::ProblemInstance,
                     metrics: &experiment::Metrics,
                     x0: &Vector| {
        run_method(p, m, x0, iters, metrics)
            .unwrap()
            .history
            .last()
            .unwrap()
            .err_xdagger
    };
    let kt = final_err(MethodKind::Kt, &p, &metrics, &x0);
    let skt = final_err(MethodKind::Skt, &p, &metrics, &x0);
    let mut ok = true;
    let mut detail = String::new();
    for m in [
        MethodKind::Landweber,
        MethodKind::Cimmino,
        MethodKind::Cav,
        MethodKind::Drop,
    ] {
        let base = final_err(m, &p, &metrics, &x0);
        if !(kt < base && skt < base) {
            ok = false;
            detail = format!(
                "tanabe: kt {kt:.3e} / skt {skt:.3e} not below {} {base:.3e}",
                m.name()
            );
        }
    }

    // desk-scale tomography, x0 = 0, zero rays purged; SART included
    let g = ScanGeometry::new(12, 17, 16);
    let (pt, _) = purge_zero_rows(tomo_problem(&g));
    let x0t = Vector::zeros(pt.a.cols());
    let metrics_t = metrics_for(&pt, &x0t, None).unwrap();
    let kt_t = final_err(MethodKind::Kt, &pt, &metrics_t, &x0t);
    let skt_t = final_err(MethodKind::Skt, &pt, &metrics_t, &x0t);
    for m in [
        MethodKind::Landweber,
        MethodKind::Cimmino,
        MethodKind::Cav,
        MethodKind::Drop,
        MethodKind::Sart,
    ] {
        let base = final_err(m, &pt, &metrics_t, &x0t);
        assert!(base.is_finite(), "{} error must stay finite", m.name());
        if !(kt_t < base && skt_t < base) {
            ok = false;
            detail = format!(
                "tomo: kt {kt_t:.3e} / skt {skt_t:.3e} not below {} {base:.3e}",
                m.name()
            );
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    if elapsed >= 60.0 {
        ok = false;
        detail = format!("runtime {elapsed:.1}s");
    }
    report(
        8,
        "SIRT comparison",
        ok,
        &format!("{detail} (kt {kt:.2e}/skt {skt:.2e} on tanabe, kt {kt_t:.2e}/skt {skt_t:.2e} on tomo, {elapsed:.1}s)"),
    );
}

#[test]
fn criterion_09_tomography_generator() {
    let g = ScanGeometry::new(36, 75, 50);
    let a = build_projection_matrix(&g);
    let shape_ok = a.rows() == 2700 && a.cols() == 2500;

    // 200 random rays against the analytic square chord
    let mut rng = rng(109);
    let mut checked = 0;
    let mut worst = 0.0f64;
    while checked < 200 {
        let n_angles = rng.gen_range(1..=36);
        let n_rays = rng.gen_range(1..=31);
        let span = rng.gen_range(15.0..90.0);
        let full = rng.gen_bool(0.5);
        let geom = ScanGeometry::new(n_angles, n_rays, 50)
            .with_span(span)
            .with_full_circle(full);
        let m = build_projection_matrix(&geom);
        for _ in 0..10.min(geom.ray_count()) {
            let view = rng.gen_range(0..n_angles);
            let ray = rng.gen_range(0..n_rays);
            let sum: f64 = m.row(view * n_rays + ray).iter().sum();
            let want = square_chord(50, geom.angle(view), geom.offset(ray));
            worst = worst.max((sum - want).abs() / (1.0 + want));
            checked += 1;
        }
    }
    report(
        9,
        "tomography generator",
        shape_ok && worst <= 1e-10,
        &format!(
            "shape {}x{}, worst ray-mass residual {worst:.2e} over {checked} rays",
            a.rows(),
            a.cols()
        ),
    );
}

#[test]
fn criterion_10_cgmn_behavior() {
    // desk tomography: CGMN after 30 iterations at least matches kt
    let g = ScanGeometry::new(12, 17, 16);
    let (p, _) = purge_zero_rows(tomo_problem(&g));
    let x0 = Vector::zeros(p.a.cols());
    let metrics = metrics_for(&p, &x0, None).unwrap();
    let cgmn = run_method(&p, MethodKind::Cgmn, &x0, 30, &metrics)
        .unwrap()
        .history
        .last()
        .unwrap()
        .err_xdagger;
    let kt = run_method(&p, MethodKind::Kt, &x0, 30, &metrics)
        .unwrap()
        .history
        .last()
        .unwrap()
        .err_xdagger;

    // Tanabe: the solver surfaces breakdown or stagnation instead of
    // diverging silently
    let pt = tanabe_problem();
    let out = sirt::cgmn_solve(&pt.a, &pt.b, &Vector::zeros(4), 30, DEFAULT_TOL).unwrap();
    let surfaced = out.converged || out.breakdown.is_some();

    report(
        10,
        "CGMN behavior",
        cgmn <= kt && surfaced,
        &format!(
            "cgmn {cgmn:.3e} vs kt {kt:.3e}; tanabe outcome converged={} breakdown={:?}",
            out.converged, out.breakdown
        ),
    );
}

#[test]
fn criterion_11_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let methods = MethodKind::all();
    let mut ok = true;
    let mut detail = String::new();

    for (dir_a, dir_b, problem, x0, iters) in [
        (
            tmp.path().join("tan-a"),
            tmp.path().join("tan-b"),
            ProblemKind::Tanabe,
            StartVector::Literal(vec![7.0, 6.0, 10.0, 6.0]),
            30usize,
        ),
        (
            tmp.path().join("tomo-a"),
            tmp.path().join("tomo-b"),
            ProblemKind::Tomo(ScanGeometry::new(12, 17, 16)),
            StartVector::Zeros,
            10usize,
        ),
    ] {
        compare(&problem, methods, &x0, iters, &dir_a).unwrap();
        compare(&problem, methods, &x0, iters, &dir_b).unwrap();
        for m in methods {
            let fa = std::fs::read(dir_a.join(format!("{}.csv", m.name()))).unwrap();
            let fb = std::fs::read(dir_b.join(format!("{}.csv", m.name()))).unwrap();
            if fa != fb {
                ok = false;
                detail = format!("{} differs between runs", m.name());
            }
        }
    }
    report(11, "determinism", ok, &detail);
}
