//! Acceptance suite: one test per criterion, each printing a PASS line.
//!
//! The suite asserts the inequalities with their stated constants on a
//! randomized instance pool (scalar, sup-norm with m <= 8, l1 with m <= 6,
//! N <= 20, exact distributions throughout), checks the solver against the
//! independent dual-program oracle, fits the unspecified constants, and
//! pins the engineering contracts (determinism, runtime caps).

use std::sync::LazyLock;
use std::time::Instant;

use rayon::prelude::*;

use rademacher::dist::{enumerate_exact, sample_mc};
use rademacher::kfunc::{k12_exact, k12_scaling_bound, ScalarSeq};
use rademacher::oracle::k12_dual_ascent;
use rademacher::rng::SplitMix64;
use rademacher::space::{CoefficientFamily, SpaceSpec};
use rademacher::verify::{
    check_median_deviation, check_moment_equiv, check_moment_facts, check_orlicz_equiv,
    check_rearrangement_equiv, check_scalar_one_sided, check_split_certificate,
    check_tail_doubling, check_tail_envelope, check_tail_lower_fit, Grids, Instance, MARGIN_TOL,
};

fn random_values(g: &mut SplitMix64, n: usize) -> Vec<f64> {
    (0..n).map(|_| 2.0 * g.next_unit()).collect()
}

fn scalar_instance(values: &[f64]) -> Instance {
    let fam = CoefficientFamily::scalar(values).unwrap();
    let dist = enumerate_exact(&fam).unwrap();
    Instance::new(fam, dist)
}

fn vector_instance(space: SpaceSpec, rows: &[Vec<f64>]) -> Instance {
    let fam = CoefficientFamily::from_rows(space, rows).unwrap();
    let dist = enumerate_exact(&fam).unwrap();
    Instance::new(fam, dist)
}

/// 110 exact instances: 40 scalar, 40 sup-norm, 30 l1, including a few
/// structured ones (identity-like, rank-one, constant-coefficient).
static SUITE: LazyLock<Vec<Instance>> = LazyLock::new(|| {
    let mut out = Vec::with_capacity(110);
    let mut g = SplitMix64::keyed(2024, 0);

    for i in 0..40usize {
        let values = match i {
            0 => vec![1.0, 1.0],
            1 => vec![1.0; 12],
            2 => (1..=10).map(|k| 1.0 / k as f64).collect(),
            _ => {
                let n = 2 + (g.next_u64() % 19) as usize; // 2..=20
                random_values(&mut g, n)
            }
        };
        out.push(scalar_instance(&values));
    }

    for i in 0..40usize {
        let (m, rows) = match i {
            0 => (2, vec![vec![1.0, 0.0], vec![0.0, 1.0]]),
            1 => (3, (0..8).map(|k| vec![1.0 / (k + 1) as f64, 0.0, 0.0]).collect()),
            _ => {
                let m = 2 + (g.next_u64() % 7) as usize; // 2..=8
                let n = 2 + (g.next_u64() % 15) as usize; // 2..=16
                (m, (0..n).map(|_| random_values(&mut g, m)).collect())
            }
        };
        out.push(vector_instance(SpaceSpec::linf(m).unwrap(), &rows));
    }

    for i in 0..30usize {
        let (m, rows) = match i {
            0 => (2, vec![vec![0.5, 0.5], vec![-0.5, 0.5]]),
            _ => {
                let m = 2 + (g.next_u64() % 5) as usize; // 2..=6
                let n = 2 + (g.next_u64() % 13) as usize; // 2..=14
                (m, (0..n).map(|_| random_values(&mut g, m)).collect())
            }
        };
        out.push(vector_instance(SpaceSpec::l1(m).unwrap(), &rows));
    }

    out
});

fn t_grid() -> Vec<f64> {
    (0..=60).map(|i| i as f64 * 0.1).collect()
}

#[test]
fn criterion_1_k_functional_matches_dual_oracle() {
    let start = Instant::now();
    let t_values = [0.1, 0.5, 1.0, 2.0, 5.0];
    let cases: Vec<(Vec<f64>, u64)> = {
        let mut g = SplitMix64::keyed(4242, 0);
        (0..1000u64)
            .map(|i| {
                let n = 1 + (g.next_u64() % 8) as usize;
                (random_values(&mut g, n), i)
            })
            .collect()
    };
    let worst = cases
        .par_iter()
        .map(|(a, i)| {
            let seq = ScalarSeq::new(a.clone()).unwrap();
            let mut worst = 0.0f64;
            for &t in &t_values {
                let primal = k12_exact(&seq, t).unwrap().value;
                let dual = k12_dual_ascent(a, t, 1000, 77 + i);
                let rel = (primal - dual).abs() / primal.max(1e-12);
                worst = worst.max(rel);
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    assert!(
        worst <= 1e-6,
        "worst relative disagreement with the dual oracle: {worst:e}"
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}, budget 60 s");
    println!(
        "[PASS] criterion 1: k12_exact vs dual-program oracle, 1000 sequences x 5 t, \
         worst rel err {worst:.2e}, {elapsed:?}"
    );
}

#[test]
fn criterion_2_k_functional_endpoints_and_calculus() {
    let mut g = SplitMix64::keyed(4243, 0);

    // Endpoints at 1e-10.
    for _ in 0..200 {
        let n = 1 + (g.next_u64() % 12) as usize;
        let a = ScalarSeq::new(random_values(&mut g, n)).unwrap();
        let edge = a.l2() / a.linf();
        for t in [0.25 * edge, 0.7 * edge, edge] {
            let k = k12_exact(&a, t).unwrap().value;
            assert!((k - t * a.l2()).abs() <= 1e-10 * (1.0 + k));
        }
        let root_n = (n as f64).sqrt();
        for t in [root_n, 1.5 * root_n, 10.0 * root_n] {
            let k = k12_exact(&a, t).unwrap().value;
            assert!((k - a.l1()).abs() <= 1e-10 * (1.0 + k));
        }
    }

    // Monotone, concave, Lipschitz on a 1000-point grid and its refinement.
    for _ in 0..10 {
        let n = 2 + (g.next_u64() % 9) as usize;
        let a = ScalarSeq::new(random_values(&mut g, n)).unwrap();
        let l2 = a.l2();
        let top = 1.2 * (n as f64).sqrt();
        for points in [1000usize, 2000] {
            let dt = top / points as f64;
            let vals: Vec<f64> = (0..=points)
                .map(|i| k12_exact(&a, i as f64 * dt).unwrap().value)
                .collect();
            for w in vals.windows(2) {
                let dv = w[1] - w[0];
                assert!(dv >= -1e-10, "not monotone");
                assert!(dv <= dt * l2 + 1e-10, "Lipschitz constant exceeded");
            }
            for w in vals.windows(3) {
                assert!(w[2] - 2.0 * w[1] + w[0] <= 1e-9, "not concave");
            }
        }
    }

    // Scaling inequality on random (s, t) pairs.
    for _ in 0..1000 {
        let n = 1 + (g.next_u64() % 10) as usize;
        let a = ScalarSeq::new(random_values(&mut g, n)).unwrap();
        let s = 4.0 * g.next_f64() + 1e-3;
        let t = 4.0 * g.next_f64() + 1e-3;
        let w = k12_scaling_bound(&a, s, t).unwrap();
        assert!(w.holds, "scaling bound failed: margin {}", w.margin);
    }
    println!(
        "[PASS] criterion 2: K-functional endpoints, monotonicity, concavity, \
         Lipschitz bound, and scaling inequality"
    );
}

#[test]
fn criterion_3_tail_envelope_with_stated_constants() {
    let start = Instant::now();
    let grid = t_grid();
    let worst = SUITE
        .par_iter()
        .map(|inst| {
            let rec = check_tail_envelope(inst, &grid).unwrap();
            assert!(
                rec.pass,
                "tail envelope failed on {}: worst margin {}",
                rec.instance, rec.worst_margin
            );
            rec.worst_margin
        })
        .reduce(|| f64::INFINITY, f64::min);
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 600, "took {elapsed:?}, budget 10 min");
    println!(
        "[PASS] criterion 3: tail envelope 4 exp(-t^2/8) beyond 2 E S + 6 Kw(t) on {} \
         instances, worst margin {worst:.3e}, {elapsed:?}",
        SUITE.len()
    );
}

#[test]
fn criterion_4_median_deviation_with_stated_constants() {
    let grid = t_grid();
    let worst = SUITE
        .par_iter()
        .map(|inst| {
            let rec = check_median_deviation(inst, &grid).unwrap();
            assert!(
                rec.pass,
                "median deviation failed on {}: worst margin {}",
                rec.instance, rec.worst_margin
            );
            rec.worst_margin
        })
        .reduce(|| f64::INFINITY, f64::min);
    println!(
        "[PASS] criterion 4: median deviation bound 4 exp(-t^2/(8 sigma^2)) on {} \
         instances with exact medians and sigma, worst margin {worst:.3e}",
        SUITE.len()
    );
}

#[test]
fn criterion_5_proof_level_facts_hold_exactly() {
    let lambda: Vec<f64> = (1..10).map(|i| i as f64 * 0.1).collect();
    let p_grid = [1.0, 2.0, 4.0, 8.0];
    let grid = t_grid();
    SUITE.par_iter().for_each(|inst| {
        // Second moment, Paley-Zygmund, and the 1/10 floor.
        let rec = check_moment_facts(inst, &lambda).unwrap();
        assert!(
            rec.pass,
            "moment facts failed on {}: {}",
            rec.instance, rec.worst_margin
        );

        // Kahane doubling margins are part of the doubling check.
        let rec = check_tail_doubling(inst, &grid, &[2.0]).unwrap();
        assert!(
            rec.worst_margin >= -MARGIN_TOL,
            "Kahane doubling failed on {}: {}",
            rec.instance,
            rec.worst_margin
        );

        // Moment chain: ||S||_p/2 <= ||S||_{2p,inf} <= ||S||_{2p} <= sqrt3 ||S||_p.
        for &p in &p_grid {
            let mp = inst.dist.moment(p).unwrap();
            let m2p = inst.dist.moment(2.0 * p).unwrap();
            let w2p = inst.dist.weak_lp_rv(2.0 * p).unwrap();
            let tol = MARGIN_TOL * (1.0 + m2p);
            assert!(0.5 * mp <= w2p + tol, "weak-Lp lower chain failed");
            assert!(w2p <= m2p + tol, "weak-Lp upper chain failed");
            assert!(m2p <= 3.0f64.sqrt() * mp + tol, "moment doubling failed");
        }
    });
    println!(
        "[PASS] criterion 5: second-moment bound, Paley-Zygmund floor, tail doubling, \
         and the moment chain hold exactly on {} instances",
        SUITE.len()
    );
}

#[test]
fn criterion_6_equivalence_ratio_envelopes() {
    let grids = Grids::default();
    #[derive(Default, Clone)]
    struct Envelope {
        min: f64,
        max: f64,
    }
    impl Envelope {
        fn new() -> Self {
            Envelope {
                min: f64::INFINITY,
                max: 0.0,
            }
        }
        fn absorb(&mut self, r: f64) {
            self.min = self.min.min(r);
            self.max = self.max.max(r);
        }
    }

    let mut rearrangement = Envelope::new();
    let mut moment = Envelope::new();
    let mut orlicz_per_q: Vec<(f64, Envelope)> =
        grids.q.iter().map(|&q| (q, Envelope::new())).collect();
    let mut archive = String::from("instance,check,parameter,ratio\n");

    for inst in SUITE.iter() {
        let rec = check_rearrangement_equiv(inst, &grids.u).unwrap();
        assert!(rec.pass, "rearrangement band failed on {}", rec.instance);
        for (u, r) in grids.u.iter().zip(&rec.values) {
            rearrangement.absorb(*r);
            archive.push_str(&format!("{},rearrangement,{u},{r}\n", rec.instance_hash));
        }

        let rec = check_moment_equiv(inst, &grids.p).unwrap();
        assert!(rec.pass, "moment band failed on {}", rec.instance);
        for (p, r) in grids.p.iter().zip(&rec.values) {
            moment.absorb(*r);
            archive.push_str(&format!("{},moment,{p},{r}\n", rec.instance_hash));
        }

        // The columnwise weak-lp identity needs sup-norm (or scalar) spaces.
        if inst.fam.dim() == 1
            || inst.fam.space().family() == rademacher::SpaceFamily::LInf
        {
            let rec = check_orlicz_equiv(inst, &grids.q).unwrap();
            assert!(rec.pass, "orlicz band failed on {}", rec.instance);
            for ((q, env), r) in orlicz_per_q.iter_mut().zip(&rec.values) {
                assert!(r.is_finite() && *r > 0.0);
                env.absorb(*r);
                archive.push_str(&format!("{},orlicz,{q},{r}\n", rec.instance_hash));
            }
        }
    }

    assert!(rearrangement.min >= 1.0 / 30.0 && rearrangement.max <= 30.0);
    assert!(moment.min >= 1.0 / 10.0 && moment.max <= 10.0);

    let archive_path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR"))
        .join("acceptance_ratio_archive.csv");
    std::fs::write(&archive_path, archive).unwrap();

    let bands: Vec<String> = orlicz_per_q
        .iter()
        .map(|(q, e)| format!("q={q}: [{:.3}, {:.3}]", e.min, e.max))
        .collect();
    println!(
        "[PASS] criterion 6: rearrangement ratios in [{:.3}, {:.3}] (band [1/30, 30]), \
         moment ratios in [{:.3}, {:.3}] (band [1/10, 10]), orlicz per-q bands {}; \
         archive at {}",
        rearrangement.min,
        rearrangement.max,
        moment.min,
        moment.max,
        bands.join(", "),
        archive_path.display()
    );
}

#[test]
fn criterion_7_fitted_constants_are_strictly_positive() {
    let grids = Grids::default();
    let mut min_c = f64::INFINITY;
    let mut min_c1 = f64::INFINITY;
    let mut min_d = f64::INFINITY;
    for inst in SUITE.iter() {
        let c = check_tail_lower_fit(inst, &grids.t).unwrap().fitted["c"];
        assert!(c > 0.0, "no positive c on {}", inst.label());
        min_c = min_c.min(c);

        let c1 = check_tail_doubling(inst, &grids.t, &grids.s).unwrap().fitted["c1"];
        assert!(c1 > 0.0, "no positive c1 on {}", inst.label());
        min_c1 = min_c1.min(c1);

        if inst.fam.dim() == 1 {
            let d = check_scalar_one_sided(inst, &grids.t).unwrap().fitted["d"];
            assert!(d > 0.0, "no positive d on {}", inst.label());
            min_d = min_d.min(d);
        }
    }
    println!(
        "[PASS] criterion 7: fitted constants strictly positive on every instance \
         (min c {min_c:.4}, min c1 {min_c1:.4}, min d {min_d:.4})"
    );
}

#[test]
fn criterion_8_split_certificate_on_sup_norm_instances() {
    let grid = t_grid();
    let mut count = 0usize;
    let mut worst_ratio = 0.0f64;
    for inst in SUITE.iter() {
        if inst.fam.space().family() != rademacher::SpaceFamily::LInf {
            continue;
        }
        count += 1;
        let rec = check_split_certificate(inst, &grid).unwrap();
        assert!(
            rec.pass,
            "split certificate failed on {}: worst margin {}",
            rec.instance, rec.worst_margin
        );
        worst_ratio = worst_ratio.max(rec.witness["max_ratio"]);
    }
    assert!(count >= 40);
    println!(
        "[PASS] criterion 8: coordinatewise split bound <= 2 Kw + 1e-8 on {count} \
         sup-norm instances (worst ratio {worst_ratio:.4})"
    );
}

#[test]
fn criterion_9_determinism_and_performance() {
    // N = 24, m = 8 exact enumeration: <= 60 s on one worker, <= 15 s on 8,
    // byte-identical outputs.
    let mut g = SplitMix64::keyed(909, 0);
    let rows: Vec<Vec<f64>> = (0..24).map(|_| random_values(&mut g, 8)).collect();
    let fam = CoefficientFamily::from_rows(SpaceSpec::linf(8).unwrap(), &rows).unwrap();

    let render = |d: &rademacher::DistSummary| -> String {
        let mut out = String::new();
        for (v, w) in d.probabilities() {
            out.push_str(&format!("{v},{w}\n"));
        }
        out
    };

    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let start = Instant::now();
    let d1 = single.install(|| enumerate_exact(&fam).unwrap());
    let t1 = start.elapsed();
    assert!(t1.as_secs() < 60, "single-threaded run took {t1:?}");

    let eight = rayon::ThreadPoolBuilder::new()
        .num_threads(8)
        .build()
        .unwrap();
    let start = Instant::now();
    let d8 = eight.install(|| enumerate_exact(&fam).unwrap());
    let t8 = start.elapsed();
    assert!(t8.as_secs() < 15, "8-worker run took {t8:?}");

    assert_eq!(d1, d8, "enumeration differs across worker counts");
    assert_eq!(render(&d1).as_bytes(), render(&d8).as_bytes());

    // Monte Carlo: fixed seed, partition-count invariant.
    let scalar = CoefficientFamily::scalar(&random_values(&mut g, 40)).unwrap();
    let m1 = single.install(|| sample_mc(&scalar, 200_000, 31).unwrap());
    let m8 = eight.install(|| sample_mc(&scalar, 200_000, 31).unwrap());
    assert_eq!(m1, m8, "Monte Carlo differs across worker counts");
    assert_eq!(render(&m1).as_bytes(), render(&m8).as_bytes());

    println!(
        "[PASS] criterion 9: N=24/m=8 enumeration in {t1:?} (1 worker) and {t8:?} \
         (8 workers) with byte-identical output; Monte Carlo partition-invariant"
    );
}
