//! End-to-end acceptance checks. Runs as a plain binary so every criterion
//! prints its own PASS/FAIL line; exits nonzero if any criterion fails.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cpl_core::cellprobe::{
    check_memoryless, check_query_nonadaptive, run_instrumented, AdaptivityFailure, DynamicDs,
    Memory, Op,
};
use cpl_core::circuits::{
    circuit_to_ds, ds_to_circuit, exhaustive_factorize, greedy_cse_factorize,
    mm_partition_audit, naive_mm_circuit, verify_mm_circuit, Factorization,
};
use cpl_core::encodings::{verify_disjointness, verify_indexing};
use cpl_core::operators::{
    discrepancy_bruteforce, gram_eigenvalues, grid_lines_instance, incidence_matrix,
    intersection_profile, parse_geometry, prefix_sum_operator, DEFAULT_JACOBI_TOL,
};
use cpl_core::problems::{
    prefix_sum_range_tree, CopyCellDs, CopyCellUpdate, DisjointnessBitset,
    DisjointnessInstance, DroppedUpdate, IndexingColCopy, IndexingInstance, IndexingRegister,
};
use cpl_core::BitMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn within(start: Instant, limit: Duration) -> Outcome {
    let took = start.elapsed();
    ensure!(took < limit, "took {took:.2?}, limit {limit:?}");
    Ok(format!("{took:.2?}"))
}

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn indexing_round_trips() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut runs = 0;
    for (k, n, w) in [(4, 4, 8), (8, 8, 8), (8, 16, 16)] {
        let colcopy = IndexingColCopy::new(k, n, w).map_err(|e| e.to_string())?;
        let register = IndexingRegister::new(k, n, w).map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let inst = IndexingInstance::random(k, n, &mut rng);
            for (name, r) in [
                ("colcopy", verify_indexing(&colcopy, &inst)),
                ("register", verify_indexing(&register, &inst)),
            ] {
                let r = r.map_err(|e| e.to_string())?;
                ensure!(r.roundtrip && r.passed(), "{name} k={k} n={n} w={w}: {r}");
                ensure!(r.length_bits >= k * n, "{name} k={k} n={n} w={w}: {} < {}", r.length_bits, k * n);
                runs += 1;
            }
        }
    }
    within(start, Duration::from_secs(5)).map(|t| format!("{runs} round trips in {t}"))
}

fn disjointness_exhaustive() -> Outcome {
    let start = Instant::now();
    let ds = DisjointnessBitset::new(8, 8).map_err(|e| e.to_string())?;
    for mask in 0u64..256 {
        let s = DisjointnessInstance::from_mask(8, mask);
        let r = verify_disjointness(&ds, &s).map_err(|e| e.to_string())?;
        ensure!(r.passed(), "S={mask:08b}: {r}");
        let tq = r.details.iter().find(|(k, _)| *k == "t_q").map(|(_, v)| v.as_str());
        ensure!(tq == Some("2"), "S={mask:08b}: t_q {tq:?}");
        ensure!(r.length_bits == 3 * 2 * 8, "S={mask:08b}: length {}", r.length_bits);
        ensure!(r.length_bits >= 8, "length below n");
    }
    within(start, Duration::from_secs(10)).map(|t| format!("256 sets, 48 bits each, in {t}"))
}

fn copy_cell_contract() -> Outcome {
    let ds = CopyCellDs::new(8).map_err(|e| e.to_string())?;
    let q = check_query_nonadaptive(&ds, &[()], 64, 3).map_err(|e| e.to_string())?;
    ensure!(q.passed(), "query check: {q}");
    let ups = [CopyCellUpdate::Increment, CopyCellUpdate::Copy];
    let r = check_memoryless(&ds, &ups, 64, 3).map_err(|e| e.to_string())?;
    ensure!(r.trials == 64, "ran {} trials", r.trials);
    match &r.failure {
        Some(AdaptivityFailure::NonLocalWrite { cell, depends_on, .. }) => {
            ensure!(*cell == CopyCellDs::COPY, "named cell @{cell}");
            ensure!(depends_on.contains(&CopyCellDs::COUNTER), "dependency {depends_on:?}");
        }
        other => return Err(format!("expected a non-local write, got {other:?}")),
    }
    let text = r.to_string();
    ensure!(text.contains("cell=@2"), "report does not name the copy cell:\n{text}");
    Ok("address sequences stable, write to @2 depends on @1".into())
}

fn compiler_exactness() -> Outcome {
    let ds = prefix_sum_range_tree(8).map_err(|e| e.to_string())?;
    let c = ds_to_circuit(&ds);
    ensure!(c.size() == 45, "circuit has {} wires", c.size());
    let b = ds.wire_bounds();
    ensure!(b.max_tu == 4 && b.max_tq == 3, "times {} {}", b.max_tu, b.max_tq);
    ensure!(45 <= 8 * b.max_tu + 8 * b.max_tq && b.worst_case_bound() == 56, "bound {}", b.worst_case_bound());
    let back = circuit_to_ds(&c).map_err(|e| e.to_string())?;
    ensure!(back == ds, "round trip changed the structure");
    // averages as integer cross-multiplications: Σt_u / n <= s / n, Σt_q / m <= s / m
    ensure!(b.v_weight == 32 && b.q_weight == 13, "weights {} {}", b.v_weight, b.q_weight);
    ensure!(b.v_weight <= 45 && b.q_weight <= 45, "averages exceed s/n or s/m");
    ensure!(b.avg_tu() == 4.0 && b.avg_tq() == 13.0 / 8.0, "averages {} {}", b.avg_tu(), b.avg_tq());
    ensure!(b.avg_tu_bound() == 45.0 / 8.0 && b.avg_tq_bound() == 45.0 / 8.0, "bounds");
    Ok("45 wires <= 56, round trip exact, 4 and 13/8 under 45/8".into())
}

fn matmul_audit() -> Outcome {
    let start = Instant::now();
    let c = naive_mm_circuit(4).map_err(|e| e.to_string())?;
    verify_mm_circuit(&c, 4, 100, 5).map_err(|e| e.to_string())?;
    let audit = mm_partition_audit(&c, 4, 50, 5).map_err(|e| e.to_string())?;
    ensure!(audit.passed(), "{audit}");
    for col in &audit.columns {
        ensure!(col.sum() == 32 && col.sum() >= 16, "column {}: {}", col.column, col.sum());
        ensure!(col.roundtrips == 50, "column {}: {} round trips", col.column, col.roundtrips);
    }
    ensure!(audit.pairwise_disjoint, "column wire sets overlap");
    ensure!(audit.wires == 192 && audit.size_bound() == 64, "size {}", audit.wires);
    within(start, Duration::from_secs(5)).map(|t| format!("32 >= 16 per column, 192 >= 64, in {t}"))
}

fn factorization() -> Outcome {
    let ones = BitMatrix::ones(2, 2);
    let e = exhaustive_factorize(&ones, 2, 1).map_err(|e| e.to_string())?;
    ensure!(e.wires() == 4 && Factorization::trivial(&ones).wires() == 6, "ones: {}", e.wires());
    ensure!(greedy_cse_factorize(&ones).wires() == 4, "greedy disagrees on ones");
    for n in 1..=4 {
        let id = BitMatrix::identity(n);
        let e = exhaustive_factorize(&id, n, 1).map_err(|e| e.to_string())?;
        ensure!(e.wires() == 2 * n && e.computes(&id), "I_{n}: {}", e.wires());
        ensure!(greedy_cse_factorize(&id).wires() == 2 * n, "greedy disagrees on I_{n}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for t in 0..50 {
        let f = BitMatrix::random(8, 8, &mut rng);
        let g = greedy_cse_factorize(&f);
        ensure!(g.computes(&f), "trial {t}: Q·V != F");
        ensure!(g.wires() <= Factorization::trivial(&f).wires(), "trial {t}: above trivial");
    }
    Ok("ones 4 < 6, I_n 2n for n <= 4, greedy sound on 50 operators".into())
}

fn operator_properties() -> Outcome {
    let mut shipped = Vec::new();
    for p in [2usize, 3, 5, 7] {
        let g = grid_lines_instance(p).map_err(|e| e.to_string())?;
        let prof = intersection_profile(&g.matrix);
        ensure!(prof.per_range.iter().all(|&c| c == p), "p={p}: row weights");
        ensure!(prof.pairwise_max <= 1, "p={p}: two lines share {} points", prof.pairwise_max);
        ensure!(g.matrix.total_weight() == p * p * p, "p={p}: incidences");
        shipped.push((format!("grid{p}"), g.matrix));
    }
    shipped.push(("prefix16".into(), prefix_sum_operator(16).map_err(|e| e.to_string())?));
    for entry in std::fs::read_dir(fixtures()).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        match path.extension().and_then(|e| e.to_str()) {
            Some("mat") => shipped.push((name, BitMatrix::parse_text(&text).map_err(|e| e.to_string())?)),
            Some("geo") => {
                let (pts, rs) = parse_geometry(&text).map_err(|e| e.to_string())?;
                shipped.push((name, incidence_matrix(&pts, &rs).map_err(|e| e.to_string())?));
            }
            _ => {}
        }
    }
    for (name, a) in &shipped {
        let eig = gram_eigenvalues(a, DEFAULT_JACOBI_TOL).map_err(|e| e.to_string())?;
        let trace: f64 = eig.iter().sum();
        let gap = (trace - a.total_weight() as f64).abs();
        ensure!(gap <= 1e-8, "{name}: eigenvalue sum off by {gap:e}");
    }
    for n in 1..=8 {
        let d = discrepancy_bruteforce(&BitMatrix::identity(n), 1).map_err(|e| e.to_string())?;
        ensure!(d == 1, "disc(I_{n}) = {d}");
    }
    let d = discrepancy_bruteforce(&BitMatrix::ones(2, 2), 1).map_err(|e| e.to_string())?;
    ensure!(d == 0, "disc(ones 2x2) = {d}");
    Ok(format!("grids p in {{2,3,5,7}}, trace identity on {} matrices", shipped.len()))
}

/// Answers of `ds` after each cumulative update, for every query.
fn indexing_answers<D>(ds: &D, inst: &IndexingInstance) -> Vec<bool>
where
    D: DynamicDs<Input = IndexingInstance, Update = usize, Query = usize, Answer = bool>,
{
    let mut script = vec![Op::Preprocess(inst.clone())];
    for j in 0..inst.n() {
        script.push(Op::Update(j));
        script.extend((0..inst.k()).map(Op::Query));
    }
    let run = run_instrumented(ds, &script, Memory::new(ds.word_bits()).unwrap()).unwrap();
    run.answers().copied().collect()
}

fn dropped_update_refuted() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut exercised, mut detected, mut clean) = (0, 0, 0);
    for trial in 0..100 {
        let inst = IndexingInstance::random(8, 8, &mut rng);
        let j = rng.gen_range(0..8);
        let truth: Vec<bool> = (0..8).flat_map(|jj| (0..8).map(move |i| (i, jj))).map(|(i, jj)| inst.bit(i, jj)).collect();
        let colcopy = DroppedUpdate::new(IndexingColCopy::new(8, 8, 8).unwrap(), j);
        let register = DroppedUpdate::new(IndexingRegister::new(8, 8, 8).unwrap(), j);
        for (name, answers, report) in [
            ("colcopy", indexing_answers(&colcopy, &inst), verify_indexing(&colcopy, &inst)),
            ("register", indexing_answers(&register, &inst), verify_indexing(&register, &inst)),
        ] {
            let r = report.map_err(|e| e.to_string())?;
            ensure!(!r.sub_entropy(), "trial {trial} {name}: lossless below entropy");
            if answers != truth {
                exercised += 1;
                ensure!(!r.passed() && r.failure.is_some(), "trial {trial} {name}: dropped update {j} went unnoticed");
                detected += 1;
            } else {
                ensure!(r.passed(), "trial {trial} {name}: false alarm: {r}");
                clean += 1;
            }
        }

        let s = DisjointnessInstance::random(8, &mut rng);
        let x = rng.gen_range(0..8);
        let ds = DroppedUpdate::new(DisjointnessBitset::new(8, 8).unwrap(), x);
        let r = verify_disjointness(&ds, &s).map_err(|e| e.to_string())?;
        ensure!(!r.sub_entropy(), "trial {trial} disjointness: lossless below entropy");
        // an insert outside S never changes an answer, so only x in S is exercised
        if s.contains(x) {
            exercised += 1;
            ensure!(!r.passed() && r.failure.is_some(), "trial {trial}: dropped insert {x} went unnoticed for S={:?}", s.set());
            detected += 1;
        } else {
            ensure!(r.passed(), "trial {trial} disjointness: false alarm: {r}");
            clean += 1;
        }
    }
    ensure!(exercised > 0, "only {exercised} runs touched the dropped data");
    Ok(format!("{detected}/{exercised} exercised runs caught, {clean} unaffected runs decoded cleanly"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("indexing protocol round trips at or above k*n bits", indexing_round_trips),
        ("disjointness protocol exhaustive at n=8, 48 bits", disjointness_exhaustive),
        ("copy-cell structure fails the memoryless check", copy_cell_contract),
        ("range tree compiles to 45 wires and back", compiler_exactness),
        ("4x4 multiplication circuit partition audit", matmul_audit),
        ("factorization optima and greedy soundness", factorization),
        ("grid lines properties, trace identity, discrepancy", operator_properties),
        ("dropped updates never decode silently", dropped_update_refuted),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
