use std::fmt::Debug;

use cpl_core::cellprobe::{
    check_memoryless, check_query_nonadaptive, run_instrumented, DynamicDs, Memory, Op, ScriptOp,
};
use cpl_core::problems::{
    prefix_sum_range_tree, BinarySearchDs, CopyCellDs, CopyCellUpdate, DisjointnessBitset,
    DisjointnessInstance, IndexingColCopy, IndexingInstance, IndexingRegister,
};
use clap::ValueEnum;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::{CheckArgs, CliResult, Ctx, DsArgs, DsKind, Report, SimulateArgs};

pub(crate) fn ds_name(kind: DsKind) -> String {
    kind.to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default()
}

fn echo_ds(r: &mut Report, a: &DsArgs) {
    r.config("ds", ds_name(a.ds))
        .config("k", a.k)
        .config("n", a.n)
        .config("w", a.w);
}

fn simulate_on<D>(
    ds: &D,
    script: &[ScriptOp<D>],
    expected: &[D::Answer],
    trace: bool,
    r: &mut Report,
) -> CliResult<()>
where
    D: DynamicDs,
{
    let run = run_instrumented(ds, script, Memory::new(ds.word_bits())?)?;
    let (tu, tq) = (run.update_stats(), run.query_stats());
    let answers: Vec<&D::Answer> = run.answers().collect();
    let wrong = answers
        .iter()
        .zip(expected)
        .position(|(got, want)| *got != want);
    r.kv("ops", script.len())
        .kv("updates", tu.ops)
        .kv("queries", tq.ops)
        .kv("t_u_max", tu.max)
        .kv("t_u_mean", format!("{:.4}", tu.mean))
        .kv("t_q_max", tq.max)
        .kv("t_q_mean", format!("{:.4}", tq.mean))
        .kv("space", run.space())
        .kv("answers_checked", answers.len().min(expected.len()));
    if let Some(i) = wrong {
        r.kv("first_wrong_answer", i)
            .kv("answer_got", format!("{:?}", answers[i]))
            .kv("answer_expected", format!("{:?}", expected[i]));
    }
    r.verdict(wrong.is_none() && answers.len() == expected.len());
    if trace {
        r.block("trace", &run.trace());
    }
    r.summary(format!(
        "{} updates at most {} cells each, {} queries at most {} cells each, {} cells of space",
        tu.ops,
        tu.max,
        tq.ops,
        tq.max,
        run.space()
    ));
    Ok(())
}

/// Indexing: every update in order, each followed by every query.
fn indexing_script<D>(inst: &IndexingInstance) -> (Vec<ScriptOp<D>>, Vec<bool>)
where
    D: DynamicDs<Input = IndexingInstance, Update = usize, Query = usize, Answer = bool>,
{
    let mut script = vec![Op::Preprocess(inst.clone())];
    let mut expected = Vec::new();
    for j in 0..inst.n() {
        script.push(Op::Update(j));
        for i in 0..inst.k() {
            script.push(Op::Query(i));
            expected.push(inst.bit(i, j));
        }
    }
    (script, expected)
}

pub(crate) fn simulate(a: &SimulateArgs, ctx: &mut Ctx) -> CliResult<Report> {
    let d = &a.ds;
    let mut r = Report::new("simulate");
    echo_ds(&mut r, d);
    r.config("trace", a.trace);
    match d.ds {
        DsKind::Colcopy => {
            let ds = IndexingColCopy::new(d.k, d.n, d.w)?;
            let inst = IndexingInstance::random(d.k, d.n, &mut ctx.rng);
            let (script, expected) = indexing_script::<IndexingColCopy>(&inst);
            simulate_on(&ds, &script, &expected, a.trace, &mut r)?;
        }
        DsKind::Register => {
            let ds = IndexingRegister::new(d.k, d.n, d.w)?;
            let inst = IndexingInstance::random(d.k, d.n, &mut ctx.rng);
            let (script, expected) = indexing_script::<IndexingRegister>(&inst);
            simulate_on(&ds, &script, &expected, a.trace, &mut r)?;
        }
        DsKind::Bitset => {
            let ds = DisjointnessBitset::new(d.n, d.w)?;
            let s = DisjointnessInstance::random(d.n, &mut ctx.rng);
            let mut order: Vec<usize> = (0..d.n).collect();
            order.shuffle(&mut ctx.rng);
            let mut script = vec![Op::Preprocess(s.clone())];
            let mut expected = Vec::new();
            let mut disjoint = true;
            for x in order {
                disjoint &= !s.contains(x);
                script.push(Op::Update(x));
                script.push(Op::Query(()));
                expected.push(disjoint);
            }
            r.kv("set", format!("{:?}", s.set()));
            simulate_on(&ds, &script, &expected, a.trace, &mut r)?;
        }
        DsKind::PrefixTree => {
            let ds = prefix_sum_range_tree(d.n)?;
            let f = ds.operator();
            let mut x: Vec<bool> = (0..d.n).map(|_| ctx.rng.gen()).collect();
            let mut script = vec![Op::Preprocess(x.clone())];
            let mut expected = Vec::new();
            for _ in 0..d.n {
                let i = ctx.rng.gen_range(0..d.n);
                x[i] = !x[i];
                script.push(Op::Update(i));
                let y = f.mul_vec(&x)?;
                for (j, bit) in y.into_iter().enumerate() {
                    script.push(Op::Query(j));
                    expected.push(bit);
                }
            }
            simulate_on(&ds, &script, &expected, a.trace, &mut r)?;
        }
        DsKind::CopyCell => {
            let ds = CopyCellDs::new(d.w)?;
            let mask = if d.w >= 64 { u64::MAX } else { (1u64 << d.w) - 1 };
            let mut script = vec![Op::Preprocess(())];
            let mut expected = Vec::new();
            for round in 1..=d.n as u64 {
                script.push(Op::Update(CopyCellUpdate::Increment));
                script.push(Op::Update(CopyCellUpdate::Copy));
                script.push(Op::Query(()));
                expected.push(round & mask);
            }
            simulate_on(&ds, &script, &expected, a.trace, &mut r)?;
        }
        DsKind::BinarySearch => {
            let ds = BinarySearchDs::new(d.n, d.w)?;
            let top = if d.w >= 64 { u64::MAX } else { (1u64 << d.w) - 1 };
            let values: Vec<u64> = (0..d.n).map(|_| ctx.rng.gen_range(0..=top)).collect();
            let mut script = vec![Op::Preprocess(values.clone())];
            let mut expected = Vec::new();
            for _ in 0..d.n {
                let q = ctx.rng.gen_range(0..=top);
                script.push(Op::Query(q));
                expected.push(values.iter().filter(|&&v| v <= q).count());
            }
            simulate_on(&ds, &script, &expected, a.trace, &mut r)?;
        }
    }
    Ok(r)
}

fn check_on<D>(
    ds: &D,
    queries: &[D::Query],
    updates: &[D::Update],
    trials: usize,
    ctx: &mut Ctx,
    r: &mut Report,
) -> CliResult<()>
where
    D: DynamicDs,
    D::Query: Debug,
{
    let q = check_query_nonadaptive(ds, queries, trials, ctx.rng.gen())?;
    let u = check_memoryless(ds, updates, trials, ctx.rng.gen())?;
    r.lines("query.", &q.to_string()).lines("update.", &u.to_string());
    r.verdict(q.passed() && u.passed());
    let word = |ok: bool| if ok { "hold" } else { "fail" };
    r.summary(format!(
        "query non-adaptivity checks {} over {} queries, memoryless update checks {} over {} updates, {trials} random memories each",
        word(q.passed()),
        queries.len(),
        word(u.passed()),
        updates.len(),
    ));
    Ok(())
}

pub(crate) fn check(a: &CheckArgs, ctx: &mut Ctx) -> CliResult<Report> {
    let d = &a.ds;
    let mut r = Report::new("check");
    echo_ds(&mut r, d);
    r.config("trials", a.trials);
    let all = |n: usize| (0..n).collect::<Vec<usize>>();
    match d.ds {
        DsKind::Colcopy => {
            let ds = IndexingColCopy::new(d.k, d.n, d.w)?;
            check_on(&ds, &all(d.k), &all(d.n), a.trials, ctx, &mut r)?;
        }
        DsKind::Register => {
            let ds = IndexingRegister::new(d.k, d.n, d.w)?;
            check_on(&ds, &all(d.k), &all(d.n), a.trials, ctx, &mut r)?;
        }
        DsKind::Bitset => {
            let ds = DisjointnessBitset::new(d.n, d.w)?;
            check_on(&ds, &[()], &all(d.n), a.trials, ctx, &mut r)?;
        }
        DsKind::PrefixTree => {
            let ds = prefix_sum_range_tree(d.n)?;
            check_on(&ds, &all(d.n), &all(d.n), a.trials, ctx, &mut r)?;
        }
        DsKind::CopyCell => {
            let ds = CopyCellDs::new(d.w)?;
            let ups = [CopyCellUpdate::Increment, CopyCellUpdate::Copy];
            check_on(&ds, &[()], &ups, a.trials, ctx, &mut r)?;
        }
        DsKind::BinarySearch => {
            let ds = BinarySearchDs::new(d.n, d.w)?;
            let top = if d.w >= 64 { u64::MAX } else { (1u64 << d.w) - 1 };
            check_on(&ds, &[0, top / 2, top], &[()], a.trials, ctx, &mut r)?;
        }
    }
    Ok(r)
}
