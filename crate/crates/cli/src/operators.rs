use cpl_core::operators::{
    count_large, discrepancy_bruteforce, discrepancy_sample, gram_eigenvalues, grid_lines_instance,
    incidence_matrix, intersection_profile, parse_geometry, prefix_sum_operator,
    MAX_BRUTEFORCE_COLS, MAX_SPECTRUM_COLS,
};
use cpl_core::BitMatrix;
use rand::Rng;

use crate::{
    parse_file, read_file, write_file, AnalyzeArgs, CliError, CliResult, Ctx, GenArgs,
    OperatorKind, Output, Report,
};

fn geometry_matrix(text: &str) -> cpl_core::Result<BitMatrix> {
    let (points, ranges) = parse_geometry(text)?;
    incidence_matrix(&points, &ranges)
}

/// Geometry files open with `DIM` after any comments.
fn is_geometry(text: &str) -> bool {
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|l| l.split_whitespace().next() == Some("DIM"))
}

pub(crate) fn gen_operator(a: &GenArgs) -> CliResult<Output> {
    let mut r = Report::new("gen-operator");
    let m = match a.kind {
        OperatorKind::PrefixSum => {
            r.config("kind", "prefix-sum").config("n", a.n);
            prefix_sum_operator(a.n)?
        }
        OperatorKind::GridLines => {
            r.config("kind", "grid-lines").config("p", a.p);
            let g = grid_lines_instance(a.p)?;
            r.kv("points", g.points.len())
                .kv("lines", g.lines.len())
                .kv("column_order", "point (x,y) at x*p+y")
                .kv("row_order", "line y=a*x+b (mod p) at a*p+b");
            g.matrix
        }
        OperatorKind::Incidence => {
            let path = a
                .input
                .as_deref()
                .ok_or_else(|| CliError::Usage("incidence needs --input <geometry file>".into()))?;
            r.config("kind", "incidence").config("input", path.display());
            parse_file(path, geometry_matrix)?
        }
    };
    let Some(out) = &a.output else {
        return Ok(Output::Text(m.to_text()));
    };
    write_file(out, &m.to_text())?;
    r.config("output", out.display())
        .kv("rows", m.rows())
        .kv("cols", m.cols())
        .kv("total_weight", m.total_weight());
    r.summary(format!(
        "wrote a {}x{} operator with {} ones to {}",
        m.rows(),
        m.cols(),
        m.total_weight(),
        out.display()
    ));
    Ok(Output::Report(r))
}

/// Six decimals, without a sign on values that round to zero.
fn fixed6(x: f64) -> String {
    if x.abs() < 5e-7 {
        "0.000000".into()
    } else {
        format!("{x:.6}")
    }
}

fn min_max(v: &[usize]) -> (usize, usize) {
    (
        v.iter().copied().min().unwrap_or(0),
        v.iter().copied().max().unwrap_or(0),
    )
}

pub(crate) fn analyze(a: &AnalyzeArgs, ctx: &mut Ctx) -> CliResult<Report> {
    let text = read_file(&a.input)?;
    let geometry = is_geometry(&text);
    let m = if geometry {
        parse_file(&a.input, geometry_matrix)?
    } else {
        parse_file(&a.input, BitMatrix::parse_text)?
    };
    let mut r = Report::new("analyze");
    r.config("input", a.input.display())
        .config("format", if geometry { "geometry" } else { "matrix" })
        .config("threshold", a.threshold.map_or("none".into(), |t| t.to_string()))
        .config("tol", a.tol)
        .config("trials", a.trials);

    let (rmin, rmax) = min_max(&m.row_weights());
    let (cmin, cmax) = min_max(&m.col_weights());
    r.kv("rows", m.rows())
        .kv("cols", m.cols())
        .kv("total_weight", m.total_weight())
        .kv("rank", m.rank())
        .kv("row_weight_min", rmin)
        .kv("row_weight_max", rmax)
        .kv("col_weight_min", cmin)
        .kv("col_weight_max", cmax);

    let prof = intersection_profile(&m);
    r.kv("pairwise_max", prof.pairwise_max)
        .kv(
            "pairwise_argmax",
            prof.pairwise_argmax
                .map_or("none".into(), |(i, j)| format!("{i},{j}")),
        )
        .kv("identical_pairs", prof.identical_pairs.len());
    r.summary(format!(
        "{} ranges over {} points; ranges hold {rmin} to {rmax} points, two ranges share at most {}",
        m.rows(),
        m.cols(),
        prof.pairwise_max
    ));

    if m.cols() <= MAX_SPECTRUM_COLS {
        let eig = gram_eigenvalues(&m, a.tol)?;
        let sum: f64 = eig.iter().sum();
        let gap = (sum - m.total_weight() as f64).abs();
        let slack = m.cols() as f64 * a.tol;
        r.kv("eig_max", fixed6(eig.first().copied().unwrap_or(0.0)))
            .kv("eig_min", fixed6(eig.last().copied().unwrap_or(0.0)))
            .kv("eig_sum", fixed6(sum))
            .kv("trace_gap", format!("{gap:.3e}"))
            .kv("trace_identity", gap <= slack)
            .verdict(gap <= slack);
        if let Some(t) = a.threshold {
            r.kv("count_large", count_large(&m, t, a.tol)?);
        }
        r.summary(format!(
            "largest singular value {:.4}, eigenvalue sum {sum:.4} against total weight {}",
            eig.first().copied().unwrap_or(0.0).max(0.0).sqrt(),
            m.total_weight()
        ));
    } else {
        r.kv("spectrum", format!("skipped, more than {MAX_SPECTRUM_COLS} columns"));
    }

    if m.cols() <= MAX_BRUTEFORCE_COLS {
        let d = discrepancy_bruteforce(&m, ctx.threads)?;
        r.kv("discrepancy", d).kv("discrepancy_method", "exact");
        r.summary(format!("discrepancy is exactly {d}"));
    } else {
        let d = discrepancy_sample(&m, a.trials, ctx.rng.gen())?;
        r.kv("discrepancy_upper", d).kv("discrepancy_method", "sampled");
        r.summary(format!("best of {} random colorings reaches {d}, an upper bound", a.trials));
    }
    Ok(r)
}
