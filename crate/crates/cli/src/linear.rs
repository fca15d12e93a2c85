use std::path::Path;

use cpl_core::circuits::{
    circuit_to_ds, ds_to_circuit, exhaustive_factorize, greedy_cse_factorize, Depth2Circuit,
    Factorization, LinearDs,
};
use cpl_core::Error;

use crate::{
    parse_file, read_matrix, write_file, CliError, CliResult, CompileArgs, CompileTarget, Ctx,
    FactorMode, FactorizeArgs, Report,
};

fn path_or(p: &Option<impl AsRef<Path>>, missing: &str) -> String {
    p.as_ref()
        .map_or(missing.to_string(), |p| p.as_ref().display().to_string())
}

fn need<'a>(p: &'a Option<std::path::PathBuf>, flag: &str) -> CliResult<&'a Path> {
    p.as_deref()
        .ok_or_else(|| CliError::Usage(format!("{flag} is required here")))
}

fn put_bounds(r: &mut Report, ds: &LinearDs) {
    let b = ds.wire_bounds();
    r.lines("", &b.to_string()).kv("bounds_hold", b.holds());
    r.verdict(b.holds());
    r.summary(format!(
        "{} wires, at most n*t_u + m*t_q = {}; average update time {:.3} <= {:.3}, average query time {:.3} <= {:.3}",
        b.wires(),
        b.worst_case_bound(),
        b.avg_tu(),
        b.avg_tu_bound(),
        b.avg_tq(),
        b.avg_tq_bound()
    ));
}

pub(crate) fn compile(a: &CompileArgs) -> CliResult<Report> {
    let mut r = Report::new("compile");
    r.config("to", match a.to {
        CompileTarget::Circuit => "circuit",
        CompileTarget::Ds => "ds",
    })
    .config("v", path_or(&a.v, "none"))
    .config("q", path_or(&a.q, "none"))
    .config("circuit", path_or(&a.circuit, "none"));
    match a.to {
        CompileTarget::Circuit => {
            let v = read_matrix(need(&a.v, "--v")?)?;
            let q = read_matrix(need(&a.q, "--q")?)?;
            let ds = LinearDs::new(v, q)?;
            let c = ds_to_circuit(&ds);
            let back = circuit_to_ds(&c)?;
            r.kv("roundtrip", back == ds).verdict(back == ds);
            put_bounds(&mut r, &ds);
            match &a.circuit {
                Some(p) => {
                    write_file(p, &c.to_text())?;
                }
                None => {
                    r.block("circuit", &c.to_text());
                }
            }
        }
        CompileTarget::Ds => {
            let c = parse_file(need(&a.circuit, "--circuit")?, Depth2Circuit::parse_text)?;
            let ds = circuit_to_ds(&c)?;
            let again = ds_to_circuit(&ds);
            r.kv("roundtrip", again == c).verdict(again == c);
            put_bounds(&mut r, &ds);
            for (path, m, name) in [(&a.v, ds.v(), "v"), (&a.q, ds.q(), "q")] {
                match path {
                    Some(p) => write_file(p, &m.to_text())?,
                    None => {
                        r.block(name, &m.to_text());
                    }
                }
            }
        }
    }
    Ok(r)
}

pub(crate) fn factorize(a: &FactorizeArgs, ctx: &Ctx) -> CliResult<Report> {
    let f = read_matrix(&a.input)?;
    let mut r = Report::new("factorize");
    let s_max = a.s_max.unwrap_or(f.cols());
    r.config("input", a.input.display())
        .config("mode", match a.mode {
            FactorMode::Exhaustive => "exhaustive",
            FactorMode::Greedy => "greedy",
        })
        .config("s_max", match a.mode {
            FactorMode::Exhaustive => s_max.to_string(),
            FactorMode::Greedy => "unused".into(),
        });
    let fac = match a.mode {
        FactorMode::Exhaustive => match exhaustive_factorize(&f, s_max, ctx.threads) {
            Ok(fac) => fac,
            Err(Error::NoFactorization { s_max }) => {
                r.kv("rows", f.rows())
                    .kv("cols", f.cols())
                    .kv("rank", f.rank())
                    .kv("failure", format!("no factorization with s <= {s_max}"))
                    .verdict(false);
                r.summary(format!(
                    "violated: rank {} exceeds the middle layer limit {s_max}",
                    f.rank()
                ));
                return Ok(r);
            }
            Err(e) => return Err(e.into()),
        },
        FactorMode::Greedy => greedy_cse_factorize(&f),
    };
    let trivial = Factorization::trivial(&f).wires();
    let ok = fac.computes(&f);
    let ds = fac.clone().into_linear_ds();
    let (tu, tq) = {
        let b = ds.wire_bounds();
        (b.max_tu, b.max_tq)
    };
    r.kv("wires", fac.wires())
        .kv("s", fac.s())
        .kv("rows", f.rows())
        .kv("cols", f.cols())
        .kv("rank", f.rank())
        .kv("trivial_wires", trivial)
        .kv("max_tu", tu)
        .kv("max_tq", tq)
        .kv("tu_tq_product", tu * tq)
        .kv("product_equals_input", ok)
        .verdict(ok);
    r.block("V", &fac.v.to_text()).block("Q", &fac.q.to_text());
    if let Some(p) = &a.v_out {
        write_file(p, &fac.v.to_text())?;
    }
    if let Some(p) = &a.q_out {
        write_file(p, &fac.q.to_text())?;
    }
    if let Some(p) = &a.circuit_out {
        write_file(p, &ds_to_circuit(&ds).to_text())?;
    }
    r.summary(format!(
        "F ({}x{}) = Q*V through {} middle gates with {} wires, against {} for the direct circuit",
        f.rows(),
        f.cols(),
        fac.s(),
        fac.wires(),
        trivial
    ));
    Ok(r)
}
