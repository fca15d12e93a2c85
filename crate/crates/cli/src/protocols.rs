use cpl_core::circuits::{mm_partition_audit, naive_mm_circuit, Depth2Circuit};
use cpl_core::encodings::{verify_disjointness, verify_indexing, verify_mm_column, ProtocolReport};
use cpl_core::problems::{
    DisjointnessBitset, DisjointnessInstance, DroppedUpdate, IndexingColCopy, IndexingInstance,
    IndexingRegister,
};
use cpl_core::{BitMatrix, Error};
use rand::Rng;

use crate::structures::ds_name;
use crate::{parse_file, CliError, CliResult, Ctx, DsKind, EncodeArgs, Protocol, Report};

fn put_protocol(r: &mut Report, pr: &ProtocolReport, hex: bool) {
    let text = pr.to_string();
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with("result=")).collect();
    r.lines("", &body.join("\n"));
    if hex {
        r.kv("message_hex", pr.message.to_hex());
    }
    r.verdict(pr.passed());
    r.summary(format!(
        "{} bits sent for {} bits of entropy (accounting predicts {}), round trip {}",
        pr.length_bits,
        pr.entropy_bits,
        pr.formula_bits,
        if pr.roundtrip { "exact" } else { "lost information" }
    ));
    if let Some(why) = &pr.failure {
        r.summary(format!("violated: {why}"));
    }
}

pub(crate) fn encode_verify(a: &EncodeArgs, ctx: &mut Ctx) -> CliResult<Report> {
    let mut r = Report::new("encode-verify");
    let proto = match a.protocol {
        Protocol::Indexing => "indexing",
        Protocol::Disjointness => "disjointness",
        Protocol::Matmul => "matmul",
    };
    r.config("protocol", proto);
    match a.protocol {
        Protocol::Indexing => {
            let kind = a.ds.unwrap_or(DsKind::Colcopy);
            let inst = match &a.input {
                Some(p) => parse_file(p, IndexingInstance::parse_text)?,
                None => IndexingInstance::random(a.k, a.n, &mut ctx.rng),
            };
            r.config("ds", ds_name(kind))
                .config("k", inst.k())
                .config("n", inst.n())
                .config("w", a.w);
            echo_common(&mut r, a);
            let pr = match kind {
                DsKind::Colcopy => {
                    let ds = IndexingColCopy::new(inst.k(), inst.n(), a.w)?;
                    match a.drop_update {
                        Some(j) => verify_indexing(&DroppedUpdate::new(ds, j), &inst)?,
                        None => verify_indexing(&ds, &inst)?,
                    }
                }
                DsKind::Register => {
                    let ds = IndexingRegister::new(inst.k(), inst.n(), a.w)?;
                    match a.drop_update {
                        Some(j) => verify_indexing(&DroppedUpdate::new(ds, j), &inst)?,
                        None => verify_indexing(&ds, &inst)?,
                    }
                }
                other => return Err(unsupported(other, "indexing", "colcopy, register")),
            };
            put_protocol(&mut r, &pr, a.hex);
        }
        Protocol::Disjointness => {
            let kind = a.ds.unwrap_or(DsKind::Bitset);
            if kind != DsKind::Bitset {
                return Err(unsupported(kind, "disjointness", "bitset"));
            }
            let inst = match &a.input {
                Some(p) => parse_file(p, DisjointnessInstance::parse_text)?,
                None => DisjointnessInstance::random(a.n, &mut ctx.rng),
            };
            r.config("ds", ds_name(kind))
                .config("n", inst.n())
                .config("w", a.w);
            echo_common(&mut r, a);
            let ds = DisjointnessBitset::new(inst.n(), a.w)?;
            let pr = match a.drop_update {
                Some(x) => verify_disjointness(&DroppedUpdate::new(ds, x), &inst)?,
                None => verify_disjointness(&ds, &inst)?,
            };
            r.kv("set", format!("{:?}", inst.set()));
            put_protocol(&mut r, &pr, a.hex);
        }
        Protocol::Matmul => {
            if let Some(kind) = a.ds {
                return Err(unsupported(kind, "matmul", "none; pass --circuit"));
            }
            if a.drop_update.is_some() {
                return Err(CliError::Usage("--drop-update does not apply to matmul".into()));
            }
            let c = match &a.circuit {
                Some(p) => parse_file(p, Depth2Circuit::parse_text)?,
                None => naive_mm_circuit(a.d)?,
            };
            r.config("d", a.d)
                .config("circuit", a.circuit.as_ref().map_or("naive".into(), |p| p.display().to_string()))
                .config("trials", a.trials);
            echo_common(&mut r, a);
            matmul(&c, a, ctx, &mut r)?;
        }
    }
    Ok(r)
}

fn echo_common(r: &mut Report, a: &EncodeArgs) {
    r.config("input", a.input.as_ref().map_or("random".into(), |p| p.display().to_string()))
        .config("drop_update", a.drop_update.map_or("none".into(), |j| j.to_string()))
        .config("hex", a.hex);
}

fn unsupported(kind: DsKind, protocol: &str, allowed: &str) -> CliError {
    CliError::Usage(format!(
        "structure {} cannot run the {protocol} protocol (allowed: {allowed})",
        ds_name(kind)
    ))
}

fn matmul(c: &Depth2Circuit, a: &EncodeArgs, ctx: &mut Ctx, r: &mut Report) -> CliResult<()> {
    let d = a.d;
    r.kv("wires", c.size());
    for l in 0..d {
        let m = BitMatrix::random(d, d, &mut ctx.rng);
        match verify_mm_column(c, d, &m, l) {
            Ok(col) => {
                r.kv(&format!("column{l}.length_bits"), col.length_bits)
                    .kv(&format!("column{l}.t_u"), col.t_u)
                    .kv(&format!("column{l}.t_q"), col.t_q)
                    .kv(&format!("column{l}.entropy_bits"), col.entropy_bits)
                    .kv(&format!("column{l}.roundtrip"), col.roundtrip);
                r.verdict(col.passed());
            }
            Err(Error::Correctness(why)) => {
                r.kv("failure", &why).verdict(false);
                r.summary(format!("violated: circuit does not multiply {d}x{d} matrices ({why})"));
                return Ok(());
            }
            Err(e) => return Err(e.into()),
        }
    }
    let audit = mm_partition_audit(c, d, a.trials, ctx.rng.gen())?;
    let text = audit.to_string();
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with("result=")).collect();
    r.lines("audit.", &body.join("\n"));
    r.verdict(audit.passed());
    let per_column = audit.columns.iter().map(|c| c.sum()).min().unwrap_or(0);
    r.summary(format!(
        "every column protocol needs {} bits and its wires number at least {per_column}; {} wires against the {} bound",
        audit.entries(),
        audit.wires,
        audit.size_bound()
    ));
    if !audit.pairwise_disjoint {
        r.summary("violated: column wire sets overlap");
    }
    Ok(())
}
