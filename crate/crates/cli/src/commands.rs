use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use denjoy_core::acpack::{lusin_witness, parse_schedule, staircase_build, staircase_report};
use denjoy_core::closedset::{cb_rank, hcs_of_tree, hcs_undoubled};
use denjoy_core::denjoy::{
    agreement_defect, g_approximant, g_step_distance, numeric_vb_probe, symbolic_derivation_with, truncated_f,
    RationalInterval, Variant,
};
use denjoy_core::plfun::mi_distance;
use denjoy_core::rational::{parse_q, to_decimal};
use denjoy_core::treescheme::{ls_rank, parse_scheme, wf_rank};
use denjoy_core::{Error, Ordinal, TreeScheme, Q};

use crate::{Command, Failure, Format, RunConfig, Which};

type Out<'a> = &'a mut dyn Write;

fn io(e: std::io::Error) -> Failure {
    Failure::Io(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<TreeScheme, Failure> {
    parse_scheme(&read(path)?).map_err(|e| Failure::Core(located(path, e)))
}

fn located(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { line, msg } => Error::Parse { line, msg: format!("{}: {msg}", path.display()) },
        e => e,
    }
}

fn format_of(cfg: &RunConfig, allowed: &[Format]) -> Result<Format, Failure> {
    let f = cfg.format.unwrap_or(allowed[0]);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        let name = format!("{f:?}").to_lowercase();
        Err(Failure::Core(Error::Invalid(format!("format {name} is not available for this command"))))
    }
}

fn show(x: &Q, decimal: Option<usize>) -> String {
    match decimal {
        Some(d) => to_decimal(x, d),
        None => x.to_string(),
    }
}

fn json_line(out: Out, v: &Value) -> Result<(), Failure> {
    writeln!(out, "{}", serde_json::to_string_pretty(v).expect("json values serialise")).map_err(io)
}

pub fn run(cfg: &RunConfig, out: Out) -> Result<(), Failure> {
    match &cfg.command {
        Command::Rank { file, which } => rank(cfg, out, file, *which),
        Command::Crosscheck { dir, undoubled } => crosscheck(cfg, out, dir, *undoubled),
        Command::Sample { file, depth, width, grid, decimal } => sample(cfg, out, file, *depth, *width, grid, *decimal),
        Command::Derive { file, variant, stages, depth } => derive(cfg, out, file, *variant, *stages, *depth),
        Command::Probe { file, depth, width, grid, variant, window } => {
            probe(cfg, out, file, *depth, *width, grid, *variant, window)
        }
        Command::Staircase { file, stages } => staircase(cfg, out, file, *stages),
        Command::MiDist { file, depth, symbolic, decimal } => mi_dist(cfg, out, file, *depth, *symbolic, *decimal),
    }
}

fn rank(cfg: &RunConfig, out: Out, file: &Path, which: Which) -> Result<(), Failure> {
    let fmt = format_of(cfg, &[Format::Text, Format::Json])?;
    let t = load(file)?;
    let r = match which {
        Which::Ls => ls_rank(&t)?,
        Which::Wf => wf_rank(&t)?,
        Which::Cb => cb_rank(&hcs_of_tree(&t)?)?,
    };
    match fmt {
        Format::Json => json_line(out, &json!({"which": format!("{which:?}").to_lowercase(), "rank": r.to_string()})),
        _ => writeln!(out, "{r}").map_err(io),
    }
}

struct Row {
    name: String,
    expected: Option<Ordinal>,
    /// The empty tree: the derivation gives 1 where ls gives 0.
    empty: bool,
    ls: Ordinal,
    cb: Ordinal,
    derived: Vec<(Variant, Result<Ordinal, String>)>,
}

impl Row {
    fn pass(&self) -> bool {
        let derived_ok = self.derived.iter().all(|(_, r)| r.as_ref().is_ok_and(|r| *r == self.ls || self.empty));
        self.cb == self.ls && derived_ok && self.expected.as_ref().is_none_or(|e| *e == self.ls)
    }
}

// `# ls-rank: <ordinal>` on any comment line records the expected rank
fn expected_rank(text: &str) -> Result<Option<Ordinal>, Error> {
    for line in text.lines() {
        if let Some(r) = line.trim().strip_prefix('#').and_then(|c| c.trim().strip_prefix("ls-rank:")) {
            return r.trim().parse().map(Some);
        }
    }
    Ok(None)
}

fn crosscheck(cfg: &RunConfig, out: Out, dir: &Path, undoubled: bool) -> Result<(), Failure> {
    let fmt = format_of(cfg, &[Format::Text, Format::Json])?;
    let entries = fs::read_dir(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "scheme"))
        .collect();
    paths.sort();
    let mut rows = Vec::new();
    for p in &paths {
        let text = read(p)?;
        let t = parse_scheme(&text).map_err(|e| Failure::Core(located(p, e)))?;
        let expected = expected_rank(&text).map_err(|e| Failure::Core(located(p, e)))?;
        let ls = ls_rank(&t)?;
        let coded = if undoubled { hcs_undoubled(&t)? } else { hcs_of_tree(&t)? };
        let cb = cb_rank(&coded)?;
        let mut derived = Vec::new();
        for v in Variant::ALL {
            let r = match symbolic_derivation_with(&t, v, 1) {
                Ok(tr) => Ok(tr.rank),
                Err(Error::Mismatch(m)) => Err(m),
                Err(e) => return Err(e.into()),
            };
            derived.push((v, r));
        }
        let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        rows.push(Row { name, expected, empty: t.root_node().is_none(), ls, cb, derived });
    }
    let failed = rows.iter().filter(|r| !r.pass()).count();
    match fmt {
        Format::Json => {
            let items: Vec<Value> = rows
                .iter()
                .map(|r| {
                    let derived: serde_json::Map<String, Value> = r
                        .derived
                        .iter()
                        .map(|(v, d)| {
                            let s = match d {
                                Ok(o) => json!(o.to_string()),
                                Err(m) => json!({ "error": m }),
                            };
                            (v.to_string(), s)
                        })
                        .collect();
                    json!({
                        "scheme": r.name,
                        "expected": r.expected.as_ref().map(Ordinal::to_string),
                        "ls": r.ls.to_string(),
                        "cb": r.cb.to_string(),
                        "derivation": derived,
                        "pass": r.pass(),
                    })
                })
                .collect();
            json_line(out, &json!({"undoubled": undoubled, "schemes": items, "failed": failed}))?;
        }
        _ => {
            for r in &rows {
                let mut line = format!("{}: ls = {}, cb = {}", r.name, r.ls, r.cb);
                for (v, d) in &r.derived {
                    match d {
                        Ok(o) => line.push_str(&format!(", {v} = {o}")),
                        Err(m) => line.push_str(&format!(", {v}: {m}")),
                    }
                }
                if let Some(e) = &r.expected {
                    line.push_str(&format!(", expected {e}"));
                }
                writeln!(out, "{line}: {}", if r.pass() { "PASS" } else { "FAIL" }).map_err(io)?;
            }
            let verdict = if failed == 0 { "PASS" } else { "FAIL" };
            writeln!(out, "{} schemes, {failed} failed: {verdict}", rows.len()).map_err(io)?;
        }
    }
    if failed > 0 {
        return Err(Failure::Crosscheck);
    }
    Ok(())
}

fn sample(
    cfg: &RunConfig,
    out: Out,
    file: &Path,
    depth: usize,
    width: u64,
    grid: &Q,
    decimal: Option<usize>,
) -> Result<(), Failure> {
    let fmt = format_of(cfg, &[Format::Csv, Format::Json])?;
    let t = load(file)?;
    let f = truncated_f(&t, depth, width, &RationalInterval::unit(), cfg.max_breakpoints)?;
    let rows = f.sample(grid)?;
    match fmt {
        Format::Json => {
            let pts: Vec<Value> = rows.iter().map(|(x, y)| json!([show(x, decimal), show(y, decimal)])).collect();
            json_line(out, &json!({"depth": depth, "width": width, "points": pts}))
        }
        _ => {
            for (x, y) in &rows {
                writeln!(out, "{},{}", show(x, decimal), show(y, decimal)).map_err(io)?;
            }
            Ok(())
        }
    }
}

fn derive(cfg: &RunConfig, out: Out, file: &Path, variant: Variant, stages: u64, depth: usize) -> Result<(), Failure> {
    let fmt = format_of(cfg, &[Format::Json, Format::Text])?;
    let t = load(file)?;
    let tr = symbolic_derivation_with(&t, variant, stages)?;
    match fmt {
        Format::Text => {
            writeln!(out, "{} rank {}", tr.variant, tr.rank).map_err(io)?;
            for s in &tr.stages {
                let set = denjoy_core::closedset::to_sexpr(&s.set, depth);
                writeln!(out, "stage {}: {set}", s.stage).map_err(io)?;
            }
            if !tr.complete {
                writeln!(out, "(stages past {} not listed)", tr.stages.len()).map_err(io)?;
            }
            Ok(())
        }
        _ => json_line(out, &tr.to_json(depth)),
    }
}

fn parse_window(s: &str) -> Result<RationalInterval, Error> {
    let (a, b) = s.split_once(',').ok_or_else(|| Error::Invalid(format!("window {s:?} is not `a,b`")))?;
    let w = RationalInterval::new(parse_q(a)?, parse_q(b)?)?;
    if !RationalInterval::unit().contains_interval(&w) {
        return Err(Error::Invalid(format!("window {w} is not inside [0, 1]")));
    }
    Ok(w)
}

#[allow(clippy::too_many_arguments)]
fn probe(
    cfg: &RunConfig,
    out: Out,
    file: &Path,
    depth: usize,
    width: u64,
    grid: &Q,
    variant: Variant,
    window: &str,
) -> Result<(), Failure> {
    let fmt = format_of(cfg, &[Format::Text, Format::Json])?;
    let starred = match variant {
        Variant::Vb => false,
        Variant::VbStar => true,
        v => return Err(Error::Invalid(format!("the probe measures variation; {v} is not supported")).into()),
    };
    let w = parse_window(window)?;
    let t = load(file)?;
    let f = truncated_f(&t, depth, width, &RationalInterval::unit(), cfg.max_breakpoints)?;
    let pts: Vec<Q> = f.sample(grid)?.into_iter().map(|(x, _)| x).collect();
    let v = numeric_vb_probe(&f, &pts, &w, starred)?;
    match fmt {
        Format::Json => json_line(out, &json!({"variant": variant.to_string(), "window": w.to_string(), "variation": v.to_string()})),
        _ => writeln!(out, "{v}").map_err(io),
    }
}

fn staircase(cfg: &RunConfig, out: Out, file: &Path, stages: Option<u64>) -> Result<(), Failure> {
    format_of(cfg, &[Format::Json])?;
    let sched = parse_schedule(&read(file)?, stages).map_err(|e| Failure::Core(located(file, e)))?;
    let states = staircase_build(&sched)?;
    let mut report = staircase_report(&states);
    let lusin: Vec<Value> = sched
        .indices()
        .into_iter()
        .map(|n| {
            let r = lusin_witness(&states, n);
            let rows: Vec<Value> = r
                .rows
                .iter()
                .map(|row| {
                    json!({
                        "stage": row.stage,
                        "zero_slope_measure": row.zero_measure.to_string(),
                        "plateau_count": row.plateau_count,
                        "stairs": row.stairs,
                    })
                })
                .collect();
            json!({"n": n, "interval": r.interval.to_string(), "rows": rows})
        })
        .collect();
    report["lusin"] = Value::Array(lusin);
    json_line(out, &report)
}

fn reduced(x: Q) -> Q {
    let (n, d) = x.into_raw();
    Q::new(n, d)
}

fn mi_dist(cfg: &RunConfig, out: Out, file: &Path, ell: usize, symbolic: bool, decimal: Option<usize>) -> Result<(), Failure> {
    let fmt = format_of(cfg, &[Format::Text, Format::Json])?;
    let t = load(file)?;
    let bound = reduced(agreement_defect(&t, ell)?);
    let d = if symbolic {
        reduced(g_step_distance(&t, ell)?)
    } else {
        let (_, a) = g_approximant(&t, ell, cfg.max_breakpoints)?;
        let (_, b) = g_approximant(&t, ell + 1, cfg.max_breakpoints)?;
        mi_distance(&a, &b)
    };
    match fmt {
        Format::Json => json_line(
            out,
            &json!({"ell": ell, "distance": show(&d, decimal), "agreement_bound": show(&bound, decimal)}),
        ),
        _ => writeln!(out, "{}", show(&d, decimal)).map_err(io),
    }
}
