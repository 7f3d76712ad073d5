use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use denjoy_core::acpack::{i_n, staircase_build, StaircaseSchedule};
use denjoy_core::closedset::{cb_rank, cb_rank_literal, hcs_of_tree};
use denjoy_core::denjoy::{
    agreement_defect, flats, g_step_distance, level_range, symbolic_derivation, variation_witness, wiggle, wiggle_m,
    RationalInterval, SupportFamily, Variant,
};
use denjoy_core::ordinal::SampleWindow;
use denjoy_core::plfun::mi_distance;
use denjoy_core::rational::{add_unreduced, pow2_neg, q, qi};
use denjoy_core::treescheme::{ls_rank, materialize, parse_scheme, ExplicitTree};
use denjoy_core::{ClosedRationalSet, Ordinal, PLFunction, StepFunction, TreeScheme, Q};

type Outcome = Result<String, String>;

struct Entry {
    name: String,
    scheme: TreeScheme,
    expected: Ordinal,
}

fn corpus() -> Vec<Entry> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "scheme"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).unwrap();
            let expected = text
                .lines()
                .find_map(|l| l.strip_prefix("# ls-rank:"))
                .unwrap_or_else(|| panic!("{} has no ls-rank line", p.display()))
                .trim()
                .parse()
                .unwrap();
            Entry { name: p.file_stem().unwrap().to_string_lossy().into(), scheme: parse_scheme(&text).unwrap(), expected }
        })
        .collect()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_rank_equality(corpus: &[Entry]) -> Outcome {
    let mut covered = Vec::new();
    for e in corpus {
        let ls = ls_rank(&e.scheme).map_err(|x| format!("{}: {x}", e.name))?;
        ensure(ls == e.expected, || format!("{}: ls-rank {ls}, expected {}", e.name, e.expected))?;
        let cb = cb_rank(&hcs_of_tree(&e.scheme).map_err(|x| x.to_string())?).map_err(|x| format!("{}: {x}", e.name))?;
        ensure(cb == ls, || format!("{}: cb {cb} vs ls {ls}", e.name))?;
        for v in Variant::ALL {
            let tr = symbolic_derivation(&e.scheme, v).map_err(|x| format!("{} {v}: {x}", e.name))?;
            ensure(tr.rank == ls, || format!("{} {v}: derivation rank {} vs ls {ls}", e.name, tr.rank))?;
        }
        covered.push(ls);
    }
    let need = ["1", "2", "3", "4", "5", "6", "w + 1", "w*2 + 1", "w^2 + 1"];
    for r in need {
        let o: Ordinal = r.parse().unwrap();
        ensure(covered.contains(&o), || format!("no corpus scheme of rank {r}"))?;
    }
    ensure(corpus.len() >= 20, || format!("corpus has {} schemes", corpus.len()))?;
    Ok(format!("{} schemes, 4 variants", corpus.len()))
}

fn c2_level_range(corpus: &[Entry]) -> Outcome {
    let unit = RationalInterval::unit();
    let width = 3;
    let mut checks = 0;
    for e in corpus {
        for ell in 1..=6usize {
            let (lo, hi) = level_range(&e.scheme, ell, width, &unit).map_err(|x| x.to_string())?;
            ensure(!lo.is_negative() && hi <= pow2_neg(ell as u32), || format!("{} level {ell}: [{lo}, {hi}]", e.name))?;
            checks += 1;
        }
        // F_{d+1} − F_d is the level-(d+1) sum, whose maximum is the largest λ
        let fam = SupportFamily::build(&e.scheme, 7, width, &unit).map_err(|x| x.to_string())?;
        for d in 0..=6usize {
            let sup = fam.max_lambda(d + 1);
            ensure(sup <= pow2_neg(d as u32), || format!("{} depth {d}: sup distance {sup}", e.name))?;
            checks += 1;
        }
    }
    Ok(format!("{checks} bounds"))
}

fn c3_blowup() -> Outcome {
    let t = parse_scheme("root A\nstate A\n  child 0 A\n").unwrap();
    let mut points = 0;
    for n in 0..=6u32 {
        let w = variation_witness(&t, 0, n).map_err(|x| x.to_string())?;
        let target = Q::from_integer(BigInt::from(1u64 << n));
        ensure(w.variation >= target, || format!("N = {n}: variation {} < 2^{n}", w.variation))?;
        ensure(w.target_level_intervals >= BigInt::from(1u64 << n), || format!("N = {n}: too few intervals"))?;
        let deeper = w.variation_at_depth(w.depth + 2).map_err(|x| x.to_string())?;
        ensure(deeper >= w.variation, || format!("N = {n}: depth+2 gives {deeper} < {}", w.variation))?;
        points += w.count;
    }
    Ok(format!("N = 0..6, {points} points"))
}

fn random_q(rng: &mut StdRng, den: i64) -> Q {
    q(rng.random_range(0..=den), den)
}

fn random_interval(rng: &mut StdRng) -> RationalInterval {
    loop {
        let den = [10, 97, 1000, 65536][rng.random_range(0..4)];
        let (a, b) = (random_q(rng, den), random_q(rng, den));
        if a != b {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            return RationalInterval::new(lo, hi).unwrap();
        }
    }
}

fn c4_wiggles(rng: &mut StdRng) -> Outcome {
    let mut count = 0;
    while count < 50 {
        let j = random_interval(rng);
        let m = wiggle_m(&j.len()).unwrap();
        if m > BigInt::from(20_000) {
            continue;
        }
        let len = j.len();
        let two_m_len = Q::from_integer(BigInt::from(2) * &m) * &len;
        // M is the least integer with 2M|J| > 1
        let prev = Q::from_integer(BigInt::from(2) * (&m - 1)) * &len;
        ensure(two_m_len > qi(1) && prev <= qi(1), || format!("{j}: M = {m} is not least"))?;
        let w = wiggle(&j).map_err(|x| x.to_string())?;
        ensure(w.variation() == two_m_len, || format!("{j}: variation {} vs {two_m_len}", w.variation()))?;
        ensure(w.min_value().is_zero() && w.max_value() == len, || format!("{j}: range"))?;
        let fl = flats(&j).map_err(|x| x.to_string())?;
        ensure(BigInt::from(fl.len()) == BigInt::from(2) * &m + 1, || format!("{j}: {} flats", fl.len()))?;
        for k in &fl {
            let (hi, lo) = w.range_on(&k.lo, &k.hi).unwrap();
            ensure(hi == lo, || format!("{j}: wiggle varies on flat {k}"))?;
        }
        count += 1;
    }
    Ok("50 intervals".into())
}

fn random_pl(rng: &mut StdRng) -> PLFunction {
    let k = rng.random_range(1..12);
    let mut xs: Vec<Q> = (0..k).map(|_| random_q(rng, 60)).collect();
    xs.push(qi(0));
    xs.push(qi(1));
    xs.sort();
    xs.dedup();
    PLFunction::new(xs.into_iter().map(|x| (x, q(rng.random_range(-20..=20), 7))).collect()).unwrap()
}

fn c5_linearization(rng: &mut StdRng) -> Outcome {
    for i in 0..100 {
        let f = random_pl(rng);
        let mut e: Vec<Q> = (0..rng.random_range(1..10)).map(|_| random_q(rng, 48)).collect();
        e.sort();
        e.dedup();
        let set = ClosedRationalSet::finite(e.clone());
        let plain = f.variation_on_finite_set(&e, false).unwrap();
        let fe = f.linearize(&set, false).unwrap();
        ensure(plain == fe.variation(), || format!("pair {i}: {plain} vs {}", fe.variation()))?;
        let fs = f.linearize(&set, true).unwrap();
        for w in e.windows(2) {
            let (a, b) = (f.oscillation(&w[0], &w[1]).unwrap(), fs.oscillation(&w[0], &w[1]).unwrap());
            ensure(a == b, || format!("pair {i}: oscillation on ({}, {}) {a} vs {b}", w[0], w[1]))?;
        }
        for x in &e {
            ensure(f.eval(x).unwrap() == fs.eval(x).unwrap(), || format!("pair {i}: starred form moves {x}"))?;
        }
    }
    Ok("100 pairs".into())
}

fn c6_staircase() -> Outcome {
    let stages = 12u64;
    let mut events: Vec<(u64, u64)> = (1..=stages).flat_map(|s| [(0, s), (1, s)]).collect();
    events.extend((1..=stages).filter(|s| s % 3 == 0).map(|s| (2, s)));
    let schedule = StaircaseSchedule::new(events.clone(), stages).unwrap();
    let states = staircase_build(&schedule).map_err(|x| x.to_string())?;
    for w in states.windows(2) {
        let d = w[0].f.sup_dist(&w[1].f);
        let s = w[0].stage as u32;
        ensure(d <= pow2_neg(s), || format!("stage {s}: sup distance {d}"))?;
    }
    let mut plateau_counts = Vec::new();
    for st in &states {
        let pts = st.f.breakpoints();
        ensure(pts[0].1.is_zero() && pts[pts.len() - 1].1 == qi(1), || format!("stage {}: endpoints", st.stage))?;
        ensure(pts.windows(2).all(|w| w[0].1 <= w[1].1), || format!("stage {}: not monotone", st.stage))?;
        for n in [0u64, 1, 2] {
            let k = events.iter().filter(|e| e.0 == n && e.1 <= st.stage).count() as i32;
            let want = (qi(1) - pow_q(&q(2, 3), k)) * i_n(n).len();
            let got = st.book(n).unwrap().zero_measure();
            ensure(got == want, || format!("stage {} I_{n}: zero-slope measure {got}, expected {want}", st.stage))?;
        }
        plateau_counts.push(st.plateau_values.len());
    }
    let last = states.last().unwrap();
    Ok(format!("{stages} stages, {} breakpoints, plateau values per stage {plateau_counts:?}", last.f.len()))
}

fn pow_q(x: &Q, k: i32) -> Q {
    (0..k).fold(qi(1), |acc, _| acc * x)
}

fn random_step(rng: &mut StdRng) -> StepFunction {
    let k = rng.random_range(0..8);
    let mut cuts: Vec<Q> = (0..k).map(|_| random_q(rng, 40)).filter(|c| *c < qi(1) && c.is_positive()).collect();
    cuts.push(qi(0));
    cuts.sort();
    cuts.dedup();
    StepFunction::new(cuts.into_iter().map(|c| (c, q(rng.random_range(-12..=12), 5))).collect()).unwrap()
}

fn c7_metric(rng: &mut StdRng, corpus: &[Entry]) -> Outcome {
    for i in 0..200 {
        let (f, g, h) = (random_step(rng), random_step(rng), random_step(rng));
        let (fg, gh, fh) = (mi_distance(&f, &g), mi_distance(&g, &h), mi_distance(&f, &h));
        ensure(mi_distance(&f, &f).is_zero(), || format!("triple {i}: d(f,f) ≠ 0"))?;
        ensure(fg == mi_distance(&g, &f), || format!("triple {i}: not symmetric"))?;
        ensure(fh <= &fg + &gh, || format!("triple {i}: triangle fails, {fh} > {fg} + {gh}"))?;
        ensure((fg.is_zero()) == (f == g), || format!("triple {i}: d(f,g) = {fg} but f == g is {}", f == g))?;
        ensure(fg <= qi(1), || format!("triple {i}: d > 1"))?;
    }
    let mut pairs = 0;
    for e in corpus {
        let mut prev: Option<Q> = None;
        for ell in 0..=5usize {
            let d = g_step_distance(&e.scheme, ell).map_err(|x| x.to_string())?;
            let bound = agreement_defect(&e.scheme, ell).map_err(|x| x.to_string())?;
            ensure(d <= bound, || format!("{} ℓ = {ell}: distance {d} exceeds differing measure {bound}", e.name))?;
            if let Some(p) = &prev {
                ensure(d <= add_unreduced(p, &bound), || format!("{} ℓ = {ell}: {d} > {p} + {bound}", e.name))?;
            }
            prev = Some(d);
            pairs += 1;
        }
    }
    Ok(format!("200 triples, {pairs} approximant steps"))
}

// ls-rank straight from the definition, on a materialised truncation; the
// limsup is read off the last `window` child slots
fn ls_direct(t: &ExplicitTree, node: &[u64], width: u64, window: u64) -> u64 {
    let mut sup = 0;
    let mut tail = 0;
    for n in 0..width {
        let mut c = node.to_vec();
        c.push(n);
        let r = if t.contains(&c) { ls_direct(t, &c, width, window) } else { 0 };
        sup = sup.max(r);
        if n >= width - window {
            tail = tail.max(r);
        }
    }
    sup.max(tail + 1)
}

fn c8_oracles(corpus: &[Entry]) -> Outcome {
    let (depth, width, window) = (7usize, 12u64, 6u64);
    let mut checked = 0;
    for e in corpus {
        let Some(k) = e.expected.as_finite().filter(|&k| k <= 4) else { continue };
        let t = materialize(&e.scheme, depth, width);
        let h = t.height().unwrap_or(0);
        ensure(h < depth, || format!("{}: truncation at depth {depth} is not the whole height", e.name))?;
        let direct = ls_direct(&t, &[], width, window);
        ensure(direct == k, || format!("{}: direct recursion gives {direct}, ls-rank {k}", e.name))?;
        let ls = ls_rank(&e.scheme).map_err(|x| x.to_string())?;
        ensure(ls == Ordinal::finite(k), || format!("{}: ls_rank {ls}", e.name))?;
        let hcs = hcs_of_tree(&e.scheme).map_err(|x| x.to_string())?;
        let lit = cb_rank_literal(&hcs, 10, SampleWindow::default()).map_err(|x| x.to_string())?;
        ensure(lit == Some(k), || format!("{}: literal derivatives give {lit:?}", e.name))?;
        ensure(cb_rank(&hcs).map_err(|x| x.to_string())? == ls, || format!("{}: cb_rank", e.name))?;
        checked += 1;
    }
    Ok(format!("{checked} schemes of rank ≤ 4"))
}

fn run(id: u32, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let el = start.elapsed();
    let (ok, detail) = match out {
        Ok(d) if el <= limit => (true, d),
        Ok(d) => (false, format!("{d}; too slow")),
        Err(e) => (false, e),
    };
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("criterion {id}: {verdict} ({detail}; {:.2}s of {}s)", el.as_secs_f64(), limit.as_secs());
    ok
}

fn main() -> ExitCode {
    let corpus = corpus();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let s = Duration::from_secs;
    let results = [
        run(1, s(10), || c1_rank_equality(&corpus)),
        run(2, s(30), || c2_level_range(&corpus)),
        run(3, s(30), c3_blowup),
        run(4, s(5), || c4_wiggles(&mut rng)),
        run(5, s(5), || c5_linearization(&mut rng)),
        run(6, s(5), c6_staircase),
        run(7, s(20), || c7_metric(&mut rng, &corpus)),
        run(8, s(10), || c8_oracles(&corpus)),
    ];
    if results.iter().all(|&r| r) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
