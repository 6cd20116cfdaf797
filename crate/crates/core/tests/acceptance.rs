//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use udtcert::construction::{
    alpha, enumerate_removals, k_interval, total_removal_mass, truncate, wd_component,
    wd_example, wd_tail_majorant,
};
use udtcert::density::{m_f, max_one_sided_density, measure_in, one_sided_density, Side};
use udtcert::scalar::Scalar;
use udtcert::suites::{run_suite, Suite, SuiteConfig};
use udtcert::witness::{
    abar_sparsity_check, find_non_sudt_witness, find_non_udt_witness, verify_non_udt_on,
    Sequence, SequenceSpec, WitnessCertificate,
};
use udtcert::{a_value, r_value, Address, Interval, RatTruncatedSet, Rational};

type Outcome = Result<String, String>;

fn q(s: &str) -> Rational {
    Rational::parse_scalar(s).unwrap()
}

fn int(n: i64) -> Rational {
    Rational::from_int(n)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

fn addrs(depth: usize, index: u32) -> Vec<Address> {
    Address::all_up_to(depth, index)
}

fn worked_values() -> Outcome {
    let start = Instant::now();
    let cases = [
        (vec![1], "1/2"),
        (vec![2], "1/4"),
        (vec![1, 1], "17/64"),
        (vec![1, 2], "33/128"),
    ];
    for (idx, want) in cases {
        let a = Address::new(idx).unwrap();
        let got = a_value::<Rational>(&a);
        ensure(got == q(want), || format!("a{a} = {got}, want {want}"))?;
    }
    let a11 = Address::new(vec![1, 1]).unwrap();
    let a12 = Address::new(vec![1, 2]).unwrap();
    let r11 = a_value::<Rational>(&a11) - a_value::<Rational>(&a12);
    ensure(r11 == q("1/128") && r_value::<Rational>(&a11) == r11, || format!("r11 = {r11}"))?;
    within(Duration::from_secs(1), start)?;
    Ok(format!("in {:?}", start.elapsed()))
}

/// Independent oracle: the gap straight from the recursive definition.
fn gap_by_recursion(addr: &Address) -> Rational {
    a_value::<Rational>(addr) - a_value::<Rational>(&addr.parent_successor())
}

fn structure() -> Outcome {
    let start = Instant::now();
    let all = addrs(4, 8);
    for addr in &all {
        let upper = a_value::<Rational>(addr);
        let lower = a_value::<Rational>(&addr.parent_successor());
        for n in 1..=8 {
            let child = a_value::<Rational>(&addr.child(n).unwrap());
            ensure(lower < child && child < upper, || format!("(i) fails at {addr}, {n}"))?;
        }
        let next_gap = gap_by_recursion(&addr.parent_successor());
        ensure(next_gap * int(2) == gap_by_recursion(addr), || format!("(ii) fails at {addr}"))?;
        let closed = Rational::pow2(
            -(addr.indices()[0] as i64 + 1)
                - addr.indices()[1..].iter().map(|&n| n as i64 + 4).sum::<i64>(),
        );
        ensure(closed == gap_by_recursion(addr), || format!("closed form fails at {addr}"))?;
        ensure(r_value::<Rational>(addr) == closed, || format!("r_value wrong at {addr}"))?;
    }
    // brute-force pairwise disjointness of closures
    let pairs = enumerate_removals(&Rational::pow2(-30)).map_err(|e| e.to_string())?;
    let closures: Vec<Interval<Rational>> = pairs
        .iter()
        .flat_map(|p| [p.left.closure(), p.right.closure()])
        .collect();
    for (i, a) in closures.iter().enumerate() {
        for b in &closures[i + 1..] {
            ensure(a.hi() < b.lo() || b.hi() < a.lo(), || format!("{a} meets {b}"))?;
        }
    }
    within(Duration::from_secs(60), start)?;
    Ok(format!(
        "{} addresses, {} closed removals, {:?}",
        all.len(),
        closures.len(),
        start.elapsed()
    ))
}

fn lemma_k_density(t: &RatTruncatedSet) -> Outcome {
    let start = Instant::now();
    let all = addrs(3, 6);
    for addr in &all {
        let k = k_interval::<Rational>(addr);
        let need = (int(1) - int(2) * alpha::<Rational>(addr.depth()).unwrap()) * k.length();
        let got = measure_in(t, &k).lo;
        ensure(got >= need, || format!("K{addr}: {got} < {need}"))?;
    }
    within(Duration::from_secs(300), start)?;
    Ok(format!("{} K-intervals", all.len()))
}

fn gamma_k_ceiling(t: &RatTruncatedSet) -> Outcome {
    let all = addrs(3, 6);
    for addr in &all {
        let x = a_value::<Rational>(addr);
        let r = r_value::<Rational>(addr) / int(2);
        let hi = max_one_sided_density(t, &x, &r).map_err(|e| e.to_string())?.hi;
        let bound = int(1) - int(2) * alpha::<Rational>(addr.depth()).unwrap();
        ensure(hi <= bound, || format!("{addr}: {hi} > {bound}"))?;
    }
    Ok(format!("{} addresses", all.len()))
}

fn kicsi_ceiling(t: &RatTruncatedSet) -> Outcome {
    let mut samples = 0;
    for addr in addrs(2, 6) {
        let k = k_interval::<Rational>(&addr);
        let r = int(2) * r_value::<Rational>(&addr);
        let bound = int(1) - alpha::<Rational>(addr.depth()).unwrap() / int(4);
        // eight evenly spaced points of K plus the construction points inside
        let mut xs: Vec<Rational> = (0..=8)
            .map(|i| k.lo().clone() + k.length() * Rational::ratio(i, 8))
            .collect();
        xs.extend((1..=6).map(|n| a_value::<Rational>(&addr.child(n).unwrap())));
        for x in xs.into_iter().filter(|x| t.upper.contains(x)) {
            let hi = max_one_sided_density(t, &x, &r).map_err(|e| e.to_string())?.hi;
            ensure(hi <= bound, || format!("{addr} at {x}: {hi} > {bound}"))?;
            samples += 1;
        }
    }
    Ok(format!("{samples} samples"))
}

/// Recomputes each level from the certificate alone, without calling the
/// library verifier.
fn recheck_levels(cert: &WitnessCertificate, t: &RatTruncatedSet) -> Result<(), String> {
    for level in &cert.levels {
        let x = a_value::<Rational>(&level.address);
        let r_x = r_value::<Rational>(&level.address) / int(2);
        ensure(x == level.point && r_x == level.scale, || "geometry".into())?;
        ensure(r_x < level.delta, || format!("level {}: r_x >= delta", level.k))?;
        let hi = max_one_sided_density(t, &x, &r_x).map_err(|e| e.to_string())?.hi;
        ensure(hi < level.gamma && hi <= level.density_hi, || {
            format!("level {}: density {hi} vs gamma {}", level.k, level.gamma)
        })?;
        // the whole interval stays below gamma by the 1/r Lipschitz bound
        let margin = level.interval.length() / int(2) / r_x.clone();
        ensure(hi + margin < level.gamma, || format!("level {}: margin", level.k))?;
    }
    Ok(())
}

fn non_udt_witness(t: &RatTruncatedSet, eps: &Rational) -> Outcome {
    let seq = SequenceSpec::new(
        Sequence::Geometric {
            c: q("1/10"),
            q: q("1/10"),
        },
        Sequence::Geometric { c: q("1"), q: q("1/4") },
    )
    .map_err(|e| e.to_string())?;
    let cert = find_non_udt_witness(&seq, 3, eps, 64).map_err(|e| e.to_string())?;
    ensure(cert.levels.len() == 3 && cert.certified_levels() == 3, || "not 3 certified levels".into())?;
    for (i, level) in cert.levels.iter().enumerate() {
        let k = i + 1;
        ensure(
            level.gamma == int(1) - Rational::pow10(-(k as i64) - 1)
                && level.delta == Rational::powi(4, -(k as i64)),
            || format!("level {k} sequence values"),
        )?;
    }
    for w in cert.levels.windows(2) {
        ensure(w[1].interval.is_subset_of(&w[0].interval), || "not nested".into())?;
    }
    verify_non_udt_on(&cert, t).map_err(|e| e.to_string())?;
    recheck_levels(&cert, t)?;
    let chosen: Vec<String> = cert.levels.iter().map(|l| l.chosen_index.to_string()).collect();
    Ok(format!("n_k = {}", chosen.join(", ")))
}

fn non_sudt_base() -> Outcome {
    let r = r_value::<Rational>(&Address::ones(10).unwrap());
    ensure(Rational::pow2(-100) < r && r == Rational::pow2(-47), || format!("r = {r}"))?;
    let floor = int(1) - int(384) * Rational::pow10(-10);
    ensure(q("1/2") < floor, || "1/2 >= 1 - 384e-10".into())?;
    Ok("2^-100 < 2^-47, 1/2 < 1 - 384*10^-10".into())
}

fn non_sudt_first_m() -> Outcome {
    let attacked = SequenceSpec::new(
        Sequence::Geometric { c: q("1"), q: q("1/2") },
        Sequence::Geometric { c: q("1"), q: q("1/2") },
    )
    .map_err(|e| e.to_string())?;
    let cert = find_non_sudt_witness(&attacked, 1, 10_000).map_err(|e| e.to_string())?;
    let m1 = cert.steps[0].check_b.m;
    ensure(m1 == 42, || format!("m_1 = {m1}, expected 42"))?;
    Ok("m_1 = 42".into())
}

fn mass_accounting() -> Outcome {
    // closed form of the per-depth series: first term 1/10, ratio 1/160
    let series = q("1/10") / (int(1) - q("1/160"));
    ensure(series == total_removal_mass::<Rational>(), || format!("series {series}"))?;
    ensure(series == q("16/159"), || "16/159".into())?;
    let mut prev = int(0);
    let mut last: Option<RatTruncatedSet> = None;
    for bits in [10, 20, 30, 40] {
        let eps = Rational::pow2(-bits);
        let partial = enumerate_removals(&eps)
            .map_err(|e| e.to_string())?
            .iter()
            .fold(int(0), |acc, p| acc + p.half_length() * int(2));
        ensure(partial > prev, || format!("not increasing at 2^-{bits}"))?;
        ensure(partial < q("16/159"), || format!("overshoot at 2^-{bits}"))?;
        prev = partial;
        let t = truncate(&eps).map_err(|e| e.to_string())?;
        ensure(t.omitted_mass == q("16/159") - prev.clone(), || "omitted mass".into())?;
        let measure_e = q("302/159");
        ensure(
            t.upper.measure() - t.omitted_mass.clone() <= measure_e && measure_e <= t.upper.measure(),
            || format!("|E| bracket fails at 2^-{bits}"),
        )?;
        last = Some(t);
    }
    let gap = q("16/159") - prev;
    ensure(gap < Rational::pow10(-6), || format!("gap {}", gap.to_decimal(6)))?;
    let t = last.expect("ran");
    Ok(format!(
        "gap at 2^-40 = {}, |upper| = {}",
        gap.to_decimal(4),
        t.upper.measure().to_decimal(8)
    ))
}

fn wd_gap() -> Outcome {
    let tol = Rational::pow10(-40);
    let t = wd_example(7, &tol).map_err(|e| e.to_string())?;
    let zero = int(0);
    for n in 2..=6u64 {
        let right = Rational::powi(n as i64, -(n as i64));
        let comp = wd_component(n, &tol).map_err(|e| e.to_string())?;
        let (ql, qu) = comp.lo_bounds;
        let tail = wd_tail_majorant(n);
        // 1 - n^{-1/2} >= 1 - qu/right since qu >= n^{-n-1/2}
        let floor = int(1) - qu.clone() / right.clone() - tail.clone();
        let lo = one_sided_density(&t, &zero, &right, Side::Right)
            .map_err(|e| e.to_string())?
            .lo;
        ensure(lo > floor, || format!("n={n}: lo {lo} <= {floor}"))?;
        let next = n as i64 + 1;
        let ceiling = int(2) * Rational::powi(next, -next) / qu;
        let hi = one_sided_density(&t, &zero, &ql, Side::Right)
            .map_err(|e| e.to_string())?
            .hi;
        ensure(hi < ceiling, || format!("n={n}: hi {hi} >= {ceiling}"))?;
    }
    Ok("n = 2..6".into())
}

fn random_address(rng: &mut StdRng) -> Address {
    let depth = rng.gen_range(1..=4);
    Address::new((0..depth).map(|_| rng.gen_range(1..=20)).collect()).unwrap()
}

fn sparsity() -> Outcome {
    let mut rng = StdRng::seed_from_u64(16);
    for _ in 0..20 {
        let a = random_address(&mut rng);
        let got = abar_sparsity_check(&a);
        ensure(got == q("1/16"), || format!("{a}: {got}"))?;
    }
    Ok("20 addresses".into())
}

fn m_f_identity(t: &RatTruncatedSet) -> Outcome {
    let mut rng = StdRng::seed_from_u64(11);
    let grid = 128i64;
    for _ in 0..50 {
        let x = Rational::ratio(rng.gen_range(-1024..=1024), 1024);
        let r = Rational::ratio(rng.gen_range(1..=256), 1024);
        let m = m_f(t, &x, &r).map_err(|e| e.to_string())?;
        let d = max_one_sided_density(t, &x, &r).map_err(|e| e.to_string())?;
        ensure(m == d, || format!("m_f != max density at ({x}, {r})"))?;
        // sup over a grid of y of |f(y) - f(x)| / r, on the upper set
        let mut best = int(0);
        for i in -grid..=grid {
            let y = x.clone() + r.clone() * Rational::ratio(i, grid);
            let (lo, hi) = if y < x { (y, x.clone()) } else { (x.clone(), y) };
            let inc = t.upper.measure_within(&Interval::closed(lo, hi).unwrap()) / r.clone();
            if inc > best {
                best = inc;
            }
        }
        ensure(best <= m.hi && m.hi.clone() - best <= Rational::ratio(1, grid), || {
            format!("grid oracle disagrees at ({x}, {r})")
        })?;
    }
    Ok("50 queries".into())
}

type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn main() -> ExitCode {
    let eps = Rational::pow2(-40);
    let fine = truncate(&eps).expect("positive epsilon");
    let suite_cfg = SuiteConfig {
        depth: 3,
        index: 6,
        epsilon: eps.clone(),
    };

    let criteria: Vec<(&str, Criterion<'_>)> = vec![
        ("1 worked values", Box::new(worked_values)),
        ("2 structure and disjointness", Box::new(structure)),
        ("3 K-interval density", Box::new(|| lemma_k_density(&fine))),
        ("4 density ceiling at J scale", Box::new(|| gamma_k_ceiling(&fine))),
        ("5 density ceiling at 2r on K", Box::new(|| kicsi_ceiling(&fine))),
        ("6 non-UDT witness", Box::new(|| non_udt_witness(&fine, &eps))),
        ("7a non-SUDT base case", Box::new(non_sudt_base)),
        ("7b non-SUDT m_1 = 42", Box::new(non_sudt_first_m)),
        ("8 mass accounting", Box::new(mass_accounting)),
        ("9 WD example", Box::new(wd_gap)),
        ("10 1/16 sparsity", Box::new(sparsity)),
        ("11 M_f identity", Box::new(|| m_f_identity(&fine))),
        (
            "suites lemma/kicsi cross-check",
            Box::new(|| {
                for suite in [Suite::Lemma, Suite::Kicsi, Suite::Base2] {
                    let results = run_suite(suite, &suite_cfg).map_err(|e| e.to_string())?;
                    if let Some(bad) = results.iter().find(|r| !r.passed) {
                        return Err(format!("{suite} {}: {}", bad.name, bad.detail));
                    }
                }
                Ok("lemma, kicsi, base2".into())
            }),
        ),
    ];

    let mut failed = 0;
    for (name, run) in &criteria {
        let start = Instant::now();
        match run() {
            Ok(detail) => println!("PASS {name}: {detail} [{:?}]", start.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why} [{:?}]", start.elapsed());
            }
        }
    }
    println!("{} of {} passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
