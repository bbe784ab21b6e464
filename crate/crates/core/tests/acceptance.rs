//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion outside `KNOWN_UNATTAINABLE` fails.
//!
//! cargo test --release --test acceptance

use std::f64::consts::{LN_2, LOG2_E, PI};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bicm::asymptotics::{
    alpha_bicm_uniform_exact, alpha_pam_closed_exact, fbc_tan_sum, gap_table, is_foo, limit_table, otto_projection,
    ototo_projection, qam_foo_check, Family, FOO_TOLERANCE,
};
use bicm::capacity::{
    bicm_capacity_via_difference, bit_level_conditional_ami, crossing_snr, f_curve, g_curve, log_grid, min_ebn0,
};
use bicm::quadrature::QuadratureSpec;
use bicm::search::{distinct_value_count_of_pmf, SearchOptions};
use bicm::shaping::{optimize_distribution_refined, shaped_ebn0_at_rate, ShapingSearch};
use bicm::*;

/// Criteria that cannot pass as stated; see the note printed with each.
const KNOWN_UNATTAINABLE: &[&str] = &["10b"];

const TABLE_TOL_DB: f64 = 0.02;
const PSK_REL_TOL: f64 = 1e-12;
const TAN_SUM_TOL: f64 = 1e-3;
const DIFFERENCE_FORM_TOL: f64 = 1e-8;
const LABEL_INVARIANCE_TOL: f64 = 1e-10;
const CHAIN_RULE_TOL: f64 = 1e-8;
const SLOPE_REL_TOL: f64 = 0.01;
const CROSSING_TOL: f64 = 0.02;
const PROJECTION_TOL: f64 = 1e-12;
const SHAPING_TOL_DB: f64 = 0.15;

type Check = Result<(bool, String)>;

struct Outcome {
    id: &'static str,
    pass: bool,
}

fn run(id: &'static str, title: &str, budget_s: Option<f64>, f: impl FnOnce() -> Check) -> Outcome {
    let start = Instant::now();
    let result = f();
    let secs = start.elapsed().as_secs_f64();
    let (mut pass, mut detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
    if let Some(budget) = budget_s {
        if secs > budget {
            pass = false;
            detail += &format!("; over the {budget} s budget");
        }
    }
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("{verdict} {id:<4} {title} ({secs:.2} s): {detail}");
    Outcome { id, pass }
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn gap_db(alpha: f64) -> f64 {
    if alpha > 0.0 {
        db(LOG2_E / alpha)
    } else {
        f64::INFINITY
    }
}

fn close_db(got: f64, want: f64, tol: f64) -> bool {
    if want.is_infinite() {
        got == want
    } else {
        (got - want).abs() <= tol
    }
}

fn rows(text: &str) -> Vec<Vec<u8>> {
    text.split_whitespace().map(|r| r.bytes().map(|b| b - b'0').collect()).collect()
}

fn golden_matrices() -> Check {
    let golden = [
        (LabelingKind::Brgc, "000 001 011 010 110 111 101 100"),
        (LabelingKind::Nbc, "000 001 010 011 100 101 110 111"),
        (LabelingKind::Bsgc, "000 101 111 010 110 011 001 100"),
        (LabelingKind::Fbc, "000 001 010 011 111 110 101 100"),
    ];
    let mut ok = true;
    for (kind, text) in golden {
        let l = Labeling::standard(kind, 3)?;
        ok &= rows(text).iter().enumerate().all(|(i, r)| &l.row(i) == r);
    }
    let q = Labeling::nbc(3)?.modified_matrix();
    ok &= (0..8).all(|i| (0..3).all(|k| q.entry(i, k) == if (i >> k) & 1 == 0 { 1 } else { -1 }));
    let h = HadamardMatrix::new(8)?.to_dense();
    let h8 = [
        "++++++++", "+-+-+-+-", "++--++--", "+--++--+", "++++----", "+-+--+-+", "++----++", "+--+-++-",
    ];
    ok &= h8
        .iter()
        .enumerate()
        .all(|(i, r)| r.bytes().zip(&h[i]).all(|(c, &v)| v == if c == b'+' { 1 } else { -1 }));
    Ok((ok, "G3, N3, S3, F3, Q(N3) and H8".into()))
}

fn closed_forms() -> Check {
    let mut worst_psk = 0f64;
    let mut pam_exact = 0;
    for size in [4usize, 8, 16, 32] {
        let m = size.trailing_zeros() as usize;
        for kind in LabelingKind::ALL {
            let Ok(l) = Labeling::standard(kind, m) else { continue };
            let exact = alpha_bicm_uniform_exact(&InputAlphabet::pam(size)?, &l)?;
            if exact != Some(alpha_pam_closed_exact(size, kind)?) {
                return Ok((false, format!("{size}-PAM {kind}: {exact:?}")));
            }
            pam_exact += 1;
            let general = alpha_bicm_uniform(&InputAlphabet::psk(size)?, &l)?.alpha;
            let closed = alpha_psk_closed(size, kind)?.alpha;
            worst_psk = worst_psk.max((general - closed).abs() / closed);
        }
    }
    Ok((
        worst_psk <= PSK_REL_TOL,
        format!("{pam_exact} PAM cases equal as rationals; worst PSK relative error {worst_psk:.1e}"),
    ))
}

fn gap_rows() -> Check {
    use LabelingKind::*;
    let inf = f64::INFINITY;
    let expected: [(&str, usize, LabelingKind, f64); 12] = [
        ("pam", 4, Brgc, 0.96),
        ("pam", 4, Nbc, 0.0),
        ("pam", 8, Brgc, 1.18),
        ("pam", 8, Nbc, 0.0),
        ("pam", 8, Bsgc, inf),
        ("pam", 16, Brgc, 1.23),
        ("pam", 16, Nbc, 0.0),
        ("pam", 16, Bsgc, inf),
        ("psk", 8, Brgc, 0.69),
        ("psk", 8, Nbc, 3.69),
        ("psk", 8, Fbc, 0.32),
        ("psk", 8, Bsgc, 3.01),
    ];
    let mut ok = true;
    let mut worst = 0f64;
    for (family, size, kind, want) in expected {
        let x = if family == "pam" { InputAlphabet::pam(size)? } else { InputAlphabet::psk(size)? };
        let l = Labeling::standard(kind, size.trailing_zeros() as usize)?;
        let got = gap_db(alpha_bicm_uniform(&x, &l)?.alpha);
        ok &= close_db(got, want, TABLE_TOL_DB);
        if want.is_finite() {
            worst = worst.max((got - want).abs());
        }
    }
    // the tables subcommand goes through the closed forms; it must agree
    for e in gap_table(&[4, 8, 16], &[8]) {
        let x = match e.family {
            Family::Pam => InputAlphabet::pam(e.size.unwrap())?,
            Family::Psk => InputAlphabet::psk(e.size.unwrap())?,
        };
        let l = Labeling::standard(e.labeling, e.size.unwrap().trailing_zeros() as usize)?;
        let g = gap_db(alpha_bicm_uniform(&x, &l)?.alpha);
        ok &= g == e.gap_db || (g - e.gap_db).abs() < 1e-9;
    }
    Ok((ok, format!("12 entries, worst deviation {worst:.4} dB")))
}

fn limits() -> Check {
    use LabelingKind::*;
    let inf = f64::INFINITY;
    let expected = [
        (Family::Pam, Brgc, -0.34),
        (Family::Pam, Nbc, -1.59),
        (Family::Pam, Bsgc, inf),
        (Family::Psk, Brgc, -0.68),
        (Family::Psk, Nbc, 2.33),
        (Family::Psk, Bsgc, 2.33),
        (Family::Psk, Fbc, -1.14),
    ];
    let table = limit_table();
    let mut ok = true;
    for (family, kind, want) in expected {
        let e = table.iter().find(|e| e.family == family && e.labeling == kind).unwrap();
        ok &= close_db(e.zero_rate_ebn0_db, want, TABLE_TOL_DB);
    }
    let s = fbc_tan_sum(64);
    let constant = 4.0 * (1.0 + s);
    ok &= (s - 1.2240).abs() <= TAN_SUM_TOL && (constant - 8.89).abs() <= 0.01;
    // finite-size values approach the limits
    let fbc_1024 = alpha_psk_closed(1024, Fbc)?.normalized();
    ok &= (fbc_1024 - constant / (PI * PI)).abs() < 1e-4;
    Ok((ok, format!("tan^2 sum {s:.6}, FBC constant {constant:.4}/pi^2")))
}

fn censuses() -> Check {
    let options = SearchOptions { threads: 1, ..Default::default() };
    let pam = enumerate_alpha_classes(&InputAlphabet::pam(8)?, &options)?;
    let psk = enumerate_alpha_classes(&InputAlphabet::psk(8)?, &options)?;
    let got = (
        pam.class_count(),
        psk.class_count(),
        distinct_value_count_of_pmf(&pam),
        distinct_value_count_of_pmf(&psk),
        pam.foo_count,
        psk.foo_count,
    );
    Ok((
        got == (72, 26, 25, 10, 48, 0) && pam.total == 40320 && psk.total == 40320,
        format!(
            "classes {}/{}, multiplicities {}/{}, FOO {}/{}, PSK min spacing {:.4}",
            got.0,
            got.1,
            got.2,
            got.3,
            got.4,
            got.5,
            psk.min_class_spacing.unwrap_or(f64::NAN)
        ),
    ))
}

fn engine_constellations() -> Result<Vec<Constellation>> {
    let bits = BitDistribution::new(vec![0.3, 0.6, 0.45])?;
    Ok(vec![
        Constellation::uniform(InputAlphabet::pam(4)?, Labeling::brgc(2)?)?,
        Constellation::bitwise(InputAlphabet::pam(8)?, Labeling::nbc(3)?, &bits)?,
        Constellation::uniform(InputAlphabet::psk(8)?, Labeling::fbc(3)?)?,
    ])
}

fn capacity_engine() -> Result<Vec<(&'static str, &'static str, Check)>> {
    let quad = QuadratureSpec::default();
    let omegas = engine_constellations()?;
    let snrs = [0.5, 1.0, 5.0];

    let mut worst = 0f64;
    for omega in &omegas {
        for &snr in &snrs {
            let a = bicm_capacity(omega, snr, &quad)?;
            let b = bicm_capacity_via_difference(omega, snr, &quad)?;
            worst = worst.max((a - b).abs());
        }
    }
    let a = (worst <= DIFFERENCE_FORM_TOL, format!("worst difference {worst:.1e} over 3x3"));

    let grid = log_grid(1e-2, 1e2, 25);
    let mut ordered = true;
    for omega in &omegas {
        for &snr in &grid {
            let bi = bicm_capacity(omega, snr, &quad)?;
            let cm = cm_capacity(omega, snr, &quad)?;
            ordered &= bi <= cm + 1e-12 && cm < awgn_capacity(snr, omega.dim());
        }
        ordered &= bicm_capacity(omega, 0.0, &quad)? == 0.0 && cm_capacity(omega, 0.0, &quad)? == 0.0;
    }
    let b = (ordered, format!("{} points", omegas.len() * grid.len()));

    let mut worst = 0f64;
    let x = InputAlphabet::pam(8)?;
    let reference: Vec<f64> = snrs
        .iter()
        .map(|&s| cm_capacity(&Constellation::uniform(x.clone(), Labeling::nbc(3)?)?, s, &quad))
        .collect::<Result<_>>()?;
    for kind in LabelingKind::ALL {
        let omega = Constellation::uniform(x.clone(), Labeling::standard(kind, 3)?)?;
        for (&snr, &r) in snrs.iter().zip(&reference) {
            worst = worst.max((cm_capacity(&omega, snr, &quad)? - r).abs());
        }
    }
    let c = (worst <= LABEL_INVARIANCE_TOL, format!("worst spread {worst:.1e}"));

    let mut worst = 0f64;
    for omega in &omegas {
        for &snr in &snrs {
            let sum: f64 = (0..omega.order())
                .map(|k| bit_level_conditional_ami(omega, snr, k, &quad))
                .sum::<Result<f64>>()?;
            worst = worst.max((sum - cm_capacity(omega, snr, &quad)?).abs());
        }
    }
    let d = (worst <= CHAIN_RULE_TOL, format!("worst difference {worst:.1e}"));

    let snr = 1e-3;
    let mut cases: Vec<(String, Constellation)> = LabelingKind::ALL
        .iter()
        .map(|&k| Ok((format!("8-PAM {k}"), Constellation::uniform(x.clone(), Labeling::standard(k, 3)?)?)))
        .collect::<Result<_>>()?;
    cases.push(("8-PSK fbc".into(), Constellation::uniform(InputAlphabet::psk(8)?, Labeling::fbc(3)?)?));
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, omega) in &cases {
        let slope = bicm_capacity(omega, snr, &quad)? / snr;
        let alpha = alpha_bicm(omega).alpha;
        // a zero coefficient has no relative scale; use 1% of log2 e instead
        let tol = SLOPE_REL_TOL * if alpha > 0.0 { alpha } else { LOG2_E };
        ok &= (slope - alpha).abs() <= tol;
        notes.push(format!("{name} {:.4}/{:.4}", slope, alpha));
    }
    let e = (ok, notes.join(", "));

    Ok(vec![
        ("6a", "difference form equals bit sum", Ok(a)),
        ("6b", "BICM <= CM < AWGN", Ok(b)),
        ("6c", "CM labeling invariance", Ok(c)),
        ("6d", "chain rule", Ok(d)),
        ("6e", "low-SNR slope equals alpha", Ok(e)),
    ])
}

fn crossings() -> Check {
    let quad = QuadratureSpec::default();
    let x = InputAlphabet::pam(8)?;
    let functionals: Vec<(LabelingKind, CapacityFunctional)> = LabelingKind::ALL
        .iter()
        .map(|&k| {
            let omega = Constellation::uniform(x.clone(), Labeling::standard(k, 3)?)?;
            Ok((k, CapacityFunctional::new(CapacityKind::Bicm, &omega, quad)))
        })
        .collect::<Result<_>>()?;
    let get = |k| &functionals.iter().find(|(kind, _)| *kind == k).unwrap().1;
    let (nbc, fbc, brgc) = (get(LabelingKind::Nbc), get(LabelingKind::Fbc), get(LabelingKind::Brgc));
    let s1 = crossing_snr(nbc, fbc, 0.1, 3.0)?;
    let s2 = crossing_snr(fbc, brgc, 0.3, 10.0)?;
    let (r1, r2) = (nbc.evaluate(s1)?, fbc.evaluate(s2)?);
    let mut ok = (r1 - 0.43).abs() <= CROSSING_TOL && (r2 - 1.09).abs() <= CROSSING_TOL;
    // the best labeling on either side of and between the crossings
    for snr_db in (-20..=20).map(|d| d as f64) {
        let snr = 10f64.powf(snr_db / 10.0);
        let mut best = (LabelingKind::Nbc, f64::NEG_INFINITY);
        for (k, f) in &functionals {
            let c = f.evaluate(snr)?;
            if c > best.1 {
                best = (*k, c);
            }
        }
        let expected = if snr < s1 {
            LabelingKind::Nbc
        } else if snr < s2 {
            LabelingKind::Fbc
        } else {
            LabelingKind::Brgc
        };
        // near saturation the curves merge; only compare where they differ
        if best.1 < 2.9 {
            ok &= best.0 == expected;
        }
    }
    Ok((ok, format!("NBC->FBC at {r1:.4}, FBC->BRGC at {r2:.4} bit/symbol")))
}

fn min_ebn0_checks() -> Check {
    let channel = ChannelSpec::awgn(1);
    let quad = QuadratureSpec::default();
    let x = InputAlphabet::pam(8)?;
    let any = Constellation::uniform(x.clone(), Labeling::nbc(3)?)?;
    let awgn = CapacityFunctional::new(CapacityKind::Awgn, &any, quad);
    let m = min_ebn0(&awgn, &channel)?;
    let mut ok = m.rate == 0.0 && m.ebn0 == LN_2 && (m.ebn0_db - (-1.59)).abs() < 0.005;
    let g_positive = log_grid(1e-4, 10.0, 200).iter().all(|&r| g_awgn(r, 1).is_ok_and(|g| g > 0.0));
    ok &= g_positive;

    let bsgc = Constellation::uniform(x, Labeling::bsgc(3)?)?;
    let f = CapacityFunctional::new(CapacityKind::Bicm, &bsgc, quad);
    let m = min_ebn0(&f, &channel)?;
    let slopes = g_curve(&f, &log_grid(1e-2, 2.5, 40), &channel)?;
    let sign_change = slopes.windows(2).any(|w| w[0].slope < 0.0 && w[1].slope > 0.0);
    let at_001 = f_curve(&f, &[0.01], &channel)?.points[0].ebn0_db();
    ok &= !m.interior_minima.is_empty() && m.rate > 0.0 && sign_change && at_001 > 10.0;
    Ok((
        ok,
        format!(
            "AWGN {:.4} dB at Rc -> 0; BSGC minimum {:.3} dB at Rc = {:.4}, f(0.01) = {at_001:.2} dB",
            db(LN_2),
            m.ebn0_db,
            m.rate
        ),
    ))
}

fn foo_round_trips() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0f64;
    let mut ok = true;
    for _ in 0..100 {
        let m = rng.gen_range(1..=5);
        let n = rng.gen_range(1..=3);
        let mut codes: Vec<u32> = (0..1u32 << m).collect();
        codes.shuffle(&mut rng);
        let l = Labeling::from_codewords(m, codes)?;
        let v_rows: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let v = ProjectionMatrix::new(&v_rows)?;
        let verdict = is_foo(&InputAlphabet::from_projection(&l, &v)?, &l, FOO_TOLERANCE)?;
        ok &= verdict.is_foo;
        for k in 0..m {
            for d in 0..n {
                worst = worst.max((verdict.projection.get(k, d) - v.get(k, d)).abs());
            }
        }
    }
    ok &= worst <= PROJECTION_TOL;

    let nbc3 = Labeling::nbc(3)?;
    for v in [otto_projection(), ototo_projection()] {
        ok &= is_foo(&InputAlphabet::from_projection(&nbc3, &v)?, &nbc3, FOO_TOLERANCE)?.is_foo;
    }
    let h = InputAlphabet::hierarchical_pam(&[1.0, 2.5, 4.0])?;
    ok &= is_foo(&h, &nbc3, FOO_TOLERANCE)?.is_foo;
    ok &= !is_foo(&h, &Labeling::brgc(3)?, FOO_TOLERANCE)?.is_foo;

    let nbc4 = Labeling::nbc(4)?;
    let variants = nbc4.trivial_variants()?;
    let qam = InputAlphabet::qam(4, 4)?;
    let mut variants_ok = variants.len() == 384;
    for (i, v) in variants.iter().enumerate() {
        variants_ok &= qam_foo_check(4, 4, v)?;
        // the general procedure on the QAM alphabet is the independent check
        if i % 16 == 0 {
            variants_ok &= is_foo(&qam, v, FOO_TOLERANCE)?.is_foo;
        }
    }
    let mut others = 0;
    while others < 50 {
        let mut codes: Vec<u32> = (0..16).collect();
        codes.shuffle(&mut rng);
        let l = Labeling::from_codewords(4, codes)?;
        if l.is_trivial_variant_of(&nbc4) {
            continue;
        }
        variants_ok &= !qam_foo_check(4, 4, &l)? && !is_foo(&qam, &l, FOO_TOLERANCE)?.is_foo;
        others += 1;
    }
    ok &= variants_ok;
    Ok((ok, format!("worst recovered V error {worst:.1e}; 384 variants and 50 non-variants classified")))
}

fn shaping_dominance() -> Check {
    let quad = QuadratureSpec::default();
    let x = InputAlphabet::pam(8)?;
    let mut ok = true;
    let mut margins = Vec::new();
    for kind in [LabelingKind::Brgc, LabelingKind::Nbc] {
        let l = Labeling::standard(kind, 3)?;
        for snr_db in [-10.0, -5.0, 0.0, 5.0, 10.0] {
            let r = optimize_distribution_refined(&x, &l, from_db(snr_db), 0.05, 0.01, &quad)?;
            ok &= r.shaped_capacity >= r.uniform_capacity;
            margins.push(r.shaped_capacity - r.uniform_capacity);
        }
    }
    let best = margins.iter().cloned().fold(0.0, f64::max);
    Ok((ok, format!("10 points, largest gain {best:.4} bit/symbol")))
}

fn from_db(v: f64) -> f64 {
    10f64.powf(v / 10.0)
}

fn shaping_low_rate() -> Check {
    let rate = 0.05;
    let x = InputAlphabet::pam(8)?;
    let (_, ebn0, best) = shaped_ebn0_at_rate(&x, &Labeling::brgc(3)?, rate, &ShapingSearch::default(), 1e-7)?;
    let target = db(LN_2);
    let got = db(ebn0);
    let floor = db(f_awgn(rate, 1)?);
    Ok((
        (got - target).abs() <= SHAPING_TOL_DB,
        format!(
            "{got:.4} dB with bits {:?}; the AWGN capacity itself needs {floor:.4} dB at this rate, \
             {:.4} dB above {target:.4} dB ({:.4} dB above the rounded -1.59)",
            best.bits,
            floor - target,
            got + 1.59
        ),
    ))
}

fn main() {
    let mut outcomes = vec![
        run("1", "golden matrices", Some(1.0), golden_matrices),
        run("2", "closed forms", Some(1.0), closed_forms),
        run("3", "zero-rate SNR gaps", Some(1.0), gap_rows),
        run("4", "large-M limits", Some(1.0), limits),
        run("5", "labeling censuses", Some(60.0), censuses),
    ];
    let start = Instant::now();
    match capacity_engine() {
        Ok(parts) => {
            for (id, title, check) in parts {
                outcomes.push(run(id, title, None, || check));
            }
            let secs = start.elapsed().as_secs_f64();
            outcomes.push(run("6", "capacity engine budget", Some(120.0), || Ok((true, format!("{secs:.1} s")))));
        }
        Err(e) => outcomes.push(run("6", "capacity engine", None, || Err(e))),
    }
    outcomes.push(run("7", "labeling crossings", None, crossings));
    outcomes.push(run("8", "minimum Eb/N0", None, min_ebn0_checks));
    outcomes.push(run("9", "FOO round trips", None, foo_round_trips));
    let start = Instant::now();
    outcomes.push(run("10a", "shaping dominance", None, shaping_dominance));
    outcomes.push(run("10b", "shaped Eb/N0 at Rc = 0.05", None, shaping_low_rate));
    let secs = start.elapsed().as_secs_f64();
    outcomes.push(run("10", "shaping budget", Some(600.0), || Ok((true, format!("{secs:.1} s")))));

    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    let unexpected: Vec<&&str> = failed.iter().filter(|id| !KNOWN_UNATTAINABLE.contains(id)).collect();
    println!(
        "{} of {} passed; failed: {:?}; known unattainable: {:?}",
        outcomes.len() - failed.len(),
        outcomes.len(),
        failed,
        KNOWN_UNATTAINABLE
    );
    if !unexpected.is_empty() {
        std::process::exit(1);
    }
}

