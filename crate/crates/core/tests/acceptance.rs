//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the test harness so the lines always show: `cargo test --test acceptance`.
//! Expected values are written out here from the defining formulas or
//! computed by numeric evaluation, never read back from the library tables.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use kn_affine::central::{
    cocycle_condition_check, coboundary, extended_jacobi_check, gl_cocycle_pair, l_invariance_check, locality_bounds,
    locality_check, nontriviality_witness, CocycleCombination, Cocycle, CurrentCocycle, LinearForm, PairingRoute,
    Window,
};
use kn_affine::cli::{cmd_bracket, cmd_table, AlgebraSpec, CliConfig, TableKind};
use kn_affine::coefficients::{Assignment, Param, ParamPoly, Rational};
use kn_affine::current::CurrentAlgebra;
use kn_affine::kn::oracle::fn_derivative_oracle;
use kn_affine::kn::{fn_mul, fn_mul_oracle, fn_residue_pairing_oracle, Family, FnElement};
use kn_affine::lie::{BilinearForm, FiniteLieAlgebra};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = std::result::Result<(), String>;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn poly_at(p: &ParamPoly, at: &Assignment) -> Rational {
    p.substitute(at).as_constant().expect("all parameters assigned")
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run(id: &str, limit: Option<Duration>, body: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let res = catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(format!("panicked: {msg}"))
    });
    let elapsed = start.elapsed();
    let res = res.and_then(|()| match limit {
        Some(l) if elapsed > l => Err(format!("took {elapsed:.2?}, limit {l:?}")),
        _ => Ok(()),
    });
    match &res {
        Ok(()) => println!("{id} PASS ({elapsed:.2?})"),
        Err(e) => println!("{id} FAIL ({elapsed:.2?}): {e}"),
    }
    res.is_ok()
}

/// Value of `A_n` at `z` on the three-point curve with `a² = a2`.
fn three_point_value(n: i64, z: &Rational, a2: &Rational) -> Rational {
    let w = z * z - a2;
    let k = n.div_euclid(2);
    let wk = if k >= 0 {
        num_traits::pow(w, k as usize)
    } else {
        num_traits::pow(w.recip(), (-k) as usize)
    };
    if n.rem_euclid(2) == 1 {
        z * wk
    } else {
        wk
    }
}

/// `r + s·Y` with `Y² = 4(X−e1)(X−e2)(X−e3)` at a rational point `X = ℘`.
#[derive(Clone, Debug, PartialEq)]
struct TorusValue {
    r: Rational,
    s: Rational,
}

struct TorusPoint {
    u: Rational,
    y2: Rational,
}

impl TorusPoint {
    fn new(x: &Rational, e1: &Rational, e2: &Rational) -> Self {
        let e3 = -(e1 + e2);
        let y2 = Rational::from_integer(4.into()) * (x - e1) * (x - e2) * (x - &e3);
        TorusPoint { u: x - e1, y2 }
    }

    fn pow_u(&self, k: i64) -> Rational {
        if k >= 0 {
            num_traits::pow(self.u.clone(), k as usize)
        } else {
            num_traits::pow(self.u.recip(), (-k) as usize)
        }
    }

    /// `A_{2k} = u^k`, `A_{2k+1} = ½℘'·u^{k−1}`.
    fn basis(&self, n: i64) -> TorusValue {
        let k = n.div_euclid(2);
        if n.rem_euclid(2) == 0 {
            TorusValue { r: self.pow_u(k), s: Rational::zero() }
        } else {
            TorusValue { r: Rational::zero(), s: q(1, 2) * self.pow_u(k - 1) }
        }
    }

    fn mul(&self, a: &TorusValue, b: &TorusValue) -> TorusValue {
        TorusValue {
            r: &a.r * &b.r + &a.s * &b.s * &self.y2,
            s: &a.r * &b.s + &a.s * &b.r,
        }
    }
}

fn three_point_expected(n: i64, m: i64) -> FnElement {
    let fam = Family::ThreePoint;
    let mut terms = vec![(n + m, ParamPoly::one())];
    if n.rem_euclid(2) == 1 && m.rem_euclid(2) == 1 {
        terms.push((n + m - 2, ParamPoly::var(Param::A2)));
    }
    FnElement::from_terms(fam, terms)
}

fn torus_expected(n: i64, m: i64) -> FnElement {
    let fam = Family::Torus;
    let e1 = ParamPoly::var(Param::E1);
    let e2 = ParamPoly::var(Param::E2);
    let mut terms = vec![(n + m, ParamPoly::one())];
    if n.rem_euclid(2) == 1 && m.rem_euclid(2) == 1 {
        terms.push((n + m - 2, &ParamPoly::int(3) * &e1));
        let alpha = &e1 - &e2;
        let beta = &(&ParamPoly::int(2) * &e1) + &e2;
        terms.push((n + m - 4, &alpha * &beta));
    }
    FnElement::from_terms(fam, terms)
}

fn ac1() -> Outcome {
    let fam = Family::ThreePoint;
    let samples = [(q(9, 1), q(2, 1)), (q(9, 1), q(-5, 7)), (q(-4, 3), q(3, 2)), (q(1, 5), q(-7, 2))];
    for n in -8..=8 {
        for m in -8..=8 {
            let (a, b) = (FnElement::basis(fam, n), FnElement::basis(fam, m));
            let expected = three_point_expected(n, m);
            let got = fn_mul(&a, &b).map_err(|e| e.to_string())?;
            ensure(got == expected, || format!("fn_mul(A{n}, A{m}) = {got}, expected {expected}"))?;
            let oracle = fn_mul_oracle(&a, &b).map_err(|e| e.to_string())?;
            ensure(oracle == expected, || format!("oracle(A{n}, A{m}) = {oracle}, expected {expected}"))?;
            for (a2, z) in &samples {
                let at: Assignment = [(Param::A2, a2.clone())].into();
                let lhs = three_point_value(n, z, a2) * three_point_value(m, z, a2);
                let rhs = expected
                    .coeffs()
                    .fold(Rational::zero(), |acc, (h, c)| acc + poly_at(c, &at) * three_point_value(h, z, a2));
                ensure(lhs == rhs, || format!("A{n}·A{m} at a2={a2}, z={z}: {lhs} vs {rhs}"))?;
            }
        }
    }
    Ok(())
}

fn ac2() -> Outcome {
    let fam = Family::Torus;
    let points: Vec<(Assignment, TorusPoint)> = [
        (q(2, 1), q(-1, 3), q(7, 5)),
        (q(2, 1), q(-1, 3), q(-4, 1)),
        (q(-3, 4), q(5, 1), q(11, 1)),
        (q(1, 6), q(2, 9), q(-5, 8)),
    ]
    .into_iter()
    .map(|(e1, e2, x)| {
        let pt = TorusPoint::new(&x, &e1, &e2);
        ([(Param::E1, e1), (Param::E2, e2)].into(), pt)
    })
    .collect();
    for n in -8..=8 {
        for m in -8..=8 {
            let (a, b) = (FnElement::basis(fam, n), FnElement::basis(fam, m));
            let expected = torus_expected(n, m);
            let got = fn_mul(&a, &b).map_err(|e| e.to_string())?;
            ensure(got == expected, || format!("fn_mul(A{n}, A{m}) = {got}, expected {expected}"))?;
            let oracle = fn_mul_oracle(&a, &b).map_err(|e| e.to_string())?;
            ensure(oracle == expected, || format!("oracle(A{n}, A{m}) = {oracle}, expected {expected}"))?;
            for (at, pt) in &points {
                let lhs = pt.mul(&pt.basis(n), &pt.basis(m));
                let mut rhs = TorusValue { r: Rational::zero(), s: Rational::zero() };
                for (h, c) in expected.coeffs() {
                    let c = poly_at(c, at);
                    let v = pt.basis(h);
                    rhs.r += &c * &v.r;
                    rhs.s += &c * &v.s;
                }
                ensure(lhs == rhs, || format!("A{n}·A{m} at {at:?}: {lhs:?} vs {rhs:?}"))?;
            }
        }
    }
    Ok(())
}

/// Pairing tables transcribed from the defining formulas.
fn expected_pairing(fam: Family, n: i64, m: i64) -> ParamPoly {
    let odd = n.rem_euclid(2) == 1;
    let e1 = ParamPoly::var(Param::E1);
    let e2 = ParamPoly::var(Param::E2);
    if m == -n {
        return ParamPoly::int(-n);
    }
    match fam {
        Family::Classical => ParamPoly::zero(),
        Family::ThreePoint if odd && m == -n + 2 => &ParamPoly::int(1 - n) * &ParamPoly::var(Param::A2),
        Family::Torus if odd && m == -n + 2 => &ParamPoly::int(3 * (1 - n)) * &e1,
        Family::Torus if odd && m == -n + 4 => {
            let ab = &(&e1 - &e2) * &(&(&ParamPoly::int(2) * &e1) + &e2);
            &ParamPoly::int(2 - n) * &ab
        }
        _ => ParamPoly::zero(),
    }
}

fn ac3() -> Outcome {
    for fam in Family::ALL {
        for n in -8..=8 {
            for m in -8..=8 {
                let (a, b) = (FnElement::basis(fam, n), FnElement::basis(fam, m));
                let expected = expected_pairing(fam, n, m);
                let closed = a.pairing(&b).map_err(|e| e.to_string())?;
                ensure(closed == expected, || format!("{fam} ω(A{n}, A{m}) = {closed}, expected {expected}"))?;
                let oracle = fn_residue_pairing_oracle(&a, &b).map_err(|e| e.to_string())?;
                ensure(oracle == expected, || format!("{fam} residue ω(A{n}, A{m}) = {oracle}, expected {expected}"))?;
            }
        }
    }
    Ok(())
}

/// Expected rendering of `[x_n, y_m]` in the three-point `sl(2)` algebra.
fn sl2_relation(x: char, n: i64, y: char, m: i64, extended: bool) -> String {
    let both_odd = n.rem_euclid(2) == 1 && m.rem_euclid(2) == 1;
    // (coefficient, generator); the generator's coefficient is c or c*a2
    let (c, g) = match (x, y) {
        ('e', 'f') => (1, 'h'),
        ('f', 'e') => (-1, 'h'),
        ('h', 'e') => (2, 'e'),
        ('e', 'h') => (-2, 'e'),
        ('h', 'f') => (-2, 'f'),
        ('f', 'h') => (2, 'f'),
        _ => (0, 'h'),
    };
    let mut terms: Vec<(i64, String)> = Vec::new();
    if c != 0 {
        terms.push((c, format!("{g}({})", n + m)));
        if both_odd {
            terms.push((c, format!("a2*{g}({})", n + m - 2)));
        }
    }
    if extended {
        let tr = match (x, y) {
            ('e', 'f') | ('f', 'e') => 1,
            ('h', 'h') => 2,
            _ => 0,
        };
        if m == -n && tr * n != 0 {
            terms.push((-tr * n, "t".into()));
        } else if both_odd && m == -n + 2 && tr * (1 - n) != 0 {
            terms.push((tr * (1 - n), "a2*t".into()));
        }
    }
    if terms.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (k, (c, body)) in terms.iter().enumerate() {
        let sign = if *c < 0 { "-" } else { "+" };
        if k == 0 {
            if *c < 0 {
                out.push('-');
            }
        } else {
            out.push_str(&format!(" {sign} "));
        }
        if c.abs() != 1 {
            out.push_str(&format!("{}*", c.abs()));
        }
        out.push_str(body);
    }
    out
}

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../tables").join(name)
}

fn ac4() -> Outcome {
    let mut plain = CliConfig::new(Family::ThreePoint, AlgebraSpec::Sl(2));
    plain.extended = false;
    let mut ext = plain.clone();
    ext.extended = true;
    let mut lines = Vec::new();
    for x in ['e', 'f', 'h'] {
        for y in ['e', 'f', 'h'] {
            for n in -6..=6 {
                for m in -6..=6 {
                    for (cfg, extended) in [(&plain, false), (&ext, true)] {
                        let lhs = format!("{x}({n})");
                        let rhs = format!("{y}({m})");
                        let got = cmd_bracket(cfg, &lhs, Some(&rhs)).map_err(|e| e.to_string())?;
                        let expected = sl2_relation(x, n, y, m, extended);
                        ensure(got == expected, || {
                            format!("[{lhs}, {rhs}] (extended={extended}) = {got}, expected {expected}")
                        })?;
                        let tag = if extended { "extended" } else { "plain" };
                        lines.push(format!("{tag} [{lhs}, {rhs}] = {got}"));
                    }
                }
            }
        }
    }
    let text = lines.join("\n") + "\n";
    let path = golden_path("sl2_threepoint_relations.txt");
    if std::env::var_os("KN_BLESS").is_some() {
        fs::write(&path, &text).map_err(|e| e.to_string())?;
    }
    let golden = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    ensure(golden == text, || format!("{} differs from cmd_bracket output", path.display()))
}

fn sweep_cocycles() -> Vec<CurrentCocycle> {
    let algebras = [
        FiniteLieAlgebra::sl(2).unwrap(),
        FiniteLieAlgebra::sl(3).unwrap(),
        FiniteLieAlgebra::gl(2).unwrap(),
    ];
    let mut out = Vec::new();
    for alg in &algebras {
        for fam in Family::ALL {
            out.push(CurrentCocycle::new(BilinearForm::trace(alg).unwrap(), fam));
        }
    }
    out
}

fn ac5() -> Outcome {
    let w = Window::new(-4, 4).unwrap();
    for psi in sweep_cocycles() {
        let c = cocycle_condition_check(&psi, w, None).map_err(|e| e.to_string())?;
        ensure(c.is_clean(), || format!("{}: cocycle condition {:?}", psi.describe(), c.violations.first()))?;
        let j = extended_jacobi_check(&psi, w, None).map_err(|e| e.to_string())?;
        ensure(j.is_clean(), || format!("{}: Jacobi {:?}", psi.describe(), j.violations.first()))?;
        let alg_dim = psi.algebra().dim();
        let elems = alg_dim * 9;
        let n_triples = elems * (elems - 1) * (elems - 2) / 6;
        ensure(j.tuples_checked == n_triples, || {
            format!("{}: {} Jacobi triples, expected {n_triples}", psi.describe(), j.tuples_checked)
        })?;
    }
    let sl2 = FiniteLieAlgebra::sl(2).unwrap();
    for fam in Family::ALL {
        let bad = CurrentCocycle::new(BilinearForm::trace(&sl2).unwrap(), fam).corrupted(1, -1, ParamPoly::one());
        let c = cocycle_condition_check(&bad, w, None).map_err(|e| e.to_string())?;
        let j = extended_jacobi_check(&bad, w, None).map_err(|e| e.to_string())?;
        ensure(!c.is_clean() && !j.is_clean(), || format!("{fam}: corrupted cocycle went undetected"))?;
    }
    Ok(())
}

fn ac6() -> Outcome {
    let w = Window::new(-10, 10).unwrap();
    let sl2 = FiniteLieAlgebra::sl(2).unwrap();
    for (fam, bounds) in [(Family::Classical, (0, 0)), (Family::ThreePoint, (0, 2)), (Family::Torus, (0, 4))] {
        let psi = CurrentCocycle::new(BilinearForm::trace(&sl2).unwrap(), fam);
        let b = locality_bounds(&psi, w).map_err(|e| e.to_string())?;
        ensure((b.t2, b.t1) == (Some(bounds.0), Some(bounds.1)), || {
            format!("{fam}: observed ({:?}, {:?}), expected {bounds:?}", b.t2, b.t1)
        })?;
        let r = locality_check(&psi, w, bounds).map_err(|e| e.to_string())?;
        ensure(r.is_clean(), || format!("{fam}: locality violations {:?}", r.violations))?;
    }
    Ok(())
}

fn random_fn(rng: &mut ChaCha8Rng, fam: Family, lo: i64, hi: i64) -> FnElement {
    let terms = rng.gen_range(1..=3);
    FnElement::from_terms(
        fam,
        (0..terms).map(|_| (rng.gen_range(lo..=hi), ParamPoly::int(rng.gen_range(-4..=4)))),
    )
}

fn ac7() -> Outcome {
    let sl2 = FiniteLieAlgebra::sl(2).unwrap();
    let form = BilinearForm::trace(&sl2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for fam in Family::ALL {
        // library sweep over fixed h
        let psi = CurrentCocycle::new(form.clone(), fam);
        let w = Window::new(-4, 4).unwrap();
        let mut count = 0;
        for h in [-1, 0, 1, 2] {
            let r = l_invariance_check(&psi, &FnElement::basis(fam, h), w, 60).map_err(|e| e.to_string())?;
            ensure(r.is_clean(), || format!("{fam}: {:?}", r.violations.first()))?;
            count += r.tuples_checked;
        }
        ensure(count >= 200, || format!("{fam}: only {count} samples"))?;
        // independent route: oracle products, derivatives and residues
        for _ in 0..200 {
            let h = random_fn(&mut rng, fam, -2, 2);
            let f = random_fn(&mut rng, fam, -3, 3);
            let g = random_fn(&mut rng, fam, -3, 3);
            let x = rng.gen_range(0..3);
            let y = rng.gen_range(0..3);
            let alpha = form.entry(x, y).clone();
            let ef = fn_mul_oracle(&h, &fn_derivative_oracle(&f).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            let eg = fn_mul_oracle(&h, &fn_derivative_oracle(&g).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            let s = &fn_residue_pairing_oracle(&ef, &g).map_err(|e| e.to_string())?
                + &fn_residue_pairing_oracle(&f, &eg).map_err(|e| e.to_string())?;
            let s = &alpha * &s;
            ensure(s.is_zero(), || format!("{fam}: h={h}, f={f}, g={g}, x={x}, y={y} gives {s}"))?;
        }
    }
    Ok(())
}

fn ac8() -> Outcome {
    for spec in [AlgebraSpec::Sl(2), AlgebraSpec::Gl(2)] {
        for fam in Family::ALL {
            let cfg = CliConfig::new(fam, spec);
            let psi = Arc::new(cfg.cocycle().map_err(|e| e.to_string())?);
            let wit = nontriviality_witness(psi.as_ref(), 4).map_err(|e| e.to_string())?;
            let alg = psi.algebra().clone();
            // [x, x] = 0 holds for any x; the value must be α(x,x)·(−n)
            let alpha = psi.form().entry(wit.index, wit.index).clone();
            let expected = &alpha * &ParamPoly::int(-wit.degree);
            ensure(!expected.is_zero() && wit.value == expected.to_string(), || {
                format!("{spec:?}/{fam}: witness {wit:?}, expected value {expected}")
            })?;
            // adding a coboundary leaves the witness value unchanged
            let cur = CurrentAlgebra::new(alg.clone(), fam);
            let phi = LinearForm::new((0..alg.dim()).flat_map(|i| (-3..=3).map(move |h| ((i, h), ParamPoly::int(1 + i as i64 - h)))));
            let shifted = CocycleCombination::new(vec![
                (ParamPoly::one(), psi.clone() as Arc<dyn Cocycle>),
                (ParamPoly::one(), Arc::new(coboundary(cur, phi)) as Arc<dyn Cocycle>),
            ])
            .map_err(|e| e.to_string())?;
            let wit2 = nontriviality_witness(&shifted, 4).map_err(|e| e.to_string())?;
            ensure(wit2 == wit, || format!("{spec:?}/{fam}: {wit2:?} after coboundary, was {wit:?}"))?;
        }
    }
    Ok(())
}

fn ac9() -> Outcome {
    let window = Window::new(-8, 8).unwrap();
    let classical = |kind| {
        let mut cfg = CliConfig::new(Family::Classical, AlgebraSpec::Sl(2));
        cfg.window = window;
        cmd_table(&cfg, kind).map_err(|e| e.to_string())
    };
    let zero: Assignment = [(Param::A2, q(0, 1)), (Param::E1, q(0, 1)), (Param::E2, q(0, 1))].into();
    for fam in [Family::ThreePoint, Family::Torus] {
        for kind in [TableKind::Product, TableKind::Cocycle] {
            let mut cfg = CliConfig::new(fam, AlgebraSpec::Sl(2));
            cfg.window = window;
            cfg.assignment = zero.clone();
            let got = cmd_table(&cfg, kind).map_err(|e| e.to_string())?;
            ensure(got == classical(kind)?, || format!("{fam} {kind:?} table differs after degeneration"))?;
        }
        let psi = CurrentCocycle::with_route(
            BilinearForm::trace(&FiniteLieAlgebra::sl(2).unwrap()).unwrap(),
            fam,
            PairingRoute::Oracle,
        );
        for n in window.degrees() {
            for m in window.degrees() {
                let v = psi.pairing(n, m).map_err(|e| e.to_string())?.substitute(&zero);
                let expected = if m == -n { ParamPoly::int(-n) } else { ParamPoly::zero() };
                ensure(v == expected, || format!("{fam}: residue ω(A{n}, A{m}) → {v} at zero parameters"))?;
            }
        }
    }
    Ok(())
}

fn ac10() -> Outcome {
    let w = Window::new(-4, 4).unwrap();
    for fam in Family::ALL {
        let pair = gl_cocycle_pair(2, fam).map_err(|e| e.to_string())?;
        for psi in [&pair.psi1, &pair.psi2] {
            let l = locality_check(psi, w, fam_band(fam)).map_err(|e| e.to_string())?;
            ensure(l.is_clean(), || format!("{fam} {}: not local", psi.describe()))?;
            let c = cocycle_condition_check(psi, w, None).map_err(|e| e.to_string())?;
            ensure(c.is_clean(), || format!("{fam} {}: cocycle condition fails", psi.describe()))?;
        }
        let cert = pair.certify(w).map_err(|e| e.to_string())?;
        ensure(cert.psi2_vanishes_on_sl && cert.psi1_on_sl.is_some(), || format!("{fam}: {cert:?}"))?;
        ensure(!cert.equivalence.solvable && cert.independent, || format!("{fam}: not independent {cert:?}"))?;
    }
    Ok(())
}

fn fam_band(fam: Family) -> (i64, i64) {
    match fam {
        Family::Classical => (0, 0),
        Family::ThreePoint => (0, 2),
        Family::Torus => (0, 4),
    }
}

fn main() {
    let results = [
        run("AC1", Some(Duration::from_secs(10)), ac1),
        run("AC2", Some(Duration::from_secs(60)), ac2),
        run("AC3", Some(Duration::from_secs(120)), ac3),
        run("AC4", None, ac4),
        run("AC5", None, ac5),
        run("AC6", None, ac6),
        run("AC7", None, ac7),
        run("AC8", None, ac8),
        run("AC9", None, ac9),
        run("AC10", None, ac10),
    ];
    let failed: Vec<String> = results
        .iter()
        .enumerate()
        .filter(|(_, ok)| !**ok)
        .map(|(i, _)| format!("AC{}", i + 1))
        .collect();
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
