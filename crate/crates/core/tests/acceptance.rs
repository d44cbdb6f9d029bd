//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs without the libtest harness.

use std::path::PathBuf;
use std::process::ExitCode;

use num_integer::Integer;
use num_traits::Signed;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

use surfcalc::blowup::SurfaceModel;
use surfcalc::contraction::{global_h1_budget, k_squared_via_formula, moduli_dim, verify_pullback_display};
use surfcalc::cover::{branch_at_nodes, double_cover_invariants, invariant_deformation_dim, make_cover};
use surfcalc::cyclic::{chain_to_mq, hj_expand, CyclicQuotient};
use surfcalc::linalg::determinant;
use surfcalc::qlattice::{int, ratio, BasisLabel, DivisorClass, Lattice, Rational};
use surfcalc::scenario::{load_scenario, prepare, Prepared};
use surfcalc::{ClassExpr, SingularSurface};

type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn prepared(name: &str) -> Result<Prepared, String> {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(format!("{name}.json"));
    let s = load_scenario(&p).map_err(|e| e.to_string())?;
    prepare(&s).map_err(|e| e.to_string())
}

fn surface<'a>(p: &'a Prepared, name: &str) -> Result<&'a SingularSurface, String> {
    match p.contraction(name) {
        Some(Ok(s)) => Ok(s),
        Some(Err(e)) => Err(format!("{name}: {e}")),
        None => Err(format!("no contraction {name}")),
    }
}

fn stage<'a>(p: &'a Prepared, name: &str) -> Result<&'a SurfaceModel, String> {
    p.stage(name).ok_or_else(|| format!("no stage {name}"))
}

fn eval(m: &SurfaceModel, e: &str) -> Result<DivisorClass, String> {
    let e = ClassExpr::parse(e).map_err(|x| x.to_string())?;
    m.eval(&e).map_err(|x| x.to_string())
}

fn lineqv(m: &SurfaceModel, lhs: &str, rhs: &str) -> Check {
    let l = ClassExpr::parse(lhs).map_err(|x| x.to_string())?;
    let r = eval(m, rhs)?;
    let ok = m.verify_lineqv(&l, &r).map_err(|x| x.to_string())?;
    ensure!(ok, "{lhs} is not equivalent to {rhs}");
    Ok(())
}

fn hj_table() -> Check {
    for ((m, q), want) in [
        ((64, 39), vec![2, 3, 5, 3]),
        ((49, 27), vec![2, 6, 2, 3]),
        ((576, 119), vec![5, 7, 2, 2, 3, 2, 2, 2]),
    ] {
        let s = CyclicQuotient::new(m, q).map_err(|e| e.to_string())?;
        let got = hj_expand(s);
        ensure!(got.entries() == want.as_slice(), "hj_expand({m},{q}) = {:?}", got.entries());
    }
    Ok(())
}

fn godeaux_k2() -> Check {
    let p = prepared("godeaux_Yprime")?;
    let y = surface(&p, "Yprime")?;
    let formula = k_squared_via_formula(y).map_err(|e| e.to_string())?;
    let pullback = y.k_pullback.square();
    let discrepancies = y.k_squared_via_discrepancies();
    ensure!(
        formula == int(1) && pullback == int(1) && discrepancies == int(1),
        "formula {formula}, pullback {pullback}, discrepancies {discrepancies}"
    );
    ensure!(y.base.k_squared() == int(-7), "K_Z^2 = {}", y.base.k_squared());
    Ok(())
}

fn pullback_display() -> Check {
    let p = prepared("godeaux_Yprime")?;
    let y = surface(&p, "Yprime")?;
    let coeffs = [
        ("F1", ratio(3, 8)),
        ("F2", ratio(5, 14)),
        ("E1", ratio(5, 8)),
        ("E2", ratio(5, 7)),
        ("E3", int(1)),
        ("E4", ratio(1, 2)),
        ("E5", ratio(1, 2)),
        ("E6", ratio(13, 14)),
        ("E7", ratio(3, 2)),
        ("M", ratio(4, 7)),
        ("l", ratio(3, 8)),
        ("S", ratio(6, 8)),
    ];
    let mut display = DivisorClass::zero();
    for (name, a) in &coeffs {
        let c = y.base.curve(name).map_err(|e| e.to_string())?;
        display = &display + &c.scale(a);
    }
    let check = verify_pullback_display(y, &display).map_err(|e| e.to_string())?;
    ensure!(y.contracted_curves().count() == 14, "contracted {}", y.contracted_curves().count());
    ensure!(check.lattice_equal, "display differs from K_Z + sum a_i C_i");
    ensure!(check.non_orthogonal.is_empty(), "not orthogonal: {:?}", check.non_orthogonal);
    ensure!(check.square == int(1), "square {}", check.square);
    Ok(())
}

fn campedelli() -> Check {
    let p = prepared("campedelli_Xprime")?;
    let x = surface(&p, "Xprime")?;
    ensure!(x.k_squared == int(2), "K^2 = {}", x.k_squared);
    let f = k_squared_via_formula(x).map_err(|e| e.to_string())?;
    ensure!(f == int(2), "formula gives {f}");
    ensure!(moduli_dim(1, 2) == 6, "moduli_dim(1,2) = {}", moduli_dim(1, 2));
    let b = global_h1_budget(6, &x.records).map_err(|e| e.to_string())?;
    ensure!(b == 0, "budget {b}");
    Ok(())
}

fn dimensions() -> Check {
    ensure!(moduli_dim(1, 1) == 8, "moduli_dim(1,1) = {}", moduli_dim(1, 1));
    let p = prepared("godeaux_Yprime")?;
    let b = global_h1_budget(8, &surface(&p, "Yprime")?.records).map_err(|e| e.to_string())?;
    ensure!(b == 0, "budget {b}");
    let d = invariant_deformation_dim(8, 4).map_err(|e| e.to_string())?;
    ensure!(d == 4, "invariant dim {d}");
    Ok(())
}

/// Classes typed in directly on `h, e1..e9`, independent of any script.
fn table_lattice() -> Result<(Lattice, Vec<DivisorClass>), String> {
    use BasisLabel::{E, H};
    let basis: Vec<BasisLabel> = std::iter::once(H).chain((1..=9).map(E)).collect();
    let lat = Lattice::new(basis).map_err(|e| e.to_string())?;
    let b = vec![
        DivisorClass::from_ints([(E(2), 1), (E(6), -1)]),
        DivisorClass::from_ints([(H, 1), (E(2), -1), (E(3), -1), (E(6), -1)]),
        DivisorClass::from_ints([(H, 1), (E(1), -1), (E(3), -1), (E(5), -1)]),
        DivisorClass::from_ints([(E(1), 1), (E(5), -1)]),
    ];
    Ok((lat, b))
}

fn divisibility() -> Check {
    let (lat, b) = table_lattice()?;
    let sum = b.iter().fold(DivisorClass::zero(), |acc, c| &acc + c);
    let half = lat.divide_class(&sum, 2).map_err(|e| e.to_string())?;
    let want = DivisorClass::from_ints([
        (BasisLabel::H, 1),
        (BasisLabel::E(3), -1),
        (BasisLabel::E(5), -1),
        (BasisLabel::E(6), -1),
    ]);
    ensure!(half.as_ref() == Some(&want), "got {half:?}");
    Ok(())
}

fn lattice_identities() -> Check {
    let p = prepared("godeaux_Yprime")?;
    let e1 = stage(&p, "E1")?;
    let all_e = "e1 - e2 - e3 - e4 - e5 - e6 - e7 - e8 - e9";
    let table = [
        ("B1", "e2 - e6".to_string()),
        ("B2", "h - e2 - e3 - e6".into()),
        ("B3", "h - e1 - e3 - e5".into()),
        ("B4", "e1 - e5".into()),
        ("B5", "h - e1 - e2 - e4".into()),
        ("B6", "e6 - e9".into()),
        ("B7", "e3 - e7".into()),
        ("B8", "e5 - e8".into()),
        ("F1", format!("3h - {all_e}")),
        ("F2", format!("3h - {all_e}")),
        ("l", "h - e3 - e4 - e7".into()),
    ];
    ensure!(table.len() == 11, "table rows");
    for (c, class) in &table {
        lineqv(e1, c, class)?;
    }
    let z = stage(&p, "final")?;
    lineqv(z, "F", "F1 + 2E1 + 2E3 + 3E4")?;
    lineqv(z, "F", "F2 + 2E2 + 3E5 + E6 + E7")?;
    lineqv(z, "K", "-F + E1 + E2 + E3 + E4 + E5 + E6 + E7 + E3 + E4 + E5 + E7")?;
    lineqv(stage(&p, "W")?, "K", "-F2 + E1 - E2")?;
    Ok(())
}

fn cover_numerics() -> Check {
    let p = prepared("godeaux_Yprime")?;
    let e1 = stage(&p, "E1")?;
    let branch: Vec<String> = ["B1", "B2", "B3", "B4"].map(String::from).to_vec();
    let spec = make_cover(e1, &branch).map_err(|e| e.to_string())?;
    ensure!(spec.half_class == eval(e1, "h - e3 - e5 - e6")?, "L = {}", spec.half_class);
    let inv = double_cover_invariants(&e1.k_squared(), &int(1), &spec, e1.canonical());
    ensure!(
        inv.k2_cover == int(-4) && inv.chi_cover == int(1),
        "got ({}, {})",
        inv.k2_cover,
        inv.chi_cover
    );
    // The explicit model of the cover has the same K^2 and is rational.
    let c = prepared("campedelli_Xprime")?;
    ensure!(stage(&c, "Vprime")?.k_squared() == int(-4), "explicit model K^2");
    let nodes = branch_at_nodes(&int(1));
    ensure!(nodes == int(2), "branch_at_nodes(1) = {nodes}");
    Ok(())
}

fn property_suites() -> Check {
    for m in 2u64..=200 {
        for q in (1..m).filter(|q| m.gcd(q) == 1) {
            let s = CyclicQuotient::new(m, q).unwrap();
            ensure!(chain_to_mq(&hj_expand(s)) == Ok(s), "round trip 1/{m}(1,{q})");
        }
    }
    let pairs = (2u64..=1000)
        .prop_flat_map(|m| (proptest::strategy::Just(m), 1..m))
        .prop_filter("coprime", |(m, q)| m.gcd(q) == 1);
    let mut runner = TestRunner::deterministic();
    for _ in 0..500 {
        let (m, q) = pairs.new_tree(&mut runner).map_err(|e| e.to_string())?.current();
        let c = hj_expand(CyclicQuotient::new(m, q).unwrap());
        let r = chain_to_mq(&c.reversed()).map_err(|e| e.to_string())?;
        ensure!(r.m() == m && (q * r.q()) % m == 1, "reversal of 1/{m}(1,{q})");
        let k = c.len();
        let b = c.entries();
        let mat: Vec<Vec<Rational>> = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| match i.abs_diff(j) {
                        0 => int(-(b[i] as i64)),
                        1 => int(1),
                        _ => int(0),
                    })
                    .collect()
            })
            .collect();
        ensure!(determinant(&mat).abs() == int(m as i64), "determinant of {c}");
    }
    for name in ["godeaux_Yprime", "campedelli_Xprime", "godeaux_Ytilde", "godeaux_section6"] {
        let p = prepared(name)?;
        for (cname, y) in p.contractions() {
            let y = y.as_ref().map_err(|e| format!("{cname}: {e}"))?;
            for r in &y.records {
                ensure!(r.discrepancies_in_range(), "{name}/{cname}/{}", r.config.name);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("HJ table", hj_table),
        ("Godeaux K^2 by three routes", godeaux_k2),
        ("pullback display", pullback_display),
        ("Campedelli K^2 and dimensions", campedelli),
        ("dimension arithmetic", dimensions),
        ("2-divisibility of B1+B2+B3+B4", divisibility),
        ("lattice identities", lattice_identities),
        ("cover numerics", cover_numerics),
        ("property suites", property_suites),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(()) => println!("criterion {}: PASS {name}", i + 1),
            Err(e) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {e}", i + 1);
            }
        }
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
