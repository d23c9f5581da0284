//! Acceptance gate: one line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::Instant;

use ehpseq::ext_ehp::{ehp_assemble, james_splitting_check, p_matrix, p_matrix_by_criterion, tower_chart};
use ehpseq::lambda::{connecting_rank, filtration_check, lambda_admissibles, lambda_differential, lambda_homology};
use ehpseq::resolution::{
    build_da, find_identity_components, minimize, solve_delta4, verify_exactness, BGComplex,
    Provenance, Summand, Tower,
};
use ehpseq::steenrod::{admissible_basis, SteenrodElement, SteenrodMonomial};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn el(exponents: &[u32]) -> SteenrodElement {
    SteenrodElement::from(SteenrodMonomial::new(exponents.to_vec()).unwrap())
}

fn master_cross_check() -> Outcome {
    let tower = Tower::build(14, 8).map_err(|e| e.to_string())?;
    let bg = tower_chart(&tower, 8).map_err(|e| e.to_string())?;
    let mut cells = 0;
    let mut classes = 0;
    for n in 1..=8u32 {
        let lambda = lambda_homology(n, 8, 14 - n);
        for s in 0..=8 {
            for t in n..=14 {
                let (a, b) = (bg.dim(n, s, t), lambda.dim(n, s, t));
                ensure(a == b, || format!("n={n} s={s} t={t}: resolution {a}, lambda {b}"))?;
                cells += 1;
                classes += a;
            }
        }
    }
    Ok(format!("{cells} cells agree, {classes} classes"))
}

fn kernel_identities() -> Outcome {
    let sq = SteenrodElement::sq;
    ensure(sq(1).multiply(&sq(1)).is_zero(), || "Sq1Sq1 != 0".into())?;
    ensure(sq(1).multiply(&sq(2)) == sq(3), || "Sq1Sq2 != Sq3".into())?;
    ensure(sq(2).multiply(&sq(2)) == el(&[3, 1]), || "Sq2Sq2 != Sq3Sq1".into())?;

    let basis: Vec<Vec<SteenrodElement>> = (0..=24)
        .map(|d| admissible_basis(d, d).into_iter().map(SteenrodElement::from).collect())
        .collect();
    let mut triples = 0usize;
    for da in 0..=24usize {
        for db in 0..=24 - da {
            for x in &basis[da] {
                for y in &basis[db] {
                    let xy = x.multiply(y);
                    let hx = x.halve().multiply(&y.halve());
                    let lhs: Vec<_> = xy.halve().terms().cloned().collect();
                    let rhs: Vec<_> = hx.terms().cloned().collect();
                    ensure(lhs == rhs, || format!("halving fails on {x} * {y}"))?;
                    for z in basis[..=24 - da - db].iter().flatten() {
                        {
                            let left = xy.multiply(z);
                            let right = x.multiply(&y.multiply(z));
                            ensure(left == right, || format!("({x})({y})({z}) not associative"))?;
                            triples += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{triples} associativity triples"))
}

fn resolution_correctness() -> Outcome {
    let tower = Tower::build(14, 8).map_err(|e| e.to_string())?;
    for t in 1..=14 {
        let bg = tower.bg(t).unwrap();
        bg.check_square_zero().map_err(|e| e.to_string())?;
        ensure(bg.is_minimal(), || format!("BG({t}) not minimal"))?;
        if t >= 2 {
            tower.da(t).unwrap().check_square_zero().map_err(|e| e.to_string())?;
        }
    }
    for t in 1..=8 {
        let bg = tower.bg(t).unwrap().truncate(8).map_err(|e| e.to_string())?;
        let report = verify_exactness(&bg, 20);
        ensure(report.passed(), || format!("BG({t}) not exact: {:?}", report.failures))?;
    }
    Ok("∂² = 0 for BG(1..14), DA(2..14); exact for t <= 8, d <= 20".into())
}

fn indices(c: &BGComplex) -> Vec<Vec<(u32, Provenance)>> {
    c.pages().iter().map(|p| p.iter().map(|x| (x.index(), x.prov)).collect()).collect()
}

fn fixtures() -> Outcome {
    use Provenance::{A, B};
    let tower = Tower::build(4, 4).map_err(|e| e.to_string())?;
    let bg = |t| tower.bg(t).unwrap().truncate(4).unwrap();
    let op = |c: &BGComplex, s: usize, i: usize, j: usize| c.entry(s, i, j).cloned();
    let sq = |i| Some(SteenrodElement::sq(i));

    let bg1 = bg(1);
    let da2 = build_da(&bg1, 4).map_err(|e| e.to_string())?;
    ensure(indices(&da2)[..2] == [vec![(2, A)], vec![(1, B)]], || "DA(2) pages".into())?;
    ensure(op(&da2, 0, 0, 0) == sq(1), || "DA(2) δ3".into())?;

    let bg2 = bg(2);
    ensure(indices(&bg2)[..2] == [vec![(2, A)], vec![(1, B)]], || "BG(2) pages".into())?;
    ensure(bg2.page(2).is_empty() && op(&bg2, 0, 0, 0) == sq(1), || "BG(2) differential".into())?;

    let bg3 = bg(3);
    let shape: Vec<Vec<u32>> = bg3.pages().iter().map(|p| p.iter().map(Summand::index).collect()).collect();
    ensure(shape == [vec![3], vec![2], vec![1], vec![], vec![]], || format!("BG(3) pages {shape:?}"))?;
    ensure(op(&bg3, 0, 0, 0) == sq(1) && op(&bg3, 1, 0, 0) == sq(1), || "BG(3) differential".into())?;
    let da3 = build_da(&bg2, 3).map_err(|e| e.to_string())?;
    ensure(
        indices(&da3)[..3] == [vec![(3, A)], vec![(2, A)], vec![(1, B)]],
        || "DA(3) pages".into(),
    )?;

    let da4 = build_da(&bg3, 4).map_err(|e| e.to_string())?;
    ensure(
        indices(&da4) == [vec![(4, A)], vec![(3, A), (2, B)], vec![(2, A)], vec![(1, B)], vec![]],
        || "DA(4) pages".into(),
    )?;
    let solved = solve_delta4(&da4).map_err(|e| e.to_string())?;
    ensure(solved == da4, || "DA(4) δ4 nonzero".into())?;
    ensure(find_identity_components(&solved).map_err(|e| e.to_string())?.is_empty(), || "DA(4) identities".into())?;
    ensure(minimize(&solved).map_err(|e| e.to_string())? == solved, || "minimize(DA(4))".into())?;

    let bg4 = bg(4);
    let shape: Vec<Vec<u32>> = bg4.pages().iter().map(|p| p.iter().map(Summand::index).collect()).collect();
    ensure(shape == [vec![4], vec![3, 2], vec![2], vec![1], vec![]], || format!("BG(4) pages {shape:?}"))?;
    let entries: Vec<_> = (0..4)
        .flat_map(|s| bg4.entries(s).map(move |(i, j, op)| (s, i, j, op.clone())).collect::<Vec<_>>())
        .collect();
    let expected = vec![
        (0, 0, 0, SteenrodElement::sq(1)),
        (0, 0, 1, SteenrodElement::sq(2)),
        (1, 0, 0, SteenrodElement::sq(1)),
        (2, 0, 0, SteenrodElement::sq(1)),
    ];
    ensure(entries == expected, || format!("BG(4) entries {entries:?}"))?;
    Ok("BG(2), BG(3), BG(4), DA(2..4) match".into())
}

fn s1_tower() -> Outcome {
    let tower = Tower::build(14, 10).map_err(|e| e.to_string())?;
    let bg = tower_chart(&tower, 10).map_err(|e| e.to_string())?;
    let lambda = lambda_homology(1, 10, 13);
    for s in 0..=10usize {
        for t in 1..=14u32 {
            let expected = usize::from(t == s as u32 + 1);
            ensure(bg.dim(1, s, t) == expected, || format!("resolution s={s} t={t}"))?;
            ensure(lambda.dim(1, s, t) == expected, || format!("lambda s={s} t={t}"))?;
        }
    }
    Ok("E2^{s,s+1}(S^1) = F2 for s <= 10, zero elsewhere for t <= 14".into())
}

fn ehp_bookkeeping() -> Outcome {
    let tower = Tower::build(13, 8).map_err(|e| e.to_string())?;
    let mut nodes = 0;
    let mut nonzero = 0;
    for n in 1..=6u32 {
        for t in 1..=12u32 {
            let report = ehp_assemble(&tower, n, t, 8).map_err(|e| e.to_string())?;
            for row in &report.rows {
                let nullity = row.p.left_kernel().len();
                let corank = row.p_prev.num_cols() - row.rank_p_prev;
                ensure(row.dim_middle == nullity + corank, || format!("n={n} t={t} s={}", row.s))?;
                if t >= n {
                    let lambda = connecting_rank(n, row.s, t - n);
                    ensure(lambda == row.rank_p, || {
                        format!("n={n} t={t} s={}: rank P {} vs lambda {lambda}", row.s, row.rank_p)
                    })?;
                }
                let criterion = p_matrix_by_criterion(&tower, n + 1, t, row.s).map_err(|e| e.to_string())?;
                ensure(criterion == row.p, || format!("criterion n={n} t={t} s={}", row.s))?;
                nonzero += usize::from(row.rank_p > 0);
                nodes += 3;
            }
        }
    }
    Ok(format!("{nodes} exact nodes, {nonzero} nonzero P, connecting ranks match"))
}

fn james_splitting() -> Outcome {
    let tower = Tower::build(13, 8).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for k in 1..=3 {
        checked += james_splitting_check(&tower, k, 12, 8).map_err(|e| e.to_string())?.checked;
        for t in 1..=12 {
            for s in 0..=8 {
                let p = p_matrix(&tower, 1 << k, t, s).map_err(|e| e.to_string())?;
                ensure(p.is_zero(), || format!("P nonzero for n={} t={t} s={s}", 1 << k))?;
            }
        }
    }
    Ok(format!("{checked} (n, s, t) cells for n = 2, 4, 8"))
}

fn indecomposability() -> Outcome {
    for m in 1..=16u32 {
        let decomposable = SteenrodElement::sq(m).is_decomposable().map_err(|e| e.to_string())?;
        ensure(decomposable != m.is_power_of_two(), || format!("Sq^{m}"))?;
    }
    Ok("Sq^1, Sq^2, Sq^4, Sq^8, Sq^16 indecomposable; other Sq^m, m <= 16, decomposable".into())
}

fn oracle_self_validation() -> Outcome {
    let mut monomials = 0;
    for w in 0..=20u32 {
        for s in 0..=w as usize {
            for m in lambda_admissibles(s, w, w + 1) {
                let d = lambda_differential(&m.clone().into());
                ensure(lambda_differential(&d).is_zero(), || format!("d² {m} != 0"))?;
                monomials += 1;
            }
        }
    }
    for n in 1..=6 {
        let report = filtration_check(n, 8, 16);
        ensure(report.passed(), || format!("filtration n={n}: {:?}", report.failures))?;
    }
    Ok(format!("d² = 0 on {monomials} monomials (w <= 20); filtration n <= 6"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 master cross-check", master_cross_check),
        ("2 kernel identities", kernel_identities),
        ("3 resolution correctness", resolution_correctness),
        ("4 hand fixtures", fixtures),
        ("5 S^1 tower", s1_tower),
        ("6 EHP bookkeeping", ehp_bookkeeping),
        ("7 James splitting", james_splitting),
        ("8 indecomposability", indecomposability),
        ("9 oracle self-validation", oracle_self_validation),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} ({secs:.2}s)"),
            Err(reason) => {
                failed += 1;
                println!("FAIL  {name}: {reason} ({secs:.2}s)");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
