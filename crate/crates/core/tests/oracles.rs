//! Independent oracles for Bernoulli numbers, the P-matrix, edge
//! propagators, ψ-intersections and truncation behaviour.

use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use gkm_core::bernoulli::{bernoulli_number, bernoulli_polynomial};
use gkm_core::builtins;
use gkm_core::chen_ruan::gkm_assemble;
use gkm_core::frobenius::FrobeniusData;
use gkm_core::graph::{potential, EvalOptions, Mode, WeightContext};
use gkm_core::group::{AxisChar, GroupData, SectorAction};
use gkm_core::psi::{psi_intersection, psi_intersection_dvv};
use gkm_core::rmatrix::{qrr_pmatrix, solve_qde, target_pmatrix, Boundary};
use gkm_core::scalar::{int, rat};
use gkm_core::series::{TSeries, EXACT};
use gkm_core::{Rational, Scalar};

fn q(n: i64) -> Rational {
    int(n)
}

fn factorial(n: u64) -> Rational {
    (1..=n).fold(Rational::one(), |a, k| a * q(k as i64))
}

/// `exp` of a power series with zero constant term, via `e' = f'e`.
fn exp_series(f: &[Rational]) -> Vec<Rational> {
    let mut e = vec![Rational::zero(); f.len()];
    e[0] = Rational::one();
    for n in 1..f.len() {
        let mut s = Rational::zero();
        for k in 1..=n {
            s += q(k as i64) * &f[k] * &e[n - k];
        }
        e[n] = s / q(n as i64);
    }
    e
}

/// `B_m(x)` straight from `t e^{tx}/(e^t − 1)` by series division.
fn bernoulli_by_division(m: usize, x: &Rational) -> Rational {
    let num: Vec<Rational> = (0..=m)
        .map(|n| x.pow(n as i32) / factorial(n as u64))
        .collect();
    let den: Vec<Rational> = (0..=m)
        .map(|n| Rational::one() / factorial(n as u64 + 1))
        .collect();
    let mut quo = vec![Rational::zero(); m + 1];
    for n in 0..=m {
        let mut s = num[n].clone();
        for k in 1..=n {
            s -= &den[k] * &quo[n - k];
        }
        quo[n] = s / &den[0];
    }
    &quo[m] * factorial(m as u64)
}

#[test]
fn faulhaber() {
    // Σ_{k<n} k^m = (B_{m+1}(n) − B_{m+1})/(m + 1)
    for m in 0..10u32 {
        for n in 1..12i64 {
            let direct: Rational = (0..n).map(|k| q(k.pow(m))).sum();
            let via = (bernoulli_polynomial(m as usize + 1, &q(n))
                - bernoulli_number(m as usize + 1))
                / q(m as i64 + 1);
            assert_eq!(direct, via, "m = {m}, n = {n}");
        }
    }
}

#[test]
fn bernoulli_matches_generating_function() {
    for x in [rat(0, 1), rat(1, 2), rat(1, 3), rat(2, 5), rat(-7, 4)] {
        for m in 0..12 {
            assert_eq!(
                bernoulli_polynomial(m, &x),
                bernoulli_by_division(m, &x),
                "B_{m}({x})"
            );
        }
    }
}

#[test]
fn trivial_pmatrix_is_reflected_stirling() {
    // Γ(x) ~ √(2π) x^{x−½} e^{−x} (1 + 1/12x + 1/288x² − 139/51840x³ − 571/2488320x⁴ + …);
    // P(z) is that correction series at x = −w/z.
    let stirling = [
        rat(1, 1),
        rat(1, 12),
        rat(1, 288),
        rat(-139, 51840),
        rat(-571, 2488320),
    ];
    let g = GroupData::abelian(&[]).unwrap();
    for w in [rat(1, 1), rat(5, 1), rat(-2, 3)] {
        let action =
            SectorAction::new(&g, vec![AxisChar::Exponents(vec![])], vec![w.clone()]).unwrap();
        let p = qrr_pmatrix(&g, &action, 4);
        for (k, s) in stirling.iter().enumerate() {
            let sign = if k % 2 == 1 {
                -Rational::one()
            } else {
                Rational::one()
            };
            let want = sign * s / w.pow(k as i32);
            assert_eq!(
                p.coeff(k).get(0, 0).at_origin(),
                Scalar::from_rational(want),
                "w = {w}, k = {k}"
            );
        }
    }
}

#[test]
fn z2_pmatrix_by_fourier_transform() {
    // B_n(½) = (2^{1−n} − 1) B_n, so the twisted-sector series needs no ½-evaluation.
    const K: usize = 6;
    let g = GroupData::abelian(&[2]).unwrap();
    for w in [rat(1, 1), rat(3, 2), rat(-4, 1)] {
        let action =
            SectorAction::new(&g, vec![AxisChar::Exponents(vec![1])], vec![w.clone()]).unwrap();
        let p = qrr_pmatrix(&g, &action, K);
        let log = |twisted: bool| -> Vec<Rational> {
            let mut f = vec![Rational::zero(); K + 1];
            for (m, fm) in f.iter_mut().enumerate().skip(1) {
                let mut b = bernoulli_by_division(m + 1, &Rational::zero());
                if twisted {
                    b *= Rational::new(2.into(), 2i64.pow(m as u32 + 1).into()) - Rational::one();
                }
                let sign = if m % 2 == 1 {
                    -Rational::one()
                } else {
                    Rational::one()
                };
                *fm = sign * b / (q(m as i64 * (m as i64 + 1)) * w.pow(m as i32));
            }
            f
        };
        let e0 = exp_series(&log(false));
        let e1 = exp_series(&log(true));
        for k in 0..=K {
            let even = (&e0[k] + &e1[k]) / q(2);
            let odd = (&e0[k] - &e1[k]) / q(2);
            for (j, i, want) in [(0, 0, &even), (1, 1, &even), (0, 1, &odd), (1, 0, &odd)] {
                assert_eq!(
                    p.coeff(k).get(j, i).at_origin(),
                    Scalar::from_rational(want.clone()),
                    "w = {w}, k = {k}, ({j},{i})"
                );
            }
        }
    }
}

fn classical(name: &str, order: usize) -> (FrobeniusData, gkm_core::rmatrix::RMatrix) {
    let t = builtins::target(name).unwrap();
    let data = FrobeniusData::classical(&gkm_assemble(&t).unwrap());
    let r = solve_qde(&data, &Boundary::Matrix(target_pmatrix(&t, order)), order).unwrap();
    (data, r)
}

#[test]
fn edge_times_z_plus_w_is_numerator() {
    const K: usize = 6;
    for name in ["c-z2", "c3-z3", "c2-klein", "two-point"] {
        let (data, r) = classical(name, K);
        let ctx = WeightContext::new(&data, &r, 4).unwrap();
        let n = data.rank();
        for i in 0..n {
            for j in 0..n {
                for s in 0..=K as u32 {
                    for a in 0..=s {
                        let b = s - a;
                        let mut num = TSeries::zero(0, EXACT);
                        for p in 0..n {
                            num += &(r.coeff(a as usize).get(p, i) * r.coeff(b as usize).get(p, j));
                        }
                        // δ − Σ_p R_p^i(−z) R_p^j(−w) at z^a w^b
                        if s % 2 == 0 {
                            num = -&num;
                        }
                        if s == 0 && i == j {
                            num += &TSeries::one(0);
                        }
                        let mut lhs = TSeries::zero(0, EXACT);
                        if a > 0 {
                            lhs += &ctx.edge(i, j, a - 1, b).unwrap();
                        }
                        if b > 0 {
                            lhs += &ctx.edge(i, j, a, b - 1).unwrap();
                        }
                        assert_eq!(lhs, num, "{name} ({i},{j}) z^{a} w^{b}");
                    }
                }
                for a in 0..K as u32 {
                    for b in 0..K as u32 - a {
                        assert_eq!(ctx.edge(i, j, a, b).unwrap(), ctx.edge(j, i, b, a).unwrap());
                    }
                }
            }
        }
        assert!(
            ctx.edge(0, 0, K as u32, 0).is_err(),
            "{name}: edge beyond K must be refused"
        );
    }
}

#[test]
fn rmatrix_truncation_is_consistent() {
    for name in ["c3-z3", "c2-klein"] {
        let (_, r8) = classical(name, 8);
        let (_, r4) = classical(name, 4);
        assert_eq!(r8.truncated(4), r4, "{name}");
    }
    let (t, d4) = builtins::genus_zero("rank2-deformed", 4).unwrap();
    let (_, d6) = builtins::genus_zero("rank2-deformed", 6).unwrap();
    assert_eq!(d4.psi(), d6.psi());
    for i in 0..2 {
        assert_eq!(d4.u(i), d6.u(i));
        assert_eq!(d4.sqrt_delta(i), d6.sqrt_delta(i));
    }
    let b = Boundary::odd_diagonal_of(&target_pmatrix(&t, 4));
    let r4 = solve_qde(&d4, &b, 4).unwrap();
    let r6 = solve_qde(&d6, &b, 4).unwrap();
    assert_eq!(r4, r6);
}

#[test]
fn potential_ignores_surplus_z_order() {
    let (data, r4) = classical("c3-z3", 4);
    let (_, r7) = classical("c3-z3", 7);
    let opts = EvalOptions::default();
    let a = potential(1, 2, &data, &r4, 1, Mode::Ancestor, &opts).unwrap();
    let b = potential(1, 2, &data, &r7, 1, Mode::Ancestor, &opts).unwrap();
    assert_eq!(a.to_json(), b.to_json());
}

#[test]
fn one_point_psi_integrals() {
    // ⟨τ_{3g−2}⟩_g = 1/(24^g g!)
    for g in 1..=5u32 {
        let want = Rational::one() / (q(24).pow(g as i32) * factorial(g as u64));
        assert_eq!(psi_intersection(g, &[3 * g - 2]), want, "g = {g}");
    }
    assert_eq!(psi_intersection(2, &[2, 3]), rat(29, 5760));
    // ⟨τ_1^n⟩_1 = (n − 1)!/24
    for n in 1..=6u64 {
        assert_eq!(
            psi_intersection(1, &vec![1; n as usize]),
            factorial(n - 1) / q(24),
            "n = {n}"
        );
    }
}

fn stable_key() -> impl Strategy<Value = (u32, Vec<u32>)> {
    (0u32..=3, 1usize..=5)
        .prop_filter("stable", |(g, n)| 2 * *g as i64 - 2 + *n as i64 > 0)
        .prop_flat_map(|(g, n)| {
            let dim = 3 * g as usize + n - 3;
            (Just(g), proptest::collection::vec(0..n, dim)).prop_map(move |(g, slots)| {
                let mut e = vec![0u32; n];
                for s in slots {
                    e[s] += 1;
                }
                (g, e)
            })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn psi_paths_agree((g, e) in stable_key()) {
        prop_assert_eq!(psi_intersection(g, &e), psi_intersection_dvv(g, &e));
    }

    #[test]
    fn psi_string_and_dilaton((g, e) in stable_key()) {
        let n = e.len() as i64;
        let mut with1 = e.clone();
        with1.push(1);
        prop_assert_eq!(psi_intersection(g, &with1), q(2 * g as i64 - 2 + n) * psi_intersection(g, &e));
        let mut with0 = e.clone();
        with0.push(0);
        let mut s = Rational::zero();
        for j in 0..e.len() {
            if e[j] > 0 {
                let mut f = e.clone();
                f[j] -= 1;
                s += psi_intersection(g, &f);
            }
        }
        prop_assert_eq!(psi_intersection(g, &with0), s);
    }

    #[test]
    fn psi_dimension_gate((g, mut e) in stable_key(), bump in 1u32..3, at in 0usize..5) {
        let i = at % e.len();
        e[i] += bump;
        prop_assert!(psi_intersection(g, &e).is_zero());
        prop_assert!(psi_intersection_dvv(g, &e).is_zero());
    }
}

#[test]
fn calabi_yau_constant_maps() {
    // F_g = (−1)^g |B_{2g} B_{2g−2}| / (4g (2g − 2) (2g − 2)!) for one C³ chart
    for g in 2..=3u32 {
        let n = 2 * g as usize;
        let b = bernoulli_by_division(n, &Rational::zero())
            * bernoulli_by_division(n - 2, &Rational::zero());
        let sign = if g % 2 == 0 {
            Rational::one()
        } else {
            -Rational::one()
        };
        let want = sign * b.abs() / (q(4 * g as i64 * (n as i64 - 2)) * factorial(n as u64 - 2));
        for name in ["c3-cy", "c3-cy-scaled"] {
            let (data, r) = classical(name, 3 * g as usize - 1);
            let table =
                potential(g, 0, &data, &r, 0, Mode::Ancestor, &EvalOptions::default()).unwrap();
            assert_eq!(
                table.get(&[]).unwrap().at_origin(),
                Scalar::from_rational(want.clone()),
                "{name}, g = {g}"
            );
        }
    }
}

#[test]
fn nonabelian_table_is_unitary() {
    let s3 = r#"{
        "order": 6,
        "classes": [
            {"label": "1", "size": 1, "centralizer": 6, "inverse": 0},
            {"label": "(12)", "size": 3, "centralizer": 2, "inverse": 1},
            {"label": "(123)", "size": 2, "centralizer": 3, "inverse": 2}
        ],
        "characters": [["1","1","1"], ["1","-1","1"], ["2","0","-1"]]
    }"#;
    let g = GroupData::from_table_json(s3).unwrap();
    let axes = vec![AxisChar::Character(1), AxisChar::Character(1)];
    let action = SectorAction::new(&g, axes, vec![rat(1, 1), rat(-3, 2)]).unwrap();
    let target = gkm_core::chen_ruan::GKMTarget::single(g, action);
    let alg = gkm_assemble(&target).unwrap();
    alg.verify().unwrap();
    let p = target_pmatrix(&target, 8);
    assert!(p.unitarity_check().is_ok());
    // R_1 symmetric is the first-order content of unitarity
    assert_eq!(p.coeff(1).transpose(), *p.coeff(1));
}
