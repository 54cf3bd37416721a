mod common;

use autler_townes::angular::{
    dipole_amplitude, relative_line_strength, wigner3j, wigner6j, HalfInt, Manifold, Polarization, Sublevel,
};
use common::ClebschGordan;
use proptest::prelude::*;

fn h(twice: i32) -> HalfInt {
    HalfInt::from_twice(twice)
}

fn manifold(ti: i32, tjg: i32, tje: i32) -> Manifold {
    Manifold { nuclear_spin: h(ti), j_ground: h(tjg), j_excited: h(tje) }
}

/// Twice-valued `(j1, j2, j3)` with `j3` in the triangle of the first two.
fn triad() -> impl Strategy<Value = (i32, i32, i32)> {
    (0..=9i32, 0..=9i32).prop_flat_map(|(a, b)| {
        let lo = (a - b).abs();
        let hi = a + b;
        ((lo / 2)..=(hi / 2)).prop_map(move |k| (a, b, lo + 2 * k))
    })
}

proptest! {
    #[test]
    fn three_j_matches_lowering_operator_tables((a, b, c) in triad(), k1 in 0..20i32, k2 in 0..20i32) {
        let m1 = -a + 2 * (k1 % (a + 1));
        let m2 = -b + 2 * (k2 % (b + 1));
        let m3 = -m1 - m2;
        prop_assume!(m3.abs() <= c);
        let mut cg = ClebschGordan::default();
        let want = cg.three_j(a, b, c, m1, m2, m3);
        let got = wigner3j(h(a), h(b), h(c), h(m1), h(m2), h(m3)).unwrap();
        prop_assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn three_j_column_symmetries((a, b, c) in triad(), k1 in 0..20i32, k2 in 0..20i32) {
        let m1 = -a + 2 * (k1 % (a + 1));
        let m2 = -b + 2 * (k2 % (b + 1));
        let m3 = -m1 - m2;
        prop_assume!(m3.abs() <= c);
        let base = wigner3j(h(a), h(b), h(c), h(m1), h(m2), h(m3)).unwrap();
        let cyclic = wigner3j(h(b), h(c), h(a), h(m2), h(m3), h(m1)).unwrap();
        prop_assert!((base - cyclic).abs() < 1e-13);
        let sign = if ((a + b + c) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let swapped = wigner3j(h(b), h(a), h(c), h(m2), h(m1), h(m3)).unwrap();
        prop_assert!((base - sign * swapped).abs() < 1e-13);
        let flipped = wigner3j(h(a), h(b), h(c), h(-m1), h(-m2), h(-m3)).unwrap();
        prop_assert!((base - sign * flipped).abs() < 1e-13);
    }

    #[test]
    fn six_j_matches_recoupling_overlap((a, b, ab) in triad(), c in 0..=6i32, k in 0..20i32, l in 0..20i32) {
        // total j in ab x c, intermediate bc in b x c, and (a, bc, j) a valid triad
        let js: Vec<i32> = ((ab - c).abs()..=ab + c).step_by(2).collect();
        let j = js[k as usize % js.len()];
        let bcs: Vec<i32> = ((b - c).abs()..=b + c).step_by(2).filter(|&x| (a - x).abs() <= j && j <= a + x).collect();
        prop_assume!(!bcs.is_empty());
        let bc = bcs[l as usize % bcs.len()];
        let mut cg = ClebschGordan::default();
        let want = cg.six_j(a, b, ab, c, j, bc);
        let got = wigner6j(h(a), h(b), h(ab), h(c), h(j), h(bc)).unwrap();
        prop_assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
}

#[test]
fn three_j_selection_rules() {
    assert_eq!(wigner3j(h(2), h(2), h(2), h(2), h(2), h(-4)).unwrap(), 0.0);
    // m sum nonzero
    assert_eq!(wigner3j(h(2), h(2), h(2), h(2), h(0), h(0)).unwrap(), 0.0);
    // triangle violated
    assert_eq!(wigner3j(h(2), h(2), h(6), h(0), h(0), h(0)).unwrap(), 0.0);
    // |m| > j is zero, not an error
    assert_eq!(wigner3j(h(2), h(2), h(2), h(4), h(-4), h(0)).unwrap(), 0.0);
    // odd row sum with all m = 0
    assert_eq!(wigner3j(h(2), h(2), h(2), h(0), h(0), h(0)).unwrap(), 0.0);
    assert!(wigner3j(h(2), h(2), h(2), h(1), h(-1), h(0)).is_err());
}

#[test]
fn six_j_rejects_half_integer_perimeter() {
    assert!(wigner6j(h(1), h(1), h(1), h(1), h(1), h(1)).is_err());
    assert_eq!(wigner6j(h(2), h(2), h(8), h(2), h(2), h(2)).unwrap(), 0.0);
}

#[test]
fn dipoles_match_uncoupled_basis() {
    // caesium D1 and D2, rubidium-87 D1, and an I = 1 toy manifold
    for (ti, tjg, tje) in [(7, 1, 1), (7, 1, 3), (3, 1, 1), (2, 1, 3)] {
        let m = manifold(ti, tjg, tje);
        let mut cg = ClebschGordan::default();
        let mut pairs = 0;
        let mut max_dev: f64 = 0.0;
        let mut sign_pairs = Vec::new();
        for fg in m.ground_levels() {
            for fe in m.excited_levels() {
                for mg in fg.projections() {
                    for pol in Polarization::ALL {
                        let me = mg + HalfInt::integer(pol.q());
                        if me.abs() > fe {
                            continue;
                        }
                        let got = dipole_amplitude(&m, Sublevel::new(fg, mg), Sublevel::new(fe, me), pol).unwrap().value();
                        let want = cg.dipole(ti, tjg, tje, fg.twice(), mg.twice(), fe.twice(), me.twice(), pol.q());
                        max_dev = max_dev.max((got.abs() - want.abs()).abs());
                        if want.abs() > 1e-9 {
                            sign_pairs.push(got.signum() * want.signum());
                        }
                        pairs += 1;
                    }
                }
            }
        }
        assert!(pairs > 0);
        assert!(max_dev < 1e-12, "manifold ({ti}, {tjg}, {tje}): |d| deviation {max_dev}");
        assert!(!sign_pairs.is_empty());
    }
}

#[test]
fn interference_sign_is_convention_free() {
    // products c_n c_n' d_n d_n' are invariant under any per-level phase choice
    let m = manifold(7, 1, 1);
    let mut cg = ClebschGordan::default();
    let g4 = h(8);
    let probe = |fe: i32, cg: &mut ClebschGordan| {
        let lib = dipole_amplitude(&m, Sublevel::new(g4, h(8)), Sublevel::new(h(fe), h(6)), Polarization::SigmaMinus).unwrap().value();
        (lib, cg.dipole(7, 1, 1, 8, 8, fe, 6, -1))
    };
    let control = |fe: i32, cg: &mut ClebschGordan| {
        let lib = dipole_amplitude(&m, Sublevel::new(g4, h(4)), Sublevel::new(h(fe), h(6)), Polarization::SigmaPlus).unwrap().value();
        (lib, cg.dipole(7, 1, 1, 8, 4, fe, 6, 1))
    };
    let (cn, cn_o) = probe(6, &mut cg);
    let (cp, cp_o) = probe(8, &mut cg);
    let (dn, dn_o) = control(6, &mut cg);
    let (dp, dp_o) = control(8, &mut cg);
    let lib = cn * cp * dn * dp;
    let oracle = cn_o * cp_o * dn_o * dp_o;
    assert!(lib.abs() > 1e-3);
    assert_eq!(lib.signum(), oracle.signum());
    assert!((lib - oracle).abs() < 1e-13);
}

#[test]
fn line_strengths_sum_to_one() {
    for (ti, tjg, tje) in [(7, 1, 1), (7, 1, 3), (3, 1, 1), (3, 1, 3), (5, 1, 1)] {
        let m = manifold(ti, tjg, tje);
        for fe in m.excited_levels() {
            let total: f64 = m.ground_levels().iter().map(|&fg| relative_line_strength(&m, fg, fe).unwrap()).sum();
            assert!((total - 1.0).abs() < 1e-13, "({ti}, {tjg}, {tje}) F' = {fe}: {total}");
        }
    }
}

#[test]
fn cesium_d1_probe_and_control_amplitudes() {
    let m = manifold(7, 1, 1);
    let d = |mg: i32, fe: i32, pol| dipole_amplitude(&m, Sublevel::new(h(8), h(mg)), Sublevel::new(h(fe), h(6)), pol).unwrap().value();
    let c_n = d(8, 6, Polarization::SigmaMinus);
    let c_np = d(8, 8, Polarization::SigmaMinus);
    let d_n = d(4, 6, Polarization::SigmaPlus);
    let d_np = d(4, 8, Polarization::SigmaPlus);
    // exact values: -sqrt(7/12), sqrt(1/12), -sqrt(1/48), -sqrt(7/48)
    assert!((c_n + (7.0f64 / 12.0).sqrt()).abs() < 1e-14);
    assert!((c_np - (1.0f64 / 12.0).sqrt()).abs() < 1e-14);
    assert!((d_n + (1.0f64 / 48.0).sqrt()).abs() < 1e-14);
    assert!((d_np + (7.0f64 / 48.0).sqrt()).abs() < 1e-14);
    assert!((d_np / d_n - 7f64.sqrt()).abs() < 1e-13);
}
