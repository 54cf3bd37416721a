//! Reference computations shared by the integration tests. None of these call into the
//! library's own numerics; they rebuild each quantity from a different route.

#![allow(dead_code)]

use nalgebra::{Complex, Matrix3};
use num_complex::Complex64;
use std::collections::HashMap;

/// Clebsch-Gordan tables built by applying `J- = J1- + J2-` to stretched states and
/// Gram-Schmidt orthogonalisation, phased so that the `m1 = j1` component of each
/// `|J, M = J>` is positive. All arguments are twice the angular momentum.
/// `(2J, 2M)` to coefficients over the product basis.
type Table = HashMap<(i32, i32), Vec<f64>>;

#[derive(Default)]
pub struct ClebschGordan {
    tables: HashMap<(i32, i32), Table>,
}

fn lowering(tj: i32, tm: i32) -> f64 {
    (((tj + tm) * (tj - tm + 2)) as f64).sqrt() / 2.0
}

fn build_table(tj1: i32, tj2: i32) -> HashMap<(i32, i32), Vec<f64>> {
    let n2 = (tj2 + 1) as usize;
    let dim = ((tj1 + 1) * (tj2 + 1)) as usize;
    let idx = |tm1: i32, tm2: i32| ((tm1 + tj1) / 2) as usize * n2 + ((tm2 + tj2) / 2) as usize;
    let lower = |v: &[f64]| {
        let mut out = vec![0.0; dim];
        for tm1 in (-tj1..=tj1).step_by(2) {
            for tm2 in (-tj2..=tj2).step_by(2) {
                let c = v[idx(tm1, tm2)];
                if c == 0.0 {
                    continue;
                }
                if tm1 > -tj1 {
                    out[idx(tm1 - 2, tm2)] += c * lowering(tj1, tm1);
                }
                if tm2 > -tj2 {
                    out[idx(tm1, tm2 - 2)] += c * lowering(tj2, tm2);
                }
            }
        }
        out
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut table: HashMap<(i32, i32), Vec<f64>> = HashMap::new();
    let mut tj = tj1 + tj2;
    while tj >= (tj1 - tj2).abs() {
        // top state: residual of the M = J subspace after removing higher J
        let mut best: Option<Vec<f64>> = None;
        for tm1 in (-tj1..=tj1).step_by(2) {
            let tm2 = tj - tm1;
            if tm2.abs() > tj2 || (tm2 + tj2) % 2 != 0 {
                continue;
            }
            let mut v = vec![0.0; dim];
            v[idx(tm1, tm2)] = 1.0;
            let mut higher = tj + 2;
            while higher <= tj1 + tj2 {
                let u = &table[&(higher, tj)];
                let p = dot(&v, u);
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= p * y;
                }
                higher += 2;
            }
            if best.as_ref().is_none_or(|b| dot(&v, &v) > dot(b, b)) {
                best = Some(v);
            }
        }
        let mut v = best.expect("nonempty subspace");
        let norm = dot(&v, &v).sqrt();
        let lead = v[idx(tj1, tj - tj1)];
        let sign = if lead < 0.0 { -1.0 } else { 1.0 };
        for x in v.iter_mut() {
            *x *= sign / norm;
        }
        let mut tm = tj;
        loop {
            table.insert((tj, tm), v.clone());
            if tm == -tj {
                break;
            }
            v = lower(&v);
            let scale = lowering(tj, tm);
            for x in v.iter_mut() {
                *x /= scale;
            }
            tm -= 2;
        }
        tj -= 2;
    }
    table
}

impl ClebschGordan {
    /// `<j1 m1; j2 m2 | J M>`.
    pub fn get(&mut self, tj1: i32, tm1: i32, tj2: i32, tm2: i32, tj: i32, tm: i32) -> f64 {
        if tm1.abs() > tj1 || tm2.abs() > tj2 || tm.abs() > tj || tm1 + tm2 != tm {
            return 0.0;
        }
        if (tj1 + tj2 + tj) % 2 != 0 || tj > tj1 + tj2 || tj < (tj1 - tj2).abs() {
            return 0.0;
        }
        let table = self.tables.entry((tj1, tj2)).or_insert_with(|| build_table(tj1, tj2));
        let n2 = (tj2 + 1) as usize;
        table[&(tj, tm)][((tm1 + tj1) / 2) as usize * n2 + ((tm2 + tj2) / 2) as usize]
    }

    pub fn three_j(&mut self, tj1: i32, tj2: i32, tj3: i32, tm1: i32, tm2: i32, tm3: i32) -> f64 {
        let cg = self.get(tj1, tm1, tj2, tm2, tj3, -tm3);
        let phase = if ((tj1 - tj2 - tm3) / 2).rem_euclid(2) == 1 { -1.0 } else { 1.0 };
        phase * cg / ((tj3 + 1) as f64).sqrt()
    }

    /// 6j symbol from the overlap of the two coupling orders of three angular momenta:
    /// `{j1 j2 j12; j3 J j23}` with `J` the total.
    pub fn six_j(&mut self, tj1: i32, tj2: i32, tj12: i32, tj3: i32, tj: i32, tj23: i32) -> f64 {
        let tri = |a: i32, b: i32, c: i32| (a + b + c) % 2 == 0 && c >= (a - b).abs() && c <= a + b;
        if !(tri(tj1, tj2, tj12) && tri(tj12, tj3, tj) && tri(tj2, tj3, tj23) && tri(tj1, tj23, tj)) {
            return 0.0;
        }
        let tm = tj;
        let mut overlap = 0.0;
        for tm1 in (-tj1..=tj1).step_by(2) {
            for tm2 in (-tj2..=tj2).step_by(2) {
                let tm3 = tm - tm1 - tm2;
                if tm3.abs() > tj3 {
                    continue;
                }
                let left = self.get(tj1, tm1, tj2, tm2, tj12, tm1 + tm2) * self.get(tj12, tm1 + tm2, tj3, tm3, tj, tm);
                if left == 0.0 {
                    continue;
                }
                let right =
                    self.get(tj2, tm2, tj3, tm3, tj23, tm2 + tm3) * self.get(tj1, tm1, tj23, tm2 + tm3, tj, tm);
                overlap += left * right;
            }
        }
        let phase = if ((tj1 + tj2 + tj3 + tj) / 2).rem_euclid(2) == 1 { -1.0 } else { 1.0 };
        phase * overlap / (((tj12 + 1) * (tj23 + 1)) as f64).sqrt()
    }

    /// `<Fe Me | d_q | Fg Mg>` for a single fine-structure line, assembled in the uncoupled
    /// `|J mJ> |I mI>` basis with electronic element `<Jg mg; 1 q | Je me>`.
    #[allow(clippy::too_many_arguments)]
    pub fn dipole(&mut self, ti: i32, tjg: i32, tje: i32, tfg: i32, tmg: i32, tfe: i32, tme: i32, q: i32) -> f64 {
        let mut acc = 0.0;
        for tmi in (-ti..=ti).step_by(2) {
            let tmjg = tmg - tmi;
            let tmje = tme - tmi;
            if tmjg.abs() > tjg || tmje.abs() > tje {
                continue;
            }
            acc += self.get(tjg, tmjg, ti, tmi, tfg, tmg)
                * self.get(tje, tmje, ti, tmi, tfe, tme)
                * self.get(tjg, tmjg, 2, 2 * q, tje, tmje);
        }
        acc
    }
}

/// Probe susceptibility of an ideal three-level lambda system.
pub fn lambda_closed_form(delta_bar: f64, delta: f64, rabi: f64, strength: f64) -> Complex64 {
    let d = Complex64::new(delta_bar, 0.5) - rabi * rabi / 4.0 / (delta_bar - delta);
    -0.75 * strength / d
}

/// Eigenvalues of the non-Hermitian three-state Hamiltonian over `(n, n', m' + photon)`.
pub fn effective_hamiltonian_eigenvalues(e_n: f64, e_np: f64, omega: f64, v_n: Complex64, v_np: Complex64) -> Vec<Complex64> {
    let z = Complex::new(0.0, 0.0);
    let h = Matrix3::new(
        Complex::new(e_n, -0.5), z, v_n,
        z, Complex::new(e_np, -0.5), v_np,
        v_n.conj(), v_np.conj(), Complex::new(omega, 0.0),
    );
    sorted(h.schur().eigenvalues().expect("eigenvalues").iter().copied().collect())
}

/// Roots of `z^3 + c2 z^2 + c1 z + c0` as eigenvalues of the companion matrix.
pub fn companion_roots(c2: Complex64, c1: Complex64, c0: Complex64) -> Vec<Complex64> {
    let o = Complex::new(1.0, 0.0);
    let z = Complex::new(0.0, 0.0);
    let m = Matrix3::new(z, z, -c0, o, z, -c1, z, o, -c2);
    sorted(m.schur().eigenvalues().expect("eigenvalues").iter().copied().collect())
}

fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

/// Relative L2 distance between two complex sequences.
pub fn relative_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}
