//! Builders for the uniform k-ary equality instance: the input distribution,
//! the lifted (U, V) distribution, and the class-count formula.
//!
//! Input symbols are `"1" ..= "k"`; lifted symbols are `"x,z"` pairs with
//! `z = 1` exactly on the diagonal.

use crate::prob::{Alphabet, JointPMF};

/// Composite symbol for a `(input, function value)` pair.
pub fn pair_label(sym: &str, z: &str) -> String {
    format!("{sym},{z}")
}

/// Uniform independent inputs over `{1..k}` x `{1..k}`.
pub fn uniform_xy(k: usize) -> JointPMF {
    let x = Alphabet::numbered("X", k);
    let y = Alphabet::numbered("Y", k);
    JointPMF::new(vec![x, y], vec![1.0 / (k * k) as f64; k * k]).expect("valid uniform pmf")
}

/// The lifted pmf over `U = (X, Z)`, `V = (Y, Z)` for uniform k-ary EQ,
/// built directly: off-diagonal pairs carry z = 0, diagonal pairs z = 1,
/// every atom at mass 1/k^2.
pub fn uv_pmf(k: usize) -> JointPMF {
    let mut symbols = Vec::with_capacity(2 * k);
    for x in 1..=k {
        symbols.push(pair_label(&x.to_string(), "0"));
        symbols.push(pair_label(&x.to_string(), "1"));
    }
    let u = Alphabet::new("U", symbols.clone()).expect("pair symbols are unique");
    let v = Alphabet::new("V", symbols).expect("pair symbols are unique");
    // symbol index of (x, z) with x in 1..=k
    let si = |x: usize, z: usize| (x - 1) * 2 + z;
    let p = 1.0 / (k * k) as f64;
    let mut atoms = Vec::with_capacity(k * k);
    for x in 1..=k {
        for y in 1..=k {
            if x == y {
                atoms.push((vec![si(x, 1), si(y, 1)], p));
            } else {
                atoms.push((vec![si(x, 0), si(y, 0)], p));
            }
        }
    }
    JointPMF::from_atoms(vec![u, v], &atoms).expect("valid lifted pmf")
}

/// Binomial coefficient, exact in u64 for the desk-scale k used here.
pub fn binom(n: u64, r: u64) -> u64 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u64 = 1;
    for i in 0..r {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Number of maximal-biclique classes of the k-ary EQ characteristic graph:
/// `sum_{i=1..k-1} C(k,i) + k = 2^k - 2 + k`.
pub fn class_count(k: u64) -> u64 {
    (1u64 << k) - 2 + k
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uv_pmf_atom_structure() {
        let pmf = uv_pmf(3);
        assert_eq!(pmf.atoms().count(), 9);
        for (syms, m) in pmf.atoms() {
            assert!((m - 1.0 / 9.0).abs() < 1e-15);
            let u = pmf.var(0).symbol(syms[0]);
            let v = pmf.var(1).symbol(syms[1]);
            let (ux, uz) = u.split_once(',').unwrap();
            let (vx, vz) = v.split_once(',').unwrap();
            assert_eq!(uz, vz);
            assert_eq!(uz == "1", ux == vx);
        }
    }

    #[test]
    fn binom_values() {
        assert_eq!(binom(4, 2), 6);
        assert_eq!(binom(5, 0), 1);
        assert_eq!(binom(5, 5), 1);
        assert_eq!(binom(5, 6), 0);
        assert_eq!(binom(28, 14), 40116600);
    }

    #[test]
    fn class_count_values() {
        assert_eq!(class_count(2), 4);
        assert_eq!(class_count(3), 9);
        assert_eq!(class_count(4), 18);
        assert_eq!(class_count(7), 133);
    }
}
