//! Exact finite joint distributions and the entropy functionals everything
//! else consumes.
//!
//! All logarithms are base 2; every returned quantity is in bits.  The
//! conventions `0 log 0 = 0` and `0 log (0/0) = 0` apply throughout, and
//! mutual informations are clamped to zero when within `CLAMP_SLACK` of it.

use crate::error::{Error, Result};
use sha2::{Digest, Sha256};

/// All information quantities are plain `f64` bit values.
pub type Bits = f64;

/// Total mass may deviate from 1 by this much before validation rejects.
pub const VALIDATE_TOL: f64 = 1e-9;
/// Entries smaller than this are stored as exact zeros.
pub const ZERO_SNAP: f64 = 1e-15;
/// Slack under which a slightly negative mutual information clamps to 0.
pub const CLAMP_SLACK: f64 = 1e-9;
/// Tolerance for exact identities (chain rule, marginal checks).
pub const IDENTITY_TOL: f64 = 1e-12;

/// `x log2 x` with the continuity convention at zero.
#[inline]
pub fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// Shannon entropy of a nonnegative vector, in bits.  Float noise near a
/// point mass can drive the raw sum a few ulps negative; entropies are
/// non-negative, so that noise clamps to zero.
pub fn entropy_of(p: &[f64]) -> Bits {
    let h = -p.iter().map(|&x| xlog2x(x)).sum::<f64>();
    if h < 0.0 && h >= -CLAMP_SLACK {
        0.0
    } else {
        h
    }
}

/// Binary entropy `H_2(p)`.
pub fn h2(p: f64) -> Bits {
    -xlog2x(p) - xlog2x(1.0 - p)
}

/// A named, ordered, duplicate-free symbol list.  Declaration order is the
/// canonical order for every downstream operation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    name: String,
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new(name: impl Into<String>, symbols: Vec<String>) -> Result<Self> {
        let name = name.into();
        if symbols.is_empty() {
            return Err(Error::Parse(format!("alphabet `{name}` has no symbols")));
        }
        for (i, s) in symbols.iter().enumerate() {
            if s.is_empty() || s.chars().any(char::is_whitespace) {
                return Err(Error::Parse(format!("bad symbol `{s}` in alphabet `{name}`")));
            }
            if symbols[..i].contains(s) {
                return Err(Error::Parse(format!(
                    "duplicate symbol `{s}` in alphabet `{name}`"
                )));
            }
        }
        Ok(Alphabet { name, symbols })
    }

    /// Alphabet with symbols `"1" ..= "n"`.
    pub fn numbered(name: impl Into<String>, n: usize) -> Self {
        let symbols = (1..=n).map(|i| i.to_string()).collect();
        Alphabet::new(name, symbols).expect("numbered symbols are valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, i: usize) -> &str {
        &self.symbols[i]
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }
}

/// A joint probability mass function over an ordered list of named discrete
/// variables, stored densely in row-major order of the declared alphabets.
#[derive(Debug, Clone)]
pub struct JointPMF {
    vars: Vec<Alphabet>,
    mass: Vec<f64>,
}

impl JointPMF {
    pub fn new(vars: Vec<Alphabet>, mass: Vec<f64>) -> Result<Self> {
        if vars.is_empty() {
            return Err(Error::Parse("a pmf needs at least one variable".into()));
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].iter().any(|w| w.name() == v.name()) {
                return Err(Error::Parse(format!("duplicate variable `{}`", v.name())));
            }
        }
        let size: usize = vars.iter().map(Alphabet::len).product();
        if mass.len() != size {
            return Err(Error::Parse(format!(
                "mass vector has {} entries, expected {}",
                mass.len(),
                size
            )));
        }
        Ok(JointPMF { vars, mass })
    }

    /// Build from sparse atoms; omitted atoms have mass zero and repeated
    /// atoms accumulate.
    pub fn from_atoms(vars: Vec<Alphabet>, atoms: &[(Vec<usize>, f64)]) -> Result<Self> {
        let size: usize = vars.iter().map(Alphabet::len).product();
        let mut pmf = JointPMF::new(vars, vec![0.0; size])?;
        for (syms, p) in atoms {
            let idx = pmf.index_of(syms);
            pmf.mass[idx] += p;
        }
        Ok(pmf)
    }

    /// Validation: rejects negative entries and totals off by more than
    /// `VALIDATE_TOL`, snaps sub-`ZERO_SNAP` entries to exact zero, and
    /// rescales so the total is 1.
    pub fn validate(&self) -> Result<JointPMF> {
        let mut mass = self.mass.clone();
        for m in &mut mass {
            if *m < -ZERO_SNAP {
                return Err(Error::NotAProbability(format!("negative entry {m}")));
            }
            if m.abs() < ZERO_SNAP {
                *m = 0.0;
            }
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > VALIDATE_TOL {
            return Err(Error::NotAProbability(format!("total mass {total}")));
        }
        for m in &mut mass {
            *m /= total;
        }
        Ok(JointPMF {
            vars: self.vars.clone(),
            mass,
        })
    }

    pub fn vars(&self) -> &[Alphabet] {
        &self.vars
    }

    pub fn var(&self, i: usize) -> &Alphabet {
        &self.vars[i]
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.vars.len()];
        for i in (0..self.vars.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.vars[i + 1].len();
        }
        strides
    }

    pub fn index_of(&self, symbols: &[usize]) -> usize {
        debug_assert_eq!(symbols.len(), self.vars.len());
        let strides = self.strides();
        symbols.iter().zip(&strides).map(|(s, st)| s * st).sum()
    }

    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let strides = self.strides();
        strides
            .iter()
            .map(|&st| {
                let s = index / st;
                index %= st;
                s
            })
            .collect()
    }

    /// Iterate positive atoms as (symbol indices, mass).
    pub fn atoms(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(|(i, &m)| (self.decode(i), m))
    }

    /// Resolve variable names to declaration-order indices.  The result is
    /// sorted so that callers marginalize in canonical order no matter how
    /// the query was phrased.
    pub fn var_indices(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut idxs = Vec::with_capacity(names.len());
        for name in names {
            let i = self
                .vars
                .iter()
                .position(|v| v.name() == *name)
                .ok_or_else(|| Error::UnknownVariable((*name).to_string()))?;
            if !idxs.contains(&i) {
                idxs.push(i);
            }
        }
        idxs.sort_unstable();
        Ok(idxs)
    }

    /// Dense marginal over the given (sorted) variable indices.
    fn marginal_vec(&self, idxs: &[usize]) -> Vec<f64> {
        let sizes: Vec<usize> = idxs.iter().map(|&i| self.vars[i].len()).collect();
        let out_size: usize = sizes.iter().product();
        let mut out = vec![0.0; out_size];
        for (full, &m) in self.mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let syms = self.decode(full);
            let mut o = 0usize;
            for (&i, _) in idxs.iter().zip(&sizes) {
                o = o * self.vars[i].len() + syms[i];
            }
            out[o] += m;
        }
        out
    }

    /// Marginal pmf over a subset of variables, in canonical order.
    pub fn marginal(&self, names: &[&str]) -> Result<JointPMF> {
        let idxs = self.var_indices(names)?;
        if idxs.is_empty() {
            return Err(Error::Parse("empty variable subset".into()));
        }
        let vars: Vec<Alphabet> = idxs.iter().map(|&i| self.vars[i].clone()).collect();
        JointPMF::new(vars, self.marginal_vec(&idxs))
    }

    fn entropy_indices(&self, idxs: &[usize]) -> Bits {
        entropy_of(&self.marginal_vec(idxs))
    }

    /// `H(vars)` of the marginal on the named subset.
    pub fn entropy(&self, vars: &[&str]) -> Result<Bits> {
        let idxs = self.var_indices(vars)?;
        if idxs.is_empty() {
            return Err(Error::Parse("empty variable subset".into()));
        }
        Ok(self.entropy_indices(&idxs))
    }

    fn disjoint(&self, a: &[usize], b: &[usize]) -> Result<()> {
        for i in a {
            if b.contains(i) {
                return Err(Error::OverlappingVariableSets(
                    self.vars[*i].name().to_string(),
                ));
            }
        }
        Ok(())
    }

    fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
        let mut u: Vec<usize> = a.iter().chain(b.iter()).copied().collect();
        u.sort_unstable();
        u.dedup();
        u
    }

    /// `H(target | given) = H(target, given) - H(given)`.
    pub fn conditional_entropy(&self, target: &[&str], given: &[&str]) -> Result<Bits> {
        let t = self.var_indices(target)?;
        let g = self.var_indices(given)?;
        self.disjoint(&t, &g)?;
        if g.is_empty() {
            return Ok(self.entropy_indices(&t));
        }
        Ok(self.entropy_indices(&Self::union(&t, &g)) - self.entropy_indices(&g))
    }

    fn clamp_mi(v: f64) -> Bits {
        if v < 0.0 && v >= -CLAMP_SLACK {
            0.0
        } else {
            v
        }
    }

    /// `I(a; b) = H(a) + H(b) - H(a, b)`, clamped to 0 within slack.
    pub fn mutual_information(&self, a: &[&str], b: &[&str]) -> Result<Bits> {
        let ia = self.var_indices(a)?;
        let ib = self.var_indices(b)?;
        self.disjoint(&ia, &ib)?;
        let v = self.entropy_indices(&ia) + self.entropy_indices(&ib)
            - self.entropy_indices(&Self::union(&ia, &ib));
        Ok(Self::clamp_mi(v))
    }

    /// `I(a; b | given) = H(a,g) + H(b,g) - H(a,b,g) - H(g)`.
    pub fn conditional_mutual_information(
        &self,
        a: &[&str],
        b: &[&str],
        given: &[&str],
    ) -> Result<Bits> {
        let ia = self.var_indices(a)?;
        let ib = self.var_indices(b)?;
        let ig = self.var_indices(given)?;
        self.disjoint(&ia, &ib)?;
        self.disjoint(&ia, &ig)?;
        self.disjoint(&ib, &ig)?;
        if ig.is_empty() {
            return self.mutual_information(a, b);
        }
        let v = self.entropy_indices(&Self::union(&ia, &ig))
            + self.entropy_indices(&Self::union(&ib, &ig))
            - self.entropy_indices(&Self::union(&Self::union(&ia, &ib), &ig))
            - self.entropy_indices(&ig);
        Ok(Self::clamp_mi(v))
    }

    /// Parse the line-oriented distribution format:
    /// header `pmf <k> <names...>`, one `<sym_1> ... <sym_k> <TAB> <prob>`
    /// line per atom, `#` comments, omitted atoms at mass zero.  Symbol
    /// order within each variable is order of first appearance.
    pub fn parse(text: &str) -> Result<JointPMF> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty pmf file".into()))?;
        let mut toks = header.split_whitespace();
        if toks.next() != Some("pmf") {
            return Err(Error::Parse("pmf file must start with `pmf <k> <names>`".into()));
        }
        let k: usize = toks
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse("bad variable count in pmf header".into()))?;
        let names: Vec<String> = toks.map(str::to_string).collect();
        if names.len() != k || k == 0 {
            return Err(Error::Parse(format!(
                "pmf header declares {k} variables but names {}",
                names.len()
            )));
        }

        let mut columns: Vec<Vec<String>> = vec![Vec::new(); k];
        let mut rows: Vec<(Vec<String>, f64)> = Vec::new();
        for line in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != k + 1 {
                return Err(Error::Parse(format!("bad atom line `{line}`")));
            }
            let p: f64 = toks[k]
                .parse()
                .map_err(|_| Error::Parse(format!("bad probability `{}`", toks[k])))?;
            let syms: Vec<String> = toks[..k].iter().map(|s| s.to_string()).collect();
            for (c, s) in syms.iter().enumerate() {
                if !columns[c].contains(s) {
                    columns[c].push(s.clone());
                }
            }
            rows.push((syms, p));
        }

        let vars: Vec<Alphabet> = names
            .into_iter()
            .zip(columns)
            .map(|(n, col)| Alphabet::new(n, col))
            .collect::<Result<_>>()?;
        let atoms: Vec<(Vec<usize>, f64)> = rows
            .into_iter()
            .map(|(syms, p)| {
                let idxs = syms
                    .iter()
                    .zip(&vars)
                    .map(|(s, v)| v.index_of(s).expect("symbol was recorded"))
                    .collect();
                (idxs, p)
            })
            .collect();
        JointPMF::from_atoms(vars, &atoms)
    }

    /// Canonical serialization in the same file format `parse` reads.
    /// Positive atoms only, in declaration-order; probabilities use the
    /// shortest round-trip representation so output is byte-stable.
    pub fn to_file_string(&self) -> String {
        let mut out = String::from("pmf ");
        out.push_str(&self.vars.len().to_string());
        for v in &self.vars {
            out.push(' ');
            out.push_str(v.name());
        }
        out.push('\n');
        for (syms, m) in self.atoms() {
            for (i, &s) in syms.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                out.push_str(self.vars[i].symbol(s));
            }
            out.push('\t');
            out.push_str(&format!("{m}"));
            out.push('\n');
        }
        out
    }

    /// Short content digest used to tie derived results back to inputs.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.to_file_string().as_bytes());
        let d = h.finalize();
        d[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}
