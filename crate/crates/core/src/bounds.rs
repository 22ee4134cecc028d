//! Assembly of certified information-complexity lower bounds for independent
//! inputs: `IC >= H(X|Y) + H(Y|X) - sup[H(U|Q) + H(V|Q)]` with `U = (X, Z)`,
//! `V = (Y, Z)`, packaged with protocol upper bounds into reports.

use crate::eq::pair_label;
use crate::error::{Error, Result};
use crate::prob::{Alphabet, Bits, JointPMF};
use crate::wyner::{eq_sup_closed_form, SupKind, SupResult};

/// Tolerance for the independence precondition and internal cross-checks.
const INDEP_TOL: f64 = 1e-9;

/// A total function `Z = f(X, Y)` over declared alphabets.
#[derive(Debug, Clone)]
pub struct FunctionSpec {
    name: String,
    x_alphabet: Alphabet,
    y_alphabet: Alphabet,
    z_alphabet: Alphabet,
    /// x-major table of z symbol indices, defined on all of X x Y.
    table: Vec<usize>,
}

impl FunctionSpec {
    pub fn new(
        name: impl Into<String>,
        x_alphabet: Alphabet,
        y_alphabet: Alphabet,
        z_alphabet: Alphabet,
        table: Vec<usize>,
    ) -> Result<Self> {
        if table.len() != x_alphabet.len() * y_alphabet.len() {
            return Err(Error::Parse(format!(
                "function table has {} entries, expected {}",
                table.len(),
                x_alphabet.len() * y_alphabet.len()
            )));
        }
        if let Some(&bad) = table.iter().find(|&&z| z >= z_alphabet.len()) {
            return Err(Error::Parse(format!("table entry {bad} out of z range")));
        }
        Ok(FunctionSpec {
            name: name.into(),
            x_alphabet,
            y_alphabet,
            z_alphabet,
            table,
        })
    }

    /// The k-ary equality function on `{1..k}` with outputs `0` / `1`.
    pub fn eq(k: usize) -> FunctionSpec {
        let x = Alphabet::numbered("X", k);
        let y = Alphabet::numbered("Y", k);
        let z = Alphabet::new("Z", vec!["0".into(), "1".into()]).unwrap();
        let mut table = vec![0usize; k * k];
        for i in 0..k {
            table[i * k + i] = 1;
        }
        FunctionSpec::new(format!("eq{k}"), x, y, z, table).unwrap()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn x_alphabet(&self) -> &Alphabet {
        &self.x_alphabet
    }

    pub fn y_alphabet(&self) -> &Alphabet {
        &self.y_alphabet
    }

    pub fn z_alphabet(&self) -> &Alphabet {
        &self.z_alphabet
    }

    pub fn value(&self, x: usize, y: usize) -> usize {
        self.table[x * self.y_alphabet.len() + y]
    }

    /// Parse the function file format: header `fn <name>`, one
    /// `<x> <y> <TAB> <z>` line per input pair, `#` comments.  Alphabets are
    /// inferred in order of first appearance; the table must be total.
    pub fn parse(text: &str) -> Result<FunctionSpec> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty function file".into()))?;
        let name = header
            .strip_prefix("fn ")
            .map(str::trim)
            .filter(|n| !n.is_empty())
            .ok_or_else(|| Error::Parse("function file must start with `fn <name>`".into()))?;

        let mut xs: Vec<String> = Vec::new();
        let mut ys: Vec<String> = Vec::new();
        let mut zs: Vec<String> = Vec::new();
        let mut entries: Vec<(String, String, String)> = Vec::new();
        for line in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(Error::Parse(format!("bad function line `{line}`")));
            }
            for (col, tok) in [(&mut xs, toks[0]), (&mut ys, toks[1]), (&mut zs, toks[2])] {
                if !col.iter().any(|s| s == tok) {
                    col.push(tok.to_string());
                }
            }
            entries.push((toks[0].into(), toks[1].into(), toks[2].into()));
        }
        let x_alphabet = Alphabet::new("X", xs)?;
        let y_alphabet = Alphabet::new("Y", ys)?;
        let z_alphabet = Alphabet::new("Z", zs)?;

        let mut table = vec![usize::MAX; x_alphabet.len() * y_alphabet.len()];
        for (x, y, z) in &entries {
            let xi = x_alphabet.index_of(x).unwrap();
            let yi = y_alphabet.index_of(y).unwrap();
            let zi = z_alphabet.index_of(z).unwrap();
            let cell = &mut table[xi * y_alphabet.len() + yi];
            if *cell != usize::MAX {
                return Err(Error::Parse(format!("duplicate entry for ({x}, {y})")));
            }
            *cell = zi;
        }
        if table.contains(&usize::MAX) {
            return Err(Error::Parse(
                "function table is not total over X x Y".into(),
            ));
        }
        FunctionSpec::new(name, x_alphabet, y_alphabet, z_alphabet, table)
    }

    pub fn to_file_string(&self) -> String {
        let mut out = format!("fn {}\n", self.name);
        for x in 0..self.x_alphabet.len() {
            for y in 0..self.y_alphabet.len() {
                out.push_str(&format!(
                    "{} {}\t{}\n",
                    self.x_alphabet.symbol(x),
                    self.y_alphabet.symbol(y),
                    self.z_alphabet.symbol(self.value(x, y))
                ));
            }
        }
        out
    }
}

fn check_alphabets_match(pmf_xy: &JointPMF, f: &FunctionSpec) -> Result<()> {
    if pmf_xy.num_vars() != 2 {
        return Err(Error::WrongArity(pmf_xy.num_vars()));
    }
    if pmf_xy.var(0).symbols() != f.x_alphabet.symbols()
        || pmf_xy.var(1).symbols() != f.y_alphabet.symbols()
    {
        return Err(Error::InconsistentInputs(
            "function alphabets do not match the input distribution".into(),
        ));
    }
    Ok(())
}

/// Extend a bivariate input pmf to the joint over `(X, Y, Z)` with
/// `Z = f(X, Y)` attached deterministically.
pub fn joint_with_function(pmf_xy: &JointPMF, f: &FunctionSpec) -> Result<JointPMF> {
    check_alphabets_match(pmf_xy, f)?;
    let x = pmf_xy.var(0).clone();
    let y = pmf_xy.var(1).clone();
    if x.name() == "Z" || y.name() == "Z" {
        return Err(Error::InconsistentInputs(
            "input variables may not be named Z".into(),
        ));
    }
    let z = f.z_alphabet.clone();
    let atoms: Vec<(Vec<usize>, f64)> = pmf_xy
        .atoms()
        .map(|(syms, m)| (vec![syms[0], syms[1], f.value(syms[0], syms[1])], m))
        .collect();
    JointPMF::from_atoms(vec![x, y, z], &atoms)
}

/// Lift to `U = (X, Z)`, `V = (Y, Z)`:
/// `p(u, v) = p(x, y)` at `u = (x, f(x,y))`, `v = (y, f(x,y))`.  Composite
/// symbols are `"x,z"` pairs; only positive-mass composites enter the
/// alphabets, in (input, z) declaration order.
pub fn lift_to_uv(pmf_xy: &JointPMF, f: &FunctionSpec) -> Result<JointPMF> {
    check_alphabets_match(pmf_xy, f)?;
    let nx = f.x_alphabet.len();
    let ny = f.y_alphabet.len();
    let nz = f.z_alphabet.len();
    let mut u_mass = vec![0.0; nx * nz];
    let mut v_mass = vec![0.0; ny * nz];
    for (syms, m) in pmf_xy.atoms() {
        let z = f.value(syms[0], syms[1]);
        u_mass[syms[0] * nz + z] += m;
        v_mass[syms[1] * nz + z] += m;
    }
    let mut u_symbols = Vec::new();
    let mut u_index = vec![usize::MAX; nx * nz];
    for x in 0..nx {
        for z in 0..nz {
            if u_mass[x * nz + z] > 0.0 {
                u_index[x * nz + z] = u_symbols.len();
                u_symbols.push(pair_label(f.x_alphabet.symbol(x), f.z_alphabet.symbol(z)));
            }
        }
    }
    let mut v_symbols = Vec::new();
    let mut v_index = vec![usize::MAX; ny * nz];
    for y in 0..ny {
        for z in 0..nz {
            if v_mass[y * nz + z] > 0.0 {
                v_index[y * nz + z] = v_symbols.len();
                v_symbols.push(pair_label(f.y_alphabet.symbol(y), f.z_alphabet.symbol(z)));
            }
        }
    }
    let u = Alphabet::new("U", u_symbols)?;
    let v = Alphabet::new("V", v_symbols)?;
    let atoms: Vec<(Vec<usize>, f64)> = pmf_xy
        .atoms()
        .map(|(syms, m)| {
            let z = f.value(syms[0], syms[1]);
            (
                vec![u_index[syms[0] * nz + z], v_index[syms[1] * nz + z]],
                m,
            )
        })
        .collect();
    JointPMF::from_atoms(vec![u, v], &atoms)
}

/// How a report's lower bound was certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundRoute {
    ClosedFormEq,
    Relaxation,
    SearchWitnessed,
}

impl BoundRoute {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundRoute::ClosedFormEq => "closed_form_eq",
            BoundRoute::Relaxation => "relaxation",
            BoundRoute::SearchWitnessed => "search_witnessed",
        }
    }
}

/// Where a report came from, so every emitted number is reproducible.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub input_digest: String,
    pub seed: Option<u64>,
    pub sup_kind: SupKind,
}

/// A certified lower bound, the sup bracket behind it, and (optionally) a
/// protocol upper bound with the resulting gap.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub ic_lower: Bits,
    pub route: BoundRoute,
    pub sup_upper: Bits,
    pub sup_achieved: Option<Bits>,
    pub ic_upper: Option<Bits>,
    pub gap: Option<Bits>,
    pub provenance: Provenance,
}

/// Assemble the lower bound `H(X|Y) + H(Y|X) - sup.value` for independent
/// inputs.  The sup must certify an upper bound (relaxation or exact); when
/// exact, the assembly is cross-checked against the tension form
/// `T_Wyn(U;V) + I(X;Z|Y) + I(Y;Z|X)`.
pub fn ic_lower_bound(pmf_xy: &JointPMF, f: &FunctionSpec, sup: &SupResult) -> Result<BoundReport> {
    check_alphabets_match(pmf_xy, f)?;
    let xn = pmf_xy.var(0).name().to_string();
    let yn = pmf_xy.var(1).name().to_string();
    let ixy = pmf_xy.mutual_information(&[&xn], &[&yn])?;
    if ixy > INDEP_TOL {
        return Err(Error::DependentInputs(ixy));
    }
    if sup.kind == SupKind::AchievedLower {
        return Err(Error::UncertifiedSup);
    }
    let lifted = lift_to_uv(pmf_xy, f)?;
    if sup.input_digest != lifted.digest() {
        return Err(Error::InconsistentInputs(
            "sup result was not computed from the lifted (U, V) distribution".into(),
        ));
    }

    let h_xy = pmf_xy.conditional_entropy(&[&xn], &[&yn])?;
    let h_yx = pmf_xy.conditional_entropy(&[&yn], &[&xn])?;
    let ic_lower = h_xy + h_yx - sup.value;

    if sup.kind == SupKind::Exact {
        // Same bound through the tension route; an exact identity given the
        // shared sup value, so any disagreement is a bug.
        let h_uv = lifted.conditional_entropy(&["U"], &["V"])?;
        let h_vu = lifted.conditional_entropy(&["V"], &["U"])?;
        let tension = h_uv + h_vu - sup.value;
        let xyz = joint_with_function(pmf_xy, f)?;
        let alt = tension
            + xyz.conditional_mutual_information(&[&xn], &["Z"], &[&yn])?
            + xyz.conditional_mutual_information(&[&yn], &["Z"], &[&xn])?;
        if (ic_lower - alt).abs() > INDEP_TOL {
            return Err(Error::InconsistentInputs(format!(
                "bound forms disagree: {ic_lower} vs {alt}"
            )));
        }
    }

    Ok(BoundReport {
        ic_lower,
        route: BoundRoute::Relaxation,
        sup_upper: sup.value,
        sup_achieved: None,
        ic_upper: None,
        gap: None,
        provenance: Provenance {
            input_digest: lifted.digest(),
            seed: None,
            sup_kind: sup.kind,
        },
    })
}

/// Closed-form report for uniform k-ary EQ:
/// even k: `2 + (2/k) log2(k/2)`; odd k: `2 log2 k - (1 - 1/k) log2((k^2-1)/4)`.
pub fn ic_lower_bound_eq(k: u64) -> Result<BoundReport> {
    let sup = eq_sup_closed_form(k)?;
    let kf = k as f64;
    let ic_lower = if k % 2 == 0 {
        2.0 + (2.0 / kf) * (kf / 2.0).log2()
    } else {
        2.0 * kf.log2() - (1.0 - 1.0 / kf) * ((kf - 1.0) * (kf + 1.0) / 4.0).log2()
    };
    Ok(BoundReport {
        ic_lower,
        route: BoundRoute::ClosedFormEq,
        sup_upper: sup,
        sup_achieved: Some(sup),
        ic_upper: None,
        gap: None,
        provenance: Provenance {
            input_digest: format!("eq{k}"),
            seed: None,
            sup_kind: SupKind::Exact,
        },
    })
}

/// Record the achieved sup value of a search witness alongside the certified
/// bound.
pub fn with_achieved(mut report: BoundReport, achieved: Bits) -> BoundReport {
    report.sup_achieved = Some(achieved);
    report.route = BoundRoute::SearchWitnessed;
    report
}

/// Pair a lower-bound report with a protocol's information cost.
pub fn attach_upper_bound(mut report: BoundReport, cost: Bits) -> Result<BoundReport> {
    let gap = cost - report.ic_lower;
    if gap < -INDEP_TOL {
        return Err(Error::BoundOrderViolation {
            lower: report.ic_lower,
            upper: cost,
        });
    }
    report.ic_upper = Some(cost);
    report.gap = Some(gap);
    Ok(report)
}
