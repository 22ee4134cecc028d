//! The supremum of `H(U|Q) + H(V|Q)` over auxiliaries `Q` with `U - Q - V`,
//! bracketed from above by a certified per-edge relaxation and from below by
//! a feasible achievability search, with a small brute-force oracle and exact
//! closed forms for the k-ary equality family.  Wyner tension follows as
//! `H(U|V) + H(V|U) - sup`.
//!
//! Restricting `Q` to at most one symbol per maximal-biclique class is what
//! makes the problem finite: merging two symbols of the same class never
//! decreases the objective (log-sum inequality), so the class-restricted
//! relaxation upper-bounds the true supremum, while any Markov-feasible
//! class-restricted assignment is a genuine achiever.

use crate::eq;
use crate::error::{Error, Result};
use crate::graph::{CharGraph, ClassDecomposition};
use crate::prob::{Alphabet, Bits, JointPMF};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Residual below which an assignment counts as exactly feasible.
pub const RESIDUAL_STRICT: f64 = 1e-9;
/// Residual below which an assignment is accepted as feasible at all.
pub const RESIDUAL_RELAXED: f64 = 1e-6;

const TINY: f64 = 1e-300;
const GRAD_CLAMP: f64 = 64.0;

/// log2(a/b) with both-zero treated as 0 and single zeros clamped.
fn ratio_log2(a: f64, b: f64) -> f64 {
    if a <= TINY && b <= TINY {
        0.0
    } else if b <= TINY {
        GRAD_CLAMP
    } else if a <= TINY {
        -GRAD_CLAMP
    } else {
        (a / b).log2().clamp(-GRAD_CLAMP, GRAD_CLAMP)
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Restart seeds are derived from the master seed so results do not depend
/// on how restarts are scheduled.
fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ index.wrapping_mul(0xD1B54A32D192ED03))
}

/// Euclidean projection onto the simplex `{x >= 0, sum x = total}`.
fn project_simplex(x: &mut [f64], total: f64) {
    let n = x.len();
    if n == 0 {
        return;
    }
    if n == 1 {
        x[0] = total;
        return;
    }
    let mut u = x.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - total) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    for xi in x.iter_mut() {
        *xi = (*xi - theta).max(0.0);
    }
}

/// One auxiliary symbol: a class id plus masses for that class's edges, in
/// the decomposition's per-class edge order.
#[derive(Debug, Clone)]
pub struct QSymbol {
    pub class: usize,
    pub mass: Vec<f64>,
}

/// A class-restricted auxiliary variable: `p(Q = q, U = u, V = v)` supported
/// inside each symbol's biclique.  Multiple symbols may carry the same class
/// (that is what `merge_same_class` collapses).
#[derive(Debug, Clone)]
pub struct QAssignment {
    dec: Arc<ClassDecomposition>,
    symbols: Vec<QSymbol>,
}

/// Feasibility residuals of a `QAssignment`.
#[derive(Debug, Clone, Copy)]
pub struct ResidualReport {
    /// max over edges of |assigned mass - target mass|
    pub max_marginal: f64,
    /// max over positive-weight symbols of I(U;V | Q = q)
    pub max_markov: f64,
    /// |total assigned mass - 1|
    pub total_mass_error: f64,
}

impl ResidualReport {
    pub fn strict_ok(&self) -> bool {
        self.max_marginal <= RESIDUAL_STRICT && self.max_markov <= RESIDUAL_STRICT
    }

    pub fn relaxed_ok(&self) -> bool {
        self.max_marginal <= RESIDUAL_RELAXED && self.max_markov <= RESIDUAL_RELAXED
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupKind {
    /// A provable upper bound on the supremum.
    CertifiedUpper,
    /// The value of a feasible (within residuals) assignment.
    AchievedLower,
    /// Both at once, up to the reported residuals.
    Exact,
}

impl SupKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SupKind::CertifiedUpper => "certified_upper",
            SupKind::AchievedLower => "achieved_lower",
            SupKind::Exact => "exact",
        }
    }
}

/// Outcome of a sup computation.
#[derive(Debug, Clone)]
pub struct SupResult {
    pub value: Bits,
    pub kind: SupKind,
    pub witness: Option<QAssignment>,
    pub marginal_residual: f64,
    pub markov_residual: f64,
    /// Set when the search budget ran out before reaching relaxed
    /// feasibility; the value is best-so-far.
    pub budget_exhausted: bool,
    /// Digest of the pmf this result was computed from.
    pub input_digest: String,
}

/// Penalty-ascent configuration for `achievability_search`.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub seed: u64,
    pub restarts: u32,
    pub iters_per_stage: u32,
    pub step: f64,
    pub lambdas: Vec<f64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            seed: 1,
            restarts: 32,
            iters_per_stage: 500,
            step: 0.05,
            lambdas: vec![1.0, 4.0, 16.0, 64.0, 256.0],
        }
    }
}

/// Guards and budgets for the brute-force oracle.
#[derive(Debug, Clone)]
pub struct OracleConfig {
    pub seed: u64,
    /// max |left| * |right| per connected component
    pub max_cells: usize,
    /// max classes per connected component
    pub max_classes: usize,
    pub starts: u32,
    pub iters_per_stage: u32,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            seed: 1,
            max_cells: 9,
            max_classes: 6,
            starts: 16,
            iters_per_stage: 300,
        }
    }
}

impl QAssignment {
    /// All-zero assignment with one symbol per class.
    pub fn zero(dec: Arc<ClassDecomposition>) -> QAssignment {
        let symbols = (0..dec.num_classes())
            .map(|c| QSymbol {
                class: c,
                mass: vec![0.0; dec.class_edges(c).len()],
            })
            .collect();
        QAssignment { dec, symbols }
    }

    /// One symbol per class with the given per-class edge masses.
    pub fn from_class_masses(dec: Arc<ClassDecomposition>, masses: Vec<Vec<f64>>) -> QAssignment {
        debug_assert_eq!(masses.len(), dec.num_classes());
        let symbols = masses
            .into_iter()
            .enumerate()
            .map(|(class, mass)| {
                debug_assert_eq!(mass.len(), dec.class_edges(class).len());
                QSymbol { class, mass }
            })
            .collect();
        QAssignment { dec, symbols }
    }

    /// Build from per-edge splits: `theta[e][j]` is the fraction of edge
    /// `e`'s mass assigned to `membership(e)[j]`.  Marginal feasibility holds
    /// by construction.
    pub fn from_splits(dec: Arc<ClassDecomposition>, theta: &[Vec<f64>]) -> QAssignment {
        let mut q = QAssignment::zero(dec);
        let edge_mass = q.dec.graph().edge_mass().to_vec();
        for (e, split) in theta.iter().enumerate() {
            for (j, &t) in split.iter().enumerate() {
                let class = q.dec.membership(e)[j];
                let slot = q.dec.class_edges(class).iter().position(|&x| x == e).unwrap();
                q.symbols[class].mass[slot] += edge_mass[e] * t;
            }
        }
        q
    }

    pub fn decomposition(&self) -> &Arc<ClassDecomposition> {
        &self.dec
    }

    pub fn symbols(&self) -> &[QSymbol] {
        &self.symbols
    }

    pub fn symbols_mut(&mut self) -> &mut Vec<QSymbol> {
        &mut self.symbols
    }

    pub fn symbol_weight(&self, i: usize) -> f64 {
        self.symbols[i].mass.iter().sum()
    }

    /// Row and column marginals of symbol `i`, aligned with its class's
    /// `left_set` / `right_set`.
    fn side_marginals(&self, i: usize) -> (Vec<f64>, Vec<f64>) {
        let sym = &self.symbols[i];
        let class = &self.dec.classes()[sym.class];
        let mut rows = vec![0.0; class.left_set.len()];
        let mut cols = vec![0.0; class.right_set.len()];
        for (slot, &e) in self.dec.class_edges(sym.class).iter().enumerate() {
            let (u, v) = self.dec.graph().edges()[e];
            let ui = class.left_set.binary_search(&u).unwrap();
            let vi = class.right_set.binary_search(&v).unwrap();
            rows[ui] += sym.mass[slot];
            cols[vi] += sym.mass[slot];
        }
        (rows, cols)
    }

    /// Contribution of symbol `i` to `H(U|Q) + H(V|Q)`:
    /// `sum_u r_u log2(w/r_u) + sum_v c_v log2(w/c_v)`.
    pub fn symbol_objective(&self, i: usize) -> Bits {
        let w = self.symbol_weight(i);
        if w <= TINY {
            return 0.0;
        }
        let (rows, cols) = self.side_marginals(i);
        let mut h = 0.0;
        for &r in rows.iter().chain(cols.iter()) {
            if r > 0.0 {
                h += r * (w / r).log2();
            }
        }
        h
    }

    /// `I(U; V | Q = q_i)` of symbol `i`'s conditional; 0 for zero weight.
    pub fn symbol_cmi(&self, i: usize) -> Bits {
        let w = self.symbol_weight(i);
        if w <= TINY {
            return 0.0;
        }
        let (rows, cols) = self.side_marginals(i);
        let sym = &self.symbols[i];
        let class = &self.dec.classes()[sym.class];
        let mut acc = 0.0;
        for (slot, &e) in self.dec.class_edges(sym.class).iter().enumerate() {
            let m = sym.mass[slot];
            if m <= 0.0 {
                continue;
            }
            let (u, v) = self.dec.graph().edges()[e];
            let r = rows[class.left_set.binary_search(&u).unwrap()];
            let c = cols[class.right_set.binary_search(&v).unwrap()];
            acc += m * (m * w / (r * c)).log2();
        }
        (acc / w).max(0.0)
    }

    fn per_edge_assigned(&self) -> Vec<f64> {
        let mut assigned = vec![0.0; self.dec.graph().num_edges()];
        for sym in &self.symbols {
            for (slot, &e) in self.dec.class_edges(sym.class).iter().enumerate() {
                assigned[e] += sym.mass[slot];
            }
        }
        assigned
    }

    /// Residuals against the decomposition's own edge masses.
    pub fn residuals(&self) -> ResidualReport {
        let assigned = self.per_edge_assigned();
        let max_marginal = assigned
            .iter()
            .zip(self.dec.graph().edge_mass())
            .map(|(a, p)| (a - p).abs())
            .fold(0.0, f64::max);
        let max_markov = (0..self.symbols.len())
            .map(|i| self.symbol_cmi(i))
            .fold(0.0, f64::max);
        let total: f64 = assigned.iter().sum();
        ResidualReport {
            max_marginal,
            max_markov,
            total_mass_error: (total - 1.0).abs(),
        }
    }

    /// Residuals against an explicit pmf: edges missing from the pmf count
    /// with their full assigned mass, pmf atoms outside the decomposition's
    /// graph count with their full target mass.
    pub fn verify(&self, pmf: &JointPMF) -> Result<ResidualReport> {
        if pmf.num_vars() != 2 {
            return Err(Error::WrongArity(pmf.num_vars()));
        }
        let graph = self.dec.graph();
        let mut target = vec![0.0; graph.num_edges()];
        let mut max_marginal: f64 = 0.0;
        for (syms, m) in pmf.atoms() {
            let u_label = pmf.var(0).symbol(syms[0]);
            let v_label = pmf.var(1).symbol(syms[1]);
            let e = graph
                .left()
                .index_of(u_label)
                .zip(graph.right().index_of(v_label))
                .and_then(|(u, v)| graph.edge_index(u, v));
            match e {
                Some(e) => target[e] += m,
                None => max_marginal = max_marginal.max(m),
            }
        }
        let assigned = self.per_edge_assigned();
        for (a, t) in assigned.iter().zip(&target) {
            max_marginal = max_marginal.max((a - t).abs());
        }
        let max_markov = (0..self.symbols.len())
            .map(|i| self.symbol_cmi(i))
            .fold(0.0, f64::max);
        let total: f64 = assigned.iter().sum();
        Ok(ResidualReport {
            max_marginal,
            max_markov,
            total_mass_error: (total - 1.0).abs(),
        })
    }

    /// Exact `H(U|Q) + H(V|Q)` of a marginal-feasible assignment.
    pub fn objective(&self) -> Result<Bits> {
        let res = self.residuals();
        if res.max_marginal > RESIDUAL_RELAXED {
            return Err(Error::InfeasibleAssignment(res.max_marginal));
        }
        Ok((0..self.symbols.len())
            .map(|i| self.symbol_objective(i))
            .sum())
    }

    /// Merge two symbols carrying the same class by summing their edge
    /// masses.  By the log-sum inequality the objective never decreases.
    pub fn merge_same_class(&self, i: usize, j: usize) -> Result<QAssignment> {
        if i == j || i >= self.symbols.len() || j >= self.symbols.len() {
            return Err(Error::InconsistentInputs(format!(
                "bad symbol indices {i}, {j}"
            )));
        }
        let (ci, cj) = (self.symbols[i].class, self.symbols[j].class);
        if ci != cj {
            return Err(Error::ClassMismatch(ci, cj));
        }
        let mut merged = self.clone();
        let mass_j = merged.symbols[j].mass.clone();
        for (slot, m) in mass_j.into_iter().enumerate() {
            merged.symbols[i].mass[slot] += m;
        }
        merged.symbols.remove(j);
        Ok(merged)
    }

    /// The joint `p(Q, U, V)` as a pmf; symbols are labeled `q0, q1, ...` in
    /// assignment order.
    pub fn to_pmf(&self) -> JointPMF {
        let q_alphabet = Alphabet::new(
            "Q",
            (0..self.symbols.len()).map(|i| format!("q{i}")).collect(),
        )
        .expect("generated labels are unique");
        let graph = self.dec.graph();
        let mut atoms = Vec::new();
        for (qi, sym) in self.symbols.iter().enumerate() {
            for (slot, &e) in self.dec.class_edges(sym.class).iter().enumerate() {
                if sym.mass[slot] > 0.0 {
                    let (u, v) = graph.edges()[e];
                    atoms.push((vec![qi, u, v], sym.mass[slot]));
                }
            }
        }
        JointPMF::from_atoms(
            vec![q_alphabet, graph.left().clone(), graph.right().clone()],
            &atoms,
        )
        .expect("assignment atoms form a pmf")
    }
}

/// Check that a decomposition was built from this pmf (same alphabets, same
/// positive support, same masses).
fn check_dec_matches(pmf: &JointPMF, dec: &ClassDecomposition) -> Result<()> {
    let graph = CharGraph::build(pmf)?;
    let g = dec.graph();
    if graph.left() != g.left() || graph.right() != g.right() || graph.edges() != g.edges() {
        return Err(Error::InconsistentInputs(
            "decomposition was not built from this pmf".into(),
        ));
    }
    for (a, b) in graph.edge_mass().iter().zip(g.edge_mass()) {
        if (a - b).abs() > 1e-12 {
            return Err(Error::InconsistentInputs(
                "decomposition edge masses disagree with the pmf".into(),
            ));
        }
    }
    Ok(())
}

/// Certified upper bound on the supremum: each edge pays its mass times the
/// largest `log2|left| + log2|right|` over the classes containing it.  The
/// per-edge linear program separates, so the greedy per-edge argmax is the
/// exact optimum of the class-cap relaxation; ties break to the lowest class
/// index (which cannot change the value).
pub fn relaxed_sup_upper_bound(pmf: &JointPMF, dec: &ClassDecomposition) -> Result<SupResult> {
    check_dec_matches(pmf, dec)?;
    let caps: Vec<f64> = (0..dec.num_classes()).map(|c| dec.class_cap(c)).collect();
    let mut bound = 0.0;
    for (e, &p) in dec.graph().edge_mass().iter().enumerate() {
        let best = dec
            .membership(e)
            .iter()
            .map(|&c| caps[c])
            .fold(f64::NEG_INFINITY, f64::max);
        bound += p * best;
    }
    Ok(SupResult {
        value: bound,
        kind: SupKind::CertifiedUpper,
        witness: None,
        marginal_residual: 0.0,
        markov_residual: 0.0,
        budget_exhausted: false,
        input_digest: pmf.digest(),
    })
}

/// Replace every positive-weight symbol's conditional by the product of its
/// side marginals, then rescale the listed edges so marginals match again.
/// The product step zeroes each symbol's conditional dependence; the rescale
/// restores feasibility at the cost of a (reported) Markov residual.
fn product_polish(dec: &ClassDecomposition, masses: &mut [Vec<f64>], edge_ids: &[usize]) {
    for (class, mass) in masses.iter_mut().enumerate() {
        let w: f64 = mass.iter().sum();
        if w <= TINY {
            continue;
        }
        let cls = &dec.classes()[class];
        let mut rows = vec![0.0; cls.left_set.len()];
        let mut cols = vec![0.0; cls.right_set.len()];
        for (slot, &e) in dec.class_edges(class).iter().enumerate() {
            let (u, v) = dec.graph().edges()[e];
            rows[cls.left_set.binary_search(&u).unwrap()] += mass[slot];
            cols[cls.right_set.binary_search(&v).unwrap()] += mass[slot];
        }
        for (slot, &e) in dec.class_edges(class).iter().enumerate() {
            let (u, v) = dec.graph().edges()[e];
            let r = rows[cls.left_set.binary_search(&u).unwrap()];
            let c = cols[cls.right_set.binary_search(&v).unwrap()];
            mass[slot] = r * c / w;
        }
    }
    // one round of edge-proportional correction on the listed edges
    let mut assigned = vec![0.0; dec.graph().num_edges()];
    for (class, mass) in masses.iter().enumerate() {
        for (slot, &e) in dec.class_edges(class).iter().enumerate() {
            assigned[e] += mass[slot];
        }
    }
    let target = dec.graph().edge_mass();
    for &e in edge_ids {
        for &class in dec.membership(e) {
            let slot = dec.class_edges(class).iter().position(|&x| x == e).unwrap();
            if assigned[e] > TINY {
                masses[class][slot] *= target[e] / assigned[e];
            } else if dec.membership(e)[0] == class {
                // an uncovered positive edge goes wholly to its lowest class
                masses[class][slot] = target[e];
            } else {
                masses[class][slot] = 0.0;
            }
        }
    }
}

fn class_masses_of_splits(dec: &ClassDecomposition, theta: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut masses: Vec<Vec<f64>> = (0..dec.num_classes())
        .map(|c| vec![0.0; dec.class_edges(c).len()])
        .collect();
    let edge_mass = dec.graph().edge_mass();
    for (e, split) in theta.iter().enumerate() {
        for (j, &t) in split.iter().enumerate() {
            let class = dec.membership(e)[j];
            let slot = dec.class_edges(class).iter().position(|&x| x == e).unwrap();
            masses[class][slot] += edge_mass[e] * t;
        }
    }
    masses
}

/// Aggregates for the split-space gradient: per-class weight and side
/// marginals, indexed like the decomposition's classes.
struct Aggregates {
    weight: Vec<f64>,
    rows: Vec<Vec<f64>>,
    cols: Vec<Vec<f64>>,
}

fn aggregates(dec: &ClassDecomposition, masses: &[Vec<f64>]) -> Aggregates {
    let mut weight = vec![0.0; dec.num_classes()];
    let mut rows: Vec<Vec<f64>> = dec
        .classes()
        .iter()
        .map(|c| vec![0.0; c.left_set.len()])
        .collect();
    let mut cols: Vec<Vec<f64>> = dec
        .classes()
        .iter()
        .map(|c| vec![0.0; c.right_set.len()])
        .collect();
    for (class, mass) in masses.iter().enumerate() {
        let cls = &dec.classes()[class];
        for (slot, &e) in dec.class_edges(class).iter().enumerate() {
            let m = mass[slot];
            weight[class] += m;
            let (u, v) = dec.graph().edges()[e];
            rows[class][cls.left_set.binary_search(&u).unwrap()] += m;
            cols[class][cls.right_set.binary_search(&v).unwrap()] += m;
        }
    }
    Aggregates { weight, rows, cols }
}

fn splits_objective(dec: &ClassDecomposition, masses: &[Vec<f64>]) -> f64 {
    let agg = aggregates(dec, masses);
    let mut total = 0.0;
    for class in 0..dec.num_classes() {
        let w = agg.weight[class];
        if w <= TINY {
            continue;
        }
        for &r in agg.rows[class].iter().chain(agg.cols[class].iter()) {
            if r > 0.0 {
                total += r * (w / r).log2();
            }
        }
    }
    total
}

/// Penalty-based projected ascent over per-edge conditionals
/// `p(q | u, v)`: marginals hold by construction, the Markov constraint is
/// driven down by an increasing penalty, and a final product polish projects
/// onto (near-)feasibility.  Deterministic given the seed.
pub fn achievability_search(
    pmf: &JointPMF,
    dec: &Arc<ClassDecomposition>,
    cfg: &SearchConfig,
) -> Result<SupResult> {
    check_dec_matches(pmf, dec)?;
    let ne = dec.graph().num_edges();
    let edge_mass = dec.graph().edge_mass().to_vec();
    let caps: Vec<f64> = (0..dec.num_classes()).map(|c| dec.class_cap(c)).collect();

    let mut best: Option<(f64, QAssignment, ResidualReport)> = None;
    for restart in 0..cfg.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, restart as u64));
        let mut theta: Vec<Vec<f64>> = (0..ne)
            .map(|e| {
                let deg = dec.membership(e).len();
                match restart {
                    // uniform over every containing class
                    0 => vec![1.0 / deg as f64; deg],
                    // uniform over the classes of maximal cap
                    1 => {
                        let best_cap = dec
                            .membership(e)
                            .iter()
                            .map(|&c| caps[c])
                            .fold(f64::NEG_INFINITY, f64::max);
                        let hits: Vec<bool> = dec
                            .membership(e)
                            .iter()
                            .map(|&c| caps[c] >= best_cap - 1e-12)
                            .collect();
                        let n = hits.iter().filter(|&&h| h).count() as f64;
                        hits.iter().map(|&h| if h { 1.0 / n } else { 0.0 }).collect()
                    }
                    _ => {
                        let mut t: Vec<f64> =
                            (0..deg).map(|_| -rng.gen::<f64>().max(1e-12).ln()).collect();
                        let s: f64 = t.iter().sum();
                        for x in &mut t {
                            *x /= s;
                        }
                        t
                    }
                }
            })
            .collect();

        for &lambda in &cfg.lambdas {
            for _ in 0..cfg.iters_per_stage {
                let masses = class_masses_of_splits(dec, &theta);
                let agg = aggregates(dec, &masses);
                for e in 0..ne {
                    let p = edge_mass[e];
                    if p <= 0.0 {
                        continue;
                    }
                    let (u, v) = dec.graph().edges()[e];
                    let memb = dec.membership(e);
                    for (j, &class) in memb.iter().enumerate() {
                        let cls = &dec.classes()[class];
                        let w = agg.weight[class];
                        let r = agg.rows[class][cls.left_set.binary_search(&u).unwrap()];
                        let c = agg.cols[class][cls.right_set.binary_search(&v).unwrap()];
                        let m = p * theta[e][j];
                        let g = ratio_log2(w, r) + ratio_log2(w, c)
                            - lambda * ratio_log2(m * w, r * c);
                        theta[e][j] += cfg.step * p * g.clamp(-GRAD_CLAMP, GRAD_CLAMP);
                    }
                    project_simplex(&mut theta[e], 1.0);
                }
            }
        }

        let mut masses = class_masses_of_splits(dec, &theta);
        let all_edges: Vec<usize> = (0..ne).collect();
        project_to_manifold(dec, &mut masses, &all_edges, 300);
        manifold_climb(dec, &all_edges, &mut masses, 150, 1e-8);
        let q = QAssignment::from_class_masses(Arc::clone(dec), masses);
        let res = q.residuals();
        let value = q.objective()?;
        let better = match &best {
            None => true,
            Some((bv, _, _)) => value > *bv,
        };
        if better {
            best = Some((value, q, res));
        }
    }

    let (value, witness, res) = best.expect("at least one restart ran");
    Ok(SupResult {
        value,
        kind: SupKind::AchievedLower,
        witness: Some(witness),
        marginal_residual: res.max_marginal,
        markov_residual: res.max_markov,
        budget_exhausted: res.max_markov > RESIDUAL_RELAXED,
        input_digest: pmf.digest(),
    })
}

/// Projected gradient ascent over per-edge splits on the true objective.
/// When every class in play has min side 1 the objective is concave and the
/// Markov constraint is vacuous, so any local maximum is the global one.
fn concave_splits_ascent(
    dec: &ClassDecomposition,
    edge_ids: &[usize],
    starts: u32,
    iters: u32,
    seed: u64,
) -> Vec<Vec<f64>> {
    let edge_mass = dec.graph().edge_mass();
    let mut best: Option<(f64, Vec<Vec<f64>>)> = None;
    for start in 0..starts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1000 + start as u64));
        // theta over the full edge set; untouched edges keep zero splits
        let mut theta: Vec<Vec<f64>> = (0..dec.graph().num_edges())
            .map(|e| vec![0.0; dec.membership(e).len()])
            .collect();
        for &e in edge_ids {
            let deg = dec.membership(e).len();
            theta[e] = if start == 0 {
                vec![1.0 / deg as f64; deg]
            } else {
                let mut t: Vec<f64> = (0..deg).map(|_| -rng.gen::<f64>().max(1e-12).ln()).collect();
                let s: f64 = t.iter().sum();
                for x in &mut t {
                    *x /= s;
                }
                t
            };
        }
        for _ in 0..iters {
            let masses = class_masses_of_splits(dec, &theta);
            let agg = aggregates(dec, &masses);
            for &e in edge_ids {
                let p = edge_mass[e];
                let (u, v) = dec.graph().edges()[e];
                for (j, &class) in dec.membership(e).iter().enumerate() {
                    let cls = &dec.classes()[class];
                    let w = agg.weight[class];
                    let r = agg.rows[class][cls.left_set.binary_search(&u).unwrap()];
                    let c = agg.cols[class][cls.right_set.binary_search(&v).unwrap()];
                    let g = ratio_log2(w, r) + ratio_log2(w, c);
                    theta[e][j] += 0.1 * p * g;
                }
                project_simplex(&mut theta[e], 1.0);
            }
        }
        let masses = class_masses_of_splits(dec, &theta);
        let value = splits_objective(dec, &masses);
        if best.as_ref().map_or(true, |(bv, _)| value > *bv) {
            best = Some((value, theta));
        }
    }
    best.expect("at least one start").1
}

/// Max per-class conditional dependence of a mass table.
fn masses_markov_residual(dec: &ClassDecomposition, masses: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (class, mass) in masses.iter().enumerate() {
        let w: f64 = mass.iter().sum();
        if w <= TINY {
            continue;
        }
        let cls = &dec.classes()[class];
        let mut rows = vec![0.0; cls.left_set.len()];
        let mut cols = vec![0.0; cls.right_set.len()];
        for (slot, &e) in dec.class_edges(class).iter().enumerate() {
            let (u, v) = dec.graph().edges()[e];
            rows[cls.left_set.binary_search(&u).unwrap()] += mass[slot];
            cols[cls.right_set.binary_search(&v).unwrap()] += mass[slot];
        }
        let mut acc = 0.0;
        for (slot, &e) in dec.class_edges(class).iter().enumerate() {
            let m = mass[slot];
            if m <= 0.0 {
                continue;
            }
            let (u, v) = dec.graph().edges()[e];
            let r = rows[cls.left_set.binary_search(&u).unwrap()];
            let c = cols[cls.right_set.binary_search(&v).unwrap()];
            acc += m * (m * w / (r * c)).log2();
        }
        worst = worst.max((acc / w).max(0.0));
    }
    worst
}

/// Alternate the per-class product projection with the per-edge marginal
/// repair until the conditional dependence is gone (or the round budget
/// runs out); on tiny instances this converges linearly to the
/// Markov-feasible manifold when it is reachable.  Returns the final Markov
/// residual.
fn project_to_manifold(
    dec: &ClassDecomposition,
    masses: &mut [Vec<f64>],
    edge_ids: &[usize],
    rounds: usize,
) -> f64 {
    let mut residual = f64::INFINITY;
    for _ in 0..rounds {
        product_polish(dec, masses, edge_ids);
        residual = masses_markov_residual(dec, masses);
        if residual <= 1e-13 {
            break;
        }
    }
    residual
}

/// Deterministic hill climb along the Markov-feasible manifold: take a
/// concave-gradient step in split space, re-project, and keep the move only
/// when it stays feasible and improves the objective.
fn manifold_climb(
    dec: &ClassDecomposition,
    edge_ids: &[usize],
    masses: &mut Vec<Vec<f64>>,
    iters: u32,
    accept_tol: f64,
) {
    let graph = dec.graph();
    let edge_mass = graph.edge_mass();
    let mut obj = splits_objective(dec, masses);
    let mut step = 0.3;
    for _ in 0..iters {
        let agg = aggregates(dec, masses);
        let mut trial_theta: Vec<Vec<f64>> = (0..graph.num_edges())
            .map(|e| vec![0.0; dec.membership(e).len()])
            .collect();
        for &e in edge_ids {
            let p = edge_mass[e];
            let (u, v) = graph.edges()[e];
            for (j, &class) in dec.membership(e).iter().enumerate() {
                let cls = &dec.classes()[class];
                let w = agg.weight[class];
                let r = agg.rows[class][cls.left_set.binary_search(&u).unwrap()];
                let c = agg.cols[class][cls.right_set.binary_search(&v).unwrap()];
                let g = ratio_log2(w, r) + ratio_log2(w, c);
                let slot = dec.class_edges(class).iter().position(|&x| x == e).unwrap();
                trial_theta[e][j] = masses[class][slot] / p.max(TINY) + step * g;
            }
            project_simplex(&mut trial_theta[e], 1.0);
        }
        let mut trial = class_masses_of_splits(dec, &trial_theta);
        // keep the untouched edges exactly as they were
        for (class, mass) in trial.iter_mut().enumerate() {
            for (slot, &e) in dec.class_edges(class).iter().enumerate() {
                if !edge_ids.contains(&e) {
                    mass[slot] = masses[class][slot];
                }
            }
        }
        let feasible = project_to_manifold(dec, &mut trial, edge_ids, 80) <= accept_tol;
        let trial_obj = splits_objective(dec, &trial);
        if feasible && trial_obj > obj + 1e-12 {
            *masses = trial;
            obj = trial_obj;
            step = (step * 1.25).min(0.5);
        } else {
            step *= 0.7;
            if step < 1e-5 {
                break;
            }
        }
    }
}

/// Multi-start ascent along the product manifold for components whose
/// classes can hold genuinely non-product conditionals: random feasible
/// starts are projected onto the manifold, then improved by concave-gradient
/// tangent steps with re-projection and backtracking.
fn product_manifold_ascent(
    dec: &ClassDecomposition,
    edge_ids: &[usize],
    cfg: &OracleConfig,
) -> Vec<Vec<f64>> {
    let graph = dec.graph();
    let caps: Vec<f64> = (0..dec.num_classes()).map(|c| dec.class_cap(c)).collect();

    let mut best: Option<(f64, Vec<Vec<f64>>)> = None;
    let mut fallback: Option<(f64, Vec<Vec<f64>>)> = None;
    for start in 0..cfg.starts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 2000 + start as u64));
        // seed splits: uniform, cap-greedy, then random
        let mut theta: Vec<Vec<f64>> = (0..graph.num_edges())
            .map(|e| vec![0.0; dec.membership(e).len()])
            .collect();
        for &e in edge_ids {
            let memb = dec.membership(e);
            theta[e] = match start {
                0 => vec![1.0 / memb.len() as f64; memb.len()],
                1 => {
                    let best_cap = memb
                        .iter()
                        .map(|&c| caps[c])
                        .fold(f64::NEG_INFINITY, f64::max);
                    let hits: Vec<bool> =
                        memb.iter().map(|&c| caps[c] >= best_cap - 1e-12).collect();
                    let n = hits.iter().filter(|&&h| h).count() as f64;
                    hits.iter().map(|&h| if h { 1.0 / n } else { 0.0 }).collect()
                }
                _ => {
                    let mut t: Vec<f64> = (0..memb.len())
                        .map(|_| -rng.gen::<f64>().max(1e-12).ln())
                        .collect();
                    let s: f64 = t.iter().sum();
                    for x in &mut t {
                        *x /= s;
                    }
                    t
                }
            };
        }
        let mut masses = class_masses_of_splits(dec, &theta);
        let start_residual = project_to_manifold(dec, &mut masses, edge_ids, 2000);
        let start_obj = splits_objective(dec, &masses);
        if fallback.as_ref().map_or(true, |(bv, _)| start_obj > *bv) {
            fallback = Some((start_obj, masses.clone()));
        }
        if start_residual > 1e-8 {
            continue;
        }
        manifold_climb(dec, edge_ids, &mut masses, cfg.iters_per_stage, 1e-8);
        let obj = splits_objective(dec, &masses);
        if best.as_ref().map_or(true, |(bv, _)| obj > *bv) {
            best = Some((obj, masses));
        }
    }
    match best.or(fallback) {
        Some((_, masses)) => masses,
        None => unreachable!("at least one start ran"),
    }
}

/// Independent test oracle for tiny instances: connected components are
/// solved separately; forced components are read off, min-side-1 components
/// are concave in the splits and solved globally, and the rest go through a
/// multi-start product-parametrization ascent.
pub fn brute_force_oracle(pmf: &JointPMF, cfg: &OracleConfig) -> Result<SupResult> {
    let graph = CharGraph::build(pmf)?;
    let dec = Arc::new(graph.maximal_bicliques()?);
    let comps = graph.connected_components();

    let mut masses: Vec<Vec<f64>> = (0..dec.num_classes())
        .map(|c| vec![0.0; dec.class_edges(c).len()])
        .collect();

    for comp in &comps {
        if comp.left.len() * comp.right.len() > cfg.max_cells {
            return Err(Error::TooLargeForOracle(format!(
                "component with {}x{} vertices exceeds {} cells",
                comp.left.len(),
                comp.right.len(),
                cfg.max_cells
            )));
        }
        let class_ids: Vec<usize> = (0..dec.num_classes())
            .filter(|&c| comp.left.contains(&dec.classes()[c].left_set[0]))
            .collect();
        if class_ids.len() > cfg.max_classes {
            return Err(Error::TooLargeForOracle(format!(
                "component with {} classes exceeds {}",
                class_ids.len(),
                cfg.max_classes
            )));
        }

        let forced = comp.edge_ids.iter().all(|&e| dec.membership(e).len() == 1);
        let min_side_one = class_ids
            .iter()
            .all(|&c| dec.classes()[c].min_side() == 1);

        if forced {
            for &e in &comp.edge_ids {
                let class = dec.membership(e)[0];
                let slot = dec.class_edges(class).iter().position(|&x| x == e).unwrap();
                masses[class][slot] = graph.edge_mass()[e];
            }
        } else if min_side_one {
            let theta = concave_splits_ascent(&dec, &comp.edge_ids, 4, 4000, cfg.seed);
            let part = class_masses_of_splits(&dec, &theta);
            for &c in &class_ids {
                masses[c] = part[c].clone();
            }
        } else {
            let part = product_manifold_ascent(&dec, &comp.edge_ids, cfg);
            for &c in &class_ids {
                masses[c] = part[c].clone();
            }
        }
    }

    let q = QAssignment::from_class_masses(Arc::clone(&dec), masses);
    let res = q.residuals();
    let value = q.objective()?;
    Ok(SupResult {
        value,
        kind: SupKind::Exact,
        witness: Some(q),
        marginal_residual: res.max_marginal,
        markov_residual: res.max_markov,
        budget_exhausted: false,
        input_digest: pmf.digest(),
    })
}

/// Closed form of the supremum for uniform k-ary EQ:
/// even k: `2 (1 - 1/k) log2(k/2)`; odd k: `(1 - 1/k) log2((k-1)(k+1)/4)`.
pub fn eq_sup_closed_form(k: u64) -> Result<Bits> {
    if k < 2 {
        return Err(Error::BadK(k));
    }
    let kf = k as f64;
    let v = if k % 2 == 0 {
        2.0 * (1.0 - 1.0 / kf) * (kf / 2.0).log2()
    } else {
        (1.0 - 1.0 / kf) * ((kf - 1.0) * (kf + 1.0) / 4.0).log2()
    };
    Ok(v)
}

/// The optimal class-restricted auxiliary for uniform k-ary EQ: uniform mass
/// on every edge of the balanced crown classes (left size k/2 for even k,
/// (k+1)/2 for odd k), plus the forced diagonal singletons.
pub fn eq_optimal_q(k: u64) -> Result<QAssignment> {
    if k < 2 {
        return Err(Error::BadK(k));
    }
    let pmf = eq::uv_pmf(k as usize);
    let dec = Arc::new(CharGraph::build(&pmf)?.maximal_bicliques()?);
    let target_left = if k % 2 == 0 { k / 2 } else { (k + 1) / 2 };
    let denom_choose = if k % 2 == 0 {
        eq::binom(k - 2, (k - 2) / 2)
    } else {
        eq::binom(k - 2, (k - 1) / 2)
    };
    let edge_p = 1.0 / ((k * k) as f64 * denom_choose as f64);
    let diag_p = 1.0 / (k * k) as f64;

    let mut masses: Vec<Vec<f64>> = (0..dec.num_classes())
        .map(|c| vec![0.0; dec.class_edges(c).len()])
        .collect();
    for (ci, class) in dec.classes().iter().enumerate() {
        let first_left = dec.graph().left().symbol(class.left_set[0]);
        let diagonal = class.num_edges() == 1 && first_left.ends_with(",1");
        if diagonal {
            masses[ci][0] = diag_p;
        } else if class.left_set.len() == target_left as usize {
            for slot in 0..masses[ci].len() {
                masses[ci][slot] = edge_p;
            }
        }
    }
    Ok(QAssignment::from_class_masses(dec, masses))
}

/// `T_Wyn(U;V)` from a sup result: `H(U|V) + H(V|U) - sup`, floored at zero
/// (the tension is non-negative, so the floor is itself a sound bound).
/// With a certified-upper sup this is a certified lower bound on the
/// tension; with an exact sup it is exact.
pub fn wyner_tension(pmf: &JointPMF, sup: &SupResult) -> Result<Bits> {
    if sup.input_digest != pmf.digest() {
        return Err(Error::InconsistentInputs(
            "sup result was computed from a different pmf".into(),
        ));
    }
    let u = pmf.var(0).name().to_string();
    let v = pmf.var(1).name().to_string();
    let h_uv = pmf.conditional_entropy(&[&u], &[&v])?;
    let h_vu = pmf.conditional_entropy(&[&v], &[&u])?;
    Ok((h_uv + h_vu - sup.value).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::h2;

    fn ternary_dec() -> (JointPMF, Arc<ClassDecomposition>) {
        let pmf = eq::uv_pmf(3);
        let dec = Arc::new(CharGraph::build(&pmf).unwrap().maximal_bicliques().unwrap());
        (pmf, dec)
    }

    fn four_dec() -> (JointPMF, Arc<ClassDecomposition>) {
        let pmf = eq::uv_pmf(4);
        let dec = Arc::new(CharGraph::build(&pmf).unwrap().maximal_bicliques().unwrap());
        (pmf, dec)
    }

    /// Ternary assignment that puts each crown edge wholly into one of its
    /// two classes, bijectively, so every active class holds a single edge.
    fn ternary_single_edge_assignment(dec: &Arc<ClassDecomposition>) -> QAssignment {
        let graph = dec.graph();
        let mut masses: Vec<Vec<f64>> = (0..dec.num_classes())
            .map(|c| vec![0.0; dec.class_edges(c).len()])
            .collect();
        for (e, &(u, v)) in graph.edges().iter().enumerate() {
            let lu = graph.left().symbol(u);
            let lv = graph.right().symbol(v);
            let class = if lu.ends_with(",1") {
                dec.membership(e)[0]
            } else {
                // crown edge ("x,0", "y,0"): x != y; route by (x - y) mod 3
                let x: i32 = lu.split(',').next().unwrap().parse().unwrap();
                let y: i32 = lv.split(',').next().unwrap().parse().unwrap();
                let want_left_singleton = (x - y).rem_euclid(3) == 1;
                *dec.membership(e)
                    .iter()
                    .find(|&&c| {
                        let cls = &dec.classes()[c];
                        if want_left_singleton {
                            cls.left_set.len() == 1 && cls.right_set.len() == 2
                        } else {
                            cls.left_set.len() == 2 && cls.right_set.len() == 1
                        }
                    })
                    .unwrap()
            };
            let slot = dec.class_edges(class).iter().position(|&x| x == e).unwrap();
            masses[class][slot] = graph.edge_mass()[e];
        }
        QAssignment::from_class_masses(Arc::clone(dec), masses)
    }

    #[test]
    fn objective_single_edge_per_class_is_zero() {
        let (_, dec) = ternary_dec();
        let q = ternary_single_edge_assignment(&dec);
        assert!(q.residuals().strict_ok());
        assert!(q.objective().unwrap().abs() < 1e-12);
        // each active class holds exactly one positive edge
        for (i, sym) in q.symbols().iter().enumerate() {
            let positive = sym.mass.iter().filter(|&&m| m > 0.0).count();
            assert!(positive <= 1, "symbol {i} has {positive} positive edges");
        }
    }

    #[test]
    fn objective_uniform_split_is_two_thirds() {
        let (_, dec) = ternary_dec();
        let ne = dec.graph().num_edges();
        let theta: Vec<Vec<f64>> = (0..ne)
            .map(|e| {
                let d = dec.membership(e).len();
                vec![1.0 / d as f64; d]
            })
            .collect();
        let q = QAssignment::from_splits(Arc::clone(&dec), &theta);
        let obj = q.objective().unwrap();
        assert!((obj - 2.0 / 3.0).abs() < 1e-12, "objective {obj}");
    }

    #[test]
    fn objective_two_bit_uniform_four_edge_classes() {
        let (_, dec) = four_dec();
        let mut masses: Vec<Vec<f64>> = (0..dec.num_classes())
            .map(|c| vec![0.0; dec.class_edges(c).len()])
            .collect();
        for (ci, class) in dec.classes().iter().enumerate() {
            if class.num_edges() == 4 {
                for slot in 0..4 {
                    masses[ci][slot] = 1.0 / 32.0;
                }
            } else if class.num_edges() == 1
                && dec.graph().left().symbol(class.left_set[0]).ends_with(",1")
            {
                masses[ci][0] = 1.0 / 16.0;
            }
        }
        let q = QAssignment::from_class_masses(Arc::clone(&dec), masses);
        assert!(q.residuals().strict_ok());
        assert!((q.objective().unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn objective_rejects_infeasible() {
        let (_, dec) = ternary_dec();
        let q = QAssignment::zero(Arc::clone(&dec));
        assert!(matches!(
            q.objective(),
            Err(Error::InfeasibleAssignment(_))
        ));
    }

    #[test]
    fn verify_eq_optimal_q4() {
        let q = eq_optimal_q(4).unwrap();
        let pmf = eq::uv_pmf(4);
        let res = q.verify(&pmf).unwrap();
        assert!(res.max_marginal < 1e-12);
        assert!(res.max_markov < 1e-12);
        assert!(res.total_mass_error < 1e-12);
    }

    #[test]
    fn verify_single_edge_in_large_class() {
        // one Z=0 edge alone inside a 2x2 class: Markov residual is exactly
        // zero (a point conditional is a product), marginals are way off.
        let (pmf, dec) = four_dec();
        let class = dec
            .classes()
            .iter()
            .position(|c| c.num_edges() == 4)
            .unwrap();
        let mut masses: Vec<Vec<f64>> = (0..dec.num_classes())
            .map(|c| vec![0.0; dec.class_edges(c).len()])
            .collect();
        masses[class][0] = 1.0 / 16.0;
        let q = QAssignment::from_class_masses(Arc::clone(&dec), masses);
        let res = q.verify(&pmf).unwrap();
        assert_eq!(res.max_markov, 0.0);
        assert!((res.max_marginal - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn verify_flags_dependent_conditional() {
        // (0.3, 0.1 / 0.1, 0.3) in one 2x2 class: I(U;V|q) = 1 - H_2(1/4)
        let (_, dec) = four_dec();
        let class = dec
            .classes()
            .iter()
            .position(|c| c.num_edges() == 4)
            .unwrap();
        let mut masses: Vec<Vec<f64>> = (0..dec.num_classes())
            .map(|c| vec![0.0; dec.class_edges(c).len()])
            .collect();
        // class_edges order is left-major over a 2x2 block: (u0,v0), (u0,v1), (u1,v0), (u1,v1)
        masses[class] = vec![0.3, 0.1, 0.1, 0.3];
        let q = QAssignment::from_class_masses(Arc::clone(&dec), masses);
        let cmi = q.symbol_cmi(class);
        let expected = 1.0 - h2(0.25);
        assert!((cmi - expected).abs() < 1e-12, "cmi {cmi} vs {expected}");
        assert!(cmi > 0.1);
    }

    #[test]
    fn merge_identical_conditionals_keeps_objective() {
        let (_, dec) = ternary_dec();
        let base = ternary_single_edge_assignment(&dec);
        let mut split = base.clone();
        let target = split
            .symbols()
            .iter()
            .position(|s| s.mass.iter().sum::<f64>() > 0.0)
            .unwrap();
        let mut dup = split.symbols()[target].clone();
        for m in &mut dup.mass {
            *m *= 0.5;
        }
        for m in &mut split.symbols_mut()[target].mass {
            *m *= 0.5;
        }
        let dup_index = split.symbols().len();
        split.symbols_mut().push(dup);
        let before = split.objective().unwrap();
        let merged = split.merge_same_class(target, dup_index).unwrap();
        let after = merged.objective().unwrap();
        assert!((before - after).abs() < 1e-12);
    }

    #[test]
    fn merge_opposite_conditionals_strictly_increases() {
        // two symbols of one 1x2 class carrying (m, 0) and (0, m): merging
        // yields the (m/2, m/2) conditional and gains 2m * H_2(1/2) = 2m.
        let (_, dec) = ternary_dec();
        let class = dec
            .classes()
            .iter()
            .position(|c| c.left_set.len() == 1 && c.right_set.len() == 2)
            .unwrap();
        let m = 1.0 / 9.0;
        // the chosen class's two edges sit in two separate symbols
        let e0 = dec.class_edges(class)[0];
        let e1 = dec.class_edges(class)[1];
        let mut masses: Vec<Vec<f64>> = (0..dec.num_classes())
            .map(|c| vec![0.0; dec.class_edges(c).len()])
            .collect();
        for (e, &p) in dec.graph().edge_mass().iter().enumerate() {
            if e == e0 || e == e1 {
                continue;
            }
            // park every other edge in its lowest class
            let c = dec.membership(e)[0];
            let slot = dec.class_edges(c).iter().position(|&x| x == e).unwrap();
            masses[c][slot] = p;
        }
        masses[class][0] = m;
        let mut q = QAssignment::from_class_masses(Arc::clone(&dec), masses);
        let extra = QSymbol {
            class,
            mass: vec![0.0, m],
        };
        let second = q.symbols().len();
        q.symbols_mut().push(extra);
        let before = q.objective().unwrap();
        let merged = q.merge_same_class(class, second).unwrap();
        let after = merged.objective().unwrap();
        assert!((after - before - 2.0 * m).abs() < 1e-12, "gain {}", after - before);
    }

    #[test]
    fn merge_inverts_random_split_of_eq_optimal() {
        let q = eq_optimal_q(4).unwrap();
        let original = q.objective().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let mut split = q.clone();
            let target = rng.gen_range(0..split.symbols().len());
            if split.symbol_weight(target) == 0.0 {
                continue;
            }
            let f: f64 = rng.gen_range(0.05..0.95);
            let mut dup = split.symbols()[target].clone();
            for m in &mut dup.mass {
                *m *= 1.0 - f;
            }
            for m in &mut split.symbols_mut()[target].mass {
                *m *= f;
            }
            let dup_index = split.symbols().len();
            split.symbols_mut().push(dup);
            let merged = split.merge_same_class(target, dup_index).unwrap();
            assert!((merged.objective().unwrap() - original).abs() < 1e-12);
        }
    }

    #[test]
    fn merge_rejects_different_classes() {
        let (_, dec) = ternary_dec();
        let q = ternary_single_edge_assignment(&dec);
        assert!(matches!(
            q.merge_same_class(0, 1),
            Err(Error::ClassMismatch(_, _))
        ));
    }

    #[test]
    fn relax_ternary_eq() {
        let (pmf, dec) = ternary_dec();
        let sup = relaxed_sup_upper_bound(&pmf, &dec).unwrap();
        assert_eq!(sup.kind, SupKind::CertifiedUpper);
        assert!((sup.value - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn relax_two_bit_eq_exact() {
        let (pmf, dec) = four_dec();
        let sup = relaxed_sup_upper_bound(&pmf, &dec).unwrap();
        assert!((sup.value - 1.5).abs() < 1e-12);
    }

    #[test]
    fn relax_k6() {
        let pmf = eq::uv_pmf(6);
        let dec = CharGraph::build(&pmf).unwrap().maximal_bicliques().unwrap();
        let sup = relaxed_sup_upper_bound(&pmf, &dec).unwrap();
        let expected = 2.0 * (1.0 - 1.0 / 6.0) * 3f64.log2();
        assert!((sup.value - expected).abs() < 1e-12);
        assert!((sup.value - 2.641604).abs() < 1e-6);
    }

    #[test]
    fn relax_rejects_mismatched_inputs() {
        let (_, dec) = ternary_dec();
        let other = eq::uv_pmf(4);
        assert!(matches!(
            relaxed_sup_upper_bound(&other, &dec),
            Err(Error::InconsistentInputs(_))
        ));
    }

    fn quick_search_cfg(seed: u64) -> SearchConfig {
        SearchConfig {
            seed,
            restarts: 4,
            iters_per_stage: 120,
            ..SearchConfig::default()
        }
    }

    #[test]
    fn search_ternary_reaches_upper_bound() {
        let (pmf, dec) = ternary_dec();
        let sup = achievability_search(&pmf, &dec, &quick_search_cfg(1)).unwrap();
        assert_eq!(sup.kind, SupKind::AchievedLower);
        assert!(sup.value >= 2.0 / 3.0 - 1e-6, "achieved {}", sup.value);
        assert!(sup.value <= 2.0 / 3.0 + 1e-9);
        assert!(sup.marginal_residual < 1e-9);
        assert!(sup.markov_residual < 1e-6);
    }

    #[test]
    fn search_two_bit_reaches_upper_bound() {
        let (pmf, dec) = four_dec();
        let sup = achievability_search(&pmf, &dec, &quick_search_cfg(1)).unwrap();
        assert!(sup.value >= 1.5 - 1e-6, "achieved {}", sup.value);
        assert!(sup.value <= 1.5 + 1e-9);
    }

    #[test]
    fn search_diagonal_is_zero() {
        let u = Alphabet::numbered("U", 3);
        let v = Alphabet::numbered("V", 3);
        let atoms: Vec<(Vec<usize>, f64)> = (0..3).map(|i| (vec![i, i], 1.0 / 3.0)).collect();
        let pmf = JointPMF::from_atoms(vec![u, v], &atoms).unwrap();
        let dec = Arc::new(CharGraph::build(&pmf).unwrap().maximal_bicliques().unwrap());
        let sup = achievability_search(&pmf, &dec, &quick_search_cfg(1)).unwrap();
        assert_eq!(sup.value, 0.0);
    }

    #[test]
    fn oracle_binary_eq() {
        let pmf = eq::uv_pmf(2);
        let sup = brute_force_oracle(&pmf, &OracleConfig::default()).unwrap();
        assert!(sup.value.abs() < 1e-9, "sup {}", sup.value);
        assert_eq!(sup.kind, SupKind::Exact);
    }

    #[test]
    fn oracle_ternary_eq() {
        let pmf = eq::uv_pmf(3);
        let sup = brute_force_oracle(&pmf, &OracleConfig::default()).unwrap();
        assert!((sup.value - 2.0 / 3.0).abs() < 1e-3, "sup {}", sup.value);
    }

    #[test]
    fn oracle_uniform_product_single_class() {
        let pmf = JointPMF::new(
            vec![Alphabet::numbered("U", 2), Alphabet::numbered("V", 2)],
            vec![0.25; 4],
        )
        .unwrap();
        let sup = brute_force_oracle(&pmf, &OracleConfig::default()).unwrap();
        assert!((sup.value - 2.0).abs() < 1e-3, "sup {}", sup.value);
    }

    #[test]
    fn oracle_guard_rejects_large() {
        let pmf = eq::uv_pmf(6);
        assert!(matches!(
            brute_force_oracle(&pmf, &OracleConfig::default()),
            Err(Error::TooLargeForOracle(_))
        ));
    }

    #[test]
    fn closed_form_values() {
        assert!(matches!(eq_sup_closed_form(1), Err(Error::BadK(1))));
        assert!((eq_sup_closed_form(3).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((eq_sup_closed_form(4).unwrap() - 1.5).abs() < 1e-15);
        let k5 = eq_sup_closed_form(5).unwrap();
        assert!((k5 - 0.8 * 6f64.log2()).abs() < 1e-15);
        assert!((k5 - 2.067970).abs() < 1e-6);
    }

    #[test]
    fn eq_optimal_q_matches_closed_form() {
        for k in 2..=7u64 {
            let q = eq_optimal_q(k).unwrap();
            let res = q.residuals();
            assert!(res.max_marginal < 1e-12, "k={k}");
            assert!(res.max_markov < 1e-12, "k={k}");
            let obj = q.objective().unwrap();
            let cf = eq_sup_closed_form(k).unwrap();
            assert!((obj - cf).abs() < 1e-9, "k={k}: {obj} vs {cf}");
        }
        // k = 7 explicitly: (6/7) log2 12
        let v = eq_optimal_q(7).unwrap().objective().unwrap();
        assert!((v - 6.0 / 7.0 * 12f64.log2()).abs() < 1e-9);
    }

    #[test]
    fn tension_ternary_eq() {
        let (pmf, dec) = ternary_dec();
        let sup = relaxed_sup_upper_bound(&pmf, &dec).unwrap();
        let t = wyner_tension(&pmf, &sup).unwrap();
        assert!((t - 2.0 / 3.0).abs() < 1e-12, "tension {t}");
    }

    #[test]
    fn tension_independent_full_support() {
        let pmf = JointPMF::new(
            vec![Alphabet::numbered("U", 2), Alphabet::numbered("V", 2)],
            vec![0.25; 4],
        )
        .unwrap();
        let sup = SupResult {
            value: 2.0,
            kind: SupKind::Exact,
            witness: None,
            marginal_residual: 0.0,
            markov_residual: 0.0,
            budget_exhausted: false,
            input_digest: pmf.digest(),
        };
        let t = wyner_tension(&pmf, &sup).unwrap();
        assert!(t.abs() < 1e-12);
    }

    #[test]
    fn tension_diagonal() {
        let u = Alphabet::numbered("U", 4);
        let v = Alphabet::numbered("V", 4);
        let atoms: Vec<(Vec<usize>, f64)> = (0..4).map(|i| (vec![i, i], 0.25)).collect();
        let pmf = JointPMF::from_atoms(vec![u, v], &atoms).unwrap();
        let sup = brute_force_oracle(&pmf, &OracleConfig::default()).unwrap();
        assert!(sup.value.abs() < 1e-12);
        let t = wyner_tension(&pmf, &sup).unwrap();
        assert!(t.abs() < 1e-12);
    }

    #[test]
    fn tension_rejects_foreign_sup() {
        let (pmf, dec) = ternary_dec();
        let sup = relaxed_sup_upper_bound(&pmf, &dec).unwrap();
        let other = eq::uv_pmf(4);
        assert!(matches!(
            wyner_tension(&other, &sup),
            Err(Error::InconsistentInputs(_))
        ));
    }

    #[test]
    fn sandwich_on_eq_family() {
        for k in 2..=5usize {
            let pmf = eq::uv_pmf(k);
            let dec = Arc::new(CharGraph::build(&pmf).unwrap().maximal_bicliques().unwrap());
            let upper = relaxed_sup_upper_bound(&pmf, &dec).unwrap();
            let lower = achievability_search(&pmf, &dec, &quick_search_cfg(1)).unwrap();
            assert!(
                lower.value <= upper.value + 1e-9,
                "k={k}: {} > {}",
                lower.value,
                upper.value
            );
        }
    }
}
