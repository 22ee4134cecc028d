//! Bipartite characteristic graphs, their maximal-biclique class
//! decompositions, and Gács–Körner common information via connected
//! components.
//!
//! The graph is a support object: an edge exists exactly where the validated
//! bivariate pmf puts strictly positive mass.  No epsilon pruning happens
//! here, otherwise the class structure would silently change.

use crate::error::{Error, Result};
use crate::prob::{entropy_of, Alphabet, Bits, JointPMF};

/// Exhaustive subset enumeration runs over the smaller side; above this many
/// active symbols we refuse rather than grind through 2^n subsets.
pub const DEFAULT_SIDE_LIMIT: usize = 20;

/// Bipartite characteristic graph of a two-variable pmf.  Zero-mass symbols
/// stay in the alphabets as isolated vertices; edges carry their pmf mass.
#[derive(Debug, Clone)]
pub struct CharGraph {
    left: Alphabet,
    right: Alphabet,
    /// Positive-mass pairs, sorted left-major.
    edges: Vec<(usize, usize)>,
    edge_mass: Vec<f64>,
}

/// One maximal bipartite clique ("class").  `left_set`/`right_set` hold
/// symbol indices into the graph's alphabets, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BicliqueClass {
    pub left_set: Vec<usize>,
    pub right_set: Vec<usize>,
}

impl BicliqueClass {
    pub fn num_edges(&self) -> usize {
        self.left_set.len() * self.right_set.len()
    }

    /// Smaller of the two side sizes; min-side-1 classes are exactly the
    /// ones whose conditionals are products no matter how mass is placed.
    pub fn min_side(&self) -> usize {
        self.left_set.len().min(self.right_set.len())
    }
}

/// Complete enumeration of the maximal bicliques of a characteristic graph,
/// with per-edge membership.  Classes are sorted by
/// (|left|, |right|, left symbols, right symbols) and indexed by position.
#[derive(Debug, Clone)]
pub struct ClassDecomposition {
    graph: CharGraph,
    classes: Vec<BicliqueClass>,
    /// edge id -> ascending ids of the classes containing it.
    membership: Vec<Vec<usize>>,
    /// class id -> edge ids covered by the class, left-major order.
    class_edges: Vec<Vec<usize>>,
}

/// A connected component of the graph restricted to positive-mass vertices.
#[derive(Debug, Clone)]
pub struct Component {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub edge_ids: Vec<usize>,
    pub mass: f64,
}

/// Gács–Körner common information and the associated tension.
#[derive(Debug, Clone, Copy)]
pub struct GkInfo {
    pub ci: Bits,
    pub tension: Bits,
}

impl CharGraph {
    /// Build the characteristic graph of a validated bivariate pmf.
    pub fn build(pmf: &JointPMF) -> Result<CharGraph> {
        if pmf.num_vars() != 2 {
            return Err(Error::WrongArity(pmf.num_vars()));
        }
        let left = pmf.var(0).clone();
        let right = pmf.var(1).clone();
        let mut edges = Vec::new();
        let mut edge_mass = Vec::new();
        for (syms, m) in pmf.atoms() {
            edges.push((syms[0], syms[1]));
            edge_mass.push(m);
        }
        // atoms() already walks row-major order, so edges are left-major.
        Ok(CharGraph {
            left,
            right,
            edges,
            edge_mass,
        })
    }

    pub fn left(&self) -> &Alphabet {
        &self.left
    }

    pub fn right(&self) -> &Alphabet {
        &self.right
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_mass(&self) -> &[f64] {
        &self.edge_mass
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        self.edges.binary_search(&(u, v)).ok()
    }

    fn active_left(&self) -> Vec<usize> {
        let mut active: Vec<usize> = self.edges.iter().map(|&(u, _)| u).collect();
        active.sort_unstable();
        active.dedup();
        active
    }

    fn active_right(&self) -> Vec<usize> {
        let mut active: Vec<usize> = self.edges.iter().map(|&(_, v)| v).collect();
        active.sort_unstable();
        active.dedup();
        active
    }

    /// Connected components over positive-mass vertices, ordered by their
    /// smallest left vertex (then smallest right vertex).
    pub fn connected_components(&self) -> Vec<Component> {
        let nl = self.left.len();
        let nr = self.right.len();
        // vertex ids: 0..nl left, nl..nl+nr right
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nl + nr];
        for &(u, v) in &self.edges {
            adj[u].push(nl + v);
            adj[nl + v].push(u);
        }
        let mut comp = vec![usize::MAX; nl + nr];
        let mut components = Vec::new();
        let active: Vec<usize> = self
            .active_left()
            .into_iter()
            .chain(self.active_right().into_iter().map(|v| nl + v))
            .collect();
        for &start in &active {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = components.len();
            let mut stack = vec![start];
            comp[start] = id;
            let mut left = Vec::new();
            let mut right = Vec::new();
            while let Some(v) = stack.pop() {
                if v < nl {
                    left.push(v);
                } else {
                    right.push(v - nl);
                }
                for &w in &adj[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        stack.push(w);
                    }
                }
            }
            left.sort_unstable();
            right.sort_unstable();
            components.push(Component {
                left,
                right,
                edge_ids: Vec::new(),
                mass: 0.0,
            });
        }
        for (e, &(u, _)) in self.edges.iter().enumerate() {
            let c = comp[u];
            components[c].edge_ids.push(e);
            components[c].mass += self.edge_mass[e];
        }
        components
    }

    /// Enumerate all maximal bicliques.  Every non-empty subset `S` of the
    /// smaller side is tried; `(S, N(S))` is kept when `N(S)` is non-empty
    /// and `S` is itself the common neighborhood of `N(S)`, which yields each
    /// maximal biclique exactly once.
    pub fn maximal_bicliques(&self) -> Result<ClassDecomposition> {
        self.maximal_bicliques_limited(DEFAULT_SIDE_LIMIT)
    }

    pub fn maximal_bicliques_limited(&self, side_limit: usize) -> Result<ClassDecomposition> {
        if self.edges.is_empty() {
            return Err(Error::InconsistentInputs(
                "characteristic graph has no edges".into(),
            ));
        }
        let active_l = self.active_left();
        let active_r = self.active_right();
        let enumerate_left = active_l.len() <= active_r.len();
        let (small, large) = if enumerate_left {
            (&active_l, &active_r)
        } else {
            (&active_r, &active_l)
        };
        if small.len() > side_limit {
            return Err(Error::TooLarge(format!(
                "smaller side has {} symbols, limit {}",
                small.len(),
                side_limit
            )));
        }

        // Bitset neighborhoods of the small side over large-side positions.
        let words = large.len().div_ceil(64);
        let large_pos = |v: usize| large.binary_search(&v).expect("active vertex");
        let mut nbhd = vec![vec![0u64; words]; small.len()];
        for &(u, v) in &self.edges {
            let (s, l) = if enumerate_left { (u, v) } else { (v, u) };
            let si = small.binary_search(&s).expect("active vertex");
            let li = large_pos(l);
            nbhd[si][li / 64] |= 1 << (li % 64);
        }

        let n = small.len();
        let mut found: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
        for mask in 1u32..(1u32 << n) {
            // T = common neighborhood of S
            let mut t = vec![u64::MAX; words];
            if words > 0 {
                let spare = words * 64 - large.len();
                t[words - 1] = u64::MAX >> spare;
            }
            let mut empty = false;
            for i in 0..n {
                if mask & (1 << i) != 0 {
                    for w in 0..words {
                        t[w] &= nbhd[i][w];
                    }
                }
            }
            if t.iter().all(|&w| w == 0) {
                empty = true;
            }
            if empty {
                continue;
            }
            // closure: S' = all small vertices whose neighborhood contains T
            let mut closure = 0u32;
            for i in 0..n {
                if t.iter().zip(&nbhd[i]).all(|(&tw, &nw)| tw & nw == tw) {
                    closure |= 1 << i;
                }
            }
            if closure != mask {
                continue;
            }
            let s_set: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| small[i]).collect();
            let t_set: Vec<usize> = (0..large.len())
                .filter(|&j| t[j / 64] & (1 << (j % 64)) != 0)
                .map(|j| large[j])
                .collect();
            found.push(if enumerate_left {
                (s_set, t_set)
            } else {
                (t_set, s_set)
            });
        }

        let mut classes: Vec<BicliqueClass> = found
            .into_iter()
            .map(|(l, r)| BicliqueClass {
                left_set: l,
                right_set: r,
            })
            .collect();
        classes.sort_by(|a, b| {
            (a.left_set.len(), a.right_set.len(), &a.left_set, &a.right_set).cmp(&(
                b.left_set.len(),
                b.right_set.len(),
                &b.left_set,
                &b.right_set,
            ))
        });

        let mut membership = vec![Vec::new(); self.edges.len()];
        let mut class_edges = vec![Vec::new(); classes.len()];
        for (ci, class) in classes.iter().enumerate() {
            for &u in &class.left_set {
                for &v in &class.right_set {
                    let e = self
                        .edge_index(u, v)
                        .expect("biclique edge must exist in the graph");
                    membership[e].push(ci);
                    class_edges[ci].push(e);
                }
            }
        }
        debug_assert!(membership.iter().all(|m| !m.is_empty()));

        Ok(ClassDecomposition {
            graph: self.clone(),
            classes,
            membership,
            class_edges,
        })
    }
}

impl ClassDecomposition {
    pub fn graph(&self) -> &CharGraph {
        &self.graph
    }

    pub fn classes(&self) -> &[BicliqueClass] {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn membership(&self, edge: usize) -> &[usize] {
        &self.membership[edge]
    }

    pub fn class_edges(&self, class: usize) -> &[usize] {
        &self.class_edges[class]
    }

    /// Per-class certified cap on H(U|Q=q) + H(V|Q=q).
    pub fn class_cap(&self, class: usize) -> Bits {
        let c = &self.classes[class];
        (c.left_set.len() as f64).log2() + (c.right_set.len() as f64).log2()
    }

    /// Render one class as the CLI prints it.
    pub fn describe_class(&self, class: usize) -> String {
        let c = &self.classes[class];
        let left: Vec<&str> = c.left_set.iter().map(|&u| self.graph.left().symbol(u)).collect();
        let right: Vec<&str> = c
            .right_set
            .iter()
            .map(|&v| self.graph.right().symbol(v))
            .collect();
        format!(
            "class {} left={{{}}} right={{{}}} edges={}",
            class,
            left.join(","),
            right.join(","),
            c.num_edges()
        )
    }
}

/// Gács–Körner common information of a validated bivariate pmf: the entropy
/// of the connected-component label, together with
/// `T_GK = I(U;V) - CI_GK >= 0`.
pub fn gk_common_information(pmf: &JointPMF) -> Result<GkInfo> {
    let graph = CharGraph::build(pmf)?;
    let masses: Vec<f64> = graph
        .connected_components()
        .iter()
        .map(|c| c.mass)
        .collect();
    let ci = entropy_of(&masses);
    let u = pmf.var(0).name().to_string();
    let v = pmf.var(1).name().to_string();
    let mi = pmf.mutual_information(&[&u], &[&v])?;
    Ok(GkInfo {
        ci,
        tension: mi - ci,
    })
}
