//! Finite interactive protocols as randomized message kernels, with exact
//! transcript enumeration.
//!
//! A round's kernel sees only the sender's own input and the transcript
//! prefix, which is precisely the Markov structure of a valid protocol; the
//! verification operations re-derive those properties from the enumerated
//! joint as independent checks.  Early termination marks transcript prefixes
//! terminal, so the final transcript is prefix-free by construction.

use crate::bounds::FunctionSpec;
use crate::error::{Error, Result};
use crate::prob::{Alphabet, Bits, JointPMF};
use std::collections::{BTreeMap, BTreeSet};

pub const MAX_DEPTH: usize = 16;
pub const MAX_MESSAGES_PER_ROUND: usize = 8;
const CHECK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub fn as_str(&self) -> &'static str {
        match self {
            Party::Alice => "A",
            Party::Bob => "B",
        }
    }
}

/// One round: who sends, over which message alphabet, and the distribution
/// over messages for every (sender input, transcript prefix) pair.
#[derive(Debug, Clone)]
pub struct RoundKernel {
    pub sender: Party,
    pub message_alphabet: Alphabet,
    pub kernel: BTreeMap<(usize, Vec<String>), Vec<f64>>,
}

/// A finite interactive protocol over declared input alphabets.
#[derive(Debug, Clone)]
pub struct ProtocolSpec {
    name: String,
    x_alphabet: Alphabet,
    y_alphabet: Alphabet,
    rounds: Vec<RoundKernel>,
    terminals: BTreeSet<Vec<String>>,
}

impl ProtocolSpec {
    pub fn new(
        name: impl Into<String>,
        x_alphabet: Alphabet,
        y_alphabet: Alphabet,
        rounds: Vec<RoundKernel>,
        terminals: BTreeSet<Vec<String>>,
    ) -> Result<Self> {
        for pair in rounds.windows(2) {
            if pair[0].sender == pair[1].sender {
                return Err(Error::ProtocolShape(
                    "rounds must alternate senders".into(),
                ));
            }
        }
        for (i, r) in rounds.iter().enumerate() {
            if r.message_alphabet.len() > MAX_MESSAGES_PER_ROUND {
                return Err(Error::ProtocolShape(format!(
                    "round {} has {} messages, cap {}",
                    i + 1,
                    r.message_alphabet.len(),
                    MAX_MESSAGES_PER_ROUND
                )));
            }
        }
        Ok(ProtocolSpec {
            name: name.into(),
            x_alphabet,
            y_alphabet,
            rounds,
            terminals,
        })
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

    pub fn depth(&self) -> usize {
        self.rounds.len()
    }

    pub fn rounds(&self) -> &[RoundKernel] {
        &self.rounds
    }

    /// Built-in protocols from the equality examples, together with their
    /// canonical instances (uniform independent inputs and the EQ function).
    pub fn builtin(name: &str) -> Result<(ProtocolSpec, JointPMF, FunctionSpec)> {
        match name {
            "ternary_eq" => Ok((
                ternary_eq_protocol(),
                crate::eq::uniform_xy(3),
                FunctionSpec::eq(3),
            )),
            "two_bit_eq_randomized" => Ok((
                two_bit_eq_randomized_protocol(),
                crate::eq::uniform_xy(4),
                FunctionSpec::eq(4),
            )),
            other => Err(Error::UnknownProtocol(other.to_string())),
        }
    }

    /// Parse the protocol file format:
    /// `protocol <name>`, `inputs X <k>`, `inputs Y <k>`, per round
    /// `round <i> sender <A|B> messages <m>` followed by kernel lines
    /// `on <input> prefix <msg...|-> : <msg>=<prob> ...`, plus optional
    /// `terminal prefix <msg...>` lines.  Input and message symbols are
    /// `1..=k` / `1..=m`.
    pub fn parse(text: &str) -> Result<ProtocolSpec> {
        let mut name: Option<String> = None;
        let mut x_size: Option<usize> = None;
        let mut y_size: Option<usize> = None;
        let mut rounds: Vec<RoundKernel> = Vec::new();
        let mut terminals: BTreeSet<Vec<String>> = BTreeSet::new();

        for raw in text.lines() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks[0] {
                "protocol" if toks.len() == 2 => name = Some(toks[1].to_string()),
                "inputs" if toks.len() == 3 => {
                    let k: usize = toks[2]
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad input size in `{line}`")))?;
                    match toks[1] {
                        "X" => x_size = Some(k),
                        "Y" => y_size = Some(k),
                        _ => return Err(Error::Parse(format!("bad inputs line `{line}`"))),
                    }
                }
                "round" if toks.len() == 6 && toks[2] == "sender" && toks[4] == "messages" => {
                    let idx: usize = toks[1]
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad round index in `{line}`")))?;
                    if idx != rounds.len() + 1 {
                        return Err(Error::Parse(format!(
                            "round {idx} out of order, expected {}",
                            rounds.len() + 1
                        )));
                    }
                    let sender = match toks[3] {
                        "A" => Party::Alice,
                        "B" => Party::Bob,
                        _ => return Err(Error::Parse(format!("bad sender in `{line}`"))),
                    };
                    let m: usize = toks[5]
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad message count in `{line}`")))?;
                    rounds.push(RoundKernel {
                        sender,
                        message_alphabet: Alphabet::numbered(format!("M{idx}"), m),
                        kernel: BTreeMap::new(),
                    });
                }
                "on" => {
                    let round = rounds
                        .last_mut()
                        .ok_or_else(|| Error::Parse("kernel line before any round".into()))?;
                    let colon = toks
                        .iter()
                        .position(|&t| t == ":")
                        .ok_or_else(|| Error::Parse(format!("missing `:` in `{line}`")))?;
                    if toks.len() < 4 || toks[2] != "prefix" || colon < 4 {
                        return Err(Error::Parse(format!("bad kernel line `{line}`")));
                    }
                    let input_sym = toks[1];
                    let prefix: Vec<String> = if toks[3..colon] == ["-"] {
                        Vec::new()
                    } else {
                        toks[3..colon].iter().map(|s| s.to_string()).collect()
                    };
                    let input_alpha_size = match round.sender {
                        Party::Alice => x_size,
                        Party::Bob => y_size,
                    }
                    .ok_or_else(|| Error::Parse("kernel line before inputs".into()))?;
                    let input: usize = input_sym
                        .parse::<usize>()
                        .ok()
                        .filter(|&i| i >= 1 && i <= input_alpha_size)
                        .map(|i| i - 1)
                        .ok_or_else(|| Error::Parse(format!("bad input symbol `{input_sym}`")))?;
                    let mut dist = vec![0.0; round.message_alphabet.len()];
                    for spec in &toks[colon + 1..] {
                        let (msg, prob) = spec
                            .split_once('=')
                            .ok_or_else(|| Error::Parse(format!("bad mass `{spec}`")))?;
                        let mi = round
                            .message_alphabet
                            .index_of(msg)
                            .ok_or_else(|| Error::Parse(format!("unknown message `{msg}`")))?;
                        dist[mi] = prob
                            .parse()
                            .map_err(|_| Error::Parse(format!("bad probability `{prob}`")))?;
                    }
                    round.kernel.insert((input, prefix), dist);
                }
                "terminal" if toks.len() >= 3 && toks[1] == "prefix" => {
                    terminals.insert(toks[2..].iter().map(|s| s.to_string()).collect());
                }
                _ => return Err(Error::Parse(format!("unrecognized line `{line}`"))),
            }
        }

        let name = name.ok_or_else(|| Error::Parse("missing `protocol <name>`".into()))?;
        let x = Alphabet::numbered(
            "X",
            x_size.ok_or_else(|| Error::Parse("missing `inputs X <k>`".into()))?,
        );
        let y = Alphabet::numbered(
            "Y",
            y_size.ok_or_else(|| Error::Parse("missing `inputs Y <k>`".into()))?,
        );
        ProtocolSpec::new(name, x, y, rounds, terminals)
    }
}

/// One terminated transcript path of the exact enumeration.
#[derive(Debug, Clone)]
pub struct PathRecord {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub messages: Vec<String>,
    pub prob: f64,
}

/// The exact joint of inputs, function value, and terminated transcript,
/// plus the per-round prefix data every verification operation consumes.
#[derive(Debug, Clone)]
pub struct TranscriptDistribution {
    joint: JointPMF,
    paths: Vec<PathRecord>,
    senders: Vec<Party>,
    depth: usize,
    x_alphabet: Alphabet,
    y_alphabet: Alphabet,
}

fn transcript_label(messages: &[String]) -> String {
    if messages.is_empty() {
        "-".to_string()
    } else {
        messages.join(".")
    }
}

/// Transcript prefix after `i` rounds, padded with `-` past termination so
/// all labels at a given depth are comparable.
fn prefix_label(messages: &[String], i: usize) -> String {
    if i == 0 {
        return "-".to_string();
    }
    let mut parts: Vec<&str> = messages.iter().take(i).map(String::as_str).collect();
    while parts.len() < i {
        parts.push("-");
    }
    parts.join(".")
}

fn message_at(messages: &[String], round: usize) -> &str {
    messages.get(round - 1).map(String::as_str).unwrap_or("-")
}

/// Exact forward enumeration of `(X, Y, transcript)` paths.
pub fn transcript_distribution(
    p: &ProtocolSpec,
    pmf_xy: &JointPMF,
    f: &FunctionSpec,
) -> Result<TranscriptDistribution> {
    if pmf_xy.num_vars() != 2 {
        return Err(Error::WrongArity(pmf_xy.num_vars()));
    }
    if pmf_xy.var(0).symbols() != p.x_alphabet.symbols()
        || pmf_xy.var(1).symbols() != p.y_alphabet.symbols()
        || f.x_alphabet().symbols() != p.x_alphabet.symbols()
        || f.y_alphabet().symbols() != p.y_alphabet.symbols()
    {
        return Err(Error::InconsistentInputs(
            "protocol, distribution, and function alphabets disagree".into(),
        ));
    }
    let depth = p.rounds.len();
    if depth > MAX_DEPTH {
        return Err(Error::DepthExceeded(depth, MAX_DEPTH));
    }
    for (i, round) in p.rounds.iter().enumerate() {
        for ((input, prefix), dist) in &round.kernel {
            let total: f64 = dist.iter().sum();
            if dist.len() != round.message_alphabet.len()
                || dist.iter().any(|&d| d < 0.0)
                || (total - 1.0).abs() > CHECK_TOL
            {
                return Err(Error::KernelNotStochastic(format!(
                    "round {}, input {}, prefix {}",
                    i + 1,
                    input + 1,
                    transcript_label(prefix)
                )));
            }
        }
    }

    let mut paths: Vec<PathRecord> = Vec::new();
    for (syms, pxy) in pmf_xy.atoms() {
        let (x, y) = (syms[0], syms[1]);
        let z = f.value(x, y);
        if depth == 0 {
            paths.push(PathRecord {
                x,
                y,
                z,
                messages: Vec::new(),
                prob: pxy,
            });
            continue;
        }
        let mut frontier: Vec<(Vec<String>, f64)> = vec![(Vec::new(), 1.0)];
        for (i, round) in p.rounds.iter().enumerate() {
            let mut next = Vec::new();
            for (prefix, prob) in frontier.drain(..) {
                let input = match round.sender {
                    Party::Alice => x,
                    Party::Bob => y,
                };
                let dist = round.kernel.get(&(input, prefix.clone())).ok_or_else(|| {
                    Error::KernelNotStochastic(format!(
                        "round {}, input {}, prefix {}: no kernel entry",
                        i + 1,
                        input + 1,
                        transcript_label(&prefix)
                    ))
                })?;
                for (mi, &pm) in dist.iter().enumerate() {
                    if pm <= 0.0 {
                        continue;
                    }
                    let mut np = prefix.clone();
                    np.push(round.message_alphabet.symbol(mi).to_string());
                    let done = i + 1 == depth || p.terminals.contains(&np);
                    if done {
                        paths.push(PathRecord {
                            x,
                            y,
                            z,
                            messages: np,
                            prob: pxy * prob * pm,
                        });
                    } else {
                        next.push((np, prob * pm));
                    }
                }
            }
            frontier = next;
        }
    }

    let joint = joint_from_paths(&p.x_alphabet, &p.y_alphabet, f.z_alphabet(), &paths)?;
    Ok(TranscriptDistribution {
        joint,
        paths,
        senders: p.rounds.iter().map(|r| r.sender).collect(),
        depth,
        x_alphabet: p.x_alphabet.clone(),
        y_alphabet: p.y_alphabet.clone(),
    })
}

fn joint_from_paths(
    x_alphabet: &Alphabet,
    y_alphabet: &Alphabet,
    z_alphabet: &Alphabet,
    paths: &[PathRecord],
) -> Result<JointPMF> {
    let mut m_labels: Vec<String> = Vec::new();
    for path in paths {
        let label = transcript_label(&path.messages);
        if !m_labels.contains(&label) {
            m_labels.push(label);
        }
    }
    let m = Alphabet::new("M", m_labels)?;
    let atoms: Vec<(Vec<usize>, f64)> = paths
        .iter()
        .map(|p| {
            let mi = m.index_of(&transcript_label(&p.messages)).unwrap();
            (vec![p.x, p.y, p.z, mi], p.prob)
        })
        .collect();
    JointPMF::from_atoms(
        vec![
            Alphabet::new("X", x_alphabet.symbols().to_vec())?,
            Alphabet::new("Y", y_alphabet.symbols().to_vec())?,
            Alphabet::new("Z", z_alphabet.symbols().to_vec())?,
            m,
        ],
        &atoms,
    )
}

/// The chain of quantities around `H(M) >= I(M;XY) >= information cost`.
#[derive(Debug, Clone, Copy)]
pub struct HmChainReport {
    pub h_m: Bits,
    pub i_m_xy: Bits,
    pub i_x_m_given_y: Bits,
    pub i_y_m_given_x: Bits,
    pub info_cost: Bits,
    pub i_xy: Bits,
    pub i_xy_given_m: Bits,
    pub chain_ok: bool,
}

impl TranscriptDistribution {
    /// Joint over (X, Y, Z, M) with M the terminated transcript.
    pub fn joint(&self) -> &JointPMF {
        &self.joint
    }

    pub fn paths(&self) -> &[PathRecord] {
        &self.paths
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Assemble a distribution directly from path records; exists so tests
    /// can feed deliberately corrupted transcripts through the verifiers.
    #[doc(hidden)]
    pub fn from_raw_parts(
        x_alphabet: Alphabet,
        y_alphabet: Alphabet,
        z_alphabet: Alphabet,
        senders: Vec<Party>,
        paths: Vec<PathRecord>,
    ) -> Result<TranscriptDistribution> {
        let joint = joint_from_paths(&x_alphabet, &y_alphabet, &z_alphabet, &paths)?;
        Ok(TranscriptDistribution {
            joint,
            depth: senders.len(),
            senders,
            paths,
            x_alphabet,
            y_alphabet,
        })
    }

    /// `I(X;M|Y) + I(Y;M|X)` on the exact joint.
    pub fn information_cost(&self) -> Result<Bits> {
        let (a, b) = self.information_cost_components()?;
        Ok(a + b)
    }

    /// `(I(X;M|Y), I(Y;M|X))`.
    pub fn information_cost_components(&self) -> Result<(Bits, Bits)> {
        let a = self
            .joint
            .conditional_mutual_information(&["X"], &["M"], &["Y"])?;
        let b = self
            .joint
            .conditional_mutual_information(&["Y"], &["M"], &["X"])?;
        Ok((a, b))
    }

    /// Joint over (X, Y, prefix_{i-1}, message_i), for the round checks.
    fn round_joint(&self, i: usize) -> Result<JointPMF> {
        let mut p_labels: Vec<String> = Vec::new();
        let mut c_labels: Vec<String> = Vec::new();
        for path in &self.paths {
            let p = prefix_label(&path.messages, i - 1);
            let c = message_at(&path.messages, i).to_string();
            if !p_labels.contains(&p) {
                p_labels.push(p);
            }
            if !c_labels.contains(&c) {
                c_labels.push(c);
            }
        }
        let pa = Alphabet::new("P", p_labels)?;
        let ca = Alphabet::new("C", c_labels)?;
        let atoms: Vec<(Vec<usize>, f64)> = self
            .paths
            .iter()
            .map(|path| {
                let p = pa.index_of(&prefix_label(&path.messages, i - 1)).unwrap();
                let c = ca.index_of(message_at(&path.messages, i)).unwrap();
                (vec![path.x, path.y, p, c], path.prob)
            })
            .collect();
        JointPMF::from_atoms(
            vec![
                Alphabet::new("X", self.x_alphabet.symbols().to_vec())?,
                Alphabet::new("Y", self.y_alphabet.symbols().to_vec())?,
                pa,
                ca,
            ],
            &atoms,
        )
    }

    /// Per-round Markov residuals: `I(M_i; Y | X, M^{i-1})` when Alice
    /// sends round i, mirrored for Bob.  Zero (to tolerance) for every
    /// kernel-built distribution; this recomputes it from the joint.
    pub fn verify_round_markov(&self) -> Result<Vec<Bits>> {
        let mut residuals = Vec::with_capacity(self.depth);
        for i in 1..=self.depth {
            let joint = self.round_joint(i)?;
            let r = match self.senders[i - 1] {
                Party::Alice => {
                    joint.conditional_mutual_information(&["C"], &["Y"], &["X", "P"])?
                }
                Party::Bob => joint.conditional_mutual_information(&["C"], &["X"], &["Y", "P"])?,
            };
            residuals.push(r);
        }
        Ok(residuals)
    }

    /// The sequence `I(X;Y|M^i)` for i = 0..depth; errors if it ever
    /// increases beyond tolerance, which would contradict the protocol
    /// Markov structure.
    pub fn verify_monotonicity(&self) -> Result<Vec<Bits>> {
        let mut seq = Vec::with_capacity(self.depth + 1);
        for i in 0..=self.depth {
            let mut labels: Vec<String> = Vec::new();
            for path in &self.paths {
                let l = prefix_label(&path.messages, i);
                if !labels.contains(&l) {
                    labels.push(l);
                }
            }
            let pa = Alphabet::new("P", labels)?;
            let atoms: Vec<(Vec<usize>, f64)> = self
                .paths
                .iter()
                .map(|path| {
                    let p = pa.index_of(&prefix_label(&path.messages, i)).unwrap();
                    (vec![path.x, path.y, p], path.prob)
                })
                .collect();
            let joint = JointPMF::from_atoms(
                vec![
                    Alphabet::new("X", self.x_alphabet.symbols().to_vec())?,
                    Alphabet::new("Y", self.y_alphabet.symbols().to_vec())?,
                    pa,
                ],
                &atoms,
            )?;
            seq.push(joint.conditional_mutual_information(&["X"], &["Y"], &["P"])?);
        }
        for w in seq.windows(2) {
            if w[1] > w[0] + CHECK_TOL {
                return Err(Error::InconsistentInputs(format!(
                    "interactive information increased: {} -> {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(seq)
    }

    /// `(H(Z|X,M), H(Z|Y,M))`; both vanish for correct protocols.
    pub fn verify_correctness(&self) -> Result<(Bits, Bits)> {
        let alice = self.joint.conditional_entropy(&["Z"], &["X", "M"])?;
        let bob = self.joint.conditional_entropy(&["Z"], &["Y", "M"])?;
        Ok((alice, bob))
    }

    /// `I(XZ; YZ | M)` for independent inputs and a correct protocol; the
    /// scalar consequence of view-monotonicity that the lower bound uses.
    pub fn verify_appendix_chain(&self) -> Result<Bits> {
        let ixy = self.joint.mutual_information(&["X"], &["Y"])?;
        if ixy > 1e-9 {
            return Err(Error::PreconditionUnmet(format!(
                "inputs are dependent: I(X;Y) = {ixy:.3e}"
            )));
        }
        let (a, b) = self.verify_correctness()?;
        if a > 1e-9 || b > 1e-9 {
            return Err(Error::PreconditionUnmet(format!(
                "protocol is not correct: H(Z|X,M) = {a:.3e}, H(Z|Y,M) = {b:.3e}"
            )));
        }
        // I(XZ; YZ | M) via entropies; the two sides share Z.
        let h = |vars: &[&str]| self.joint.entropy(vars);
        let v = h(&["X", "Z", "M"])? + h(&["Y", "Z", "M"])? - h(&["X", "Y", "Z", "M"])? - h(&["M"])?;
        Ok(v.max(0.0))
    }

    /// The transcript-entropy chain: `H(M) >= I(M;XY)`, the exact expansion
    /// of `I(M;XY)`, and `I(M;XY) >= I(X;M|Y) + I(Y;M|X)` via
    /// `I(X;Y|M) <= I(X;Y)`.
    pub fn hm_chain_check(&self) -> Result<HmChainReport> {
        let h_m = self.joint.entropy(&["M"])?;
        let i_m_xy = self.joint.mutual_information(&["M"], &["X", "Y"])?;
        let (i_x_m_given_y, i_y_m_given_x) = self.information_cost_components()?;
        let i_xy = self.joint.mutual_information(&["X"], &["Y"])?;
        let i_xy_given_m = self
            .joint
            .conditional_mutual_information(&["X"], &["Y"], &["M"])?;
        let info_cost = i_x_m_given_y + i_y_m_given_x;
        let expansion = i_xy + i_x_m_given_y + i_y_m_given_x - i_xy_given_m;
        let chain_ok = h_m >= i_m_xy - CHECK_TOL
            && (i_m_xy - expansion).abs() <= CHECK_TOL
            && i_xy_given_m <= i_xy + CHECK_TOL
            && i_m_xy >= info_cost - CHECK_TOL;
        Ok(HmChainReport {
            h_m,
            i_m_xy,
            i_x_m_given_y,
            i_y_m_given_x,
            info_cost,
            i_xy,
            i_xy_given_m,
            chain_ok,
        })
    }
}

fn deterministic_dist(n: usize, hit: usize) -> Vec<f64> {
    let mut d = vec![0.0; n];
    d[hit] = 1.0;
    d
}

/// Protocol 1: Alice announces her ternary input, Bob answers with the
/// equality bit.
fn ternary_eq_protocol() -> ProtocolSpec {
    let x = Alphabet::numbered("X", 3);
    let y = Alphabet::numbered("Y", 3);
    let m1 = Alphabet::numbered("M1", 3);
    let mut k1 = BTreeMap::new();
    for xi in 0..3 {
        k1.insert((xi, Vec::new()), deterministic_dist(3, xi));
    }
    let m2 = Alphabet::new("M2", vec!["0".into(), "1".into()]).unwrap();
    let mut k2 = BTreeMap::new();
    for yi in 0..3 {
        for mi in 0..3 {
            let prefix = vec![(mi + 1).to_string()];
            k2.insert((yi, prefix), deterministic_dist(2, usize::from(mi == yi)));
        }
    }
    ProtocolSpec::new(
        "ternary_eq",
        x,
        y,
        vec![
            RoundKernel {
                sender: Party::Alice,
                message_alphabet: m1,
                kernel: k1,
            },
            RoundKernel {
                sender: Party::Bob,
                message_alphabet: m2,
                kernel: k2,
            },
        ],
        BTreeSet::new(),
    )
    .expect("builtin protocol is well-formed")
}

/// The six 2-subsets of {1,2,3,4} in the order a..f.
const PAIR_SETS: [(usize, usize); 6] = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];
const PAIR_NAMES: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

/// Protocol 2: Alice names a random 2-set containing her input; Bob answers
/// 1 if his input is in the set and otherwise flips a fair coin, with 0
/// terminating at Z = 0; on 1, Alice reveals her input and Bob sends Z.
fn two_bit_eq_randomized_protocol() -> ProtocolSpec {
    let x = Alphabet::numbered("X", 4);
    let y = Alphabet::numbered("Y", 4);
    let in_set = |s: usize, v: usize| PAIR_SETS[s].0 == v || PAIR_SETS[s].1 == v;

    let m1 = Alphabet::new("M1", PAIR_NAMES.iter().map(|s| s.to_string()).collect()).unwrap();
    let mut k1 = BTreeMap::new();
    for xi in 0..4 {
        let mut d = vec![0.0; 6];
        for (s, _) in PAIR_SETS.iter().enumerate() {
            if in_set(s, xi + 1) {
                d[s] = 1.0 / 3.0;
            }
        }
        k1.insert((xi, Vec::new()), d);
    }

    let m2 = Alphabet::new("M2", vec!["0".into(), "1".into()]).unwrap();
    let mut k2 = BTreeMap::new();
    for yi in 0..4 {
        for (s, name) in PAIR_NAMES.iter().enumerate() {
            let d = if in_set(s, yi + 1) {
                vec![0.0, 1.0]
            } else {
                vec![0.5, 0.5]
            };
            k2.insert((yi, vec![name.to_string()]), d);
        }
    }

    let m3 = Alphabet::numbered("M3", 4);
    let mut k3 = BTreeMap::new();
    for xi in 0..4 {
        for name in PAIR_NAMES {
            k3.insert(
                (xi, vec![name.to_string(), "1".to_string()]),
                deterministic_dist(4, xi),
            );
        }
    }

    let m4 = Alphabet::new("M4", vec!["0".into(), "1".into()]).unwrap();
    let mut k4 = BTreeMap::new();
    for yi in 0..4 {
        for name in PAIR_NAMES {
            for mx in 0..4 {
                k4.insert(
                    (yi, vec![name.to_string(), "1".to_string(), (mx + 1).to_string()]),
                    deterministic_dist(2, usize::from(mx == yi)),
                );
            }
        }
    }

    let terminals: BTreeSet<Vec<String>> = PAIR_NAMES
        .iter()
        .map(|name| vec![name.to_string(), "0".to_string()])
        .collect();

    ProtocolSpec::new(
        "two_bit_eq_randomized",
        x,
        y,
        vec![
            RoundKernel {
                sender: Party::Alice,
                message_alphabet: m1,
                kernel: k1,
            },
            RoundKernel {
                sender: Party::Bob,
                message_alphabet: m2,
                kernel: k2,
            },
            RoundKernel {
                sender: Party::Alice,
                message_alphabet: m3,
                kernel: k3,
            },
            RoundKernel {
                sender: Party::Bob,
                message_alphabet: m4,
                kernel: k4,
            },
        ],
        terminals,
    )
    .expect("builtin protocol is well-formed")
}

/// Seeded random protocols for the structural property tests.
#[doc(hidden)]
pub mod gen {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Random alternating protocol with depth <= 4 and alphabets <= 3.
    /// Kernel rows are strictly positive Dirichlet-ish draws; some prefixes
    /// become terminal.
    pub fn random_protocol(seed: u64) -> ProtocolSpec {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nx = rng.gen_range(2..=3);
        let ny = rng.gen_range(2..=3);
        let depth = rng.gen_range(1..=4);
        let x = Alphabet::numbered("X", nx);
        let y = Alphabet::numbered("Y", ny);

        let mut rounds = Vec::new();
        let mut terminals = BTreeSet::new();
        let mut reachable: Vec<Vec<String>> = vec![Vec::new()];
        for i in 0..depth {
            let sender = if i % 2 == 0 { Party::Alice } else { Party::Bob };
            let inputs = if sender == Party::Alice { nx } else { ny };
            let m = rng.gen_range(2..=3);
            let alphabet = Alphabet::numbered(format!("M{}", i + 1), m);
            let mut kernel = BTreeMap::new();
            for prefix in &reachable {
                for input in 0..inputs {
                    let mut d: Vec<f64> =
                        (0..m).map(|_| -rng.gen::<f64>().max(1e-9).ln()).collect();
                    let total: f64 = d.iter().sum();
                    for v in &mut d {
                        *v /= total;
                    }
                    kernel.insert((input, prefix.clone()), d);
                }
            }
            let mut next = Vec::new();
            for prefix in &reachable {
                for mi in 0..m {
                    let mut ext = prefix.clone();
                    ext.push((mi + 1).to_string());
                    if i + 1 < depth && rng.gen::<f64>() < 0.15 {
                        terminals.insert(ext);
                    } else {
                        next.push(ext);
                    }
                }
            }
            reachable = next;
            rounds.push(RoundKernel {
                sender,
                message_alphabet: alphabet,
                kernel,
            });
        }
        ProtocolSpec::new(format!("random{seed}"), x, y, rounds, terminals)
            .expect("generated protocol is well-formed")
    }

    /// A random (possibly correlated) input pmf matching the protocol.
    pub fn random_inputs(p: &ProtocolSpec, seed: u64, independent: bool) -> JointPMF {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nx = p.x_alphabet().len();
        let ny = p.y_alphabet().len();
        let mass: Vec<f64> = if independent {
            let mut px: Vec<f64> = (0..nx).map(|_| -rng.gen::<f64>().max(1e-9).ln()).collect();
            let mut py: Vec<f64> = (0..ny).map(|_| -rng.gen::<f64>().max(1e-9).ln()).collect();
            let (sx, sy): (f64, f64) = (px.iter().sum(), py.iter().sum());
            for v in &mut px {
                *v /= sx;
            }
            for v in &mut py {
                *v /= sy;
            }
            (0..nx * ny).map(|i| px[i / ny] * py[i % ny]).collect()
        } else {
            let mut m: Vec<f64> = (0..nx * ny)
                .map(|_| -rng.gen::<f64>().max(1e-9).ln())
                .collect();
            let total: f64 = m.iter().sum();
            for v in &mut m {
                *v /= total;
            }
            m
        };
        JointPMF::new(
            vec![
                Alphabet::numbered("X", nx),
                Alphabet::numbered("Y", ny),
            ],
            mass,
        )
        .unwrap()
    }

    /// A random total function on the protocol's input alphabets.
    pub fn random_function(p: &ProtocolSpec, seed: u64) -> FunctionSpec {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nx = p.x_alphabet().len();
        let ny = p.y_alphabet().len();
        let nz = rng.gen_range(1..=2);
        let table: Vec<usize> = (0..nx * ny).map(|_| rng.gen_range(0..nz)).collect();
        FunctionSpec::new(
            "random",
            Alphabet::numbered("X", nx),
            Alphabet::numbered("Y", ny),
            Alphabet::numbered("Z", nz),
            table,
        )
        .unwrap()
    }
}
