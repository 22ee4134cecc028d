//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use icbound::bounds::{ic_lower_bound, ic_lower_bound_eq, joint_with_function, lift_to_uv, FunctionSpec};
use icbound::eq;
use icbound::graph::CharGraph;
use icbound::prob::{Alphabet, JointPMF};
use icbound::protocol::{self, transcript_distribution, ProtocolSpec};
use icbound::wyner::{
    achievability_search, brute_force_oracle, eq_optimal_q, eq_sup_closed_form,
    relaxed_sup_upper_bound, OracleConfig, SearchConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use std::time::Instant;

fn verdict(n: &str, ok: bool, desc: &str) {
    println!("ACCEPTANCE {n} {}: {desc}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "acceptance criterion {n} failed: {desc}");
}

const TERNARY_IC: f64 = 2.5032583347756456; // 2 log2 3 - 2/3

#[test]
fn acceptance_1_ternary_eq_tightness() {
    let start = Instant::now();

    let closed = ic_lower_bound_eq(3).unwrap().ic_lower;
    let pmf = eq::uniform_xy(3);
    let f = FunctionSpec::eq(3);
    let lifted = lift_to_uv(&pmf, &f).unwrap();
    let dec = CharGraph::build(&lifted).unwrap().maximal_bicliques().unwrap();
    let sup = relaxed_sup_upper_bound(&lifted, &dec).unwrap();
    let pipeline = ic_lower_bound(&pmf, &f, &sup).unwrap().ic_lower;

    let (p, ppmf, pf) = ProtocolSpec::builtin("ternary_eq").unwrap();
    let cost = transcript_distribution(&p, &ppmf, &pf)
        .unwrap()
        .information_cost()
        .unwrap();

    let elapsed = start.elapsed();
    let ok = (closed - TERNARY_IC).abs() < 1e-9
        && (pipeline - TERNARY_IC).abs() < 1e-9
        && (cost - TERNARY_IC).abs() < 1e-9
        && (cost - pipeline).abs() < 1e-9
        && elapsed.as_secs_f64() < 1.0;
    verdict(
        "1",
        ok,
        &format!(
            "ternary EQ tight at {pipeline:.9} (cost {cost:.9}, gap {:.2e}, {:?})",
            cost - pipeline,
            elapsed
        ),
    );
}

#[test]
fn acceptance_2_two_bit_eq() {
    let pmf = eq::uniform_xy(4);
    let f = FunctionSpec::eq(4);
    let lifted = lift_to_uv(&pmf, &f).unwrap();
    let dec = CharGraph::build(&lifted).unwrap().maximal_bicliques().unwrap();
    let sup = relaxed_sup_upper_bound(&lifted, &dec).unwrap();
    let ic_lower = ic_lower_bound(&pmf, &f, &sup).unwrap().ic_lower;

    let (p, ppmf, pf) = ProtocolSpec::builtin("two_bit_eq_randomized").unwrap();
    let td = transcript_distribution(&p, &ppmf, &pf).unwrap();
    let (i_x_m_y, i_y_m_x) = td.information_cost_components().unwrap();

    let ok = (sup.value - 1.5).abs() < 1e-12
        && (ic_lower - 2.5).abs() < 1e-9
        && (i_x_m_y + i_y_m_x - 2.75).abs() < 1e-9
        && (i_x_m_y - 1.75).abs() < 1e-9
        && (i_y_m_x - 1.0).abs() < 1e-9
        && dec.num_classes() == 18;
    verdict(
        "2",
        ok,
        &format!(
            "2-bit EQ: sup {} classes {} ic_lower {ic_lower} cost {} ({i_x_m_y} + {i_y_m_x})",
            sup.value,
            dec.num_classes(),
            i_x_m_y + i_y_m_x
        ),
    );
}

#[test]
fn acceptance_3_eq_family() {
    let mut ok = true;
    for k in 2..=7u64 {
        let pmf = eq::uv_pmf(k as usize);
        let dec = CharGraph::build(&pmf).unwrap().maximal_bicliques().unwrap();
        ok &= dec.num_classes() as u64 == eq::class_count(k);

        let relax = relaxed_sup_upper_bound(&pmf, &dec).unwrap().value;
        let closed = eq_sup_closed_form(k).unwrap();
        let q = eq_optimal_q(k).unwrap();
        let res = q.residuals();
        let achieved = q.objective().unwrap();
        ok &= (relax - closed).abs() < 1e-9;
        ok &= (achieved - closed).abs() < 1e-9;
        ok &= res.max_marginal < 1e-12 && res.max_markov < 1e-12;
    }
    ok &= (ic_lower_bound_eq(4).unwrap().ic_lower - 2.5).abs() < 1e-9;
    ok &= (ic_lower_bound_eq(3).unwrap().ic_lower - TERNARY_IC).abs() < 1e-9;
    verdict(
        "3",
        ok,
        "EQ family k=2..7: class counts, relax = closed form = optimal-Q objective, residuals < 1e-12",
    );
}

#[test]
fn acceptance_3_eq_family_limit() {
    // Conclusion limit: the bound converges to 2; the criterion pins
    // ic_lower_bound_eq(2^16) - 2 < 3e-4.  The closed form gives exactly
    // 2 + (2/k) log2(k/2) = 2 + 30/65536 = 2 + 4.58e-4 at k = 2^16.
    let v = ic_lower_bound_eq(1 << 16).unwrap().ic_lower;
    let ok = v - 2.0 < 3e-4;
    verdict(
        "3-limit",
        ok,
        &format!("ic_lower_bound_eq(2^16) - 2 = {:.9e} < 3e-4", v - 2.0),
    );
}

#[test]
fn acceptance_4_merge_monotonicity() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut trials = 0;
    let mut ok = true;
    while trials < 500 {
        let n = rng.gen_range(2..=4);
        let m = rng.gen_range(2..=4);
        let mut mass = vec![0.0; n * m];
        for e in &mut mass {
            if rng.gen::<f64>() < 0.65 {
                *e = rng.gen::<f64>().max(1e-3);
            }
        }
        let total: f64 = mass.iter().sum();
        if total <= 0.0 {
            continue;
        }
        for e in &mut mass {
            *e /= total;
        }
        let pmf = JointPMF::new(
            vec![Alphabet::numbered("U", n), Alphabet::numbered("V", m)],
            mass,
        )
        .unwrap()
        .validate()
        .unwrap();
        let graph = match CharGraph::build(&pmf) {
            Ok(g) if g.num_edges() > 0 => g,
            _ => continue,
        };
        let dec = Arc::new(graph.maximal_bicliques().unwrap());

        // random feasible splits, then split one class into two symbols
        let theta: Vec<Vec<f64>> = (0..dec.graph().num_edges())
            .map(|e| {
                let d = dec.membership(e).len();
                let mut t: Vec<f64> = (0..d).map(|_| rng.gen::<f64>().max(1e-9)).collect();
                let s: f64 = t.iter().sum();
                for x in &mut t {
                    *x /= s;
                }
                t
            })
            .collect();
        let mut q = icbound::wyner::QAssignment::from_splits(Arc::clone(&dec), &theta);
        let target = rng.gen_range(0..q.symbols().len());
        if q.symbol_weight(target) <= 0.0 {
            continue;
        }
        let mut dup = q.symbols()[target].clone();
        for (slot, mass) in dup.mass.iter_mut().enumerate() {
            let f: f64 = rng.gen();
            let keep = *mass * f;
            q.symbols_mut()[target].mass[slot] -= keep;
            *mass = keep;
        }
        let dup_index = q.symbols().len();
        q.symbols_mut().push(dup);

        let before = q.objective().unwrap();
        let merged = q.merge_same_class(target, dup_index).unwrap();
        let after = merged.objective().unwrap();
        if after < before - 1e-12 {
            ok = false;
            eprintln!("merge decreased objective: {before} -> {after} (trial {trials})");
        }
        trials += 1;
    }
    verdict("4", ok, "500 random duplicated-class merges never decreased the objective");
}

/// Random tiny instance on which the class-restricted sup problem is
/// well-posed: draw a support graph, then draw a full-support product
/// distribution per maximal-biclique class, and let the pmf be the mixture.
/// Every edge is covered and the generating assignment is itself feasible.
fn random_feasible_instance(rng: &mut ChaCha8Rng) -> Option<JointPMF> {
    let n = rng.gen_range(2..=3);
    let m = rng.gen_range(2..=3);
    let mut support = vec![false; n * m];
    for s in &mut support {
        *s = rng.gen::<f64>() < 0.6;
    }
    if !support.iter().any(|&s| s) {
        return None;
    }
    // decompose the support pattern
    let probe_mass: Vec<f64> = support
        .iter()
        .map(|&s| if s { 1.0 } else { 0.0 })
        .collect();
    let total: f64 = probe_mass.iter().sum();
    let probe = JointPMF::new(
        vec![Alphabet::numbered("U", n), Alphabet::numbered("V", m)],
        probe_mass.iter().map(|&x| x / total).collect(),
    )
    .unwrap();
    let graph = CharGraph::build(&probe).ok()?;
    let dec = graph.maximal_bicliques().ok()?;
    if dec.num_classes() > 4 {
        return None;
    }
    // random full-support product assignment over the classes
    let mut mass = vec![0.0; n * m];
    for class in dec.classes() {
        let w: f64 = rng.gen_range(0.2..1.0);
        let alpha: Vec<f64> = (0..class.left_set.len())
            .map(|_| rng.gen_range(0.2..1.0))
            .collect();
        let beta: Vec<f64> = (0..class.right_set.len())
            .map(|_| rng.gen_range(0.2..1.0))
            .collect();
        let (sa, sb): (f64, f64) = (alpha.iter().sum(), beta.iter().sum());
        for (ui, &u) in class.left_set.iter().enumerate() {
            for (vi, &v) in class.right_set.iter().enumerate() {
                mass[u * m + v] += w * (alpha[ui] / sa) * (beta[vi] / sb);
            }
        }
    }
    let total: f64 = mass.iter().sum();
    for e in &mut mass {
        *e /= total;
    }
    JointPMF::new(
        vec![Alphabet::numbered("U", n), Alphabet::numbered("V", m)],
        mass,
    )
    .unwrap()
    .validate()
    .ok()
}

#[test]
fn acceptance_5_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let mut done = 0;
    let mut ok = true;
    let mut max_dev: f64 = 0.0;
    while done < 50 {
        let pmf = match random_feasible_instance(&mut rng) {
            Some(p) => p,
            None => continue,
        };
        let graph = match CharGraph::build(&pmf) {
            Ok(g) if g.num_edges() > 0 => g,
            _ => continue,
        };
        let dec = match graph.maximal_bicliques() {
            Ok(d) if d.num_classes() <= 4 => Arc::new(d),
            _ => continue,
        };

        let relax = relaxed_sup_upper_bound(&pmf, &dec).unwrap().value;
        let cfg = SearchConfig {
            seed: done as u64 + 1,
            restarts: 8,
            iters_per_stage: 300,
            ..SearchConfig::default()
        };
        let search = achievability_search(&pmf, &dec, &cfg).unwrap().value;
        let oracle = match brute_force_oracle(&pmf, &OracleConfig::default()) {
            Ok(s) => s.value,
            Err(_) => continue,
        };

        let dev = (search - oracle).abs();
        max_dev = max_dev.max(dev);
        if dev > 1e-3 {
            ok = false;
            eprintln!(
                "instance {done}: search {search} vs oracle {oracle} (dev {dev:.2e})\n{}",
                pmf.to_file_string()
            );
        }
        if search > relax + 1e-9 || oracle > relax + 1e-9 {
            ok = false;
            eprintln!("instance {done}: bound order violated ({search}, {oracle}) vs {relax}");
        }
        done += 1;
    }
    let elapsed = start.elapsed();
    ok &= elapsed.as_secs_f64() < 60.0;
    verdict(
        "5",
        ok,
        &format!("50 tiny instances: search vs oracle max dev {max_dev:.2e}, {elapsed:?}"),
    );
}

#[test]
fn acceptance_6_protocol_properties() {
    let mut ok = true;
    for seed in 0..100u64 {
        let p = protocol::gen::random_protocol(seed);
        let f = protocol::gen::random_function(&p, seed ^ 0x5A5A);
        // correlated and independent inputs both satisfy the structural laws
        for independent in [false, true] {
            let pmf = protocol::gen::random_inputs(&p, seed ^ 0xC0C0, independent);
            let td = transcript_distribution(&p, &pmf, &f).unwrap();
            for r in td.verify_round_markov().unwrap() {
                if r > 1e-12 {
                    ok = false;
                    eprintln!("seed {seed}: round Markov residual {r:.2e}");
                }
            }
            if td.verify_monotonicity().is_err() {
                ok = false;
                eprintln!("seed {seed}: monotonicity violated");
            }
            let total: f64 = td.paths().iter().map(|r| r.prob).sum();
            if (total - 1.0).abs() > 1e-12 {
                ok = false;
                eprintln!("seed {seed}: path mass {total}");
            }
        }
    }
    for name in ["ternary_eq", "two_bit_eq_randomized"] {
        let (p, pmf, f) = ProtocolSpec::builtin(name).unwrap();
        let td = transcript_distribution(&p, &pmf, &f).unwrap();
        let chain = td.verify_appendix_chain().unwrap();
        if chain > 1e-12 {
            ok = false;
            eprintln!("{name}: appendix chain {chain:.2e}");
        }
        let hm = td.hm_chain_check().unwrap();
        if !hm.chain_ok {
            ok = false;
            eprintln!("{name}: H(M) chain violated: {hm:?}");
        }
    }
    verdict(
        "6",
        ok,
        "100 random protocols: Markov residuals <= 1e-12, monotone information, mass conserved; builtins: appendix chain and H(M) chain hold",
    );
}

#[test]
fn acceptance_7_two_form_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let mut done = 0;
    let mut ok = true;
    let mut max_dev: f64 = 0.0;
    while done < 20 {
        let nx = rng.gen_range(2..=3);
        let ny = rng.gen_range(2..=3);
        let mut px: Vec<f64> = (0..nx).map(|_| rng.gen::<f64>().max(0.05)).collect();
        let mut py: Vec<f64> = (0..ny).map(|_| rng.gen::<f64>().max(0.05)).collect();
        let (sx, sy): (f64, f64) = (px.iter().sum(), py.iter().sum());
        px.iter_mut().for_each(|v| *v /= sx);
        py.iter_mut().for_each(|v| *v /= sy);
        let mass: Vec<f64> = (0..nx * ny).map(|i| px[i / ny] * py[i % ny]).collect();
        let pmf = JointPMF::new(
            vec![Alphabet::numbered("X", nx), Alphabet::numbered("Y", ny)],
            mass,
        )
        .unwrap()
        .validate()
        .unwrap();
        let nz = rng.gen_range(1..=2);
        let table: Vec<usize> = (0..nx * ny).map(|_| rng.gen_range(0..nz)).collect();
        let f = FunctionSpec::new(
            "t",
            Alphabet::numbered("X", nx),
            Alphabet::numbered("Y", ny),
            Alphabet::numbered("Z", nz),
            table,
        )
        .unwrap();

        let lifted = lift_to_uv(&pmf, &f).unwrap();
        let sup = match brute_force_oracle(&lifted, &OracleConfig::default()) {
            Ok(s) => s,
            Err(_) => continue,
        };
        // Eq-9 assembly (also runs the library's internal cross-check)
        let report = match ic_lower_bound(&pmf, &f, &sup) {
            Ok(r) => r,
            Err(e) => {
                ok = false;
                eprintln!("instance {done}: bound assembly failed: {e}");
                done += 1;
                continue;
            }
        };
        // tension-form assembly, recomputed here
        let h_uv = lifted.conditional_entropy(&["U"], &["V"]).unwrap();
        let h_vu = lifted.conditional_entropy(&["V"], &["U"]).unwrap();
        let xyz = joint_with_function(&pmf, &f).unwrap();
        let alt = (h_uv + h_vu - sup.value)
            + xyz
                .conditional_mutual_information(&["X"], &["Z"], &["Y"])
                .unwrap()
            + xyz
                .conditional_mutual_information(&["Y"], &["Z"], &["X"])
                .unwrap();
        let dev = (report.ic_lower - alt).abs();
        max_dev = max_dev.max(dev);
        if dev > 1e-6 {
            ok = false;
            eprintln!("instance {done}: forms disagree by {dev:.2e}");
        }
        done += 1;
    }
    verdict(
        "7",
        ok,
        &format!("20 oracle-solved independent instances: two bound forms agree, max dev {max_dev:.2e}"),
    );
}

#[test]
fn acceptance_8_cli_determinism() {
    let bin = env!("CARGO_BIN_EXE_icbound");
    let dir = tempfile::tempdir().unwrap();
    let uv_path = dir.path().join("ternary_uv.pmf");
    std::fs::write(&uv_path, eq::uv_pmf(3).to_file_string()).unwrap();
    let xy_path = dir.path().join("uniform3.pmf");
    std::fs::write(&xy_path, eq::uniform_xy(3).to_file_string()).unwrap();
    let fn_path = dir.path().join("eq3.fn");
    std::fs::write(&fn_path, FunctionSpec::eq(3).to_file_string()).unwrap();

    let uv = uv_path.to_str().unwrap();
    let xy = xy_path.to_str().unwrap();
    let fnp = fn_path.to_str().unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec!["report", "eq", "--k-max", "4"],
        vec!["bicliques", "--input", uv],
        vec!["sup", "relax", "--input", uv],
        vec![
            "sup", "search", "--input", uv, "--seed", "7", "--restarts", "8",
        ],
        vec!["sup", "oracle", "--input", uv],
        vec![
            "ic-bound", "dist", "--input", xy, "--function", fnp, "--restarts", "4",
        ],
        vec!["protocol", "cost", "--name", "two_bit_eq_randomized", "--checks", "all"],
    ];
    let mut ok = true;
    for args in &commands {
        let run = |label: &str| {
            let out = std::process::Command::new(bin)
                .args(args)
                .output()
                .unwrap_or_else(|e| panic!("failed to launch {bin} ({label}): {e}"));
            assert!(
                out.status.success(),
                "command {:?} failed: {}",
                args,
                String::from_utf8_lossy(&out.stderr)
            );
            out.stdout
        };
        let first = run("first");
        let second = run("second");
        if first != second {
            ok = false;
            eprintln!("command {args:?} was not deterministic");
        }
    }
    verdict("8", ok, "repeated CLI invocations are byte-identical");
}
