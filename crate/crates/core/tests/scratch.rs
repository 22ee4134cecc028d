// temporary diagnostics; removed before release
use icbound::graph::CharGraph;
use icbound::prob::{Alphabet, JointPMF};
use icbound::wyner::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn gen_instance(rng: &mut ChaCha8Rng) -> Option<JointPMF> {
    let n = rng.gen_range(2..=3);
    let m = rng.gen_range(2..=3);
    let mut mass = vec![0.0; n * m];
    for e in &mut mass {
        if rng.gen::<f64>() < 0.6 {
            *e = rng.gen::<f64>().max(0.05);
        }
    }
    let total: f64 = mass.iter().sum();
    if total <= 0.0 {
        return None;
    }
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
#[ignore]
fn diag() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let mut done = 0;
    while done < 50 {
        let pmf = match gen_instance(&mut rng) {
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
        if ![1usize, 5, 30, 33, 38].contains(&done) {
            done += 1;
            continue;
        }
        println!("=== instance {done} ===");
        println!("{}", pmf.to_file_string());
        for (ci, c) in dec.classes().iter().enumerate() {
            println!("  class {ci}: {:?} x {:?}", c.left_set, c.right_set);
        }
        let relax = relaxed_sup_upper_bound(&pmf, &dec).unwrap().value;
        println!("  relax: {relax}");
        for restarts in [8u32, 32] {
            for iters in [300u32, 1000] {
                let cfg = SearchConfig {
                    seed: done as u64 + 1,
                    restarts,
                    iters_per_stage: iters,
                    ..SearchConfig::default()
                };
                let s = achievability_search(&pmf, &dec, &cfg).unwrap();
                println!(
                    "  search r{restarts} i{iters}: {} (marg {:.1e} markov {:.1e})",
                    s.value, s.marginal_residual, s.markov_residual
                );
            }
        }
        for starts in [16u32, 64] {
            let cfg = OracleConfig {
                starts,
                ..OracleConfig::default()
            };
            let o = brute_force_oracle(&pmf, &cfg).unwrap();
            println!(
                "  oracle s{starts}: {} (marg {:.1e} markov {:.1e})",
                o.value, o.marginal_residual, o.markov_residual
            );
        }
        done += 1;
    }
}
