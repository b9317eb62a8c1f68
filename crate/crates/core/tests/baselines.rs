mod common;

use streamcover::baselines::{run_2p, run_bmkk, run_sg};
use streamcover::SetStream;

use common::{instance_family, union_size};

fn sets_of(s: &SetStream) -> Vec<Vec<u64>> {
    s.pass().unwrap().map(|r| r.unwrap().elements).collect()
}

#[test]
fn ratios_against_exhaustive_optimum() {
    for inst in instance_family(50, 12, 4242) {
        let s = SetStream::from_sets(inst.sets.clone());
        let opt = inst.opt as f64;
        let sg = run_sg(&s, inst.k).unwrap();
        assert!(sg.coverage_exact as f64 >= 0.25 * opt);
        for eps in [0.1, 0.25, 0.4] {
            let b = run_bmkk(&s, inst.k, eps).unwrap();
            assert!(
                b.coverage_exact as f64 >= (0.5 - eps) * opt,
                "{inst:?} eps={eps}"
            );
        }
    }
}

#[test]
fn results_are_consistent_and_pass_counts_fixed() {
    for inst in instance_family(30, 12, 17) {
        for (name, expected) in [("sg", 2), ("bmkk", 2), ("2p", 3)] {
            let s = SetStream::from_sets(inst.sets.clone());
            let r = match name {
                "sg" => run_sg(&s, inst.k),
                "bmkk" => run_bmkk(&s, inst.k, 0.25),
                _ => run_2p(&s, inst.k, 0.25),
            }
            .unwrap();
            assert!(r.solution.len() <= inst.k, "{name}");
            assert_eq!(
                r.coverage_exact,
                union_size(&inst.sets, &r.solution),
                "{name}"
            );
            assert_eq!(r.passes_used, expected, "{name}");
            assert_eq!(s.passes_started(), expected, "{name}");
        }
    }
}

#[test]
fn two_pass_usually_beats_single_pass_sieve() {
    let mut wins = 0;
    for seed in 0..50 {
        let s =
            SetStream::open(&format!("synth:n=3000,m=250,size=zipf:1.4:200,seed={seed}")).unwrap();
        let k = [4, 8, 16][seed as usize % 3];
        let two = run_2p(&s, k, 0.25).unwrap().coverage_exact;
        let one = run_bmkk(&s, k, 0.25).unwrap().coverage_exact;
        if two >= one {
            wins += 1;
        }
    }
    assert!(wins >= 45, "{wins}/50");
}

#[test]
fn two_pass_with_room_for_everything_covers_everything() {
    for seed in 0..10 {
        let s =
            SetStream::open(&format!("synth:n=500,m=30,size=uniform:1:25,seed={seed}")).unwrap();
        let sets = sets_of(&s);
        let all: Vec<usize> = (0..sets.len()).collect();
        let r = run_2p(&s, 40, 0.25).unwrap();
        assert_eq!(r.coverage_exact, union_size(&sets, &all));
    }
}

/// SG's state after i + 1 sets is its state after i sets plus at most one
/// admission or swap, so coverage over growing prefixes must not drop.
#[test]
fn swaps_never_lose_coverage() {
    for seed in 0..8 {
        let s = SetStream::open(&format!("synth:n=400,m=60,size=zipf:1.2:80,seed={seed}")).unwrap();
        let sets = sets_of(&s);
        for k in [1, 3, 6] {
            let mut last = 0;
            for end in 1..=sets.len() {
                let prefix = SetStream::from_sets(sets[..end].to_vec());
                let cov = run_sg(&prefix, k).unwrap().coverage_exact;
                assert!(
                    cov >= last,
                    "seed {seed} k {k} prefix {end}: {cov} < {last}"
                );
                last = cov;
            }
        }
    }
}

#[test]
fn rejects_bad_parameters() {
    let s = SetStream::from_sets([vec![1u64]]);
    assert!(run_sg(&s, 0).is_err());
    assert!(run_bmkk(&s, 2, 0.0).is_err());
    assert!(run_2p(&s, 2, 1.0).is_err());
}
