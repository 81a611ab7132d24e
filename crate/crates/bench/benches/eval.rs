use criterion::{criterion_group, criterion_main, Criterion};
use fixtures::outputs;
use ruleparse_core::eval::{randomization_test, score, Metric};

mod fixtures {
    use ruleparse_bench::treebank;
    use ruleparse_core::Sentence;

    /// Gold plus `k` system outputs that each move every `k + 2`-th word
    /// onto the root word.
    pub fn outputs(count: usize, k: usize) -> (Vec<Sentence>, Vec<Vec<Sentence>>) {
        let gold = treebank(count).0;
        let systems = (0..k)
            .map(|j| {
                gold.iter()
                    .cloned()
                    .map(|mut s| {
                        let root = s.tokens.iter().find(|t| t.head == Some(0)).map(|t| t.id).unwrap();
                        for t in &mut s.tokens {
                            if t.id != root && t.id % (j + 2) == 0 {
                                t.head = Some(root);
                            }
                        }
                        s
                    })
                    .collect()
            })
            .collect();
        (gold, systems)
    }
}

fn eval(c: &mut Criterion) {
    let (gold, systems) = outputs(1_000, 5);
    c.bench_function("score_1000", |b| b.iter(|| score(&gold, &systems[0]).unwrap()));
    let mut group = c.benchmark_group("sigtest");
    group.sample_size(10);
    group.bench_function("1x1_10000", |b| {
        b.iter(|| randomization_test(&gold, &systems[..1], &systems[1..2], 10_000, Metric::Uas, 1).unwrap())
    });
    group.bench_function("5x5_1000", |b| {
        b.iter(|| randomization_test(&gold, &systems, &systems, 1_000, Metric::Las, 1).unwrap())
    });
    group.finish();
}

criterion_group!(benches, eval);
criterion_main!(benches);
