use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use dstsim_core::qtable::{merge_ranked, reward_query, update_query_q};
use dstsim_core::{NeighbourQTable, Outcome, PeerId, PowerPeerQTable, QValue, QueryQTable};

fn tables(n: u32) -> (NeighbourQTable, PowerPeerQTable) {
    let nq = (0..n)
        .map(|i| (PeerId(i), QValue::new((i * 37 % 101) as f64)))
        .collect();
    let pq = (n / 2..n + n / 2)
        .map(|i| (PeerId(i), QValue::new((i * 53 % 211) as f64)))
        .collect();
    (nq, pq)
}

fn formulas(c: &mut Criterion) {
    c.bench_function("reward_and_update", |b| {
        let mut q = QValue::new(300.0);
        b.iter(|| {
            let r = reward_query(black_box(6), black_box(3), black_box(2), 0.4, 0.6).unwrap();
            q = update_query_q(q, r, 0.2, Outcome::Hit);
            q
        })
    });

    let mut g = c.benchmark_group("merge_ranked");
    for n in [4u32, 16, 64] {
        let (nq, pq) = tables(n);
        g.bench_function(format!("{n}"), |b| b.iter(|| merge_ranked(&nq, &pq, |p| p.0 % 7 != 0)));
    }
    g.finish();

    let (nq, _) = tables(8);
    c.bench_function("query_table_churn", |b| {
        b.iter_batched(
            || QueryQTable::with_capacity(64),
            |mut t| {
                for tick in 0..512u64 {
                    t.insert_keyword((tick * 7 % 200) as u32, &nq, tick);
                }
                t
            },
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, formulas);
criterion_main!(benches);
